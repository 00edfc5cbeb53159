import math

import numpy as np
import pytest

from dvcv_teleport import fock, optics
from dvcv_teleport.demodulation import (
    AMQubit,
    demod_displacement,
    demod_swap,
    initially_am_dual,
    initially_am_dual_total_reference,
    initially_am_single,
    overall_success,
    overall_success_report,
    q_best,
    q_displacement_chain,
    q_swap,
    solve_gamma,
)
from dvcv_teleport.displaced import matrix_element, overall_factor
from dvcv_teleport.fock import QubitState, fidelity
from dvcv_teleport.protocol import direct_success_probability

INV_SQRT2 = 1 / math.sqrt(2)
GOLDEN = (math.sqrt(5) - 1) / 2


def am_as_fock(am, modes, n_max2=1):
    v = am.physical_amplitudes()
    amps = np.zeros((2, n_max2 + 1), dtype=complex)
    amps[0, 1] = v[0]
    amps[1, 0] = v[1]
    return fock.FockState(modes, amps, fock.TruncationConfig((1, n_max2)))


# -- roots --------------------------------------------------------------------

def test_solve_gamma_golden_ratio():
    roots = solve_gamma(1.0, 1)
    assert any(abs(g - GOLDEN) < 1e-12 for g in roots)
    assert all(abs(abs(g) - GOLDEN) < 1e-12 or abs(abs(g) - 1 / GOLDEN) < 1e-12
               for g in roots)


def test_solve_gamma_vacuum_count():
    roots = solve_gamma(-1 / 3, 0)
    assert sorted(abs(g) for g in roots) == pytest.approx([1 / 3, 1 / 3])
    # generic factor: the only root magnitude is |A|
    for a in (0.4, -2.2, 5.0):
        assert {round(abs(g), 12) for g in solve_gamma(a, 0)} == {
            round(abs(a), 12)}


def test_solve_gamma_window_and_validation():
    assert solve_gamma(20.0, 0, gamma_max=8.0) == []
    with pytest.raises(ValueError):
        solve_gamma(0.0, 1)
    with pytest.raises(ValueError):
        solve_gamma(1.0, -1)


def test_roots_satisfy_condition():
    for a in (-3.0, -1 / 3, 0.7, 2.5):
        for n in range(4):
            for g in solve_gamma(a, n):
                ratio = g / (n - g * g)
                assert abs(abs(a * ratio) - 1.0) < 1e-10


# -- displacement route ---------------------------------------------------------

def test_displacement_clean_factor_example():
    am = AMQubit(math.sqrt(0.5), math.sqrt(0.5), 1.0)
    res = demod_displacement(am, 0)
    assert abs(res.gamma) == pytest.approx(1.0)
    assert res.success_probability == pytest.approx(math.exp(-1), abs=1e-15)
    assert res.residual_factor == 1.0


def test_displacement_restores_exact_state():
    rng = np.random.default_rng(6)
    for _ in range(6):
        x = rng.uniform(0.1, 0.9)
        am = AMQubit(math.sqrt(1 - x),
                     math.sqrt(x) * np.exp(1j * rng.uniform(0, 2 * math.pi)),
                     -1 / 3)
        res = demod_displacement(am, 0)
        want = QubitState(am.a0, res.sign * am.a1)
        assert fidelity(res.restored, want) > 1 - 1e-12
        # full optical composition as the oracle
        d2 = 1 + int(10 * abs(res.gamma)) + 14
        st = am_as_fock(am, ("one", "two"), n_max2=d2)
        st = optics.displacement_unitary(st, "two", res.gamma)
        red, prob = fock.project_number(st, "two", 0)
        got = QubitState(red.amps[0], red.amps[1])
        assert fidelity(got, want) > 1 - 1e-9
        assert prob * am.norm_weight() ** -2 == pytest.approx(
            res.success_probability, abs=1e-10)


def test_displacement_residual_factors():
    am = AMQubit(1, 1, -1.0)
    res = demod_displacement(am, 0)
    g = res.gamma
    for p, weight, child in res.residuals:
        expect = am.factor * matrix_element(0, p, g) / matrix_element(1, p, g)
        assert child.factor == pytest.approx(expect, abs=1e-12)
        assert weight == pytest.approx(
            overall_factor(g) ** 2 * matrix_element(1, p, g) ** 2)
    # weights of target and residuals tile the count distribution
    total = res.success_probability + sum(w for _, w, _ in res.residuals)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_displacement_no_root():
    am = AMQubit(1, 1, 20.0)
    res = demod_displacement(am, 0, gamma_max=8.0)
    assert res.restored is None
    assert res.success_probability == 0.0
    assert res.residual_factor == 20.0


def test_trivial_qubit_restored_regardless():
    am = AMQubit(1, 0, -1 / 3)
    res = demod_displacement(am, 0)
    assert fidelity(res.restored, QubitState(1, 0)) == pytest.approx(1.0)


# -- swap route -----------------------------------------------------------------

def test_swap_success_values():
    assert demod_swap(AMQubit(1, 1, 3.0)).success_probability == pytest.approx(0.9)
    assert demod_swap(AMQubit(1, 1, 1.0)).success_probability == pytest.approx(0.5)
    assert demod_swap(AMQubit(1, 1, 1 / 3)).success_probability == pytest.approx(0.1)
    with pytest.raises(ValueError):
        demod_swap(AMQubit(1, 1, 0.0))


def test_swap_composition_oracle():
    # balanced splitter between the modulated qubit and the prearranged
    # partner; both heralds restore the state (one up to a Z)
    a_factor = -2.0
    am = AMQubit(math.sqrt(0.7), math.sqrt(0.3) * np.exp(0.4j), a_factor)
    st = am_as_fock(am, ("m1", "m2"))
    pre = np.array([a_factor, 1.0]) / math.sqrt(1 + a_factor ** 2)
    amps = np.zeros((2, 2), dtype=complex)
    amps[0, 1] = pre[0]
    amps[1, 0] = pre[1]
    partner = fock.FockState(("m3", "m4"), amps, fock.TruncationConfig((1, 1)))
    joint = fock.tensor(st, partner)
    joint = optics.pad_mode(optics.pad_mode(joint, "m2", 2), "m3", 2)
    out = optics.apply_bs(joint, "m2", "m3", optics.BeamSplitterParams.balanced())
    success = 0.0
    for n2, n3, z in ((0, 1, 1.0), (1, 0, -1.0)):
        s1, p1 = fock.project_number(out, "m2", n2)
        s2, p2 = fock.project_number(s1, "m3", n3)
        got = QubitState(s2.amps[0, 1], z * s2.amps[1, 0])
        assert fidelity(got, QubitState(am.a0, am.a1)) > 1 - 1e-12
        success += p1 * p2
    assert success * am.norm_weight() ** -2 == pytest.approx(
        q_swap(a_factor), abs=1e-12)


# -- policy values ---------------------------------------------------------------

def test_chain_values_monotone_in_depth():
    for a in (-1.0, -1 / 3, 2.0):
        q1 = q_displacement_chain(a, 1)
        q3 = q_displacement_chain(a, 3)
        assert q3 >= q1 - 1e-12
        assert q_best(a, 3) >= max(q3, q_swap(a)) - 1e-9


def test_chain_first_step_matches_best_root():
    # depth one equals the best single displacement attempt over targets
    a = -1.0
    q1 = q_displacement_chain(a, 1)
    direct = max(
        overall_factor(g) ** 2 * matrix_element(1, n, g) ** 2
        for n in range(9) for g in solve_gamma(a, n)
    )
    assert q1 == pytest.approx(direct, abs=1e-6)


def test_overall_skip_is_direct():
    for alpha in (0.5, INV_SQRT2):
        assert overall_success(0, 1, alpha, policy="skip") == pytest.approx(
            direct_success_probability(0, 1, alpha), abs=1e-15)


def test_overall_itemization_consistent():
    total, rows = overall_success_report(0, 1, 0.7, n_cut=12)
    recomputed = direct_success_probability(0, 1, 0.7, 12) + sum(
        r[4] * r[5] for r in rows)
    assert recomputed == pytest.approx(total, abs=1e-10)
    assert all(0.0 <= r[4] <= 1.0 for r in rows)


def test_overall_clean_promotion_at_operating_point():
    _, rows = overall_success_report(0, 1, INV_SQRT2, n_cut=8)
    by_counts = {(r[0], r[1]): r for r in rows}
    assert by_counts[(0, 1)][3] == "clean"
    assert by_counts[(1, 0)][3] == "clean"
    assert by_counts[(0, 2)][3] in ("swap", "displacement")


def test_overall_policies_ordered():
    alpha = 0.7
    skip = overall_success(0, 1, alpha, policy="skip")
    swap = overall_success(0, 1, alpha, policy="swap")
    best = overall_success(0, 1, alpha, policy="best")
    assert skip < swap <= best <= 1.0


def test_overall_callable_policy():
    picky = overall_success(
        0, 1, 0.7,
        policy=lambda n, m, A: "swap" if abs(A) > 1 else "skip")
    assert 0.0 < picky < overall_success(0, 1, 0.7, policy="swap")


def test_chain_depth_saturation():
    d3 = overall_success(0, 1, INV_SQRT2, chain_depth=3)
    d4 = overall_success(0, 1, INV_SQRT2, chain_depth=4)
    assert abs(d4 - d3) < 1e-3


def test_swap_probability_bounds():
    for a in (1e-4, 0.3, 1.0, 7.0, 1e4):
        q = q_swap(a)
        assert 0.0 < q < 1.0
    assert q_swap(1e6) > 1 - 1e-11
    assert q_swap(1e-6) < 1e-11


def test_demodulated_addition_never_exceeds_am_mass():
    from dvcv_teleport.protocol import am_probability
    for alpha in (0.4, INV_SQRT2, 1.0):
        for l, k in ((0, 1), (1, 2)):
            delta = (overall_success(l, k, alpha)
                     - direct_success_probability(l, k, alpha))
            assert -1e-12 <= delta <= am_probability(l, k, alpha) + 1e-12


# -- pre-modulated protocols ------------------------------------------------------

def test_initially_am_dual_clean_row():
    rows, total = initially_am_dual(math.sqrt(0.9), math.sqrt(0.1), 0.3)
    by_counts = {(r[0], r[1]): r for r in rows}
    assert by_counts[(0, 1)][4] == "clean"
    assert 0.0 < total <= 1.0
    # probabilities tile the outcome distribution
    assert sum(r[2] for r in rows) == pytest.approx(1.0, abs=1e-6)


def test_initially_am_dual_matches_reference_formula():
    a0, a1 = math.sqrt(0.8), math.sqrt(0.2)
    alpha = 0.35
    a_ref = -alpha ** 2 / (1 - alpha ** 2)
    base = a0 ** 2 + a1 ** 2 * a_ref ** 2
    a1_original = a1 * abs(a_ref) / math.sqrt(base)
    _, total = initially_am_dual(a0, a1, alpha)
    ref = initially_am_dual_total_reference(a1_original, alpha,
                                            fourth_term="first_principles")
    assert total == pytest.approx(ref, abs=1e-12)
    printed = initially_am_dual_total_reference(a1_original, alpha,
                                                fourth_term="as_printed")
    assert abs(printed - ref) > 1e-3  # the printed exponent genuinely differs


def test_initially_am_single_vacuum_clean():
    rows, total = initially_am_single(math.sqrt(0.84), 0.4, 0.5)
    assert rows[0][3] == "clean"
    assert rows[0][2] == pytest.approx(1.0, abs=1e-12)
    assert sum(r[1] for r in rows) == pytest.approx(1.0, abs=1e-6)
    assert 0.0 < total <= 1.0


def test_initially_am_behavior_small_alpha():
    grid = np.linspace(0.0, 1.0, 50)
    duals = [initially_am_dual(math.sqrt(max(0.0, 1 - x * x)), x, 0.2)[1]
             for x in grid]
    assert min(d for x, d in zip(grid, duals) if x <= 0.1) > 0.9
    assert all(duals[i + 1] <= duals[i] + 1e-12 for i in range(len(duals) - 1))
    for x in (0.02, 0.1, 0.2):
        a0 = math.sqrt(1 - x * x)
        assert (initially_am_single(a0, x, 0.2)[1]
                > initially_am_dual(a0, x, 0.2)[1])


def test_am_qubit_validation():
    with pytest.raises(ValueError):
        AMQubit(0, 0, 1.0)
    with pytest.raises(ValueError):
        AMQubit(1, 0, math.inf)
    am = AMQubit(2.0, 0, -0.5)
    assert abs(am.a0) == pytest.approx(1.0)
