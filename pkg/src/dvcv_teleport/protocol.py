"""Teleportation of a two-component Fock superposition through the hybrid
channel.

Two routes are provided.  The analytic route evaluates the closed-form
conditional states and outcome probabilities of the ideal (vanishing
reflectance) limit.  The brute-force route builds the actual optical
circuit at finite reflectance on truncated grids and serves as the
convergence oracle for the analytic one: the four-term expansion of the
input product state factorizes over the mode pairs carrying each beam
splitter, so no full six-mode tensor is ever materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .displaced import matrix_element_table, overall_factor, default_cutoff
from .fock import QubitState, number_state
from .optics import BeamSplitterParams, apply_bs
from . import displaced
from . import fock as _fock

DUAL_RAIL_BASIS = ("01", "10")

#: logical gates on the dual-rail basis (|01>, |10>) == (|0>_L, |1>_L)
Z_GATE = np.array([[1.0, 0.0], [0.0, -1.0]])
H_GATE = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


class SingularFactorError(ValueError):
    """A vanishing decomposition coefficient makes the amplitude factor
    undefined; the outcome is non-demodulatable."""


@dataclass(frozen=True)
class UnknownQubit:
    """The state to teleport: a0|lk> + a1|kl> (dual rail) or a0|l> + a1|k>
    (single rail), with l != k.

    The conditional sign structure of the protocol needs l - k odd;
    pass ``require_odd=False`` to build other superpositions anyway.
    """

    a0: complex
    a1: complex
    l: int = 0
    k: int = 1
    encoding: str = "dual_rail"

    def __init__(self, a0, a1, l=0, k=1, encoding="dual_rail", require_odd=True):
        if encoding not in ("dual_rail", "single_rail"):
            raise ValueError(f"unknown encoding {encoding!r}")
        if l < 0 or k < 0 or l == k:
            raise ValueError("need distinct nonnegative photon numbers l != k")
        if require_odd and (l - k) % 2 == 0:
            raise ValueError(
                "l - k must be odd for the conditional-sign teleportation; "
                "pass require_odd=False to construct the state regardless"
            )
        n = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
        if n == 0.0:
            raise ValueError("qubit has zero norm")
        object.__setattr__(self, "a0", complex(a0) / n)
        object.__setattr__(self, "a1", complex(a1) / n)
        object.__setattr__(self, "l", int(l))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "encoding", encoding)


@dataclass(frozen=True)
class Outcome:
    """One measurement record: the parity found on the coherent mode plus
    the photon counts in the auxiliary mode(s); ``m`` is absent for the
    single-rail variant."""

    parity: str
    n: int
    m: int | None = None

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.n < 0 or (self.m is not None and self.m < 0):
            raise ValueError("photon counts must be nonnegative")


@dataclass(frozen=True)
class TeleportRecord:
    """Receiver-side result for one outcome: the conditional state, its
    probability, the known amplitude factor picked up by a1, and the
    correction word undoing the conditional signs."""

    outcome: Outcome
    bob_state: QubitState
    probability: float
    amp_factor: float
    z_power: int
    corrected_state: QubitState


@dataclass(frozen=True)
class BruteForceRecord:
    """Like TeleportRecord but from the finite-reflectance circuit, where
    the conditional state is slightly mixed: ``rho`` is its 2x2 density
    matrix on the dual-rail basis and ``bob_state``/``corrected_state``
    are the dominant eigenvectors."""

    outcome: Outcome
    bob_state: QubitState
    probability: float
    amp_factor: float
    z_power: int
    corrected_state: QubitState
    rho: np.ndarray
    corrected_rho: np.ndarray
    purity: float


# -- amplitude factors -------------------------------------------------------

def amp_factor_dual(l: int, k: int, n: int, m: int, alpha: float,
                    alpha1: float | None = None) -> float:
    """Known multiplier acquired by a1 when the counts (n, m) are registered:
    c(k,n)c(l,m) / (c(l,n)c(k,m)).  Equal counts give exactly one when the
    two displacements match."""
    if alpha1 is None:
        alpha1 = alpha
    if n == m and alpha == alpha1:
        return 1.0
    table_a = matrix_element_table(max(l, k), max(n, m), alpha)
    table_b = table_a if alpha1 == alpha else matrix_element_table(max(l, k), max(n, m), alpha1)
    den = table_a.element(l, n) * table_b.element(k, m)
    if den == 0.0:
        raise SingularFactorError(
            f"c({l},{n};{alpha}) * c({k},{m};{alpha1}) vanishes; outcome ({n},{m}) "
            "is non-demodulatable"
        )
    return table_a.element(k, n) * table_b.element(l, m) / den


def amp_factor_single(l: int, k: int, n: int, alpha: float) -> float:
    """Single-rail analogue c(k,n)/c(l,n)."""
    table = matrix_element_table(max(l, k), n, alpha)
    den = table.element(l, n)
    if den == 0.0:
        raise SingularFactorError(
            f"c({l},{n};{alpha}) vanishes; outcome {n} is non-demodulatable"
        )
    return table.element(k, n) / den


def norm_factor(a1_abs: float, amp_factor: float) -> float:
    """(1 + (A^2 - 1)|a1|^2)^(-1/2), the conditional-state normalizer."""
    return (1.0 + (amp_factor ** 2 - 1.0) * a1_abs ** 2) ** -0.5


# -- conditional states and corrections --------------------------------------

def bob_states_dual(qubit: UnknownQubit, alpha: float, alpha1: float | None,
                    n: int, m: int):
    """Both parity branches of the conditional state for counts (n, m).

    Returns ``(even_branch, odd_branch, norm)``; the branches differ by a
    logical Z, and the correction word of :func:`correct` maps either onto
    ``(a0, a1 * A)`` up to normalization.
    """
    l, k = qubit.l, qubit.k
    if (l - k) % 2 == 0:
        raise ValueError("conditional-sign teleportation requires l - k odd")
    a_fac = amp_factor_dual(l, k, n, m, alpha, alpha1)
    nf = norm_factor(abs(qubit.a1), a_fac)
    plus = qubit.a0 + qubit.a1 * a_fac
    minus = qubit.a0 - qubit.a1 * a_fac
    sign_even = (-1.0) ** (n - l)
    even = QubitState(plus, sign_even * minus, DUAL_RAIL_BASIS)
    odd = QubitState(plus, -sign_even * minus, DUAL_RAIL_BASIS)
    return even, odd, nf


def z_power_for(parity: str, n: int, l: int) -> int:
    """Exponent of the Z gate in the correction word; only its parity
    matters since Z squares to the identity."""
    p = n - l if parity == "even" else n - l + 1
    return p % 2


def correct(bob: QubitState, parity: str, n: int, l: int) -> QubitState:
    """Apply H Z^p once; on a conditional branch this yields the known
    amplitude-modulated form (a0, a1 * A)."""
    p = z_power_for(parity, n, l)
    vec = H_GATE @ (np.linalg.matrix_power(Z_GATE, p) @ bob.vec())
    return QubitState(vec[0], vec[1], bob.basis)


# -- outcome probabilities ----------------------------------------------------

def outcome_probability_dual(qubit: UnknownQubit, l: int, k: int, n: int, m: int,
                             alpha: float, alpha1: float | None = None) -> float:
    """Probability of registering counts (n, m), either parity.

    Evaluated in the unreduced product form
    F^4 (|a0 c(l,n) c(k,m)|^2 + |a1 c(k,n) c(l,m)|^2), which stays finite
    on outcomes whose amplitude factor is singular.
    """
    if alpha1 is None:
        alpha1 = alpha
    ta = matrix_element_table(max(l, k), max(n, m), alpha)
    tb = ta if alpha1 == alpha else matrix_element_table(max(l, k), max(n, m), alpha1)
    f4 = overall_factor(alpha) ** 2 * overall_factor(alpha1) ** 2
    direct = abs(qubit.a0) ** 2 * (ta.element(l, n) * tb.element(k, m)) ** 2
    crossed = abs(qubit.a1) ** 2 * (ta.element(k, n) * tb.element(l, m)) ** 2
    return f4 * (direct + crossed)


def direct_success_probability(l: int, k: int, alpha: float, n_cut: int = 20) -> float:
    """Mass of the equal-count outcomes, where the output carries no
    amplitude factor; independent of the teleported superposition."""
    table = matrix_element_table(max(l, k), n_cut, alpha)
    f4 = overall_factor(alpha) ** 4
    return f4 * float(np.sum(table.c[l] ** 2 * table.c[k] ** 2))


def pair_sum_probability(l: int, k: int, n: int, m: int, alpha: float) -> float:
    """Probability of {(n, m), (m, n)} jointly; drops every dependence on
    the teleported superposition."""
    table = matrix_element_table(max(l, k), max(n, m), alpha)
    f4 = overall_factor(alpha) ** 4
    return f4 * (
        (table.element(l, n) * table.element(k, m)) ** 2
        + (table.element(l, m) * table.element(k, n)) ** 2
    )


def am_probability(l: int, k: int, alpha: float, n_cut: int = 20) -> float:
    """Mass of unequal-count outcomes (amplitude-modulated deliveries);
    complements direct_success_probability to one."""
    table = matrix_element_table(max(l, k), n_cut, alpha)
    f4 = overall_factor(alpha) ** 4
    cl2 = table.c[l] ** 2
    ck2 = table.c[k] ** 2
    total = float(np.sum(np.outer(cl2, ck2)))
    diag = float(np.sum(cl2 * ck2))
    return f4 * (total - diag)


def maximize_direct_success(l: int, k: int, lo: float = 0.05, hi: float = 1.5,
                            n_cut: int = 20, xtol: float = 1e-8):
    """Locate the displacement maximizing the direct success mass by
    golden-section search (bracketed on a coarse scan first)."""
    grid = np.linspace(lo, hi, 61)
    vals = [direct_success_probability(l, k, a, n_cut) for a in grid]
    i = int(np.argmax(vals))
    i = min(max(i, 1), len(grid) - 2)
    res = minimize_scalar(
        lambda a: -direct_success_probability(l, k, a, n_cut),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        options={"xtol": xtol},
    )
    return float(res.x), float(-res.fun)


def solve_amp_factor_alpha(l: int, k: int, n: int, m: int, target: float,
                           lo: float, hi: float) -> float:
    """Displacement amplitude at which the (n, m) factor crosses ``target``
    (the protocol's preferred operating points sit on such roots)."""
    def g(a):
        return amp_factor_dual(l, k, n, m, a) - target
    return float(brentq(g, lo, hi, xtol=1e-12))


# -- analytic pipelines -------------------------------------------------------

def dual_rail_records(qubit: UnknownQubit, alpha: float, alpha1: float | None = None,
                      n_cut: int = 8, m_cut: int = 8) -> list[TeleportRecord]:
    """Enumerate the conditional records of the ideal dual-rail protocol in
    lexicographic (parity, n, m) order.

    The two parities of one (n, m) share its probability equally (the
    strong-amplitude limit of the channel); summed over everything the
    probabilities approach one as the cuts grow.  Outcomes with a singular
    amplitude factor are omitted (non-demodulatable); their probability is
    still available through outcome_probability_dual.
    """
    if qubit.encoding != "dual_rail":
        raise ValueError("dual_rail_records expects a dual-rail qubit")
    records = []
    for parity in ("even", "odd"):
        for n in range(n_cut + 1):
            for m in range(m_cut + 1):
                p_nm = outcome_probability_dual(qubit, qubit.l, qubit.k, n, m,
                                                alpha, alpha1)
                try:
                    a_fac = amp_factor_dual(qubit.l, qubit.k, n, m, alpha, alpha1)
                    even, odd, _ = bob_states_dual(qubit, alpha, alpha1, n, m)
                except SingularFactorError:
                    continue
                bob = even if parity == "even" else odd
                corrected = correct(bob, parity, n, qubit.l)
                records.append(TeleportRecord(
                    outcome=Outcome(parity, n, m),
                    bob_state=bob,
                    probability=0.5 * p_nm,
                    amp_factor=a_fac,
                    z_power=z_power_for(parity, n, qubit.l),
                    corrected_state=corrected,
                ))
    return records


def single_rail_pipeline(qubit: UnknownQubit, alpha: float, n: int,
                         parity: str = "even") -> TeleportRecord:
    """Conditional record of the single-rail variant for count ``n``.

    ``probability`` covers both parities (they split it equally); the
    corrected state is identical for either branch.
    """
    if qubit.encoding != "single_rail":
        raise ValueError("single_rail_pipeline expects a single-rail qubit")
    l, k = qubit.l, qubit.k
    if (l - k) % 2 == 0:
        raise ValueError("conditional-sign teleportation requires l - k odd")
    a_fac = amp_factor_single(l, k, n, alpha)
    table = matrix_element_table(max(l, k), n, alpha)
    prob = overall_factor(alpha) ** 2 * (
        abs(qubit.a0) ** 2 * table.element(l, n) ** 2
        + abs(qubit.a1) ** 2 * table.element(k, n) ** 2
    )
    plus = qubit.a0 + qubit.a1 * a_fac
    minus = qubit.a0 - qubit.a1 * a_fac
    sign = (-1.0) ** (n - l) if parity == "even" else (-1.0) ** (n + 1 - l)
    bob = QubitState(plus, sign * minus, DUAL_RAIL_BASIS)
    corrected = correct(bob, parity, n, l)
    return TeleportRecord(
        outcome=Outcome(parity, n, None),
        bob_state=bob,
        probability=prob,
        amp_factor=a_fac,
        z_power=z_power_for(parity, n, l),
        corrected_state=corrected,
    )


# -- brute-force finite-reflectance circuit -----------------------------------

def _bs_with_coherent(fock_n: int, coh_amp: float, qubit_mode, coh_mode,
                      params: BeamSplitterParams, d_qubit: int, d_coh: int,
                      tail_tolerance: float):
    """Splitter output for |n>_qubit x |coh>_carrier, qubit listed first so
    the carrier's amplitude displaces it with the conditional sign."""
    q = number_state(qubit_mode, fock_n, n_max=d_qubit - 1,
                     tail_tolerance=tail_tolerance)
    c = displaced.coherent_state(coh_amp, mode=coh_mode, n_max=d_coh - 1,
                                 tail_tolerance=tail_tolerance)
    joint = _fock.tensor(q, c)
    return apply_bs(joint, qubit_mode, coh_mode, params)


def brute_force_pipeline(qubit: UnknownQubit, beta: float, beta1: float, r: float,
                         n_cut: int = 2, m_cut: int = 2,
                         tail_tolerance: float = 1e-10) -> list[BruteForceRecord]:
    """Simulate the full circuit at finite reflectance.

    The channel's coherent part and the first qubit mode meet on one
    splitter, the ancilla drive and the second qubit mode on another; the
    coherent mode is parity-measured and the two auxiliary modes are
    counted.  Records carry the exact conditional 2x2 density matrix of
    the receiver's dual-rail modes; as r -> 0 at fixed alpha = beta*r/t
    they converge to the analytic records.
    """
    if not 0.0 < r <= 0.3:
        raise ValueError("brute-force regime requires 0 < r <= 0.3")
    if qubit.encoding != "dual_rail":
        raise ValueError("the circuit oracle covers the dual-rail variant")
    t = math.sqrt(1.0 - r * r)
    l, k = qubit.l, qubit.k
    params = BeamSplitterParams(t, r)

    hi = max(l, k)
    alpha = beta * r / t
    alpha1 = beta1 * r / t
    d3 = hi + default_cutoff(alpha) + 2
    d4 = hi + default_cutoff(alpha1) + 2
    d1 = default_cutoff(beta) + d3
    d2 = default_cutoff(beta1) + d4
    if n_cut >= d3 or m_cut >= d4:
        raise ValueError("requested counts exceed the auxiliary cutoffs")

    # channel branches: carrier -beta accompanies logical |01>, +beta |10>
    u = {}  # (branch, fock) -> joint (qubit-mode, carrier) amplitudes
    for branch, amp in (("minus", -beta), ("plus", beta)):
        for s in (l, k):
            st = _bs_with_coherent(s, amp, 3, 1, params, d3, d1, tail_tolerance)
            u[branch, s] = st.amps  # shape (d3, d1)
    v = {}
    for s in (l, k):
        st = _bs_with_coherent(s, -beta1, 4, 2, params, d4, d2, tail_tolerance)
        v[s] = st.amps  # shape (d4, d2)

    even_mask = (np.arange(d1) % 2 == 0).astype(float)
    coefs = (qubit.a0, qubit.a1)
    s3 = (l, k)  # mode-3 content per superposition term
    s4 = (k, l)
    target = QubitState(qubit.a0, qubit.a1, DUAL_RAIL_BASIS)

    records = []
    for parity in ("even", "odd"):
        mask = even_mask if parity == "even" else 1.0 - even_mask
        for n in range(n_cut + 1):
            for m in range(m_cut + 1):
                u_n = {key: vecs[n, :] for key, vecs in u.items()}
                v_m = {s: vecs[m, :] for s, vecs in v.items()}

                def gram(br_row, br_col):
                    g = 0.0 + 0.0j
                    for i in range(2):
                        for j in range(2):
                            g += (
                                np.conj(coefs[i]) * coefs[j]
                                * np.vdot(u_n[br_row, s3[i]] * mask, u_n[br_col, s3[j]] * mask)
                                * np.vdot(v_m[s4[i]], v_m[s4[j]])
                            )
                    return g

                g_mm = gram("minus", "minus")
                g_pp = gram("plus", "plus")
                g_pm = gram("plus", "minus")  # <B| Pi |A>
                prob = 0.5 * float((g_mm + g_pp).real)
                if prob <= 0.0:
                    continue
                rho = np.array([[g_mm, g_pm], [np.conj(g_pm), g_pp]]) / (2.0 * prob)
                zp = z_power_for(parity, n, l)
                gate = H_GATE @ np.linalg.matrix_power(Z_GATE, zp)
                rho_c = gate @ rho @ gate.conj().T
                evals, evecs = np.linalg.eigh(rho)
                bob = QubitState(evecs[0, -1], evecs[1, -1], DUAL_RAIL_BASIS)
                evals_c, evecs_c = np.linalg.eigh(rho_c)
                corrected = QubitState(evecs_c[0, -1], evecs_c[1, -1], DUAL_RAIL_BASIS)
                if abs(qubit.a0) > 0 and abs(qubit.a1) > 0 and abs(corrected.c0) > 1e-12:
                    a_est = float((corrected.c1 / corrected.c0 * qubit.a0 / qubit.a1).real)
                else:
                    a_est = math.nan
                records.append(BruteForceRecord(
                    outcome=Outcome(parity, n, m),
                    bob_state=bob,
                    probability=prob,
                    amp_factor=a_est,
                    z_power=zp,
                    corrected_state=corrected,
                    rho=rho,
                    corrected_rho=rho_c,
                    purity=float(np.trace(rho @ rho).real),
                ))
    return records


def record_infidelity(record: BruteForceRecord, qubit: UnknownQubit,
                      alpha: float, alpha1: float | None = None) -> float:
    """1 - <target| rho_corrected |target> against the analytic corrected
    state for the record's counts."""
    a_fac = amp_factor_dual(qubit.l, qubit.k, record.outcome.n, record.outcome.m,
                            alpha, alpha1)
    tgt = QubitState(qubit.a0, qubit.a1 * a_fac, DUAL_RAIL_BASIS).vec()
    fid = float(np.real(np.vdot(tgt, record.corrected_rho @ tgt)))
    return 1.0 - fid
