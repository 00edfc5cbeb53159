"""Removing the known amplitude factor from a delivered qubit.

Two probabilistic routes exist.  Displacing an auxiliary mode and counting
photons removes the factor whenever the displacement amplitude solves

    A * c(0, n, gamma) / c(1, n, gamma) = +-1,

a quadratic in gamma since the coefficient ratio is gamma / (n - gamma^2);
failed counts leave fresh amplitude-modulated states, so the procedure can
be chained.  Swapping with a prearranged partner through a balanced
splitter works once, with success A^2 / (1 + A^2).

Reported success probabilities follow the composition convention in which
the conditional-state normalizer cancels against the outcome weight
F^4 |c c|^2, so overall accounting is a plain weighted sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .displaced import matrix_element_rows, matrix_element_table, overall_factor
from .fock import QubitState
from .protocol import (
    DUAL_RAIL_BASIS,
    SingularFactorError,
    amp_factor_dual,
    amp_factor_single,
    direct_success_probability,
)

_CLEAN_TOL = 1e-12
_ROOT_TOL = 1e-10


@dataclass(frozen=True)
class AMQubit:
    """A qubit whose second amplitude carries a known real factor.

    ``a0, a1`` are the amplitudes of the state one wants back; the physical
    state is proportional to (a0, a1 * factor).
    """

    a0: complex
    a1: complex
    factor: float
    basis: tuple[str, str] = DUAL_RAIL_BASIS

    def __post_init__(self):
        n = math.sqrt(abs(self.a0) ** 2 + abs(self.a1) ** 2)
        if n == 0.0:
            raise ValueError("qubit has zero norm")
        if not math.isfinite(self.factor):
            raise ValueError("amplitude factor must be finite")
        object.__setattr__(self, "a0", complex(self.a0) / n)
        object.__setattr__(self, "a1", complex(self.a1) / n)
        object.__setattr__(self, "basis", tuple(self.basis))

    def physical_amplitudes(self) -> np.ndarray:
        """Normalized (a0, a1 * factor)."""
        v = np.array([self.a0, self.a1 * self.factor], dtype=complex)
        return v / np.linalg.norm(v)

    def norm_weight(self) -> float:
        """(|a0|^2 + |a1 * factor|^2)^(-1/2)."""
        return float(np.linalg.norm(np.array([self.a0, self.a1 * self.factor]))) ** -1.0


@dataclass(frozen=True)
class DemodResult:
    """Outcome of one demodulation attempt.

    ``success_probability`` is the composition-normalized value (see module
    docstring); ``sign`` tells whether (a0, +a1) or (a0, -a1) came back;
    ``residuals`` lists (count, weight, new AM qubit) for the displacement
    route's failed branches, enabling chained attempts.
    """

    restored: QubitState | None
    success_probability: float
    method: str
    gamma: float | None
    residual_factor: float
    sign: int = 0
    residuals: tuple = ()


def q_swap(a_factor) -> float:
    """Swap success A^2 / (1 + A^2): near one for strong factors, tiny for
    weak ones."""
    a2 = np.asarray(a_factor, dtype=float) ** 2
    out = a2 / (1.0 + a2)
    return float(out) if out.ndim == 0 else out


def solve_gamma(a_factor: float, n: int, gamma_max: float = 8.0) -> list[float]:
    """All real displacement amplitudes in [-gamma_max, gamma_max] that
    remove the factor ``a_factor`` on auxiliary count ``n``.

    The coefficient ratio is gamma / (n - gamma^2), so each sign choice is
    the quadratic gamma^2 +- A gamma - n = 0; negative discriminants (never
    for n >= 1) and the spurious root gamma = 0 are discarded.
    """
    if a_factor == 0.0:
        raise ValueError("amplitude factor must be nonzero")
    if n < 0:
        raise ValueError("count must be nonnegative")
    disc = a_factor * a_factor + 4.0 * n
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    candidates = {
        0.5 * (-a_factor + root), 0.5 * (-a_factor - root),
        0.5 * (a_factor + root), 0.5 * (a_factor - root),
    }
    out = []
    for g in candidates:
        if g == 0.0 or abs(g) > gamma_max:
            continue
        denom = n - g * g
        if denom == 0.0:
            continue
        if abs(abs(a_factor * g / denom) - 1.0) <= _ROOT_TOL:
            out.append(g)
    return sorted(out)


def _step_q(gamma: float, n: int) -> float:
    """Success weight of one displacement attempt aimed at count n."""
    c1n = matrix_element_rows(1, n, gamma)[1, n]
    return overall_factor(gamma) ** 2 * c1n ** 2


def demod_displacement(am: AMQubit, n: int, gamma: float | None = None,
                       residual_max: int = 12, gamma_max: float = 8.0) -> DemodResult:
    """Displacement-route demodulation aimed at auxiliary count ``n``.

    Among the admissible displacement amplitudes the one with the largest
    success weight is used (or pass ``gamma`` explicitly).  Branches with a
    vanishing weight (the restorable component is gone) are not listed as
    residuals: they can never contribute.
    """
    if gamma is None:
        roots = solve_gamma(am.factor, n, gamma_max)
        if not roots:
            return DemodResult(None, 0.0, "displacement", None, am.factor)
        gamma = max(roots, key=lambda g: (_step_q(g, n), g))
    rows = matrix_element_rows(1, max(n, residual_max), gamma)
    f2 = overall_factor(gamma) ** 2
    ratio = gamma / (n - gamma * gamma)
    sign = 1 if am.factor * ratio > 0 else -1
    restored = QubitState(am.a0, sign * am.a1, am.basis)
    residuals = []
    for p in range(residual_max + 1):
        if p == n or rows[1, p] == 0.0:
            continue
        weight = f2 * rows[1, p] ** 2
        new_factor = am.factor * rows[0, p] / rows[1, p]
        residuals.append((p, weight, AMQubit(am.a0, am.a1, new_factor, am.basis)))
    return DemodResult(
        restored=restored,
        success_probability=f2 * rows[1, n] ** 2,
        method="displacement",
        gamma=gamma,
        residual_factor=1.0,
        sign=sign,
        residuals=tuple(residuals),
    )


def demod_swap(am: AMQubit) -> DemodResult:
    """One-shot swap demodulation with a prearranged partner state.

    Both heralding patterns restore the qubit (one needs a known Z, folded
    in here); the procedure cannot be repeated on failure.
    """
    if am.factor == 0.0:
        raise ValueError("amplitude factor must be nonzero")
    return DemodResult(
        restored=QubitState(am.a0, am.a1, am.basis),
        success_probability=q_swap(am.factor),
        method="swap",
        gamma=None,
        residual_factor=1.0,
        sign=1,
    )


# -- chained-displacement value tables ----------------------------------------

_GRID_LO, _GRID_HI, _GRID_N = -6.0, 6.0, 601


@lru_cache(maxsize=32)
def _chain_table(depth: int, include_swap: bool, target_max: int,
                 residual_max: int, gamma_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Value of the best demodulation strategy as a function of log10|A|.

    Value iteration over the remaining displacement budget; the swap (when
    allowed) may be taken instead of any displacement since it burns the
    one-shot resource terminally.  Success probabilities depend on |A|
    only, so a log grid with linear interpolation is adequate for policy
    evaluation (the per-call demodulators stay exact).
    """
    log_grid = np.linspace(_GRID_LO, _GRID_HI, _GRID_N)
    a_grid = 10.0 ** log_grid
    value = q_swap(a_grid) if include_swap else np.zeros_like(a_grid)
    for _ in range(depth):
        nxt = np.empty_like(value)
        for i, a in enumerate(a_grid):
            best = 0.0
            for n in range(target_max + 1):
                root = math.sqrt(a * a + 4.0 * n)
                for g in {0.5 * (root - a), 0.5 * (root + a)}:
                    if g == 0.0 or g > gamma_max:
                        continue
                    rows = matrix_element_rows(1, residual_max, g)
                    f2 = overall_factor(g) ** 2
                    total = f2 * rows[1, n] ** 2
                    for p in range(residual_max + 1):
                        if p == n or rows[1, p] == 0.0:
                            continue
                        a_next = a * abs(rows[0, p] / rows[1, p])
                        cont = np.interp(math.log10(max(a_next, 1e-300)),
                                         log_grid, value)
                        total += f2 * rows[1, p] ** 2 * cont
                    best = max(best, total)
            nxt[i] = max(best, q_swap(a) if include_swap else 0.0)
        value = nxt
    return log_grid, value


def q_displacement_chain(a_factor: float, depth: int = 3, target_max: int = 8,
                         residual_max: int = 12, gamma_max: float = 8.0) -> float:
    """Success of up to ``depth`` chained displacement attempts (no swap)."""
    if a_factor == 0.0:
        return 0.0
    log_grid, value = _chain_table(depth, False, target_max, residual_max, gamma_max)
    return float(np.interp(math.log10(abs(a_factor)), log_grid, value))


def q_best(a_factor: float, depth: int = 3, target_max: int = 8,
           residual_max: int = 12, gamma_max: float = 8.0) -> float:
    """Best of the swap and the chained displacement (swap allowed once,
    at any point of the chain)."""
    if a_factor == 0.0:
        return 0.0
    log_grid, value = _chain_table(depth, True, target_max, residual_max, gamma_max)
    interpolated = float(np.interp(math.log10(abs(a_factor)), log_grid, value))
    # the immediate swap is always available exactly; the table only bounds
    # it to interpolation accuracy
    return max(interpolated, float(q_swap(a_factor)))


# -- overall accounting --------------------------------------------------------

def overall_success_report(l: int, k: int, alpha: float, policy="best",
                           chain_depth: int = 3, n_cut: int = 20,
                           clean_tolerance: float = 1e-9):
    """Direct mass plus demodulated additions, itemized per outcome.

    ``policy`` assigns a method to each amplitude-modulated outcome:
    one of "best", "swap", "displacement", "skip", or a callable
    (n, m, factor) -> method.  A factor within ``clean_tolerance`` of +-1
    is a pure sign, undone by the known Z correction: unless the outcome
    is skipped it counts as a clean delivery (q = 1, method "clean") with
    no probabilistic step.  Returns ``(total, rows)`` where each row is
    (n, m, factor, method, q, weight, contribution); singular outcomes
    appear with method "singular" and zero contribution.
    """
    table = matrix_element_table(max(l, k), n_cut, alpha)
    f4 = overall_factor(alpha) ** 4
    direct = direct_success_probability(l, k, alpha, n_cut)
    rows = []
    addition = 0.0
    for n in range(n_cut + 1):
        for m in range(n_cut + 1):
            if n == m:
                continue
            weight = f4 * table.element(l, n) ** 2 * table.element(k, m) ** 2
            try:
                factor = amp_factor_dual(l, k, n, m, alpha)
            except SingularFactorError:
                rows.append((n, m, math.nan, "singular", 0.0, weight, 0.0))
                continue
            method = policy(n, m, factor) if callable(policy) else policy
            if method != "skip" and abs(abs(factor) - 1.0) <= clean_tolerance:
                method, q = "clean", 1.0
            elif method == "best":
                q_s = q_swap(factor)
                q_c = q_best(factor, chain_depth)
                q, method = (q_s, "swap") if q_s >= q_c else (q_c, "displacement")
            elif method == "swap":
                q = q_swap(factor)
            elif method == "displacement":
                q = q_displacement_chain(factor, chain_depth)
            elif method == "skip":
                q = 0.0
            else:
                raise ValueError(f"unknown demodulation method {method!r}")
            contribution = weight * q
            addition += contribution
            rows.append((n, m, factor, method, q, weight, contribution))
    return direct + addition, rows


def overall_success(l: int, k: int, alpha: float, policy="best",
                    chain_depth: int = 3, n_cut: int = 20,
                    clean_tolerance: float = 1e-9) -> float:
    total, _ = overall_success_report(l, k, alpha, policy, chain_depth, n_cut,
                                      clean_tolerance)
    return total


def single_rail_demod_additions(l: int, k: int, alpha: float, n_cut: int = 20,
                                chain_depth: int = 3) -> dict:
    """Demodulated additions for the single-rail variant as curve data:
    the swap route, a single displacement attempt, and the chained
    displacement, plus whatever mass is already factor-free."""
    table = matrix_element_table(max(l, k), n_cut, alpha)
    f2 = overall_factor(alpha) ** 2
    clean = swap = disp_first = disp_chain = 0.0
    for n in range(n_cut + 1):
        weight = f2 * table.element(l, n) ** 2
        c_l = table.element(l, n)
        if c_l == 0.0:
            continue
        factor = table.element(k, n) / c_l
        if abs(abs(factor) - 1.0) <= _CLEAN_TOL:
            clean += weight
            continue
        if factor == 0.0:
            continue
        swap += weight * q_swap(factor)
        disp_first += weight * q_displacement_chain(factor, 1)
        disp_chain += weight * q_displacement_chain(factor, chain_depth)
    return {"clean": clean, "swap": swap, "displacement_first": disp_first,
            "displacement_chain": disp_chain}


# -- protocols with pre-modulated inputs ---------------------------------------

def initially_am_dual(a0: complex, a1: complex, alpha: float, n_cut: int = 20):
    """Teleport a dual-rail qubit that was pre-modulated so the dominant
    count pattern (0, 1) delivers its unmodulated original.

    ``a0, a1`` are the amplitudes of the state actually handed to the
    sender; the original recovered on success is normalize(a0, a1 * A)
    with A the (0, 1) amplitude factor.  Every other outcome leaves a
    relative factor that is swapped away (one-shot).  Returns
    ``(records, total)`` with rows (n, m, probability, relative_factor,
    method, contribution).
    """
    nrm = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
    a0, a1 = complex(a0) / nrm, complex(a1) / nrm
    a_ref = amp_factor_dual(0, 1, 0, 1, alpha)
    base = abs(a0) ** 2 + abs(a1) ** 2 * a_ref ** 2
    table = matrix_element_table(1, n_cut, alpha)
    f4 = overall_factor(alpha) ** 4
    rows = []
    total = 0.0
    for n in range(n_cut + 1):
        for m in range(n_cut + 1 - n):
            weight = f4 * table.element(0, n) ** 2 * table.element(1, m) ** 2
            prob = f4 * (
                abs(a0) ** 2 * (table.element(0, n) * table.element(1, m)) ** 2
                + abs(a1) ** 2 * (table.element(1, n) * table.element(0, m)) ** 2
            )
            try:
                phi = amp_factor_dual(0, 1, n, m, alpha) / a_ref
            except SingularFactorError:
                rows.append((n, m, prob, math.nan, "singular", 0.0))
                continue
            if abs(abs(phi) - 1.0) <= _CLEAN_TOL:
                method, g = "clean", 1.0
            else:
                method, g = "swap", q_swap(phi)
            contribution = weight * base * g
            total += contribution
            rows.append((n, m, prob, phi, method, contribution))
    return rows, total


def initially_am_dual_total_reference(a1_original_abs: float, alpha: float,
                                      n_cut: int = 20,
                                      fourth_term: str = "first_principles") -> float:
    """Closed-form total of the pre-modulated dual-rail protocol,
    parametrized by the original (pre-modulation) |a1|.

    ``fourth_term`` selects the exponent convention on the generic
    off-diagonal line: "first_principles" composes the prepared inverse
    factor with the outcome factor; "as_printed" keeps the inverted
    exponent appearing in the published closed form (the two disagree, so
    the verification suite reports both).
    """
    if fourth_term not in ("first_principles", "as_printed"):
        raise ValueError(f"unknown fourth_term variant {fourth_term!r}")
    table = matrix_element_table(1, n_cut, alpha)
    f4 = overall_factor(alpha) ** 4
    a01 = amp_factor_dual(0, 1, 0, 1, alpha)
    a10 = 1.0 / a01
    n_am2 = 1.0 / (1.0 + (a01 ** -2 - 1.0) * a1_original_abs ** 2)
    c0 = table.c[0]
    c1 = table.c[1]
    total = c0[0] ** 2 * c1[1] ** 2
    total += c0[1] ** 2 * c1[0] ** 2 * q_swap(a10 ** 2)
    total += q_swap(a10) * float(np.sum(c0 ** 2 * c1 ** 2))
    for n in range(n_cut + 1):
        for m in range(n_cut + 1 - n):
            if n == m or (n, m) in ((0, 1), (1, 0)):
                continue
            try:
                a_nm = amp_factor_dual(0, 1, n, m, alpha)
            except SingularFactorError:
                continue
            phi = a10 * a_nm if fourth_term == "first_principles" else a_nm / a10
            total += c0[n] ** 2 * c1[m] ** 2 * q_swap(phi)
    return f4 * n_am2 * total


def initially_am_single(a0: complex, a1: complex, alpha: float, n_cut: int = 20,
                        chain_depth: int = 3):
    """Single-rail analogue of :func:`initially_am_dual`: the vacuum count
    is factor-free and every other count is demodulated by chained
    displacements.  Returns ``(records, total)``."""
    nrm = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
    a0, a1 = complex(a0) / nrm, complex(a1) / nrm
    a_ref = amp_factor_single(0, 1, 0, alpha)  # equals -alpha
    base = abs(a0) ** 2 + abs(a1) ** 2 * a_ref ** 2
    table = matrix_element_table(1, n_cut, alpha)
    f2 = overall_factor(alpha) ** 2
    rows = []
    total = 0.0
    for n in range(n_cut + 1):
        weight = f2 * table.element(0, n) ** 2
        prob = f2 * (abs(a0) ** 2 * table.element(0, n) ** 2
                     + abs(a1) ** 2 * table.element(1, n) ** 2)
        phi = (table.element(1, n) / table.element(0, n)) / a_ref
        if abs(abs(phi) - 1.0) <= _CLEAN_TOL:
            method, g = "clean", 1.0
        elif phi == 0.0:
            method, g = "skip", 0.0
        else:
            method, g = "displacement", q_displacement_chain(phi, chain_depth)
        contribution = weight * base * g
        total += contribution
        rows.append((n, prob, phi, method, contribution))
    return rows, total
