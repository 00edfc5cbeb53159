"""Exact linear-optical elements on truncated Fock grids.

The two-mode beam splitter conserves total photon number, so its Fock
representation is block diagonal.  Blocks are built by a Pascal-style
recurrence (peel one creation operator off the input), cached per
``(t, r)`` and shared read-only; initialization is guarded by a lock so
concurrent sweep workers stay safe.

Mode-operator convention, fixed once for the whole package: listing modes
``(a, b)``, the splitter maps ``a+ -> t a+ + r b+`` and
``b+ -> -r a+ + t b+``; on a single photon

    |1 0> -> t |1 0> + r |0 1>,      |0 1> -> -r |1 0> + t |0 1>,

and coherent amplitudes transform as ``(x, y) -> (t x - r y, r x + t y)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .displaced import coherent_state, default_cutoff
from .fock import (
    FockState,
    ModeLabel,
    TailMassError,
    TruncationConfig,
    tensor,
)

_UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class BeamSplitterParams:
    """Real transmittance/reflectance amplitudes with t^2 + r^2 = 1.

    ``r`` may be negative (the inverse splitter); the highly transmissive
    regime used by the teleportation circuit has 0 < r <= 0.3.
    """

    t: float
    r: float

    def __post_init__(self):
        if self.t <= 0.0:
            raise ValueError("transmittance amplitude t must be positive")
        if abs(self.t ** 2 + self.r ** 2 - 1.0) > _UNITARITY_TOL:
            raise ValueError(f"t^2 + r^2 = {self.t**2 + self.r**2!r} != 1")

    @staticmethod
    def balanced() -> "BeamSplitterParams":
        s = 1.0 / math.sqrt(2.0)
        return BeamSplitterParams(s, s)

    @staticmethod
    def from_reflectance(r: float) -> "BeamSplitterParams":
        return BeamSplitterParams(math.sqrt(1.0 - r * r), r)


@dataclass(frozen=True)
class HybridChannel:
    """Entanglement resource: coherent amplitudes -beta/+beta on one mode,
    correlated with a dual-rail single photon."""

    beta: float

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("channel amplitude beta must be positive")


# -- beam splitter blocks ---------------------------------------------------

_BS_CACHE: dict[tuple, list[np.ndarray]] = {}
_BS_LOCK = threading.Lock()


def _bs_blocks(t: float, r: float, b_dim: int, n_total_max: int) -> list[np.ndarray]:
    """Blocks G[N][jb, nb] = <N-jb, jb| BS |N-nb, nb> for jb, nb < b_dim.

    The first-mode index is implicit (N minus the stored one), which keeps
    the tables small when one mode is a high-occupancy coherent carrier.
    """
    key = (t, r, b_dim, n_total_max)
    blocks = _BS_CACHE.get(key)
    if blocks is not None:
        return blocks
    with _BS_LOCK:
        blocks = _BS_CACHE.get(key)
        if blocks is not None:
            return blocks
        jb = np.arange(b_dim)
        sqrt_jb = np.sqrt(jb)
        blocks = [np.zeros((b_dim, b_dim))]
        blocks[0][0, 0] = 1.0
        for N in range(1, n_total_max + 1):
            prev = blocks[N - 1]
            out = np.zeros((b_dim, b_dim))
            sqrt_ja = np.sqrt(np.clip(N - jb, 0, None))
            prev_shift = np.vstack([np.zeros((1, b_dim)), prev[:-1]])
            hi = min(N - 1, b_dim - 1)
            cols = np.arange(0, hi + 1)
            out[:, cols] = (
                t * sqrt_ja[:, None] * prev[:, cols]
                + r * sqrt_jb[:, None] * prev_shift[:, cols]
            ) / np.sqrt(N - cols)[None, :]
            if N < b_dim:
                out[:, N] = (
                    -r * sqrt_ja * prev[:, N - 1] + t * sqrt_jb * prev_shift[:, N - 1]
                ) / math.sqrt(N)
            if b_dim > N:  # rows jb > N are outside this block
                out[N + 1:, :] = 0.0
            out.flags.writeable = False
            blocks.append(out)
        _BS_CACHE[key] = blocks
        return blocks


def _apply_bs_core(flat: np.ndarray, t: float, r: float) -> np.ndarray:
    """Apply the splitter to amplitudes shaped (dim_a, dim_b, rest); the
    table is stored over the second axis, so callers put the smaller mode
    there."""
    da, db = flat.shape[0], flat.shape[1]
    n_total_max = (da - 1) + (db - 1)
    blocks = _bs_blocks(t, r, db, n_total_max)
    out = np.zeros_like(flat)
    for N in range(n_total_max + 1):
        lo = max(0, N - (da - 1))
        hi = min(db - 1, N)
        if lo > hi:
            continue
        idx = np.arange(lo, hi + 1)
        vin = flat[N - idx, idx, :]
        block = blocks[N][np.ix_(idx, idx)]
        out[N - idx, idx, :] = block @ vin
    return out


def apply_bs(state: FockState, mode_a: ModeLabel, mode_b: ModeLabel,
             params: BeamSplitterParams,
             leak_tolerance: float | None = None) -> FockState:
    """Exact beam-splitter action on two labelled modes.

    Components pushed past either cutoff are dropped; if the dropped
    probability exceeds ``leak_tolerance`` (default: the state's tail
    tolerance) a TailMassError is raised.
    """
    ax_a, ax_b = state.axis(mode_a), state.axis(mode_b)
    da, db = state.amps.shape[ax_a], state.amps.shape[ax_b]
    t, r = params.t, params.r
    if db > da:
        # store the table over the smaller mode; swapping the listing
        # order flips the sign of r
        ax_a, ax_b, da, db, r = ax_b, ax_a, db, da, -r
    moved = np.moveaxis(state.amps, (ax_a, ax_b), (0, 1))
    rest = moved.shape[2:]
    flat = np.ascontiguousarray(moved).reshape(da, db, -1)
    out = _apply_bs_core(flat, t, r)
    out = np.moveaxis(out.reshape((da, db) + rest), (0, 1), (ax_a, ax_b))
    in2 = float(np.vdot(state.amps, state.amps).real)
    out2 = float(np.vdot(out, out).real)
    tol = state.trunc.tail_tolerance if leak_tolerance is None else leak_tolerance
    if in2 - out2 > max(tol, 1e-14 * in2):
        raise TailMassError(
            f"beam splitter pushed {in2 - out2:.3e} probability past the cutoffs"
        )
    return FockState(state.modes, out, state.trunc)


# -- displacement -----------------------------------------------------------

def displacement_matrix(gamma: float, dim: int) -> np.ndarray:
    """Exact displacement unitary on a ``dim``-level mode via the matrix
    exponential of gamma * (a+ - a).

    Independent of the polynomial/recurrence route: serves as its oracle.
    """
    g = np.zeros((dim, dim))
    root = gamma * np.sqrt(np.arange(1, dim))
    g[np.arange(1, dim), np.arange(dim - 1)] = root
    g[np.arange(dim - 1), np.arange(1, dim)] = -root
    return expm(g)


def displacement_unitary(state: FockState, mode: ModeLabel, gamma: float) -> FockState:
    """Displace one mode by a real amplitude.

    The truncated generator is antisymmetric, so the action is exactly
    norm-preserving; the cutoff must leave room for the displaced support
    (use ``pad_mode`` first if in doubt).
    """
    ax = state.axis(mode)
    dim = state.amps.shape[ax]
    d = displacement_matrix(gamma, dim)
    moved = np.moveaxis(state.amps, ax, 0)
    out = np.tensordot(d, moved, axes=(1, 0))
    return FockState(state.modes, np.moveaxis(out, 0, ax), state.trunc)


def pad_mode(state: FockState, mode: ModeLabel, new_n_max: int) -> FockState:
    """Grow one mode's cutoff, zero-filling the new levels."""
    ax = state.axis(mode)
    old = state.trunc.n_max_per_mode[ax]
    if new_n_max < old:
        raise ValueError("pad_mode cannot shrink a mode")
    if new_n_max == old:
        return state
    pad = [(0, 0)] * state.amps.ndim
    pad[ax] = (0, new_n_max - old)
    cuts = list(state.trunc.n_max_per_mode)
    cuts[ax] = new_n_max
    return FockState(
        state.modes,
        np.pad(state.amps, pad),
        TruncationConfig(tuple(cuts), state.trunc.tail_tolerance),
    )


# -- highly transmissive splitter as a displacer ----------------------------

def htbs_residual(input_state: FockState, beta: float, r: float, sign: int):
    """How well a strong coherent drive through a weak splitter displaces.

    The single-mode ``input_state`` is mixed with a coherent ancilla on a
    splitter of reflectance ``r``;  under the package convention an ancilla
    amplitude ``-sign*beta`` displaces the input by ``sign*alpha`` with
    ``alpha = beta*r/t``.  Returns ``(fidelity, joint)`` where ``fidelity``
    compares the ancilla-traced output against the ideal displaced input
    and ``joint`` is the exact two-mode post-splitter state.
    """
    if not 0.0 < r < 0.3:
        raise ValueError("htbs regime requires 0 < r < 0.3")
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    if len(input_state.modes) != 1:
        raise ValueError("input must be a single-mode state")
    t = math.sqrt(1.0 - r * r)
    alpha = beta * r / t
    mode = input_state.modes[0]
    anc = ("htbs", "ancilla")
    if anc == mode:
        anc = ("htbs", "ancilla", 2)

    grown = pad_mode(input_state, mode,
                     input_state.trunc.n_max_per_mode[0] + default_cutoff(alpha))
    ancilla = coherent_state(-sign * beta, mode=anc,
                             tail_tolerance=input_state.trunc.tail_tolerance)
    joint = tensor(grown, ancilla)
    joint = apply_bs(joint, mode, anc, BeamSplitterParams(t, r))

    m = joint.amps  # (input levels, ancilla levels)
    rho = m @ m.conj().T
    target = displacement_unitary(grown.normalize(), mode, sign * alpha)
    tvec = target.amps
    fid = float(np.real(np.vdot(tvec, rho @ tvec))) / float(np.trace(rho).real)
    return fid, joint


# -- hybrid channel and its entanglement -------------------------------------

def channel_state(channel: HybridChannel, modes: tuple[ModeLabel, ModeLabel, ModeLabel] = (1, 2, 3),
                  n_max: int | None = None, tail_tolerance: float = 1e-10) -> FockState:
    """The shared resource state: (|-beta>|01> + |beta>|10>) / sqrt(2).

    The dual-rail branches are orthogonal, so the raw 1/sqrt(2) norm is
    exactly one despite the non-orthogonal coherent parts; the state is
    renormalized numerically anyway.
    """
    beta = channel.beta
    if n_max is None:
        n_max = default_cutoff(beta)
    coh_minus = coherent_state(-beta, n_max=n_max, tail_tolerance=tail_tolerance)
    coh_plus = coherent_state(beta, n_max=n_max, tail_tolerance=tail_tolerance)
    amps = np.zeros((n_max + 1, 2, 2), dtype=complex)
    amps[:, 0, 1] = coh_minus.amps / math.sqrt(2.0)
    amps[:, 1, 0] = coh_plus.amps / math.sqrt(2.0)
    state = FockState(modes, amps, TruncationConfig((n_max, 1, 1), tail_tolerance))
    return state.normalize().check_tail(modes=modes[:1])


def negativity_closed_form(channel: HybridChannel) -> float:
    """sqrt(1 - exp(-4 beta^2)): one in the strong-amplitude limit."""
    return math.sqrt(1.0 - math.exp(-4.0 * channel.beta ** 2))


def negativity_numeric(channel: HybridChannel, n_max: int | None = None) -> float:
    """Entanglement of the resource from the partial-transpose criterion.

    Computed as trace_norm(rho^T_qubit) - 1 on the truncated density
    matrix, the normalization that reaches one for maximally entangled
    qubit pairs and matches the closed form.
    """
    state = channel_state(channel, n_max=n_max)
    d1 = state.amps.shape[0]
    psi = np.stack([state.amps[:, 0, 1], state.amps[:, 1, 0]], axis=1)  # (d1, 2)
    rho = np.outer(psi.reshape(-1), psi.reshape(-1).conj())
    rho = rho.reshape(d1, 2, d1, 2).swapaxes(1, 3).reshape(2 * d1, 2 * d1)
    svals = np.linalg.svd(rho, compute_uv=False)
    return float(svals.sum() - 1.0)


def negativity(channel: HybridChannel, n_max: int | None = None) -> tuple[float, float]:
    """(closed form, numeric partial-transpose value); they agree to ~1e-6
    once the truncation holds the coherent tails."""
    return negativity_closed_form(channel), negativity_numeric(channel, n_max=n_max)
