"""Truncated multi-mode Fock-space states.

States are dense complex amplitude tensors over a per-mode photon-number
grid.  Every operation is a pure function returning a fresh state; the
amplitude arrays are frozen (read-only) after construction, so values can
be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

NORM_EPS = 1e-12

ModeLabel = Hashable


class ModeCollisionError(ValueError):
    """Two states being combined share a mode label."""


class BasisMismatchError(ValueError):
    """Logical states expressed in different bases cannot be compared."""


class MeasurementRangeError(ValueError):
    """Requested photon number lies above a mode's cutoff."""


class TailMassError(RuntimeError):
    """Probability mass at a truncation edge exceeds the admissible tail."""


def default_cutoff(amplitude: float) -> int:
    """Photon-number cutoff that keeps the tail of a coherent or displaced
    component of the given amplitude below ~1e-12."""
    x = abs(amplitude)
    return math.ceil(x * x + 6.0 * x + 12.0)


@dataclass(frozen=True)
class TruncationConfig:
    """Per-mode photon-number cutoffs plus the admissible top-level mass."""

    n_max_per_mode: tuple[int, ...]
    tail_tolerance: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "n_max_per_mode", tuple(int(n) for n in self.n_max_per_mode))
        if any(n < 1 for n in self.n_max_per_mode):
            raise ValueError("every per-mode cutoff must be >= 1")
        if not (0.0 <= self.tail_tolerance < 1.0):
            raise ValueError("tail_tolerance must lie in [0, 1)")

    def dims(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.n_max_per_mode)


@dataclass(frozen=True)
class FockState:
    """A pure state on labelled bosonic modes with per-mode cutoffs.

    ``amps[n1, ..., nM]`` is the coefficient of ``|n1 ... nM>`` in the order
    given by ``modes``.
    """

    modes: tuple[ModeLabel, ...]
    amps: np.ndarray
    trunc: TruncationConfig

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(set(self.modes)) != len(self.modes):
            raise ModeCollisionError(f"duplicate mode labels in {self.modes}")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != self.trunc.dims():
            raise ValueError(
                f"amplitude shape {amps.shape} does not match cutoffs {self.trunc.dims()}"
            )
        if len(self.modes) != amps.ndim:
            raise ValueError("one mode label required per amplitude axis")
        n2 = float(np.vdot(amps, amps).real)
        if n2 <= 0.0:
            raise ValueError("state has zero norm")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    # -- bookkeeping ----------------------------------------------------

    def axis(self, mode: ModeLabel) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise KeyError(f"mode {mode!r} not in {self.modes}") from None

    def n_max(self, mode: ModeLabel) -> int:
        return self.trunc.n_max_per_mode[self.axis(mode)]

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def normalize(self) -> "FockState":
        n = self.norm()
        if abs(n - 1.0) <= NORM_EPS:
            return self
        return FockState(self.modes, self.amps / n, self.trunc)

    def tail_mass(self, mode: ModeLabel) -> float:
        """Probability mass sitting at the mode's top (cutoff) level."""
        a = self.axis(mode)
        top = np.take(self.amps, self.trunc.n_max_per_mode[a], axis=a)
        return float(np.sum(np.abs(top) ** 2))

    def check_tail(self, modes: Sequence[ModeLabel] | None = None) -> "FockState":
        """Raise unless the top-level mass of each given mode is within
        tolerance.

        Audits truncation error, so pass only modes whose content
        approximates an unbounded one; a mode whose exact support ends at
        the cutoff (a dual-rail photon, say) carries real mass there.
        """
        for m in self.modes if modes is None else modes:
            mass = self.tail_mass(m)
            if mass > self.trunc.tail_tolerance:
                raise TailMassError(
                    f"mode {m!r} holds {mass:.3e} probability at its cutoff "
                    f"(tolerance {self.trunc.tail_tolerance:.1e})"
                )
        return self

    def overlap(self, other: "FockState") -> complex:
        if self.modes != other.modes or self.amps.shape != other.amps.shape:
            raise BasisMismatchError("overlap requires identical mode grids")
        return complex(np.vdot(self.amps, other.amps))


def single_mode(mode: ModeLabel, coeffs: Sequence[complex],
                tail_tolerance: float = 1e-10) -> FockState:
    """Wrap raw Fock coefficients of one mode into a state."""
    arr = np.asarray(list(coeffs), dtype=complex)
    trunc = TruncationConfig((arr.size - 1,), tail_tolerance)
    return FockState((mode,), arr, trunc)


def number_state(mode: ModeLabel, n: int, n_max: int | None = None,
                 tail_tolerance: float = 1e-10) -> FockState:
    """``|n>`` in a single mode (cutoff defaults to ``n``)."""
    if n_max is None:
        n_max = max(n, 1)
    if n > n_max:
        raise MeasurementRangeError(f"photon number {n} above cutoff {n_max}")
    coeffs = np.zeros(n_max + 1, dtype=complex)
    coeffs[n] = 1.0
    return single_mode(mode, coeffs, tail_tolerance)


def tensor(a: FockState, b: FockState) -> FockState:
    """Tensor product of states on disjoint mode sets."""
    shared = set(a.modes) & set(b.modes)
    if shared:
        raise ModeCollisionError(f"modes {sorted(map(repr, shared))} appear on both sides")
    amps = np.multiply.outer(a.amps, b.amps)
    trunc = TruncationConfig(
        a.trunc.n_max_per_mode + b.trunc.n_max_per_mode,
        min(a.trunc.tail_tolerance, b.trunc.tail_tolerance),
    )
    return FockState(a.modes + b.modes, amps, trunc)


def project_number(state: FockState, mode: ModeLabel, n: int):
    """Project one mode onto ``|n>`` and drop it.

    Returns ``(reduced_state, probability)``.  The reduced state is
    renormalized; a zero-probability outcome returns ``(None, 0.0)`` so
    sweeps can skip impossible branches without touching NaNs.
    """
    ax = state.axis(mode)
    if n < 0 or n > state.trunc.n_max_per_mode[ax]:
        raise MeasurementRangeError(
            f"photon number {n} outside [0, {state.trunc.n_max_per_mode[ax]}] for mode {mode!r}"
        )
    sliced = np.take(state.amps, n, axis=ax)
    prob = float(np.sum(np.abs(sliced) ** 2))
    if prob == 0.0:
        return None, 0.0
    if sliced.ndim == 0:
        return None, prob  # last mode measured away; only the weight remains
    rest_modes = state.modes[:ax] + state.modes[ax + 1:]
    rest_cut = state.trunc.n_max_per_mode[:ax] + state.trunc.n_max_per_mode[ax + 1:]
    reduced = FockState(
        rest_modes,
        sliced / np.sqrt(prob),
        TruncationConfig(rest_cut, state.trunc.tail_tolerance),
    )
    return reduced, prob


def project_parity(state: FockState, mode: ModeLabel, parity: str):
    """Condition one mode on even/odd photon number, keeping the mode.

    Returns ``(conditioned_state, probability)``; the even and odd
    probabilities of any state sum to one.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    ax = state.axis(mode)
    dim = state.amps.shape[ax]
    keep = np.arange(dim) % 2 == (0 if parity == "even" else 1)
    shape = [1] * state.amps.ndim
    shape[ax] = dim
    masked = state.amps * keep.reshape(shape)
    prob = float(np.sum(np.abs(masked) ** 2))
    if prob == 0.0:
        return None, 0.0
    return FockState(state.modes, masked / np.sqrt(prob), state.trunc), prob


@dataclass(frozen=True)
class QubitState:
    """A normalized two-level state over a labelled logical basis."""

    c0: complex
    c1: complex
    basis: tuple[str, str] = ("01", "10")

    def __post_init__(self):
        n = math.sqrt(abs(self.c0) ** 2 + abs(self.c1) ** 2)
        if n == 0.0:
            raise ValueError("qubit state has zero norm")
        object.__setattr__(self, "c0", complex(self.c0) / n)
        object.__setattr__(self, "c1", complex(self.c1) / n)
        object.__setattr__(self, "basis", tuple(self.basis))

    def vec(self) -> np.ndarray:
        return np.array([self.c0, self.c1], dtype=complex)


def fidelity(a: QubitState, b: QubitState) -> float:
    """``|<a|b>|^2``; one exactly when the states agree up to global phase."""
    if a.basis != b.basis:
        raise BasisMismatchError(f"bases differ: {a.basis} vs {b.basis}")
    ov = np.vdot(a.vec(), b.vec())
    return min(1.0, float(abs(ov) ** 2))
