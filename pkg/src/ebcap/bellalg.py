"""Bell-diagonal two-qubit states.

A Bell state is labelled by two bits ``(phase, amplitude)``::

    00 -> Phi+    01 -> Psi+    10 -> Phi-    11 -> Psi-

so an amplitude flip (X) maps Phi+ to Psi+ and a phase flip (Z) maps Phi+ to
Phi-.  Probability vectors are always ordered ``(p00, p01, p10, p11)``, i.e.
the vector index of a label is ``2 * phase + amplitude``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Normalisation slack accepted (and silently repaired) on inputs.
PROB_TOL = 1e-9


class BellLabel(enum.IntEnum):
    PHI_PLUS = 0
    PSI_PLUS = 1
    PHI_MINUS = 2
    PSI_MINUS = 3

    @classmethod
    def from_bits(cls, phase_bit: int, amplitude_bit: int) -> "BellLabel":
        return cls(2 * (phase_bit & 1) + (amplitude_bit & 1))

    @property
    def phase_bit(self) -> int:
        return self.value >> 1

    @property
    def amplitude_bit(self) -> int:
        return self.value & 1

    @property
    def bits(self) -> str:
        return f"{self.phase_bit}{self.amplitude_bit}"


def _as_probabilities(values: Iterable[float], size: int | None = None) -> np.ndarray:
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
    if arr.ndim != 1 or (size is not None and arr.shape[0] != size):
        raise ValueError(f"expected a probability vector of length {size}, got shape {arr.shape}")
    if np.any(~np.isfinite(arr)):
        raise ValueError("probability vector contains non-finite entries")
    if np.any(arr < -PROB_TOL):
        raise ValueError(f"negative probability in {arr.tolist()}")
    total = arr.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    arr = np.clip(arr, 0.0, None)
    return arr / arr.sum()


@dataclass(frozen=True)
class BellDiagonal:
    """Mixture of the four Bell states, ``p[label]`` for each :class:`BellLabel`."""

    p: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        arr = _as_probabilities(self.p, 4)
        object.__setattr__(self, "p", tuple(float(v) for v in arr))

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "BellDiagonal":
        return cls(tuple(arr))

    @classmethod
    def point(cls, label: BellLabel = BellLabel.PHI_PLUS) -> "BellDiagonal":
        p = [0.0] * 4
        p[label] = 1.0
        return cls(tuple(p))

    def as_array(self) -> np.ndarray:
        return np.array(self.p, dtype=np.float64)

    def __getitem__(self, label: int) -> float:
        return self.p[label]

    @property
    def fidelity(self) -> float:
        return self.p[BellLabel.PHI_PLUS]


@dataclass(frozen=True)
class DepolarizingChannel:
    """Qubit channel that keeps its input with probability ``p``.

    Equivalently it applies I with weight ``F = (3p+1)/4`` and each of X, Y, Z
    with weight ``G = (1-F)/3 = (1-p)/4``.
    """

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"channel parameter must lie in [0, 1], got {self.p}")

    @classmethod
    def from_fidelity(cls, fidelity: float) -> "DepolarizingChannel":
        if not 0.25 <= fidelity <= 1.0:
            raise ValueError(f"Werner fidelity of a depolarizing channel lies in [1/4, 1], got {fidelity}")
        return cls((4.0 * fidelity - 1.0) / 3.0)

    @property
    def fidelity(self) -> float:
        return (3.0 * self.p + 1.0) / 4.0

    @property
    def g(self) -> float:
        return (1.0 - self.fidelity) / 3.0

    @property
    def kernel(self) -> np.ndarray:
        """Pauli weights ``(I, X, Z, Y)`` in Bell-label order ``(F, G, G, G)``."""
        g = self.g
        return np.array([self.fidelity, g, g, g], dtype=np.float64)


def werner_from_fidelity(fidelity: float) -> BellDiagonal:
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {fidelity}")
    rest = (1.0 - fidelity) / 3.0
    return BellDiagonal((fidelity, rest, rest, rest))


def depolarize_pair(state: BellDiagonal, channel: DepolarizingChannel) -> BellDiagonal:
    """Send one half of ``state`` through ``channel``.

    The Pauli noise shifts Bell labels by XOR, so the result is the XOR
    convolution of the state with the channel kernel.
    """
    kernel = channel.kernel
    src = state.as_array()
    labels = np.arange(4)
    out = np.array([np.dot(kernel[labels ^ l], src) for l in range(4)])
    return BellDiagonal.from_array(out / out.sum())


def shannon_entropy(dist: Iterable[float]) -> float:
    """Entropy in bits, with ``0 log 0 = 0``."""
    arr = _as_probabilities(dist)
    nz = arr[arr > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def hashing_yield(state: BellDiagonal) -> float:
    """Asymptotic hashing yield ``max(0, 1 - H(p))`` per input pair."""
    return max(0.0, 1.0 - shannon_entropy(state.p))


def bxor(source: BellLabel, target: BellLabel) -> tuple[BellLabel, BellLabel]:
    """Bilateral CNOT: phase flips travel target -> source, amplitude flips source -> target."""
    source, target = BellLabel(source), BellLabel(target)
    new_source = BellLabel.from_bits(source.phase_bit ^ target.phase_bit, source.amplitude_bit)
    new_target = BellLabel.from_bits(target.phase_bit, target.amplitude_bit ^ source.amplitude_bit)
    return new_source, new_target


def modified_swap(state: BellDiagonal) -> BellDiagonal:
    """Exchange the Phi- and Psi- weights."""
    a, b, c, d = state.p
    return BellDiagonal((a, b, d, c))
