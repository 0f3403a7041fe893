"""Entanglement purification over distributions of Bell-label strings.

A group of ``m`` pairs is a distribution over ``4**m`` label strings.  Pair 0
occupies the two most significant bits, so the string index of labels
``(l0, ..., l_{m-1})`` is ``sum(l_j * 4**(m-1-j))`` and the product of
independent pairs is a Kronecker product.

Bilateral XOR gates permute strings.  A Z-basis check on a pair passes iff its
amplitude bit is 0, an X-basis check iff its phase bit is 0.

Network preset format (1-based pair numbers, ``#`` comments)::

    pairs <m>
    bxor <source> <target>      # any number, applied in order
    measure <pair> <X|Z>
    keep <pair> [<pair> ...]
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from ebcap.bellalg import (
    BellDiagonal,
    BellLabel,
    DepolarizingChannel,
    bxor,
    hashing_yield,
    modified_swap,
    shannon_entropy,
    werner_from_fidelity,
)
from ebcap.capacity import classical_capacity_depolarizing


@dataclass(frozen=True)
class GateNetwork:
    num_pairs: int
    gates: tuple[tuple[int, int], ...]
    measurements: tuple[tuple[int, str], ...]
    kept: tuple[int, ...]
    name: str = ""

    def __post_init__(self) -> None:
        m = self.num_pairs
        if m < 1:
            raise ValueError("a network needs at least one pair")
        for src, dst in self.gates:
            if not (0 <= src < m and 0 <= dst < m) or src == dst:
                raise ValueError(f"bad gate ({src}, {dst}) for {m} pairs")
        measured = [pair for pair, _ in self.measurements]
        for pair, basis in self.measurements:
            if not 0 <= pair < m:
                raise ValueError(f"measured pair {pair} out of range")
            if basis not in ("X", "Z"):
                raise ValueError(f"measurement basis must be X or Z, got {basis!r}")
        if len(set(measured)) != len(measured):
            raise ValueError("a pair is measured more than once")
        if set(measured) & set(self.kept):
            raise ValueError("kept and measured pairs overlap")
        if sorted(set(measured) | set(self.kept)) != list(range(m)) or len(set(self.kept)) != len(self.kept):
            raise ValueError("every pair must be either measured or kept exactly once")

    @property
    def permutation(self) -> np.ndarray:
        return _gate_permutation(self.num_pairs, self.gates)


@lru_cache(maxsize=64)
def _gate_permutation(num_pairs: int, gates: tuple[tuple[int, int], ...]) -> np.ndarray:
    """``perm[i]`` is the string that string ``i`` becomes after all gates."""
    size = 4**num_pairs
    perm = np.empty(size, dtype=np.int64)
    for idx in range(size):
        labels = [BellLabel(v) for v in _decode(idx, num_pairs)]
        for src, dst in gates:
            labels[src], labels[dst] = bxor(labels[src], labels[dst])
        perm[idx] = _encode(labels)
    perm.flags.writeable = False
    return perm


def _decode(idx: int, num_pairs: int) -> list[int]:
    return [(idx >> (2 * (num_pairs - 1 - j))) & 3 for j in range(num_pairs)]


def _encode(labels: Sequence[int]) -> int:
    out = 0
    for lab in labels:
        out = out << 2 | int(lab)
    return out


@dataclass(frozen=True)
class PairEnsembleDistribution:
    num_pairs: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (4**self.num_pairs,):
            raise ValueError(f"expected {4 ** self.num_pairs} probabilities, got shape {probs.shape}")
        if np.any(probs < -1e-12) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("not a probability distribution")
        probs = np.clip(probs, 0.0, None)
        object.__setattr__(self, "probs", probs / probs.sum())

    @classmethod
    def product(cls, states: Sequence[BellDiagonal]) -> "PairEnsembleDistribution":
        probs = np.ones(1)
        for st in states:
            probs = np.kron(probs, st.as_array())
        return cls(len(states), probs)

    def marginal(self, pair: int) -> BellDiagonal:
        arr = self.probs.reshape((4,) * self.num_pairs)
        axes = tuple(j for j in range(self.num_pairs) if j != pair)
        return BellDiagonal.from_array(arr.sum(axis=axes))


@dataclass(frozen=True)
class NetworkResult:
    p_pass: float
    #: conditional distribution of the kept pairs; ``None`` when nothing passes
    post: PairEnsembleDistribution | None


def pass_mask(net: GateNetwork) -> np.ndarray:
    """Boolean mask over output strings that satisfy every measurement."""
    idx = np.arange(4**net.num_pairs)
    ok = np.ones(idx.shape, dtype=bool)
    for pair, basis in net.measurements:
        label = (idx >> (2 * (net.num_pairs - 1 - pair))) & 3
        bit = label >> 1 if basis == "X" else label & 1
        ok &= bit == 0
    return ok


def push_forward(dist: PairEnsembleDistribution, net: GateNetwork) -> np.ndarray:
    out = np.zeros_like(dist.probs)
    out[net.permutation] = dist.probs
    return out


def apply_network(dist: PairEnsembleDistribution, net: GateNetwork) -> NetworkResult:
    if dist.num_pairs != net.num_pairs:
        raise ValueError(f"distribution has {dist.num_pairs} pairs, network {net.num_pairs}")
    after = push_forward(dist, net)
    ok = pass_mask(net)
    p_pass = float(after[ok].sum())
    if p_pass <= 0.0:
        return NetworkResult(0.0, None)
    kept_pairs = net.kept
    shaped = np.where(ok, after, 0.0).reshape((4,) * net.num_pairs)
    measured = tuple(pair for pair, _ in net.measurements)
    kept = shaped.sum(axis=measured) if measured else shaped
    # sum() keeps remaining axes in increasing pair order; reorder to net.kept order
    order = [sorted(kept_pairs).index(pair) for pair in kept_pairs]
    kept = np.transpose(kept, order).reshape(-1)
    return NetworkResult(p_pass, PairEnsembleDistribution(len(kept_pairs), kept / p_pass))


def parse_network(text: str, name: str = "") -> GateNetwork:
    num_pairs = None
    gates: list[tuple[int, int]] = []
    measurements: list[tuple[int, str]] = []
    kept: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        key, args = line[0], line[1:]
        try:
            if key == "pairs" and len(args) == 1:
                num_pairs = int(args[0])
            elif key == "name":
                name = " ".join(args)
            elif key == "bxor" and len(args) == 2:
                gates.append((int(args[0]) - 1, int(args[1]) - 1))
            elif key == "measure" and len(args) == 2:
                measurements.append((int(args[0]) - 1, args[1].upper()))
            elif key == "keep" and args:
                kept.extend(int(a) - 1 for a in args)
            else:
                raise ValueError(f"cannot parse {raw.strip()!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if num_pairs is None:
        raise ValueError("missing 'pairs' line")
    return GateNetwork(num_pairs, tuple(gates), tuple(measurements), tuple(kept), name=name)


def render_network(net: GateNetwork) -> str:
    lines = [f"name {net.name}"] if net.name else []
    lines.append(f"pairs {net.num_pairs}")
    lines += [f"bxor {s + 1} {t + 1}" for s, t in net.gates]
    lines += [f"measure {p + 1} {b}" for p, b in net.measurements]
    lines.append("keep " + " ".join(str(p + 1) for p in net.kept))
    return "\n".join(lines) + "\n"


def load_preset(name: str) -> GateNetwork:
    """Bundled network presets: ``recurrence`` and ``leung-shor``."""
    fname = f"{name.replace('-', '_')}.net"
    try:
        text = resources.files("ebcap.presets").joinpath(fname).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValueError(f"unknown network preset {name!r}") from None
    return parse_network(text, name=name)


RECURRENCE_NET = GateNetwork(2, ((0, 1),), ((1, "Z"),), (0,), name="recurrence")


def recurrence_step(state: BellDiagonal) -> tuple[BellDiagonal, float]:
    a, b, c, d = state.p
    p_pass = a * a + b * b + c * c + d * d + 2 * a * c + 2 * b * d
    if p_pass <= 0.0:
        raise ZeroDivisionError("recurrence pass probability is zero")
    new = BellDiagonal.from_array(np.array([a * a + c * c, b * b + d * d, 2 * b * d, 2 * a * c]) / p_pass)
    return new, p_pass


def modified_recurrence_step(state: BellDiagonal) -> tuple[BellDiagonal, float]:
    new, p_pass = recurrence_step(state)
    return modified_swap(new), p_pass


def leung_shor_result(fidelity: float, net: GateNetwork | None = None) -> NetworkResult:
    net = net or load_preset("leung-shor")
    dist = PairEnsembleDistribution.product([werner_from_fidelity(fidelity)] * net.num_pairs)
    return apply_network(dist, net)


def leung_shor_yield(fidelity: float, net: GateNetwork | None = None) -> float:
    """Ebits per channel use: each group of four uses keeps two pairs for hashing."""
    net = net or load_preset("leung-shor")
    res = leung_shor_result(fidelity, net)
    if res.post is None:
        return 0.0
    kept = len(net.kept)
    ent = shannon_entropy(res.post.probs)
    return max(0.0, res.p_pass * (kept - ent) / net.num_pairs)


def multi_round_recurrence_eb(channel: DepolarizingChannel, rounds: int, modified: bool = True) -> float:
    """Recurrence rounds followed by hashing, with forward bits charged after round one."""
    if rounds < 1:
        raise ValueError(f"need at least one round, got {rounds}")
    step = modified_recurrence_step if modified else recurrence_step
    cap = classical_capacity_depolarizing(channel.p)
    if rounds > 1 and cap <= 0.0:
        return 0.0
    state = werner_from_fidelity(channel.fidelity)
    factor = 1.0
    for j in range(rounds):
        state, p_pass = step(state)
        factor *= p_pass / 2.0 if j == 0 else p_pass / (2.0 + 1.0 / cap)
    return factor * hashing_yield(state)


def best_recurrence_rounds(channel: DepolarizingChannel, max_rounds: int, modified: bool = True) -> tuple[int, float]:
    if max_rounds < 1:
        raise ValueError(f"need at least one round, got {max_rounds}")
    best = (1, multi_round_recurrence_eb(channel, 1, modified))
    for k in range(2, max_rounds + 1):
        y = multi_round_recurrence_eb(channel, k, modified)
        if y > best[1]:
            best = (k, y)
    return best


def leung_shor_channel_yield(channel: DepolarizingChannel) -> float:
    return leung_shor_yield(channel.fidelity)


def is_bijection(net: GateNetwork) -> bool:
    perm = net.permutation
    return bool(np.array_equal(np.sort(perm), np.arange(perm.size)))
