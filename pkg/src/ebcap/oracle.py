"""Independent checks: an explicit state-vector calculation and Monte Carlo samplers.

The state-vector table is built from explicit amplitudes and shares no code
with the Bell-label algebra it is meant to check.

Random numbers come from numpy's PCG64.  Trials are cut into fixed blocks of
``BLOCK`` samples and block ``i`` draws from the ``i``-th child of
``SeedSequence(seed)``, so a report depends only on ``(seed, trials)``, never
on how many workers ran the blocks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ebcap.aqecc import _key_contributions, enumerate_code
from ebcap.bellalg import DepolarizingChannel
from ebcap.epp import GateNetwork, PairEnsembleDistribution, apply_network, pass_mask
from ebcap.pauli import StabilizerCode

BLOCK = 1 << 16
SIGMA_GATE = 4.0
#: cells expected to hold fewer than this many samples are pooled together
MIN_EXPECTED = 10.0

_S = 1 / math.sqrt(2)
# two-qubit Bell vectors on |a b>, basis order 00, 01, 10, 11; keyed by (phase, amplitude)
_BELL_VECTORS = {
    (0, 0): np.array([_S, 0, 0, _S]),
    (0, 1): np.array([0, _S, _S, 0]),
    (1, 0): np.array([_S, 0, 0, -_S]),
    (1, 1): np.array([0, _S, -_S, 0]),
}


def _cnot(num_qubits: int, control: int, target: int) -> np.ndarray:
    dim = 1 << num_qubits
    mat = np.zeros((dim, dim))
    for i in range(dim):
        bit = i >> (num_qubits - 1 - control) & 1
        j = i ^ (bit << (num_qubits - 1 - target))
        mat[j, i] = 1.0
    return mat


def _pair_product(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Qubit order (A1, B1, A2, B2) reordered to (A1, A2, B1, B2)."""
    vec = np.kron(first, second).reshape(2, 2, 2, 2)
    return vec.transpose(0, 2, 1, 3).reshape(16)


def statevector_bxor_table() -> dict[tuple[tuple[int, int], tuple[int, int]], tuple[tuple[int, int], tuple[int, int]]]:
    """Bilateral CNOT (pair 1 controls pair 2) on every product of Bell pairs.

    Keys and values are ``((phase, amp), (phase, amp))`` for (source, target).
    Qubits are ordered Alice-1, Alice-2, Bob-1, Bob-2.
    """
    gate = _cnot(4, 0, 1) @ _cnot(4, 2, 3)
    basis = {
        (s, t): _pair_product(_BELL_VECTORS[s], _BELL_VECTORS[t])
        for s, t in itertools.product(_BELL_VECTORS, repeat=2)
    }
    table = {}
    for key, vec in basis.items():
        out = gate @ vec
        overlaps = {other: float(np.dot(ref, out)) for other, ref in basis.items()}
        hits = [other for other, ov in overlaps.items() if abs(abs(ov) - 1.0) < 1e-12]
        rest = [ov for other, ov in overlaps.items() if other not in hits]
        if len(hits) != 1 or any(abs(ov) > 1e-12 for ov in rest):
            raise RuntimeError(f"could not identify the image of {key}: {overlaps}")
        table[key] = hits[0]
    return table


@dataclass
class McReport:
    trials: int
    seed: int
    empirical: dict[str, float]
    std_errors: dict[str, float]
    analytic: dict[str, float]
    max_sigma_deviation: float
    notes: dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_sigma_deviation <= SIGMA_GATE

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: {self.trials} trials, seed {self.seed}, "
            f"max deviation {self.max_sigma_deviation:.3f} sigma (gate {SIGMA_GATE} sigma)"
        )


def _block_counts(
    trials: int, seed: int, n_cells: int, draw: Callable[[np.random.Generator, int], np.ndarray]
) -> np.ndarray:
    if trials < 1:
        raise ValueError("need at least one trial")
    blocks = [(i, min(BLOCK, trials - i * BLOCK)) for i in range(math.ceil(trials / BLOCK))]
    children = np.random.SeedSequence(seed).spawn(len(blocks))
    counts = np.zeros(n_cells, dtype=np.int64)
    for (i, size), child in zip(blocks, children):
        cells = draw(np.random.Generator(np.random.PCG64(child)), size)
        counts += np.bincount(cells, minlength=n_cells)
    return counts


def multinomial_deviation(
    counts: np.ndarray, probs: np.ndarray, labels: list[str] | None = None
) -> tuple[dict[str, float], dict[str, float], dict[str, float], float, dict[str, object]]:
    """Compare observed counts with cell probabilities.

    Cells whose expected count is below ``MIN_EXPECTED`` are merged into one
    ``pooled`` cell.  A positive count in a zero-probability cell is an
    infinite deviation.
    """
    trials = int(counts.sum())
    labels = labels or [str(i) for i in range(len(probs))]
    expected = probs * trials
    impossible = (probs <= 0.0) & (counts > 0)
    big = expected >= MIN_EXPECTED
    small = ~big & (probs > 0.0)
    cells: list[tuple[str, int, float]] = [(labels[i], int(counts[i]), float(probs[i])) for i in np.flatnonzero(big)]
    if small.any():
        cells.append(("pooled", int(counts[small].sum()), float(probs[small].sum())))
    empirical, errors, analytic = {}, {}, {}
    worst = math.inf if impossible.any() else 0.0
    for name, c, q in cells:
        freq = c / trials
        se = math.sqrt(q * (1.0 - q) / trials)
        empirical[name], errors[name], analytic[name] = freq, se, q
        if se > 0.0:
            worst = max(worst, abs(freq - q) / se)
        elif freq != q:
            worst = math.inf
    notes = {"cells": len(cells), "pooled_cells": int(small.sum()), "impossible_hits": int(impossible.sum())}
    return empirical, errors, analytic, worst, notes


def mc_sample_code(code: StabilizerCode, channel: DepolarizingChannel, trials: int, seed: int) -> McReport:
    """Sample i.i.d. Pauli patterns and compare (syndrome, class) frequencies with the exact table."""
    contrib = _key_contributions(code)
    table = enumerate_code(code, channel)
    m = code.num_generators
    kernel = np.array([channel.fidelity, channel.g, channel.g, channel.g])  # digit order I, X, Y, Z

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        digits = rng.choice(4, size=(size, code.n), p=kernel)
        keys = np.zeros(size, dtype=np.int64)
        for q in range(code.n):
            keys ^= contrib[q][digits[:, q]]
        return keys

    n_cells = 1 << (m + 2)
    counts = _block_counts(trials, seed, n_cells, draw)
    # key = syndrome | label << m, matching table.entries[s, label]
    probs = table.entries.T.reshape(-1)
    labels = [f"s={''.join(str(k >> i & 1) for i in range(m))},c={k >> m}" for k in range(n_cells)]
    emp, se, ana, worst, notes = multinomial_deviation(counts, probs, labels)
    notes.update(code=code.name, p=channel.p)
    return McReport(trials, seed, emp, se, ana, worst, notes)


def mc_sample_network(dist: PairEnsembleDistribution, net: GateNetwork, trials: int, seed: int) -> McReport:
    """Sample label strings, push them through the gates and apply the checks."""
    perm = np.asarray(net.permutation)
    ok = pass_mask(net)
    probs = dist.probs
    exact = apply_network(dist, net)
    shifts = [2 * (net.num_pairs - 1 - j) for j in net.kept]
    n_kept = 4 ** len(net.kept)

    def kept_index(strings: np.ndarray) -> np.ndarray:
        out = np.zeros_like(strings)
        for s in shifts:
            out = out << 2 | (strings >> s) & 3
        return out

    # cell n_kept encodes "failed"
    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        strings = perm[rng.choice(probs.size, size=size, p=probs)]
        return np.where(ok[strings], kept_index(strings), n_kept)

    counts = _block_counts(trials, seed, n_kept + 1, draw)
    joint = np.zeros(n_kept + 1)
    if exact.post is not None:
        joint[:n_kept] = exact.post.probs * exact.p_pass
    joint[n_kept] = 1.0 - exact.p_pass
    labels = [f"kept={i}" for i in range(n_kept)] + ["fail"]
    emp, se, ana, worst, notes = multinomial_deviation(counts, joint, labels)

    passes = int(counts[:n_kept].sum())
    q = exact.p_pass
    se_pass = math.sqrt(q * (1.0 - q) / trials)
    emp["p_pass"], ana["p_pass"], se["p_pass"] = passes / trials, q, se_pass
    if se_pass > 0.0:
        worst = max(worst, abs(passes / trials - q) / se_pass)
    elif passes / trials != q:
        worst = math.inf
    notes.update(network=net.name)
    return McReport(trials, seed, emp, se, ana, worst, notes)
