"""Adaptive stabilizer-code protocols for sharing ebits over the depolarizing channel.

Alice encodes half of a Phi+ pair into an [n,1] code and sends the qubits one
at a time.  Bob measures each generator as soon as its support has arrived;
while the first ``k`` generators (the *abort prefix*) are being checked, a -1
outcome makes both parties abandon the block and start over.  Blocks that
survive are hashed separately for every outcome of the remaining generators.

The exact probabilities come from a weight enumerator: every one of the
``4**n`` Pauli patterns is visited once per code and its (syndrome, logical
class) key is tallied by the number of non-identity positions.  The table for
any channel parameter is then a polynomial evaluation of those integer counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from ebcap.bellalg import BellDiagonal, DepolarizingChannel, hashing_yield, modified_swap, werner_from_fidelity
from ebcap.pauli import PauliString, StabilizerCode, commutes, uses_schedule

DEFAULT_MAX_QUBITS = 12
_CHUNK = 1 << 20
# Pauli digit -> (x, z); digit order I, X, Y, Z
_DIGIT_XZ = ((0, 0), (1, 0), (1, 1), (0, 1))


class EnumerationBudgetError(ValueError):
    pass


def _key_contributions(code: StabilizerCode) -> np.ndarray:
    """XOR contribution of each single-qubit Pauli to the packed key.

    Key layout: bits ``0..m-1`` syndrome, bit ``m`` amplitude, bit ``m+1`` phase,
    so ``key >> m`` is the :class:`BellLabel` value.
    """
    checks = list(code.generators) + [code.logical_z, code.logical_x]
    out = np.zeros((code.n, 4), dtype=np.int64)
    for q in range(code.n):
        for digit, (x, z) in enumerate(_DIGIT_XZ):
            single = PauliString(code.n, x << q, z << q)
            key = 0
            for b, op in enumerate(checks):
                if not commutes(single, op):
                    key |= 1 << b
            out[q, digit] = key
    return out


def _count_chunk(contrib: np.ndarray, start: int, stop: int, n_keys: int) -> np.ndarray:
    n = contrib.shape[0]
    idx = np.arange(start, stop, dtype=np.int64)
    keys = np.zeros_like(idx)
    weights = np.zeros_like(idx)
    for q in range(n):
        digit = (idx >> (2 * q)) & 3
        keys ^= contrib[q][digit]
        weights += digit != 0
    return np.bincount(keys * (n + 1) + weights, minlength=n_keys * (n + 1))


@lru_cache(maxsize=32)
def weight_enumerator(
    code: StabilizerCode, max_qubits: int = DEFAULT_MAX_QUBITS, workers: int | None = None
) -> np.ndarray:
    """Integer counts ``[key, w]`` of Pauli patterns with ``w`` non-identity positions.

    Chunks are tallied independently and summed in index order, so the result
    does not depend on ``workers``.
    """
    if code.n > max_qubits:
        raise EnumerationBudgetError(
            f"exhaustive enumeration of {code.name or 'code'} needs 4^{code.n} patterns, "
            f"over the budget of n <= {max_qubits}; use Monte Carlo sampling (verify code) instead"
        )
    contrib = _key_contributions(code)
    n_keys = 1 << (code.num_generators + 2)
    total = 4**code.n
    bounds = [(s, min(s + _CHUNK, total)) for s in range(0, total, _CHUNK)]
    workers = workers or int(os.environ.get("EBCAP_WORKERS", "1"))
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _count_chunk(contrib, b[0], b[1], n_keys), bounds))
    else:
        parts = [_count_chunk(contrib, a, b, n_keys) for a, b in bounds]
    counts = np.zeros(n_keys * (code.n + 1), dtype=np.int64)
    for part in parts:
        counts += part
    counts = counts.reshape(n_keys, code.n + 1)
    counts.flags.writeable = False
    return counts


@dataclass(frozen=True)
class SyndromeTable:
    """Joint distribution of (syndrome, logical class); ``entries[s, label]``.

    Syndrome ``s`` packs generator ``g_{i+1}`` into bit ``i``.
    """

    code: StabilizerCode
    p: float
    entries: np.ndarray

    @property
    def num_generators(self) -> int:
        return self.code.num_generators

    def prefix_mass(self, k: int) -> float:
        """Probability that the first ``k`` syndrome bits are all zero."""
        s = np.arange(self.entries.shape[0])
        return float(self.entries[(s & ((1 << k) - 1)) == 0].sum())


def enumerate_code(
    code: StabilizerCode, channel: DepolarizingChannel, max_qubits: int = DEFAULT_MAX_QUBITS
) -> SyndromeTable:
    counts = weight_enumerator(code, max_qubits)
    n = code.n
    w = np.arange(n + 1)
    f, g = channel.fidelity, channel.g
    pattern_prob = f ** (n - w) * g**w
    probs = counts @ pattern_prob
    m = code.num_generators
    # key = syndrome | label << m
    entries = probs.reshape(4, 1 << m).T.copy()
    return SyndromeTable(code, channel.p, entries)


def conditional_pass_probs(table: SyndromeTable, k: int) -> list[float]:
    if not 0 <= k <= table.num_generators:
        raise ValueError(f"prefix {k} outside 0..{table.num_generators}")
    out = []
    prev = 1.0
    for i in range(1, k + 1):
        cur = table.prefix_mass(i)
        out.append(cur / prev if prev > 0.0 else 0.0)
        prev = cur
    return out


def expected_uses(schedule: Sequence[int], pass_probs: Sequence[float], k: int, n: int) -> float:
    """Mean channel uses per attempted block when aborting on the first ``k`` checks."""
    if not 0 <= k <= len(schedule) or len(pass_probs) < k:
        raise ValueError(f"prefix {k} inconsistent with schedule of length {len(schedule)}")
    if any(a > b for a, b in zip(schedule, schedule[1:])) or (schedule and schedule[-1] > n):
        raise ValueError(f"schedule {tuple(schedule)} must be nondecreasing and end at most at n={n}")
    total = 0.0
    survive = 1.0
    for q, p in zip(schedule[:k], pass_probs[:k]):
        total += q * survive * (1.0 - p)
        survive *= p
    return total + n * survive


@dataclass(frozen=True)
class AdaptiveTrace:
    p_list: tuple[float, ...]
    #: ``(outcome of the remaining generators, joint probability with passing, state)``
    final_states: tuple[tuple[int, float, BellDiagonal], ...]
    expected_uses: float
    success_prob: float

    @property
    def ebits_per_block(self) -> float:
        return sum(prob * hashing_yield(state) for _, prob, state in self.final_states)

    @property
    def yield_per_use(self) -> float:
        if self.success_prob <= 0.0:
            return 0.0
        return self.ebits_per_block / self.expected_uses


def adaptive_trace(table: SyndromeTable, k: int) -> AdaptiveTrace:
    code = table.code
    p_list = conditional_pass_probs(table, k)
    uses = expected_uses(uses_schedule(code), p_list, k, code.n)
    passed = table.entries[:: 1 << k]  # rows whose low k bits are zero, ordered by outcome
    finals = []
    for outcome, row in enumerate(passed):
        mass = float(row.sum())
        if mass > 0.0:
            finals.append((outcome, mass, BellDiagonal.from_array(row / mass)))
    return AdaptiveTrace(tuple(p_list), tuple(finals), uses, table.prefix_mass(k))


def adaptive_yield(code: StabilizerCode, channel: DepolarizingChannel, k: int) -> float:
    return adaptive_trace(enumerate_code(code, channel), k).yield_per_use


def cat_trace(n: int, channel: DepolarizingChannel, modified: bool = False) -> AdaptiveTrace:
    """Closed-form trace of the n-qubit cat code (all n-1 checks abort on failure)."""
    if n < 2:
        raise ValueError(f"cat code needs n >= 2, got {n}")
    f, g = channel.fidelity, channel.g
    state = werner_from_fidelity(f)
    p_list = []
    for _ in range(n - 1):
        a, b, c, d = state.p
        num = (f * a + g * c, g * b + g * d, g * a + f * c, g * b + g * d)
        passed = sum(num)
        p_list.append(passed)
        state = BellDiagonal.from_array(np.asarray(num) / passed)
        if modified:
            state = modified_swap(state)
    success = math.prod(p_list)
    uses = expected_uses(tuple(range(2, n + 1)), p_list, n - 1, n)
    return AdaptiveTrace(tuple(p_list), ((0, success, state),), uses, success)


def cat_yield(n: int, channel: DepolarizingChannel, modified: bool = False) -> float:
    return max(0.0, cat_trace(n, channel, modified).yield_per_use)


def best_strategy(
    code: StabilizerCode, channel: DepolarizingChannel, prefixes: Iterable[int], rtol: float = 1e-12
) -> tuple[int, float]:
    """Best abort prefix; near-ties within ``rtol`` go to the larger prefix."""
    table = enumerate_code(code, channel)
    best_k, best_y = None, -1.0
    for k in sorted(set(prefixes), reverse=True):
        y = adaptive_trace(table, k).yield_per_use
        if best_k is None or y > best_y + rtol * max(abs(best_y), 1e-300):
            best_k, best_y = k, y
    if best_k is None:
        raise ValueError("no candidate prefixes given")
    return best_k, best_y


def strategy_regions(
    code: StabilizerCode, grid: Sequence[float], prefixes: Iterable[int]
) -> list[tuple[float, int]]:
    """``(p, k)`` at every grid point where the winning prefix changes (first point included)."""
    prefixes = tuple(prefixes)
    out: list[tuple[float, int]] = []
    for p in grid:
        k, _ = best_strategy(code, DepolarizingChannel(p), prefixes)
        if not out or out[-1][1] != k:
            out.append((p, k))
    return out


class NoThresholdError(ValueError):
    pass


class Threshold(NamedTuple):
    p: float
    fidelity: float


def threshold(
    yield_fn: Callable[[float], float],
    lo: float = 0.25,
    hi: float = 1.0,
    tol: float = 1e-5,
    scan_step: float = 1e-3,
) -> Threshold:
    """Smallest ``p`` beyond which ``yield_fn`` stays positive.

    A coarse scan finds the last grid point with zero yield; bisection then
    narrows the transition to ``tol``.
    """
    if not lo < hi:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    steps = max(1, int(math.ceil((hi - lo) / scan_step - 1e-9)))
    grid = np.linspace(lo, hi, steps + 1)
    positive = [yield_fn(float(p)) > 0.0 for p in grid]
    if positive[0] or not positive[-1]:
        raise NoThresholdError(f"no threshold in range [{lo}, {hi}]")
    last_zero = max(i for i, pos in enumerate(positive) if not pos)
    a, b = float(grid[last_zero]), float(grid[last_zero + 1])
    while b - a > tol:
        mid = 0.5 * (a + b)
        if yield_fn(mid) > 0.0:
            b = mid
        else:
            a = mid
    p_star = 0.5 * (a + b)
    return Threshold(p_star, (3.0 * p_star + 1.0) / 4.0)


def cat_threshold(n: int, modified: bool = False, tol: float = 1e-5) -> Threshold:
    return threshold(lambda p: cat_yield(n, DepolarizingChannel(p), modified), tol=tol)


def truncated_code(code: StabilizerCode, k: int) -> StabilizerCode:
    """First ``k`` generators restricted to the qubits they need (marginalisation checks)."""
    q = uses_schedule(code)[k - 1]
    mask = (1 << q) - 1
    gens = tuple(PauliString(q, g.x_bits & mask, g.z_bits & mask) for g in code.generators[:k])
    # logicals are irrelevant for prefix probabilities; keep a valid-shaped pair
    return StabilizerCode(q, gens, PauliString(q), PauliString(q), name=f"{code.name}[:{k}]")
