import itertools

import numpy as np
import pytest

from ebcap.bellalg import BellLabel, DepolarizingChannel, bxor, werner_from_fidelity
from ebcap.epp import PairEnsembleDistribution, load_preset
from ebcap.oracle import (
    BLOCK,
    mc_sample_code,
    mc_sample_network,
    multinomial_deviation,
    statevector_bxor_table,
)
from ebcap.pauli import builtin_cat, builtin_shor9


def test_bxor_matches_state_vectors():
    table = statevector_bxor_table()
    assert len(table) == 16
    for s, t in itertools.product(BellLabel, repeat=2):
        s2, t2 = table[((s.phase_bit, s.amplitude_bit), (t.phase_bit, t.amplitude_bit))]
        assert bxor(s, t) == (BellLabel.from_bits(*s2), BellLabel.from_bits(*t2))


def test_multinomial_deviation_pooling():
    counts = np.array([500, 495, 3, 2, 0])
    probs = np.array([0.5, 0.495, 0.003, 0.002, 0.0])
    emp, se, ana, worst, notes = multinomial_deviation(counts, probs, list("abcde"))
    assert set(emp) == {"a", "b", "pooled"}
    assert notes["pooled_cells"] == 2
    assert worst == pytest.approx(0.0, abs=1e-12)
    _, _, _, worst, notes = multinomial_deviation(np.array([9, 1]), np.array([1.0, 0.0]))
    assert worst == float("inf") and notes["impossible_hits"] == 1


def test_code_sampler_small():
    report = mc_sample_code(builtin_cat(3), DepolarizingChannel(0.7), 20000, seed=1)
    assert report.passed, report.summary()
    assert sum(report.analytic.values()) == pytest.approx(1.0)


def test_sampler_reproducible_and_block_structured():
    code, ch = builtin_cat(4), DepolarizingChannel(0.6)
    r1 = mc_sample_code(code, ch, BLOCK + 123, seed=3)
    r2 = mc_sample_code(code, ch, BLOCK + 123, seed=3)
    assert r1.empirical == r2.empirical
    r3 = mc_sample_code(code, ch, BLOCK + 123, seed=4)
    assert r3.empirical != r1.empirical
    with pytest.raises(ValueError):
        mc_sample_code(code, ch, 0, seed=3)


def test_network_sampler_small():
    dist = PairEnsembleDistribution.product([werner_from_fidelity(0.85)] * 4)
    report = mc_sample_network(dist, load_preset("leung-shor"), 50000, seed=2)
    assert report.passed, report.summary()
    assert "p_pass" in report.empirical


@pytest.mark.slow
def test_shor_sampler_million():
    report = mc_sample_code(builtin_shor9(), DepolarizingChannel(0.8), 10**6, seed=7)
    assert report.passed, report.summary()
