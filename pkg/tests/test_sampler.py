import numpy as np
import pytest

from homodyne_bell import chsh_B, estimate_B, p_plus_plus, sample_joint, seed, tmss

CHI = np.pi / 4


def test_same_seed_reproduces_counts(pipeline_state):
    a = sample_joint(pipeline_state, CHI, 20_000, seed=7)
    b = sample_joint(pipeline_state, CHI, 20_000, seed=7)
    assert np.array_equal(a.counts, b.counts)
    c = sample_joint(pipeline_state, CHI, 20_000, seed=8)
    assert not np.array_equal(a.counts, c.counts)


def test_counts_total_and_metadata(pipeline_state):
    batch = sample_joint(pipeline_state, CHI, 5_000, seed=3)
    assert int(batch.counts.sum()) == 5_000
    assert batch.generator == "philox4x64"
    assert batch.chi == CHI


def test_vacuum_quadrants_are_fair():
    vac = seed(0.0, cutoff=4)
    n = 1_000_000
    batch = sample_joint(vac, 0.3, n, seed=11)
    sigma = np.sqrt(0.25 * 0.75 / n)
    for quadrant in batch.counts.reshape(-1):
        assert abs(quadrant / n - 0.25) < 3 * sigma


def test_marginal_signs_are_balanced(pipeline_state):
    n = 400_000
    for state, chi, s in ((pipeline_state, CHI, 21), (tmss(0.6), 1.1, 22)):
        batch = sample_joint(state, chi, n, seed=s)
        sigma = 0.5 / np.sqrt(n)
        plus_a = batch.counts[0].sum() / n
        plus_b = batch.counts[:, 0].sum() / n
        assert abs(plus_a - 0.5) < 3 * sigma
        assert abs(plus_b - 0.5) < 3 * sigma


def test_empirical_quadrant_tracks_analytic(pipeline_state):
    n = 1_000_000
    batch = sample_joint(pipeline_state, CHI, n, seed=42)
    p = p_plus_plus(pipeline_state, CHI)
    sigma = np.sqrt(p * (1 - p) / n)
    assert abs(batch.p_plus_plus() - p) < 3 * sigma


def test_sampling_requires_normalized_state():
    from homodyne_bell import CoefficientVector
    with pytest.raises(ValueError):
        sample_joint(CoefficientVector(np.array([1.0, 1.0])), CHI, 10, seed=0)


def test_convergence_rate_over_seeded_runs(pipeline_state):
    # 1/sqrt(n) convergence: 3-sigma coverage over 100 seeded runs
    n = 10_000
    p = p_plus_plus(pipeline_state, CHI)
    sigma = np.sqrt(p * (1 - p) / n)
    hits = sum(
        abs(sample_joint(pipeline_state, CHI, n, seed=1000 + i).p_plus_plus() - p) < 3 * sigma
        for i in range(100)
    )
    assert hits >= 99


def test_estimate_vacuum_is_zero_within_errors():
    est = estimate_B(seed(0.0, cutoff=4), CHI, 200_000, seed=5)
    assert abs(est.b) < 3 * est.stderr
    assert est.batch_chi.seed != est.batch_3chi.seed


def test_estimate_matches_analytic_for_pipeline(pipeline_state):
    est = estimate_B(pipeline_state, CHI, 1_000_000, seed=42)
    assert abs(est.b - chsh_B(pipeline_state, CHI)) < 3 * est.stderr
    assert est.b > 2.0


def test_estimate_respects_gaussian_bound():
    v = tmss(0.6)
    est = estimate_B(v, CHI, 200_000, seed=17)
    assert est.b <= 2.0 + 3 * est.stderr


def test_raw_sample_export(pipeline_state):
    batch = sample_joint(pipeline_state, CHI, 1_000, seed=1, keep_samples=True)
    assert batch.samples.shape == (1_000, 2)
    signs = batch.samples >= 0
    counts = np.array([
        [np.sum(signs[:, 0] & signs[:, 1]), np.sum(signs[:, 0] & ~signs[:, 1])],
        [np.sum(~signs[:, 0] & signs[:, 1]), np.sum(~signs[:, 0] & ~signs[:, 1])],
    ])
    assert np.array_equal(counts, batch.counts)
