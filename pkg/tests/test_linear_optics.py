import numpy as np
import pytest
from scipy.linalg import expm

from homodyne_bell import (
    BeamSplitter,
    CoefficientVector,
    DetectorOutcome,
    FourModeTensor,
    TwoModeAmplitudeMatrix,
    apply_bs_pair_on_four_modes,
    apply_bs_two_mode,
    bs_matrix_element,
    condition_on_outcome,
    normalize,
    photon_subtract_beamsplitter,
    photon_subtract_exact,
    ps_tmss,
    run_pipeline,
    tmss,
)
from homodyne_bell.pipeline import PipelineConfig


def brute_force_unitary(T, R, cutoff):
    """Product of the four factor exponentials on a dense two-mode space.

    Exact on every subspace of conserved total photon number <= cutoff.
    """
    d = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1.0, d)), 1)
    eye = np.eye(d)
    A = np.kron(a, eye)
    B = np.kron(eye, a)
    lnT = np.log(complex(T))
    U = (expm(A.conj().T @ A * lnT)
         @ expm(-np.conj(R) * (B.conj().T @ A))
         @ expm(R * (B @ A.conj().T))
         @ expm(-(B.conj().T @ B) * lnT))
    return U.reshape(d, d, d, d)


def random_splitter(rng):
    theta = rng.uniform(0.15, 1.4)
    return BeamSplitter(np.cos(theta) * np.exp(1j * rng.uniform(0, 2 * np.pi)),
                        np.sin(theta) * np.exp(1j * rng.uniform(0, 2 * np.pi)))


def test_vacuum_is_invariant():
    bs = BeamSplitter(0.6, 0.8)
    assert bs_matrix_element(bs, 0, 0, 0, 0) == 1.0


def test_single_photon_elements():
    bs = BeamSplitter(0.6 * np.exp(0.3j), 0.8 * np.exp(-0.7j))
    assert abs(bs_matrix_element(bs, 1, 0, 1, 0) - bs.T) < 1e-14
    assert abs(bs_matrix_element(bs, 0, 1, 1, 0) + np.conj(bs.R)) < 1e-14


def test_two_photon_element():
    bs = BeamSplitter(0.6, 0.8)
    assert abs(bs_matrix_element(bs, 2, 0, 1, 1) - np.sqrt(2) * 0.6 * 0.8) < 1e-14


def test_photon_conservation_exhaustive():
    bs = BeamSplitter(0.6, 0.8)
    for j in range(9):
        for k in range(9):
            for m in range(9):
                for n in range(9):
                    if j + k != m + n:
                        assert bs_matrix_element(bs, j, k, m, n) == 0.0


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        bs_matrix_element(BeamSplitter(0.6, 0.8), -1, 1, 0, 0)


def test_large_indices_stay_finite_and_unitary():
    # 64 photons: log-factorial accumulation must not overflow, and the
    # row norm survives the oscillatory cancellation to ~1e-6
    for t in (0.3, 1 / np.sqrt(2), 0.9):
        bs = BeamSplitter.from_transmissivity(t)
        row = [bs_matrix_element(bs, j, 64 - j, 32, 32) for j in range(65)]
        assert all(np.isfinite(e) for e in row)
        assert max(abs(e) for e in row) <= 1.0
        assert abs(sum(abs(e) ** 2 for e in row) - 1.0) < 1e-6


def test_brute_force_equivalence_20_random_splitters():
    rng = np.random.default_rng(1905)
    cutoff = 6
    for _ in range(20):
        bs = random_splitter(rng)
        U = brute_force_unitary(bs.T, bs.R, cutoff)
        worst = 0.0
        for m in range(cutoff + 1):
            for n in range(cutoff + 1):
                if m + n > cutoff:
                    continue
                for j in range(m + n + 1):
                    k = m + n - j
                    worst = max(worst, abs(bs_matrix_element(bs, j, k, m, n) - U[j, k, m, n]))
        assert worst < 1e-10


def test_unitarity_of_splitter_constructor():
    with pytest.raises(ValueError):
        BeamSplitter(0.9, 0.9)


def test_identity_splitter_leaves_state():
    rng = np.random.default_rng(3)
    amps = rng.standard_normal((5, 5))
    amps /= np.linalg.norm(amps)
    state = TwoModeAmplitudeMatrix(amps)
    out = apply_bs_two_mode(BeamSplitter.identity(), state)
    assert np.max(np.abs(out.amps - amps)) < 1e-14


def test_balanced_splitter_on_single_photon():
    amps = np.zeros((3, 3))
    amps[1, 0] = 1.0
    out = apply_bs_two_mode(BeamSplitter.balanced(), TwoModeAmplitudeMatrix(amps))
    s = 1 / np.sqrt(2)
    assert abs(out.amps[1, 0] - s) < 1e-14
    assert abs(out.amps[0, 1] + s) < 1e-14


def test_two_mode_norm_preserved_below_cutoff():
    rng = np.random.default_rng(7)
    for _ in range(5):
        bs = random_splitter(rng)
        amps = np.zeros((9, 9))
        amps[:4, :4] = rng.standard_normal((4, 4))  # support far below cutoff
        amps /= np.linalg.norm(amps)
        out = apply_bs_two_mode(bs, TwoModeAmplitudeMatrix(amps))
        assert abs(out.norm_squared() - 1.0) < 1e-12
        assert out.notes == ()


def test_truncation_warning_on_top_level_mass():
    amps = np.zeros((3, 3))
    amps[2, 2] = 1.0
    out = apply_bs_two_mode(BeamSplitter.balanced(), TwoModeAmplitudeMatrix(amps))
    assert any("truncation" in note for note in out.notes)


def product_of_two_tmss(lam, cutoff):
    c = tmss(lam, cutoff).coeffs
    c = c / np.linalg.norm(c)
    amps = np.einsum("m,n->mn", c, c)
    four = np.zeros((cutoff + 1,) * 4)
    for m in range(cutoff + 1):
        for n in range(cutoff + 1):
            four[m, m, n, n] = amps[m, n]
    return FourModeTensor(four)


def test_four_mode_identity_and_unitarity():
    t = product_of_two_tmss(0.01, 4)
    out = apply_bs_pair_on_four_modes(BeamSplitter.identity(), t)
    assert np.max(np.abs(out.amps - t.amps)) < 1e-14
    rng = np.random.default_rng(5)
    out2 = apply_bs_pair_on_four_modes(random_splitter(rng), t)
    assert abs(out2.norm_squared() - 1.0) < 1e-12


def test_condition_on_vacuum_click_is_impossible():
    four = np.zeros((3, 3, 3, 3))
    four[0, 0, 0, 0] = 1.0
    with pytest.raises(ValueError):
        condition_on_outcome(FourModeTensor(four),
                             outcomes=(DetectorOutcome.click(), DetectorOutcome.click()))


def test_condition_certain_click():
    four = np.zeros((2, 2, 2, 2))
    four[0, 0, 1, 1] = 1.0  # one photon in each detected mode
    ens = condition_on_outcome(FourModeTensor(four),
                               outcomes=(DetectorOutcome.click(), DetectorOutcome.click()))
    assert abs(ens.success_probability - 1.0) < 1e-12
    assert len(ens.branches) == 1


def test_click_ensemble_matches_exhaustive_projector_sum():
    t = product_of_two_tmss(0.15, 5)
    bs = BeamSplitter.from_transmissivity(0.8)
    mixed = apply_bs_pair_on_four_modes(bs, t)
    ens = condition_on_outcome(mixed)
    manual = 0.0
    for k in range(1, 6):
        for l in range(1, 6):
            manual += float(np.sum(np.abs(mixed.amps[:, :, k, l]) ** 2))
    assert abs(ens.success_probability - manual) < 1e-14


def test_click_plus_vacuum_probabilities_are_complete():
    # support kept far enough below the cutoff that truncation leakage < 1e-12
    t = product_of_two_tmss(0.1, 7)
    mixed = apply_bs_pair_on_four_modes(BeamSplitter.from_transmissivity(0.7), t)
    vac, click = DetectorOutcome.vacuum(), DetectorOutcome.click()
    total = sum(
        condition_on_outcome(mixed, outcomes=pair).success_probability
        for pair in ((vac, vac), (vac, click), (click, vac), (click, click))
    )
    assert abs(total - 1.0) < 1e-12


def test_exact_count_outcome():
    t = product_of_two_tmss(0.15, 5)
    mixed = apply_bs_pair_on_four_modes(BeamSplitter.from_transmissivity(0.7), t)
    one_one = condition_on_outcome(
        mixed, outcomes=(DetectorOutcome.exact_count(1), DetectorOutcome.exact_count(1)))
    assert len(one_one.branches) == 1
    direct = float(np.sum(np.abs(mixed.amps[:, :, 1, 1]) ** 2))
    assert abs(one_one.success_probability - direct) < 1e-14


def test_subtract_exact_single_pair():
    out = photon_subtract_exact(CoefficientVector(np.array([0.0, 1.0])))
    assert np.allclose(out.coeffs, [1.0])


def test_subtract_exact_on_seed_leaves_vacuum():
    for xi in (0.3, 1.0, 2.5):
        out = photon_subtract_exact(normalize(CoefficientVector(np.array([1.0, xi, 0.0]))))
        assert np.allclose(out.coeffs, [1.0, 0.0])


def test_subtract_exact_matches_catalog_formula():
    lam = 0.6
    via_op = photon_subtract_exact(tmss(lam, cutoff=35))
    closed = ps_tmss(lam, cutoff=34)
    assert np.max(np.abs(via_op.coeffs - closed.coeffs)) < 1e-12


def test_subtract_exact_needs_excited_support():
    with pytest.raises(ValueError):
        photon_subtract_exact(CoefficientVector(np.array([1.0, 0.0])))


@pytest.fixture(scope="module")
def stage2_state():
    rep = run_pipeline(PipelineConfig(xi=1 / np.sqrt(2)))
    return rep.stage_states[-1]


def test_subtract_beamsplitter_converges_to_exact(stage2_state):
    exact = photon_subtract_exact(stage2_state)
    approx, _ = photon_subtract_beamsplitter(stage2_state, 0.01)
    assert np.linalg.norm(approx.coeffs - exact.coeffs) < 1e-4


def test_subtract_beamsplitter_success_scaling(stage2_state):
    _, p1 = photon_subtract_beamsplitter(stage2_state, 0.005)
    _, p2 = photon_subtract_beamsplitter(stage2_state, 0.01)
    assert abs(p2 / p1 - 16.0) < 0.02 * 16.0


def test_subtract_beamsplitter_rejects_vacuum_and_large_r():
    with pytest.raises(ValueError):
        photon_subtract_beamsplitter(CoefficientVector(np.array([1.0, 0.0])), 0.01)
    with pytest.raises(ValueError):
        photon_subtract_beamsplitter(CoefficientVector(np.array([0.0, 1.0])), 0.5)
