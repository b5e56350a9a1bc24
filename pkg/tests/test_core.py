"""Tests for state types and closed-form coherence/distinguishability."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quoherence import (
    DiagonalNotUnitError,
    DimensionMismatchError,
    NotHermitianError,
    NotPSDError,
    PriorsNotNormalizedError,
    QuantonMixedState,
    QuantonPureState,
    ReducedDensity,
    coherence_mixed,
    coherence_of_density,
    coherence_pure,
    distinguishability,
    duality_gap,
    identical_detectors,
    orthogonal_detectors,
    random_detector_gram,
    random_mixed_state,
    random_pure_state,
    reduced_density,
    uniform_overlap_gram,
    uqsd_bound,
    validate_gram,
)


def l1_coherence_loops(mat):
    """Independent oracle: normalized off-diagonal l1 sum by explicit loops."""
    n = mat.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += abs(mat[i, j])
    return total / (n - 1)


def distinguishability_loops(priors, gram):
    """Independent oracle for the discrimination bound."""
    n = len(priors)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += np.sqrt(priors[i] * priors[j]) * abs(gram[i, j])
    return 1.0 - total / (n - 1)


# ---------------------------------------------------------------------------
# Type validation
# ---------------------------------------------------------------------------

def test_pure_state_requires_normalization():
    with pytest.raises(ValueError):
        QuantonPureState(moduli=np.array([1.0, 1.0]))


def test_pure_state_requires_two_slits():
    with pytest.raises(DimensionMismatchError):
        QuantonPureState(moduli=np.array([1.0]))


def test_pure_state_phases_wrap():
    state = QuantonPureState(moduli=np.array([0.6, 0.8]), phases=np.array([-np.pi, 5 * np.pi]))
    assert np.all(state.phases >= 0)
    assert np.all(state.phases < 2 * np.pi)
    assert np.allclose(state.amplitudes, [0.6 * np.exp(-1j * np.pi), 0.8 * np.exp(1j * np.pi)])


def test_validate_gram_identity_ok():
    det = validate_gram(np.eye(3))
    assert det.n == 3


def test_validate_gram_all_ones_ok():
    det = validate_gram(np.ones((3, 3)))
    assert np.allclose(det.gram, 1.0)


def test_validate_gram_overlap_above_one_is_not_psd():
    mat = np.array([[1.0, 1.5], [1.5, 1.0]])
    with pytest.raises(NotPSDError):
        validate_gram(mat)


def test_validate_gram_rejects_non_hermitian():
    mat = np.array([[1.0, 0.5j], [0.5j, 1.0]])
    with pytest.raises(NotHermitianError):
        validate_gram(mat)


def test_validate_gram_rejects_bad_diagonal():
    mat = np.array([[0.9, 0.1], [0.1, 1.0]])
    with pytest.raises(DiagonalNotUnitError):
        validate_gram(mat)


def test_validate_gram_does_not_mutate_input():
    mat = np.eye(3) + 0.0
    before = mat.copy()
    validate_gram(mat)
    assert np.array_equal(mat, before)


def test_mixed_state_requires_unit_trace():
    with pytest.raises(ValueError):
        QuantonMixedState(np.eye(2))


def test_mixed_state_rejects_negative_eigenvalue():
    mat = np.array([[0.5, 0.6], [0.6, 0.5]])
    with pytest.raises(NotPSDError):
        QuantonMixedState(mat)


# ---------------------------------------------------------------------------
# reduced_density
# ---------------------------------------------------------------------------

def test_reduced_density_identical_detectors_keeps_purity():
    state = QuantonPureState.equal_superposition(2)
    rho = reduced_density(state, identical_detectors(2))
    assert np.allclose(rho.rho, 0.5)


def test_reduced_density_orthogonal_detectors_decohere():
    state = QuantonPureState.equal_superposition(2)
    rho = reduced_density(state, orthogonal_detectors(2))
    assert np.allclose(rho.rho, np.diag([0.5, 0.5]))


def test_reduced_density_uniform_half_overlap():
    # direct evaluation: off-diagonal (1/sqrt3)(1/sqrt3)*0.5 = 1/6, diagonal 1/3
    state = QuantonPureState.equal_superposition(3)
    rho = reduced_density(state, uniform_overlap_gram(3, 0.5))
    expected = np.full((3, 3), 1.0 / 6.0)
    np.fill_diagonal(expected, 1.0 / 3.0)
    assert np.allclose(rho.rho, expected, atol=1e-15)


def test_reduced_density_entry_convention():
    # rho[k, j] = c_k conj(c_j) gram[j, k], checked entry by entry via loops
    rng = np.random.default_rng(7)
    state = random_pure_state(rng, 4)
    det = random_detector_gram(rng, 4)
    rho = reduced_density(state, det)
    c = state.amplitudes
    for k in range(4):
        for j in range(4):
            assert rho.rho[k, j] == pytest.approx(c[k] * np.conj(c[j]) * det.gram[j, k], abs=1e-15)


def test_reduced_density_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        reduced_density(QuantonPureState.equal_superposition(2), identical_detectors(3))


# ---------------------------------------------------------------------------
# coherence
# ---------------------------------------------------------------------------

def test_coherence_of_diagonal_density_is_zero():
    rho = ReducedDensity(np.diag([0.5, 0.5]))
    assert coherence_of_density(rho) == 0.0


def test_coherence_of_uniform_density_is_one():
    for n in (2, 3, 5):
        rho = ReducedDensity(np.full((n, n), 1.0 / n))
        assert coherence_of_density(rho) == pytest.approx(1.0, abs=1e-12)


def test_coherence_of_density_matches_loop_oracle():
    state = QuantonPureState.equal_superposition(3)
    rho = reduced_density(state, uniform_overlap_gram(3, 0.5))
    oracle = l1_coherence_loops(np.asarray(rho.rho))
    assert oracle == pytest.approx(0.5, abs=1e-12)
    assert coherence_of_density(rho) == pytest.approx(oracle, abs=1e-14)


def test_coherence_pure_orthogonal_is_zero():
    rng = np.random.default_rng(3)
    state = random_pure_state(rng, 4)
    assert coherence_pure(state, orthogonal_detectors(4)) == 0.0


def test_coherence_pure_maximal_case():
    state = QuantonPureState.equal_superposition(5)
    assert coherence_pure(state, identical_detectors(5)) == pytest.approx(1.0, abs=1e-12)


def test_coherence_pure_half_overlap_is_half():
    state = QuantonPureState.equal_superposition(3)
    assert coherence_pure(state, uniform_overlap_gram(3, 0.5)) == pytest.approx(0.5, abs=1e-12)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_coherence_pure_equals_density_route(n, seed):
    rng = np.random.default_rng(seed)
    state = random_pure_state(rng, n)
    det = random_detector_gram(rng, n)
    direct = coherence_pure(state, det)
    via_density = coherence_of_density(reduced_density(state, det))
    assert direct == pytest.approx(via_density, abs=1e-12)


def test_coherence_mixed_diagonal_is_zero():
    mixed = QuantonMixedState(np.diag([0.2, 0.3, 0.5]))
    rng = np.random.default_rng(11)
    assert coherence_mixed(mixed, random_detector_gram(rng, 3)) == 0.0


def test_coherence_mixed_maximal_case():
    n = 4
    mixed = QuantonMixedState(np.full((n, n), 1.0 / n))
    assert coherence_mixed(mixed, identical_detectors(n)) == pytest.approx(1.0, abs=1e-12)


def test_coherence_mixed_reduces_to_pure():
    rng = np.random.default_rng(19)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        state = random_pure_state(rng, n)
        det = random_detector_gram(rng, n)
        mixed = QuantonMixedState.from_pure(state)
        assert coherence_mixed(mixed, det) == pytest.approx(coherence_pure(state, det), abs=1e-12)


# ---------------------------------------------------------------------------
# distinguishability / UQSD bound / duality gap
# ---------------------------------------------------------------------------

def test_distinguishability_orthogonal_is_one():
    rng = np.random.default_rng(2)
    state = random_pure_state(rng, 3)
    assert distinguishability(state.probabilities, orthogonal_detectors(3)) == 1.0


def test_distinguishability_identical_equal_priors_is_zero():
    n = 4
    priors = np.full(n, 1.0 / n)
    assert distinguishability(priors, identical_detectors(n)) == pytest.approx(0.0, abs=1e-12)


def test_distinguishability_half_overlap():
    priors = np.full(3, 1.0 / 3.0)
    det = uniform_overlap_gram(3, 0.5)
    assert distinguishability(priors, det) == pytest.approx(0.5, abs=1e-12)
    assert distinguishability_loops(priors, np.asarray(det.gram)) == pytest.approx(0.5, abs=1e-12)


def test_distinguishability_rejects_bad_priors():
    det = orthogonal_detectors(2)
    with pytest.raises(PriorsNotNormalizedError):
        distinguishability([0.5, 0.6], det)
    with pytest.raises(PriorsNotNormalizedError):
        distinguishability([-0.2, 1.2], det)


def test_uqsd_bound_is_distinguishability():
    rng = np.random.default_rng(23)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        state = random_pure_state(rng, n)
        det = random_detector_gram(rng, n)
        assert uqsd_bound(state.probabilities, det) == distinguishability(state.probabilities, det)


def test_duality_gap_pure_states_vanishes():
    rng = np.random.default_rng(29)
    for _ in range(200):
        n = int(rng.integers(2, 7))
        state = random_pure_state(rng, n)
        det = random_detector_gram(rng, n)
        gap = duality_gap(coherence_pure(state, det), distinguishability(state.probabilities, det))
        assert abs(gap) <= 1e-12


def test_duality_gap_diagonal_mixed_orthogonal():
    mixed = QuantonMixedState(np.diag([0.1, 0.4, 0.5]))
    det = orthogonal_detectors(3)
    c = coherence_mixed(mixed, det)
    d = distinguishability(mixed.probabilities, det)
    assert c == 0.0
    assert d == 1.0
    assert duality_gap(c, d) == 0.0


def test_duality_gap_positive_for_damped_off_diagonals():
    # |q_jk| strictly below sqrt(q_jj q_kk) with nonzero overlaps opens a gap
    q = np.array([[0.5, 0.2], [0.2, 0.5]])
    mixed = QuantonMixedState(q)
    det = uniform_overlap_gram(2, 0.8)
    gap = duality_gap(coherence_mixed(mixed, det), distinguishability(mixed.probabilities, det))
    assert gap == pytest.approx(2 * (0.5 - 0.2) * 0.8 / 1, abs=1e-12)
    assert gap > 0


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_mixed_duality_inequality(n, seed):
    rng = np.random.default_rng(seed)
    mixed = random_mixed_state(rng, n, mixing=int(rng.integers(1, 3)))
    det = random_detector_gram(rng, n)
    c = coherence_mixed(mixed, det)
    d = distinguishability(mixed.probabilities, det)
    assert c + d <= 1.0 + 1e-10


def test_measures_stay_in_range():
    rng = np.random.default_rng(31)
    for _ in range(300):
        n = int(rng.integers(2, 7))
        state = random_pure_state(rng, n)
        det = random_detector_gram(rng, n)
        mixed = random_mixed_state(rng, n)
        for value in (
            coherence_pure(state, det),
            coherence_mixed(mixed, det),
            distinguishability(state.probabilities, det),
            distinguishability(mixed.probabilities, det),
        ):
            assert -1e-12 <= value <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# Visibility-criteria suite for the coherence measure
# ---------------------------------------------------------------------------

def test_zero_coherence_iff_off_diagonals_vanish():
    rng = np.random.default_rng(37)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        populations = rng.dirichlet(np.ones(n))
        diag = ReducedDensity(np.diag(populations))
        assert coherence_of_density(diag) == 0.0
        # any surviving off-diagonal forces C above the detection floor
        mat = np.diag(populations).astype(complex)
        mat[0, 1] = 1e-9 * np.exp(1j * rng.uniform(0, 2 * np.pi))
        mat[1, 0] = np.conj(mat[0, 1])
        if np.linalg.eigvalsh(mat)[0] >= -1e-10:
            rho = ReducedDensity(mat)
            assert coherence_of_density(rho) >= 1e-9 / (n - 1)


def test_equal_population_pure_states_have_unit_coherence():
    rng = np.random.default_rng(41)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        state = QuantonPureState(
            moduli=np.full(n, 1.0 / np.sqrt(n)), phases=rng.uniform(0, 2 * np.pi, n)
        )
        rho = reduced_density(state, identical_detectors(n))
        assert coherence_of_density(rho) == pytest.approx(1.0, abs=1e-12)


def test_coherence_invariant_under_diagonal_unitary():
    rng = np.random.default_rng(43)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        rho = np.asarray(random_mixed_state(rng, n).coeffs)
        u = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        rotated = (u[:, None] * rho) * np.conj(u)[None, :]
        before = coherence_of_density(ReducedDensity(rho))
        after = coherence_of_density(ReducedDensity(rotated))
        assert after == pytest.approx(before, abs=1e-12)


def test_coherence_is_lipschitz_in_the_density():
    rng = np.random.default_rng(47)
    delta = 1e-6
    for _ in range(50):
        n = int(rng.integers(2, 7))
        base = 0.9 * np.asarray(random_mixed_state(rng, n).coeffs) + 0.1 * np.eye(n) / n
        raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        perturbation = raw + raw.conj().T
        perturbation -= np.trace(perturbation) * np.eye(n) / n
        perturbation *= delta / np.linalg.norm(perturbation)
        c0 = coherence_of_density(ReducedDensity(base))
        c1 = coherence_of_density(ReducedDensity(base + perturbation))
        assert abs(c1 - c0) <= 2 * n / (n - 1) * delta


def test_coherence_scales_linearly_with_overlap_shrink():
    rng = np.random.default_rng(53)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        state = random_pure_state(rng, n)
        det = random_detector_gram(rng, n)
        full = coherence_pure(state, det)
        for s in (0.0, 0.25, 0.7, 1.0):
            scaled = coherence_pure(state, det.scaled_off_diagonal(s))
            assert scaled == pytest.approx(s * full, abs=1e-12)
