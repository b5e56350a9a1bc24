"""State representations and closed-form wave/particle measures.

The quanton emerging from ``n`` slits is described either by a pure
superposition (per-slit moduli and phases) or by a Hermitian, trace-one,
positive-semidefinite coefficient matrix. Which-path detectors enter every
formula only through their overlap (Gram) matrix, so that is the only
representation kept: no detector Hilbert space dimension is ever chosen.

All functions here are pure and operate on immutable inputs; they are safe
to call concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DiagonalNotUnitError,
    DimensionMismatchError,
    NotHermitianError,
    NotPSDError,
    PriorsNotNormalizedError,
)

HERMITIAN_TOL = 1e-12
NORMALIZATION_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

TWO_PI = 2.0 * np.pi


def _as_complex_matrix(raw, what: str) -> np.ndarray:
    mat = np.array(raw, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatchError(f"{what} must be a square matrix, got shape {mat.shape}")
    if mat.shape[0] < 2:
        raise DimensionMismatchError(f"{what} needs n >= 2, got n={mat.shape[0]}")
    return mat


def _check_hermitian(mat: np.ndarray, what: str) -> None:
    dev = np.abs(mat - mat.conj().T)
    if dev.max() > HERMITIAN_TOL:
        j, k = np.unravel_index(int(dev.argmax()), dev.shape)
        raise NotHermitianError(
            f"{what} entry ({j},{k}) deviates from Hermiticity by {dev[j, k]:.3e}"
        )


def _check_psd(mat: np.ndarray, what: str) -> None:
    smallest = float(np.linalg.eigvalsh(mat)[0])
    if smallest < EIGENVALUE_FLOOR:
        raise NotPSDError(f"{what} has eigenvalue {smallest:.6e} below {EIGENVALUE_FLOOR}")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuantonPureState:
    """Pure superposition over n slits, stored as moduli and phases.

    ``moduli[j]`` is the non-negative amplitude magnitude for slit j and
    ``phases[j]`` its phase in [0, 2*pi). The squared moduli must sum to 1.
    """

    moduli: np.ndarray
    phases: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        moduli = np.array(self.moduli, dtype=float)
        if moduli.ndim != 1 or moduli.size < 2:
            raise DimensionMismatchError(f"need n >= 2 slit amplitudes, got shape {moduli.shape}")
        if np.any(moduli < 0):
            raise ValueError("amplitude moduli must be non-negative")
        if self.phases is None:
            phases = np.zeros_like(moduli)
        else:
            phases = np.mod(np.array(self.phases, dtype=float), TWO_PI)
        if phases.shape != moduli.shape:
            raise DimensionMismatchError("phases and moduli must have the same length")
        total = float(np.sum(moduli**2))
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"squared moduli sum to {total!r}, expected 1 within {NORMALIZATION_TOL}")
        object.__setattr__(self, "moduli", _freeze(moduli))
        object.__setattr__(self, "phases", _freeze(phases))

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "QuantonPureState":
        """Build from complex amplitudes c_j."""
        c = np.array(amplitudes, dtype=complex)
        return cls(moduli=np.abs(c), phases=np.angle(c))

    @classmethod
    def equal_superposition(cls, n: int) -> "QuantonPureState":
        return cls(moduli=np.full(n, 1.0 / np.sqrt(n)))

    @property
    def n(self) -> int:
        return self.moduli.size

    @property
    def amplitudes(self) -> np.ndarray:
        """Complex amplitudes c_j = |c_j| exp(i theta_j)."""
        return self.moduli * np.exp(1j * self.phases)

    @property
    def probabilities(self) -> np.ndarray:
        """Per-slit probabilities |c_j|^2."""
        return self.moduli**2


@dataclass(frozen=True, eq=False)
class DetectorGram:
    """Overlap matrix of the which-path detector states.

    Hermitian with unit diagonal (detector states are normalized but not
    necessarily orthogonal) and positive semidefinite.
    """

    gram: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.gram, "detector Gram matrix")
        _check_hermitian(mat, "detector Gram matrix")
        diag_dev = np.abs(np.diag(mat) - 1.0)
        if diag_dev.max() > HERMITIAN_TOL:
            j = int(diag_dev.argmax())
            raise DiagonalNotUnitError(
                f"detector Gram diagonal entry ({j},{j}) = {mat[j, j]!r}, expected 1"
            )
        _check_psd(mat, "detector Gram matrix")
        object.__setattr__(self, "gram", _freeze(mat))

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    def overlap_magnitudes(self) -> np.ndarray:
        return np.abs(self.gram)

    def scaled_off_diagonal(self, s: float) -> "DetectorGram":
        """Shrink all off-diagonal overlaps by s in [0, 1] (stays PSD)."""
        if not 0.0 <= s <= 1.0:
            raise ValueError("scale must lie in [0, 1]")
        n = self.n
        mat = s * np.asarray(self.gram) + (1.0 - s) * np.eye(n)
        return DetectorGram(mat)


@dataclass(frozen=True, eq=False)
class QuantonMixedState:
    """Mixed quanton-detector state given by its coefficient matrix.

    ``coeffs[j, k]`` multiplies the slit-j / slit-k dyad of the joint state;
    the matrix is Hermitian, trace one, and positive semidefinite.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.coeffs, "mixed-state coefficient matrix")
        _check_hermitian(mat, "mixed-state coefficient matrix")
        trace = complex(np.trace(mat)).real
        if abs(trace - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"coefficient matrix trace is {trace!r}, expected 1")
        _check_psd(mat, "mixed-state coefficient matrix")
        object.__setattr__(self, "coeffs", _freeze(mat))

    @classmethod
    def from_pure(cls, state: QuantonPureState) -> "QuantonMixedState":
        c = state.amplitudes
        return cls(np.outer(c, c.conj()))

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        """Per-slit populations q_jj."""
        return np.real(np.diag(self.coeffs))


@dataclass(frozen=True, eq=False)
class ReducedDensity:
    """Quanton density matrix in the slit basis after tracing the detector."""

    rho: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.rho, "reduced density matrix")
        _check_hermitian(mat, "reduced density matrix")
        trace = complex(np.trace(mat)).real
        if abs(trace - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"density matrix trace is {trace!r}, expected 1")
        _check_psd(mat, "reduced density matrix")
        object.__setattr__(self, "rho", _freeze(mat))

    @property
    def n(self) -> int:
        return self.rho.shape[0]


# ---------------------------------------------------------------------------
# Gram shorthands
# ---------------------------------------------------------------------------

def orthogonal_detectors(n: int) -> DetectorGram:
    """Fully distinguishing detectors: identity overlaps."""
    return DetectorGram(np.eye(n))


def identical_detectors(n: int) -> DetectorGram:
    """Completely non-distinguishing detectors: all overlaps 1."""
    return DetectorGram(np.ones((n, n)))


def uniform_overlap_gram(n: int, overlap: float) -> DetectorGram:
    """Unit diagonal with a common real overlap on every off-diagonal."""
    mat = np.full((n, n), float(overlap))
    np.fill_diagonal(mat, 1.0)
    return DetectorGram(mat)


def validate_gram(gram) -> DetectorGram:
    """Validate a raw overlap matrix without mutating the input."""
    return DetectorGram(gram)


# ---------------------------------------------------------------------------
# Closed-form quantities
# ---------------------------------------------------------------------------

def _require_same_n(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatchError(f"slit counts differ: {a} vs {b}")


def reduced_density(state: QuantonPureState, det: DetectorGram) -> ReducedDensity:
    """Trace the detector out of the entangled pure state.

    The (k, j) element of the result is c_k * conj(c_j) * gram[j, k]: each
    slit coherence survives only to the extent the two detector states
    overlap.
    """
    _require_same_n(state.n, det.n)
    c = state.amplitudes
    rho = np.outer(c, c.conj()) * np.asarray(det.gram).T
    return ReducedDensity(rho)


def _offdiagonal_l1(mat: np.ndarray) -> float:
    """Sum of |entries| off the diagonal, both orderings counted."""
    absolute = np.abs(mat)
    np.fill_diagonal(absolute, 0.0)
    return float(absolute.sum())


def coherence_of_density(rho: ReducedDensity) -> float:
    """Normalized l1 coherence of a density matrix in the slit basis.

    Returns (1/(n-1)) * sum_{i != j} |rho_ij|, which lies in [0, 1].
    """
    return _offdiagonal_l1(np.asarray(rho.rho)) / (rho.n - 1)


def coherence_pure(state: QuantonPureState, det: DetectorGram) -> float:
    """Coherence of a pure quanton watched by the given detectors.

    Equals ``coherence_of_density(reduced_density(state, det))`` but is
    evaluated directly from moduli and overlap magnitudes.
    """
    _require_same_n(state.n, det.n)
    m = state.moduli
    weighted = np.outer(m, m) * det.overlap_magnitudes()
    return _offdiagonal_l1(weighted) / (state.n - 1)


def coherence_mixed(state: QuantonMixedState, det: DetectorGram) -> float:
    """Coherence of a mixed quanton-detector state."""
    _require_same_n(state.n, det.n)
    weighted = np.abs(np.asarray(state.coeffs)) * det.overlap_magnitudes()
    return _offdiagonal_l1(weighted) / (state.n - 1)


def _validated_priors(priors) -> np.ndarray:
    p = np.array(priors, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DimensionMismatchError(f"need n >= 2 priors, got shape {p.shape}")
    if np.any(p < -NORMALIZATION_TOL):
        raise PriorsNotNormalizedError(f"negative prior: {p.min()!r}")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise PriorsNotNormalizedError(f"priors sum to {total!r}, expected 1")
    return np.clip(p, 0.0, None)


def distinguishability(priors, det: DetectorGram) -> float:
    """Maximum probability of error-free slit identification.

    The best strategy for telling non-orthogonal detector states apart
    without ambiguity succeeds with probability at most
    1 - (1/(n-1)) * sum_{i != j} sqrt(p_i p_j) |gram_ij|.
    """
    p = _validated_priors(priors)
    _require_same_n(p.size, det.n)
    root = np.sqrt(p)
    weighted = np.outer(root, root) * det.overlap_magnitudes()
    return 1.0 - _offdiagonal_l1(weighted) / (p.size - 1)


def uqsd_bound(priors, det: DetectorGram) -> float:
    """Upper bound on the unambiguous-discrimination success probability.

    Numerically identical to :func:`distinguishability`; kept as a named
    quantity because the bound exists independently of its use as a
    which-path measure. For linearly dependent detector states the bound
    may not be attainable.
    """
    return distinguishability(priors, det)


def duality_gap(coherence: float, path_distinguishability: float) -> float:
    """Slack 1 - (C + D) in the wave-particle tradeoff.

    Zero for pure quanton-detector states; strictly positive whenever the
    coefficient matrix is mixed enough that |q_jk| < sqrt(q_jj q_kk) on some
    overlapping pair.
    """
    return 1.0 - (coherence + path_distinguishability)


# ---------------------------------------------------------------------------
# Random instances for property tests and sweeps
# ---------------------------------------------------------------------------

def random_pure_state(rng: np.random.Generator, n: int, zero_phases: bool = False) -> QuantonPureState:
    """Haar-like random superposition; zero_phases keeps all c_j real >= 0."""
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    moduli = np.abs(c)
    moduli /= np.sqrt(np.sum(moduli**2))
    phases = None if zero_phases else np.angle(c)
    return QuantonPureState(moduli=moduli, phases=phases)


def random_detector_gram(rng: np.random.Generator, n: int, nonnegative: bool = False) -> DetectorGram:
    """Random valid Gram matrix, PSD by construction.

    Built as V^dagger V from a random complex matrix, then rescaled to unit
    diagonal. ``nonnegative`` draws V entrywise non-negative real, which
    makes every overlap real and non-negative (zero folded phases).
    """
    if nonnegative:
        v = np.abs(rng.normal(size=(n, n)))
        mat = v.T @ v
    else:
        v = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        mat = v.conj().T @ v
    scale = 1.0 / np.sqrt(np.real(np.diag(mat)))
    mat = mat * np.outer(scale, scale)
    np.fill_diagonal(mat, 1.0)
    return DetectorGram(mat)


def random_mixed_state(
    rng: np.random.Generator,
    n: int,
    nonnegative: bool = False,
    mixing: int = 1,
) -> QuantonMixedState:
    """Random valid coefficient matrix, trace-normalized W^dagger W.

    ``mixing`` sets the number of rows of W as mixing * n; larger values
    push the matrix toward the maximally mixed diagonal, widening the
    duality gap. ``nonnegative`` keeps all entries real and non-negative.
    """
    rows = max(1, mixing) * n
    if nonnegative:
        w = np.abs(rng.normal(size=(rows, n)))
        mat = w.T @ w
    else:
        w = rng.normal(size=(rows, n)) + 1j * rng.normal(size=(rows, n))
        mat = w.conj().T @ w
    mat = mat / complex(np.trace(mat)).real
    return QuantonMixedState(mat)
