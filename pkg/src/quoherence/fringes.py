"""Screen patterns for a quanton crossing n Gaussian slits.

Each slit emits a narrow Gaussian which spreads while traveling to the
screen; the slit-j branch picks up the complex width eps^2 + i*lam*D/pi.
Four intensity expressions are provided:

* ``intensity_exact``     full complex-Gaussian cross terms, no small-width
                          approximations, guaranteed non-negative,
* ``intensity_farfield``  common envelope times a cosine bracket, valid when
                          eps^4 and the slit offsets are negligible,
* ``intensity_incoherent`` the phase-averaged pattern (cosines killed),
* ``intensity_mixed``     the far-field form driven by a coefficient matrix.

``intensity_parallel`` / ``intensity_perp`` are the two detector extremes
(all overlaps 1, all overlaps 0) used by the input-coherence procedure.

Everything is a pure function of immutable inputs; grid evaluation is
vectorized with a fixed per-point summation order, so results do not depend
on any parallelism in the caller.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DetectorGram,
    QuantonMixedState,
    QuantonPureState,
    identical_detectors,
    orthogonal_detectors,
)
from .errors import DimensionMismatchError, EmptyWindowError, ZeroIntensityError

PATTERN_KINDS = ("exact", "farfield", "incoherent", "parallel", "perp", "mixed")

NEGATIVE_CLAMP = -1e-14

FARFIELD_RATIO_LIMIT = 1e-3


class FarFieldValidityWarning(UserWarning):
    """Slit width too large for the far-field approximation chain."""


@dataclass(frozen=True, eq=False)
class SlitGeometry:
    """Slit arrangement and propagation parameters, all lengths in meters.

    Slit centers sit at x_j = j * spacing for j = 1..n. ``width`` is the
    Gaussian waist of a single slit, ``wavelength`` the de Broglie or
    optical wavelength, ``distance`` the slit-to-screen flight distance.
    """

    n: int = 3
    spacing: float = 50e-6
    width: float = 5e-6
    wavelength: float = 500e-9
    distance: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 slits, got n={self.n}")
        for name in ("spacing", "width", "wavelength", "distance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.farfield_valid:
            warnings.warn(
                f"width^2 = {self.width**2:.3e} m^2 exceeds "
                f"{FARFIELD_RATIO_LIMIT:g} * wavelength*distance/pi = "
                f"{FARFIELD_RATIO_LIMIT * self.spread_scale:.3e} m^2; "
                "far-field intensity expressions degrade",
                FarFieldValidityWarning,
                stacklevel=2,
            )

    @property
    def spread_scale(self) -> float:
        """wavelength * distance / pi, the imaginary part of the squared width."""
        return self.wavelength * self.distance / np.pi

    @property
    def farfield_valid(self) -> bool:
        return self.width**2 <= FARFIELD_RATIO_LIMIT * self.spread_scale

    @property
    def fringe_width(self) -> float:
        """Spacing of the primary maxima, wavelength * distance / spacing."""
        return self.wavelength * self.distance / self.spacing

    @property
    def slit_centers(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.n + 1, dtype=float)


@dataclass(frozen=True, eq=False)
class ScreenGrid:
    """Uniform sampling of screen positions, in meters."""

    x_min: float
    x_max: float
    num_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min {self.x_min!r} must be below x_max {self.x_max!r}")
        if self.num_points < 2:
            raise ValueError(f"need at least 2 grid points, got {self.num_points}")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.num_points)

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.num_points - 1)


def default_grid(geom: SlitGeometry, num_points: int = 4001, half_span_fringes: float = 5.0) -> ScreenGrid:
    """Grid covering a few fringes either side of the optical axis."""
    half = half_span_fringes * geom.fringe_width
    return ScreenGrid(-half, half, num_points)


@dataclass(frozen=True, eq=False)
class PatternSample:
    """Screen intensity sampled on a grid (probability density per meter)."""

    grid: ScreenGrid
    values: np.ndarray
    kind: str
    geom: SlitGeometry | None = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.num_points,):
            raise DimensionMismatchError(
                f"pattern has {values.shape} values for a {self.grid.num_points}-point grid"
            )
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}, expected one of {PATTERN_KINDS}")
        low = float(values.min())
        if low < NEGATIVE_CLAMP:
            raise ValueError(f"pattern value {low!r} below the {NEGATIVE_CLAMP} clamp")
        values = np.clip(values, 0.0, None)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


# ---------------------------------------------------------------------------
# Branch amplitudes and the exact pattern
# ---------------------------------------------------------------------------

def intensity_prefactor(geom: SlitGeometry) -> float:
    """Squared modulus of the common propagation prefactor.

    Cancels from every ratio formed in the measurement procedures; carried
    so that pattern values are physically scaled densities.
    """
    return float(np.sqrt(2.0 / np.pi) / abs(geom.width + 1j * geom.spread_scale / geom.width))


def _branch_profiles(x: np.ndarray, geom: SlitGeometry) -> np.ndarray:
    """Complex spread Gaussians g_j(x), shape (n, len(x))."""
    complex_width_sq = geom.width**2 + 1j * geom.spread_scale
    offsets = x[np.newaxis, :] - geom.slit_centers[:, np.newaxis]
    return np.exp(-(offsets**2) / complex_width_sq)


def amplitude_at(x, geom: SlitGeometry, state: QuantonPureState) -> np.ndarray:
    """Per-detector-branch screen amplitudes c_j * |A| * g_j(x).

    Returns shape (n,) for scalar x and (n, len(x)) for array x. The common
    prefactor modulus is included so |amplitude|^2 sums to the exact
    intensity for orthogonal detectors.
    """
    if state.n != geom.n:
        raise DimensionMismatchError(f"state has {state.n} slits, geometry has {geom.n}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    branches = np.sqrt(intensity_prefactor(geom)) * state.amplitudes[:, np.newaxis] * _branch_profiles(xs, geom)
    return branches if np.ndim(x) else branches[:, 0]


def _gram_factor(det: DetectorGram) -> np.ndarray:
    """B with B^dagger B = gram; negative round-off eigenvalues clamped to 0."""
    eigenvalues, vectors = np.linalg.eigh(np.asarray(det.gram))
    root = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return root[:, np.newaxis] * vectors.conj().T


def _scalar_out(x, values: np.ndarray):
    return values if np.ndim(x) else float(values[0])


def intensity_exact(x, geom: SlitGeometry, state: QuantonPureState, det: DetectorGram):
    """Exact screen density, no small-width approximations.

    The detector overlaps are factored as gram = B^dagger B and the density
    evaluated as a sum of squared branch combinations, so the result stays
    non-negative in floating point even where cross terms nearly cancel.
    """
    if state.n != geom.n or det.n != geom.n:
        raise DimensionMismatchError(
            f"slit counts differ: state {state.n}, detector {det.n}, geometry {geom.n}"
        )
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    branches = state.amplitudes[:, np.newaxis] * _branch_profiles(xs, geom)
    combined = _gram_factor(det) @ branches
    values = intensity_prefactor(geom) * np.sum(np.abs(combined) ** 2, axis=0)
    return _scalar_out(x, values)


def intensity_exact_mixed(x, geom: SlitGeometry, mixed: QuantonMixedState, det: DetectorGram):
    """Exact screen density for a mixed quanton-detector state.

    Uses the entrywise product of the coefficient matrix with the transposed
    overlap matrix, which is itself positive semidefinite, factored the same
    way as in :func:`intensity_exact`.
    """
    if mixed.n != geom.n or det.n != geom.n:
        raise DimensionMismatchError(
            f"slit counts differ: state {mixed.n}, detector {det.n}, geometry {geom.n}"
        )
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    matrix = np.asarray(mixed.coeffs) * np.asarray(det.gram).T
    eigenvalues, vectors = np.linalg.eigh(matrix)
    root = np.sqrt(np.clip(eigenvalues, 0.0, None))
    factor = root[:, np.newaxis] * vectors.conj().T
    combined = factor @ _branch_profiles(xs, geom).conj()
    values = intensity_prefactor(geom) * np.sum(np.abs(combined) ** 2, axis=0)
    return _scalar_out(x, values)


# ---------------------------------------------------------------------------
# Far-field family
# ---------------------------------------------------------------------------

def envelope(x, geom: SlitGeometry):
    """Common Gaussian factor exp(-2 eps^2 x^2 / (lam D / pi)^2)."""
    xs = np.asarray(x, dtype=float)
    return np.exp(-2.0 * geom.width**2 * xs**2 / geom.spread_scale**2)


def cross_structure(
    det: DetectorGram | None,
    state: QuantonPureState | None = None,
    mixed: QuantonMixedState | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Populations and complex pair coefficients of the far-field bracket.

    Returns (populations, z) where the bracket at screen position x is
    sum(populations) + sum_{j<k} 2*Re[z_jk * exp(i*beta*x*(k-j))] with
    beta = 2*pi*spacing/(wavelength*distance). For a pure state
    z_jk = conj(c_j)*c_k*gram_jk; for a mixed one z_jk = q_jk*gram_jk.
    """
    if (state is None) == (mixed is None):
        raise ValueError("provide exactly one of state or mixed")
    if state is not None:
        populations = state.probabilities
        c = state.amplitudes
        z = np.outer(c.conj(), c)
    else:
        populations = mixed.probabilities
        z = np.array(mixed.coeffs)
    if det is not None:
        source = state if state is not None else mixed
        if det.n != source.n:
            raise DimensionMismatchError(f"slit counts differ: state {source.n}, detector {det.n}")
        z = z * np.asarray(det.gram)
    np.fill_diagonal(z, 0.0)
    return populations, z


def farfield_bracket(xs, geom: SlitGeometry, populations: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Far-field pattern divided by envelope and prefactor.

    ``populations`` and ``z`` come from :func:`cross_structure`; the pair
    sum runs over j < k with the conjugate ordering folded in, in a fixed
    order.
    """
    xs = np.asarray(xs, dtype=float)
    beta = 2.0 * np.pi * geom.spacing / (geom.wavelength * geom.distance)
    n = populations.size
    values = np.full(xs.shape, float(populations.sum()))
    for j in range(n):
        for k in range(j + 1, n):
            coeff = z[j, k]
            if coeff == 0:
                continue
            arg = beta * (k - j) * xs
            values += 2.0 * (coeff.real * np.cos(arg) - coeff.imag * np.sin(arg))
    return values


def intensity_farfield(x, geom: SlitGeometry, state: QuantonPureState, det: DetectorGram):
    """Far-field screen density: envelope times the pairwise cosine bracket.

    Each slit pair (j, k) contributes
    |c_j||c_k||gram_jk| * cos(2*pi*x*spacing*(k-j)/(wavelength*distance)
    + theta_k - theta_j + arg(gram_jk)), with the pair phases folded per
    branch.
    """
    if state.n != geom.n:
        raise DimensionMismatchError(f"state has {state.n} slits, geometry has {geom.n}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    populations, z = cross_structure(det, state=state)
    values = intensity_prefactor(geom) * envelope(xs, geom) * farfield_bracket(xs, geom, populations, z)
    return _scalar_out(x, values)


def intensity_mixed(x, geom: SlitGeometry, mixed: QuantonMixedState, det: DetectorGram):
    """Far-field screen density driven by a mixed coefficient matrix."""
    if mixed.n != geom.n:
        raise DimensionMismatchError(f"state has {mixed.n} slits, geometry has {geom.n}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    populations, z = cross_structure(det, mixed=mixed)
    values = intensity_prefactor(geom) * envelope(xs, geom) * farfield_bracket(xs, geom, populations, z)
    return _scalar_out(x, values)


def intensity_incoherent(x, geom: SlitGeometry, state: QuantonPureState | QuantonMixedState):
    """Phase-averaged screen density: envelope times total population.

    Equals the mean of :func:`intensity_farfield` over uniformly random
    branch phases, since every pairwise cosine averages to zero.
    """
    if state.n != geom.n:
        raise DimensionMismatchError(f"state has {state.n} slits, geometry has {geom.n}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    total = float(np.sum(state.probabilities))
    values = intensity_prefactor(geom) * envelope(xs, geom) * total
    return _scalar_out(x, values)


def _farfield_any(x, geom, state, det):
    if isinstance(state, QuantonMixedState):
        return intensity_mixed(x, geom, state, det)
    return intensity_farfield(x, geom, state, det)


def intensity_parallel(x, geom: SlitGeometry, state: QuantonPureState | QuantonMixedState):
    """Far-field density with all paths made indistinguishable (overlaps 1)."""
    return _farfield_any(x, geom, state, identical_detectors(state.n))


def intensity_perp(x, geom: SlitGeometry, state: QuantonPureState | QuantonMixedState):
    """Far-field density with all paths fully distinguishable (overlaps 0)."""
    return _farfield_any(x, geom, state, orthogonal_detectors(state.n))


def primary_maxima(geom: SlitGeometry, m_max: int) -> np.ndarray:
    """Screen positions x_m = m * fringe_width for m = 0..m_max.

    At these points every pairwise cosine reaches 1 simultaneously (for zero
    folded phases); in between lie the secondary maxima where only some
    pairs align.
    """
    if m_max < 0:
        raise ValueError(f"m_max must be >= 0, got {m_max}")
    return geom.fringe_width * np.arange(m_max + 1, dtype=float)


# ---------------------------------------------------------------------------
# Pattern assembly and visibility
# ---------------------------------------------------------------------------

def build_pattern(
    kind: str,
    grid: ScreenGrid,
    geom: SlitGeometry,
    state: QuantonPureState | None = None,
    mixed: QuantonMixedState | None = None,
    det: DetectorGram | None = None,
) -> PatternSample:
    """Evaluate one intensity expression over a grid into a PatternSample."""
    xs = grid.xs
    quanton = mixed if mixed is not None else state
    if quanton is None:
        raise ValueError("provide a pure or mixed quanton state")
    if kind == "exact":
        if det is None:
            raise ValueError("exact pattern needs a detector Gram matrix")
        if mixed is not None:
            values = intensity_exact_mixed(xs, geom, mixed, det)
        else:
            values = intensity_exact(xs, geom, state, det)
    elif kind == "farfield":
        if det is None:
            raise ValueError("far-field pattern needs a detector Gram matrix")
        values = intensity_farfield(xs, geom, state, det)
    elif kind == "mixed":
        if det is None:
            raise ValueError("mixed pattern needs a detector Gram matrix")
        values = intensity_mixed(xs, geom, mixed, det)
    elif kind == "incoherent":
        values = intensity_incoherent(xs, geom, quanton)
    elif kind == "parallel":
        values = intensity_parallel(xs, geom, quanton)
    elif kind == "perp":
        values = intensity_perp(xs, geom, quanton)
    else:
        raise ValueError(f"unknown pattern kind {kind!r}, expected one of {PATTERN_KINDS}")
    return PatternSample(grid=grid, values=values, kind=kind, geom=geom)


def visibility(pattern: PatternSample, window: tuple[float, float]) -> float:
    """Fringe contrast (I_max - I_min) / (I_max + I_min) over a window.

    The window must cover at least one full fringe period so both an
    extinction and a maximum are seen.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise EmptyWindowError(f"window [{lo!r}, {hi!r}] is empty")
    if pattern.geom is not None:
        period = pattern.geom.fringe_width
        if hi - lo < period * (1.0 - 1e-9):
            raise EmptyWindowError(
                f"window span {hi - lo:.3e} m is below one fringe period {period:.3e} m"
            )
    xs = pattern.grid.xs
    mask = (xs >= lo) & (xs <= hi)
    if np.count_nonzero(mask) < 2:
        raise EmptyWindowError("window contains fewer than 2 grid points")
    selected = pattern.values[mask]
    top = float(selected.max())
    bottom = float(selected.min())
    if top <= 0.0:
        raise ZeroIntensityError("pattern is zero everywhere in the window")
    return (top - bottom) / (top + bottom)
