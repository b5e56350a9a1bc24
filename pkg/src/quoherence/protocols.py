"""Measurement procedures executed on simulated interference patterns.

Two protocols recover coherence from screen intensities:

* coherent/incoherent: record the intensity at a primary maximum, then
  repeat with branch phases scrambled photon by photon, and form
  (1/(n-1)) * (I_max - I_inc) / I_inc;
* parallel/perp: switch the path detector between fully overlapping and
  fully orthogonal modes and form the same ratio from the two maxima,
  which yields the coherence of the incoming quanton untouched by any
  detector.

Both run either analytically (exact pattern evaluations) or as seeded
Monte Carlo photon counting with Poisson error propagation. Photon
sampling uses counter-based Philox streams derived from
(seed, stream key, shard index), so a fixed seed and shard count give the
same hit sequence on every platform regardless of how shards are executed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DetectorGram,
    QuantonMixedState,
    QuantonPureState,
    coherence_mixed,
    coherence_pure,
    distinguishability,
)
from .errors import (
    DimensionMismatchError,
    EmptyBinError,
    EmptyWindowError,
    InvalidMaximumIndexError,
    ZeroMassError,
)
from .fringes import (
    PatternSample,
    ScreenGrid,
    SlitGeometry,
    build_pattern,
    cross_structure,
    envelope,
    farfield_bracket,
    intensity_prefactor,
)

DEFAULT_NUM_PHOTONS = 1_000_000
DEFAULT_SEED = 1
DEFAULT_NUM_BINS = 200
BIN_WIDTH_FRACTION = 1.0 / 50.0  # of one fringe width, centered on the maximum
POINTS_PER_FRINGE = 400

METHODS = ("analytic", "monte_carlo")
PROTOCOLS = ("coherent_incoherent", "parallel_perp")

_ESTIMATE_SLACK = 1e-9
_ZERO_PHASE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CountingConfig:
    """Photon-counting run parameters.

    ``window`` restricts sampling to an x-interval (defaults to the whole
    pattern grid); ``num_bins`` controls histogram summaries of the hits.
    """

    num_photons: int = DEFAULT_NUM_PHOTONS
    seed: int = DEFAULT_SEED
    window: tuple[float, float] | None = None
    num_bins: int = DEFAULT_NUM_BINS

    def __post_init__(self):
        if self.num_photons < 1:
            raise ValueError(f"num_photons must be >= 1, got {self.num_photons}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.num_bins < 10:
            raise ValueError(f"num_bins must be >= 10, got {self.num_bins}")
        if self.num_bins > self.num_photons:
            raise ValueError(
                f"num_bins ({self.num_bins}) must not exceed num_photons ({self.num_photons})"
            )
        if self.window is not None:
            lo, hi = float(self.window[0]), float(self.window[1])
            if not lo < hi:
                raise EmptyWindowError(f"window [{lo!r}, {hi!r}] is empty")
            object.__setattr__(self, "window", (lo, hi))


@dataclass(frozen=True, eq=False)
class CountHistogram:
    """Binned photon hits over a window."""

    edges: np.ndarray
    counts: np.ndarray

    @property
    def num_bins(self) -> int:
        return self.counts.size


@dataclass(frozen=True, eq=False)
class CoherenceEstimate:
    """Result of one coherence-measurement run."""

    c_value: float
    std_error: float
    method: str
    protocol: str
    n_used: int
    x_used: float

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.std_error < 0:
            raise ValueError(f"std_error must be >= 0, got {self.std_error!r}")
        if self.method == "analytic" and self.std_error != 0.0:
            raise ValueError("analytic estimates carry no statistical error")
        lo = -3.0 * self.std_error - _ESTIMATE_SLACK
        hi = 1.0 + 3.0 * self.std_error + _ESTIMATE_SLACK
        if not lo <= self.c_value <= hi:
            raise ValueError(
                f"c_value {self.c_value!r} outside [{lo!r}, {hi!r}] for std_error {self.std_error!r}"
            )


# ---------------------------------------------------------------------------
# Seeded streams and inverse-CDF sampling
# ---------------------------------------------------------------------------

def _stream(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    """Philox generator derived from (seed, key); counter-based, jump-free."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=key)))


def _shard_counts(total: int, num_shards: int) -> list[int]:
    if num_shards < 1:
        raise ValueError(f"num_shards must be >= 1, got {num_shards}")
    base, extra = divmod(total, num_shards)
    return [base + (1 if i < extra else 0) for i in range(num_shards)]


class _InverseCdfSampler:
    """Draws from a piecewise-linear density given at grid nodes.

    The cumulative mass is trapezoid-integrated; within a segment the CDF
    is quadratic and inverted in closed form.
    """

    def __init__(self, node_x: np.ndarray, node_v: np.ndarray):
        width = np.diff(node_x)
        keep = width > 0
        self.x0 = node_x[:-1][keep]
        self.v0 = node_v[:-1][keep]
        self.v1 = node_v[1:][keep]
        self.width = width[keep]
        self.mass = 0.5 * (self.v0 + self.v1) * self.width
        self.cumulative = np.cumsum(self.mass)
        self.total = float(self.cumulative[-1]) if self.mass.size else 0.0

    @classmethod
    def from_pattern(cls, pattern: PatternSample, lo: float, hi: float) -> "_InverseCdfSampler":
        grid = pattern.grid
        if lo < grid.x_min - 1e-15 or hi > grid.x_max + 1e-15:
            raise EmptyWindowError(
                f"window [{lo!r}, {hi!r}] exceeds the pattern grid "
                f"[{grid.x_min!r}, {grid.x_max!r}]"
            )
        xs = grid.xs
        values = pattern.values
        inner = (xs > lo) & (xs < hi)
        node_x = np.concatenate(([lo], xs[inner], [hi]))
        node_v = np.concatenate(
            ([np.interp(lo, xs, values)], values[inner], [np.interp(hi, xs, values)])
        )
        return cls(node_x, node_v)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        targets = rng.random(count) * self.total
        idx = np.searchsorted(self.cumulative, targets, side="left")
        idx = np.minimum(idx, self.mass.size - 1)
        before = np.where(idx > 0, self.cumulative[idx - 1], 0.0)
        local = targets - before
        v0 = self.v0[idx]
        slope = (self.v1[idx] - v0) / self.width[idx]
        # stable root of v0*t + slope*t^2/2 = local for any slope sign
        disc = np.sqrt(np.clip(v0**2 + 2.0 * slope * local, 0.0, None))
        with np.errstate(invalid="ignore"):
            t = np.where(local > 0.0, 2.0 * local / (v0 + disc), 0.0)
        return self.x0[idx] + np.clip(t, 0.0, self.width[idx])


def _resolve_window(pattern: PatternSample, cfg: CountingConfig) -> tuple[float, float]:
    if cfg.window is not None:
        return cfg.window
    return (pattern.grid.x_min, pattern.grid.x_max)


def sample_hits(
    pattern: PatternSample,
    cfg: CountingConfig,
    num_shards: int = 1,
    stream_key: tuple[int, ...] = (),
) -> np.ndarray:
    """Draw photon arrival positions from a pattern restricted to a window.

    Photons are i.i.d. from the normalized density; the draw is fully
    determined by (cfg.seed, stream_key, num_shards). Shards use
    independent substreams and are concatenated in shard order, so the
    merged result is identical however the shards are executed.
    """
    lo, hi = _resolve_window(pattern, cfg)
    sampler = _InverseCdfSampler.from_pattern(pattern, lo, hi)
    if sampler.total <= 0.0:
        raise ZeroMassError(f"pattern integrates to {sampler.total!r} over [{lo!r}, {hi!r}]")
    parts = [
        sampler.draw(_stream(cfg.seed, (*stream_key, shard)), count)
        for shard, count in enumerate(_shard_counts(cfg.num_photons, num_shards))
    ]
    return np.concatenate(parts)


def histogram_hits(hits: np.ndarray, window: tuple[float, float], num_bins: int) -> CountHistogram:
    """Bin hits into a uniform histogram over the window."""
    counts, edges = np.histogram(hits, bins=num_bins, range=(float(window[0]), float(window[1])))
    return CountHistogram(edges=edges, counts=counts)


def estimate_intensity_at(hits: np.ndarray, x_target: float, bin_width: float) -> tuple[float, float]:
    """Density estimate at x_target from a single counting bin.

    Returns (rate, std_error) with rate = count / (N * bin_width) and the
    Poisson error sqrt(count) / (N * bin_width).
    """
    if bin_width <= 0:
        raise ValueError(f"bin_width must be positive, got {bin_width!r}")
    hits = np.asarray(hits, dtype=float)
    half = 0.5 * bin_width
    count = int(np.count_nonzero((hits >= x_target - half) & (hits < x_target + half)))
    if count == 0:
        raise EmptyBinError(
            f"no hits in [{x_target - half!r}, {x_target + half!r}); "
            "widen the bin or increase num_photons"
        )
    scale = hits.size * bin_width
    return count / scale, float(np.sqrt(count)) / scale


# ---------------------------------------------------------------------------
# Phase-randomized (incoherent-arm) sampling
# ---------------------------------------------------------------------------

def _sample_phase_randomized(
    geom: SlitGeometry,
    populations: np.ndarray,
    cross: np.ndarray,
    proposal: PatternSample,
    window: tuple[float, float],
    num_photons: int,
    seed: int,
    stream_key: tuple[int, ...],
    num_shards: int = 1,
) -> np.ndarray:
    """Photon positions with fresh uniform branch phases per photon.

    Every candidate photon draws its own phase vector; acceptance against
    the phase-free envelope proposal keeps exactly the pattern that photon
    would produce, and the accepted ensemble reproduces the phase-averaged
    pattern without any residual cosine terms.
    """
    sampler = _InverseCdfSampler.from_pattern(proposal, window[0], window[1])
    if sampler.total <= 0.0:
        raise ZeroMassError(f"pattern integrates to {sampler.total!r} over {window!r}")
    n = populations.size
    beta = 2.0 * np.pi * geom.spacing / (geom.wavelength * geom.distance)
    pairs = [(j, k, abs(cross[j, k]), np.angle(cross[j, k])) for j in range(n) for k in range(j + 1, n) if cross[j, k] != 0]
    diagonal = float(populations.sum())
    bound = diagonal + 2.0 * sum(mag for _, _, mag, _ in pairs)

    def bracket(xs: np.ndarray, theta: np.ndarray) -> np.ndarray:
        values = np.full(xs.shape, diagonal)
        for j, k, mag, base in pairs:
            values += 2.0 * mag * np.cos(beta * (k - j) * xs + base + theta[:, k] - theta[:, j])
        return values

    parts = []
    for shard, quota in enumerate(_shard_counts(num_photons, num_shards)):
        rng = _stream(seed, (*stream_key, shard))
        kept: list[np.ndarray] = []
        remaining = quota
        while remaining > 0:
            batch = min(int(remaining * bound / diagonal * 1.25) + 64, 2_000_000)
            xs = sampler.draw(rng, batch)
            if pairs:
                theta = rng.uniform(0.0, 2.0 * np.pi, size=(batch, n))
                weights = bracket(xs, theta)
            else:
                weights = np.full(batch, diagonal)
            accepted = xs[rng.random(batch) * bound <= weights]
            kept.append(accepted[:remaining])
            remaining -= min(accepted.size, remaining)
        parts.append(np.concatenate(kept))
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# Coherence measurements
# ---------------------------------------------------------------------------

def _quanton_split(state):
    if isinstance(state, QuantonMixedState):
        return None, state
    if isinstance(state, QuantonPureState):
        return state, None
    raise TypeError(f"expected a pure or mixed quanton state, got {type(state).__name__}")


def _folded_phases_zero(cross: np.ndarray) -> bool:
    nonzero = cross[np.abs(cross) > 0]
    if nonzero.size == 0:
        return True
    return bool(np.all(np.abs(np.angle(nonzero)) <= _ZERO_PHASE_TOL))


def _locate_maximum(
    geom: SlitGeometry,
    populations: np.ndarray,
    cross: np.ndarray,
    m_index: int,
) -> float:
    """Measurement position: the analytic primary maximum, or a local argmax.

    With any nonzero folded phase the pairwise cosines cannot all peak at
    x_m, so the actual maximum within one fringe of x_m is located on a
    fine grid instead.
    """
    if not isinstance(m_index, (int, np.integer)) or m_index < 0:
        raise InvalidMaximumIndexError(f"m_index must be a non-negative integer, got {m_index!r}")
    x_m = m_index * geom.fringe_width
    if _folded_phases_zero(cross):
        return float(x_m)
    half = 0.5 * geom.fringe_width
    xs = np.linspace(x_m - half, x_m + half, 4001)
    values = envelope(xs, geom) * farfield_bracket(xs, geom, populations, cross)
    return float(xs[int(np.argmax(values))])


def _counting_setup(
    geom: SlitGeometry,
    cfg: CountingConfig,
    x_used: float,
) -> tuple[tuple[float, float], ScreenGrid, float]:
    fringe = geom.fringe_width
    window = cfg.window if cfg.window is not None else (-5.0 * fringe, 5.0 * fringe)
    bin_width = fringe * BIN_WIDTH_FRACTION
    if x_used - 0.5 * bin_width < window[0] or x_used + 0.5 * bin_width > window[1]:
        raise InvalidMaximumIndexError(
            f"measurement bin around x={x_used!r} falls outside the counting window {window!r}"
        )
    points = int(round((window[1] - window[0]) / fringe * POINTS_PER_FRINGE)) + 1
    grid = ScreenGrid(window[0], window[1], max(points, 801))
    return window, grid, bin_width


def _ratio_estimate(
    numerator: tuple[float, float], denominator: tuple[float, float], n: int
) -> tuple[float, float]:
    rate_top, err_top = numerator
    rate_bottom, err_bottom = denominator
    ratio = rate_top / rate_bottom
    c_value = (ratio - 1.0) / (n - 1)
    rel = np.hypot(err_top / rate_top, err_bottom / rate_bottom)
    return c_value, float(ratio * rel / (n - 1))


def measure_coherence(
    state: QuantonPureState | QuantonMixedState,
    det: DetectorGram,
    geom: SlitGeometry,
    m_index: int = 1,
    method: str = "analytic",
    counting: CountingConfig | None = None,
    num_shards: int = 1,
) -> CoherenceEstimate:
    """Run the coherent/incoherent protocol at primary maximum m_index.

    Analytic mode evaluates the far-field (or mixed) intensity and the
    phase-averaged intensity at the same screen position; the common
    envelope cancels in the ratio, so the result matches the closed-form
    coherence for any maximum index. Monte Carlo mode counts photons in a
    bin of one fiftieth of a fringe around that position, with the
    incoherent arm re-drawing all branch phases for every photon, and
    propagates Poisson errors through the ratio.
    """
    pure, mixed = _quanton_split(state)
    populations, cross = cross_structure(det, state=pure, mixed=mixed)
    n = populations.size
    if geom.n != n:
        raise DimensionMismatchError(f"geometry has {geom.n} slits, state has {n}")
    x_used = _locate_maximum(geom, populations, cross, m_index)

    if method == "analytic":
        prefactor = intensity_prefactor(geom) * float(envelope(x_used, geom))
        i_max = prefactor * float(farfield_bracket(x_used, geom, populations, cross))
        i_inc = prefactor * float(populations.sum())
        c_value = (i_max - i_inc) / i_inc / (n - 1)
        return CoherenceEstimate(c_value, 0.0, "analytic", "coherent_incoherent", n, x_used)

    if method != "monte_carlo":
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")

    cfg = counting if counting is not None else CountingConfig()
    window, grid, bin_width = _counting_setup(geom, cfg, x_used)
    windowed = CountingConfig(cfg.num_photons, cfg.seed, window, cfg.num_bins)
    kind = "mixed" if mixed is not None else "farfield"
    coherent = build_pattern(kind, grid, geom, state=pure, mixed=mixed, det=det)
    hits_coherent = sample_hits(coherent, windowed, num_shards=num_shards, stream_key=(0,))
    incoherent = build_pattern("incoherent", grid, geom, state=pure, mixed=mixed)
    hits_incoherent = _sample_phase_randomized(
        geom,
        populations,
        cross,
        incoherent,
        window,
        cfg.num_photons,
        cfg.seed,
        stream_key=(1,),
        num_shards=num_shards,
    )
    c_value, std_error = _ratio_estimate(
        estimate_intensity_at(hits_coherent, x_used, bin_width),
        estimate_intensity_at(hits_incoherent, x_used, bin_width),
        n,
    )
    return CoherenceEstimate(c_value, std_error, "monte_carlo", "coherent_incoherent", n, x_used)


def measure_input_coherence(
    state: QuantonPureState | QuantonMixedState,
    geom: SlitGeometry,
    m_index: int = 1,
    method: str = "analytic",
    counting: CountingConfig | None = None,
    num_shards: int = 1,
) -> CoherenceEstimate:
    """Measure the coherence of the incoming quanton itself.

    Compares the maximum intensity with all paths indistinguishable against
    the same position with all paths fully distinguishable. No detector
    overlaps enter, and the incoming state is never disturbed, so the
    result is the bare coherence of the quanton in the slit basis.
    """
    pure, mixed = _quanton_split(state)
    populations, cross = cross_structure(None, state=pure, mixed=mixed)
    n = populations.size
    if geom.n != n:
        raise DimensionMismatchError(f"geometry has {geom.n} slits, state has {n}")
    x_used = _locate_maximum(geom, populations, cross, m_index)

    if method == "analytic":
        prefactor = intensity_prefactor(geom) * float(envelope(x_used, geom))
        i_parallel = prefactor * float(farfield_bracket(x_used, geom, populations, cross))
        i_perp = prefactor * float(populations.sum())
        c_value = (i_parallel - i_perp) / i_perp / (n - 1)
        return CoherenceEstimate(c_value, 0.0, "analytic", "parallel_perp", n, x_used)

    if method != "monte_carlo":
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")

    cfg = counting if counting is not None else CountingConfig()
    window, grid, bin_width = _counting_setup(geom, cfg, x_used)
    windowed = CountingConfig(cfg.num_photons, cfg.seed, window, cfg.num_bins)
    parallel = build_pattern("parallel", grid, geom, state=pure, mixed=mixed)
    perp = build_pattern("perp", grid, geom, state=pure, mixed=mixed)
    hits_parallel = sample_hits(parallel, windowed, num_shards=num_shards, stream_key=(0,))
    hits_perp = sample_hits(perp, windowed, num_shards=num_shards, stream_key=(1,))
    c_value, std_error = _ratio_estimate(
        estimate_intensity_at(hits_parallel, x_used, bin_width),
        estimate_intensity_at(hits_perp, x_used, bin_width),
        n,
    )
    return CoherenceEstimate(c_value, std_error, "monte_carlo", "parallel_perp", n, x_used)


def unnormalized_coherence(estimate: CoherenceEstimate) -> float:
    """Drop the 1/(n-1) normalization: the raw off-diagonal l1 sum."""
    return (estimate.n_used - 1) * estimate.c_value


@dataclass(frozen=True, eq=False)
class DualityReport:
    """Theory and measurement side by side for one configuration."""

    c_theory: float
    c_measured: CoherenceEstimate
    d_q: float
    gap: float
    satisfied: bool


def duality_report(
    state: QuantonPureState | QuantonMixedState,
    det: DetectorGram,
    geom: SlitGeometry,
    m_index: int = 1,
    method: str = "analytic",
    counting: CountingConfig | None = None,
    num_shards: int = 1,
) -> DualityReport:
    """Measure coherence and check it against the distinguishability budget.

    ``satisfied`` allows three standard errors of slack on the measured
    side before declaring the wave-particle bound violated.
    """
    pure, mixed = _quanton_split(state)
    if mixed is not None:
        c_theory = coherence_mixed(mixed, det)
    else:
        c_theory = coherence_pure(pure, det)
    d_q = distinguishability(state.probabilities, det)
    estimate = measure_coherence(state, det, geom, m_index, method, counting, num_shards)
    gap = 1.0 - (estimate.c_value + d_q)
    satisfied = estimate.c_value + d_q <= 1.0 + 3.0 * estimate.std_error + 1e-10
    return DualityReport(c_theory, estimate, d_q, gap, satisfied)
