"""Scenario documents: the CLI's experiment description format.

A scenario is a single YAML (or JSON) document with nested key/value
sections, all numbers in SI units and complex entries written as
``[re, im]`` pairs:

    geometry:
      n: 3
      slit_spacing: 50.0e-6
      slit_width: 5.0e-6
      wavelength: 500.0e-9
      screen_distance: 1.0
    state:
      pure: {moduli: [0.6, 0.8], phases: [0.0, 0.0]}
    detector:
      uniform_overlap: 0.5
    grid: {x_min: -0.05, x_max: 0.05, num_points: 4001}
    counting: {num_photons: 1000000, seed: 1, window: [-0.05, 0.05], num_bins: 200}
    protocol: {m_index: 1, method: analytic}
    sweep:
      parameter: detector.uniform_overlap
      start: 0.0
      stop: 1.0
      steps: 11
      record: [C_theory, C_expt, D_Q, V, gap]

Every section may be omitted; defaults are filled in and the fully
normalized document is what gets hashed and re-serialized. Shorthands:
a top-level ``n`` sets ``geometry.n``, and ``detector`` may be the bare
string ``orthogonal`` or ``identical``.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import core
from .core import DetectorGram, QuantonMixedState, QuantonPureState
from .errors import QuoherenceError, ScenarioValidationError, SchemaError
from .fringes import FarFieldValidityWarning, ScreenGrid, SlitGeometry
from .protocols import (
    DEFAULT_NUM_BINS,
    DEFAULT_NUM_PHOTONS,
    DEFAULT_SEED,
    CountingConfig,
)

SWEEP_QUANTITIES = ("C_theory", "C_expt", "D_Q", "V", "gap")

_GEOMETRY_KEYS = ("n", "slit_spacing", "slit_width", "wavelength", "screen_distance")
_DETECTOR_ARMS = ("gram", "uniform_overlap", "orthogonal", "identical")

_GEOMETRY_DEFAULTS = {
    "n": 3,
    "slit_spacing": 50e-6,
    "slit_width": 5e-6,
    "wavelength": 500e-9,
    "screen_distance": 1.0,
}


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """One-parameter scan request."""

    parameter: str
    start: float
    stop: float
    steps: int
    record: tuple[str, ...] = SWEEP_QUANTITIES

    def __post_init__(self):
        if self.steps < 2:
            raise ScenarioValidationError("sweep.steps", "steps must be >= 2")
        if self.start == self.stop:
            raise ScenarioValidationError("sweep", "start and stop must differ")
        unknown = [q for q in self.record if q not in SWEEP_QUANTITIES]
        if unknown:
            raise ScenarioValidationError(
                "sweep.record", f"unknown quantities {unknown}, expected subset of {SWEEP_QUANTITIES}"
            )

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Fully resolved experiment description."""

    document: dict
    geometry: SlitGeometry
    state: QuantonPureState | QuantonMixedState
    detector: DetectorGram
    grid: ScreenGrid
    counting: CountingConfig
    m_index: int
    method: str
    sweep: SweepSpec | None = field(default=None)

    @property
    def is_mixed(self) -> bool:
        return isinstance(self.state, QuantonMixedState)


# ---------------------------------------------------------------------------
# Raw-value readers
# ---------------------------------------------------------------------------

def _expect_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _expect_keys(mapping: dict, allowed: tuple[str, ...], path: str) -> None:
    unknown = [k for k in mapping if k not in allowed]
    if unknown:
        raise SchemaError(path, f"unknown keys {unknown}, expected subset of {list(allowed)}")


def _read_number(mapping: dict, key: str, path: str, default=None) -> float:
    value = mapping.get(key, default)
    if value is None:
        raise SchemaError(f"{path}.{key}", "missing required number")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}.{key}", f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise SchemaError(f"{path}.{key}", f"expected a finite number, got {value!r}")
    return float(value)


def _read_int(mapping: dict, key: str, path: str, default=None) -> int:
    value = mapping.get(key, default)
    if value is None:
        raise SchemaError(f"{path}.{key}", "missing required integer")
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}.{key}", f"expected an integer, got {value!r}")
    return int(value)


def _read_complex(value, path: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(part, (int, float)) and not isinstance(part, bool) for part in value
    ):
        return complex(float(value[0]), float(value[1]))
    raise SchemaError(path, f"expected a number or [re, im] pair, got {value!r}")


def _read_complex_matrix(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise SchemaError(path, "expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != len(value):
            raise SchemaError(f"{path}[{i}]", "matrix must be square")
        rows.append([_read_complex(entry, f"{path}[{i}][{j}]") for j, entry in enumerate(row)])
    return np.array(rows, dtype=complex)


def _encode_complex_matrix(mat: np.ndarray) -> list:
    return [[[float(entry.real), float(entry.imag)] for entry in row] for row in np.asarray(mat, dtype=complex)]


def _float_list(value, path: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise SchemaError(path, "expected a non-empty list of numbers")
    out = []
    for i, entry in enumerate(value):
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            raise SchemaError(f"{path}[{i}]", f"expected a number, got {entry!r}")
        out.append(float(entry))
    return out


# ---------------------------------------------------------------------------
# Section resolvers
# ---------------------------------------------------------------------------

def _resolve_geometry(raw: dict) -> tuple[SlitGeometry, dict]:
    section = _expect_mapping(raw.get("geometry", {}), "geometry")
    _expect_keys(section, _GEOMETRY_KEYS, "geometry")
    merged = dict(_GEOMETRY_DEFAULTS)
    if "n" in raw:
        shorthand = raw["n"]
        if isinstance(shorthand, bool) or not isinstance(shorthand, int):
            raise SchemaError("n", f"expected an integer, got {shorthand!r}")
        merged["n"] = shorthand
    if "n" in section:
        merged["n"] = _read_int(section, "n", "geometry")
    for key in _GEOMETRY_KEYS[1:]:
        if key in section:
            merged[key] = _read_number(section, key, "geometry")
    if merged["n"] < 2:
        raise ScenarioValidationError("geometry.n", f"need at least 2 slits, got {merged['n']}")
    for key in _GEOMETRY_KEYS[1:]:
        if merged[key] <= 0:
            raise ScenarioValidationError(f"geometry.{key}", f"must be positive, got {merged[key]!r}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FarFieldValidityWarning)
        geom = SlitGeometry(
            n=merged["n"],
            spacing=merged["slit_spacing"],
            width=merged["slit_width"],
            wavelength=merged["wavelength"],
            distance=merged["screen_distance"],
        )
    return geom, merged


def _resolve_state(raw: dict, n: int) -> tuple[QuantonPureState | QuantonMixedState, dict]:
    section = raw.get("state")
    if section is None:
        state = QuantonPureState.equal_superposition(n)
        document = {
            "pure": {
                "moduli": [float(m) for m in state.moduli],
                "phases": [0.0] * n,
            }
        }
        return state, document
    section = _expect_mapping(section, "state")
    _expect_keys(section, ("pure", "mixed"), "state")
    if len(section) != 1:
        raise SchemaError("state", f"expected exactly one of 'pure' or 'mixed', got {sorted(section)}")
    if "pure" in section:
        pure = _expect_mapping(section["pure"], "state.pure")
        _expect_keys(pure, ("moduli", "phases"), "state.pure")
        if "moduli" not in pure:
            raise SchemaError("state.pure.moduli", "missing required list")
        moduli = _float_list(pure["moduli"], "state.pure.moduli")
        phases = _float_list(pure["phases"], "state.pure.phases") if "phases" in pure else [0.0] * len(moduli)
        if len(phases) != len(moduli):
            raise SchemaError("state.pure.phases", "phases and moduli must have the same length")
        if len(moduli) != n:
            raise ScenarioValidationError("state.pure.moduli", f"expected {n} entries, got {len(moduli)}")
        try:
            state = QuantonPureState(moduli=np.array(moduli), phases=np.array(phases))
        except (QuoherenceError, ValueError) as exc:
            raise ScenarioValidationError("state.pure", str(exc)) from exc
        return state, {"pure": {"moduli": [float(m) for m in state.moduli], "phases": [float(p) for p in state.phases]}}
    mixed_raw = _expect_mapping(section["mixed"], "state.mixed")
    _expect_keys(mixed_raw, ("coeffs",), "state.mixed")
    if "coeffs" not in mixed_raw:
        raise SchemaError("state.mixed.coeffs", "missing required matrix")
    coeffs = _read_complex_matrix(mixed_raw["coeffs"], "state.mixed.coeffs")
    if coeffs.shape[0] != n:
        raise ScenarioValidationError("state.mixed.coeffs", f"expected {n}x{n} matrix, got {coeffs.shape}")
    try:
        state = QuantonMixedState(coeffs)
    except (QuoherenceError, ValueError) as exc:
        raise ScenarioValidationError("state.mixed.coeffs", str(exc)) from exc
    return state, {"mixed": {"coeffs": _encode_complex_matrix(state.coeffs)}}


def _resolve_detector(raw: dict, n: int) -> tuple[DetectorGram, dict]:
    section = raw.get("detector", "identical")
    if isinstance(section, str):
        section = {section: True}
    section = _expect_mapping(section, "detector")
    _expect_keys(section, _DETECTOR_ARMS, "detector")
    if len(section) != 1:
        raise SchemaError("detector", f"expected exactly one of {list(_DETECTOR_ARMS)}, got {sorted(section)}")
    arm = next(iter(section))
    if arm == "orthogonal":
        if section[arm] is not True:
            raise SchemaError("detector.orthogonal", f"expected true, got {section[arm]!r}")
        return core.orthogonal_detectors(n), {"orthogonal": True}
    if arm == "identical":
        if section[arm] is not True:
            raise SchemaError("detector.identical", f"expected true, got {section[arm]!r}")
        return core.identical_detectors(n), {"identical": True}
    if arm == "uniform_overlap":
        overlap = _read_number(section, "uniform_overlap", "detector")
        if not 0.0 <= overlap <= 1.0:
            raise ScenarioValidationError(
                "detector.uniform_overlap", f"overlap must lie in [0, 1], got {overlap!r}"
            )
        return core.uniform_overlap_gram(n, overlap), {"uniform_overlap": overlap}
    gram = _read_complex_matrix(section["gram"], "detector.gram")
    if gram.shape[0] != n:
        raise ScenarioValidationError("detector.gram", f"expected {n}x{n} matrix, got {gram.shape}")
    try:
        det = core.validate_gram(gram)
    except QuoherenceError as exc:
        raise ScenarioValidationError("detector.gram", str(exc)) from exc
    return det, {"gram": _encode_complex_matrix(det.gram)}


def _resolve_grid(raw: dict, geom: SlitGeometry) -> tuple[ScreenGrid, dict]:
    half = 5.0 * geom.fringe_width
    section = _expect_mapping(raw.get("grid", {}), "grid")
    _expect_keys(section, ("x_min", "x_max", "num_points"), "grid")
    x_min = _read_number(section, "x_min", "grid", default=-half)
    x_max = _read_number(section, "x_max", "grid", default=half)
    num_points = _read_int(section, "num_points", "grid", default=4001)
    try:
        grid = ScreenGrid(x_min, x_max, num_points)
    except ValueError as exc:
        raise ScenarioValidationError("grid", str(exc)) from exc
    return grid, {"x_min": x_min, "x_max": x_max, "num_points": num_points}


def _resolve_counting(raw: dict, grid: ScreenGrid) -> tuple[CountingConfig, dict]:
    section = _expect_mapping(raw.get("counting", {}), "counting")
    _expect_keys(section, ("num_photons", "seed", "window", "num_bins"), "counting")
    num_photons = _read_int(section, "num_photons", "counting", default=DEFAULT_NUM_PHOTONS)
    seed = _read_int(section, "seed", "counting", default=DEFAULT_SEED)
    num_bins = _read_int(section, "num_bins", "counting", default=DEFAULT_NUM_BINS)
    if "window" in section:
        window_list = _float_list(section["window"], "counting.window")
        if len(window_list) != 2:
            raise SchemaError("counting.window", f"expected [low, high], got {section['window']!r}")
        window = (window_list[0], window_list[1])
    else:
        window = (grid.x_min, grid.x_max)
    if not window[0] < window[1]:
        raise ScenarioValidationError("counting.window", f"window {window!r} is empty")
    if window[0] < grid.x_min or window[1] > grid.x_max:
        raise ScenarioValidationError(
            "counting.window", f"window {window!r} exceeds the grid [{grid.x_min!r}, {grid.x_max!r}]"
        )
    try:
        cfg = CountingConfig(num_photons=num_photons, seed=seed, window=window, num_bins=num_bins)
    except (QuoherenceError, ValueError) as exc:
        raise ScenarioValidationError("counting", str(exc)) from exc
    document = {
        "num_photons": num_photons,
        "seed": seed,
        "window": [window[0], window[1]],
        "num_bins": num_bins,
    }
    return cfg, document


def _resolve_protocol(raw: dict) -> tuple[int, str, dict]:
    section = _expect_mapping(raw.get("protocol", {}), "protocol")
    _expect_keys(section, ("m_index", "method"), "protocol")
    m_index = _read_int(section, "m_index", "protocol", default=1)
    if m_index < 0:
        raise ScenarioValidationError("protocol.m_index", f"must be >= 0, got {m_index}")
    method = section.get("method", "analytic")
    if method == "mc":
        method = "monte_carlo"
    if method not in ("analytic", "monte_carlo"):
        raise ScenarioValidationError(
            "protocol.method", f"expected 'analytic' or 'mc'/'monte_carlo', got {method!r}"
        )
    return m_index, method, {"m_index": m_index, "method": method}


def _resolve_sweep(raw: dict) -> tuple[SweepSpec | None, dict | None]:
    if "sweep" not in raw:
        return None, None
    section = _expect_mapping(raw["sweep"], "sweep")
    _expect_keys(section, ("parameter", "start", "stop", "steps", "record"), "sweep")
    parameter = section.get("parameter")
    if not isinstance(parameter, str) or not parameter:
        raise SchemaError("sweep.parameter", f"expected a dotted path string, got {parameter!r}")
    start = _read_number(section, "start", "sweep")
    stop = _read_number(section, "stop", "sweep")
    steps = _read_int(section, "steps", "sweep")
    if "record" in section:
        record_raw = section["record"]
        if not isinstance(record_raw, list) or not all(isinstance(q, str) for q in record_raw):
            raise SchemaError("sweep.record", f"expected a list of quantity names, got {record_raw!r}")
        record = tuple(record_raw)
    else:
        record = SWEEP_QUANTITIES
    spec = SweepSpec(parameter=parameter, start=start, stop=stop, steps=steps, record=record)
    return spec, {
        "parameter": parameter,
        "start": start,
        "stop": stop,
        "steps": steps,
        "record": list(record),
    }


_TOP_LEVEL_KEYS = ("n", "geometry", "state", "detector", "grid", "counting", "protocol", "sweep")


def resolve_document(raw: dict | None) -> Scenario:
    """Validate a raw document, fill defaults, and build the Scenario."""
    raw = {} if raw is None else _expect_mapping(raw, "")
    _expect_keys(raw, _TOP_LEVEL_KEYS, "document root")
    geom, geometry_doc = _resolve_geometry(raw)
    state, state_doc = _resolve_state(raw, geom.n)
    detector, detector_doc = _resolve_detector(raw, geom.n)
    grid, grid_doc = _resolve_grid(raw, geom)
    counting, counting_doc = _resolve_counting(raw, grid)
    m_index, method, protocol_doc = _resolve_protocol(raw)
    sweep, sweep_doc = _resolve_sweep(raw)
    document = {
        "geometry": geometry_doc,
        "state": state_doc,
        "detector": detector_doc,
        "grid": grid_doc,
        "counting": counting_doc,
        "protocol": protocol_doc,
    }
    if sweep_doc is not None:
        document["sweep"] = sweep_doc
    return Scenario(
        document=document,
        geometry=geom,
        state=state,
        detector=detector,
        grid=grid,
        counting=counting,
        m_index=m_index,
        method=method,
        sweep=sweep,
    )


def parse_scenario(text: str) -> Scenario:
    """Parse a YAML/JSON scenario document into a resolved Scenario."""
    try:
        raw = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise SchemaError("", f"document is not valid YAML: {exc}") from exc
    if raw is not None and not isinstance(raw, dict):
        raise SchemaError("", f"expected a mapping at the document root, got {type(raw).__name__}")
    return resolve_document(raw)


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical YAML text of the normalized document (round-trips exactly)."""
    return yaml.safe_dump(scenario.document, sort_keys=False, default_flow_style=False)


def scenario_hash(scenario: Scenario) -> str:
    """Stable 12-hex digest of the canonical document, for output headers."""
    canonical = json.dumps(scenario.document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def apply_parameter(document: dict, path: str, value: float) -> dict:
    """Return a copy of a normalized document with one numeric leaf replaced."""
    updated = copy.deepcopy(document)
    keys = path.split(".")
    node = updated
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ScenarioValidationError("sweep.parameter", f"path {path!r} not found in scenario")
        node = node[key]
    leaf = keys[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ScenarioValidationError("sweep.parameter", f"path {path!r} not found in scenario")
    if isinstance(node[leaf], bool) or not isinstance(node[leaf], (int, float)):
        raise ScenarioValidationError(
            "sweep.parameter", f"path {path!r} does not point at a number"
        )
    node[leaf] = float(value) if isinstance(node[leaf], float) or not float(value).is_integer() else int(value)
    return updated


# ---------------------------------------------------------------------------
# Diagnostics for the validate command
# ---------------------------------------------------------------------------

def scenario_diagnostics(raw: dict | None) -> tuple[list[dict], bool]:
    """Run every invariant check and report each outcome.

    Returns (checks, ok) where each check is {name, status, detail} with
    status one of ok / warning / error. No simulation is run.
    """
    checks: list[dict] = []
    ok = True

    def record(name: str, status: str, detail: str) -> None:
        nonlocal ok
        if status == "error":
            ok = False
        checks.append({"name": name, "status": status, "detail": detail})

    raw = {} if raw is None else raw
    geom = None
    try:
        geom, _ = _resolve_geometry(raw)
        record("geometry", "ok", f"n={geom.n}, fringe width {geom.fringe_width:.6g} m")
    except QuoherenceError as exc:
        record("geometry", "error", str(exc))
    if geom is not None:
        limit = 1e-3 * geom.spread_scale
        if geom.farfield_valid:
            record(
                "far-field regime",
                "ok",
                f"width^2 = {geom.width**2:.3e} m^2 <= {limit:.3e} m^2",
            )
        else:
            record(
                "far-field regime",
                "warning",
                f"width^2 = {geom.width**2:.3e} m^2 exceeds {limit:.3e} m^2; "
                "far-field expressions degrade",
            )
        try:
            _, state_doc = _resolve_state(raw, geom.n)
            kind = "pure" if "pure" in state_doc else "mixed"
            record("state", "ok", f"{kind} state normalized (n={geom.n})")
        except QuoherenceError as exc:
            record("state", "error", str(exc))
        try:
            detector, _ = _resolve_detector(raw, geom.n)
            smallest = float(np.linalg.eigvalsh(np.asarray(detector.gram))[0])
            record("detector", "ok", f"Hermitian, unit diagonal, PSD (min eigenvalue {smallest:.6g})")
        except QuoherenceError as exc:
            record("detector", "error", str(exc))
        grid = None
        try:
            grid, _ = _resolve_grid(raw, geom)
            record("grid", "ok", f"{grid.num_points} points over [{grid.x_min:.6g}, {grid.x_max:.6g}] m")
        except QuoherenceError as exc:
            record("grid", "error", str(exc))
        if grid is not None:
            try:
                counting, _ = _resolve_counting(raw, grid)
                record(
                    "counting",
                    "ok",
                    f"{counting.num_photons} photons, seed {counting.seed}, {counting.num_bins} bins",
                )
            except QuoherenceError as exc:
                record("counting", "error", str(exc))
        try:
            m_index, method, _ = _resolve_protocol(raw)
            record("protocol", "ok", f"m_index={m_index}, method={method}")
        except QuoherenceError as exc:
            record("protocol", "error", str(exc))
        try:
            sweep, _ = _resolve_sweep(raw)
            if sweep is not None:
                record("sweep", "ok", f"{sweep.parameter}: {sweep.steps} steps")
        except QuoherenceError as exc:
            record("sweep", "error", str(exc))
    return checks, ok
