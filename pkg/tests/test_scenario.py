"""Tests for scenario parsing, defaults, serialization, and diagnostics."""
import numpy as np
import pytest

from quoherence import (
    QuantonMixedState,
    QuantonPureState,
    ScenarioValidationError,
    SchemaError,
    SweepSpec,
    parse_scenario,
    scenario_hash,
    serialize_scenario,
)
from quoherence.scenario import apply_parameter, resolve_document, scenario_diagnostics


def test_empty_document_gets_all_defaults():
    scenario = parse_scenario("")
    assert scenario.geometry.n == 3
    assert scenario.geometry.spacing == 50e-6
    assert isinstance(scenario.state, QuantonPureState)
    assert np.allclose(scenario.state.moduli, 1 / np.sqrt(3))
    assert np.allclose(scenario.detector.gram, 1.0)  # identical detectors
    assert scenario.grid.num_points == 4001
    assert scenario.grid.x_max == pytest.approx(5 * scenario.geometry.fringe_width)
    assert scenario.counting.num_photons == 1_000_000
    assert scenario.m_index == 1
    assert scenario.method == "analytic"
    assert scenario.sweep is None


def test_minimal_document_with_shorthands():
    scenario = parse_scenario("n: 4\ndetector: identical\n")
    assert scenario.geometry.n == 4
    assert scenario.state.n == 4
    assert np.allclose(scenario.detector.gram, 1.0)
    assert scenario.document["detector"] == {"identical": True}


def test_uniform_overlap_out_of_range_rejected():
    with pytest.raises(ScenarioValidationError) as err:
        parse_scenario("detector: {uniform_overlap: 1.2}")
    assert err.value.path == "detector.uniform_overlap"


def test_pure_state_normalization_checked():
    scenario = parse_scenario("n: 2\nstate: {pure: {moduli: [0.6, 0.8]}}")
    assert np.allclose(scenario.state.moduli, [0.6, 0.8])
    with pytest.raises(ScenarioValidationError):
        parse_scenario("n: 2\nstate: {pure: {moduli: [0.7, 0.8]}}")


def test_mixed_state_document():
    text = """
n: 2
state:
  mixed:
    coeffs:
      - [[0.5, 0.0], [0.2, 0.1]]
      - [[0.2, -0.1], [0.5, 0.0]]
detector: {uniform_overlap: 0.3}
"""
    scenario = parse_scenario(text)
    assert isinstance(scenario.state, QuantonMixedState)
    assert scenario.state.coeffs[0, 1] == pytest.approx(0.2 + 0.1j)


def test_detector_gram_matrix_document():
    text = """
n: 2
detector:
  gram:
    - [1.0, [0.5, 0.25]]
    - [[0.5, -0.25], 1.0]
"""
    scenario = parse_scenario(text)
    assert scenario.detector.gram[0, 1] == pytest.approx(0.5 + 0.25j)


def test_schema_errors_carry_paths():
    with pytest.raises(SchemaError) as err:
        parse_scenario("state: {pure: {moduli: [0.6, 0.8]}, mixed: {coeffs: [[1]]}}")
    assert err.value.path == "state"
    with pytest.raises(SchemaError):
        parse_scenario("unknown_section: 1")
    with pytest.raises(SchemaError):
        parse_scenario("geometry: {n: 3, shape: round}")
    with pytest.raises(SchemaError):
        parse_scenario("detector: {uniform_overlap: 0.5, orthogonal: true}")


def test_non_psd_gram_rejected_with_path():
    text = "n: 2\ndetector: {gram: [[1.0, 1.5], [1.5, 1.0]]}"
    with pytest.raises(ScenarioValidationError) as err:
        parse_scenario(text)
    assert err.value.path == "detector.gram"
    assert "eigenvalue" in str(err.value)


def test_counting_window_must_stay_in_grid():
    text = "grid: {x_min: -0.01, x_max: 0.01}\ncounting: {window: [-0.02, 0.02]}"
    with pytest.raises(ScenarioValidationError):
        parse_scenario(text)


def test_round_trip_preserves_document():
    text = """
geometry: {n: 3, slit_spacing: 40.0e-6}
state: {pure: {moduli: [0.6, 0.48, 0.64], phases: [0.0, 1.0, 2.0]}}
detector: {uniform_overlap: 0.5}
counting: {num_photons: 5000, seed: 99, num_bins: 50}
protocol: {m_index: 2, method: mc}
sweep: {parameter: detector.uniform_overlap, start: 0.0, stop: 1.0, steps: 5}
"""
    scenario = parse_scenario(text)
    recovered = parse_scenario(serialize_scenario(scenario))
    assert recovered.document == scenario.document
    assert scenario_hash(recovered) == scenario_hash(scenario)


def test_hash_is_stable_and_sensitive():
    base = parse_scenario("")
    assert scenario_hash(base) == scenario_hash(parse_scenario(""))
    changed = parse_scenario("counting: {seed: 2}")
    assert scenario_hash(changed) != scenario_hash(base)
    assert len(scenario_hash(base)) == 12


def test_method_shorthand_normalized():
    scenario = parse_scenario("protocol: {method: mc}")
    assert scenario.method == "monte_carlo"


def test_sweep_spec_validation():
    with pytest.raises(ScenarioValidationError):
        SweepSpec("detector.uniform_overlap", 0.0, 1.0, 1)
    with pytest.raises(ScenarioValidationError):
        SweepSpec("detector.uniform_overlap", 0.5, 0.5, 5)
    with pytest.raises(ScenarioValidationError):
        SweepSpec("detector.uniform_overlap", 0.0, 1.0, 5, record=("bogus",))
    spec = SweepSpec("detector.uniform_overlap", 0.0, 1.0, 5)
    assert spec.values.size == 5


def test_apply_parameter_replaces_leaf():
    scenario = parse_scenario("detector: {uniform_overlap: 0.2}")
    updated = apply_parameter(scenario.document, "detector.uniform_overlap", 0.9)
    assert updated["detector"]["uniform_overlap"] == 0.9
    assert scenario.document["detector"]["uniform_overlap"] == 0.2
    resolved = resolve_document(updated)
    assert resolved.detector.gram[0, 1] == pytest.approx(0.9)


def test_apply_parameter_rejects_missing_path():
    scenario = parse_scenario("")
    with pytest.raises(ScenarioValidationError):
        apply_parameter(scenario.document, "detector.uniform_overlap", 0.5)


def test_diagnostics_all_pass_for_default():
    checks, ok = scenario_diagnostics({})
    assert ok
    assert all(check["status"] == "ok" for check in checks)


def test_diagnostics_farfield_warning_is_not_failure():
    checks, ok = scenario_diagnostics({"geometry": {"slit_width": 1e-3}})
    assert ok
    statuses = {check["name"]: check["status"] for check in checks}
    assert statuses["far-field regime"] == "warning"


def test_diagnostics_report_bad_gram():
    raw = {"n": 2, "detector": {"gram": [[1.0, 1.5], [1.5, 1.0]]}}
    checks, ok = scenario_diagnostics(raw)
    assert not ok
    detector_checks = [c for c in checks if c["name"] == "detector"]
    assert detector_checks[0]["status"] == "error"
    assert "eigenvalue" in detector_checks[0]["detail"]
