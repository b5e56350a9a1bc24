"""Command-line front end: pattern | measure | sweep | validate.

Each command reads one scenario document (``--scenario``, else the
``QUOHERENCE_DEFAULT_SCENARIO`` environment variable, else built-in
defaults), optionally overridden by ``--seed``, ``--photons``,
``--method`` and ``--m-index``. Tabular results are CSV with a leading
``# scenario=<hash>`` provenance line; ``measure`` writes a YAML report.
When ``--out`` is given, a matplotlib figure is rendered next to the
output file unless ``--no-plot`` is passed.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import yaml

from .core import coherence_mixed, coherence_pure, distinguishability
from .errors import QuoherenceError
from .fringes import (
    build_pattern,
    intensity_exact,
    intensity_exact_mixed,
    intensity_farfield,
    intensity_incoherent,
    intensity_mixed,
    visibility,
)
from .protocols import measure_coherence, measure_input_coherence, duality_report
from .scenario import (
    Scenario,
    apply_parameter,
    resolve_document,
    scenario_diagnostics,
    scenario_hash,
)

ENV_DEFAULT_SCENARIO = "QUOHERENCE_DEFAULT_SCENARIO"


def _load_raw(args) -> dict:
    path = args.scenario or os.environ.get(ENV_DEFAULT_SCENARIO)
    if path:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = ""
    raw = yaml.safe_load(text) if text.strip() else {}
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise QuoherenceError(f"scenario document root must be a mapping, got {type(raw).__name__}")
    if args.seed is not None or args.photons is not None:
        counting = raw.setdefault("counting", {})
        if isinstance(counting, dict):
            if args.seed is not None:
                counting["seed"] = args.seed
            if args.photons is not None:
                counting["num_photons"] = args.photons
    if args.method is not None or args.m_index is not None:
        protocol = raw.setdefault("protocol", {})
        if isinstance(protocol, dict):
            if args.method is not None:
                protocol["method"] = args.method
            if args.m_index is not None:
                protocol["m_index"] = args.m_index
    return raw


def _write_text(out: str | None, text: str) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header_hash: str, columns: list[str], rows) -> str:
    lines = [f"# scenario={header_hash}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(repr(float(value)) for value in row))
    return "\n".join(lines) + "\n"


def _figure_path(out: str) -> str:
    return str(Path(out).with_suffix(".png"))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_pattern(scenario: Scenario, out: str | None, plot: bool) -> int:
    """Write per-grid-point intensities: exact, far-field, incoherent."""
    xs = scenario.grid.xs
    geom = scenario.geometry
    if scenario.is_mixed:
        exact = intensity_exact_mixed(xs, geom, scenario.state, scenario.detector)
        farfield = intensity_mixed(xs, geom, scenario.state, scenario.detector)
    else:
        exact = intensity_exact(xs, geom, scenario.state, scenario.detector)
        farfield = intensity_farfield(xs, geom, scenario.state, scenario.detector)
    incoherent = intensity_incoherent(xs, geom, scenario.state)
    digest = scenario_hash(scenario)
    text = _csv_text(
        digest,
        ["x_m", "intensity_exact", "intensity_farfield", "intensity_incoherent"],
        zip(xs, exact, farfield, incoherent),
    )
    _write_text(out, text)
    if out and plot:
        from . import plotting

        plotting.plot_pattern(
            xs,
            {"exact": exact, "farfield": farfield, "incoherent": incoherent},
            f"{geom.n}-slit pattern (scenario {digest})",
            _figure_path(out),
        )
    return 0


def cmd_measure(scenario: Scenario, out: str | None, plot: bool) -> int:
    """Write the measurement report; exit 0 iff the duality bound holds."""
    result = duality_report(
        scenario.state,
        scenario.detector,
        scenario.geometry,
        m_index=scenario.m_index,
        method=scenario.method,
        counting=scenario.counting,
    )
    input_estimate = measure_input_coherence(
        scenario.state,
        scenario.geometry,
        m_index=scenario.m_index,
        method=scenario.method,
        counting=scenario.counting,
    )
    estimate = result.c_measured
    report = {
        "scenario": scenario_hash(scenario),
        "parameters": {
            "n": scenario.geometry.n,
            "state": "mixed" if scenario.is_mixed else "pure",
            "m_index": scenario.m_index,
            "method": scenario.method,
            "num_photons": scenario.counting.num_photons,
            "seed": scenario.counting.seed,
            "x_used": float(estimate.x_used),
        },
        "coherence_theory": float(result.c_theory),
        "coherence_measured": {
            "value": float(estimate.c_value),
            "std_error": float(estimate.std_error),
        },
        "input_coherence": {
            "value": float(input_estimate.c_value),
            "std_error": float(input_estimate.std_error),
        },
        "distinguishability": float(result.d_q),
        "duality_gap": float(result.gap),
        "duality_satisfied": bool(result.satisfied),
    }
    text = yaml.safe_dump(report, sort_keys=False, default_flow_style=False)
    _write_text(out, text)
    if out and plot:
        from . import plotting

        plotting.plot_measure(report, f"coherence budget (scenario {report['scenario']})", _figure_path(out))
    return 0 if result.satisfied else 1


def _sweep_quantities(sub: Scenario, record: tuple[str, ...]) -> dict[str, float]:
    values: dict[str, float] = {}
    needed = set(record)
    c_theory = None
    d_q = None
    if {"C_theory", "gap"} & needed:
        if sub.is_mixed:
            c_theory = coherence_mixed(sub.state, sub.detector)
        else:
            c_theory = coherence_pure(sub.state, sub.detector)
    if {"D_Q", "gap"} & needed:
        d_q = distinguishability(sub.state.probabilities, sub.detector)
    if "C_theory" in needed:
        values["C_theory"] = c_theory
    if "C_expt" in needed:
        estimate = measure_coherence(
            sub.state,
            sub.detector,
            sub.geometry,
            m_index=sub.m_index,
            method=sub.method,
            counting=sub.counting,
        )
        values["C_expt"] = float(estimate.c_value)
    if "D_Q" in needed:
        values["D_Q"] = d_q
    if "V" in needed:
        kind = "mixed" if sub.is_mixed else "farfield"
        pattern = build_pattern(
            kind, sub.grid, sub.geometry,
            state=None if sub.is_mixed else sub.state,
            mixed=sub.state if sub.is_mixed else None,
            det=sub.detector,
        )
        fringe = sub.geometry.fringe_width
        values["V"] = visibility(pattern, (0.5 * fringe, 1.5 * fringe))
    if "gap" in needed:
        values["gap"] = 1.0 - (c_theory + d_q)
    return values


def cmd_sweep(scenario: Scenario, out: str | None, plot: bool) -> int:
    """Scan one parameter and write a quantities table, one row per point."""
    sweep = scenario.sweep
    if sweep is None:
        raise QuoherenceError("scenario has no sweep section; add one to use the sweep command")
    rows = []
    for value in sweep.values:
        document = apply_parameter(scenario.document, sweep.parameter, float(value))
        sub = resolve_document(document)
        quantities = _sweep_quantities(sub, sweep.record)
        rows.append([float(value)] + [quantities[name] for name in sweep.record])
    digest = scenario_hash(scenario)
    text = _csv_text(digest, [sweep.parameter, *sweep.record], rows)
    _write_text(out, text)
    if out and plot:
        from . import plotting

        table = {name: [row[1 + i] for row in rows] for i, name in enumerate(sweep.record)}
        plotting.plot_sweep(
            sweep.values,
            table,
            sweep.parameter,
            f"sweep (scenario {digest})",
            _figure_path(out),
        )
    return 0


def cmd_validate(raw: dict, out: str | None) -> int:
    """Print invariant diagnostics without running any simulation."""
    checks, ok = scenario_diagnostics(raw)
    lines = [f"{check['status'].upper():<8}{check['name']}: {check['detail']}" for check in checks]
    lines.append(f"{'RESULT':<8}{'all checks passed' if ok else 'validation failed'}")
    _write_text(out, "\n".join(lines) + "\n")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quoherence",
        description="n-slit interference: coherence, distinguishability, and measurement protocols",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("pattern", "screen intensity table over the scenario grid"),
        ("measure", "run both coherence protocols and report the duality budget"),
        ("sweep", "scan one scenario parameter and tabulate quantities"),
        ("validate", "check scenario invariants without simulating"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--scenario", metavar="PATH", help="scenario document (YAML/JSON)")
        cmd.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        cmd.add_argument("--seed", type=int, metavar="U64", help="override counting.seed")
        cmd.add_argument("--photons", type=int, metavar="N", help="override counting.num_photons")
        cmd.add_argument("--method", choices=("analytic", "mc"), help="override protocol.method")
        cmd.add_argument("--m-index", type=int, metavar="M", help="override protocol.m_index")
        cmd.add_argument("--no-plot", action="store_true", help="skip the figure next to --out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = _load_raw(args)
        if args.command == "validate":
            return cmd_validate(raw, args.out)
        scenario = resolve_document(raw)
        plot = not args.no_plot
        if args.command == "pattern":
            return cmd_pattern(scenario, args.out, plot)
        if args.command == "measure":
            return cmd_measure(scenario, args.out, plot)
        return cmd_sweep(scenario, args.out, plot)
    except QuoherenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
