"""
Photon-Carnot Engine - Main Orchestrator

This is the command-line entry point that ties the modules together:
1. steady-state - stationary cavity field against the mean-photon closed form
2. cycle - four-corner Carnot cycle: corners, heats, work, efficiency
3. sweep - efficiency across a grid of Q, xi, phase or T_h/T_l
4. ts-diagram - temperature-entropy samples of the cycle
5. feasibility - cavity loss against atomic coherence on real platforms

Usage:
    python main.py cycle                                  # default config
    python main.py cycle --config data/configs/single_bath_coherent.json
    python main.py steady-state --config data/configs/short_tau_steady_state.json --dump-state rho.json
    python main.py sweep --config data/configs/lossy_dephased.json --out sweep.csv
    python main.py cycle --set hot.T=500 --set engine.q_factor=1e12
    python main.py feasibility --platform optical

Exit codes: 0 success, 2 config/usage error, 3 physics-domain error,
4 numerical failure.
"""

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from atoms import dephase, with_phase
from carnot import (
    TS_COLUMNS,
    CycleReport,
    CycleSpec,
    DiagramPoint,
    efficiency_limits,
    positive_work_condition,
    run_cycle,
    ts_diagram,
    ts_rows,
)
from config import (
    OUTPUT_FORMATS,
    SWEEP_PARAMS,
    RunConfig,
    apply_overrides,
    load_config,
    parse_config,
    parse_value,
)
from errors import ConfigError, PCEError, PhysicsDomainError
from feasibility import (
    DEFAULT_COHERENCE,
    DEFAULT_PLATFORMS_PATH,
    FEASIBILITY_COLUMNS,
    PlatformCatalog,
    feasibility_table,
)
from fock import fock_state, mandel_q, mean_photon, photon_variance, thermal_n_max
from micromaser import (
    evolve,
    exact_effective_temperature,
    mean_photon_analytic,
    mean_photon_relaxation_rate,
    mean_photon_steady,
    steady_state,
)
from reporting import aligned_table, csv_text, to_json_text, write_csv, write_output

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
THREADS_ENV = "PCE_NUM_THREADS"
STOCK_PLATFORMS = ["optical", "microwave", "circuit"]

CORNER_COLUMNS = ["index", "nu_radps", "T_eff_K", "n_mean", "entropy_JperK"]
SWEEP_COLUMNS = ["param", "value", "eta", "eta_closed_form", "zeta_h", "zeta_l",
                 "T_h_eff_K", "T_l_eff_K", "q_in_J", "q_out_J", "work_J", "positive_work",
                 "S1_JperK", "S2_JperK", "S3_JperK", "S4_JperK", "error"]
POPULATION_COLUMNS = ["n", "p_n"]


def configure_logging(verbose: bool = False, log_path: Optional[str] = None) -> None:
    """Log to stderr, and to log_path as well when given."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_path:
        handlers.append(logging.FileHandler(log_path, encoding="utf-8"))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


class EngineRunner:
    """
    Runs the engine analyses for one validated configuration.
    """

    def __init__(self, config: RunConfig):
        """
        Initialize the runner.

        Args:
            config: validated run configuration
        """
        self.config = config

    def steady_state_report(self) -> Tuple[Dict[str, Any], Any]:
        """
        Stationary field of the hot-stroke atoms against the closed form.

        Returns:
            (report dictionary, FieldState)
        """
        params, prep = self.config.engine, self.config.hot.prep
        analytic = mean_photon_steady(params, prep)
        needed = thermal_n_max(analytic, params.tail_tol)
        # geometric-tail estimate; stationary fields with loss or coherence deviate from it
        if needed > 2 * params.n_max:
            raise ConfigError(
                "engine.n_max",
                f"the stationary field holds about {analytic:.4g} photons and needs n_max near {needed}, "
                f"got {params.n_max}; see data/configs/short_tau_steady_state.json for a run sized for this command",
            )
        state = steady_state(params, prep, tol=self.config.solver.tol)
        numeric = mean_photon(state)
        gap = abs(numeric - analytic) / analytic if analytic > 0.0 else abs(numeric)
        report: Dict[str, Any] = {
            "n_max": params.n_max,
            "mean_photon_numeric": numeric,
            "mean_photon_analytic": analytic,
            "relative_gap": gap,
            "photon_variance": photon_variance(state),
            "mandel_q": mandel_q(state) if numeric > 0.0 else 0.0,
            "relaxation_rate_per_s": mean_photon_relaxation_rate(params, prep),
            "effective_temperature_exact_K": exact_effective_temperature(numeric, params.nu),
            "tail_mass": state.tail_mass,
            "populations": [float(p) for p in state.populations],
        }

        t_final = self.config.solver.t_final
        if t_final is not None:
            vacuum = fock_state(params.n_max, 0, params.tail_tol)
            run = evolve(vacuum, params, prep, t_final, rel_tol=self.config.solver.rel_tol)
            report["transient"] = {
                "t_final_s": t_final,
                "mean_photon_numeric": mean_photon(run.state),
                "mean_photon_analytic": mean_photon_analytic(0.0, t_final, params, prep),
                "steps": run.steps,
            }
        logger.info("steady state: <n>=%.6g closed form=%.6g gap=%.3e", numeric, analytic, gap)
        return report, state

    def cycle_report(self) -> Tuple[CycleReport, Dict[str, Any]]:
        """Cycle report plus the limiting efficiencies and positive-work margin."""
        spec = self.config.cycle_spec()
        report = run_cycle(spec)
        data = report.to_dict()
        data["frequency_labeling"] = spec.frequency_labeling
        try:
            limits = efficiency_limits(spec)
            data["limits"] = {"ideal": limits.ideal, "dephased": limits.dephased,
                              "bad_cavity": limits.bad_cavity}
        except PhysicsDomainError as exc:
            logger.warning("efficiency limits unavailable: %s", exc)
            data["limits"] = None
        condition = positive_work_condition(spec)
        data["positive_work_condition"] = {"satisfied": condition.satisfied, "margin_K": condition.margin}
        logger.info("cycle: eta=%.6g work=%.6g J", report.eta, report.work)
        return report, data

    def sweep_spec(self, param: str, value: float) -> CycleSpec:
        """Cycle spec with one parameter replaced."""
        spec = self.config.cycle_spec()
        if param == "q_factor":
            return replace(spec, engine=replace(spec.engine, q_factor=value))
        if param == "xi":
            return replace(spec, hot=replace(spec.hot, prep=dephase(spec.hot.prep, value)))
        if param == "phase":
            return replace(spec, hot=replace(spec.hot, prep=with_phase(spec.hot.prep, value)))
        if param == "t_ratio":
            # regenerate so thermal preparations follow the new hot temperature
            t_h = self.config.cold.T * value
            doc = apply_overrides(self.config.document, [f"hot.T={json.dumps(t_h)}"])
            return parse_config(doc).cycle_spec()
        raise ConfigError("sweep.param", f"expected one of {list(SWEEP_PARAMS)}, got {param!r}")

    def sweep_point(self, param: str, value: float) -> Dict[str, Any]:
        row: Dict[str, Any] = {"param": param, "value": value, "error": ""}
        try:
            report = run_cycle(self.sweep_spec(param, value))
        except PCEError as exc:
            logger.warning("sweep point failed: param=%s value=%g error=%s", param, value, exc)
            row["error"] = str(exc)
            return row
        row.update({
            "eta": report.eta,
            "eta_closed_form": report.eta_closed_form,
            "zeta_h": report.zeta_h,
            "zeta_l": report.zeta_l,
            "T_h_eff_K": report.t_h_eff,
            "T_l_eff_K": report.t_l_eff,
            "q_in_J": report.q_in,
            "q_out_J": report.q_out,
            "work_J": report.work,
            "positive_work": report.positive_work,
        })
        for corner in report.corners:
            row[f"S{corner.index}_JperK"] = corner.entropy
        return row

    def sweep_rows(self, param: str, grid: Sequence[float], workers: int = 1) -> List[Dict[str, Any]]:
        """
        Evaluate the cycle at every grid point.

        Points may run concurrently; rows come back in grid order and failed
        points carry their message in the error column.
        """
        check_grid(param, grid)
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            rows = list(pool.map(lambda v: self.sweep_point(param, v), grid))
        logger.info("sweep: %d points over %s, %d failed", len(rows), param,
                    sum(1 for r in rows if r["error"]))
        return rows

    def ts_points(self) -> List[DiagramPoint]:
        return ts_diagram(self.config.cycle_spec(), self.config.solver.points_per_stroke)


def check_grid(param: str, grid: Sequence[float]) -> None:
    """Grids must be non-empty and monotone; only q_factor may be infinite."""
    if param not in SWEEP_PARAMS:
        raise ConfigError("sweep.param", f"expected one of {list(SWEEP_PARAMS)}, got {param!r}")
    if not grid:
        raise ConfigError("sweep.grid", "grid is empty")
    if param != "q_factor" and any(math.isinf(v) for v in grid):
        raise ConfigError("sweep.grid", f"infinite values are only allowed for q_factor, not {param}")
    pairs = list(zip(grid, grid[1:]))
    if not (all(a <= b for a, b in pairs) or all(a >= b for a, b in pairs)):
        raise ConfigError("sweep.grid", "grid must be monotone")


def sweep_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"expected an integer, got {raw!r}")
    return max(1, value)


def parse_grid(text: str) -> List[Any]:
    """"1e2,1e3,inf" -> [100.0, 1000.0, "inf"]."""
    items = [item.strip() for item in text.split(",") if item.strip()]
    return [parse_value(item) for item in items]


def _render(data: Any, rows: List[Dict[str, Any]], columns: List[str], fmt: str) -> str:
    if fmt == "json":
        return to_json_text(data)
    if fmt == "csv":
        return csv_text([[r.get(c) for c in columns] for r in rows], columns)
    return aligned_table(rows, columns)


def _corner_rows(report: CycleReport) -> List[Dict[str, Any]]:
    return [dict(zip(CORNER_COLUMNS, [c.index, c.nu, c.t_eff, c.n_mean, c.entropy]))
            for c in report.corners]


def cmd_steady_state(config: RunConfig) -> None:
    report, state = EngineRunner(config).steady_state_report()
    rows = [{"n": n, "p_n": p} for n, p in enumerate(report["populations"])]
    write_output(_render(report, rows, POPULATION_COLUMNS, config.output.format or "json"), config.output.path)
    if config.output.dump_state:
        write_output(to_json_text(state.to_json()), config.output.dump_state)
        logger.info("wrote field state to %s", config.output.dump_state)


def cmd_cycle(config: RunConfig) -> None:
    report, data = EngineRunner(config).cycle_report()
    rows = _corner_rows(report)
    write_output(_render(data, rows, CORNER_COLUMNS, config.output.format or "json"), config.output.path)
    if config.output.csv_path:
        write_csv([[r[c] for c in CORNER_COLUMNS] for r in rows], CORNER_COLUMNS, config.output.csv_path)
        logger.info("wrote corner table to %s", config.output.csv_path)


def cmd_sweep(config: RunConfig) -> None:
    if config.sweep.param is None:
        raise ConfigError("sweep.param", "required for the sweep command")
    rows = EngineRunner(config).sweep_rows(config.sweep.param, list(config.sweep.grid), sweep_workers())
    write_output(_render(rows, rows, SWEEP_COLUMNS, config.output.format or "csv"), config.output.path)


def cmd_ts_diagram(config: RunConfig) -> None:
    points = EngineRunner(config).ts_points()
    rows = [dict(zip(TS_COLUMNS, row)) for row in ts_rows(points)]
    write_output(_render(rows, rows, TS_COLUMNS, config.output.format or "csv"), config.output.path)


def platform_overrides(overrides: List[str]) -> Dict[str, Any]:
    """--set platforms.<name>.<field>=value items as {name: {field: value}}."""
    doc = apply_overrides({}, overrides)
    for key in doc:
        if key != "platforms":
            raise ConfigError(key, "the feasibility command only accepts platforms.<name>.<field> overrides")
    return doc.get("platforms", {})


def cmd_feasibility(platforms: List[str],
                    coherence: float,
                    q: Optional[float],
                    fmt: str,
                    out: Optional[str],
                    platforms_file: Optional[str] = None,
                    overrides: Sequence[str] = ()) -> None:
    catalog = PlatformCatalog(platforms_file or str(DEFAULT_PLATFORMS_PATH))
    if overrides:
        catalog.update_profiles(platform_overrides(list(overrides)))
    rows = feasibility_table(platforms, coherence, catalog, q)
    write_output(_render(rows, rows, FEASIBILITY_COLUMNS, fmt), out)


def _add_common_arguments(p: argparse.ArgumentParser, engine_config: bool = True) -> None:
    if engine_config:
        p.add_argument("--config", help="JSON config file, '-' for stdin (merged over the defaults)")
        p.add_argument("--tol", type=float, help="steady-state residual tolerance")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field by dotted path, e.g. hot.prep.p_e=0.25")
    p.add_argument("--out", help="report destination (default: stdout)")
    p.add_argument("--format", choices=OUTPUT_FORMATS, help="report format")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    p.add_argument("--log-file", help="also write log records to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py", description="Photon-Carnot engine simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady-state", help="stationary field vs. the mean-photon closed form")
    _add_common_arguments(p)
    p.add_argument("--dump-state", help="write the stationary density matrix as JSON")

    p = sub.add_parser("cycle", help="Carnot cycle report")
    _add_common_arguments(p)
    p.add_argument("--csv", dest="csv_path", help="also write the corner table as CSV")

    p = sub.add_parser("sweep", help="efficiency over a parameter grid")
    _add_common_arguments(p)
    p.add_argument("--param", choices=SWEEP_PARAMS, help="parameter to sweep")
    p.add_argument("--grid", help="comma-separated grid values, e.g. 1e2,1e3,inf")

    p = sub.add_parser("ts-diagram", help="temperature-entropy samples")
    _add_common_arguments(p)

    p = sub.add_parser("feasibility", help="loss vs. coherence on hardware platforms")
    _add_common_arguments(p, engine_config=False)
    p.add_argument("--platform", dest="platforms", action="append",
                   help="optical, microwave or circuit (repeatable; default: all)")
    p.add_argument("--coherence", type=float, default=DEFAULT_COHERENCE,
                   help="magnitude of Re(xi c1 c2*) to compare against")
    p.add_argument("--q", type=float, help="quality factor (default: platform maximum)")
    p.add_argument("--platforms-file", help="JSON file of platform profiles")
    return parser


def _collect_overrides(args: argparse.Namespace) -> List[str]:
    overrides = list(args.overrides)
    flag_fields = [
        ("out", "output.path"),
        ("format", "output.format"),
        ("tol", "solver.tol"),
        ("dump_state", "output.dump_state"),
        ("csv_path", "output.csv_path"),
        ("param", "sweep.param"),
    ]
    for attr, path in flag_fields:
        value = getattr(args, attr, None)
        if value is not None:
            overrides.append(f"{path}={json.dumps(value)}")
    grid = getattr(args, "grid", None)
    if grid is not None:
        overrides.append(f"sweep.grid={json.dumps(parse_grid(grid))}")
    return overrides


def run(args: argparse.Namespace) -> None:
    if args.command == "feasibility":
        cmd_feasibility(args.platforms or STOCK_PLATFORMS, args.coherence, args.q,
                        args.format or "text", args.out, args.platforms_file, args.overrides)
        return
    doc = apply_overrides(load_config(args.config), _collect_overrides(args))
    config = parse_config(doc)
    commands = {
        "steady-state": cmd_steady_state,
        "cycle": cmd_cycle,
        "sweep": cmd_sweep,
        "ts-diagram": cmd_ts_diagram,
    }
    commands[args.command](config)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    configure_logging(args.verbose, args.log_file)
    try:
        run(args)
    except PCEError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
