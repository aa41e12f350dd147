#!/usr/bin/env python3
"""
Command-line entry point of the Toda Ward Lab.

Reads a JSON run configuration, dispatches one command to the symbolic or
Monte Carlo suite and writes a versioned JSON report (plus CSV tables for the
Monte Carlo commands). The exit status is computed from the report alone:
0 when every verdict passes, 1 when a check fails, 2 for invalid input and
3 for a numeric failure.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .config import settings
from .simulation import fieldsim
from .simulation.fieldsim import McParams
from .symbolic.algebra import Weight
from .utils.errors import ConfigError, NeutralityError, NumericError, SeibergError, TodaLabError
from .utils.logging import get_logger, setup_logging
from .utils.report_io import decode_rational, write_json_atomic, write_table_csv
from .verification import ward
from .verification.freefield import (
    BoundaryInsertion, BulkInsertion, InsertionConfig, charge_deficit, config_from_weights,
    neutral_symbolic_config, symbolic_context,
)

logger = get_logger(__name__)

ENGINES = ("symbolic", "mc")
CONFIG_KEYS = {"name", "engine", "gamma", "bulk", "boundary", "mu_bulk", "mu_boundary", "symbolic",
               "mc", "output_dir", "log_level"}
SYMBOLIC_KEYS = {"n_bulk", "n_boundary", "probe_beta"}
BULK_KEYS = {"point", "alpha"}
BOUNDARY_KEYS = {"point", "beta"}

EXIT_PASS = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3


@dataclass
class RunConfig:
    """Validated run configuration with every default made explicit in ``resolved``."""

    engine: str
    insertions: InsertionConfig
    mc: McParams
    output_dir: str
    log_level: str
    name: str
    resolved: Dict[str, Any] = field(default_factory=dict)


# Parsing

def _rational(value: Any, where: str) -> Fraction:
    try:
        return decode_rational(value)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"{where}: {e}")


def _scalar(value: Any, where: str, exact: bool) -> Any:
    """Exact rational from [p, q], int or string; floats stay floats unless ``exact``."""
    if isinstance(value, float) and not exact:
        return value
    return _rational(value, where)


def _weight(value: Any, where: str, exact: bool) -> Weight:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{where}: a weight is a pair of e-basis coordinates")
    return Weight(_scalar(value[0], f"{where}[0]", exact), _scalar(value[1], f"{where}[1]", exact))


def _real(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str, list)):
        raise ConfigError(f"{where}: expected a number")
    return float(value) if isinstance(value, (int, float)) else float(_rational(value, where))


def _complex(value: Any, where: str) -> complex:
    """A real number, or {"re": x, "im": y}."""
    if isinstance(value, dict):
        unknown = set(value) - {"re", "im"}
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
        return complex(_real(value.get("re", 0.0), where), _real(value.get("im", 0.0), where))
    return complex(_real(value, where))


def _gamma(value: Any) -> Any:
    """gamma in (0, sqrt 2), kept exact when given as a rational."""
    if value is None:
        return None
    if isinstance(value, float):
        if not (0 < value and value * value < settings.GAMMA_MAX_SQUARED):
            raise ConfigError(f"gamma = {value} is outside (0, √2)")
        return value
    exact = _rational(value, "gamma")
    if not (0 < exact and exact * exact < settings.GAMMA_MAX_SQUARED):
        raise ConfigError(f"gamma = {exact} is outside (0, √2)")
    return exact


def _check_keys(raw: Dict[str, Any], allowed: set, where: str) -> None:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"Unknown key(s) in {where}: {', '.join(unknown)}")


def _symbolic_insertions(raw: Dict[str, Any]) -> Tuple[InsertionConfig, Dict[str, Any]]:
    options = raw.get("symbolic", {})
    _check_keys(options, SYMBOLIC_KEYS, "symbolic")
    bulk_raw = raw.get("bulk", [])
    boundary_raw = raw.get("boundary", [])
    if bulk_raw or boundary_raw:
        for k, b in enumerate(bulk_raw):
            _check_keys(b, BULK_KEYS, f"bulk[{k}]")
        for l, b in enumerate(boundary_raw):
            _check_keys(b, BOUNDARY_KEYS, f"boundary[{l}]")
        alphas = [_weight(b.get("alpha"), f"bulk[{k}].alpha", exact=True) for k, b in enumerate(bulk_raw)]
        betas = [_weight(b.get("beta"), f"boundary[{l}].beta", exact=True) for l, b in enumerate(boundary_raw)]
        ctx = symbolic_context(len(alphas), len(betas))
        probe_beta = None
        if options.get("probe_beta") is not None:
            probe_beta = ctx.weight(*_weight(options["probe_beta"], "symbolic.probe_beta", exact=True).coords)
        cfg = config_from_weights(ctx, [ctx.weight(*a.coords) for a in alphas],
                                  [ctx.weight(*b.coords) for b in betas], probe_beta)
        deficit = charge_deficit(cfg)
        if not deficit.is_neutral():
            raise NeutralityError(f"Configuration is not neutral: deficit s = {deficit.s}")
        resolved = {"weights": "explicit", "n_bulk": len(alphas), "n_boundary": len(betas),
                    "alphas": [list(a.coords) for a in alphas], "betas": [list(b.coords) for b in betas],
                    "probe_beta": None if probe_beta is None else [str(c) for c in probe_beta.coords]}
        return cfg, resolved
    n = int(options.get("n_bulk", 1))
    m = int(options.get("n_boundary", 1))
    if n < 0 or m < 0 or n + m == 0:
        raise ConfigError(f"Need at least one insertion, got n_bulk={n}, n_boundary={m}")
    return neutral_symbolic_config(n, m), {"weights": "symbolic", "n_bulk": n, "n_boundary": m}


def _numeric_insertions(raw: Dict[str, Any], gamma: Any) -> Tuple[InsertionConfig, Dict[str, Any]]:
    if gamma is None:
        raise ConfigError("The mc engine needs a numeric gamma")
    bulk = []
    for k, b in enumerate(raw.get("bulk", [])):
        _check_keys(b, BULK_KEYS, f"bulk[{k}]")
        point = b.get("point")
        if not isinstance(point, (list, tuple)) or len(point) != 2:
            raise ConfigError(f"bulk[{k}].point must be [x, y]")
        z = complex(_real(point[0], f"bulk[{k}].point"), _real(point[1], f"bulk[{k}].point"))
        if z.imag <= 0:
            raise ConfigError(f"bulk[{k}].point {z} is not in the upper half-plane")
        bulk.append(BulkInsertion(z, _weight(b.get("alpha"), f"bulk[{k}].alpha", exact=False)))
    boundary = []
    for l, b in enumerate(raw.get("boundary", [])):
        _check_keys(b, BOUNDARY_KEYS, f"boundary[{l}]")
        boundary.append(BoundaryInsertion(_real(b.get("point"), f"boundary[{l}].point"),
                                          _weight(b.get("beta"), f"boundary[{l}].beta", exact=False)))
    mu_bulk = raw.get("mu_bulk", [1.0, 1.0])
    if not isinstance(mu_bulk, (list, tuple)) or len(mu_bulk) != 2:
        raise ConfigError("mu_bulk must hold two values")
    mu_bulk = tuple(_real(v, "mu_bulk") for v in mu_bulk)
    arcs = max(1, len(boundary))
    mu_boundary = raw.get("mu_boundary", [[0.0] * arcs, [0.0] * arcs])
    if not isinstance(mu_boundary, (list, tuple)) or len(mu_boundary) != 2:
        raise ConfigError("mu_boundary must hold one list per simple root")
    mu_boundary = tuple(tuple(_complex(v, f"mu_boundary[{i}]") for v in row) for i, row in enumerate(mu_boundary))
    cfg = InsertionConfig(bulk=tuple(bulk), boundary=tuple(boundary), mu_bulk=mu_bulk,
                          mu_boundary=mu_boundary, gamma=gamma)
    geom = fieldsim.geometry(cfg)
    if geom.is_free:
        if not np.allclose(geom.deficit, 0.0, atol=1e-9):
            raise NeutralityError(f"Without potential the configuration must be neutral; deficit {geom.deficit}")
    else:
        fieldsim.check_seiberg(geom)
    resolved = {
        "bulk": [{"point": [b.point.real, b.point.imag], "alpha": list(b.alpha.coords)} for b in bulk],
        "boundary": [{"point": b.point, "beta": list(b.beta.coords)} for b in boundary],
        "mu_bulk": list(mu_bulk),
        "mu_boundary": [[{"re": v.real, "im": v.imag} for v in row] for row in mu_boundary],
    }
    return cfg, resolved


def _mc_params(raw: Any) -> McParams:
    allowed = set(McParams.__dataclass_fields__)
    _check_keys(raw, allowed, "mc")
    values = dict(raw)
    if "bulk_grid" in values:
        grid = values["bulk_grid"]
        if not isinstance(grid, (list, tuple)) or len(grid) != 2:
            raise ConfigError("mc.bulk_grid must be [nx, ny]")
        values["bulk_grid"] = (int(grid[0]), int(grid[1]))
    try:
        return McParams(**values)
    except TypeError as e:
        raise ConfigError(f"Invalid mc parameters: {e}")


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Validate a JSON run configuration.

    Raises:
        ConfigError: for malformed JSON (with line and column), unknown keys or out-of-range values
        NeutralityError: for a non-neutral configuration where neutrality is required
        SeibergError: for an mc configuration violating a Seiberg bound
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON in {source}: {e.msg}", line=e.lineno, column=e.colno)
    _check_keys(raw, CONFIG_KEYS, "config")
    engine = raw.get("engine", "mc")
    if engine not in ENGINES:
        raise ConfigError(f"engine must be one of {ENGINES}, got {engine!r}")
    gamma = _gamma(raw.get("gamma"))
    mc = _mc_params(raw.get("mc", {}))
    if engine == "symbolic":
        insertions, resolved_insertions = _symbolic_insertions(raw)
        if gamma is not None:
            logger.warning(f"{source}: gamma={gamma} is ignored by the symbolic engine, which keeps gamma formal")
    else:
        insertions, resolved_insertions = _numeric_insertions(raw, gamma)
    output_dir = str(raw.get("output_dir", settings.OUTPUT_DIR))
    log_level = str(raw.get("log_level", settings.LOGGING_LEVEL))
    name = str(raw.get("name", "run"))
    resolved = {
        "name": name,
        "engine": engine,
        "gamma": gamma,
        "insertions": resolved_insertions,
        "mc": mc.to_dict(),
        "output_dir": output_dir,
        "log_level": log_level,
    }
    logger.debug(f"Parsed {source}: engine={engine}")
    return RunConfig(engine, insertions, mc, output_dir, log_level, name, resolved)


def parse_config(path: str) -> RunConfig:
    """Read and validate a run configuration file."""
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config_text(handle.read(), path)


def default_config() -> RunConfig:
    """Configuration used by commands that need none: one bulk and one boundary symbolic insertion."""
    return parse_config_text(json.dumps({"engine": "symbolic"}), "<default>")


# Commands

def _ward_verdicts(reports: Sequence[ward.WardReport]) -> List[Dict[str, Any]]:
    return [r.to_dict() for r in reports]


def _require(rc: RunConfig, engine: str, command: str) -> None:
    if rc.engine != engine:
        raise ConfigError(f"{command} needs the {engine} engine, config selects {rc.engine}")


def cmd_algebra_selftest(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    reports = ward.algebra_selftest() + ward.symmetrization_suite()
    return {"verdicts": _ward_verdicts(reports)}


def cmd_ward_free(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    _require(rc, "symbolic", "ward-free")
    minimum = 3 if args.spin3 else 2
    if args.level < minimum:
        suffix = " with --spin3" if args.spin3 else ""
        raise ConfigError(f"--level must be at least {minimum}{suffix}, got {args.level}")
    mode = ward.SOLVE_WEIGHTS if args.solve_weights else ward.CLOSED_FORMS
    reports = [ward.verify_conformal_ff(args.level, rc.insertions, mode)]
    if args.spin3:
        reports.append(ward.verify_spin3_ff(args.level, rc.insertions, mode))
    derived = {}
    for r in reports:
        derived.update(r.derived)
    return {"verdicts": _ward_verdicts(reports), "results": {"derived": derived, "level": args.level}}


def cmd_ward_global(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    _require(rc, "symbolic", "ward-global")
    reports = (ward.verify_global_ff(rc.insertions) + ward.verify_local_currents_ff(rc.insertions)
               + ward.verify_current_covariance_ff(rc.insertions))
    return {"verdicts": _ward_verdicts(reports)}


def cmd_identity_conformance(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    reports = ward.identity_conformance() + ward.mutation_sensitivity(seed=args.mutation_seed)
    informational = [r.name for r in reports if r.informational and not r.check.is_zero]
    corrections = {r.name: r.correction for r in reports if r.correction is not None}
    return {"verdicts": _ward_verdicts(reports),
            "results": {"informational_nonzero": informational, "corrections": corrections}}


def _verdict(name: str, passed: bool, estimate: Optional[fieldsim.Estimate] = None,
             informational: bool = False) -> Dict[str, Any]:
    out: Dict[str, Any] = {"name": name, "passed": bool(passed) or informational, "informational": informational}
    if estimate is not None:
        out["estimate"] = estimate.to_dict()
    return out


def cmd_mc_correlator(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    _require(rc, "mc", "mc-correlator")
    est = fieldsim.estimate_correlator(rc.insertions, rc.mc)
    norm = fieldsim.chaos_normalization(rc.insertions, rc.mc)
    normalized = abs(norm.value - 1.0) <= settings.STDERR_MULTIPLIER * norm.stderr
    rows = fieldsim.estimate_rows("correlator", est) + fieldsim.estimate_rows("chaos_normalization", norm)
    verdicts = [_verdict("correlator-finite", bool(np.all(np.isfinite(est.value))), est),
                _verdict("chaos-normalization", normalized, norm, informational=True)]
    return {"verdicts": verdicts, "rows": rows}


def cmd_mc_kpz(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    _require(rc, "mc", "mc-kpz")
    kpz = fieldsim.kpz_residual(rc.insertions, rc.mc)
    verdicts = [_verdict("kpz", fieldsim.kpz_passed(kpz), kpz)]
    rows = fieldsim.estimate_rows("kpz_residual", kpz)
    if not kpz.diagnostics.get("degenerate"):
        mu = fieldsim.mu_derivative_residual(rc.insertions, rc.mc)
        verdicts.append(_verdict("mu-derivative", fieldsim.mu_derivative_passed(mu), mu))
        rows += fieldsim.estimate_rows("mu_derivative_residual", mu)
    return {"verdicts": verdicts, "rows": rows}


def _floats(text: str, count: Optional[int], flag: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers, got {text!r}")
    if count is not None and len(values) != count:
        raise ConfigError(f"{flag} expects {count} values, got {len(values)}")
    return values


def cmd_mc_covariance(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    _require(rc, "mc", "mc-covariance")
    mobius = _floats(args.mobius, 4, "--mobius")
    est = fieldsim.covariance_residual(rc.insertions, mobius, rc.mc)
    return {"verdicts": [_verdict("conformal-covariance", fieldsim.covariance_passed(est), est)],
            "rows": fieldsim.estimate_rows("covariance_residual", est),
            "results": {"mobius": mobius}}


def cmd_mc_fusion(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    _require(rc, "mc", "mc-fusion")
    pair = [int(v) for v in _floats(args.pair, 2, "--pair")]
    ladder = fieldsim.separation_ladder(args.dmin, args.dmax, args.steps)
    fit = fieldsim.fusion_exponent(rc.insertions, [p - 1 for p in pair], ladder, rc.mc)
    rows = []
    for d, est in zip(fit.separations, fit.estimates):
        rows += fieldsim.estimate_rows(f"correlator[d={d:.6g}]", est)
    verdict = {"name": "fusion-exponent", "passed": fit.passed, "informational": False, "fit": fit.to_dict()}
    return {"verdicts": [verdict], "rows": rows}


def cmd_mc_ward_t(rc: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    _require(rc, "mc", "mc-ward-t")
    est = fieldsim.ward_T_mc(rc.insertions, args.probe, rc.mc)
    return {"verdicts": [_verdict("stress-tensor-ward", fieldsim.ward_t_passed(est), est)],
            "rows": fieldsim.estimate_rows("ward_T_residual", est),
            "results": {"probe": args.probe}}


COMMANDS: Dict[str, Tuple[Callable[[RunConfig, argparse.Namespace], Dict[str, Any]], bool]] = {
    # name: (handler, needs a config file)
    "algebra-selftest": (cmd_algebra_selftest, False),
    "ward-free": (cmd_ward_free, True),
    "ward-global": (cmd_ward_global, True),
    "identity-conformance": (cmd_identity_conformance, False),
    "mc-correlator": (cmd_mc_correlator, True),
    "mc-kpz": (cmd_mc_kpz, True),
    "mc-covariance": (cmd_mc_covariance, True),
    "mc-fusion": (cmd_mc_fusion, True),
    "mc-ward-t": (cmd_mc_ward_t, True),
}


def exit_status(report: Dict[str, Any]) -> int:
    """Exit code as a function of the report contents."""
    error = report.get("error")
    if error is not None:
        return EXIT_NUMERIC if error["type"] == "NumericError" else EXIT_INVALID
    return EXIT_PASS if all(v["passed"] for v in report.get("verdicts", [])) else EXIT_FAILED


def _arguments(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("handler", "output_dir", "log_level")}


def run(command: str, args: argparse.Namespace, rc: Optional[RunConfig] = None) -> Tuple[int, Dict[str, Any]]:
    """Dispatch one command and build its report; typed errors become error reports."""
    handler, _ = COMMANDS[command]
    report: Dict[str, Any] = {
        "schema_version": settings.SCHEMA_VERSION,
        "code_version": __version__,
        "command": command,
        "arguments": _arguments(args),
        "config": None if rc is None else rc.resolved,
        "seed": None if rc is None or rc.engine != "mc" else rc.mc.seed,
        "verdicts": [],
    }
    rows: List[Dict[str, Any]] = []
    try:
        if rc is None:
            rc = default_config()
            report["config"] = rc.resolved
        logger.info(f"Running {command} ({rc.engine} engine)")
        outcome = handler(rc, args)
        rows = outcome.pop("rows", [])
        report.update(outcome)
    except TodaLabError as e:
        logger.error(f"{command} failed: {type(e).__name__}: {e}")
        report["error"] = {"type": type(e).__name__, "message": str(e)}
    status = exit_status(report)
    report["exit_status"] = status
    report["rows"] = rows
    return status, report


def _write_artifacts(command: str, report: Dict[str, Any], output_dir: str) -> None:
    rows = report.pop("rows", [])
    write_json_atomic(os.path.join(settings.get_output_path("reports", output_dir), f"{command}.json"), report)
    if rows:
        write_table_csv(os.path.join(settings.get_output_path("tables", output_dir), f"{command}.csv"), rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toda-ward-lab",
                                     description="Ward-identity verification lab for sl3 boundary Toda theory.")
    parser.add_argument("--output-dir", default=None, help="Directory for reports and tables (overrides the config).")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        needs_config = COMMANDS[name][1]
        p.add_argument("--config", required=needs_config, default=None, help="JSON run configuration.")
        return p

    command("algebra-selftest", "Weight-space invariants and symmetrization identities.")
    p = command("ward-free", "Free-field local Ward identity at one level.")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--spin3", action="store_true", help="Also check the spin-3 identity.")
    p.add_argument("--solve-weights", action="store_true", help="Re-derive Delta and w from the top poles.")
    command("ward-global", "Free-field global Ward identities and current decay.")
    p = command("identity-conformance", "Proof-identity catalog and generator mutation sensitivity.")
    p.add_argument("--mutation-seed", type=int, default=0)
    command("mc-correlator", "Monte Carlo correlator estimate.")
    command("mc-kpz", "KPZ identity residual.")
    p = command("mc-covariance", "Conformal covariance under a real Moebius map.")
    p.add_argument("--mobius", required=True, help="a,b,c,d with ad - bc = 1.")
    p = command("mc-fusion", "Collision exponent of two insertions.")
    p.add_argument("--pair", required=True, help="i,j (1-based; bulk insertions first, then boundary).")
    p.add_argument("--dmin", type=float, required=True)
    p.add_argument("--dmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=6)
    p = command("mc-ward-t", "Regularized stress-tensor Ward identity at a boundary probe.")
    p.add_argument("--probe", type=float, required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    config_path = args.config
    output_dir = args.output_dir
    rc: Optional[RunConfig] = None
    config_error: Optional[TodaLabError] = None
    try:
        if config_path is not None:
            rc = parse_config(config_path)
    except TodaLabError as e:
        config_error = e
    level = args.log_level or (rc.log_level if rc else settings.LOGGING_LEVEL)
    setup_logging(level)
    output_dir = output_dir or (rc.output_dir if rc else settings.OUTPUT_DIR)
    del args.config
    if config_error is not None:
        logger.error(f"Invalid configuration: {config_error}")
        report = {
            "schema_version": settings.SCHEMA_VERSION,
            "code_version": __version__,
            "command": command,
            "arguments": _arguments(args),
            "config": None,
            "seed": None,
            "verdicts": [],
            "error": {"type": type(config_error).__name__, "message": str(config_error)},
        }
        status = exit_status(report)
        report["exit_status"] = status
    else:
        status, report = run(command, args, rc)
    _write_artifacts(command, report, output_dir)
    passed = sum(1 for v in report["verdicts"] if v["passed"])
    print(f"{command}: {passed}/{len(report['verdicts'])} checks passed, exit status {status}")
    if "error" in report:
        print(f"  {report['error']['type']}: {report['error']['message']}")
    return status


if __name__ == "__main__":
    sys.exit(main())
