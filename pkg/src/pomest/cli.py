"""Batch front-end: scenario configs in, validation and relation reports out.

Usage:
    pomest {validate|estimate|relations|scenario|suite}
           [--params JSON|@file] [--output PATH] [--format json|csv] [--seed N]

Exit codes: 0 all checks passed, 1 a relation was violated, 2 a validation
failure, 3 a configuration error.  Reports are byte-identical for identical
(config, seed).  Tolerance knobs can be overridden through environment
variables prefixed POMEST_ (e.g. POMEST_SATURATION_TOL_GRID).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import fock, relations, scenarios
from .estimation import (
    Estimator,
    estimate_stats,
    measurement_estimator,
    optimal_estimate,
    optimal_estimate_no_info,
)
from .operators import DensityOperator, HermitianOperator, matrix_from_json
from .pom import GridSpec, coherent_pom, pom_from_json, tetrahedral_pom, trine_pom, validate
from .sampling import GENERATOR_NAME, make_rng, random_density, random_hermitian, random_pom
from .relations import RelationReport

EXIT_OK = 0
EXIT_RELATION = 1
EXIT_VALIDATION = 2
EXIT_CONFIG = 3

CSV_COLUMNS = ["scenario", "relation_id", "lhs", "rhs", "slack", "saturated", "tolerance"]

ENV_PREFIX = "POMEST_"
ENV_TOLERANCES = {
    "SATURATION_TOL_EXACT": relations.SATURATION_TOL_EXACT,
    "SATURATION_TOL_GRID": relations.SATURATION_TOL_GRID,
    "NUMERIC_TOL": relations.NUMERIC_TOL,
    "POSITIVITY_TOL": 1e-10,
    "COMPLETENESS_TOL": 1e-8,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    scenario_name: str | None = None
    params: dict = field(default_factory=dict)
    output_format: str = "json"
    output_path: str | None = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)


def _env_tolerances() -> dict:
    tols = {}
    for key, default in ENV_TOLERANCES.items():
        raw = os.environ.get(ENV_PREFIX + key)
        tols[key.lower()] = float(raw) if raw is not None else default
    return tols


def _load_params(raw: str | None) -> dict:
    if not raw:
        return {}
    try:
        if raw.startswith("@"):
            with open(raw[1:], "r", encoding="utf-8") as fh:
                return json.load(fh)
        return json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse --params: {exc}") from exc


def _atomic_write(path: str, payload: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pomest-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(config: RunConfig, rows: list, extras: dict, passed: bool):
    if config.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([row[c] for c in CSV_COLUMNS])
        payload = buf.getvalue()
    else:
        doc = {
            "command": config.command,
            "scenario": config.scenario_name,
            "seed": config.seed,
            "generator": GENERATOR_NAME,
            "params": config.params,
            "tolerances": config.tolerances,
            "passed": passed,
            "rows": rows,
            **extras,
        }
        payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if config.output_path:
        _atomic_write(config.output_path, payload)
    else:
        sys.stdout.write(payload)


def _row(report: RelationReport, scenario: str) -> dict:
    return {
        "scenario": scenario,
        "relation_id": report.relation_id,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "slack": report.slack,
        "saturated": report.saturated,
        "tolerance": report.saturation_tol,
        "passed": report.passed,
        "inputs_digest": report.inputs_digest,
    }


def _named_pom(params: dict, seed: int):
    name = params.get("pom", "trine")
    if isinstance(name, dict):
        return pom_from_json(name)
    if name == "trine":
        return trine_pom()
    if name == "tetrahedral":
        return tetrahedral_pom()
    if name == "coherent":
        spec = params.get("grid", {})
        grid = GridSpec(
            complex(*spec.get("center", [0.0, 0.0])),
            float(spec.get("radius", 6.0)),
            int(spec.get("points_per_axis", 81)),
        )
        return coherent_pom(int(params.get("fock_dim", 30)), grid)
    if name == "random":
        rng = make_rng(seed)
        return random_pom(int(params.get("dim", 3)), int(params.get("outcomes", 4)), rng)
    raise ConfigError(f"unknown POM name {name!r}")


def _cmd_validate(config: RunConfig) -> int:
    params = config.params
    if "pom_path" in params:
        try:
            with open(params["pom_path"], "r", encoding="utf-8") as fh:
                pom = pom_from_json(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot load POM descriptor: {exc}") from exc
    else:
        pom = _named_pom(params, config.seed)
    report = validate(pom, config.tolerances["positivity_tol"], config.tolerances["completeness_tol"])
    rows = [{
        "scenario": "validate",
        "relation_id": "completeness",
        "lhs": report.completeness_deviation,
        "rhs": config.tolerances["completeness_tol"],
        "slack": config.tolerances["completeness_tol"] - report.completeness_deviation,
        "saturated": False,
        "tolerance": config.tolerances["completeness_tol"],
        "passed": report.passed,
    }]
    _emit(config, rows, {"validation": report.to_json()}, report.passed)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _load_state(params: dict, dim: int, seed: int) -> DensityOperator:
    state = params.get("state", "maximally-mixed")
    if isinstance(state, dict):
        return DensityOperator(matrix_from_json(state["matrix"]))
    if state == "maximally-mixed":
        return DensityOperator.maximally_mixed(dim)
    if state == "random":
        return random_density(dim, make_rng(seed + 1))
    if state == "vacuum":
        return fock.vacuum_ket(dim).to_density()
    if isinstance(state, str) and state.startswith("coherent:"):
        re, im = (float(v) for v in state.split(":", 1)[1].split(","))
        return fock.coherent_ket(dim, complex(re, im)).to_density()
    raise ConfigError(f"unknown state spec {state!r}")


def _cmd_estimate(config: RunConfig) -> int:
    params = config.params
    pom = _named_pom(params, config.seed)
    if "operator" in params:
        op = HermitianOperator(matrix_from_json(params["operator"]))
    elif params.get("quadrature") in (1, 2):
        op = fock.quadratures(pom.dim)[params["quadrature"] - 1]
    else:
        op = random_hermitian(pom.dim, make_rng(config.seed))
    mode = params.get("mode", "with-state")
    if mode == "no-info":
        est = optimal_estimate_no_info(op, pom)
    elif mode == "with-state":
        est = optimal_estimate(op, pom, _load_state(params, pom.dim, config.seed))
    elif mode == "measurement":
        est = measurement_estimator(pom, params.get("component"))
    else:
        raise ConfigError(f"unknown estimate mode {mode!r}")
    _emit(config, [], {"estimator": est.to_json()}, True)
    return EXIT_OK


def _relation_instances(config: RunConfig) -> list:
    """Randomized property batches for the finite-dimensional relations."""
    params = config.params
    which = params.get("relations", "all")
    if which == "all":
        which = ["geom", "accbound", "ungen", "varsum"]
    instances = int(params.get("instances", 100))
    dims = params.get("dims", [2, 3, 4, 5])
    rng = make_rng(config.seed)
    rows = []
    for i in range(instances):
        dim = int(rng.choice(dims))
        n_out = int(rng.integers(2, 2 * dim + 2))
        pom = random_pom(dim, n_out, rng)
        rho = random_density(dim, rng)
        a = random_hermitian(dim, rng)
        b = random_hermitian(dim, rng)
        digest = {"instance": i, "dim": dim, "outcomes": n_out}
        if "geom" in which:
            rep = relations.check_geom(a, b, pom, rho)
            rep.inputs_digest.update(digest)
            rows.append(_row(rep, "relations"))
        if "accbound" in which:
            rep = relations.check_accbound(a, pom, rho)
            rep.inputs_digest.update(digest)
            rows.append(_row(rep, "relations"))
        if "ungen" in which:
            noise = rng.normal(size=pom.n_outcomes)
            est_a = Estimator(pom, optimal_estimate(a, pom, rho).values + noise)
            est_b = Estimator(pom, optimal_estimate(b, pom, rho).values)
            rep = relations.check_ungen(a, b, est_a, est_b, rho)
            rep.inputs_digest.update(digest)
            rows.append(_row(rep, "relations"))
        if "varsum" in which:
            est = optimal_estimate(a, pom, rho)
            stats = estimate_stats(est, a, rho)
            lhs = a.variance(rho)
            rhs = stats.dispersion**2 + stats.inaccuracy**2
            rep = relations.RelationReport(
                "varsum", lhs, rhs, lhs - rhs, abs(lhs - rhs) < 1e-10,
                abs(lhs - rhs) <= 1e-10, 1e-10, 1e-10, digest)
            rows.append(_row(rep, "relations"))
    return rows


def _cmd_relations(config: RunConfig) -> int:
    rows = _relation_instances(config)
    passed = all(r["passed"] for r in rows)
    _emit(config, rows, {}, passed)
    return EXIT_OK if passed else EXIT_RELATION


def _scenario_rows(name: str, params: dict, seed: int) -> tuple[list, dict]:
    if name == "epr":
        p = scenarios.EprParams(
            sigma=float(params.get("sigma", 0.1)),
            tau=float(params.get("tau", 0.1)),
            a=float(params.get("a", 0.0)),
            p0=float(params.get("p0", 1.0)),
            hbar=float(params.get("hbar", 1.0)),
        )
        closed = scenarios.epr_closed_form(p)
        rep = relations.RelationReport(
            "ungen", closed.ungen_lhs, closed.ungen_rhs, closed.ungen_lhs - closed.ungen_rhs,
            abs(closed.ungen_lhs - closed.ungen_rhs) < 1e-12, True, 1e-12, 1e-12,
            {"route": "closed-form"})
        rows = [_row(rep, "epr")]
        extras = {"closed_form": closed.__dict__.copy()}
        if params.get("numeric", True):
            pts = int(params.get("points", 0)) or scenarios.recommended_epr_points(p)[0]
            num = scenarios.epr_numeric(p, pts, validate=False)
            rep_n = relations.RelationReport(
                "ungen", num.numeric.ungen_lhs, num.numeric.ungen_rhs,
                num.numeric.ungen_lhs - num.numeric.ungen_rhs,
                abs(num.numeric.ungen_lhs - num.numeric.ungen_rhs) < 1e-3,
                max(num.rel_err_disp_x, num.rel_err_disp_p, num.rel_err_eps_p) <= 1e-3,
                1e-3, 1e-3, {"route": "grid", "points": num.points})
            rows.append(_row(rep_n, "epr"))
            extras["numeric"] = {
                "disp_x": num.numeric.disp_x, "disp_p": num.numeric.disp_p,
                "eps_p": num.numeric.eps_p, "points": num.points,
                "rel_err_disp_x": num.rel_err_disp_x, "rel_err_disp_p": num.rel_err_disp_p,
                "rel_err_eps_p": num.rel_err_eps_p,
            }
        return rows, extras
    if name == "thermal":
        beta = float(params.get("beta", 1.0))
        dim = int(params.get("fock_dim", max(80, int(33 / beta) + 40)))
        h = fock.oscillator_hamiltonian(dim)
        from .pom import projective_pom

        pom = projective_pom(fock.position_operator(dim))
        est = scenarios.thermal_energy_estimate(h, pom, beta)
        at = 0.5 / np.tanh(beta)
        bt = 0.5 / np.cosh(beta / 2) ** 2
        xs = pom.values_array()
        from .estimation import probabilities

        rho = scenarios._thermal_state(h, beta)
        p = probabilities(pom, rho)
        keep = p > 1e-12
        gap = float(np.abs(est.values[keep] - (at + bt * xs[keep] ** 2)).max())
        rep = relations.RelationReport(
            "varsum", gap, 0.0, gap, gap < 1e-6, gap <= 1e-6, 1e-6, 1e-6,
            {"route": "thermal-closed-form-gap", "beta": beta, "fock_dim": dim})
        return [_row(rep, "thermal")], {"beta": beta, "closed_form": {"a_t": at, "b_t": bt}}
    if name == "heterodyne":
        dim = int(params.get("fock_dim", 40))
        grid = GridSpec(0j, float(params.get("radius", 7.0)),
                        int(params.get("points_per_axis", 160)))
        pom = coherent_pom(dim, grid)
        state = params.get("state", "vacuum")
        rho = _load_state({"state": state}, dim, seed)
        reports = relations.heterodyne_suite(rho, pom)
        reports.append(relations.check_uncanon(rho, pom, float(params.get("hbar", 1.0))))
        return [_row(r, "heterodyne") for r in reports], {}
    if name == "linear":
        inputs = scenarios.LinearEstimateInputs(
            mean_x=float(params.get("mean_x", 0.0)),
            var_x=float(params.get("var_x", 1.0)),
            mean_p=float(params.get("mean_p", 0.0)),
            var_p=float(params.get("var_p", 1.0)),
            var_xprime=float(params.get("var_xprime", 0.5)),
            var_pprime=float(params.get("var_pprime", 0.5)),
            hbar=float(params.get("hbar", 1.0)),
        )
        rep = scenarios.linear_estimate(inputs)
        ok = rep.x.eps_lin < rep.x.eps_raw or inputs.var_xprime == 0
        row = {
            "scenario": "linear", "relation_id": "uni", "lhs": rep.joint_cost,
            "rhs": inputs.hbar / 2, "slack": rep.joint_cost - inputs.hbar / 2,
            "saturated": abs(rep.joint_cost - inputs.hbar / 2) < 1e-9,
            "tolerance": 1e-9, "passed": bool(ok and rep.joint_cost >= inputs.hbar / 2 - 1e-9),
        }
        return [row], {"linear": {"x": rep.x.__dict__, "p": rep.p.__dict__}}
    if name == "squeezing":
        hbar = float(params.get("hbar", 1.0))
        rep = scenarios.optimize_squeezing(
            float(params.get("var_x", 0.5)), float(params.get("var_p", 0.5)), hbar)
        row = {
            "scenario": "squeezing", "relation_id": "ungen", "lhs": rep.j_min,
            "rhs": hbar / 2, "slack": rep.j_min - hbar / 2,
            "saturated": abs(rep.j_min - hbar / 2) < 1e-9, "tolerance": 1e-9,
            "passed": bool(rep.j_min >= hbar / 2 - 1e-9),
        }
        return [row], {"squeezing": rep.__dict__.copy()}
    raise ConfigError(f"unknown scenario {name!r}")


def _cmd_scenario(config: RunConfig) -> int:
    rows, extras = _scenario_rows(config.scenario_name, config.params, config.seed)
    passed = all(r["passed"] for r in rows)
    _emit(config, rows, extras, passed)
    return EXIT_OK if passed else EXIT_RELATION


def _cmd_suite(config: RunConfig) -> int:
    rows = _relation_instances(RunConfig("relations", params={"instances": 50},
                                         seed=config.seed, tolerances=config.tolerances))
    extras = {}
    for name, params in (
        ("epr", {"points": 2048}),
        ("thermal", {"beta": 1.0}),
        ("heterodyne", {"points_per_axis": 120, "radius": 6.5, "fock_dim": 30}),
        ("linear", {}),
        ("squeezing", {"var_x": 1.5, "var_p": 1.5}),
    ):
        srows, sextras = _scenario_rows(name, params, config.seed)
        rows.extend(srows)
        extras.update({f"{name}_{k}": v for k, v in sextras.items()})
    passed = all(r["passed"] for r in rows)
    _emit(config, rows, extras, passed)
    return EXIT_OK if passed else EXIT_RELATION


def run(config: RunConfig) -> int:
    """Execute one batch command; returns the process exit code."""
    handlers = {
        "validate": _cmd_validate,
        "estimate": _cmd_estimate,
        "relations": _cmd_relations,
        "scenario": _cmd_scenario,
        "suite": _cmd_suite,
    }
    if config.command not in handlers:
        raise ConfigError(f"unknown command {config.command!r}")
    if config.command == "scenario" and not config.scenario_name:
        raise ConfigError("scenario requires a scenario name")
    if config.output_format not in ("json", "csv"):
        raise ConfigError(f"unknown output format {config.output_format!r}")
    return handlers[config.command](config)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pomest",
                                     description="POM estimation and uncertainty-relation reports")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", "estimate", "relations", "scenario", "suite"):
        p = sub.add_parser(name)
        if name == "scenario":
            p.add_argument("scenario_name",
                           choices=["epr", "thermal", "heterodyne", "linear", "squeezing"])
        if name == "validate":
            p.add_argument("--pom", help="path to a POM descriptor JSON")
        p.add_argument("--params", help="inline JSON or @file")
        p.add_argument("--output", help="report file path (stdout if omitted)")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        params = _load_params(args.params)
        if getattr(args, "pom", None):
            params["pom_path"] = args.pom
        config = RunConfig(
            command=args.command,
            scenario_name=getattr(args, "scenario_name", None),
            params=params,
            output_format=args.format,
            output_path=args.output,
            seed=args.seed,
            tolerances=_env_tolerances(),
        )
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
