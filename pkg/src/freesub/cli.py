"""Command-line entry point.

Every command reads one JSON config, validates it against the shipped
schema (unknown keys are rejected), runs, and writes a single artifact to
``--out``.  Exit codes: 0 all checks pass, 2 bad config, 3 solver did not
converge (the report is still written), 4 a check failed, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import checks
from .report import REPORT_SCHEMA, EmitError, emit_report
from .subord import (
    DEGENERATE,
    NonConvergence,
    SolverConfig,
    additive_subord,
    mult_unitary_subord,
)
from .transforms import MeasureR, MeasureT, cauchy_G, eta_transform, psi_transform, stieltjes_invert_ladder

EXIT_OK, EXIT_CONFIG, EXIT_NONCONV, EXIT_FAILED, EXIT_IO = 0, 2, 3, 4, 5

COMMANDS = ("convolve-add", "convolve-mult", "transform", "verify-algebra", "verify-hilbert",
            "verify-bounds", "rmt-validate")

ADD_COLUMNS = ("re(z)", "im(z)", "re(omega1)", "im(omega1)", "re(omega2)", "im(omega2)",
               "re(G)", "im(G)", "residual", "iterations")
MULT_COLUMNS = ("re(z)", "im(z)", "re(omega)", "im(omega)", "re(psi)", "im(psi)",
                "residual", "iterations", "status")
CHECK_COLUMNS = ("check_name", "statement", "value", "tolerance", "pass", "count")
HILBERT_COLUMNS = ("epsilon", "theta1", "Hp", "reference", "deviation", "bound")
RMT_COLUMNS = ("check_name", "index", "point", "empirical", "predicted", "error")


class ConfigError(ValueError):
    pass


@dataclass
class Outcome:
    command: str
    seed: int
    records: list
    params: dict = field(default_factory=dict)
    rows: list | None = None
    columns: tuple | None = None
    nonconverged: bool = False

    @property
    def passed(self) -> bool:
        return not self.nonconverged and all(r["pass"] for r in self.records)

    @property
    def status(self) -> str:
        if self.nonconverged:
            return "NONCONVERGENCE"
        return "OK" if self.passed else "FAILED"

    def document(self) -> dict:
        doc = {"schema": REPORT_SCHEMA, "command": self.command, "seed": self.seed,
               "status": self.status, "pass": self.passed, "params": self.params,
               "records": self.records}
        if self.rows is not None:
            doc["rows"] = self.rows
        return doc

    @property
    def exit_code(self) -> int:
        if self.nonconverged:
            return EXIT_NONCONV
        return EXIT_OK if self.passed else EXIT_FAILED


# --------------------------------------------------------------------------
# config handling


def load_schema(name: str) -> dict:
    return json.loads(resources.files("freesub").joinpath("schemas", name).read_text("utf-8"))


def default_config(command: str) -> dict:
    return json.loads(resources.files("freesub").joinpath("data", f"{command}.json").read_text("utf-8"))


def validate_config(command: str, cfg: dict) -> None:
    schema = load_schema("config.v1.json")
    sub = {"$schema": schema["$schema"], "$defs": schema["$defs"], "$ref": f"#/$defs/{command}"}
    try:
        jsonschema.validate(cfg, sub, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None


def validate_report(doc: dict) -> None:
    jsonschema.validate(doc, load_schema("report.v1.json"), cls=jsonschema.Draft202012Validator)


def _num(x) -> float:
    if isinstance(x, str):
        return float(Fraction(x))
    return float(x)


def _cplx(p) -> complex:
    return complex(_num(p[0]), _num(p[1]))


def zgrid(spec: dict) -> np.ndarray:
    if "points" in spec:
        return np.array([_cplx(p) for p in spec["points"]], dtype=complex)
    if "line" in spec:
        ln = spec["line"]
        return np.linspace(_cplx(ln["start"]), _cplx(ln["stop"]), ln["num"])
    c = spec["circle"]
    return c["radius"] * np.exp(2j * np.pi * np.arange(c["num"]) / c["num"])


def _solver(cfg: dict) -> SolverConfig:
    return SolverConfig(**cfg.get("solver", {}))


# --------------------------------------------------------------------------
# commands


def run_convolve_add(cfg: dict) -> Outcome:
    mu, nu = MeasureR.from_json(cfg["mu"]), MeasureR.from_json(cfg["nu"])
    solver = _solver(cfg)
    tol = cfg.get("tol", 1e-10)
    rows, nonconv, worst, below = [], False, 0.0, 0
    for z in zgrid(cfg["grid"]):
        try:
            r = additive_subord(mu, nu, z, solver)
        except NonConvergence as exc:
            r, nonconv = exc.result, True
        worst = max(worst, r.residual)
        below += min(r.omega1.imag, r.omega2.imag) < z.imag - 1e-12
        rows.append({"re(z)": z.real, "im(z)": z.imag,
                     "re(omega1)": r.omega1.real, "im(omega1)": r.omega1.imag,
                     "re(omega2)": r.omega2.real, "im(omega2)": r.omega2.imag,
                     "re(G)": r.transform_value.real, "im(G)": r.transform_value.imag,
                     "residual": r.residual, "iterations": r.iterations})
    records = [
        {"check_name": "additive_residual", "statement": "G_mu(omega1) = G_nu(omega2) = 1/(omega1 + omega2 - z)",
         "value": worst, "tolerance": tol, "pass": worst <= tol},
        {"check_name": "omega_in_half_plane", "statement": "Im omega_j(z) >= Im z",
         "value": float(below), "tolerance": 0.0, "pass": below == 0},
    ]
    return Outcome("convolve-add", cfg["seed"], records, {"points": len(rows)}, rows, ADD_COLUMNS, nonconv)


def run_convolve_mult(cfg: dict) -> Outcome:
    mu_U, mu_V = MeasureT.from_json(cfg["mu_U"]), MeasureT.from_json(cfg["mu_V"])
    solver = _solver(cfg)
    tol = cfg.get("tol", 1e-10)
    rows, nonconv, worst, outside = [], False, 0.0, 0
    for z in zgrid(cfg["grid"]):
        try:
            r = mult_unitary_subord(mu_U, mu_V, z, solver)
        except NonConvergence as exc:
            r, nonconv = exc.result, True
        if r.status != DEGENERATE:
            worst = max(worst, r.residual)
            outside += abs(r.omega1) > abs(z) + 1e-12
        om = complex(r.omega1) if r.omega1 is not None else complex("nan")
        rows.append({"re(z)": z.real, "im(z)": z.imag, "re(omega)": om.real, "im(omega)": om.imag,
                     "re(psi)": complex(r.transform_value).real, "im(psi)": complex(r.transform_value).imag,
                     "residual": r.residual, "iterations": r.iterations, "status": r.status})
    records = [
        {"check_name": "multiplicative_residual",
         "statement": "psi_U(omega1) = psi_V(omega2), omega1 omega2 = z eta_{UV}(z)",
         "value": worst, "tolerance": tol, "pass": worst <= tol},
        {"check_name": "omega_in_disk", "statement": "|omega(z)| <= |z|",
         "value": float(outside), "tolerance": 0.0, "pass": outside == 0},
    ]
    return Outcome("convolve-mult", cfg["seed"], records, {"points": len(rows)}, rows, MULT_COLUMNS, nonconv)


def run_transform(cfg: dict) -> Outcome:
    op = cfg["op"]
    if op == "invert":
        mu = MeasureR.from_json(cfg["measure"])
        xs = np.linspace(cfg["x"]["start"], cfg["x"]["stop"], cfg["x"]["num"])
        est = stieltjes_invert_ladder(lambda w: cauchy_G(mu, w), xs,
                                      tuple(cfg.get("etas", (1e-1, 1e-2, 1e-3))))
        rows = [{"x": x, "density": d} for x, d in zip(est.x, est.density)]
        records = [{"check_name": "inversion_ladder", "statement": "density = -Im G(x + i eta)/pi",
                    "value": est.ladder_spread, "tolerance": cfg.get("tol", 5e-2),
                    "pass": not est.unstable, "eta": est.eta, "atomic": est.atomic}]
        return Outcome("transform", cfg["seed"], records, {"op": op}, rows, ("x", "density"))
    zs = zgrid(cfg["grid"])
    bound = 0.0
    if op == "G":
        vals = cauchy_G(MeasureR.from_json(cfg["measure"]), zs)
    elif op == "psi":
        vals, bound = psi_transform(MeasureT.from_json(cfg["circle_measure"]), zs, with_bound=True)
    else:
        vals = eta_transform(MeasureT.from_json(cfg["circle_measure"]), zs)
    vals = np.atleast_1d(vals)
    rows = [{"re(z)": z.real, "im(z)": z.imag, f"re({op})": v.real, f"im({op})": v.imag}
            for z, v in zip(zs, vals)]
    records = [{"check_name": f"{op}_tail_bound", "statement": "truncation tail of the series form",
                "value": bound, "tolerance": cfg.get("tol", 1e-8), "pass": bound <= cfg.get("tol", 1e-8)}]
    return Outcome("transform", cfg["seed"], records, {"op": op}, rows,
                   ("re(z)", "im(z)", f"re({op})", f"im({op})"))


def _records(recs) -> list:
    return [r.to_json() for r in recs]


def run_verify_algebra(cfg: dict) -> Outcome:
    seed = cfg["seed"]
    recs = checks.algebra_suite(seed, trials=cfg.get("trials", 100), higher_p=cfg.get("higher_p", 4),
                                resolvent_K=cfg.get("resolvent_K", 8), conj_len=cfg.get("conj_len", 6))
    recs += checks.coalgebra_suite(seed, specs=cfg.get("specs", 100), max_len=cfg.get("max_len", 6),
                                   freeconj_len=cfg.get("freeconj_len", 5))
    if cfg.get("series", True):
        recs += checks.rho_suite(seed)
    return Outcome("verify-algebra", seed, _records(recs), {}, _records(recs), CHECK_COLUMNS)


def run_verify_hilbert(cfg: dict) -> Outcome:
    from .hilbreg import verify_conj_bound

    ladder_tol = cfg.get("tol", 1e-6)
    recs, rows = [], []
    for eps in cfg.get("epsilons", (0.05, 0.1, 0.25, 0.5, 0.75)):
        r = verify_conj_bound(eps, cfg.get("grid_size", 41), cfg.get("reference", "stated"),
                              workers=cfg.get("workers"))
        recs.append(checks.conj_record(r, ladder_tol))
        rows.extend({"epsilon": eps, **row} for row in r.rows())
    return Outcome("verify-hilbert", cfg["seed"], _records(recs),
                   {"reference": cfg.get("reference", "stated")}, rows, HILBERT_COLUMNS)


def run_verify_bounds(cfg: dict) -> Outcome:
    recs = checks.bounds_suite(cfg["seed"], cfg.get("count", 200), cfg.get("k", 3), cfg.get("tol", 1e-10))
    return Outcome("verify-bounds", cfg["seed"], _records(recs), {}, _records(recs), CHECK_COLUMNS)


def _model(spec: dict | None, law):
    from . import rmt

    if spec is None:
        if isinstance(law, MeasureR) and law.kind == "semicircle" and law.params.get("center", 0.0) == 0.0:
            return rmt.gue(law.params["radius"] ** 2 / 4)
        return rmt.diagonal(law)
    kind = spec["kind"]
    if kind == "gue":
        var = spec.get("variance")
        if var is None:
            var = law.moment(2) - law.moment(1) ** 2
        return rmt.gue(var)
    if kind == "diagonal":
        return rmt.diagonal(law, spec.get("sampling", "iid"))
    return rmt.haar_unitary()


def _rmt_rows(rep) -> list:
    key = "b" if rep.check_name == "matrix_resolvent" else "z"
    return [{"check_name": rep.check_name, "index": i, "point": m[key], "empirical": m["empirical"],
             "predicted": m["predicted"], "error": m["error"]} for i, m in enumerate(rep.metrics)]


def run_rmt_validate(cfg: dict) -> Outcome:
    from . import rmt

    seed, n, trials = cfg["seed"], cfg["n"], cfg["trials"]
    solver, workers = _solver(cfg), cfg.get("workers")
    reports = []
    for chk in cfg["checks"]:
        kind = chk["kind"]
        if kind == "additive":
            mu, nu = MeasureR.from_json(chk["mu"]), MeasureR.from_json(chk["nu"])
            rep = rmt.validate_additive(mu, nu, _model(chk.get("x_model"), mu), _model(chk.get("y_model"), nu),
                                        n, trials, zgrid(chk["grid"]), seed, chk.get("tol", cfg.get("tol", 0.02)),
                                        solver, workers)
        elif kind == "multiplicative":
            mu_U, mu_V = MeasureT.from_json(chk["mu_U"]), MeasureT.from_json(chk["mu_V"])
            rep = rmt.validate_multiplicative(mu_U, mu_V, n, trials, zgrid(chk["grid"]), seed,
                                              chk.get("tol", cfg.get("tol", 0.02)), solver, workers)
        else:
            mu, nu = MeasureR.from_json(chk["mu"]), MeasureR.from_json(chk["nu"])
            bs = [np.array([[_cplx(v) for v in row] for row in b]) for b in chk["b"]]
            rep = rmt.validate_matrix_resolvent(mu, nu, _model(chk.get("x_model"), mu),
                                                _model(chk.get("y_model"), nu), bs, n, trials, seed,
                                                chk.get("tol", cfg.get("tol", 0.05)), solver, workers)
        reports.append(rep)
    rows = [row for rep in reports for row in _rmt_rows(rep)]
    return Outcome("rmt-validate", seed, [rep.canonical() for rep in reports],
                   {"n": n, "trials": trials}, rows, RMT_COLUMNS)


RUNNERS: dict[str, Callable[[dict], Outcome]] = {
    "convolve-add": run_convolve_add,
    "convolve-mult": run_convolve_mult,
    "transform": run_transform,
    "verify-algebra": run_verify_algebra,
    "verify-hilbert": run_verify_hilbert,
    "verify-bounds": run_verify_bounds,
    "rmt-validate": run_rmt_validate,
}


# --------------------------------------------------------------------------
# entry point


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config (default: the shipped example)")
    p.add_argument("--seed", type=int, help="RNG seed; overrides the config")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", choices=("json", "csv"), help="artifact format (default json)")
    p.add_argument("--tol", type=float, help="override the command's tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freesub", description="Free convolution and subordination toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("convolve-add", "convolve-mult", "transform", "rmt-validate"):
        _add_common(sub.add_parser(name))
    verify = sub.add_parser("verify", help="run a verification suite")
    vsub = verify.add_subparsers(dest="suite", required=True)
    for name in ("algebra", "hilbert", "bounds"):
        _add_common(vsub.add_parser(name))
    return parser


def run(command: str, cfg: dict[str, Any], out: Path, fmt: str | None = None) -> int:
    """Validate ``cfg``, run ``command`` and write ``out/<command>.<fmt>``."""
    try:
        validate_config(command, cfg)
        if "command" in cfg and cfg["command"] != command:
            raise ConfigError(f"config is for {cfg['command']!r}, not {command!r}")
        fmt = fmt or cfg.get("format", "json")
        outcome = RUNNERS[command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"freesub: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssertionError as exc:
        print(f"freesub: invariant breached: {exc}", file=sys.stderr)
        return EXIT_FAILED
    doc = outcome.document()
    try:
        if fmt == "json":
            emit_report(doc, "json", out / f"{command}.json")
        else:
            emit_report(doc, "csv", out / f"{command}.csv", outcome.columns, outcome.rows)
    except EmitError as exc:
        print(f"freesub: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    status = "pass" if outcome.passed else outcome.status.lower()
    print(f"{command}: {status}", file=sys.stderr)
    return outcome.exit_code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = f"verify-{args.suite}" if args.command == "verify" else args.command
    try:
        if args.config is None:
            cfg = default_config(command)
        else:
            cfg = json.loads(args.config.read_text("utf-8"))
    except OSError as exc:
        print(f"freesub: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"freesub: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not isinstance(cfg, dict):
        print("freesub: config must be a JSON object", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.tol is not None:
        cfg["tol"] = args.tol
    return run(command, cfg, args.out, args.format)


if __name__ == "__main__":
    sys.exit(main())
