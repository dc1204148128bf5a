"""The ``uba-sched`` command line.

One subcommand per module operation: trace, solve, fit, bound, simulate,
compare, mimic.  Input is a JSON config document (``--config``), optionally
patched with repeatable ``--set key=value`` overrides using dotted paths;
output goes to ``--out`` or standard output.  Exit status is 0 on success,
1 for validation problems (including malformed JSON, reported with line and
column), 2 for I/O failures.  One ``--seed`` flag feeds every stochastic
command so a fixed invocation is byte-reproducible.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Mapping, Sequence

from . import bounds as bounds_mod
from .errors import InvalidSpecError
from .fitting import fit_parametric, pipeline, reduce_to_uba
from .minmax import MinMaxProblem, SolverConfig, solve_minmax
from .schedule import ScheduleSpec, mimic, trace
from .simulate import (
    QuadModel,
    compare_csv_text,
    compare_schedules,
    simulate,
    stats_csv_text,
)
from .validation import (
    Diagnostic,
    validate_model_document,
    validate_problem_document,
    validate_spec_document,
)


class _CliFailure(Exception):
    """Error already formatted for the user; carries the exit status."""

    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


# top-level config keys each command accepts; overrides must land under one
_ALLOWED_KEYS = {
    "trace": {"kind", "total_steps", "eta_min", "warmup_fraction", "plan",
              "baseline_params"},
    "solve": {"n_steps", "lambda_lo", "lambda_hi", "eta_lo", "eta_hi",
              "solver"},
    "fit": {"etas", "eta_lo", "eta_hi", "n_steps", "seed", "starts",
            "lambda_lo", "lambda_hi", "solver"},
    "bound": {"phis", "ns", "lambdas", "eta_lo", "eta_hi", "exp_lambda"},
    "simulate": {"model", "spec", "steps", "replicas", "with_bounds"},
    "compare": {"model", "specs", "steps", "replicas", "labels"},
    "mimic": {"target", "total_steps", "eta_max", "eta_min", "segments",
              "cycles", "pct_start"},
}


def _parse_u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(
            f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config document")
    common.add_argument("--out", metavar="PATH", default="-",
                        help="output path, '-' for standard output")
    common.add_argument("--seed", type=_parse_u64, default=None,
                        help="seed for all randomness in this invocation")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: all cores, or "
                             "UBA_SCHED_THREADS)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append",
                        dest="overrides", default=[],
                        help="config override on a dotted path (repeatable)")

    parser = argparse.ArgumentParser(
        prog="uba-sched",
        description="Budget-aware learning-rate schedules: traces, minimax "
                    "solving, curve fitting, bound sweeps, and simulation.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("trace", parents=[common],
                   help="per-step rate CSV for a schedule spec")
    sub.add_parser("solve", parents=[common],
                   help="minimize the worst-case contraction over a box")
    sub.add_parser("fit", parents=[common],
                   help="fit the rational-cosine model and reduce to phi")
    sub.add_parser("bound", parents=[common],
                   help="per-phase bound sweep CSV")
    sub.add_parser("simulate", parents=[common],
                   help="Monte-Carlo quadratic SGD trajectory CSV")
    sub.add_parser("compare", parents=[common],
                   help="final-gap table for schedules under one budget")
    sub.add_parser("mimic", parents=[common],
                   help="emit a UBA spec imitating a conventional schedule")
    return parser


def _load_doc(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _CliFailure(f"cannot read config: {exc}", 2) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _CliFailure(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", 1) from exc
    if not isinstance(doc, dict):
        raise _CliFailure("config document must be a JSON object", 1)
    return doc


def _parse_override_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text  # bare strings may be given unquoted


def _apply_overrides(doc: dict, overrides: Sequence[str], command: str) -> None:
    allowed = _ALLOWED_KEYS[command]
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise _CliFailure(f"--set expects KEY=VALUE, got {item!r}", 1)
        segments = key.split(".")
        if segments[0] not in allowed:
            raise _CliFailure(
                f"--set {key}: no such config key for '{command}' "
                f"(expected one of {sorted(allowed)})", 1)
        target: Any = doc
        for i, seg in enumerate(segments[:-1]):
            if isinstance(target, list):
                if not seg.isdigit() or int(seg) >= len(target):
                    raise _CliFailure(
                        f"--set {key}: index '{seg}' not present", 1)
                target = target[int(seg)]
            elif isinstance(target, dict):
                target = target.setdefault(seg, {})
            else:
                raise _CliFailure(
                    f"--set {key}: '{segments[i - 1]}' is not a container", 1)
        leaf = segments[-1]
        value = _parse_override_value(raw)
        if isinstance(target, list):
            if not leaf.isdigit() or int(leaf) >= len(target):
                raise _CliFailure(f"--set {key}: index '{leaf}' not present", 1)
            target[int(leaf)] = value
        elif isinstance(target, dict):
            target[leaf] = value
        else:
            raise _CliFailure(f"--set {key}: parent is not a container", 1)


def _require_clean(diagnostics: Sequence[Diagnostic], prefix: str = "") -> None:
    if diagnostics:
        raise _CliFailure(
            "\n".join(f"{prefix}{d}" for d in diagnostics), 1)


def _require(doc: Mapping, key: str) -> Any:
    if key not in doc:
        raise _CliFailure(f"config is missing required key '{key}'", 1)
    return doc[key]


def _resolve_threads(args) -> int:
    if args.threads is not None:
        value = args.threads
    else:
        env = os.environ.get("UBA_SCHED_THREADS")
        if env is not None:
            try:
                value = int(env)
            except ValueError:
                raise _CliFailure(
                    f"UBA_SCHED_THREADS must be an integer, got {env!r}", 1)
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise _CliFailure(f"--threads must be at least 1, got {value}", 1)
    return value


def _resolve_seed(args, doc_seed: Any, default: int = 0) -> int:
    # the flag wins; a seed stored in the config applies when no flag is given
    if args.seed is not None:
        return args.seed
    if doc_seed is not None:
        if not isinstance(doc_seed, int) or not 0 <= doc_seed < 2 ** 64:
            raise _CliFailure(
                f"seed must be an unsigned 64-bit integer, got {doc_seed!r}", 1)
        return doc_seed
    return default


def _solver_config(doc: Mapping, seed: int) -> SolverConfig:
    fields = {}
    for key in ("outer_iterations", "eta_step", "lambda_grid", "tolerance",
                "restarts"):
        if key in doc:
            fields[key] = doc[key]
    return SolverConfig(seed=seed, **fields)


def _problem_from(doc: Mapping) -> MinMaxProblem:
    _require_clean(validate_problem_document(doc))
    return MinMaxProblem(
        n_steps=int(doc["n_steps"]),
        lambda_lo=float(doc["lambda_lo"]),
        lambda_hi=float(doc["lambda_hi"]),
        eta_lo=float(doc["eta_lo"]),
        eta_hi=float(doc["eta_hi"]),
    )


# ---- command handlers --------------------------------------------------


def _cmd_trace(doc: dict, args) -> str:
    _require_clean(validate_spec_document(doc))
    spec = ScheduleSpec.from_json_dict(doc)
    return trace(spec).csv_text()


def _cmd_solve(doc: dict, args) -> str:
    problem = _problem_from(doc)
    solver_doc = doc.get("solver", {})
    if not isinstance(solver_doc, Mapping):
        raise _CliFailure("'solver' must be an object", 1)
    seed = _resolve_seed(args, solver_doc.get("seed"))
    config = _solver_config(solver_doc, seed)
    solution = solve_minmax(problem, config, threads=_resolve_threads(args))
    return solution.to_json() + "\n"


def _cmd_fit(doc: dict, args) -> str:
    if "etas" in doc:
        etas = doc["etas"]
        if not isinstance(etas, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool)
                for x in etas):
            raise _CliFailure("'etas' must be a list of numbers", 1)
        eta_lo = float(_require(doc, "eta_lo"))
        eta_hi = float(_require(doc, "eta_hi"))
        n_steps = int(doc.get("n_steps", len(etas)))
        seed = _resolve_seed(args, doc.get("seed"))
        fit = fit_parametric(etas, eta_lo, eta_hi, n_steps,
                             seed=seed, starts=int(doc.get("starts", 16)))
        spec = None
        if fit.reduction_ok:
            spec = reduce_to_uba(fit, eta_lo, eta_hi, n_steps).to_json_dict()
        result = {"fit": fit.to_json_dict(), "spec": spec}
    else:
        problem = _problem_from(doc)
        solver_doc = doc.get("solver", {})
        if not isinstance(solver_doc, Mapping):
            raise _CliFailure("'solver' must be an object", 1)
        seed = _resolve_seed(args, solver_doc.get("seed"))
        config = _solver_config(solver_doc, seed)
        solution, fit, spec = pipeline(problem, config,
                                       threads=_resolve_threads(args))
        result = {
            "solution": solution.to_json_dict(),
            "fit": fit.to_json_dict(),
            "spec": spec.to_json_dict(),
        }
    return json.dumps(result, indent=2) + "\n"


def _cmd_bound(doc: dict, args) -> str:
    phis = _require(doc, "phis")
    ns = _require(doc, "ns")
    lambdas = _require(doc, "lambdas")
    rows = bounds_mod.bound_sweep(
        phis, ns, lambdas,
        eta_lo=float(doc.get("eta_lo", 0.0)),
        eta_hi=float(doc.get("eta_hi", 1.0)),
        exp_lambda=doc.get("exp_lambda"),
    )
    return bounds_mod.sweep_csv_text(rows)


def _model_from(doc: dict, args) -> QuadModel:
    model_doc = _require(doc, "model")
    diags = validate_model_document(model_doc)
    _require_clean(diags, prefix="/model")
    return QuadModel(
        spectrum=tuple(model_doc["spectrum"]),
        init_coeffs=tuple(model_doc["init_coeffs"]),
        sigma=float(model_doc.get("sigma", 0.0)),
        seed=_resolve_seed(args, model_doc.get("seed")),
    )


def _cmd_simulate(doc: dict, args) -> str:
    model = _model_from(doc, args)
    spec_doc = _require(doc, "spec")
    _require_clean(validate_spec_document(spec_doc), prefix="/spec")
    spec = ScheduleSpec.from_json_dict(spec_doc)
    steps = int(doc.get("steps", spec.total_steps))
    replicas = int(doc.get("replicas", 1024))
    stats = simulate(model, spec, steps=steps, replicas=replicas)
    if not doc.get("with_bounds", False):
        return stats_csv_text(stats)

    # bound columns need the single-phase UBA closed forms
    if (spec.kind != "UBA" or spec.plan.n_phases != 1
            or spec.warmup_steps != 0):
        raise _CliFailure(
            "with_bounds requires a single-phase UBA spec without warmup", 1)
    inputs_common = dict(
        n=spec.total_steps, phi=spec.plan.phi[0], eta_lo=spec.eta_min,
        eta_hi=spec.plan.eta_max[0], lambda_lo=min(model.spectrum),
        lambda_hi=max(model.spectrum), sigma=model.sigma,
        spectrum=model.spectrum,
        init_dist_sq=sum(s * s for s in model.init_coeffs),
    )
    bias_col, var_col = [], []
    for t in stats.steps:
        bias, var = bounds_mod.theorem1_bound(
            bounds_mod.BoundInputs(t_rel=t, **inputs_common))
        bias_col.append(bias)
        var_col.append(var)
    return stats_csv_text(stats, bias_bounds=bias_col, variance_bounds=var_col)


def _cmd_compare(doc: dict, args) -> str:
    model = _model_from(doc, args)
    spec_docs = _require(doc, "specs")
    if not isinstance(spec_docs, list) or not spec_docs:
        raise _CliFailure("'specs' must be a non-empty list", 1)
    specs = []
    for i, spec_doc in enumerate(spec_docs):
        _require_clean(validate_spec_document(spec_doc), prefix=f"/specs/{i}")
        specs.append(ScheduleSpec.from_json_dict(spec_doc))
    labels = doc.get("labels")
    rows = compare_schedules(
        model, specs,
        steps=doc.get("steps"),
        replicas=int(doc.get("replicas", 1024)),
        labels=labels,
    )
    return compare_csv_text(rows)


def _cmd_mimic(doc: dict, args) -> str:
    target = _require(doc, "target")
    total_steps = int(_require(doc, "total_steps"))
    kwargs = {}
    for key in ("eta_max", "eta_min", "pct_start"):
        if key in doc:
            kwargs[key] = float(doc[key])
    for key in ("segments", "cycles"):
        if key in doc:
            kwargs[key] = int(doc[key])
    spec = mimic(str(target), total_steps, **kwargs)
    return spec.to_json() + "\n"


_HANDLERS = {
    "trace": _cmd_trace,
    "solve": _cmd_solve,
    "fit": _cmd_fit,
    "bound": _cmd_bound,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "mimic": _cmd_mimic,
}


def _emit(text: str, out_path: str) -> None:
    if out_path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _CliFailure(f"cannot write output: {exc}", 2) from exc


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        doc = _load_doc(args.config)
        _apply_overrides(doc, args.overrides, args.command)
        text = _HANDLERS[args.command](doc, args)
        _emit(text, args.out)
    except _CliFailure as exc:
        print(f"uba-sched: {exc}", file=sys.stderr)
        return exc.status
    except (InvalidSpecError, ValueError) as exc:
        print(f"uba-sched: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
