"""Command line: parse kernel specs, dispatch checks/builds/probes, and emit
versioned JSON reports (schema 1) with CSV trend-table sidecars.

Exit codes: 0 all verdicts hold (possibly as trends), 1 any failure,
2 indeterminate results only, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import conditions as cond
from .conditions import ConditionReport, SignPattern, Verdict, GenerationFailedError
from .ergodic import MOVING_BASIS, cesaro_probe, default_n_grid
from .model import ModelInvalidError, build_model, minimality_check, verify_relation_DCW
from .operators import (
    Direction,
    NotPSDError,
    UnboundedShiftError,
    read_matrix_csv,
    write_matrix_csv,
    seeded_unit_vectors,
    shift_membership_backward,
    shift_membership_forward,
    shift_section,
)
from .series import (
    TruncatedSeries,
    invert_kernel,
    reciprocal,
)
from .specdsl import SpecSemanticError, SpecSyntaxError, elaborate, parse_kernel_spec

__all__ = ["main", "RunConfig", "dumps_canonical"]

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """Run-wide knobs; every tolerance is explicit and echoed into reports."""

    truncation: int = 1024
    psd_tol: float = 1e-10
    model_tol: float = 1e-8
    rank_tol: float = 1e-8
    circle_samples: int = 2048
    m_grid: tuple = (4, 8, 16, 32)
    out: Optional[str] = None
    csv_dir: Optional[str] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.psd_tol, self.model_tol, self.rank_tol) <= 0:
            raise ValueError("tolerances must be positive")


# --- canonical JSON ----------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps_canonical(obj) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (np.floating, float)):
        return _fmt_float(float(obj))
    if isinstance(obj, (np.integer, int)):
        return str(int(obj))
    if isinstance(obj, Verdict):
        return json.dumps(obj.value)
    if isinstance(obj, dict):
        inner = ",".join(
            f"{json.dumps(str(k))}:{dumps_canonical(v)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))
        )
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        return "[" + ",".join(dumps_canonical(v) for v in seq) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(payload: dict, config: RunConfig) -> None:
    text = dumps_canonical(payload) + "\n"
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_trend_csvs(reports: Sequence[ConditionReport], config: RunConfig) -> None:
    if not config.csv_dir:
        return
    os.makedirs(config.csv_dir, exist_ok=True)
    for report in reports:
        table = report.trend_table()
        if not table:
            continue
        path = os.path.join(config.csv_dir, f"{report.condition_id}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("index,value\n")
            for index, value in table:
                fh.write(f"{int(index)},{format(float(value), '.17g')}\n")


def _exit_code(verdicts: Sequence[Verdict]) -> int:
    if any(v in (Verdict.FAILS, Verdict.TREND_FAILS) for v in verdicts):
        return 1
    if any(v is Verdict.INDETERMINATE for v in verdicts):
        return 2
    return 0


def _payload(command: str, config: RunConfig, reports: Sequence[ConditionReport], **extra) -> dict:
    body = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "seed": config.seed,
        "N": config.truncation,
        "reports": [r.to_json_dict() for r in reports],
    }
    body.update(extra)
    return body


def _series_from_flags(args, what: str = "spec") -> TruncatedSeries:
    text = getattr(args, what.replace("-", "_"), None)
    file_attr = getattr(args, "spec_file", None)
    if text is None and file_attr:
        with open(file_attr, "r", encoding="utf-8") as fh:
            text = fh.read().strip()
    if text is None:
        raise SpecSemanticError(0, f"missing --{what}")
    return elaborate(parse_kernel_spec(text), args.truncation)


# --- subcommand runners -------------------------------------------------------


def _run_kernel_check(args, config: RunConfig) -> int:
    alpha = _series_from_flags(args)
    pair = reciprocal(alpha, config.truncation)
    reports = [
        cond.check_hypotheses_A(pair, config.circle_samples),
        cond.check_hypotheses_B(pair),
        cond.classify_np(pair.alpha),
        cond.classify_critical(pair),
    ]
    reports.sort(key=lambda r: r.condition_id)
    _write_trend_csvs(reports, config)
    _emit(_payload("kernel check", config, reports, violations=list(pair.violations)), config)
    return _exit_code([r.verdict for r in reports])


def _run_kernel_invert(args, config: RunConfig) -> int:
    alpha = _series_from_flags(args)
    pair = reciprocal(alpha, config.truncation)
    head = min(16, pair.k.trunc_len)
    extra = {
        "inversion_residual": pair.inversion_residual,
        "flags": {
            "is_np": pair.flags.is_np,
            "is_wiener_alpha": pair.flags.is_wiener_alpha,
            "is_wiener_k": pair.flags.is_wiener_k,
            "type": pair.flags.type,
        },
        "k_head": [float(v) for v in pair.k.coeffs[:head]],
        "violations": list(pair.violations),
    }
    if config.csv_dir:
        os.makedirs(config.csv_dir, exist_ok=True)
        with open(os.path.join(config.csv_dir, "kernel.csv"), "w", encoding="utf-8") as fh:
            fh.write("index,value\n")
            for i, v in enumerate(pair.k.coeffs):
                fh.write(f"{i},{format(float(v), '.17g')}\n")
    _emit(_payload("kernel invert", config, [], **extra), config)
    return 0 if not pair.violations else 1


def _run_shift_membership(args, config: RunConfig) -> int:
    if args.a is not None and args.s is not None:
        alpha = elaborate(parse_kernel_spec(f"pow1mt({args.a})"), config.truncation)
        kappa = elaborate(parse_kernel_spec(f"pow1mt({-args.s})"), config.truncation)
    else:
        alpha = _series_from_flags(args)
        if not args.kappa:
            raise SpecSemanticError(0, "need --kappa (or the --a/--s shortcut)")
        kappa = elaborate(parse_kernel_spec(args.kappa), config.truncation)
    direction = Direction.BACKWARD if args.direction == "backward" else Direction.FORWARD
    runner = (
        shift_membership_backward if direction is Direction.BACKWARD else shift_membership_forward
    )
    report = runner(alpha, kappa)
    extra = {
        "direction": report.direction.value,
        "in_Cw": report.in_Cw,
        "in_Cw_plus": report.in_Cw_plus,
        "sup_ratio": report.sup_ratio,
        "min_coefficient": report.min_coefficient,
        "argmin": report.argmin,
        "witness": report.witness,
        "N_used": report.N_used,
    }
    _emit(_payload("shift membership", config, [], **extra), config)
    return _exit_code([report.in_Cw, report.in_Cw_plus])


def _run_model_build(args, config: RunConfig) -> int:
    spec_text = args.kernel or args.spec
    if spec_text is None:
        raise SpecSemanticError(0, "missing --kernel/--spec")
    k = elaborate(parse_kernel_spec(spec_text), config.truncation)
    pair = invert_kernel(k)
    if args.operator:
        T = read_matrix_csv(args.operator)
    else:
        d = args.section or 32
        T = shift_section(k, Direction.BACKWARD, d)
    try:
        bundle = build_model(
            pair.alpha,
            k,
            T,
            M=args.degree,
            psd_tol=config.psd_tol,
            model_tol=config.model_tol,
            rank_tol=config.rank_tol,
        )
    except (ModelInvalidError, NotPSDError) as exc:
        _emit(
            _payload(
                "model build",
                config,
                [],
                error=str(exc),
                witness=getattr(exc, "witness", {}),
            ),
            config,
        )
        return 1
    mini = minimality_check(bundle, rank_tol=config.rank_tol)
    if config.csv_dir:
        os.makedirs(config.csv_dir, exist_ok=True)
        for name, mat in (
            ("defect", bundle.D.entries),
            ("complement", bundle.W.entries),
            ("transform", bundle.V),
            ("isometry", bundle.S),
        ):
            if mat.size:
                write_matrix_csv(os.path.join(config.csv_dir, f"{name}.csv"), mat)
    dim = bundle.D.dim
    probes = seeded_unit_vectors(dim, 16, seed=config.seed)
    relation = verify_relation_DCW(
        pair.alpha, T, bundle.C, bundle.W, probes, n_cap=config.truncation
    )
    diag = dict(bundle.diagnostics)
    passed = all(
        diag[key] <= config.model_tol
        for key in ("isometry_residual", "intertwine_residual", "S_welldef_residual")
    )
    extra = {
        "diagnostics": diag,
        "defect_rank": bundle.defect_rank,
        "w_rank": bundle.w_rank,
        "degree_cap": bundle.M,
        "kind": bundle.kind,
        "minimality": mini,
        "defect_relation": relation,
        "passed": passed,
    }
    _emit(_payload("model build", config, [], **extra), config)
    return 0 if passed and mini["minimal"] else 1


def _run_ergodic_probe(args, config: RunConfig) -> int:
    spec_text = args.kernel or args.spec
    if spec_text is None:
        raise SpecSemanticError(0, "missing --kernel/--spec")
    if args.q is not None:
        args.p = args.q
    n_max = args.nmax
    kappa = elaborate(parse_kernel_spec(spec_text), max(n_max + 1, config.truncation))
    section = shift_section(kappa, Direction.BACKWARD, n_max + 1)
    grid = default_n_grid(n_max)
    probes = [
        cesaro_probe(section, MOVING_BASIS, args.a, args.p, grid, operator_ref=spec_text)
    ]
    if args.vectors > 0:
        fixed = seeded_unit_vectors(n_max + 1, args.vectors, seed=config.seed, complex_entries=False)
        probes.append(cesaro_probe(section, fixed, args.a, args.p, grid, operator_ref=spec_text))
    rows = []
    for probe in probes:
        for label, values, trend in zip(probe.vector_labels, probe.samples, probe.trends):
            rows.append(
                {
                    "vector": label,
                    "trend": trend.kind,
                    "statistic": trend.statistic,
                    "r2": trend.r2,
                    "values": [float(v) for v in values],
                }
            )
            if config.csv_dir:
                os.makedirs(config.csv_dir, exist_ok=True)
                path = os.path.join(config.csv_dir, f"probe_{label}.csv")
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write("n,value\n")
                    for n, v in zip(probe.n_grid, values):
                        fh.write(f"{n},{format(float(v), '.17g')}\n")
    _emit(
        _payload(
            "ergodic probe",
            config,
            [],
            a=args.a,
            p=args.p,
            n_grid=list(grid),
            probes=rows,
        ),
        config,
    )
    return 0


def _run_example_signs(args, config: RunConfig) -> int:
    pattern = SignPattern.from_string(
        args.pattern, epsilon=args.eps, tail_amplitude=args.a, tail_exponent=args.b
    )
    try:
        pair, report = cond.generate_sign_pattern_kernel(pattern, config.truncation)
    except GenerationFailedError as exc:
        _emit(_payload("example signs", config, [], error=str(exc), witness=exc.witness), config)
        return 1
    _write_trend_csvs([report], config)
    head = min(16, pair.alpha.trunc_len)
    _emit(
        _payload(
            "example signs",
            config,
            [report],
            alpha_head=[float(v) for v in pair.alpha.coeffs[:head]],
            inversion_residual=pair.inversion_residual,
            violations=list(pair.violations),
        ),
        config,
    )
    return _exit_code([report.verdict])


def _run_report_bundle(args, config: RunConfig) -> int:
    alpha = _series_from_flags(args)
    pair = reciprocal(alpha, config.truncation)
    reports = [
        cond.check_hypotheses_A(pair, config.circle_samples),
        cond.check_hypotheses_B(pair),
        cond.classify_np(pair.alpha),
        cond.classify_critical(pair),
    ]
    if np.all(pair.k.coeffs > 0.0):
        # the kernel-side conditions presume positive coefficients
        omega = TruncatedSeries(1.0 / pair.k.coeffs, None)
        m_grid = [m for m in config.m_grid if 2 * m <= config.truncation]
        reports += [
            cond.muller_condition_estimate(pair.k, m_grid),
            cond.muller_sufficient_check(pair.k, [1.5, 2.0, 3.0]),
            cond.banach_algebra_condition(omega),
            cond.tau_condition_check(omega),
            cond.reciprocal_summability_check(omega),
            cond.holder_exponent_estimate(pair.k, [0.1, 0.2, 0.3, 0.4, 0.5]),
        ]
    reports.sort(key=lambda r: r.condition_id)
    _write_trend_csvs(reports, config)
    _emit(_payload("report bundle", config, reports, violations=list(pair.violations)), config)
    return _exit_code([r.verdict for r in reports])


# --- argument parsing ----------------------------------------------------------


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # exit 3 on usage problems, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(3)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-N", "--truncation", type=int, default=1024)
    parser.add_argument("--tol", type=float, default=1e-8, help="model tolerance")
    parser.add_argument("--out", default=None)
    parser.add_argument("--csv-dir", default=None)
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="herop", description=__doc__)
    top = parser.add_subparsers(dest="group", required=True)

    kernel = top.add_parser("kernel", help="kernel pair checks").add_subparsers(
        dest="action", required=True
    )
    for action in ("check", "invert"):
        sub = kernel.add_parser(action)
        sub.add_argument("--spec", default=None)
        sub.add_argument("--spec-file", default=None)
        _add_common(sub)

    shift = top.add_parser("shift", help="weighted shift membership").add_subparsers(
        dest="action", required=True
    )
    sub = shift.add_parser("membership")
    sub.add_argument("--spec", default=None, help="symbol spec")
    sub.add_argument("--spec-file", default=None)
    sub.add_argument("--kappa", default=None, help="weight spec")
    sub.add_argument("--a", type=float, default=None, help="binomial symbol order")
    sub.add_argument("--s", type=float, default=None, help="binomial weight order")
    sub.add_argument("--direction", choices=("backward", "forward"), default="backward")
    _add_common(sub)

    model = top.add_parser("model", help="explicit model construction").add_subparsers(
        dest="action", required=True
    )
    sub = model.add_parser("build")
    sub.add_argument("--kernel", default=None, help="kernel spec (alias of --spec)")
    sub.add_argument("--spec", default=None)
    sub.add_argument("--operator", default=None, help="CSV matrix path")
    sub.add_argument("--section", type=int, default=None, help="backward section dimension")
    sub.add_argument("--degree", type=int, default=None, help="degree cap M")
    _add_common(sub)

    ergodic = top.add_parser("ergodic", help="Cesaro mean probes").add_subparsers(
        dest="action", required=True
    )
    sub = ergodic.add_parser("probe")
    sub.add_argument("--kernel", default=None, help="weight spec (alias of --spec)")
    sub.add_argument("--spec", default=None)
    sub.add_argument("--a", type=float, required=True, help="mean order")
    sub.add_argument("--p", type=float, default=2.0, help="norm power")
    sub.add_argument("--q", type=float, default=None, help="norm power (alias of --p)")
    sub.add_argument("--nmax", type=int, default=4096)
    sub.add_argument("--vectors", type=int, default=2)
    _add_common(sub)

    example = top.add_parser("example", help="constructive examples").add_subparsers(
        dest="action", required=True
    )
    sub = example.add_parser("signs")
    sub.add_argument("--pattern", required=True)
    sub.add_argument("--eps", type=float, default=1e-3)
    sub.add_argument("--a", type=float, default=0.05, help="tail amplitude")
    sub.add_argument("--b", type=float, default=2.0, help="tail exponent")
    _add_common(sub)

    report = top.add_parser("report", help="aggregate condition reports").add_subparsers(
        dest="action", required=True
    )
    sub = report.add_parser("bundle")
    sub.add_argument("--spec", default=None)
    sub.add_argument("--spec-file", default=None)
    _add_common(sub)

    return parser


_RUNNERS = {
    ("kernel", "check"): _run_kernel_check,
    ("kernel", "invert"): _run_kernel_invert,
    ("shift", "membership"): _run_shift_membership,
    ("model", "build"): _run_model_build,
    ("ergodic", "probe"): _run_ergodic_probe,
    ("example", "signs"): _run_example_signs,
    ("report", "bundle"): _run_report_bundle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = RunConfig(
        truncation=args.truncation,
        model_tol=args.tol,
        out=args.out,
        csv_dir=args.csv_dir,
        seed=args.seed,
    )
    runner = _RUNNERS[(args.group, args.action)]
    try:
        return runner(args, config)
    except (SpecSyntaxError, SpecSemanticError, FileNotFoundError) as exc:
        sys.stderr.write(f"herop: error: {exc}\n")
        return 3
    except (UnboundedShiftError, ValueError) as exc:
        sys.stderr.write(f"herop: error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
