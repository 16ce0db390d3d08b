"""Command-line entry point: ``carnotfas <subcommand> ...``.

Every subcommand emits one report (JSON by default) carrying the tool
version, the sha256 of each input file and the seed, and exits 0 only when
every requested check passes.  Usage and input errors exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .exactpoly import rat_str
from .fas import (FasError, b1_closed_form, btilde1_closed_form, btilde_mf_closed_form, build_fas,
                  candidate_residual)
from .framekit import (FrameError, check_first_divi, frame_from_json, is_quasi_normal,
                       quasi_normal_violations, tanaka_violations)
from .lemmas import LEMMAS, HypothesisError, gate_failures, run_lemma
from .ngla import (AlgebraError, algebra_from_json, center, check_codim3_hypotheses,
                   find_coordinate_decomposition, generic_rank, is_ad_surjective,
                   random_codim3_instance, validate)
from .srflow import (FlowError, FlowState, alpha_of, flow_h, geodesic_trace_compare,
                     orbital_residual, realize_fields)

ENV_OUT = "CARNOTFAS_OUT_DIR"

TOL = {"energy": 1e-9, "vertical": 1e-12, "orbital": 1e-5, "alpha_drift": 1e-9, "trace": 1e-5}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    layers: int = 4
    seed: int = 0
    out_dir: str | None = None
    fmt: str = "json"


# -- plumbing ------------------------------------------------------------------

def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _read_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno - 1 < len(text.splitlines()) else ""
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line}") from None


def _envelope(cfg: RunConfig, passed: bool, result: dict, params: dict | None = None) -> dict:
    return {
        "tool": "carnotfas",
        "version": __version__,
        "command": cfg.command,
        "inputs": {Path(p).name: _sha256(p) for p in cfg.inputs},
        "seed": cfg.seed,
        "parameters": params or {},
        "passed": bool(passed),
        "result": result,
    }


def _text_lines(obj, prefix: str = "") -> list[str]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out += _text_lines(obj[k], f"{prefix}{k}.")
        return out
    if isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        out = []
        for i, v in enumerate(obj):
            out += _text_lines(v, f"{prefix}{i}.")
        return out
    return [f"{prefix.rstrip('.')}: {json.dumps(obj) if not isinstance(obj, str) else obj}"]


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    return "\n".join(_text_lines(report)) + "\n"


def _emit(cfg: RunConfig, report: dict) -> int:
    text = render(report, cfg.fmt)
    sys.stdout.write(text)
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        ext = "json" if cfg.fmt == "json" else "txt"
        with open(os.path.join(cfg.out_dir, f"{cfg.command}.{ext}"), "w") as fh:
            fh.write(text)
    return 0 if report["passed"] else 1


def _load_frame(path: str):
    data = _read_json(path)
    try:
        return frame_from_json(data)
    except (FrameError, AlgebraError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: invalid frame: {exc}") from None


def _fmt_triple(t) -> str:
    i, j, k = t
    return f"c^{k}_{{{i},{j}}}"


# -- check-algebra ----------------------------------------------------------------

def algebra_report(a) -> dict:
    rep = validate(a)
    out = {"validation": rep.to_json(), "m": a.m, "d": a.d, "dim": a.dim, "step": a.step}
    if rep.ok and a.step <= 2:
        ok, w = is_ad_surjective(a)
        c = center(a)
        out.update({
            "ad_surjective": ok,
            "witness": [rat_str(x) for x in w] if w else None,
            "r": generic_rank(a),
            "center_dim": c.basis.dim,
            "center_meets_m1": c.dim_m1_intersection > 0,
            "codim3_hypotheses": check_codim3_hypotheses(a),
        })
        if a.dim <= 16:
            dec = find_coordinate_decomposition(a)
            out["coordinate_decomposition"] = dec
    return out


def cmd_check_algebra(cfg: RunConfig, args) -> int:
    data = _read_json(args.file)
    try:
        a = algebra_from_json(data)
    except (AlgebraError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.file}: invalid algebra: {exc}") from None
    res = algebra_report(a)
    return _emit(cfg, _envelope(cfg, res["validation"]["ok"], res))


# -- build-frame -------------------------------------------------------------------

def _first_divi_json(f) -> tuple[bool, list]:
    try:
        fd = check_first_divi(f)
    except ValueError as exc:
        return False, [{"error": str(exc)}]
    return not fd, fd


def cmd_build_frame(cfg: RunConfig, args) -> int:
    f = _load_frame(args.file)
    ok, fd = _first_divi_json(f)
    res = {
        "frame": f.to_json(),
        "first_divi_violations": fd,
        "quasi_normal": is_quasi_normal(f),
        "tanaka_violations": [_fmt_triple(t) for t in tanaka_violations(f)],
        "product": f.is_product(),
        "basis_changes": [c.to_json() for c in f.basis_changes],
    }
    return _emit(cfg, _envelope(cfg, ok, res))


# -- build-fas ---------------------------------------------------------------------

def _poly_matrix_json(rows) -> list:
    return [[p.to_json() for p in row] for row in rows]


def cmd_build_fas(cfg: RunConfig, args) -> int:
    if not cfg.out_dir:
        raise UsageError(f"build-fas needs --out or the {ENV_OUT} environment variable")
    f = _load_frame(args.file)
    layers = build_fas(f, cfg.layers)
    m = f.m
    payload = {"frame": f.to_json(), "layers": []}
    lines = []
    for s in range(layers.depth):
        payload["layers"].append({
            "s": s + 1,
            "A": _poly_matrix_json(layers.A[s]),
            "b": [p.to_json() for p in layers.b[s]],
            "btilde": [p.to_json() for p in layers.btilde[s]],
        })
        lines.append(f"== layer {s + 1} ==")
        for j in range(m):
            row = ", ".join(str(p) for p in layers.A[s][j])
            lines.append(f"A[{j + 1}] = [{row}]")
            lines.append(f"b[{j + 1}] = {layers.b[s][j]}")
            lines.append(f"btilde[{j + 1}] = {layers.btilde[s][j]}")
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "fas.json"), "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    with open(os.path.join(cfg.out_dir, "fas.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    resid = candidate_residual(f, layers)
    res = {"layers": layers.depth, "files": ["fas.json", "fas.txt"],
           "nonzero_candidate_residuals": len(resid), "product": f.is_product()}
    return _emit(cfg, _envelope(cfg, True, res, {"layers": cfg.layers}))


# -- verify-lemmas --------------------------------------------------------------------

def cmd_verify_lemmas(cfg: RunConfig, args) -> int:
    f = _load_frame(args.file)
    params = {"lemma": args.lemma, "block": args.block, "force": args.force}
    try:
        results = run_lemma(f, args.lemma, args.block, force=args.force)
    except HypothesisError as exc:
        res = {"status": "hypotheses-fail", "failures": exc.failures}
        return _emit(cfg, _envelope(cfg, False, res, params))
    except FasError as exc:
        raise UsageError(str(exc)) from None
    res = {"status": "ran", "results": [r.to_json() for r in results]}
    return _emit(cfg, _envelope(cfg, all(r.passed for r in results), res, params))


# -- verify-appendix-a ----------------------------------------------------------------

def appendix_a_sweep(seed: int, trials: int, m_max: int = 7) -> dict:
    rng = random.Random(seed)
    generated = hyp = surj = 0
    counter = []
    for _ in range(trials):
        a = random_codim3_instance(rng, m_max)
        if a is None:
            continue
        generated += 1
        if not (validate(a).ok and check_codim3_hypotheses(a)):
            continue
        hyp += 1
        ok, _w = is_ad_surjective(a)
        if ok:
            surj += 1
        else:
            counter.append({"degree_dims": list(a.degree_dims),
                            "brackets": [[i, j, k, rat_str(c)] for (i, j, k), c in sorted(a.brackets.items())]})
    return {"instances": generated, "hypotheses_satisfied": hyp, "ad_surjective": surj,
            "counterexamples": len(counter), "counterexample_algebras": counter}


def cmd_verify_appendix_a(cfg: RunConfig, args) -> int:
    res = appendix_a_sweep(cfg.seed, args.trials, args.m_max)
    return _emit(cfg, _envelope(cfg, res["counterexamples"] == 0, res,
                                {"trials": args.trials, "m_max": args.m_max}))


# -- flow --------------------------------------------------------------------------

def _sample_rows(arr: np.ndarray, count: int = 11) -> list:
    idx = np.linspace(0, len(arr) - 1, min(count, len(arr))).round().astype(int)
    return [[float(v) for v in arr[i]] for i in idx]


def flow_checks(f, s0: FlowState, T: float, dt: float, checks) -> dict:
    fields = realize_fields(f)
    out: dict = {}
    if "conserve" in checks:
        for metric in ("g1", "g2"):
            tr = flow_h(f, metric, s0, T, dt, fields)
            out[f"conserve_{metric}"] = {
                "energy_drift": tr.max_energy_deviation,
                "vertical_drift": tr.vertical_drift(f.m),
                "passed": tr.max_energy_deviation <= TOL["energy"] and tr.vertical_drift(f.m) <= TOL["vertical"],
            }
    if "orbital" in checks:
        rep = orbital_residual(f, s0, T, dt, fields)
        out["orbital"] = dict(rep.to_json(), passed=rep.residual <= TOL["orbital"]
                              and rep.alpha_drift <= TOL["alpha_drift"])
    if "trace" in checks:
        d = geodesic_trace_compare(f, s0, T, dt, fields)
        out["trace"] = {"max_base_distance": d, "passed": d <= TOL["trace"]}
    return out


def cmd_flow(cfg: RunConfig, args) -> int:
    f = _load_frame(args.file)
    n = f.n
    u0 = args.u0
    if u0 is None:
        u0 = list(np.random.default_rng(cfg.seed).uniform(-1, 1, n))
    x0 = args.x0 if args.x0 is not None else [0.0] * n
    if len(u0) != n or len(x0) != n:
        raise UsageError(f"--u0 and --x0 need {n} values each")
    try:
        s0 = FlowState(x0, u0)
        tr = flow_h(f, args.metric, s0, args.T, args.dt)
        checks = flow_checks(f, s0, args.T, args.dt, args.check)
    except FlowError as exc:
        raise UsageError(str(exc)) from None
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"u{i}" for i in range(1, n + 1)])
            for t, x, u in zip(tr.t, tr.x, tr.u):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in x] + [repr(float(v)) for v in u])
    res = {
        "metric": args.metric,
        "energy_drift": tr.max_energy_deviation,
        "vertical_drift": tr.vertical_drift(f.m),
        "checks": checks,
        "samples": {"t": [float(t) for t in tr.t[np.linspace(0, len(tr.t) - 1, min(11, len(tr.t))).round().astype(int)]],
                    "x": _sample_rows(tr.x), "u": _sample_rows(tr.u)},
    }
    passed = all(c["passed"] for c in checks.values())
    params = {"u0": [float(v) for v in u0], "x0": [float(v) for v in x0], "T": args.T, "dt": args.dt,
              "check": sorted(args.check)}
    return _emit(cfg, _envelope(cfg, passed, res, params))


# -- full-suite ------------------------------------------------------------------------

def _is_carnot(f) -> bool:
    m = f.m
    return all(i <= m and j <= m and k > m for (i, j, k) in f.c)


def full_suite(f, layers: int, seed: int, T: float = 1.0, dt: float = 1e-3) -> tuple[bool, list]:
    stages = []

    ok, fd = _first_divi_json(f)
    qn = quasi_normal_violations(f)
    stages.append({"stage": "framekit", "passed": ok, "first_divi_violations": fd,
                   "quasi_normal": not qn, "product": f.is_product()})
    if not ok:
        return False, stages

    fas_stage: dict = {"stage": "fas", "layers": layers}
    lay = build_fas(f, max(layers, 2))
    cf = {"b1": b1_closed_form(f) == lay.b[0], "btilde1": btilde1_closed_form(f) == lay.btilde[0],
          "btilde_second_layer": all(btilde_mf_closed_form(f, j) == lay.btilde[1][j - 1]
                                     for j in range(1, f.idx.ms[0] + 1))}
    resid = candidate_residual(f, lay, layers)
    fas_stage["closed_forms"] = cf
    fas_stage["nonzero_candidate_residuals"] = len(resid)
    fas_stage["candidate_required"] = f.is_product()
    fas_stage["passed"] = all(cf.values()) and (not f.is_product() or not resid)
    stages.append(fas_stage)

    lem_stage: dict = {"stage": "lemmas", "results": []}
    lem_ok = True
    for name in LEMMAS:
        blocks = range(1, f.k + 1) if name in ("step1", "step1k", "p2") else [1]
        for b in blocks:
            entry: dict = {"lemma": name, "block": b}
            fails = gate_failures(f, name, b)
            if fails:
                entry.update(status="skipped", reasons=fails)
            else:
                res = run_lemma(f, name, b if name in ("step1", "step1k", "p2") else None, layers=lay)[0]
                nz = [t.to_json() for t in res.terms if t.coefficient]
                entry.update(status="ran", passed=res.passed, nonzero_coefficients=nz)
                lem_ok &= res.passed
            lem_stage["results"].append(entry)
    lem_stage["passed"] = lem_ok
    stages.append(lem_stage)

    flow_stage: dict = {"stage": "srflow"}
    if _is_carnot(f):
        rng = np.random.default_rng(seed)
        u0 = rng.uniform(-1, 1, f.n)
        u0[0] = 1.0 if abs(u0[0]) < 0.1 else u0[0]
        x0 = rng.uniform(-0.5, 0.5, f.n)
        s0 = FlowState(x0, u0)
        checks = ["conserve"] + (["orbital", "trace"] if f.is_product() else [])
        res = flow_checks(f, s0, T, dt, checks)
        flow_stage.update(status="ran", u0=[float(v) for v in u0], x0=[float(v) for v in x0],
                          alpha0=float(alpha_of(f, u0)), checks=res,
                          passed=all(c["passed"] for c in res.values()))
    else:
        flow_stage.update(status="skipped", reasons=["frame has brackets outside degree (-1,-1) -> -2"],
                          passed=True)
    stages.append(flow_stage)
    return all(s["passed"] for s in stages), stages


def cmd_full_suite(cfg: RunConfig, args) -> int:
    f = _load_frame(args.file)
    passed, stages = full_suite(f, cfg.layers, cfg.seed, args.T, args.dt)
    failed = [s["stage"] for s in stages if not s["passed"]]
    res = {"stages": stages, "failed_stages": failed}
    return _emit(cfg, _envelope(cfg, passed, res, {"layers": cfg.layers, "T": args.T, "dt": args.dt}))


# -- parser -----------------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json", dest="fmt")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None,
                        help=f"report directory (default: ${ENV_OUT} if set)")

    p = argparse.ArgumentParser(prog="carnotfas", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"carnotfas {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-algebra", parents=[common], help="validate and classify a graded algebra")
    s.add_argument("file")
    s.set_defaults(func=cmd_check_algebra)

    s = sub.add_parser("build-frame", parents=[common], help="build the adapted frame of a block list")
    s.add_argument("file")
    s.set_defaults(func=cmd_build_frame)

    s = sub.add_parser("build-fas", parents=[common], help="write the layered system to --out")
    s.add_argument("file")
    s.add_argument("--layers", type=_positive_int, default=4)
    s.set_defaults(func=cmd_build_fas)

    s = sub.add_parser("verify-lemmas", parents=[common], help="extract lemma coefficients")
    s.add_argument("file")
    s.add_argument("--lemma", choices=LEMMAS, required=True)
    s.add_argument("--block", type=_positive_int, default=None)
    s.add_argument("--force", action="store_true", help="run even if the standing hypotheses fail")
    s.set_defaults(func=cmd_verify_lemmas)

    s = sub.add_parser("verify-appendix-a", parents=[common], help="random codim-3 ad-surjectivity sweep")
    s.add_argument("--trials", type=_positive_int, default=500)
    s.add_argument("--m-max", type=_positive_int, default=7, dest="m_max")
    s.set_defaults(func=cmd_verify_appendix_a)

    s = sub.add_parser("flow", parents=[common], help="integrate normal extremals")
    s.add_argument("file")
    s.add_argument("--u0", type=float, nargs="+", default=None)
    s.add_argument("--x0", type=float, nargs="+", default=None)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--dt", type=_positive_float, default=1e-3)
    s.add_argument("--metric", choices=("g1", "g2"), default="g1")
    s.add_argument("--check", choices=("orbital", "trace", "conserve"), action="append", default=None)
    s.add_argument("--csv", default=None, help="dump the trajectory to this CSV file")
    s.set_defaults(func=cmd_flow)

    s = sub.add_parser("full-suite", parents=[common], help="run every stage on one frame")
    s.add_argument("file")
    s.add_argument("--layers", type=_positive_int, default=4)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--dt", type=_positive_float, default=1e-3)
    s.set_defaults(func=cmd_full_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "check", "x") is None:
        args.check = ["conserve"]
    cfg = RunConfig(
        command=args.command,
        inputs=[args.file] if getattr(args, "file", None) else [],
        layers=getattr(args, "layers", 4),
        seed=args.seed,
        out_dir=args.out or os.environ.get(ENV_OUT) or None,
        fmt=args.fmt,
    )
    try:
        return args.func(cfg, args)
    except UsageError as exc:
        print(f"carnotfas {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
