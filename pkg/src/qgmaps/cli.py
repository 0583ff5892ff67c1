"""Command-line entry point: ``qgmaps <subcommand> ...``.

Exit status 0 on success, 2 on validation errors (a JSON object on standard
error), 64 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    BALL_WINDOW,
    ScalingSample,
    comparison_table,
    estimate_dimension_ball,
    estimate_dimension_fss,
    profile_from_dict,
    profile_to_json,
)
from .errors import QGMapsError, ValidationError
from .exponents import Phase, exponent_set, model_point_from_a, model_point_from_n, potts_point
from .gasket import DecoratedQuadrangulation, extract_gasket, trace_loops, weight_O_n
from .maps import load, save, serialize
from .sampler import (
    LoopParams,
    SampleSpec,
    derived_seed,
    make_rng,
    sample_decorated_quadrangulation,
    sample_map,
    sampling_campaign,
)
from .weights import DEFAULT_K_MAX, BaseSequence, build_weight_sequence, quadrangulation_weights

EXIT_VALIDATION = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """17 significant digits, '.' decimal point, independent of locale."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def parse_range(text: str) -> list[float]:
    """``a:b:step`` (inclusive of b up to rounding), or a comma list."""
    if ":" not in text:
        return [float(v) for v in text.split(",") if v]
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range {text!r} must look like a:b:step")
    a, b, step = (float(p) for p in parts)
    if step <= 0 or b < a:
        raise UsageError(f"range {text!r} needs step > 0 and a <= b")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [a + i * step for i in range(count)]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else fmt(x)
    if isinstance(x, Phase):
        return x.value
    return x


def dumps(doc) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, separators=(",", ":"))


def write_csv(rows: list[dict], out) -> None:
    if not rows:
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([fmt(v) for v in r.values()])
    out.write(buf.getvalue())


def emit(rows: list[dict], fmt_name: str, out=None) -> None:
    out = out or sys.stdout
    if fmt_name == "csv":
        write_csv(rows, out)
    else:
        for r in rows:
            out.write(dumps(r) + "\n")


# model selection

def _add_model(p, *, with_q: bool = True, with_pure: bool = True):
    g = p.add_argument_group("model (exactly one)")
    g.add_argument("--a", help="tail exponent a in (3/2, 5/2]; a:b:step for a grid")
    g.add_argument("--n", help="loop weight n in [0, 2] (with --phase); a:b:step for a grid")
    g.add_argument("--phase", choices=["dense", "dilute"], help="branch used with --n")
    if with_q:
        g.add_argument("--Q", help="Potts parameter Q in [0, 4] (dense branch)")
    if with_pure:
        g.add_argument("--pure", action="store_true", help="pure gravity: critical quadrangulations")


def _model_choice(args) -> str:
    chosen = [k for k in ("a", "n", "Q", "pure") if getattr(args, k, None) not in (None, False)]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --a, --n (with --phase), --Q" +
                         (", --pure" if hasattr(args, "pure") else ""))
    if chosen[0] == "n" and args.phase is None:
        raise UsageError("--n needs --phase dense|dilute")
    return chosen[0]


def _points(args):
    kind = _model_choice(args)
    if kind == "a":
        return [model_point_from_a(a) for a in parse_range(args.a)]
    if kind == "n":
        return [model_point_from_n(n, args.phase) for n in parse_range(args.n)]
    if kind == "Q":
        return [potts_point(q) for q in parse_range(args.Q)]
    raise UsageError("--pure has no exponent table; use --a 2.5")


def _single(text: str, flag: str) -> float:
    vals = parse_range(text)
    if len(vals) != 1:
        raise UsageError(f"{flag} takes a single value here")
    return vals[0]


def _weights_for(args):
    """Weight sequence for sampling; n = 0 means plain quadrangulations."""
    kind = _model_choice(args)
    if kind == "pure":
        return quadrangulation_weights(), None
    if kind == "a":
        a = _single(args.a, "--a")
        model_point_from_a(a)
        return build_weight_sequence(BaseSequence.pure_power(a)), a
    if kind == "Q":
        pt = potts_point(_single(args.Q, "--Q"))
    else:
        pt = model_point_from_n(_single(args.n, "--n"), args.phase)
    if pt.n == 0.0:
        return quadrangulation_weights(), None
    return build_weight_sequence(BaseSequence.pure_power(pt.a)), pt.a


# subcommands

def cmd_exponents(args) -> int:
    rows = []
    for pt in _points(args):
        row = {"a": pt.a, "n": pt.n, "g": pt.g, "kappa": pt.kappa, "c": pt.c,
               "gamma_sq": pt.gamma_sq, "phase": pt.phase.value, "boundary": pt.boundary}
        row.update(exponent_set(pt).as_dict())
        rows.append(row)
    emit(rows, args.format)
    return 0


def cmd_weights(args) -> int:
    if _model_choice(args) != "a":
        raise UsageError("weights needs --a")
    rows = []
    for a in parse_range(args.a):
        w = build_weight_sequence(BaseSequence.pure_power(a), k_max=args.k_max_series)
        c = w.constants()
        for k in range(1, args.k_max + 1):
            rows.append({"a": a, "k": k, "q_k": w.q(k), "asymptote": w.asymptote(k),
                         "c_circ": c["c_circ"], "beta": c["beta"], "tail_bound": c["tail_bound"]})
    emit(rows, args.format)
    return 0


def _sample_task(args, weights, params, index: int):
    seed = derived_seed(args.seed, index)
    spec = SampleSpec(weights, (args.size_min, args.size_max), args.max_attempts, seed,
                      marked=params is None and args.boundary == 0)
    rng = make_rng(seed)
    if params is None:
        lm = sample_map(spec, boundary=args.boundary, rng=rng, check=args.check)
        m = lm.map
        extra = {}
    else:
        s = sample_decorated_quadrangulation(params, spec, boundary=args.boundary or 2, rng=rng)
        m = s.decorated.to_map()
        extra = trace_loops(s.decorated).counts()
        extra["holes"] = s.holes
    record = {"index": index, "seed": seed, "E": m.n_edges, "V": m.n_vertices, "F": m.n_faces,
              "max_face_degree": int(m.face_degrees.max())}
    record.update(extra)
    return serialize(m), record


def cmd_sample(args) -> int:
    weights, _ = _weights_for(args)
    decorated = args.n is not None or args.Q is not None
    params = None
    if decorated:
        params = LoopParams(_loop_weight(args), args.h0, args.h1, args.h2, args.recursion_floor, args.max_depth,
                            args.edge_budget)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def task(i):
        return _sample_task(args, weights, params, i)

    with ThreadPoolExecutor(max_workers=args.threads or os.cpu_count() or 1) as pool:
        results = list(pool.map(task, range(args.samples)))
    with open(out / "index.jsonl", "w", encoding="utf-8", newline="\n") as idx:
        for i, (text, rec) in enumerate(results):
            name = f"sample_{i:05d}.pmap.json"
            (out / name).write_text(text, encoding="utf-8")
            rec["file"] = name
            idx.write(dumps(rec) + "\n")
    return 0


def _loop_weight(args) -> float:
    if args.Q is not None:
        return potts_point(_single(args.Q, "--Q")).n
    return _single(args.n, "--n")


def cmd_gasket(args) -> int:
    dq = DecoratedQuadrangulation.from_map(load(args.inp))
    t = trace_loops(dq)
    g = extract_gasket(dq)
    w = weight_O_n(dq, 1, 1, 1, 1)
    report = {
        "N0": t.N0, "N1": t.N1, "N2": t.N2, "L": t.L,
        "loop_lengths": sorted(len(lp) for lp in t.loops),
        "W_O_exponents": w.exponents,
        "W_O": f"n^{t.L} h0^{t.N0} h1^{t.N1} h2^{t.N2}",
        "gasket_face_degrees": {str(k): v for k, v in sorted(g.face_degree_multiset.items())},
        "W_q_factors": {str(k): v for k, v in sorted(g.w_q_factors.items())},
        "W_q": " ".join(f"q_{k}^{v}" if v > 1 else f"q_{k}" for k, v in sorted(g.w_q_factors.items())),
        "removed_area": g.removed_area,
        "gasket": {"V": g.gasket.map.n_vertices, "E": g.gasket.map.n_edges,
                   "F": g.gasket.map.n_faces, "p": g.gasket.p},
    }
    if args.out:
        save(g.gasket.map, args.out)
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=1) + "\n")
    return 0


def _fit_window(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError("--fit-window takes lo:hi")
    return float(parts[0]), float(parts[1])


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh):
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"{path}: bad JSON on line {line_no + 1}: {exc.msg}", line_no) from None


def cmd_measure(args) -> int:
    fit = _fit_window(args.fit_window)
    out = Path(args.out) if args.out else None
    if args.inp:
        samples = [ScalingSample.from_dict(d) for d in _read_jsonl(args.inp)]
        profiles = [profile_from_dict(d) for d in _read_jsonl(args.profiles)] if args.profiles else []
    else:
        weights, _ = _weights_for(args)
        tops = [int(round(v)) for v in parse_range(args.sizes)]
        windows = [(max(1, int(t / args.window_ratio)), t) for t in tops]
        spec = SampleSpec(weights, (1, 1), args.max_attempts, args.seed)
        res = sampling_campaign(spec, windows, args.samples, threads=args.threads, check=args.check)
        samples = res.samples
        last = len(windows) - 1
        profiles = [p for p, s in zip(res.profiles, res.samples) if s.window == last]
        if out:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "samples.jsonl", "w", encoding="utf-8", newline="\n") as fh:
                fh.writelines(s.to_json() + "\n" for s in res.samples)
            with open(out / "profiles.jsonl", "w", encoding="utf-8", newline="\n") as fh:
                fh.writelines(profile_to_json(p) + "\n" for p in profiles)
            if res.failures:
                with open(out / "failures.jsonl", "w", encoding="utf-8", newline="\n") as fh:
                    fh.writelines(dumps({"window": w, "index": i, "error": e}) + "\n" for w, i, e in res.failures)
        for w, i, e in res.failures:
            sys.stderr.write(dumps({"warning": "AttemptsExhausted", "window": w, "index": i, "message": e}) + "\n")
    rows = []
    if args.method in ("fss", "both"):
        rows.append(estimate_dimension_fss(samples, seed=args.bootstrap_seed).row())
    if args.method in ("ball", "both") and (profiles or args.method == "ball"):
        rows.append(estimate_dimension_ball(profiles, fit, seed=args.bootstrap_seed).row())
    if out:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "estimates.csv", "w", encoding="utf-8", newline="\n") as fh:
            write_csv(rows, fh)
    write_csv(rows, sys.stdout)
    return 0


def cmd_compare(args) -> int:
    measured = None
    if args.measured:
        measured = {}
        with open(args.measured, encoding="utf-8") as fh:
            for r in csv.DictReader(fh):
                measured[(args.phase, float(r["c"]))] = float(r["d_hat"])
    rows = []
    for r in comparison_table(parse_range(args.c_grid), measured, args.phase):
        rows.append({"c": r.c, "D1": r.d1, "D2": r.d2, "D_H": r.d_h, "measured": r.measured})
    emit(rows, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qgmaps", description="Random planar maps, O(n) gaskets and their dimensions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    e = sub.add_parser("exponents", help="closed-form exponents on the critical line",
                       description="Exponent table along the critical O(n) line: coupling g, kappa, "
                       "central charge, Liouville gamma^2, Euclidean watermelon exponents, their KPZ "
                       "images and the surface dimension D_H = 4 (column dim_surface). Anchors: "
                       "the parameter relations, the KPZ relation, the Liouville parameter, "
                       "the universal dimension identity.")
    _add_model(e, with_pure=False)
    e.add_argument("--format", choices=["json", "csv"], default="json")
    e.set_defaults(func=cmd_exponents)

    w = sub.add_parser("weights", help="heavy-tailed face weights q_k",
                       description="Critical weight sequence q_k ~ c beta^k k^-a with tuned constants "
                       "(c, beta) and the certified tail bound of the auxiliary series. "
                       "Anchor: the heavy-tailed weight sequence.")
    w.add_argument("--a", required=True, help="tail exponent; a:b:step for a grid")
    w.add_argument("--k-max", type=int, default=10, help="print q_k for k = 1..K (default 10)")
    w.add_argument("--k-max-series", type=int, default=DEFAULT_K_MAX,
                   help="explicit terms before the certified tail (default %(default)s)")
    w.add_argument("--format", choices=["json", "csv"], default="csv")
    w.set_defaults(func=cmd_weights, n=None, Q=None, phase=None)

    s = sub.add_parser("sample", help="sample Boltzmann maps or loop-decorated quadrangulations",
                       description="Sample maps through labelled mobiles. With --a or --pure: pointed "
                       "Boltzmann maps. With --n/--Q: loop-decorated quadrangulations built by filling "
                       "the faces of a gasket with rings of loop quads (face weights of the gasket "
                       "decomposition). Writes PMAP-JSON files and index.jsonl to --out. Anchors: the Boltzmann "
                       "weights W_q, the overall face weight of a filled face.")
    _add_model(s)
    s.add_argument("--h0", type=float, default=1.0)
    s.add_argument("--h1", type=float, default=1.0)
    s.add_argument("--h2", type=float, default=1.0)
    s.add_argument("--size-min", type=int, required=True)
    s.add_argument("--size-max", type=int, required=True)
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--boundary", type=int, default=0, help="half-length p of a boundary face (0: none)")
    s.add_argument("--recursion-floor", type=int, default=2)
    s.add_argument("--max-depth", type=int, default=64)
    s.add_argument("--edge-budget", type=int, default=2 * 10**5)
    s.add_argument("--max-attempts", type=int, default=10**7)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--check", action="store_true", help="verify labels against BFS for every sample")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    g = sub.add_parser("gasket", help="loop statistics and gasket of a decorated map",
                       description="Trace loops of a decorated quadrangulation (N0, N1, N2, L and the "
                       "loop weight n^L h0^N0 h1^N1 h2^N2), extract the gasket and report its face "
                       "weight prod q_k. Anchors: the loop-model weight, the gasket total weight.")
    g.add_argument("--in", dest="inp", required=True)
    g.add_argument("--out", help="write the gasket as PMAP-JSON")
    g.set_defaults(func=cmd_gasket)

    m = sub.add_parser("measure", help="dimension estimates from a sampling campaign",
                       description="Finite-size scaling of the mean distance to the marked vertex and "
                       "ball-growth fits. Either read --in samples.jsonl [--profiles profiles.jsonl] or "
                       "run a campaign (model flags, --sizes). Anchors: the exact Hausdorff dimension "
                       "2a - 1 of heavy-tailed maps and D_H = 4 for pure gravity.")
    _add_model(m)
    m.add_argument("--in", dest="inp")
    m.add_argument("--profiles")
    m.add_argument("--sizes", default="1000,3162,10000,31623,100000",
                   help="upper ends of the size windows (comma list or a:b:step)")
    m.add_argument("--window-ratio", type=float, default=1.2, help="window = [top/ratio, top]")
    m.add_argument("--samples", type=int, default=200)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--bootstrap-seed", type=int, default=20240501)
    m.add_argument("--threads", type=int, default=None)
    m.add_argument("--max-attempts", type=int, default=10**7)
    m.add_argument("--method", choices=["fss", "ball", "both"], default="both")
    m.add_argument("--fit-window", default=f"{BALL_WINDOW[0]}:{BALL_WINDOW[1]}")
    m.add_argument("--check", action="store_true")
    m.add_argument("--out", help="directory for samples.jsonl, profiles.jsonl and estimates.csv")
    m.set_defaults(func=cmd_measure)

    c = sub.add_parser("compare", help="rival dimension formulas against D_H = 4",
                       description="Table of the two earlier conjectures D1(c), D2(c) next to the "
                       "constant 4 over a grid of central charges c <= 1. Anchors: the first and "
                       "second rival formulas, the g-independence of D_H.")
    c.add_argument("--c-grid", required=True, help="a:b:step or comma list")
    c.add_argument("--measured", help="CSV with columns c,d_hat to join")
    c.add_argument("--phase", default=None)
    c.add_argument("--format", choices=["json", "csv"], default="csv")
    c.set_defaults(func=cmd_compare)
    return p


_VALUE_FLAGS = {"--c-grid", "--a", "--n", "--Q", "--sizes"}


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Let range values start with '-' (``--c-grid -2:1:0.25``)."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _VALUE_FLAGS and nxt and nxt.startswith("-") and nxt[1:2].replace(".", "0").isdigit():
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_negative_values(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"qgmaps: error: {exc}\n")
        return EXIT_USAGE
    except QGMapsError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        index = getattr(exc, "index", None)
        if index is not None:
            err["index"] = index
        sys.stderr.write(dumps(err) + "\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
