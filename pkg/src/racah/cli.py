"""Command-line entry point ``racah``.

Exit codes: 0 success, 1 check failed, 2 bad input, 3 numerical breakdown.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, io
from .baselines import Algorithm, AlgorithmId, generate as generate_alg
from .core import validate_params
from .errors import FormatError, NumericalBreakdown, RacahError
from .imst import ImStConfig, NS_STRATEGIES, PART3_GUARDS, generate as imst_generate

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_BREAKDOWN = 0, 1, 2, 3

log = logging.getLogger("racah")


class InputError(Exception):
    """Flag combination rejected before any computation."""


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _finite(x):
    return None if x is None or not math.isfinite(x) else x


def _dump(data, path=None):
    text = json.dumps(data, indent=2, default=_json_default)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


# -- shared flag groups ----------------------------------------------------

def _add_params(sp):
    g = sp.add_argument_group("parameters")
    g.add_argument("--a", type=float, default=0.0)
    g.add_argument("--b", type=float, default=None, help="upper end (exclusive); b = a + N")
    g.add_argument("--n", type=int, default=None, help="size N, alternative to --b")
    g.add_argument("--alpha", type=float, default=0.0)
    g.add_argument("--beta", type=float, default=0.0)


def _add_imst(sp):
    g = sp.add_argument_group("ImSt settings")
    g.add_argument("--threshold", type=float, default=1e-5, help="stabilization threshold")
    g.add_argument("--ns-strategy", choices=NS_STRATEGIES, default="auto")
    g.add_argument("--part3-guard", choices=PART3_GUARDS, default="prose")
    g.add_argument("--order", type=int, default=None, help="highest degree to compute")


def _params(args):
    if (args.b is None) == (args.n is None):
        raise InputError("give exactly one of --b and --n")
    b = args.b if args.b is not None else args.a + args.n
    return validate_params(args.a, b, args.alpha, args.beta)


def _config(args, order=None):
    return ImStConfig(threshold=args.threshold, ns_strategy=args.ns_strategy,
                      max_order=order if order is not None else args.order,
                      part3_guard=args.part3_guard)


def _alg(text):
    try:
        return AlgorithmId.parse(text)
    except ValueError as exc:
        raise InputError(f"unknown algorithm {text!r}") from exc


def _build(alg: AlgorithmId, p, args, general=False):
    """Matrix and (for ImSt) stabilization report."""
    report = None
    if alg.id is Algorithm.IMST:
        m, report = imst_generate(p, _config(args), allow_special=not general)
        if alg.gsop_post:
            from .baselines import gsop_refine

            m = gsop_refine(m)
    else:
        m = generate_alg(alg, p, getattr(args, "order", None))
    return m, report


# -- commands --------------------------------------------------------------

def cmd_gen(args):
    p = _params(args)
    m, report = _build(_alg(args.alg), p, args, general=args.no_special)
    info = {"params": p.as_dict(), "algorithm": m.algorithm,
            "ortho_error": _finite(analysis.orthogonality_error(m)),
            "rows": m.values.shape[0]}
    if report is not None:
        info["stabilization"] = report.to_dict()
    if args.output:
        io.write_matrix_csv(m, args.output)
        _dump(info, args.report or f"{args.output}.report.json")
    else:
        sys.stdout.write(io.format_matrix_csv(m))
        if args.report:
            _dump(info, args.report)
        else:
            print(json.dumps(info, default=_json_default), file=sys.stderr)
    return EXIT_OK


def cmd_check(args):
    try:
        m = io.read_matrix_csv(args.file)
    except OSError as exc:
        raise FormatError(f"cannot read {args.file}: {exc}") from exc
    err = analysis.orthogonality_error(m)
    print(f"E={err:.6e}")
    return EXIT_OK if err <= args.threshold else EXIT_CHECK


def _partition(p, args):
    """Cell masks named after the ImSt regions of a general-path run."""
    _, rep = imst_generate(p, _config(args), allow_special=False)
    size = p.n_size
    n = np.arange(size)[:, None]
    x = np.arange(size)[None, :]
    inner_n = n >= 2
    right = (x >= rep.ns) & (x <= size - 2)
    left = (x >= 1) & (x < rep.ns)
    return {
        "rows01": np.broadcast_to(n <= 1, (size, size)),
        "outer_columns": inner_n & ((x == 0) | (x == size - 1)),
        "part1": inner_n & right & (n < rep.indN1),
        "part2": inner_n & left & (n <= rep.ind0),
        "part3": inner_n & right & (n >= rep.indN1),
        "part4": inner_n & left & (n > rep.ind0),
    }


def cmd_compare(args):
    p = _params(args)
    alg1, alg2 = _alg(args.alg1), _alg(args.alg2)
    if Algorithm.ORACLE in (alg1.id, alg2.id) and p.n_size > 256:
        raise InputError("the oracle is limited to N <= 256")
    m1, _ = _build(alg1, p, args, general=args.general1)
    m2, _ = _build(alg2, p, args, general=args.general2)
    rows = min(m1.values.shape[0], m2.values.shape[0])
    diff = np.abs(m1.values[:rows] - m2.values[:rows])
    out = {"params": p.as_dict(), "alg1": str(alg1), "alg2": str(alg2),
           "max_abs": float(diff.max()), "rms": float(np.sqrt(np.mean(diff ** 2))), "parts": {}}
    if p.n_size >= 3:
        for name, mask in _partition(p, args).items():
            sel = diff[mask[:rows]]
            out["parts"][name] = {"cells": int(sel.size),
                                  "max_abs": float(sel.max()) if sel.size else 0.0}
    _dump(out, args.output)
    return EXIT_OK


def cmd_bench(args):
    records = []
    try:
        for name in args.alg.split(","):
            records += analysis.bench(_alg(name), args.sizes, args.rule, args.repeats, args.t_max)
    except KeyboardInterrupt:
        log.warning("interrupted, writing partial results")
    _dump([r.to_json_dict() for r in records], args.output)
    return EXIT_OK


def cmd_maxsize(args):
    res = analysis.max_size_search(_alg(args.alg), args.rule, args.e_max, args.t_max,
                                   ceiling=args.ceiling, verify=not args.no_verify)
    data = res.to_dict()
    for t in data["trials"]:
        t["error"] = _finite(t["error"])
    _dump(data, args.output)
    return EXIT_OK


def cmd_restrict(args):
    if args.table2:
        table = analysis.table2(args.n or 16, alg=_alg(args.alg))
        _dump({f"rho={rho},a={a}": diag for (rho, a), diag in table.items()}, args.output)
        return EXIT_OK
    p = _params(args)
    res = analysis.restriction_study(p, args.rho, alg=_alg(args.alg))
    if args.output:
        Path(args.output).write_text(res.to_csv())
    else:
        sys.stdout.write(res.to_csv())
    return EXIT_OK


def _default_orders(size):
    orders = {0, 1, size}
    step = max(size // 16, 1)
    orders.update(range(step, size, step))
    return sorted(orders)


def cmd_reconstruct(args):
    if args.random:
        pixels = io.random_image(args.random[0], args.random[1], args.seed)
    elif args.input:
        try:
            pixels = io.read_pgm(args.input)
        except OSError as exc:
            raise FormatError(f"cannot read {args.input}: {exc}") from exc
    else:
        raise InputError("give --input or --random")
    img = analysis.ImageGrid(pixels)
    h, w = img.shape
    alg = _alg(args.alg)
    mats = []
    for size in (h, w):
        p = validate_params(args.a, args.a + size, args.alpha, args.beta)
        mats.append(_build(alg, p, args)[0])
    rx, ry = mats
    if rx.values.shape[0] != h or ry.values.shape[0] != w:
        raise InputError("reconstruction needs full-order matrices")
    mom = analysis.moments_2d(img, rx, ry)
    orders = args.orders or _default_orders(min(h, w))
    if any(not 0 <= o <= min(h, w) for o in orders):
        raise InputError(f"orders must lie in 0..{min(h, w)}")
    metrics, rec = [], None
    for order in orders:
        rec = analysis.reconstruct_2d(mom, rx, ry, order)
        metrics.append({"order": order, "nmse": analysis.nmse(img, rec),
                        "psnr": _finite(analysis.psnr(img, rec))})
    if args.output and rec is not None:
        io.write_pgm(args.output, rec.pixels)
    _dump({"shape": [h, w], "algorithm": str(alg), "metrics": metrics}, args.metrics)
    return EXIT_OK


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="racah", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate a matrix as CSV")
    _add_params(sp)
    _add_imst(sp)
    sp.add_argument("--alg", default="imst", help="imst, zhu_n, zhu_s, daoui, oracle; +gsop suffix")
    sp.add_argument("--no-special", action="store_true", help="force the general ImSt path")
    sp.add_argument("-o", "--output")
    sp.add_argument("--report", help="JSON report path (default: <output>.report.json)")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("check", help="orthogonality error of a CSV matrix")
    sp.add_argument("file")
    sp.add_argument("--threshold", type=float, default=1e-3)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("compare", help="entrywise difference of two generators")
    _add_params(sp)
    _add_imst(sp)
    sp.add_argument("--alg1", default="imst")
    sp.add_argument("--alg2", default="oracle")
    sp.add_argument("--general1", action="store_true", help="general ImSt path for alg1")
    sp.add_argument("--general2", action="store_true", help="general ImSt path for alg2")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("bench", help="timing benchmark")
    sp.add_argument("--alg", default="imst", help="comma-separated algorithm ids")
    sp.add_argument("--sizes", type=_int_list, default=[256, 512, 1024])
    sp.add_argument("--rule", default="timing", choices=sorted(analysis.PARAM_RULES))
    sp.add_argument("--repeats", type=int, default=10)
    sp.add_argument("--t-max", type=float, default=60.0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("maxsize", help="largest N with E <= e-max")
    sp.add_argument("--alg", default="imst")
    sp.add_argument("--rule", default="col1", choices=sorted(analysis.PARAM_RULES))
    sp.add_argument("--e-max", type=float, default=1e-3)
    sp.add_argument("--t-max", type=float, default=60.0)
    sp.add_argument("--ceiling", type=int, default=None)
    sp.add_argument("--no-verify", action="store_true", help="skip the monotonicity rescan")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_maxsize)

    sp = sub.add_parser("restrict", help="covariance restriction study")
    _add_params(sp)
    sp.add_argument("--rho", type=float, default=0.9)
    sp.add_argument("--alg", default="imst")
    sp.add_argument("--table2", action="store_true",
                    help="diagonals for a = alpha in {0,10,30,50}, beta = 0, three rho values")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_restrict)

    sp = sub.add_parser("reconstruct", help="moments and reconstruction of an image")
    sp.add_argument("--input", help="8-bit binary PGM")
    sp.add_argument("--random", type=int, nargs=2, metavar=("H", "W"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--a", type=float, default=0.0)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--beta", type=float, default=0.0)
    _add_imst(sp)
    sp.add_argument("--alg", default="imst")
    sp.add_argument("--orders", type=_int_list, default=None)
    sp.add_argument("-o", "--output", help="PGM of the last requested order")
    sp.add_argument("--metrics", help="metrics JSON path (default stdout)")
    sp.set_defaults(func=cmd_reconstruct)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NumericalBreakdown as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    except (RacahError, InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
