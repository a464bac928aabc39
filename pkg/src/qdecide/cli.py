"""Command-line front end.

Exit codes: 0 witness / true, 2 exhausted / unknown, 1 error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .core.scalars import DEFAULT_PRECISION
from .errors import QDecideError
from .instances import (
    FORMULA_KINDS,
    GadgetInstance,
    ThresholdInstance,
    instance_kind,
    load_instance,
)

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


def _header(args):
    print(f"# qdecide {__version__} seed={args.seed} precision={args.precision} jobs={args.jobs}")


def _dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def _encode(inst):
    from .encoders import encode
    return encode(inst)


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def cmd_encode(args) -> int:
    from .formula.prenex import formula_stats
    from .formula.smt import export_smt
    from .formula.syntax import formula_to_json
    inst = load_instance(args.instance)
    kind = instance_kind(inst)
    if kind not in FORMULA_KINDS:
        raise QDecideError(f"kind {kind!r} has no formula encoder")
    f = _encode(inst)
    stats = formula_stats(f)
    if args.out:
        _dump(formula_to_json(f), args.out)
    if args.smt:
        with open(args.smt, "w", encoding="utf-8") as fh:
            fh.write(export_smt(f))
    for k, v in stats.as_dict().items():
        print(f"{k}: {v}")
    return EXIT_OK


def _read_witness(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_check(args) -> int:
    inst = load_instance(args.instance)
    wit = _read_witness(args.witness)
    kind = instance_kind(inst)
    if kind in FORMULA_KINDS:
        from .formula.witness import check_witness
        ok = check_witness(_encode(inst), wit["assignment"])
    else:
        word = tuple(wit["word"])
        ok = _check_word(inst, kind, word, wit.get("strict", True), args.precision)
    print("true" if ok else "false")
    return EXIT_OK if ok else EXIT_NEGATIVE


def _check_word(inst, kind, word, strict, precision):
    from .search import _compare, full_path_overlap
    if not word:
        return False
    if kind == "pcp":
        return inst.is_solution(word)
    if kind == "mortality":
        p = inst.matrices[word[0] - 1]
        for i in word[1:]:
            p = p.matmul(inst.matrices[i - 1])
        return all(v == 0 for v in list(p.re.flat) + list(p.im.flat))
    if kind == "threshold":
        val = full_path_overlap(inst.channels, inst.rho, inst.phi, word, precision)
        return _compare(val, inst.lam, strict) is True
    b = _build(inst, precision)
    val = full_path_overlap(b.channels, b.rho, b.phi, word, precision)
    verdict = _compare(val, b.lam, strict)
    if verdict is None and not strict and b.block_value(word) == 0:
        return True
    return verdict is True


def _build(inst: GadgetInstance, precision=None):
    from .gadgets import build_prop1
    return build_prop1(inst.lam, inst.phi, inst.matrices, inst.x, inst.y,
                       precision=precision or inst.precision)


def _print_outcome(out):
    print(f"verdict: {out.verdict}")
    print(f"depth: {out.depth}")
    if out.word is not None:
        print("word: " + " ".join(str(i) for i in out.word))
    for k, v in out.stats.items():
        print(f"{k}: {v}")


def cmd_search(args) -> int:
    from .search import mortality_search, pcp_search, threshold_search
    inst = load_instance(args.instance)
    kind = instance_kind(inst)
    if kind in FORMULA_KINDS:
        from .formula.witness import numeric_search
        res = numeric_search(_encode(inst), budget=args.restarts, seed=args.seed)
        print(f"status: {res.status}")
        print(f"residual: {res.residual:.3e}")
        if args.witness_out and res.assignment is not None:
            _dump({"assignment": {k: str(v) for k, v in res.assignment.items()}}, args.witness_out)
        return EXIT_OK if res.status == "witness" else EXIT_NEGATIVE
    if kind == "pcp":
        out = pcp_search(inst, max_overhang=args.max_overhang, max_depth=args.depth, claus=args.claus)
    elif kind == "mortality":
        out = mortality_search(inst.matrices, max_depth=args.depth)
    elif kind == "threshold":
        inst: ThresholdInstance
        out = threshold_search(inst.channels, inst.rho, inst.phi, inst.lam, strict=args.strict,
                               max_depth=args.depth, precision=args.precision)
    else:
        b = _build(inst, args.precision)
        out = threshold_search(None, None, None, None, strict=args.strict, max_depth=args.depth,
                               bundle=b, precision=args.precision)
    _print_outcome(out)
    if args.witness_out and out.word is not None:
        _dump({"word": list(out.word), "strict": args.strict, "certificate": out.certificate}, args.witness_out)
    if args.report:
        from .report import plot_search_stats
        print("figure: " + plot_search_stats(out, os.path.join(args.report, f"search_{kind}.png")))
    return EXIT_OK if out.found else EXIT_NEGATIVE


def cmd_gadget(args) -> int:
    import itertools
    from .gadgets import bundle_to_json, verify_prop1_identity
    inst = load_instance(args.instance)
    if not isinstance(inst, GadgetInstance):
        raise QDecideError("gadget commands need a 'gadget' instance")
    b = _build(inst, args.precision)
    if args.action == "build":
        doc = bundle_to_json(b)
        if args.out:
            _dump(doc, args.out)
        for k, v in b.checks.items():
            print(f"{k}: {v}")
        print(f"nu: {b.nu}  c: {b.c}  eps: {b.eps}  delta2: {b.delta2}")
        return EXIT_OK if b.checks.get("all") else EXIT_NEGATIVE
    checks = []
    for n in range(1, args.max_len + 1):
        for word in itertools.product(range(1, b.k + 1), repeat=n):
            checks.append(verify_prop1_identity(b, word))
    tol = Fraction(1, 10**20)
    bad = [c for c in checks if not (c.holds and c.width <= tol)]
    worst = max((c.width for c in checks), default=Fraction(0))
    print(f"words: {len(checks)}")
    print(f"failures: {len(bad)}")
    print(f"max_width: {float(worst):.3e}")
    if args.report:
        from .report import plot_identity_checks, plot_overlaps
        print("figure: " + plot_identity_checks(checks, os.path.join(args.report, "identity_widths.png")))
        listing = [(c.word, c.lhs) for c in checks]
        print("figure: " + plot_overlaps(listing, b.lam, os.path.join(args.report, "overlaps.png")))
    return EXIT_OK if not bad else EXIT_NEGATIVE


def cmd_sweep(args) -> int:
    from .encoders import sweep
    inst = load_instance(args.instance)
    if instance_kind(inst) not in FORMULA_KINDS:
        raise QDecideError("sweep needs a problem instance")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
    rows = sweep(inst, args.n_max, backend=args.backend, budget=args.restarts, seed=args.seed,
                 out_dir=args.out_dir)
    for r in rows:
        extra = f" residual={r.residual:.3e}" if r.residual is not None else ""
        path = f" file={r.path}" if r.path else ""
        print(f"n={r.n}: {r.status}{extra}{path}")
    if args.report and args.backend == "numeric":
        from .report import plot_sweep
        print("figure: " + plot_sweep(rows, os.path.join(args.report, "sweep.png")))
    return EXIT_OK if any(r.status == "witness" for r in rows) else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="interval bits")
    common.add_argument("--jobs", type=int, default=1, help="worker cap (runs are sequential)")

    p = argparse.ArgumentParser(prog="qdecide", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qdecide {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    e = sub.add_parser("encode", parents=[common], help="encode an instance as a formula")
    e.add_argument("instance")
    e.add_argument("--out", help="formula JSON output")
    e.add_argument("--smt", help="SMT-LIB2 output")
    e.add_argument("--stats", action="store_true", help="print statistics only")
    e.set_defaults(fn=cmd_encode)

    c = sub.add_parser("check", parents=[common], help="check a witness exactly")
    c.add_argument("instance")
    c.add_argument("witness")
    c.set_defaults(fn=cmd_check)

    s = sub.add_parser("search", parents=[common], help="bounded search for a witness")
    s.add_argument("instance")
    s.add_argument("--depth", type=int, default=8)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--strict", dest="strict", action="store_true", default=True)
    g.add_argument("--nonstrict", dest="strict", action="store_false")
    s.add_argument("--max-overhang", type=int, default=64)
    s.add_argument("--claus", action="store_true", help="only words 1 w k")
    s.add_argument("--restarts", type=int, default=12, help="numeric search restarts")
    s.add_argument("--witness-out")
    s.add_argument("--report", help="directory for figures")
    s.set_defaults(fn=cmd_search)

    gd = sub.add_parser("gadget", parents=[common], help="build or verify a channel gadget")
    gd.add_argument("action", choices=("build", "verify"))
    gd.add_argument("instance")
    gd.add_argument("--out", help="bundle JSON output (build)")
    gd.add_argument("--max-len", type=int, default=3, help="longest word to verify")
    gd.add_argument("--report", help="directory for figures")
    gd.set_defaults(fn=cmd_gadget)

    w = sub.add_parser("sweep", parents=[common], help="run the encoder for n = 1..n-max")
    w.add_argument("instance")
    w.add_argument("--n-max", type=int, default=2)
    w.add_argument("--backend", choices=("numeric", "export"), default="numeric")
    w.add_argument("--restarts", type=int, default=6)
    w.add_argument("--out-dir", help="SMT-LIB2 files (export backend)")
    w.add_argument("--report", help="directory for figures")
    w.set_defaults(fn=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _header(args)
    try:
        return args.fn(args)
    except (QDecideError, OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
