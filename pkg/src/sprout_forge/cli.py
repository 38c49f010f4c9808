"""Command-line driver: ``sprout-forge <command> ...``.

Exit codes: 0 success, 1 check or selftest failure, 2 usage, 3 format,
4 resource limit, 5 not extendable.
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from typing import List, Optional

from . import brace, ger
from . import convolution as cv
from . import sprout as sp
from .cli_io import (ConfigError, FormatError, RunConfig, SproutFile, format_coefficient, load_config,
                     read_sprout, render_report, render_svg, render_tikz, serialize, to_json, write_text)
from .exact_linalg import LinalgError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_RESOURCE = 4
EXIT_NOT_EXTENDABLE = 5


class UsageError(ValueError):
    pass


def _emit(cfg: RunConfig, data, out=None) -> None:
    text = render_report(data, "json" if cfg.report_format == "json" else "text")
    (out or sys.stdout).write(text)
    if cfg.report_path:
        write_text(cfg.report_path, text)


# -- commands ----------------------------------------------------------------------

def cmd_basis(args, cfg: RunConfig) -> int:
    n = args.arity
    if n < 1:
        raise UsageError("arity must be at least 1")
    if n > cfg.arity_bound:
        raise sp.ResourceError(f"arity {n} exceeds arity_bound {cfg.arity_bound}")
    if args.kind == "ger":
        words = ger.enumerate_ger_basis(n)
        if args.degree is not None:
            words = [w for w in words if ger.ger_degree(w) == args.degree]
        items = [ger.format_word(w) for w in words]
    else:
        if args.degree is None:
            trees = [t for d in range(-(n - 1), 1) for t in brace.enumerate_basis(n, d)]
        else:
            trees = brace.enumerate_basis(n, args.degree)
        items = [brace.format_tree(t) for t in trees]
    _emit(cfg, {"kind": args.kind, "arity": n, "degree": args.degree, "count": len(items), "basis": items})
    return EXIT_OK


def _residue_rows(res):
    return [{"arity": a, "degree": d, "coefficient": format_coefficient(c), "term": cv.format_term(t)}
            for a, d, t, c in res]


def cmd_check(args, cfg: RunConfig) -> int:
    sf = read_sprout(args.file)
    order = args.order if args.order is not None else sf.order
    if order < 1:
        raise UsageError("order must be at least 1")
    if max(cv.arities(sf.element), default=0) > cfg.arity_bound:
        raise sp.ResourceError(f"element has arity above arity_bound {cfg.arity_bound}")
    ok, res = cv.is_sprout(sf.element, order)
    _emit(cfg, {"file": os.path.basename(args.file), "order": order, "is_sprout": ok,
                "residue": _residue_rows(res)})
    return EXIT_OK if ok else EXIT_FAIL


def _stem(path: str) -> str:
    base = os.path.basename(path)
    stem = base[:-len(".sprout")] if base.endswith(".sprout") else base
    return stem.split(".order")[0]


def cmd_extend(args, cfg: RunConfig) -> int:
    sf = read_sprout(args.file)
    order = sf.order
    target = args.to
    if target < order:
        raise UsageError(f"--to {target} is below the current order {order}")
    out_dir = args.out or cfg.out_dir
    stem = _stem(args.file)
    alpha = sf.element
    sp.check_preconditions(alpha, order, check_diagram=not args.no_diagram)
    steps = []
    written = []
    if target == order:
        path = os.path.join(out_dir, f"{stem}.order{order}.sprout")
        write_text(path, serialize(SproutFile(order, alpha)))
        written.append(os.path.basename(path))
    status = EXIT_OK
    while order < target:
        result, report = sp.extend(alpha, order, keep_top=args.keep_top, workers=cfg.workers,
                                   pivot_rule=cfg.pivot_rule, check_diagram=not args.no_diagram,
                                   arity_bound=cfg.arity_bound)
        steps.append(report.as_dict(timings=cfg.timings))
        if isinstance(result, sp.NotExtendable):
            cert_path = os.path.join(out_dir, f"{stem}.order{order}.certificate")
            write_text(cert_path, certificate_text(result))
            written.append(os.path.basename(cert_path))
            status = EXIT_NOT_EXTENDABLE
            break
        alpha = result
        order += 1
        path = os.path.join(out_dir, f"{stem}.order{order}.sprout")
        write_text(path, serialize(SproutFile(order, alpha)))
        written.append(os.path.basename(path))
    summary = {"input": os.path.basename(args.file), "target_order": target, "reached_order": order,
               "steps": steps, "files": written}
    if status == EXIT_OK and order >= 4:
        summary["reference_term_count"] = 1265
        summary["total_terms"] = len(alpha)
    _emit(cfg, summary)
    report_file = os.path.join(out_dir, f"{stem}.extend-report.json")
    write_text(report_file, to_json(summary))
    return status


def certificate_text(ne: "sp.NotExtendable") -> str:
    p = ne.problem
    lines = [
        "# sprout-forge inconsistency certificate",
        f"order: {p.order}",
        f"keep_top: {str(p.keep_top).lower()}",
        f"rows: {p.matrix.rows}",
        f"cols: {p.matrix.cols}",
        f"weights: {len(ne.certificate)}",
    ]
    for r, v in ne.certificate.items():
        lines.append(f"{format_coefficient(v)} | {cv.format_term(p.rows[r])}")
    return "\n".join(lines) + "\n"


def cmd_render(args, cfg: RunConfig) -> int:
    sf = read_sprout(args.file)
    text = render_tikz(sf) if args.format == "tikz" else render_svg(sf)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def selftest_checks():
    """Yield ``(name, ok)`` for the convention oracles, in a fixed order."""
    def d_squared():
        for n in range(1, 5):
            for nu in range(n):
                for t in brace.standard_trees(n, nu):
                    if brace.differential(brace.differential({t: 1})):
                        return False
        return True

    def derivation():
        trees = [t for n in (1, 2) for nu in range(n) for t in brace.standard_trees(n, nu)]
        for a in trees:
            for b in trees:
                for i in range(1, brace.arity(a) + 1):
                    lhs = brace.differential(brace.insert({a: 1}, i, {b: 1}))
                    r1 = brace.insert(brace.differential({a: 1}), i, {b: 1})
                    r2 = brace.insert({a: 1}, i, brace.differential({b: 1}))
                    s = -1 if brace.degree(a) % 2 else 1
                    diff = dict(lhs)
                    for k, v in r1.items():
                        diff[k] = diff.get(k, 0) - v
                    for k, v in r2.items():
                        diff[k] = diff.get(k, 0) - s * v
                    if any(diff.values()):
                        return False
        return True

    def ger_assoc():
        words = [w for n in (1, 2) for w in ger.enumerate_ger_basis(n)]
        for a in words:
            for b in words:
                for c in words:
                    for i in range(1, ger.word_arity(a) + 1):
                        for j in range(1, ger.word_arity(b) + 1):
                            lhs = ger.ger_compose(ger.ger_compose({a: 1}, i, {b: 1}), i + j - 1, {c: 1})
                            rhs = ger.ger_compose({a: 1}, i, ger.ger_compose({b: 1}, j, {c: 1}))
                            if lhs != rhs:
                                return False
        return True

    def jacobi():
        els = [{t: Fraction(1)} for t in cv.basis(2, 0) + cv.basis(2, 1)]
        for f in els:
            for g in els:
                for h in els:
                    df, dg, dh = (cv.homogeneous_degree(x) for x in (f, g, h))
                    t1 = cv.scale((-1) ** (df * dh), cv.bracket(f, cv.bracket(g, h)))
                    t2 = cv.scale((-1) ** (dg * df), cv.bracket(g, cv.bracket(h, f)))
                    t3 = cv.scale((-1) ** (dh * dg), cv.bracket(h, cv.bracket(f, g)))
                    if cv.add(t1, t2, t3):
                        return False
        return True

    def seed():
        return cv.is_sprout(sp.seed_paper(check=False), 2)[0]

    def cohomology():
        for n in (2, 3):
            dims = sp.ger_graded_dims(n)
            for d in range(-(n - 1), 1):
                if sp.cohomology(n, d).dim != dims.get(d, 0):
                    return False
        return True

    yield "d_squared", d_squared
    yield "br_derivation", derivation
    yield "ger_associativity", ger_assoc
    yield "bracket_jacobi", jacobi
    yield "seed_sprout", seed
    yield "cohomology_dims", cohomology


def cmd_selftest(args, cfg: RunConfig) -> int:
    from .cli_io import convention_fingerprint
    results = []
    failed = None
    for name, check in selftest_checks():
        ok = bool(check())
        results.append({"oracle": name, "ok": ok})
        if not ok and failed is None:
            failed = name
            break
    data = {"passed": failed is None, "failed": failed, "oracles": results,
            "convention": convention_fingerprint() if failed is None else None}
    _emit(cfg, data)
    return EXIT_OK if failed is None else EXIT_FAIL


def cmd_cohomology(args, cfg: RunConfig) -> int:
    n = args.arity
    degrees = [args.degree] if args.degree is not None else list(range(-(n - 1), 1))
    dims = sp.ger_graded_dims(n) if n >= 1 else {}
    blocks = []
    for d in degrees:
        b = sp.cohomology(n, d, bound=cfg.cohomology_bound)
        entry = {"degree": d, "dim": b.dim, "ger_dim": dims.get(d, 0),
                 "cocycles": len(b.cocycles), "coboundaries": len(b.coboundaries)}
        if args.representatives:
            entry["representatives"] = [
                [f"{format_coefficient(c)} {brace.format_tree(b.basis[i])}" for i, c in rep.items()]
                for rep in b.representatives]
        blocks.append(entry)
    total = sum(b["dim"] for b in blocks)
    _emit(cfg, {"arity": n, "blocks": blocks, "total": total,
                "matches_ger": all(b["dim"] == b["ger_dim"] for b in blocks)})
    return EXIT_OK


def cmd_stats(args, cfg: RunConfig) -> int:
    sf = read_sprout(args.file)
    data = {"file": os.path.basename(args.file), "order": sf.order}
    data.update(sp.element_stats(sf.element))
    data["degrees"] = cv.degrees(sf.element)
    _emit(cfg, data)
    return EXIT_OK


def cmd_seed(args, cfg: RunConfig) -> int:
    x = sp.seed_paper() if args.kind == "paper" else sp.seed_construct(cfg.pivot_rule)
    text = serialize(SproutFile(2, x))
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sprout-forge",
                                description="Exact Maurer-Cartan sprouts in Conv(Ger^v, Br).")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--workers", type=int, help="worker processes for matrix assembly")
    p.add_argument("--report-format", choices=("text", "json"), help="report format")
    p.add_argument("--report", dest="report_path", help="also write the report to this path")
    p.add_argument("--pivot-rule", choices=("first", "markowitz"))
    p.add_argument("--timings", action="store_true", default=None, help="include wall-clock timings")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("basis", help="list a canonical basis")
    b.add_argument("kind", choices=("br", "ger"))
    b.add_argument("--arity", type=int, required=True)
    b.add_argument("--degree", type=int)
    b.set_defaults(func=cmd_basis)

    c = sub.add_parser("check", help="verify the sprout equation")
    c.add_argument("file")
    c.add_argument("--order", type=int)
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("extend", help="extend a sprout order by order")
    e.add_argument("file")
    e.add_argument("--to", type=int, required=True)
    e.add_argument("--out", help="output directory")
    e.add_argument("--keep-top", action="store_true",
                   help="keep the top component and only solve for the next one")
    e.add_argument("--no-diagram", action="store_true",
                   help="skip the arity-2 cohomology projection precondition")
    e.set_defaults(func=cmd_extend)

    r = sub.add_parser("render", help="draw every term")
    r.add_argument("file")
    r.add_argument("--format", choices=("tikz", "svg"), default="tikz")
    r.add_argument("--out")
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("selftest", help="run the sign-convention oracles")
    s.set_defaults(func=cmd_selftest)

    h = sub.add_parser("cohomology", help="cohomology of Br(n)")
    h.add_argument("--arity", type=int, required=True)
    h.add_argument("--degree", type=int)
    h.add_argument("--representatives", action="store_true")
    h.set_defaults(func=cmd_cohomology)

    st = sub.add_parser("stats", help="term statistics of a sprout file")
    st.add_argument("file")
    st.set_defaults(func=cmd_stats)

    sd = sub.add_parser("seed", help="write a second-order sprout")
    sd.add_argument("kind", choices=("paper", "construct"), nargs="?", default="paper")
    sd.add_argument("--out")
    sd.set_defaults(func=cmd_seed)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config, overrides={
            "workers": args.workers,
            "report_format": args.report_format,
            "report_path": args.report_path,
            "pivot_rule": args.pivot_rule,
            "timings": args.timings,
        })
        return args.func(args, cfg)
    except (UsageError, ConfigError, LinalgError, sp.SproutError, cv.ConvError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, brace.TreeError, ger.GerError) as e:
        print(f"format error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except sp.ResourceError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
