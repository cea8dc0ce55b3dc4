"""Command-line interface.

Subcommands: prolong, check, compose, jet, solve, laws, product, equalizer.
``--json`` writes the machine report (schema jetcat_report_v1) to stdout;
human-readable summaries go to stdout and diagnostics to stderr otherwise.

Exit status: 0 success / integrable / laws pass / solution complete;
1 obstructed / inconsistent / law failure; 2 usage or parse error;
3 unknown (budget exhausted).  The environment variable
``JETCAT_DEFAULT_ORDER`` supplies the working-order budget when ``--to``
is omitted (default: declared order + 2).
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from jetcat import reports
from jetcat.dsl import format_system, parse_system
from jetcat.errors import JetcatError, ParseError
from jetcat.jets import jet_prolong
from jetcat.laws import run_comonad_suite
from jetcat.operators import FormalDiffOperator, kleisli_compose
from jetcat.pde import (
    check_integrability,
    coalgebra_from_solved_form,
    equalizer_spans_match,
    pde_equalizer,
    pde_product,
    pde_prolong,
    verify_coalgebra_laws,
)
from jetcat.poly import MultiIndex, Variable
from jetcat.solutions import extend_solution
from jetcat.dsl import SystemFile

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3


def _read_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load(path):
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_system(_read_file(path), name)


def _default_order(sf):
    env = os.environ.get("JETCAT_DEFAULT_ORDER")
    if env:
        return int(env)
    return sf.order + 2


def _emit(args, report, human_lines):
    if args.json:
        sys.stdout.write(reports.dump(report))
    else:
        for line in human_lines:
            print(line)
    return None


def _status_exit(status):
    if status in ("integrable_up_to", "ok", "complete", "laws_pass"):
        return EXIT_OK
    if status == "unknown":
        return EXIT_UNKNOWN
    return EXIT_FAIL


# -- subcommands -------------------------------------------------------------


def _cmd_prolong(args):
    sf = _load(args.file)
    K = args.to if args.to is not None else _default_order(sf)
    prolonged = pde_prolong(sf.system(), K)
    report = reports.base_report("prolong", sf, working_order=K)
    report["tower_sizes"] = prolonged.tower_sizes()
    space = sf.space.with_order(K)
    tower = {
        "steps": [[space.render(p) for p in step] for step in prolonged.steps]
    }
    report["tower"] = tower
    lines = ["prolongation of %s to order %d" % (sf.name or args.file, K)]
    for s, step in enumerate(prolonged.steps):
        for p in step:
            lines.append("  step %d: %s = 0" % (s, space.render(p)))
    _emit(args, report, lines)
    return EXIT_OK


def _cmd_check(args):
    sf = _load(args.file)
    K = args.to if args.to is not None else _default_order(sf)
    verdict = check_integrability(sf.system(), K, macaulay_degree=args.macaulay_deg)
    report = reports.base_report("check", sf, working_order=K)
    space = sf.space.with_order(K)
    reports.attach_verdict(report, verdict, space.render)
    lines = ["%s: %s (method %s, working order %d)"
             % (sf.name or args.file, verdict.status, verdict.method, K)]
    for w in verdict.witnesses:
        lines.append("  witness: %s = 0" % space.render(w))
    for o in verdict.obstructions:
        lines.append("  new constraint: %s = 0" % space.render(o))
    if verdict.reason:
        lines.append("  reason: %s" % verdict.reason)
    _emit(args, report, lines)
    return _status_exit(verdict.status)


def _cmd_compose(args):
    sf = _load(args.file)
    if len(sf.fiber_names) != 1:
        raise JetcatError("compose works on single-fiber systems")
    first_name, second_name = args.ops
    first = sf.operator(first_name)
    second_expr = sf.operators.get(second_name)
    if second_expr is None:
        raise KeyError("no operator %r in the file" % second_name)
    # the second operator reads the first one's output: same expression
    # syntax, fiber rebound to the intermediate bundle
    from jetcat.jets import JetSpaceDescriptor

    inter = first.target
    order = second_expr.max_jet_order()
    second = FormalDiffOperator(
        inter.with_order(order),
        JetSpaceDescriptor(inter.base_names, ("w",), 0),
        {(0, MultiIndex.zero(inter.base_dim)): second_expr},
    )
    composed = kleisli_compose(second, first)
    rendered = sf.space.with_order(composed.order).render(
        composed.component(0)
    )
    report = reports.base_report("compose", sf)
    report["composed"] = {
        "ops": [first_name, second_name],
        "order": composed.order,
        "component": rendered,
        "linear": composed.is_linear(),
    }
    _emit(args, report, [
        "%s after %s: %s (order %d)" % (second_name, first_name, rendered, composed.order)
    ])
    return EXIT_OK


def _cmd_jet(args):
    sf = _load(args.file)
    section = sf.section(args.section)
    order = args.order if args.order is not None else sf.order
    at = _parse_point(args.at, len(sf.base_names)) if args.at else (0,) * len(sf.base_names)
    theta = jet_prolong(section, order, at, sf.base_names)
    fiber_names = sf.fiber_names if len(sf.fiber_names) == 1 else ("u",)
    coords = {}
    for (a, idx), val in sorted(theta.coords.items(), key=lambda kv: Variable.jet(*kv[0])):
        coords[Variable.jet(a, idx).name(sf.base_names, fiber_names)] = reports.rational_str(val)
    report = reports.base_report("jet", sf, order=order)
    report["jet"] = {
        "section": args.section,
        "at": [reports.rational_str(Fraction(v)) for v in at],
        "coordinates": coords,
    }
    lines = ["%d-jet of %s at (%s):" % (order, args.section, ", ".join(map(str, at)))]
    lines.extend("  %s = %s" % (k, v) for k, v in coords.items())
    _emit(args, report, lines)
    return EXIT_OK


def _cmd_solve(args):
    sf = _load(args.file)
    K = args.to if args.to is not None else _default_order(sf)
    prolonged = pde_prolong(sf.system(), K)
    seed_data, base = _parse_seed(args.seed, sf)
    state = extend_solution(prolonged, seed_data, base,
                            allow_nonlinear=args.allow_nonlinear)
    report = reports.base_report("solve", sf, working_order=K)
    report["tower_sizes"] = prolonged.tower_sizes()
    report["status"] = state.status
    space = sf.space.with_order(K)
    solution = {
        "order_reached": state.order_reached,
        "free_coordinates": [
            Variable.jet(a, idx).name(sf.base_names, sf.fiber_names)
            for (a, idx) in state.free_coordinates
        ],
        "obstruction_trail": [
            "D_%s(eq %d)" % ("".join(
                sf.base_names[d] * e for d, e in enumerate(idx)) or "0", alpha)
            for (alpha, idx) in state.trail
        ],
    }
    if state.obstruction is not None:
        report["witnesses"] = [space.render(state.obstruction)]
        solution["obstruction_order"] = state.obstruction_order
    if state.is_complete():
        solution["coordinates"] = {
            Variable.jet(a, idx).name(sf.base_names, sf.fiber_names):
                reports.rational_str(val)
            for (a, idx), val in sorted(
                state.point.coords.items(), key=lambda kv: Variable.jet(*kv[0])
            )
        }
    report["solution"] = solution
    if state.is_complete():
        lines = ["complete formal solution to order %d" % state.order_reached]
        for k, v in solution["coordinates"].items():
            lines.append("  %s = %s" % (k, v))
    else:
        lines = ["obstructed at order %s: witness %s = 0"
                 % (state.obstruction_order, space.render(state.obstruction))]
        lines.extend("  via %s" % t for t in solution["obstruction_trail"])
    _emit(args, report, lines)
    return EXIT_OK if state.is_complete() else EXIT_FAIL


def _cmd_laws(args):
    sf = _load(args.file)
    split = tuple(int(s) for s in args.split.split(",")) if args.split else (1, 1, 1)
    if len(split) != 3 or any(s < 0 for s in split):
        raise JetcatError("--split expects three non-negative integers k,l,m")
    comonad = run_comonad_suite(
        base_dims=(len(sf.base_names),),
        fiber_dims=(max(len(sf.fiber_names), 1),),
        max_split_total=sum(split),
        samples=args.samples,
        seed=args.seed,
    )
    report = reports.base_report("laws", sf)
    report["comonad"] = {
        "ok": comonad["ok"],
        "checked": comonad["checked"],
        "failures": comonad["failures"][:8],
    }
    coalgebra_ok = True
    if sf.solved:
        K = args.to if args.to is not None else _default_order(sf)
        coalg = coalgebra_from_solved_form(sf.system(), sf.solved, K)
        law_report = verify_coalgebra_laws(coalg, samples=args.samples, seed=args.seed)
        reports.attach_laws(report, law_report)
        report["working_order"] = K
        coalgebra_ok = law_report.ok()
    ok = comonad["ok"] and coalgebra_ok
    report["status"] = "laws_pass" if ok else "laws_fail"
    lines = ["comonad laws: %s (%d checks)" % ("pass" if comonad["ok"] else "FAIL",
                                               comonad["checked"])]
    if sf.solved:
        lines.append("coalgebra laws: %s (%d samples)"
                     % ("pass" if coalgebra_ok else "FAIL", args.samples))
    _emit(args, report, lines)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_product(args):
    first = _load(args.file)
    second = _load(args.file2)
    system = pde_product(first.system(), second.system())
    merged = SystemFile(
        base_names=system.space.base_names,
        fiber_names=system.space.fiber_names,
        order=system.space.order,
        equations=list(system.equations),
        name="%s*%s" % (first.name, second.name),
    )
    report = reports.base_report("product", merged)
    report["printed"] = format_system(merged)
    _emit(args, report, [format_system(merged).rstrip("\n")])
    return EXIT_OK


def _cmd_equalizer(args):
    sf = _load(args.file)
    if len(sf.fiber_names) != 1:
        raise JetcatError("equalizer works on single-fiber systems")
    K = args.to if args.to is not None else _default_order(sf)
    first = sf.operator(args.ops[0])
    second = sf.operator(args.ops[1])
    system, prolonged = pde_equalizer(first, second, K)
    space = system.space.with_order(K)
    report = reports.base_report("equalizer", sf, working_order=K)
    report["tower_sizes"] = prolonged.tower_sizes()
    eq_report = {
        "ops": list(args.ops),
        "equations": [system.space.render(p) for p in system.equations],
        "order": system.order,
    }
    spans = None
    if first.is_linear() and second.is_linear():
        spans = equalizer_spans_match(first, second, K)
        eq_report["prolongation_spans_match"] = spans
    report["equalizer"] = eq_report
    status_ok = spans is not False
    report["status"] = "ok" if status_ok else "obstructed"
    lines = ["equalizer of %s and %s:" % tuple(args.ops)]
    lines.extend("  %s = 0" % e for e in eq_report["equations"])
    if spans is not None:
        lines.append("  prolongation spans match to order %d: %s" % (K, spans))
    _emit(args, report, lines)
    return EXIT_OK if status_ok else EXIT_FAIL


# -- argument plumbing ----------------------------------------------------------


def _parse_point(text, dim):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != dim:
        raise JetcatError("point needs %d coordinates, got %d" % (dim, len(parts)))
    return tuple(Fraction(p) for p in parts)


def _parse_seed(spec, sf):
    """Seed SPEC: comma-separated coordinate=value pairs, optionally followed
    by '@' and the base point, e.g. "u=0,u_x=0,u_xx=2@0,0"."""
    base = (Fraction(0),) * len(sf.base_names)
    data = {}
    if spec is None:
        return data, base
    body, sep, at = spec.partition("@")
    if sep:
        base = _parse_point(at, len(sf.base_names))
    body = body.strip()
    if body:
        for item in body.split(","):
            name, sep2, val = item.partition("=")
            if not sep2:
                raise JetcatError("seed entries look like coord=value; got %r" % item)
            var = _resolve_coord(name.strip(), sf)
            data[(var.fiber, var.index)] = Fraction(val.strip())
    return data, base


def _resolve_coord(name, sf):
    from jetcat.dsl import _split_subscript

    if name in sf.fiber_names:
        return Variable.jet(sf.fiber_names.index(name), MultiIndex.zero(len(sf.base_names)))
    head, sep, sub = name.partition("_")
    if sep and head in sf.fiber_names:
        dirs = _split_subscript(sub, sf.base_names)
        if dirs is not None:
            entries = [0] * len(sf.base_names)
            for d in dirs:
                entries[d] += 1
            return Variable.jet(sf.fiber_names.index(head), MultiIndex(entries))
    raise JetcatError("cannot resolve jet coordinate %r" % name)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="jetcat",
        description="exact finite-order jet calculus and formal PDE theory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, to=True):
        p.add_argument("file", help="system file (.pde)")
        p.add_argument("--json", action="store_true", help="machine report on stdout")
        if to:
            p.add_argument("--to", type=int, default=None, help="working-order budget")

    p = sub.add_parser("prolong", help="populate the prolongation tower")
    common(p)
    p.set_defaults(func=_cmd_prolong)

    p = sub.add_parser("check", help="formal-integrability verdict")
    common(p)
    p.add_argument("--macaulay-deg", type=int, default=None,
                   help="degree bound for the nonlinear Macaulay oracle")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("compose", help="co-Kleisli composition of two named operators")
    common(p, to=False)
    p.add_argument("--ops", nargs=2, required=True, metavar=("A", "B"),
                   help="apply A first, then B")
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("jet", help="jet prolongation of a named section at a point")
    common(p, to=False)
    p.add_argument("--section", required=True)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--at", default=None, help="base point, e.g. '1,0'")
    p.set_defaults(func=_cmd_jet)

    p = sub.add_parser("solve", help="order-by-order formal solution from seed data")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--to", type=int, default=None)
    p.add_argument("--seed", default=None, metavar="SPEC",
                   help="initial data, e.g. 'u=0,u_x=0,u_xx=2@0,0'")
    p.add_argument("--allow-nonlinear", action="store_true")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("laws", help="comonad and coalgebra law suite")
    common(p)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--split", default=None, help="comonad split k,l,m")
    p.set_defaults(func=_cmd_laws)

    p = sub.add_parser("product", help="product of two systems")
    p.add_argument("file")
    p.add_argument("file2")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_product)

    p = sub.add_parser("equalizer", help="equalizer PDE of two named operators")
    common(p)
    p.add_argument("--ops", nargs=2, required=True, metavar=("A", "B"))
    p.set_defaults(func=_cmd_equalizer)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (JetcatError, KeyError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
