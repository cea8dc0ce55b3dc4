#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Swaps the term-arithmetic backend in place and times representative
workloads: sparse polynomial products, prolongation towers, operator
composition, and an integrability check.  Results are exact either way;
only the timings differ.

Run:  python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import time

from jetcat import _kernel, _kernel_py
from jetcat.jets import JetSpaceDescriptor
from jetcat.laws import random_operator, random_polynomial
from jetcat.operators import kleisli_compose, op_prolong
from jetcat.pde import PdeSystem, check_integrability, pde_prolong
from jetcat.poly import Polynomial, Variable

_KERNEL_FUNCS = ("mono_mul", "add_terms", "sub_terms", "neg_terms",
                 "scale_terms", "mul_terms", "pow_terms")


def _backends():
    out = {"python": _kernel_py}
    try:
        from jetcat import _kernel_c

        out["c"] = _kernel_c
    except ImportError:
        pass
    return out


def _activate(impl):
    for name in _KERNEL_FUNCS:
        setattr(_kernel, name, getattr(impl, name))


def bench_poly_products(rng):
    vars_pool = [Variable.base(0), Variable.base(1)] + [
        Variable.jet(0, idx) for idx in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)]
    ]
    polys = [random_polynomial(rng, vars_pool, 3, 10) for _ in range(30)]
    for i, p in enumerate(polys):
        acc = p
        for q in polys[i:i + 3]:
            acc = acc * q
    for p in polys:
        for q in polys[:10]:
            _ = p * q


def bench_heat_tower(rng):
    sp = JetSpaceDescriptor(("x", "t"), ("u",), 2)
    heat = PdeSystem(sp, [Polynomial.jet_var(0, (0, 1)) - Polynomial.jet_var(0, (2, 0))])
    pde_prolong(heat, 9)
    check_integrability(heat, 7)


def bench_operator_chain(rng):
    sp = JetSpaceDescriptor(("x", "t"), ("u",), 1)
    ops = [random_operator(rng, sp, ("u",), max_degree=3) for _ in range(4)]
    acc = ops[0]
    for op in ops[1:]:
        acc = kleisli_compose(op, acc)
    burgers_like = ops[0]
    op_prolong(burgers_like, 5)


def bench_burgers_macaulay(rng):
    sp = JetSpaceDescriptor(("x", "t"), ("u",), 1)
    burgers = PdeSystem(
        sp, [Polynomial.jet_var(0, (0, 1))
             - Polynomial.jet_var(0, (0, 0)) * Polynomial.jet_var(0, (1, 0))]
    )
    check_integrability(burgers, 3)


TASKS = [
    ("sparse products", bench_poly_products),
    ("heat tower to order 9 + check", bench_heat_tower),
    ("operator composition chain", bench_operator_chain),
    ("nonlinear Macaulay check", bench_burgers_macaulay),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = _backends()
    if "c" not in backends:
        print("note: compiled kernel not built; run `pip install -e .` first")
    results = {}
    for name, impl in sorted(backends.items()):
        _activate(impl)
        for task_name, task in TASKS:
            best = float("inf")
            for _ in range(args.repeat):
                rng = random.Random(1234)
                t0 = time.perf_counter()
                task(rng)
                best = min(best, time.perf_counter() - t0)
            results[(task_name, name)] = best
    _activate(backends.get("c", _kernel_py))

    width = max(len(t) for t, _ in TASKS)
    header = "%-*s" % (width, "task")
    for name in sorted(backends):
        header += "  %10s" % name
    if len(backends) == 2:
        header += "  %8s" % "speedup"
    print(header)
    for task_name, _ in TASKS:
        line = "%-*s" % (width, task_name)
        for name in sorted(backends):
            line += "  %9.4fs" % results[(task_name, name)]
        if len(backends) == 2:
            line += "  %7.2fx" % (
                results[(task_name, "python")] / results[(task_name, "c")]
            )
        print(line)


if __name__ == "__main__":
    main()
