"""Sampling harness for the machine-checkable law suite: deterministic
random generators for jet data and the comonad law checks (counit laws and
coassociativity of the coproduct), all as exact equalities.
"""

from __future__ import annotations

import random
from fractions import Fraction

from jetcat.jets import JetPoint, JetSpaceDescriptor, coproduct
from jetcat.poly import Polynomial, Variable, multi_indices


def random_rational(rng, span=6):
    return Fraction(rng.randint(-span, span), rng.choice((1, 1, 1, 2, 3)))


def random_jet_point(rng, descriptor: JetSpaceDescriptor) -> JetPoint:
    base = [random_rational(rng) for _ in range(descriptor.base_dim)]
    coords = {key: random_rational(rng) for key in descriptor.coordinates()}
    return JetPoint(descriptor, base, coords)


def random_polynomial(rng, variables, max_degree=3, max_terms=4):
    variables = list(variables)
    total = Polynomial.zero()
    for _ in range(rng.randint(1, max_terms)):
        coeff = random_rational(rng)
        if not coeff:
            continue
        term = Polynomial.constant(coeff)
        for _ in range(rng.randint(0, max_degree)):
            term = term * Polynomial.variable(rng.choice(variables))
        total = total + term
    return total


def random_section(rng, base_dim, fiber_dim, max_degree=3):
    from jetcat.jets import PolySection

    variables = [Variable.base(i) for i in range(base_dim)]
    return PolySection(
        [random_polynomial(rng, variables, max_degree) for _ in range(fiber_dim)]
    )


def random_operator(rng, source: JetSpaceDescriptor, target_fibers,
                    max_degree=2, linear=False):
    from jetcat.operators import FormalDiffOperator

    pool = [Variable.base(i) for i in range(source.base_dim)]
    jet_pool = [
        Variable.jet(a, idx)
        for a in range(source.fiber_dim)
        for idx in multi_indices(source.base_dim, source.order)
    ]
    comps = []
    for _ in range(len(target_fibers)):
        if linear:
            total = Polynomial.zero()
            for _ in range(rng.randint(1, 3)):
                term = random_rational(rng) * Polynomial.variable(rng.choice(jet_pool))
                if rng.random() < 0.25:
                    # base-variable coefficient on a jet term
                    term = term * Polynomial.variable(rng.choice(pool))
                total = total + term
            if rng.random() < 0.3:
                total = total + random_polynomial(rng, pool, 1, 2)
            comps.append(total)
        else:
            comps.append(random_polynomial(rng, pool + jet_pool, max_degree, 4))
    return FormalDiffOperator.plain(source, target_fibers, comps)


# -- comonad laws ----------------------------------------------------------------


def _triple_direct(theta, k, l, m_inner):
    md = theta.descriptor.base_dim
    out = {}
    for a in range(theta.descriptor.fiber_dim):
        for kk in multi_indices(md, m_inner):
            for jj in multi_indices(md, l):
                for ii in multi_indices(md, k):
                    out[(a, kk, jj, ii)] = theta.coords[(a, ii + jj + kk)]
    return out


def _triple_via_inner(theta, k, l, m_inner):
    """Split (k, l+m) first, then coproduct each inner jet."""
    md = theta.descriptor.base_dim
    first = coproduct(theta, k, l + m_inner)
    out = {}
    for ii in multi_indices(md, k):
        inner_coords = {
            (a, mm): first.coords[(a, mm, ii)]
            for a in range(theta.descriptor.fiber_dim)
            for mm in multi_indices(md, l + m_inner)
        }
        inner_point = JetPoint(
            theta.descriptor.with_order(l + m_inner), theta.base, inner_coords
        )
        second = coproduct(inner_point, l, m_inner)
        for (a, kk, jj), val in second.coords.items():
            out[(a, kk, jj, ii)] = val
    return out


def _triple_via_outer(theta, k, l, m_inner):
    """Split (k+l, m) first, then coproduct the outer jet-of-jets."""
    md = theta.descriptor.base_dim
    first = coproduct(theta, k + l, m_inner)
    inner_indices = multi_indices(md, m_inner)
    fiber_pairs = [
        (a, kk) for a in range(theta.descriptor.fiber_dim) for kk in inner_indices
    ]
    names = tuple(
        "%s|%s" % (a, "".join(map(str, kk))) for a, kk in fiber_pairs
    )
    view_desc = JetSpaceDescriptor(theta.descriptor.base_names, names, k + l)
    view_coords = {
        (e, nn): first.coords[(a, kk, nn)]
        for e, (a, kk) in enumerate(fiber_pairs)
        for nn in multi_indices(md, k + l)
    }
    view_point = JetPoint(view_desc, theta.base, view_coords)
    second = coproduct(view_point, k, l)
    out = {}
    for e, (a, kk) in enumerate(fiber_pairs):
        for jj in multi_indices(md, l):
            for ii in multi_indices(md, k):
                out[(a, kk, jj, ii)] = second.coords[(e, jj, ii)]
    return out


def comonad_law_failures(theta: JetPoint, split):
    """Exact comonad law checks on one jet point for one (k, l, m) split:
    counit-on-outer and counit-on-inner recover truncations, full splits are
    identity reindexings, and the two ways of re-splitting agree with the
    direct triple.  Returns human-readable failure strings (empty = pass)."""
    k, l, m_inner = split
    failures = []
    total = k + l + m_inner
    if theta.order < total:
        raise ValueError("jet point order below the split total")

    pair = coproduct(theta, k, l + m_inner)
    if pair.outer_counit() != theta.truncate(l + m_inner):
        failures.append("counit-on-outer failed at split (%d,%d)" % (k, l + m_inner))
    if pair.inner_counit() != theta.truncate(k):
        failures.append("counit-on-inner failed at split (%d,%d)" % (k, l + m_inner))

    full_inner = coproduct(theta, 0, total)
    if full_inner.outer_counit() != theta:
        failures.append("split (0,%d) is not the identity reindexing" % total)
    full_outer = coproduct(theta, total, 0)
    if full_outer.inner_counit() != theta:
        failures.append("split (%d,0) is not the identity reindexing" % total)

    direct = _triple_direct(theta, k, l, m_inner)
    via_inner = _triple_via_inner(theta, k, l, m_inner)
    if via_inner != direct:
        failures.append("coassociativity (inner-first) failed at %r" % (split,))
    via_outer = _triple_via_outer(theta, k, l, m_inner)
    if via_outer != direct:
        failures.append("coassociativity (outer-first) failed at %r" % (split,))
    return failures


def run_comonad_suite(base_dims=(1, 2), fiber_dims=(1, 2), max_split_total=4,
                      samples=200, seed=0):
    """The comonad law suite over random jet points: all splits (k, l, m)
    with k + l + m <= max_split_total, for each base/fiber dimension choice.
    Returns a report dict with pass booleans and failure details."""
    rng = random.Random("comonad|%s" % seed)
    splits = [
        (k, l, m)
        for k in range(max_split_total + 1)
        for l in range(max_split_total + 1 - k)
        for m in range(max_split_total + 1 - k - l)
    ]
    failures = []
    checked = 0
    for bd in base_dims:
        base_names = tuple("x%d" % (i + 1) for i in range(bd))
        for fd in fiber_dims:
            fiber_names = tuple("u%d" % (a + 1) for a in range(fd))
            for split in splits:
                desc = JetSpaceDescriptor(base_names, fiber_names, sum(split))
                for _ in range(samples):
                    theta = random_jet_point(rng, desc)
                    bad = comonad_law_failures(theta, split)
                    checked += 1
                    if bad:
                        failures.extend(
                            "base_dim=%d fiber_dim=%d: %s" % (bd, fd, b) for b in bad
                        )
                        if len(failures) > 16:
                            return {"ok": False, "checked": checked, "failures": failures}
    return {"ok": not failures, "checked": checked, "failures": failures}
