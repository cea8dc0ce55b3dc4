"""Pure-Python term-map kernels for sparse polynomial arithmetic.

A term map is a dict from monomials to nonzero ``Fraction`` coefficients.
A monomial is a tuple of ``(variable, exponent)`` pairs with exponent > 0,
sorted ascending by variable (variables are tuples, so this is plain tuple
order).  These functions are the hot loops of the whole engine; a compiled
twin lives in ``_kernel_c.pyx`` with identical semantics.
"""

from fractions import Fraction

_ZERO = Fraction(0)


def mono_mul(m1, m2):
    """Merge two sorted monomials, adding exponents."""
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1 = len(m1)
    n2 = len(m2)
    while i < n1 and j < n2:
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    if i < n1:
        out.extend(m1[i:])
    if j < n2:
        out.extend(m2[j:])
    return tuple(out)


def add_terms(a, b):
    if not b:
        return dict(a)
    if not a:
        return dict(b)
    res = dict(a)
    get = res.get
    for m, c in b.items():
        s = get(m, _ZERO) + c
        if s:
            res[m] = s
        elif m in res:
            del res[m]
    return res


def sub_terms(a, b):
    res = dict(a)
    get = res.get
    for m, c in b.items():
        s = get(m, _ZERO) - c
        if s:
            res[m] = s
        elif m in res:
            del res[m]
    return res


def neg_terms(a):
    return {m: -c for m, c in a.items()}


def scale_terms(a, c):
    if not c:
        return {}
    return {m: c * q for m, q in a.items()}


def mul_terms(a, b):
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    res = {}
    get = res.get
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = mono_mul(m1, m2)
            s = get(m, _ZERO) + c1 * c2
            if s:
                res[m] = s
            elif m in res:
                del res[m]
    return res


def pow_terms(a, n):
    """Square-and-multiply power of a term map; n >= 0."""
    if n == 0:
        return {(): Fraction(1)}
    if n == 1:
        return dict(a)
    half = pow_terms(a, n // 2)
    sq = mul_terms(half, half)
    if n % 2:
        return mul_terms(sq, a)
    return sq
