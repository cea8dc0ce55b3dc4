# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of _kernel_py: sparse term-map arithmetic.

Semantics must match _kernel_py exactly (same dict/tuple/Fraction data);
only the loop overhead is compiled away.  Keep the two files in sync.
"""

from fractions import Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


cpdef tuple mono_mul(tuple m1, tuple m2):
    """Merge two sorted monomials, adding exponents."""
    cdef Py_ssize_t i = 0, j = 0, n1 = len(m1), n2 = len(m2)
    if n1 == 0:
        return m2
    if n2 == 0:
        return m1
    out = []
    cdef object v1, v2, e1, e2
    while i < n1 and j < n2:
        v1 = (<tuple>m1[i])[0]
        v2 = (<tuple>m2[j])[0]
        if v1 == v2:
            e1 = (<tuple>m1[i])[1]
            e2 = (<tuple>m2[j])[1]
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    while i < n1:
        out.append(m1[i])
        i += 1
    while j < n2:
        out.append(m2[j])
        j += 1
    return tuple(out)


cpdef dict add_terms(dict a, dict b):
    if not b:
        return dict(a)
    if not a:
        return dict(b)
    cdef dict res = dict(a)
    cdef object m, c, s
    for m, c in b.items():
        s = res.get(m)
        if s is None:
            res[m] = c
        else:
            s = s + c
            if s:
                res[m] = s
            else:
                del res[m]
    return res


cpdef dict sub_terms(dict a, dict b):
    cdef dict res = dict(a)
    cdef object m, c, s
    for m, c in b.items():
        s = res.get(m)
        if s is None:
            res[m] = -c
        else:
            s = s - c
            if s:
                res[m] = s
            else:
                del res[m]
    return res


cpdef dict neg_terms(dict a):
    cdef dict res = {}
    cdef object m, c
    for m, c in a.items():
        res[m] = -c
    return res


cpdef dict scale_terms(dict a, object c):
    cdef dict res = {}
    cdef object m, q
    if not c:
        return res
    for m, q in a.items():
        res[m] = c * q
    return res


cpdef dict mul_terms(dict a, dict b):
    cdef dict res = {}
    cdef object m1, c1, m2, c2, m, s
    if not a or not b:
        return res
    if len(a) > len(b):
        a, b = b, a
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = mono_mul(<tuple>m1, <tuple>m2)
            s = res.get(m)
            if s is None:
                s = c1 * c2
            else:
                s = s + c1 * c2
            if s:
                res[m] = s
            elif m in res:
                del res[m]
    return res


cpdef dict pow_terms(dict a, long n):
    """Square-and-multiply power of a term map; n >= 0."""
    if n == 0:
        return {(): _ONE}
    if n == 1:
        return dict(a)
    half = pow_terms(a, n // 2)
    sq = mul_terms(half, half)
    if n % 2:
        return mul_terms(sq, a)
    return sq
