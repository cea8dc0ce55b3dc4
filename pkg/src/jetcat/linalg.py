"""Exact linear algebra used by the integrability checker and the formal
solver: fraction-free elimination with polynomial entries (rows over the
rational-function field in the base variables), rational Gaussian
elimination with provenance tracking, and the bounded-degree Macaulay span
for polynomial (nonlinear) systems.
"""

from __future__ import annotations

from fractions import Fraction

from jetcat.poly import Polynomial, _mono_key

# Sentinel column for the part of a linear equation free of jet variables.
AFFINE = ("affine",)

_ZERO = Fraction(0)


def linear_decompose(p: Polynomial):
    """Split a jet-linear polynomial into ({jet variable: base-coefficient},
    affine base part).  Raises ValueError when p is not jointly degree <= 1
    in the jet variables."""
    coeffs = {}
    affine = {}
    for mono, c in p.terms.items():
        jets = [(v, e) for v, e in mono if v.is_jet]
        rest = tuple((v, e) for v, e in mono if not v.is_jet)
        if any(v.is_eps for v, _ in mono):
            raise ValueError("unexpected eps variable in a PDE equation")
        if not jets:
            affine[rest] = affine.get(rest, _ZERO) + c
        elif len(jets) == 1 and jets[0][1] == 1:
            v = jets[0][0]
            bucket = coeffs.setdefault(v, {})
            bucket[rest] = bucket.get(rest, _ZERO) + c
        else:
            raise ValueError("equation is not linear in the jet coordinates")
    row = {v: Polynomial(bucket) for v, bucket in coeffs.items()}
    row = {v: q for v, q in row.items() if q}
    aff = Polynomial(affine)
    if aff:
        row[AFFINE] = aff
    return row


def row_to_polynomial(row):
    """Inverse of linear_decompose."""
    total = Polynomial.zero()
    for key, coeff in row.items():
        if key is AFFINE or key == AFFINE:
            total = total + coeff
        else:
            total = total + coeff * Polynomial.variable(key)
    return total


def _column_sort_key(key):
    # jet columns first (higher order first, then canonical order), AFFINE last
    if key == AFFINE:
        return (1, 0, ())
    return (0, -key.order, tuple(key))


def eliminate(rows, pivot_columns):
    """Fraction-free elimination of ``pivot_columns`` from polynomial rows.

    ``rows``: list of dicts {column: Polynomial}.  Returns (pivots, survivors)
    where pivots is a list of (column, row) actually used for elimination and
    survivors are the rows left with no support on any pivot column.  Rows
    are normalized to primitive form, so results are canonical.
    """
    work = [dict(r) for r in rows if r]
    pivots = []
    for col in pivot_columns:
        pivot_row = None
        rest = []
        for r in work:
            if pivot_row is None and col in r:
                pivot_row = r
            else:
                rest.append(r)
        if pivot_row is None:
            continue
        pc = pivot_row[col]
        out = []
        for r in rest:
            rc = r.get(col)
            if rc is None:
                out.append(r)
                continue
            new = {}
            for key in set(pivot_row) | set(r):
                val = pc * r.get(key, Polynomial.zero()) - rc * pivot_row.get(key, Polynomial.zero())
                if val:
                    new[key] = val
            new = _normalize_row(new)
            if new:
                out.append(new)
        pivots.append((col, _normalize_row(pivot_row)))
        work = out
    return pivots, work


def _normalize_row(row):
    if not row:
        return row
    # divide through by the rational content of all entries, fix sign on the
    # leading column so the row is canonical
    import math

    keys = sorted(row, key=_column_sort_key)
    lead = row[keys[0]]
    num_gcd, den_lcm = 0, 1
    for p in row.values():
        for c in p.terms.values():
            num_gcd = math.gcd(num_gcd, abs(c.numerator))
            den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    factor = Fraction(num_gcd, den_lcm)
    if lead.leading()[1] < 0:
        factor = -factor
    return {k: p * (1 / factor) for k, p in row.items()}


def reduce_row(row, echelon):
    """Reduce a row against echelon pivots (fraction-free); zero/nonzero is
    what membership tests care about, and the result is normalized."""
    r = dict(row)
    for col, pivot in echelon:
        rc = r.get(col)
        if rc is None:
            continue
        pc = pivot[col]
        new = {}
        for key in set(pivot) | set(r):
            val = pc * r.get(key, Polynomial.zero()) - rc * pivot.get(key, Polynomial.zero())
            if val:
                new[key] = val
        r = new
    return _normalize_row(r)


def echelonize(rows):
    """Full echelon form of polynomial rows over all their columns, pivoting
    in canonical column order."""
    cols = sorted({c for r in rows for c in r}, key=_column_sort_key)
    pivots, survivors = eliminate(rows, cols)
    # survivors are rows with support outside cols: impossible, so empty
    return pivots


def row_space_equal(rows_a, rows_b):
    """Exact mutual-membership test for two spans of linear rows over the
    rational-function field in the base variables."""
    ech_a = echelonize(rows_a)
    ech_b = echelonize(rows_b)
    for _, r in ech_a:
        if reduce_row(r, ech_b):
            return False
    for _, r in ech_b:
        if reduce_row(r, ech_a):
            return False
    return True


# -- rational Gaussian elimination with provenance (formal solver) ------------


class RationalSystem:
    """Growing linear system over Q with provenance-tagged rows.

    Unknowns are arbitrary orderable keys; each equation is stored in the
    convention  sum coeff*unknown + const = 0.  Every stored row is pivoted
    on its minimal unknown with coefficient 1, and row tails only reference
    strictly larger unknowns, so back-substitution in descending pivot order
    is well-founded.  Provenance maps tag -> Fraction multiplier, recording
    which source equations were combined into each stored row.
    """

    def __init__(self):
        self.pivot_rows = {}  # lead unknown -> (coeffs, const, provenance)
        self.unknowns = set()

    @staticmethod
    def _combine(prov_a, prov_b, factor):
        out = dict(prov_a)
        for tag, mult in prov_b.items():
            out[tag] = out.get(tag, _ZERO) + factor * mult
            if not out[tag]:
                del out[tag]
        return out

    def add(self, coeffs, const, tag):
        """Insert an equation; returns None, or an inconsistency witness
        (const, provenance) when the equation reduces to nonzero = 0."""
        row = {k: Fraction(v) for k, v in coeffs.items() if v}
        self.unknowns.update(row)
        const = Fraction(const)
        prov = {tag: Fraction(1)}
        while row:
            lead = min(row)
            pivot = self.pivot_rows.get(lead)
            if pivot is None:
                scale = 1 / row[lead]
                row = {k: v * scale for k, v in row.items()}
                const *= scale
                prov = {t: m * scale for t, m in prov.items()}
                self.pivot_rows[lead] = (row, const, prov)
                return None
            pcoeffs, pconst, pprov = pivot
            factor = -row[lead]
            for k, v in pcoeffs.items():
                nv = row.get(k, _ZERO) + factor * v
                if nv:
                    row[k] = nv
                elif k in row:
                    del row[k]
            const += factor * pconst
            prov = self._combine(prov, pprov, factor)
        if const:
            return const, prov
        return None

    def solve(self, default=None):
        """Back-substitute; unknowns with no pivot get ``default(key)`` (or 0).

        Returns {unknown: Fraction} for every unknown seen.
        """
        values = {}
        for k in self.unknowns:
            if k not in self.pivot_rows:
                values[k] = Fraction(default(k)) if default else _ZERO
        for lead in sorted(self.pivot_rows, reverse=True):
            coeffs, const, _ = self.pivot_rows[lead]
            acc = -const
            for k, v in coeffs.items():
                if k != lead:
                    acc -= v * values[k]
            values[lead] = acc
        return values

    def pivot_unknowns(self):
        return set(self.pivot_rows)

    def free_unknowns(self):
        return self.unknowns - set(self.pivot_rows)


# -- bounded-degree Macaulay span (nonlinear oracle) ---------------------------


def _monomials_up_to(variables, max_degree):
    pool = sorted(variables)
    monos = [()]
    frontier = [()]
    for _ in range(max_degree):
        nxt = []
        for m in frontier:
            start = m[-1][0] if m else None
            for v in pool:
                if start is not None and v < start:
                    continue
                grown = _mono_mul_var(m, v)
                nxt.append(grown)
        # dedupe
        uniq = {}
        for m in nxt:
            uniq[m] = None
        frontier = list(uniq)
        monos.extend(frontier)
    return monos


def _mono_mul_var(mono, v):
    out = []
    placed = False
    for w, e in mono:
        if w == v:
            out.append((w, e + 1))
            placed = True
        else:
            out.append((w, e))
    if not placed:
        out.append((v, 1))
        out.sort()
    return tuple(out)


def macaulay_rows(polys, degree_bound, variables):
    """All monomial shifts m*p with deg(m) + deg(p) <= degree_bound, as
    coefficient rows {monomial: Fraction}.  Every row is a consequence of the
    input system by construction."""
    rows = []
    for p in polys:
        if not p:
            continue
        room = degree_bound - p.total_degree()
        shifts = _monomials_up_to(variables, max(room, 0))
        for shift in shifts:
            shifted = p * Polynomial({shift: Fraction(1)})
            rows.append(dict(shifted.terms))
    return rows


def macaulay_eliminate(rows, is_high_monomial):
    """Eliminate every monomial column classified high; return the surviving
    rows (supported entirely on low monomials), normalized and deduplicated.
    """
    work = [dict(r) for r in rows if r]
    high_cols = sorted(
        {m for r in work for m in r if is_high_monomial(m)},
        key=_mono_key,
        reverse=True,
    )
    for col in high_cols:
        pivot_row = None
        rest = []
        for r in work:
            if pivot_row is None and col in r:
                pivot_row = r
            else:
                rest.append(r)
        if pivot_row is None:
            continue
        pc = pivot_row[col]
        out = []
        for r in rest:
            rc = r.get(col)
            if rc is None:
                out.append(r)
                continue
            factor = rc / pc
            new = {}
            for key in set(pivot_row) | set(r):
                val = r.get(key, _ZERO) - factor * pivot_row.get(key, _ZERO)
                if val:
                    new[key] = val
            if new:
                out.append(new)
        work = out
    # echelonize the survivors over low columns for canonical output
    survivors = []
    pivots = {}
    for r in sorted(work, key=lambda r: _mono_key(max(r, key=_mono_key)), reverse=True):
        r = dict(r)
        changed = True
        while changed and r:
            changed = False
            lead = max(r, key=_mono_key)
            if lead in pivots:
                pivot = pivots[lead]
                factor = r[lead] / pivot[lead]
                for key in set(pivot) | set(r):
                    val = r.get(key, _ZERO) - factor * pivot.get(key, _ZERO)
                    if val:
                        r[key] = val
                    elif key in r:
                        del r[key]
                changed = True
        if r:
            lead = max(r, key=_mono_key)
            scale = 1 / r[lead]
            r = {k: v * scale for k, v in r.items()}
            pivots[lead] = r
            survivors.append(r)
    return survivors


def macaulay_reduce(row, span_rows):
    """Reduce a coefficient row against an (echelonized) list of rows."""
    pivots = {}
    for r in span_rows:
        lead = max(r, key=_mono_key)
        if lead not in pivots:
            pivots[lead] = r
    r = dict(row)
    while r:
        lead = max(r, key=_mono_key)
        pivot = pivots.get(lead)
        if pivot is None:
            return r
        factor = r[lead] / pivot[lead]
        for key in set(pivot) | set(r):
            val = r.get(key, _ZERO) - factor * pivot.get(key, _ZERO)
            if val:
                r[key] = val
            elif key in r:
                del r[key]
    return r
