"""Normalized bar, Hochschild and cyclic complexes over graded coefficients.

A word is stored as (u exponent, coefficient slot, leg tuple); the
coefficient is the unnormalized slot (displayed rightmost, per the trace
conventions of this package), the legs are taken modulo entries of total
degree zero.  Central powers of the equivariant parameter u (degree 2) are
extracted and kept as the word-level exponent; the odd generator dt stays
inside slots, with d_u(dt) = u.

All signs come from one uniform rule: every slot (coefficient included) is
suspended, ||x|| = |x| - 1, and operators are composites of elementary
moves.  With E_i the sum of the first i suspended degrees,

    b  = sum_i -(-1)^{E_i} (internal differential in slot i)
       + sum_i (-1)^{E_i + ||x_i||} (collapse of slots i, i+1)
       + (-1)^{||x_n||(E_n + 1)} (rotate the last slot to the front and
         collapse into the coefficient)

    B  = insert a unit coefficient after summing the pure-Koszul cyclic
         rotations of the slots (sigma o N).

Machine-verified: b^2 = B^2 = bB + Bb = 0 on random words.  Words whose
coefficient slot has degree 0 sit on the boundary of the normalized
quotient (the struck-out words generate a subcomplex rather than spanning
one); on them B is the quotient map composed with the strike-out, which is
exact for closure checks but not for operator identities.
"""

from __future__ import annotations

from fractions import Fraction

from .cech import CechCochain
from .graded import Algebra, GradedExpr, ONE, ZERO


class UExpr:
    """Element of an algebra extended by central u, u^-1 (degree +-2)."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg, terms=None):
        self.alg = alg
        self.terms = terms or {}

    @classmethod
    def of(cls, expr, u_exp=0):
        return cls(expr.alg, {u_exp: expr} if expr.terms else {})

    def __add__(self, other):
        out = dict(self.terms)
        for k, e in other.terms.items():
            out[k] = out.get(k, self.alg.zero()) + e
        return UExpr(self.alg, {k: e for k, e in out.items() if e.terms})

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return UExpr(self.alg, {k: e * c for k, e in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out = {}
        for k1, e1 in self.terms.items():
            for k2, e2 in other.terms.items():
                p = e1 * e2
                if p.terms:
                    k = k1 + k2
                    out[k] = out.get(k, self.alg.zero()) + p
        return UExpr(self.alg, {k: e for k, e in out.items() if e.terms})

    def d_u(self, dt_gid):
        """d + u * (contraction of dt), termwise."""
        out = {}
        for uex, e in self.terms.items():
            de = self.alg.d(e)
            if de.terms:
                out[uex] = out.get(uex, self.alg.zero()) + de
            iota = _contract_dt(e, dt_gid)
            if iota.terms:
                out[uex + 1] = out.get(uex + 1, self.alg.zero()) + iota
        return UExpr(self.alg, {k: v for k, v in out.items() if v.terms})

    def is_zero(self):
        return all(e.is_zero() for e in self.terms.values())

    def __repr__(self):
        return " + ".join(f"u^{k}*({e.sexpr()})"
                          for k, e in sorted(self.terms.items())) or "0"


def _contract_dt(e, dt_gid):
    alg = e.alg
    out = {}
    for mono, coeff in e.terms.items():
        sign = 1
        for pos, g in enumerate(mono):
            if g == dt_gid:
                rest = mono[:pos] + mono[pos + 1:]
                out[rest] = out.get(rest, ZERO) + sign * coeff
                break
            if alg.gens[g].odd:
                sign = -sign
    return GradedExpr(alg, {k: v for k, v in out.items() if v})


def u_matrix(rows):
    return [[x if isinstance(x, UExpr) else UExpr.of(x) for x in row]
            for row in rows]


def u_mmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for l in range(1, k):
                acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return out


class AlgebraLegs:
    """Slot space over a plain graded algebra, with optional dt and u."""

    def __init__(self, alg, dt_gid=None, commutative=True):
        self.alg = alg
        self.dt_gid = dt_gid
        self.commutative = commutative

    def degree(self, key):
        return sum(self.alg.gens[g].degree for g in key)

    def unit_expand(self):
        return {(): ONE}

    def expand(self, expr, u_exp=0):
        """dict (key, u_shift) -> coeff from a GradedExpr or UExpr."""
        if isinstance(expr, UExpr):
            out = {}
            for k, e in expr.terms.items():
                for m, c in e.normalize().terms.items():
                    out[(m, u_exp + k)] = out.get((m, u_exp + k), ZERO) + c
            return out
        return {(m, u_exp): c for m, c in expr.normalize().terms.items()}

    def mul(self, k1, k2):
        e = GradedExpr(self.alg, {k1: ONE}) * GradedExpr(self.alg, {k2: ONE})
        return self.expand(e)

    def diff(self, key):
        out = self.expand(self.alg.d(GradedExpr(self.alg, {key: ONE})))
        if self.dt_gid is not None and self.dt_gid in key:
            sign = 1
            for pos, g in enumerate(key):
                if g == self.dt_gid:
                    rest = key[:pos] + key[pos + 1:]
                    out[(rest, 1)] = out.get((rest, 1), ZERO) + sign
                    break
                if self.alg.gens[g].odd:
                    sign = -sign
        return out

    def serialize(self, key):
        return GradedExpr(self.alg, {key: ONE}).sexpr()


class CechLegs:
    """Slot space over a Cech complex: keys are (simplex, monomial) pairs.

    The differential is the equivariant total differential d_u + (-1)^q
    delta of this package; the product is the cup on basis elements.
    """

    def __init__(self, cx, dt_gid=None):
        self.cx = cx
        self.dt_gid = dt_gid
        self.commutative = False

    def degree(self, key):
        s, m = key
        return len(s) - 1 + sum(self.cx.alg.gens[g].degree for g in m)

    def unit_expand(self):
        return {((a,), ()): ONE for a in self.cx.nerve.charts}

    def expand(self, coch, u_exp=0):
        out = {}
        items = coch.items() if isinstance(coch, dict) else coch.comp.items()
        for s, e in items:
            if isinstance(e, UExpr):
                for k, ee in e.terms.items():
                    for m, c in ee.normalize().terms.items():
                        key = ((s, m), u_exp + k)
                        out[key] = out.get(key, ZERO) + c
            else:
                for m, c in e.normalize().terms.items():
                    key = ((s, m), u_exp)
                    out[key] = out.get(key, ZERO) + c
        return out

    def mul(self, key1, key2):
        (s1, m1), (s2, m2) = key1, key2
        if s1[-1] != s2[0]:
            return {}
        joined = s1 + s2[1:]
        if joined not in self.cx.nerve:
            return {}
        p1 = len(s1) - 1
        q2 = sum(self.cx.alg.gens[g].degree for g in m2)
        sign = -1 if (p1 * q2) % 2 else 1
        prod = (self.cx.restrict(GradedExpr(self.cx.alg, {m1: ONE}), joined)
                * self.cx.restrict(GradedExpr(self.cx.alg, {m2: ONE}), joined))
        return self.expand({joined: prod * sign})

    def diff(self, key):
        s, m = key
        alg = self.cx.alg
        e = GradedExpr(alg, {m: ONE})
        q = sum(alg.gens[g].degree for g in m)
        out = self.expand({s: self.cx.normalize_component(s, alg.d(e))})
        if self.dt_gid is not None and self.dt_gid in m:
            sign = 1
            for pos, g in enumerate(m):
                if g == self.dt_gid:
                    rest = m[:pos] + m[pos + 1:]
                    key2 = ((s, rest), 1)
                    out[key2] = out.get(key2, ZERO) + sign
                    break
                if alg.gens[g].odd:
                    sign = -sign
        dsgn = -1 if q % 2 else 1
        for tgt in self.cx.nerve.simplices:
            if len(tgt) != len(s) + 1:
                continue
            for i in range(len(tgt)):
                if tgt[:i] + tgt[i + 1:] == s:
                    r = self.cx.restrict(e, tgt)
                    isgn = -1 if i % 2 else 1
                    for m2, c in r.terms.items():
                        key2 = ((tgt, m2), 0)
                        out[key2] = out.get(key2, ZERO) + dsgn * isgn * c
        return out

    def serialize(self, key):
        s, m = key
        return (",".join(map(str, s)) + ":"
                + GradedExpr(self.cx.alg, {m: ONE}).sexpr())


class Chains:
    """Formal sums of words over a slot space.

    Keys are (u_exp, coeff, legs); coeff is None for one-sided bar words.
    Words with a degree-0 leg are struck out on construction.
    """

    __slots__ = ("legs", "coeffs", "terms")

    def __init__(self, legspace, coeffspace=None, terms=None):
        self.legs = legspace
        self.coeffs = coeffspace if coeffspace is not None else legspace
        self.terms = terms or {}

    def put(self, u_exp, coeff, legs, value):
        if any(self.legs.degree(k) == 0 for k in legs):
            return
        key = (u_exp, coeff, tuple(legs))
        self.terms[key] = self.terms.get(key, ZERO) + value
        if not self.terms[key]:
            del self.terms[key]

    def __add__(self, other):
        out = Chains(self.legs, self.coeffs, dict(self.terms))
        for key, c in other.terms.items():
            out.terms[key] = out.terms.get(key, ZERO) + c
            if not out.terms[key]:
                del out.terms[key]
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return Chains(self.legs, self.coeffs,
                      {k: c * s for k, c in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def max_length(self):
        return max((len(l) for (_, _, l) in self.terms), default=0)

    def truncate(self, trunc):
        return Chains(self.legs, self.coeffs,
                      {k: c for k, c in self.terms.items()
                       if len(k[2]) <= trunc})

    def _slots(self, coeff, legs):
        return [coeff] + list(legs)

    def hochschild_b(self):
        """Hochschild boundary, internal differential included."""
        out = Chains(self.legs, self.coeffs)
        L = self.legs
        for (u_exp, c0, legs), cval in self.terms.items():
            if c0 is None:
                raise ValueError("use bar_d for words without a coefficient")
            slots = self._slots(c0, legs)
            n = len(slots) - 1
            sh = [L.degree(a) - 1 for a in slots]
            for i in range(n + 1):
                E = sum(sh[:i])
                sgn = (-1 if E % 2 else 1) * -1
                space = self.coeffs if i == 0 else L
                for (k2, du), c2 in space.diff(slots[i]).items():
                    ns = slots[:i] + [k2] + slots[i + 1:]
                    out.put(u_exp + du, ns[0], ns[1:], sgn * cval * c2)
            for i in range(n):
                E = sum(sh[:i])
                sgn = -1 if (E + sh[i]) % 2 else 1
                space = self.coeffs if i == 0 else L
                for (k2, du), c2 in space.mul(slots[i], slots[i + 1]).items():
                    ns = slots[:i] + [k2] + slots[i + 2:]
                    out.put(u_exp + du, ns[0], ns[1:], sgn * cval * c2)
            if n >= 1:
                E = sum(sh[:n])
                sgn = -1 if (sh[n] * (E + 1)) % 2 else 1
                for (k2, du), c2 in self.coeffs.mul(slots[n], slots[0]).items():
                    ns = [k2] + slots[1:n]
                    out.put(u_exp + du, ns[0], ns[1:], sgn * cval * c2)
        return out

    def connes_B(self):
        """Connes operator: unit coefficient inserted after cyclic rotations."""
        out = Chains(self.legs, self.coeffs)
        units = self.coeffs.unit_expand()
        for (u_exp, c0, legs), cval in self.terms.items():
            if c0 is None:
                raise ValueError("B needs a coefficient slot")
            slots = self._slots(c0, legs)
            sh = [self.legs.degree(a) - 1 for a in slots]
            cur = slots[:]
            shc = sh[:]
            sgn = 1
            for _ in range(len(slots)):
                for uk, uc in units.items():
                    out.put(u_exp, uk, tuple(cur), sgn * cval * uc)
                ksz = (shc[-1] * sum(shc[:-1])) % 2
                sgn = sgn * (-1 if ksz else 1)
                cur = [cur[-1]] + cur[:-1]
                shc = [shc[-1]] + shc[:-1]
        return out

    def bar_d(self):
        """Normalized one-sided bar differential (no coefficient slot)."""
        out = Chains(self.legs, self.coeffs)
        L = self.legs
        for (u_exp, c0, legs), cval in self.terms.items():
            sh = [L.degree(k) - 1 for k in legs]
            for i in range(len(legs)):
                E = sum(sh[:i])
                sgn = (-1 if E % 2 else 1) * -1
                for (k2, du), c2 in L.diff(legs[i]).items():
                    out.put(u_exp + du, c0,
                            legs[:i] + (k2,) + legs[i + 1:], sgn * cval * c2)
            for i in range(len(legs) - 1):
                E = sum(sh[:i])
                sgn = -1 if (E + sh[i]) % 2 else 1
                for (k2, du), c2 in L.mul(legs[i], legs[i + 1]).items():
                    out.put(u_exp + du, c0,
                            legs[:i] + (k2,) + legs[i + 2:], sgn * cval * c2)
        return out

    def deconcat(self):
        """Bar coproduct: {((left legs), (right legs)): coefficient}."""
        out = {}
        for (u_exp, c0, legs), cval in self.terms.items():
            for i in range(len(legs) + 1):
                key = (legs[:i], legs[i:])
                out[key] = out.get(key, ZERO) + cval
        return out

    def serialize(self):
        rows = []
        for (u_exp, c0, legs), cval in sorted(self.terms.items(), key=str):
            rows.append({
                "u": u_exp,
                "legs": [self.legs.serialize(k) for k in legs],
                "coeff": None if c0 is None else self.coeffs.serialize(c0),
                "coefficient": str(cval),
            })
        return rows

    def __repr__(self):
        bits = []
        for (u_exp, c0, legs), cval in sorted(self.terms.items(),
                                              key=str)[:10]:
            l = "|".join(self.legs.serialize(k) for k in legs)
            cc = "" if c0 is None else "." + self.coeffs.serialize(c0)
            up = f"u^{u_exp} " if u_exp else ""
            bits.append(f"{cval} {up}[{l}]{cc}")
        more = "" if len(self.terms) <= 10 else f" ... ({len(self.terms)})"
        return (" + ".join(bits) or "0") + more


def word(legspace, coeffspace, exprs, coeff_expr, u_exp=0):
    """Build Chains from leg expressions and a coefficient expression.

    coeff_expr None builds a bar word.  Leg expressions may be GradedExpr,
    UExpr, or CechCochain depending on the slot space.
    """
    ch = Chains(legspace, coeffspace)
    base = [((), u_exp, ONE)]
    for e in exprs:
        nxt = []
        for legs, uex, c in base:
            for (k, du), c2 in legspace.expand(e).items():
                if legspace.degree(k) == 0:
                    continue
                nxt.append((legs + (k,), uex + du, c * c2))
        base = nxt
    for legs, uex, c in base:
        if coeff_expr is None:
            ch.put(uex, None, legs, c)
        else:
            for (k, du), c2 in coeffspace.expand(coeff_expr).items():
                ch.put(uex + du, k, legs, c * c2)
    return ch
