"""Finite ordered covers, transition cocycles and the Cech-de Rham complex.

Components of a cochain all live in one shared chart Algebra; what varies
per simplex is the substitution homomorphism used when a component is
restricted into a larger simplex (transition entries collapse to products
of consecutive ones, connection matrices conjugate, partition-of-unity
bumps vanish off their chart).

Sign conventions, fixed once so that the total differential squares to zero
and is a derivation for the cup product:

    cup:    (h . k)_(a0..ap+q) = (-1)^(p * q2) h_(a0..ap) k_(ap..ap+q)
            where p is the Cech degree of h and q2 the form degree of k,
    total:  D = d + (-1)^q delta  on a component of form degree q.
"""

from __future__ import annotations

from fractions import Fraction

from .graded import Algebra, GradedExpr, substitute, ONE, ZERO
from .matrices import det, eye, inverse, mat_is_zero, madd, mmul, mmap, msub


class Nerve:
    """Finite ordered simplicial complex of strictly increasing index tuples."""

    def __init__(self, simplices):
        simps = set()
        for s in simplices:
            s = tuple(s)
            if list(s) != sorted(set(s)):
                raise ValueError(f"simplex {s} is not strictly increasing")
            simps.add(s)
        work = list(simps)
        while work:
            s = work.pop()
            for sub in _faces(s):
                if sub not in simps:
                    simps.add(sub)
                    work.append(sub)
        self.simplices = frozenset(simps)
        self.charts = tuple(sorted({a for s in simps for a in s}))

    def __contains__(self, s):
        return tuple(s) in self.simplices

    def of_dim(self, p):
        return sorted(s for s in self.simplices if len(s) == p + 1)

    def max_dim(self):
        return max(len(s) for s in self.simplices) - 1

    def compatible(self, indices):
        """The simplex spanned by the given indices, or None."""
        s = tuple(sorted(set(indices)))
        return s if s in self.simplices else None


def _faces(s):
    for i in range(len(s)):
        f = s[:i] + s[i + 1:]
        if f:
            yield f


class CechComplex:
    """The Cech-de Rham bicomplex over a nerve, with one shared chart algebra."""

    def __init__(self, nerve, alg=None, name="charts"):
        self.nerve = nerve
        self.alg = alg if alg is not None else Algebra(name)
        self._subs = {s: {} for s in nerve.simplices}
        self._pou_phi = {}      # chart -> (phi_gid, dphi_gid)
        self._valid_cache = {}

    # -- structure registration -------------------------------------------------

    def add_substitution(self, simplex, gid, expr):
        self._subs[tuple(simplex)][gid] = expr

    def register_pou(self):
        """Formal partition of unity: bumps phi_a with sum 1, d(phi_a) = dphi_a."""
        if self._pou_phi:
            return self._pou_phi
        for a in self.nerve.charts:
            phi = self.alg.gen(f"phi{a}", 0, sortkey=("pou", "phi", a))
            dphi = self.alg.gen(f"dphi{a}", 1, sortkey=("pou", "dphi", a))
            self.alg.set_differential(phi, dphi)
            self.alg.set_differential(dphi, self.alg.zero())
            self._pou_phi[a] = (phi.single_gid(), dphi.single_gid())
        return self._pou_phi

    def pou_bump(self, a):
        gid, _ = self._pou_phi[a]
        return GradedExpr(self.alg, {(gid,): ONE})

    def _valid_bumps(self, simplex):
        hit = self._valid_cache.get(simplex)
        if hit is None:
            hit = tuple(a for a in self.nerve.charts
                        if self.nerve.compatible(simplex + (a,)))
            self._valid_cache[simplex] = hit
        return hit

    # -- restriction and normal form ----------------------------------------------

    def restrict(self, expr, simplex):
        """Restriction homomorphism into the algebra of the given simplex."""
        simplex = tuple(simplex)
        mapping = dict(self._subs.get(simplex, {}))
        if self._pou_phi:
            valid = set(self._valid_bumps(simplex))
            for a, (phi, dphi) in self._pou_phi.items():
                if a not in valid:
                    mapping[phi] = self.alg.zero()
                    mapping[dphi] = self.alg.zero()
        if mapping:
            expr = substitute(expr, mapping, self.alg)
        return self.normalize_component(simplex, expr)

    def normalize_component(self, simplex, expr):
        """Apply the per-simplex partition relations (sum phi = 1, sum dphi = 0)."""
        if not self._pou_phi:
            return expr.normalize()
        simplex = tuple(simplex)
        valid = self._valid_bumps(simplex)
        invalid = {}
        for a, (phi, dphi) in self._pou_phi.items():
            if a not in valid:
                invalid[phi] = self.alg.zero()
                invalid[dphi] = self.alg.zero()
        if invalid:
            expr = substitute(expr, invalid, self.alg)
        if valid:
            top = valid[-1]
            phi_top, dphi_top = self._pou_phi[top]
            rest_phi = self.alg.one()
            rest_dphi = self.alg.zero()
            for a in valid[:-1]:
                p, dp = self._pou_phi[a]
                rest_phi = rest_phi - GradedExpr(self.alg, {(p,): ONE})
                rest_dphi = rest_dphi - GradedExpr(self.alg, {(dp,): ONE})
            expr = substitute(expr, {phi_top: rest_phi, dphi_top: rest_dphi},
                              self.alg)
        return expr.normalize()

    # -- cochains -------------------------------------------------------------------

    def normalize_global(self, expr):
        """Normal form in the global context (every bump is supported)."""
        if not self._pou_phi:
            return expr.normalize()
        charts = self.nerve.charts
        top = charts[-1]
        phi_top, dphi_top = self._pou_phi[top]
        rest_phi = self.alg.one()
        rest_dphi = self.alg.zero()
        for a in charts[:-1]:
            p, dp = self._pou_phi[a]
            rest_phi = rest_phi - GradedExpr(self.alg, {(p,): ONE})
            rest_dphi = rest_dphi - GradedExpr(self.alg, {(dp,): ONE})
        return substitute(expr, {phi_top: rest_phi, dphi_top: rest_dphi},
                          self.alg).normalize()

    def cochain(self, components):
        comp = {}
        for s, e in components.items():
            s = tuple(s)
            if s not in self.nerve:
                raise KeyError(f"simplex {s} not in nerve")
            e = self.restrict(e, s)
            if e.terms:
                comp[s] = e
        return CechCochain(self, comp)

    def zero(self):
        return CechCochain(self, {})

    def unit(self):
        return self.cochain({(a,): self.alg.one() for a in self.nerve.charts})

    def localize_form(self, expr):
        """Cech degree 0 cochain obtained by restricting a global expression."""
        return self.cochain({(a,): self.restrict(expr, (a,))
                             for a in self.nerve.charts})


class CechCochain:
    """Nerve-indexed family of chart expressions; may mix bidegrees."""

    __slots__ = ("cx", "comp")

    def __init__(self, cx, comp):
        self.cx = cx
        self.comp = comp

    def __add__(self, other):
        if other == 0:
            return self
        assert other.cx is self.cx
        out = dict(self.comp)
        for s, e in other.comp.items():
            out[s] = out.get(s, self.cx.alg.zero()) + e
        return CechCochain(self.cx, {s: e for s, e in out.items()
                                     if not e.is_zero()})

    __radd__ = __add__

    def __neg__(self):
        return CechCochain(self.cx, {s: -e for s, e in self.comp.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return CechCochain(self.cx, {s: e * c for s, e in self.comp.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return self.cup(other)

    __rmul__ = scale

    def is_zero(self):
        return all(e.is_zero() for e in self.comp.values())

    def cup(self, other):
        """Cup product with the sign (-1)^(Cech degree of left x form degree of right)."""
        assert other.cx is self.cx
        cx = self.cx
        out = {}
        for s1, e1 in self.comp.items():
            p1 = len(s1) - 1
            for s2, e2 in other.comp.items():
                if s1[-1] != s2[0]:
                    continue
                joined = s1 + s2[1:]
                if list(joined) != sorted(set(joined)) or joined not in cx.nerve:
                    continue
                r1 = cx.restrict(e1, joined)
                for q2, part in e2.homogeneous_parts().items():
                    sign = -1 if (p1 * q2) % 2 else 1
                    prod = r1 * cx.restrict(part, joined) * sign
                    if prod.terms:
                        out[joined] = out.get(joined, cx.alg.zero()) + prod
        return CechCochain(cx, {s: e for s, e in out.items() if not e.is_zero()})

    def cech_delta(self):
        """Plain Cech differential (alternating sum of restrictions, no form sign)."""
        cx = self.cx
        out = {}
        for tgt in cx.nerve.simplices:
            n = len(tgt)
            acc = cx.alg.zero()
            hit = False
            for i in range(n):
                face = tgt[:i] + tgt[i + 1:]
                if not face:
                    continue
                e = self.comp.get(face)
                if e is None:
                    continue
                hit = True
                term = cx.restrict(e, tgt)
                acc = acc + (term if i % 2 == 0 else -term)
            if hit and not acc.is_zero():
                out[tgt] = acc
        return CechCochain(cx, out)

    def form_d(self):
        """Chart-level de Rham differential, componentwise (no sign)."""
        cx = self.cx
        out = {}
        for s, e in self.comp.items():
            de = cx.normalize_component(s, cx.alg.d(e))
            if not de.is_zero():
                out[s] = de
        return CechCochain(cx, out)

    def total_d(self):
        """Total differential D = d + (-1)^q delta; squares to zero."""
        cx = self.cx
        out = self.form_d()
        plus = {}
        minus = {}
        for s, e in self.comp.items():
            for q, part in e.homogeneous_parts().items():
                tgt = minus if q % 2 else plus
                tgt[s] = tgt.get(s, cx.alg.zero()) + part
        if plus:
            out = out + CechCochain(cx, plus).cech_delta()
        if minus:
            out = out - CechCochain(cx, minus).cech_delta()
        return out

    def bidegrees(self):
        out = set()
        for s, e in self.comp.items():
            for q in e.homogeneous_parts():
                out.add((len(s) - 1, q))
        return sorted(out)

    def serialize(self):
        return {",".join(map(str, s)): e.sexpr()
                for s, e in sorted(self.comp.items())}

    def __repr__(self):
        if not self.comp:
            return "CechCochain(0)"
        bits = [f"{s}: {e.sexpr()}" for s, e in sorted(self.comp.items())]
        return "CechCochain{" + "; ".join(bits) + "}"


class TransitionCocycle:
    """Matrices g_ab per 1-simplex, with localized determinant inverses.

    In generic mode the entries are opaque formal generators and the cocycle
    relation is installed as a substitution (on any simplex, a non-consecutive
    g collapses to the product of consecutive ones).  In concrete mode the
    entries are given chart expressions and the relation is verified.
    """

    def __init__(self, cech, n):
        self.cech = cech
        self.n = n
        self.g = {}        # edge -> matrix
        self.ginv = {}     # edge -> matrix (via localized det)
        self.dinv = {}     # edge -> inverse-of-det generator expr

    @classmethod
    def generic(cls, cech, n):
        tc = cls(cech, n)
        alg = cech.alg
        for edge in cech.nerve.of_dim(1):
            a, b = edge
            rows = []
            for i in range(n):
                row = []
                for j in range(n):
                    gij = alg.gen(f"g{a}_{b}_{i}{j}", 0,
                                  sortkey=("tc", a, b, "g", i, j))
                    dgij = alg.gen(f"dg{a}_{b}_{i}{j}", 1,
                                   sortkey=("tc", a, b, "dg", i, j))
                    alg.set_differential(gij, dgij)
                    alg.set_differential(dgij, alg.zero())
                    row.append(gij)
                rows.append(row)
            tc.g[edge] = rows
            tc.dinv[edge] = alg.localize(det(rows), f"Dg{a}_{b}")
            tc.ginv[edge] = mmap(_adj(rows), lambda x, d=tc.dinv[edge]: d * x)
        tc._install_cocycle_substitutions()
        return tc

    @classmethod
    def from_matrices(cls, cech, n, mats):
        """Concrete cocycle; raises if g_ac != g_ab g_bc on some 2-simplex."""
        tc = cls(cech, n)
        alg = cech.alg
        for edge, rows in mats.items():
            edge = tuple(edge)
            tc.g[edge] = [[alg.scalar(v) if isinstance(v, int) else v
                           for v in row] for row in rows]
        for edge, rows in tc.g.items():
            a, b = edge
            tc.dinv[edge] = alg.localize(det(rows), f"Dg{a}_{b}")
            tc.ginv[edge] = mmap(_adj(rows), lambda x, d=tc.dinv[edge]: d * x)
        for tri in cech.nerve.of_dim(2):
            a, b, c = tri
            lhs = tc.restricted_g((a, c), tri)
            rhs = mmul(tc.restricted_g((a, b), tri), tc.restricted_g((b, c), tri))
            if not mat_is_zero(msub(lhs, rhs)):
                raise ValueError(f"cocycle relation violated on 2-simplex {tri}")
        return tc

    def _install_cocycle_substitutions(self):
        cech, alg = self.cech, self.cech.alg
        for s in cech.nerve.simplices:
            if len(s) < 3:
                continue
            for i in range(len(s)):
                for j in range(i + 1, len(s)):
                    if j == i + 1:
                        continue
                    edge = (s[i], s[j])
                    prod = eye(alg, self.n)
                    prod_inv = eye(alg, self.n)
                    dprod = alg.one()
                    for k in range(i, j):
                        e2 = (s[k], s[k + 1])
                        prod = mmul(prod, self.g[e2])
                        prod_inv = mmul(self.ginv[e2], prod_inv)
                        dprod = dprod * self.dinv[e2]
                    for a in range(self.n):
                        for b in range(self.n):
                            gid = self.g[edge][a][b].single_gid()
                            cech.add_substitution(s, gid, prod[a][b])
                            dgid = alg._diff[gid].single_gid()
                            cech.add_substitution(s, dgid, alg.d(prod[a][b]))
                    cech.add_substitution(s, self.dinv[edge].single_gid(), dprod)

    def restricted_g(self, edge, simplex):
        return mmap(self.g[tuple(edge)],
                    lambda x: self.cech.restrict(x, tuple(simplex)))

    def pullback_map(self, group):
        """Substitution dicts per edge: u_ij -> g_ij, du -> dg, Dinv -> det(g)^-1."""
        maps = {}
        for edge, rows in self.g.items():
            mapping = {}
            for i in range(self.n):
                for j in range(self.n):
                    mapping[group.u[i][j].single_gid()] = rows[i][j]
                    mapping[group.du[i][j].single_gid()] = self.cech.alg.d(rows[i][j])
            mapping[group.D.single_gid()] = self.dinv[edge]
            maps[edge] = mapping
        return maps


def _adj(rows):
    from .matrices import adjugate
    return adjugate(rows)


class ConnectionData:
    """Per-chart connection and curvature matrices with their rewrite rules.

    The registered rule set is

        d(A) = F - A.A,   d(F) = F.A - A.F,
        A_b  = g^-1 A_a g + g^-1 dg,   F_b = g^-1 F_a g   on overlaps (a, b),

    the unique orientation for which the differential commutes with the
    overlap substitutions (self_check verifies both d^2 = 0 and that
    compatibility).  Pairing the gauge transformation above with
    d(A) = F + A.A instead is inconsistent: the two conventions differ by
    A -> -A, F -> -F.
    """

    def __init__(self, cech, tc, generic=True, mats=None):
        self.cech = cech
        self.tc = tc
        self.n = tc.n
        alg = cech.alg
        self.A = {}
        self.F = {}
        if generic:
            for a in cech.nerve.charts:
                self.A[a] = [[alg.gen(f"A{a}_{i}{j}", 1,
                                      sortkey=("conn", a, "A", i, j))
                              for j in range(self.n)] for i in range(self.n)]
                self.F[a] = [[alg.gen(f"F{a}_{i}{j}", 2,
                                      sortkey=("conn", a, "F", i, j))
                              for j in range(self.n)] for i in range(self.n)]
        else:
            for a in cech.nerve.charts:
                self.A[a] = mats[a]
                dA = mmap(self.A[a], alg.d)
                self.F[a] = madd(dA, mmul(self.A[a], self.A[a]))
        if generic:
            for a in cech.nerve.charts:
                A, F = self.A[a], self.F[a]
                AA = mmul(A, A)
                AF = mmul(A, F)
                FA = mmul(F, A)
                for i in range(self.n):
                    for j in range(self.n):
                        alg.set_differential(A[i][j], F[i][j] - AA[i][j])
                        alg.set_differential(F[i][j], FA[i][j] - AF[i][j])
            self._install_overlap_substitutions()

    def _install_overlap_substitutions(self):
        cech, alg, n = self.cech, self.cech.alg, self.n
        for s in cech.nerve.simplices:
            if len(s) < 2:
                continue
            base = s[0]
            for b in s[1:]:
                edge = (base, b)
                g = mmap(self.tc.g[edge], lambda x: cech.restrict(x, s))
                gi = mmap(self.tc.ginv[edge], lambda x: cech.restrict(x, s))
                dg = mmap(g, alg.d)
                Ab = madd(mmul(mmul(gi, self.A[base]), g), mmul(gi, dg))
                Fb = mmul(mmul(gi, self.F[base]), g)
                for i in range(n):
                    for j in range(n):
                        cech.add_substitution(s, self.A[b][i][j].single_gid(),
                                              Ab[i][j])
                        cech.add_substitution(s, self.F[b][i][j].single_gid(),
                                              Fb[i][j])

    def self_check(self):
        """d^2 = 0 on the connection generators and overlap compatibility."""
        alg = self.cech.alg
        for a in self.A:
            for row in self.A[a] + self.F[a]:
                for e in row:
                    if not alg.d(alg.d(e)).is_zero():
                        return False
        for s in self.cech.nerve.of_dim(1):
            a, b = s
            for i in range(self.n):
                for j in range(self.n):
                    lhs = self.cech.restrict(alg.d(self.A[b][i][j]), s)
                    rhs = alg.d(self.cech.restrict(self.A[b][i][j], s))
                    if not (lhs - rhs).is_zero():
                        return False
        return True
