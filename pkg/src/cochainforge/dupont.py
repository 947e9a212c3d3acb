"""Polynomial forms on standard simplices and the nerve realization.

Omega_n is the free graded-commutative algebra on t_0..t_n, dt_0..dt_n
modulo sum t_i = 1, sum dt_i = 0, realized by eliminating t_0 and dt_0.
The realization of the Cech cosimplicial algebra collects, per level p, a
chart form on every nondecreasing (p+1)-tuple tensored with a form on the
p-simplex, subject to the face/degeneracy matching condition.

The comparison maps:

    w({h})_p = (+) sum over k-tuples of t_{k_0} d(t_{k_1} d(... t_{k_m}
               h~_{k_0..k_m})), with h~ the antisymmetrized components,
    v        = prod_n n! (Id (x) integral over the n-simplex),

with v o w = Id exactly in rational arithmetic and both maps chain maps for
the total differentials (the antisymmetrization sign of w is fixed by the
chain-map requirement).
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .cech import CechCochain
from .graded import Algebra, GradedExpr, substitute, ONE, ZERO
from .tensor import TensorExpr, tensor_diff


class SimplexForms:
    """Polynomial differential forms on the standard n-simplex.

    Internally generated by t_1..t_n, dt_1..dt_n; t_0 and dt_0 are the
    derived expressions 1 - sum t_i and -sum dt_i.
    """

    def __init__(self, n):
        self.n = n
        alg = Algebra(f"Omega({n})")
        self.alg = alg
        self._t = [None]
        self._dt = [None]
        for i in range(1, n + 1):
            t = alg.gen(f"t{i}", 0, sortkey=("simp", "t", i))
            dt = alg.gen(f"dt{i}", 1, sortkey=("simp", "dt", i))
            alg.set_differential(t, dt)
            alg.set_differential(dt, alg.zero())
            self._t.append(t)
            self._dt.append(dt)

    def t(self, i):
        if i == 0:
            out = self.alg.one()
            for j in range(1, self.n + 1):
                out = out - self._t[j]
            return out
        return self._t[i]

    def dt(self, i):
        if i == 0:
            out = self.alg.zero()
            for j in range(1, self.n + 1):
                out = out - self._dt[j]
            return out
        return self._dt[i]

    def face_map(self, target, k):
        """Substitution dict realizing the k-th face Omega_target -> self.

        self has dimension target.n - 1; t_i pulls back per
        t_i -> t_i (i < k), 0 (i = k), t_{i-1} (i > k).
        """
        assert self.n == target.n - 1
        mapping = {}
        for i in range(1, target.n + 1):
            if i < k:
                img = self.t(i)
            elif i == k:
                img = self.alg.zero()
            else:
                img = self.t(i - 1)
            mapping[target._t[i].single_gid()] = img
            mapping[target._dt[i].single_gid()] = self.alg.d(img)
        return mapping

    def degeneracy_map(self, target, j):
        """Substitution dict for the j-th degeneracy Omega_target -> self.

        self has dimension target.n + 1; t_i -> t_i (i < j),
        t_j + t_{j+1} (i = j), t_{i+1} (i > j).
        """
        assert self.n == target.n + 1
        mapping = {}
        for i in range(1, target.n + 1):
            if i < j:
                img = self.t(i)
            elif i == j:
                img = self.t(i) + self.t(i + 1)
            else:
                img = self.t(i + 1)
            mapping[target._t[i].single_gid()] = img
            mapping[target._dt[i].single_gid()] = self.alg.d(img)
        return mapping


_SIMPLEX_CACHE = {}


def simplex_forms(n):
    """Shared per-dimension instances, so realizations can be compared."""
    if n not in _SIMPLEX_CACHE:
        _SIMPLEX_CACHE[n] = SimplexForms(n)
    return _SIMPLEX_CACHE[n]


def simplex_integrate(n, form, forms=None):
    """Exact integral of a top-degree form over the n-simplex.

    Monomial rule: the dt part must be a permutation of dt_1..dt_n; the
    polynomial part integrates by the Dirichlet formula
    prod a_i! / (n + sum a_i)! (with t_0 eliminated, a_0 = 0).
    """
    if n == 0:
        total = ZERO
        for mono, c in form.normalize().terms.items():
            if mono:
                raise ValueError("degree mismatch for 0-simplex integration")
            total += c
        return total
    alg = form.alg
    total = ZERO
    for mono, c in form.normalize().terms.items():
        t_exp = {}
        dts = []
        for g in mono:
            gen = alg.gens[g]
            if gen.degree == 0:
                t_exp[gen.name] = t_exp.get(gen.name, 0) + 1
            else:
                dts.append(gen.name)
        if len(dts) != n:
            raise ValueError(f"form degree {len(dts)} != simplex dimension {n}")
        order = [int(nm[2:]) for nm in dts]
        if sorted(order) != list(range(1, n + 1)):
            raise ValueError("unexpected dt content in top form")
        sign = _perm_sign(order)
        a = [t_exp.get(f"t{i}", 0) for i in range(1, n + 1)]
        num = 1
        for ai in a:
            num *= factorial(ai)
        total += c * sign * Fraction(num, factorial(n + sum(a)))
    return total


def _perm_sign(order):
    sign = 1
    order = list(order)
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                sign = -sign
    return sign


def integrate_oracle(forms, form):
    """Iterated one-dimensional integration over the simplex.

    Strips the (sorted) dt_1..dt_n factor, then integrates the polynomial
    part coordinate by coordinate with exact bounds t_n in [0, 1 - sum].
    Independent of the closed-form rule above.
    """
    n = forms.n
    alg = forms.alg
    poly = alg.zero()
    for mono, c in form.normalize().terms.items():
        t_part = []
        dts = []
        for g in mono:
            gen = alg.gens[g]
            (t_part if gen.degree == 0 else dts).append(g)
        order = [int(alg.gens[g].name[2:]) for g in dts]
        if sorted(order) != list(range(1, n + 1)):
            raise ValueError("not a top form")
        poly = poly + GradedExpr(alg, {tuple(t_part): c * _perm_sign(order)})
    for k in range(n, 0, -1):
        poly = _integrate_var(forms, poly, k)
    total = ZERO
    for mono, c in poly.normalize().terms.items():
        if mono:
            raise ValueError("integration left free variables")
        total += c
    return total


def _integrate_var(forms, poly, k):
    """Integrate t_k from 0 to 1 - t_1 - ... - t_{k-1}."""
    alg = forms.alg
    gid = forms._t[k].single_gid()
    upper = alg.one()
    for j in range(1, k):
        upper = upper - forms._t[j]
    out = alg.zero()
    for mono, c in poly.terms.items():
        exp = sum(1 for g in mono if g == gid)
        rest = tuple(g for g in mono if g != gid)
        anti = GradedExpr(alg, {rest: c * Fraction(1, exp + 1)})
        out = out + anti * upper ** (exp + 1)
    return out


class Realization:
    """Levels of the realized Cech cosimplicial algebra over a nerve.

    Level p holds, for each nondecreasing (p+1)-tuple of chart indices whose
    underlying set spans a nerve simplex, a two-leg tensor
    (chart form on the spanned simplex) (x) (form on the p-simplex).
    """

    def __init__(self, cx, cap=3):
        self.cx = cx
        self.cap = cap
        self.simplex = [simplex_forms(p) for p in range(cap + 1)]
        self.levels = {p: {} for p in range(cap + 1)}

    def tuples(self, p):
        charts = self.cx.nerve.charts
        out = []

        def rec(prefix):
            if len(prefix) == p + 1:
                if self.cx.nerve.compatible(tuple(prefix)):
                    out.append(tuple(prefix))
                return
            start = prefix[-1] if prefix else charts[0]
            for a in charts:
                if not prefix or a >= prefix[-1]:
                    rec(prefix + [a])
        rec([])
        return out

    def add(self, p, tup, tensor):
        cur = self.levels[p].get(tup)
        self.levels[p][tup] = tensor if cur is None else cur + tensor

    def __add__(self, other):
        out = Realization(self.cx, self.cap)
        for p in self.levels:
            for tup, tx in self.levels[p].items():
                out.add(p, tup, tx)
            for tup, tx in other.levels[p].items():
                out.add(p, tup, tx)
        return out

    def scale(self, c):
        out = Realization(self.cx, self.cap)
        for p in self.levels:
            for tup, tx in self.levels[p].items():
                out.add(p, tup, tx.scale(c))
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def is_zero(self):
        return all(not tx.normalize().terms
                   for lv in self.levels.values() for tx in lv.values())

    def total_d(self):
        out = Realization(self.cx, self.cap)
        for p, lv in self.levels.items():
            alg_s = self.simplex[p].alg
            for tup, tx in lv.items():
                spanned = self.cx.nerve.compatible(tup)

                def chart_d(e, spanned=spanned):
                    return self.cx.normalize_component(spanned,
                                                       self.cx.alg.d(e))
                out.add(p, tup, tensor_diff(tx, [chart_d, alg_s.d]))
        return out

    def compatible(self, levels=None):
        """Check the face/degeneracy matching condition."""
        levels = levels if levels is not None else range(1, self.cap + 1)
        for p in levels:
            if p > self.cap:
                continue
            small = self.simplex[p - 1]
            big = self.simplex[p]
            for k in range(p + 1):
                fmap = small.face_map(big, k)
                for tup in self.tuples(p):
                    face_tup = tup[:k] + tup[k + 1:]
                    # chart side: restriction of the level p-1 component
                    lhs = self.levels[p - 1].get(face_tup)
                    spanned = self.cx.nerve.compatible(tup)
                    if lhs is not None:
                        lhs_t = lhs.apply_leg(
                            0, lambda e: self.cx.restrict(e, spanned), 0)
                    else:
                        lhs_t = None
                    rhs = self.levels[p].get(tup)
                    if rhs is not None:
                        rhs_t = rhs.apply_leg(
                            1, lambda e: substitute(e, fmap, small.alg), 0)
                    else:
                        rhs_t = None
                    if lhs_t is None and rhs_t is None:
                        continue
                    if lhs_t is None or rhs_t is None:
                        probe = (rhs_t if lhs_t is None else lhs_t)
                        if probe.normalize().terms:
                            return False
                        continue
                    if (lhs_t - rhs_t).normalize().terms:
                        return False
        return True


def build_w(coch, cx, cap=3):
    """Realization of a Cech cochain by the nested t d(t d(...)) formula.

    A (m, q)-component enters with the sign (-1)^{qm}, the resolution of the
    sign ambiguity that makes w a chain map for the total differentials of
    this package (fixed by machine calibration, not guessed).
    """
    import itertools
    out = Realization(cx, cap)
    alg = cx.alg
    for sigma, comp in coch.comp.items():
        m = len(sigma) - 1
        for q, part in comp.homogeneous_parts().items():
            corr = -1 if (q * m) % 2 else 1
            for p in range(m, cap + 1):
                sf = out.simplex[p]
                for tup in out.tuples(p):
                    spanned = cx.nerve.compatible(tup)
                    acc = None
                    for ks in itertools.product(range(p + 1), repeat=m + 1):
                        idx = tuple(tup[k] for k in ks)
                        sign, sorted_idx = _antisym(idx)
                        if sign == 0 or sorted_idx != sigma:
                            continue
                        val = cx.restrict(part, spanned) * (sign * corr)
                        term = TensorExpr.from_exprs([val, sf.t(ks[-1])])
                        for k in ks[-2::-1]:
                            term = tensor_diff(term,
                                               [lambda e: cx.normalize_component(
                                                   spanned, alg.d(e)), sf.alg.d])
                            term = TensorExpr.from_exprs(
                                [cx.alg.one(), sf.t(k)]) * term
                        acc = term if acc is None else acc + term
                    if acc is not None:
                        out.add(p, tup, acc)
    return out


def _antisym(idx):
    lst = list(idx)
    if len(set(lst)) != len(lst):
        return 0, None
    sign = 1
    for i in range(len(lst)):
        for j in range(i + 1, len(lst)):
            if lst[i] > lst[j]:
                sign = -sign
    return sign, tuple(sorted(lst))


def build_v(r):
    """Collapse a realization element to a Cech cochain by fibre integration.

    With the antisymmetrized w above, the top part of every level already
    integrates to the bare component, so the level factor is 1 (the usual
    n! is absorbed into the sum over orderings); this is the normalization
    for which v o w = Id exactly and v is a chain map.
    """
    cx = r.cx
    comp = {}
    for p, lv in r.levels.items():
        sf = r.simplex[p]
        for tup, tx in lv.items():
            if len(set(tup)) != len(tup):
                continue
            sigma = tuple(sorted(tup))
            acc = cx.alg.zero()
            for word, c in tx.normalize().terms.items():
                chart_m, simp_m = word
                simp = GradedExpr(sf.alg, {simp_m: ONE})
                deg = sum(sf.alg.gens[g].degree for g in simp_m)
                if deg != p:
                    continue
                val = simplex_integrate(p, simp)
                if val:
                    acc = acc + GradedExpr(cx.alg, {chart_m: c * val})
            if acc.terms:
                comp[sigma] = comp.get(sigma, cx.alg.zero()) + acc
    return cx.cochain({s: e for s, e in comp.items() if not e.is_zero()})
