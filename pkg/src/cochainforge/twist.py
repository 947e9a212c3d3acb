"""Twisting cochains on the group coalgebra with Cech-de Rham values.

A twisting cochain is stored as a callable on group forms; the two builders
are the transition-cocycle map (counit minus pullback, supported on
1-simplices) and the connection map (Cartan-operator evaluation on charts
plus the degree-0 pullback part on overlaps).

The Maurer-Cartan residual is

    D(phi(x)) - phi(dx) - (phi * phi)(x),
    (phi * psi)(x) = sum (-1)^{|x^(1)|} phi(x^(1)) . psi(x^(2)),

with D the total differential of the Cech complex; the Koszul sign in the
convolution is forced by the degree of the maps being 1.
"""

from __future__ import annotations

from fractions import Fraction

from .graded import GradedExpr, substitute, ONE, ZERO
from .cech import CechCochain


class TwistingCochain:
    """Degree +1 linear map from the group coalgebra to a Cech complex."""

    def __init__(self, group, cech, fn, label="phi"):
        self.group = group
        self.cech = cech
        self.fn = fn
        self.label = label
        self.certificate = None

    def __call__(self, x):
        return self.fn(x)

    def star(self, other, x):
        """Convolution (self * other)(x) with the Koszul sign for odd maps."""
        cp = self.group.coproduct(x)
        alg = self.group.alg
        out = self.cech.zero()
        for word, c in cp.terms.items():
            left = GradedExpr(alg, {word[0]: ONE})
            right = GradedExpr(alg, {word[1]: ONE})
            sign = -1 if left.degree() % 2 else 1
            out = out + self.fn(left).cup(other.fn(right)).scale(sign * c)
        return out

    def mc_residual(self, x):
        dphi = self.fn(x).total_d()
        phid = self.fn(self.group.alg.d(x))
        return dphi - phid - self.star(self, x)

    def verify_mc(self, depth=2, sample=24, seed=0):
        """Certificate of the Maurer-Cartan equation on generators and words.

        Tests every generator, then a deterministic sample of products up to
        word length `depth`.  Raises MaurerCartanError if any residual fails
        to normalize to zero.
        """
        if depth < 1:
            raise ValueError("depth must be >= 1")
        items = []
        G = self.group
        gens = ([G.u[i][j] for i in range(G.n) for j in range(G.n)]
                + [G.du[i][j] for i in range(G.n) for j in range(G.n)]
                + [G.D])
        tests = list(gens)
        if depth >= 2:
            import random
            rng = random.Random(seed)
            pool = []
            layer = list(gens)
            for _ in range(depth - 1):
                layer = [a * b for a in layer for b in gens]
                layer = [w for w in layer if not w.is_zero()]
                pool.extend(layer)
            if len(pool) > sample:
                pool = rng.sample(pool, sample)
            tests.extend(pool)
        ok = True
        for x in tests:
            r = self.mc_residual(x)
            passed = r.is_zero()
            ok = ok and passed
            items.append({"element": x.sexpr(),
                          "residual": r.serialize(),
                          "pass": passed})
        cert = {"map": self.label, "depth": depth, "pass": ok, "items": items}
        if not ok:
            raise MaurerCartanError(cert)
        self.certificate = cert
        return cert


class MaurerCartanError(Exception):
    def __init__(self, cert):
        bad = [i["element"] for i in cert["items"] if not i["pass"]]
        super().__init__(f"Maurer-Cartan residual nonzero on {bad[:3]}")
        self.certificate = cert


def build_phi_P(tc, group, check=True):
    """Twisting cochain of a transition cocycle.

    phi(x) = { eps(x) 1_(ab) - g*_(ab)(x) } on every 1-simplex, where g* is
    the pullback substituting u -> g entries, du -> dg, Dinv -> det(g)^-1.
    """
    cech = tc.cech
    maps = tc.pullback_map(group)

    def fn(x):
        eps = group.counit(x)
        comp = {}
        for edge, mapping in maps.items():
            e = -substitute(x, mapping, cech.alg)
            if eps:
                e = e + cech.alg.scalar(eps)
            comp[edge] = e
        return cech.cochain(comp)

    phi = TwistingCochain(group, cech, fn, label="phi_P")
    if check:
        for tri in cech.nerve.of_dim(2):
            a, b, c = tri
            from .matrices import mmul, msub, mat_is_zero
            lhs = tc.restricted_g((a, c), tri)
            rhs = mmul(tc.restricted_g((a, b), tri),
                       tc.restricted_g((b, c), tri))
            if not mat_is_zero(msub(lhs, rhs)):
                raise ValueError(f"cocycle relation violated on {tri}")
    return phi


def build_xi(conn, tc, group):
    """Twisting cochain of a connection: Cartan evaluation plus pullback part.

    xi(x) = -{ sum_ij A_a^ij eps(X_ij x) + F_a^ij eps(I_ij x) }_a
          + { 1_(ab) eps(x) - g*_(ab)(x^0) }_(a<b)

    The overall sign of the chart part relative to the overlap part is the
    unique choice satisfying the Maurer-Cartan equation with the rule set of
    ConnectionData (it amounts to reading the connection matrices as -A, -F
    in the other sign convention for d(A)).
    """
    cech = tc.cech
    n = group.n
    X = [[group.cartan_X(i, j) for j in range(n)] for i in range(n)]
    I = [[group.cartan_I(i, j) for j in range(n)] for i in range(n)]
    maps = tc.pullback_map(group)

    def fn(x):
        comp = {}
        for a in cech.nerve.charts:
            e = cech.alg.zero()
            for i in range(n):
                for j in range(n):
                    cx_ = group.counit(X[i][j](x))
                    if cx_:
                        e = e - conn.A[a][i][j] * cx_
                    ci_ = group.counit(I[i][j](x))
                    if ci_:
                        e = e - conn.F[a][i][j] * ci_
            comp[(a,)] = e
        eps = group.counit(x)
        x0 = _degree0_part(x)
        for edge, mapping in maps.items():
            e = -substitute(x0, mapping, cech.alg)
            if eps:
                e = e + cech.alg.scalar(eps)
            comp[edge] = comp.get(edge, cech.alg.zero()) + e
        return cech.cochain(comp)

    return TwistingCochain(group, cech, fn, label="xi")


def _degree0_part(x):
    keep = {m: c for m, c in x.terms.items() if x.mono_degree(m) == 0}
    return GradedExpr(x.alg, keep)


class GaugeMap:
    """Degree 0 map c from the group coalgebra to the Cech complex.

    Convolution-invertible whenever c(1) = 1 and c - unit is locally
    conilpotent (true for all the maps built here: each convolution power of
    the difference eats at least one unit of form degree).
    """

    def __init__(self, group, cech, fn, label="c"):
        self.group = group
        self.cech = cech
        self.fn = fn
        self.label = label

    def __call__(self, x):
        return self.fn(x)

    @classmethod
    def identity(cls, group, cech):
        def fn(x):
            eps = group.counit(x)
            return cech.unit().scale(eps) if eps else cech.zero()
        return cls(group, cech, fn, label="id")

    @classmethod
    def exp_contraction(cls, group, conn, cech, sign=1):
        """c(x) = { eps(exp(sign * sum_ij A_a^ij (x) I_ij) x) }_a.

        The sum terminates because every contraction eats one unit of form
        degree.  Each application of A (x) I multiplies the accumulated
        target coefficient on the left with the Koszul sign (-1)^{k} for the
        k forms already present (I is odd and must cross them).
        """
        n = group.n
        I = [[group.cartan_I(i, j) for j in range(n)] for i in range(n)]

        def fn(x):
            comp = {}
            for a in cech.nerve.charts:
                acc = cech.alg.zero()
                for part in x.homogeneous_parts().values():
                    layer = [(part, cech.alg.one())]
                    fact = Fraction(1)
                    k = 0
                    while layer:
                        for y, coeff in layer:
                            eps = group.counit(y)
                            if eps:
                                acc = acc + coeff * (eps / fact)
                        kos = -sign if k % 2 else sign
                        k += 1
                        fact *= k
                        nxt = []
                        for y, coeff in layer:
                            for i in range(n):
                                for j in range(n):
                                    z = I[i][j](y)
                                    if z.terms:
                                        nxt.append((z, (conn.A[a][i][j] * coeff)
                                                    * kos))
                        layer = nxt
                comp[(a,)] = acc
            return cech.cochain(comp)

        return cls(group, cech, fn, label="exp(A.I)")

    @classmethod
    def cobounding(cls, group, cech, h_mats):
        """c_h(x) = { h_a^*(x) }_a for per-chart group elements h_a."""
        n = group.n
        maps = {}
        for a, rows in h_mats.items():
            mapping = {}
            for i in range(n):
                for j in range(n):
                    mapping[group.u[i][j].single_gid()] = rows[i][j]
                    mapping[group.du[i][j].single_gid()] = cech.alg.d(rows[i][j])
            from .matrices import det
            mapping[group.D.single_gid()] = cech.alg.localize(det(rows),
                                                              f"Dh{a}")
            maps[a] = mapping

        def fn(x):
            return cech.cochain({(a,): substitute(x, m, cech.alg)
                                 for a, m in maps.items()})

        return cls(group, cech, fn, label="h*")

    # -- convolution algebra ----------------------------------------------------

    def conv(self, other_fn, other_parity, x):
        """(c * f)(x) with f of the given parity."""
        cp = self.group.coproduct(x)
        alg = self.group.alg
        out = self.cech.zero()
        for word, c in cp.terms.items():
            left = GradedExpr(alg, {word[0]: ONE})
            right = GradedExpr(alg, {word[1]: ONE})
            sign = -1 if (other_parity * left.degree()) % 2 else 1
            out = out + self.fn(left).cup(other_fn(right)).scale(sign * c)
        return out

    def rconv(self, other_fn, other_parity, x):
        """(f * c)(x) -- c has parity 0 so no Koszul sign appears."""
        cp = self.group.coproduct(x)
        alg = self.group.alg
        out = self.cech.zero()
        for word, c in cp.terms.items():
            left = GradedExpr(alg, {word[0]: ONE})
            right = GradedExpr(alg, {word[1]: ONE})
            out = out + other_fn(left).cup(self.fn(right)).scale(c)
        return out

    def inverse_apply(self, x):
        """c^{-1}(x) by the geometric series in the convolution algebra."""
        G, cech = self.group, self.cech

        def r(y):          # c minus the convolution unit
            eps = G.counit(y)
            out = self.fn(y)
            if eps:
                out = out - cech.unit().scale(eps)
            return out

        # c^{-1} = sum_k (-1)^k r^{*k}, truncated by form degree
        out = cech.unit().scale(G.counit(x))
        power = r
        sign = -1
        bound = max((x.mono_degree(m) for m in x.terms), default=0) + 1
        for _ in range(bound):
            out = out + power(x).scale(sign)
            sign = -sign
            prev = power

            def nxt(y, prev=prev):
                cp = G.coproduct(y)
                acc = cech.zero()
                for word, c in cp.terms.items():
                    l = GradedExpr(G.alg, {word[0]: ONE})
                    rr = GradedExpr(G.alg, {word[1]: ONE})
                    acc = acc + prev(l).cup(r(rr)).scale(c)
                return acc
            power = nxt
        return out

    def hom_d(self, x):
        """(total_d o c + c o d)(x).

        The plus sign is inherited from the twisted differential of this
        package (whose middle Koszul sign is -(-1)^{|k|}); with it the gauge
        equation below is exactly the component form of an intertwiner
        k (x) a  ->  k^(1) (x) c(k^(2)) . a  of twisted tensor products.
        """
        return self.fn(x).total_d() + self.fn(self.group.alg.d(x))

    def gauge_residual(self, phi_src, phi_dst, x):
        """Residual of   hom_d(c) = phi_dst * c - c * phi_src   at x.

        Zero for every x iff k (x) a -> k^(1) (x) c(k^(2)) . a intertwines
        the twisted differentials of phi_src and phi_dst.
        """
        return (self.hom_d(x)
                - self.rconv(phi_dst.fn, 1, x)
                + self.conv(phi_src.fn, 1, x))


class KOmega:
    """Element of the (bi)twisted tensor product K (x) Cech target.

    Stored as a map monomial-of-K -> CechCochain.
    """

    __slots__ = ("group", "cech", "terms")

    def __init__(self, group, cech, terms=None):
        self.group = group
        self.cech = cech
        self.terms = terms or {}

    @classmethod
    def of(cls, group, cech, k, a):
        return cls(group, cech, {m: a.scale(c) for m, c in k.terms.items()})

    def add_term(self, kmono, coch):
        cur = self.terms.get(kmono)
        self.terms[kmono] = coch if cur is None else cur + coch

    def __add__(self, other):
        out = KOmega(self.group, self.cech, dict(self.terms))
        for m, c in other.terms.items():
            out.add_term(m, c)
        out.terms = {m: c for m, c in out.terms.items() if not c.is_zero()}
        return out

    def scale(self, s):
        return KOmega(self.group, self.cech,
                      {m: c.scale(s) for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def is_zero(self):
        return all(c.is_zero() for c in self.terms.values())

    def kdeg(self, m):
        return sum(self.group.alg.gens[g].degree for g in m)


def twisted_diff(elem, phi, bitwisted=False):
    """Apply the (bi)twisted differential to a KOmega element.

    Right-twisted:
        d(k (x) a) = dk (x) a - (-1)^{|k|} k (x) D(a)
                     + (-1)^{|k1|} k1 (x) phi(k2) . a
    and the bitwisted variant adds the back-twist

        - (-1)^{(|k1|+1)(|k2|+|a|)} k2 (x) a . phi(k1).

    These are the unique signs (within the natural family) for which both
    squares vanish and the two twists cancel on cocentral k (x) 1.
    """
    G, cech = elem.group, elem.cech
    out = KOmega(G, cech)
    for m, a in elem.terms.items():
        k = GradedExpr(G.alg, {m: ONE})
        dk = G.alg.d(k)
        for m2, c2 in dk.terms.items():
            out.add_term(m2, a.scale(c2))
        sgn = 1 if elem.kdeg(m) % 2 else -1
        out.add_term(m, a.total_d().scale(sgn))
        cp = G.coproduct(k)
        for word, c in cp.terms.items():
            k1, k2 = word
            d1 = elem.kdeg(k1)
            s = -1 if d1 % 2 else 1
            val = phi.fn(GradedExpr(G.alg, {k2: ONE})).cup(a).scale(s * c)
            out.add_term(k1, val)
            if bitwisted:
                d2 = elem.kdeg(k2)
                phk = phi.fn(GradedExpr(G.alg, {k1: ONE}))
                for qa, part in _split_cochain(a).items():
                    e = (d1 + 1) * (d2 + qa) + 1
                    s2 = -1 if e % 2 else 1
                    out.add_term(k2, part.cup(phk).scale(s2 * c))
    out.terms = {m: c for m, c in out.terms.items() if not c.is_zero()}
    return out


def _split_cochain(a):
    """Split a Cech cochain by total degree (Cech + form)."""
    parts = {}
    for s, e in a.comp.items():
        p = len(s) - 1
        for q, pe in e.homogeneous_parts().items():
            tot = p + q
            parts.setdefault(tot, a.cx.zero())
            parts[tot] = parts[tot] + CechCochain(a.cx, {s: pe})
    return parts


def gauge_act(c, phi, tests=None):
    """Transport phi along the gauge map c.

    Returns (phi_prime, residuals): phi_prime is the closed-form solution

        phi' = (hom_d(c) + c * phi) * c^{-1}

    of the gauge equation hom_d(c) = phi' * c - c * phi, and residuals are
    the residual cochains of that equation on the test elements (generators
    by default); each must normalize to zero.
    """
    G, cech = phi.group, phi.cech

    def phi_prime(x):
        cp = G.coproduct(x)
        out = cech.zero()
        for word, k in cp.terms.items():
            left = GradedExpr(G.alg, {word[0]: ONE})
            right = GradedExpr(G.alg, {word[1]: ONE})
            inner = c.hom_d(left) + c.conv(phi.fn, 1, left)
            out = out + inner.cup(c.inverse_apply(right)).scale(k)
        return out

    out = TwistingCochain(G, cech, phi_prime, label=f"{phi.label}^{c.label}")
    if tests is None:
        tests = ([G.u[i][j] for i in range(G.n) for j in range(G.n)]
                 + [G.du[i][j] for i in range(G.n) for j in range(G.n)])
    residuals = [c.gauge_residual(phi, out, x) for x in tests]
    return out, residuals


def char_map_bar(phi, x, trunc):
    """Bar-valued characteristic map: eps(x)[] + sum [phi(x^(1))|..|phi(x^(n))]."""
    from .cyclic import CechLegs, Chains, word as make_word
    G = phi.group
    L = CechLegs(phi.cech)
    eps = G.counit(x)
    out = make_word(L, L, [], None).scale(eps) if eps else Chains(L, L)
    for n in range(1, trunc + 1):
        cp = G.iterated_coproduct(x, n)
        for w, coeff in cp.terms.items():
            vals = []
            dead = False
            for m in w:
                v = phi.fn(GradedExpr(G.alg, {m: ONE}))
                if v.is_zero():
                    dead = True
                    break
                vals.append(v)
            if dead:
                continue
            out = out + make_word(L, L, vals, None).scale(coeff)
    return out


def gauge_homotopy(c, phi_src, phi_dst, x, trunc):
    """Truncated homotopy between the bar-valued characteristic maps.

    H(x) = sum over lengths and slot positions of
           [phi_dst(x^(1))|..|c^(x^(l))|..|phi_src(x^(n))]
    with c^ = c - unit; given the gauge equation of c (hom_d(c) =
    phi_dst * c - c * phi_src) it satisfies

        H(dx) - bar_d(H(x)) = phi_dst~(x) - phi_src~(x)

    through the truncation (H = 0 for the identity gauge, c^ = 0).
    """
    from .cyclic import CechLegs, Chains, word as make_word
    G = phi_src.group
    cech = phi_src.cech
    L = CechLegs(cech)

    def chat(y):
        eps = G.counit(y)
        out = c.fn(y)
        if eps:
            out = out - cech.unit().scale(eps)
        return out

    out = Chains(L, L)
    for k in range(1, trunc + 1):
        cp = G.iterated_coproduct(x, k)
        for w, coeff in cp.terms.items():
            for l in range(k):
                vals = []
                dead = False
                for t, m in enumerate(w):
                    leg = GradedExpr(G.alg, {m: ONE})
                    if t < l:
                        v = phi_dst.fn(leg)
                    elif t == l:
                        v = chat(leg)
                    else:
                        v = phi_src.fn(leg)
                    if v.is_zero():
                        dead = True
                        break
                    vals.append(v)
                if dead:
                    continue
                out = out + make_word(L, L, vals, None).scale(coeff)
    return out


def gauge_homotopy_residual(c, phi_src, phi_dst, x, trunc):
    """H(dx) - bar_d(H(x)) - phi_dst~(x) + phi_src~(x), truncated."""
    lhs = (gauge_homotopy(c, phi_src, phi_dst, phi_src.group.alg.d(x), trunc)
           - gauge_homotopy(c, phi_src, phi_dst, x, trunc + 1).bar_d())
    rhs = (char_map_bar(phi_dst, x, trunc)
           - char_map_bar(phi_src, x, trunc))
    return (lhs - rhs).truncate(trunc - 1)
