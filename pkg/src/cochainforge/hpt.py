"""Strong deformation retracts, the perturbation lemma and A-infinity transfer.

The concrete instance contracts the Cech complex of a nerve onto global
expressions through a formal partition of unity: bumps phi_a with
sum phi_a = 1 on every simplex where they are supported.  The base
differential is the signed Cech differential (-1)^q delta of this package;
the perturbation is the chart-level de Rham differential, which preserves
Cech degree while the homotopy lowers it, so every perturbation series is a
finite sum.
"""

from __future__ import annotations

from fractions import Fraction

from .cech import CechCochain
from .graded import GradedExpr, ONE, ZERO


class SdrData:
    """Maps (i0, p0, H0) between a big complex and a small one.

    big elements are CechCochain, small elements plain global expressions;
    d_big is the base differential on the big side, d_small on the small.
    """

    def __init__(self, cx, i0, p0, H0, d_big, d_small):
        self.cx = cx
        self.i0 = i0
        self.p0 = p0
        self.H0 = H0
        self.d_big = d_big
        self.d_small = d_small

    def check_identities(self, cochains, globals_):
        """The five side conditions, on the supplied test elements."""
        out = {}
        out["p0 i0 = Id"] = all(
            (self.p0(self.i0(s)) - s).is_zero() for s in globals_)
        out["H0 H0 = 0"] = all(
            self.H0(self.H0(c)).is_zero() for c in cochains)
        out["H0 i0 = 0"] = all(
            self.H0(self.i0(s)).is_zero() for s in globals_)
        out["p0 H0 = 0"] = all(
            _gzero(self.p0(self.H0(c))) for c in cochains)
        out["i0 p0 - Id = dH0 + H0d"] = all(
            (self.i0(self.p0(c)) - c
             - self.d_big(self.H0(c)) - self.H0(self.d_big(c))).is_zero()
            for c in cochains)
        return out


def _gzero(e):
    return e.is_zero()


def cech_sdr(cx):
    """The Cech -> global SDR with a formal partition of unity.

    p0 collapses a Cech 0-cochain to sum_a h_a phi_a and kills higher
    degrees; H0 inserts a bump index in front with the antisymmetrization
    sign, twisted by (-1)^q to match the signed Cech differential.
    """
    cx.register_pou()
    alg = cx.alg

    def i0(s):
        return cx.localize_form(s)

    def p0(c):
        out = alg.zero()
        for s, e in c.comp.items():
            if len(s) == 1:
                out = out + e * cx.pou_bump(s[0])
        return cx.normalize_global(out)

    def H0(c):
        comp = {}
        for tau, e in c.comp.items():
            if len(tau) == 1:
                continue
            for pos, g in enumerate(tau):
                sigma = tau[:pos] + tau[pos + 1:]
                # antisymmetrized component -h~_{g, sigma}; the global minus
                # is what the five side conditions force, and the (-1)^q
                # twist matches the signed Cech differential
                sgn = 1 if pos % 2 else -1
                for q, part in e.homogeneous_parts().items():
                    s2 = -sgn if q % 2 else sgn
                    term = cx.pou_bump(g) * part * s2
                    comp[sigma] = comp.get(sigma, alg.zero()) + term
        return cx.cochain(comp)

    def delta_hat(c):
        out = CechCochain(cx, {})
        plus, minus = {}, {}
        for s, e in c.comp.items():
            for q, part in e.homogeneous_parts().items():
                tgt = minus if q % 2 else plus
                tgt[s] = tgt.get(s, alg.zero()) + part
        if plus:
            out = out + CechCochain(cx, plus).cech_delta()
        if minus:
            out = out - CechCochain(cx, minus).cech_delta()
        return out

    def d_small_zero(s):
        return alg.zero()

    return SdrData(cx, i0, p0, H0, delta_hat, d_small_zero)


class PerturbedSdr:
    """The quadruple (d', i, p, H) of the perturbation lemma.

    Series are summed exactly: the homotopy strictly lowers Cech degree
    while the perturbation preserves it, so each application terminates.
    """

    def __init__(self, sdr, pert, max_steps=None):
        self.sdr = sdr
        self.pert = pert
        self.max_steps = (max_steps if max_steps is not None
                          else sdr.cx.nerve.max_dim() + 2)

    def _chain(self, start_big):
        """Yield (pert H0)^k pert applied after start, while nonzero."""
        cur = self.pert(start_big)
        for _ in range(self.max_steps):
            yield cur
            cur = self.pert(self.sdr.H0(cur))
            if cur.is_zero():
                return

    def d_prime(self, s):
        out = self.sdr.d_small(s)
        for term in self._chain(self.sdr.i0(s)):
            out = out + self.sdr.p0(term)
        return out

    def include(self, s):
        out = self.sdr.i0(s)
        for term in self._chain(self.sdr.i0(s)):
            out = out + self.sdr.H0(term)
        return out

    def project(self, c):
        out = self.sdr.p0(c)
        cur = c
        for _ in range(self.max_steps):
            cur = self.pert(self.sdr.H0(cur))
            if cur.is_zero():
                break
            out = out + self.sdr.p0(cur)
        return out

    def homotopy(self, c):
        out = self.sdr.H0(c)
        cur = c
        for _ in range(self.max_steps):
            cur = self.pert(self.sdr.H0(cur))
            if cur.is_zero():
                break
            out = out + self.sdr.H0(cur)
        return out

    def d_big_total(self, c):
        return self.sdr.d_big(c) + self.pert(c)

    def check_identities(self, cochains, globals_):
        out = {}
        out["p i = Id"] = all(
            (self.project(self.include(s)) - s).is_zero() for s in globals_)
        out["H H = 0"] = all(
            self.homotopy(self.homotopy(c)).is_zero() for c in cochains)
        out["H i = 0"] = all(
            self.homotopy(self.include(s)).is_zero() for s in globals_)
        out["p H = 0"] = all(
            self.project(self.homotopy(c)) == 0 or
            self.project(self.homotopy(c)).is_zero() for c in cochains)
        out["i p - Id = DH + HD"] = all(
            (self.include(self.project(c)) - c
             - self.d_big_total(self.homotopy(c))
             - self.homotopy(self.d_big_total(c))).is_zero()
            for c in cochains)
        return out


def perturb(sdr, pert=None):
    """Perturbation lemma for the Cech instance (default: de Rham part)."""
    if pert is None:
        def pert(c):
            return c.form_d()
    return PerturbedSdr(sdr, pert)


def _apply_pair_op(cx, items, op, j):
    """Replace slots (j, j+1) of a big-element list by op(x_j, x_{j+1}).

    op has odd degree (H after a product), so crossing the first j slots
    costs the Koszul sign of their total degrees.
    """
    prefix = 0
    for x in items[:j]:
        prefix += _total_degree(x)
    sign = -1 if prefix % 2 else 1
    merged = op(items[j], items[j + 1])
    return sign, items[:j] + [merged] + items[j + 2:]


def _total_degree(c):
    degs = set()
    for s, e in c.comp.items():
        for q in e.homogeneous_parts():
            degs.add(len(s) - 1 + q)
    if len(degs) > 1:
        raise ValueError(f"inhomogeneous cochain, degrees {sorted(degs)}")
    return degs.pop() if degs else 0


class AInfinityTransfer:
    """The transferred products pi(n) and the morphism maps P(n).

    pi(n)  = p pr (H pr (x) 1 + 1 (x) H pr) ... (i (x) ... (x) i)
    P(n)   = p pr ( ... ) (H (x) i p (x) .. (x) i p + .. + 1 (x) .. (x) H)

    pr is the cup product of the big complex; lists of big elements stand in
    for tensors, with Koszul signs when an odd operator crosses slots.
    """

    def __init__(self, perturbed):
        self.ps = perturbed
        self.cx = perturbed.sdr.cx

    def _hpr(self, x, y):
        return self.ps.homotopy(x.cup(y))

    def _collapse(self, items):
        """Apply the middle brackets until two slots remain, then cup."""
        total = self.cx.zero() if len(items) == 0 else None
        layers = [(1, items)]
        while layers and len(layers[0][1]) > 2:
            nxt = []
            for sgn, its in layers:
                for j in range(len(its) - 1):
                    s2, merged = _apply_pair_op(self.cx, its, self._hpr, j)
                    nxt.append((sgn * s2, merged))
            layers = nxt
        return layers

    def pi(self, n, args):
        """Transferred n-ary product of global expressions."""
        if n == 1:
            return args[0]
        items = [self.ps.include(a) for a in args]
        out = None
        for sgn, its in self._collapse(items):
            term = self.ps.project(its[0].cup(its[1])) * sgn
            out = term if out is None else out + term
        return out if out is not None else self.cx.alg.zero()

    def I(self, n, args):
        """Inclusion-side morphism component on n global expressions.

        Equals the inclusion for n = 1; vanishes for n >= 2 whenever the
        inclusion is an algebra map (which the localization is).
        """
        if n == 1:
            return self.ps.include(args[0])
        items = [self.ps.include(a) for a in args]
        out = None
        for sgn, its in self._collapse(items):
            term = self.ps.homotopy(its[0].cup(its[1])) * sgn
            out = term if out is None else out + term
        return out if out is not None else self.cx.zero()

    def H(self, n, args):
        """Homotopy component on n big elements."""
        if n == 1:
            return self.ps.homotopy(args[0])
        out = None
        for j in range(n):
            items = []
            for t, x in enumerate(args):
                if t < j:
                    items.append(x)
                elif t == j:
                    items.append(self.ps.homotopy(x))
                else:
                    items.append(self.ps.include(self.ps.project(x)))
            sign = -1 if sum(_total_degree(x) for x in args[:j]) % 2 else 1
            for sgn, its in self._collapse(items):
                if len(its) == 1:
                    term = self.ps.homotopy(its[0]) * (sign * sgn)
                else:
                    term = self.ps.homotopy(its[0].cup(its[1])) * (sign * sgn)
                out = term if out is None else out + term
        return out if out is not None else self.cx.zero()

    def P(self, n, args):
        """Morphism component on n big elements."""
        if n == 1:
            return self.ps.project(args[0])
        out = None
        for j in range(n):
            items = []
            prefix = 0
            for t, x in enumerate(args):
                if t < j:
                    items.append(x)
                elif t == j:
                    items.append(self.ps.homotopy(x))
                else:
                    items.append(self.ps.include(self.ps.project(x)))
            sign = -1 if sum(_total_degree(x) for x in args[:j]) % 2 else 1
            for sgn, its in self._collapse(items):
                if len(its) == 1:
                    term = self.ps.project(its[0]) * (sign * sgn)
                else:
                    term = self.ps.project(its[0].cup(its[1])) * (sign * sgn)
                out = term if out is None else out + term
        return out if out is not None else self.cx.alg.zero()


def push_cochain(phi, transfer, depth=2, verify=True):
    """Push a Cech-valued twisting cochain to global expressions.

    (P o phi)(x) = sum_n P(n)(phi(x^(1)), ..., phi(x^(n))), a finite sum
    because P(n) needs Cech degree at least n-1 to survive.  Returns a
    GlobalCochain; its Maurer-Cartan residual is re-verified on generators
    and words up to `depth` when verify is set.
    """
    G = phi.group
    cx = phi.cech
    nmax = cx.nerve.max_dim() + 1

    def pushed(x):
        out = cx.alg.zero()
        for n in range(1, nmax + 1):
            cp = G.iterated_coproduct(x, n)
            for word, coeff in cp.terms.items():
                vals = []
                sign = 1
                # Koszul: the t-th phi (odd) crosses legs 1..t-1
                prefix = 0
                dead = False
                for t, m in enumerate(word):
                    leg = GradedExpr(G.alg, {m: ONE})
                    if prefix % 2:
                        sign = -sign
                    prefix += leg.degree()
                    v = phi.fn(leg)
                    if v.is_zero():
                        dead = True
                        break
                    vals.append(v)
                if dead:
                    continue
                parts = [_split_by_total(v, cx) for v in vals]
                for combo in _combos(parts):
                    term = transfer.P(n, list(combo))
                    out = out + term * (sign * coeff)
        return cx.normalize_global(out)

    gc = GlobalCochain(G, cx, pushed)
    if verify:
        gc.verify_mc(depth=depth)
    return gc


def _split_by_total(c, cx):
    parts = {}
    for s, e in c.comp.items():
        for q, pe in e.homogeneous_parts().items():
            tot = len(s) - 1 + q
            parts.setdefault(tot, cx.zero())
            parts[tot] = parts[tot] + CechCochain(cx, {s: pe})
    return list(parts.values())


def _combos(parts):
    out = [[]]
    for options in parts:
        out = [c + [o] for c in out for o in options]
    return out


class GlobalCochain:
    """Twisting cochain valued in global expressions (formal pou algebra)."""

    def __init__(self, group, cx, fn):
        self.group = group
        self.cx = cx
        self.fn = fn
        self.certificate = None

    def __call__(self, x):
        return self.fn(x)

    def mc_residual(self, x):
        G, cx = self.group, self.cx
        d_of = cx.normalize_global(cx.alg.d(self.fn(x)))
        of_d = self.fn(G.alg.d(x))
        conv = cx.alg.zero()
        cp = G.coproduct(x)
        for word, c in cp.terms.items():
            left = GradedExpr(G.alg, {word[0]: ONE})
            right = GradedExpr(G.alg, {word[1]: ONE})
            sgn = -1 if left.degree() % 2 else 1
            conv = conv + self.fn(left) * self.fn(right) * (sgn * c)
        return cx.normalize_global(d_of - of_d - conv)

    def verify_mc(self, depth=2, sample=8, seed=0):
        import random
        G = self.group
        gens = ([G.u[i][j] for i in range(G.n) for j in range(G.n)]
                + [G.du[i][j] for i in range(G.n) for j in range(G.n)]
                + [G.D])
        tests = list(gens)
        if depth >= 2:
            rng = random.Random(seed)
            pool = [a * b for a in gens for b in gens]
            pool = [w for w in pool if not w.is_zero()]
            tests.extend(rng.sample(pool, min(sample, len(pool))))
        items = []
        ok = True
        for x in tests:
            r = self.mc_residual(x)
            passed = r.is_zero()
            ok = ok and passed
            items.append({"element": x.sexpr(), "residual": r.sexpr(),
                          "pass": passed})
        self.certificate = {"map": "pushed", "depth": depth, "pass": ok,
                            "items": items}
        if not ok:
            from .twist import MaurerCartanError
            raise MaurerCartanError(self.certificate)
        return self.certificate
