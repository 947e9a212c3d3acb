"""Polynomial de Rham forms on GL(n) as a differential graded Hopf algebra.

Generators: matrix coordinates u_ij (degree 0), their differentials du_ij
(degree 1), and a formal inverse D of det(u) with D*det(u) = 1.  Inverse
matrix entries are the derived expressions v_ij = D * adj(u)_ij, so the
antipode and the Maurer-Cartan matrices need no extra relations.

Cartan operators: X_ij is the Lie derivative along the left-invariant field
of the matrix unit E_ij, I_ij the corresponding contraction; they satisfy
[d, I_ij] = X_ij.
"""

from __future__ import annotations

from fractions import Fraction

from .graded import Algebra, Derivation, GradedExpr, ONE, ZERO
from .matrices import adjugate, det, mmap, mmul, trace
from .tensor import TensorExpr


class GroupAlgebra:
    """Omega_poly(GL(n)) with its Hopf and Cartan structure."""

    def __init__(self, n):
        self.n = n
        alg = Algebra(f"GL{n}")
        self.alg = alg
        self.u = [[alg.gen(f"u{i}{j}", 0, sortkey=("gl", "u", i, j))
                   for j in range(n)] for i in range(n)]
        self.du = [[alg.gen(f"du{i}{j}", 1, sortkey=("gl", "du", i, j))
                    for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                alg.set_differential(self.u[i][j], self.du[i][j])
                alg.set_differential(self.du[i][j], alg.zero())
        self.det = det(self.u)
        self.D = alg.localize(self.det, "Dinv")
        # derived inverse entries v = D * adj(u)
        self.v = mmap(adjugate(self.u), lambda x: self.D * x)
        self.dv = mmap(self.v, alg.d)
        self._gid_u = {self.u[i][j].single_gid(): (i, j)
                       for i in range(n) for j in range(n)}
        self._gid_du = {self.du[i][j].single_gid(): (i, j)
                        for i in range(n) for j in range(n)}
        self._gid_D = self.D.single_gid()
        self._coproduct_cache = {}

    # -- coalgebra ---------------------------------------------------------------

    def _coproduct_gen(self, gid):
        hit = self._coproduct_cache.get(gid)
        if hit is not None:
            return hit
        n, alg = self.n, self.alg
        if gid in self._gid_u:
            i, j = self._gid_u[gid]
            out = sum((TensorExpr.from_exprs([self.u[i][k], self.u[k][j]])
                       for k in range(n)),
                      TensorExpr((alg, alg), {}))
        elif gid in self._gid_du:
            i, j = self._gid_du[gid]
            out = sum((TensorExpr.from_exprs([self.du[i][k], self.u[k][j]])
                       + TensorExpr.from_exprs([self.u[i][k], self.du[k][j]])
                       for k in range(n)),
                      TensorExpr((alg, alg), {}))
        elif gid == self._gid_D:
            out = TensorExpr.from_exprs([self.D, self.D])
        else:
            raise KeyError(f"no coproduct for generator {alg.gens[gid].name}")
        self._coproduct_cache[gid] = out
        return out

    def coproduct(self, expr):
        """Algebra-map extension of Delta to any GroupForm."""
        alg = self.alg
        acc = TensorExpr((alg, alg), {})
        unit = TensorExpr.from_exprs([alg.one(), alg.one()])
        for mono, coeff in expr.terms.items():
            word = unit.scale(coeff)
            for g in mono:
                word = word * self._coproduct_gen(g)
            acc = acc + word
        return acc.normalize()

    def iterated_coproduct(self, expr, n_legs):
        """Delta^(n-1): GroupForm -> n tensor legs (n >= 1)."""
        out = TensorExpr.from_exprs([expr])
        while len(out.algs) < n_legs:
            i = len(out.algs) - 1
            new_terms = {}
            new = TensorExpr(out.algs + (self.alg,), new_terms)
            for word, coeff in out.terms.items():
                dx = self.coproduct(GradedExpr(self.alg, {word[i]: ONE}))
                for w2, c2 in dx.terms.items():
                    w = word[:i] + w2
                    new_terms[w] = new_terms.get(w, ZERO) + coeff * c2
            out = TensorExpr(new.algs, {w: c for w, c in new_terms.items() if c})
        return out.normalize()

    def counit(self, expr):
        """Evaluation at the unit matrix; kills positive form degree."""
        total = ZERO
        for mono, coeff in expr.terms.items():
            val = coeff
            for g in mono:
                if g in self._gid_u:
                    i, j = self._gid_u[g]
                    if i != j:
                        val = ZERO
                        break
                elif g == self._gid_D:
                    continue
                else:
                    val = ZERO
                    break
            total += val
        return total

    def counit_expr(self, expr):
        return self.alg.scalar(self.counit(expr))

    def antipode(self, expr):
        """Anti-homomorphism with S(u_ij) = v_ij, S(du_ij) = d(v_ij), S(D) = det.

        With Delta(u) = u (x) u the antipode axiom forces S(u) to be the
        inverse-matrix entry itself (in the unitary picture the conjugate
        transpose makes these the same thing).
        """
        alg = self.alg
        out = alg.zero()
        for mono, coeff in expr.terms.items():
            degs = [alg.gens[g].degree for g in mono]
            s = sum(degs[i] * degs[j] for i in range(len(mono))
                    for j in range(i + 1, len(mono)))
            factor = alg.one() * (coeff if s % 2 == 0 else -coeff)
            for g in reversed(mono):
                factor = factor * self._antipode_gen(g)
            out = out + factor
        return out.normalize()

    def _antipode_gen(self, gid):
        if gid in self._gid_u:
            i, j = self._gid_u[gid]
            return self.v[i][j]
        if gid in self._gid_du:
            i, j = self._gid_du[gid]
            return self.dv[i][j]
        if gid == self._gid_D:
            return self.det
        raise KeyError(gid)

    # -- invariant forms ----------------------------------------------------------

    def maurer_cartan(self):
        """(omega, omega_tilde): the g^{-1}dg and dg g^{-1} matrices."""
        omega = mmul(self.v, self.du)
        omega_t = mmul(self.du, self.v)
        return omega, omega_t

    # -- Cartan operators -----------------------------------------------------------

    def cartan_X(self, i, j):
        """Even derivation: Lie derivative along the left-invariant E_ij field."""
        alg, n = self.alg, self.n
        action = {}
        for k in range(n):
            for l in range(n):
                action[self.u[k][l].single_gid()] = (
                    self.u[k][i] if l == j else alg.zero())
                action[self.du[k][l].single_gid()] = (
                    self.du[k][i] if l == j else alg.zero())
        action[self._gid_D] = -self.D if i == j else alg.zero()
        for gid in range(len(alg.gens)):
            action.setdefault(gid, alg.zero())
        return Derivation(alg, 0, action, name=f"X{i}{j}")

    def cartan_I(self, i, j):
        """Odd degree -1 derivation: contraction with the E_ij field."""
        alg, n = self.alg, self.n
        action = {}
        for k in range(n):
            for l in range(n):
                action[self.u[k][l].single_gid()] = alg.zero()
                action[self.du[k][l].single_gid()] = (
                    self.u[k][i] if l == j else alg.zero())
        action[self._gid_D] = alg.zero()
        for gid in range(len(alg.gens)):
            action.setdefault(gid, alg.zero())
        return Derivation(alg, 1, action, name=f"I{i}{j}")

    # -- convenience ---------------------------------------------------------------

    def trace_u(self):
        return trace(self.u)

    def spanning_words(self, max_len):
        """All products of distinct generator choices up to the given length."""
        gens = ([self.u[i][j] for i in range(self.n) for j in range(self.n)]
                + [self.du[i][j] for i in range(self.n) for j in range(self.n)]
                + [self.D])
        words = [self.alg.one()]
        layer = [self.alg.one()]
        for _ in range(max_len):
            layer = [w * g for w in layer for g in gens]
            layer = [w for w in layer if not w.is_zero()]
            words.extend(layer)
        return words
