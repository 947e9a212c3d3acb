"""Numeric holonomy oracle and the truncated homological monodromy map.

The only floating-point module: path-ordered exponentials by adaptive ODE
integration, iterated integrals by nested Gauss-Legendre on the simplex
recursion, and their comparison.  The symbolic monodromy map lives at the
end and reuses the exact machinery of the other modules.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .cyclic import AlgebraLegs, Chains, word
from .graded import Algebra, GradedExpr, ONE


class SampledPath:
    """Piecewise-cubic interpolation of sampled points on [0, 1].

    Clamped ends: endpoint derivatives are one-sided difference estimates
    from the grid, so oracle values are reproducible given the same data.
    """

    def __init__(self, ts, points):
        ts = np.asarray(ts, dtype=float)
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        d0 = (pts[1] - pts[0]) / (ts[1] - ts[0])
        d1 = (pts[-1] - pts[-2]) / (ts[-1] - ts[-2])
        self.spline = CubicSpline(ts, pts, bc_type=((1, d0), (1, d1)))
        self.dspline = self.spline.derivative()
        self.ts = ts
        self.points = pts

    def __call__(self, t):
        return self.spline(t)

    def velocity(self, t):
        return self.dspline(t)

    @classmethod
    def circle(cls, samples=33):
        ts = np.linspace(0.0, 1.0, samples)
        pts = np.stack([np.cos(2 * np.pi * ts), np.sin(2 * np.pi * ts)],
                       axis=1)
        return cls(ts, pts)


class NumericConnection:
    """Matrix of 1-forms evaluable at (point, tangent) pairs."""

    def __init__(self, n, fn):
        self.n = n
        self.fn = fn

    def along(self, path):
        def at(t):
            return np.asarray(self.fn(path(t), path.velocity(t)),
                              dtype=complex)
        return at

    @classmethod
    def time_form(cls, mat):
        """A = M dt along the parametrization of a one-dimensional path."""
        mat = np.asarray(mat, dtype=complex)
        return cls(mat.shape[0],
                   lambda p, v: mat * np.atleast_1d(v)[0])

    @classmethod
    def matrix_of_forms(cls, n, comps):
        """comps[i][j] = list of component functions, one per coordinate."""
        def fn(point, tangent):
            out = np.zeros((n, n), dtype=complex)
            for i in range(n):
                for j in range(n):
                    acc = 0.0 + 0.0j
                    for k, c in enumerate(comps[i][j]):
                        acc += c(point) * tangent[k]
                    out[i, j] = acc
            return out
        return cls(n, fn)


def holonomy_ode(conn, path, tol=1e-10):
    """Solution at t=1 of s' = -A(gamma'(t)) s, s(0) = Id."""
    n = conn.n
    at = conn.along(path)

    def rhs(t, y):
        s = y.reshape(n, n)
        return (-(at(t) @ s)).reshape(-1)

    y0 = np.eye(n, dtype=complex).reshape(-1)
    sol = solve_ivp(rhs, (0.0, 1.0), y0, rtol=tol, atol=tol,
                    dense_output=False, method="DOP853")
    if not sol.success:
        raise ArithmeticError(f"holonomy integration failed: {sol.message}")
    return sol.y[:, -1].reshape(n, n)


def _panel_rule(panels, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    xs, ws, panel_of = [], [], []
    for p in range(panels):
        a, b = edges[p], edges[p + 1]
        xs.append(0.5 * (b - a) * nodes + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * weights)
        panel_of.extend([p] * order)
    return edges, np.concatenate(xs), np.concatenate(ws), nodes, weights


def chen_series(conn, path, N, panels=64, order=8):
    """sum_{n <= N} of iterated integrals of -A over the ordered simplex.

    Composite Gauss-Legendre on the nested recursion
    T_k(x) = integral_x^1 B(s) T_{k-1}(s) ds, B = -A(gamma'(s)); the tail
    within a panel integrates the Legendre interpolant of T_{k-1}.  The
    result equals the holonomy up to the factorial truncation tail.
    """
    n = conn.n
    at = conn.along(path)
    edges, xs, ws, gl_nodes, gl_weights = _panel_rule(panels, order)
    B = np.array([-at(t) for t in xs])
    # within-panel tail weights: W[i, j] = integral over [x_i, b] of ell_j
    tail = _tail_weights(gl_nodes, gl_weights)
    total = np.eye(n, dtype=complex)
    T = np.broadcast_to(np.eye(n, dtype=complex), (len(xs), n, n)).copy()
    for k in range(1, N + 1):
        # right multiplication: the unrolled word has the latest time leftmost,
        # matching the path-ordered exponential of s' = -A s
        F = np.einsum("sij,sjk->sik", T, B)
        newT = np.zeros_like(T)
        suffix = np.zeros((n, n), dtype=complex)
        for p in range(panels - 1, -1, -1):
            a, b = edges[p], edges[p + 1]
            h = 0.5 * (b - a)
            block = F[p * order:(p + 1) * order]
            for i in range(order):
                inner = np.tensordot(tail[i], block, axes=(0, 0)) * h
                newT[p * order + i] = suffix + inner
            suffix = suffix + np.tensordot(gl_weights * h, block, axes=(0, 0))
        T = newT
        total = total + _value_at_zero(F, edges, panels, order, gl_weights)
    return total


def _value_at_zero(F, edges, panels, order, gl_weights):
    """integral_0^1 of the integrand chain, i.e. T_k(0)."""
    n = F.shape[1]
    acc = np.zeros((n, n), dtype=complex)
    for p in range(panels):
        a, b = edges[p], edges[p + 1]
        h = 0.5 * (b - a)
        block = F[p * order:(p + 1) * order]
        acc = acc + np.tensordot(gl_weights * h, block, axes=(0, 0))
    return acc


def _tail_weights(nodes, weights):
    """W[i, j] = integral over [x_i, 1] of the j-th Lagrange basis (on [-1,1],
    half-width scaling applied by the caller)."""
    order = len(nodes)
    W = np.zeros((order, order))
    # Lagrange basis in monomial form (order <= 12: fine in double precision)
    for j in range(order):
        c = np.poly1d([1.0])
        for m in range(order):
            if m == j:
                continue
            c = c * np.poly1d([1.0, -nodes[m]]) / (nodes[j] - nodes[m])
        C = c.integ()
        for i in range(order):
            W[i, j] = C(1.0) - C(nodes[i])
    return W


def compare_series(conn, path, Ns, tol=1e-10):
    """Frobenius distances between the ODE holonomy and truncated series."""
    hol = holonomy_ode(conn, path, tol=tol)
    out = []
    for N in Ns:
        approx = chen_series(conn, path, N)
        out.append((N, float(np.linalg.norm(approx - hol))))
    return hol, out


# -- symbolic monodromy ------------------------------------------------------


class FormalConnection:
    """Formal gauge potential for gl(n): legs A_ij (degree 1), F_ij (degree 2)
    with the package's flatness-compatible rules d(A) = F - A.A."""

    def __init__(self, group):
        self.group = group
        n = group.n
        alg = Algebra(f"bar-target-{n}")
        self.alg = alg
        self.A = [[alg.gen(f"A{i}{j}", 1, sortkey=("mon", "A", i, j))
                   for j in range(n)] for i in range(n)]
        self.F = [[alg.gen(f"F{i}{j}", 2, sortkey=("mon", "F", i, j))
                   for j in range(n)] for i in range(n)]
        from .matrices import mmul
        AA = mmul(self.A, self.A)
        FA = mmul(self.F, self.A)
        AF = mmul(self.A, self.F)
        for i in range(n):
            for j in range(n):
                alg.set_differential(self.A[i][j],
                                     self.F[i][j] - AA[i][j])
                alg.set_differential(self.F[i][j],
                                     FA[i][j] - AF[i][j])
        self.legs = AlgebraLegs(alg)
        self.X = [[group.cartan_X(i, j) for j in range(n)] for i in range(n)]
        self.I = [[group.cartan_I(i, j) for j in range(n)] for i in range(n)]

    def psi1(self, x):
        """Connection evaluation map: -sum A^ij eps(X_ij x) + F^ij eps(I_ij x).

        The relative sign of the curvature term is the calibration making
        the bar-valued extension a chain map (it reads the legs as the
        negated gauge potential, consistently with the connection module).
        """
        G = self.group
        out = self.alg.zero()
        for i in range(G.n):
            for j in range(G.n):
                cx = G.counit(self.X[i][j](x))
                if cx:
                    out = out - self.A[i][j] * cx
                ci = G.counit(self.I[i][j](x))
                if ci:
                    out = out + self.F[i][j] * ci
        return out


def monodromy_map(fc, x, N):
    """Truncated bar-valued monodromy of a group form.

    eps(x) [] + sum_{n <= N} [psi1(x^(1))|...|psi1(x^(n))] in the normalized
    bar complex over the formal connection legs.
    """
    G = fc.group
    L = fc.legs
    eps = G.counit(x)
    out = word(L, L, [], None).scale(eps) if eps else Chains(L, L)
    for n in range(1, N + 1):
        cp = G.iterated_coproduct(x, n)
        for w, coeff in cp.terms.items():
            vals = []
            dead = False
            for m in w:
                v = fc.psi1(GradedExpr(G.alg, {m: ONE}))
                if v.is_zero():
                    dead = True
                    break
                vals.append(v)
            if dead:
                continue
            out = out + word(L, L, vals, None).scale(coeff)
    return out


def monodromy_chain_residual(fc, x, N):
    """bar_d(M(x)) - M(dx), truncated at length N-1."""
    lhs = monodromy_map(fc, x, N + 1).bar_d()
    rhs = monodromy_map(fc, fc.group.alg.d(x), N)
    return (lhs - rhs).truncate(N - 1)


def monodromy_comonoid_residual(fc, x, N):
    """Deconcatenation of M(x) minus (M (x) M) of the coproduct of x."""
    G = fc.group
    lhs = monodromy_map(fc, x, N).deconcat()
    rhs = {}
    cp = G.coproduct(x)
    for (m1, m2), c in cp.terms.items():
        w1 = monodromy_map(fc, GradedExpr(G.alg, {m1: ONE}), N)
        w2 = monodromy_map(fc, GradedExpr(G.alg, {m2: ONE}), N)
        for (u1, c1, l1), v1 in w1.terms.items():
            for (u2, c2, l2), v2 in w2.terms.items():
                if len(l1) + len(l2) > N:
                    continue
                key = (l1, l2)
                rhs[key] = rhs.get(key, 0) + c * v1 * v2
    out = dict(lhs)
    for k, v in rhs.items():
        if len(k[0]) + len(k[1]) > N:
            continue
        out[k] = out.get(k, 0) - v
    return {k: v for k, v in out.items()
            if v and len(k[0]) + len(k[1]) <= N}


def gauge_covariance_residual(fc, g_mat, x, N):
    """M_{A^g}(x) - M_A(x^g), truncated, for a constant rational g.

    A^g = g^-1 A g (constant gauge) on the legs pairs with the adjoint
    substitution u -> g^-1 u g on the argument; the two conjugations run in
    the same orientation in this package's conventions.
    """
    from fractions import Fraction
    G = fc.group
    n = G.n
    import numpy as _np
    ginv = _rational_inverse(g_mat)
    # legs substitution A -> g^-1 A g, F -> g^-1 F g
    mapping = {}
    for i in range(n):
        for j in range(n):
            accA = fc.alg.zero()
            accF = fc.alg.zero()
            for k in range(n):
                for l in range(n):
                    c = ginv[i][k] * g_mat[l][j]
                    if c:
                        accA = accA + fc.A[k][l] * c
                        accF = accF + fc.F[k][l] * c
            mapping[fc.A[i][j].single_gid()] = accA
            mapping[fc.F[i][j].single_gid()] = accF
    from .graded import substitute
    lhs = monodromy_map(fc, x, N)
    out = Chains(fc.legs, fc.legs)
    for (u, c0, legs), v in lhs.terms.items():
        base = [((), v)]
        for m in legs:
            img = substitute(GradedExpr(fc.alg, {m: ONE}), mapping, fc.alg)
            nxt = []
            for ls, c in base:
                for m2, c2 in img.terms.items():
                    nxt.append((ls + (m2,), c * c2))
            base = nxt
        for ls, c in base:
            out.put(u, None, ls, c)
    # adjoint action on the argument: u -> g u g^-1 entrywise
    amap = {}
    for i in range(n):
        for j in range(n):
            acc = G.alg.zero()
            dacc = G.alg.zero()
            for k in range(n):
                for l in range(n):
                    c = ginv[i][k] * g_mat[l][j]
                    if c:
                        acc = acc + G.u[k][l] * c
                        dacc = dacc + G.du[k][l] * c
            amap[G.u[i][j].single_gid()] = acc
            amap[G.du[i][j].single_gid()] = dacc
    from .matrices import det
    amap[G.D.single_gid()] = G.D    # det is Ad-invariant
    xg = substitute(x, amap, G.alg)
    rhs = monodromy_map(fc, xg, N)
    return (out - rhs).truncate(N)


def _rational_inverse(g):
    from fractions import Fraction
    n = len(g)
    aug = [[Fraction(g[i][j]) for j in range(n)]
           + [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [[aug[i][n + j] for j in range(n)] for i in range(n)]
