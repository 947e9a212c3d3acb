"""Numeric holonomy oracle and the symbolic monodromy map."""

from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from cochainforge.grouphopf import GroupAlgebra
from cochainforge.holonomy import (FormalConnection, NumericConnection,
                                   SampledPath, chen_series, compare_series,
                                   gauge_covariance_residual, holonomy_ode,
                                   monodromy_chain_residual,
                                   monodromy_comonoid_residual,
                                   monodromy_map)


@pytest.fixture(scope="module")
def smooth_connection():
    def fn(p, v):
        x, y = p[0], p[1]
        A1 = np.array([[0.2 * x, 0.5 + 0.1 * y], [-0.3, 0.2 * y]])
        A2 = np.array([[0.1 * y, -0.2], [0.4 * x, 0.1]])
        return A1 * v[0] + A2 * v[1]
    return NumericConnection(2, fn)


def test_zero_connection_gives_identity():
    path = SampledPath(np.linspace(0, 1, 9), np.linspace(0, 1, 9))
    conn = NumericConnection(2, lambda p, v: np.zeros((2, 2)))
    assert np.linalg.norm(holonomy_ode(conn, path) - np.eye(2)) < 1e-12


def test_constant_matrix_matches_exponential():
    path = SampledPath(np.linspace(0, 1, 9), np.linspace(0, 1, 9))
    M = np.array([[0.3, 0.7], [-0.2, 0.1]])
    conn = NumericConnection(2, lambda p, v: M * np.atleast_1d(v)[0])
    hol = holonomy_ode(conn, path, tol=1e-12)
    assert np.linalg.norm(hol - expm(-M)) < 1e-10
    assert np.linalg.norm(chen_series(conn, path, 14) - expm(-M)) < 1e-12


def test_scalar_quadrature_oracle():
    path = SampledPath(np.linspace(0, 1, 17), np.linspace(0, 1, 17))
    conn = NumericConnection(
        1, lambda p, v: np.array([[np.sin(3 * np.atleast_1d(p)[0])]])
        * np.atleast_1d(v)[0])
    hol = holonomy_ode(conn, path, tol=1e-12)
    from scipy.integrate import quad
    val, _ = quad(lambda t: np.sin(3 * t), 0, 1)
    assert abs(hol[0, 0] - np.exp(-val)) < 1e-10


def test_convergence_monotone_and_small(smooth_connection):
    circle = SampledPath.circle(65)
    hol, errs = compare_series(smooth_connection, circle, range(2, 13),
                               tol=1e-12)
    vals = [e for _, e in errs]
    assert all(vals[i + 1] < vals[i] for i in range(len(vals) - 1))
    assert vals[-1] < 1e-6


class _Reparam:
    """Exact affine reparametrization of a path (same curve, sub-interval)."""

    def __init__(self, path, a, b):
        self.path = path
        self.a = a
        self.b = b

    def __call__(self, t):
        return self.path(self.a + (self.b - self.a) * t)

    def velocity(self, t):
        return (self.b - self.a) * self.path.velocity(
            self.a + (self.b - self.a) * t)


def test_composition_law(smooth_connection):
    g = SampledPath.circle(129)
    p1 = _Reparam(g, 0.0, 0.5)
    p2 = _Reparam(g, 0.5, 1.0)
    h1 = holonomy_ode(smooth_connection, p1, tol=1e-12)
    h2 = holonomy_ode(smooth_connection, p2, tol=1e-12)
    hc = holonomy_ode(smooth_connection, g, tol=1e-12)
    assert np.linalg.norm(hc - h2 @ h1) < 1e-8


@pytest.fixture(scope="module")
def formal():
    G = GroupAlgebra(2)
    return G, FormalConnection(G)


def test_monodromy_unit(formal):
    G, fc = formal
    m = monodromy_map(fc, G.alg.one(), 3)
    assert len(m.terms) == 1
    ((u, c0, legs),) = m.terms
    assert not legs


def test_monodromy_chain_map(formal):
    G, fc = formal
    for x in [G.u[0][0], G.u[0][1], G.du[0][1], G.u[0][0] * G.u[1][1], G.D]:
        assert monodromy_chain_residual(fc, x, 3).is_zero()


def test_monodromy_single_layer_pattern(formal):
    G, fc = formal
    m = monodromy_map(fc, G.u[0][1], 1)
    # single-derivative term: one leg, carrying the (0,1) potential entry
    legs = {l for (_, _, l) in m.terms if l}
    assert legs == {((fc.A[0][1].single_gid(),),)}


def test_monodromy_comonoid(formal):
    G, fc = formal
    for x in [G.u[0][1], G.u[0][0] * G.u[1][1], G.du[1][0]]:
        assert not monodromy_comonoid_residual(fc, x, 3)


def test_monodromy_rejects_positive_degree_start():
    G = GroupAlgebra(1)
    fc = FormalConnection(G)
    # forms are accepted by the extension; the classical statement is about
    # functions, so check a function and a form both produce chain maps
    assert monodromy_chain_residual(fc, G.u[0][0], 3).is_zero()
    assert monodromy_chain_residual(fc, G.du[0][0], 3).is_zero()


def test_gauge_covariance(formal):
    G, fc = formal
    gmat = [[Fraction(1), Fraction(1)], [Fraction(0), Fraction(1)]]
    for x in [G.u[0][0], G.u[0][1], G.du[1][0], G.u[0][0] * G.u[1][1]]:
        assert gauge_covariance_residual(fc, gmat, x, 2).is_zero()
    gid = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    assert gauge_covariance_residual(fc, gid, G.u[0][1], 2).is_zero()


def test_gauge_covariance_abelian():
    G = GroupAlgebra(1)
    fc = FormalConnection(G)
    assert gauge_covariance_residual(fc, [[Fraction(5)]], G.u[0][0],
                                     2).is_zero()
