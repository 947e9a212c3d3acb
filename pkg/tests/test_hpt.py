"""Perturbation lemma, Cech contraction and A-infinity transfer."""

import random

import pytest

from cochainforge.cech import Nerve, CechComplex, TransitionCocycle
from cochainforge.grouphopf import GroupAlgebra
from cochainforge.hpt import AInfinityTransfer, cech_sdr, perturb, push_cochain
from cochainforge.twist import build_phi_P


@pytest.fixture()
def contraction():
    rng = random.Random(3)
    cx = CechComplex(Nerve([(0, 1, 2)]))
    sdr = cech_sdr(cx)
    alg = cx.alg

    def formal_cochain(tag, degmap):
        comp = {}
        for s in cx.nerve.simplices:
            e = alg.zero()
            for d in degmap.get(len(s) - 1, []):
                name = f"h{tag}_{'_'.join(map(str, s))}_{d}_{rng.randrange(10**6)}"
                g = alg.gen(name, d)
                dg = alg.gen("d" + name, d + 1)
                alg.set_differential(g, dg)
                alg.set_differential(dg, alg.zero())
                e = e + g
            comp[s] = e
        return cx.cochain(comp)

    def formal_global(tag, deg):
        g = alg.gen(f"s{tag}", deg)
        dg = alg.gen(f"ds{tag}", deg + 1)
        alg.set_differential(g, dg)
        alg.set_differential(dg, alg.zero())
        return g

    cochains = [formal_cochain("a", {0: [0, 1], 1: [1, 2], 2: [0, 2]}),
                formal_cochain("b", {0: [1], 1: [0], 2: [1]}),
                formal_cochain("c", {1: [1]})]
    globals_ = [formal_global("x", 0), formal_global("y", 1)]
    return cx, sdr, cochains, globals_


def test_base_sdr_identities(contraction):
    cx, sdr, cochains, globals_ = contraction
    res = sdr.check_identities(cochains, globals_)
    assert all(res.values()), res


def test_perturbed_identities_and_collapse(contraction):
    cx, sdr, cochains, globals_ = contraction
    ps = perturb(sdr)
    res = ps.check_identities(cochains, globals_)
    assert all(res.values()), res
    for s in globals_:
        assert (ps.d_prime(s) - cx.normalize_global(cx.alg.d(s))).is_zero()
        assert (ps.include(s) - sdr.i0(s)).is_zero()


def test_perturb_by_zero_is_identity(contraction):
    cx, sdr, cochains, globals_ = contraction
    ps = perturb(sdr, pert=lambda c: c.cx.zero() if hasattr(c, "cx") else c)

    def zero_pert(c):
        return cx.zero()
    ps = perturb(sdr, pert=zero_pert)
    for s in globals_:
        assert (ps.d_prime(s) - sdr.d_small(s)).is_zero()
        assert (ps.include(s) - sdr.i0(s)).is_zero()
    for c in cochains:
        assert (ps.homotopy(c) - sdr.H0(c)).is_zero()


def test_transfer_products(contraction):
    cx, sdr, cochains, globals_ = contraction
    ps = perturb(sdr)
    tr = AInfinityTransfer(ps)
    x, y = globals_
    assert (tr.pi(1, [x]) - x).is_zero()
    assert (tr.pi(2, [x, y]) - cx.normalize_global(x * y)).is_zero()
    assert tr.pi(3, [x, y, x]).is_zero()
    assert tr.pi(3, [y, y, x]).is_zero()


def test_transfer_P1_is_projection(contraction):
    cx, sdr, cochains, globals_ = contraction
    ps = perturb(sdr)
    tr = AInfinityTransfer(ps)
    for c in cochains:
        assert (tr.P(1, [c]) - ps.project(c)).is_zero()


def test_push_cochain_keeps_mc():
    G = GroupAlgebra(1)
    cx = CechComplex(Nerve([(0, 1)]))
    tc = TransitionCocycle.generic(cx, 1)
    phi = build_phi_P(tc, G)
    sdr = cech_sdr(cx)
    ps = perturb(sdr)
    tr = AInfinityTransfer(ps)
    pushed = push_cochain(phi, tr, depth=2)
    assert pushed.certificate["pass"]
    # degree bound: for du only n <= 2 coproduct layers contribute
    out = pushed.fn(G.du[0][0])
    assert out.is_homogeneous() and out.degree() == 2


def test_transfer_inclusion_components(contraction):
    cx, sdr, cochains, globals_ = contraction
    ps = perturb(sdr)
    tr = AInfinityTransfer(ps)
    x, y = globals_
    assert (tr.I(1, [x]) - ps.include(x)).is_zero()
    # the inclusion is an algebra map, so higher components vanish
    assert tr.I(2, [x, y]).is_zero()
    assert tr.I(3, [x, y, x]).is_zero()


def test_transfer_homotopy_component(contraction):
    cx, sdr, cochains, globals_ = contraction
    ps = perturb(sdr)
    tr = AInfinityTransfer(ps)
    for c in cochains[:2]:
        assert (tr.H(1, [c]) - ps.homotopy(c)).is_zero()
