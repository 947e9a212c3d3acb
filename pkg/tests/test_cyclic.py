"""Word complexes: bar, Hochschild, Connes B and the equivariant extension."""

import random
from fractions import Fraction

import pytest

from cochainforge.cyclic import AlgebraLegs, CechLegs, Chains, UExpr, word
from cochainforge.graded import Algebra


@pytest.fixture(scope="module")
def forms():
    alg = Algebra("T")
    gens = []
    for i in range(3):
        t = alg.gen(f"t{i}", 0)
        w = alg.gen(f"w{i}", 1)
        alg.set_differential(t, w)
        alg.set_differential(w, alg.zero())
        gens.extend([t, w])
    x2 = alg.gen("x2", 2)
    dx2 = alg.gen("dx2", 3)
    alg.set_differential(x2, dx2)
    alg.set_differential(dx2, alg.zero())
    gens.extend([x2, dx2])
    dt = alg.gen("dt", 1)
    alg.set_differential(dt, alg.zero())
    return alg, gens, dt


def random_words(forms, count, seed=0, coeff_min_deg=0):
    alg, gens, dt = forms
    legs = AlgebraLegs(alg, dt_gid=dt.single_gid())
    rng = random.Random(seed)
    odds = [g for g in gens if g.degree() % 2 == 1 or g.degree() >= 1]
    out = []
    for _ in range(count):
        exprs = []
        for _ in range(rng.randint(1, 4)):
            e = rng.choice(odds)
            if rng.random() < 0.3:
                e = e * rng.choice(odds)
            if rng.random() < 0.3:
                e = e * dt
            exprs.append(e)
        coeff = rng.choice(odds + [alg.one()])
        if coeff_min_deg == 0 and rng.random() < 0.3:
            coeff = rng.choice([g for g in gens if g.degree() == 0])
        if rng.random() < 0.3:
            coeff = coeff * dt
        out.append(word(legs, legs, exprs, coeff, u_exp=rng.randint(-1, 1)))
    return legs, out


def test_b_squared(forms):
    _, words = random_words(forms, 60, seed=1)
    for w in words:
        assert w.hochschild_b().hochschild_b().is_zero()


def test_B_squared(forms):
    _, words = random_words(forms, 60, seed=2)
    for w in words:
        assert w.connes_B().connes_B().is_zero()


def test_mixed_identity(forms):
    # bB + Bb = 0 away from degenerate coefficients (the quotient boundary)
    _, words = random_words(forms, 50, seed=3, coeff_min_deg=1)
    for w in words:
        mix = w.hochschild_b().connes_B() + w.connes_B().hochschild_b()
        assert mix.is_zero()


def test_bar_d_squared(forms):
    alg, gens, dt = forms
    legs, words = random_words(forms, 40, seed=4)
    for w in words:
        bar = Chains(legs, legs, {(u, None, l): c
                                  for (u, c0, l), c in w.terms.items()})
        assert bar.bar_d().bar_d().is_zero()


def test_B_of_trailing_unit_word(forms):
    alg, gens, dt = forms
    legs = AlgebraLegs(alg, dt_gid=dt.single_gid())
    w = word(legs, legs, [gens[1]], alg.one())
    assert w.connes_B().is_zero()


def test_du_squared(forms):
    alg, gens, dt = forms
    e = UExpr.of(gens[0] * dt) + UExpr.of(gens[3], -1)
    dd = e.d_u(dt.single_gid()).d_u(dt.single_gid())
    assert dd.is_zero()
    # d_u(b dt) = db dt + (-1)^{|b|} u b
    b = gens[1]   # odd
    out = UExpr.of(b * dt).d_u(dt.single_gid())
    expect = UExpr.of(alg.d(b) * dt) + UExpr.of(b, 1).scale(-1)
    assert (out - expect).is_zero()


def test_deconcat_counts(forms):
    alg, gens, dt = forms
    legs = AlgebraLegs(alg)
    w = word(legs, legs, [gens[1], gens[3]], alg.one())
    splits = w.deconcat()
    assert sum(1 for _ in splits) == 3


def test_word_strikes_degenerate_legs(forms):
    alg, gens, dt = forms
    legs = AlgebraLegs(alg)
    w = word(legs, legs, [gens[0]], alg.one())   # degree-0 leg
    assert w.is_zero()
