"""Tensor words over graded algebras, with Koszul bookkeeping.

A TensorExpr is a finite sum of words; each word is a tuple of monomials,
one per tensor leg, each leg living in its own Algebra.  This is the shared
substrate for coproducts, cobar words and the two-sided bar machinery.
"""

from __future__ import annotations

from fractions import Fraction

from .graded import GradedExpr, ZERO, ONE


class TensorExpr:
    __slots__ = ("algs", "terms")

    def __init__(self, algs, terms=None):
        self.algs = tuple(algs)
        self.terms = terms if terms is not None else {}

    @classmethod
    def from_exprs(cls, exprs, coeff=ONE):
        """Tensor product of plain expressions, distributing sums."""
        algs = tuple(e.alg for e in exprs)
        terms = {(): coeff} if coeff else {}
        for i, e in enumerate(exprs):
            new = {}
            for word, c in terms.items():
                for m, cm in e.terms.items():
                    w = word + (m,)
                    new[w] = new.get(w, ZERO) + c * cm
            terms = {w: c for w, c in new.items() if c}
        return cls(algs, terms)

    def zero_like(self):
        return TensorExpr(self.algs, {})

    def is_zero(self):
        return not self.normalize().terms

    def word_degrees(self, word):
        return tuple(sum(self.algs[i].gens[g].degree for g in m)
                     for i, m in enumerate(word))

    def copy_add(self, word, coeff, acc=None):
        t = self.terms if acc is None else acc
        t[word] = t.get(word, ZERO) + coeff
        if not t[word]:
            del t[word]

    def __add__(self, other):
        if other == 0:
            return self
        assert self.algs == other.algs
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, ZERO) + c
            if not out[w]:
                del out[w]
        return TensorExpr(self.algs, out)

    __radd__ = __add__

    def __neg__(self):
        return TensorExpr(self.algs, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return self.zero_like()
        return TensorExpr(self.algs, {w: k * c for w, k in self.terms.items()})

    def __mul__(self, other):
        """Graded product of tensor algebras: legwise with interchange signs."""
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        assert self.algs == other.algs
        n = len(self.algs)
        out = {}
        for w1, c1 in self.terms.items():
            d1 = self.word_degrees(w1)
            for w2, c2 in other.terms.items():
                d2 = self.word_degrees(w2)
                # move each w2 leg i past w1 legs j > i
                s = sum(d2[i] * d1[j] for i in range(n) for j in range(i + 1, n))
                sign = -1 if s % 2 else 1
                pieces = [(tuple(), sign * c1 * c2)]
                dead = False
                for i in range(n):
                    e = (GradedExpr(self.algs[i], {w1[i]: ONE})
                         * GradedExpr(self.algs[i], {w2[i]: ONE}))
                    if not e.terms:
                        dead = True
                        break
                    pieces = [(w + (m,), c * cm)
                              for w, c in pieces for m, cm in e.terms.items()]
                if dead:
                    continue
                for w, c in pieces:
                    out[w] = out.get(w, ZERO) + c
                    if not out[w]:
                        del out[w]
        return TensorExpr(self.algs, out)

    __rmul__ = scale

    def apply_leg(self, i, op, parity):
        """Apply a linear map (GradedExpr -> GradedExpr) to leg i.

        Crossing legs 0..i-1 costs (-1)^{parity * sum of their degrees}.
        The map may change the leg's algebra.
        """
        out_terms = {}
        out_algs = None
        for word, coeff in self.terms.items():
            degs = self.word_degrees(word)
            s = parity * sum(degs[:i])
            sign = -1 if s % 2 else 1
            img = op(GradedExpr(self.algs[i], {word[i]: ONE}))
            if out_algs is None:
                out_algs = self.algs[:i] + (img.alg,) + self.algs[i + 1:]
            for m, c in img.terms.items():
                w = word[:i] + (m,) + word[i + 1:]
                out_terms[w] = out_terms.get(w, ZERO) + sign * coeff * c
                if not out_terms[w]:
                    del out_terms[w]
        if out_algs is None:
            out_algs = self.algs
        return TensorExpr(out_algs, out_terms)

    def normalize(self):
        """Reduce every leg modulo its algebra rules, re-distributing sums."""
        out = {}
        for word, coeff in self.terms.items():
            pieces = [(tuple(), coeff)]
            dead = False
            for i, m in enumerate(word):
                e = GradedExpr(self.algs[i], {m: ONE}).normalize()
                if not e.terms:
                    dead = True
                    break
                pieces = [(w + (mm,), c * cm)
                          for w, c in pieces for mm, cm in e.terms.items()]
            if dead:
                continue
            for w, c in pieces:
                out[w] = out.get(w, ZERO) + c
                if not out[w]:
                    del out[w]
        return TensorExpr(self.algs, out)

    def leg(self, word, i):
        return GradedExpr(self.algs[i], {word[i]: ONE})

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for w, c in sorted(self.terms.items(), key=lambda kv: str(kv[0])):
            legs = " (x) ".join(
                GradedExpr(self.algs[i], {m: ONE}).sexpr()
                for i, m in enumerate(w))
            bits.append(f"{c} * [{legs}]")
        return "  +  ".join(bits)


def tensor_diff(tx, diffs):
    """Differential on a tensor product: sum over legs with Koszul signs."""
    out = tx.zero_like()
    for i, dfun in enumerate(diffs):
        out = out + tx.apply_leg(i, dfun, 1)
    return out.normalize()
