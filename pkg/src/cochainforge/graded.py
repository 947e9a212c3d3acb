"""Exact graded-commutative differential algebra kernel.

Everything symbolic in this package is a GradedExpr: a finite sum of terms
``Fraction * monomial`` where a monomial is a sorted word in declared
generators.  Swapping two adjacent odd factors costs a sign, odd generators
square to zero, even generators commute freely.  Coefficients are exact
rationals throughout; no floats ever enter the symbolic path.

An Algebra owns the generator registry, the rewrite rules (the only shapes
supported are localizations ``D * f = 1`` at an even degree-0 polynomial f,
and plain monomial rules such as ``e*e -> e``), and the differential, stored
generator by generator.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def _as_fraction(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"scalar must be int or Fraction, got {type(c).__name__}")


class Generator:
    """A formal symbol with a name, an integer degree and a fixed sort key."""

    __slots__ = ("gid", "name", "degree", "sortkey")

    def __init__(self, gid, name, degree, sortkey):
        self.gid = gid
        self.name = name
        self.degree = degree
        self.sortkey = sortkey

    @property
    def odd(self):
        return self.degree % 2 == 1

    def __repr__(self):
        return f"Generator({self.name}, deg={self.degree})"


class Rule:
    """Monomial rewrite rule ``lead -> rest`` with lead an even, degree-0 word."""

    __slots__ = ("lead", "lead_counter", "rest")

    def __init__(self, lead, rest):
        self.lead = lead
        self.lead_counter = Counter(lead)
        self.rest = rest

    def divides(self, counter):
        lc = self.lead_counter
        return all(counter.get(g, 0) >= k for g, k in lc.items())


class Algebra:
    """Registry of generators, rewrite rules and the differential."""

    def __init__(self, name="A"):
        self.name = name
        self.gens = []            # gid -> Generator
        self._by_name = {}
        self.rules = []
        self._diff = {}           # gid -> GradedExpr
        self._localized = {}      # normal form key of f -> inverse generator gid
        self.localization_of = {}  # inverse gid -> the inverted expression

    # -- generator management ------------------------------------------------

    def add_generator(self, name, degree, sortkey=None):
        if name in self._by_name:
            raise ValueError(f"duplicate generator name {name!r} in {self.name}")
        gid = len(self.gens)
        if sortkey is None:
            sortkey = ("z", name, gid)
        g = Generator(gid, name, degree, sortkey)
        self.gens.append(g)
        self._by_name[name] = g
        return g

    def gen(self, name, degree=None, sortkey=None):
        """Return the generator expression, creating the symbol if needed."""
        g = self._by_name.get(name)
        if g is None:
            if degree is None:
                raise KeyError(f"unknown generator {name!r}")
            g = self.add_generator(name, degree, sortkey)
        elif degree is not None and g.degree != degree:
            raise ValueError(f"generator {name!r} exists with degree {g.degree}")
        return GradedExpr(self, {(g.gid,): ONE})

    def generator(self, name):
        return self._by_name[name]

    def zero(self):
        return GradedExpr(self, {})

    def one(self):
        return GradedExpr(self, {(): ONE})

    def scalar(self, c):
        c = _as_fraction(c)
        return GradedExpr(self, {(): c} if c else {})

    def degree_of(self, gid):
        return self.gens[gid].degree

    # -- monomial order (graded lex over sort keys) ---------------------------

    def mono_cmp_key(self, mono):
        """Total order key: degree-graded, then lex on the exponent vector.

        Larger key = larger monomial.  The exponent vector is read along
        ascending generator sort keys; a bigger exponent at the first
        difference wins, so the key negates sort keys for lex comparison.
        """
        expo = Counter(self.gens[g].sortkey for g in mono)
        vec = sorted(expo.items())
        # first differing exponent decides; encode as (-sortkey asc) walk
        return (len(mono), tuple((_NegKey(sk), e) for sk, e in vec))

    def leading_monomial(self, expr):
        return max(expr.terms, key=self.mono_cmp_key)

    # -- rewrite rules ---------------------------------------------------------

    def add_rule(self, lead_mono, rest_expr):
        lead_deg = sum(self.gens[g].degree for g in lead_mono)
        if rest_expr.terms and not all(
                rest_expr.mono_degree(m) == lead_deg for m in rest_expr.terms):
            raise ValueError("inhomogeneous relation")
        lead = tuple(sorted(lead_mono, key=lambda g: self.gens[g].sortkey))
        self.rules.append(Rule(lead, rest_expr))

    def localize(self, f, name=None):
        """Adjoin a formal inverse D of the even degree-0 element f.

        Registers ``D * lt(f) -> (1 - D*(f - lt(f))) / lc(f)`` which is a
        confluent reduction because the rule set stays a Groebner basis of
        the principal ideal (D*f - 1).  Repeated calls with the same f
        return the existing inverse.  d(D) = -D^2 d(f) is registered when f
        has a differential.
        """
        f = f.normalize()
        key = f.freeze()
        if key in self._localized:
            gid = self._localized[key]
            return GradedExpr(self, {(gid,): ONE})
        if any(self.gens[g].degree != 0 for m in f.terms for g in m):
            raise ValueError("can only localize at even degree-0 elements")
        if name is None:
            name = f"inv{len(self._localized)}"
        d_gen = self.add_generator(name, 0)
        self._localized[key] = d_gen.gid
        self.localization_of[d_gen.gid] = f
        dexpr = GradedExpr(self, {(d_gen.gid,): ONE})
        lm = self.leading_monomial(f)
        lc = f.terms[lm]
        tail = GradedExpr(self, {m: c for m, c in f.terms.items() if m != lm})
        # D*lm == (1 - D*tail)/lc
        rest = (self.one() - dexpr * tail) * (ONE / lc)
        self.add_rule(tuple(sorted((d_gen.gid,) + lm, key=lambda g: self.gens[g].sortkey)), rest)
        df = self.d(f)
        if not df.is_zero():
            self.set_differential(d_gen, -(dexpr * dexpr * df))
        else:
            self.set_differential(d_gen, self.zero())
        return dexpr

    # -- differential ----------------------------------------------------------

    def set_differential(self, gen, expr):
        if isinstance(gen, GradedExpr):
            gen = self.gens[gen.single_gid()]
        self._diff[gen.gid] = expr

    def d_of_gen(self, gid):
        try:
            return self._diff[gid]
        except KeyError:
            raise KeyError(f"no differential registered for {self.gens[gid].name}")

    def d(self, expr):
        """Graded Leibniz extension of the registered differential."""
        out = {}
        for mono, coeff in expr.terms.items():
            sign = 1
            for i, g in enumerate(mono):
                dg = self._diff.get(g)
                if dg is None:
                    raise KeyError(f"no differential registered for {self.gens[g].name}")
                if dg.terms:
                    left, right = mono[:i], mono[i + 1:]
                    for dm, dc in dg.terms.items():
                        _mono_accumulate(self, out, left + dm + right,
                                         coeff * dc * sign)
                if self.gens[g].odd:
                    sign = -sign
        return GradedExpr(self, out).normalize()

    def check_square_zero(self, gens=None):
        """True iff d(d(g)) normalizes to 0 for every generator g."""
        if gens is None:
            gens = [g.gid for g in self.gens if g.gid in self._diff]
        for gid in gens:
            e = GradedExpr(self, {(gid,): ONE})
            if not self.d(self.d(e)).is_zero():
                return False
        return True

    def __repr__(self):
        return f"Algebra({self.name}, {len(self.gens)} gens, {len(self.rules)} rules)"


class _NegKey:
    """Wrapper inverting comparisons, for lex-on-exponent-vector keys."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return other.v < self.v

    def __eq__(self, other):
        return self.v == other.v

    def __hash__(self):
        return hash(self.v)


def _merge_monomials(alg, m1, m2):
    """Koszul product of two sorted monomials: (sign, merged) or (0, None)."""
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    gens = alg.gens
    out = []
    sign = 1
    i = j = 0
    odd_left = sum(1 for g in m1 if gens[g].odd)
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        g1, g2 = m1[i], m2[j]
        if gens[g1].sortkey <= gens[g2].sortkey:
            if gens[g1].odd:
                odd_left -= 1
            out.append(g1)
            i += 1
        else:
            if gens[g2].odd:
                if odd_left % 2:
                    sign = -sign
            out.append(g2)
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    # odd generators square to zero
    for k in range(len(out) - 1):
        if out[k] == out[k + 1] and gens[out[k]].odd:
            return 0, None
    return sign, tuple(out)


def _mono_accumulate(alg, acc, mono, coeff):
    """Sort an unsorted word with Koszul signs and add into acc."""
    if not coeff:
        return
    gens = alg.gens
    lst = list(mono)
    # insertion sort, counting odd-odd transpositions
    sign = 1
    for i in range(1, len(lst)):
        g = lst[i]
        k = i
        while k > 0 and gens[lst[k - 1]].sortkey > gens[g].sortkey:
            if gens[lst[k - 1]].odd and gens[g].odd:
                sign = -sign
            lst[k] = lst[k - 1]
            k -= 1
        lst[k] = g
    for k in range(len(lst) - 1):
        if lst[k] == lst[k + 1] and gens[lst[k]].odd:
            return
    key = tuple(lst)
    acc[key] = acc.get(key, ZERO) + sign * coeff
    if not acc[key]:
        del acc[key]


class GradedExpr:
    """Sum of rational multiples of sorted monomials, reduced modulo rules."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg, terms):
        self.alg = alg
        self.terms = terms

    # -- construction helpers --------------------------------------------------

    def freeze(self):
        return tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))

    def single_gid(self):
        if len(self.terms) == 1:
            (mono, c), = self.terms.items()
            if len(mono) == 1 and c == 1:
                return mono[0]
        raise ValueError("expression is not a bare generator")

    # -- predicates ------------------------------------------------------------

    def is_zero(self):
        return not self.normalize().terms

    def is_homogeneous(self):
        degs = {self.mono_degree(m) for m in self.terms}
        return len(degs) <= 1

    def mono_degree(self, mono):
        gens = self.alg.gens
        return sum(gens[g].degree for g in mono)

    def degree(self):
        """Degree of a homogeneous expression (0 for the zero expression)."""
        degs = {self.mono_degree(m) for m in self.terms}
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous expression, degrees {sorted(degs)}")
        return degs.pop() if degs else 0

    def homogeneous_parts(self):
        """dict degree -> homogeneous GradedExpr."""
        parts = {}
        for m, c in self.terms.items():
            parts.setdefault(self.mono_degree(m), {})[m] = c
        return {q: GradedExpr(self.alg, t) for q, t in parts.items()}

    # -- arithmetic --------------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, ZERO) + c
            if not out[m]:
                del out[m]
        return GradedExpr(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedExpr(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if not c:
                return GradedExpr(self.alg, {})
            return GradedExpr(self.alg, {m: k * c for m, k in self.terms.items()})
        if not isinstance(other, GradedExpr):
            return NotImplemented
        if other.alg is not self.alg:
            raise ValueError("cannot multiply expressions from different algebras")
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                sign, mono = _merge_monomials(self.alg, m1, m2)
                if sign:
                    out[mono] = out.get(mono, ZERO) + sign * c1 * c2
                    if not out[mono]:
                        del out[mono]
        return GradedExpr(self.alg, out).reduce()

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        c = _as_fraction(other)
        return self * (ONE / c)

    def __pow__(self, n):
        if n < 0:
            raise ValueError("use Algebra.localize for inverses")
        out = self.alg.one()
        for _ in range(n):
            out = out * self
        return out

    def _coerce(self, other):
        if isinstance(other, GradedExpr):
            if other.alg is not self.alg:
                raise ValueError("mixed algebras")
            return other
        return self.alg.scalar(other)

    # -- normal form -------------------------------------------------------------

    def reduce(self):
        """Apply the algebra's rewrite rules until no monomial is reducible."""
        rules = self.alg.rules
        if not rules:
            return self
        terms = dict(self.terms)
        work = list(terms)
        while work:
            mono = work.pop()
            coeff = terms.get(mono)
            if not coeff:
                continue
            counter = None
            for rule in rules:
                if counter is None:
                    counter = Counter(mono)
                if rule.divides(counter):
                    del terms[mono]
                    q = counter - rule.lead_counter
                    q_mono = tuple(sorted(q.elements(),
                                          key=lambda g: self.alg.gens[g].sortkey))
                    # mono == extract_sign * (q_mono . lead) after resorting
                    extract_sign, _ = _merge_monomials(self.alg, q_mono, rule.lead)
                    for rm, rc in rule.rest.terms.items():
                        sign, merged = _merge_monomials(self.alg, q_mono, rm)
                        if sign:
                            terms[merged] = (terms.get(merged, ZERO)
                                             + extract_sign * sign * coeff * rc)
                            if not terms[merged]:
                                del terms[merged]
                            else:
                                work.append(merged)
                    break
        return GradedExpr(self.alg, terms)

    def normalize(self):
        return self.reduce()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.alg.scalar(other)
        if not isinstance(other, GradedExpr):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(self.normalize().freeze())

    # -- display -----------------------------------------------------------------

    def sexpr(self):
        """Canonical s-expression text form, stable across runs."""
        e = self.normalize()
        if not e.terms:
            return "0"
        items = sorted(e.terms.items(),
                       key=lambda kv: [self.alg.gens[g].sortkey for g in kv[0]])
        parts = []
        for mono, c in items:
            names = " ".join(self.alg.gens[g].name for g in mono)
            parts.append(f"(* {c} {names})" if names else f"(* {c})")
        return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"

    def __repr__(self):
        return self.sexpr()


class Derivation:
    """A graded derivation given by its action on generators.

    parity is the degree shift; extension to products follows
    D(xy) = D(x) y + (-1)^{|D||x|} x D(y).
    """

    __slots__ = ("alg", "parity", "action", "name")

    def __init__(self, alg, parity, action, name="D"):
        self.alg = alg
        self.parity = parity
        self.action = action      # dict gid -> GradedExpr, missing = undefined
        self.name = name

    def __call__(self, expr):
        if expr.alg is not self.alg:
            raise ValueError("derivation applied to foreign expression")
        gens = self.alg.gens
        out = {}
        odd_d = self.parity % 2 == 1
        for mono, coeff in expr.terms.items():
            sign = 1
            for i, g in enumerate(mono):
                if g not in self.action:
                    raise KeyError(f"derivation {self.name} undefined on "
                                   f"{gens[g].name}")
                dg = self.action[g]
                if dg.terms:
                    left, right = mono[:i], mono[i + 1:]
                    for dm, dc in dg.terms.items():
                        _mono_accumulate(self.alg, out, left + dm + right,
                                         coeff * dc * sign)
                if odd_d and gens[g].odd:
                    sign = -sign
        return GradedExpr(self.alg, out).normalize()


def substitute(expr, mapping, target):
    """Algebra morphism: send generator gid -> mapping[gid], identity otherwise.

    mapping values live in `target`; unmapped generators must exist there with
    the same name (shared-registry case: mapping into the same algebra).
    """
    out = target.zero()
    for mono, coeff in expr.terms.items():
        factor = target.one() * coeff
        for g in mono:
            img = mapping.get(g)
            if img is None:
                if target is expr.alg:
                    img = GradedExpr(target, {(g,): ONE})
                else:
                    raise KeyError(f"no image for generator "
                                   f"{expr.alg.gens[g].name} in {target.name}")
            factor = factor * img
        out = out + factor
    return out.normalize()


def make_algebra(gens, rels=(), name="A"):
    """Build an algebra from (name, degree) pairs and homogeneous relations.

    Relations are given as callables mapping the fresh algebra to a pair
    (lead monomial expression, rest expression); see Algebra.add_rule.  Most
    callers use the richer constructors (localize, set_differential) instead.
    """
    alg = Algebra(name)
    seen = set()
    for gname, deg in gens:
        if gname in seen:
            raise ValueError(f"duplicate name {gname!r}")
        seen.add(gname)
        alg.add_generator(gname, deg)
    for rel in rels:
        lead, rest = rel(alg)
        if not lead.is_homogeneous() or not rest.is_homogeneous():
            raise ValueError("inhomogeneous relation")
        lead_mono, = lead.terms
        alg.add_rule(lead_mono, rest)
    return alg
