"""Bundle description files: TOML grammar and the expression mini-language.

Grammar of a bundle file:

    [bundle]                 n = matrix size
    [nerve]                  simplices = [[0, 1], ...]   (ordered charts)
    [charts.<a>]             coordinates = ["z", ...]
    [overlap.<a>,<b>]        other-chart coordinates on the overlap, e.g.
                             w = "1/z"  (expressions in chart-a coordinates)
    [transition.<a>,<b>]     matrix = [["z"]], entries are expressions
    [connection.<a>]         A = [["0", ...], ...]       (optional)
    [pairing]                collar pairing data for 2-chart specs

Expressions: rational-coefficient polynomials in the declared coordinates
and their differentials (d<name>), with + - * / ^ and parentheses; division
localizes at the denominator (which must be even of degree 0).
"""

from __future__ import annotations

import re
from fractions import Fraction

import tomli

from .cech import CechComplex, ConnectionData, Nerve, TransitionCocycle
from .graded import GradedExpr


class ExprParser:
    """Recursive-descent parser into GradedExpr over a chart algebra."""

    TOKEN = re.compile(r"\s*(\d+|[A-Za-z_][A-Za-z_0-9]*|\*\*|[-+*/^()])")

    def __init__(self, alg, names):
        self.alg = alg
        self.names = names

    def parse(self, text):
        self.tokens = self.TOKEN.findall(text)
        self.pos = 0
        out = self._sum()
        if self.pos != len(self.tokens):
            raise ValueError(f"trailing input in expression {text!r}")
        return out

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self):
        tok = self._peek()
        self.pos += 1
        return tok

    def _sum(self):
        sign = 1
        while self._peek() in ("+", "-"):
            if self._next() == "-":
                sign = -sign
        acc = self._product() * sign
        while self._peek() in ("+", "-"):
            sign = 1 if self._next() == "+" else -1
            acc = acc + self._product() * sign
        return acc

    def _product(self):
        acc = self._power()
        while True:
            tok = self._peek()
            if tok == "*":
                self._next()
                acc = acc * self._power()
            elif tok == "/":
                self._next()
                den = self._power()
                acc = acc * self._invert(den)
            else:
                return acc

    def _invert(self, den):
        if den.is_homogeneous() and den.degree() == 0:
            consts = {m: c for m, c in den.normalize().terms.items() if not m}
            if len(den.normalize().terms) == 1 and consts:
                (_, c), = consts.items()
                return self.alg.scalar(Fraction(1) / c)
            return self.alg.localize(den)
        raise ValueError("division only by even degree-0 expressions")

    def _power(self):
        base = self._atom()
        if self._peek() in ("^", "**"):
            self._next()
            exp = self._next()
            if not exp.isdigit():
                raise ValueError("exponent must be a nonnegative integer")
            return base ** int(exp)
        return base

    def _atom(self):
        tok = self._next()
        if tok is None:
            raise ValueError("unexpected end of expression")
        if tok == "(":
            inner = self._sum()
            if self._next() != ")":
                raise ValueError("unbalanced parentheses")
            return inner
        if tok == "-":
            return -self._atom()
        if tok.isdigit():
            return self.alg.scalar(int(tok))
        if tok in self.names:
            return self.names[tok]
        raise ValueError(f"unknown name {tok!r} in expression")


class BundleSpec:
    """Parsed bundle description with constructed symbolic structures."""

    def __init__(self, data):
        self.data = data
        self.n = int(data.get("bundle", {}).get("n", 1))
        simplices = [tuple(map(int, s)) for s in data["nerve"]["simplices"]]
        self.nerve = Nerve(simplices)
        self.cx = CechComplex(self.nerve)
        alg = self.cx.alg
        self.names = {}
        self.coords = {}
        for a in self.nerve.charts:
            cs = data.get("charts", {}).get(str(a), {}).get("coordinates", [])
            self.coords[a] = list(cs)
            for cname in cs:
                if cname in self.names:
                    continue
                g = alg.gen(cname, 0, sortkey=("coord", cname, 0))
                dg = alg.gen("d" + cname, 1, sortkey=("coord", "d" + cname, 0))
                alg.set_differential(g, dg)
                alg.set_differential(dg, alg.zero())
                self.names[cname] = g
                self.names["d" + cname] = dg
        parser = ExprParser(alg, self.names)
        # overlap substitutions: express foreign coordinates
        for key, subs in data.get("overlap", {}).items():
            simplex = tuple(int(x) for x in key.split(","))
            for cname, text in subs.items():
                expr = parser.parse(text)
                gid = self.names[cname].single_gid()
                self.cx.add_substitution(simplex, gid, expr)
                dgid = self.names["d" + cname].single_gid()
                self.cx.add_substitution(simplex, dgid, alg.d(expr))
        mats = {}
        for key, block in data.get("transition", {}).items():
            edge = tuple(int(x) for x in key.split(","))
            rows = [[parser.parse(v) for v in row] for row in block["matrix"]]
            mats[edge] = rows
        self.tc = TransitionCocycle.from_matrices(self.cx, self.n, mats)
        self.conn = None
        if "connection" in data:
            amats = {}
            for a in self.nerve.charts:
                block = data["connection"].get(str(a))
                if block is None:
                    raise ValueError(f"connection missing for chart {a}")
                amats[a] = [[parser.parse(v) for v in row]
                            for row in block["A"]]
            self.conn = ConnectionData(self.cx, self.tc, generic=False,
                                       mats=amats)
        self.pairing = data.get("pairing")
        self.parser = parser

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls(tomli.load(fh))
