"""Small helpers for matrices with GradedExpr entries."""

from __future__ import annotations


def mat(alg, rows):
    return [[alg.scalar(v) if isinstance(v, int) else v for v in row]
            for row in rows]


def zeros(alg, n, m=None):
    m = n if m is None else m
    return [[alg.zero() for _ in range(m)] for _ in range(n)]


def eye(alg, n):
    return [[alg.one() if i == j else alg.zero() for j in range(n)]
            for i in range(n)]


def madd(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def msub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mscale(a, c):
    return [[x * c for x in row] for row in a]


def mmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for l in range(1, k):
                acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return out


def mmap(a, f):
    return [[f(x) for x in row] for row in a]


def trace(a):
    acc = a[0][0]
    for i in range(1, len(a)):
        acc = acc + a[i][i]
    return acc


def det(a):
    """Leibniz determinant; fine for the small n used here."""
    n = len(a)
    if n == 1:
        return a[0][0]
    acc = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        term = a[0][j] * det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def adjugate(a):
    n = len(a)
    if n == 1:
        return [[a[0][0].alg.one()]]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            minor = [r[:i] + r[i + 1:] for k, r in enumerate(a) if k != j]
            c = det(minor)
            if (i + j) % 2:
                c = -c
            row.append(c)
        out.append(row)
    return out


def inverse(a, alg, name=None):
    """Matrix inverse via the adjugate and a localized determinant."""
    dinv = alg.localize(det(a), name)
    return mmap(adjugate(a), lambda x: dinv * x)


def mat_is_zero(a):
    return all(x.is_zero() for row in a for x in row)
