"""Exact cyclotomic arithmetic: sparse elements of Q(zeta_n).

An element of Q(zeta_n) is stored as a sparse dict {exponent mod n: rational}
over a canonical monomial basis of the field.  Coefficients elsewhere in the
package are either plain gmpy2.mpq rationals or Cyclotomic instances; the
cadd/cmul/... helpers at the bottom implement that mixed protocol, demoting
to mpq whenever a value is rational.
"""

from __future__ import annotations

import cmath
from functools import lru_cache
from math import gcd, lcm

from gmpy2 import mpq
from sympy import factorint

QZERO = mpq(0)
QONE = mpq(1)


def QQ(a, b=1):
    return mpq(a, b)


@lru_cache(maxsize=None)
def _conductor_data(n):
    """Reduction data for conductor n, one tuple (p, q, q//p, m, n//p) per
    prime p | n with q = p^e the exact power.  m is the inverse of n/q mod q;
    the "p-digit" of an exponent k is (k*m % q) // (q//p), and k is a basis
    exponent iff no digit equals p-1."""
    out = []
    for p, e in factorint(n).items():
        q = p ** e
        m = pow(n // q, -1, q)
        out.append((p, q, q // p, m, n // p))
    return tuple(out)


def _canonicalize(c, n):
    """Rewrite {exp: coef} into the canonical basis of Q(zeta_n), dropping zeros."""
    data = _conductor_data(n)
    stack = list(c.items())
    out = {}
    while stack:
        k, v = stack.pop()
        if not v:
            continue
        k %= n
        for p, q, pe1, m, n_p in data:
            if (k * m % q) // pe1 == p - 1:
                # sum_{j=0}^{p-1} zeta^(k - j*n/p) = 0
                stack.extend(((k - j * n_p) % n, -v) for j in range(1, p))
                break
        else:
            w = out.get(k, QZERO) + v
            if w:
                out[k] = w
            elif k in out:
                del out[k]
    return out


class Cyclotomic:
    """Canonical-form element of Q(zeta_n).  Construct via cyclo()/croot()."""

    __slots__ = ("n", "c")

    def __init__(self, n, c):
        self.n = n
        self.c = c

    def __eq__(self, other):
        if isinstance(other, Cyclotomic):
            return self.n == other.n and self.c == other.c
        return False

    def __hash__(self):
        return hash((self.n, frozenset(self.c.items())))

    def __repr__(self):
        terms = " + ".join(f"({v})*z{self.n}^{k}" for k, v in sorted(self.c.items()))
        return f"Cyclotomic({terms})"

    def complex(self):
        tau = 2j * cmath.pi / self.n
        return sum(float(v) * cmath.exp(tau * k) for k, v in self.c.items())


def cyclo(n, c):
    """Build a coefficient from {exp mod n: rational}; returns mpq when rational."""
    c = _canonicalize(c, n)
    while c:
        g = gcd(n, *c)
        if g == 1:
            break
        n //= g
        c = _canonicalize({k // g: v for k, v in c.items()}, n)
    if not c:
        return QZERO
    if n == 1:
        return c[0]
    return Cyclotomic(n, c)


def croot(num, den):
    """The root of unity e(num/den) = exp(2*pi*i*num/den)."""
    if den < 0:
        num, den = -num, -den
    num %= den
    g = gcd(num, den)
    return cyclo(den // g, {num // g: QONE})


def _lift(x, n):
    if isinstance(x, Cyclotomic):
        s = n // x.n
        return {k * s: v for k, v in x.c.items()}
    return {0: x} if x else {}


def cadd(a, b):
    if not isinstance(a, Cyclotomic) and not isinstance(b, Cyclotomic):
        return a + b
    n = lcm(a.n if isinstance(a, Cyclotomic) else 1,
            b.n if isinstance(b, Cyclotomic) else 1)
    out = _lift(a, n)
    for k, v in _lift(b, n).items():
        w = out.get(k, QZERO) + v
        if w:
            out[k] = w
        elif k in out:
            del out[k]
    return cyclo(n, out)


def cneg(a):
    if isinstance(a, Cyclotomic):
        return Cyclotomic(a.n, {k: -v for k, v in a.c.items()})
    return -a


def csub(a, b):
    return cadd(a, cneg(b))


def cmul(a, b):
    if isinstance(a, Cyclotomic):
        if isinstance(b, Cyclotomic):
            n = lcm(a.n, b.n)
            da = _lift(a, n)
            db = _lift(b, n)
            out = {}
            for k1, v1 in da.items():
                for k2, v2 in db.items():
                    k = (k1 + k2) % n
                    w = out.get(k, QZERO) + v1 * v2
                    if w:
                        out[k] = w
                    elif k in out:
                        del out[k]
            return cyclo(n, out)
        a, b = b, a
    if isinstance(b, Cyclotomic):
        if not a:
            return QZERO
        return Cyclotomic(b.n, {k: a * v for k, v in b.c.items()})
    return a * b


def ciszero(x):
    return not isinstance(x, Cyclotomic) and not x


def cconj(x):
    """Complex conjugate (zeta -> zeta^-1)."""
    if isinstance(x, Cyclotomic):
        return cyclo(x.n, {(-k) % x.n: v for k, v in x.c.items()})
    return x


def cgal(x, u):
    """Galois action zeta_n -> zeta_n^u; u must be a unit mod the conductor."""
    if isinstance(x, Cyclotomic):
        if gcd(u, x.n) != 1:
            raise ValueError("not a unit mod conductor")
        return cyclo(x.n, {k * u % x.n: v for k, v in x.c.items()})
    return x


def cinv(x):
    """Exact multiplicative inverse."""
    if not isinstance(x, Cyclotomic):
        if not x:
            raise ZeroDivisionError("inverse of zero")
        return 1 / x
    if len(x.c) == 1:
        (k, v), = x.c.items()
        return cyclo(x.n, {(-k) % x.n: 1 / v})
    y = cconj(x)
    p = cmul(x, y)
    if not isinstance(p, Cyclotomic):
        return cmul(y, 1 / p)
    # fall back to the full Galois norm
    m = QONE
    for u in range(2, x.n):
        if gcd(u, x.n) == 1:
            m = cmul(m, cgal(x, u))
    nr = cmul(x, m)
    if isinstance(nr, Cyclotomic):
        raise ArithmeticError("norm failed to be rational")
    return cmul(m, 1 / nr)


def as_rational(x):
    """The value as an mpq, or None if irrational."""
    return None if isinstance(x, Cyclotomic) else x


def ccomplex(x):
    if isinstance(x, Cyclotomic):
        return x.complex()
    return complex(x)


@lru_cache(maxsize=None)
def sqrt_int(d):
    """Exact square root of a positive integer as a cyclotomic coefficient."""
    if d <= 0:
        raise ValueError("need a positive integer")
    s = 1
    rad = 1
    for p, e in factorint(d).items():
        s *= p ** (e // 2)
        if e % 2:
            rad *= p
    out = mpq(s)
    for p in factorint(rad):
        if p == 2:
            rp = cadd(croot(1, 8), croot(-1, 8))
        else:
            g = QZERO
            for a in range(1, p):
                leg = pow(a, (p - 1) // 2, p)
                g = cadd(g, cmul(QONE if leg == 1 else -QONE, croot(a, p)))
            rp = g if p % 4 == 1 else cmul(croot(-1, 4), g)
        out = cmul(out, rp)
    return out


def cserialize(x):
    """Flat deterministic encoding: [conductor, exp0, "coef0", exp1, "coef1", ...]."""
    if not isinstance(x, Cyclotomic):
        return [1, 0, str(x)]
    out = [x.n]
    for k in sorted(x.c):
        out.extend((k, str(x.c[k])))
    return out


def cdeserialize(data):
    n = data[0]
    c = {}
    for i in range(1, len(data), 2):
        c[data[i]] = mpq(data[i + 1])
    return cyclo(n, c)
