"""Truncated exact series.

FracSeries: one formal variable q, exponents in (1/den)Z, coefficients mpq or
Cyclotomic.  truncOrder is explicit and pessimistic: coefficients at exponents
>= trunc are unknown, everything below is exact.

JacobiSeries: series in q whose coefficients are Laurent polynomials in a
second variable zeta (exponents in (1/zden)Z); carries weight/index/level
metadata for the Jacobi-form layer.
"""

from __future__ import annotations

import cmath
from math import gcd, lcm

from gmpy2 import mpq

from .cyclo import (QONE, QZERO, cadd, ciszero, cmul, cneg, cinv, ccomplex,
                    croot, cserialize, cdeserialize)


def _as_q(x):
    return x if isinstance(x, mpq().__class__) else mpq(x)


class FracSeries:
    __slots__ = ("den", "c", "trunc")

    def __init__(self, den, c, trunc):
        self.den = den
        self.c = {k: v for k, v in c.items() if not ciszero(v)}
        self.trunc = _as_q(trunc)
        assert all(mpq(k, den) < self.trunc for k in self.c), "term beyond truncation"

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, trunc, den=1):
        return cls(den, {}, trunc)

    @classmethod
    def one(cls, trunc, den=1):
        return cls(den, {0: QONE}, trunc)

    @classmethod
    def monomial(cls, exp, coef, trunc):
        exp = _as_q(exp)
        den = int(exp.denominator)
        return cls(den, {int(exp.numerator): coef}, trunc)

    # -- bookkeeping -------------------------------------------------------
    def lift(self, den):
        """Rewrite with exponent denominator den (a multiple of self.den)."""
        if den == self.den:
            return self
        s = den // self.den
        return FracSeries(den, {k * s: v for k, v in self.c.items()}, self.trunc)

    def normalized(self):
        """Smallest exponent denominator."""
        g = gcd(self.den, *self.c) if self.c else self.den
        if g == 1:
            return self
        return FracSeries(self.den // g, {k // g: v for k, v in self.c.items()},
                          self.trunc)

    def valuation(self):
        """Leading exponent; the truncation order for an (apparently) zero series."""
        if not self.c:
            return self.trunc
        return mpq(min(self.c), self.den)

    def leading_coef(self):
        if not self.c:
            raise ValueError("zero series has no leading coefficient")
        return self.c[min(self.c)]

    def coef(self, exp):
        exp = _as_q(exp)
        if exp >= self.trunc:
            raise ValueError(f"coefficient at q^{exp} is beyond truncation {self.trunc}")
        num = exp * self.den
        if num.denominator != 1:
            return QZERO
        return self.c.get(int(num), QZERO)

    def truncate(self, trunc):
        trunc = _as_q(trunc)
        if trunc > self.trunc:
            raise ValueError("cannot extend truncation")
        return FracSeries(self.den,
                          {k: v for k, v in self.c.items() if mpq(k, self.den) < trunc},
                          trunc)

    def is_zero(self):
        return not self.c

    def __eq__(self, other):
        if not isinstance(other, FracSeries):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return a.den == b.den and a.c == b.c and a.trunc == b.trunc

    def __repr__(self):
        terms = [f"({self.c[k]})q^({k}/{self.den})" for k in sorted(self.c)[:8]]
        return "FracSeries(" + " + ".join(terms) + f" + O(q^{self.trunc}))"

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, FracSeries):
            other = FracSeries.monomial(0, other, self.trunc)
        den = lcm(self.den, other.den)
        a, b = self.lift(den), other.lift(den)
        trunc = min(a.trunc, b.trunc)
        out = dict(a.c)
        for k, v in b.c.items():
            w = cadd(out.get(k, QZERO), v)
            if ciszero(w):
                out.pop(k, None)
            else:
                out[k] = w
        return FracSeries(den, {k: v for k, v in out.items() if mpq(k, den) < trunc},
                          trunc)

    __radd__ = __add__

    def __neg__(self):
        return FracSeries(self.den, {k: cneg(v) for k, v in self.c.items()}, self.trunc)

    def __sub__(self, other):
        if not isinstance(other, FracSeries):
            other = FracSeries.monomial(0, other, self.trunc)
        return self + (-other)

    def scaled(self, coef):
        if ciszero(coef):
            return FracSeries(self.den, {}, self.trunc)
        return FracSeries(self.den, {k: cmul(coef, v) for k, v in self.c.items()},
                          self.trunc)

    def __mul__(self, other):
        if not isinstance(other, FracSeries):
            return self.scaled(other)
        den = lcm(self.den, other.den)
        a, b = self.lift(den), other.lift(den)
        trunc = min(a.trunc + b.valuation(), b.trunc + a.valuation())
        bound = trunc * den
        out = {}
        for k1, v1 in a.c.items():
            for k2, v2 in b.c.items():
                k = k1 + k2
                if k >= bound:
                    continue
                w = cadd(out.get(k, QZERO), cmul(v1, v2))
                if ciszero(w):
                    out.pop(k, None)
                else:
                    out[k] = w
        return FracSeries(den, out, trunc)

    __rmul__ = scaled

    def shifted(self, exp):
        """Multiply by q^exp."""
        exp = _as_q(exp)
        den = lcm(self.den, int(exp.denominator))
        a = self.lift(den)
        s = int(exp * den)
        return FracSeries(den, {k + s: v for k, v in a.c.items()}, a.trunc + exp)

    def subst_pow(self, u):
        """q -> q^u for a positive rational u (exponent scaling)."""
        u = _as_q(u)
        assert u > 0
        exps = {mpq(k, self.den) * u: v for k, v in self.c.items()}
        den = 1
        for e in exps:
            den = lcm(den, int(e.denominator))
        return FracSeries(den, {int(e * den): v for e, v in exps.items()},
                          self.trunc * u)

    def inverse(self):
        """Multiplicative inverse in the q-adic sense."""
        if not self.c:
            raise ZeroDivisionError("inverting an (apparently) zero series")
        k0 = min(self.c)
        c0i = cinv(self.c[k0])
        # a = c0 q^(k0/den) (1 + x); known terms of x up to trunc - k0/den
        v0 = mpq(k0, self.den)
        x = FracSeries(self.den,
                       {k - k0: cmul(c0i, v) for k, v in self.c.items() if k != k0},
                       self.trunc - v0)
        geom = FracSeries.one(x.trunc, x.den)
        term = FracSeries.one(x.trunc, x.den)
        xv = x.valuation()
        if x.c:
            n = 1
            while xv * n < x.trunc:
                term = (term * x).truncate(x.trunc).scaled(QQ_M1)
                if term.is_zero():
                    break
                geom = geom + term
                n += 1
        inv = geom.scaled(c0i).shifted(-v0)
        return FracSeries(inv.den, inv.c, self.trunc - 2 * v0)

    def __pow__(self, e):
        if e == 0:
            return FracSeries.one(self.trunc, self.den)
        if e < 0:
            return self.inverse() ** (-e)
        out = None
        base = self
        while e:
            if e & 1:
                out = base if out is None else out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def exp(self):
        """exp of a series with strictly positive valuation."""
        if self.c and min(self.c) <= 0:
            raise ValueError("exp needs positive valuation")
        out = FracSeries.one(self.trunc, self.den)
        term = FracSeries.one(self.trunc, self.den)
        v = self.valuation()
        if self.c:
            n = 1
            while v * n < self.trunc:
                term = (term * self).truncate(self.trunc).scaled(mpq(1, n))
                if term.is_zero():
                    break
                out = out + term
                n += 1
        return out

    # -- io / numerics -----------------------------------------------------
    def complex(self, tau):
        """Value at q = e(tau) for a complex tau in the upper half plane.
        Fractional powers q^(k/den) mean e(tau k/den), not a principal
        branch of a root."""
        return sum(ccomplex(v) * cmath.exp(2j * cmath.pi * tau * k / self.den)
                   for k, v in self.c.items())

    def to_json(self):
        s = self.normalized()
        return {"expDenom": s.den,
                "truncNum": int(s.trunc.numerator),
                "truncDen": int(s.trunc.denominator),
                "terms": [[k] + cserialize(s.c[k]) for k in sorted(s.c)]}

    @classmethod
    def from_json(cls, d):
        c = {t[0]: cdeserialize(t[1:]) for t in d["terms"]}
        return cls(d["expDenom"], c, mpq(d["truncNum"], d["truncDen"]))


QQ_M1 = mpq(-1)


class JacobiSeries:
    """Truncated series sum_{n} q^n (sum_r c(n,r) zeta^r); q-exponents n in
    (1/qden)Z, zeta-exponents r in (1/zden)Z."""

    __slots__ = ("qden", "zden", "c", "trunc", "weight", "index", "level")

    def __init__(self, qden, zden, c, trunc, weight=0, index=0, level=1):
        self.qden = qden
        self.zden = zden
        self.c = {}
        for k, row in c.items():
            row = {r: v for r, v in row.items() if not ciszero(v)}
            if row:
                self.c[k] = row
        self.trunc = _as_q(trunc)
        self.weight = weight
        self.index = index
        self.level = level
        assert all(mpq(k, qden) < self.trunc for k in self.c), "term beyond truncation"

    @classmethod
    def zero(cls, trunc, qden=1, zden=1, **kw):
        return cls(qden, zden, {}, trunc, **kw)

    @classmethod
    def one(cls, trunc, qden=1, zden=1, **kw):
        return cls(qden, zden, {0: {0: QONE}}, trunc, **kw)

    @classmethod
    def from_frac(cls, f, zden=1, **kw):
        return cls(f.den, zden, {k: {0: v} for k, v in f.c.items()}, f.trunc, **kw)

    def lift(self, qden, zden):
        if qden == self.qden and zden == self.zden:
            return self
        s = qden // self.qden
        t = zden // self.zden
        return JacobiSeries(qden, zden,
                            {k * s: {r * t: v for r, v in row.items()}
                             for k, row in self.c.items()},
                            self.trunc, self.weight, self.index, self.level)

    def normalized(self):
        qg = gcd(self.qden, *self.c) if self.c else self.qden
        zg = self.zden
        for row in self.c.values():
            zg = gcd(zg, *row)
        if qg == 1 and zg == 1:
            return self
        return JacobiSeries(self.qden // qg, self.zden // zg,
                            {k // qg: {r // zg: v for r, v in row.items()}
                             for k, row in self.c.items()},
                            self.trunc, self.weight, self.index, self.level)

    def coef(self, qexp, zexp):
        qexp, zexp = _as_q(qexp), _as_q(zexp)
        if qexp >= self.trunc:
            raise ValueError(f"coefficient at q^{qexp} beyond truncation {self.trunc}")
        kn = qexp * self.qden
        rn = zexp * self.zden
        if kn.denominator != 1 or rn.denominator != 1:
            return QZERO
        return self.c.get(int(kn), {}).get(int(rn), QZERO)

    def qcoef(self, qexp):
        """The zeta-Laurent coefficient of q^qexp as {zeta-exponent: coef}."""
        qexp = _as_q(qexp)
        if qexp >= self.trunc:
            raise ValueError("beyond truncation")
        kn = qexp * self.qden
        if kn.denominator != 1:
            return {}
        row = self.c.get(int(kn), {})
        return {mpq(r, self.zden): v for r, v in row.items()}

    def valuation(self):
        if not self.c:
            return self.trunc
        return mpq(min(self.c), self.qden)

    def truncate(self, trunc):
        trunc = _as_q(trunc)
        if trunc > self.trunc:
            raise ValueError("cannot extend truncation")
        return JacobiSeries(self.qden, self.zden,
                            {k: row for k, row in self.c.items()
                             if mpq(k, self.qden) < trunc},
                            trunc, self.weight, self.index, self.level)

    def is_zero(self):
        return not self.c

    def __eq__(self, other):
        if not isinstance(other, JacobiSeries):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return (a.qden, a.zden, a.c, a.trunc) == (b.qden, b.zden, b.c, b.trunc)

    def __repr__(self):
        rows = []
        for k in sorted(self.c)[:6]:
            row = " ".join(f"({v})z^({r}/{self.zden})"
                           for r, v in sorted(self.c[k].items()))
            rows.append(f"q^({k}/{self.qden})[{row}]")
        return "JacobiSeries(" + " + ".join(rows) + f" + O(q^{self.trunc}))"

    def __add__(self, other):
        if not isinstance(other, JacobiSeries):
            raise TypeError("JacobiSeries + non-series")
        qden = lcm(self.qden, other.qden)
        zden = lcm(self.zden, other.zden)
        a, b = self.lift(qden, zden), other.lift(qden, zden)
        trunc = min(a.trunc, b.trunc)
        out = {k: dict(row) for k, row in a.c.items()}
        for k, row in b.c.items():
            dst = out.setdefault(k, {})
            for r, v in row.items():
                w = cadd(dst.get(r, QZERO), v)
                if ciszero(w):
                    dst.pop(r, None)
                else:
                    dst[r] = w
        out = {k: row for k, row in out.items() if mpq(k, qden) < trunc}
        return JacobiSeries(qden, zden, out, trunc, a.weight, a.index,
                            lcm(a.level, b.level))

    def __neg__(self):
        return JacobiSeries(self.qden, self.zden,
                            {k: {r: cneg(v) for r, v in row.items()}
                             for k, row in self.c.items()},
                            self.trunc, self.weight, self.index, self.level)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, coef):
        if ciszero(coef):
            return JacobiSeries(self.qden, self.zden, {}, self.trunc,
                                self.weight, self.index, self.level)
        return JacobiSeries(self.qden, self.zden,
                            {k: {r: cmul(coef, v) for r, v in row.items()}
                             for k, row in self.c.items()},
                            self.trunc, self.weight, self.index, self.level)

    def __mul__(self, other):
        if isinstance(other, FracSeries):
            other = JacobiSeries.from_frac(other)
        if not isinstance(other, JacobiSeries):
            return self.scaled(other)
        qden = lcm(self.qden, other.qden)
        zden = lcm(self.zden, other.zden)
        a, b = self.lift(qden, zden), other.lift(qden, zden)
        trunc = min(a.trunc + b.valuation(), b.trunc + a.valuation())
        bound = trunc * qden
        out = {}
        for k1, row1 in a.c.items():
            for k2, row2 in b.c.items():
                k = k1 + k2
                if k >= bound:
                    continue
                dst = out.setdefault(k, {})
                for r1, v1 in row1.items():
                    for r2, v2 in row2.items():
                        r = r1 + r2
                        w = cadd(dst.get(r, QZERO), cmul(v1, v2))
                        if ciszero(w):
                            dst.pop(r, None)
                        else:
                            dst[r] = w
        return JacobiSeries(qden, zden, out, trunc, a.weight + b.weight,
                            a.index + b.index, lcm(a.level, b.level))

    __rmul__ = scaled

    def __pow__(self, e):
        if e == 0:
            return JacobiSeries.one(self.trunc, self.qden, self.zden,
                                    level=self.level)
        if e < 0:
            return self.inverse() ** (-e)
        out = None
        base = self
        while e:
            if e & 1:
                out = base if out is None else out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def qshift(self, exp):
        exp = _as_q(exp)
        qden = lcm(self.qden, int(exp.denominator))
        a = self.lift(qden, self.zden)
        s = int(exp * qden)
        return JacobiSeries(qden, a.zden, {k + s: row for k, row in a.c.items()},
                            a.trunc + exp, a.weight, a.index, a.level)

    def subst(self, qpow=1, zpow=1):
        """(q, zeta) -> (q^qpow, zeta^zpow); qpow a positive rational, zpow a
        nonzero rational."""
        qpow, zpow = _as_q(qpow), _as_q(zpow)
        assert qpow > 0 and zpow != 0
        qden = lcm(self.qden, int((mpq(1, self.qden) * qpow).denominator) * self.qden)
        exps = {}
        qd, zd = 1, 1
        for k, row in self.c.items():
            ke = mpq(k, self.qden) * qpow
            qd = lcm(qd, int(ke.denominator))
            for r in row:
                re = mpq(r, self.zden) * zpow
                zd = lcm(zd, int(re.denominator))
        out = {}
        for k, row in self.c.items():
            ke = int(mpq(k, self.qden) * qpow * qd)
            dst = out.setdefault(ke, {})
            for r, v in row.items():
                re = int(mpq(r, self.zden) * zpow * zd)
                w = cadd(dst.get(re, QZERO), v)
                if ciszero(w):
                    dst.pop(re, None)
                else:
                    dst[re] = w
        return JacobiSeries(qd, zd, out, self.trunc * qpow, self.weight,
                            self.index, self.level)

    def inverse(self):
        """q-adic inverse; the leading q-coefficient must be a zeta-monomial."""
        if not self.c:
            raise ZeroDivisionError("inverting an (apparently) zero series")
        k0 = min(self.c)
        row0 = self.c[k0]
        if len(row0) != 1:
            raise ValueError("leading q-coefficient is not a zeta-monomial")
        (r0, c0), = row0.items()
        v0 = mpq(k0, self.qden)
        zr0 = mpq(r0, self.zden)
        # self = c0 q^v0 zeta^zr0 (1 + x), x of positive q-valuation
        x = self.qshift(-v0)._zshift(-zr0).scaled(cinv(c0))
        row = x.c.get(0, {})
        row.pop(0, None)
        if not row:
            x.c.pop(0, None)
        out = JacobiSeries.one(x.trunc, x.qden, x.zden)
        term = JacobiSeries.one(x.trunc, x.qden, x.zden)
        if x.c:
            xv = x.valuation()
            assert xv > 0
            n = 1
            while xv * n < x.trunc:
                term = (term * x).truncate(x.trunc).scaled(QQ_M1)
                if term.is_zero():
                    break
                out = out + term
                n += 1
        res = out.scaled(cinv(c0)).qshift(-v0)._zshift(-zr0)
        return JacobiSeries(res.qden, res.zden, res.c, self.trunc - 2 * v0,
                            -self.weight, -self.index, self.level)

    def _zshift(self, zexp):
        zexp = _as_q(zexp)
        zden = lcm(self.zden, int(zexp.denominator))
        a = self.lift(self.qden, zden)
        s = int(zexp * zden)
        return JacobiSeries(a.qden, zden,
                            {k: {r + s: v for r, v in row.items()}
                             for k, row in a.c.items()},
                            a.trunc, a.weight, a.index, a.level)

    def complex(self, tau, z):
        return sum(ccomplex(v)
                   * cmath.exp(2j * cmath.pi * (tau * k / self.qden
                                                + z * r / self.zden))
                   for k, row in self.c.items() for r, v in row.items())

    def to_json(self):
        s = self.normalized()
        return {"expDenom": s.qden, "zDenom": s.zden,
                "truncNum": int(s.trunc.numerator),
                "truncDen": int(s.trunc.denominator),
                "weight": s.weight, "index": s.index, "level": s.level,
                "terms": [[k, [[r] + cserialize(s.c[k][r])
                               for r in sorted(s.c[k])]]
                          for k in sorted(s.c)]}

    @classmethod
    def from_json(cls, d):
        c = {t[0]: {row[0]: cdeserialize(row[1:]) for row in t[1]}
             for t in d["terms"]}
        return cls(d["expDenom"], d["zDenom"], c,
                   mpq(d["truncNum"], d["truncDen"]),
                   d.get("weight", 0), d.get("index", 0), d.get("level", 1))


def jacobi_divide_exact(a, b):
    """Exact quotient a / b of Jacobi series, solving q-order by q-order.

    The leading q-coefficient of b need not be a monomial; each q-level is an
    exact Laurent-polynomial division and a non-exact division raises."""
    qden = lcm(a.qden, b.qden)
    zden = lcm(a.zden, b.zden)
    a = a.lift(qden, zden)
    b = b.lift(qden, zden)
    if not b.c:
        raise ZeroDivisionError("dividing by an (apparently) zero series")
    kb = min(b.c)
    b0 = b.c[kb]
    trunc = min(a.trunc, b.trunc) - mpq(kb, qden)
    bound = int(trunc * qden) if (trunc * qden).denominator == 1 else int(trunc * qden) + 1
    out = {}
    ka0 = min(a.c) if a.c else None
    rem = {k: dict(row) for k, row in a.c.items()}
    for k in range((min(rem) - kb) if rem else 0, bound):
        num = rem.get(k + kb, {})
        if not num:
            continue
        qrow = _laurent_divide(num, b0)
        out[k] = qrow
        # subtract qrow * b from rem
        for kb2, row2 in b.c.items():
            dst = rem.setdefault(k + kb2, {})
            for r1, v1 in qrow.items():
                for r2, v2 in row2.items():
                    r = r1 + r2
                    w = cadd(dst.get(r, QZERO), cneg(cmul(v1, v2)))
                    if ciszero(w):
                        dst.pop(r, None)
                    else:
                        dst[r] = w
    for k, row in rem.items():
        if row and mpq(k, qden) < trunc + mpq(kb, qden):
            raise ArithmeticError("non-exact Jacobi series division")
    return JacobiSeries(qden, zden, out, trunc, a.weight - b.weight,
                        a.index - b.index, lcm(a.level, b.level))


def _laurent_divide(num, den):
    """Exact division of Laurent polynomials in zeta given as {exp: coef}."""
    num = dict(num)
    out = {}
    dtop = max(den)
    vtop = den[dtop]
    guard = 0
    while num:
        guard += 1
        if guard > 10000:
            raise ArithmeticError("laurent division diverged")
        ntop = max(num)
        q = cmul(num[ntop], cinv(vtop))
        e = ntop - dtop
        out[e] = cadd(out.get(e, QZERO), q)
        for d, v in den.items():
            k = d + e
            w = cadd(num.get(k, QZERO), cneg(cmul(q, v)))
            if ciszero(w):
                num.pop(k, None)
            else:
                num[k] = w
    return {k: v for k, v in out.items() if not ciszero(v)}
