"""Exact expansions of the classical building blocks: eta, theta, the weak
Jacobi forms phi_{-2,1} and phi_{0,1}, E2 and its level-N combinations, eta
quotients and generalized theta blocks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

from gmpy2 import mpq
from sympy import divisor_sigma

from .cyclo import QONE, QZERO, QQ
from .series import FracSeries, JacobiSeries

_KRON12 = {1: 1, 11: 1, 5: -1, 7: -1}


@lru_cache(maxsize=None)
def eta_series(scale, trunc):
    """eta(scale*tau) = sum_{n>=1} (12/n) q^(scale*n^2/24)."""
    trunc = mpq(trunc)
    assert trunc > 0
    c = {}
    n = 1
    while mpq(scale * n * n, 24) < trunc:
        s = _KRON12.get(n % 12)
        if s:
            c[scale * n * n] = mpq(s)
        n += 1
    return FracSeries(24, c, trunc).normalized()


@lru_cache(maxsize=None)
def eta_product_form(scale, trunc):
    """eta(scale*tau) from the product q^(1/24) prod (1-q^n); oracle for the sum form."""
    trunc = mpq(trunc)
    out = FracSeries.monomial(mpq(scale, 24), QONE, trunc)
    n = 1
    while mpq(scale, 24) + scale * n < trunc:
        out = out * FracSeries(1, {0: QONE, scale * n: -QONE}, trunc)
        n += 1
    return out


@lru_cache(maxsize=None)
def theta_series(trunc, qpow=1, zpow=1):
    """vartheta(qpow*tau, zpow*z) = sum_{n odd} (4/n) q^(n^2/8) zeta^(n/2)."""
    trunc = mpq(trunc)
    assert trunc > 0
    c = {}
    n = 1
    while mpq(n * n, 8) * qpow < trunc:
        s = QONE if n % 4 == 1 else -QONE
        c[n * n] = {n: s, -n: -s}
        n += 2
    return JacobiSeries(8, 2, c, mpq(trunc, qpow), weight=0, index=1).subst(qpow, zpow)


def theta_product_form(trunc):
    trunc = mpq(trunc)
    lead = JacobiSeries(8, 2, {1: {1: QONE, -1: -QONE}}, trunc)
    out = lead
    n = 1
    while mpq(1, 8) + n < trunc:
        for r in (1, 0, -1):
            out = out * JacobiSeries(1, 1, {0: {0: QONE}, n: {r: -QONE}}, trunc)
        n += 1
    return out


@lru_cache(maxsize=None)
def _theta234(i, trunc):
    """The classical theta constants theta_i(tau, z), i in {2,3,4}, and their
    z = 0 specializations (as the second return value)."""
    trunc = mpq(trunc)
    cj, cf = {}, {}
    if i == 2:
        n = 0
        while True:
            for m in (2 * n + 1, -2 * n - 1):
                k = m * m
                if mpq(k, 8) >= trunc:
                    break
                cj.setdefault(k, {})[m] = QONE
                cf[k] = cf.get(k, QZERO) + QONE
            if mpq((2 * n + 1) ** 2, 8) >= trunc:
                break
            n += 1
        return (JacobiSeries(8, 2, cj, trunc), FracSeries(8, cf, trunc))
    n = 0
    while mpq(n * n, 2) < trunc:
        s = QONE if (i == 3 or n % 2 == 0) else -QONE
        for m in ((n, -n) if n else (0,)):
            cj.setdefault(n * n, {})[m] = s
        cf[n * n] = cf.get(n * n, QZERO) + (s + s if n else s)
        n += 1
    return (JacobiSeries(2, 1, cj, trunc), FracSeries(2, cf, trunc))


_PHI01_ANCHORS = {
    0: {-1: 1, 0: 10, 1: 1},
    1: {-2: 10, -1: -64, 0: 108, 1: -64, 2: 10},
    2: {-3: 1, -2: 108, -1: -513, 0: 808, 1: -513, 2: 108, 3: 1},
}


@lru_cache(maxsize=None)
def phi_m2_1(trunc):
    """phi_{-2,1} = vartheta^2 / eta^6."""
    trunc = mpq(trunc)
    th2 = theta_series(trunc + 1) ** 2
    e6 = eta_series(1, trunc + 1) ** 6
    out = (th2 * JacobiSeries.from_frac(e6.inverse())).truncate(trunc)
    out.weight, out.index, out.level = -2, 1, 1
    assert out.qcoef(0) == {mpq(-1): QONE, mpq(0): mpq(-2), mpq(1): QONE}
    return out


@lru_cache(maxsize=None)
def phi_0_1(trunc):
    """phi_{0,1} built from theta constants as 4*sum_i (theta_i(tau,z)/theta_i(tau,0))^2
    for i = 2,3,4; validated against its q^0..q^2 coefficients and the 4n-r^2
    coefficient dependence."""
    trunc = mpq(trunc)
    work = trunc + 1
    out = None
    for i in (2, 3, 4):
        tj, tf = _theta234(i, work)
        term = (tj * JacobiSeries.from_frac(tf.inverse())) ** 2
        out = term if out is None else out + term
    out = out.scaled(mpq(4)).truncate(trunc)
    out.weight, out.index, out.level = 0, 1, 1
    for n, row in _PHI01_ANCHORS.items():
        if n < trunc:
            got = out.qcoef(n)
            want = {mpq(r): mpq(v) for r, v in row.items()}
            if got != want:
                raise AssertionError(f"phi_0,1 anchor failed at q^{n}: {got}")
    _check_index1_dependence(out)
    return out


def _check_index1_dependence(phi):
    """c(n, r) must depend only on 4n - r^2 for an index-1 weak form."""
    seen = {}
    for k, row in phi.c.items():
        for r, v in row.items():
            key = 4 * mpq(k, phi.qden) - mpq(r, phi.zden) ** 2
            if key in seen:
                assert seen[key] == v, f"index-1 dependence fails at D={key}"
            else:
                seen[key] = v


@lru_cache(maxsize=None)
def e2_series(trunc, scale=1):
    """E2(scale*tau) = 1 - 24 sum sigma_1(n) q^(scale*n)."""
    trunc = mpq(trunc)
    c = {0: QONE}
    n = 1
    while scale * n < trunc:
        c[scale * n] = mpq(-24 * int(divisor_sigma(n, 1)))
        n += 1
    return FracSeries(1, c, trunc)


@lru_cache(maxsize=None)
def e2n_series(level, scale, trunc):
    """E2^(level)(scale*tau) = (level*E2(level*scale*tau) - E2(scale*tau))/(level-1)."""
    assert level >= 2
    a = e2_series(mpq(trunc), level * scale).scaled(mpq(level, level - 1))
    b = e2_series(mpq(trunc), scale).scaled(mpq(1, level - 1))
    return a - b


@dataclass(frozen=True)
class EtaQuotient:
    factors: tuple  # ((scale, exponent), ...) with strictly increasing scales
    pref: object = QONE

    def __post_init__(self):
        merged = {}
        for k, b in self.factors:
            merged[k] = merged.get(k, 0) + b
        object.__setattr__(self, "factors",
                           tuple(sorted((k, b) for k, b in merged.items() if b)))

    @property
    def weight(self):
        return mpq(sum(b for _, b in self.factors), 2)

    @property
    def lead_exp(self):
        return mpq(sum(k * b for k, b in self.factors), 24)

    def level_bound(self):
        from math import lcm
        return lcm(*(k for k, _ in self.factors))


def eta_quotient_series(eq, trunc):
    """Exact expansion of pref * prod eta(k*tau)^b_k, negative exponents included."""
    trunc = mpq(trunc)
    margin = sum(mpq(2 * k * -b, 24) for k, b in eq.factors if b < 0) + 1
    out = FracSeries.one(trunc + margin)
    for k, b in eq.factors:
        out = out * (eta_series(k, trunc + margin) ** b)
    if out.trunc > trunc:
        out = out.truncate(trunc)
    assert out.trunc == trunc, (out.trunc, trunc)
    return out.scaled(mpq(eq.pref)).normalized()


def theta_block(mult_map, trunc):
    """prod_d eta(d tau)^mult_d(0,0) prod_{r>=1} (vartheta(d tau, d r z)/eta(d tau))^mult_d(0,r).

    mult_map: {d: {0: mult_d(0,0), r: mult_d(0,r), ...}} with integer values."""
    trunc = mpq(trunc)
    margin = 2
    out = JacobiSeries.one(trunc + margin)
    for d, row in sorted(mult_map.items()):
        b0 = row.get(0, 0)
        eta_pow = b0 - sum(v for r, v in row.items() if r > 0)
        if eta_pow:
            out = out * JacobiSeries.from_frac(eta_series(d, trunc + margin) ** eta_pow)
        for r, v in sorted(row.items()):
            if r > 0 and v:
                out = out * (theta_series(trunc + margin, d, d * r) ** v)
    return out.truncate(trunc)
