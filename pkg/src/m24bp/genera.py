"""Twisted genus assembly.

Each class determines a weight-0 index-1 weak Jacobi form
    phi = (chi/12) * phi_{0,1} + T * phi_{-2,1},
where chi is the trace and T is a weight-2 form on Gamma_0(level) shipped as
a combination of atoms in data/ttilde.toml.  Atom kinds:

  eta:    prefactor times a product of eta(k*tau)^b factors
  e2n:    the normalized level-L quasimodular combination
          (L*E2(L*s*tau) - E2(s*tau)) / (L - 1)
  e1pair: a product of two vector-indexed weight-1 Eisenstein series
          (see e1_series)

Every loaded combination is validated against the shipped q^0..q^2 tables
before use.
"""
from functools import lru_cache
from importlib import resources
from math import gcd

import tomli
from gmpy2 import mpq

from .blocks import (EtaQuotient, e2n_series, eta_quotient_series, phi_0_1,
                     phi_m2_1)
from .classes import ClassRecord, class_of_power, get_class
from .cyclo import QQ, QZERO, cadd, cinv, cmul, croot
from .series import FracSeries, JacobiSeries
from .tables import appendix_a


@lru_cache(maxsize=None)
def e1_series(mod: int, c: int, d: int, trunc, scale: int = 1) -> FracSeries:
    """Weight-1 Eisenstein series attached to the vector (c, d) mod `mod`,
    normalized so that the first transformation component is c/mod.
    Expanded in powers of q^(1/mod), then rescaled by `scale`."""
    trunc = QQ(trunc)
    c, d = c % mod, d % mod
    assert (c, d) != (0, 0)
    coeffs = {}
    if c == 0:
        zd = croot(d, mod)
        coeffs[QZERO] = cmul(cmul(cadd(zd, QQ(1)), cinv(cadd(zd, QQ(-1)))),
                             mpq(1, 2))
    else:
        coeffs[QZERO] = mpq(c, mod) - mpq(1, 2)
    bound = int(trunc * mod / scale) + 1
    for m in range(1, bound + 1):
        pos = m % mod == c
        neg = (-m) % mod == c
        if not (pos or neg):
            continue
        r = 1
        while QQ(m * r * scale, mod) < trunc:
            e = QQ(m * r * scale, mod)
            if pos:
                coeffs[e] = cadd(coeffs.get(e, QZERO),
                                 cmul(mpq(-1), croot(r * d, mod)))
            if neg:
                coeffs[e] = cadd(coeffs.get(e, QZERO), croot(-r * d, mod))
            r += 1
    den = mod
    out = {int(e * den): v for e, v in coeffs.items()}
    return FracSeries(den, out, trunc).normalized()


def atom_series(atom: dict, trunc) -> FracSeries:
    kind = atom["type"]
    coeff = mpq(atom["coeff"])
    if kind == "eta":
        eq = EtaQuotient(tuple(map(tuple, atom["factors"])), pref=coeff)
        return eta_quotient_series(eq, QQ(trunc))
    if kind == "e2n":
        return e2n_series(atom["level"], atom.get("scale", 1),
                          QQ(trunc)).scaled(coeff)
    if kind == "e1pair":
        mod = atom["mod"]
        s = atom.get("scale", 1)
        a = e1_series(mod, atom["v1"][0], atom["v1"][1], QQ(trunc), s)
        b = e1_series(mod, atom["v2"][0], atom["v2"][1], QQ(trunc), s)
        return (a * b).truncate(QQ(trunc)).scaled(coeff)
    if kind == "e1sum":
        mod = atom["mod"]
        s = atom.get("scale", 1)
        out = FracSeries.zero(QQ(trunc))
        for (v1, v2) in atom["pairs"]:
            a = e1_series(mod, v1[0], v1[1], QQ(trunc), s)
            b = e1_series(mod, v2[0], v2[1], QQ(trunc), s)
            out = out + (a * b).truncate(QQ(trunc))
        return out.scaled(coeff)
    raise ValueError(f"unknown atom type {kind}")


@lru_cache(maxsize=None)
def _ttilde_data() -> dict:
    with resources.files("m24bp.data").joinpath("ttilde.toml").open("rb") as fh:
        return tomli.load(fh)["classes"]


def ttilde_atoms(rec: ClassRecord) -> tuple:
    data = _ttilde_data()
    if rec.name not in data:
        raise KeyError(f"no weight-2 data for class {rec.name}")
    return tuple(data[rec.name].get("atoms", []))


@lru_cache(maxsize=None)
def ttilde_series(name: str, trunc) -> FracSeries:
    rec = get_class(name)
    out = FracSeries.zero(QQ(trunc))
    for atom in ttilde_atoms(rec):
        out = out + atom_series(atom, trunc)
    coeffs = recover_ttilde_coeffs(name, 2)
    for n, t in enumerate(coeffs):
        assert out.coef(QQ(n)) == t, (name, n, out.coef(QQ(n)), t)
    return out


@lru_cache(maxsize=None)
def genus(name: str, trunc) -> JacobiSeries:
    """The weight-0 index-1 weak Jacobi form of the class, through q^trunc."""
    trunc = QQ(trunc)
    rec = get_class(name)
    chi = rec.trace
    out = phi_0_1(trunc).scaled(mpq(chi, 12))
    tt = ttilde_series(name, trunc)
    out = out + phi_m2_1(trunc) * JacobiSeries.from_frac(tt)
    out = out.truncate(trunc)
    out.weight, out.index, out.level = 0, 1, rec.level
    validate_against_appendixA(name, out)
    return out


def genus_family(name: str, trunc) -> dict:
    """Members indexed by the divisors d of the level; member d is the genus
    of the class of g^gcd(d, order)."""
    rec = get_class(name)
    from sympy import divisors
    fam = {}
    for d in divisors(rec.level):
        member = class_of_power(rec, gcd(d, rec.order))
        fam[d] = genus(member.name, trunc)
    return fam


def _laurent_scalar_multiple(num: dict, base: dict):
    """Solve num == t * base for a scalar t; exact or ValueError."""
    num = {r: c for r, c in num.items() if c}
    if not num:
        return mpq(0)
    r0 = next(iter(base))
    t = num.get(r0, mpq(0)) / base[r0]
    if {r: c * t for r, c in base.items() if c * t} != num:
        raise ValueError("inconsistent genus data: division is not exact")
    return t


def recover_ttilde_coeffs(name: str, K: int) -> list:
    """First K+1 q-coefficients of the weight-2 form, recovered from the
    shipped q^0..q^2 genus rows by exact division."""
    rec = get_class(name)
    assert K <= 2, "shipped tables stop at q^2"
    chi = mpq(rec.trace, 12)
    rows = appendix_a()[name]["phi"]
    trunc = QQ(K + 1)
    A, B = phi_0_1(trunc), phi_m2_1(trunc)
    base = B.qcoef(QZERO)
    ts = []
    for n in range(K + 1):
        num = dict(rows.get(n, {}))
        for r, c in A.qcoef(QQ(n)).items():
            num[r] = num.get(r, mpq(0)) - chi * c
        for j, t in enumerate(ts):
            for r, c in B.qcoef(QQ(n - j)).items():
                num[r] = num.get(r, mpq(0)) - t * c
        ts.append(_laurent_scalar_multiple(num, base))
    return ts


def validate_against_appendixA(name: str, jac: JacobiSeries) -> None:
    rows = appendix_a()[name]["phi"]
    top = min(2, int(jac.trunc) - 1)
    for n in range(top + 1):
        got = {r: c for r, c in jac.qcoef(QQ(n)).items() if c}
        want = {QQ(r): c for r, c in rows.get(n, {}).items() if c}
        got = {QQ(r): c for r, c in got.items()}
        if got != want:
            raise ValueError(f"class {name} q^{n} row mismatch: "
                             f"got {got}, expected {want}")
