"""Hecke operators on Jacobi forms, and the arithmetic lifts built from the
vector-valued forms: the additive (Maass) lift, the multiplicative
(product) lift, and the divisor/pullback bookkeeping shared by both."""
from functools import lru_cache
from math import gcd

from gmpy2 import mpq

from .cyclo import QQ, QZERO
from .series import JacobiSeries, jacobi_divide_exact


def hecke_Tminus(jac: JacobiSeries, m: int, D: int) -> JacobiSeries:
    """The index-raising Hecke operator T^(D)_-(m) on a Jacobi form of
    weight k and index t on Gamma_0(D):
        (phi | T_-(m))(n', r') = sum_{a | gcd(n',r',m), gcd(a,D)=1}
                                 a^(k-1) c(n' m / a^2, r' / a),
    landing in weight k and index m*t.  The input must be supported on
    integral (n, r)."""
    k = int(jac.weight)
    trunc = QQ(jac.trunc, m)
    out = {}
    for kq, row in jac.c.items():
        n = QQ(kq, jac.qden)
        assert n.denominator == 1, "non-integral q-support"
        n = int(n)
        for rz, v in row.items():
            r = QQ(rz, jac.zden)
            assert r.denominator == 1, "non-integral elliptic support"
            r = int(r)
            for a in range(1, m + 1):
                # source (n, r) feeds target (n a^2 / m, r a)
                if m % a or gcd(a, D) != 1 or (n * a * a) % m:
                    continue
                np = n * a * a // m
                if np % a:
                    continue
                if np >= trunc:
                    continue
                w = v * mpq(a) ** (k - 1)
                slot = out.setdefault(np * jac.qden, {})
                key = r * a * jac.zden
                s = slot.get(key, QZERO) + w
                if s:
                    slot[key] = s
                elif key in slot:
                    del slot[key]
    out = {kq: row for kq, row in out.items() if row}
    return JacobiSeries(jac.qden, jac.zden, out, trunc, weight=jac.weight,
                        index=jac.index * m, level=jac.level)


@lru_cache(maxsize=None)
def eta_jacobi(name: str, trunc) -> JacobiSeries:
    """eta_g * phi_{-2,1}: the distinguished Jacobi cusp form of weight
    k_g = (number of cycles)/2 - 2 + 2 and index 1 on Gamma_0(N_g)."""
    from .blocks import eta_quotient_series, phi_m2_1
    from .classes import eta_product, get_class, weight_kg
    rec = get_class(name)
    trunc = QQ(trunc)
    eta = eta_quotient_series(eta_product(rec), trunc)
    out = JacobiSeries.from_frac(eta) * phi_m2_1(trunc)
    out = out.truncate(trunc)
    out.weight = weight_kg(rec)
    out.index, out.level = 1, rec.level
    return out


def _eigen_correction(name: str, trunc) -> JacobiSeries:
    """The weight-k_g index-1 correction form appearing in the quotient
    construction.  It vanishes identically except for the two classes whose
    eta products fail to be Hecke eigenforms at 2."""
    from .blocks import EtaQuotient, eta_quotient_series, phi_m2_1
    from .tables import appendix_b
    trunc = QQ(trunc)
    extra = appendix_b()
    if name not in extra:
        return JacobiSeries.zero(trunc)
    raw = extra[name]
    eq = EtaQuotient(raw["factors"], pref=raw["pref"])
    out = JacobiSeries.from_frac(eta_quotient_series(eq, trunc))
    return (out * phi_m2_1(trunc)).truncate(trunc)


def eigen_genus(name: str, trunc) -> JacobiSeries:
    """The weight-0 index-1 form of a positive-weight class, built from the
    quotient identity
        phi_g = -(varphi_g | T_-^(N)(2)) / varphi_g - f_g,
    with varphi_g = eta_g phi_{-2,1}; valid independently of the shipped
    q-row tables, so it serves as an oracle for them."""
    from .classes import get_class
    trunc = QQ(trunc)
    rec = get_class(name)
    # the quotient loses one q-order to the q^1 valuation of varphi_g
    var = eta_jacobi(name, 2 * (trunc + 1))
    psi = hecke_Tminus(var, 2, rec.level)
    quot = jacobi_divide_exact(psi, var.truncate(trunc + 1))
    out = quot.scaled(mpq(-1)) + _eigen_correction(name, trunc).scaled(mpq(-1))
    out = out.truncate(trunc)
    out.weight, out.index, out.level = 0, 1, rec.level
    return out
