"""Exact Fourier expansions at arbitrary cusps.

Everything here is driven by one mechanism: to expand f(m*tau) under an
integral matrix A with det 1, factor the matrix (m*a, m*b; c, d) as
M * (alpha, beta; 0, delta) with M integral of det 1 (column Hermite form),
so that f(m*A*tau) = f(M w) with w = (alpha*tau + beta)/delta, and
c_M w + d_M = (c*tau + d)/delta.  The transformation of f under M is then
known exactly (eta multiplier system, quasimodularity of E2, or the vector
action on weight-1 Eisenstein series), and the expansion in w is a monomial
substitution with root-of-unity phases.
"""
from functools import lru_cache
from math import gcd

from gmpy2 import mpq

from .blocks import EtaQuotient, e2_series, eta_series
from .classes import get_class
from .cyclo import QQ, QZERO, cmul, croot, sqrt_int
from .genera import e1_series, ttilde_atoms
from .series import FracSeries, JacobiSeries


def sl2_normalize(a, b, c, d):
    """Flip the sign so that c > 0, or c = 0 and a = d = 1.  Returns the
    normalized matrix and the sign (+1 or -1) that was divided out."""
    assert a * d - b * c == 1
    if c < 0 or (c == 0 and d < 0):
        return (-a, -b, -c, -d), -1
    return (a, b, c, d), 1


def hermite_factor(m, A):
    """Factor (m*a, m*b; c, d) = M * (alpha, beta; 0, delta) with M in
    SL2(Z), alpha*delta = m, alpha > 0 and 0 <= beta < delta."""
    a, b, c, d = A
    assert m >= 1 and a * d - b * c == 1 and (c > 0 or (c == 0 and d == 1))
    alpha = gcd(m * a, c) if c else m * a
    assert alpha > 0 and m % alpha == 0
    delta = m // alpha
    aM, cM = m * a // alpha, c // alpha
    # extended gcd for the second column of M
    g, x, y = _xgcd(aM, cM)
    assert g == 1
    bM, dM = -y, x
    beta = dM * m * b - bM * d
    t = beta // delta
    beta -= t * delta
    bM += t * aM
    dM += t * cM
    assert aM * dM - bM * cM == 1
    assert (aM * alpha, aM * beta + bM * delta, cM * alpha,
            cM * beta + dM * delta) == (m * a, m * b, c, d)
    return (aM, bM, cM, dM), alpha, beta, delta


def _xgcd(a, b):
    old_r, r, old_s, s, old_t, t = a, b, 1, 0, 0, 1
    while r:
        q2 = old_r // r
        old_r, r = r, old_r - q2 * r
        old_s, s = s, old_s - q2 * s
        old_t, t = t, old_t - q2 * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


@lru_cache(maxsize=None)
def dedekind_sum(d, c) -> mpq:
    """s(d, c) = sum_{k=1}^{c-1} ((k/c)) ((kd/c)), exact."""
    assert c > 0
    d %= c
    total = mpq(0)
    for k in range(1, c):
        kd = (k * d) % c
        if kd == 0:
            continue
        total += (mpq(k, c) - mpq(1, 2)) * (mpq(kd, c) - mpq(1, 2))
    return total


def eta_multiplier(M):
    """The 24th root of unity eps(M) with
    eta(M tau) = eps(M) * (-i (c tau + d))^(1/2) * eta(tau), for c > 0."""
    a, b, c, d = M
    assert c > 0
    x = mpq(a + d, 12 * c) - dedekind_sum(d, c)
    assert (12 * x).denominator == 1, "eta multiplier is not a 24th root"
    return croot(x.numerator, 2 * x.denominator)


def substitute_upper(fs: FracSeries, alpha, beta, delta, trunc) -> FracSeries:
    """Expansion of f((alpha*tau + beta)/delta) given the expansion of f:
    q^x maps to e(x*beta/delta) * q^(x*alpha/delta)."""
    trunc = QQ(trunc)
    assert QQ(fs.trunc) * alpha / delta >= trunc, "source series too short"
    den = fs.den * delta
    out = {}
    for k, v in fs.c.items():
        e = QQ(k * alpha, fs.den * delta)
        if e >= trunc:
            continue
        out[k * alpha] = cmul(v, croot(k * beta, fs.den * delta))
    return FracSeries(den, out, trunc).normalized()


def eta_quotient_at_cusp(eq: EtaQuotient, A, trunc) -> FracSeries:
    """The weight sum(b_k)/2 slash of prod eta(k tau)^{b_k} under A.
    Requires an even number of eta factors (integral weight)."""
    trunc = QQ(trunc)
    total_b = sum(b for _, b in eq.factors)
    assert total_b % 2 == 0
    weight = total_b // 2
    A, sign = sl2_normalize(*A)
    pref = cmul(eq.pref, mpq(sign ** weight))
    # the per-factor automorphy halves assemble to (-i)^weight; the powers of
    # (c tau + d) cancel against the slash normalization.  Translations have
    # no automorphy factor at all.
    if A[2] > 0:
        pref = cmul(pref, croot(-weight, 4))
    decomp = [(k, b, hermite_factor(k, A)) for k, b in eq.factors]
    # inverting a factor of valuation v costs 2|b|v of truncation headroom
    margin = 1 + sum(-2 * b * mpq(h[1], 24 * h[3])
                     for _, b, h in decomp if b < 0)
    # round the working precision up to an integer so the cached factor
    # powers are shared between quotients with different inversion margins
    work = QQ(-int(-(trunc + margin) // 1))
    out = FracSeries.one(work)
    for k, b, (M, alpha, beta, delta) in decomp:
        aM, bM, cM, dM = M
        if cM == 0:
            assert aM == 1 and dM == 1
            pref = cmul(pref, croot(bM * b, 24))
        else:
            pref = cmul(pref, _cpow(eta_multiplier(M), b))
            if b % 2 == 0:
                pref = cmul(pref, mpq(1, delta) ** (b // 2))
            else:
                pref = cmul(pref, cmul(sqrt_int(delta),
                                       mpq(1, delta) ** ((b + 1) // 2)))
        out = out * _eta_factor_power(alpha, beta, delta, b, work)
    assert QQ(out.trunc) >= trunc, (out.trunc, trunc)
    return out.scaled(pref).truncate(trunc)


@lru_cache(maxsize=None)
def _eta_factor_power(alpha, beta, delta, b, work) -> FracSeries:
    """(eta((alpha*tau + beta)/delta))^b as a q-series, automorphy factors
    excluded (they are accumulated separately by the caller)."""
    src = eta_series(1, work * delta / alpha + mpq(1, 24))
    factor = substitute_upper(src, alpha, beta, delta, work)
    return factor ** b


def _cpow(x, e):
    if e < 0:
        from .cyclo import cinv
        x, e = cinv(x), -e
    out = mpq(1)
    for _ in range(e):
        out = cmul(out, x)
    return out


def e2n_at_cusp(level, scale, A, trunc) -> FracSeries:
    """Slash of (L*E2(L*s*tau) - E2(s*tau))/(L-1) in weight 2 under A.
    The non-holomorphic corrections of the two terms cancel exactly."""
    trunc = QQ(trunc)
    A, _ = sl2_normalize(*A)  # weight 2: sign^2 = 1
    a, b, c, d = A
    L = level
    terms = []
    for m, outer in ((L * scale, mpq(L, L - 1)), (scale, mpq(-1, L - 1))):
        M, alpha, beta, delta = hermite_factor(m, A)
        # E2(M w) = (cM w + dM)^2 E2(w) + (12/(2 pi i)) cM (cM w + dM);
        # the residual term is proportional to c/m and cancels in the sum
        terms.append((outer, mpq(c, m), alpha, beta, delta))
    assert terms[0][0] * terms[0][1] + terms[1][0] * terms[1][1] == 0
    out = FracSeries.zero(trunc)
    for outer, _, alpha, beta, delta in terms:
        src = e2_series(trunc * delta / alpha + 1)
        sub = substitute_upper(src, alpha, beta, delta, trunc)
        out = out + sub.scaled(outer / delta ** 2)
    return out


def _e1product_at_cusp(mod, scale, v1, v2, A, trunc) -> FracSeries:
    trunc = QQ(trunc)
    A, _ = sl2_normalize(*A)  # total weight 2
    M, alpha, beta, delta = hermite_factor(scale, A)
    aM, bM, cM, dM = M
    out = FracSeries.one(trunc)
    for cv, dv in (v1, v2):
        u1 = (cv * aM + dv * cM) % mod
        u2 = (cv * bM + dv * dM) % mod
        src = e1_series(mod, u1, u2, trunc * delta / alpha + QQ(1, mod))
        sub = substitute_upper(src, alpha, beta, delta, trunc)
        out = (out * sub).truncate(trunc)
    return out.scaled(mpq(1, delta ** 2))


def e1pair_at_cusp(atom, A, trunc) -> FracSeries:
    out = _e1product_at_cusp(atom["mod"], atom.get("scale", 1),
                             atom["v1"], atom["v2"], A, QQ(trunc))
    return out.scaled(mpq(atom["coeff"]))


def e1sum_at_cusp(atom, A, trunc) -> FracSeries:
    trunc = QQ(trunc)
    mod, scale = atom["mod"], atom.get("scale", 1)
    out = FracSeries.zero(trunc)
    for (v1, v2) in atom["pairs"]:
        out = out + _e1product_at_cusp(mod, scale, tuple(v1), tuple(v2),
                                       A, trunc)
    return out.scaled(mpq(atom["coeff"]))


def _freeze(x):
    if isinstance(x, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in x.items()))
    if isinstance(x, (list, tuple)):
        return tuple(_freeze(v) for v in x)
    return x


_atom_cache = {}


def atom_at_cusp(atom, A, trunc) -> FracSeries:
    key = (_freeze(atom), tuple(A), QQ(trunc))
    hit = _atom_cache.get(key)
    if hit is None:
        hit = _atom_cache[key] = _atom_at_cusp(atom, A, trunc)
    return hit


def _atom_at_cusp(atom, A, trunc) -> FracSeries:
    kind = atom["type"]
    if kind == "eta":
        eq = EtaQuotient(tuple(map(tuple, atom["factors"])),
                         pref=mpq(atom["coeff"]))
        return eta_quotient_at_cusp(eq, A, trunc)
    if kind == "e2n":
        return e2n_at_cusp(atom["level"], atom.get("scale", 1), A,
                           trunc).scaled(mpq(atom["coeff"]))
    if kind == "e1pair":
        return e1pair_at_cusp(atom, A, trunc)
    if kind == "e1sum":
        return e1sum_at_cusp(atom, A, trunc)
    raise ValueError(f"unknown atom type {kind}")


def ttilde_at_cusp(name: str, A, trunc) -> FracSeries:
    trunc = QQ(trunc)
    rec = get_class(name)
    out = FracSeries.zero(trunc)
    for atom in ttilde_atoms(rec):
        out = out + atom_at_cusp(atom, A, trunc)
    return out


def genus_at_cusp(name: str, A, trunc) -> JacobiSeries:
    """phi|_{0,1} A: only the weight-2 part transforms nontrivially since the
    two index-1 generators are invariant under the full modular group."""
    from .blocks import phi_0_1, phi_m2_1
    trunc = QQ(trunc)
    rec = get_class(name)
    out = phi_0_1(trunc).scaled(mpq(rec.trace, 12))
    tt = ttilde_at_cusp(name, A, trunc)
    out = out + JacobiSeries.from_frac(tt) * phi_m2_1(trunc)
    out = out.truncate(trunc)
    out.weight, out.index = 0, 1
    return out
