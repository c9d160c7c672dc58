"""Vector-valued lift of a family of index-1 Jacobi forms.

The target is the Weil representation attached to the discriminant group
(Z/N) x (Z/2) x (Z/N) of the lattice U(N) + U + A1.  Components are labelled
(x1, rbar, x2) for the element (x1/N, rbar/2, x2/N), and each carries a
q-expansion with exponents in rbar^2/4 + Z.

The lift of the family (phi_d)_{d|N} is
    (1/N) sum_{a,b,c mod N} e(-ac/N) sum_{n, rbar} c_{a,b}(n,r)
          q^{n - r^2/4} e_{(c/N, r/2, b/N)},
where c_{a,b} are the coefficients of phi_d | A_{a,b} with d = gcd(a,b,N)
and A_{a,b} (a,b)^T = (d,0)^T mod N.  Since every input is
Gamma_0-invariant, the result satisfies f_{(x1,rbar,x2)} =
f_{(x1 u, rbar, x2 u^{-1})} for units u, and only components whose third
slot is a divisor of N are computed; the rest follow from the symmetry.

All stored coefficients are rational; this is asserted during assembly.
"""
from functools import lru_cache
from math import gcd

from gmpy2 import mpq

from .blocks import phi_0_1, phi_m2_1
from .classes import class_of_power, get_class
from .cusps import ttilde_at_cusp, _xgcd
from .cyclo import QQ, QZERO, Cyclotomic, as_rational, cadd, cmul, croot
from .series import FracSeries, JacobiSeries
from .tables import appendix_a


def choose_A_ab(a, b, N):
    """Deterministic A in SL2(Z) with A (a,b)^T = (gcd(a,b,N), 0)^T mod N."""
    a %= N
    b %= N
    d = gcd(gcd(a, b), N) if (a, b) != (0, 0) else N
    # lift (a, b) within its residue class so that gcd(a', b') = d
    for total in range(0, 2 * N + 2):
        found = None
        for i in range(total + 1):
            ap, bp = a + i * N, b + (total - i) * N
            if (ap, bp) != (0, 0) and gcd(ap, bp) == d:
                found = (ap, bp)
                break
        if found:
            break
    else:
        raise ArithmeticError("no coprime lift found")
    ap, bp = found
    g, x, y = _xgcd(ap, bp)
    assert g == d
    A = (x, y, -bp // d, ap // d)
    assert A[0] * A[3] - A[1] * A[2] == 1
    assert (A[0] * a + A[1] * b - d) % N == 0
    assert (A[2] * a + A[3] * b) % N == 0
    return A, d


def matrix_with_bottom_row(c, d, N):
    """Deterministic M in SL2(Z) with bottom row congruent to (c, d) mod N."""
    c %= N
    d %= N
    for total in range(0, 2 * N + 2):
        for i in range(total + 1):
            cp, dp = c + i * N, d + (total - i) * N
            if gcd(cp, dp) == 1:
                g, x, y = _xgcd(cp, dp)
                return (y, -x, cp, dp)
    raise ArithmeticError("no coprime lift found")


def theta_decompose(jac: JacobiSeries) -> dict:
    """Split an index-1 Jacobi form into the two coefficient series
    h_rbar = sum_D a(D) q^(D/4), where a(D) = c(n, r) for D = 4n - r^2.
    Consistency across representatives is asserted."""
    assert jac.index == 1
    out = {0: {}, 1: {}}
    for k, row in jac.c.items():
        n = QQ(k, jac.qden)
        for rk, v in row.items():
            r = QQ(rk, jac.zden)
            assert r.denominator == 1, "non-integral elliptic exponent"
            r = int(r)
            D = 4 * n - r * r
            slot = out[r % 2]
            if D in slot:
                assert slot[D] == v, ("theta decomposition inconsistency",
                                      n, r)
            else:
                slot[D] = v
    series = {}
    for rbar in (0, 1):
        trunc = 4 * QQ(jac.trunc) - rbar * rbar
        den = 4 * jac.qden
        c = {}
        for D, v in out[rbar].items():
            if D < trunc:
                c[int(D * jac.qden)] = v
        series[rbar] = FracSeries(den, c, QQ(trunc, 4)).normalized()
    return series


class VVForm:
    """Sparse vector-valued q-expansion over the discriminant group."""

    def __init__(self, level, comps, trunc, full=False):
        self.level = level
        self.comps = comps  # {(x1, rbar, x2): {mpq exp: mpq coeff}}
        self.trunc = trunc
        self.full = full  # True when every component is stored explicitly

    def component(self, x1, rbar, x2):
        N = self.level
        x1 %= N
        x2 %= N
        if self.full:
            return self.comps.get((x1, rbar, x2), {})
        g = gcd(x2, N) if x2 else N
        u = _unit_lift(x2 // g if x2 else 1, N // g if x2 else 1, N)
        # x2 = (g mod N) * u, so f_{(x1,rbar,x2)} = f_{(x1 u, rbar, g)}
        return self.comps.get(((x1 * u) % N, rbar, g % N), {})

    def singular_components(self):
        """All components with a nonzero coefficient at negative exponent,
        expanded from the stored representatives."""
        N = self.level
        out = {}
        units = [u for u in range(1, N + 1) if gcd(u, N) == 1]
        for (x1, rbar, x2), slot in self.comps.items():
            sing = {e: v for e, v in slot.items() if e < 0 and v}
            if not sing:
                continue
            if self.full:
                out[(x1, rbar, x2)] = dict(sing)
                continue
            for u in units:
                uinv = pow(u, -1, N)
                comp = ((x1 * u) % N, rbar, (x2 * uinv) % N)
                if comp in out:
                    assert out[comp] == sing, ("symmetry violation", comp)
                else:
                    out[comp] = dict(sing)
        return out


@lru_cache(maxsize=None)
def _unit_lift(v, m, N):
    """A unit mod N congruent to v mod m (for v invertible mod m)."""
    assert N % m == 0 and gcd(v, m) == 1
    v %= m
    if v == 0:
        v = m  # only when m == 1
    for k in range(N // m + 1):
        u = v + k * m
        if gcd(u, N) == 1:
            return u % N
    raise ArithmeticError("no unit lift")


@lru_cache(maxsize=None)
def _indicator_dft(subset, N):
    """For S a subset of Z/N, the values T(c) = sum_{a in S} zeta_N^{-ac}
    for all c, returned as a list of exact cyclotomic numbers."""
    out = []
    for c in range(N):
        total = QZERO
        for a in subset:
            total = cadd(total, croot(-a * c, N))
        out.append(total)
    return out


def _slash_theta_series(name, trunc):
    """The two theta-coefficient series of phi_{0,1} and phi_{-2,1}."""
    A = theta_decompose(phi_0_1(trunc + 1))
    B = theta_decompose(phi_m2_1(trunc + 1))
    return A, B


def jmap(name: str, trunc) -> VVForm:
    """The vector-valued lift of the genus family of the class, with all
    component expansions computed below `trunc` (in the q-exponent of the
    lift)."""
    trunc = QQ(trunc)
    rec = get_class(name)
    N = rec.level
    from sympy import divisors
    Athe, Bthe = _slash_theta_series(name, trunc)
    h_trunc = trunc + QQ(1, 2)
    comps = {}
    for bslot in [d % N for d in divisors(N)]:
        groups = {}
        for a in range(N):
            A, d = choose_A_ab(a, bslot, N)
            member = class_of_power(rec, gcd(d, rec.order))
            h = ttilde_at_cusp(member.name, A, h_trunc).normalized()
            key = (member.name, h.den, h.trunc,
                   tuple(sorted(h.c.items(), key=lambda kv: kv[0])))
            groups.setdefault(key, [member.trace, h, []])[2].append(a)
        for chi, h, alist in groups.values():
            dft = _indicator_dft(tuple(alist), N)
            for rbar in (0, 1):
                S = (Athe[rbar].scaled(mpq(chi, 12))
                     + (h * Bthe[rbar])).truncate(trunc)
                for k, v in S.c.items():
                    e = QQ(k, S.den)
                    for c in range(N):
                        phased = cmul(v, dft[c])
                        slot = comps.setdefault((c, rbar, bslot), {})
                        slot[e] = cadd(slot.get(e, QZERO), phased)
    # divide by N and certify rationality
    final = {}
    for comp, slot in comps.items():
        red = {}
        for e, v in slot.items():
            v = cmul(v, mpq(1, N))
            if isinstance(v, Cyclotomic):
                r = as_rational(v)
                if r is None:
                    raise ArithmeticError(
                        f"irrational lift coefficient at {comp} q^{e}")
                v = r
            if v:
                red[e] = v
        final[comp] = red
    return VVForm(N, final, trunc)


def principal_part(F: VVForm) -> dict:
    """Negative-exponent coefficients on all components, plus the constant
    term of the zero component."""
    out = F.singular_components()
    const = F.component(0, 0, 0).get(QZERO, mpq(0))
    if const:
        slot = out.setdefault((0, 0, 0), {})
        slot[QZERO] = const
    return out


def verify_principal_part(name: str, F: VVForm) -> list:
    """Exact comparison against the shipped table; returns a list of
    discrepancy strings (empty means a perfect match)."""
    table = appendix_a()[name]["pp"]
    got = principal_part(F)
    issues = []
    keys = set(table) | set(got)
    for comp in sorted(keys):
        t = {QQ(e): v for e, v in table.get(comp, {}).items()}
        g = {QQ(e): v for e, v in got.get(comp, {}).items()}
        if t != g:
            issues.append(f"component {comp}: table {t} != computed {g}")
    return issues


def symmetry_check(F: VVForm) -> None:
    """Verify the unit symmetry on the stored representatives (stabilizer
    part) and consistency of the component accessor."""
    N = F.level
    for (x1, rbar, x2), slot in F.comps.items():
        g = gcd(x2, N) if x2 else N
        for u in range(1, N):
            if gcd(u, N) != 1 or (x2 * u) % N != x2 % N:
                continue
            other = F.comps.get(((x1 * pow(u, -1, N)) % N, rbar, x2))
            assert other == slot, ("unit symmetry failure", (x1, rbar, x2), u)


def jmap_theta_route(name: str, trunc) -> VVForm:
    """Lift of the single Jacobi form eta_g * phi_{-2,1} alone (all other
    family members zero), computed through the theta decomposition of
    phi_{-2,1}: the coefficient of e_{(c/N, rbar/2, b/N)} is
        (1/N) sum_{gcd(a,b,N)=1} e(-ac/N) (eta_g |_w A_{a,b}) f_rbar.
    Only the gcd = 1 part of the discriminant group is hit.  Individual
    slashes carry root-of-unity phases; rationality of the averaged
    coefficients is asserted."""
    from .classes import eta_product
    from .cusps import eta_quotient_at_cusp
    trunc = QQ(trunc)
    rec = get_class(name)
    N = rec.level
    B = theta_decompose(phi_m2_1(int(trunc) + 2))
    eq = eta_product(rec)
    comps = {}
    for b in range(N):
        for a in range(N):
            if gcd(gcd(a, b), N) != 1:
                continue
            A, d = choose_A_ab(a, b, N)
            lead = eta_quotient_at_cusp(eq, A, trunc + QQ(1, 2))
            for rbar in (0, 1):
                S = (lead * B[rbar]).truncate(trunc)
                for k, v in S.c.items():
                    e = QQ(k, S.den)
                    for c in range(N):
                        ph = cmul(v, croot(-a * c, N))
                        slot = comps.setdefault((c, rbar, b), {})
                        slot[e] = cadd(slot.get(e, QZERO), ph)
    final = {}
    for comp, slot in comps.items():
        red = {}
        for e, v in slot.items():
            v = cmul(v, mpq(1, N))
            if isinstance(v, Cyclotomic):
                r = as_rational(v)
                if r is None:
                    raise ArithmeticError(
                        f"irrational lift coefficient at {comp} q^{e}")
                v = r
            if v:
                red[e] = v
        if red:
            final[comp] = red
    return VVForm(N, final, trunc, full=True)
