"""Loaders for the shipped reference tables.

Principal parts are returned as dicts keyed by discriminant-group components
(x1, b, x2) with x1, x2 in Z/N and b in {0, 1}, standing for the element
(x1/N, b/2, x2/N).  Each value is a dict {exponent: coefficient} with
exponents <= 0 (rationals).  Genus rows are returned as dicts
{q_order: {zeta_power: coefficient}}.
"""
from functools import lru_cache
from importlib import resources
from math import gcd

import tomli
from gmpy2 import mpq

from .classes import get_class


def _load(name: str) -> dict:
    with resources.files("m24bp.data").joinpath(name).open("rb") as fh:
        return tomli.load(fh)["classes"]


def _phi_rows(raw: dict) -> dict:
    rows = {}
    for key, pairs in raw.items():
        n = int(key[1:])
        row = {}
        for r, c in pairs:
            row[r] = mpq(c)
            if r > 0:
                row[-r] = mpq(c)
        rows[n] = row
    return rows


def _row_components(row: dict, level: int):
    """All (x1, b, x2) components of one table row."""
    kind = row["type"]
    if kind == "single":
        x1, b, x2 = row["entry"]
        return [(x1 % level, b % 2, x2 % level)]
    if kind == "pairs":
        mod = row["mod"]
        assert level % mod == 0
        scale, targets = level // mod, set(row["products"])
        return [
            ((a * scale) % level, 1, (c * scale) % level)
            for a in range(mod)
            for c in range(mod)
            if gcd(gcd(a, c), mod) == 1 and (a * c) % mod in targets
        ]
    assert kind in ("units", "all")
    mod = row["mod"]
    values = [a for a in range(mod) if kind == "all" or gcd(a, mod) == 1]
    comps = []
    for a in values:
        entry = []
        for num, den, power in (row["e1"], row["e2"]):
            assert level % den == 0
            u = a if power == 1 else pow(a, -1, mod)
            entry.append((num * u % den) * (level // den) % level)
        comps.append((entry[0], 1, entry[1]))
    assert len(set(comps)) == len(comps)
    return comps


def _principal_part(rows: list, level: int) -> dict:
    table = {}
    for row in rows:
        coeff, exp = mpq(row["coeff"]), mpq(row["exp"])
        assert exp <= 0
        for comp in _row_components(row, level):
            slot = table.setdefault(comp, {})
            slot[exp] = slot.get(exp, mpq(0)) + coeff
    return {
        comp: {e: c for e, c in slot.items() if c}
        for comp, slot in table.items()
        if any(slot.values())
    }


@lru_cache(maxsize=None)
def appendix_a() -> dict:
    out = {}
    for name, raw in _load("appendix_a.toml").items():
        level = get_class(name).level
        out[name] = {
            "phi": _phi_rows(raw["phi"]),
            "pp": _principal_part(raw["pp"], level),
        }
    return out


@lru_cache(maxsize=None)
def appendix_b() -> dict:
    out = {}
    for name, raw in _load("appendix_b.toml").items():
        level = get_class(name).level
        out[name] = {
            "pref": mpq(raw["pref"]),
            "factors": tuple(map(tuple, raw["factors"])),
            "phi": _phi_rows(raw["phi"]),
            "pp": _principal_part(raw["pp"], level),
        }
    return out
