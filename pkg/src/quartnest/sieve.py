"""Mod-8 parity sieve and targeted shifted-square searches u^2 + c X^4 = a Y^4."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, isqrt
from typing import Optional

import numpy as np

from .exactnum import as_fourth_power, covers, has_odd_exp_prime_3mod4
from .identity import DegenerateError
from .nests import domain_ok, evaluate
from .sweep import CoverageRecord, WitnessRejected, make_record

log = logging.getLogger(__name__)

SHIFTS = (Fraction(-3), Fraction(-1), Fraction(2), Fraction(3), Fraction(9, 4))
EXPERIMENTAL_SHIFTS = (Fraction(-9, 4),)

# families whose coefficient is u^2 + c, in preference order
SHIFT_FAMILIES = {
    Fraction(-3): ("A11",),
    Fraction(-1): ("B11", "B21"),
    Fraction(2): ("B12", "B13"),
    Fraction(3): ("B14",),
    Fraction(9, 4): ("B15",),
}

PARITIES = ("even", "odd")


def _cleared(a: int, c: Fraction) -> tuple[int, int, int]:
    """Integer form U^2 + C X^4 = A Y^4 with U = d*u, d^2 the denominator of c."""
    c = Fraction(c)
    d = isqrt(c.denominator)
    if d * d != c.denominator:
        raise ValueError(f"shift {c} needs a square denominator")
    return d, c.numerator, a * c.denominator


@dataclass(frozen=True)
class SieveRow:
    a: int
    c: Fraction
    u: str
    X: str
    Y: str
    lhs: tuple
    rhs: tuple
    matched: tuple

    def cells(self) -> list[str]:
        return [str(self.a), str(self.c), self.u, self.X, self.Y, ",".join(map(str, self.lhs)),
                ",".join(map(str, self.rhs)), " ".join(f"({r},{r})" for r in self.matched)]


def parity_table(a: int, c, modulus: int = 8) -> list[SieveRow]:
    """Parity combinations of (u, X, Y) whose lhs and rhs residue sets meet mod 8.

    Combinations with X, Y both even or u, X both even are reducible and skipped.
    For c = 9/4 the cleared form (2u)^2 + 9 X^4 = 4 a Y^4 is used, with u
    standing for 2u.
    """
    c = Fraction(c)
    _, C, A = _cleared(a, c)
    rows = []
    for pu in (1, 0):
        for px in (1, 0):
            for py in (1, 0):
                if (px == 0 and py == 0) or (pu == 0 and px == 0):
                    continue
                us = range(pu, 2 * modulus, 2)
                xs = range(px, 2 * modulus, 2)
                ys = range(py, 2 * modulus, 2)
                lhs = sorted({(u * u + C * x**4) % modulus for u in us for x in xs})
                rhs = sorted({(A * y**4) % modulus for y in ys})
                matched = tuple(sorted(set(lhs) & set(rhs)))
                if matched:
                    rows.append(SieveRow(a, c, PARITIES[pu], PARITIES[px], PARITIES[py], tuple(lhs), tuple(rhs), matched))
    return rows


@dataclass(frozen=True)
class TargetedQuery:
    a: int
    c: Fraction
    xmax: int = 20000
    experimental: bool = False

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if self.a == 0:
            raise ValueError("a must be nonzero")
        if self.xmax < 1:
            raise ValueError("xmax must be at least 1")
        allowed = SHIFTS + (EXPERIMENTAL_SHIFTS if self.experimental else ())
        if self.c not in allowed:
            raise ValueError(f"shift {self.c} not supported" + ("" if self.experimental else " (see --experimental-c)"))

    @property
    def ratio_bound(self) -> float:
        """r = |a/c|^(1/4), a real cap on Y/X."""
        return abs(self.a / float(self.c)) ** 0.25


@dataclass
class Hit:
    u: int
    X: int
    Y: int
    uhat: Fraction
    record: Optional[CoverageRecord] = None
    parities: tuple = field(default=())

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.u, self.X, self.Y)


# residue prefilters: squares mod m
_FILTER_MODS = (64, 63, 65, 11, 17, 19, 23, 29, 31, 37, 41, 43, 47)
_SQUARES = {m: np.isin(np.arange(m), np.arange(m) ** 2 % m) for m in _FILTER_MODS}


def _square_candidates(A: int, C: int, X: int, ys: np.ndarray) -> np.ndarray:
    keep = np.ones(ys.shape, dtype=bool)
    for m in _FILTER_MODS:
        y = ys % m
        t = ((A % m) * (y**4 % m) - (C % m) * (X**4 % m)) % m
        keep &= _SQUARES[m][t]
    return ys[keep]


def shift_exclusion(n: int, c) -> bool:
    """True when the u^2 + 9/4 search for n can be skipped outright."""
    return Fraction(c) == Fraction(9, 4) and has_odd_exp_prime_3mod4(abs(n))


def targeted(query: TargetedQuery) -> list[Hit]:
    """All (u, X, Y), gcd(X, Y) = 1, with u^2 = a Y^4 - c X^4 (c cleared) and Y <= ceil(r X).

    For a shift with denominator d^2, u is the cleared variable and
    uhat = u / (d X^2), so odd u still gives a rational solution.
    """
    a, c = query.a, query.c
    if shift_exclusion(a, c):
        log.info("a=%d, c=%s: excluded by a prime 3 mod 4 to an odd power", a, c)
        return []
    d, C, A = _cleared(a, c)
    r = query.ratio_bound
    hits = []
    for X in range(1, query.xmax + 1):
        ymax = ceil(r * X)
        ys = np.arange(1, ymax + 1, dtype=np.int64)
        ys = ys[np.gcd(ys, X) == 1]
        for Y in _square_candidates(A, C, X, ys).tolist():
            T = A * Y**4 - C * X**4
            if T < 0:
                continue
            W = isqrt(T)
            if W * W != T:
                continue
            hits.append(Hit(W, X, Y, Fraction(W, d * X * X)))
        if X % 1000 == 0:
            log.info("a=%d c=%s: X=%d, %d hits", a, c, X, len(hits))
    for h in hits:
        h.parities = (PARITIES[h.u % 2], PARITIES[h.X % 2], PARITIES[h.Y % 2])
        h.record = _coverage_record(abs(a), c, h.uhat)
    return hits


def _coverage_record(n: int, c: Fraction, uhat: Fraction) -> Optional[CoverageRecord]:
    """Verified witness for n from the shifted-square family matching c, if any."""
    alpha = uhat * uhat + c
    if alpha == 0:
        return None
    verdict = covers(n, alpha)
    if not verdict:
        return None
    for fam in SHIFT_FAMILIES.get(c, ()):
        if not domain_ok(fam, uhat):
            continue
        try:
            return make_record(n, evaluate(fam, uhat), verdict.mode, verdict.k)
        except (WitnessRejected, DegenerateError):
            continue
    return None


def hit_identity_holds(query: TargetedQuery, hit: Hit) -> bool:
    """uhat^2 + c = a (Y/X)^4 exactly."""
    return hit.uhat**2 + query.c == query.a * Fraction(hit.Y, hit.X) ** 4


def conclusions_check(n: int, k, uhat) -> bool:
    """Does uhat satisfy uhat^2 = n k^4 + 9/4 exactly (a u^2 - 9/4 representation)?"""
    value = n * Fraction(k) ** 4 + Fraction(9, 4)
    root = as_fourth_power(value * value)
    return root is not None and root == abs(Fraction(uhat))
