"""Exact rationals, heights, fourth-power tests and coverage predicates.

Rationals are plain :class:`fractions.Fraction` values; they are always kept
reduced with a positive denominator, which is exactly the invariant the rest
of the package relies on.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import NamedTuple, Optional

import numpy as np

Rat = Fraction

DIRECT = "direct"
INDIRECT = "indirect"

DEFAULT_FACTOR_LIMIT = 10**6

_RAT_RE = re.compile(r"^-?\d+(/\d+)?$")


def reduce(num: int, den: int) -> Fraction:
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {num}/0")
    return Fraction(num, den)


def height(q: Fraction) -> int:
    """h(i/j) = max(|i|, |j|) of the reduced fraction."""
    q = Fraction(q)
    return max(abs(q.numerator), q.denominator)


def rat_str(q) -> str:
    return str(Fraction(q))


def parse_rat(text: str) -> Fraction:
    """Parse the exact "num/den" form (den omitted when 1)."""
    s = text.strip().replace("−", "-")
    if not _RAT_RE.match(s):
        raise ValueError(f"not an exact rational: {text!r}")
    return Fraction(s)


def int_fourth_root(n: int) -> Optional[int]:
    if n < 0:
        raise ValueError("fourth root of a negative integer")
    r = isqrt(isqrt(n))
    return r if r**4 == n else None


def as_fourth_power(q) -> Optional[Fraction]:
    """Return k > 0 with k**4 == q, or None when q is not a rational fourth power."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("as_fourth_power needs a positive rational")
    a = int_fourth_root(q.numerator)
    if a is None:
        return None
    b = int_fourth_root(q.denominator)
    if b is None:
        return None
    return Fraction(a, b)


class Coverage(NamedTuple):
    mode: Optional[str]
    k: Optional[Fraction]

    def __bool__(self) -> bool:
        return self.mode is not None


def _check_cover_args(n: int, alpha: Fraction) -> Fraction:
    if n <= 0:
        raise ValueError(f"target must be a positive integer, got {n}")
    alpha = Fraction(alpha)
    if alpha == 0:
        raise ValueError("coverage of a zero coefficient is undefined")
    return abs(alpha)


def coverage_modes(n: int, alpha) -> dict[str, Fraction]:
    """Every relation that holds between n and alpha, mapped to its scale k."""
    mag = _check_cover_args(n, alpha)
    out = {}
    k = as_fourth_power(n / mag)
    if k is not None:
        out[DIRECT] = k
    k = as_fourth_power(n * mag)
    if k is not None:
        out[INDIRECT] = k
    return out


def covers(n: int, alpha) -> Coverage:
    """Classify how the nest value alpha reaches the natural n.

    Direct when n/|alpha| = k^4, else Indirect when n*|alpha| = k^4; the sign
    of alpha is irrelevant since a and -a are interchangeable.
    """
    modes = coverage_modes(n, alpha)
    for mode in (DIRECT, INDIRECT):
        if mode in modes:
            return Coverage(mode, modes[mode])
    return Coverage(None, None)


@lru_cache(maxsize=8)
def primes_up_to(limit: int) -> tuple[int, ...]:
    if limit < 2:
        return ()
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(sieve)[0])


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= 3_317_044_064_679_887_385_961_981:
        raise ValueError("primality certificate unavailable above 3.3e24")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FactorizationUnavailable(ValueError):
    pass


def factorize(n: int, limit: int = DEFAULT_FACTOR_LIMIT) -> dict[int, int]:
    """Trial division by primes <= limit, plus one certified leftover.

    A leftover cofactor is accepted when it is prime, the square of a prime,
    or a perfect fourth power (reported under its fourth root's exponent 4,
    which is enough for every mod-4 use in this package).
    """
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor zero")
    out: dict[int, int] = {}
    for p in primes_up_to(limit):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    if n == 1:
        return out
    largest = primes_up_to(limit)[-1] if limit >= 2 else 1
    if n <= largest * largest or is_prime(n):
        out[n] = out.get(n, 0) + 1
        return out
    r = int_fourth_root(n)
    if r is not None:
        out[r] = out.get(r, 0) + 4
        return out
    s = isqrt(n)
    if s * s == n and is_prime(s):
        out[s] = out.get(s, 0) + 2
        return out
    raise FactorizationUnavailable(f"cofactor {n} not certified")


def has_odd_exp_prime_3mod4(n: int, bound: int = DEFAULT_FACTOR_LIMIT) -> bool:
    """True iff some prime p = 3 (mod 4) divides n to an odd power."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    if n > bound:
        raise ValueError(f"{n} exceeds the factorization bound {bound}")
    return any(p % 4 == 3 and e % 2 for p, e in factorize(n).items())


Signature = tuple  # sorted tuple of (prime, exponent mod 4), zeros dropped


def fourth_free_signature(x, factor_limit: int = DEFAULT_FACTOR_LIMIT) -> Optional[Signature]:
    """Fourth-power class of |x| as sorted (prime, exponent mod 4) pairs.

    Returns None when the numerator or denominator cannot be factored within
    ``factor_limit``; callers then fall back to :func:`covers`.
    """
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no fourth-power class")
    try:
        num = factorize(x.numerator, factor_limit)
        den = factorize(x.denominator, factor_limit)
    except FactorizationUnavailable:
        return None
    exps: dict[int, int] = {}
    for p, e in num.items():
        exps[p] = (exps.get(p, 0) + e) % 4
    for p, e in den.items():
        exps[p] = (exps.get(p, 0) - e) % 4
    return tuple(sorted((p, e) for p, e in exps.items() if e))


def invert_signature(sig: Signature) -> Signature:
    return tuple((p, (-e) % 4) for p, e in sig)


def fourth_free_kernel(n: int) -> int:
    """Smallest positive integer in the fourth-power class of the integer n."""
    out = 1
    for p, e in factorize(n).items():
        out *= p ** (e % 4)
    return out


def two_square_representable(n: int) -> bool:
    """Direct enumeration: is n = x^2 + y^2 for integers x, y?"""
    x = 0
    while x * x <= n:
        y2 = n - x * x
        if isqrt(y2) ** 2 == y2:
            return True
        x += 1
    return False


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out
