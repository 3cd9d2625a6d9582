"""Vectorized fourth-power-class keys for bulk sweeps.

The class of a positive rational modulo rational fourth powers is its vector
of prime exponents mod 4.  We map it homomorphically into (Z/4)^64: every
prime gets a pseudo-random lane vector and a rational's key is the sum of
exponent * vector.  Lanes are stored as two uint64 bit planes (lo, hi) with
lane value lo + 2*hi, so addition is three bitwise ops.

Equal classes always give equal keys, so filtering by key never loses a hit;
unequal classes collide with probability 4**-64, and every candidate is
re-checked exactly by ``exactnum.covers`` anyway.
"""

from __future__ import annotations

from math import isqrt
from typing import Optional

import numpy as np

from .exactnum import FactorizationUnavailable, factorize, fourth_free_signature

MASK64 = (1 << 64) - 1
_SEED_LO = 0x9E3779B97F4A7C15
_SEED_HI = 0xD1B54A32D192ED03

# SPF tables beyond this size cost more memory than they save.
SPF_CAP = 1 << 24

_spf: Optional[np.ndarray] = None


def _mix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def prime_key(p: int) -> tuple[int, int]:
    return _mix(p ^ _SEED_LO), _mix(p ^ _SEED_HI)


def _mix_np(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def prime_key_np(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = p.astype(np.uint64)
    with np.errstate(over="ignore"):
        return _mix_np(p ^ np.uint64(_SEED_LO)), _mix_np(p ^ np.uint64(_SEED_HI))


def add(x, y):
    xl, xh = x
    yl, yh = y
    return xl ^ yl, xh ^ yh ^ (xl & yl)


def neg(x):
    lo, hi = x
    return lo, hi ^ lo


def times(x, e: int):
    e %= 4
    out = (0, 0) if isinstance(x[0], int) else (np.zeros_like(x[0]), np.zeros_like(x[1]))
    for _ in range(e):
        out = add(out, x)
    return out


def signature_key(sig) -> tuple[int, int]:
    """Key of a ``fourth_free_signature`` result."""
    out = (0, 0)
    for p, e in sig:
        out = add(out, times(prime_key(p), e))
    return out


def rational_key(x) -> Optional[tuple[int, int]]:
    sig = fourth_free_signature(x)
    return None if sig is None else signature_key(sig)


def integer_key(n: int) -> Optional[tuple[int, int]]:
    try:
        fac = factorize(n)
    except FactorizationUnavailable:
        return None
    out = (0, 0)
    for p, e in fac.items():
        out = add(out, times(prime_key(p), e))
    return out


def spf_table(limit: int) -> np.ndarray:
    """Smallest-prime-factor table covering at least 0..limit (grown lazily)."""
    global _spf
    if _spf is not None and len(_spf) > limit:
        return _spf
    size = 1 << max(10, int(limit).bit_length())
    spf = np.zeros(size, dtype=np.int32)
    for p in range(2, isqrt(size - 1) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    idx = np.nonzero(spf == 0)[0]
    spf[idx] = idx
    _spf = spf
    return spf


def keys_of(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Keys of |values| (nonzero int64 array).  Returns (lo, hi, ok).

    ``ok`` is False where a value could not be factored; those entries must be
    handled by exact pairwise checks.
    """
    x = np.abs(np.asarray(values, dtype=np.int64)).ravel()
    lo = np.zeros(x.shape, dtype=np.uint64)
    hi = np.zeros(x.shape, dtype=np.uint64)
    ok = np.ones(x.shape, dtype=bool)
    small = x < SPF_CAP
    if small.any():
        spf = spf_table(int(x[small].max()))
        idx = np.nonzero(small & (x > 1))[0]
        rem = x[idx]
        while idx.size:
            p = spf[rem].astype(np.int64)
            kl, kh = prime_key_np(p)
            cl, ch = lo[idx], hi[idx]
            lo[idx], hi[idx] = add((cl, ch), (kl, kh))
            rem = rem // p
            live = rem > 1
            idx, rem = idx[live], rem[live]
    for pos in np.nonzero(~small)[0]:
        key = integer_key(int(x[pos]))
        if key is None:
            ok[pos] = False
        else:
            lo[pos], hi[pos] = np.uint64(key[0]), np.uint64(key[1])
    return lo, hi, ok


def ratio_keys(num_factors, den_factors, shape) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Key of prod(num)/prod(den) elementwise, plus masks (ok, nonzero).

    ``nonzero`` is False where any factor vanishes (coefficient zero or
    undefined); such entries are meaningless and must be skipped.
    """
    size = int(np.prod(shape))
    lo = np.zeros(size, dtype=np.uint64)
    hi = np.zeros(size, dtype=np.uint64)
    ok = np.ones(size, dtype=bool)
    nonzero = np.ones(size, dtype=bool)
    for sign, factors in ((1, num_factors), (-1, den_factors)):
        for f in factors:
            arr = np.broadcast_to(np.asarray(f, dtype=np.int64), shape).ravel()
            nz = arr != 0
            nonzero &= nz
            safe = np.where(nz, arr, 1)
            kl, kh, fok = keys_of(safe)
            ok &= fok
            key = (kl, kh) if sign > 0 else neg((kl, kh))
            lo, hi = add((lo, hi), key)
    return lo, hi, ok, nonzero
