"""The quartic identity A^4 + a B^4 = C^4 + a D^4 and its transforms.

Everything here is exact: inputs are coerced to Fraction and every function
is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .exactnum import as_fourth_power, lcm


class DegenerateError(ValueError):
    """A formula hit a vanishing denominator or an otherwise empty case."""


class IdentityError(AssertionError):
    """A supposedly verified quartet failed the residual check."""


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Quartet:
    a: Fraction
    A: Fraction
    B: Fraction
    C: Fraction
    D: Fraction

    def __post_init__(self):
        for name in ("a", "A", "B", "C", "D"):
            object.__setattr__(self, name, _q(getattr(self, name)))

    @property
    def terms(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.A, self.B, self.C, self.D)

    def residual(self) -> Fraction:
        return residual(self.a, self.terms)

    def is_verified(self) -> bool:
        return self.residual() == 0

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.terms)


@dataclass(frozen=True)
class FormulationAPoint:
    a: Fraction
    x: Fraction
    y: Fraction
    t: Fraction

    def valid(self) -> bool:
        try:
            return check_req_A(self.a, self.x, self.y, self.t)
        except DegenerateError:
            return False


@dataclass(frozen=True)
class FormulationBPoint:
    a: Fraction
    rho: Fraction
    t: Fraction
    omega: Fraction

    def valid(self) -> bool:
        return check_req_B(self.a, self.rho, self.t, self.omega)


def assemble(p, q, r, s) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """(A, B, C, D) = (p + q, r - s, p - q, r + s)."""
    p, q, r, s = map(_q, (p, q, r, s))
    return (p + q, r - s, p - q, r + s)


def residual(a, quartet) -> Fraction:
    A, B, C, D = map(_q, quartet)
    a = _q(a)
    return A**4 + a * B**4 - C**4 - a * D**4


def recover_a(quartet) -> Fraction:
    A, B, C, D = map(_q, quartet)
    den = D**4 - B**4
    if den == 0:
        raise DegenerateError("D^4 = B^4: coefficient is undetermined")
    return (A**4 - C**4) / den


def is_trivial(a, quartet) -> bool:
    """Identically satisfied quartets: B^4 = D^4, equal sides, or a swap.

    The swap case covers every coefficient a = m^4, where {|A|, m|B|} =
    {|C|, m|D|} makes both sides the same sum; a = 1 is the familiar
    instance.  For a = -m^4 the roles of B and D trade places.  The test is
    unchanged by scale, invert and negate.
    """
    A, B, C, D = (abs(_q(x)) for x in quartet)
    if B == D:
        return True
    if (A, B) == (C, D):
        return True
    a = _q(a)
    if a == 0:
        return False
    m = as_fourth_power(abs(a))
    if m is None:
        return False
    if a < 0:
        B, D = D, B
    return sorted((A, m * B)) == sorted((C, m * D))


def scale(sol: Quartet, k) -> Quartet:
    """Rescale the coefficient by k^4: (a k^4, kA, B, kC, D)."""
    k = _q(k)
    if k == 0:
        raise DegenerateError("scale factor must be nonzero")
    return Quartet(sol.a * k**4, k * sol.A, sol.B, k * sol.C, sol.D)


def invert(sol: Quartet) -> Quartet:
    """(1/a, B, A, D, C); an involution."""
    if sol.a == 0:
        raise DegenerateError("cannot invert a zero coefficient")
    return Quartet(1 / sol.a, sol.B, sol.A, sol.D, sol.C)


def negate(sol: Quartet) -> Quartet:
    """(-a, A, D, C, B); swaps which side carries B."""
    return Quartet(-sol.a, sol.A, sol.D, sol.C, sol.B)


def integerize(sol: Quartet) -> Quartet:
    terms = sol.terms
    m = lcm(*(x.denominator for x in terms))
    ints = [int(x * m) for x in terms]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return Quartet(sol.a, *ints)


def check_req_A(a, x, y, t) -> bool:
    """(a x^3 - y) / (y^3 - a x) == t^2."""
    a, x, y, t = map(_q, (a, x, y, t))
    den = y**3 - a * x
    if den == 0:
        raise DegenerateError("y^3 - a x vanishes")
    return (a * x**3 - y) / den == t * t


def solution_from_A(a, x, y, t, q=1) -> Quartet:
    a, x, y, t, q = map(_q, (a, x, y, t, q))
    if q == 0:
        raise DegenerateError("q must be nonzero")
    if not check_req_A(a, x, y, t):
        raise ValueError("point does not satisfy requirement (A)")
    r = q * t
    s = q * x
    p = r * y
    sol = Quartet(a, *assemble(p, q, r, s))
    if sol.residual() != 0:
        raise IdentityError(f"residual {sol.residual()} from {(a, x, y, t, q)}")
    return sol


def check_req_B(a, rho, t, omega) -> bool:
    """a^2 rho^3 t^4 + (3 a rho^2 - 1) t^2 + a rho^3 == omega^2."""
    a, rho, t, omega = map(_q, (a, rho, t, omega))
    lhs = a * a * rho**3 * t**4 + (3 * a * rho * rho - 1) * t * t + a * rho**3
    return lhs == omega * omega


def xy_from_B(a, rho, t, omega) -> tuple[Fraction, Fraction]:
    a, rho, t, omega = map(_q, (a, rho, t, omega))
    if omega == 0:
        raise DegenerateError("omega must be nonzero")
    return (t * t + rho) / omega, (a * rho * t * t + 1) / omega


def linearized_rho(a, x, y) -> Fraction:
    """rho = (x y + 1) / (a x^2 + y^2)."""
    a, x, y = map(_q, (a, x, y))
    den = a * x * x + y * y
    if den == 0:
        raise DegenerateError("a x^2 + y^2 vanishes")
    return (x * y + 1) / den
