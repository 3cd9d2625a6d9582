"""Parametric nests: rational parameters -> coefficient a and generators (p, q, r, s).

Each family is checked against the identity oracle on import-independent
self-tests (see ``self_test``); a transcription that fails the residual or
recover_a check is a bug, not a data point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .identity import DegenerateError, IdentityError, Quartet, assemble, recover_a

F = Fraction
NINE_QUARTERS = F(9, 4)
THREE_HALVES = F(3, 2)


# --- closed forms -----------------------------------------------------------


def _a_A1(u, v):
    den = (u + v) * (u * v - 1)
    if den == 0:
        raise DegenerateError("A1: (u + v)(uv - 1) vanishes")
    return (u - v) * (u * v + 1) / den


def _pqrs_A1(u, v):
    return (u * v + 1, u - v, u * v - 1, u + v)


def _a_B1(u, v):
    den = (2 * v + 3) * u * u + 1
    if den == 0:
        raise DegenerateError("B1: (2v + 3)u^2 + 1 vanishes")
    return (u * u + v * v) / den


def _pqrs_B1(u, v):
    a = _a_B1(u, v)
    au2 = a * u * u
    return (u * (au2 + 1), au2 - v, u * (au2 - v), u * u + 1)


def _a_B2(u, v):
    den = u * v * v - 1
    if den == 0:
        raise DegenerateError("B2: uv^2 - 1 vanishes")
    return u * (u - 1) * (u * u + v * v) / den


def _pqrs_B2(u, v):
    # s = uv^2 - 1; the printed v^2 - 1 fails the identity
    return (u * (v * v + 1), v * (u * u - 1), v * (u + 1), u * v * v - 1)


def _a_A11(u, v=None):
    return u * u - 3


def _pqrs_A11(u, v=None):
    u2 = u * u
    return (u * (u2 - 3), 2 * (u2 - 1), u * (u2 - 1), F(2))


def _a_B11(u, v=None):
    return u * u - 1


def _pqrs_B11(u, v=None):
    u2 = u * u
    return (u * (u2 * u2 - 1), 2 * u2 - 1, u2 * u2 - u2 + 1, u * (2 * u2 - 1))


def _a_B12(u, v=None):
    return u * u + 2


def _pqrs_B12(u, v=None):
    u2 = u * u
    return (u * (u2 + 2), F(1), u2 + 1, u)


def _pqrs_B13(u, v=None):
    u2 = u * u
    return (u * (u2 + 1), 3 * (u2 + 2), u * (u2 + 4), F(3))


def _a_B14(u, v=None):
    return u * u + 3


def _pqrs_B14(u, v=None):
    u2 = u * u
    return (u * (u2 + 1) * (u2 + 3), F(1), u2 * u2 + 3 * u2 + 1, u)


def _a_B15(u, v=None):
    return u * u + NINE_QUARTERS


def _pqrs_B15(u, v=None):
    u2 = u * u
    w = u2 * u2 + NINE_QUARTERS * u2
    return (u * (w + 1), w + THREE_HALVES, u * (w + THREE_HALVES), u2 + 1)


# --- integer factor forms ----------------------------------------------------
#
# With u = i/j and v = k/l, |a| = prod(num) / prod(den) for the returned
# integer factor lists (not necessarily reduced). Works on numpy arrays too.


def _forms_A1(i, j, k, l):
    return [i * l - k * j, i * k + j * l], [i * l + k * j, i * k - j * l]


def _forms_B1(i, j, k, l):
    return [i * i * l * l + k * k * j * j], [l, (2 * k + 3 * l) * i * i + l * j * j]


def _forms_B2(i, j, k, l):
    return [i, i - j, i * i * l * l + k * k * j * j], [j, j, j, i * k * k - j * l * l]


def _forms_A11(i, j, k=None, l=None):
    return [i * i - 3 * j * j], [j, j]


def _forms_B11(i, j, k=None, l=None):
    return [i - j, i + j], [j, j]


def _forms_B12(i, j, k=None, l=None):
    return [i * i + 2 * j * j], [j, j]


def _forms_B14(i, j, k=None, l=None):
    return [i * i + 3 * j * j], [j, j]


def _forms_B15(i, j, k=None, l=None):
    return [4 * i * i + 9 * j * j], [2, 2, j, j]


@dataclass(frozen=True)
class Family:
    id: str
    tier: int
    nparams: int
    a_form: str
    restriction: str
    a_fn: Callable
    pqrs_fn: Callable
    forms_fn: Callable

    def describe(self) -> dict:
        return {
            "id": self.id,
            "tier": self.tier,
            "nparams": self.nparams,
            "a_form": self.a_form,
            "restriction": self.restriction,
        }


_FAMILIES = (
    Family("A1", 1, 2, "(u-v)(uv+1)/((u+v)(uv-1))", "y = ax", _a_A1, _pqrs_A1, _forms_A1),
    Family("B1", 1, 2, "(u^2+v^2)/((2v+3)u^2+1)", "rho = 1, t = u", _a_B1, _pqrs_B1, _forms_B1),
    Family("B2", 1, 2, "u(u-1)(u^2+v^2)/(uv^2-1)", "t = 1, rho = (u-1)^2/u", _a_B2, _pqrs_B2, _forms_B2),
    Family("A11", 2, 1, "u^2 - 3", "A1 with v = (u^2-2)/u", _a_A11, _pqrs_A11, _forms_A11),
    Family("B11", 2, 1, "u^2 - 1", "rho = -2/u^2, t = 1/u", _a_B11, _pqrs_B11, _forms_B11),
    Family("B12", 2, 1, "u^2 + 2", "rho = 1/u^2, t = 1/u", _a_B12, _pqrs_B12, _forms_B12),
    Family("B13", 2, 1, "u^2 + 2", "rho = (3u^2+4)/(u^2(u^2+2)), t = u/(u^2+2)", _a_B12, _pqrs_B13, _forms_B12),
    Family("B14", 2, 1, "u^2 + 3", "rho = 0, t = 1/u", _a_B14, _pqrs_B14, _forms_B14),
    Family("B15", 2, 1, "u^2 + 9/4", "rho = -3/2, t = u", _a_B15, _pqrs_B15, _forms_B15),
    Family("B21", 2, 1, "v^2 - 1", "B2 with u = v^2/(v^2-1)", _a_B11, _pqrs_B11, _forms_B11),
)

FAMILY_IDS = tuple(f.id for f in _FAMILIES)
_BY_ID = {f.id: f for f in _FAMILIES}


def families() -> list[Family]:
    return list(_FAMILIES)


def get_family(family) -> Family:
    if isinstance(family, Family):
        return family
    try:
        return _BY_ID[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILY_IDS)}") from None


def _params(fam: Family, u, v) -> tuple:
    if fam.nparams == 2:
        if v is None:
            raise ValueError(f"{fam.id} takes two parameters")
        return (F(u), F(v))
    if v is not None:
        raise ValueError(f"{fam.id} takes one parameter")
    return (F(u),)


@dataclass(frozen=True)
class NestPoint:
    family: str
    params: tuple
    a: Fraction
    p: Fraction
    q: Fraction
    r: Fraction
    s: Fraction

    @property
    def quartet(self) -> Quartet:
        return Quartet(self.a, *assemble(self.p, self.q, self.r, self.s))


def closed_form_a(family, u, v=None) -> Fraction:
    fam = get_family(family)
    return fam.a_fn(*_params(fam, u, v))


def _raw_point(fam: Family, params: tuple) -> NestPoint:
    a = fam.a_fn(*params)
    p, q, r, s = (F(x) for x in fam.pqrs_fn(*params))
    return NestPoint(fam.id, params, a, p, q, r, s)


def domain_ok(family, u, v=None) -> bool:
    fam = get_family(family)
    try:
        pt = _raw_point(fam, _params(fam, u, v))
    except (DegenerateError, ZeroDivisionError):
        return False
    if pt.a == 0:
        return False
    _, B, _, D = assemble(pt.p, pt.q, pt.r, pt.s)
    return B**4 != D**4


def evaluate(family, u, v=None, check: bool = True) -> NestPoint:
    fam = get_family(family)
    params = _params(fam, u, v)
    if not domain_ok(fam, *params):
        raise DegenerateError(f"{fam.id}{params} is outside the family's domain")
    pt = _raw_point(fam, params)
    if check:
        quartet = pt.quartet
        if quartet.residual() != 0 or recover_a(quartet.terms) != pt.a:
            raise IdentityError(f"{fam.id}{params}: residual {quartet.residual()}")
    return pt


def int_forms(family, i, j, k=None, l=None):
    return get_family(family).forms_fn(i, j, k, l)


def self_test(points: int = 50, max_height: int = 12, seed: int = 0) -> None:
    """Check every family at random admissible points; raise on the first failure."""
    import random

    rng = random.Random(seed)

    def rand_rat():
        return F(rng.randint(-max_height, max_height) or 1, rng.randint(1, max_height))

    for fam in _FAMILIES:
        done = 0
        while done < points:
            args = (rand_rat(), rand_rat()) if fam.nparams == 2 else (rand_rat(),)
            if not domain_ok(fam, *args):
                continue
            pt = evaluate(fam, *args)
            num, den = fam.forms_fn(*_ints(args))
            prod_n, prod_d = 1, 1
            for x in num:
                prod_n *= x
            for x in den:
                prod_d *= x
            if abs(F(prod_n, prod_d)) != abs(pt.a):
                raise IdentityError(f"{fam.id}{args}: integer forms disagree with closed form")
            done += 1


def _ints(args: tuple) -> tuple:
    out = []
    for x in args:
        out += [x.numerator, x.denominator]
    return tuple(out)
