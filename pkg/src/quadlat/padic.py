"""Exact arithmetic in Q_p: valuations, square classes, quadratic defect,
Hilbert symbols and the distinguished 2-adic unit constants."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import inf as INFINITY

Rational = Fraction

# Fixed 2-adic constants (e = ord_2(2) = 1).  DELTA_2 = 1 - 4*RHO_2 has
# defect order 2e = 2; KAPPA_2 has defect order 2e - 1 = 1.
DELTA_2 = 5
RHO_2 = -1
KAPPA_2 = 3

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"not a prime: {p}")


def ord_p(x, p: int):
    """p-adic valuation of a rational; INFINITY for 0."""
    _check_prime(p)
    x = Fraction(x)
    if x == 0:
        return INFINITY
    v = 0
    num = x.numerator
    while num % p == 0:
        num //= p
        v += 1
    den = x.denominator
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(x, p: int) -> Fraction:
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no unit part")
    return x / Fraction(p) ** ord_p(x, p)


def _unit_mod(x: Fraction, p: int, modulus: int) -> int:
    # x must be a p-adic unit; reduces num * den^-1 modulo a power of p
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


def legendre(a: int, p: int) -> int:
    ls = pow(a % p, (p - 1) // 2, p)
    return -1 if ls == p - 1 else 1


_EPSILON_CACHE: dict[int, int] = {}


def epsilon(p: int) -> int:
    """Least positive quadratic non-residue mod an odd prime."""
    if p not in _EPSILON_CACHE:
        _check_prime(p)
        if p == 2:
            raise ValueError("epsilon is defined for odd primes only")
        a = 2
        while legendre(a, p) == 1:
            a += 1
        _EPSILON_CACHE[p] = a
    return _EPSILON_CACHE[p]


def delta_unit(p: int) -> int:
    """Canonical unit of defect order 2e: 5 at p = 2, epsilon(p) otherwise."""
    return DELTA_2 if p == 2 else epsilon(p)


@dataclass(frozen=True, order=True)
class SquareClass:
    """An element of Q_p^x / (Q_p^x)^2 as (valuation parity, canonical unit)."""

    p: int
    parity: int
    unit: int

    def value(self) -> Fraction:
        return Fraction(self.unit * self.p**self.parity)

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        if self.p != other.p:
            raise ValueError("square classes live over different primes")
        return square_class(self.value() * other.value(), self.p)

    def is_one(self) -> bool:
        return self.parity == 0 and self.unit == 1


def square_class(x, p: int) -> SquareClass:
    _check_prime(p)
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no square class")
    v = ord_p(x, p)
    u = x / Fraction(p) ** v
    if p == 2:
        unit = _unit_mod(u, 2, 8)
    else:
        unit = 1 if legendre(_unit_mod(u, p, p), p) == 1 else epsilon(p)
    return SquareClass(p, v % 2, unit)


def square_class_reps(p: int) -> list[SquareClass]:
    """Canonical representatives of Q_p^x/(Q_p^x)^2; 8 classes at p = 2, 4 else."""
    _check_prime(p)
    if p == 2:
        units = (1, 3, 5, 7)
    else:
        units = (1, epsilon(p))
    return [SquareClass(p, par, u) for par in (0, 1) for u in units]


def rel_quadratic_defect(c, p: int):
    """Order of the relative quadratic defect d(c); INFINITY iff c is a square."""
    _check_prime(p)
    c = Fraction(c)
    if c == 0:
        raise ValueError("defect of zero is undefined")
    k = ord_p(c, p)
    if k % 2:
        return 0
    u = c / Fraction(p) ** k
    if p != 2:
        return INFINITY if legendre(_unit_mod(u, p, p), p) == 1 else 0
    # The defect ideal of a unit is (u - x^2) for the x of largest valuation;
    # unit defects are <= 2e = 2, so residues mod 2^(2e+2) = 16 are exhaustive
    # and anything deeper certifies a square.
    best = max(ord_p(u - x * x, 2) for x in range(16))
    return INFINITY if best > 2 else best


def hilbert_symbol(a, b, p: int) -> int:
    """Hilbert symbol (a, b)_p: +1 iff ax^2 + by^2 = z^2 solves nontrivially."""
    _check_prime(p)
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    al, be = ord_p(a, p), ord_p(b, p)
    u, v = a / Fraction(p) ** al, b / Fraction(p) ** be
    if p != 2:
        lu = legendre(_unit_mod(u, p, p), p)
        lv = legendre(_unit_mod(v, p, p), p)
        s = 1
        if al % 2 and be % 2:
            s *= legendre(p - 1, p)
        if be % 2:
            s *= lu
        if al % 2:
            s *= lv
        return s
    uu = _unit_mod(u, 2, 8)
    vv = _unit_mod(v, 2, 8)
    eps_u, eps_v = (uu - 1) // 2 % 2, (vv - 1) // 2 % 2
    om_u, om_v = (uu * uu - 1) // 8 % 2, (vv * vv - 1) // 8 % 2
    t = eps_u * eps_v + al * om_v + be * om_u
    return -1 if t % 2 else 1


def hilbert_symbol_real(a, b) -> int:
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    return -1 if a < 0 and b < 0 else 1


def hasse_invariant(diag, p: int) -> int:
    """Product of hilbert_symbol(d_i, d_j, p) over i < j; +1 for dim <= 1."""
    entries = [Fraction(d) for d in diag]
    if any(d == 0 for d in entries):
        raise ValueError("diagonal entries must be nonzero")
    s = 1
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            s *= hilbert_symbol(entries[i], entries[j], p)
    return s


def c_sharp(c, p: int = 2) -> SquareClass:
    """The companion class c^# with (c^#, c)_2 = -1.

    Defined for c outside the trivial and DELTA_2 square classes: the DELTA_2
    class for odd-order c, and 1 + 4*RHO_2*r^-1*2^-d(c) for even order, where
    c * 2^-ord(c) = s^2 (1 + r*2^d(c)) with unit r.
    """
    if p != 2:
        raise ValueError("c_sharp is a 2-adic construction")
    sc = square_class(c, 2)
    if sc.parity == 1:
        return square_class(DELTA_2, 2)
    if sc.unit in (1, 5):
        raise ValueError("c_sharp undefined on the square and DELTA classes")
    # d(c) = 1 here; r is determined mod 4 by c/(1+2r) being a square
    for r in (1, 3):
        if (sc.unit * pow(1 + 2 * r, -1, 8)) % 8 == 1:
            return square_class(Fraction(4 * RHO_2, 2 * r) + 1, 2)
    raise AssertionError("unreachable: every unit class in {3,7} admits an r")
