"""Quadratic spaces over Q_p via the complete invariant (dim, det, hasse),
including the two-family classification W_nu^n(c) of all spaces."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .padic import (
    SquareClass,
    c_sharp,
    delta_unit,
    hasse_invariant,
    hilbert_symbol,
    square_class,
)


@dataclass(frozen=True)
class QSpace:
    p: int
    dim: int
    det: SquareClass
    hasse: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.hasse not in (1, -1):
            raise ValueError("hasse must be +-1")
        if self.dim == 1 and self.hasse != 1:
            raise ValueError("unary spaces have hasse +1")
        if self.dim == 2 and self.hasse == -1:
            if self.det == square_class(-1, self.p):
                raise ValueError("no binary space with det -1 and hasse -1")


@dataclass(frozen=True)
class SpaceLabel:
    n: int
    nu: int
    c: SquareClass

    def __post_init__(self):
        if self.n < 2 or self.nu not in (1, 2):
            raise ValueError("bad space label")
        if self.n == 2 and self.nu == 2 and self.c.is_one():
            raise ValueError("the label (n, c, nu) = (2, 1, 2) is undefined")


def space_from_diagonal(diag, p: int) -> QSpace:
    entries = [Fraction(d) for d in diag]
    if not entries or any(d == 0 for d in entries):
        raise ValueError("diagonal must be nonempty with nonzero entries")
    det = Fraction(1)
    for d in entries:
        det *= d
    return QSpace(p, len(entries), square_class(det, p), hasse_invariant(entries, p))


def is_isometric(V: QSpace, W: QSpace) -> bool:
    if V.p != W.p:
        raise ValueError("spaces over different primes")
    return V.dim == W.dim and V.det == W.det and V.hasse == W.hasse


def represents_space(V: QSpace, U: QSpace) -> bool:
    """True iff U embeds isometrically in V.

    Witt theory: U -> V iff the complement invariants (dim V - dim U,
    det V * det U, hasse V * hasse U * (det U, det W)) belong to a space.
    """
    if V.p != U.p:
        raise ValueError("spaces over different primes")
    k = V.dim - U.dim
    if k < 0:
        raise ValueError("cannot represent a larger space")
    if k == 0:
        return is_isometric(V, U)
    det_w = V.det * U.det
    hasse_w = V.hasse * U.hasse * hilbert_symbol(U.det.value(), det_w.value(), V.p)
    if k == 1:
        return hasse_w == 1
    if k == 2:
        return not (det_w == square_class(-1, V.p) and hasse_w == -1)
    return True


def w_diagonal(label: SpaceLabel, p: int) -> list[Fraction]:
    """Explicit diagonal form of W_nu^n(c), row by row of the classification."""
    n, nu, c = label.n, label.nu, label.c
    pi = Fraction(p)
    delta = Fraction(delta_unit(p))
    cv = c.value()
    plane = [Fraction(1), Fraction(-1)]

    def planes(k: int) -> list[Fraction]:
        return plane * k

    if nu == 1:
        if n % 2 == 0:
            return planes((n - 2) // 2) + [Fraction(1), -cv]
        return planes((n - 1) // 2) + [cv]
    if n % 2 == 0:
        if c.is_one():
            return planes((n - 4) // 2) + [Fraction(1), -delta, pi, -delta * pi]
        if c.parity == 0 and c.unit == delta_unit(p):
            return planes((n - 2) // 2) + [pi, -delta * pi]
        if c.parity == 0:
            sharp = c_sharp(cv, p).value()
            return planes((n - 2) // 2) + [sharp, -sharp * cv]
        return planes((n - 2) // 2) + [delta, -delta * cv]
    if c.parity == 0:
        return planes((n - 3) // 2) + [pi, -delta * pi, delta * cv]
    return planes((n - 3) // 2) + [Fraction(1), -delta, delta * cv]


def build_W(label: SpaceLabel, p: int) -> QSpace:
    if label.c.p != p:
        raise ValueError("label class and prime disagree")
    return space_from_diagonal(w_diagonal(label, p), p)


def classify_space(V: QSpace) -> SpaceLabel:
    """The unique (n, nu, c) with V isometric to W_nu^n(c)."""
    if V.dim < 2:
        raise ValueError("classification needs dim >= 2")
    c = V.det * square_class((-1) ** (V.dim // 2), V.p)
    for nu in (1, 2):
        if V.dim == 2 and nu == 2 and c.is_one():
            continue
        label = SpaceLabel(V.dim, nu, c)
        if is_isometric(V, build_W(label, V.p)):
            return label
    raise AssertionError("every space matches one family member")
