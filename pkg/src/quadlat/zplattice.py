"""Integral Z_p-lattices as exact rational Gram matrices: validation,
Jordan decomposition at every prime, and the scale/norm/weight/volume
invariants."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import inf as INFINITY

import numpy as np

from .padic import (
    SquareClass,
    epsilon,
    legendre,
    ord_p,
    rel_quadratic_defect,
    square_class,
)

DIAG = "DIAG"
EVEN0 = "EVEN0"
EVEN2 = "EVEN2"

_KIND_ORDER = {EVEN0: 0, EVEN2: 1, DIAG: 2}


def _as_gram(gram) -> tuple[tuple[Fraction, ...], ...]:
    rows = [tuple(Fraction(x) for x in row) for row in gram]
    m = len(rows)
    if m == 0 or any(len(r) != m for r in rows):
        raise ValueError("gram matrix must be square and nonempty")
    return tuple(rows)


def gram_det(gram) -> Fraction:
    g = [list(row) for row in _as_gram(gram)]
    m = len(g)
    det = Fraction(1)
    for c in range(m):
        piv = next((r for r in range(c, m) if g[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            g[c], g[piv] = g[piv], g[c]
            det = -det
        det *= g[c][c]
        for r in range(c + 1, m):
            f = g[r][c] / g[c][c]
            for k in range(c, m):
                g[r][k] -= f * g[c][k]
    return det


@dataclass(frozen=True)
class LocalLattice:
    p: int
    gram: tuple[tuple[Fraction, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.gram)

    def det(self) -> Fraction:
        return gram_det(self.gram)


def from_gram(p: int, gram) -> LocalLattice:
    """Validated integral Z_p-lattice: n(L) within Z_p, nondegenerate."""
    g = _as_gram(gram)
    m = len(g)
    e = 1 if p == 2 else 0
    for i in range(m):
        for j in range(m):
            if g[i][j] != g[j][i]:
                raise ValueError("gram matrix must be symmetric")
            bound = 0 if i == j else -e
            if g[i][j] != 0 and ord_p(g[i][j], p) < bound:
                raise ValueError("gram matrix violates integrality")
    if gram_det(g) == 0:
        raise ValueError("gram matrix is degenerate")
    return LocalLattice(p, g)


@dataclass(frozen=True, order=True)
class JordanBlock:
    r: int
    kind: str
    unit: int  # canonical unit class for DIAG; 1 for the even kinds

    def sort_key(self):
        return (self.r, _KIND_ORDER[self.kind], self.unit)


@dataclass(frozen=True)
class JordanSplitting:
    p: int
    blocks: tuple[JordanBlock, ...]


def block_gram(block: JordanBlock, p: int) -> list[list[Fraction]]:
    q = Fraction(p) ** block.r
    if block.kind == DIAG:
        return [[block.unit * q]]
    if block.kind == EVEN0:
        return [[Fraction(0), q], [q, Fraction(0)]]
    # EVEN2 at r is 2^r * A(2, 2*rho) with rho = -1
    return [[2 * q, q], [q, -2 * q]]


def blocks_to_gram(blocks, p: int) -> list[list[Fraction]]:
    mats = [block_gram(b, p) for b in blocks]
    m = sum(len(x) for x in mats)
    g = [[Fraction(0)] * m for _ in range(m)]
    at = 0
    for mat in mats:
        k = len(mat)
        for i in range(k):
            for j in range(k):
                g[at + i][at + j] = mat[i][j]
        at += k
    return g


def _canonical_unit(x: Fraction, p: int) -> int:
    sc = square_class(x, p)
    return sc.unit


def jordan_split(L: LocalLattice) -> JordanSplitting:
    """Orthogonal splitting into rank-1 and (at p = 2) binary even blocks."""
    p = L.p
    g = [list(row) for row in L.gram]
    active = list(range(L.rank))
    blocks: list[JordanBlock] = []

    def clear_against(idx_set, others):
        # subtract the B^-1-weighted combination of the pivot rows/cols
        k = len(idx_set)
        for t in others:
            rhs = [g[t][i] for i in idx_set]
            if k == 1:
                coef = [rhs[0] / g[idx_set[0]][idx_set[0]]]
            else:
                i0, i1 = idx_set
                a, b, c, d = g[i0][i0], g[i0][i1], g[i1][i0], g[i1][i1]
                det2 = a * d - b * c
                coef = [(d * rhs[0] - b * rhs[1]) / det2,
                        (-c * rhs[0] + a * rhs[1]) / det2]
            for w, i in zip(coef, idx_set):
                if w == 0:
                    continue
                for u in range(len(g)):
                    g[t][u] -= w * g[i][u]
                for u in range(len(g)):
                    g[u][t] -= w * g[u][i]

    while active:
        s = min(o for i in active for j in active if (o := ord_p(g[i][j], p)) is not INFINITY)
        diag_piv = next((i for i in active if ord_p(g[i][i], p) == s), None)
        if diag_piv is None and p != 2:
            # off-diagonal minimum: x_i -> x_i + x_j raises a diagonal to it
            i, j = next((i, j) for i in active for j in active
                        if i != j and ord_p(g[i][j], p) == s)
            for u in range(len(g)):
                g[i][u] += g[j][u]
            for u in range(len(g)):
                g[u][i] += g[u][j]
            diag_piv = i
        if diag_piv is not None:
            i = diag_piv
            blocks.append(JordanBlock(s, DIAG, _canonical_unit(g[i][i], p)))
            others = [t for t in active if t != i]
            clear_against([i], others)
            active = others
        else:
            i, j = next((i, j) for i in active for j in active
                        if i < j and ord_p(g[i][j], p) == s)
            det2 = g[i][i] * g[j][j] - g[i][j] * g[j][i]
            cls = square_class(-det2, 2)
            if cls.parity != 0 or cls.unit not in (1, 5):
                raise AssertionError("even binary block has -det in {1, Delta}")
            kind = EVEN0 if cls.unit == 1 else EVEN2
            blocks.append(JordanBlock(s, kind, 1))
            others = [t for t in active if t not in (i, j)]
            clear_against([i, j], others)
            active = others
    blocks.sort(key=JordanBlock.sort_key)
    return JordanSplitting(p, tuple(blocks))


def _block_rank(b: JordanBlock) -> int:
    return 1 if b.kind == DIAG else 2


def _block_norm_ord(b: JordanBlock) -> int:
    return b.r if b.kind == DIAG else b.r + 1


def merged_profile(js: JordanSplitting) -> tuple[tuple[int, int, int], ...]:
    """Per-scale (scale, rank, norm order) of the merged Jordan components."""
    per: dict[int, list[int]] = {}
    for b in js.blocks:
        rec = per.setdefault(b.r, [0, 10**9])
        rec[0] += _block_rank(b)
        rec[1] = min(rec[1], _block_norm_ord(b))
    return tuple((r, rec[0], rec[1]) for r, rec in sorted(per.items()))


@dataclass(frozen=True)
class Invariants:
    scale_ord: int
    norm_ord: int
    weight_ord: int
    vol_ord: int
    det_class: SquareClass


def fundamental_invariants(L: LocalLattice) -> Invariants:
    p = L.p
    e = 1 if p == 2 else 0
    m = L.rank
    scale = min(ord_p(L.gram[i][j], p) for i in range(m) for j in range(m)
                if L.gram[i][j] != 0)
    diag_ords = [ord_p(L.gram[i][i], p) for i in range(m)]
    diag_min = min(diag_ords)
    norm = min(diag_min, scale + e) if diag_min is not INFINITY else scale + e
    det = L.det()
    vol = ord_p(det, p)
    if p != 2:
        weight = scale + 1  # pO_F * s convention; the weight is a dyadic notion
    else:
        weight = scale + e
        diags = [(b.r, b.unit) for b in jordan_split(L).blocks if b.kind == DIAG]
        if diags:
            base_r = min(r for r, _ in diags)
            for r0, u0 in diags:
                if r0 != base_r:
                    continue
                for r1, u1 in diags:
                    if (r1, u1) == (r0, u0):
                        continue
                    quot = Fraction(u0 * u1) * Fraction(2) ** (r1 - r0)
                    d = rel_quadratic_defect(quot, 2)
                    if d is not INFINITY:
                        weight = min(weight, r1 + d)
    return Invariants(scale, norm, weight, vol, square_class(det, p))


def rescale(L: LocalLattice, s) -> LocalLattice:
    s = Fraction(s)
    if s == 0:
        raise ValueError("scaling by zero")
    return from_gram(L.p, [[x * s for x in row] for row in L.gram])


# --- exact value-count invariants (2-adic) ----------------------------------
#
# The number of x in (Z/2^K)^m with Q(x) = t mod 2^K, collected over all t,
# is invariant under GL_m(Z_2)-congruence; it is computed blockwise by
# convolution and used as a cheap isometry filter.

_COUNT_K = 8
_BLOCK_COUNT_CACHE: dict[tuple, np.ndarray] = {}


def _cyclic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    full = np.convolve(a, b)
    out = full[: len(a)].copy()
    out[: len(full) - len(a)] += full[len(a):]
    return out


def _poly_counts(values) -> np.ndarray:
    mod = 1 << _COUNT_K
    out = np.zeros(mod, dtype=np.int64)
    for v in values:
        out[v % mod] += 1
    return out


def _block_counts(b: JordanBlock) -> np.ndarray:
    key = (b.r, b.kind, b.unit)
    if key not in _BLOCK_COUNT_CACHE:
        mod = 1 << _COUNT_K
        if b.kind == DIAG:
            vals = (b.unit * (1 << b.r) * x * x for x in range(mod))
        elif b.kind == EVEN0:
            # Q = 2^(r+1) x y
            vals = ((x * y) << (b.r + 1) for x in range(mod) for y in range(mod))
        else:
            # Q = 2^(r+1) (x^2 + x y - y^2)
            vals = ((x * x + x * y - y * y) << (b.r + 1)
                    for x in range(mod) for y in range(mod))
        _BLOCK_COUNT_CACHE[key] = _poly_counts(vals)
    return _BLOCK_COUNT_CACHE[key]


def blocks_value_counts(blocks) -> bytes:
    """Value-count fingerprint of an orthogonal sum of Jordan blocks."""
    acc = None
    for b in blocks:
        cnt = _block_counts(b)
        acc = cnt if acc is None else _cyclic_convolve(acc, cnt)
    assert acc is not None
    return acc.tobytes()


def value_counts(L: LocalLattice) -> bytes:
    if L.p != 2:
        raise ValueError("value counts are used for 2-adic lattices")
    return blocks_value_counts(jordan_split(L).blocks)


def diagonal_of_space(js: JordanSplitting) -> list[Fraction]:
    """A diagonalization of the ambient space read off the Jordan blocks."""
    out: list[Fraction] = []
    for b in js.blocks:
        q = Fraction(js.p) ** b.r
        if b.kind == DIAG:
            out.append(b.unit * q)
        elif b.kind == EVEN0:
            out.extend([2 * q, -2 * q])
        else:
            out.extend([2 * q, -10 * q])
    return out
