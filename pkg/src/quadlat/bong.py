"""Good BONGs over Z_2: validity, the alpha invariants, truncated-defect
brackets, the A_i minima, and certified construction from a Gram matrix.

All half-integer quantities are carried internally as doubled integers
(INFINITY as a float sentinel) so comparisons stay exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import inf as INFINITY

from ._embed import embedding_search
from .padic import hasse_invariant, ord_p, square_class
from .qspace import QSpace, space_from_diagonal
from .zplattice import (
    DIAG,
    EVEN0,
    EVEN2,
    JordanBlock,
    JordanSplitting,
    LocalLattice,
    blocks_to_gram,
    blocks_value_counts,
    diagonal_of_space,
    from_gram,
    jordan_split,
    merged_profile,
    value_counts,
)

E = 1  # ord_2(2)

# doubled defect order of a 2-adic square class (parity, unit)
_D2_UNIT = {1: INFINITY, 3: 2, 5: 4, 7: 2}


def _d2(parity: int, unit: int):
    return 0 if parity % 2 else _D2_UNIT[unit]


class BongSearchError(Exception):
    """Bounded certified search failed to produce a good BONG."""


@dataclass(frozen=True)
class Bong:
    """Good BONG as canonical diagonal values unit * 2^R."""

    units: tuple[int, ...]
    R: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.R)

    def values(self) -> list[Fraction]:
        return [u * Fraction(2) ** r for u, r in zip(self.units, self.R)]

    def alpha2(self) -> tuple:
        return _alpha2(self.units, self.R)

    def alpha(self) -> tuple:
        return tuple(a if a is INFINITY else Fraction(a, 2) for a in self.alpha2())

    def space(self) -> QSpace:
        return space_from_diagonal(self.values(), 2)

    def prefix_space(self, k: int) -> QSpace:
        return space_from_diagonal(self.values()[:k], 2)

    def prefix_class(self, k: int) -> tuple[int, int]:
        """Square class (parity, unit) of a_1 * ... * a_k."""
        par = sum(self.R[:k]) % 2
        un = 1
        for u in self.units[:k]:
            un = un * u % 8
        return par, un


def bong_validity(values) -> bool:
    """Conditions for a sequence of nonzero values to form a good BONG."""
    vals = [Fraction(v) for v in values]
    if not vals or any(v == 0 for v in vals):
        return False
    R = [ord_p(v, 2) for v in vals]
    n = len(vals)
    for i in range(n - 2):
        if R[i] > R[i + 2]:
            return False
    for i in range(n - 1):
        step = R[i + 1] - R[i]
        if step < -2 * E:
            return False
        d = rel_defect2(-vals[i] * vals[i + 1])
        if step + d < 0:
            return False
    return True


def rel_defect2(x):
    sc = square_class(x, 2)
    d2 = _d2(sc.parity, sc.unit)
    return d2 if d2 is INFINITY else d2 // 2


@lru_cache(maxsize=None)
def _alpha2(units, R):
    m = len(R)
    out = []
    for i in range(1, m):  # alpha_i for 1 <= i <= m-1, 1-based
        cands = [R[i] - R[i - 1] + 2 * E]
        for j in range(1, i + 1):
            d2 = _d2((R[j] + R[j - 1]) % 2, (-units[j - 1] * units[j]) % 8)
            if d2 is not INFINITY:
                cands.append(2 * (R[i] - R[j - 1]) + d2)
        for j in range(i, m):
            d2 = _d2((R[j] + R[j - 1]) % 2, (-units[j - 1] * units[j]) % 8)
            if d2 is not INFINITY:
                cands.append(2 * (R[j] - R[i - 1]) + d2)
        out.append(min(cands))
    return tuple(out)


def alpha_invariants(bong: Bong) -> tuple:
    """The alpha_i of a valid good BONG, as exact halves."""
    if not bong_validity(bong.values()):
        raise ValueError("not a valid good BONG")
    return bong.alpha()


@dataclass(frozen=True)
class DBracketContext:
    """A pair of BONGs (M side, N side) with cached alpha arrays."""

    M: Bong
    N: Bong

    def d_bracket2(self, cpar: int, cunit: int, i: int, j: int):
        m, n = self.M.rank, self.N.rank
        if not (0 <= i <= m and 0 <= j <= n):
            raise IndexError("prefix index out of range")
        pa, ua = self.M.prefix_class(i)
        pb, ub = self.N.prefix_class(j)
        cands = [_d2((cpar + pa + pb) % 2, cunit * ua * ub % 8)]
        if 0 < i < m:
            cands.append(self.M.alpha2()[i - 1])
        if 0 < j < n:
            cands.append(self.N.alpha2()[j - 1])
        return min(cands)

    def big_A2(self, i: int):
        R, S = self.M.R, self.N.R
        m, n = self.M.rank, self.N.rank
        if not (1 <= i <= min(m - 1, n)):
            raise IndexError("A_i index out of range")
        cands = [R[i] - S[i - 1] + 2 * E,
                 2 * (R[i] - S[i - 1]) + self.d_bracket2(1, 7, i + 1, i - 1)]
        if i not in (1, m - 1):
            cands.append(2 * (R[i] + R[i + 1] - S[i - 2] - S[i - 1])
                         + self.d_bracket2(0, 1, i + 2, i - 2))
        return min(cands)


def d_bracket(ctx: DBracketContext, c, i: int, j: int):
    """d[c * a_{1,i} * b_{1,j}] as an exact half-integer or INFINITY."""
    sc = square_class(c, 2)
    v = ctx.d_bracket2(sc.parity, sc.unit, i, j)
    return v if v is INFINITY else Fraction(v, 2)


def d_bracket_single(bong: Bong, c, i: int, j: int):
    """Single-lattice form d[c * a_{i,j}] = min(d(c a_{i,j}), alpha_{i-1}, alpha_j)."""
    ctx = DBracketContext(bong, bong)
    sc = square_class(c, 2)
    m = bong.rank
    pa, ua = bong.prefix_class(j)
    pb, ub = bong.prefix_class(i - 1)
    cands = [_d2((sc.parity + pa + pb) % 2, sc.unit * ua * ub % 8)]
    if 0 < i - 1 < m:
        cands.append(bong.alpha2()[i - 2])
    if 0 < j < m:
        cands.append(bong.alpha2()[j - 1])
    v = min(cands)
    return v if v is INFINITY else Fraction(v, 2)


def big_A(ctx: DBracketContext, i: int):
    v = ctx.big_A2(i)
    return v if v is INFINITY else Fraction(v, 2)


# --- certified construction --------------------------------------------------

_EPS = {1: 0, 3: 1, 5: 0, 7: 1}     # (u-1)/2 mod 2
_OMEGA = {1: 0, 3: 1, 5: 1, 7: 0}   # (u^2-1)/8 mod 2

_GOOD_BONG_CACHE: dict = {}


def _pairing(R) -> list[tuple[int, ...]]:
    """Greedy left-to-right grouping at the -2 steps; valid sequences never
    carry adjacent -2 steps."""
    groups = []
    i = 0
    while i < len(R):
        if i + 1 < len(R) and R[i + 1] - R[i] == -2 * E:
            groups.append((i, i + 1))
            i += 2
        else:
            groups.append((i,))
            i += 1
    return groups


def _realize_blocks(units, R) -> list[JordanBlock] | None:
    blocks = []
    for g in _pairing(R):
        if len(g) == 1:
            i = g[0]
            if R[i] < 0:
                return None  # single with negative order is never integral
            blocks.append(JordanBlock(R[i], DIAG, units[i]))
        else:
            i, j = g
            if R[i] < 1 - E:
                return None
            prod = units[i] * units[j] % 8
            # -a_i a_{i+1} is a square for the zero-diagonal plane, Delta else
            kind = EVEN0 if prod == 7 else EVEN2
            blocks.append(JordanBlock(R[i] - 1, kind, 1))
    blocks.sort(key=JordanBlock.sort_key)
    return blocks


def _hasse_of_candidate(units, R) -> int:
    t = 0
    m = len(units)
    for i in range(m):
        for j in range(i + 1, m):
            t += (_EPS[units[i]] * _EPS[units[j]]
                  + R[i] * _OMEGA[units[j]] + R[j] * _OMEGA[units[i]])
    return -1 if t % 2 else 1


def _r_sequences(m, vol, lo, hi):
    """Lexicographic stream of R-sequences: sum vol, window [lo, hi],
    steps in {-2, 0} or positive, R_i <= R_{i+2}."""
    seq: list[int] = []

    def dfs(i):
        if i == m:
            if sum(seq) == vol:
                yield tuple(seq)
            return
        remaining = m - i - 1
        for r in range(lo, hi + 1):
            if seq:
                step = r - seq[-1]
                if step < -2 or step == -1:
                    continue
            if i >= 2 and seq[i - 2] > r:
                continue
            # crude partial-sum feasibility: later terms fit in [r-2, hi]
            partial = sum(seq) + r
            if partial + remaining * max(lo, r - 2) > vol:
                continue
            if partial + remaining * hi < vol:
                continue
            seq.append(r)
            yield from dfs(i + 1)
            seq.pop()

    yield from dfs(0)


def _unit_tuples(R, det_unit, hasse):
    """Unit tuples in lex order with forced last unit and symbol filters."""
    m = len(R)
    pair_first = {g[0] for g in _pairing(R) if len(g) == 2}

    def ok_pair(i, units):
        # a -2 step needs d(-a_i a_{i+1}) >= 2: u_i u_{i+1} in {3, 7} mod 8
        if i - 1 in pair_first and units[i - 1] * units[i] % 8 not in (3, 7):
            return False
        return True

    if m == 1:
        cand = (det_unit,)
        yield cand
        return
    for head in itertools.product((1, 3, 5, 7), repeat=m - 1):
        prod = 1
        for u in head:
            prod = prod * u % 8
        last = det_unit * pow(prod, -1, 8) % 8
        units = head + (last,)
        good = True
        for i in range(1, m):
            if not ok_pair(i, units):
                good = False
                break
        if good and _hasse_of_candidate(units, R) == hasse:
            yield units


def good_bong(L: LocalLattice) -> Bong:
    """Certified good BONG of an integral Z_2-lattice of rank <= 8.

    Lexicographically smallest (R-sequence, then unit tuple) candidate whose
    realized lattice is isometric to L, the isometry witnessed by an
    embedding certificate.
    """
    if L.p != 2:
        raise ValueError("good BONGs are computed at p = 2")
    key = (L.p, L.gram)
    hit = _GOOD_BONG_CACHE.get(key)
    if hit is not None:
        return hit
    m = L.rank
    if m > 8:
        raise BongSearchError("rank cap 8 exceeded")
    js = jordan_split(L)
    scales = [b.r for b in js.blocks]
    lo, hi = min(scales) - 2 * E, max(scales) + 2 * E
    det = L.det()
    vol = int(ord_p(det, 2))
    det_unit = square_class(det, 2).unit
    target_hasse = hasse_invariant(diagonal_of_space(js), 2)
    target_profile = merged_profile(js)
    target_counts = value_counts(L)
    jordan_key = tuple(sorted(js.blocks, key=JordanBlock.sort_key))

    for R in _r_sequences(m, vol, lo, hi):
        for units in _unit_tuples(R, det_unit, target_hasse):
            blocks = _realize_blocks(units, R)
            if blocks is None:
                continue
            if merged_profile(JordanSplitting(2, tuple(blocks))) != target_profile:
                continue
            if blocks_value_counts(blocks) != target_counts:
                continue
            if tuple(blocks) != jordan_key:
                realized = from_gram(2, blocks_to_gram(blocks, 2))
                ok, _w = embedding_search(realized, L)
                if not ok:
                    continue
            found = Bong(units, R)
            if not bong_validity(found.values()):
                continue
            _GOOD_BONG_CACHE[key] = found
            return found
    raise BongSearchError("no certified good BONG within the search window")

