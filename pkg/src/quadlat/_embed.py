"""Digit-by-digit p-adic embedding search with Newton lifting certificates.

Solves T^t G_M T = G_N over Z_p by backtracking over the base-p digits of
the embedding columns.  A found solution is certified liftable via an
explicit right inverse of the derivative; exhausting the tree at any
precision refutes representability outright.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import inf as INFINITY

from .padic import ord_p
from .zplattice import LocalLattice


class IndeterminateRepresentation(Exception):
    """Precision cap hit while uncertified solutions are still alive."""


def _needs_doubling(L: LocalLattice) -> bool:
    return L.p == 2 and any(x.denominator % 2 == 0 for row in L.gram for x in row)


def _int_gram(L: LocalLattice, modulus: int, scale: int) -> list[list[int]]:
    # scale clears the half-integer entries at p = 2 when present
    out = []
    for row in L.gram:
        r = []
        for x in row:
            y = Fraction(x) * scale
            r.append(y.numerator * pow(y.denominator, -1, modulus) % modulus)
        out.append(r)
    return out


def precision_cap(N: LocalLattice, M: LocalLattice) -> int:
    """Depth at which an exhausted digit tree proves non-representation."""
    p = N.p
    volm = ord_p(M.det(), p)
    voln = ord_p(N.det(), p)
    shift = 0
    for L in (N, M):
        for row in L.gram:
            for x in row:
                if x != 0:
                    shift = min(shift, ord_p(x, p))
    e = 1 if p == 2 else 0
    return int(2 * (max(volm, 0) + max(voln, 0)) + 4 * e + 3 - 2 * shift)


def _vp(x: Fraction, p: int) -> int:
    v = ord_p(x, p)
    return 10**9 if v is INFINITY else int(v)


def _right_inverse_val(rows: list[list[Fraction]], p: int):
    """Largest denominator valuation over an explicit right inverse of the
    row matrix, or None when the rows are dependent."""
    ne = len(rows)
    nv = len(rows[0])
    mat = [list(r) + [Fraction(int(i == j)) for j in range(ne)]
           for i, r in enumerate(rows)]
    piv_cols: list[int] = []
    for r in range(ne):
        best = None
        for rr in range(r, ne):
            for c in range(nv):
                if c in piv_cols or mat[rr][c] == 0:
                    continue
                v = _vp(mat[rr][c], p)
                if best is None or v < best[2]:
                    best = (rr, c, v)
        if best is None:
            return None
        rr, c, _ = best
        mat[r], mat[rr] = mat[rr], mat[r]
        piv_cols.append(c)
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for r2 in range(ne):
            if r2 != r and mat[r2][c] != 0:
                f = mat[r2][c]
                mat[r2] = [a - f * b for a, b in zip(mat[r2], mat[r])]
    # solution of (rows) X = I supported on the pivot coordinates
    s = 0
    for r in range(ne):
        for j in range(ne):
            entry = mat[r][nv + j]
            if entry != 0:
                s = max(s, -_vp(entry, p) if _vp(entry, p) < 0 else 0)
    return s


def _cert_denominator_val(A: list[list[int]], T: list[list[int]], p: int):
    """Denominator valuation s of a right inverse of the derivative at T,
    or None when the derivative is not surjective; a residual zero mod p^P
    with P >= 2s + 1 then lifts by Newton iteration."""
    m = len(A)
    n = len(T[0])
    ta = [[sum(T[a][i] * A[a][b] for a in range(m)) for b in range(m)]
          for i in range(n)]
    rows = []
    for i in range(n):
        for j in range(i, n):
            row = []
            for a in range(m):
                for c in range(n):
                    val = 0
                    if c == j:
                        val += ta[i][a]
                    if c == i:
                        val += ta[j][a]
                    row.append(Fraction(val))
            rows.append(row)
    return _right_inverse_val(rows, p)


def _vint(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _digit_vectors(m: int, p: int, active=None):
    if active is None:
        active = range(m)
    vecs = [(0,) * m]
    for i in active:
        vecs = [v[:i] + (d,) + v[i + 1:] for v in vecs for d in range(p)]
    return vecs


def _solve_columns(A, BN, m, n, p, P, mods, unimodular):
    """Level-major DFS over the base-p digits of the embedding columns;
    yields matrices T (m x n, entries mod p^P) with T^t A T = BN to the
    working precision.

    Columns advance one digit at a time in lockstep so that the cross-column
    congruences prune from the lowest digit on.  With `unimodular` set
    (equal rank and volume, so any embedding is an isometry), the columns
    are forced linearly independent mod p.
    """
    bonus = 1 if p == 2 else 0
    cols = [[0] * m for _ in range(n)]
    ats = [[0] * m for _ in range(n)]  # A @ col, maintained incrementally
    # digits of coordinate i beyond P - ord(row_i(A)) cannot affect any
    # congruence; freeze them at zero
    depth = []
    for i in range(m):
        a = min((_vint(A[i][j], p) for j in range(m) if A[i][j]), default=0)
        depth.append(max(1, P - a))

    def indep_mod_p() -> bool:
        mat = [[cols[c][i] % p for i in range(m)] for c in range(n)]
        rank = 0
        for i in range(m):
            piv = next((r for r in range(rank, n) if mat[r][i]), None)
            if piv is None:
                continue
            mat[rank], mat[piv] = mat[piv], mat[rank]
            inv = pow(mat[rank][i], -1, p)
            for r in range(rank + 1, n):
                if mat[r][i]:
                    f = mat[r][i] * inv % p
                    mat[r] = [(a - f * b) % p for a, b in zip(mat[r], mat[rank])]
            rank += 1
        return rank == n

    def continuations(lvl, c):
        """Digit vectors to try at (lvl, c); for p = 2 and lvl >= 2 the
        congruences are linear in the digits, so solve over GF(2) instead
        of filtering all 2^m candidates."""
        if p != 2 or lvl < 2:
            return _digit_vectors(m, p)
        t, at = cols[c], ats[c]
        rows = []
        q = sum(t[i] * at[i] for i in range(m))
        r = BN[c][c] - q
        half = mods[lvl + 1]
        if r % half:
            return []  # cannot happen if the previous level was checked
        mask = 0
        for i in range(m):
            if at[i] & 1:
                mask |= 1 << i
        rows.append((mask, (r // half) & 1))
        step_mod = mods[lvl]
        for j in range(c):
            b = sum(cols[j][i] * at[i] for i in range(m))
            rj = BN[j][c] - b
            if rj % step_mod:
                return []
            maskj = 0
            atj = ats[j]
            for i in range(m):
                if atj[i] & 1:
                    maskj |= 1 << i
            rows.append((maskj, (rj // step_mod) & 1))
        # reduced row echelon form over GF(2); pivot = lowest set bit
        basis: list[list[int]] = []
        for mask, rhs in rows:
            for b in basis:
                if mask & (b[0] & -b[0]):
                    mask ^= b[0]
                    rhs ^= b[1]
            if mask == 0:
                if rhs:
                    return []
                continue
            piv = mask & -mask
            for b in basis:
                if b[0] & piv:
                    b[0] ^= mask
                    b[1] ^= rhs
            basis.append([mask, rhs])
        pivots = 0
        for b in basis:
            pivots |= b[0] & -b[0]
        free = [i for i in range(m) if not (pivots >> i) & 1]
        sols = []
        for combo in range(1 << len(free)):
            v = 0
            for idx, i in enumerate(free):
                if (combo >> idx) & 1:
                    v |= 1 << i
            for bm, brhs in basis:
                if ((bm & v).bit_count() & 1) != brhs:
                    v |= bm & -bm
            sols.append(tuple((v >> i) & 1 for i in range(m)))
        return sols

    def step(k: int):
        if k == n * P:
            yield [[cols[c][i] for c in range(n)] for i in range(m)]
            return
        lvl, c = divmod(k, n)
        scale = mods[lvl]
        t = cols[c]
        at = ats[c]
        old_t = list(t)
        old_at = list(at)
        qcheck = mods[min(lvl + 1 + bonus, P + bonus)]
        ahead = mods[min(lvl + 1, P)]   # columns j < c are set mod p^(lvl+1)
        for digits in continuations(lvl, c):
            for i in range(m):
                t[i] = old_t[i] + digits[i] * scale
                at[i] = old_at[i] + scale * sum(A[i][j] * digits[j]
                                                for j in range(m) if digits[j])
            q = sum(t[i] * at[i] for i in range(m))
            if (q - BN[c][c]) % qcheck:
                continue
            ok = True
            for j in range(c):
                b = sum(cols[j][i] * at[i] for i in range(m))
                if (b - BN[j][c]) % ahead:
                    ok = False
                    break
            if not ok:
                continue
            if unimodular and lvl == 0 and c == n - 1 and not indep_mod_p():
                continue
            yield from step(k + 1)
        t[:] = old_t
        at[:] = old_at

    yield from step(0)


_CERT_TRIES = 24
_SCAN_CAP = 4000


def embedding_search(N: LocalLattice, M: LocalLattice):
    """Decide N -> M over Z_p.

    Returns (True, witness_matrix) or (False, refuting_precision); raises
    IndeterminateRepresentation when the precision cap is reached with
    uncertified solutions alive.
    """
    if N.p != M.p:
        raise ValueError("lattices over different primes")
    p = N.p
    m, n = M.rank, N.rank
    if n > m:
        raise ValueError("source rank exceeds target rank")
    cap = precision_cap(N, M)
    unimodular = n == m and ord_p(N.det(), p) == ord_p(M.det(), p)
    ladder = []
    k = 3
    while k < cap:
        ladder.append(k)
        k = k + 3 + k // 2
    ladder.append(cap)

    scale = 2 if (_needs_doubling(M) or _needs_doubling(N)) else 1
    hint = 0
    for P in ladder:
        if P < hint and P != ladder[-1]:
            continue
        mods = [p**i for i in range(P + 2)]
        modulus = mods[P + 1]
        A = _int_gram(M, modulus, scale)
        BN = _int_gram(N, modulus, scale)
        found_any = False
        tries = scanned = 0
        exhausted = True
        for T in _solve_columns(A, BN, m, n, p, P, mods, unimodular):
            found_any = True
            scanned += 1
            s = _cert_denominator_val(A, T, p)
            if s is not None:
                if P >= 2 * s + 1:
                    return True, T
                hint = max(hint, 2 * s + 1)
            tries += 1
            if tries >= _CERT_TRIES or scanned >= _SCAN_CAP:
                exhausted = False
                break
        if not found_any:
            return False, P
        if P == ladder[-1] and not exhausted:
            break
    raise IndeterminateRepresentation(
        f"no certificate and no exhaustion proof below precision {p}^{cap}")
