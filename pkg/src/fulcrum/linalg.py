"""Incremental Gauss-Jordan elimination over GF(2) and GF(2^h).

Both eliminators keep their stored rows in reduced row-echelon form
(unit pivots, each pivot column zero in every other stored row).  That
invariant makes single-pass reduction of an arriving row exact: stored
rows have zeros at all other pivot columns, so the elimination factors
can be read off the incoming row before any subtraction happens.

GF(2) rows are bit-packed integers with the payload carried as a second
integer.  GF(2^h) rows are numpy element arrays where the leading
`width` entries are coding coefficients and the tail is the payload.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .fields import GaloisField, OpCounters

try:  # optional JIT for the GF(2^h) elimination kernel
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def lowest_set_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


class Gf2Eliminator:
    """Streaming GF(2) elimination on bit-packed rows.

    `pivot_rule(residual)` picks the pivot column of a nonzero reduced
    row; the default takes the first nonzero coordinate.
    """

    def __init__(
        self,
        width: int,
        pivot_rule: Callable[[int], int] | None = None,
        counters: OpCounters | None = None,
    ):
        self.width = width
        self.rows: list[list[int]] = []  # [vector, payload, pivot_col]
        self.pivot_mask = 0
        self._by_col: dict[int, list[int]] = {}
        self._pivot_rule = pivot_rule or lowest_set_bit
        self.counters = counters

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, vec: int, payload: int) -> tuple[int, int]:
        """Reduce a row against the stored pivots (does not insert)."""
        hits = vec & self.pivot_mask
        nxors = 0
        while hits:
            col = lowest_set_bit(hits)
            hits &= hits - 1
            row = self._by_col[col]
            vec ^= row[0]
            payload ^= row[1]
            nxors += 1
        if nxors and self.counters is not None:
            self.counters.gf2_row_xors += nxors
        return vec, payload

    def feed(self, vec: int, payload: int) -> int | None:
        """Insert one row; returns its pivot column or None if redundant."""
        vec, payload = self.reduce(vec, payload)
        if vec == 0:
            return None
        col = self._pivot_rule(vec)
        bit = 1 << col
        nxors = 0
        for row in self.rows:
            if row[0] & bit:
                row[0] ^= vec
                row[1] ^= payload
                nxors += 1
        if nxors and self.counters is not None:
            self.counters.gf2_row_xors += nxors
        entry = [vec, payload, col]
        self.rows.append(entry)
        self._by_col[col] = entry
        self.pivot_mask |= bit
        return col

    def payload_for_column(self, col: int) -> int:
        """Payload of the unit row for `col`; valid once fully decoded."""
        return self._by_col[col][1]


def gf2_rank(vectors: list[int]) -> int:
    """Rank of bit-packed GF(2) row vectors."""
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _gfq_feed_kernel(matrix, pivot_cols, rank, row, width, LOG, EXP, q1):
        """Full Gauss-Jordan step: reduce, normalize, back-reduce, insert.

        Returns (pivot_col or -1, element multiplications with scalars
        outside {0,1}, element additions) to keep instrumentation exact.
        """
        row_len = row.shape[0]
        muls = 0
        adds = 0
        for i in range(rank):
            f = row[pivot_cols[i]]
            if f:
                if f > 1:
                    muls += row_len
                adds += row_len
                lf = LOG[f]
                stored = matrix[i]
                for j in range(row_len):
                    v = stored[j]
                    if v:
                        row[j] ^= EXP[lf + LOG[v]]
        lead = -1
        for j in range(width):
            if row[j]:
                lead = j
                break
        if lead < 0:
            return -1, muls, adds
        lv = row[lead]
        if lv != 1:
            muls += row_len
            li = q1 - LOG[lv]
            for j in range(row_len):
                v = row[j]
                if v:
                    row[j] = EXP[li + LOG[v]]
        for i in range(rank):
            stored = matrix[i]
            f = stored[lead]
            if f:
                if f > 1:
                    muls += row_len
                adds += row_len
                lf = LOG[f]
                for j in range(row_len):
                    v = row[j]
                    if v:
                        stored[j] ^= EXP[lf + LOG[v]]
        matrix[rank] = row
        pivot_cols[rank] = lead
        return lead, muls, adds


class GfqEliminator:
    """Streaming GF(2^h) elimination on numpy rows with attached payloads."""

    def __init__(
        self,
        field: GaloisField,
        width: int,
        row_len: int,
        counters: OpCounters | None = None,
    ):
        if row_len < width:
            raise ValueError("row length shorter than coefficient width")
        self.field = field
        self.width = width
        self.row_len = row_len
        self.matrix = np.zeros((width, row_len), dtype=field.dtype)
        self.pivot_cols = np.zeros(width, dtype=np.int64)
        self.rank = 0
        self.counters = counters

    def feed(self, row: np.ndarray) -> int | None:
        """Insert one row (modified in place); pivot column or None."""
        if _HAVE_NUMBA:
            col, muls, adds = _gfq_feed_kernel(
                self.matrix,
                self.pivot_cols,
                self.rank,
                row,
                self.width,
                self.field.LOG,
                self.field.EXP,
                self.field.order - 1,
            )
            if self.counters is not None:
                self.counters.gfq_muls += muls
                self.counters.gfq_adds += adds
            if col < 0:
                return None
            self.rank += 1
            return col
        return self._feed_numpy(row)

    def _feed_numpy(self, row: np.ndarray) -> int | None:
        """Pure-numpy fallback; zero factors flow through the sentinel log
        tables as zero products, so stored-row blocks are processed whole."""
        EXP = self.field.EXP
        LOG = self.field.LOG
        k = self.rank
        if k:
            stored = self.matrix[:k]
            factors = row[self.pivot_cols[:k]]
            if factors.any():
                row ^= np.bitwise_xor.reduce(EXP[LOG[factors][:, None] + LOG[stored]], axis=0)
                if self.counters is not None:
                    self.counters.gfq_muls += int(np.count_nonzero(factors > 1)) * self.row_len
                    self.counters.gfq_adds += int(np.count_nonzero(factors)) * self.row_len
        lead_nz = np.nonzero(row[: self.width])[0]
        if lead_nz.size == 0:
            return None
        col = int(lead_nz[0])
        lead = int(row[col])
        if lead != 1:
            row[:] = EXP[LOG[self.field.inv(lead)] + LOG[row]]
            if self.counters is not None:
                self.counters.gfq_muls += self.row_len
        if k:
            colvals = self.matrix[:k, col].copy()
            if colvals.any():
                self.matrix[:k] ^= EXP[LOG[colvals][:, None] + LOG[row]]
                if self.counters is not None:
                    self.counters.gfq_muls += int(np.count_nonzero(colvals > 1)) * self.row_len
                    self.counters.gfq_adds += int(np.count_nonzero(colvals)) * self.row_len
        self.matrix[k] = row
        self.pivot_cols[k] = col
        self.rank = k + 1
        return col

    def payload_by_column(self) -> np.ndarray:
        """(width x payload) matrix ordered by pivot column (full rank only)."""
        if self.rank != self.width:
            raise RuntimeError("system is not full rank")
        order = np.argsort(self.pivot_cols[: self.rank])
        return self.matrix[order, self.width :]


def gfq_rank(field: GaloisField, matrix: np.ndarray) -> int:
    """Rank over GF(2^h) of an integer matrix of field elements."""
    m = np.ascontiguousarray(matrix, dtype=field.dtype)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    elim = GfqEliminator(field, m.shape[1], m.shape[1])
    for row in m:
        elim.feed(row.copy())
        if elim.rank == m.shape[1]:
            break
    return elim.rank
