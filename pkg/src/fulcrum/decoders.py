"""The three receiver types: inner (pure GF(2)), outer (remap every
packet to GF(2^h)), and combined (two-stage GF(2) elimination with one
final small GF(2^h) solve).

All three consume the same packet stream.  They differ in when they pay
for outer-field arithmetic:

* inner: never; needs n+r independent binary combinations, and with a
  systematic outer mapping the first n decoded symbols are the sources.
* outer: on every packet; the binary vector is pushed through the outer
  generator rows (a pure XOR accumulation) and eliminated over GF(2^h),
  so n independent remapped combinations complete decoding.
* combined: only at the end; binary elimination runs in two stages
  (stage one keyed by expansion columns, stage two by source columns,
  so stage-two rows carry no expansion contribution), and once the
  stage ranks sum to n the stored rows are remapped and at most r dense
  rows need real GF(2^h) elimination.

Feeding returns one of the status strings INNOVATIVE, REDUNDANT or
COMPLETE; a packet fed after completion is reported redundant.
"""

from __future__ import annotations

import numpy as np

from .fields import OpCounters
from .inner import CodedPacket
from .linalg import Gf2Eliminator, GfqEliminator, lowest_set_bit
from .outer import OuterMapping

INNOVATIVE = "innovative"
REDUNDANT = "redundant"
COMPLETE = "complete"


class _ReceiverBase:
    def __init__(self, mapping: OuterMapping, counters: OpCounters | None):
        self.mapping = mapping
        self.params = mapping.params
        self.counters = counters  # None disables instrumentation
        self.generation_id: int | None = None
        self.symbol_size: int | None = None
        self._decoded: list[bytes] | None = None

    @property
    def is_complete(self) -> bool:
        return self._decoded is not None

    def decoded_symbols(self) -> list[bytes]:
        if self._decoded is None:
            raise RuntimeError("decoder has not completed")
        return list(self._decoded)

    def _check_packet(self, p: CodedPacket) -> None:
        if (p.n, p.r) != (self.params.n, self.params.r):
            raise ValueError(
                f"packet params (n={p.n}, r={p.r}) do not match decoder "
                f"(n={self.params.n}, r={self.params.r})"
            )
        if self.generation_id is None:
            self.generation_id = p.generation_id
            self.symbol_size = p.symbol_size
        elif p.generation_id != self.generation_id:
            raise ValueError(
                f"generation {p.generation_id} fed to decoder for generation "
                f"{self.generation_id}"
            )
        elif p.symbol_size != self.symbol_size:
            raise ValueError("symbol_size changed mid-generation")

    def _vector_bits(self, vec: int) -> np.ndarray:
        dims = self.params.dims
        raw = np.frombuffer(vec.to_bytes((dims + 7) // 8, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:dims]

    def _map_to_outer(self, vec: int) -> np.ndarray | None:
        """Remap a binary vector to its outer-field coefficients over the
        n source columns (None for the zero vector).

        With a systematic mapping the first n generator rows are unit
        vectors, so only the expansion rows need XOR-accumulating; rows
        with no expansion contribution remap to a 0/1 vector for free.
        """
        field = self.params.field
        n = self.params.n
        bits = self._vector_bits(vec)
        if self.mapping.systematic:
            g = bits[:n].astype(field.dtype)
            expansion_sel = np.nonzero(bits[n:])[0]
            if expansion_sel.size:
                g ^= np.bitwise_xor.reduce(self.mapping.rows[n + expansion_sel], axis=0)
                if self.counters is not None:
                    self.counters.gfq_adds += expansion_sel.size * n
            elif not g.any():
                return None
            return g
        sel = np.nonzero(bits)[0]
        if sel.size == 0:
            return None
        g = np.bitwise_xor.reduce(self.mapping.rows[sel], axis=0)
        if self.counters is not None:
            self.counters.gfq_adds += (sel.size - 1) * n
        return g


class InnerDecoder(_ReceiverBase):
    """GF(2) elimination over all n+r dimensions."""

    def __init__(self, mapping: OuterMapping, counters: OpCounters | None = None):
        if not mapping.systematic:
            raise ValueError("the inner decoder requires a systematic outer mapping")
        super().__init__(mapping, counters)
        self._elim = Gf2Eliminator(self.params.dims, counters=self.counters)

    @property
    def rank(self) -> int:
        return self._elim.rank

    def feed(self, p: CodedPacket) -> str:
        self._check_packet(p)
        if self.is_complete:
            return REDUNDANT
        col = self._elim.feed(p.vector, int.from_bytes(p.payload, "little"))
        if col is None:
            return REDUNDANT
        if self._elim.rank == self.params.dims:
            size = self.symbol_size
            self._decoded = [
                self._elim.payload_for_column(j).to_bytes(size, "little")
                for j in range(self.params.n)
            ]
            return COMPLETE
        return INNOVATIVE


class OuterDecoder(_ReceiverBase):
    """Immediate remap of every packet to GF(2^h) and elimination there.

    Works with any outer mapping, systematic or not.  Completion needs
    rank n in the remapped system; if the remap happens to be singular
    at n binary-independent receptions (rare but possible for every
    mapping kind, at roughly inverse-field-size rate), the decoder
    simply keeps consuming packets.
    """

    def __init__(self, mapping: OuterMapping, counters: OpCounters | None = None):
        super().__init__(mapping, counters)
        self._elim: GfqEliminator | None = None

    @property
    def rank(self) -> int:
        return 0 if self._elim is None else self._elim.rank

    def feed(self, p: CodedPacket) -> str:
        self._check_packet(p)
        if self.is_complete:
            return REDUNDANT
        field = self.params.field
        n = self.params.n
        if self._elim is None:
            elems = p.symbol_size // field.element_bytes
            self._elim = GfqEliminator(field, n, n + elems, counters=self.counters)
        g = self._map_to_outer(p.vector)
        if g is None:
            return REDUNDANT
        row = np.empty(self._elim.row_len, dtype=field.dtype)
        row[:n] = g
        row[n:] = np.frombuffer(p.payload, dtype=field.dtype)
        col = self._elim.feed(row)
        if col is None:
            return REDUNDANT
        if self._elim.rank == n:
            size = self.symbol_size
            self._decoded = [r.tobytes()[:size] for r in self._elim.payload_by_column()]
            return COMPLETE
        return INNOVATIVE


class CombinedDecoder(_ReceiverBase):
    """Two-stage GF(2) elimination, then one small GF(2^h) solve.

    Stage one holds rows pivoted on expansion columns (their remap is
    dense over the outer field); stage two holds rows with no expansion
    contribution (their remap is a 0/1 vector, nearly decoded already).
    When the stage ranks sum to n the stored rows are remapped and the
    residual system is solved over GF(2^h); if that system is singular
    the decoder keeps consuming packets and retries on the next
    innovative one.
    """

    def __init__(self, mapping: OuterMapping, counters: OpCounters | None = None):
        if not mapping.systematic:
            raise ValueError("the combined decoder requires a systematic outer mapping")
        super().__init__(mapping, counters)
        n = self.params.n
        expansion_mask = ((1 << self.params.dims) - 1) ^ ((1 << n) - 1)

        def prefer_expansion(residual: int) -> int:
            hi = residual & expansion_mask
            return lowest_set_bit(hi if hi else residual)

        self._elim = Gf2Eliminator(
            self.params.dims, pivot_rule=prefer_expansion, counters=self.counters
        )

    @property
    def rank(self) -> int:
        return self._elim.rank

    @property
    def stage_one_rank(self) -> int:
        n = self.params.n
        return sum(1 for row in self._elim.rows if row[2] >= n)

    @property
    def stage_two_rank(self) -> int:
        return self.rank - self.stage_one_rank

    def feed(self, p: CodedPacket) -> str:
        self._check_packet(p)
        if self.is_complete:
            return REDUNDANT
        col = self._elim.feed(p.vector, int.from_bytes(p.payload, "little"))
        if col is None:
            return REDUNDANT
        if self._elim.rank >= self.params.n and self._try_final_solve():
            return COMPLETE
        return INNOVATIVE

    def _try_final_solve(self) -> bool:
        field = self.params.field
        n = self.params.n
        size = self.symbol_size
        elems = size // field.element_bytes
        solver = GfqEliminator(field, n, n + elems, counters=self.counters)

        # Stage-two rows carry no expansion contribution: under the
        # systematic mapping they remap to themselves as 0/1 rows, and
        # they are already mutually reduced, so they enter the solver
        # wholesale without any field arithmetic.
        stage_two = sorted((row for row in self._elim.rows if row[2] < n), key=lambda r: r[2])
        stage_one = sorted((row for row in self._elim.rows if row[2] >= n), key=lambda r: r[2])
        if stage_two:
            nbytes = (self.params.dims + 7) // 8
            packed = b"".join(r[0].to_bytes(nbytes, "little") for r in stage_two)
            bits = np.unpackbits(
                np.frombuffer(packed, dtype=np.uint8), bitorder="little"
            ).reshape(len(stage_two), nbytes * 8)
            payloads = np.frombuffer(
                b"".join(r[1].to_bytes(size, "little") for r in stage_two), dtype=field.dtype
            ).reshape(len(stage_two), elems)
            k = len(stage_two)
            solver.matrix[:k, :n] = bits[:, :n]
            solver.matrix[:k, n:] = payloads
            solver.pivot_cols[:k] = [r[2] for r in stage_two]
            solver.rank = k
        for vec, payload, _pivot in stage_one:
            g = self._map_to_outer(vec)
            row = np.empty(n + elems, dtype=field.dtype)
            row[:n] = g
            row[n:] = np.frombuffer(payload.to_bytes(size, "little"), dtype=field.dtype)
            solver.feed(row)
        if solver.rank == n:
            self._decoded = [r.tobytes()[:size] for r in solver.payload_by_column()]
            return True
        return False
