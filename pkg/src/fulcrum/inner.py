"""GF(2) inner code: source encoder, relay recoder, and the packet wire
format.

After the outer expansion every packet in the network is a binary
combination of the n+r expanded symbols, identified by an (n+r)-bit
coding vector.  Vectors are held as bit-packed integers (bit j is the
coefficient of expanded symbol j+1) and serialized LSB-first per byte.

Wire layout, little-endian throughout::

    magic 'F' 'L' | version 0x01 | generation_id u32 | n u16 | r u8 |
    symbol_size u16 | vector ceil((n+r)/8) bytes | payload

Header is 12 bytes, so a packet occupies
12 + ceil((n+r)/8) + symbol_size bytes on the wire.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass

from .fields import OpCounters
from .outer import CodeParams

PACKET_MAGIC = b"FL"
PACKET_VERSION = 1
HEADER_LEN = 12
_HEADER = struct.Struct("<2sBIHBH")


class PacketFormatError(ValueError):
    """Malformed packet bytes; `offset` points at the offending field."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def wire_size(n: int, r: int, symbol_size: int) -> int:
    return HEADER_LEN + (n + r + 7) // 8 + symbol_size


@dataclass
class CodedPacket:
    """One network packet: generation id, params echo, coding vector,
    payload."""

    generation_id: int
    n: int
    r: int
    symbol_size: int
    vector: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.generation_id <= 0xFFFFFFFF:
            raise ValueError("generation_id must fit 32 bits")
        if not 1 <= self.n <= 0xFFFF:
            raise ValueError("n out of range")
        if not 0 <= self.r <= 0xFF:
            raise ValueError("r out of range")
        if not 0 < self.symbol_size <= 0xFFFF:
            raise ValueError("symbol_size out of range")
        if len(self.payload) != self.symbol_size:
            raise ValueError("payload length differs from symbol_size")
        if self.vector < 0 or self.vector >> self.dims:
            raise ValueError("coding vector has bits beyond n+r")

    @property
    def dims(self) -> int:
        return self.n + self.r


def serialize_packet(p: CodedPacket) -> bytes:
    vec_len = (p.dims + 7) // 8
    header = _HEADER.pack(
        PACKET_MAGIC, PACKET_VERSION, p.generation_id, p.n, p.r, p.symbol_size
    )
    return header + p.vector.to_bytes(vec_len, "little") + p.payload


def deserialize_packet(data: bytes) -> CodedPacket:
    if len(data) < HEADER_LEN:
        raise PacketFormatError("truncated header", len(data))
    magic, version, gen_id, n, r, symbol_size = _HEADER.unpack_from(data)
    if magic != PACKET_MAGIC:
        raise PacketFormatError("bad magic", 0)
    if version != PACKET_VERSION:
        raise PacketFormatError(f"unsupported version {version}", 2)
    if n < 1:
        raise PacketFormatError("n must be >= 1", 7)
    if symbol_size < 1:
        raise PacketFormatError("symbol_size must be >= 1", 10)
    vec_len = (n + r + 7) // 8
    expected = HEADER_LEN + vec_len + symbol_size
    if len(data) != expected:
        raise PacketFormatError(
            f"packet is {len(data)} bytes, expected {expected}", min(len(data), expected)
        )
    vector = int.from_bytes(data[HEADER_LEN : HEADER_LEN + vec_len], "little")
    if vector >> (n + r):
        raise PacketFormatError("nonzero padding bits in coding vector", HEADER_LEN)
    payload = data[HEADER_LEN + vec_len :]
    return CodedPacket(gen_id, n, r, symbol_size, vector, payload)


@dataclass(frozen=True)
class SparsityMode:
    """How coded (non-systematic) coding vectors are drawn.

    dense           every coefficient Bernoulli(1/2)
    fixed_nonzeros  exactly k nonzero coefficients
    fixed_density   every coefficient Bernoulli(rho), rho <= 1/2
    """

    variant: str
    k: int | None = None
    rho: float | None = None

    def validate(self, dims: int) -> None:
        if self.variant == "dense":
            return
        if self.variant == "fixed_nonzeros":
            if self.k is None or not 1 <= self.k <= dims:
                raise ValueError(f"k must be in 1..{dims}")
            return
        if self.variant == "fixed_density":
            if self.rho is None or not 0 < self.rho <= 0.5:
                raise ValueError("rho must be in (0, 1/2]")
            return
        raise ValueError(f"unknown sparsity variant {self.variant!r}")

    def draw(self, dims: int, rng: random.Random) -> int:
        """One nonzero coding vector (all-zero draws are resampled)."""
        while True:
            if self.variant == "dense":
                vec = rng.getrandbits(dims)
            elif self.variant == "fixed_nonzeros":
                vec = 0
                for pos in rng.sample(range(dims), self.k):
                    vec |= 1 << pos
            else:
                vec = 0
                rho = self.rho
                for pos in range(dims):
                    if rng.random() < rho:
                        vec |= 1 << pos
            if vec:
                return vec


def dense() -> SparsityMode:
    return SparsityMode("dense")


def fixed_nonzeros(k: int) -> SparsityMode:
    return SparsityMode("fixed_nonzeros", k=k)


def fixed_density(rho: float) -> SparsityMode:
    return SparsityMode("fixed_density", rho=rho)


def xor_selected(symbol_ints: list[int], vec: int) -> int:
    """XOR of the symbols selected by the set bits of vec."""
    acc = 0
    while vec:
        low = vec & -vec
        acc ^= symbol_ints[low.bit_length() - 1]
        vec ^= low
    return acc


class InnerEncoder:
    """Stream encoder over the n+r expanded symbols.

    With systematic=True the first n+r packets are the uncoded expanded
    symbols (unit coding vectors e_1..e_{n+r} in order); afterwards, and
    always when systematic=False, coded packets draw their vector from
    the sparsity mode.  All expanded symbols must be present up front.
    """

    def __init__(
        self,
        params: CodeParams,
        expanded: list[bytes],
        mode: SparsityMode | None = None,
        systematic: bool = True,
        rng: random.Random | None = None,
        generation_id: int = 0,
        counters: OpCounters | None = None,
    ):
        if len(expanded) != params.dims:
            raise ValueError(f"expected {params.dims} expanded symbols, got {len(expanded)}")
        size = len(expanded[0])
        if not 0 < size <= 0xFFFF:
            raise ValueError("symbol size must be in 1..65535")
        if any(len(s) != size for s in expanded):
            raise ValueError("expanded symbols differ in size")
        mode = mode or dense()
        mode.validate(params.dims)
        self.params = params
        self.symbol_size = size
        self.mode = mode
        self.systematic = systematic
        self.generation_id = generation_id
        self.rng = rng or random.Random()
        self.counters = counters
        self._symbol_ints = [int.from_bytes(s, "little") for s in expanded]
        self._next_systematic = 0

    def next_packet(self) -> CodedPacket:
        params = self.params
        if self.systematic and self._next_systematic < params.dims:
            i = self._next_systematic
            self._next_systematic += 1
            vec = 1 << i
            payload_int = self._symbol_ints[i]
        else:
            vec = self.mode.draw(params.dims, self.rng)
            payload_int = xor_selected(self._symbol_ints, vec)
            if self.counters is not None:
                self.counters.gf2_row_xors += bin(vec).count("1")
        return CodedPacket(
            self.generation_id,
            params.n,
            params.r,
            self.symbol_size,
            vec,
            payload_int.to_bytes(self.symbol_size, "little"),
        )


_RECODE_RETRY_LIMIT = 10_000


def recode(
    buffer: list[CodedPacket],
    rng: random.Random,
    counters: OpCounters | None = None,
) -> CodedPacket:
    """Relay recoding: XOR each buffered packet in with probability 1/2.

    Selections that are empty or whose vectors cancel to zero are
    resampled, so the output always carries a nonzero vector inside the
    GF(2) span of the buffer.
    """
    if not buffer:
        raise ValueError("cannot recode from an empty buffer")
    head = buffer[0]
    for p in buffer[1:]:
        if (p.generation_id, p.n, p.r, p.symbol_size) != (
            head.generation_id,
            head.n,
            head.r,
            head.symbol_size,
        ):
            raise ValueError("buffer mixes generations or parameters")
    for _ in range(_RECODE_RETRY_LIMIT):
        mask = rng.getrandbits(len(buffer))
        if mask == 0:
            continue
        vec = 0
        m = mask
        while m:
            low = m & -m
            vec ^= buffer[low.bit_length() - 1].vector
            m ^= low
        if vec == 0:
            continue
        payload_int = 0
        m = mask
        count = 0
        while m:
            low = m & -m
            payload_int ^= int.from_bytes(buffer[low.bit_length() - 1].payload, "little")
            m ^= low
            count += 1
        if counters is not None:
            counters.gf2_row_xors += count
        return CodedPacket(
            head.generation_id,
            head.n,
            head.r,
            head.symbol_size,
            vec,
            payload_int.to_bytes(head.symbol_size, "little"),
        )
    raise RuntimeError("recode selection kept cancelling; buffer vectors are degenerate")
