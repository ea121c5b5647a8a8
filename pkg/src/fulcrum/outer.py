"""Outer precode: dimension expansion of n source packets into n + r.

The expansion is a linear map over GF(2^h) described by an
(n+r) x n generator matrix G; row j holds the coefficients that produce
expanded packet C_j from the sources.  Two constructions are provided:

* systematic-random: identity block on top, seeded uniform coefficients
  in the r expansion rows (regenerable from the bare 64-bit seed), and
* Reed-Solomon: row j evaluates the monomials X^0..X^{n-1} at alpha^j,
  giving the Vandermonde generator of the RS code of dimension n.

The cyclotomic-coset machinery decides, for an RS precode over
GF(2^s), whether n binary-independent received combinations always
remap to a full-rank GF(2^s) system (true iff n >= 2^{s-1}); when that
fails it produces explicit binary dual-code words that witness the rank
loss.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .fields import GaloisField, OpCounters, validate_symbol_size
from .linalg import gfq_rank
from .prng import SplitMix64

MAPPING_KIND_TAGS = {"systematic_random": 0, "reed_solomon": 1, "explicit": 2}
_TAG_TO_KIND = {v: k for k, v in MAPPING_KIND_TAGS.items()}


@dataclass(frozen=True)
class CodeParams:
    """Per-generation code parameters: n sources, r expansion packets."""

    n: int
    r: int
    field: GaloisField

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.r < 0:
            raise ValueError("r must be >= 0")
        # wire format limits: n is a 16-bit field, r an 8-bit field
        if self.n > 0xFFFF:
            raise ValueError("n does not fit the 16-bit wire field")
        if self.r > 0xFF:
            raise ValueError("r does not fit the 8-bit wire field")

    @property
    def dims(self) -> int:
        """Inner-code dimension count n + r."""
        return self.n + self.r


class OuterMapping:
    """The (n+r) x n outer generator matrix plus structure flags."""

    def __init__(self, params: CodeParams, rows: np.ndarray, kind: str, seed: int | None = None):
        if kind not in MAPPING_KIND_TAGS:
            raise ValueError(f"unknown mapping kind {kind!r}")
        rows = np.array(rows, dtype=params.field.dtype, copy=True, order="C")
        if rows.shape != (params.dims, params.n):
            raise ValueError(f"mapping shape {rows.shape} != {(params.dims, params.n)}")
        if rows.size and int(rows.max()) >= params.field.order:
            raise ValueError("mapping contains values outside the field")
        if gfq_rank(params.field, rows) != params.n:
            raise ValueError("mapping does not have full column rank")
        self.params = params
        self.rows = rows
        self.rows.setflags(write=False)
        self.kind = kind
        self.seed = seed
        ident = np.zeros((params.n, params.n), dtype=params.field.dtype)
        np.fill_diagonal(ident, 1)
        self.systematic = bool(np.array_equal(rows[: params.n], ident))

    def __repr__(self) -> str:
        p = self.params
        return f"OuterMapping(kind={self.kind}, n={p.n}, r={p.r}, GF(2^{p.field.degree}))"


def build_systematic_mapping(params: CodeParams, seed: int) -> OuterMapping:
    """Identity block over the sources plus r seeded random expansion rows.

    Expansion coefficients are the low h bits of consecutive SplitMix64
    outputs, drawn row-major, uniform over the whole field (zeros
    included; the identity block already guarantees full column rank,
    which is still checked at construction).
    """
    field = params.field
    if field.degree not in (8, 16):
        raise ValueError("systematic mappings use an outer field of degree 8 or 16")
    rows = np.zeros((params.dims, params.n), dtype=field.dtype)
    np.fill_diagonal(rows[: params.n], 1)
    gen = SplitMix64(seed)
    for j in range(params.n, params.dims):
        for k in range(params.n):
            rows[j, k] = gen.next_bits(field.degree)
    return OuterMapping(params, rows, "systematic_random", seed=seed)


def build_rs_mapping(params: CodeParams) -> OuterMapping:
    """Reed-Solomon generator: row j is (alpha^(j*0), ..., alpha^(j*(n-1)))."""
    field = params.field
    if params.dims > field.order - 1:
        raise ValueError(
            f"RS length n+r={params.dims} exceeds 2^{field.degree}-1={field.order - 1}"
        )
    rows = np.zeros((params.dims, params.n), dtype=field.dtype)
    for j in range(params.dims):
        for k in range(params.n):
            rows[j, k] = field.alpha_pow(j * k)
    return OuterMapping(params, rows, "reed_solomon")


def outer_encode(
    mapping: OuterMapping,
    sources: list[bytes],
    counters: OpCounters | None = None,
) -> list[bytes]:
    """Expand n source payloads into n+r coded payloads C_j = sum G[j,k] P_k."""
    params = mapping.params
    field = params.field
    if len(sources) != params.n:
        raise ValueError(f"expected {params.n} source symbols, got {len(sources)}")
    size = len(sources[0])
    validate_symbol_size(size, field)
    if any(len(s) != size for s in sources):
        raise ValueError("source symbols differ in size")

    src = np.frombuffer(b"".join(sources), dtype=field.dtype).reshape(params.n, -1)
    if 1 < field.degree < 8 and src.size and int(src.max()) >= field.order:
        raise ValueError(f"payload bytes exceed GF(2^{field.degree}) elements")
    src_logs = field.LOG[src]
    out: list[bytes] = []
    start = 0
    if mapping.systematic:
        out.extend(bytes(s) for s in sources[: params.n])
        start = params.n
    for j in range(start, params.dims):
        coeffs = mapping.rows[j]
        prods = field.EXP[field.LOG[coeffs][:, None] + src_logs]
        acc = np.bitwise_xor.reduce(prods, axis=0)
        out.append(acc.tobytes())
        if counters is not None:
            nz = int(np.count_nonzero(coeffs))
            counters.gfq_muls += int(np.count_nonzero((coeffs != 0) & (coeffs != 1))) * acc.size
            counters.gfq_adds += max(nz - 1, 0) * acc.size
    return out


def serialize_mapping(mapping: OuterMapping) -> bytes:
    """Kind tag byte, then seed (8B LE) for systematic_random, nothing for
    reed_solomon, or the dense rows little-endian for explicit."""
    tag = MAPPING_KIND_TAGS[mapping.kind]
    if mapping.kind == "systematic_random":
        if mapping.seed is None:
            raise ValueError("systematic_random mapping has no seed recorded")
        return struct.pack("<BQ", tag, mapping.seed)
    if mapping.kind == "reed_solomon":
        return struct.pack("<B", tag)
    body = mapping.rows.astype(mapping.params.field.dtype).tobytes()
    return struct.pack("<B", tag) + body


def deserialize_mapping(params: CodeParams, data: bytes) -> OuterMapping:
    if not data:
        raise ValueError("empty mapping blob")
    tag = data[0]
    kind = _TAG_TO_KIND.get(tag)
    if kind is None:
        raise ValueError(f"unknown mapping kind tag {tag}")
    if kind == "systematic_random":
        if len(data) != 9:
            raise ValueError("systematic_random mapping blob must be 9 bytes")
        (seed,) = struct.unpack_from("<Q", data, 1)
        return build_systematic_mapping(params, seed)
    if kind == "reed_solomon":
        if len(data) != 1:
            raise ValueError("reed_solomon mapping blob must be 1 byte")
        return build_rs_mapping(params)
    field = params.field
    want = params.dims * params.n * field.element_bytes
    if len(data) != 1 + want:
        raise ValueError(f"explicit mapping blob must be {1 + want} bytes")
    rows = np.frombuffer(data[1:], dtype=field.dtype).reshape(params.dims, params.n)
    return OuterMapping(params, rows.copy(), "explicit")


# ---------------------------------------------------------------------------
# Subfield-subcode certification for RS precodes over GF(2^s)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CyclotomicCosets:
    """Partition of {0..2^s-2} into orbits under doubling mod 2^s-1."""

    s: int
    cosets: dict[int, tuple[int, ...]]

    def containing(self, a: int) -> tuple[int, ...]:
        for members in self.cosets.values():
            if a in members:
                return members
        raise KeyError(a)


def cyclotomic_cosets(s: int) -> CyclotomicCosets:
    """All cyclotomic cosets I_a = {a, 2a, 4a, ...} mod 2^s - 1, labeled by
    their smallest member."""
    if not 2 <= s <= 16:
        raise ValueError("s must be in 2..16")
    modulus = (1 << s) - 1
    seen = [False] * modulus
    cosets: dict[int, tuple[int, ...]] = {}
    for a in range(modulus):
        if seen[a]:
            continue
        members = []
        x = a
        while not seen[x]:
            seen[x] = True
            members.append(x)
            x = (2 * x) % modulus
        cosets[a] = tuple(members)
    return CyclotomicCosets(s, cosets)


def _qualifying_cosets(n: int, s: int) -> list[tuple[int, ...]]:
    """Cosets fully contained in {1, ..., 2^s - 1 - n}."""
    if not 1 <= n <= (1 << s) - 1:
        raise ValueError("need 1 <= n <= 2^s - 1")
    limit = (1 << s) - 1 - n
    out = []
    for label, members in sorted(cyclotomic_cosets(s).cosets.items()):
        if label == 0:
            continue
        if all(1 <= m <= limit for m in members):
            out.append(members)
    return out


def subfield_subcode_dimension(n: int, s: int) -> int:
    """Dimension of the binary subfield subcode of the dual RS code.

    Nonzero dimension means there are binary words orthogonal to the
    dimension-n RS code, i.e. binary receive matrices that lose rank
    after the remap to GF(2^s).
    """
    return sum(len(c) for c in _qualifying_cosets(n, s))


def subfield_subcode_basis(n: int, s: int) -> list[np.ndarray]:
    """Explicit binary basis of the dual's subfield subcode.

    For each qualifying coset I_a of size m and each j in 0..m-1 the
    basis vector evaluates f(X) = g X^a + g^2 X^{2a} + ... with
    g = beta^j, beta = alpha^((2^s-1)/(2^m-1)), at alpha^0..alpha^{q-2}.
    The evaluations are Frobenius-invariant, hence take values in {0,1}.
    """
    field = GaloisField.of(s)
    q1 = field.order - 1
    points = np.arange(q1, dtype=np.int64)
    basis: list[np.ndarray] = []
    for members in _qualifying_cosets(n, s):
        a = members[0]
        m = len(members)
        beta = field.alpha_pow(q1 // ((1 << m) - 1))
        for j in range(m):
            g = field.pow(beta, j)
            acc = np.zeros(q1, dtype=field.dtype)
            for t in range(m):
                # term (g^(2^t)) * X^(a*2^t) evaluated at alpha^i for all i
                coeff = field.pow(g, 1 << t)
                e = (a << t) % q1
                acc ^= field.EXP[(field.LOG[coeff] + points * e) % q1]
            if acc.max() > 1:
                raise AssertionError("subcode evaluation left GF(2)")
            basis.append(acc.astype(np.uint8))
    return basis


def rs_full_rank_guaranteed(n: int, s: int) -> bool:
    """True iff n binary-independent combinations of a dimension-n RS
    precode over GF(2^s) are always decodable, i.e. n >= 2^(s-1)."""
    if not 1 <= n <= (1 << s) - 1:
        raise ValueError("need 1 <= n <= 2^s - 1")
    return n >= 1 << (s - 1)
