"""GF(2^h) arithmetic and packet-payload (symbol buffer) row operations.

Field elements are integers whose bits are polynomial coefficients over
GF(2); arithmetic is modulo an irreducible reduction polynomial.  The
codec uses GF(2) for the inner code and GF(2^8)/GF(2^16) for the outer
code, but any degree up to 16 can be constructed (the subfield-subcode
certification machinery works in small fields such as GF(2^4)).

Default reduction polynomials (bitmask includes the leading term):

    h=1  : x + 1                      -> 0x3
    h=2  : x^2 + x + 1                -> 0x7
    h=3  : x^3 + x + 1                -> 0xB
    h=4  : x^4 + x + 1                -> 0x13
    h=5  : x^5 + x^2 + 1              -> 0x25
    h=6  : x^6 + x + 1                -> 0x43
    h=7  : x^7 + x^3 + 1              -> 0x89
    h=8  : x^8 + x^4 + x^3 + x^2 + 1  -> 0x11D
    h=16 : x^16 + x^12 + x^3 + x + 1  -> 0x1100B

All defaults are primitive with generator 0x02 (0x01 for h=1).
Construction verifies irreducibility by exhaustive trial division and
verifies the generator's multiplicative order, so a wrong table entry
cannot slip through silently.

Multiplication uses log/antilog tables.  The numpy variants (`LOG`,
`EXP`) use a sentinel log value for zero so that
``EXP[LOG[a] + LOG[b]]`` is a branch-free product for whole arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_POLYNOMIALS = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


@dataclass
class OpCounters:
    """Deterministic operation counters used by the benchmark harness.

    gf2_row_xors: XOR of one packet-sized row (coding vector + payload).
    gfq_muls:     element multiplications in GF(2^h) with a scalar
                  outside {0, 1}.
    gfq_adds:     element additions (XORs) performed in GF(2^h) context.
    """

    gf2_row_xors: int = 0
    gfq_muls: int = 0
    gfq_adds: int = 0

    def reset(self) -> None:
        self.gf2_row_xors = 0
        self.gfq_muls = 0
        self.gfq_adds = 0


def _clmul(a: int, b: int) -> int:
    """Carry-less (polynomial) product of two nonnegative integers."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        b >>= 1
    return acc


def _poly_mod(a: int, m: int) -> int:
    """Remainder of polynomial a modulo polynomial m over GF(2)."""
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def is_irreducible(poly: int, degree: int) -> bool:
    """Exhaustive trial division by every polynomial of degree 1..h//2."""
    if poly.bit_length() - 1 != degree:
        return False
    if degree == 1:
        return True
    for cand in range(2, 1 << (degree // 2 + 1)):
        if cand.bit_length() - 1 < 1:
            continue
        if _poly_mod(poly, cand) == 0:
            return False
    return True


def _prime_factors(x: int) -> list[int]:
    out = []
    d = 2
    while d * d <= x:
        if x % d == 0:
            out.append(d)
            while x % d == 0:
                x //= d
        d += 1
    if x > 1:
        out.append(x)
    return out


class GaloisField:
    """GF(2^h) for 1 <= h <= 16.

    Parameters
    ----------
    degree : int
        Extension degree h.
    poly : int, optional
        Reduction polynomial bitmask; defaults per module table.
    generator : int, optional
        Primitive element; if omitted, the smallest element (by integer
        value of its bit pattern) of multiplicative order 2^h - 1 is
        chosen.
    """

    _cache: dict[int, "GaloisField"] = {}

    def __init__(self, degree: int, poly: int | None = None, generator: int | None = None):
        if not 1 <= degree <= 16:
            raise ValueError(f"unsupported extension degree {degree}")
        if poly is None:
            poly = DEFAULT_POLYNOMIALS[degree]
        if not is_irreducible(poly, degree):
            raise ValueError(f"0x{poly:X} is not an irreducible polynomial of degree {degree}")
        self.degree = degree
        self.poly = poly
        self.order = 1 << degree
        if generator is None:
            generator = self._find_generator()
        self.generator = generator

        # exp/log tables; building the exp chain doubles as the order
        # check on the generator.
        q1 = self.order - 1
        exp = [0] * q1
        log = [0] * self.order
        x = 1
        for i in range(q1):
            if i > 0 and x == 1:
                raise ValueError(f"0x{generator:X} has order {i}, not {q1}")
            exp[i] = x
            log[x] = i
            x = self.mul_nolut(x, generator)
        if x != 1:
            raise ValueError(f"0x{generator:X} does not generate the multiplicative group")
        self._exp = exp
        self._log = log

        # numpy tables with a zero sentinel: LOG[0] = 2*(q-1), and EXP is
        # extended so any index involving the sentinel lands on 0.
        sentinel = 2 * q1 if q1 > 1 else 2
        nplog = np.full(self.order, sentinel, dtype=np.int32)
        for v in range(1, self.order):
            nplog[v] = log[v]
        self.dtype = np.dtype("<u2") if degree > 8 else np.dtype("u1")
        npexp = np.zeros(2 * sentinel + 1, dtype=self.dtype)
        for i in range(2 * q1 if q1 > 1 else 1):
            npexp[i] = exp[i % q1]
        self.LOG = nplog
        self.EXP = npexp
        self.element_bytes = 2 if degree > 8 else 1

    @classmethod
    def of(cls, degree: int) -> "GaloisField":
        """Shared instance with the default polynomial for this degree."""
        field = cls._cache.get(degree)
        if field is None:
            field = cls(degree)
            cls._cache[degree] = field
        return field

    def _find_generator(self) -> int:
        q1 = self.order - 1
        if q1 == 1:
            return 1
        factors = _prime_factors(q1)
        for g in range(2, self.order):
            if all(self.pow_nolut(g, q1 // p) != 1 for p in factors):
                return g
        raise ValueError("no primitive element found")  # unreachable for a field

    def mul_nolut(self, a: int, b: int) -> int:
        """Schoolbook carry-less multiply with reduction (no tables)."""
        return _poly_mod(_clmul(a, b), self.poly)

    def pow_nolut(self, a: int, e: int) -> int:
        acc = 1
        base = a
        while e:
            if e & 1:
                acc = self.mul_nolut(acc, base)
            base = self.mul_nolut(base, base)
            e >>= 1
        return acc

    @staticmethod
    def add(a: int, b: int) -> int:
        """Addition in any GF(2^h) is bitwise XOR."""
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        q1 = self.order - 1
        return self._exp[(self._log[a] + self._log[b]) % q1]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^h)")
        q1 = self.order - 1
        return self._exp[(q1 - self._log[a]) % q1]

    def pow(self, a: int, e: int) -> int:
        """a**e with e any nonnegative integer (a nonzero if e is 0 mod q-1)."""
        if a == 0:
            return 0 if e else 1
        q1 = self.order - 1
        return self._exp[(self._log[a] * e) % q1]

    def alpha_pow(self, e: int) -> int:
        """Power of the primitive element."""
        return self._exp[e % (self.order - 1)]

    def elements(self) -> range:
        return range(self.order)

    def __repr__(self) -> str:
        return f"GaloisField(2^{self.degree}, poly=0x{self.poly:X}, g=0x{self.generator:X})"


def validate_symbol_size(size: int, field: GaloisField) -> None:
    """Payloads must hold a whole number of outer-field elements."""
    if size <= 0:
        raise ValueError("symbol size must be positive")
    if field.degree > 1 and size % field.element_bytes:
        raise ValueError(
            f"symbol size {size} is not a multiple of {field.element_bytes} "
            f"bytes (GF(2^{field.degree}) element width)"
        )


def symbols_to_array(buf: bytes | bytearray, field: GaloisField) -> np.ndarray:
    """View a payload as an array of field elements (little-endian words)."""
    return np.frombuffer(buf, dtype=field.dtype)


def array_to_symbols(arr: np.ndarray) -> bytes:
    return arr.tobytes()


def symbol_xor(dst: bytearray, src: bytes | bytearray) -> bytearray:
    """dst ^= src, byte-wise."""
    if len(dst) != len(src):
        raise ValueError("symbol size mismatch")
    a = np.frombuffer(dst, dtype=np.uint8)
    a ^= np.frombuffer(src, dtype=np.uint8)
    return dst


def symbol_axpy(
    dst: bytearray,
    src: bytes | bytearray,
    coeff: int,
    field: GaloisField,
    counters: OpCounters | None = None,
) -> bytearray:
    """dst[i] ^= coeff * src[i] element-wise over the field.

    With coeff in {0, 1} no multiplications are performed (0 is a no-op,
    1 is a plain XOR of the buffers).
    """
    if len(dst) != len(src):
        raise ValueError("symbol size mismatch")
    if not 0 <= coeff < field.order:
        raise ValueError(f"coefficient 0x{coeff:X} outside GF(2^{field.degree})")
    if coeff == 0:
        return dst
    if coeff == 1 or field.degree == 1:
        if counters is not None:
            counters.gfq_adds += len(dst) // field.element_bytes
        return symbol_xor(dst, src)
    a = np.frombuffer(dst, dtype=field.dtype)
    b = np.frombuffer(src, dtype=field.dtype)
    a ^= field.EXP[field.LOG[coeff] + field.LOG[b]]
    if counters is not None:
        counters.gfq_muls += a.size
        counters.gfq_adds += a.size
    return dst
