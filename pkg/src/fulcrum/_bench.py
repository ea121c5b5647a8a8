"""Benchmark harness: wall throughput plus exact field-operation counts.

Each codec role is measured over seed-derived trials, so the operation
counters are bit-for-bit reproducible regardless of timing or of how
many worker processes split the trials.  Decode roles time only the
decoder feeds; stream generation is excluded.  Reported seconds are the
summed per-trial measurements (equal to wall time when run serially).
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .decoders import CombinedDecoder, InnerDecoder, OuterDecoder
from .fields import GaloisField, OpCounters, validate_symbol_size
from .inner import InnerEncoder
from .linalg import Gf2Eliminator, GfqEliminator
from .outer import CodeParams, build_systematic_mapping, outer_encode
from .prng import derive_seed

BENCH_HEADER = [
    "codec", "op", "n", "r", "symbol_size", "field_bits", "trials",
    "seconds", "mbps", "gf2_row_xors", "gfq_muls", "gfq_adds",
]

_ROLES = [
    ("fulcrum", "encode"),
    ("fulcrum_inner", "decode"),
    ("fulcrum_outer", "decode"),
    ("fulcrum_combined", "decode"),
    ("rlnc_gf2", "encode"),
    ("rlnc_gf2", "decode"),
    ("rlnc_gf256", "encode"),
    ("rlnc_gf256", "decode"),
]

_DECODERS = {
    "fulcrum_inner": InnerDecoder,
    "fulcrum_outer": OuterDecoder,
    "fulcrum_combined": CombinedDecoder,
}


def bench_rows(
    n: int,
    r: int,
    symbol_size: int,
    field_bits: int,
    trials: int,
    seed: int,
    jobs: int = 1,
) -> list[tuple]:
    """One row per codec role; see BENCH_HEADER for the columns."""
    field = GaloisField.of(field_bits)
    validate_symbol_size(symbol_size, field)
    CodeParams(n, r, field)  # range validation
    spec = (n, r, symbol_size, field_bits, seed)
    rows: list[tuple] = []
    for codec, op in _ROLES:
        if jobs <= 1 or trials < 2:
            parts = [_bench_range(spec, codec, op, 0, trials)]
        else:
            bounds = [trials * i // jobs for i in range(jobs + 1)]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                parts = list(
                    pool.map(
                        _bench_range_star,
                        [(spec, codec, op, bounds[i], bounds[i + 1]) for i in range(jobs)],
                    )
                )
        nbytes = sum(p[0] for p in parts)
        seconds = sum(p[1] for p in parts)
        xors, muls, adds = (sum(p[2][i] for p in parts) for i in range(3))
        mbps = nbytes / seconds / 1e6 if seconds > 0 else float("inf")
        rows.append(
            (codec, op, n, r, symbol_size, field_bits, trials,
             seconds, mbps, xors, muls, adds)
        )
    return rows


def _bench_range_star(args):
    return _bench_range(*args)


def _bench_range(spec, codec, op, start, stop):
    n, r, symbol_size, field_bits, seed = spec
    counters = OpCounters()
    nbytes = 0
    elapsed = 0.0
    if codec.startswith("fulcrum"):
        field = GaloisField.of(field_bits)
        params = CodeParams(n, r, field)
        mapping = build_systematic_mapping(params, seed)
        for t in range(start, stop):
            rng = random.Random(derive_seed(seed, t))
            sources = [rng.randbytes(symbol_size) for _ in range(n)]
            if op == "encode":
                # outer expansion, full systematic phase, then n coded packets
                t0 = time.perf_counter()
                expanded = outer_encode(mapping, sources, counters=counters)
                enc = InnerEncoder(
                    params, expanded, systematic=True, rng=rng, counters=counters
                )
                for _ in range(params.dims + n):
                    enc.next_packet()
                elapsed += time.perf_counter() - t0
                nbytes += symbol_size * (params.dims + n)
            else:
                expanded = outer_encode(mapping, sources)
                enc = InnerEncoder(params, expanded, systematic=False, rng=rng)
                decoder = _DECODERS[codec](mapping, counters=counters)
                while not decoder.is_complete:
                    pkt = enc.next_packet()
                    t0 = time.perf_counter()
                    decoder.feed(pkt)
                    elapsed += time.perf_counter() - t0
                    nbytes += symbol_size
    elif codec == "rlnc_gf2":
        for t in range(start, stop):
            rng = random.Random(derive_seed(seed, t))
            srcs = [int.from_bytes(rng.randbytes(symbol_size), "little") for _ in range(n)]
            packets = []
            for _ in range(n + 8):
                vec = 0
                while vec == 0:
                    vec = rng.getrandbits(n)
                t0 = time.perf_counter()
                acc = 0
                v = vec
                while v:
                    low = v & -v
                    acc ^= srcs[low.bit_length() - 1]
                    v ^= low
                if op == "encode":
                    counters.gf2_row_xors += bin(vec).count("1")
                    elapsed += time.perf_counter() - t0
                    nbytes += symbol_size
                packets.append((vec, acc))
            if op == "decode":
                elim = Gf2Eliminator(n, counters=counters)
                t0 = time.perf_counter()
                for vec, payload in packets:
                    elim.feed(vec, payload)
                    nbytes += symbol_size
                    if elim.rank == n:
                        break
                elapsed += time.perf_counter() - t0
    else:  # rlnc_gf256
        field = GaloisField.of(8)
        elems = symbol_size
        for t in range(start, stop):
            rng = random.Random(derive_seed(seed, t))
            mat = np.frombuffer(
                b"".join(rng.randbytes(symbol_size) for _ in range(n)), dtype=field.dtype
            ).reshape(n, -1)
            log_mat = field.LOG[mat]
            packets = []
            for _ in range(n + 4):
                while True:
                    coeffs = np.array(
                        [rng.randrange(field.order) for _ in range(n)], dtype=field.dtype
                    )
                    if coeffs.any():
                        break
                t0 = time.perf_counter()
                prods = field.EXP[field.LOG[coeffs][:, None] + log_mat]
                payload = np.bitwise_xor.reduce(prods, axis=0)
                if op == "encode":
                    counters.gfq_muls += (
                        int(np.count_nonzero((coeffs != 0) & (coeffs != 1))) * elems
                    )
                    counters.gfq_adds += max(int(np.count_nonzero(coeffs)) - 1, 0) * elems
                    elapsed += time.perf_counter() - t0
                    nbytes += symbol_size
                packets.append(np.concatenate([coeffs, payload]))
            if op == "decode":
                elim = GfqEliminator(field, n, n + elems, counters=counters)
                t0 = time.perf_counter()
                for pkt in packets:
                    elim.feed(pkt.copy())
                    nbytes += symbol_size
                    if elim.rank == n:
                        break
                elapsed += time.perf_counter() - t0
    return nbytes, elapsed, (counters.gf2_row_xors, counters.gfq_muls, counters.gfq_adds)
