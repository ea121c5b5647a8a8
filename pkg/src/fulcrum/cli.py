"""Command-line front end.

Subcommands
-----------
encode    split a file into generations and write wire-format packets
decode    rebuild the original file from a packet directory
simulate  run a Monte-Carlo topology simulation from a JSON config
analyze   emit the closed-form delay/overhead model as CSV
bench     time encode/decode and report exact field-operation counters

Exit codes: 0 success, 2 parameter error, 3 decode-rank failure,
4 I/O or packet-format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import analysis
from .decoders import COMPLETE, CombinedDecoder, InnerDecoder, OuterDecoder
from .fields import GaloisField, OpCounters, validate_symbol_size
from .inner import (
    InnerEncoder,
    PacketFormatError,
    dense,
    serialize_packet,
    deserialize_packet,
)
from .linalg import Gf2Eliminator, GfqEliminator
from .outer import CodeParams, build_rs_mapping, build_systematic_mapping, outer_encode
from .prng import derive_seed
from .simulator import SimConfig, run
import numpy as np

MANIFEST_NAME = "manifest.json"
MANIFEST_FORMAT = "fulcrum-manifest"

EXIT_OK = 0
EXIT_PARAMS = 2
EXIT_RANK = 3
EXIT_IO = 4


class RankFailure(Exception):
    """Decoding stalled below full rank; carries per-generation detail."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fulcrum", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for simulation/bench trials")
    parser.add_argument("--out", type=str, default=None, help="output path (directory for encode, file otherwise; CSV defaults to stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode a file into wire-format packets")
    enc.add_argument("input", help="input file")
    enc.add_argument("-n", type=int, default=8, help="source packets per generation")
    enc.add_argument("-r", type=int, default=2, help="expansion packets per generation")
    enc.add_argument("--symbol-size", type=int, default=1600, help="payload bytes per packet")
    enc.add_argument("--field-bits", type=int, default=8, choices=(8, 16), help="outer field degree")
    enc.add_argument("--mapping", default="systematic_random", choices=("systematic_random", "reed_solomon"))
    enc.add_argument("--coded", type=int, default=0, help="coded packets to emit after the systematic phase")
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="decode a packet directory back into the file")
    dec.add_argument("packets", help="directory holding manifest.json and packet files")
    dec.add_argument("--decoder", default="combined", choices=("inner", "outer", "combined"))
    dec.set_defaults(func=cmd_decode)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo simulation from a JSON config")
    sim.add_argument("config", help="SimConfig JSON document")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="emit the analytic delay/overhead report as CSV")
    ana.add_argument("--n", required=True, help="comma-separated generation sizes, e.g. 64 or 16,64")
    ana.add_argument("--r", required=True, help="comma-separated expansion counts, e.g. 4,7,10")
    ana.add_argument("--m-extra", type=int, default=3, help="receptions past n to tabulate")
    ana.set_defaults(func=cmd_analyze)

    ben = sub.add_parser("bench", help="throughput and operation-count benchmark")
    ben.add_argument("-n", type=int, default=128)
    ben.add_argument("-r", type=int, default=4)
    ben.add_argument("--symbol-size", type=int, default=1600)
    ben.add_argument("--field-bits", type=int, default=8, choices=(8, 16))
    ben.add_argument("--trials", type=int, default=3)
    ben.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RankFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except PacketFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


def _emit_csv(header: list[str], rows: list[tuple], out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# encode / decode
# ---------------------------------------------------------------------------


def cmd_encode(args) -> int:
    if args.out is None:
        raise ValueError("encode requires --out <directory>")
    seed = args.seed if args.seed is not None else 0
    field = GaloisField.of(args.field_bits)
    params = CodeParams(args.n, args.r, field)
    validate_symbol_size(args.symbol_size, field)
    if args.coded < 0:
        raise ValueError("--coded must be >= 0")

    data = Path(args.input).read_bytes()
    gen_bytes = params.n * args.symbol_size
    generations = max(1, (len(data) + gen_bytes - 1) // gen_bytes)
    padded = data.ljust(generations * gen_bytes, b"\x00")

    if args.mapping == "systematic_random":
        mapping = build_systematic_mapping(params, seed)
        mapping_doc = {"kind": "systematic_random", "seed": seed}
    else:
        mapping = build_rs_mapping(params)
        mapping_doc = {"kind": "reed_solomon"}

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    per_generation = params.dims + args.coded
    for g in range(generations):
        chunk = padded[g * gen_bytes : (g + 1) * gen_bytes]
        sources = [
            chunk[i * args.symbol_size : (i + 1) * args.symbol_size] for i in range(params.n)
        ]
        expanded = outer_encode(mapping, sources)
        encoder = InnerEncoder(
            params,
            expanded,
            mode=dense(),
            systematic=True,
            rng=random.Random(derive_seed(seed, g)),
            generation_id=g,
        )
        for i in range(per_generation):
            pkt = encoder.next_packet()
            path = outdir / f"gen{g:05d}_pkt{i:05d}.fpkt"
            path.write_bytes(serialize_packet(pkt))

    manifest = {
        "format": MANIFEST_FORMAT,
        "version": 1,
        "original_length": len(data),
        "generations": generations,
        "n": params.n,
        "r": params.r,
        "symbol_size": args.symbol_size,
        "field_bits": args.field_bits,
        "packets_per_generation": per_generation,
        "mapping": mapping_doc,
    }
    (outdir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {generations} generation(s), {generations * per_generation} packets, to {outdir}")
    return EXIT_OK


def cmd_decode(args) -> int:
    if args.out is None:
        raise ValueError("decode requires --out <file>")
    indir = Path(args.packets)
    manifest = json.loads((indir / MANIFEST_NAME).read_text())
    if manifest.get("format") != MANIFEST_FORMAT or manifest.get("version") != 1:
        raise ValueError("unrecognized manifest")
    field = GaloisField.of(manifest["field_bits"])
    params = CodeParams(manifest["n"], manifest["r"], field)
    if manifest["mapping"]["kind"] == "systematic_random":
        mapping = build_systematic_mapping(params, manifest["mapping"]["seed"])
    else:
        mapping = build_rs_mapping(params)

    decoder_cls = {"inner": InnerDecoder, "outer": OuterDecoder, "combined": CombinedDecoder}[
        args.decoder
    ]
    pieces: list[bytes] = []
    failures: list[str] = []
    for g in range(manifest["generations"]):
        files = sorted(indir.glob(f"gen{g:05d}_pkt*.fpkt"))
        decoder = decoder_cls(mapping)
        for path in files:
            try:
                pkt = deserialize_packet(path.read_bytes())
            except PacketFormatError as exc:
                raise PacketFormatError(f"{path.name}: {exc}", exc.offset) from exc
            if pkt.generation_id != g:
                raise PacketFormatError(f"{path.name}: unexpected generation id", 3)
            if decoder.feed(pkt) == COMPLETE:
                break
        if decoder.is_complete:
            pieces.extend(decoder.decoded_symbols())
        else:
            target = params.dims if args.decoder == "inner" else params.n
            failures.append(f"generation {g}: rank {decoder.rank} of {target}")
    if failures:
        raise RankFailure("; ".join(failures))
    blob = b"".join(pieces)[: manifest["original_length"]]
    Path(args.out).write_bytes(blob)
    print(f"decoded {len(blob)} bytes to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate / analyze
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    config = SimConfig.from_json_dict(doc)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    result = run(config, jobs=max(1, args.jobs))
    _emit_csv(["receiver_id", "m", "count", "cdf", "pmf"], result.to_csv_rows(), args.out)
    return EXIT_OK


def _parse_int_list(text: str) -> list[int]:
    values = [int(part) for part in text.split(",") if part.strip() != ""]
    if not values:
        raise ValueError("empty integer list")
    return values


def cmd_analyze(args) -> int:
    rows = analysis.report_rows(
        _parse_int_list(args.n), _parse_int_list(args.r), extra_receptions=args.m_extra
    )
    _emit_csv(["n", "r", "quantity", "value"], rows, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def bench_rows(
    n: int,
    r: int,
    symbol_size: int,
    field_bits: int,
    trials: int,
    seed: int,
) -> list[tuple]:
    """Deterministic benchmark rows for every codec role.

    Wall-clock throughput is informational; the operation counters are
    exact for the seeded stream and independent of timing.
    """
    field = GaloisField.of(field_bits)
    params = CodeParams(n, r, field)
    validate_symbol_size(symbol_size, field)
    mapping = build_systematic_mapping(params, seed)
    rows: list[tuple] = []

    def row(codec, op, seconds, nbytes, counters):
        mbps = nbytes / seconds / 1e6 if seconds > 0 else float("inf")
        return (
            codec, op, n, r, symbol_size, field_bits, trials,
            seconds, mbps, counters.gf2_row_xors, counters.gfq_muls, counters.gfq_adds,
        )

    # fulcrum encode: outer expansion plus systematic phase plus n coded packets
    counters = OpCounters()
    nbytes = 0
    t0 = time.perf_counter()
    for t in range(trials):
        rng = random.Random(derive_seed(seed, t))
        sources = [rng.randbytes(symbol_size) for _ in range(n)]
        expanded = outer_encode(mapping, sources, counters=counters)
        enc = InnerEncoder(params, expanded, systematic=True, rng=rng, counters=counters)
        for _ in range(params.dims + n):
            enc.next_packet()
        nbytes += symbol_size * (params.dims + n)
    rows.append(row("fulcrum", "encode", time.perf_counter() - t0, nbytes, counters))

    # fulcrum decode, one row per receiver type, identical coded streams
    for kind, cls in (("inner", InnerDecoder), ("outer", OuterDecoder), ("combined", CombinedDecoder)):
        counters = OpCounters()
        nbytes = 0
        t0 = time.perf_counter()
        for t in range(trials):
            rng = random.Random(derive_seed(seed, t))
            sources = [rng.randbytes(symbol_size) for _ in range(n)]
            expanded = outer_encode(mapping, sources)
            enc = InnerEncoder(params, expanded, systematic=False, rng=rng)
            decoder = cls(mapping, counters=counters)
            while not decoder.is_complete:
                decoder.feed(enc.next_packet())
                nbytes += symbol_size
        rows.append(row(f"fulcrum_{kind}", "decode", time.perf_counter() - t0, nbytes, counters))

    rows.extend(_bench_rlnc_gf2(n, symbol_size, trials, seed, row))
    rows.extend(_bench_rlnc_gfq(GaloisField.of(8), "rlnc_gf256", n, symbol_size, trials, seed, row))
    return rows


def _bench_rlnc_gf2(n, symbol_size, trials, seed, row):
    out = []
    # encode
    counters = OpCounters()
    nbytes = 0
    t0 = time.perf_counter()
    streams = []
    for t in range(trials):
        rng = random.Random(derive_seed(seed, t))
        srcs = [int.from_bytes(rng.randbytes(symbol_size), "little") for _ in range(n)]
        packets = []
        for _ in range(n + 8):
            vec = 0
            while vec == 0:
                vec = rng.getrandbits(n)
            acc = 0
            v = vec
            while v:
                low = v & -v
                acc ^= srcs[low.bit_length() - 1]
                v ^= low
                counters.gf2_row_xors += 1
            packets.append((vec, acc))
            nbytes += symbol_size
        streams.append(packets)
    out.append(row("rlnc_gf2", "encode", time.perf_counter() - t0, nbytes, counters))
    # decode
    counters = OpCounters()
    nbytes = 0
    t0 = time.perf_counter()
    for packets in streams:
        elim = Gf2Eliminator(n, counters=counters)
        for vec, payload in packets:
            elim.feed(vec, payload)
            nbytes += symbol_size
            if elim.rank == n:
                break
    out.append(row("rlnc_gf2", "decode", time.perf_counter() - t0, nbytes, counters))
    return out


def _bench_rlnc_gfq(field, name, n, symbol_size, trials, seed, row):
    out = []
    elems = symbol_size // field.element_bytes
    counters = OpCounters()
    nbytes = 0
    t0 = time.perf_counter()
    streams = []
    for t in range(trials):
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
            prods = field.EXP[field.LOG[coeffs][:, None] + log_mat]
            payload = np.bitwise_xor.reduce(prods, axis=0)
            counters.gfq_muls += int(np.count_nonzero((coeffs != 0) & (coeffs != 1))) * elems
            counters.gfq_adds += max(int(np.count_nonzero(coeffs)) - 1, 0) * elems
            packets.append(np.concatenate([coeffs, payload]))
            nbytes += symbol_size
        streams.append(packets)
    out.append(row(name, "encode", time.perf_counter() - t0, nbytes, counters))

    counters = OpCounters()
    nbytes = 0
    t0 = time.perf_counter()
    for packets in streams:
        elim = GfqEliminator(field, n, n + elems, counters=counters)
        for pkt in packets:
            elim.feed(pkt.copy())
            nbytes += symbol_size
            if elim.rank == n:
                break
    out.append(row(name, "decode", time.perf_counter() - t0, nbytes, counters))
    return out


BENCH_HEADER = [
    "codec", "op", "n", "r", "symbol_size", "field_bits", "trials",
    "seconds", "mbps", "gf2_row_xors", "gfq_muls", "gfq_adds",
]


def cmd_bench(args) -> int:
    seed = args.seed if args.seed is not None else 0
    rows = bench_rows(args.n, args.r, args.symbol_size, args.field_bits, args.trials, seed)
    _emit_csv(BENCH_HEADER, rows, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
