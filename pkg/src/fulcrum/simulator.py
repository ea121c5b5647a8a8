"""Monte-Carlo packet-level simulation of broadcast and line topologies.

Time is slotted: the source sends one packet per slot, every link drops
it independently with its loss probability, relays on a line store the
survivors and emit one recoded (or forwarded) packet per slot, and each
receiver feeds survivors to its own decoder.  A trial ends when every
receiver has decoded; the per-receiver and session (max over receivers)
completion slots are histogrammed over the trials.

All randomness is derived deterministically from the master seed plus
the trial index, so results are bit-identical across reruns and across
serial/parallel execution.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .decoders import COMPLETE, CombinedDecoder, InnerDecoder, OuterDecoder
from .fields import GaloisField, OpCounters
from .inner import CodedPacket, InnerEncoder, SparsityMode, recode
from .linalg import Gf2Eliminator, GfqEliminator
from .outer import CodeParams, build_rs_mapping, build_systematic_mapping, outer_encode
from .prng import derive_seed, splitmix64

_SLOT_LIMIT = 1_000_000

DECODER_KINDS = ("inner", "outer", "combined")


@dataclass(frozen=True)
class LinkSpec:
    loss: float


@dataclass(frozen=True)
class ReceiverSpec:
    link: int
    decoder: str = "outer"


@dataclass(frozen=True)
class MappingSpec:
    kind: str = "systematic_random"
    seed: int = 0


@dataclass(frozen=True)
class InnerCodeSpec:
    variant: str = "dense"
    k: int | None = None
    rho: float | None = None
    systematic: bool = False


@dataclass(frozen=True)
class TopologySpec:
    type: str  # "broadcast" or "line"
    links: tuple[LinkSpec, ...] = ()
    relays: str = "recode"  # line only: "recode" or "forward"


@dataclass(frozen=True)
class SimConfig:
    n: int
    r: int
    field_bits: int
    mapping: MappingSpec
    inner: InnerCodeSpec
    topology: TopologySpec
    receivers: tuple[ReceiverSpec, ...]
    trials: int
    seed: int = 0
    symbol_size: int | None = None
    codec: str = "fulcrum"  # "fulcrum" or "rlnc" (plain RLNC baseline)

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.topology.links:
            raise ValueError("topology needs at least one link")
        for link in self.topology.links:
            if not 0.0 <= link.loss < 1.0:
                raise ValueError(f"link loss {link.loss} outside [0, 1)")
        if self.topology.type not in ("broadcast", "line"):
            raise ValueError(f"unknown topology {self.topology.type!r}")
        if self.topology.type == "line" and self.topology.relays not in ("recode", "forward"):
            raise ValueError(f"unknown relay mode {self.topology.relays!r}")
        if not self.receivers:
            raise ValueError("at least one receiver is required")
        nlinks = len(self.topology.links)
        for rx in self.receivers:
            if not 0 <= rx.link < nlinks:
                raise ValueError(f"receiver link {rx.link} out of range")
            if rx.decoder not in DECODER_KINDS:
                raise ValueError(f"unknown decoder kind {rx.decoder!r}")
        if self.codec == "fulcrum":
            if self.field_bits not in (8, 16):
                raise ValueError("the outer code uses field_bits 8 or 16")
            if self.mapping.kind not in ("systematic_random", "reed_solomon"):
                raise ValueError(f"unsupported mapping kind {self.mapping.kind!r}")
            if self.mapping.kind == "reed_solomon":
                for rx in self.receivers:
                    if rx.decoder in ("inner", "combined"):
                        raise ValueError(
                            "inner/combined receivers need a systematic mapping"
                        )
            SparsityMode(self.inner.variant, self.inner.k, self.inner.rho).validate(
                self.n + self.r
            )
        elif self.codec == "rlnc":
            if self.field_bits not in (1, 8, 16):
                raise ValueError("baseline RLNC supports field_bits 1, 8, or 16")
            if self.r != 0:
                raise ValueError("baseline RLNC has no dimension expansion; set r=0")
        else:
            raise ValueError(f"unknown codec {self.codec!r}")

    def to_json_dict(self) -> dict:
        doc = {
            "n": self.n,
            "r": self.r,
            "field_bits": self.field_bits,
            "mapping": {"kind": self.mapping.kind, "seed": self.mapping.seed},
            "inner": {
                "variant": self.inner.variant,
                "systematic": self.inner.systematic,
            },
            "topology": {
                "type": self.topology.type,
                "links": [{"loss": l.loss} for l in self.topology.links],
            },
            "receivers": [{"link": rx.link, "decoder": rx.decoder} for rx in self.receivers],
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.inner.k is not None:
            doc["inner"]["k"] = self.inner.k
        if self.inner.rho is not None:
            doc["inner"]["rho"] = self.inner.rho
        if self.topology.type == "line":
            doc["topology"]["relays"] = self.topology.relays
        if self.symbol_size is not None:
            doc["symbol_size"] = self.symbol_size
        if self.codec != "fulcrum":
            doc["codec"] = self.codec
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SimConfig":
        mapping = doc.get("mapping", {})
        inner = doc.get("inner", {})
        topo = doc.get("topology", {})
        cfg = cls(
            n=int(doc["n"]),
            r=int(doc["r"]),
            field_bits=int(doc.get("field_bits", 8)),
            mapping=MappingSpec(
                kind=mapping.get("kind", "systematic_random"),
                seed=int(mapping.get("seed", 0)),
            ),
            inner=InnerCodeSpec(
                variant=inner.get("variant", "dense"),
                k=inner.get("k"),
                rho=inner.get("rho"),
                systematic=bool(inner.get("systematic", False)),
            ),
            topology=TopologySpec(
                type=topo.get("type", "broadcast"),
                links=tuple(LinkSpec(loss=float(l["loss"])) for l in topo.get("links", [])),
                relays=topo.get("relays", "recode"),
            ),
            receivers=tuple(
                ReceiverSpec(link=int(rx["link"]), decoder=rx.get("decoder", "outer"))
                for rx in doc.get("receivers", [])
            ),
            trials=int(doc["trials"]),
            seed=int(doc.get("seed", 0)),
            symbol_size=doc.get("symbol_size"),
            codec=doc.get("codec", "fulcrum"),
        )
        cfg.validate()
        return cfg


@dataclass
class SimResult:
    config: SimConfig
    receiver_histograms: list[dict[int, int]]
    session_histogram: dict[int, int]
    relay_ops: OpCounters

    @property
    def trials(self) -> int:
        return sum(self.session_histogram.values())

    def mean(self, receiver: int) -> float:
        return _hist_mean(self.receiver_histograms[receiver])

    def variance(self, receiver: int) -> float:
        return _hist_variance(self.receiver_histograms[receiver])

    def session_mean(self) -> float:
        return _hist_mean(self.session_histogram)

    def session_variance(self) -> float:
        return _hist_variance(self.session_histogram)

    def cdf(self, receiver: int | None = None) -> dict[int, float]:
        """Completion CDF keyed by slot count; receiver=None for the session."""
        hist = self.session_histogram if receiver is None else self.receiver_histograms[receiver]
        total = sum(hist.values())
        out: dict[int, float] = {}
        acc = 0
        for m in sorted(hist):
            acc += hist[m]
            out[m] = acc / total
        return out

    def to_csv_rows(self) -> list[tuple[str, int, int, float, float]]:
        rows: list[tuple[str, int, int, float, float]] = []
        for i, hist in enumerate(self.receiver_histograms):
            rows.extend(_hist_rows(f"r{i}", hist))
        rows.extend(_hist_rows("session", self.session_histogram))
        return rows


def _hist_rows(label: str, hist: dict[int, int]) -> list[tuple[str, int, int, float, float]]:
    total = sum(hist.values())
    rows = []
    acc = 0
    for m in sorted(hist):
        acc += hist[m]
        rows.append((label, m, hist[m], acc / total, hist[m] / total))
    return rows


def _hist_mean(hist: dict[int, int]) -> float:
    total = sum(hist.values())
    return sum(m * c for m, c in hist.items()) / total


def _hist_variance(hist: dict[int, int]) -> float:
    """Unbiased sample variance of the histogrammed completion counts."""
    total = sum(hist.values())
    if total < 2:
        return 0.0
    mean = _hist_mean(hist)
    ss = sum(c * (m - mean) ** 2 for m, c in hist.items())
    return ss / (total - 1)


# ---------------------------------------------------------------------------
# Codec adapters
# ---------------------------------------------------------------------------


class _FulcrumContext:
    def __init__(self, config: SimConfig):
        self.config = config
        field = GaloisField.of(config.field_bits)
        self.params = CodeParams(config.n, config.r, field)
        if config.mapping.kind == "systematic_random":
            self.mapping = build_systematic_mapping(self.params, config.mapping.seed)
        else:
            self.mapping = build_rs_mapping(self.params)
        self.symbol_size = config.symbol_size or field.element_bytes
        payload_rng = random.Random(splitmix64(config.seed))
        sources = [payload_rng.randbytes(self.symbol_size) for _ in range(config.n)]
        self.sources = sources
        self.expanded = outer_encode(self.mapping, sources)
        self.mode = SparsityMode(config.inner.variant, config.inner.k, config.inner.rho)

    def new_encoder(self, rng: random.Random) -> Callable[[], CodedPacket]:
        enc = InnerEncoder(
            self.params,
            self.expanded,
            mode=self.mode,
            systematic=self.config.inner.systematic,
            rng=rng,
        )
        return enc.next_packet

    def new_decoder(self, kind: str):
        cls = {"inner": InnerDecoder, "outer": OuterDecoder, "combined": CombinedDecoder}[kind]
        return _DecoderAdapter(cls(self.mapping))

    def recode(self, buffer: list, rng: random.Random, counters: OpCounters):
        return recode(buffer, rng, counters=counters)


class _DecoderAdapter:
    __slots__ = ("decoder",)

    def __init__(self, decoder):
        self.decoder = decoder

    def feed(self, packet) -> bool:
        return self.decoder.feed(packet) == COMPLETE


class _RlncGf2Decoder:
    """Plain binary RLNC receiver: rank n over n dimensions."""

    def __init__(self, n: int):
        self.n = n
        self.elim = Gf2Eliminator(n)

    def feed(self, packet) -> bool:
        vec, payload = packet
        self.elim.feed(vec, payload)
        return self.elim.rank == self.n


class _RlncGfqDecoder:
    """Plain high-field RLNC receiver."""

    def __init__(self, field: GaloisField, n: int, elems: int):
        self.n = n
        self.elim = GfqEliminator(field, n, n + elems)

    def feed(self, packet) -> bool:
        self.elim.feed(packet.copy())
        return self.elim.rank == self.n


class _RlncContext:
    """Baseline codec: uniform random coefficients over GF(2^field_bits),
    n dimensions, no expansion."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.n = config.n
        self.field = GaloisField.of(config.field_bits)
        self.binary = config.field_bits == 1
        self.symbol_size = config.symbol_size or self.field.element_bytes
        payload_rng = random.Random(splitmix64(config.seed))
        sources = [payload_rng.randbytes(self.symbol_size) for _ in range(config.n)]
        if self.binary:
            self.source_ints = [int.from_bytes(s, "little") for s in sources]
        else:
            self.source_mat = np.frombuffer(b"".join(sources), dtype=self.field.dtype).reshape(
                config.n, -1
            )
            self.elems = self.source_mat.shape[1]

    def new_encoder(self, rng: random.Random) -> Callable[[], object]:
        if self.binary:
            n, srcs = self.n, self.source_ints

            def next_binary():
                vec = 0
                while vec == 0:
                    vec = rng.getrandbits(n)
                acc = 0
                v = vec
                while v:
                    low = v & -v
                    acc ^= srcs[low.bit_length() - 1]
                    v ^= low
                return (vec, acc)

            return next_binary

        field, n, mat = self.field, self.n, self.source_mat

        def next_gfq():
            while True:
                coeffs = np.array([rng.randrange(field.order) for _ in range(n)], dtype=field.dtype)
                if coeffs.any():
                    break
            prods = field.EXP[field.LOG[coeffs][:, None] + field.LOG[mat]]
            payload = np.bitwise_xor.reduce(prods, axis=0)
            return np.concatenate([coeffs, payload])

        return next_gfq

    def new_decoder(self, kind: str):
        if self.binary:
            return _RlncGf2Decoder(self.n)
        return _RlncGfqDecoder(self.field, self.n, self.elems)

    def recode(self, buffer: list, rng: random.Random, counters: OpCounters):
        if self.binary:
            while True:
                mask = rng.getrandbits(len(buffer))
                if mask == 0:
                    continue
                vec = payload = 0
                m = mask
                while m:
                    low = m & -m
                    bvec, bpay = buffer[low.bit_length() - 1]
                    vec ^= bvec
                    payload ^= bpay
                    m ^= low
                    counters.gf2_row_xors += 1
                if vec:
                    return (vec, payload)
        field = self.field
        while True:
            coeffs = np.array(
                [rng.randrange(field.order) for _ in range(len(buffer))], dtype=field.dtype
            )
            if not coeffs.any():
                continue
            rows = np.stack(buffer)
            prods = field.EXP[field.LOG[coeffs][:, None] + field.LOG[rows]]
            out = np.bitwise_xor.reduce(prods, axis=0)
            counters.gfq_muls += int(np.count_nonzero((coeffs != 0) & (coeffs != 1))) * rows.shape[1]
            if out[: self.n].any():
                return out


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


def _make_context(config: SimConfig):
    return _FulcrumContext(config) if config.codec == "fulcrum" else _RlncContext(config)


def _run_trial(ctx, config: SimConfig, trial_index: int, relay_ops: OpCounters) -> list[int]:
    rng = random.Random(derive_seed(config.seed, trial_index))
    encode_next = ctx.new_encoder(rng)
    receivers = config.receivers
    decoders = [ctx.new_decoder(rx.decoder) for rx in receivers]
    losses = [l.loss for l in config.topology.links]
    done_slot = [0] * len(receivers)
    remaining = len(receivers)
    slot = 0

    if config.topology.type == "broadcast":
        while remaining:
            slot += 1
            if slot > _SLOT_LIMIT:
                raise RuntimeError("simulation did not converge within the slot limit")
            pkt = encode_next()
            for i, rx in enumerate(receivers):
                if done_slot[i]:
                    continue
                if rng.random() < losses[rx.link]:
                    continue
                if decoders[i].feed(pkt):
                    done_slot[i] = slot
                    remaining -= 1
        return done_slot

    # line topology
    rx_at_link: list[list[int]] = [[] for _ in losses]
    for i, rx in enumerate(receivers):
        rx_at_link[rx.link].append(i)
    buffers: list[list] = [[] for _ in range(len(losses) - 1)]
    relay_recode = config.topology.relays == "recode"
    while remaining:
        slot += 1
        if slot > _SLOT_LIMIT:
            raise RuntimeError("simulation did not converge within the slot limit")
        carried = encode_next()
        for li, loss in enumerate(losses):
            arrived = None
            if carried is not None and rng.random() >= loss:
                arrived = carried
            if arrived is not None:
                for i in rx_at_link[li]:
                    if not done_slot[i] and decoders[i].feed(arrived):
                        done_slot[i] = slot
                        remaining -= 1
            if li < len(losses) - 1:
                if relay_recode:
                    if arrived is not None:
                        buffers[li].append(arrived)
                    carried = (
                        ctx.recode(buffers[li], rng, relay_ops) if buffers[li] else None
                    )
                else:
                    carried = arrived
    return done_slot


def _run_range(config_doc: str, start: int, stop: int):
    config = SimConfig.from_json_dict(json.loads(config_doc))
    ctx = _make_context(config)
    nrx = len(config.receivers)
    rx_hists: list[Counter] = [Counter() for _ in range(nrx)]
    session_hist: Counter = Counter()
    relay_ops = OpCounters()
    for trial in range(start, stop):
        slots = _run_trial(ctx, config, trial, relay_ops)
        for i, s in enumerate(slots):
            rx_hists[i][s] += 1
        session_hist[max(slots)] += 1
    return rx_hists, session_hist, relay_ops


def run(config: SimConfig, jobs: int = 1) -> SimResult:
    """Run all trials; deterministic in (config, seed) regardless of jobs."""
    config.validate()
    doc = json.dumps(config.to_json_dict())
    if jobs <= 1 or config.trials < 4 * jobs:
        parts = [_run_range(doc, 0, config.trials)]
    else:
        bounds = [config.trials * i // jobs for i in range(jobs + 1)]
        ranges = [(bounds[i], bounds[i + 1]) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_range_star, [(doc, a, b) for a, b in ranges]))
    nrx = len(config.receivers)
    rx_hists: list[dict[int, int]] = [Counter() for _ in range(nrx)]
    session_hist: Counter = Counter()
    relay_ops = OpCounters()
    for part_rx, part_session, part_relay in parts:
        for i in range(nrx):
            rx_hists[i].update(part_rx[i])
        session_hist.update(part_session)
        relay_ops.gf2_row_xors += part_relay.gf2_row_xors
        relay_ops.gfq_muls += part_relay.gfq_muls
        relay_ops.gfq_adds += part_relay.gfq_adds
    return SimResult(
        config=config,
        receiver_histograms=[dict(h) for h in rx_hists],
        session_histogram=dict(session_hist),
        relay_ops=relay_ops,
    )


def _run_range_star(args):
    return _run_range(*args)


def baseline_rlnc(config: SimConfig, jobs: int = 1) -> SimResult:
    """Plain RLNC comparison run over GF(2) or GF(2^16) (or GF(2^8))."""
    if config.codec != "rlnc":
        config = replace(config, codec="rlnc", r=0)
    return run(config, jobs=jobs)
