"""Inner encoder, recoder, sparsity modes, and the packet wire format."""

import random

import pytest

from fulcrum.fields import GaloisField
from fulcrum.inner import (
    CodedPacket,
    InnerEncoder,
    PacketFormatError,
    deserialize_packet,
    fixed_density,
    fixed_nonzeros,
    recode,
    serialize_packet,
    wire_size,
    xor_selected,
)
from fulcrum.linalg import gf2_rank
from fulcrum.outer import CodeParams, build_systematic_mapping, outer_encode

GF256 = GaloisField.of(8)


def make_generation(n, r, symbol_size=8, seed=0):
    params = CodeParams(n, r, GF256)
    mapping = build_systematic_mapping(params, seed=seed)
    rng = random.Random(seed + 1)
    sources = [rng.randbytes(symbol_size) for _ in range(n)]
    return params, mapping, sources, outer_encode(mapping, sources)


class TestWireFormat:
    def test_wire_size_formula(self):
        # 12-byte header + packed vector + payload
        assert wire_size(8, 2, 1600) == 12 + 2 + 1600 == 1614
        assert wire_size(1, 0, 1) == 12 + 1 + 1

    def test_roundtrip_random_packets(self):
        rng = random.Random(42)
        for _ in range(200):
            n = rng.randrange(1, 40)
            r = rng.randrange(0, 6)
            size = rng.randrange(1, 33)
            vec = rng.getrandbits(n + r)
            pkt = CodedPacket(rng.getrandbits(32), n, r, size, vec, rng.randbytes(size))
            data = serialize_packet(pkt)
            assert len(data) == wire_size(n, r, size)
            assert deserialize_packet(data) == pkt

    def test_header_layout(self):
        pkt = CodedPacket(0x01020304, 0x0605, 0x07, 0x0908, 0b1, b"\xaa" * 0x0908)
        data = serialize_packet(pkt)
        assert data[0:2] == b"FL"
        assert data[2] == 1
        assert data[3:7] == bytes([0x04, 0x03, 0x02, 0x01])  # little-endian id
        assert data[7:9] == bytes([0x05, 0x06])
        assert data[9] == 0x07
        assert data[10:12] == bytes([0x08, 0x09])

    def test_vector_bit_packing_lsb_first(self):
        # lambda_1 lands in the LSB of the first vector byte
        pkt = CodedPacket(0, 9, 0, 1, 0b100000001, b"\x00")
        data = serialize_packet(pkt)
        assert data[12] == 0x01 and data[13] == 0x01

    def test_bad_magic(self):
        pkt = serialize_packet(CodedPacket(0, 2, 0, 1, 0b11, b"\x00"))
        with pytest.raises(PacketFormatError) as exc:
            deserialize_packet(b"XX" + pkt[2:])
        assert exc.value.offset == 0

    def test_bad_version(self):
        pkt = bytearray(serialize_packet(CodedPacket(0, 2, 0, 1, 0b11, b"\x00")))
        pkt[2] = 9
        with pytest.raises(PacketFormatError) as exc:
            deserialize_packet(bytes(pkt))
        assert exc.value.offset == 2

    def test_truncated(self):
        pkt = serialize_packet(CodedPacket(0, 2, 0, 4, 0b11, b"\x00" * 4))
        with pytest.raises(PacketFormatError):
            deserialize_packet(pkt[:5])
        with pytest.raises(PacketFormatError):
            deserialize_packet(pkt[:-1])

    def test_nonzero_padding_bits_rejected(self):
        pkt = bytearray(serialize_packet(CodedPacket(0, 2, 0, 1, 0b11, b"\x00")))
        pkt[12] |= 0x04  # bit 2 is beyond n+r = 2
        with pytest.raises(PacketFormatError):
            deserialize_packet(bytes(pkt))

    def test_packet_validation(self):
        with pytest.raises(ValueError):
            CodedPacket(0, 2, 0, 1, 0b100, b"\x00")  # vector too wide
        with pytest.raises(ValueError):
            CodedPacket(0, 2, 0, 2, 0b11, b"\x00")  # payload length mismatch
        with pytest.raises(ValueError):
            CodedPacket(1 << 32, 2, 0, 1, 0b11, b"\x00")


class TestInnerEncoder:
    def test_systematic_phase_emits_unit_vectors_in_order(self):
        params, mapping, sources, expanded = make_generation(8, 2)
        enc = InnerEncoder(params, expanded, rng=random.Random(0))
        for t in range(10):
            pkt = enc.next_packet()
            assert pkt.vector == 1 << t
            assert pkt.payload == expanded[t]
        coded = enc.next_packet()
        assert bin(coded.vector).count("1") != 1 or coded.payload == expanded[
            coded.vector.bit_length() - 1
        ]

    def test_payload_is_xor_of_selected_expanded(self):
        params, mapping, sources, expanded = make_generation(6, 3)
        enc = InnerEncoder(params, expanded, systematic=False, rng=random.Random(9))
        ints = [int.from_bytes(s, "little") for s in expanded]
        for _ in range(50):
            pkt = enc.next_packet()
            assert pkt.vector != 0
            assert int.from_bytes(pkt.payload, "little") == xor_selected(ints, pkt.vector)

    def test_dense_mean_popcount(self):
        params, mapping, sources, expanded = make_generation(12, 4)
        enc = InnerEncoder(params, expanded, systematic=False, rng=random.Random(3))
        total = sum(bin(enc.next_packet().vector).count("1") for _ in range(4000))
        assert abs(total / 4000 - 8.0) < 0.3  # E = (n+r)/2, sigma_mean = 0.032

    def test_fixed_nonzeros_exact_popcount(self):
        params, mapping, sources, expanded = make_generation(7, 3)
        enc = InnerEncoder(
            params, expanded, mode=fixed_nonzeros(3), systematic=False, rng=random.Random(4)
        )
        for _ in range(200):
            assert bin(enc.next_packet().vector).count("1") == 3

    def test_single_dimension_always_one(self):
        params, mapping, sources, expanded = make_generation(1, 0)
        enc = InnerEncoder(params, expanded, systematic=False, rng=random.Random(5))
        for _ in range(20):
            assert enc.next_packet().vector == 1

    def test_mode_validation(self):
        params, mapping, sources, expanded = make_generation(4, 2)
        with pytest.raises(ValueError):
            InnerEncoder(params, expanded, mode=fixed_nonzeros(7))
        with pytest.raises(ValueError):
            InnerEncoder(params, expanded, mode=fixed_nonzeros(0))
        with pytest.raises(ValueError):
            InnerEncoder(params, expanded, mode=fixed_density(0.6))
        with pytest.raises(ValueError):
            InnerEncoder(params, expanded, mode=fixed_density(0.0))
        InnerEncoder(params, expanded, mode=fixed_density(0.5))

    def test_symbol_count_mismatch(self):
        params, mapping, sources, expanded = make_generation(4, 2)
        with pytest.raises(ValueError):
            InnerEncoder(params, expanded[:-1])

    def test_fixed_density_honors_rho(self):
        params, mapping, sources, expanded = make_generation(16, 4)
        enc = InnerEncoder(
            params, expanded, mode=fixed_density(0.1), systematic=False, rng=random.Random(6)
        )
        mean = sum(bin(enc.next_packet().vector).count("1") for _ in range(3000)) / 3000
        # conditioned on nonzero, the mean popcount is slightly above 20*0.1
        assert 1.8 < mean < 2.5


class TestRecode:
    def test_single_packet_buffer(self):
        params, mapping, sources, expanded = make_generation(4, 1)
        enc = InnerEncoder(params, expanded, rng=random.Random(0))
        pkt = enc.next_packet()
        out = recode([pkt], random.Random(1))
        assert out.vector == pkt.vector and out.payload == pkt.payload

    def test_pairwise_xor(self):
        params, mapping, sources, expanded = make_generation(4, 0)
        enc = InnerEncoder(params, expanded, rng=random.Random(0))
        p1, p2 = enc.next_packet(), enc.next_packet()

        class BothRng:
            def getrandbits(self, k):
                return 0b11

        out = recode([p1, p2], BothRng())
        assert out.vector == 0b0011
        want = bytes(a ^ b for a, b in zip(p1.payload, p2.payload))
        assert out.payload == want

    def test_output_stays_in_span(self):
        params, mapping, sources, expanded = make_generation(6, 2)
        enc = InnerEncoder(params, expanded, systematic=False, rng=random.Random(7))
        rng = random.Random(8)
        buffer = [enc.next_packet() for _ in range(5)]
        vecs = [p.vector for p in buffer]
        base = gf2_rank(vecs)
        for _ in range(50):
            out = recode(buffer, rng)
            assert out.vector != 0
            assert gf2_rank(vecs + [out.vector]) == base

    def test_payload_consistency_through_recode(self):
        params, mapping, sources, expanded = make_generation(5, 2)
        ints = [int.from_bytes(s, "little") for s in expanded]
        enc = InnerEncoder(params, expanded, systematic=False, rng=random.Random(10))
        rng = random.Random(11)
        buffer = [enc.next_packet() for _ in range(6)]
        for _ in range(50):
            out = recode(buffer, rng)
            assert int.from_bytes(out.payload, "little") == xor_selected(ints, out.vector)

    def test_empty_buffer_rejected(self):
        with pytest.raises(ValueError):
            recode([], random.Random(0))

    def test_mixed_generations_rejected(self):
        params, mapping, sources, expanded = make_generation(3, 1)
        a = InnerEncoder(params, expanded, rng=random.Random(0), generation_id=0).next_packet()
        b = InnerEncoder(params, expanded, rng=random.Random(0), generation_id=1).next_packet()
        with pytest.raises(ValueError):
            recode([a, b], random.Random(1))


class TestInnovationBound:
    def test_sparse_innovation_frequency_meets_bound(self):
        # receiver holding i=10 of 20 dimensions, density-0.2 packets
        from fulcrum.analysis import sparse_innovation_bound

        dims, i, rho, trials = 20, 10, 0.2, 10_000
        rng = random.Random(123)
        mode = fixed_density(rho)
        hits = 0
        basis: list[int] = []
        while len(basis) < i:
            v = mode.draw(dims, rng)
            for b in basis:
                v = min(v, v ^ b)
            if v:
                basis.append(v)
                basis.sort(reverse=True)
        for _ in range(trials):
            v = mode.draw(dims, rng)
            for b in basis:
                v = min(v, v ^ b)
            if v:
                hits += 1
        p_hat = hits / trials
        bound = sparse_innovation_bound(dims, i, rho)
        sigma = (bound * (1 - bound) / trials) ** 0.5
        assert p_hat >= bound - 3 * sigma
