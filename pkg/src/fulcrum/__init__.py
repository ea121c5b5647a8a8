"""Fulcrum network codes.

A concatenated code: a GF(2^h) outer precode expands n source packets
into n+r, and a GF(2) inner code carries and recodes them through the
network.  Receivers choose how much outer-field work to do (inner,
outer, or combined decoding).  The package also ships the closed-form
delay/overhead models and a Monte-Carlo topology simulator.
"""

from .analysis import (
    BoundReport,
    decode_cdf,
    decode_pmf,
    expected_receptions_outer,
    lemma2_bounds,
    overhead_bits,
    sparse_expected_bound,
    sparse_fixed_density_bound,
    sparse_innovation_bound,
    sparse_limit,
    variance_bound,
)
from .decoders import (
    COMPLETE,
    INNOVATIVE,
    REDUNDANT,
    CombinedDecoder,
    InnerDecoder,
    OuterDecoder,
)
from .fields import GaloisField, OpCounters, symbol_axpy, symbol_xor, validate_symbol_size
from .inner import (
    CodedPacket,
    InnerEncoder,
    PacketFormatError,
    SparsityMode,
    dense,
    deserialize_packet,
    fixed_density,
    fixed_nonzeros,
    recode,
    serialize_packet,
    wire_size,
)
from .outer import (
    CodeParams,
    CyclotomicCosets,
    OuterMapping,
    build_rs_mapping,
    build_systematic_mapping,
    cyclotomic_cosets,
    deserialize_mapping,
    outer_encode,
    rs_full_rank_guaranteed,
    serialize_mapping,
    subfield_subcode_basis,
    subfield_subcode_dimension,
)
from .simulator import (
    InnerCodeSpec,
    LinkSpec,
    MappingSpec,
    ReceiverSpec,
    SimConfig,
    SimResult,
    TopologySpec,
    baseline_rlnc,
    run,
)

__version__ = "0.1.0"
