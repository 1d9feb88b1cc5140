"""Lossless and feedforward lossy coding with symbolic dynamical sources."""

from .feedforward import (
    CodecParams,
    DistortionMeasure,
    FfwdCode,
    FunctionalRepresentation,
    JointPMF,
    LengthMismatch,
    NotStrictlyPositive,
    ProtocolViolation,
    StreamDecoder,
    block_distortion,
    bsc_joint,
    build_pm_dual,
    companion_search,
    decode,
    decode_stream,
    delta_interval,
    delta_interval_forward,
    encode,
    functional_representation,
    noiseless_joint,
    strong_typicality,
)
from .infotheory import entropy, exceeds_pow2, floor_pow2, log2_frac, mutual_information
from .intervals import (
    BoundaryPoint,
    GaussPartition,
    InvalidBranch,
    OpenInterval,
    OpenRectangle,
    PiecewiseAffineMap,
    UnitPartition,
    branch_preimage,
    compose_monotone,
    evaluate,
)
from .lossless import (
    InvalidDistribution,
    RepresentativeGrid,
    build_gauss,
    build_memoryless,
    decode_lossless,
    encode_lossless,
    fundamental_interval,
)
from .source import (
    FundamentalSet,
    SourceModel,
    State,
    fundamental_measure,
    fundamental_set,
    step,
    theta_projections,
    trajectory,
)
