"""Lossless block coding by reversing source trajectories.

The encoder pulls (0, 1) back through the branches selected by ``y`` to get
the fundamental interval, then sends the index of the first equal-size grid
cell inside it.  The decoder runs the source from that cell's midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import NamedTuple, Sequence

from .infotheory import floor_pow2
from .intervals import (
    BoundaryPoint,
    OpenInterval,
    PiecewiseAffineMap,
    UnitPartition,
    frac,
)
from .source import SourceModel, State, gauss_model, trajectory


class InvalidDistribution(ValueError):
    pass


def check_distribution(p: Sequence) -> list[Fraction]:
    p = [frac(v) for v in p]
    if not p or any(v <= 0 for v in p) or sum(p) != 1:
        raise InvalidDistribution(f"need strictly positive weights summing to 1, got {p}")
    return p


@dataclass(frozen=True)
class RepresentativeGrid:
    """``M = floor(2**(n*rate))`` equal cells of (0, 1), numbered 1..M."""

    n: int
    rate: Fraction
    size: int = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rate", frac(self.rate))
        if self.n < 1 or self.rate <= 0:
            raise ValueError("grid needs n >= 1 and a positive rate")
        object.__setattr__(self, "size", floor_pow2(self.n * self.rate))

    def cell(self, m: int) -> OpenInterval:
        return OpenInterval(Fraction(m - 1, self.size), Fraction(m, self.size))

    def midpoint(self, m: int) -> Fraction:
        return Fraction(2 * m - 1, 2 * self.size)

    def contained_range(self, interval: OpenInterval) -> range:
        """Indices m whose closed cell lies inside ``interval``'s closure."""
        M = self.size
        first = ceil(interval.lo * M) + 1
        last = floor(interval.hi * M)
        return range(first, max(first, last + 1))


class LosslessCode(NamedTuple):
    m: int
    success: bool


def build_memoryless(p_y: Sequence) -> SourceModel:
    """i.i.d. source whose fundamental intervals are arithmetic-coding intervals."""
    p_y = check_distribution(p_y)
    theta = UnitPartition.from_lengths(p_y)
    expand = PiecewiseAffineMap.expanding_from_partition(theta)
    single = UnitPartition([0, 1])
    return SourceModel(theta, single, [[i] for i in range(len(p_y))], [expand] * len(p_y),
                       PiecewiseAffineMap.expanding_from_partition(single))


def build_gauss() -> SourceModel:
    return gauss_model()


def _symbol_cell(model: SourceModel, y: int) -> int:
    if model.kind == "gauss":
        return y
    if model.z_size != 1:
        raise ValueError("fundamental intervals need a one-dimensional source")
    xs = [x for x in range(model.x_size) if model.xi[x][0] == y]
    if len(xs) != 1:
        raise ValueError(f"symbol {y} must come from exactly one theta cell")
    return xs[0]


def fundamental_interval(model: SourceModel, y: Sequence[int],
                         epsilon: Fraction = Fraction(0)) -> OpenInterval | None:
    """Reverse the trajectory of ``(epsilon, 1-epsilon)`` along ``y``.

    With the default ``epsilon=0`` this is the fundamental interval.  Returns
    None when ``y`` cannot be emitted.
    """
    iv = OpenInterval(epsilon, 1 - epsilon)
    for yk in reversed(y):
        iv = model.theta_preimage(yk, _symbol_cell(model, yk), iv)
        if iv is None:
            return None
    return iv


def encode_lossless(model: SourceModel, y: Sequence[int], grid: RepresentativeGrid,
                    epsilon: Fraction = Fraction(0)) -> LosslessCode:
    """Least m whose grid cell lies in the fundamental interval; (1, False) if none."""
    if len(y) != grid.n:
        raise ValueError("grid block length does not match the sequence")
    iv = fundamental_interval(model, y, epsilon)
    candidates = grid.contained_range(iv) if iv is not None else range(0)
    if not candidates:
        return LosslessCode(1, False)
    return LosslessCode(candidates[0], True)


def nudged_start(model: SourceModel, grid: RepresentativeGrid, m: int, n: int):
    """Midpoint of cell m, moved by 1/(4MK) for the least K that avoids boundaries."""
    mid = grid.midpoint(m)
    phi = model.phi_partition[0].midpoint
    K = 0
    while True:
        theta = mid if K == 0 else mid + Fraction(1, 4 * grid.size * K)
        try:
            return trajectory(model, State(theta, phi), n)
        except BoundaryPoint:
            K += 1


def decode_lossless(model: SourceModel, m: int, grid: RepresentativeGrid, n: int) -> tuple:
    if not 1 <= m <= grid.size:
        raise ValueError(f"index {m} outside 1..{grid.size}")
    if model.z_size != 1:
        raise ValueError("lossless decoding needs a one-dimensional source")
    return nudged_start(model, grid, m, n).y


def cf_convergents(y: Sequence[int]) -> tuple[int, int]:
    """``(p, q)`` with ``p/q = [0; y1, ..., yn]`` in lowest terms."""
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    for a in y:
        if a < 1:
            raise ValueError("continued-fraction digits must be >= 1")
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q
