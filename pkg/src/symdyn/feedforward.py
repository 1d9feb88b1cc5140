"""Lossy source coding with feedforward for memoryless sources.

The source model couples a reconstruction ``X`` with the source ``Y`` through
a test channel ``P_{X|Y}``.  The encoder describes only the theta half of an
initial state; the decoder, knowing past source symbols, tracks theta
forward and outputs its cells as reconstructions.
"""

from __future__ import annotations

import random
import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import ceil
from typing import NamedTuple, Sequence

from .intervals import (
    BoundaryPoint,
    OpenInterval,
    PiecewiseAffineMap,
    UnitPartition,
    branch_preimage,
    compose_monotone,
    evaluate,
    frac,
)
from .lossless import InvalidDistribution, RepresentativeGrid
from .source import SourceModel


class NotStrictlyPositive(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class ProtocolViolation(RuntimeError):
    """The decoder was fed y_k before it emitted its estimate for step k."""


class JointPMF:
    """Exact joint table ``p[x][y]``."""

    def __init__(self, table):
        self.table = tuple(tuple(frac(v) for v in row) for row in table)
        if len({len(row) for row in self.table}) != 1:
            raise InvalidDistribution("ragged probability table")
        flat = [v for row in self.table for v in row]
        if any(v < 0 for v in flat) or sum(flat) != 1:
            raise InvalidDistribution("table entries must be nonnegative and sum to 1")

    @classmethod
    def from_channel(cls, p_y: Sequence, p_x_given_y: Sequence[Sequence]) -> JointPMF:
        """``P_Y`` times a channel given as rows ``p_x_given_y[y][x]``."""
        p_y = [frac(v) for v in p_y]
        rows = [[frac(v) for v in row] for row in p_x_given_y]
        if len(rows) != len(p_y) or any(sum(row) != 1 for row in rows):
            raise InvalidDistribution("channel rows must be distributions, one per y")
        nx = len(rows[0])
        return cls([[p_y[y] * rows[y][x] for y in range(len(p_y))] for x in range(nx)])

    @classmethod
    def from_test_channel(cls, p_x: Sequence, p_y_given_x: Sequence[Sequence]) -> JointPMF:
        """``P_X`` times a channel given as rows ``p_y_given_x[x][y]``."""
        p_x = [frac(v) for v in p_x]
        rows = [[frac(v) for v in row] for row in p_y_given_x]
        if len(rows) != len(p_x) or any(sum(row) != 1 for row in rows):
            raise InvalidDistribution("channel rows must be distributions, one per x")
        return cls([[p_x[x] * v for v in rows[x]] for x in range(len(p_x))])

    @property
    def x_size(self) -> int:
        return len(self.table)

    @property
    def y_size(self) -> int:
        return len(self.table[0])

    @property
    def p_x(self) -> list[Fraction]:
        return [sum(row) for row in self.table]

    @property
    def p_y(self) -> list[Fraction]:
        return [sum(col) for col in zip(*self.table)]

    def y_given_x(self, x: int) -> list[Fraction]:
        px = sum(self.table[x])
        return [v / px for v in self.table[x]]

    def x_given_y(self, y: int) -> list[Fraction]:
        py = self.p_y[y]
        return [row[y] / py for row in self.table]

    def cdf_x_given_y(self, y: int) -> list[Fraction]:
        """``[0, F(0|y), F(1|y), ..., 1]``."""
        out = [Fraction(0)]
        for v in self.x_given_y(y):
            out.append(out[-1] + v)
        return out

    def is_strictly_positive(self) -> bool:
        return all(v > 0 for row in self.table for v in row)

    def mixed(self, eta: Fraction) -> JointPMF:
        """Replace ``P_{X|Y}`` by ``(1-eta) P_{X|Y} + eta * uniform``."""
        eta = frac(eta)
        nx = self.x_size
        rows = [[(1 - eta) * p + eta / nx for p in self.x_given_y(y)] for y in range(self.y_size)]
        return JointPMF.from_channel(self.p_y, rows)

    def __eq__(self, other):
        return isinstance(other, JointPMF) and self.table == other.table

    def __repr__(self):
        return f"JointPMF({[[str(v) for v in row] for row in self.table]})"


def bsc_joint(d: Fraction) -> JointPMF:
    """Uniform binary source with a BSC(d) test channel (the Hamming optimum)."""
    d = frac(d)
    return JointPMF.from_channel([Fraction(1, 2)] * 2, [[1 - d, d], [d, 1 - d]])


def noiseless_joint(p_y: Sequence) -> JointPMF:
    p_y = [frac(v) for v in p_y]
    k = len(p_y)
    return JointPMF.from_channel(p_y, [[int(x == y) for x in range(k)] for y in range(k)])


@dataclass(frozen=True)
class FunctionalRepresentation:
    """``Y = xi[X][Z]`` with ``Z ~ p_z`` independent of ``X``."""

    p_z: tuple
    xi: tuple

    @property
    def z_size(self) -> int:
        return len(self.p_z)

    def conditional(self, x: int, y: int) -> Fraction:
        return sum((p for p, v in zip(self.p_z, self.xi[x]) if v == y), Fraction(0))


@dataclass(frozen=True)
class DistortionMeasure:
    table: tuple

    def __post_init__(self):
        table = tuple(tuple(frac(v) for v in row) for row in self.table)
        if any(v < 0 for row in table for v in row):
            raise ValueError("distortion must be nonnegative")
        object.__setattr__(self, "table", table)

    @classmethod
    def hamming(cls, k: int) -> DistortionMeasure:
        return cls([[int(x != y) for y in range(k)] for x in range(k)])

    @property
    def d_max(self) -> Fraction:
        return max(v for row in self.table for v in row)

    def __call__(self, x: int, y: int) -> Fraction:
        return self.table[x][y]


@dataclass(frozen=True)
class CodecParams:
    n: int
    rate: Fraction
    epsilon: Fraction = Fraction(1, 20)
    delta: Fraction = Fraction(1, 20)
    budget: int = 4096
    order: str = "least"
    seed: int = 0
    grid: RepresentativeGrid = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        for name in ("rate", "epsilon", "delta"):
            object.__setattr__(self, name, frac(getattr(self, name)))
        if not (0 < self.epsilon < Fraction(1, 2)) or self.delta <= 0 or self.rate <= 0:
            raise ValueError("need rate > 0, 0 < epsilon < 1/2 and delta > 0")
        if self.budget < 1:
            raise ValueError("search budget must be at least 1")
        if self.order not in ("least", "random"):
            raise ValueError(f"unknown scan order {self.order!r}")
        object.__setattr__(self, "grid", RepresentativeGrid(self.n, self.rate))


# -- model construction ------------------------------------------------------


def _band_ends(row: Sequence[Fraction], order: Sequence[int]) -> list[Fraction]:
    ends, acc = [], Fraction(0)
    for y in order:
        acc += row[y]
        ends.append(acc)
    return ends


def functional_representation(pmf: JointPMF, compact: bool = True) -> FunctionalRepresentation:
    """Stack each conditional ``P_{Y|X=x}`` as bands on (0, 1) and refine.

    Row 0 keeps the natural symbol order.  With ``compact`` each later row
    takes the band order (first in lexicographic order among ties) that adds
    the fewest new cut points.
    """
    if any(p == 0 for p in pmf.p_x):
        raise InvalidDistribution("P_X must be strictly positive")
    ny = pmf.y_size
    identity = tuple(range(ny))
    cuts: set[Fraction] = set()
    orders = []
    for x in range(pmf.x_size):
        row = pmf.y_given_x(x)
        order = identity
        if compact and x > 0:
            order = min(permutations(range(ny)),
                        key=lambda o: (len(cuts.union(_band_ends(row, o))), o))
        orders.append(order)
        cuts.update(_band_ends(row, order))
    points = sorted(cuts | {Fraction(0), Fraction(1)})
    p_z = tuple(b - a for a, b in zip(points, points[1:]))
    xi = []
    for x, order in enumerate(orders):
        ends = _band_ends(pmf.y_given_x(x), order)
        row_xi = []
        for a, b in zip(points, points[1:]):
            mid = (a + b) / 2
            row_xi.append(next(y for y, e in zip(order, ends) if mid < e))
        xi.append(tuple(row_xi))
    return FunctionalRepresentation(p_z, tuple(xi))


def build_pm_dual(pmf: JointPMF, fr: FunctionalRepresentation | None = None,
                  strict: bool = True, mix: Fraction | None = None) -> SourceModel:
    """The posterior-matching dual source for ``pmf``.

    ``T0(., k)`` interpolates ``F_{X|Y}(. | k)`` at the right edges of the
    theta cells; ``T1`` stretches each phi cell onto (0, 1).  ``strict``
    rejects tables with zeros; ``mix`` first blends the channel with the
    uniform one.
    """
    if mix is not None:
        pmf = pmf.mixed(mix)
    if strict and not pmf.is_strictly_positive():
        raise NotStrictlyPositive("P_XY has zero entries; pass mix= or strict=False")
    if fr is None:
        fr = functional_representation(pmf)
    theta = UnitPartition.from_lengths(pmf.p_x)
    phi = UnitPartition.from_lengths(fr.p_z)
    t0 = [PiecewiseAffineMap.from_points(theta.endpoints, pmf.cdf_x_given_y(k))
          for k in range(pmf.y_size)]
    model = SourceModel(theta, phi, fr.xi, t0, PiecewiseAffineMap.expanding_from_partition(phi))
    point = constant_t0_point(model)
    if point is not None:
        warnings.warn(f"T0(theta, .) is constant in the source symbol at theta={point}",
                      stacklevel=2)
    return model


def constant_t0_point(model: SourceModel) -> Fraction | None:
    """An interior theta at which every ``T0(theta, k)`` agrees, if any."""
    maps = model.t0_family
    if len(maps) < 2:
        return None
    first = maps[0]
    candidates = set(first.breakpoints[1:-1])
    for i, p in enumerate(first.pieces):
        for other in maps[1:]:
            q = other.pieces[i]
            if p.slope != q.slope:
                theta = (q.intercept - p.intercept) / (p.slope - q.slope)
                if theta in p.domain:
                    candidates.add(theta)
            elif p.intercept == q.intercept:
                candidates.add(p.domain.midpoint)

    def value(fmap, theta):
        i = bisect_right(fmap.breakpoints, theta) - 1
        return fmap.pieces[min(i, len(fmap.pieces) - 1)](theta)

    for theta in sorted(candidates):
        if len({value(m, theta) for m in maps}) == 1:
            return theta
    return None


# -- the Delta interval ------------------------------------------------------


def delta_interval(model: SourceModel, y: Sequence[int], epsilon: Fraction) -> OpenInterval:
    """Pull ``(epsilon, 1-epsilon)`` back through ``T0(., y_n)``, ..., ``T0(., y_1)``."""
    if not model.is_monotone():
        raise ValueError("Delta intervals need monotone T0 maps")
    iv = OpenInterval(epsilon, 1 - epsilon)
    for yk in reversed(y):
        iv = branch_preimage(model.t0(yk), iv)
    return iv


def forward_map(model: SourceModel, y: Sequence[int]) -> PiecewiseAffineMap:
    """``theta_1 -> theta_{n+1}`` as one canonical piecewise-affine map."""
    fmap = PiecewiseAffineMap.identity()
    for yk in y:
        fmap = compose_monotone(model.t0(yk), fmap)
    return fmap


def delta_interval_forward(model: SourceModel, y: Sequence[int], epsilon: Fraction) -> OpenInterval:
    """The thetas whose forward trajectory lands in ``(epsilon, 1-epsilon)``."""
    fmap = forward_map(model, y)
    lo = hi = None
    for p in fmap.pieces:
        a, b = p.image_ends
        if lo is None and b > epsilon:
            lo = p.domain.lo if a >= epsilon else (epsilon - p.intercept) / p.slope
        if hi is None and b >= 1 - epsilon:
            hi = p.domain.lo if a >= 1 - epsilon else (1 - epsilon - p.intercept) / p.slope
    return OpenInterval(lo, hi)


class ThetaPiece(NamedTuple):
    theta: OpenInterval
    x: tuple


def delta_pieces(model: SourceModel, y: Sequence[int], start: OpenInterval) -> list[ThetaPiece]:
    """Split ``start`` into maximal subintervals sharing one x-sequence.

    Each piece tracks the affine map ``theta_1 -> theta_k``; a piece is cut
    wherever its image crosses a theta-cell endpoint or a T0 breakpoint.
    Points on cuts are boundary points and belong to no piece.
    """
    cell_ends = model.theta_partition.endpoints
    live = [(start.lo, start.hi, Fraction(1), Fraction(0), [])]
    for yk in y:
        fmap = model.t0(yk)
        cuts = sorted(set(cell_ends[1:-1]) | set(fmap.breakpoints[1:-1]))
        nxt = []
        for lo, hi, s, c, xs in live:
            a, b = s * lo + c, s * hi + c
            if s == 0:
                if model.theta_partition.is_boundary(a) or a in fmap.breakpoints:
                    continue
                parts = [(lo, hi, a)]
            else:
                inner = [u for u in cuts if a < u < b]
                bounds = [lo] + [(u - c) / s for u in inner] + [hi]
                images = [a] + inner + [b]
                parts = [(bounds[i], bounds[i + 1], (images[i] + images[i + 1]) / 2)
                         for i in range(len(inner) + 1)]
            for j, (l, h, probe) in enumerate(parts):
                x = model.theta_partition.index(probe)
                piece = fmap.pieces[fmap.piece_index(probe)]
                xs_new = xs if j == len(parts) - 1 else list(xs)
                xs_new.append(x)
                nxt.append((l, h, piece.slope * s, piece.slope * c + piece.intercept, xs_new))
        live = nxt
    return [ThetaPiece(OpenInterval(lo, hi), tuple(xs)) for lo, hi, _, _, xs in live]


# -- typicality and the companion search -------------------------------------


def product_table(p_x: Sequence[Fraction], p_z: Sequence[Fraction]) -> list[list[Fraction]]:
    return [[a * b for b in p_z] for a in p_x]


def strong_typicality(x: Sequence[int], z: Sequence[int], p_xz, delta: Fraction) -> bool:
    """Sup-norm distance between the joint type of (x, z) and ``p_xz`` is <= delta."""
    if len(x) != len(z):
        raise LengthMismatch(f"{len(x)} != {len(z)}")
    n = len(x)
    counts: dict = {}
    for pair in zip(x, z):
        counts[pair] = counts.get(pair, 0) + 1
    bound = n * frac(delta)
    return all(abs(counts.get((a, b), 0) - n * p) <= bound
               for a, row in enumerate(p_xz) for b, p in enumerate(row))


def typical_companion(model: SourceModel, x: Sequence[int], y: Sequence[int],
                      delta: Fraction) -> tuple | None:
    """A z-sequence with ``xi[x_k][z_k] == y_k`` that is jointly typical with x.

    Positions with the same (x, y) share one feasible z set, and each (x, z)
    cell is fed by exactly one such group, so every group can be allocated on
    its own.  Handing units one at a time to the z with the largest remaining
    deficit minimises the group's worst deviation, which makes the result
    exact: None is returned only when no typical companion exists.
    """
    n = len(x)
    p_x, p_z = model.p_x, model.p_z
    groups: dict = {}
    for k, key in enumerate(zip(x, y)):
        groups.setdefault(key, []).append(k)
    bound = n * frac(delta)
    z = [None] * n
    for xv in range(model.x_size):
        for yv in range(model.y_size):
            feasible = model.feasible(xv, yv)
            positions = groups.get((xv, yv), [])
            if positions and not feasible:
                return None
            target = {zv: n * p_x[xv] * p_z[zv] for zv in feasible}
            count = dict.fromkeys(feasible, 0)
            for _ in positions:
                best = max(feasible, key=lambda zv: (target[zv] - count[zv], -zv))
                count[best] += 1
            if any(abs(count[zv] - target[zv]) > bound for zv in feasible):
                return None
            it = iter(positions)
            for zv in feasible:
                for _ in range(count[zv]):
                    z[next(it)] = zv
    return tuple(z)


def drive_theta(model: SourceModel, theta: Fraction, y: Sequence[int]) -> tuple[list, tuple]:
    """Thetas and x-cells visited from ``theta`` when driven by ``y``."""
    thetas, xs = [theta], []
    for k, yk in enumerate(y):
        try:
            xs.append(model.theta_partition.index(theta))
            theta = evaluate(model.t0(yk), theta)
        except BoundaryPoint as exc:
            raise BoundaryPoint(exc.point, step=k + 1) from None
        thetas.append(theta)
    return thetas, tuple(xs)


def companion_search(model: SourceModel, a_m: Fraction, y: Sequence[int],
                     delta: Fraction) -> tuple | None:
    """Find z^n making ``(x^n(a_m), z^n)`` typical, or None."""
    _, xs = drive_theta(model, frac(a_m), y)
    return typical_companion(model, xs, y, delta)


def phi_cylinder(model: SourceModel, z: Sequence[int]) -> OpenInterval:
    """Initial phis whose z-sequence starts with ``z``."""
    iv = OpenInterval.unit()
    for zk in reversed(z):
        iv = branch_preimage(model.t1, iv, zk)
    return iv


def p_xz(model: SourceModel) -> list[list[Fraction]]:
    return product_table(model.p_x, model.p_z)


# -- encoder and decoder -----------------------------------------------------


class FfwdCode(NamedTuple):
    m: int
    success: bool
    z: tuple | None
    x: tuple | None
    attempts: int
    delta: OpenInterval


def _candidate_order(params: CodecParams, candidates: range):
    if params.order == "least":
        return candidates
    # len() of a range overflows past 2**63 cells
    count = candidates.stop - candidates.start
    rng = random.Random(params.seed)
    if count <= 4 * params.budget:
        picks = rng.sample(range(count), min(params.budget, count))
    else:
        seen: dict = {}
        while len(seen) < params.budget:
            seen.setdefault(rng.randrange(count), None)
        picks = list(seen)
    return [candidates.start + i for i in picks]


def encode(model: SourceModel, y: Sequence[int], params: CodecParams) -> FfwdCode:
    """Least (or seeded-random) grid midpoint in Delta with a typical companion."""
    y = tuple(y)
    if len(y) != params.n:
        raise LengthMismatch(f"block length {len(y)} != {params.n}")
    grid = params.grid
    delta = delta_interval(model, y, params.epsilon)
    candidates = grid.contained_range(delta)
    if not candidates:
        return FfwdCode(1, False, None, None, 0, delta)
    pieces = delta_pieces(model, y, delta)
    starts = [p.theta.lo for p in pieces]
    cache: dict = {}
    attempts = 0
    order = _candidate_order(params, candidates)
    total = order.stop - order.start if isinstance(order, range) else len(order)
    idx = 0
    while idx < total and attempts < params.budget:
        m = order[idx]
        a = grid.midpoint(m)
        i = bisect_right(starts, a) - 1
        inside = i >= 0 and a in pieces[i].theta
        if not inside:
            # the midpoint sits on a cut; judge the nudged point the decoder will use
            xs = decode(model, m, params, y)
            z = typical_companion(model, xs, y, params.delta)
            if z is not None:
                return FfwdCode(m, True, z, xs, attempts + 1, delta)
            attempts += 1
            idx += 1
            continue
        if i not in cache:
            cache[i] = typical_companion(model, pieces[i].x, y, params.delta)
        if cache[i] is not None:
            return FfwdCode(m, True, cache[i], pieces[i].x, attempts + 1, delta)
        if params.order == "least":
            # every midpoint left of the piece's end shares its x-sequence
            last = min(ceil(grid.size * pieces[i].theta.hi + Fraction(1, 2)) - 1, candidates[-1])
            skip = min(last - m + 1, params.budget - attempts)
            attempts += skip
            idx += skip
        else:
            attempts += 1
            idx += 1
    return FfwdCode(1, False, None, None, attempts, delta)


class StreamDecoder:
    """Per-block decoder enforcing emit-before-feed at every step.

    Holds mutable state; confine each instance to one thread of control.
    """

    def __init__(self, model: SourceModel, m: int, grid: RepresentativeGrid, n: int):
        if not 1 <= m <= grid.size:
            raise ValueError(f"index {m} outside 1..{grid.size}")
        self.model = model
        self.m = m
        self.grid = grid
        self.n = n
        self.theta = grid.midpoint(m)
        self.k = 0
        self.fed: list[int] = []
        self.emitted: list[int] = []

    @property
    def done(self) -> bool:
        return len(self.fed) == self.n

    def emit(self) -> int:
        if len(self.emitted) > len(self.fed):
            raise ProtocolViolation(f"estimate for step {len(self.emitted)} already emitted")
        if self.done:
            raise ProtocolViolation("block already decoded")
        try:
            x = self.model.theta_partition.index(self.theta)
        except BoundaryPoint:
            self._renudge()
            x = self.model.theta_partition.index(self.theta)
        self.emitted.append(x)
        return x

    def feed(self, y: int) -> None:
        if len(self.emitted) <= len(self.fed):
            raise ProtocolViolation(f"y_{len(self.fed) + 1} fed before its estimate was emitted")
        self.theta = evaluate(self.model.t0(y), self.theta)
        self.fed.append(y)

    def _renudge(self):
        # replay from the midpoint moved by 1/(4MK), least K clearing every boundary so far
        mid = self.grid.midpoint(self.m)
        K = 1
        while True:
            try:
                thetas, _ = drive_theta(self.model, mid + Fraction(1, 4 * self.grid.size * K),
                                        self.fed)
                self.model.theta_partition.index(thetas[-1])
            except BoundaryPoint:
                K += 1
                continue
            self.theta = thetas[-1]
            return


def decode_stream(model: SourceModel, m: int, params: CodecParams) -> StreamDecoder:
    return StreamDecoder(model, m, params.grid, params.n)


def decode(model: SourceModel, m: int, params: CodecParams, y: Sequence[int]) -> tuple:
    """Replay a whole block through :class:`StreamDecoder`."""
    dec = decode_stream(model, m, params)
    out = []
    for yk in y:
        out.append(dec.emit())
        dec.feed(yk)
    return tuple(out)


def block_distortion(x_hat: Sequence[int], y: Sequence[int], d: DistortionMeasure) -> Fraction:
    if len(x_hat) != len(y):
        raise LengthMismatch(f"{len(x_hat)} != {len(y)}")
    return Fraction(sum(d(a, b) for a, b in zip(x_hat, y)), len(y))
