"""Exact rational intervals and piecewise maps of the unit interval.

Every real quantity is a :class:`fractions.Fraction`; nothing here ever
rounds.  Maps come in two kinds:

* :class:`PiecewiseAffineMap` -- finitely many affine pieces whose domains
  partition (0, 1).  In ``"monotone"`` mode the map is a continuous
  nondecreasing surjection of the unit interval; in ``"expanding"`` mode each
  piece maps its domain onto the whole unit interval.
* :class:`GaussMap` -- ``x -> 1/x mod 1`` with the countably many branches
  ``(1/(i+1), 1/i)``.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)

MONOTONE = "monotone"
EXPANDING = "expanding"


class BoundaryPoint(ValueError):
    """A point sits exactly on a partition endpoint (a null event)."""

    def __init__(self, point, step=None):
        self.point = point
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"{point} is a partition endpoint{where}")


class InvalidBranch(ValueError):
    pass


def frac(value: Rational) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a Fraction or 'num/den'")
    return Fraction(value)


def frac_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, order=True)
class OpenInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = frac(self.lo), frac(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not (0 <= lo < hi <= 1):
            raise ValueError(f"not an open subinterval of (0,1): ({lo}, {hi})")

    @classmethod
    def unit(cls) -> OpenInterval:
        return cls(ZERO, ONE)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo < x < self.hi

    def contains_interval(self, other: OpenInterval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: OpenInterval) -> OpenInterval | None:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return OpenInterval(lo, hi) if lo < hi else None

    def __repr__(self):
        return f"({self.lo}, {self.hi})"


@dataclass(frozen=True)
class OpenRectangle:
    theta_side: OpenInterval
    phi_side: OpenInterval

    @property
    def area(self) -> Fraction:
        return self.theta_side.length * self.phi_side.length

    def __contains__(self, point) -> bool:
        theta, phi = point
        return theta in self.theta_side and phi in self.phi_side

    def intersects(self, other: OpenRectangle) -> bool:
        return (self.theta_side.intersect(other.theta_side) is not None
                and self.phi_side.intersect(other.phi_side) is not None)


class UnitPartition:
    """Ordered open partition of (0, 1) into finitely many intervals."""

    def __init__(self, endpoints: Sequence[Rational]):
        pts = tuple(frac(p) for p in endpoints)
        if len(pts) < 2 or pts[0] != 0 or pts[-1] != 1:
            raise ValueError("partition endpoints must run from 0 to 1")
        if any(a >= b for a, b in zip(pts, pts[1:])):
            raise ValueError("partition endpoints must be strictly increasing")
        self.endpoints = pts

    @classmethod
    def from_lengths(cls, lengths: Iterable[Rational]) -> UnitPartition:
        pts = [ZERO]
        for length in lengths:
            pts.append(pts[-1] + frac(length))
        return cls(pts)

    @property
    def cells(self) -> list[OpenInterval]:
        return [OpenInterval(a, b) for a, b in zip(self.endpoints, self.endpoints[1:])]

    @property
    def lengths(self) -> list[Fraction]:
        return [b - a for a, b in zip(self.endpoints, self.endpoints[1:])]

    def __len__(self):
        return len(self.endpoints) - 1

    def __getitem__(self, i) -> OpenInterval:
        return OpenInterval(self.endpoints[i], self.endpoints[i + 1])

    def index(self, x: Fraction) -> int:
        """Cell index of ``x``; raises BoundaryPoint on an endpoint."""
        i = bisect_left(self.endpoints, x)
        if i < len(self.endpoints) and self.endpoints[i] == x:
            raise BoundaryPoint(x)
        if i == 0 or i == len(self.endpoints):
            raise ValueError(f"{x} lies outside (0,1)")
        return i - 1

    def is_boundary(self, x: Fraction) -> bool:
        i = bisect_left(self.endpoints, x)
        return i < len(self.endpoints) and self.endpoints[i] == x

    def __eq__(self, other):
        return isinstance(other, UnitPartition) and self.endpoints == other.endpoints

    def __hash__(self):
        return hash(self.endpoints)

    def __repr__(self):
        return f"UnitPartition({[str(p) for p in self.endpoints]})"


class GaussPartition:
    """The cells ``(1/(i+1), 1/i)``, i = 1, 2, ..., indexed by i."""

    def index(self, x: Fraction) -> int:
        if not 0 < x < 1:
            raise ValueError(f"{x} lies outside (0,1)")
        i, rem = divmod(x.denominator, x.numerator)
        if rem == 0:
            raise BoundaryPoint(x)
        return i

    def is_boundary(self, x: Fraction) -> bool:
        return x.denominator % x.numerator == 0

    def __getitem__(self, i) -> OpenInterval:
        if i < 1:
            raise IndexError(i)
        return OpenInterval(Fraction(1, i + 1), Fraction(1, i))

    def __eq__(self, other):
        return isinstance(other, GaussPartition)

    def __hash__(self):
        return hash(GaussPartition)


@dataclass(frozen=True)
class AffinePiece:
    domain: OpenInterval
    slope: Fraction
    intercept: Fraction

    def __call__(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept

    @property
    def image_ends(self) -> tuple[Fraction, Fraction]:
        return self(self.domain.lo), self(self.domain.hi)


class PiecewiseAffineMap:
    kind = "piecewise-affine"

    def __init__(self, pieces: Sequence[AffinePiece], mode: str = MONOTONE):
        if mode not in (MONOTONE, EXPANDING):
            raise ValueError(f"unknown mode {mode!r}")
        self.pieces = tuple(pieces)
        self.mode = mode
        self.breakpoints = (self.pieces[0].domain.lo,) + tuple(p.domain.hi for p in self.pieces)
        # validates contiguity
        UnitPartition(self.breakpoints)
        if any(a.domain.hi != b.domain.lo for a, b in zip(self.pieces, self.pieces[1:])):
            raise ValueError("piece domains must be contiguous")
        if mode == MONOTONE:
            self._check_monotone()
        else:
            for p in self.pieces:
                if p.slope == 0 or set(p.image_ends) != {ZERO, ONE}:
                    raise ValueError(f"expanding piece does not map {p.domain} onto (0,1)")

    def _check_monotone(self):
        # slope 0 is allowed: flat pieces arise when a conditional probability vanishes
        if any(p.slope < 0 for p in self.pieces):
            raise ValueError("monotone map needs nonnegative slopes")
        for p, q in zip(self.pieces, self.pieces[1:]):
            if p(p.domain.hi) != q(q.domain.lo):
                raise ValueError(f"map is discontinuous at {p.domain.hi}")
        values = [p(p.domain.lo) for p in self.pieces] + [self.pieces[-1](ONE)]
        if values[0] != 0 or values[-1] != 1:
            raise ValueError("monotone map must send 0 to 0 and 1 to 1")
        self.values = tuple(values)

    @classmethod
    def from_points(cls, xs: Sequence[Rational], ys: Sequence[Rational]) -> PiecewiseAffineMap:
        """Continuous monotone map interpolating ``(xs[i], ys[i])``."""
        xs = [frac(x) for x in xs]
        ys = [frac(y) for y in ys]
        pieces = []
        for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:]):
            s = (y1 - y0) / (x1 - x0)
            pieces.append(AffinePiece(OpenInterval(x0, x1), s, y0 - s * x0))
        return cls(pieces, MONOTONE)

    @classmethod
    def expanding_from_partition(cls, partition: UnitPartition) -> PiecewiseAffineMap:
        """Increasing affine map of every cell onto (0, 1)."""
        pieces = []
        for cell in partition.cells:
            s = 1 / cell.length
            pieces.append(AffinePiece(cell, s, -s * cell.lo))
        return cls(pieces, EXPANDING)

    @classmethod
    def identity(cls) -> PiecewiseAffineMap:
        return cls([AffinePiece(OpenInterval.unit(), ONE, ZERO)], MONOTONE)

    def piece_index(self, x: Fraction) -> int:
        i = bisect_left(self.breakpoints, x)
        if i < len(self.breakpoints) and self.breakpoints[i] == x:
            raise BoundaryPoint(x)
        if i == 0 or i == len(self.breakpoints):
            raise ValueError(f"{x} lies outside (0,1)")
        return i - 1

    def canonical(self) -> PiecewiseAffineMap:
        """Merge neighbouring pieces that share slope and intercept."""
        merged = [self.pieces[0]]
        for p in self.pieces[1:]:
            last = merged[-1]
            if p.slope == last.slope and p.intercept == last.intercept:
                merged[-1] = AffinePiece(OpenInterval(last.domain.lo, p.domain.hi),
                                         p.slope, p.intercept)
            else:
                merged.append(p)
        return PiecewiseAffineMap(merged, self.mode)

    def __eq__(self, other):
        return (isinstance(other, PiecewiseAffineMap) and self.mode == other.mode
                and self.pieces == other.pieces)

    def __hash__(self):
        return hash((self.mode, self.pieces))

    def __len__(self):
        return len(self.pieces)

    def __repr__(self):
        body = ", ".join(f"{p.domain}: {p.slope}*x + {p.intercept}" for p in self.pieces)
        return f"PiecewiseAffineMap[{self.mode}]({body})"


class GaussMap:
    kind = "gauss"
    mode = EXPANDING

    def __eq__(self, other):
        return isinstance(other, GaussMap)

    def __hash__(self):
        return hash(GaussMap)

    def __repr__(self):
        return "GaussMap()"


GAUSS = GaussMap()
IntervalMap = Union[PiecewiseAffineMap, GaussMap]


def evaluate(fmap: IntervalMap, x: Rational) -> Fraction:
    """Exact image of an interior, non-breakpoint ``x``."""
    x = frac(x)
    if isinstance(fmap, GaussMap):
        if not 0 < x < 1:
            raise ValueError(f"{x} lies outside (0,1)")
        p, q = x.numerator, x.denominator
        r = q % p
        if r == 0:
            raise BoundaryPoint(x)
        return Fraction(r, p)
    return fmap.pieces[fmap.piece_index(x)](x)


def _solve(piece: AffinePiece, y: Fraction) -> Fraction:
    return (y - piece.intercept) / piece.slope


def branch_preimage(fmap: IntervalMap, target: OpenInterval, branch=None) -> OpenInterval:
    """Preimage of ``target``: global for monotone maps, per branch otherwise."""
    if isinstance(fmap, GaussMap):
        if branch is None or not isinstance(branch, int) or branch < 1:
            raise InvalidBranch(f"Gauss map needs a branch index >= 1, got {branch!r}")
        # x = 1/(i + t) is decreasing in t
        return OpenInterval(1 / (branch + target.hi), 1 / (branch + target.lo))

    if fmap.mode == EXPANDING:
        if branch is None or not 0 <= branch < len(fmap.pieces):
            raise InvalidBranch(f"branch {branch!r} out of range")
        piece = fmap.pieces[branch]
        a, b = _solve(piece, target.lo), _solve(piece, target.hi)
        return OpenInterval(min(a, b), max(a, b))

    if branch is not None:
        raise InvalidBranch("monotone maps are inverted globally (branch=None)")
    t, v = fmap.breakpoints, fmap.values
    # lo = sup{x : f(x) <= target.lo}, hi = inf{x : f(x) >= target.hi}
    i = bisect_right(v, target.lo) - 1
    lo = ONE if i == len(v) - 1 else t[i] + (target.lo - v[i]) / fmap.pieces[i].slope
    j = bisect_left(v, target.hi)
    hi = ZERO if j == 0 else t[j - 1] + (target.hi - v[j - 1]) / fmap.pieces[j - 1].slope
    return OpenInterval(lo, hi)


def compose_monotone(outer: PiecewiseAffineMap, inner: PiecewiseAffineMap) -> PiecewiseAffineMap:
    """The canonical piecewise-affine form of ``outer o inner``."""
    if outer.mode != MONOTONE or inner.mode != MONOTONE:
        raise ValueError("compose_monotone needs two monotone maps")
    cuts = set(inner.breakpoints)
    for c in outer.breakpoints[1:-1]:
        for p in inner.pieces:
            y0, y1 = p.image_ends
            if p.slope > 0 and y0 < c < y1:
                cuts.add(_solve(p, c))
    cuts = sorted(cuts)
    pieces = []
    for a, b in zip(cuts, cuts[1:]):
        w = (a + b) / 2
        p = inner.pieces[inner.piece_index(w)]
        u = p(w)
        k = bisect_right(outer.breakpoints, u) - 1
        # a flat inner piece may sit exactly on an outer breakpoint; continuity
        # makes either neighbour valid there
        q = outer.pieces[min(k, len(outer.pieces) - 1)]
        pieces.append(AffinePiece(OpenInterval(a, b), q.slope * p.slope,
                                  q.slope * p.intercept + q.intercept))
    return PiecewiseAffineMap(pieces, MONOTONE).canonical()


def merge_intervals(intervals: Iterable[OpenInterval]) -> list[OpenInterval]:
    """Sort and join intervals that share an endpoint."""
    out: list[OpenInterval] = []
    for iv in sorted(intervals):
        if out and out[-1].hi == iv.lo:
            out[-1] = OpenInterval(out[-1].lo, iv.hi)
        else:
            out.append(iv)
    return out
