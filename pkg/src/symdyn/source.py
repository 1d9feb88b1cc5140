"""Two-dimensional dynamical sources over the unit square.

A state ``(theta, phi)`` emits ``x`` (the cell of theta), ``z`` (the cell of
phi) and the source symbol ``y = xi[x][z]``; it then moves to
``(T0(theta, y), T1(phi))``.  Symbols are 0-based indices, except for the
continued-fraction source whose symbols are the digits 1, 2, ...
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence

from .intervals import (
    EXPANDING,
    GAUSS,
    MONOTONE,
    AffinePiece,
    BoundaryPoint,
    GaussMap,
    GaussPartition,
    IntervalMap,
    OpenInterval,
    OpenRectangle,
    PiecewiseAffineMap,
    UnitPartition,
    branch_preimage,
    evaluate,
    frac,
    frac_str,
    merge_intervals,
)


class SourceModel:
    """Partitions, output table and maps of a dynamical source.

    ``t1`` depends on phi only; a theta-dependent T1 is never needed by the
    constructions implemented here.
    """

    def __init__(self, theta_partition, phi_partition: UnitPartition, xi, t0_family,
                 t1: PiecewiseAffineMap, y_size: int | None = None):
        self.theta_partition = theta_partition
        self.phi_partition = phi_partition
        self.t1 = t1
        if isinstance(theta_partition, GaussPartition):
            self.kind = "gauss"
            self.xi = None
            self.t0_family = GAUSS
            self.y_size = None
        else:
            self.kind = "affine"
            self.xi = tuple(tuple(int(v) for v in row) for row in xi)
            self.t0_family = tuple(t0_family)
            self.y_size = len(self.t0_family) if y_size is None else y_size
            self._validate()
        if t1.mode != EXPANDING or t1.breakpoints != phi_partition.endpoints:
            raise ValueError("t1 must map every phi cell onto (0,1)")

    def _validate(self):
        nx, nz = len(self.theta_partition), len(self.phi_partition)
        if len(self.xi) != nx or any(len(row) != nz for row in self.xi):
            raise ValueError(f"xi must be a {nx}x{nz} table")
        if any(not 0 <= v < self.y_size for row in self.xi for v in row):
            raise ValueError("xi values must index the y alphabet")
        if len(self.t0_family) != self.y_size:
            raise ValueError("need one T0 map per source symbol")
        for fmap in self.t0_family:
            if fmap.mode == EXPANDING and fmap.breakpoints != self.theta_partition.endpoints:
                raise ValueError("expanding T0 branches must be the theta cells")

    @property
    def x_size(self) -> int | None:
        return None if self.kind == "gauss" else len(self.theta_partition)

    @property
    def z_size(self) -> int:
        return len(self.phi_partition)

    @property
    def p_x(self) -> list[Fraction]:
        return self.theta_partition.lengths

    @property
    def p_z(self) -> list[Fraction]:
        return self.phi_partition.lengths

    def t0(self, y: int) -> IntervalMap:
        if self.kind == "gauss":
            return GAUSS
        return self.t0_family[y]

    def output(self, x: int, z: int) -> int:
        return x if self.kind == "gauss" else self.xi[x][z]

    def feasible(self, x: int, y: int) -> tuple[int, ...]:
        """All z with ``xi[x][z] == y``."""
        if self.kind == "gauss":
            return (0,) if x == y else ()
        return tuple(z for z, v in enumerate(self.xi[x]) if v == y)

    def is_monotone(self) -> bool:
        return self.kind == "affine" and all(m.mode == MONOTONE for m in self.t0_family)

    def theta_preimage(self, y: int, x: int, target: OpenInterval) -> OpenInterval | None:
        """Points of theta cell ``x`` sent into ``target`` by ``T0(., y)``."""
        fmap = self.t0(y)
        if isinstance(fmap, GaussMap) or fmap.mode == EXPANDING:
            return branch_preimage(fmap, target, x)
        return branch_preimage(fmap, target).intersect(self.theta_partition[x])

    def __eq__(self, other):
        return isinstance(other, SourceModel) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))

    def __repr__(self):
        if self.kind == "gauss":
            return "SourceModel(gauss)"
        return f"SourceModel(|X|={self.x_size}, |Z|={self.z_size}, |Y|={self.y_size})"

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        if self.kind == "gauss":
            return {"kind": "gauss"}
        return {
            "kind": "affine",
            "alphabets": {"x": self.x_size, "z": self.z_size, "y": self.y_size},
            "theta_partition": [frac_str(p) for p in self.theta_partition.endpoints],
            "phi_partition": [frac_str(p) for p in self.phi_partition.endpoints],
            "xi": [list(row) for row in self.xi],
            "t0": [_map_to_dict(m) for m in self.t0_family],
            "t1": _map_to_dict(self.t1),
        }

    @classmethod
    def from_dict(cls, data: dict) -> SourceModel:
        if data["kind"] == "gauss":
            return gauss_model()
        return cls(
            UnitPartition(data["theta_partition"]),
            UnitPartition(data["phi_partition"]),
            data["xi"],
            [_map_from_dict(m) for m in data["t0"]],
            _map_from_dict(data["t1"]),
            y_size=data["alphabets"]["y"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> SourceModel:
        return cls.from_dict(json.loads(text))


def _map_to_dict(fmap: PiecewiseAffineMap) -> dict:
    return {
        "mode": fmap.mode,
        "pieces": [
            {"lo": frac_str(p.domain.lo), "hi": frac_str(p.domain.hi),
             "slope": frac_str(p.slope), "intercept": frac_str(p.intercept)}
            for p in fmap.pieces
        ],
    }


def _map_from_dict(data: dict) -> PiecewiseAffineMap:
    pieces = [AffinePiece(OpenInterval(frac(p["lo"]), frac(p["hi"])), frac(p["slope"]),
                          frac(p["intercept"])) for p in data["pieces"]]
    return PiecewiseAffineMap(pieces, data["mode"])


def gauss_model() -> SourceModel:
    """The continued-fraction source: theta -> 1/theta mod 1, y = digit."""
    return SourceModel(GaussPartition(), UnitPartition([0, 1]), None, None,
                       PiecewiseAffineMap.expanding_from_partition(UnitPartition([0, 1])))


@dataclass(frozen=True)
class State:
    theta: Fraction
    phi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "theta", frac(self.theta))
        object.__setattr__(self, "phi", frac(self.phi))


class Step(NamedTuple):
    next: State
    y: int
    x: int
    z: int


class Trajectory(NamedTuple):
    y: tuple
    x: tuple
    z: tuple
    states: tuple


def step(model: SourceModel, s: State) -> Step:
    x = model.theta_partition.index(s.theta)
    z = model.phi_partition.index(s.phi)
    y = model.output(x, z)
    nxt = State(evaluate(model.t0(y), s.theta), evaluate(model.t1, s.phi))
    return Step(nxt, y, x, z)


def trajectory(model: SourceModel, s0: State, n: int) -> Trajectory:
    ys, xs, zs, states = [], [], [], [s0]
    s = s0
    for k in range(n):
        try:
            s, y, x, z = step(model, s)
        except BoundaryPoint as exc:
            raise BoundaryPoint(exc.point, step=k + 1) from None
        ys.append(y)
        xs.append(x)
        zs.append(z)
        states.append(s)
    return Trajectory(tuple(ys), tuple(xs), tuple(zs), tuple(states))


@dataclass(frozen=True)
class FundamentalCell:
    """Initial thetas sharing one x-sequence, and the z choices open to phi."""

    theta: OpenInterval
    x: tuple
    allowed_z: tuple


class FundamentalSet:
    """All initial states producing a given source prefix.

    Stored as theta cells, each paired with a phi cylinder (an allowed z set
    per step).  The explicit rectangle list can be exponential in n, so it is
    expanded only on request.
    """

    def __init__(self, cells: Sequence[FundamentalCell], t1: PiecewiseAffineMap):
        self.cells = tuple(cells)
        self.t1 = t1

    def __len__(self):
        return len(self.cells)

    def is_empty(self) -> bool:
        return not self.cells

    def phi_intervals(self, cell: FundamentalCell) -> list[OpenInterval]:
        current = [OpenInterval.unit()]
        for allowed in reversed(cell.allowed_z):
            current = merge_intervals(branch_preimage(self.t1, iv, z)
                                      for z in allowed for iv in current)
        return current

    @cached_property
    def rectangles(self) -> list[OpenRectangle]:
        return [OpenRectangle(cell.theta, phi)
                for cell in self.cells for phi in self.phi_intervals(cell)]

    @property
    def measure(self) -> Fraction:
        p_z = [p.domain.length for p in self.t1.pieces]
        total = Fraction(0)
        for cell in self.cells:
            area = cell.theta.length
            for allowed in cell.allowed_z:
                area *= sum(p_z[z] for z in allowed)
            total += area
        return total

    def __contains__(self, point) -> bool:
        return any(point in r for r in self.rectangles)


def fundamental_set(model: SourceModel, y: Sequence[int]) -> FundamentalSet:
    """Backward recursion from ``y[-1]`` to ``y[0]`` over (x, z) cells."""
    if model.kind == "gauss":
        raise ValueError("the continued-fraction source has no finite fundamental set table")
    cells = [FundamentalCell(OpenInterval.unit(), (), ())]
    for yk in reversed(y):
        pulled = []
        for x in range(model.x_size):
            allowed = model.feasible(x, yk)
            if not allowed:
                continue
            for cell in cells:
                iv = model.theta_preimage(yk, x, cell.theta)
                if iv is not None:
                    pulled.append(FundamentalCell(iv, (x,) + cell.x, (allowed,) + cell.allowed_z))
        cells = sorted(pulled, key=lambda c: c.theta)
    return FundamentalSet(cells, model.t1)


def theta_projections(f: FundamentalSet) -> list[OpenInterval]:
    return sorted({c.theta for c in f.cells})


def fundamental_measure(f: FundamentalSet) -> Fraction:
    return f.measure
