"""Problem representation: instances, facility sets, and ball queries.

An instance is a set of candidate facilities, a set of clients, a symmetric
distance matrix over the union of both, and a budget ``k``. All distances are
64-bit floats and every tolerance in this package is relative, anchored at
1e-9. Instances are immutable, so the operations below are pure functions and
safe to call from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Literal

import numpy as np

REL_TOL = 1e-9


class KMedianError(Exception):
    """Invalid input or violated precondition."""


def _as_tuple(ids) -> tuple[str, ...]:
    return tuple(str(x) for x in ids)


@dataclass(frozen=True, eq=False)
class Instance:
    """An immutable k-median instance.

    ``points`` lists the distinct point ids indexing ``dist``; ``facilities``
    and ``clients`` reference those ids and may overlap (a point can play both
    roles). Tie-breaking throughout the package uses the position of a
    facility in ``facilities``, so that order is part of the instance.
    """

    k: int
    facilities: tuple[str, ...]
    clients: tuple[str, ...]
    points: tuple[str, ...]
    dist: np.ndarray
    name: str = "instance"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "facilities", _as_tuple(self.facilities))
        object.__setattr__(self, "clients", _as_tuple(self.clients))
        object.__setattr__(self, "points", _as_tuple(self.points))
        arr = np.array(self.dist, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "dist", arr)

        if self.k < 1:
            raise KMedianError("k must be at least 1")
        if not self.facilities:
            raise KMedianError("instance needs at least one facility")
        if not self.clients:
            raise KMedianError("instance needs at least one client")
        if self.k > len(self.facilities):
            raise KMedianError(
                f"k={self.k} exceeds the number of facilities ({len(self.facilities)})"
            )
        n = len(self.points)
        if len(set(self.points)) != n:
            raise KMedianError("point ids must be unique")
        if arr.shape != (n, n):
            raise KMedianError(f"distance matrix shape {arr.shape} does not match {n} points")
        index = {p: i for i, p in enumerate(self.points)}
        for f in self.facilities:
            if f not in index:
                raise KMedianError(f"facility id {f!r} is not a point")
        if len(set(self.facilities)) != len(self.facilities):
            raise KMedianError("facility ids must be unique")
        for c in self.clients:
            if c not in index:
                raise KMedianError(f"client id {c!r} is not a point")
        if len(set(self.clients)) != len(self.clients):
            raise KMedianError("client ids must be unique")

    # -- derived lookups (cached, cheap to recompute) -------------------

    @cached_property
    def _row(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def _fac_rows(self) -> np.ndarray:
        return np.array([self._row[f] for f in self.facilities], dtype=np.intp)

    @cached_property
    def _cli_rows(self) -> np.ndarray:
        return np.array([self._row[c] for c in self.clients], dtype=np.intp)

    @cached_property
    def fac_pos(self) -> dict[str, int]:
        """Facility id -> position in ``facilities`` (the tie-break order)."""
        return {f: i for i, f in enumerate(self.facilities)}

    @cached_property
    def dist_cf(self) -> np.ndarray:
        """Client-by-facility distance matrix (rows follow ``clients``)."""
        return self.dist[np.ix_(self._cli_rows, self._fac_rows)]

    @cached_property
    def dist_ff(self) -> np.ndarray:
        """Facility-by-facility distance matrix."""
        return self.dist[np.ix_(self._fac_rows, self._fac_rows)]

    @cached_property
    def max_distance(self) -> float:
        return float(self.dist.max()) if self.dist.size else 0.0

    @property
    def n_facilities(self) -> int:
        return len(self.facilities)

    @property
    def n_clients(self) -> int:
        return len(self.clients)

    def positions(self, ids: Iterable[str]) -> np.ndarray:
        """Facility ids -> sorted facility positions."""
        try:
            pos = sorted(self.fac_pos[i] for i in ids)
        except KeyError as exc:
            raise KMedianError(f"unknown facility id {exc.args[0]!r}") from None
        return np.array(pos, dtype=np.intp)

    def ids(self, positions: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.facilities[p] for p in positions)

    def restrict_facilities(self, keep: Iterable[str]) -> "Instance":
        """A copy with the facility list filtered down to ``keep``.

        Order is preserved. ``k`` is clamped to the remaining facility count,
        which leaves the set of feasible (size <= k) solutions unchanged.
        """
        keep_set = set(keep)
        kept = tuple(f for f in self.facilities if f in keep_set)
        if not kept:
            raise KMedianError("cannot restrict to an empty facility set")
        return Instance(
            k=min(self.k, len(kept)),
            facilities=kept,
            clients=self.clients,
            points=self.points,
            dist=self.dist,
            name=self.name,
            meta=self.meta,
        )

    @classmethod
    def from_blocks(cls, k: int, n_fac: int, n_cli: int, dist: np.ndarray,
                    name: str = "instance", meta: dict | None = None) -> "Instance":
        """Build from an (n_fac+n_cli) square matrix, facilities first."""
        fac = tuple(f"f{i}" for i in range(n_fac))
        cli = tuple(f"c{i}" for i in range(n_cli))
        return cls(k=k, facilities=fac, clients=cli, points=fac + cli,
                   dist=dist, name=name, meta=meta or {})

    @classmethod
    def from_shared_points(cls, k: int, ids: Iterable[str], dist: np.ndarray,
                           name: str = "instance", meta: dict | None = None) -> "Instance":
        """Build an instance where every point is both a facility and a client."""
        ids = _as_tuple(ids)
        return cls(k=k, facilities=ids, clients=ids, points=ids,
                   dist=dist, name=name, meta=meta or {})


@dataclass(frozen=True)
class FacilitySet:
    """A set of open facilities."""

    open: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "open", frozenset(self.open))
        if not self.open:
            raise KMedianError("a facility set cannot be empty")

    def kind(self, k: int) -> str:
        """Label relative to the budget: a real solution or a c-additive one."""
        extra = len(self.open) - k
        return "solution" if extra <= 0 else f"{extra}-additive"

    def ordered(self, inst: Instance) -> tuple[str, ...]:
        """Ids sorted by facility position (deterministic iteration order)."""
        return tuple(sorted(self.open, key=lambda f: inst.fac_pos[f]))

    def __len__(self) -> int:
        return len(self.open)

    def __contains__(self, item) -> bool:
        return item in self.open


def facility_set(inst: Instance, ids: Iterable[str]) -> FacilitySet:
    """Validated constructor: every id must be a facility of ``inst``."""
    ids = tuple(ids)
    for f in ids:
        if f not in inst.fac_pos:
            raise KMedianError(f"unknown facility id {f!r}")
    return FacilitySet(frozenset(ids))


@dataclass(frozen=True)
class BallQuery:
    """A strict open ball: points with distance < radius from the center."""

    center: str
    radius: float
    side: Literal["facility", "client"]

    def __post_init__(self):
        if self.radius < 0:
            raise KMedianError("ball radius must be nonnegative")
        if self.side not in ("facility", "client"):
            raise KMedianError(f"unknown ball side {self.side!r}")


def _open_positions(inst: Instance, s) -> np.ndarray:
    ids = s.open if isinstance(s, FacilitySet) else tuple(s)
    if not ids:
        raise KMedianError("no facility open")
    return inst.positions(ids)


def cost_by_positions(inst: Instance, positions: np.ndarray) -> float:
    """Sum of client distances to the nearest of the given facility positions."""
    return float(inst.dist_cf[:, positions].min(axis=1).sum())


def cost(inst: Instance, s) -> float:
    """Total connection cost of a facility set (sum over all clients)."""
    return cost_by_positions(inst, _open_positions(inst, s))


def nearest(inst: Instance, point_id: str, s) -> tuple[str, float]:
    """Closest open facility to a point; ties go to the lowest facility position."""
    row = inst._row.get(point_id)
    if row is None:
        raise KMedianError(f"unknown point id {point_id!r}")
    pos = _open_positions(inst, s)
    d = inst.dist[row, inst._fac_rows[pos]]
    best = int(np.argmin(d))  # first minimum = lowest position, pos is sorted
    return inst.facilities[pos[best]], float(d[best])


def fball(inst: Instance, center: str, radius: float) -> set[str]:
    """Facilities strictly closer than ``radius`` to the center point."""
    row = inst._row.get(center)
    if row is None:
        raise KMedianError(f"unknown point id {center!r}")
    d = inst.dist[row, inst._fac_rows]
    return {inst.facilities[i] for i in np.flatnonzero(d < radius)}


def cball(inst: Instance, center: str, radius: float) -> set[str]:
    """Clients strictly closer than ``radius`` to the center point."""
    row = inst._row.get(center)
    if row is None:
        raise KMedianError(f"unknown point id {center!r}")
    d = inst.dist[row, inst._cli_rows]
    return {inst.clients[i] for i in np.flatnonzero(d < radius)}


def ball(inst: Instance, query: BallQuery) -> set[str]:
    """Evaluate a ball query (strict inequality on the radius)."""
    if query.side == "facility":
        return fball(inst, query.center, query.radius)
    return cball(inst, query.center, query.radius)


@dataclass(frozen=True)
class Violation:
    kind: str
    points: tuple[str, ...]
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        return [f"{v.kind}: {', '.join(v.points)} -- {v.detail}" for v in self.violations]


def validate(inst: Instance) -> ValidationReport:
    """Check metric axioms; an empty report means the instance is valid.

    Symmetry, nonnegativity and the zero diagonal are listed per offending
    entry. For the triangle inequality only the worst triple is reported,
    measured against the tolerance 1e-9 * max distance.
    """
    D = inst.dist
    n = len(inst.points)
    tau = REL_TOL * inst.max_distance
    out: list[Violation] = []

    for i, j in zip(*np.nonzero(D < 0)):
        if i <= j:
            out.append(Violation("negative-distance",
                                 (inst.points[i], inst.points[j]),
                                 f"dist={float(D[i, j])!r}"))
    diag = np.abs(np.diagonal(D))
    for i in np.flatnonzero(diag > tau):
        out.append(Violation("nonzero-diagonal", (inst.points[i],),
                             f"dist(p,p)={float(D[i, i])!r}"))
    asym = np.abs(D - D.T)
    for i, j in zip(*np.nonzero(asym > tau)):
        if i < j:
            out.append(Violation("asymmetry", (inst.points[i], inst.points[j]),
                                 f"{float(D[i, j])!r} vs {float(D[j, i])!r}"))

    # worst triangle violation only: max over r of D[i,j] - D[i,r] - D[r,j]
    worst_excess = 0.0
    worst = None
    for r in range(n):
        excess = D - (D[:, r:r + 1] + D[r:r + 1, :])
        idx = np.argmax(excess)
        val = float(excess.flat[idx])
        if val > worst_excess:
            worst_excess = val
            i, j = divmod(int(idx), n)
            worst = (i, r, j)
    if worst is not None and worst_excess > tau:
        i, r, j = worst
        out.append(Violation(
            "triangle", (inst.points[i], inst.points[r], inst.points[j]),
            f"dist({inst.points[i]},{inst.points[j]}) exceeds the detour via "
            f"{inst.points[r]} by {worst_excess!r}"))
    return ValidationReport(tuple(out))
