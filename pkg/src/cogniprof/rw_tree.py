"""Weight-layered rectangle index over trait-space orientation points,
plus a classic quadratic-split R-tree used as the efficiency baseline.

Occupation boundaries are axis-aligned rectangles carrying a fused
coherence weight.  The layered tree keeps high-weight boundaries in a
middle level that is searched first and low-weight ones in the top level;
within each level the boundaries are packed into small directory groups
whose bounds are checked in bulk.  Because every middle-level weight is at
least the split threshold, concatenating per-level results already yields
a weight-descending ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryRejectedError, ValidationError

CONTAINMENT_TOL = 1e-9
DEFAULT_DELTA = 3
DEFAULT_FAN_OUT = 8
MIN_FILL = 2


@dataclass(frozen=True)
class OrientPoint:
    """A cognitive orientation point in [-1, 1]^d."""

    coords: tuple
    author_id: str | None = None

    @classmethod
    def of(cls, coords, author_id=None) -> "OrientPoint":
        return cls(coords=tuple(float(c) for c in coords), author_id=author_id)


@dataclass
class MBR:
    """Axis-aligned minimum bounding rectangle."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def of_points(cls, points: list[OrientPoint]) -> "MBR":
        arr = np.asarray([p.coords for p in points], dtype=float)
        return cls(lo=arr.min(axis=0), hi=arr.max(axis=0))

    def union(self, other: "MBR") -> "MBR":
        return MBR(lo=np.minimum(self.lo, other.lo), hi=np.maximum(self.hi, other.hi))

    def contains_envelope(self, pmin: np.ndarray, pmax: np.ndarray,
                          tol: float = CONTAINMENT_TOL) -> bool:
        return bool(np.all(self.lo - tol <= pmin) and np.all(self.hi + tol >= pmax))

    def volume(self) -> float:
        return float(np.prod(np.maximum(self.hi - self.lo, 0.0)))

    def min_linf_distance(self, point: np.ndarray) -> float:
        """L-infinity distance from a point to this rectangle (0 inside)."""
        below = self.lo - point
        above = point - self.hi
        return float(np.maximum(np.maximum(below, above), 0.0).max())


@dataclass
class OccupationRectangle:
    """A named occupation boundary: its points, bounds, and fused weight."""

    name: str
    weight: float
    points: tuple[OrientPoint, ...]
    mbr: MBR
    child_names: tuple[str, ...] = ()

    @property
    def is_cover(self) -> bool:
        return len(self.points) == 0 and bool(self.child_names)


@dataclass
class OccupationNode:
    """Insert payload: an occupation with orientation points and/or children."""

    name: str
    weight: float
    orients: list[OrientPoint] = field(default_factory=list)
    children: list["OccupationNode"] = field(default_factory=list)


def build_rectangle(name: str, weight: float, points, delta: int) -> OccupationRectangle:
    """Form a boundary from orientation points, enforcing the minimum count."""
    points = tuple(points)
    if len(points) < delta:
        raise BoundaryRejectedError(f"Minimum {delta} orientations are required.")
    return OccupationRectangle(name=name, weight=float(weight), points=points,
                               mbr=MBR.of_points(list(points)))


class _Layer:
    """One level of boundaries with its packed directory groups."""

    def __init__(self, fan_out: int):
        self.fan_out = fan_out
        self.rects: list[OccupationRectangle] = []
        self._groups: list[dict] = []
        self._group_lo: np.ndarray | None = None
        self._group_hi: np.ndarray | None = None

    def rebuild(self):
        """Repack the directory: sort boundaries spatially, chunk by fan-out."""
        if not self.rects:
            self._groups = []
            self._group_lo = self._group_hi = None
            return
        centers = np.asarray([(r.mbr.lo + r.mbr.hi) / 2.0 for r in self.rects])
        order = sorted(range(len(self.rects)),
                       key=lambda i: (tuple(centers[i]), self.rects[i].name))
        self._groups = []
        los, his = [], []
        for start in range(0, len(order), self.fan_out):
            idx = order[start:start + self.fan_out]
            group_rects = [self.rects[i] for i in idx]
            lo = np.min([r.mbr.lo for r in group_rects], axis=0)
            hi = np.max([r.mbr.hi for r in group_rects], axis=0)
            self._groups.append({
                "rects": group_rects,
                "lo": np.asarray([r.mbr.lo for r in group_rects]),
                "hi": np.asarray([r.mbr.hi for r in group_rects]),
            })
            los.append(lo)
            his.append(hi)
        self._group_lo = np.asarray(los)
        self._group_hi = np.asarray(his)

    def query_envelope(self, pmin: np.ndarray, pmax: np.ndarray,
                       tol: float = CONTAINMENT_TOL) -> list[OccupationRectangle]:
        if self._group_lo is None:
            return []
        hit_groups = np.flatnonzero(
            np.all(self._group_lo - tol <= pmin, axis=1)
            & np.all(self._group_hi + tol >= pmax, axis=1))
        out = []
        for g in hit_groups:
            grp = self._groups[g]
            hits = np.flatnonzero(
                np.all(grp["lo"] - tol <= pmin, axis=1)
                & np.all(grp["hi"] + tol >= pmax, axis=1))
            out.extend(grp["rects"][i] for i in hits)
        return out


class RwTree:
    """Three-level weight-layered boundary index.

    Boundaries with weight >= the split threshold live in the middle level
    (searched first); the rest live in the top level.  Orientation points
    are the leaves of their owning boundary.
    """

    def __init__(self, delta: int = DEFAULT_DELTA, tau: float = 0.5,
                 fan_out: int = DEFAULT_FAN_OUT, auto_update: bool = False):
        if delta < 1:
            raise ValidationError("delta must be at least 1")
        self.delta = delta
        self.tau = tau
        self.auto_update = auto_update
        self.middle = _Layer(fan_out)
        self.top = _Layer(fan_out)

    # -- construction ---------------------------------------------------

    def _place(self, rect: OccupationRectangle):
        layer = self.middle if rect.weight >= self.tau else self.top
        layer.rects.append(rect)

    def _rebuild(self):
        self.middle.rebuild()
        self.top.rebuild()

    def insert(self, occ: OccupationNode) -> "RwTree":
        """Insert an occupation node (and its children) as boundaries.

        Child orientation points become leaves, each child becomes its own
        boundary, and a parent with children becomes a covering entry whose
        bounds span the children.  Any child with too few points rejects
        the whole insert before mutation.
        """
        if occ.children and occ.orients:
            raise ValidationError("an occupation node carries either orients or children")
        if occ.children:
            child_rects = [build_rectangle(ch.name, ch.weight, ch.orients, self.delta)
                           for ch in occ.children]
            cover_mbr = child_rects[0].mbr
            for r in child_rects[1:]:
                cover_mbr = cover_mbr.union(r.mbr)
            parent = OccupationRectangle(
                name=occ.name, weight=float(occ.weight), points=(),
                mbr=cover_mbr, child_names=tuple(ch.name for ch in occ.children))
            for r in child_rects:
                self._place(r)
            self._place(parent)
        else:
            self._place(build_rectangle(occ.name, occ.weight, occ.orients, self.delta))
        self._rebuild()
        return self

    def update(self, points, delta: int | None = None, name: str | None = None,
               weight: float = 0.0) -> OccupationRectangle:
        """Nominate a new boundary from orientation points.

        Fails (without touching the tree) when fewer than delta points are
        given; otherwise the boundary is added and returned.
        """
        delta = self.delta if delta is None else delta
        points = [p if isinstance(p, OrientPoint) else OrientPoint.of(p) for p in points]
        if len(points) < delta:
            # Reject before any state changes so the tree stays untouched.
            raise BoundaryRejectedError(f"Minimum {delta} orientations are required.")
        if name is None:
            taken = {r.name for r in self.all_rectangles()}
            candidate = f"o{len(taken) + 1}"
            while candidate in taken:
                candidate += "'"
            name = candidate
        rect = build_rectangle(name, weight, points, delta)
        self._place(rect)
        self._rebuild()
        return rect

    def overhaul(self, tau: float | None = None):
        """Recompute the weight split (median boundary weight by default)
        and re-layer every boundary."""
        rects = self.all_rectangles()
        if tau is None:
            weights = [r.weight for r in rects if not r.is_cover]
            tau = float(np.median(weights)) if weights else self.tau
        self.tau = tau
        self.middle.rects, self.top.rects = [], []
        for r in rects:
            self._place(r)
        self._rebuild()

    # -- queries ----------------------------------------------------------

    def all_rectangles(self) -> list[OccupationRectangle]:
        return list(self.middle.rects) + list(self.top.rects)

    @staticmethod
    def _envelope(points) -> tuple[np.ndarray, np.ndarray]:
        arr = np.asarray([p.coords if isinstance(p, OrientPoint) else p for p in points],
                         dtype=float)
        return arr.min(axis=0), arr.max(axis=0)

    def quest(self, points) -> list[str]:
        """Occupations whose boundary contains every query point.

        The middle (high-weight) level is searched before the top level;
        results are deduplicated and come back weight-descending.  With
        auto_update enabled, a miss first nominates a new boundary.
        """
        points = list(points)
        if not points or (not self.middle.rects and not self.top.rects):
            return []
        pmin, pmax = self._envelope(points)
        hits = [r for r in self.middle.query_envelope(pmin, pmax) if not r.is_cover]
        hits += [r for r in self.top.query_envelope(pmin, pmax) if not r.is_cover]
        if not hits and self.auto_update:
            try:
                self.update(points)
            except BoundaryRejectedError:
                return []
            hits = [r for r in self.middle.query_envelope(pmin, pmax) if not r.is_cover]
            hits += [r for r in self.top.query_envelope(pmin, pmax) if not r.is_cover]
        ranked = sorted(hits, key=lambda r: (-r.weight, r.mbr.volume(), r.name))
        seen, out = set(), []
        for r in ranked:
            if r.name not in seen:
                seen.add(r.name)
                out.append(r.name)
        return out

    def top_k(self, point, k: int) -> list[str]:
        """Best k occupations for a query point, growing the search radius
        until enough boundaries are reachable.

        Candidates rank by weight descending, then smaller volume.
        """
        if k <= 0:
            return []
        coords = np.asarray(point.coords if isinstance(point, OrientPoint) else point,
                            dtype=float)
        rects = [r for r in self.all_rectangles() if not r.is_cover]
        if not rects:
            return []
        by_name: dict[str, tuple[float, OccupationRectangle]] = {}
        for r in rects:
            d = r.mbr.min_linf_distance(coords)
            cur = by_name.get(r.name)
            if cur is None or d < cur[0]:
                by_name[r.name] = (d, r)
        entries = sorted(by_name.values(), key=lambda e: e[0])
        radius = entries[min(k, len(entries)) - 1][0]
        candidates = [r for d, r in entries if d <= radius + CONTAINMENT_TOL]
        candidates.sort(key=lambda r: (-r.weight, r.mbr.volume(), r.name))
        return [r.name for r in candidates[:k]]


def linear_scan_quest(rects: list[OccupationRectangle], points) -> list[str]:
    """Reference oracle: scan every boundary for containment of the query."""
    points = list(points)
    if not points:
        return []
    arr = np.asarray([p.coords if isinstance(p, OrientPoint) else p for p in points],
                     dtype=float)
    pmin, pmax = arr.min(axis=0), arr.max(axis=0)
    hits = [r for r in rects if not r.is_cover and r.mbr.contains_envelope(pmin, pmax)]
    hits.sort(key=lambda r: (-r.weight, r.mbr.volume(), r.name))
    seen, out = set(), []
    for r in hits:
        if r.name not in seen:
            seen.add(r.name)
            out.append(r.name)
    return out


# -- classic R-tree baseline -------------------------------------------------


class _RTreeNode:
    __slots__ = ("leaf", "entries", "children", "lo", "hi")

    def __init__(self, leaf: bool):
        self.leaf = leaf
        self.entries: list[OccupationRectangle] = []
        self.children: list[_RTreeNode] = []
        self.lo: np.ndarray | None = None
        self.hi: np.ndarray | None = None

    def extend(self, lo: np.ndarray, hi: np.ndarray):
        if self.lo is None:
            self.lo = lo.copy()
            self.hi = hi.copy()
        else:
            np.minimum(self.lo, lo, out=self.lo)
            np.maximum(self.hi, hi, out=self.hi)

    def recompute(self):
        items = self.entries if self.leaf else self.children
        self.lo = np.min([e.mbr.lo if self.leaf else e.lo for e in items], axis=0)
        self.hi = np.max([e.mbr.hi if self.leaf else e.hi for e in items], axis=0)


def _volume(lo: np.ndarray, hi: np.ndarray) -> float:
    return float(np.prod(np.maximum(hi - lo, 0.0)))


class RTree:
    """Guttman-style R-tree with quadratic splits, used as the baseline."""

    def __init__(self, fan_out: int = DEFAULT_FAN_OUT, min_fill: int = MIN_FILL):
        if min_fill * 2 > fan_out:
            raise ValidationError("min_fill must be at most fan_out / 2")
        self.fan_out = fan_out
        self.min_fill = min_fill
        self.root = _RTreeNode(leaf=True)

    def insert(self, rect: OccupationRectangle):
        split = self._insert(self.root, rect)
        if split is not None:
            old_root = self.root
            self.root = _RTreeNode(leaf=False)
            self.root.children = [old_root, split]
            self.root.recompute()

    def _insert(self, node: _RTreeNode, rect: OccupationRectangle):
        node.extend(rect.mbr.lo, rect.mbr.hi)
        if node.leaf:
            node.entries.append(rect)
            if len(node.entries) > self.fan_out:
                return self._split(node)
            return None
        best, best_cost = None, None
        for child in node.children:
            lo = np.minimum(child.lo, rect.mbr.lo)
            hi = np.maximum(child.hi, rect.mbr.hi)
            enlargement = _volume(lo, hi) - _volume(child.lo, child.hi)
            cost = (enlargement, _volume(child.lo, child.hi))
            if best_cost is None or cost < best_cost:
                best, best_cost = child, cost
        split = self._insert(best, rect)
        if split is not None:
            node.children.append(split)
            if len(node.children) > self.fan_out:
                return self._split(node)
        return None

    def _split(self, node: _RTreeNode):
        """Quadratic split: seed with the pair wasting the most space, then
        assign each remaining item to the group needing less enlargement."""
        if node.leaf:
            items = node.entries
            boxes = [(e.mbr.lo, e.mbr.hi) for e in items]
        else:
            items = node.children
            boxes = [(c.lo, c.hi) for c in items]

        worst, seeds = -1.0, (0, 1)
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                lo = np.minimum(boxes[i][0], boxes[j][0])
                hi = np.maximum(boxes[i][1], boxes[j][1])
                dead = _volume(lo, hi) - _volume(*boxes[i]) - _volume(*boxes[j])
                if dead > worst:
                    worst, seeds = dead, (i, j)

        g1, g2 = [seeds[0]], [seeds[1]]
        lo1, hi1 = boxes[seeds[0]][0].copy(), boxes[seeds[0]][1].copy()
        lo2, hi2 = boxes[seeds[1]][0].copy(), boxes[seeds[1]][1].copy()
        rest = [i for i in range(len(items)) if i not in seeds]
        for i in rest:
            remaining = len(rest) - (len(g1) + len(g2) - 2)
            if len(g1) + remaining <= self.min_fill:
                target = 1
            elif len(g2) + remaining <= self.min_fill:
                target = 2
            else:
                d1 = _volume(np.minimum(lo1, boxes[i][0]), np.maximum(hi1, boxes[i][1])) \
                    - _volume(lo1, hi1)
                d2 = _volume(np.minimum(lo2, boxes[i][0]), np.maximum(hi2, boxes[i][1])) \
                    - _volume(lo2, hi2)
                target = 1 if d1 <= d2 else 2
            if target == 1:
                g1.append(i)
                lo1 = np.minimum(lo1, boxes[i][0])
                hi1 = np.maximum(hi1, boxes[i][1])
            else:
                g2.append(i)
                lo2 = np.minimum(lo2, boxes[i][0])
                hi2 = np.maximum(hi2, boxes[i][1])

        sibling = _RTreeNode(leaf=node.leaf)
        if node.leaf:
            all_items = items[:]
            node.entries = [all_items[i] for i in g1]
            sibling.entries = [all_items[i] for i in g2]
        else:
            all_items = items[:]
            node.children = [all_items[i] for i in g1]
            sibling.children = [all_items[i] for i in g2]
        node.recompute()
        sibling.recompute()
        return sibling

    def query(self, points) -> list[str]:
        """Occupations containing every query point, weight-descending."""
        points = list(points)
        if not points or self.root.lo is None:
            return []
        arr = np.asarray([p.coords if isinstance(p, OrientPoint) else p for p in points],
                         dtype=float)
        pmin, pmax = arr.min(axis=0), arr.max(axis=0)
        hits: list[OccupationRectangle] = []
        self._search(self.root, pmin, pmax, hits)
        hits.sort(key=lambda r: (-r.weight, r.mbr.volume(), r.name))
        seen, out = set(), []
        for r in hits:
            if r.name not in seen:
                seen.add(r.name)
                out.append(r.name)
        return out

    def _search(self, node: _RTreeNode, pmin, pmax, hits):
        tol = CONTAINMENT_TOL
        if node.lo is None or not (np.all(node.lo - tol <= pmin) and np.all(node.hi + tol >= pmax)):
            return
        if node.leaf:
            for rect in node.entries:
                if rect.mbr.contains_envelope(pmin, pmax):
                    hits.append(rect)
        else:
            for child in node.children:
                self._search(child, pmin, pmax, hits)


# -- overhaul actuator --------------------------------------------------------


@dataclass(frozen=True)
class ActuatorConfig:
    """Overhaul sensing settings: growth fraction and degradation threshold."""

    zeta: float
    eps: float

    def __post_init__(self):
        if not (0.0 < self.zeta <= 1.0):
            raise ValidationError("zeta must lie in (0, 1]")
        if self.eps < 0.0:
            raise ValidationError("eps must be non-negative")


def actuator_interval(data: list, cfg: ActuatorConfig, evaluate) -> int:
    """How many fresh records the index tolerates before rebuild is due.

    The data splits in half; quality is measured on the first half, then on
    prefixes growing by zeta of the second half.  The first time quality
    drops by at least eps, the number of added records is returned;
    otherwise the full second-half size comes back.
    """
    if len(data) < 2:
        raise ValidationError("need at least 2 records")
    half = len(data) // 2
    d0, d1 = list(data[:half]), list(data[half:])
    omega0 = evaluate(d0)
    steps = int(math.floor(1.0 / cfg.zeta + 1e-9))
    for i in range(1, steps + 1):
        take = min(int(round(i * cfg.zeta * len(d1))), len(d1))
        omega_i = evaluate(d0 + d1[:take])
        if omega0 - omega_i >= cfg.eps - 1e-12:
            return take
    return len(d1)
