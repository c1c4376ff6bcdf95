"""Planar primitives, compact set models, metric projections and hulls.

Coordinates are 64-bit floats.  A :class:`CompactSetModel` is a finite
union of isolated points, segments, circular arcs and clipped, rotated
graphs of :class:`~wdcplane.dc1.DCFun1` profiles, optionally together with
two-dimensional pieces given by membership predicates.  A 2-D piece must
have its boundary covered by the one-dimensional primitives; distances are
then exact: zero inside a piece, the distance to the primitives outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .dc1 import DCFun1, as_fraction

GEOM_TOL = 1e-9
TWO_PI = 2.0 * math.pi

Point2 = tuple[float, float]


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite point {p!r}")
    return a


def unit_vector(x: float, y: float) -> np.ndarray:
    """Normalised ``(x, y)``; raises on the zero vector."""
    n = math.hypot(x, y)
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return np.array([x / n, y / n])


def rotation(theta: float) -> tuple[float, float]:
    """Cached ``(cos, sin)`` pair; exact for multiples of a right angle."""
    q = theta / (math.pi / 2)
    if abs(q - round(q)) < 1e-15:
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(round(q)) % 4]
    return math.cos(theta), math.sin(theta)


def to_local(pts, anchor, cs) -> tuple[np.ndarray, np.ndarray]:
    """World points to ``(u, v)`` coordinates of a frame rotated by ``cs``."""
    pts = np.asarray(pts, dtype=float)
    c, s = cs
    dx = pts[..., 0] - anchor[0]
    dy = pts[..., 1] - anchor[1]
    return c * dx + s * dy, -s * dx + c * dy


def to_world(u, v, anchor, cs) -> np.ndarray:
    c, s = cs
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.stack([anchor[0] + c * u - s * v, anchor[1] + s * u + c * v], axis=-1)


@dataclass(frozen=True)
class Arc:
    """Circular arc from angle ``start`` counterclockwise through ``sweep``."""

    center: Point2
    radius: float
    start: float
    sweep: float

    def endpoints(self) -> np.ndarray:
        c = np.asarray(self.center)
        a0, a1 = self.start, self.start + self.sweep
        return np.array([c + self.radius * np.array([math.cos(a0), math.sin(a0)]),
                         c + self.radius * np.array([math.cos(a1), math.sin(a1)])])


@dataclass(frozen=True)
class PLGraph:
    """``anchor + rot(theta) (u, profile(u))`` for ``u`` in ``interval``, clipped to a disc."""

    profile: DCFun1
    interval: tuple[Fraction, Fraction]
    theta: float = 0.0
    anchor: Point2 = (0.0, 0.0)
    clip_center: Optional[Point2] = None
    clip_radius: Optional[float] = None

    def vertices(self) -> np.ndarray:
        a, b = (as_fraction(t) for t in self.interval)
        inner = [x for x in self.profile.pl.xs if a < x < b]
        us = [a] + inner + [b]
        vs = [self.profile(u) for u in us]
        return to_world([float(u) for u in us], [float(v) for v in vs],
                        self.anchor, rotation(self.theta))

    def segments(self) -> np.ndarray:
        verts = self.vertices()
        segs = np.concatenate([verts[:-1], verts[1:]], axis=1)
        if self.clip_radius is None:
            return segs
        out = [clip_segment_to_disc(s, self.clip_center, self.clip_radius) for s in segs]
        out = [s for s in out if s is not None]
        return np.array(out).reshape(-1, 4)


@dataclass(frozen=True)
class PredicateRegion:
    """A closed 2-D piece described by a vectorised membership test."""

    contains: Callable[[np.ndarray], np.ndarray]
    bbox: tuple[float, float, float, float]


@dataclass(frozen=True)
class CompactSetModel:
    points: tuple = ()
    segments: tuple = ()
    arcs: tuple = ()
    pl_graphs: tuple = ()
    regions: tuple = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(tuple(map(float, p)) for p in self.points))
        object.__setattr__(self, "segments", tuple(
            (tuple(map(float, a)), tuple(map(float, b))) for a, b in self.segments))
        for name in ("arcs", "pl_graphs", "regions"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not (self.points or self.segments or self.arcs or self.pl_graphs):
            raise ValueError("empty set model")
        for p in self.points:
            as_point(p)

    @classmethod
    def from_points(cls, pts, label="") -> "CompactSetModel":
        return cls(points=[tuple(p) for p in np.asarray(pts, dtype=float).reshape(-1, 2)], label=label)

    @cached_property
    def flat_points(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)

    @cached_property
    def flat_segments(self) -> np.ndarray:
        parts = [np.array([a + b for a, b in self.segments], dtype=float).reshape(-1, 4)]
        parts += [g.segments() for g in self.pl_graphs]
        return np.concatenate(parts, axis=0)

    @cached_property
    def flat_arcs(self) -> np.ndarray:
        rows = [(a.center[0], a.center[1], a.radius, a.start, a.sweep) for a in self.arcs]
        return np.array(rows, dtype=float).reshape(-1, 5)

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        pts = [self.flat_points, self.flat_segments[:, :2], self.flat_segments[:, 2:]]
        for cx, cy, r, _, _ in self.flat_arcs:
            pts.append(np.array([[cx - r, cy - r], [cx + r, cy + r]]))
        allp = np.concatenate(pts, axis=0)
        lo, hi = allp.min(axis=0), allp.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @property
    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bbox
        return math.hypot(x1 - x0, y1 - y0)

    def inside_regions(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.zeros(len(pts), dtype=bool)
        for reg in self.regions:
            out |= np.asarray(reg.contains(pts), dtype=bool)
        return out

    def contains(self, pts, tol: float = GEOM_TOL) -> np.ndarray:
        return distance_field(self, pts) <= tol

    def transformed(self, scale: float = 1.0, shift=(0.0, 0.0)) -> "CompactSetModel":
        """Image under ``x -> scale*x + shift``; graphs are flattened to segments."""
        sh = np.asarray(shift, dtype=float)
        segs = self.flat_segments * scale + np.tile(sh, 2)
        arcs = [Arc(tuple(np.asarray(a.center) * scale + sh), a.radius * scale, a.start, a.sweep)
                for a in self.arcs]
        regions = []
        for reg in self.regions:
            x0, y0, x1, y1 = reg.bbox
            lo = np.array([x0, y0]) * scale + sh
            hi = np.array([x1, y1]) * scale + sh
            regions.append(PredicateRegion(
                (lambda c, s: lambda p: c((np.asarray(p) - sh) / s))(reg.contains, scale),
                (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))))
        return CompactSetModel(
            points=[tuple(p) for p in self.flat_points * scale + sh],
            segments=[(tuple(s[:2]), tuple(s[2:])) for s in segs],
            arcs=arcs, regions=regions, label=self.label)


def clip_segment_to_disc(seg, center, radius) -> Optional[np.ndarray]:
    """Part of the segment inside the closed disc, or ``None``."""
    p0, p1 = np.asarray(seg[:2], float), np.asarray(seg[2:], float)
    d = p1 - p0
    f = p0 - np.asarray(center, float)
    a = d @ d
    b = 2 * (f @ d)
    c = f @ f - radius * radius
    if a == 0.0:
        return np.concatenate([p0, p1]) if c <= 0 else None
    disc = b * b - 4 * a * c
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    t0 = max(0.0, (-b - sq) / (2 * a))
    t1 = min(1.0, (-b + sq) / (2 * a))
    if t0 > t1:
        return None
    return np.concatenate([p0 + t0 * d, p0 + t1 * d])


def point_segment_distance(p, s) -> tuple[float, np.ndarray]:
    """Distance from ``p`` to the segment ``s = (a, b)`` and the nearest point."""
    p = as_point(p)
    a, b = as_point(s[0]), as_point(s[1])
    d = b - a
    dd = d @ d
    t = 0.0 if dd == 0.0 else min(1.0, max(0.0, ((p - a) @ d) / dd))
    q = a + t * d
    return float(np.hypot(*(p - q))), q


def _segment_feet(Z: np.ndarray, segs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distances (N, M) and feet (N, M, 2) from N points to M segments."""
    a = segs[None, :, :2]
    d = segs[None, :, 2:] - segs[None, :, :2]
    dd = np.einsum("...k,...k->...", d, d)
    w = Z[:, None, :] - a
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(dd > 0, np.einsum("...k,...k->...", w, d) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    feet = a + t[..., None] * d
    diff = Z[:, None, :] - feet
    return np.hypot(diff[..., 0], diff[..., 1]), feet


def _arc_feet(Z: np.ndarray, arcs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = arcs[None, :, :2]
    r = arcs[None, :, 2]
    start, sweep = arcs[None, :, 3], arcs[None, :, 4]
    w = Z[:, None, :] - c
    phi = np.arctan2(w[..., 1], w[..., 0])
    rel = np.mod(phi - start, TWO_PI)
    inside = rel <= sweep + 1e-15
    on_arc = c + r[..., None] * np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    e0 = c + r[..., None] * np.stack([np.cos(start), np.sin(start)], axis=-1)
    e1 = c + r[..., None] * np.stack([np.cos(start + sweep), np.sin(start + sweep)], axis=-1)
    d0 = np.hypot(*np.moveaxis(Z[:, None, :] - e0, -1, 0))
    d1 = np.hypot(*np.moveaxis(Z[:, None, :] - e1, -1, 0))
    end_feet = np.where((d0 <= d1)[..., None], e0, e1)
    feet = np.where(inside[..., None], on_arc, end_feet)
    dist = np.where(inside, np.abs(np.hypot(w[..., 0], w[..., 1]) - r), np.minimum(d0, d1))
    return dist, feet


def _feet(model: CompactSetModel, Z: np.ndarray):
    ds, fs = [], []
    pts = model.flat_points
    if len(pts):
        diff = Z[:, None, :] - pts[None]
        ds.append(np.hypot(diff[..., 0], diff[..., 1]))
        fs.append(np.broadcast_to(pts[None], diff.shape))
    if len(model.flat_segments):
        d, f = _segment_feet(Z, model.flat_segments)
        ds.append(d)
        fs.append(f)
    if len(model.flat_arcs):
        d, f = _arc_feet(Z, model.flat_arcs)
        ds.append(d)
        fs.append(f)
    return np.concatenate(ds, axis=1), np.concatenate(fs, axis=1)


def primitive_distances(model: CompactSetModel, Z) -> np.ndarray:
    """Distance from each query to each primitive (regions ignored), shape (N, M)."""
    Z = np.asarray(Z, dtype=float).reshape(-1, 2)
    return _feet(model, Z)[0]


def distance_field(model: CompactSetModel, Z, chunk: int = 4096) -> np.ndarray:
    """Vectorised ``d_A`` at the rows of ``Z``."""
    Z = np.asarray(Z, dtype=float).reshape(-1, 2)
    out = np.empty(len(Z))
    n_prim = max(1, len(model.flat_points) + len(model.flat_segments) + len(model.flat_arcs))
    step = max(1, chunk * 64 // n_prim)
    for i in range(0, len(Z), step):
        out[i:i + step] = _feet(model, Z[i:i + step])[0].min(axis=1)
    if model.regions:
        out[model.inside_regions(Z)] = 0.0
    return out


def default_tau(z) -> float:
    return 1e-9 * (1.0 + float(np.hypot(*as_point(z))))


def dedupe_points(pts: Sequence, spacing: float) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in pts:
        if all(np.hypot(*(p - q)) > spacing for q in out):
            out.append(np.asarray(p, dtype=float))
    return out


def metric_projection(z, A: CompactSetModel, tau: Optional[float] = None):
    """``(dist(z, A), nearest points)``.

    All primitive feet within ``tau`` of the minimum are returned, merged at
    spacing ``tau``.  Points of ``A`` (distance at most ``tau``) give
    ``(0.0, [z])``.
    """
    z = as_point(z)
    tau = default_tau(z) if tau is None else float(tau)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if A.regions and A.inside_regions(z[None])[0]:
        return 0.0, [z]
    d, feet = _feet(A, z[None])
    d, feet = d[0], feet[0]
    dmin = float(d.min())
    if dmin <= tau:
        return 0.0, [z]
    near = feet[d <= dmin + tau]
    # a query at the centre of an arc is equidistant to the whole arc
    for cx, cy, r, start, sweep in A.flat_arcs:
        if math.hypot(z[0] - cx, z[1] - cy) <= tau and abs(r - dmin) <= tau:
            ang = start + np.linspace(0.0, sweep, 9)
            near = np.concatenate([near, np.stack([cx + r * np.cos(ang), cy + r * np.sin(ang)], 1)])
    return dmin, dedupe_points(near, max(tau, 1e-15))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points, tol: float = 1e-12) -> list[np.ndarray]:
    """Monotone chain hull, counterclockwise, collinear points dropped."""
    pts = sorted({(float(p[0]), float(p[1])) for p in np.asarray(points, float).reshape(-1, 2)})
    pts = [np.array(p) for p in pts]
    pts = dedupe_points(pts, tol)
    pts.sort(key=lambda p: (p[0], p[1]))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= tol:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= tol:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and np.allclose(hull[0], hull[1]):
        return hull[:1]
    return hull


@dataclass(frozen=True)
class SubdiffHull:
    """Convex polygon (possibly a point or a segment), vertices counterclockwise."""

    vertices: tuple = field(default=())

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("empty hull")
        object.__setattr__(self, "vertices", tuple(tuple(map(float, v)) for v in self.vertices))

    @classmethod
    def from_points(cls, pts, tol: float = 1e-12) -> "SubdiffHull":
        return cls(tuple(tuple(v) for v in convex_hull(pts, tol)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def scaled(self, alpha: float) -> "SubdiffHull":
        return SubdiffHull.from_points(self.array * alpha)

    def support(self, v) -> float:
        """``max <v, nu>`` over the hull."""
        return float((self.array @ as_point(v)).max())


def distance_point_to_hull(p, H: SubdiffHull) -> float:
    p = as_point(p)
    V = H.array
    if len(V) == 1:
        return float(np.hypot(*(p - V[0])))
    if len(V) == 2:
        return point_segment_distance(p, (V[0], V[1]))[0]
    n = len(V)
    if all(_cross(V[i], V[(i + 1) % n], p) >= -1e-15 for i in range(n)):
        return 0.0
    return min(point_segment_distance(p, (V[i], V[(i + 1) % n]))[0] for i in range(n))


def distance_origin_to_hull(H: SubdiffHull) -> float:
    """Euclidean distance from 0 to the hull (0 when the hull contains it)."""
    return distance_point_to_hull((0.0, 0.0), H)


def hull_hausdorff(H1: SubdiffHull, H2: SubdiffHull) -> float:
    """Hausdorff distance of two convex polygons (attained at vertices)."""
    a = max(distance_point_to_hull(v, H2) for v in H1.array)
    b = max(distance_point_to_hull(v, H1) for v in H2.array)
    return max(a, b)


def boundary_samples(model: CompactSetModel, spacing: float) -> np.ndarray:
    """Points of the 1-D primitives at arc-length spacing at most ``spacing``."""
    out = [model.flat_points]
    for s in model.flat_segments:
        n = max(1, int(math.ceil(math.hypot(s[2] - s[0], s[3] - s[1]) / spacing)))
        t = np.linspace(0.0, 1.0, n + 1)[:, None]
        out.append(s[:2] + t * (s[2:] - s[:2]))
    for cx, cy, r, start, sweep in model.flat_arcs:
        n = max(1, int(math.ceil(r * sweep / spacing)))
        ang = start + np.linspace(0.0, sweep, n + 1)
        out.append(np.stack([cx + r * np.cos(ang), cy + r * np.sin(ang)], axis=1))
    return np.concatenate(out, axis=0)


def interior_samples(model: CompactSetModel, spacing: float) -> np.ndarray:
    """Lattice points of spacing ``spacing`` inside the 2-D pieces."""
    out = [np.zeros((0, 2))]
    for reg in model.regions:
        x0, y0, x1, y1 = reg.bbox
        xs = np.arange(x0, x1 + spacing, spacing)
        ys = np.arange(y0, y1 + spacing, spacing)
        X, Y = np.meshgrid(xs, ys)
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        out.append(pts[np.asarray(reg.contains(pts), dtype=bool)])
    return np.concatenate(out, axis=0)


class HausdorffEstimate(NamedTuple):
    distance: float
    error_bound: float


def hausdorff_distance(K1: CompactSetModel, K2: CompactSetModel, resolution: float) -> HausdorffEstimate:
    """Two-sided sup-inf distance over discretisations of spacing ``resolution``.

    Each side uses exact distances to the other set, so the only error is
    the discretisation of the side being maximised over; since distance
    functions are 1-Lipschitz it is bounded by ``resolution``.  Finite point
    sets are handled exactly.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")

    def one_side(A, B):
        S = np.concatenate([boundary_samples(A, resolution), interior_samples(A, resolution)])
        return float(distance_field(B, S).max())

    d = max(one_side(K1, K2), one_side(K2, K1))
    exact = all(not (K.segments or K.arcs or K.pl_graphs or K.regions) for K in (K1, K2))
    return HausdorffEstimate(d, 0.0 if exact else resolution)


def primitive_feet(model: CompactSetModel, Z) -> tuple[np.ndarray, np.ndarray]:
    """Distances ``(N, M)`` and nearest points ``(N, M, 2)`` per primitive."""
    Z = np.asarray(Z, dtype=float).reshape(-1, 2)
    return _feet(model, Z)
