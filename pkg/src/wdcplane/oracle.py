"""Brute-force reference distances.

Everything here is deliberately naive and shares no code with
:mod:`wdcplane.geometry`: sets are replaced by dense samples and distances
by nearest-sample searches.  Profiles are read through
:meth:`DCFun1.evaluate`, and 2-D pieces through their own membership
predicates, since those define the set being sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .dc1 import as_fraction, lipschitz_constant
from .geometry import CompactSetModel


@dataclass
class DenseSample:
    """Samples covering a set to within ``delta``.

    ``next_index[i]`` is the following sample on the same curve (or -1) so
    that :func:`brute_distance` can optionally polish against the chords.
    """

    points: np.ndarray
    delta: float
    next_index: np.ndarray
    regions: tuple = ()
    _tree: cKDTree = field(init=False, repr=False)

    def __post_init__(self):
        self._tree = cKDTree(self.points)


def _sample_segment(a, b, delta):
    n = max(1, math.ceil(math.hypot(b[0] - a[0], b[1] - a[1]) / delta))
    t = np.arange(n + 1) / n
    return np.column_stack([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])


def _sample_graph(g, delta):
    a, b = (float(as_fraction(t)) for t in g.interval)
    lip = float(lipschitz_constant(g.profile, g.interval[0], g.interval[1]))
    n = max(1, math.ceil((b - a) * math.sqrt(1 + lip * lip) / delta))
    us = np.union1d(np.linspace(a, b, n + 1),
                    [float(x) for x in g.profile.pl.xs if a < float(x) < b])
    vs = g.profile.evaluate(us)
    c, s = math.cos(g.theta), math.sin(g.theta)
    pts = np.column_stack([g.anchor[0] + c * us - s * vs, g.anchor[1] + s * us + c * vs])
    if g.clip_radius is None:
        return [pts]
    keep = np.hypot(pts[:, 0] - g.clip_center[0], pts[:, 1] - g.clip_center[1]) <= g.clip_radius
    chains, start = [], None
    for i, k in enumerate(np.append(keep, False)):
        if k and start is None:
            start = i
        elif not k and start is not None:
            chains.append(pts[start:i])
            start = None
    return chains


def _sample_arc(arc, delta):
    n = max(1, math.ceil(arc.radius * arc.sweep / delta))
    ang = arc.start + arc.sweep * np.arange(n + 1) / n
    return np.column_stack([arc.center[0] + arc.radius * np.cos(ang),
                            arc.center[1] + arc.radius * np.sin(ang)])


def densify(A: CompactSetModel, delta: float | None = None) -> DenseSample:
    """Sample every primitive of ``A`` at arc-length spacing at most ``delta``.

    The default spacing is ``1e-5`` times the model diameter.
    """
    if delta is None:
        delta = 1e-5 * max(_rough_diameter(A), 1e-12)
    if delta <= 0:
        raise ValueError("delta must be positive")
    chains = [np.array([p]) for p in A.points]
    chains += [_sample_segment(a, b, delta) for a, b in A.segments]
    chains += [_sample_arc(arc, delta) for arc in A.arcs]
    for g in A.pl_graphs:
        chains += _sample_graph(g, delta)
    chains = [c for c in chains if len(c)]
    pts = np.concatenate(chains, axis=0)
    nxt = np.full(len(pts), -1)
    off = 0
    for c in chains:
        if len(c) > 1:
            nxt[off:off + len(c) - 1] = np.arange(off + 1, off + len(c))
        off += len(c)
    return DenseSample(pts, float(delta), nxt, tuple(A.regions))


def _rough_diameter(A: CompactSetModel) -> float:
    pts = [np.asarray(p) for p in A.points]
    for a, b in A.segments:
        pts += [np.asarray(a), np.asarray(b)]
    for arc in A.arcs:
        c = np.asarray(arc.center)
        pts += [c - arc.radius, c + arc.radius]
    for g in A.pl_graphs:
        if g.clip_radius is not None:
            c = np.asarray(g.clip_center)
            pts += [c - g.clip_radius, c + g.clip_radius]
        else:
            a, b = (float(as_fraction(t)) for t in g.interval)
            pts += [np.asarray(g.anchor) - (b - a), np.asarray(g.anchor) + (b - a)]
    P = np.array(pts, dtype=float)
    return float(np.hypot(*(P.max(axis=0) - P.min(axis=0))))


def brute_distance(y, s: DenseSample, polish: bool = False, k: int = 8) -> np.ndarray:
    """Distance from each query to the nearest sample.

    Plain mode is within ``s.delta`` of the true distance.  With
    ``polish=True`` the distance to the chords between the ``k`` nearest
    samples and their successors is used instead, which is exact for
    polygonal pieces sampled at their vertices.
    """
    Y = np.asarray(y, dtype=float).reshape(-1, 2)
    kk = min(k, len(s.points)) if polish else 1
    d, idx = s._tree.query(Y, k=kk)
    if polish:
        d = np.atleast_2d(d).reshape(len(Y), kk)
        idx = np.atleast_2d(idx).reshape(len(Y), kk)
        prev = np.full(len(s.points), -1)
        prev[s.next_index[s.next_index >= 0]] = np.nonzero(s.next_index >= 0)[0]
        best = d.min(axis=1)
        for nb in (s.next_index, prev):
            j = nb[idx]
            ok = j >= 0
            a = s.points[idx]
            b = s.points[np.where(ok, j, idx)]
            ab = b - a
            L2 = np.einsum("...k,...k->...", ab, ab)
            t = np.where(L2 > 0, np.einsum("...k,...k->...", Y[:, None, :] - a, ab) / np.where(L2 > 0, L2, 1), 0)
            t = np.clip(t, 0, 1)
            foot = a + t[..., None] * ab
            dc = np.hypot(*np.moveaxis(Y[:, None, :] - foot, -1, 0))
            best = np.minimum(best, np.where(ok, dc, np.inf).min(axis=1))
        d = best
    d = np.asarray(d, dtype=float).reshape(len(Y))
    for reg in s.regions:
        d[np.asarray(reg.contains(Y), dtype=bool)] = 0.0
    return d
