"""Auras of planar WDC sets and weak-regularity checks.

An aura is a DC function that agrees with the distance function ``d_A`` in
a small ball around a boundary point.  Near a degenerate point it is the
piecewise function ``d~`` built from clamped extensions of the two sector
profiles; :func:`tilde_distance` evaluates it and :func:`region_classify`
says which piece applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .clarke import fu_subdifferential
from .dc1 import DCFun1, as_fraction, dc_from_pl, dc_restrict, extend_clamped, lipschitz_constant
from .geometry import (
    CompactSetModel,
    PLGraph,
    PredicateRegion,
    boundary_samples,
    distance_field,
    distance_origin_to_hull,
    metric_projection,
    primitive_feet,
    rotation,
    to_local,
)
from .sectors import DegenerateClosedSector, PRZLocalModel, sector_contains, validate_model


class RegionTag(IntEnum):
    M0 = 0  # between the extended profiles
    M1 = 1  # above
    M2 = 2  # below
    M3 = 3  # behind the vertex


@dataclass(frozen=True)
class DegenerateAuraData:
    """Clamped extensions ``f~`` (upper) and ``g~`` (lower) of a degenerate sector."""

    L: Fraction
    upper: DCFun1
    lower: DCFun1
    rho: Fraction

    @classmethod
    def from_profiles(cls, f: DCFun1, g: DCFun1, rho, L=None) -> "DegenerateAuraData":
        rho = as_fraction(rho)
        f, g = dc_restrict(f, 0, rho), dc_restrict(g, 0, rho)
        if L is None:
            L = max(lipschitz_constant(f), lipschitz_constant(g))
            L = L if L > 0 else Fraction(1)
        L = as_fraction(L)
        if L <= 0:
            raise ValueError("L must be positive")
        return cls(L, extend_clamped(f, "upper_sector", L), extend_clamped(g, "lower_sector", L), rho)

    @classmethod
    def from_sector(cls, s: DegenerateClosedSector, rho=None, L=None) -> "DegenerateAuraData":
        return cls.from_profiles(s.upper, s.lower, s.radius if rho is None else rho, L)

    @property
    def gradient_floor(self) -> float:
        """Lower bound for ``|grad d~|`` off ``M0`` and the vertex wedge."""
        L = float(self.L)
        return 1.0 / math.sqrt(4 * L * L + 1)


def _as_rows(y) -> tuple[np.ndarray, bool]:
    Y = np.asarray(y, dtype=float)
    return Y.reshape(-1, 2), Y.ndim == 1


def region_classify(y, data: DegenerateAuraData):
    """Piece index of ``d~`` at ``y`` (local coordinates); overlaps go to the lower index."""
    Y, single = _as_rows(y)
    u, v = Y[:, 0], Y[:, 1]
    F, G = data.upper.evaluate(u), data.lower.evaluate(u)
    slope = 1.0 / (2.0 * float(data.L))
    right = u >= 0
    tag = np.full(len(Y), int(RegionTag.M3))
    m2 = (right & (v < G)) | (~right & (v < slope * u))
    m1 = (right & (v > F)) | (~right & (v > -slope * u))
    m0 = right & (G <= v) & (v <= F)
    tag[m2] = RegionTag.M2
    tag[m1] = RegionTag.M1
    tag[m0] = RegionTag.M0
    return RegionTag(int(tag[0])) if single else tag


def graph_distance(Y: np.ndarray, f: DCFun1) -> np.ndarray:
    """Distance from the rows of ``Y`` to the graph of a total PL ``f``."""
    if not f.is_total():
        raise ValueError("graph_distance needs a total profile")
    xs, ys, ls, rs = f._float
    V = np.column_stack([xs, ys])
    best = np.full(len(Y), np.inf)
    for a, b in zip(V[:-1], V[1:]):
        ab = b - a
        t = np.clip(((Y - a) @ ab) / (ab @ ab), 0.0, 1.0)
        best = np.minimum(best, np.hypot(*(Y - a - t[:, None] * ab).T))
    for p, d in ((V[0], np.array([-1.0, -ls])), (V[-1], np.array([1.0, rs]))):
        d = d / np.hypot(*d)
        t = np.maximum((Y - p) @ d, 0.0)
        best = np.minimum(best, np.hypot(*(Y - p - t[:, None] * d).T))
    return best


def tilde_distance(y, data: DegenerateAuraData):
    """``d~(y)``: 0 on M0, distance to the graph of ``f~`` (``g~``) on M1 (M2), ``|y|`` on M3."""
    Y, single = _as_rows(y)
    tag = region_classify(Y, data) if not single else np.array([int(region_classify(Y[0], data))])
    out = np.zeros(len(Y))
    for k, fn in ((1, data.upper), (2, data.lower)):
        mask = tag == k
        if mask.any():
            out[mask] = graph_distance(Y[mask], fn)
    mask = tag == 3
    out[mask] = np.hypot(Y[mask, 0], Y[mask, 1])
    return float(out[0]) if single else out


def m0_model(data: DegenerateAuraData, width=None) -> CompactSetModel:
    """``M0`` cut at ``u = width`` (default ``4 rho``) as a compact set."""
    W = as_fraction(4 * data.rho if width is None else width)
    f, g = dc_restrict(data.upper, 0, W), dc_restrict(data.lower, 0, W)
    graphs = [PLGraph(f, (Fraction(0), W)), PLGraph(g, (Fraction(0), W))]
    fw, gw = float(f(W)), float(g(W))
    segments = [((float(W), gw), (float(W), fw))] if fw > gw else []
    wf = float(W)

    def between(P):
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        u, v = P[:, 0], P[:, 1]
        uc = np.clip(u, 0.0, wf)
        return (u >= 0) & (u <= wf) & (v >= g.evaluate(uc)) & (v <= f.evaluate(uc))

    region = PredicateRegion(between, (0.0, gw, wf, fw))
    return CompactSetModel(segments=segments, pl_graphs=graphs, regions=[region], label="M0")


@lru_cache(maxsize=64)
def _degenerate_data(m: PRZLocalModel) -> DegenerateAuraData:
    return DegenerateAuraData.from_sector(m.degenerate, m.rho)


@lru_cache(maxsize=64)
def _complement_profiles(m: PRZLocalModel) -> tuple:
    return tuple(extend_clamped(dc_restrict(s.profile, -m.rho, m.rho), "constant_both")
                 for s in m.sectors)


def aura_distance(m: PRZLocalModel, y, restrict: bool = True):
    """Aura value at ``y``.

    With ``restrict`` the queries must lie in ``U(center, rho/3)``, where
    the aura equals ``d_A``; without it the defining formula is evaluated
    everywhere.
    """
    Y, single = _as_rows(y)
    x = np.asarray(m.center)
    r = np.hypot(Y[:, 0] - x[0], Y[:, 1] - x[1])
    if restrict and np.any(r >= float(m.rho) / 3):
        raise ValueError("aura is only defined on U(center, rho/3)")
    problems = validate_model(m)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    if m.kind == "isolated":
        out = r
    elif m.kind == "degenerate":
        u, v = to_local(Y, x, m.degenerate.cs)
        out = tilde_distance(np.column_stack([u, v]), _degenerate_data(m))
    else:
        out = np.zeros(len(Y))
        for s, ft in zip(m.sectors, _complement_profiles(m)):
            inside = sector_contains(s, Y, x)
            if inside.any():
                u, v = to_local(Y[inside], x, s.cs)
                out[inside] = graph_distance(np.column_stack([u, v]), ft)
    out = np.asarray(out, dtype=float)
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# weak regularity


DEFAULT_EPS = tuple(Fraction(1, 2 ** k) for k in range(1, 17))
CERT_FORMAT = "# wdcplane-certificate v1"


@dataclass(frozen=True)
class BandScan:
    eps: float
    points: np.ndarray
    distances: np.ndarray
    hull_distances: np.ndarray

    @property
    def min_hull_distance(self) -> float:
        return float(self.hull_distances.min()) if len(self.hull_distances) else math.inf

    @property
    def worst_point(self) -> Optional[tuple]:
        if not len(self.points):
            return None
        return tuple(map(float, self.points[int(np.argmin(self.hull_distances))]))


@dataclass(frozen=True)
class RegularityCertificate:
    """Sampled evidence that ``dist(0, dd_A(z)) >= eps`` on ``0 < d_A(z) < eps``."""

    eps: Fraction
    min_hull_distance: float
    worst_point: Optional[tuple]
    n_samples: int
    seed: int
    scan: BandScan = field(repr=False, compare=False, default=None)

    def report(self) -> str:
        wp = "none" if self.worst_point is None else f"{self.worst_point[0]!r}, {self.worst_point[1]!r}"
        return "\n".join([
            CERT_FORMAT,
            f"eps = {self.eps}",
            f"samples = {self.n_samples}",
            f"min_hull_distance = {self.min_hull_distance!r}",
            f"worst_point = {wp}",
            f"seed = {self.seed}",
        ]) + "\n"


def _fan(n: int = 16) -> np.ndarray:
    return np.array([rotation(2 * math.pi * k / n) for k in range(n)])


def _boundary_length(A: CompactSetModel) -> float:
    segs = A.flat_segments
    total = float(np.hypot(segs[:, 2] - segs[:, 0], segs[:, 3] - segs[:, 1]).sum()) if len(segs) else 0.0
    arcs = A.flat_arcs
    if len(arcs):
        total += float((arcs[:, 2] * arcs[:, 4]).sum())
    return total


def refine_ties(A: CompactSetModel, Z: np.ndarray, iterations: int = 8) -> np.ndarray:
    """Move each query onto the bisector of its two nearest separated primitives.

    Newton steps on ``d_i - d_j``; queries whose two nearest feet coincide
    are dropped.  Points landing on ties are where the hull of unit vectors
    is shortest.
    """
    if len(Z) == 0:
        return Z
    D, Fe = primitive_feet(A, Z)
    if D.shape[1] < 2:
        return np.zeros((0, 2))
    rows = np.arange(len(Z))
    i1 = np.argmin(D, axis=1)
    f1 = Fe[rows, i1]
    gap = np.hypot(*(Fe - f1[:, None, :]).transpose(2, 0, 1))
    scale = 1e-9 * (1.0 + np.hypot(Z[:, 0], Z[:, 1]))
    D2 = np.where(gap > scale[:, None], D, np.inf)
    i2 = np.argmin(D2, axis=1)
    keep = np.isfinite(D2[rows, i2])
    Z, i1, i2 = Z[keep].copy(), i1[keep], i2[keep]
    rows = np.arange(len(Z))
    for _ in range(iterations):
        if not len(Z):
            break
        D, Fe = primitive_feet(A, Z)
        d1, d2 = D[rows, i1], D[rows, i2]
        ok = (d1 > 0) & (d2 > 0)
        n1 = (Z - Fe[rows, i1]) / np.where(ok, d1, 1.0)[:, None]
        n2 = (Z - Fe[rows, i2]) / np.where(ok, d2, 1.0)[:, None]
        g = n1 - n2
        g2 = (g * g).sum(axis=1)
        step = np.where(ok & (g2 > 1e-24), (d1 - d2) / np.where(g2 > 1e-24, g2, 1.0), 0.0)
        Z = Z - step[:, None] * g
    if not len(Z):
        return Z
    # keep only points where the pair is still nearest
    D, _ = primitive_feet(A, Z)
    tie = np.maximum(D[rows, i1], D[rows, i2]) <= D.min(axis=1) + 1e-9 * (1.0 + np.hypot(Z[:, 0], Z[:, 1]))
    return Z[tie]


def band_points(A: CompactSetModel, eps: float, n: int = 4000, seed: int = 0) -> np.ndarray:
    """Deterministic candidate points for the band ``0 < d_A < eps``.

    Offsets from boundary anchors along a 16-direction fan, uniform points
    of the enlarged bounding box, and tie refinements of both.
    """
    rng = np.random.default_rng(seed)
    fan = _fan()
    ts = eps * np.array([0.1, 0.4, 0.7, 0.95])
    n_anchor = max(8, n // (len(fan) * len(ts)))
    length = _boundary_length(A)
    anchors = [A.flat_points]
    if length > 0:
        anchors.append(boundary_samples(A, length / n_anchor))
    anchors = np.concatenate(anchors, axis=0)
    offs = (fan[None, :, None, :] * ts[None, None, :, None]).reshape(-1, 2)
    near = (anchors[:, None, :] + offs[None]).reshape(-1, 2)
    x0, y0, x1, y1 = A.bbox
    uni = rng.uniform([x0 - eps, y0 - eps], [x1 + eps, y1 + eps], size=(n, 2))
    Z = np.concatenate([near, uni])
    d = distance_field(A, Z)
    Z = Z[(d > 0) & (d < eps)]
    return np.concatenate([Z, refine_ties(A, Z)])


def scan_band(A: CompactSetModel, eps: float, n: int = 4000, seed: int = 0) -> BandScan:
    Z = band_points(A, eps, n, seed)
    d = distance_field(A, Z)
    band = (d > 1e-9 * (1 + np.hypot(Z[:, 0], Z[:, 1]))) & (d < eps)
    Z, d = Z[band], d[band]
    hd = np.array([distance_origin_to_hull(fu_subdifferential(z, A)) for z in Z])
    return BandScan(float(eps), Z, d, hd)


def weak_regularity_certificate(A: CompactSetModel, eps_candidates: Optional[Sequence] = None,
                                n: int = 4000, seed: int = 0) -> Optional[RegularityCertificate]:
    """Largest candidate ``eps`` whose sampled band has hull distances ``>= eps``.

    Candidates default to ``1/2, 1/4, ..., 2**-16`` and are tried in
    decreasing order.  Returns ``None`` if none passes.
    """
    cands = sorted((as_fraction(e) for e in (DEFAULT_EPS if eps_candidates is None else eps_candidates)),
                   reverse=True)
    for eps in cands:
        if eps <= 0:
            raise ValueError("eps candidates must be positive")
        scan = scan_band(A, float(eps), n, seed)
        if scan.min_hull_distance >= float(eps):
            return RegularityCertificate(eps, scan.min_hull_distance, scan.worst_point,
                                         len(scan.points), seed, scan)
    return None


# ---------------------------------------------------------------------------
# graph lemma


@dataclass(frozen=True)
class GraphLemmaReport:
    """Worst normalised margins over the trials; all ratios are ``>= 1`` when the bounds hold.

    ``xi_ratio = |xi_2| sqrt(1 + L^2)``, ``u_ratio = L r / (sqrt(1 + L^2) |u|)``
    and ``v_ratio = -v sqrt(1 + L^2) / r`` for each nearest point ``(u, v)``
    relative to ``z`` (mirrored so the graph lies below), ``r = d(z)``.
    """

    trials: int
    min_xi_ratio: float
    min_u_ratio: float
    min_v_ratio: float
    violations: int

    @property
    def holds(self) -> bool:
        return self.violations == 0


def graph_lemma_margins(f: DCFun1, z, L) -> tuple[float, float, float]:
    """``(xi_ratio, u_ratio, v_ratio)`` at one point ``z`` off the graph of a total ``f``."""
    z = np.asarray(z, dtype=float)
    L = float(L)
    h = abs(z[1] - float(f.evaluate(z[0])))
    if h == 0:
        raise ValueError("z lies on the graph")
    half = as_fraction(2 * h + 1)
    zu = as_fraction(float(z[0]))
    A = CompactSetModel(pl_graphs=[PLGraph(f, (zu - half, zu + half))])
    r, P = metric_projection(z, A)
    H = fu_subdifferential(z, A)
    k = math.sqrt(1 + L * L)
    xi = min(abs(p[1]) for p in H.vertices) * k
    mirror = 1.0 if float(f.evaluate(z[0])) < z[1] else -1.0
    u_ratio, v_ratio = math.inf, math.inf
    for p in P:
        du, dv = p[0] - z[0], mirror * (p[1] - z[1])
        if abs(du) > 1e-12 * (1.0 + r):
            u_ratio = min(u_ratio, float(L * r / (k * abs(du))))
        v_ratio = min(v_ratio, float(-dv * k / r))
    return xi, u_ratio, v_ratio


def verify_graph_lemma(f: DCFun1, trials: int = 100, seed: int = 0, L=None,
                       box: float = 10.0, tol: float = 1e-9) -> GraphLemmaReport:
    """Check the gradient and projection bounds at random points of ``B(0, box)`` off the graph."""
    if not f.is_total():
        raise ValueError("the graph lemma concerns functions on the whole line")
    lip = lipschitz_constant(f)
    L = lip if L is None else as_fraction(L)
    if L < lip:
        raise ValueError(f"L={L} below the Lipschitz constant {lip}")
    rng = np.random.default_rng(seed)
    worst = [math.inf] * 3
    bad = done = 0
    while done < trials:
        rad, ang = box * math.sqrt(rng.uniform()), rng.uniform(0, 2 * math.pi)
        z = (rad * math.cos(ang), rad * math.sin(ang))
        if abs(z[1] - float(f.evaluate(z[0]))) < 1e-6:
            continue
        m = graph_lemma_margins(f, z, L)
        worst = [min(a, b) for a, b in zip(worst, m)]
        bad += any(x < 1 - tol for x in m)
        done += 1
    return GraphLemmaReport(trials, *worst, bad)


def random_lipschitz_pl(rng: np.random.Generator, L, k: int = 5) -> DCFun1:
    """Random total PL function with at most ``k`` breakpoints in ``[-5, 5]`` and slopes in ``[-L, L]``.

    Data are multiples of ``1/64`` so everything stays exact.
    """
    L = as_fraction(L)
    xs = sorted({Fraction(round(x * 64), 64) for x in rng.uniform(-5, 5, k)})
    slopes = [max(-L, min(L, Fraction(round(s * 64), 64))) for s in rng.uniform(-float(L), float(L), len(xs) + 1)]
    ys = [Fraction(round(rng.uniform(-2, 2) * 64), 64)]
    for a, b, s in zip(xs, xs[1:], slopes[1:]):
        ys.append(ys[-1] + s * (b - a))
    return dc_from_pl(xs, ys, slopes[0], slopes[-1])
