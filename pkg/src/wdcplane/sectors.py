"""DC sectors and the local models of planar locally WDC sets.

Profiles are exact :class:`~wdcplane.dc1.DCFun1` values, so all the sector
conditions (``f(0) = 0``, one-sided slopes, radial monotonicity, ``g <= f``)
are decided exactly.  Rotations and membership tests are floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .dc1 import DCFun1, as_fraction, dc_restrict, radial_monotonicity
from .geometry import (
    TWO_PI,
    Arc,
    CompactSetModel,
    PLGraph,
    PredicateRegion,
    rotation,
    to_local,
)


def _covers(f: DCFun1, a: Fraction, b: Fraction) -> bool:
    lo, hi = f.domain
    return (lo is None or lo <= a) and (hi is None or hi >= b)


@dataclass(frozen=True)
class BasicOpenSector:
    """``rot(theta)(U(0, r) & {|u| < omega, v > f(u)})``."""

    theta: float
    radius: Fraction
    omega: Fraction
    profile: DCFun1

    def __post_init__(self):
        object.__setattr__(self, "radius", as_fraction(self.radius))
        object.__setattr__(self, "omega", as_fraction(self.omega))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def cs(self) -> tuple[float, float]:
        return rotation(self.theta)


@dataclass(frozen=True)
class DegenerateClosedSector:
    """``rot(theta)({0 <= u < omega, g(u) <= v <= f(u)}) & U(0, r)``."""

    theta: float
    radius: Fraction
    omega: Fraction
    upper: DCFun1
    lower: DCFun1

    def __post_init__(self):
        object.__setattr__(self, "radius", as_fraction(self.radius))
        object.__setattr__(self, "omega", as_fraction(self.omega))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def cs(self) -> tuple[float, float]:
        return rotation(self.theta)


Sector = Union[BasicOpenSector, DegenerateClosedSector]


@dataclass(frozen=True)
class PRZLocalModel:
    """Local shape of a planar WDC set around a boundary point ``center``.

    ``kind`` is ``"isolated"``, ``"degenerate"`` (one closed sector in
    ``degenerate``) or ``"complement"`` (the ball minus the open
    ``sectors``).
    """

    center: tuple
    rho: Fraction
    kind: str
    degenerate: Optional[DegenerateClosedSector] = None
    sectors: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "rho", as_fraction(self.rho))
        object.__setattr__(self, "sectors", tuple(self.sectors))
        if self.kind not in ("isolated", "degenerate", "complement"):
            raise ValueError(f"unknown model kind {self.kind!r}")


def _first_slope(f: DCFun1) -> Fraction:
    return f.slope_right_of(Fraction(0))


def validate_sector(s: Sector) -> list[str]:
    """Names of the violated sector conditions; empty when ``s`` is valid."""
    out = []
    if not (0 < s.radius < s.omega):
        out.append("need 0 < r < omega")
    if isinstance(s, BasicOpenSector):
        f = s.profile
        if not _covers(f, -s.omega, s.omega):
            return out + ["profile domain does not cover [-omega, omega]"]
        if f(0) != 0:
            out.append("f(0) ≠ 0")
        fr = dc_restrict(f, -s.omega, s.omega)
        if not radial_monotonicity(fr, "right_increasing"):
            out.append("R not strictly increasing on [0, omega)")
        if not radial_monotonicity(fr, "left_decreasing"):
            out.append("R not strictly decreasing on (-omega, 0]")
        return out
    for name, f in (("f", s.upper), ("g", s.lower)):
        if not _covers(f, Fraction(0), s.omega):
            out.append(f"{name} domain does not cover [0, omega]")
    if out and "domain" in out[-1]:
        return out
    f, g = dc_restrict(s.upper, 0, s.omega), dc_restrict(s.lower, 0, s.omega)
    grid = sorted(set(f.pl.xs) | set(g.pl.xs))
    if any(g(u) > f(u) for u in grid):
        out.append("g > f somewhere on [0, omega)")
    for name, h in (("f", f), ("g", g)):
        if h(0) != 0:
            out.append(f"{name}(0) ≠ 0")
        if _first_slope(h) != 0:
            out.append(f"{name}′₊(0) ≠ 0")
        if not radial_monotonicity(h, "right_increasing"):
            out.append(f"R_{name} not strictly increasing on [0, omega)")
    return out


def sector_contains(s: Sector, p, center=(0.0, 0.0)):
    """Membership of ``p`` (a point or an ``(N, 2)`` array) in ``center + s``."""
    P = np.asarray(p, dtype=float)
    single = P.ndim == 1
    P = P.reshape(-1, 2)
    u, v = to_local(P, center, s.cs)
    r = np.hypot(u, v)
    om = float(s.omega)
    if isinstance(s, BasicOpenSector):
        uc = np.clip(u, -om, om)
        out = (r < float(s.radius)) & (np.abs(u) < om) & (v > s.profile.evaluate(uc))
    else:
        uc = np.clip(u, 0.0, om)
        out = ((r < float(s.radius)) & (u >= 0) & (u < om)
               & (v >= s.lower.evaluate(uc)) & (v <= s.upper.evaluate(uc)))
    return bool(out[0]) if single else out


def radius_crossing(f: DCFun1, R: float, side: int = 1) -> float:
    """The ``u`` with ``sign(u) == side`` and ``u**2 + f(u)**2 == R**2``.

    Relies on ``R(u)`` being strictly monotone on that side.
    """
    pl = f.pl
    xs = [float(x) for x in pl.xs]
    ys = [float(y) for y in pl.ys]
    pieces = list(zip(xs, xs[1:], ys, ys[1:]))
    if side < 0:
        pieces = [(x0, x1, y0, y1) for x0, x1, y0, y1 in reversed(pieces)]
    for x0, x1, y0, y1 in pieces:
        lo, hi = (max(x0, 0.0), x1) if side > 0 else (x0, min(x1, 0.0))
        if hi <= lo:
            continue
        a = (y1 - y0) / (x1 - x0)
        b = y0 - a * x0
        far = hi if side > 0 else lo
        if far * far + (a * far + b) ** 2 < R * R:
            continue
        # (1 + a^2) u^2 + 2ab u + b^2 - R^2 = 0
        qa, qb, qc = 1 + a * a, 2 * a * b, b * b - R * R
        disc = math.sqrt(max(qb * qb - 4 * qa * qc, 0.0))
        roots = [(-qb + disc) / (2 * qa), (-qb - disc) / (2 * qa)]
        roots = [u for u in roots if lo - 1e-12 <= u <= hi + 1e-12]
        if roots:
            return max(roots) if side > 0 else min(roots)
    raise ValueError(f"profile never reaches radius {R} on side {side}")


def _graph_angle(f: DCFun1, u: float) -> float:
    return math.atan2(float(f.evaluate(u)), u)


def angular_support(s: BasicOpenSector) -> tuple[float, float]:
    """``(start, width)`` of an open arc of directions containing the sector."""
    f = dc_restrict(s.profile, -s.omega, s.omega)
    r = float(s.radius)
    up, um = radius_crossing(f, r, 1), radius_crossing(f, r, -1)
    a0 = f.slope_right_of(Fraction(0))
    # slope just left of 0
    left_xs = [x for x in f.pl.xs if x < 0]
    a1 = (f(0) - f(left_xs[-1])) / (0 - left_xs[-1]) if left_xs else a0
    right_pts = [float(x) for x in f.pl.xs if 0 < float(x) < up] + [up]
    left_pts = [float(x) for x in f.pl.xs if um < float(x) < 0] + [um]
    lo = min([math.atan2(float(a0), 1.0)] + [_graph_angle(f, u) for u in right_pts])
    hi = max([math.atan2(-float(a1), -1.0) % TWO_PI]
             + [_graph_angle(f, u) % TWO_PI for u in left_pts])
    return s.theta + lo, hi - lo


def _arcs_disjoint(a, b, tol=1e-12) -> bool:
    (s1, w1), (s2, w2) = a, b
    return (s2 - s1) % TWO_PI >= w1 - tol and (s1 - s2) % TWO_PI >= w2 - tol


def disjointness_check(sectors: Sequence[BasicOpenSector], rho: Optional[float] = None) -> bool:
    """True when no two sectors share a point.

    Disjoint angular supports certify the answer exactly; otherwise a polar
    grid of spacing ``1e-3 * rho`` is searched for a common point.
    """
    sectors = list(sectors)
    if len(sectors) < 2:
        return True
    supports = [angular_support(s) for s in sectors]
    if all(_arcs_disjoint(supports[i], supports[j])
           for i in range(len(sectors)) for j in range(i + 1, len(sectors))):
        return True
    rho = float(min(s.radius for s in sectors)) if rho is None else float(rho)
    h = 1e-3 * rho
    for r in np.arange(h, rho, h):
        n = max(8, int(math.ceil(TWO_PI * r / h)))
        ang = np.arange(n) * (TWO_PI / n)
        P = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
        count = sum(sector_contains(s, P).astype(int) for s in sectors)
        if np.any(count > 1):
            return False
    return True


def validate_model(m: PRZLocalModel) -> list[str]:
    out = []
    if not m.rho > 0:
        out.append("rho must be positive")
    if m.kind == "degenerate":
        if m.degenerate is None:
            return out + ["degenerate model without a sector"]
        if m.degenerate.radius != m.rho:
            out.append("sector radius differs from rho")
        out += validate_sector(m.degenerate)
    elif m.kind == "complement":
        if not m.sectors:
            return out + ["complement model without sectors"]
        for i, s in enumerate(m.sectors):
            if s.radius != m.rho:
                out.append(f"sector {i}: radius differs from rho")
            out += [f"sector {i}: {v}" for v in validate_sector(s)]
        if not out and not disjointness_check(m.sectors, m.rho):
            out.append("sectors are not pairwise disjoint")
    return out


def _disc_region(center, R, inside) -> PredicateRegion:
    c = np.asarray(center, dtype=float)

    def contains(P):
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        return (np.hypot(P[:, 0] - c[0], P[:, 1] - c[1]) <= R) & inside(P)

    return PredicateRegion(contains, (c[0] - R, c[1] - R, c[0] + R, c[1] + R))


def build_local_set(m: PRZLocalModel, shrink: float = 1e-3) -> CompactSetModel:
    """The compact set ``M & B(x, rho (1 - shrink))`` described by ``m``."""
    problems = validate_model(m)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie in (0, 1)")
    x = m.center
    R = float(m.rho) * (1.0 - shrink)
    if m.kind == "isolated":
        return CompactSetModel(points=[x], label="isolated")

    if m.kind == "degenerate":
        s = m.degenerate
        f, g = dc_restrict(s.upper, 0, s.omega), dc_restrict(s.lower, 0, s.omega)
        graphs = [PLGraph(h, (Fraction(0), s.omega), s.theta, x, x, R) for h in (f, g)]
        if f.pl == g.pl:
            return CompactSetModel(pl_graphs=graphs[:1], label="degenerate")
        uf, ug = radius_crossing(f, R), radius_crossing(g, R)
        phi_f = s.theta + math.atan2(float(f.evaluate(uf)), uf)
        phi_g = s.theta + math.atan2(float(g.evaluate(ug)), ug)
        arc = Arc(x, R, phi_g, phi_f - phi_g)

        region = _degenerate_region(s, f, g, x, R)
        return CompactSetModel(pl_graphs=graphs, arcs=[arc], regions=[region], label="degenerate")

    graphs, blocked = [], []
    for s in m.sectors:
        f = dc_restrict(s.profile, -s.omega, s.omega)
        graphs.append(PLGraph(f, (-s.omega, s.omega), s.theta, x, x, R))
        up, um = radius_crossing(f, R, 1), radius_crossing(f, R, -1)
        a_in = s.theta + math.atan2(float(f.evaluate(up)), up)
        a_out = s.theta + math.atan2(float(f.evaluate(um)), um)
        blocked.append((a_in % TWO_PI, (a_out - a_in) % TWO_PI))
    arcs = [Arc(x, R, start, sweep) for start, sweep in _complement_arcs(blocked) if sweep > 1e-12]
    sectors = m.sectors

    def outside_sectors(P):
        hit = np.zeros(len(P), dtype=bool)
        for s in sectors:
            hit |= sector_contains(s, P, x)
        return ~hit

    return CompactSetModel(pl_graphs=graphs, arcs=arcs, regions=[_disc_region(x, R, outside_sectors)],
                           label=f"complement-{len(sectors)}")


def _degenerate_region(s: DegenerateClosedSector, f: DCFun1, g: DCFun1, x, R) -> PredicateRegion:
    om = float(s.omega)

    def between(P):
        u, v = to_local(P, x, s.cs)
        uc = np.clip(u, 0.0, om)
        return (u >= 0) & (u <= om) & (v >= g.evaluate(uc)) & (v <= f.evaluate(uc))

    return _disc_region(x, R, between)


def _complement_arcs(blocked):
    """Closed arcs of the circle left after removing open arcs ``(start, sweep)``."""
    if not blocked:
        return [(0.0, TWO_PI)]
    blocked = sorted(blocked)
    # merge overlapping open arcs, walking once around the circle
    merged = []
    for start, sweep in blocked:
        if merged and start <= merged[-1][0] + merged[-1][1]:
            s0, w0 = merged[-1]
            merged[-1] = (s0, max(w0, start + sweep - s0))
        else:
            merged.append((start, sweep))
    out = []
    for i, (start, sweep) in enumerate(merged):
        nxt_start = merged[(i + 1) % len(merged)][0] + (TWO_PI if i + 1 == len(merged) else 0.0)
        gap = nxt_start - (start + sweep)
        if gap > 0:
            out.append(((start + sweep) % TWO_PI, gap))
    return out
