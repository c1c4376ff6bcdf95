"""The function space X on B(0, 4) and truncated membership checks.

``X`` holds the 1-Lipschitz functions ``B(0, 4) -> [0, 4]`` that are at
least 1 outside ``U(0, 3)``.  :func:`psi` sends a compact ``K`` of the unit
ball to its restricted distance function.  Membership of such a function in
the weakly regular class is a four-quantifier statement; here every
quantifier is truncated to a finite dyadic range, so the verdicts only speak
about the truncation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .dc1 import as_fraction
from .geometry import CompactSetModel, distance_field, rotation

OUTER_RADIUS = 4.0
CSV_HEADER = ("x", "y", "value")
VERDICT_FORMAT = "# wdcplane-membership v1"


@dataclass(frozen=True)
class XFunction:
    """A vectorised function on ``B(0, 4)``; ``origin`` is ``"psi"`` or ``"user"``."""

    fn: Callable[[np.ndarray], np.ndarray]
    origin: str = "user"
    source: Optional[CompactSetModel] = field(default=None, compare=False)

    def __call__(self, pts) -> np.ndarray:
        P = np.asarray(pts, dtype=float)
        single = P.ndim == 1
        out = np.asarray(self.fn(P.reshape(-1, 2)), dtype=float).reshape(-1)
        return float(out[0]) if single else out

    @classmethod
    def constant(cls, c: float) -> "XFunction":
        return cls(lambda P: np.full(len(P), float(c)))


def _max_norm(K: CompactSetModel) -> float:
    cands = [np.zeros((0, 2)), K.flat_points]
    segs = K.flat_segments
    if len(segs):
        cands += [segs[:, :2], segs[:, 2:]]
    for cx, cy, r, start, sweep in K.flat_arcs:
        ang = start + np.linspace(0.0, sweep, 257)
        cands.append(np.column_stack([cx + r * np.cos(ang), cy + r * np.sin(ang)]))
        # the farthest point of the full circle, if the arc reaches it
        far = math.atan2(cy, cx)
        if (far - start) % (2 * math.pi) <= sweep:
            cands.append(np.array([[cx + r * math.cos(far), cy + r * math.sin(far)]]))
    P = np.concatenate(cands)
    return float(np.hypot(P[:, 0], P[:, 1]).max()) if len(P) else 0.0


def psi(K: CompactSetModel) -> XFunction:
    """``d_K`` restricted to ``B(0, 4)``; ``K`` must lie in ``B(0, 1)``."""
    if _max_norm(K) > 1.0 + 1e-12:
        raise ValueError("psi needs K inside the closed unit ball")
    return XFunction(lambda P: distance_field(K, P), "psi", K)


def lattice(spacing: float, radius: float = OUTER_RADIUS, open_ball: bool = False) -> np.ndarray:
    """Points of ``spacing * Z^2`` in the (closed or open) ball of ``radius`` about 0."""
    n = int(math.floor(radius / spacing))
    t = spacing * np.arange(-n, n + 1)
    X, Y = np.meshgrid(t, t)
    P = np.column_stack([X.ravel(), Y.ravel()])
    r = np.hypot(P[:, 0], P[:, 1])
    return P[r < radius] if open_ball else P[r <= radius + 1e-12]


def x_validate(f: XFunction, grid: int = 64, seed: int = 0, tol: float = 1e-9) -> list[str]:
    """Violated conditions of X among ``"range"``, ``"lipschitz"``, ``"outer bound"``."""
    if grid < 16:
        raise ValueError("grid must be at least 16")
    h = 2 * OUTER_RADIUS / grid
    P = lattice(h)
    v = f(P)
    out = []
    if np.any(v < -tol) or np.any(v > OUTER_RADIUS + tol):
        out.append("range")
    rng = np.random.default_rng(seed)
    i = rng.integers(0, len(P), 4 * len(P))
    j = rng.integers(0, len(P), 4 * len(P))
    # nearest lattice neighbours catch steep local slopes
    near = P + np.array([h, 0.0])
    near_ok = np.hypot(near[:, 0], near[:, 1]) <= OUTER_RADIUS
    dv = np.concatenate([np.abs(v[i] - v[j]), np.abs(v[near_ok] - f(near[near_ok]))])
    dx = np.concatenate([np.hypot(*(P[i] - P[j]).T), np.full(int(near_ok.sum()), h)])
    if np.any(dv > dx + tol):
        out.append("lipschitz")
    outer = np.hypot(P[:, 0], P[:, 1]) >= 3.0
    if np.any(v[outer] < 1.0 - tol):
        out.append("outer bound")
    return out


@dataclass(frozen=True)
class SphereNet:
    eps: Fraction
    directions: np.ndarray = field(compare=False)

    def __len__(self) -> int:
        return len(self.directions)

    def max_gap(self, v) -> float:
        """Distance from the unit vectors ``v`` to their nearest net point, maximised."""
        V = np.asarray(v, dtype=float).reshape(-1, 2)
        D = np.hypot(V[:, None, 0] - self.directions[None, :, 0], V[:, None, 1] - self.directions[None, :, 1])
        return float(D.min(axis=1).max())


def sphere_net(eps) -> SphereNet:
    """Equally spaced unit vectors, ``ceil(pi / arcsin(eps/2))`` of them (4 once ``eps >= 2``)."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = 4 if eps >= 2 else math.ceil(math.pi / math.asin(float(eps) / 2))
    n = max(n, 4)
    dirs = np.array([rotation(2 * math.pi * k / n) for k in range(n)])
    return SphereNet(eps, dirs)


@dataclass(frozen=True)
class TruncationDepth:
    """Finite stand-ins for the quantifier ranges at depth ``m``.

    ``eps`` runs over ``1/2, ..., 2**-m`` in decreasing order, ``p`` and
    ``q`` over ``k / 2**(m+2)``, ``rho`` over ``1/2, ..., 2**-(m+2)``, ``x``
    over the lattice of spacing ``2**-(m+1)`` in ``U(0, 4)``, ``y`` over
    ``x`` and eight points on the circle of radius ``rho/2`` about it, and
    ``alpha`` over ``rho/2, rho/4, rho/8``.
    """

    m: int = 4

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("depth must be at least 1")

    @property
    def eps_values(self) -> list[Fraction]:
        return [Fraction(1, 2 ** j) for j in range(1, self.m + 1)]

    @property
    def pq_step(self) -> Fraction:
        return Fraction(1, 2 ** (self.m + 2))

    @property
    def rho_values(self) -> list[Fraction]:
        return [Fraction(1, 2 ** j) for j in range(1, self.m + 3)]

    @property
    def x_spacing(self) -> float:
        return 2.0 ** -(self.m + 1)

    def pq_pairs(self, eps: Fraction):
        """All ``(p, q)`` with ``0 < p < q < eps``, lexicographically."""
        n = int(eps / self.pq_step)
        for a in range(1, n):
            for b in range(a + 1, n):
                yield a * self.pq_step, b * self.pq_step


@dataclass(frozen=True)
class Witness:
    eps: Fraction
    p: Fraction
    q: Fraction
    x: tuple
    pointwise: bool

    def line(self) -> str:
        kind = "pointwise" if self.pointwise else "uniformity"
        return f"eps={self.eps} p={self.p} q={self.q} x=({self.x[0]!r}, {self.x[1]!r}) {kind}"


@dataclass(frozen=True)
class MembershipVerdict:
    """``status`` is ``"holds_at_depth"``, ``"fails_at_depth"`` or ``"inconclusive"``."""

    status: str
    depth: int
    eps: Optional[Fraction] = None
    witnesses: tuple = ()

    def report(self) -> str:
        lines = [VERDICT_FORMAT, f"status = {self.status}", f"depth = {self.depth}"]
        if self.eps is not None:
            lines.append(f"eps = {self.eps}")
        lines += [f"witness {w.line()}" for w in self.witnesses]
        return "\n".join(lines) + "\n"


_Y_OFFSETS = np.array([(0.0, 0.0)] + [rotation(k * math.pi / 4) for k in range(8)])
_ALPHA_FRACTIONS = np.array([0.5, 0.25, 0.125])


def decrease_table(f: XFunction, X: np.ndarray, eps: float, rho_values, net: np.ndarray) -> np.ndarray:
    """``good[i, k]``: some net direction decreases ``f`` at rate ``eps`` uniformly near ``X[i]`` at ``rho_k``."""
    good = np.zeros((len(X), len(rho_values)), dtype=bool)
    for k, rho in enumerate(rho_values):
        rho = float(rho)
        Y = X[:, None, :] + 0.5 * rho * _Y_OFFSETS[None]  # (n, 9, 2)
        fY = f(Y.reshape(-1, 2)).reshape(len(X), len(_Y_OFFSETS))
        alphas = rho * _ALPHA_FRACTIONS
        S = Y[:, :, None, None, :] + alphas[None, None, None, :, None] * net[None, None, :, None, :]
        flat = S.reshape(-1, 2)
        inside = np.hypot(flat[:, 0], flat[:, 1]) < OUTER_RADIUS
        vals = np.full(len(flat), np.inf)
        vals[inside] = f(flat[inside])
        vals = vals.reshape(S.shape[:-1])  # (n, 9, dirs, alphas)
        drop = vals - fY[:, :, None, None] <= -eps * alphas[None, None, None, :] + 1e-12
        good[:, k] = drop.all(axis=(1, 3)).any(axis=1)
    return good


def membership_A_truncated(f: XFunction, t: TruncationDepth = TruncationDepth()) -> MembershipVerdict:
    """Evaluate the truncated weak-regularity formula for ``f``.

    For each ``eps`` (largest first) and each pair ``p < q < eps`` there must
    be one ``rho`` that works for every lattice ``x`` with ``p < f(x) < q``.
    A failing ``eps`` is witnessed by its lexicographically first failing
    pair; the witness is pointwise when some ``x`` fails for every ``rho``.
    The result is ``fails_at_depth`` when every ``eps`` has a pointwise
    witness and ``inconclusive`` otherwise.
    """
    X = lattice(t.x_spacing, open_ball=True)
    fx = f(X)
    witnesses = []
    for eps in t.eps_values:
        band = (fx > 0) & (fx < float(eps))
        Xb, fb = X[band], fx[band]
        good = decrease_table(f, Xb, float(eps), t.rho_values, sphere_net(eps).directions)
        bad = None
        for p, q in t.pq_pairs(eps):
            mask = (fb > float(p)) & (fb < float(q))
            if not mask.any() or good[mask].all(axis=0).any():
                continue
            idx = np.nonzero(mask)[0]
            hopeless = idx[~good[idx].any(axis=1)]
            pointwise = len(hopeless) > 0
            i = hopeless[0] if pointwise else idx[0]
            bad = Witness(eps, p, q, tuple(map(float, Xb[i])), pointwise)
            break
        if bad is None:
            return MembershipVerdict("holds_at_depth", t.m, eps, tuple(witnesses))
        witnesses.append(bad)
    status = "fails_at_depth" if all(w.pointwise for w in witnesses) else "inconclusive"
    return MembershipVerdict(status, t.m, None, tuple(witnesses))


def dc_witness_validate(f: XFunction, g: Callable, h: Callable, grid: int = 64, seed: int = 0,
                        tol: float = 1e-9, triples: int = 4096) -> bool:
    """``f == g - h`` on a lattice of ``B(0, 4)`` and midpoint convexity of ``g`` and ``h``."""
    P = lattice(2 * OUTER_RADIUS / grid)

    def ev(fn, Q):
        return np.asarray(fn(Q), dtype=float).reshape(len(Q))

    if np.any(np.abs(f(P) - (ev(g, P) - ev(h, P))) > tol):
        return False
    rng = np.random.default_rng(seed)
    a = P[rng.integers(0, len(P), triples)]
    b = P[rng.integers(0, len(P), triples)]
    mid = 0.5 * (a + b)
    for fn in (g, h):
        if np.any(ev(fn, mid) > 0.5 * (ev(fn, a) + ev(fn, b)) + tol):
            return False
    return True


def rescale(K: CompactSetModel, r: float) -> CompactSetModel:
    """Image of ``K`` under ``x -> x / r``."""
    if not r > 0:
        raise ValueError("r must be positive")
    return K.transformed(scale=1.0 / r)


def load_xfunction_csv(path) -> XFunction:
    """Bilinear interpolant of a ``x,y,value`` table on a full rectangular grid."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_HEADER:
        raise ValueError(f"expected header {','.join(CSV_HEADER)}")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    xs, ys = np.unique(data[:, 0]), np.unique(data[:, 1])
    if len(xs) * len(ys) != len(data):
        raise ValueError("samples do not form a full grid")
    table = np.full((len(xs), len(ys)), np.nan)
    table[np.searchsorted(xs, data[:, 0]), np.searchsorted(ys, data[:, 1])] = data[:, 2]
    interp = RegularGridInterpolator((xs, ys), table, bounds_error=False, fill_value=None)
    return XFunction(lambda P: interp(P), "user")


def dump_xfunction_csv(f: XFunction, path, n: int = 129) -> None:
    t = np.linspace(-OUTER_RADIUS, OUTER_RADIUS, n)
    X, Y = np.meshgrid(t, t, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    v = f(P)
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        w.writerows(zip(P[:, 0].tolist(), P[:, 1].tolist(), v.tolist()))
