"""Clarke subdifferentials: Fu's hull formula and sampled estimates.

For a distance function off its set the generalized gradient is the convex
hull of the unit vectors pointing from the nearest points to the query;
:func:`fu_subdifferential` evaluates that exactly (up to the projection
tie tolerance).  The remaining functions work for any Lipschitz evaluator
and replace limits and quantifiers by deterministic sample grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .geometry import (
    CompactSetModel,
    SubdiffHull,
    as_point,
    distance_field,
    metric_projection,
)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class LipschitzEvaluator2:
    """Vectorised planar function with a declared Lipschitz constant.

    ``fn`` maps an ``(N, 2)`` array to ``N`` values.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    center: tuple = (0.0, 0.0)
    radius: float = math.inf

    def __call__(self, pts) -> np.ndarray:
        P = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.asarray(self.fn(P), dtype=float).reshape(len(P))

    def scaled(self, alpha: float) -> "LipschitzEvaluator2":
        return LipschitzEvaluator2(lambda P: alpha * self.fn(P), abs(alpha) * self.lipschitz,
                                   self.center, self.radius)

    @classmethod
    def distance_to(cls, A: CompactSetModel) -> "LipschitzEvaluator2":
        return cls(lambda P: distance_field(A, P), 1.0)

    @classmethod
    def linear(cls, c) -> "LipschitzEvaluator2":
        c = as_point(c)
        return cls(lambda P: P @ c, float(np.hypot(*c)))

    @classmethod
    def norm(cls, sign: float = 1.0) -> "LipschitzEvaluator2":
        return cls(lambda P: sign * np.hypot(P[:, 0], P[:, 1]), 1.0)


@dataclass(frozen=True)
class DirectionalProbe:
    """A direction and radius that passed the sampled decrease test."""

    direction: tuple
    radius: float
    worst_quotient: float
    n_checks: int

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("probe radius must be positive")


def fu_subdifferential(z, A: CompactSetModel, tau: Optional[float] = None) -> SubdiffHull:
    """``conv{(z - p)/d_A(z) : p nearest to z}``; only defined off ``A``."""
    z = as_point(z)
    d, P = metric_projection(z, A, tau)
    if d <= 0.0:
        raise ValueError(f"{tuple(z)} lies on the set; the hull formula applies off it")
    return SubdiffHull.from_points([(z - p) / d for p in P])


def disc_samples(x, radius: float, n: int) -> np.ndarray:
    """``n`` quasi-uniform points of the open disc (sunflower pattern)."""
    x = as_point(x)
    k = np.arange(n)
    r = radius * np.sqrt((k + 0.5) / n)
    ang = k * GOLDEN_ANGLE
    return x + np.column_stack([r * np.cos(ang), r * np.sin(ang)])


def sampled_clarke(f: LipschitzEvaluator2, x, h: float, n: int = 64,
                   step: Optional[float] = None, filter_factor: float = 1e-3) -> SubdiffHull:
    """Hull of finite-difference gradients at ``n`` points of ``U(x, h)``.

    Central differences use ``step = h/100``.  A sample is skipped when its
    forward and backward quotients differ by more than
    ``filter_factor * f.lipschitz`` in either coordinate, i.e. when a kink
    passes within one step of it.
    """
    if not (h > 0 and n >= 8):
        raise ValueError("need h > 0 and n >= 8")
    s = h / 100.0 if step is None else step
    P = disc_samples(x, h, n)
    f0 = f(P)
    grads, ok = [], np.ones(n, dtype=bool)
    for e in (np.array([s, 0.0]), np.array([0.0, s])):
        fp, fm = f(P + e), f(P - e)
        fwd, bwd = (fp - f0) / s, (f0 - fm) / s
        ok &= np.abs(fwd - bwd) <= filter_factor * f.lipschitz
        grads.append((fp - fm) / (2 * s))
    G = np.column_stack(grads)[ok]
    if not len(G):
        raise ValueError("every sample was filtered as nondifferentiable; shrink h")
    return SubdiffHull.from_points(G, tol=1e-14)


def default_derivative_grid(x, radii=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6), n_dirs: int = 16):
    x = as_point(x)
    ang = 2 * math.pi * np.arange(n_dirs) / n_dirs
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    for r in radii:
        for t in (r, r / 2, r / 10):
            yield x, t
            for w in dirs:
                yield x + r * w, t


def directional_upper_derivative(f: LipschitzEvaluator2, x, v, grid: Optional[Iterable] = None) -> float:
    """Largest difference quotient ``(f(y + t v) - f(y)) / t`` over ``grid``.

    ``grid`` yields ``(y, t)`` pairs; by default points on circles of
    shrinking radius around ``x`` with matching step sizes.
    """
    v = as_point(v)
    pairs = list(default_derivative_grid(x) if grid is None else grid)
    Y = np.array([as_point(y) for y, _ in pairs])
    T = np.array([float(t) for _, t in pairs])
    q = (f(Y + T[:, None] * v) - f(Y)) / T
    return float(q.max())


def alpha_grid(rho: float, n: int = 32) -> np.ndarray:
    """Geometric step sizes in ``(0, rho)``: ``rho * 2**(-k/4)``, ``k = 1..n``."""
    return rho * 2.0 ** (-np.arange(1, n + 1) / 4.0)


def find_decrease_direction(f: LipschitzEvaluator2, x, eps: float, net: Sequence,
                            rho_candidates: Sequence[float], samples: int = 64,
                            n_alpha: int = 32) -> Optional[DirectionalProbe]:
    """First ``(v, rho)`` in ``net x rho_candidates`` order with a uniform decrease.

    Accepts when ``(f(y + a v) - f(y)) / a <= -eps`` for all ``samples``
    points ``y`` of ``U(x, rho)`` and all ``n_alpha`` geometric steps ``a`` in
    ``(0, rho)``.  Returns ``None`` when nothing passes.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = as_point(x)
    net = [as_point(v) for v in net]
    f0 = float(f(x[None])[0])
    for v in net:
        for rho in rho_candidates:
            A = alpha_grid(rho, n_alpha)
            # the centre alone is a cheap necessary condition
            if np.max((f(x + A[:, None] * v) - f0) / A) > -eps:
                continue
            Y = np.concatenate([x[None], disc_samples(x, rho, samples)])
            fY = f(Y)
            steps = (Y[:, None, :] + A[None, :, None] * v).reshape(-1, 2)
            q = (f(steps).reshape(len(Y), len(A)) - fY[:, None]) / A[None, :]
            worst = float(q.max())
            if worst <= -eps:
                return DirectionalProbe(tuple(map(float, v)), float(rho), worst, q.size)
    return None
