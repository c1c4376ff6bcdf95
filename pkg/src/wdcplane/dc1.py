"""Exact one-dimensional piecewise-linear DC calculus.

A :class:`ConvexPL` is a continuous convex piecewise-linear function with
rational breakpoints.  A :class:`DCFun1` is a pair ``(g, h)`` of such
functions on a common domain and stands for ``g - h``; every operation in
this module returns a new pair, so the decomposition witness is always
available and can be checked with exact rational arithmetic.

Unbounded domains are represented by tail slopes: ``left_slope`` continues
the function linearly to ``-inf`` from the first breakpoint and
``right_slope`` continues it to ``+inf`` from the last one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "ConvexPL",
    "DCFun1",
    "TotalPL",
    "as_fraction",
    "pl_values",
    "dc_from_pl",
    "dc_eval",
    "dc_combine",
    "dc_restrict",
    "lipschitz_constant",
    "radial_monotonicity",
    "extend_clamped",
    "dump_dcfun1",
    "load_dcfun1",
]


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings and "p/q" strings exactly.

    Floats are accepted but converted through their decimal repr so that
    ``0.1`` becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (float, np.floating)):
        return Fraction(repr(float(value)))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def _fractions(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_fraction(v) for v in values)


def _simplify(xs, ys, left_slope, right_slope):
    """Drop breakpoints where the function does not actually bend."""
    xs, ys = list(xs), list(ys)
    i = 1
    while i < len(xs) - 1:
        s0 = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])
        s1 = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
        if s0 == s1:
            del xs[i], ys[i]
        else:
            i += 1
    # a tail with the same slope as the adjacent piece absorbs the end breakpoint
    if left_slope is not None and (len(xs) > 2 or (len(xs) == 2 and right_slope is not None)):
        if (ys[1] - ys[0]) / (xs[1] - xs[0]) == left_slope:
            del xs[0], ys[0]
    if right_slope is not None and (len(xs) > 2 or (len(xs) == 2 and left_slope is not None)):
        if (ys[-1] - ys[-2]) / (xs[-1] - xs[-2]) == right_slope:
            del xs[-1], ys[-1]
    return tuple(xs), tuple(ys)


@dataclass(frozen=True)
class _PL:
    """Continuous piecewise-linear function, not necessarily convex."""

    xs: tuple[Fraction, ...]
    ys: tuple[Fraction, ...]
    left_slope: Optional[Fraction] = None
    right_slope: Optional[Fraction] = None

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or not self.xs:
            raise ValueError("breakpoints and values must be nonempty and of equal length")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.xs) == 1 and (self.left_slope is None or self.right_slope is None):
            raise ValueError("a single breakpoint needs both tails")

    @property
    def lo(self) -> Optional[Fraction]:
        return None if self.left_slope is not None else self.xs[0]

    @property
    def hi(self) -> Optional[Fraction]:
        return None if self.right_slope is not None else self.xs[-1]

    @property
    def domain(self) -> tuple[Optional[Fraction], Optional[Fraction]]:
        return self.lo, self.hi

    def contains(self, u: Fraction) -> bool:
        lo, hi = self.domain
        return (lo is None or u >= lo) and (hi is None or u <= hi)

    def piece_slopes(self) -> list[Fraction]:
        return [
            (y1 - y0) / (x1 - x0)
            for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])
        ]

    def all_slopes(self) -> list[Fraction]:
        """Slopes from left to right, tails included."""
        out = self.piece_slopes()
        if self.left_slope is not None:
            out.insert(0, self.left_slope)
        if self.right_slope is not None:
            out.append(self.right_slope)
        return out

    def __call__(self, u) -> Fraction:
        u = as_fraction(u)
        xs, ys = self.xs, self.ys
        if not self.contains(u):
            raise ValueError(f"{u} outside domain {self.domain}")
        if u <= xs[0]:
            return ys[0] + (self.left_slope or 0) * (u - xs[0])
        if u >= xs[-1]:
            return ys[-1] + (self.right_slope or 0) * (u - xs[-1])
        lo, hi = 0, len(xs) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if xs[mid] <= u:
                lo = mid
            else:
                hi = mid
        t = (u - xs[lo]) / (xs[hi] - xs[lo])
        return ys[lo] + t * (ys[hi] - ys[lo])

    def slope_right_of(self, u: Fraction) -> Fraction:
        """Slope of the piece immediately to the right of ``u``."""
        xs = self.xs
        if u >= xs[-1]:
            if self.right_slope is None:
                raise ValueError("no piece to the right of the domain end")
            return self.right_slope
        if u < xs[0]:
            return self.left_slope
        for i in range(len(xs) - 1):
            if xs[i] <= u < xs[i + 1]:
                return (self.ys[i + 1] - self.ys[i]) / (xs[i + 1] - xs[i])
        raise AssertionError("unreachable")

    def float_table(self):
        xs = np.array([float(x) for x in self.xs])
        ys = np.array([float(y) for y in self.ys])
        ls = None if self.left_slope is None else float(self.left_slope)
        rs = None if self.right_slope is None else float(self.right_slope)
        return xs, ys, ls, rs


class ConvexPL(_PL):
    """Convex continuous piecewise-linear function with rational data.

    Convexity is the exact statement that the slopes, tails included, are
    nondecreasing.  It is checked on construction.
    """

    def __post_init__(self):
        super().__post_init__()
        slopes = self.all_slopes()
        if any(b < a for a, b in zip(slopes, slopes[1:])):
            raise ValueError(f"slopes not nondecreasing: {slopes}")

    @classmethod
    def make(cls, xs, ys, left_slope=None, right_slope=None) -> "ConvexPL":
        ls = None if left_slope is None else as_fraction(left_slope)
        rs = None if right_slope is None else as_fraction(right_slope)
        xs, ys = _simplify(_fractions(xs), _fractions(ys), ls, rs)
        return cls(xs, ys, ls, rs)

    @classmethod
    def zero(cls, lo=None, hi=None) -> "ConvexPL":
        return cls.affine(0, 0, lo, hi)

    @classmethod
    def affine(cls, slope, intercept, lo=None, hi=None) -> "ConvexPL":
        """``slope*u + intercept`` on ``[lo, hi]`` (``None`` for unbounded ends)."""
        a, b = as_fraction(slope), as_fraction(intercept)
        if lo is None and hi is None:
            return cls((Fraction(0),), (b,), a, a)
        if lo is None:
            hi = as_fraction(hi)
            return cls((hi - 1, hi), (a * (hi - 1) + b, a * hi + b), a, None)
        if hi is None:
            lo = as_fraction(lo)
            return cls((lo, lo + 1), (a * lo + b, a * (lo + 1) + b), None, a)
        lo, hi = as_fraction(lo), as_fraction(hi)
        return cls((lo, hi), (a * lo + b, a * hi + b))


def _same_domain(f1: _PL, f2: _PL) -> None:
    if f1.domain != f2.domain:
        raise ValueError(f"domains differ: {f1.domain} vs {f2.domain}")


def _grid(*fs: _PL) -> list[Fraction]:
    pts = set()
    for f in fs:
        pts.update(f.xs)
    return sorted(pts)


def _cadd(f1: ConvexPL, f2: ConvexPL) -> ConvexPL:
    _same_domain(f1, f2)
    xs = _grid(f1, f2)
    ys = [f1(x) + f2(x) for x in xs]
    ls = None if f1.left_slope is None else f1.left_slope + f2.left_slope
    rs = None if f1.right_slope is None else f1.right_slope + f2.right_slope
    return ConvexPL.make(xs, ys, ls, rs)


def _cscale(f: ConvexPL, c: Fraction) -> ConvexPL:
    if c < 0:
        raise ValueError("convex functions may only be scaled by c >= 0")
    ls = None if f.left_slope is None else c * f.left_slope
    rs = None if f.right_slope is None else c * f.right_slope
    return ConvexPL.make(f.xs, [c * y for y in f.ys], ls, rs)


def _cmax(f1: ConvexPL, f2: ConvexPL) -> ConvexPL:
    """Pointwise maximum; crossing points are inserted exactly."""
    _same_domain(f1, f2)
    grid = _grid(f1, f2)
    diff = [f1(x) - f2(x) for x in grid]
    pts = list(grid)
    for (a, b), (da, db) in zip(zip(grid, grid[1:]), zip(diff, diff[1:])):
        if da * db < 0:
            pts.append(a + (b - a) * da / (da - db))
    if f1.left_slope is not None:
        ds = f1.left_slope - f2.left_slope
        # diff(u) = diff[0] + ds*(u - grid[0]) for u below grid[0]
        if ds != 0:
            u = grid[0] - diff[0] / ds
            if u < grid[0]:
                pts.append(u)
    if f1.right_slope is not None:
        ds = f1.right_slope - f2.right_slope
        if ds != 0:
            u = grid[-1] - diff[-1] / ds
            if u > grid[-1]:
                pts.append(u)
    pts = sorted(set(pts))
    ys = [max(f1(x), f2(x)) for x in pts]
    ls = rs = None
    if f1.left_slope is not None:
        # for u -> -inf the smaller slope dominates
        ls = min(f1.left_slope, f2.left_slope)
    if f1.right_slope is not None:
        rs = max(f1.right_slope, f2.right_slope)
    return ConvexPL.make(pts, ys, ls, rs)


@dataclass(frozen=True)
class DCFun1:
    """``g - h`` for convex PL ``g`` and ``h`` sharing one domain."""

    g: ConvexPL
    h: ConvexPL

    def __post_init__(self):
        _same_domain(self.g, self.h)

    @property
    def domain(self):
        return self.g.domain

    def __call__(self, u) -> Fraction:
        return dc_eval(self, u)

    @cached_property
    def pl(self) -> _PL:
        """The represented function as a plain PL table."""
        xs = _grid(self.g, self.h)
        ys = [self.g(x) - self.h(x) for x in xs]
        ls = None if self.g.left_slope is None else self.g.left_slope - self.h.left_slope
        rs = None if self.g.right_slope is None else self.g.right_slope - self.h.right_slope
        xs, ys = _simplify(xs, ys, ls, rs)
        return _PL(xs, ys, ls, rs)

    @cached_property
    def _float(self):
        return self.pl.float_table()

    def evaluate(self, u) -> np.ndarray:
        """Vectorised floating-point evaluation (no domain check)."""
        xs, ys, ls, rs = self._float
        u = np.asarray(u, dtype=float)
        out = np.interp(u, xs, ys)
        if ls is not None:
            out = np.where(u < xs[0], ys[0] + ls * (u - xs[0]), out)
        if rs is not None:
            out = np.where(u > xs[-1], ys[-1] + rs * (u - xs[-1]), out)
        return out

    def slope_right_of(self, u) -> Fraction:
        return self.pl.slope_right_of(as_fraction(u))

    def is_total(self) -> bool:
        return self.domain == (None, None)


class TotalPL(DCFun1):
    """A :class:`DCFun1` defined on the whole real line."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_total():
            raise ValueError("TotalPL needs both tails")


def pl_values(xs, ys, left_slope=None, right_slope=None) -> _PL:
    ls = None if left_slope is None else as_fraction(left_slope)
    rs = None if right_slope is None else as_fraction(right_slope)
    return _PL(_fractions(xs), _fractions(ys), ls, rs)


def dc_from_pl(xs, ys, left_slope=None, right_slope=None) -> DCFun1:
    """Canonical DC witness of a continuous PL function given by a table.

    Writing the function as an affine part plus hinges ``c_i*max(u-x_i, 0)``,
    ``h`` collects the hinges with negative ``c_i`` (negated) and ``g`` is the
    function plus ``h``.
    """
    f = pl_values(xs, ys, left_slope, right_slope)
    slopes = f.all_slopes()
    # kinks sit at every breakpoint that has slopes on both sides
    if len(f.xs) == 1:
        kinks = [f.xs[0]]
    else:
        kinks = list(f.xs[1:-1])
        if f.left_slope is not None:
            kinks.insert(0, f.xs[0])
        if f.right_slope is not None:
            kinks.append(f.xs[-1])
    jumps = [b - a for a, b in zip(slopes, slopes[1:])]
    assert len(jumps) == len(kinks)
    neg = [(x, -c) for x, c in zip(kinks, jumps) if c < 0]

    def hval(u):
        return sum((c * max(u - x, 0) for x, c in neg), Fraction(0))

    hy = [hval(x) for x in f.xs]
    h_rs = None if f.right_slope is None else sum((c for _, c in neg), Fraction(0))
    h_ls = None if f.left_slope is None else Fraction(0)
    h = ConvexPL.make(f.xs, hy, h_ls, h_rs)
    g_ls = None if f.left_slope is None else f.left_slope
    g_rs = None if f.right_slope is None else f.right_slope + h_rs
    g = ConvexPL.make(f.xs, [y + hy_ for y, hy_ in zip(f.ys, hy)], g_ls, g_rs)
    cls = TotalPL if f.domain == (None, None) else DCFun1
    return cls(g, h)


def dc_eval(f: DCFun1, u) -> Fraction:
    u = as_fraction(u)
    if not f.g.contains(u):
        raise ValueError(f"{u} outside domain {f.domain}")
    return f.g(u) - f.h(u)


def _wrap(g: ConvexPL, h: ConvexPL) -> DCFun1:
    cls = TotalPL if g.domain == (None, None) else DCFun1
    return cls(g, h)


def dc_combine(op: str, f1: DCFun1, f2: Optional[DCFun1] = None, a=1, b=1) -> DCFun1:
    """Combine DC functions while keeping an explicit witness.

    ``op`` is one of ``"scale_add"`` (``a*f1 + b*f2``; ``f2`` may be omitted
    for plain scaling), ``"abs"``, ``"max"`` and ``"min"``.
    """
    if op == "scale_add":
        a = as_fraction(a)
        g, h = (_cscale(f1.g, a), _cscale(f1.h, a)) if a >= 0 else (_cscale(f1.h, -a), _cscale(f1.g, -a))
        if f2 is not None:
            b = as_fraction(b)
            g2, h2 = (_cscale(f2.g, b), _cscale(f2.h, b)) if b >= 0 else (_cscale(f2.h, -b), _cscale(f2.g, -b))
            g, h = _cadd(g, g2), _cadd(h, h2)
        return _wrap(g, h)
    if op == "abs":
        # |g - h| = 2 max(g, h) - (g + h)
        return _wrap(_cscale(_cmax(f1.g, f1.h), Fraction(2)), _cadd(f1.g, f1.h))
    if f2 is None:
        raise ValueError(f"{op} needs two operands")
    if op == "max":
        # max(g1 - h1, g2 - h2) = max(g1 + h2, g2 + h1) - (h1 + h2)
        return _wrap(_cmax(_cadd(f1.g, f2.h), _cadd(f2.g, f1.h)), _cadd(f1.h, f2.h))
    if op == "min":
        # min(f1, f2) = -max(-f1, -f2) = (g1 + g2) - max(h1 + g2, h2 + g1)
        return _wrap(_cadd(f1.g, f2.g), _cmax(_cadd(f1.h, f2.g), _cadd(f2.h, f1.g)))
    raise ValueError(f"unknown operation {op!r}")


def _restrict_convex(f: ConvexPL, a: Fraction, b: Fraction) -> ConvexPL:
    xs = [a] + [x for x in f.xs if a < x < b] + [b]
    return ConvexPL.make(xs, [f(x) for x in xs])


def dc_restrict(f: DCFun1, a, b) -> DCFun1:
    """Restriction of ``f`` to the compact interval ``[a, b]``."""
    a, b = as_fraction(a), as_fraction(b)
    if not (a < b and f.g.contains(a) and f.g.contains(b)):
        raise ValueError(f"[{a}, {b}] not a subinterval of {f.domain}")
    return DCFun1(_restrict_convex(f.g, a, b), _restrict_convex(f.h, a, b))


def _pieces(f: _PL):
    """Yield ``(start, end, slope)``, with ``None`` for infinite ends."""
    xs = f.xs
    if f.left_slope is not None:
        yield None, xs[0], f.left_slope
    for x0, x1, s in zip(xs, xs[1:], f.piece_slopes()):
        yield x0, x1, s
    if f.right_slope is not None:
        yield xs[-1], None, f.right_slope


def lipschitz_constant(f: DCFun1, a=None, b=None) -> Fraction:
    """Exact Lipschitz constant of ``f`` on ``[a, b]`` (whole domain by default).

    The result is the largest absolute piece slope over pieces that overlap
    ``[a, b]`` in an interval of positive length; for ``a == b`` the pieces
    touching ``a`` are used.
    """
    lo, hi = f.domain
    a = lo if a is None else as_fraction(a)
    b = hi if b is None else as_fraction(b)
    best = Fraction(0)
    for s, e, slope in _pieces(f.pl):
        s_ok = e is None or a is None or (e > a if a != b else e >= a)
        e_ok = s is None or b is None or (s < b if a != b else s <= b)
        if s_ok and e_ok:
            best = max(best, abs(slope))
    return best


def radial_monotonicity(f: DCFun1, side: str) -> bool:
    """Decide strict monotonicity of ``R(u) = sqrt(u**2 + f(u)**2)``.

    ``side="right_increasing"`` asks for strict increase on the part of the
    domain in ``[0, inf)``, ``side="left_decreasing"`` for strict decrease on
    the part in ``(-inf, 0]``.  On a piece ``f = a*u + b`` the derivative of
    ``R**2`` is ``2*(1 + a**2)*u + 2*a*b``, an increasing linear function, so
    checking its sign at one piece end is exact.
    """
    pl = f.pl
    for s, e, a in _pieces(pl):
        anchor = s if s is not None else e
        b = pl(anchor) - a * anchor

        def deriv(u):
            return 2 * (1 + a * a) * u + 2 * a * b

        if side == "right_increasing":
            if e is not None and e <= 0:
                continue
            start = max(s, Fraction(0)) if s is not None else Fraction(0)
            if deriv(start) < 0:
                return False
        elif side == "left_decreasing":
            if s is not None and s >= 0:
                continue
            end = min(e, Fraction(0)) if e is not None else Fraction(0)
            if deriv(end) > 0:
                return False
        else:
            raise ValueError(f"unknown side {side!r}")
    return True


def extend_clamped(f: DCFun1, mode: str, L=None) -> TotalPL:
    """Extend a compact-domain profile to the whole line.

    ``constant_both`` continues with the end values.  ``upper_sector`` and
    ``lower_sector`` take a profile on ``[0, rho]``, continue it by its value
    at ``rho`` to the right, and by the ray of slope ``2L`` (upper) or ``-2L``
    (lower) through the value at 0 to the left.
    """
    lo, hi = f.domain
    if lo is None or hi is None:
        raise ValueError("extend_clamped needs a compact domain")
    lip = lipschitz_constant(f)
    if L is not None:
        L = as_fraction(L)
        if L < lip:
            raise ValueError(f"L={L} below the Lipschitz constant {lip}")
    pl = f.pl
    if mode == "constant_both":
        return dc_from_pl(pl.xs, pl.ys, 0, 0)
    if mode not in ("upper_sector", "lower_sector"):
        raise ValueError(f"unknown mode {mode!r}")
    if L is None:
        raise ValueError(f"{mode} needs L")
    if lo != 0:
        raise ValueError("sector extensions need a profile on [0, rho]")
    left = 2 * L if mode == "upper_sector" else -2 * L
    return dc_from_pl(pl.xs, pl.ys, left, 0)


def _fmt(v: Optional[Fraction]) -> str:
    return "-" if v is None else str(v)


def _dump_convex(name: str, f: ConvexPL) -> list[str]:
    lines = [f"[{name}]", f"left_slope {_fmt(f.left_slope)}", f"right_slope {_fmt(f.right_slope)}"]
    lines += [f"{x} {y}" for x, y in zip(f.xs, f.ys)]
    return lines


def dump_dcfun1(f: DCFun1) -> str:
    """Serialise as a plain-text breakpoint table (rationals as ``p/q``).

    Layout::

        # dcfun1 v1
        [g]
        left_slope <p/q or ->
        right_slope <p/q or ->
        <u> <value>
        ...
        [h]
        ...
    """
    lines = ["# dcfun1 v1"] + _dump_convex("g", f.g) + _dump_convex("h", f.h)
    return "\n".join(lines) + "\n"


def load_dcfun1(text: str) -> DCFun1:
    sections: dict[str, dict] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            current = line.strip("[]")
            sections[current] = {"ls": None, "rs": None, "xs": [], "ys": []}
            continue
        if current is None:
            raise ValueError(f"data outside a section: {line!r}")
        key, _, val = line.partition(" ")
        val = val.strip()
        sec = sections[current]
        if key in ("left_slope", "right_slope"):
            sec["ls" if key == "left_slope" else "rs"] = None if val == "-" else Fraction(val)
        else:
            sec["xs"].append(Fraction(key))
            sec["ys"].append(Fraction(val))
    try:
        g, h = (ConvexPL.make(s["xs"], s["ys"], s["ls"], s["rs"]) for s in (sections["g"], sections["h"]))
    except KeyError as exc:
        raise ValueError(f"missing section {exc}") from None
    return _wrap(g, h)
