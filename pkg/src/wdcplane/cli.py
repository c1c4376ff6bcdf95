"""``wdcplane`` command line.

Subcommands::

    wdcplane field   --model M.toml [--grid N] [--bounds X0 Y0 X1 Y1] [--out F.csv] [--svg F.svg]
    wdcplane certify --model M.toml [--depth M] [--eps-list 1/2,1/4] [--out R.txt]
    wdcplane lemma   [--trials N]

Exit codes: 0 success, 1 counterexample, 2 inconclusive, 3 configuration
error, 4 invalid model.
"""

from __future__ import annotations

import argparse
import html
import io
import math
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .aura import (
    DEFAULT_EPS,
    aura_distance,
    random_lipschitz_pl,
    verify_graph_lemma,
    weak_regularity_certificate,
)
from .clarke import fu_subdifferential
from .config import ConfigError, LoadedModel, ModelError, load_model, parse_eps_list
from .geometry import boundary_samples, distance_field, distance_origin_to_hull
from .spacex import TruncationDepth, membership_A_truncated, psi

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_INCONCLUSIVE, EXIT_CONFIG, EXIT_MODEL = 0, 1, 2, 3, 4
FIELD_FORMAT = "# wdcplane-field v1"


def field_values(loaded: LoadedModel, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``d`` and hull distance at the rows of ``P``.

    ``d`` is the aura formula for local models and ``d_A`` for raw sets.
    The hull distance always refers to the compact set and is ``nan`` on it.
    """
    A = loaded.compact
    dA = distance_field(A, P)
    d = dA if loaded.local is None else aura_distance(loaded.local, P, restrict=False)
    hull = np.full(len(P), np.nan)
    for i in np.nonzero(dA > 1e-9 * (1.0 + np.hypot(P[:, 0], P[:, 1])))[0]:
        hull[i] = distance_origin_to_hull(fu_subdifferential(P[i], A))
    return np.asarray(d, dtype=float), hull


def grid_points(bounds: Sequence[float], n: int) -> np.ndarray:
    x0, y0, x1, y1 = bounds
    xs, ys = np.linspace(x0, x1, n), np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel()])


def field_csv(P, d, hull, seed: int) -> str:
    out = io.StringIO()
    out.write(f"{FIELD_FORMAT} seed={seed}\n")
    out.write("x,y,d,hull_dist\n")
    for (x, y), a, b in zip(P, d, hull):
        out.write(f"{float(x)!r},{float(y)!r},{float(a)!r},{'nan' if math.isnan(b) else repr(float(b))}\n")
    return out.getvalue()


def _heat(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    return f"rgb({int(255 * (1 - t))},{int(120 + 100 * t)},{int(255 * t)})"


def field_svg(loaded: LoadedModel, P, d, hull, n: int, bounds, eps: float, seed: int, size: int = 480) -> str:
    """Band ``0 < d < eps`` shaded by hull distance, set boundary in black."""
    x0, y0, x1, y1 = bounds
    sx, sy = size / (x1 - x0), size / (y1 - y0)
    cw, ch = size / max(n - 1, 1), size / max(n - 1, 1)

    def px(x, y):
        return (x - x0) * sx, size - (y - y0) * sy

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f"<!-- {html.escape(FIELD_FORMAT[2:])} seed={seed} eps={eps!r} -->",
             f'<rect width="{size}" height="{size}" fill="white"/>']
    for (x, y), a, b in zip(P, d, hull):
        if 0 < a < eps and not math.isnan(b):
            cx, cy = px(x, y)
            parts.append(f'<rect x="{cx - cw / 2:.2f}" y="{cy - ch / 2:.2f}" width="{cw:.2f}" '
                         f'height="{ch:.2f}" fill="{_heat(b)}"/>')
    A = loaded.compact
    for s in A.flat_segments:
        (ax, ay), (bx, by) = px(*s[:2]), px(*s[2:])
        parts.append(f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}" stroke="black"/>')
    if len(A.flat_arcs):
        arc_pts = boundary_samples(type(A)(arcs=A.arcs), (x1 - x0) / 200)
        pts = " ".join("{:.2f},{:.2f}".format(*px(x, y)) for x, y in arc_pts)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="black"/>')
    for x, y in A.flat_points:
        cx, cy = px(x, y)
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="2" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_field(args) -> int:
    loaded = load_model(args.model)
    n = args.grid if args.grid is not None else int(loaded.run.get("grid", 64))
    if n < 2:
        raise ConfigError("grid must be at least 2")
    bounds = args.bounds if args.bounds is not None else loaded.run.get("bounds", [-1, -1, 1, 1])
    try:
        box = tuple(float(b) for b in bounds)
    except (TypeError, ValueError) as exc:
        raise ConfigError("bounds take four numbers") from exc
    if len(box) != 4 or not (box[2] > box[0] and box[3] > box[1]):
        raise ConfigError("bounds must be X0 Y0 X1 Y1 with X1 > X0 and Y1 > Y0")
    P = grid_points(box, n)
    d, hull = field_values(loaded, P)
    _write(field_csv(P, d, hull, args.seed), args.out)
    if args.svg:
        eps = float(args.eps_list[0]) if args.eps_list else 0.5
        _write(field_svg(loaded, P, d, hull, n, box, eps, args.seed), args.svg)
    return EXIT_OK


def cmd_certify(args) -> int:
    loaded = load_model(args.model)
    depth = args.depth if args.depth is not None else int(loaded.run.get("depth", 4))
    if depth < 1:
        raise ConfigError("depth must be at least 1")
    eps = args.eps_list or [Fraction(e) for e in loaded.run.get("eps_list", [])] or list(DEFAULT_EPS)
    cert = weak_regularity_certificate(loaded.compact, eps, n=args.samples, seed=args.seed)
    try:
        f = psi(loaded.compact)
    except ValueError as exc:
        raise ModelError(str(exc)) from exc
    verdict = membership_A_truncated(f, TruncationDepth(depth))
    if cert is None:
        cert_text = "# wdcplane-certificate v1\nstatus = none\n" + f"seed = {args.seed}\n"
    else:
        cert_text = cert.report()
    _write(cert_text + verdict.report(), args.out)
    if verdict.status == "fails_at_depth":
        return EXIT_COUNTEREXAMPLE
    if cert is None or verdict.status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_lemma(args) -> int:
    rng = np.random.default_rng(args.seed)
    lines = ["# wdcplane-lemma v1", f"seed = {args.seed}", f"functions = {args.trials}"]
    worst = [math.inf] * 3
    bad = 0
    for _ in range(args.trials):
        L = Fraction(round(rng.uniform(0.1, 4.0) * 64), 64)
        f = random_lipschitz_pl(rng, L)
        rep = verify_graph_lemma(f, trials=1, seed=int(rng.integers(2 ** 31)), L=L)
        worst = [min(a, b) for a, b in zip(worst, (rep.min_xi_ratio, rep.min_u_ratio, rep.min_v_ratio))]
        bad += rep.violations
    lines += [f"min_xi_ratio = {worst[0]!r}", f"min_u_ratio = {worst[1]!r}",
              f"min_v_ratio = {worst[2]!r}", f"violations = {bad}"]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK if bad == 0 else EXIT_COUNTEREXAMPLE


def _eps_arg(text: str):
    try:
        return parse_eps_list(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wdcplane", description="Distance functions of planar WDC sets.")
    p.add_argument("--version", action="version", version=f"wdcplane {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", required=True, help="TOML model file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output file (default stdout)")

    f = sub.add_parser("field", help="export d and hull distance on a grid")
    common(f)
    f.add_argument("--grid", type=int, default=None, help="cells per side")
    f.add_argument("--bounds", type=float, nargs=4, metavar=("X0", "Y0", "X1", "Y1"))
    f.add_argument("--svg", default=None, help="also write an SVG picture")
    f.add_argument("--eps-list", type=_eps_arg, default=None, help="first entry sets the SVG band")
    f.set_defaults(run=cmd_field)

    c = sub.add_parser("certify", help="weak-regularity certificate and truncated membership")
    common(c)
    c.add_argument("--depth", type=int, default=None)
    c.add_argument("--eps-list", type=_eps_arg, default=None)
    c.add_argument("--samples", type=int, default=4000)
    c.set_defaults(run=cmd_certify)

    lm = sub.add_parser("lemma", help="graph lemma bounds on random PL functions")
    common(lm, model=False)
    lm.add_argument("--trials", type=int, default=500)
    lm.set_defaults(run=cmd_lemma)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
