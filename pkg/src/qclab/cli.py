"""Command-line front end.

Exit codes: 0 success, 1 input or usage error, 2 solver nonconvergence,
3 accuracy or resolution failure, 4 sweep success rate below 90%.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from .errors import AccuracyError, NonconvergenceError, QclabError
from .ext_scmap import LaurentSeries, SolverOptions, identity_series, joukowski_series
from .experiments import (
    FamilyError,
    canonical_polygon,
    family_from_spec,
    fredholm_cached,
    plot_csv,
    polygon_grunsky,
    resolve_cache,
    run_sweep,
    runtimes_csv,
    solve_cached,
    success_fraction,
    sweep_csv,
)
from .fredholm import MeshOptions, circle, ellipse, kuhnau_schiffer_residual
from .grunsky import grunsky_from_series, grunsky_norm
from .polygeom import load_polygon, stretch_ellipse_axes
from .schwarzian import halfplane_schwarzian, square_prevertices
from .suites import SUITES, load_tolerances, run_suite

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGENCE, EXIT_ACCURACY, EXIT_SWEEP = 0, 1, 2, 3, 4
SWEEP_SUCCESS = 0.9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with other input errors
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _mesh(args) -> MeshOptions:
    return MeshOptions(panels=args.panels, grading=args.grading, nodes=args.nodes, solver=args.solver)


def _radii(args) -> tuple[float, float]:
    return (args.radius, args.radius * 12 / 11)


# --------------------------------------------------------------------------
# commands


def cmd_map(args) -> int:
    P = canonical_polygon(load_polygon(args.polygon))
    cache = resolve_cache(args.cache_dir)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = lambda m, c, *a, **k: print(f"warning: {m}", file=sys.stderr)
        M, hit = solve_cached(P, cache, args.nodes or SolverOptions().nodes)
    report = {"map": M.to_json(), "cacheHit": hit}
    _emit(_dumps(report), args.out)
    print("residual,value", file=sys.stderr)
    for k, v in M.residuals.items():
        print(f"{k},{v:.3e}", file=sys.stderr)
    return EXIT_OK


def _series_from_args(args) -> LaurentSeries | None:
    M = 2 * args.order + 2
    if args.ellipse is not None:
        return joukowski_series(args.ellipse, M)
    if args.identity:
        return identity_series(M)
    if args.series:
        S = LaurentSeries.from_json(json.loads(Path(args.series).read_text()))
        if len(S.b) < M + 1:
            # a finite series has zero higher coefficients
            S = LaurentSeries(np.concatenate([S.b, np.zeros(M + 1 - len(S.b))]), S.source_radius, S.method)
        return S
    return None


def cmd_grunsky(args) -> int:
    if args.order is not None and args.order < 4:
        raise UsageError("--order must be at least 4")
    S = None
    if args.ellipse is not None or args.identity or args.series:
        args.order = args.order or 32
        S = _series_from_args(args)
    if S is not None:
        G = grunsky_from_series(S, args.order, radii=_radii(args))
        norm = grunsky_norm(G)
        report = {"kappa": norm.kappa, "bySize": [list(t) for t in norm.by_size],
                  "provenance": G.provenance, "matrix": G.to_json() if args.order <= 64 else None}
        by_size = norm.by_size
    else:
        if not args.polygon:
            raise UsageError("give a polygon file, --series, --ellipse or --identity")
        order = args.order or 1024
        P = load_polygon(args.polygon)
        res = polygon_grunsky(P, order, resolve_cache(args.cache_dir), _radii(args))
        report = res
        by_size = res["kappa"]["bySize"]
    if args.csv:
        Path(args.csv).write_text("N,sigma\n" + "".join(f"{n},{s:.12g}\n" for n, s in by_size))
    if args.plot_data:
        Path(args.plot_data).write_text(plot_csv([n for n, _ in by_size], [s for _, s in by_size]))
    _emit(_dumps(report), args.out)
    return EXIT_OK


def _curve_from_args(args):
    if args.circle:
        return circle()
    if args.ellipse is not None:
        a, b = stretch_ellipse_axes(args.ellipse)
        return ellipse(a, b)
    if args.ellipse_axes:
        return ellipse(*args.ellipse_axes)
    if args.polygon:
        return load_polygon(args.polygon)
    raise UsageError("give a polygon file, --circle, --ellipse c or --ellipse-axes a b")


def cmd_fredholm(args) -> int:
    curve = _curve_from_args(args)
    spec = fredholm_cached(curve, _mesh(args), resolve_cache(args.cache_dir))
    if args.csv:
        Path(args.csv).write_text("index,eigenvalue\n"
                                  + "".join(f"{i},{v:.12g}\n" for i, v in enumerate(spec["eigenvalues"])))
    if args.plot_data:
        lv = spec["levels"]
        Path(args.plot_data).write_text(plot_csv([l["level"] for l in lv], [l["top"] for l in lv]))
    _emit(_dumps(spec), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_INPUT
    tol = load_tolerances(args.config)
    report = run_suite(args.suite, tol, echo=print)
    if args.out:
        Path(args.out).write_text(report.dumps() + "\n")
    return EXIT_OK if report.passed else EXIT_ACCURACY


def cmd_sweep(args) -> int:
    try:
        spec = json.loads(Path(args.family).read_text())
    except json.JSONDecodeError as exc:
        raise FamilyError(f"family spec is not JSON: {exc}") from exc
    samples = family_from_spec(spec, args.seed)
    cache_root = resolve_cache(args.cache_dir).root
    rows = run_sweep(samples, max(1, args.jobs), args.order or 1024, _mesh(args),
                     str(cache_root) if cache_root else None)
    _emit(sweep_csv(rows), args.out)
    if args.runtimes:
        Path(args.runtimes).write_text(runtimes_csv(rows))
    if args.plot_data:
        ok = [r for r in rows if r["status"] == "ok"]
        Path(args.plot_data).write_text(plot_csv([r["index"] for r in ok], [r["kappa"] for r in ok]))
    frac = success_fraction(rows)
    for r in rows:
        if r["status"] != "ok":
            print(f"sample {r['index']} failed: {r['error']}", file=sys.stderr)
    return EXIT_OK if frac >= SWEEP_SUCCESS else EXIT_SWEEP


def cmd_schwarzian(args) -> int:
    a = np.array(args.prevertices) if args.prevertices else square_prevertices()
    alpha = np.array(args.alpha) if args.alpha else np.full(len(a), 0.5)
    D = halfplane_schwarzian(a, alpha)
    _emit(_dumps(D.to_json()), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qclab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the main output here instead of stdout")
    common.add_argument("--cache-dir", help="result cache directory (QCLAB_CACHE_DIR overrides)")
    common.add_argument("--config", help="JSON file of tolerance overrides")

    mesh = _Parser(add_help=False)
    mesh.add_argument("--panels", type=int, help="middle panels per side (polygons) or total panels (curves)")
    mesh.add_argument("--grading", type=int, default=8, help="dyadic grading depth toward corners")
    mesh.add_argument("--nodes", type=int, help="Gauss-Legendre nodes per panel")
    mesh.add_argument("--solver", choices=("auto", "dense", "arnoldi"), default="auto")

    m = sub.add_parser("map", parents=[common], help="solve the exterior Schwarz-Christoffel map")
    m.add_argument("polygon")
    m.add_argument("--nodes", type=int, help="quadrature nodes per panel")
    m.set_defaults(func=cmd_map)

    g = sub.add_parser("grunsky", parents=[common], help="Grunsky norm of a polygon map or a series")
    g.add_argument("polygon", nargs="?")
    g.add_argument("--series", help="Laurent series JSON")
    g.add_argument("--ellipse", type=float, help="use the series z + c/z")
    g.add_argument("--identity", action="store_true", help="use the identity series")
    g.add_argument("--order", type=int, help="truncation order N (default 32 for series, 1024 for polygons)")
    g.add_argument("--radius", type=float, default=1.1, help="inner radius of the FFT cross-check")
    g.add_argument("--csv", help="write the nested-size convergence table")
    g.add_argument("--plot-data", help="write (N, sigma) plot data")
    g.set_defaults(func=cmd_grunsky)

    f = sub.add_parser("fredholm", parents=[common, mesh], help="double-layer spectrum and 1/rho")
    f.add_argument("polygon", nargs="?")
    f.add_argument("--circle", action="store_true")
    f.add_argument("--ellipse", type=float, help="ellipse with semiaxes 1+c and 1-c")
    f.add_argument("--ellipse-axes", type=float, nargs=2, metavar=("A", "B"))
    f.add_argument("--csv", help="write the spectrum")
    f.add_argument("--plot-data", help="write (refinement level, top eigenvalue) plot data")
    f.set_defaults(func=cmd_fredholm)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", help=", ".join(SUITES))
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common, mesh], help="evaluate a polygon family")
    s.add_argument("family", help="family spec JSON")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--seed", type=int, help="override the seed of a random family")
    s.add_argument("--order", type=int, help="largest Grunsky truncation order (default 1024)")
    s.add_argument("--runtimes", help="write per-sample runtimes here")
    s.add_argument("--plot-data", help="write (index, kappa) plot data")
    s.set_defaults(func=cmd_sweep)

    z = sub.add_parser("schwarzian", parents=[common], help="Schwarzian data of a half-plane map")
    z.add_argument("--prevertices", type=float, nargs="+")
    z.add_argument("--alpha", type=float, nargs="+", help="interior angles over pi")
    z.set_defaults(func=cmd_schwarzian)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        if getattr(args, "config", None) and args.command != "verify":
            load_tolerances(args.config)  # validate early
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonconvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except AccuracyError as exc:
        print(f"accuracy: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (QclabError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
