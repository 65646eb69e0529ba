"""Polygon pipelines, polygon families, the result cache and parameter sweeps."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import QclabError
from .ext_scmap import ScExteriorMap, SolverOptions, map_from_json, solve_parameters
from .extrapolate import extrapolate_inverse_square
from .fredholm import MeshOptions, kuhnau_schiffer_residual, np_spectrum
from .grunsky import GrunskyMatrix, grunsky_from_series, grunsky_norm
from .polygeom import Polygon, is_convex, make_polygon

TOOL_VERSION = "0.1.0"
DEFAULT_ORDERS = (128, 256, 512, 1024)
FLOAT_FORMAT = ".12g"


class FamilyError(QclabError):
    """A family specification is malformed or describes no polygons."""


# --------------------------------------------------------------------------
# canonical inputs and the cache


def canonical_polygon(P: Polygon) -> Polygon:
    """Round vertices to 1e-12 and rotate the (counterclockwise) list so that
    the lexicographically smallest vertex comes first."""
    z = np.round(P.z.real, 12) + 1j * np.round(P.z.imag, 12)
    z = z + 0.0  # turn -0.0 into 0.0
    start = min(range(len(z)), key=lambda i: (z[i].real, z[i].imag))
    return make_polygon(np.roll(z, -start))


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


class ResultCache:
    """File cache keyed by the SHA-256 of canonical JSON inputs.

    Values are stored as JSON text; a cold computation returns the parsed
    text it just wrote, so warm and cold runs see identical values.
    ``root=None`` disables storage but keeps the round trip.
    """

    def __init__(self, root: str | Path | None):
        self.root = Path(root) if root else None
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(kind: str, payload: dict) -> str:
        text = canonical_json({"kind": kind, "tool": TOOL_VERSION, "input": payload})
        return hashlib.sha256(text.encode()).hexdigest()

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, kind: str, payload: dict) -> dict | None:
        if self.root is None:
            return None
        p = self._path(self.key(kind, payload))
        if not p.exists():
            return None
        return json.loads(p.read_text())["value"]

    def put(self, kind: str, payload: dict, value: dict) -> dict:
        key = self.key(kind, payload)
        text = canonical_json({"key": key, "kind": kind, "value": value})
        if self.root is not None:
            tmp = self._path(key).with_suffix(".tmp")
            tmp.write_text(text)
            tmp.replace(self._path(key))
        return json.loads(text)["value"]

    def fetch(self, kind: str, payload: dict, compute) -> tuple[dict, bool]:
        """Cached value and whether it was a hit."""
        hit = self.get(kind, payload)
        if hit is not None:
            return hit, True
        return self.put(kind, payload, compute()), False


def resolve_cache(cache_dir: str | None) -> ResultCache:
    """``QCLAB_CACHE_DIR`` takes precedence over the flag value."""
    return ResultCache(os.environ.get("QCLAB_CACHE_DIR") or cache_dir)


# --------------------------------------------------------------------------
# pipelines


@dataclass(frozen=True)
class KappaEstimate:
    """Grunsky norm of a polygon map from nested truncations.

    ``kappa`` extrapolates ``sigma_max`` over ``log N`` on the three largest
    orders; ``error_bar`` compares with the fit on the three smallest.
    """

    kappa: float
    kappa_raw: float
    error_bar: float
    by_size: tuple
    extrapolated: bool

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa,
            "kappaRaw": self.kappa_raw,
            "errorBar": self.error_bar,
            "bySize": [[int(n), float(s)] for n, s in self.by_size],
            "extrapolated": self.extrapolated,
        }


def kappa_estimate(G: GrunskyMatrix, orders: Iterable[int]) -> KappaEstimate:
    orders = sorted(int(n) for n in orders if 0 < n <= G.N)
    norm = grunsky_norm(G, orders)
    n = np.array([s for s, _ in norm.by_size], dtype=float)
    k = np.array([v for _, v in norm.by_size])
    if len(orders) >= 3:
        fine = extrapolate_inverse_square(np.log(n[-3:]), k[-3:])
        coarse = extrapolate_inverse_square(np.log(n[:3]), k[:3])
        est = min(fine.limit, 1.0)
        err = abs(fine.limit - coarse.limit) if len(orders) > 3 else abs(fine.limit - k[-1])
        return KappaEstimate(float(est), float(k[-1]), float(err), norm.by_size, fine.fitted)
    err = float(abs(k[-1] - k[-2])) if len(k) > 1 else float("nan")
    return KappaEstimate(float(k[-1]), float(k[-1]), err, norm.by_size, False)


def polygon_orders(max_order: int) -> tuple[int, ...]:
    """Nested truncation orders ``N/8, N/4, N/2, N`` (fewer for small N)."""
    out = sorted({max_order // d for d in (8, 4, 2, 1) if max_order // d >= 4})
    return tuple(out)


def solve_cached(P: Polygon, cache: ResultCache, nodes: int = 20) -> tuple[ScExteriorMap, bool]:
    payload = {"polygon": P.to_json(), "nodes": nodes}
    value, hit = cache.fetch("map", payload, lambda: solve_parameters(P, SolverOptions(nodes=nodes)).to_json())
    return map_from_json(value, P), hit


def polygon_grunsky(P: Polygon, max_order: int = DEFAULT_ORDERS[-1], cache: ResultCache | None = None,
                    radii=(1.1, 1.2), nodes: int = 20) -> dict:
    """Solve the exterior map, build the Grunsky matrix and estimate kappa.

    Returns a JSON-ready dict with the map, the kappa estimate, the area
    sum of the normalized series, the largest Grunsky row norm and the
    leading 16x16 block of the Grunsky matrix.
    """
    cache = cache or ResultCache(None)
    P = canonical_polygon(P)
    M, _ = solve_cached(P, cache, nodes)
    payload = {"polygon": P.to_json(), "order": max_order, "radii": list(radii), "nodes": nodes}

    def compute():
        S = M.laurent_series(2 * max_order)
        G = grunsky_from_series(S, max_order, radii=radii)
        est = kappa_estimate(G, polygon_orders(max_order))
        lead = GrunskyMatrix(G.beta[:16, :16], G.provenance)
        return {
            "map": M.to_json(),
            "kappa": est.to_json(),
            "areaSum": S.area_sum(),
            "maxRowNorm": float(G.row_norms().max()),
            "leadingBlock": lead.to_json(),
        }

    value, _ = cache.fetch("grunsky", payload, compute)
    return value


def curve_key(curve) -> dict:
    if isinstance(curve, Polygon):
        return {"polygon": curve.to_json()}
    return {"curve": curve.name}


def fredholm_cached(curve, mesh: MeshOptions, cache: ResultCache | None = None) -> dict:
    cache = cache or ResultCache(None)
    if isinstance(curve, Polygon):
        curve = canonical_polygon(curve)
    smooth = not isinstance(curve, Polygon)
    payload = dict(curve_key(curve), mesh=asdict(mesh.resolved(smooth)))
    value, _ = cache.fetch("fredholm", payload, lambda: np_spectrum(curve, mesh).to_json())
    return value


def analyze_polygon(P: Polygon, max_order: int = DEFAULT_ORDERS[-1], mesh: MeshOptions | None = None,
                    cache: ResultCache | None = None) -> dict:
    """Both pipelines on one polygon plus the reciprocity residual and timings."""
    mesh = mesh or MeshOptions()
    t0 = time.perf_counter()
    g = polygon_grunsky(P, max_order, cache)
    t1 = time.perf_counter()
    f = fredholm_cached(P, mesh, cache)
    t2 = time.perf_counter()
    kappa = g["kappa"]["kappa"]
    abs_res, rel_res = kuhnau_schiffer_residual(kappa, f["invRho"])
    return {
        "kappa": kappa,
        "kappaRaw": g["kappa"]["kappaRaw"],
        "kappaErr": g["kappa"]["errorBar"],
        "invRho": f["invRho"],
        "invRhoErr": f["errorBar"],
        "ksResidual": abs_res,
        "ksRelative": rel_res,
        "areaSum": g["areaSum"],
        "maxRowNorm": g["maxRowNorm"],
        "tGrunsky": t1 - t0,
        "tFredholm": t2 - t1,
    }


# --------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class Sample:
    index: int
    params: dict
    vertices: tuple


def _random_quad(rng: np.random.Generator, beta_range=(0.2, 0.85), max_aspect: float = 6.0) -> Polygon:
    while True:
        th = np.sort(rng.uniform(0.0, 2 * np.pi, 4))
        r = rng.uniform(0.65, 1.0, 4)
        try:
            P = make_polygon(r * np.exp(1j * th))
        except (QclabError, ValueError):
            continue
        b = P.betas
        if is_convex(P) and b.min() >= beta_range[0] and b.max() <= beta_range[1] \
                and P.aspect_ratio <= max_aspect:
            return P


def random_quads(count: int, seed: int = 0) -> list[Sample]:
    """Seeded convex quadrilaterals with angles in ``[0.2, 0.85] * pi``."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        P = _random_quad(rng)
        params = {f"{c}{j}": float(getattr(v, part)) for j, v in enumerate(P.vertices)
                  for c, part in (("x", "real"), ("y", "imag"))}
        out.append(Sample(i, params, P.vertices))
    return out


TRAPEZOID_START = (0, 1, 1 + 1j, 1j)
TRAPEZOID_END = (0, 1, 0.7 + 0.8j, 0.1 + 0.8j)


def trapezoid_family(count: int) -> list[Sample]:
    """Quadrilaterals interpolating linearly from the unit square to a generic one."""
    a, b = np.array(TRAPEZOID_START, dtype=complex), np.array(TRAPEZOID_END, dtype=complex)
    s = np.linspace(0.0, 1.0, count) if count > 1 else np.zeros(count)
    return [Sample(i, {"s": float(si)}, tuple(complex(v) for v in a + si * (b - a)))
            for i, si in enumerate(s)]


def family_from_spec(spec: dict, seed: int | None = None) -> list[Sample]:
    """Build samples from a family spec.

    Accepted forms: ``{"family": "random_quads", "count": n, "seed": s}``,
    ``{"family": "trapezoid", "count": n}`` and
    ``{"family": "list", "polygons": [[[x, y], ...], ...]}``.
    """
    try:
        kind = spec["family"]
        if kind == "random_quads":
            samples = random_quads(int(spec.get("count", 0)), int(seed if seed is not None else spec.get("seed", 0)))
        elif kind == "trapezoid":
            samples = trapezoid_family(int(spec.get("count", 0)))
        elif kind == "list":
            samples = [Sample(i, {"index": i}, tuple(complex(x, y) for x, y in poly))
                       for i, poly in enumerate(spec.get("polygons", []))]
        else:
            raise FamilyError(f"unknown family {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise FamilyError(f"malformed family spec: {exc}") from exc
    if not samples:
        raise FamilyError("family is empty")
    return samples


# --------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = ("kappa", "kappaRaw", "kappaErr", "invRho", "invRhoErr", "ksResidual", "ksRelative",
                 "areaSum", "maxRowNorm")


def _run_sample(args) -> dict:
    sample, max_order, mesh, cache_root = args
    with threadpool_limits(limits=1):
        try:
            P = make_polygon(sample.vertices)
            res = analyze_polygon(P, max_order, mesh, ResultCache(cache_root))
            return {"status": "ok", "error": "", **res}
        except (QclabError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return {"status": "fail", "error": f"{type(exc).__name__}: {exc}"}


def run_sweep(samples: list[Sample], jobs: int = 1, max_order: int = DEFAULT_ORDERS[-1],
              mesh: MeshOptions | None = None, cache_root: str | None = None) -> list[dict]:
    """Evaluate every sample; results are ordered by sample index.

    Each sample runs with single-threaded BLAS, so values do not depend on
    ``jobs``.
    """
    mesh = mesh or MeshOptions()
    args = [(s, max_order, mesh, cache_root) for s in samples]
    if jobs <= 1:
        results = [_run_sample(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_sample, args))
    return [dict(index=s.index, params=s.params, **r) for s, r in zip(samples, results)]


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, FLOAT_FORMAT)
    return str(v)


def sweep_csv(rows: list[dict]) -> str:
    """Deterministic CSV of sweep results (runtimes excluded)."""
    params = list(rows[0]["params"].keys()) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", *params, *SWEEP_COLUMNS, "status", "error"])
    for r in rows:
        vals = [r.get(c, "") for c in SWEEP_COLUMNS]
        w.writerow([r["index"], *(_fmt(r["params"][p]) for p in params), *(_fmt(v) for v in vals),
                    r["status"], r["error"]])
    return buf.getvalue()


def runtimes_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "tGrunsky", "tFredholm"])
    for r in rows:
        w.writerow([r["index"], _fmt(r.get("tGrunsky", "")), _fmt(r.get("tFredholm", ""))])
    return buf.getvalue()


def plot_csv(x, y) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for a, b in zip(x, y):
        w.writerow([_fmt(float(a)), _fmt(float(b))])
    return buf.getvalue()


def success_fraction(rows: list[dict]) -> float:
    return sum(r["status"] == "ok" for r in rows) / len(rows) if rows else 0.0
