"""Verification suites: numbered criteria, named suites and experiment reports."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .ext_scmap import eval_map, joukowski_series, laurent_coeffs, solve_parameters, trace_series
from .experiments import (
    TOOL_VERSION,
    analyze_polygon,
    canonical_json,
    polygon_orders,
    random_quads,
    run_sweep,
    sweep_csv,
    trapezoid_family,
)
from .fredholm import (
    MeshOptions,
    ahlfors_check,
    circle,
    ellipse,
    kuhnau_schiffer_residual,
    np_spectrum,
    pm_partners,
    reflection_report,
)
from .grunsky import (
    BeltramiField,
    alpha_functional,
    grunsky_from_series,
    grunsky_norm,
    homotopy_scale,
    pairing,
    quad_differential,
)
from .polygeom import beltrami_compose, make_polygon, stretch_ellipse_axes, unit_square
from .schwarzian import (
    HarmonicBeltrami,
    SamplerOptions,
    bnorm,
    halfplane_schwarzian,
    mu_supnorm,
    r0_root,
    square_prevertices,
)


def load_tolerances(path: str | Path | None = None) -> dict:
    """Packaged tolerances, overridden key by key by an optional JSON file."""
    tol = json.loads(resources.files("qclab").joinpath("data/tolerances.json").read_text())
    if path:
        try:
            extra = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(extra, dict) or not all(isinstance(v, (int, float)) for v in extra.values()):
            raise ValueError("config must map tolerance names to numbers")
        tol.update(extra)
    return tol


@dataclass
class CriterionResult:
    """Outcome of one criterion; every metric carries its tolerance."""

    number: int
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    notes: str = ""

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.title}"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "metrics": self.metrics, "notes": self.notes}


def _metric(value, tol, kind: str = "max") -> dict:
    return {"value": float(value), "tol": float(tol), "kind": kind}


# --------------------------------------------------------------------------
# criteria


def criterion_1(tol: dict) -> CriterionResult:
    """Joukowski series and ellipses: kappa and 1/rho both equal c."""
    m, ok = {}, True
    for c in (0.1, 0.3, 0.5, 0.7):
        G = grunsky_from_series(joukowski_series(c, 64), 32)
        kappa = grunsky_norm(G).kappa
        a, b = stretch_ellipse_axes(c)
        S = np_spectrum(ellipse(a, b))
        ks, _ = kuhnau_schiffer_residual(kappa, S.inv_rho)
        m[f"c={c}.kappaErr"] = _metric(abs(kappa - c), tol["ellipse.kappa"])
        m[f"c={c}.invRhoErr"] = _metric(abs(S.inv_rho - c), tol["ellipse.invRho"])
        m[f"c={c}.ksResidual"] = _metric(ks, tol["ellipse.ks"])
        ok &= abs(kappa - c) < tol["ellipse.kappa"] and abs(S.inv_rho - c) < tol["ellipse.invRho"] \
            and ks < tol["ellipse.ks"]
    return CriterionResult(1, "ellipse closed form", bool(ok), m)


def criterion_2(tol: dict) -> CriterionResult:
    """Dilated maps t F(z/t) scale the Grunsky matrix by t**(m+n)."""
    N = 32
    S = solve_parameters(unit_square()).laurent_series(2 * N)
    G = grunsky_from_series(S, N)
    m, kappas, worst = {}, [], 0.0
    for t in (0.3, 0.6, 0.9):
        Gt = grunsky_from_series(S.dilate(t), N)
        res = float(np.max(np.abs(Gt.beta - homotopy_scale(G, t).beta)))
        worst = max(worst, res)
        kappas.append(grunsky_norm(Gt).kappa)
        m[f"t={t}.residual"] = _metric(res, tol["homotopy.residual"])
        m[f"t={t}.kappa"] = _metric(kappas[-1], 0.0, "report")
    monotone = bool(np.all(np.diff(kappas) >= 0))
    return CriterionResult(2, "homotopy scaling law", worst < tol["homotopy.residual"] and monotone, m,
                           f"kappa nondecreasing in t: {monotone}")


def affine_family_values(c1: float, c2: float) -> dict:
    """kappa and 1/rho of the ellipse obtained by two successive real stretches."""
    a, b = 1 + c1 * c2, c1 + c2
    S, lead = trace_series(lambda th: a * np.exp(1j * th) + b * np.exp(-1j * th), M=64)
    kappa = grunsky_norm(grunsky_from_series(S, 32)).kappa
    inv_rho = np_spectrum(ellipse(a + b, a - b)).inv_rho
    tau = complex(beltrami_compose(c1, c2)).real
    return {"kappa": kappa, "invRho": inv_rho, "tau": tau, "formula": (c1 + c2) / (1 + c1 * c2)}


def criterion_3(tol: dict) -> CriterionResult:
    m, ok = {}, True
    for c1 in (0.2, 0.4):
        for c2 in (0.2, 0.4):
            v = affine_family_values(c1, c2)
            ek, er = abs(v["kappa"] - v["tau"]), abs(v["invRho"] - v["tau"])
            m[f"({c1},{c2}).kappaErr"] = _metric(ek, tol["affine.match"])
            m[f"({c1},{c2}).invRhoErr"] = _metric(er, tol["affine.match"])
            m[f"({c1},{c2}).composeErr"] = _metric(abs(v["tau"] - v["formula"]), 1e-14)
            ok &= ek < tol["affine.match"] and er < tol["affine.match"] \
                and ahlfors_check(v["invRho"], abs(v["tau"]))
    return CriterionResult(3, "affine family: kappa = 1/rho = composed dilatation", bool(ok), m)


def criterion_4(tol: dict) -> CriterionResult:
    count, seed = int(tol["quad.count"]), int(tol["quad.seed"])
    rows = run_sweep(random_quads(count, seed))
    m, ok = {}, True
    for r in rows:
        if r["status"] != "ok":
            ok = False
            m[f"q{r['index']}.failed"] = _metric(1, 0)
            continue
        rep = reflection_report(r["kappa"], "T4")
        licensed = rep["q_L"] == r["kappa"] and math.isclose(rep["rho_L"], 1 / r["kappa"])
        m[f"q{r['index']}.ksResidual"] = _metric(r["ksResidual"], tol["quad.ks"])
        ok &= r["ksResidual"] < tol["quad.ks"] and licensed
    return CriterionResult(4, "random convex quadrilaterals: kappa vs 1/rho", bool(ok), m,
                           "q = kappa and rho = 1/kappa are theorem-licensed, not measured")


def criterion_5(tol: dict) -> CriterionResult:
    S = np_spectrum(circle())
    i = int(np.argmin(np.abs(S.eigenvalues - 1)))
    rest = np.delete(S.eigenvalues, i)
    unit_err = abs(S.eigenvalues[i] - 1)
    nonunit = float(np.max(np.abs(rest)))
    m = {"unitErr": _metric(unit_err, tol["circle.unit"]), "maxNonunit": _metric(nonunit, tol["circle.nonunit"])}
    return CriterionResult(5, "circle calibration", unit_err < tol["circle.unit"] and nonunit < tol["circle.nonunit"], m)


def criterion_6(tol: dict) -> CriterionResult:
    """Stabilized eigenvalues outside the essential band come in +- pairs."""
    mt = tol["symmetry.mesh"]
    m, ok = {}, True
    for name, curve in (("ellipse(0.4)", ellipse(1.4, 0.6)), ("square", unit_square())):
        S = np_spectrum(curve, stab_tol=mt, band_margin=2 * mt)
        pairs = pm_partners(S, mt)
        worst = max((d for _, d in pairs), default=0.0)
        m[f"{name}.worstPartnerGap"] = _metric(worst, mt)
        m[f"{name}.pairsChecked"] = _metric(len(pairs), 0, "report")
        m[f"{name}.stabilized"] = _metric(len(S.stabilized), 0, "report")
        m[f"{name}.errorBar"] = _metric(S.error_bar, tol["refinement.invRho"])
        ok &= worst < mt and S.error_bar < tol["refinement.invRho"]
    return CriterionResult(6, "spectrum +- symmetry", bool(ok), m,
                           "only eigenvalues stable across two meshes and outside the essential band are paired")


def criterion_7(tol: dict) -> CriterionResult:
    m, ok = {}, True
    worst = 0.0
    for n in range(1, 7):
        x = np.zeros(n, dtype=complex)
        x[-1] = 1.0
        worst = max(worst, abs(quad_differential(x).a1_norm - 1))
    m["a1NormErr"] = _metric(worst, tol["micro.a1"])
    ok &= worst < tol["micro.a1"]
    rng = np.random.default_rng(0)
    c = 0.3 - 0.2j
    mu = BeltramiField.constant(c)
    worst = 0.0
    for _ in range(10):
        x = rng.normal(size=6) + 1j * rng.normal(size=6)
        x /= np.linalg.norm(x)
        worst = max(worst, abs(pairing(mu, quad_differential(x)) - c * x[0] ** 2))
    m["pairingErr"] = _metric(worst, tol["micro.pairing"])
    ok &= worst < tol["micro.pairing"]
    worst = 0.0
    for c in (0.0, 0.25, 0.5j, 0.6 + 0.3j):
        worst = max(worst, abs(alpha_functional(BeltramiField.constant(c), 8).value - abs(c)))
    m["alphaConstErr"] = _metric(worst, tol["micro.alpha"])
    ok &= worst < tol["micro.alpha"]
    return CriterionResult(7, "quadratic differentials and the alpha functional", bool(ok), m)


def criterion_8(tol: dict) -> CriterionResult:
    m = {}
    D = halfplane_schwarzian(square_prevertices(), [0.5] * 4)
    exact = bool(np.all(D.C == -0.625) and np.all(D.Cpair == 0.25))
    m["squareCoefficientsExact"] = _metric(float(exact), 1, "flag")
    e1 = abs(r0_root([0.5] * 4) - (-2 + 2 * math.sqrt(6)) / 5)
    e2 = abs(r0_root([1 / 3] * 3) - 0.5687)
    phi = lambda z: (z + 1j) ** -4
    B = bnorm(phi)
    e3 = abs(B - 0.25)
    e4 = abs(mu_supnorm(HarmonicBeltrami(phi, -2.0)) - B / 2)
    m["r0Square"] = _metric(e1, tol["schwarzian.r0"])
    m["r0Equilateral"] = _metric(e2, tol["schwarzian.r0Equilateral"])
    m["bnormErr"] = _metric(e3, tol["schwarzian.bnorm"])
    m["muHalfBnormErr"] = _metric(e4, tol["schwarzian.mu"])
    ok = exact and e1 < tol["schwarzian.r0"] and e2 < tol["schwarzian.r0Equilateral"] \
        and e3 < tol["schwarzian.bnorm"] and e4 < tol["schwarzian.mu"]
    return CriterionResult(8, "Schwarzian coefficients, r0, B-norm", bool(ok), m)


def criterion_9(tol: dict) -> CriterionResult:
    """Area theorem on series and Grunsky rows of several solved polygons."""
    slack = tol["area.slack"]
    polys = [unit_square()] + [make_polygon(s.vertices) for s in random_quads(4, 11)] \
        + [make_polygon(s.vertices) for s in trapezoid_family(3)]
    worst_area, worst_row = 0.0, 0.0
    for P in polys:
        M = solve_parameters(P)
        S = M.laurent_series(512)
        F = laurent_coeffs(lambda z: eval_map(M, z) / M.d1, R=1.2, M=24)
        G = grunsky_from_series(S, 256)
        worst_area = max(worst_area, S.area_sum(), F.area_sum())
        worst_row = max(worst_row, float(G.row_norms().max()))
    m = {"maxAreaSum": _metric(worst_area, 1 + slack), "maxRowNorm": _metric(worst_row, 1 + slack)}
    return CriterionResult(9, "area theorem", worst_area <= 1 + slack and worst_row <= 1 + slack, m)


def criterion_10(tol: dict) -> CriterionResult:
    samples = random_quads(int(tol["determinism.count"]), 3)
    a = sweep_csv(run_sweep(samples, jobs=1, max_order=128))
    b = sweep_csv(run_sweep(samples, jobs=int(tol["determinism.jobs"]), max_order=128))
    return CriterionResult(10, "sweep determinism across worker counts", a == b,
                           {"identical": _metric(float(a == b), 1, "flag")})


def square_agreement(tol: dict) -> CriterionResult:
    """Both pipelines on the unit square."""
    r = analyze_polygon(unit_square())
    m = {"ksResidual": _metric(r["ksResidual"], tol["square.ks"]),
         "kappa": _metric(r["kappa"], 0, "report"), "invRho": _metric(r["invRho"], 0, "report"),
         "invRhoErrorBar": _metric(r["invRhoErr"], tol["refinement.invRho"])}
    ok = r["ksResidual"] < tol["square.ks"] and r["invRhoErr"] < tol["refinement.invRho"]
    return CriterionResult(0, "square: kappa vs 1/rho", bool(ok), m)


CRITERIA: dict[int, Callable[[dict], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}

SUITES: dict[str, list] = {
    "ellipse": [1, 5, 6],
    "homotopy": [2],
    "affine": [3, 7],
    "quad": [4, 9, 10],
    "square": [square_agreement, 6, 9],
    "schwarzian": [8],
}


# --------------------------------------------------------------------------
# reports


@dataclass
class ExperimentReport:
    experiment_id: str
    inputs: dict
    metrics: dict
    status: dict
    tool_version: str = TOOL_VERSION

    def to_json(self) -> dict:
        return {"experimentId": self.experiment_id, "inputs": self.inputs, "metrics": self.metrics,
                "status": self.status, "toolVersion": self.tool_version}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentReport":
        return cls(data["experimentId"], data["inputs"], data["metrics"], data["status"], data["toolVersion"])

    @property
    def passed(self) -> bool:
        return all(v == "pass" for v in self.status.values())


def run_suite(name: str, tol: dict | None = None, echo: Callable[[str], None] | None = None) -> ExperimentReport:
    """Run a named suite; ``echo`` receives one pass/fail line per criterion."""
    if name not in SUITES:
        raise KeyError(name)
    tol = tol if tol is not None else load_tolerances()
    metrics, status, timing = {}, {}, {}
    for item in SUITES[name]:
        fn = CRITERIA[item] if isinstance(item, int) else item
        t0 = time.perf_counter()
        res = fn(tol)
        key = f"criterion{res.number}" if res.number else fn.__name__
        timing[key] = time.perf_counter() - t0
        status[key] = "pass" if res.passed else "fail"
        metrics[key] = res.metrics
        if echo:
            echo(res.line() if res.number else f"{key} [{status[key].upper()}] {res.title}")
    metrics["runtimeSeconds"] = {k: _metric(v, 600.0) for k, v in timing.items()}
    inputs = {"suite": name, "tolerances": tol}
    eid = "verify-" + name
    return ExperimentReport(eid, json.loads(canonical_json(inputs)), metrics, status)
