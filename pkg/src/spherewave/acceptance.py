"""
End-to-end acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult`; :func:`run_all` runs a
selection and is what the ``selftest`` subcommand calls.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bessel, decomp, kernelcheck, multipliers, prober, wave
from .grid import FREQUENCY, PHYSICAL, GridSpec, make_grid, norm_values, transform
from .multipliers import MultiplierTable, OmegaParams, SymbolClass
from .sobolev import make_sobolev_params

KERNEL_RHO = (0.26, 0.26)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    elapsed: float = 0.0
    limit: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lim = f" (limit {self.limit:g}s)" if self.limit else ""
        return f"[{status}] criterion {self.number:2d} {self.name}: {self.elapsed:.1f}s{lim}"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "elapsed": self.elapsed, "limit": self.limit, "detail": _jsonable(self.detail)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# ---------------------------------------------------------------------------
# 1-4: special functions and multipliers

def crit_01_recurrence() -> dict:
    rho = np.geomspace(0.5, 50, 20)
    worst = {}
    for a in (0.0, 0.5, 1.0, 2.5):
        for b in (0.0, 1.0):
            worst[f"a={a:g},b={b:g}"] = float(np.max(bessel.recurrence_residual((a, b), rho)))
    m = max(worst.values())
    return {"passed": m < 1e-9, "max_residual": m, "per_order": worst}


def remainder_slopes(orders=((0.0, 0.0), (1.0, 0.0), (2.5, 1.0)), n_terms=(1, 2, 3),
                     rho_min: float = 20.0, rho_max: float = 200.0, bins: int = 10) -> dict:
    """Fitted log-log slope of the envelope of |J - truncated expansion| on [rho_min, rho_max].

    The reference values come from mpmath (arbitrary precision); the envelope is
    the maximum over each of ``bins`` log-spaced windows of 48 samples.
    """
    import mpmath

    mpmath.mp.dps = 30
    edges = np.geomspace(rho_min, rho_max, bins + 1)
    out = {}
    for a, b in orders:
        pts = [np.linspace(lo, hi, 48) for lo, hi in zip(edges[:-1], edges[1:])]
        ref = [np.array([complex(mpmath.besselj(mpmath.mpc(a, b), x)) for x in p]) for p in pts]
        for n in n_terms:
            xs, ys = [], []
            for p, r in zip(pts, ref):
                err = np.abs(bessel.bessel_asymptotic((a, b), p, n) - r)
                xs.append(math.log(math.sqrt(p[0] * p[-1])))
                ys.append(math.log(float(err.max())))
            out[(a, b, n)] = float(np.polyfit(xs, ys, 1)[0])
    return out


def crit_02_remainder() -> dict:
    slopes = remainder_slopes()
    target = {n: -(2 * n + 0.5) for n in (1, 2, 3)}
    ok = all(abs(s - target[n]) <= 0.3 for (a, b, n), s in slopes.items())
    return {"passed": ok,
            "slopes": {f"a={a:g},b={b:g},N={n}": s for (a, b, n), s in slopes.items()},
            "target": {f"N={n}": v for n, v in target.items()},
            "next_term_rate": {f"N={n}": -(2 * n + 1.5) for n in (1, 2, 3)}}


def crit_03_appendix_series() -> dict:
    xi = np.linspace(0.0, 2.0, 201)
    errs = {}
    for N in (2, 3):
        for alpha in (1.0, 0.5, 0.0, complex(-0.5, 0.3)):
            ref = np.asarray(multipliers.omega_hat(alpha, xi, N))
            ser = np.asarray(multipliers.omega_hat_series(1 - alpha, xi, N, 60))
            errs[f"N={N},alpha={alpha}"] = float(np.max(np.abs(ser - ref)) / np.max(np.abs(ref)))
    m = max(errs.values())
    return {"passed": m < 1e-8, "max_rel_err": m, "per_case": errs}


def crit_04_ball_transform() -> dict:
    spec = make_grid(2, (1, 1), 256, 8.0)
    F = transform(multipliers.sample_kernel(1.0, spec), "forward").values
    xi = spec.radius(FREQUENCY)
    sel = xi <= spec.samples_per_axis / (8 * spec.half_width)
    A = np.asarray(multipliers.omega_hat(1.0, xi, 2))
    err = float(np.max(np.abs(F - A)[sel]) / np.max(np.abs(A[sel])))
    return {"passed": err < 0.02, "rel_err": err, "xi_max": float(xi[sel].max())}


# ---------------------------------------------------------------------------
# 5-6: decompositions

def crit_05_caps(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    pou = {}
    for M in (2, 3):
        for j in (4, 6, 8):
            pts = decomp.sphere_points(j, M)
            xi = rng.standard_normal((10_000, M))
            W = decomp.cap_partition(j, pts, xi)
            pou[f"M={M},j={j}"] = float(np.max(np.abs(np.asarray(W.sum(axis=1)).ravel() - 1.0)))
    slopes = {}
    for M in (2, 3):
        js = list(range(4, 11))
        counts = [decomp.sphere_points(j, M).shape[0] for j in js]
        slopes[M] = float(np.polyfit(js, np.log2(counts), 1)[0])
    ok = max(pou.values()) < 1e-12 and all(abs(s - (M - 1) / 2) <= 0.15 for M, s in slopes.items())
    return {"passed": ok, "partition_err": pou, "count_slopes": {f"M={M}": s for M, s in slopes.items()}}


def crit_06_region(mc_samples: int = 10 ** 6, seed: int = 0) -> dict:
    rs = [2.0 ** -k for k in range(3, 9)]
    out, ok = {}, True
    for N in (2, 3):
        vals = []
        for r in rs:
            reg = decomp.influence_region(r, 1.0, N)
            vals.append(decomp.region_volume(reg) / r)
        sp = max(vals) / min(vals)
        trend = float(np.polyfit(np.log2(1 / np.array(rs)), np.log2(vals), 1)[0])
        reg = decomp.influence_region(rs[0], 1.0, N)
        mc, se = decomp.region_volume_mc(reg, mc_samples, seed)
        exact = vals[0] * rs[0]
        mc_ok = abs(mc - exact) <= max(4 * se, 0.01 * exact)
        out[f"N={N}"] = {"volume_over_r": vals, "spread": sp, "log2_trend": trend,
                         "mc_volume": mc, "mc_stderr": se, "quadrature_volume": exact}
        ok &= sp < 4 and trend < 0.1 and mc_ok
    return {"passed": bool(ok), **out}


# ---------------------------------------------------------------------------
# 7-9: kernel laws

def crit_07_l1_law() -> dict:
    cls = SymbolClass(KERNEL_RHO)
    rows = kernelcheck.l1_scan(range(5, 9), lambda j: [(t,) for t in range(j // 2)], cls)
    fit = kernelcheck.fit_t_slope(rows)
    jfit = kernelcheck.fit_j_slope([r for r in rows if r.t == (0,)])
    ok = -0.8 <= fit.slope <= -0.2 and fit.r2 > 0.9 and jfit.slope <= 0.1
    return {"passed": ok, "t_slope": fit.slope, "t_r2": fit.r2, "j_slope_t0": jfit.slope,
            "rows": [(r.j, r.t[0], r.measured) for r in rows]}


def crit_08_diff_law() -> dict:
    cls = SymbolClass(KERNEL_RHO)
    ratios = []
    per = {}
    for j in (5, 6, 7):
        for t in ((0,), (1,)):
            rows = kernelcheck.diff_scan(j, t, kernelcheck.y_grid(j, 2), cls)
            rr = [r.ratio for r in rows]
            per[f"j={j},t={t[0]}"] = [min(rr), max(rr)]
            ratios += rr
    sp = kernelcheck.spread(ratios)
    return {"passed": sp < 10, "spread": sp, "ranges": per}


def crit_09_tail_law() -> dict:
    cls = SymbolClass(KERNEL_RHO)
    r, c = 2.0 ** -3, 4.0
    ratios, per = [], {}
    for t in ((0,), (1,)):
        rows = kernelcheck.tail_scan(range(4, 8), t, r, c, cls)
        for row in rows:
            per[f"j={row.j},t={t[0]}"] = {"tail": row.measured, "ratio": row.ratio}
            ratios.append(row.ratio)
    finite = [x for x in ratios if x > 0]
    sp = float(max(finite) / min(finite)) if len(finite) == len(ratios) else float("inf")
    return {"passed": sp < 10, "spread": sp, "max_ratio": float(max(ratios)), "rows": per}


# ---------------------------------------------------------------------------
# 10-13: wave, Plancherel, atoms

def crit_10_wave() -> dict:
    spec = make_grid(2, (1, 1), 64, 0.5)
    errs, res = [], []
    for steps in (256, 512):
        cfg = wave.WaveConfig(spec, 1.0, steps)
        g, exact = wave.manufactured_forcing(cfg, (1, 1), math.pi)
        u = wave.solve_wave(g, cfg)
        diff = wave.FieldSeries(spec, cfg.times, u.values - exact.values)
        errs.append(wave.series_l2(diff) / wave.series_l2(exact))
        res.append(wave.series_l2(wave.residual(u, g, cfg)) / wave.series_l2(g))
    ratio = errs[0] / errs[1]
    res_ratio = res[0] / res[1]
    ok = errs[0] < 1e-3 and abs(ratio - 4) <= 1.2 and abs(res_ratio - 4) <= 1.2
    return {"passed": ok, "rel_l2_err": errs, "err_ratio": ratio, "residual": res, "residual_ratio": res_ratio}


def crit_11_apriori(seed: int = 0) -> dict:
    spec = make_grid(3, (2, 1), 16, 2.0)
    cfg = wave.WaveConfig(spec, 1.0, 64)
    params = make_sobolev_params((2, 1), (0.4, 0.3), 2.0)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(20):
        res = wave.apriori_check(wave.random_forcing(cfg, rng), params, cfg)
        ratios.append(res.final[2])
    sp = max(ratios) / min(ratios)
    return {"passed": bool(np.all(np.isfinite(ratios)) and sp < 10), "spread": sp,
            "min": min(ratios), "max": max(ratios)}


def _product(spec: GridSpec, factors) -> np.ndarray:
    out = np.ones(spec.shape, dtype=np.complex128)
    for f in factors:
        out = out * f
    return out


def crit_12_plancherel(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    spec = make_grid(2, (1, 1), 64, 4.0)
    worst = 0.0
    tables = {
        "imaginary_power": MultiplierTable.from_builder(
            spec, lambda sp: _product(sp, [(1 + n * n) ** 0.3j for n in sp.block_norms(FREQUENCY)])),
        "riesz_product": MultiplierTable.from_builder(
            spec, lambda sp: _product(sp, [(x + 1j) / np.sqrt(1 + x * x) for x in sp.frequencies()])),
        "sigma_plus_phase": multipliers.sigma_table(spec, OmegaParams(0.5, 0.0), (0.0, 0.0), 2,
                                                    branch=1, with_phase=True),
    }
    per = {}
    for name, tab in tables.items():
        sup = float(np.max(np.abs(tab.values)))
        r_max = 0.0
        for f in prober.random_fields(spec, 50, rng):
            out = multipliers.apply_multiplier(f, tab)
            r_max = max(r_max, norm_values(spec, out.values, 2) / norm_values(spec, f.values, 2))
        per[name] = {"ratio_max": r_max, "sup": sup}
        worst = max(worst, r_max / sup)
    return {"passed": worst <= 1 + 1e-9, "worst_ratio_over_sup": worst, "tables": per}


def crit_13_atoms() -> dict:
    spec = make_grid(2, (1, 1), 128, 2.0)
    spec3 = make_grid(3, (2, 1), 48, 2.0)
    reports = []
    for sp in (spec, spec3):
        for r in (0.8, 0.5, 0.25, 0.15):
            for c in (np.zeros(sp.dim_total), np.full(sp.dim_total, 0.0371)):
                a = prober.h1_atom(r, c, sp)
                rep = prober.atom_report(a, r, c)
                rep["r"] = r
                rep["dim"] = sp.dim_total
                reports.append(rep)
    ok = all(abs(x["mean"]) <= 1e-14 and x["sup_over_bound"] <= 1 + 1e-12 and x["outside_max"] == 0
             for x in reports)
    return {"passed": ok, "worst_mean": max(abs(x["mean"]) for x in reports),
            "worst_sup_over_bound": max(x["sup_over_bound"] for x in reports)}


CRITERIA = {
    1: ("bessel recurrence", crit_01_recurrence, 5.0),
    2: ("asymptotic remainder law", crit_02_remainder, 10.0),
    3: ("appendix series identity", crit_03_appendix_series, 5.0),
    4: ("ball indicator transform", crit_04_ball_transform, 10.0),
    5: ("cap partition of unity and counts", crit_05_caps, None),
    6: ("region of influence volume", crit_06_region, None),
    7: ("kernel L1 law", crit_07_l1_law, 180.0),
    8: ("kernel difference law", crit_08_diff_law, None),
    9: ("kernel tail law", crit_09_tail_law, None),
    10: ("wave solver", crit_10_wave, 30.0),
    11: ("a priori probe", crit_11_apriori, None),
    12: ("Plancherel bound", crit_12_plancherel, None),
    13: ("H1 atom constraints", crit_13_atoms, None),
}


def run_criterion(n: int) -> CriterionResult:
    name, fn, limit = CRITERIA[n]
    t0 = time.perf_counter()
    try:
        detail = fn()
        passed = bool(detail.pop("passed"))
    except Exception as exc:  # a crash is a failed criterion, reported with its message
        detail, passed = {"error": f"{type(exc).__name__}: {exc}"}, False
    elapsed = time.perf_counter() - t0
    if limit is not None and elapsed > limit:
        detail["runtime_exceeded"] = True
        passed = False
    return CriterionResult(n, name, passed, detail, elapsed, limit)


def run_all(numbers=None, echo=None) -> list[CriterionResult]:
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    out = []
    for n in numbers:
        res = run_criterion(n)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out


__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all", "remainder_slopes"]
