"""Heat-trace and counting-function asymptotics: evaluators, fits and reports.

Normalisations used throughout:

* heat trace ``Z(t) = t^{-n/2} (a0 + a1 t^{1/2} + a2 t + ...)``;
* counting function ``N(Lambda) = A Lambda^{n/2} + B Lambda^{(n-1)/2} + ...``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .errors import ConfigError, FitError
from .moduli import DIRICHLET, ElasticModuli, bc_sign, check_bc
from .spectrum import SpectrumTable, fmt

HEAT_KINDS = ("theoretical_heat", "fitted_heat")
COUNTING_KINDS = ("theoretical_counting", "fitted_counting")
KINDS = HEAT_KINDS + COUNTING_KINDS
VERDICTS = ("consistent", "inconsistent", "inconclusive")

TAIL_SAFETY = 1.2
TAIL_THRESHOLD = 1e-3
POINTS_PER_DECADE = 24
CESARO_FRACTION = 0.25
ROUNDING = 1e-13  # relative accuracy assumed for a summed heat trace


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class GeometryData:
    n: int
    vol_omega: float
    vol_boundary: float
    integral_R: float = 0.0
    integral_H: float = 0.0  # curvature taken w.r.t. the outward normal
    holes: int | None = None
    sigma_H: int = 1
    name: str = "custom"
    caveats: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("dimension must be at least 1")
        if not (self.vol_omega > 0 and self.vol_boundary > 0):
            raise ConfigError("volumes of the domain and its boundary must be positive")
        if self.sigma_H not in (1, -1):
            raise ConfigError("sigma_H must be +1 or -1")

    @property
    def signed_integral_H(self) -> float:
        return self.sigma_H * self.integral_H

    def with_sigma(self, sigma_H: int) -> "GeometryData":
        return GeometryData(self.n, self.vol_omega, self.vol_boundary, self.integral_R, self.integral_H,
                            self.holes, sigma_H, self.name, self.caveats)

    def as_dict(self) -> dict:
        return {
            "name": self.name, "n": self.n, "vol_omega": self.vol_omega, "vol_boundary": self.vol_boundary,
            "integral_R": self.integral_R, "integral_H": self.integral_H, "holes": self.holes,
            "sigma_H": self.sigma_H, "caveats": list(self.caveats),
        }


def disk_geometry(radius: float = 1.0, sigma_H: int = 1) -> GeometryData:
    return GeometryData(2, math.pi * radius ** 2, 2 * math.pi * radius, 0.0, 2 * math.pi, 0, sigma_H, "disk")


def square_geometry(side: float = 1.0, sigma_H: int = 1) -> GeometryData:
    return GeometryData(2, side ** 2, 4 * side, 0.0, 0.0, 0, sigma_H, "square",
                        ("corners are outside the smooth-boundary hypothesis; results are extrapolations",))


def annulus_geometry(inner: float, outer: float, sigma_H: int = 1) -> GeometryData:
    if not 0 < inner < outer:
        raise ConfigError("annulus needs 0 < inner < outer")
    # inner circle curves away from the domain: its outward-normal curvature is negative
    return GeometryData(2, math.pi * (outer ** 2 - inner ** 2), 2 * math.pi * (inner + outer), 0.0, 0.0, 1,
                        sigma_H, "annulus")


def interval_geometry(length: float) -> GeometryData:
    # the boundary is two points; its 0-volume is their count
    return GeometryData(1, float(length), 2.0, 0.0, 0.0, None, 1, "interval")


# ---------------------------------------------------------------------------
# coefficient sets


@dataclass
class CoefficientSet:
    a0: float
    a1: float
    a2: float | None
    bc: str
    kind: str
    n: int
    uncertainty: tuple | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bc = check_bc(self.bc)
        if self.kind not in KINDS:
            raise ConfigError(f"unknown coefficient kind {self.kind!r}")
        if self.kind.startswith("theoretical"):
            if not self.a0 > 0:
                raise ConfigError("theoretical a0 must be positive")
            if (self.a1 >= 0) if self.bc == DIRICHLET else (self.a1 <= 0):
                raise ConfigError("theoretical a1 has the wrong sign for the boundary condition")

    @property
    def values(self) -> list:
        return [self.a0, self.a1] + ([] if self.a2 is None else [self.a2])

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "bc": self.bc, "n": self.n, "a0": self.a0, "a1": self.a1, "a2": self.a2}
        if self.uncertainty is not None:
            out["uncertainty"] = list(self.uncertainty)
        return out


def _bracket(moduli: ElasticModuli, n: int, power: float) -> float:
    return (n - 1) / (4 * math.pi * moduli.mu) ** power + 1 / (4 * math.pi * moduli.pressure_speed2) ** power


def heat_coefficients(moduli: ElasticModuli, geom: GeometryData, bc: str) -> CoefficientSet:
    n = geom.n
    inner = _bracket(moduli, n, n / 2)
    a0 = inner * geom.vol_omega
    a1 = bc_sign(bc) * 0.25 * _bracket(moduli, n, (n - 1) / 2) * geom.vol_boundary
    a2 = inner * (geom.integral_R / 3 - geom.signed_integral_H / 6)
    return CoefficientSet(a0, a1, a2, bc, "theoretical_heat", n, extras={"sigma_H": geom.sigma_H})


def counting_coefficients(moduli: ElasticModuli, geom: GeometryData, bc: str) -> CoefficientSet:
    n = geom.n
    lead = _bracket(moduli, n, n / 2) * geom.vol_omega / special.gamma(1 + n / 2)
    second = (bc_sign(bc) * _bracket(moduli, n, (n - 1) / 2) * geom.vol_boundary
              / (4 * special.gamma(1 + (n - 1) / 2)))
    return CoefficientSet(lead, second, None, bc, "theoretical_counting", n)


def scalar_heat_coefficients(geom: GeometryData, bc: str, speed2: float = 1.0) -> CoefficientSet:
    """Two-term coefficients of the scalar operator ``-speed2 * Laplacian``."""
    n = geom.n
    a0 = geom.vol_omega / (4 * math.pi * speed2) ** (n / 2)
    a1 = bc_sign(bc) * 0.25 * geom.vol_boundary / (4 * math.pi * speed2) ** ((n - 1) / 2)
    return CoefficientSet(a0, a1, None, bc, "theoretical_heat", n)


def scalar_counting_coefficients(geom: GeometryData, bc: str, speed2: float = 1.0) -> CoefficientSet:
    h = scalar_heat_coefficients(geom, bc, speed2)
    n = geom.n
    return CoefficientSet(h.a0 / special.gamma(1 + n / 2), h.a1 / special.gamma(1 + (n - 1) / 2), None, bc,
                          "theoretical_counting", n)


def mckean_singer_reference(geom: GeometryData) -> dict:
    """Scalar planar heat invariants ``(area/4pi, -perimeter/(4 sqrt(4pi)), (1 - holes)/6)`` (Dirichlet)."""
    if geom.n != 2:
        raise ConfigError("the planar reference constants need n = 2")
    holes = geom.holes or 0
    out = {
        "a0": geom.vol_omega / (4 * math.pi),
        "a1": -geom.vol_boundary / (4 * math.sqrt(4 * math.pi)),
        "a2": (1 - holes) / 6,
        "caveats": list(geom.caveats),
    }
    return out


# ---------------------------------------------------------------------------
# heat trace


@dataclass
class HeatTraceSeries:
    t: np.ndarray
    values: np.ndarray
    tail_bound: np.ndarray
    n: int
    threshold: float = TAIL_THRESHOLD
    warnings: list = field(default_factory=list)

    @property
    def relative_tail(self) -> np.ndarray:
        return self.tail_bound / self.values

    @property
    def usable(self) -> np.ndarray:
        return self.relative_tail <= self.threshold

    def restrict(self, mask) -> "HeatTraceSeries":
        return HeatTraceSeries(self.t[mask], self.values[mask], self.tail_bound[mask], self.n, self.threshold,
                               list(self.warnings))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,Z,tail_bound\n")
        for t, z, b in zip(self.t, self.values, self.tail_bound):
            buf.write(f"{fmt(t)},{fmt(z)},{fmt(b)}\n")
        return buf.getvalue()


def tail_bound(spectrum: SpectrumTable, n: int, t) -> np.ndarray:
    """Upper bound on ``sum_{tau > max_reliable} e^{-tau t}`` from a Weyl-type envelope.

    With ``N(s) <= C s^{n/2}`` above ``Lm = max_reliable`` (``C`` calibrated on
    the table, times a safety factor), integration by parts gives
    ``C t^{-n/2} Gamma(n/2 + 1, t Lm) - N(Lm) e^{-t Lm}``.
    """
    t = np.asarray(t, dtype=float)
    Lm = spectrum.max_reliable
    if not np.isfinite(Lm):
        return np.zeros_like(t)
    NL = spectrum.count(Lm)
    C = TAIL_SAFETY * NL / Lm ** (n / 2)
    a = n / 2 + 1
    upper = special.gammaincc(a, t * Lm) * special.gamma(a)
    return np.maximum(C * t ** (-n / 2) * upper - NL * np.exp(-t * Lm), 0.0)


def partition_function(spectrum: SpectrumTable, t_grid, n: int = 2,
                       threshold: float = TAIL_THRESHOLD) -> HeatTraceSeries:
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t <= 0):
        raise ConfigError("heat-trace times must be positive")
    cert = spectrum.certified()
    ev, mult = cert.eigenvalues, cert.multiplicities
    Z = np.empty_like(t)
    for i, ti in enumerate(t):
        Z[i] = np.dot(mult, np.exp(-ti * ev))
    tail = tail_bound(spectrum, n, t)
    series = HeatTraceSeries(t, Z, tail, n, threshold)
    rel = tail / Z
    if np.any(rel > 0.1):
        series.warnings.append(f"tail bound exceeds 10% of Z for t < {t[rel <= 0.1].min() if np.any(rel <= 0.1) else t.max():.6g}; "
                               "those points are outside the usable grid")
    return series


def geometric_grid(t_min: float, t_max: float, points_per_decade: int = POINTS_PER_DECADE) -> np.ndarray:
    m = max(int(round(points_per_decade * math.log10(t_max / t_min))), 1)
    return t_min * (t_max / t_min) ** (np.arange(m + 1) / m)


def smallest_usable_t(spectrum: SpectrumTable, n: int, threshold: float = TAIL_THRESHOLD) -> float:
    """Smallest ``t`` with ``tail_bound / Z <= threshold``."""
    Lm = spectrum.max_reliable
    cert = spectrum.certified()

    def g(logt):
        t = math.exp(logt)
        Z = float(np.dot(cert.multiplicities, np.exp(-t * cert.eigenvalues)))
        return math.log(float(tail_bound(spectrum, n, t)) / Z) - math.log(threshold)

    lo, hi = math.log(1e-3 / Lm), math.log(200 / Lm)
    if g(hi) > 0:
        raise FitError("spectrum too short: no t reaches the tail threshold")
    if g(lo) <= 0:
        return math.exp(lo)
    return math.exp(optimize.brentq(g, lo, hi, xtol=1e-12))


def default_t_grid(spectrum: SpectrumTable, n: int, decades: float = 2.0,
                   points_per_decade: int = POINTS_PER_DECADE, threshold: float = TAIL_THRESHOLD) -> np.ndarray:
    t_min = smallest_usable_t(spectrum, n, threshold) * (1 + 1e-9)
    return geometric_grid(t_min, t_min * 10 ** decades, points_per_decade)


# ---------------------------------------------------------------------------
# fitting


def _wls(A, y, sigma):
    W = 1.0 / sigma
    Aw = A * W[:, None]
    yw = y * W
    scale = np.linalg.norm(Aw, axis=0)
    cond = np.linalg.cond(Aw / scale)
    if not np.isfinite(cond) or cond > 1e10:
        raise FitError(f"fit design is ill-conditioned (cond={cond:.2e}); widen or move the grid")
    coef, *_ = np.linalg.lstsq(Aw / scale, yw, rcond=None)
    coef = coef / scale
    resid = yw - Aw @ coef
    dof = max(len(y) - A.shape[1], 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(Aw.T @ Aw)
    return coef, cov


def _heat_design(t, m):
    return np.column_stack([t ** (k / 2) for k in range(m)])


def fit_heat_coefficients(series: HeatTraceSeries, n: int | None = None, num_terms: int = 3,
                          bc: str = DIRICHLET, trim: bool = True) -> CoefficientSet:
    """Weighted least squares of ``t^{n/2} Z(t)`` on ``{1, t^{1/2}, t}[:num_terms]``.

    Point weights are ``1 / (tail + |next-term proxy|)``; the proxy is the last
    fitted coefficient times ``t^{m/2}``.  The reported uncertainty combines
    the weighted covariance (scaled by the residual variance) with the shift
    to an ``(m+1)``-term fit, which measures truncation error.
    """
    n = series.n if n is None else n
    if num_terms not in (2, 3):
        raise ConfigError("num_terms must be 2 or 3")
    use = series.restrict(series.usable)
    t = use.t
    if t.size < 10 or t.max() / t.min() < 10 * (1 - 1e-9):
        raise FitError("need >= 10 usable points spanning >= one decade of t")
    y = t ** (n / 2) * use.values
    tail = t ** (n / 2) * use.tail_bound
    m = num_terms

    def fit(mask, terms):
        A = _heat_design(t[mask], terms)
        floor = 1e-15 * np.abs(y[mask])
        coef, _ = _wls(A, y[mask], tail[mask] + floor)
        proxy = np.abs(coef[-1]) * t[mask] ** (terms / 2)
        return _wls(A, y[mask], tail[mask] + proxy + floor)

    mask = np.ones(t.size, dtype=bool)
    coef, cov = fit(mask, m)
    if trim:
        # drop the large-t end while the neglected term exceeds 5% of the smallest kept term
        smallest = np.min(np.abs(coef)[:, None] * t[None, :] ** (np.arange(m)[:, None] / 2), axis=0)
        ratio = np.abs(coef[-1]) * t ** (m / 2) / np.maximum(smallest, 1e-300)
        keep = ratio <= 0.05
        keep |= t <= t.min() * 10 * (1 + 1e-9)  # never below one decade
        if keep.sum() >= 10 and not keep.all():
            mask = keep
            coef, cov = fit(mask, m)
    var = np.diag(cov).copy()
    # floating-point error of the summed trace, propagated through the fit
    P = np.linalg.pinv(_heat_design(t[mask], m))
    var += (P ** 2) @ (ROUNDING * y[mask]) ** 2
    if mask.sum() > m + 3:
        try:
            coef_hi, _ = fit(mask, m + 1)
            var += (coef_hi[:m] - coef) ** 2
        except FitError:
            pass
    unc = tuple(float(np.sqrt(v)) for v in var)
    a2 = float(coef[2]) if m == 3 else None
    grid = {"t_min": float(t[mask].min()), "t_max": float(t[mask].max()), "points": int(mask.sum())}
    return CoefficientSet(float(coef[0]), float(coef[1]), a2, bc, "fitted_heat", n, unc, {"grid": grid})


def _cumulative_integral(ev, mult, x):
    """``int_0^x N(s) ds`` for the step function with jumps ``mult`` at ``ev``."""
    cm = np.concatenate([[0], np.cumsum(mult)])
    cs = np.concatenate([[0.0], np.cumsum(mult * ev)])
    k = np.searchsorted(ev, x, side="right")
    return x * cm[k] - cs[k]


def fit_counting_coefficients(spectrum: SpectrumTable, n: int, Lambda_window, bc: str | None = None,
                              leading: float | None = None, samples: int = 4000) -> CoefficientSet:
    """Fit ``N(Lambda) ~ A Lambda^{n/2} + B Lambda^{(n-1)/2}`` on a window.

    Two variants are computed: a pointwise least-squares fit and a Cesàro fit
    in which both ``N`` and the model are averaged over ``[Lambda - Lambda/4, Lambda]``.
    The returned set holds the Cesàro values; the pointwise values are in
    ``extras["pointwise"]``.
    """
    lo, hi = (float(v) for v in Lambda_window)
    if not 0 < lo < hi:
        raise ConfigError("counting window must satisfy 0 < lo < hi")
    if hi / lo < 4 * (1 - 1e-12):
        raise FitError("counting window must span at least a factor 4 in Lambda")
    if hi > spectrum.max_reliable * (1 + 1e-12):
        raise FitError("counting window extends beyond the certified range")
    bc = spectrum.bc if bc is None else check_bc(bc)
    cert = spectrum.certified()
    ev, mult = cert.eigenvalues, cert.multiplicities
    lam = np.linspace(lo, hi, samples)
    betas = np.array([n / 2, (n - 1) / 2])

    k = np.searchsorted(ev, lam, side="right")
    N = np.concatenate([[0], np.cumsum(mult)])[k].astype(float)
    w = CESARO_FRACTION * lam
    Ns = (_cumulative_integral(ev, mult, lam) - _cumulative_integral(ev, mult, lam - w)) / w
    A_pt = lam[:, None] ** betas[None, :]
    A_cs = (lam[:, None] ** (betas + 1) - (lam - w)[:, None] ** (betas + 1)) / ((betas + 1) * w[:, None])

    def solve(A, y):
        if leading is not None:
            y = y - leading * A[:, 0]
            A = A[:, 1:]
        coef, cov = _wls(A, y, np.ones_like(y))
        if leading is not None:
            coef = np.concatenate([[leading], coef])
            cov = np.pad(cov, ((1, 0), (1, 0)))
        return coef, np.sqrt(np.diag(cov))

    c_pt, u_pt = solve(A_pt, N)
    c_cs, u_cs = solve(A_cs, Ns)
    unc = tuple(float(np.hypot(u, d)) for u, d in zip(u_cs, c_cs - c_pt))
    extras = {
        "pointwise": {"a0": float(c_pt[0]), "a1": float(c_pt[1]), "uncertainty": [float(u) for u in u_pt]},
        "window": [lo, hi],
        "cesaro_fraction": CESARO_FRACTION,
    }
    return CoefficientSet(float(c_cs[0]), float(c_cs[1]), None, bc, "fitted_counting", n, unc, extras)


def counting_series(spectrum: SpectrumTable, Lambdas) -> str:
    """CSV rows ``Lambda,N,N_smoothed`` (Cesàro window ``Lambda/4``)."""
    cert = spectrum.certified()
    ev, mult = cert.eigenvalues, cert.multiplicities
    lam = np.asarray(Lambdas, dtype=float)
    k = np.searchsorted(ev, lam, side="right")
    N = np.concatenate([[0], np.cumsum(mult)])[k]
    w = CESARO_FRACTION * lam
    Ns = (_cumulative_integral(ev, mult, lam) - _cumulative_integral(ev, mult, lam - w)) / w
    rows = ["Lambda,N,N_smoothed"] + [f"{fmt(a)},{int(b)},{fmt(c)}" for a, b, c in zip(lam, N, Ns)]
    return "\n".join(rows) + "\n"


def counting_function(spectrum: SpectrumTable, Lambda: float) -> int:
    return spectrum.count(Lambda)


# ---------------------------------------------------------------------------
# Tauberian (forward) direction


def tauberian_forward(fit: CoefficientSet, t_grid) -> HeatTraceSeries:
    """Laplace-Stieltjes transform of ``A s^{n/2} + B s^{(n-1)/2}``.

    ``int_0^inf e^{-ts} d(s^beta) = Gamma(beta + 1) t^{-beta}``.
    """
    t = np.asarray(t_grid, dtype=float)
    n = fit.n
    b0, b1 = n / 2, (n - 1) / 2
    Z = fit.a0 * special.gamma(b0 + 1) * t ** (-b0) + fit.a1 * special.gamma(b1 + 1) * t ** (-b1)
    return HeatTraceSeries(t, Z, np.zeros_like(t), n, np.inf)


# ---------------------------------------------------------------------------
# comparison


def _verdict(diff, sigma, reference):
    if sigma is None or not np.isfinite(sigma):
        return "inconclusive"
    if abs(diff) <= 3 * sigma:
        # an uncertainty as large as the coefficient itself cannot confirm anything
        return "consistent" if 3 * sigma < abs(reference) or reference == 0 else "inconclusive"
    return "inconsistent"


def comparison_report(theoretical: CoefficientSet, fitted: CoefficientSet, names=("a0", "a1", "a2")) -> dict:
    if theoretical.n != fitted.n or theoretical.bc != fitted.bc:
        raise ConfigError("comparison needs matching dimension and boundary condition")
    pair = {theoretical.kind.split("_")[1], fitted.kind.split("_")[1]}
    if len(pair) != 1:
        raise ConfigError("cannot compare heat coefficients with counting coefficients")
    rows = {}
    unc = fitted.uncertainty or (0.0,) * 3
    for i, name in enumerate(names):
        tv = getattr(theoretical, name)
        fv = getattr(fitted, name)
        if tv is None or fv is None:
            continue
        diff = fv - tv
        sigma = unc[i] if i < len(unc) else None
        rows[name] = {
            "theoretical": tv,
            "fitted": fv,
            "uncertainty": sigma,
            "abs_discrepancy": abs(diff),
            "rel_discrepancy": abs(diff) / abs(tv) if tv != 0 else None,
            "verdict": _verdict(diff, sigma, tv),
        }
    lead = [rows[k]["verdict"] for k in ("a0", "a1") if k in rows]
    if "inconsistent" in lead:
        overall = "inconsistent"
    elif "inconclusive" in lead or not lead:
        overall = "inconclusive"
    else:
        overall = "consistent"
    return {"coefficients": rows, "verdict": overall, "n": fitted.n, "bc": fitted.bc}

