"""Experiment runners behind the command-line subcommands.

Each runner takes an :class:`ExperimentConfig`, writes its artifacts into
``config.output`` and returns the list of written paths.  Artifacts carry the
configuration hash and the conventions block, contain no timestamps and use
fixed float formatting, so identical configurations give identical bytes.
"""
from __future__ import annotations

import hashlib
import math
import os

import numpy as np

from . import asymptotics as asy
from .config import ExperimentConfig
from .errors import ConfigError
from .exact_spectra import elastic_disk_spectrum, scalar_disk_spectrum, scalar_interval_spectrum
from .fem import assemble, generalized_eigen, solve_eigen
from .fem.solve import build_mesh
from .image_kernels import HeatKernel1D, interval_eigenvalues
from .moduli import DIRICHLET, ElasticModuli
from .serialize import conventions, csv_preamble, dumps, strip_comments
from .spectrum import FLOAT_FMT, SpectrumTable, fmt
from . import symbols as sym


class _Writer:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.dir = cfg.output
        self.files: list[str] = []
        os.makedirs(self.dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def json(self, name: str, payload: dict):
        body = dict(payload)
        body["config_hash"] = self.cfg.hash
        body["conventions"] = conventions(self.cfg.sigma_H)
        self._write(name, dumps(body) + "\n")

    def csv(self, name: str, text: str):
        self._write(name, csv_preamble(self.cfg.hash, self.cfg.sigma_H) + text)

    def text(self, name: str, text: str):
        self._write(name, text)

    def _write(self, name, text):
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.files.append(name)

    def manifest(self, command: str):
        entries = []
        for name in self.files:
            with open(self.path(name), "rb") as fh:
                entries.append({"file": name, "sha256": hashlib.sha256(fh.read()).hexdigest()})
        self.json(f"manifest_{command}.json", {"command": command, "config": self.cfg.resolved(), "files": entries})
        return [self.path(f) for f in self.files]


def _rows(header: str, rows) -> str:
    out = [header]
    for row in rows:
        out.append(",".join(_cell(v) for v in row))
    return "\n".join(out) + "\n"


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


# ---------------------------------------------------------------------------
# spectra


def dimension(cfg: ExperimentConfig) -> int:
    return 1 if cfg.domain == "interval" else 2


def geometry(cfg: ExperimentConfig, sigma_H: int | None = None) -> asy.GeometryData:
    s = cfg.sigma_H if sigma_H is None else sigma_H
    if cfg.domain == "interval":
        return asy.interval_geometry(cfg.domain_size)
    if cfg.domain == "disk":
        return asy.disk_geometry(cfg.domain_size, s)
    return asy.square_geometry(cfg.domain_size, s)


def _fem_table(cfg: ExperimentConfig, moduli: ElasticModuli) -> SpectrumTable:
    domain = (cfg.domain, cfg.domain_size)
    fine = assemble(moduli, build_mesh(domain, cfg.fem_h, cfg.fem_order), cfg.bc)
    coarse = None
    if 2 * cfg.fem_h < cfg.domain_size:
        cp = assemble(moduli, build_mesh(domain, 2 * cfg.fem_h, cfg.fem_order), cfg.bc)
        k = min(cfg.fem_count, cp.dimension)
        ev = generalized_eigen(cp.stiffness, cp.mass, k).eigenvalues
        coarse = SpectrumTable(ev, np.ones(k, dtype=int), cfg.bc, "fem", ev[-1])
    order = 4.0 if cfg.fem_order == "quadratic" else 2.0
    return solve_eigen(fine, min(cfg.fem_count, fine.dimension), coarse, order=order)


def compute_spectra(cfg: ExperimentConfig, moduli: ElasticModuli | None = None) -> dict:
    cfg.require_spectrum_inputs()
    moduli = cfg.moduli if moduli is None else moduli
    out = {}
    if cfg.method == "exact":
        if cfg.domain == "interval":
            out["exact"] = scalar_interval_spectrum(cfg.domain_size, cfg.bc, cfg.count)
        else:
            out["exact"] = scalar_disk_spectrum(cfg.domain_size, cfg.bc, cfg.lambda_max)
    if cfg.method in ("dispersion", "both"):
        out["dispersion"] = elastic_disk_spectrum(moduli, cfg.domain_size, cfg.bc, cfg.lambda_max)
    if cfg.method in ("fem", "both"):
        out["fem"] = _fem_table(cfg, moduli)
    return out


def _certification(cfg: ExperimentConfig, table: SpectrumTable) -> dict:
    n = dimension(cfg)
    geom = geometry(cfg)
    if cfg.method == "exact":
        lead = asy.scalar_counting_coefficients(geom, cfg.bc).a0
    else:
        lead = asy.counting_coefficients(cfg.moduli, geom, cfg.bc).a0
    lam = table.max_reliable
    count = table.count(lam)
    weyl = lead * lam ** (n / 2)
    return {
        "source": table.source,
        "max_reliable": lam,
        "count": count,
        "weyl_one_term": weyl,
        "relative_deviation": abs(count - weyl) / weyl if weyl > 0 else None,
        "certified": True,
    }


def run_spectrum(cfg: ExperimentConfig) -> list:
    w = _Writer(cfg)
    tables = compute_spectra(cfg)
    cert = {}
    for name, table in tables.items():
        w.csv(f"spectrum_{name}.csv", table.to_csv())
        w.json(f"spectrum_{name}.json", table.summary())
        cert[name] = _certification(cfg, table)
    if "dispersion" in tables and "fem" in tables:
        a = tables["dispersion"].expanded()
        b = tables["fem"].expanded()
        m = min(a.size, b.size)
        rel = np.where(a[:m] > 0, np.abs(b[:m] - a[:m]) / np.where(a[:m] > 0, a[:m], 1), np.abs(b[:m]))
        w.csv("spectrum_reldiff.csv", _rows("index,dispersion,fem,rel_diff",
                                            [(i, a[i], b[i], rel[i]) for i in range(m)]))
    w.json("certification.json", {"tables": cert})
    return w.manifest("spectrum")


# ---------------------------------------------------------------------------
# verification


def _primary_table(cfg: ExperimentConfig, tables: dict) -> SpectrumTable:
    for key in ("exact", "dispersion", "fem"):
        if key in tables:
            return tables[key]
    raise ConfigError("no spectrum available")


def _theory(cfg: ExperimentConfig, moduli: ElasticModuli, sigma_H: int):
    geom = geometry(cfg, sigma_H)
    if cfg.method == "exact":
        heat = asy.scalar_heat_coefficients(geom, cfg.bc)
        if geom.n == 2:
            heat.a2 = asy.mckean_singer_reference(geom)["a2"]
        else:
            heat.a2 = 0.0
        return heat, asy.scalar_counting_coefficients(geom, cfg.bc)
    return asy.heat_coefficients(moduli, geom, cfg.bc), asy.counting_coefficients(moduli, geom, cfg.bc)


def _window(cfg: ExperimentConfig, table: SpectrumTable):
    if cfg.window_lo > 0 or cfg.window_hi > 0:
        return cfg.window_lo, cfg.window_hi
    return table.max_reliable / 4, table.max_reliable


def _heat_fit(cfg: ExperimentConfig, table: SpectrumTable, n: int):
    if cfg.t_min > 0:
        grid = asy.geometric_grid(cfg.t_min, cfg.t_min * 10 ** cfg.t_decades, cfg.points_per_decade)
    else:
        grid = asy.default_t_grid(table, n, cfg.t_decades, cfg.points_per_decade)
    series = asy.partition_function(table, grid, n)
    return series, asy.fit_heat_coefficients(series, n, cfg.num_terms, table.bc)


def _fit_chain(cfg: ExperimentConfig, table: SpectrumTable, n: int):
    series, heat = _heat_fit(cfg, table, n)
    counting = asy.fit_counting_coefficients(table, n, _window(cfg, table), cfg.bc)
    return series, heat, counting


def _fitted_block(fit: asy.CoefficientSet) -> dict:
    return {"values": fit.values, "uncertainties": list(fit.uncertainty or ()), "grid": fit.extras.get("grid"),
            "extras": {k: v for k, v in fit.extras.items() if k != "grid"}}


def _scalar_limit_row(cfg: ExperimentConfig) -> dict:
    """Elastic pipeline at lam = -mu against its decoupled (doubled scalar) prediction."""
    mod = ElasticModuli(cfg.mu, -cfg.mu)
    table = elastic_disk_spectrum(mod, cfg.domain_size, DIRICHLET, cfg.lambda_max)
    _, heat_fit = _heat_fit(cfg, table, 2)
    theory = asy.heat_coefficients(mod, geometry(cfg), DIRICHLET)
    scalar = scalar_disk_spectrum(cfg.domain_size, DIRICHLET, cfg.lambda_max / cfg.mu)
    _, scalar_fit = _heat_fit(cfg, scalar, 2)
    report = asy.comparison_report(theory, heat_fit, names=("a0", "a1"))
    doubled = {"a0": 2 * scalar_fit.a0 / cfg.mu, "a1": 2 * scalar_fit.a1 / math.sqrt(cfg.mu)}
    return {
        "moduli": mod.as_dict(),
        "fitted": _fitted_block(heat_fit),
        "theoretical": {"a0": theory.a0, "a1": theory.a1},
        "doubled_scalar_fit": doubled,
        "report": report,
        "verdict": report["verdict"],
    }


def run_verify(cfg: ExperimentConfig) -> list:
    w = _Writer(cfg)
    n = dimension(cfg)
    tables = compute_spectra(cfg)
    table = _primary_table(cfg, tables)
    series, heat_fit, count_fit = _fit_chain(cfg, table, n)
    heat_th, count_th = _theory(cfg, cfg.moduli, cfg.sigma_H)
    heat_other, _ = _theory(cfg, cfg.moduli, -cfg.sigma_H)
    heat_report = asy.comparison_report(heat_th, heat_fit)
    count_report = asy.comparison_report(count_th, count_fit)
    taub = asy.tauberian_forward(count_fit, series.t)

    a2_variants = {"sigma_H=+1": heat_th.a2 if cfg.sigma_H == 1 else heat_other.a2,
                   "sigma_H=-1": heat_th.a2 if cfg.sigma_H == -1 else heat_other.a2}
    bundle = {
        "inputs": {"moduli": cfg.moduli.as_dict(), "geometry": geometry(cfg).as_dict(), "bc": cfg.bc,
                   "method": cfg.method, "spectrum_source": table.source, "max_reliable": table.max_reliable,
                   "eigenvalue_count": table.total_count},
        "theoretical": {"heat": heat_th.as_dict(), "counting": count_th.as_dict(), "a2_variants": a2_variants},
        "fitted": {"heat": _fitted_block(heat_fit), "counting": _fitted_block(count_fit)},
        "discrepancies": {"heat": {k: v["abs_discrepancy"] for k, v in heat_report["coefficients"].items()},
                          "counting": {k: v["abs_discrepancy"] for k, v in count_report["coefficients"].items()}},
        "verdicts": {"heat": heat_report["verdict"], "counting": count_report["verdict"],
                     "heat_a2": heat_report["coefficients"].get("a2", {}).get("verdict")},
        "reports": {"heat": heat_report, "counting": count_report},
        "warnings": series.warnings,
    }
    if n == 2 and cfg.domain == "disk":
        ms = asy.mckean_singer_reference(geometry(cfg))
        factor = 1 if cfg.method == "exact" else 2
        bundle["scalar_reference"] = {"mckean_singer": ms, "components": factor,
                                      "a2_per_components": factor * ms["a2"]}
    if cfg.method != "exact" and cfg.domain == "disk" and cfg.scalar_limit_row:
        if cfg.bc == DIRICHLET:
            bundle["scalar_limit"] = _scalar_limit_row(cfg)
        else:
            bundle["scalar_limit"] = {"note": "traction-free conditions do not decouple at lam = -mu; row omitted"}

    w.json("verify.json", bundle)
    w.csv("heat_series.csv", series.to_csv())
    lo, hi = _window(cfg, table)
    w.csv("counting_series.csv", asy.counting_series(table, np.linspace(lo, hi, 201)))
    rel = (taub.values - series.values) / series.values
    w.csv("tauberian.csv", _rows("t,Z,Z_tauberian,rel_diff",
                                 zip(series.t, series.values, taub.values, rel)))
    w.csv("spectrum_verify.csv", table.to_csv())
    return w.manifest("verify")


# ---------------------------------------------------------------------------
# plot data


def _load_json_numbers(path):
    import json

    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"missing input {path}; run 'verify' first") from exc


def run_plotdata(cfg: ExperimentConfig) -> list:
    w = _Writer(cfg)
    bundle = _load_json_numbers(w.path("verify.json"))
    try:
        with open(w.path("spectrum_verify.csv"), encoding="utf-8") as fh:
            table = SpectrumTable.from_csv(strip_comments(fh.read()), bundle["inputs"]["max_reliable"])
    except OSError as exc:
        raise ConfigError("missing spectrum_verify.csv; run 'verify' first") from exc
    lo, hi = _window(cfg, table)
    if not 0 < lo < hi <= table.max_reliable:
        raise ConfigError(f"empty or out-of-range counting window [{lo:g}, {hi:g}]")
    n = dimension(cfg)
    heat = bundle["fitted"]["heat"]
    th = bundle["theoretical"]["heat"]
    grid = heat["grid"]
    t = asy.geometric_grid(grid["t_min"], grid["t_max"], cfg.points_per_decade)
    series = asy.partition_function(table, t, n)
    fitted_vals = heat["values"]
    th_vals = [th["a0"], th["a1"]] + ([th["a2"]] if th.get("a2") is not None else [])

    def model(vals):
        return sum(v * t ** (k / 2) for k, v in enumerate(vals))

    y = t ** (n / 2) * series.values
    band = t ** (n / 2) * series.tail_bound
    w.csv("plot_heat.csv", _rows("t,scaled_Z,scaled_tail_bound,fitted,theoretical",
                                 zip(t, y, band, model(fitted_vals), model(th_vals))))

    lam = np.geomspace(lo, hi, 200)
    cf = bundle["fitted"]["counting"]["values"]
    ct = bundle["theoretical"]["counting"]
    counts = np.array([table.count(v) for v in lam], dtype=float)
    lead = ct["a0"]
    rem = (counts - lead * lam ** (n / 2)) / lam ** ((n - 1) / 2)
    fitted_rem = cf[1] + (cf[0] - lead) * lam ** 0.5
    w.csv("plot_counting.csv", _rows("Lambda,remainder,fitted,theoretical",
                                     zip(lam, rem, fitted_rem, np.full_like(lam, ct["a1"]))))
    return w.manifest("plotdata")


# ---------------------------------------------------------------------------
# kernels and symbols


def run_kernel(cfg: ExperimentConfig) -> list:
    w = _Writer(cfg)
    spec = HeatKernel1D(cfg.kernel_diffusivity, cfg.kernel_geometry,
                        cfg.kernel_length if cfg.kernel_geometry == "interval" else None,
                        cfg.kernel_bc_left, cfg.kernel_bc_right)
    span = cfg.kernel_length if cfg.kernel_geometry == "interval" else cfg.kernel_window
    pts = np.linspace(0.0, span, cfg.kernel_points)
    rows = []
    for t in cfg.times:
        for x in pts:
            for y in pts:
                rows.append((t, x, y, float(spec(t, x, y))))
    w.csv("kernel_values.csv", _rows("t,x,y,value", rows))
    trows = []
    for t in cfg.times:
        tr = spec.trace(t, None if cfg.kernel_geometry == "interval" else cfg.kernel_window)
        if cfg.kernel_geometry == "interval":
            k_needed = int(cfg.kernel_length / math.pi * math.sqrt(40 / (cfg.kernel_diffusivity * t))) + 10
            ev = interval_eigenvalues(cfg.kernel_length, cfg.kernel_bc_left, cfg.kernel_bc_right, k_needed)
            ref = float(np.exp(-cfg.kernel_diffusivity * t * ev).sum())
        else:
            ref = cfg.kernel_window / math.sqrt(4 * math.pi * cfg.kernel_diffusivity * t)
        trows.append((t, tr, ref, tr - ref))
    w.csv("kernel_trace.csv", _rows("t,trace,reference,difference", trows))
    return w.manifest("kernel")


def _matrix(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def run_symbol(cfg: ExperimentConfig) -> list:
    w = _Writer(cfg)
    n = cfg.symbol_n
    metric = sym.flat_metric(n) if cfg.symbol_metric == "flat" else sym.synthetic_metric(n, cfg.symbol_eps)
    mod = cfg.moduli
    rng = np.random.default_rng(cfg.symbol_seed)
    series = sym.resolvent_series(mod, metric, cfg.symbol_backend)
    trace_res, odd_res, even_res, backend_res = [], [], [], []
    homog = {"q-2": [], "q-3": [], "q-4": []}
    points = []
    for _ in range(cfg.symbol_points):
        x = 0.3 * rng.standard_normal(n)
        xi = rng.standard_normal(n)
        tau = complex(-rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
        points.append({"x": x.tolist(), "xi": xi.tolist(), "tau": tau})
        q2 = sym.resolvent_principal(mod, metric, x, xi, tau)
        r2 = float(xi @ metric(x)[0] @ xi)
        ref = sym.resolvent_trace(mod, n, r2, tau)
        trace_res.append(abs(np.trace(q2) - ref) / abs(ref))
        t3p = np.trace(sym.q_minus_3(mod, metric, x, xi, tau, cfg.symbol_backend))
        t3m = np.trace(sym.q_minus_3(mod, metric, x, -xi, tau, cfg.symbol_backend))
        t4p = np.trace(sym.q_minus_4(mod, metric, x, xi, tau, cfg.symbol_backend))
        t4m = np.trace(sym.q_minus_4(mod, metric, x, -xi, tau, cfg.symbol_backend))
        odd_res.append(abs(t3p + t3m))
        even_res.append(abs(t4p - t4m))
        for s_obj in series:
            homog[s_obj.name].append(max(s_obj.homogeneity_residual(x, xi, tau, s) for s in (2.0, 1 / 3)))
        dj = sym.symbol_derivatives(mod, metric, x, xi, tau, "jet")
        df = sym.symbol_derivatives(mod, metric, x, xi, tau, "fd")
        backend_res.append(max(float(np.abs(a - b).max()) for a, b in zip(dj, df)))
    p0 = points[0]
    terms = sym.q_minus_4_terms(mod, metric, np.array(p0["x"]), np.array(p0["xi"]), p0["tau"], cfg.symbol_backend)
    enumeration = [{"k": k, "j": j, "alpha_order": a, "term": desc, "value": _matrix(v)}
                   for (k, j, a, desc), v in zip(sym.Q4_TERMS, terms)]
    payload = {
        "inputs": {"moduli": mod.as_dict(), "metric": metric.name, "n": n, "backend": cfg.symbol_backend,
                   "points": cfg.symbol_points, "seed": cfg.symbol_seed},
        "q4_enumeration": {"admissible": [list(t) for t in sym.enumerate_q4_terms()], "terms_at_first_point": enumeration,
                           "first_point": p0},
        "trace_identity_residual_max": max(trace_res),
        "parity_residuals": {"q-3_odd_max": max(odd_res), "q-4_even_max": max(even_res)},
        "homogeneity_residuals": {k: max(v) for k, v in homog.items()},
        "backend_agreement_max": max(backend_res),
    }
    w.json("symbol.json", payload)
    return w.manifest("symbol")


# ---------------------------------------------------------------------------
# report


def run_report(cfg: ExperimentConfig) -> list:
    """Summarise whatever artifacts exist in the output directory."""
    w = _Writer(cfg)
    present = sorted(f for f in os.listdir(w.dir) if f.endswith(".json") and not f.startswith(("report", "manifest_report")))
    if not present:
        raise ConfigError(f"no artifacts in {w.dir}; run another subcommand first")
    lines = [f"# Experiment report: {cfg.name}", "", f"config hash: `{cfg.hash}`",
             f"conventions: sigma_H={cfg.sigma_H:+d}, Fourier sign {sym.FOURIER_SIGN}", ""]
    summary = {"artifacts": present}
    if "certification.json" in present:
        cert = _load_json_numbers(w.path("certification.json"))["tables"]
        lines += ["## Spectra", "", "| source | count | max_reliable | Weyl deviation |", "|---|---|---|---|"]
        for name in sorted(cert):
            c = cert[name]
            dev = c["relative_deviation"]
            lines.append(f"| {name} | {c['count']} | {fmt(c['max_reliable'])} | {'-' if dev is None else fmt(dev)} |")
        lines.append("")
        summary["certification"] = cert
    if "verify.json" in present:
        v = _load_json_numbers(w.path("verify.json"))
        lines += ["## Coefficients", "", "| system | coeff | theoretical | fitted | uncertainty | verdict |",
                  "|---|---|---|---|---|---|"]
        for system in ("heat", "counting"):
            for name, row in sorted(v["reports"][system]["coefficients"].items()):
                unc = row["uncertainty"]
                lines.append(f"| {system} | {name} | {fmt(row['theoretical'])} | {fmt(row['fitted'])} | "
                             f"{'-' if unc is None else fmt(unc)} | {row['verdict']} |")
        lines += ["", f"overall heat verdict: {v['verdicts']['heat']}; counting verdict: {v['verdicts']['counting']}"]
        a2 = v["theoretical"]["a2_variants"]
        lines.append("a2 variants: " + ", ".join(f"{k}: {fmt(val)}" for k, val in sorted(a2.items())))
        if "scalar_limit" in v and "verdict" in v["scalar_limit"]:
            lines.append(f"scalar-limit row (lam = -mu): {v['scalar_limit']['verdict']}")
        lines.append("")
        summary["verdicts"] = v["verdicts"]
    if "symbol.json" in present:
        s = _load_json_numbers(w.path("symbol.json"))
        lines += ["## Symbol checks", "", f"trace identity: {fmt(s['trace_identity_residual_max'])}",
                  f"q-3 odd: {fmt(s['parity_residuals']['q-3_odd_max'])}",
                  f"q-4 even: {fmt(s['parity_residuals']['q-4_even_max'])}", ""]
        summary["symbol"] = {"parity": s["parity_residuals"], "homogeneity": s["homogeneity_residuals"]}
    w.text("report.md", "\n".join(lines) + "\n")
    w.json("report.json", summary)
    return w.manifest("report")
