import json
import os

import numpy as np
import pytest

from lamespec import ConfigError
from lamespec.cli import main
from lamespec.config import ExperimentConfig, parse_config
from lamespec.serialize import dumps

INTERVAL = """\
name = interval
domain = interval
method = exact
bc = dirichlet
count = 100000
"""

ELASTIC = """\
name = elastic
mu = 1
lambda = 0
domain = disk
method = dispersion
bc = dirichlet
lambda_max = 3000
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestConfig:
    def test_defaults_and_alias(self):
        cfg = parse_config("lambda = 2.5\nmethod = exact\n")
        assert cfg.lam == 2.5 and cfg.mu == 1.0
        assert cfg.resolved()["fem_h"] == 0.05

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key 'colour'"):
            parse_config("colour = red\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("mu = 1\nmu = 2\n")

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="invalid value for count"):
            parse_config("count = many\n")

    def test_hash_tracks_content(self):
        a = parse_config("mu = 1\n")
        b = parse_config("# comment\nmu = 1.0\n")
        c = parse_config("mu = 2\n")
        assert a.hash == b.hash != c.hash

    def test_domain_method_rules(self):
        with pytest.raises(ConfigError):
            parse_config("domain = interval\nmethod = fem\n")
        with pytest.raises(ConfigError):
            parse_config("sigma_H = 0\n")

    def test_serializer_format(self):
        text = dumps({"b": 1.0, "a": [0.5, 2], "c": None, "d": True})
        assert text.index('"a"') < text.index('"b"')
        assert "5.000000000000e-01" in text and "null" in text and "true" in text


class TestExitCodes:
    def test_negative_mu(self, tmp_path, capsys):
        code = main(["spectrum", write(tmp_path, "mu = -1\n"), "-o", str(tmp_path / "o")])
        assert code == 1
        assert "mu > 0" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main(["spectrum", str(tmp_path / "nope.cfg")]) == 1

    def test_missing_lambda_max(self, tmp_path):
        assert main(["spectrum", write(tmp_path, "domain = disk\n"), "-o", str(tmp_path / "o")]) == 1

    def test_numerical_failure(self, tmp_path):
        # a t-grid shorter than one decade cannot support a heat fit
        cfg = INTERVAL + "t_min = 0.001\nt_decades = 0.5\n"
        assert main(["verify", write(tmp_path, cfg), "-o", str(tmp_path / "o")]) == 2

    def test_certification_failure(self, tmp_path, monkeypatch):
        from lamespec import exact_spectra

        monkeypatch.setattr(exact_spectra, "CERTIFY_TOLERANCE", -1.0)
        cfg = "domain = disk\nmethod = exact\nlambda_max = 12000\n"
        assert main(["spectrum", write(tmp_path, cfg), "-o", str(tmp_path / "o")]) == 3

    def test_plotdata_without_verify(self, tmp_path):
        assert main(["plotdata", write(tmp_path, INTERVAL), "-o", str(tmp_path / "empty")]) == 1

    def test_report_without_artifacts(self, tmp_path):
        assert main(["report", write(tmp_path, INTERVAL), "-o", str(tmp_path / "empty")]) == 1


class TestSpectrumCommand:
    def test_interval_csv(self, tmp_path):
        out = tmp_path / "o"
        assert main(["spectrum", write(tmp_path, INTERVAL), "-o", str(out)]) == 0
        lines = [ln for ln in (out / "spectrum_exact.csv").read_text().splitlines() if not ln.startswith("#")]
        header = lines[0].split(",")
        assert len(header) >= 3 and header[:3] == ["index", "eigenvalue", "multiplicity"]
        assert len(lines) == 100001
        cert = json.loads((out / "certification.json").read_text())
        assert cert["tables"]["exact"]["count"] == 100000

    def test_both_methods(self, tmp_path):
        cfg = ("domain = disk\nmethod = both\nbc = dirichlet\nlambda_max = 200\nfem_h = 0.2\nfem_count = 10\n")
        out = tmp_path / "o"
        assert main(["spectrum", write(tmp_path, cfg), "-o", str(out)]) == 0
        names = set(os.listdir(out))
        assert {"spectrum_dispersion.csv", "spectrum_fem.csv", "spectrum_reldiff.csv"} <= names
        rows = np.loadtxt(out / "spectrum_reldiff.csv", delimiter=",", skiprows=3)
        assert rows.shape == (10, 4) and rows[:, 3].max() < 0.05


@pytest.fixture(scope="module")
def interval_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("interval")
    cfg = write(base, INTERVAL)
    out = base / "o"
    for cmd in ("spectrum", "verify", "plotdata", "report"):
        assert main([cmd, cfg, "-o", str(out)]) == 0
    return cfg, out


class TestVerifyPipeline:
    def test_interval_all_consistent(self, interval_run):
        _, out = interval_run
        bundle = json.loads((out / "verify.json").read_text())
        verdicts = [r["verdict"] for s in ("heat", "counting") for r in bundle["reports"][s]["coefficients"].values()]
        assert verdicts and set(verdicts) == {"consistent"}

    def test_every_artifact_carries_hash(self, interval_run):
        cfg, out = interval_run
        h = parse_config(open(cfg).read()).hash
        for name in os.listdir(out):
            text = (out / name).read_text()
            assert h in text, name
            if name.endswith((".json", ".csv")):
                assert "sigma_H" in text and "fourier_sign" in text, name

    def test_manifest_lists_resolved_config(self, interval_run):
        _, out = interval_run
        man = json.loads((out / "manifest_verify.json").read_text())
        assert man["config"]["points_per_decade"] == 24
        assert {f["file"] for f in man["files"]} >= {"verify.json", "heat_series.csv", "tauberian.csv"}

    def test_tauberian_table(self, interval_run):
        _, out = interval_run
        rows = np.loadtxt(out / "tauberian.csv", delimiter=",", skiprows=3)
        assert np.abs(rows[:, 3]).max() < 0.01

    def test_plotdata_remainder_band(self, interval_run):
        _, out = interval_run
        rows = np.loadtxt(out / "plot_counting.csv", delimiter=",", skiprows=3)
        # N = floor(sqrt(Lambda)), so the remainder lies in (-1, 0] and averages -1/2
        assert np.all((rows[:, 1] > -1) & (rows[:, 1] <= 0))
        assert abs(rows[:, 1].mean() + 0.5) < 0.1
        assert np.allclose(rows[:, 2], -0.5, atol=0.05)

    def test_plotdata_overlay_matches_data(self, interval_run):
        _, out = interval_run
        rows = np.loadtxt(out / "plot_heat.csv", delimiter=",", skiprows=3)
        # data differ from the model only by the truncated spectral tail
        for col in (3, 4):
            assert np.all(np.abs(rows[:, 1] - rows[:, col]) <= rows[:, 2] + 1e-6)

    def test_plotdata_empty_window(self, tmp_path, interval_run):
        _, out = interval_run
        cfg = write(tmp_path, INTERVAL + "window_lo = 50\nwindow_hi = 10\n")
        assert main(["plotdata", cfg, "-o", str(out)]) == 1

    def test_report(self, interval_run):
        _, out = interval_run
        md = (out / "report.md").read_text()
        assert "| heat | a0 |" in md and "consistent" in md

    def test_rerun_is_byte_identical(self, interval_run, tmp_path):
        cfg, out = interval_run
        again = tmp_path / "again"
        for cmd in ("spectrum", "verify", "plotdata", "report"):
            assert main([cmd, cfg, "-o", str(again)]) == 0
        assert sorted(os.listdir(again)) == sorted(os.listdir(out))
        for name in os.listdir(out):
            assert read(out / name) == read(again / name), name


class TestElasticVerify:
    @pytest.fixture(scope="class")
    @staticmethod
    def bundle(tmp_path_factory):
        base = tmp_path_factory.mktemp("elastic")
        out = base / "o"
        assert main(["verify", write(base, ELASTIC), "-o", str(out)]) == 0
        return json.loads((out / "verify.json").read_text())

    def test_both_sigma_variants(self, bundle):
        a2 = bundle["theoretical"]["a2_variants"]
        assert a2["sigma_H=+1"] == pytest.approx(-0.125) and a2["sigma_H=-1"] == pytest.approx(0.125)

    def test_report_has_uncertainties(self, bundle):
        rows = bundle["reports"]["heat"]["coefficients"]
        assert all(r["uncertainty"] is not None and r["uncertainty"] > 0 for r in rows.values())

    def test_scalar_limit_row(self, bundle):
        row = bundle["scalar_limit"]
        assert row["verdict"] == "consistent"
        assert row["theoretical"]["a0"] == pytest.approx(0.5)
        assert row["doubled_scalar_fit"]["a0"] == pytest.approx(0.5, rel=1e-3)


def test_kernel_and_symbol_commands(tmp_path):
    out = tmp_path / "o"
    assert main(["kernel", write(tmp_path, "kernel_geometry = halfline\nkernel_times = 0.0001\n"), "-o", str(out)]) == 0
    rows = np.loadtxt(out / "kernel_trace.csv", delimiter=",", skiprows=3, ndmin=2)
    assert abs(rows[0, 3] + 0.25) < 1e-6
    assert main(["symbol", write(tmp_path, "symbol_points = 5\nlambda = 0.5\n", "s.cfg"), "-o", str(out)]) == 0
    s = json.loads((out / "symbol.json").read_text())
    assert s["trace_identity_residual_max"] < 1e-12
    assert max(s["homogeneity_residuals"].values()) < 1e-9
    assert len(s["q4_enumeration"]["terms_at_first_point"]) == 5


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "lamespec", "spectrum", write(tmp_path, "mu = 0\n")],
                         capture_output=True, text=True)
    assert res.returncode == 1 and "mu > 0" in res.stderr
