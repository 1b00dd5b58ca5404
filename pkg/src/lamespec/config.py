"""Plain-text ``key = value`` experiment configuration.

Blank lines and lines starting with ``#`` are ignored.  Unknown keys are
rejected.  Every resolved value (including defaults) is written to the run
manifest, and the configuration hash is computed from that resolved form.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError
from .moduli import ElasticModuli, check_bc

DOMAINS = ("interval", "disk", "square")
METHODS = ("exact", "dispersion", "fem", "both")
DEFAULT_SIZE = {"interval": math.pi, "disk": 1.0, "square": 1.0}


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    mu: float = 1.0
    lam: float = 0.0
    domain: str = "disk"
    size: float = 0.0  # 0 selects the domain default (pi, 1, 1)
    bc: str = "dirichlet"
    method: str = "dispersion"
    lambda_max: float = 0.0
    count: int = 0
    fem_h: float = 0.05
    fem_order: str = "quadratic"
    fem_count: int = 20
    t_min: float = 0.0  # 0 selects the automatic grid
    t_decades: float = 2.0
    points_per_decade: int = 24
    num_terms: int = 3
    window_lo: float = 0.0  # 0 selects [lambda_max / 4, lambda_max]
    window_hi: float = 0.0
    sigma_H: int = 1
    scalar_limit_row: bool = True
    output: str = "out"
    # kernel subcommand
    kernel_geometry: str = "interval"
    kernel_diffusivity: float = 1.0
    kernel_length: float = math.pi
    kernel_bc_left: str = "dirichlet"
    kernel_bc_right: str = "dirichlet"
    kernel_times: str = "0.0001,0.001,0.01,0.1,1"
    kernel_points: int = 9
    kernel_window: float = 1.0
    # symbol subcommand
    symbol_metric: str = "synthetic"
    symbol_eps: float = 0.1
    symbol_n: int = 2
    symbol_points: int = 20
    symbol_seed: int = 0
    symbol_backend: str = "jet"

    # ------------------------------------------------------------------
    @property
    def moduli(self) -> ElasticModuli:
        return ElasticModuli(self.mu, self.lam)

    @property
    def domain_size(self) -> float:
        return self.size if self.size > 0 else DEFAULT_SIZE[self.domain]

    @property
    def times(self) -> list:
        try:
            out = [float(v) for v in self.kernel_times.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"kernel_times must be a comma-separated list of numbers: {exc}") from exc
        if not out or min(out) <= 0:
            raise ConfigError("kernel_times must be positive")
        return out

    def validate(self) -> "ExperimentConfig":
        self.moduli  # raises on inadmissible moduli
        if self.domain not in DOMAINS:
            raise ConfigError(f"domain must be one of {DOMAINS}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        self.bc = check_bc(self.bc)
        self.kernel_bc_left = check_bc(self.kernel_bc_left)
        self.kernel_bc_right = check_bc(self.kernel_bc_right)
        if self.size < 0:
            raise ConfigError("size must be positive (or 0 for the default)")
        if self.domain == "interval" and self.method != "exact":
            raise ConfigError("the interval only supports method = exact")
        if self.domain == "square" and self.method not in ("fem",):
            raise ConfigError("the square only supports method = fem")
        if self.lambda_max < 0 or self.count < 0:
            raise ConfigError("lambda_max and count must be non-negative")
        if self.count > 10**7:
            raise ConfigError("count must not exceed 1e7")
        if self.sigma_H not in (1, -1):
            raise ConfigError("sigma_H must be +1 or -1")
        if self.num_terms not in (2, 3):
            raise ConfigError("num_terms must be 2 or 3")
        if not 0 < self.fem_h < self.domain_size:
            raise ConfigError("fem_h must lie in (0, size)")
        if self.fem_order not in ("linear", "quadratic"):
            raise ConfigError("fem_order must be linear or quadratic")
        if self.symbol_backend not in ("jet", "fd"):
            raise ConfigError("symbol_backend must be jet or fd")
        if self.symbol_metric not in ("flat", "synthetic"):
            raise ConfigError("symbol_metric must be flat or synthetic")
        if self.kernel_geometry not in ("line", "halfline", "interval"):
            raise ConfigError("kernel_geometry must be line, halfline or interval")
        self.times  # noqa: B018
        return self

    def require_spectrum_inputs(self) -> None:
        """Checks that only matter for commands that compute spectra."""
        if self.method in ("exact", "dispersion", "both") and self.domain != "interval" and self.lambda_max <= 0:
            raise ConfigError("lambda_max must be positive for this method")
        if self.domain == "interval" and self.count <= 0:
            raise ConfigError("count must be a positive integer for the interval")

    def resolved(self) -> dict:
        """Every setting except the output location, which does not affect results."""
        out = asdict(self)
        del out["output"]
        return out

    def canonical_text(self) -> str:
        return "".join(f"{k}={_canon(v)}\n" for k, v in sorted(self.resolved().items()))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


def _canon(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.12e" % v
    return str(v)


_ALIASES = {"lambda": "lam"}


def _convert(name: str, typ, raw: str):
    raw = raw.strip()
    try:
        if typ in (bool, "bool"):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ in (int, "int"):
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        if typ in (float, "float"):
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError(raw)
            return val
    except ValueError as exc:
        raise ConfigError(f"invalid value for {name}: {raw!r}") from exc
    return raw


def parse_config(text: str) -> ExperimentConfig:
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, types[key], raw)
    return ExperimentConfig(**values).validate()


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
