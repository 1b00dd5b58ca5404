"""Lamé moduli and boundary-condition tags."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

DIRICHLET = "dirichlet"
NEUMANN = "neumann"
BOUNDARY_CONDITIONS = (DIRICHLET, NEUMANN)


def check_bc(bc: str) -> str:
    bc = str(bc).lower()
    if bc not in BOUNDARY_CONDITIONS:
        raise ConfigError(f"boundary condition must be one of {BOUNDARY_CONDITIONS}, got {bc!r}")
    return bc


def bc_sign(bc: str) -> int:
    """-1 for clamped (Dirichlet), +1 for traction-free (Neumann)."""
    return -1 if check_bc(bc) == DIRICHLET else 1


@dataclass(frozen=True)
class ElasticModuli:
    """Lamé pair with ``mu > 0`` and ``mu + lam >= 0``.

    ``lam`` is the second Lamé parameter (``lambda`` is reserved in Python).
    """

    mu: float
    lam: float

    def __post_init__(self):
        mu, lam = float(self.mu), float(self.lam)
        if not (math.isfinite(mu) and math.isfinite(lam)):
            raise ConfigError("Lamé parameters must be finite")
        if not mu > 0.0:
            raise ConfigError(f"shear modulus must satisfy mu > 0, got mu={mu:g}")
        if mu + lam < 0.0:
            raise ConfigError(f"moduli must satisfy mu + lambda >= 0, got mu + lambda={mu + lam:g}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lam", lam)

    @property
    def shear_speed2(self) -> float:
        return self.mu

    @property
    def pressure_speed2(self) -> float:
        return 2.0 * self.mu + self.lam

    @property
    def is_scalar_limit(self) -> bool:
        return self.mu + self.lam == 0.0

    def as_dict(self) -> dict:
        return {"mu": self.mu, "lambda": self.lam}
