"""Scalar heat kernels built by the method of images.

For a reflection ``y -> y*`` the Dirichlet kernel is ``G(x - y) - G(x - y*)``
and the Neumann kernel ``G(x - y) + G(x - y*)``.  On an interval the
reflections at both ends generate a lattice of images, summed until the terms
drop below ``1e-16`` of the free-kernel peak.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigError, IntegrationError
from .moduli import DIRICHLET, bc_sign, check_bc

GEOMETRIES = ("line", "halfline", "interval")
IMAGE_CUTOFF = 1e-16


def free_kernel(c: float, t, x, y):
    """``(4 pi c t)^{-1/2} exp(-(x - y)^2 / (4 c t))``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or c <= 0:
        raise ConfigError("diffusivity and time must be positive")
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return np.exp(-d * d / (4 * c * t)) / np.sqrt(4 * math.pi * c * t)


@dataclass(frozen=True)
class HeatKernel1D:
    diffusivity: float = 1.0
    geometry: str = "line"
    length: float | None = None
    bc_left: str = DIRICHLET
    bc_right: str = DIRICHLET

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"geometry must be one of {GEOMETRIES}")
        if not self.diffusivity > 0:
            raise ConfigError("diffusivity must be positive")
        if self.geometry == "interval" and not (self.length and self.length > 0):
            raise ConfigError("an interval kernel needs a positive length")
        object.__setattr__(self, "bc_left", check_bc(self.bc_left))
        object.__setattr__(self, "bc_right", check_bc(self.bc_right))

    @property
    def _eps(self):
        # reflection signs: -1 Dirichlet, +1 Neumann
        return bc_sign(self.bc_left), bc_sign(self.bc_right)

    def image_count(self, t: float) -> int:
        """Lattice half-width ``M`` so that omitted images are below the cutoff."""
        L = self.length
        reach = math.sqrt(4 * self.diffusivity * t * -math.log(IMAGE_CUTOFF))
        return int(math.ceil((reach / L + 1) / 2)) + 1

    def __call__(self, t, x, y):
        c = self.diffusivity
        if self.geometry == "line":
            return free_kernel(c, t, x, y)
        e0, eL = self._eps
        if self.geometry == "halfline":
            return free_kernel(c, t, x, y) + e0 * free_kernel(c, t, x, -np.asarray(y, dtype=float))
        L = self.length
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y, np.asarray(t)).shape)
        M = self.image_count(float(np.max(t)))
        for m in range(-M, M + 1):
            s = (e0 * eL) ** abs(m)
            out = out + s * (free_kernel(c, t, x, y + 2 * m * L) + e0 * free_kernel(c, t, x, -y + 2 * m * L))
        return out

    def trace(self, t: float, a: float | None = None) -> float:
        """``int K(t, x, x) dx`` over the interval, or over ``(0, a)`` on the line/half-line."""
        if not t > 0:
            raise ConfigError("t must be positive")
        c = self.diffusivity
        s = math.sqrt(4 * c * t)
        peak = 1 / math.sqrt(4 * math.pi * c * t)
        if self.geometry in ("line", "halfline"):
            if a is None or not a > 0:
                raise ConfigError("the trace on an unbounded geometry needs a window length a > 0")
            if self.geometry == "line":
                return a * peak
            # int_0^a G(2x) dx = erf(a / sqrt(c t)) / 4
            return a * peak + self._eps[0] * 0.25 * math.erf(a / math.sqrt(c * t))
        L = self.length
        e0, eL = self._eps
        total = 0.0
        M = self.image_count(t)
        for m in range(-M, M + 1):
            sg = (e0 * eL) ** abs(m)
            direct = L * peak * math.exp(-((2 * m * L) ** 2) / s**2)
            # int_0^L G(2x - 2mL) dx
            image = 0.25 * (math.erf((2 * L - 2 * m * L) / s) - math.erf(-2 * m * L / s))
            total += sg * (direct + e0 * image)
        return total

    def trace_quadrature(self, t: float, a: float | None = None, tol: float = 1e-12) -> float:
        """Adaptive quadrature of the diagonal, for cross-checks."""
        hi = self.length if self.geometry == "interval" else a
        if hi is None:
            raise ConfigError("the trace on an unbounded geometry needs a window length a > 0")
        val, err = integrate.quad(lambda x: float(self(t, x, x)), 0.0, hi, epsabs=0, epsrel=tol, limit=400)
        if err > 10 * tol * abs(val):
            raise IntegrationError("diagonal quadrature did not converge", achieved=err / abs(val))
        return val


def image_kernel(spec: HeatKernel1D, t, x, y):
    return spec(t, x, y)


def kernel_trace(spec: HeatKernel1D, t: float, a: float | None = None) -> float:
    return spec.trace(t, a)


def halfline_trace_remainder(spec: HeatKernel1D, t: float, a: float) -> float:
    """``trace(0, a) - a / sqrt(4 pi c t)``; tends to ``-1/4`` (Dirichlet) or ``+1/4`` (Neumann)."""
    if spec.geometry != "halfline":
        raise ConfigError("remainder is defined for the half-line kernel")
    return spec.trace(t, a) - a / math.sqrt(4 * math.pi * spec.diffusivity * t)


def halfplane_kernel(c: float, bc: str, t, x, y):
    """Kernel on ``{x_2 > 0}``: free in ``x_1`` times the half-line kernel in ``x_2``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    normal = HeatKernel1D(c, "halfline", bc_left=bc)
    return free_kernel(c, t, x[..., 0], y[..., 0]) * normal(t, x[..., 1], y[..., 1])


def interval_eigenvalues(length: float, bc_left: str, bc_right: str, count: int) -> np.ndarray:
    """Eigenvalues of ``-d^2/dx^2`` on ``(0, length)`` with the given end conditions."""
    kinds = (check_bc(bc_left), check_bc(bc_right))
    k = np.arange(count, dtype=float)
    if kinds == (DIRICHLET, DIRICHLET):
        return ((k + 1) * math.pi / length) ** 2
    if kinds[0] == kinds[1]:
        return (k * math.pi / length) ** 2
    return ((k + 0.5) * math.pi / length) ** 2


