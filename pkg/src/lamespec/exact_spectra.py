"""Closed-form and dispersion-relation spectra on the interval and the disk.

Elastic disk modes follow from the Helmholtz split ``u = grad phi + curl psi``
with ``phi = A J_n(alpha r) cos(n theta)``, ``psi = B J_n(beta r) sin(n theta)``,
``alpha^2 = tau / (2 mu + lam)`` and ``beta^2 = tau / mu``.  Imposing the
boundary condition at ``r = R`` gives a 2x2 system in ``(A, B)``; writing
``a = alpha R``, ``b = beta R``, ``J = J_n``:

clamped (rows ``R u_r``, ``-R u_theta``)::

    [ a J'(a)      n J(b)  ]
    [ n J(a)       b J'(b) ]

traction-free (rows ``R^2 sigma_rr / mu``, ``R^2 sigma_rtheta / mu``)::

    [ (2n^2 - b^2) J(a) - 2a J'(a)     2n (b J'(b) - J(b))            ]
    [ 2n (J(a) - a J'(a))              (b^2 - 2n^2) J(b) + 2b J'(b)    ]

The off-diagonal entries vanish for ``n = 0``, where the pressure (breathing)
and shear (torsional) branches decouple and are scanned separately.  See
``docs/disk_dispersion.md`` for the derivation.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .bessel import MAX_ORDER, bessel_j_and_derivative, bessel_j_table
from .errors import ConfigError, IncompleteSpectrumError
from .moduli import DIRICHLET, NEUMANN, ElasticModuli, check_bc
from .spectrum import SpectrumTable

CERTIFY_MIN_COUNT = 500
SCAN_FRACTION = 0.1  # grid step as a fraction of the mean root spacing per order
CERTIFY_TOLERANCE = 0.05
RIGID_MODES_2D = 3

# branch codes for the row layout used by the scans
_FULL, _PRESSURE, _SHEAR = 0, 1, 2


# ---------------------------------------------------------------------------
# scalar Laplacian


def scalar_interval_spectrum(length: float, bc: str, count: int) -> SpectrumTable:
    """Eigenvalues ``(k pi / L)^2`` of ``-d^2/dx^2`` on ``(0, L)``."""
    bc = check_bc(bc)
    if not length > 0:
        raise ConfigError("interval length must be positive")
    if not 1 <= count <= 10**7:
        raise ConfigError("count must lie in [1, 1e7]")
    k = np.arange(1, count + 1) if bc == DIRICHLET else np.arange(0, count)
    ev = (k * math.pi / length) ** 2
    return SpectrumTable(ev, np.ones(count, dtype=int), bc, "exact", float(ev[-1]),
                         angular_order=np.zeros(count, dtype=int), radial_index=np.arange(1, count + 1))


def scalar_disk_spectrum(radius: float, bc: str, lambda_max: float) -> SpectrumTable:
    """All Laplacian eigenvalues ``<= lambda_max`` on the disk of given radius.

    Dirichlet eigenvalues are ``(j_{n,k} / R)^2``, Neumann ``(j'_{n,k} / R)^2``
    plus the constant mode.  Orders ``n >= 1`` carry multiplicity 2.  Since
    ``j_{n,1} > n`` and ``j'_{n,1} >= n``, orders above ``R sqrt(lambda_max)``
    contribute nothing.
    """
    bc = check_bc(bc)
    if not (radius > 0 and lambda_max > 0):
        raise ConfigError("radius and lambda_max must be positive")
    xmax = radius * math.sqrt(lambda_max)
    nmax = int(math.floor(xmax))
    if nmax > MAX_ORDER - 2:
        raise ConfigError("lambda_max too large for the supported Bessel order range")
    orders = np.arange(nmax + 1)
    deriv = bc == NEUMANN

    def grid_values(x):
        table = bessel_j_table(nmax + 1, x)
        if not deriv:
            return table[: nmax + 1], None
        jp = np.empty((nmax + 1, x.size))
        jp[0] = -table[1]
        jp[1:] = 0.5 * (table[: nmax] - table[2: nmax + 2])
        return jp, None

    def pair_values(n, x):
        j, jp = bessel_j_and_derivative(n, x)
        return jp if deriv else j

    # zeros of J_n and J_n' are at least ~2.4 apart; a 0.25 step is four per gap
    grid = np.linspace(0.0, xmax, max(int(math.ceil(xmax / 0.25)), 8) + 1)[1:]
    rows = orders
    roots_n, roots_x = _scan(grid_values, lambda r, x: pair_values(r, x), rows, grid)
    ev = (roots_x / radius) ** 2
    mult = np.where(roots_n == 0, 1, 2)
    ao = roots_n.copy()
    if bc == NEUMANN:
        ev = np.concatenate([[0.0], ev])
        mult = np.concatenate([[1], mult])
        ao = np.concatenate([[0], ao])
    ri = _radial_indices(ao, ev)
    table = SpectrumTable(ev, mult, bc, "exact", lambda_max, ao, ri)
    _certify(table, radius**2 * math.pi / (4 * math.pi), 1, boundary=radius / 2)
    return table


# ---------------------------------------------------------------------------
# elastic disk


def _disk_entries(bc, n, a, b, ja, jpa, jb, jpb):
    if bc == DIRICHLET:
        return a * jpa, n * jb, n * ja, b * jpb
    m11 = (2.0 * n * n - b * b) * ja - 2.0 * a * jpa
    m12 = 2.0 * n * (b * jpb - jb)
    m21 = 2.0 * n * (ja - a * jpa)
    m22 = (b * b - 2.0 * n * n) * jb + 2.0 * b * jpb
    return m11, m12, m21, m22


def _branch_value(branch, m11, m12, m21, m22):
    """Dispersion value per row plus a cancellation scale."""
    full = m11 * m22 - m12 * m21
    val = np.where(branch == _PRESSURE, m11, np.where(branch == _SHEAR, m22, full))
    scale = np.where(branch == _FULL, np.abs(m11 * m22) + np.abs(m12 * m21), np.abs(val))
    return val, scale


def _wavenumbers(moduli: ElasticModuli, radius: float, s):
    s = np.asarray(s, dtype=float)
    return radius * s / math.sqrt(moduli.pressure_speed2), radius * s / math.sqrt(moduli.shear_speed2)


def elastic_disk_dispersion(moduli: ElasticModuli, radius: float, bc: str, angular_order: int, tau: float) -> float:
    """Boundary determinant ``D_n(tau)`` for the elastic disk.

    Zeros in ``tau > 0`` are exactly the eigenvalues of angular order ``n``.
    For ``n = 0`` the determinant is the product of the pressure and shear
    branch functions.
    """
    bc = check_bc(bc)
    if not tau > 0:
        raise ConfigError("tau must be positive")
    n = int(angular_order)
    a, b = _wavenumbers(moduli, radius, math.sqrt(tau))
    ja, jpa = bessel_j_and_derivative(n, a)
    jb, jpb = bessel_j_and_derivative(n, b)
    m11, m12, m21, m22 = _disk_entries(bc, n, a, b, ja, jpa, jb, jpb)
    return float(m11 * m22 - m12 * m21)


def rayleigh_speed_ratio(moduli: ElasticModuli) -> float:
    """Plane-strain Rayleigh speed divided by the shear speed.

    Root in ``(0, 1)`` of ``(2 - x^2)^2 - 4 sqrt(1 - x^2) sqrt(1 - k x^2)``
    with ``k = mu / (2 mu + lam)``; tends to 0 in the limit ``lam = -mu``.
    """
    k = moduli.shear_speed2 / moduli.pressure_speed2

    def f(x):
        return (2 - x * x) ** 2 - 4 * math.sqrt(1 - x * x) * math.sqrt(1 - k * x * x)

    if k >= 1.0:
        return 0.0
    lo = 1e-6
    if f(lo) * f(1.0) > 0:
        return 0.0
    return brentq(f, lo, 1.0, xtol=1e-14)


def elastic_disk_spectrum(moduli: ElasticModuli, radius: float, bc: str, lambda_max: float) -> SpectrumTable:
    """All elastic eigenvalues ``<= lambda_max`` on the disk, with multiplicities."""
    bc = check_bc(bc)
    if not (radius > 0 and lambda_max > 0):
        raise ConfigError("radius and lambda_max must be positive")
    cs = math.sqrt(moduli.shear_speed2)
    cp = math.sqrt(moduli.pressure_speed2)
    smax = math.sqrt(lambda_max)
    if bc == DIRICHLET:
        # tau >= mu * j_{n-1,1}^2 / R^2 > mu (n-1)^2 / R^2
        nmax = int(math.floor(radius * smax / cs)) + 1
    else:
        cr = rayleigh_speed_ratio(moduli) * cs
        nmax = int(math.ceil(1.15 * radius * smax / max(cr, 1e-12))) + 5
    nmax = max(nmax, 2)
    # mean root spacing in s for one order is pi / (R (1/cs + 1/cp))
    step = SCAN_FRACTION * math.pi / (radius * (1.0 / cs + 1.0 / cp))
    grid = np.linspace(0.0, smax, max(int(math.ceil(smax / step)), 16) + 1)[1:]

    while True:
        if nmax > MAX_ORDER - 2:
            raise ConfigError("lambda_max too large for the supported Bessel order range")
        roots_row, roots_s = _elastic_scan(moduli, radius, bc, nmax, grid)
        n_of_row = np.maximum(roots_row - 1, 0)
        if bc == DIRICHLET or not np.any(n_of_row > nmax - 3):
            break
        nmax = int(nmax * 1.3) + 5

    ev = roots_s**2
    mult = np.where(n_of_row == 0, 1, 2)
    ao = n_of_row
    if bc == NEUMANN:
        ev = np.concatenate([[0.0], ev])
        mult = np.concatenate([[RIGID_MODES_2D], mult])
        ao = np.concatenate([[-1], ao])
    ri = _radial_indices(ao, ev)
    table = SpectrumTable(ev, mult, bc, "dispersion", lambda_max, ao, ri)
    lead = (1.0 / (4 * math.pi * moduli.mu) + 1.0 / (4 * math.pi * moduli.pressure_speed2)) * math.pi * radius**2
    # size of the boundary correction to the count, (1/(4 Gamma(3/2))) [..]_{1/2} |boundary|
    boundary = ((1.0 / math.sqrt(4 * math.pi * moduli.mu) + 1.0 / math.sqrt(4 * math.pi * moduli.pressure_speed2))
                * 2 * math.pi * radius / (2 * math.sqrt(math.pi)))
    _certify(table, lead, 1, boundary)
    return table


def _elastic_scan(moduli, radius, bc, nmax, grid):
    # row 0: n = 0 pressure branch, row 1: n = 0 shear branch, row r >= 2: order r - 1
    rows = np.arange(nmax + 2)

    def row_order(r):
        return np.maximum(np.asarray(r) - 1, 0)

    def row_branch(r):
        r = np.asarray(r)
        return np.where(r == 0, _PRESSURE, np.where(r == 1, _SHEAR, _FULL))

    def grid_values(s):
        a, b = _wavenumbers(moduli, radius, s)
        ta = bessel_j_table(nmax + 1, a)
        tb = bessel_j_table(nmax + 1, b)
        orders = row_order(rows)[:, None]
        ja, jb = ta[orders[:, 0]], tb[orders[:, 0]]
        jpa = _deriv_rows(ta, orders[:, 0])
        jpb = _deriv_rows(tb, orders[:, 0])
        ents = _scaled_entries(bc, orders, a[None, :], b[None, :], ja, jpa, jb, jpb)
        return _branch_value(row_branch(rows)[:, None], *ents)

    def pair_values(r, s):
        n = row_order(r)
        a, b = _wavenumbers(moduli, radius, s)
        ja, jpa = bessel_j_and_derivative(n, a)
        jb, jpb = bessel_j_and_derivative(n, b)
        return _branch_value(row_branch(r), *_scaled_entries(bc, n, a, b, ja, jpa, jb, jpb))[0]

    return _scan(grid_values, pair_values, rows, grid)


def _scaled_entries(bc, n, a, b, ja, jpa, jb, jpb):
    # The first matrix column depends on a only, the second on b only; dividing
    # each by a positive Bessel magnitude keeps the sign of every branch value
    # while avoiding underflow of products at high order and small argument.
    # Where J_n is near or below the underflow threshold (far from any root)
    # the value becomes nan and carries no sign.
    m11, m12, m21, m22 = _disk_entries(bc, n, a, b, ja, jpa, jb, jpb)
    with np.errstate(invalid="ignore", divide="ignore"):
        ca = np.abs(ja) + np.abs(jpa)
        cb = np.abs(jb) + np.abs(jpb)
        ca = np.where(np.minimum(np.abs(ja), ca) > _TINY, ca, np.nan)
        cb = np.where(np.minimum(np.abs(jb), cb) > _TINY, cb, np.nan)
        return m11 / ca, m12 / cb, m21 / ca, m22 / cb


def _deriv_rows(table, orders):
    jm1 = np.where((orders > 0)[:, None], table[np.maximum(orders - 1, 0)], -table[orders + 1])
    return 0.5 * (jm1 - table[orders + 1])


def _radial_indices(ao, ev):
    ri = np.zeros(len(ev), dtype=int)
    order = np.lexsort((ev, ao))
    last, k = None, 0
    for i in order:
        if ao[i] != last:
            last, k = ao[i], 0
        k += 1
        ri[i] = k if ao[i] >= 0 else -1
    return ri


# ---------------------------------------------------------------------------
# root scanning


_NOISE = 1e-9
_TINY = 1e-280


def _scan(grid_values, pair_values, rows, grid):
    """Locate every sign change of each row function on ``grid``.

    ``grid_values(grid) -> (values, scales)`` with shape ``(len(rows), len(grid))``;
    ``pair_values(rows_i, x_i)`` evaluates elementwise.  Besides plain sign
    changes, troughs of ``|f|`` between same-sign samples are probed with a
    vectorised golden-section search so close root pairs are not lost.
    Returns ``(row_of_root, root)`` sorted by root.
    """
    vals, scales = grid_values(grid)
    if scales is None:
        scales = np.abs(vals)
    lo_r, lo_x, hi_x = [], [], []

    prod = vals[:, :-1] * vals[:, 1:]
    noisy = (np.abs(vals[:, :-1]) <= _NOISE * scales[:, :-1]) & (np.abs(vals[:, 1:]) <= _NOISE * scales[:, 1:])
    ri, ci = np.nonzero((prod < 0) & ~noisy)
    lo_r.append(rows[ri])
    lo_x.append(grid[ci])
    hi_x.append(grid[ci + 1])

    # exact zeros on grid points
    zi, zc = np.nonzero(vals == 0.0)
    exact_r, exact_x = rows[zi], grid[zc]
    keep = scales[zi, zc] > 0
    exact_r, exact_x = exact_r[keep], exact_x[keep]

    # troughs
    av = np.abs(vals)
    mid = (av[:, 1:-1] < av[:, :-2]) & (av[:, 1:-1] < av[:, 2:]) & (prod[:, :-1] > 0) & (prod[:, 1:] > 0)
    ti, tc = np.nonzero(mid)
    if ti.size:
        tr = rows[ti]
        sgn = np.sign(vals[ti, tc + 1])
        a, b = grid[tc], grid[tc + 2]
        xmin, fmin = _golden_min(lambda x: sgn * pair_values(tr, x), a, b)
        hit = fmin < 0
        if hit.any():
            lo_r += [tr[hit], tr[hit]]
            lo_x += [a[hit], xmin[hit]]
            hi_x += [xmin[hit], b[hit]]

    r = np.concatenate(lo_r)
    a = np.concatenate(lo_x)
    b = np.concatenate(hi_x)
    roots = _bisect(pair_values, r, a, b)
    r = np.concatenate([r, exact_r])
    roots = np.concatenate([roots, exact_x])
    order = np.argsort(roots, kind="stable")
    return r[order], roots[order]


def _golden_min(f, a, b, iters=40):
    g = (math.sqrt(5) - 1) / 2
    a, b = a.copy(), b.copy()
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc < fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        c = b - g * (b - a)
        d = a + g * (b - a)
        fc, fd = f(c), f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _bisect(f, rows, a, b, rtol=1e-14, max_iter=80):
    if rows.size == 0:
        return np.zeros(0)
    a, b = a.astype(float).copy(), b.astype(float).copy()
    fa = f(rows, a)
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = f(rows, m)
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, m, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, m)
        if np.all(b - a <= rtol * np.abs(b)):
            break
    return 0.5 * (a + b)


def _certify(table: SpectrumTable, lead: float, n_half: float, boundary: float = 0.0):
    """One-term Weyl cross-check of completeness.

    The allowed relative deviation is 5% plus the relative size of the
    boundary correction ``boundary * Lambda^{(2 n_half - 1)/2}``, which by
    itself can exceed 5% for elastic tables near N = 500.
    """
    lam = table.max_reliable
    total = table.count(lam)
    if total < CERTIFY_MIN_COUNT:
        return

    def tol(g):
        return CERTIFY_TOLERANCE + boundary * g ** (n_half - 0.5) / (lead * g ** n_half)

    weyl = lead * lam**n_half
    dev = abs(total - weyl) / weyl
    if dev >= tol(lam):
        # locate the first Lambda where the deviation opens up
        grid = np.linspace(0.5 * lam, lam, 11)
        bad = [g for g in grid if abs(table.count(g) - lead * g**n_half) / (lead * g**n_half) >= tol(g)]
        lo = bad[0] if bad else 0.5 * lam
        raise IncompleteSpectrumError(
            f"count N={total} deviates {100 * dev:.2f}% from Weyl prediction {weyl:.1f}", (float(lo) * 0.9, lam))
