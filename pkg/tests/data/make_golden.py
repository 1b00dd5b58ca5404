"""Regenerate p1_reference_stiffness.json symbolically.

Reference triangle (0,0), (1,0), (0,1); mu = 1, lambda = 0; linear elements.
Degrees of freedom are ordered (node 0 x, node 0 y, node 1 x, ...).  The
element stiffness is the integral of 2 mu eps(u):eps(v) + lambda div u div v.
"""
import json
import pathlib

import sympy as sp

x, y = sp.symbols("x y")
phi = [1 - x - y, x, y]
mu, lam = sp.Integer(1), sp.Integer(0)

basis = []
for p in phi:
    basis.append((p, sp.Integer(0)))
    basis.append((sp.Integer(0), p))


def strain(u):
    ux, uy = u
    return sp.Matrix([[sp.diff(ux, x), (sp.diff(ux, y) + sp.diff(uy, x)) / 2],
                      [(sp.diff(ux, y) + sp.diff(uy, x)) / 2, sp.diff(uy, y)]])


def integrate(expr):
    return sp.integrate(sp.integrate(expr, (y, 0, 1 - x)), (x, 0, 1))


K = sp.zeros(6, 6)
for a, u in enumerate(basis):
    for b, v in enumerate(basis):
        eu, ev = strain(u), strain(v)
        dens = 2 * mu * sum(eu[i, j] * ev[i, j] for i in range(2) for j in range(2)) + lam * eu.trace() * ev.trace()
        K[a, b] = integrate(dens)

out = {"mu": 1, "lambda": 0, "nodes": [[0, 0], [1, 0], [0, 1]],
       "stiffness": [[str(K[i, j]) for j in range(6)] for i in range(6)]}
path = pathlib.Path(__file__).with_name("p1_reference_stiffness.json")
path.write_text(json.dumps(out, indent=1) + "\n")
print(K)
