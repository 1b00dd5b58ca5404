"""Truncated multivariate Taylor arithmetic ("dual numbers" to second order).

A :class:`Jet` stores the Taylor coefficients ``c_alpha`` of a (possibly
array-valued) function about a base point for all multi-indices with
``|alpha| <= 2``.  Products truncate to the smaller of the operand orders and
differentiation lowers the order by one, so every coefficient that survives is
exact up to rounding.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial

import numpy as np

MAX_ORDER = 2


@lru_cache(maxsize=None)
def _tables(nvar: int):
    terms = [()]
    for deg in range(1, MAX_ORDER + 1):
        terms += list(combinations_with_replacement(range(nvar), deg))
    alphas = []
    for t in terms:
        a = [0] * nvar
        for v in t:
            a[v] += 1
        alphas.append(tuple(a))
    index = {a: i for i, a in enumerate(alphas)}
    degree = np.array([sum(a) for a in alphas])
    products = []
    for i, a in enumerate(alphas):
        for j, b in enumerate(alphas):
            c = tuple(x + y for x, y in zip(a, b))
            if c in index:
                products.append((i, j, index[c], sum(c)))
    deriv = []
    for v in range(nvar):
        rows = []
        for i, a in enumerate(alphas):
            if a[v] > 0:
                b = list(a)
                b[v] -= 1
                rows.append((i, index[tuple(b)], a[v]))
        deriv.append(rows)
    return alphas, index, degree, products, deriv


class Jet:
    __array_priority__ = 100

    def __init__(self, coef: np.ndarray, nvar: int, order: int = MAX_ORDER):
        self.coef = np.asarray(coef)
        self.nvar = nvar
        self.order = order

    # construction --------------------------------------------------------
    @classmethod
    def constant(cls, value, nvar: int) -> "Jet":
        value = np.asarray(value)
        n_terms = len(_tables(nvar)[0])
        coef = np.zeros((n_terms,) + value.shape, dtype=np.result_type(value, float))
        coef[0] = value
        return cls(coef, nvar)

    @classmethod
    def variable(cls, value: float, which: int, nvar: int) -> "Jet":
        out = cls.constant(float(value), nvar)
        out.coef[1 + which] = 1.0
        return out

    @classmethod
    def from_derivatives(cls, value, grad, hess, var_index, nvar: int) -> "Jet":
        """Jet of ``f`` given value, gradient and Hessian in the variables ``var_index``.

        ``grad`` has the derivative axis first, ``hess`` the two derivative axes first.
        """
        alphas, index, *_ = _tables(nvar)
        out = cls.constant(value, nvar)
        out.coef = out.coef.astype(np.result_type(value, grad, hess, float))
        m = len(var_index)
        for p in range(m):
            a = [0] * nvar
            a[var_index[p]] = 1
            out.coef[index[tuple(a)]] = grad[p]
            for q in range(p, m):
                a2 = list(a)
                a2[var_index[q]] += 1
                alpha = tuple(a2)
                fact = np.prod([factorial(k) for k in alpha])
                out.coef[index[alpha]] = hess[p, q] / fact
        return out

    # access --------------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.coef[0]

    @property
    def shape(self):
        return self.coef.shape[1:]

    def partial(self, alpha) -> np.ndarray:
        """``d^alpha f`` at the base point."""
        alphas, index, *_ = _tables(self.nvar)
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError(f"derivative of order {sum(alpha)} exceeds jet order {self.order}")
        return self.coef[index[alpha]] * np.prod([factorial(k) for k in alpha])

    def d(self, var: int) -> "Jet":
        """Jet of the partial derivative in variable ``var`` (one order lower)."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        out = np.zeros_like(self.coef)
        for src, dst, k in _tables(self.nvar)[4][var]:
            out[dst] = k * self.coef[src]
        return Jet(out, self.nvar, self.order - 1)

    # arithmetic ----------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.nvar)

    def __add__(self, other):
        other = self._lift(other)
        return Jet(self.coef + other.coef, self.nvar, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.nvar, self.order)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def _combine(self, other, op):
        other = self._lift(other)
        order = min(self.order, other.order)
        degree = _tables(self.nvar)[2]
        first = op(self.coef[0], other.coef[0])
        out = np.zeros((self.coef.shape[0],) + first.shape, dtype=first.dtype)
        for i, j, k, deg in _tables(self.nvar)[3]:
            if deg <= order and degree[i] <= self.order and degree[j] <= other.order:
                out[k] = out[k] + op(self.coef[i], other.coef[j])
        return Jet(out, self.nvar, order)

    def __mul__(self, other):
        if np.isscalar(other):
            return Jet(self.coef * other, self.nvar, self.order)
        return self._combine(other, np.multiply)

    def __rmul__(self, other):
        if np.isscalar(other):
            return Jet(self.coef * other, self.nvar, self.order)
        return self._lift(other)._combine(self, np.multiply)

    def __matmul__(self, other):
        return self._combine(other, np.matmul)

    def __rmatmul__(self, other):
        return self._lift(other)._combine(self, np.matmul)

    def __truediv__(self, other):
        if np.isscalar(other):
            return Jet(self.coef / other, self.nvar, self.order)
        return self * self._lift(other).reciprocal()

    def contract(self, spec: str, other) -> "Jet":
        return self._combine(other, lambda a, b: np.einsum(spec, a, b))

    def map(self, fn) -> "Jet":
        """Apply a linear map to every coefficient (transpose, trace, indexing)."""
        return Jet(np.stack([fn(c) for c in self.coef]), self.nvar, self.order)

    def reciprocal(self) -> "Jet":
        return self._inverse(lambda a: 1.0 / a, np.multiply)

    def inv(self) -> "Jet":
        """Matrix inverse, order preserved."""
        return self._inverse(np.linalg.inv, np.matmul)

    def _inverse(self, inv0, op):
        alphas, index, degree, products, _ = _tables(self.nvar)
        b0 = inv0(self.coef[0])
        out = np.zeros_like(self.coef, dtype=np.result_type(self.coef, b0))
        out[0] = b0
        # solve sum_{a+b=g} A_a B_b = 0 for B_g in order of increasing |g|
        for g in np.argsort(degree, kind="stable")[1:]:
            if degree[g] > self.order:
                continue
            acc = np.zeros_like(out[0])
            for i, j, k, _deg in products:
                if k == g and j != g:
                    acc = acc + op(self.coef[i], out[j])
            out[g] = -op(b0, acc)
        return Jet(out, self.nvar, self.order)


def stack(jets, axis: int = 0) -> Jet:
    order = min(j.order for j in jets)
    return Jet(np.stack([j.coef for j in jets], axis=axis + 1), jets[0].nvar, order)
