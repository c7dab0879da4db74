"""Target functions with closed-form derivatives for synthesis and testing.

Every oracle evaluates values and arbitrary-order partial derivatives in
closed form over batches of points, and declares bounds on its derivative
sups so synthesized networks can report honest error bounds.  Built-ins are
pre-scaled so the advertised smoothness classes have norm at most one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .indexing import _as_exponents

__all__ = ["FunctionOracle", "builtin_oracles", "polynomial_oracle"]


@dataclass
class FunctionOracle:
    """Function on [0,1]^d with exact derivatives and declared norm bounds."""

    name: str
    d: int
    value_fn: Callable[[np.ndarray], np.ndarray]
    derivative_fn: Callable[[tuple[int, ...], np.ndarray], np.ndarray]
    sobolev_bound_fn: Callable[[int], float]
    deriv_sup_fn: Callable[[int], float] | None = None
    analytic_constant: float | None = None
    degree: int | None = None  # total degree for polynomial oracles

    def value(self, x):
        """f(x); accepts a point (d,) or batch (P, d)."""
        xa = self._coerce(x)
        out = self.value_fn(xa)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, n, x):
        """Partial derivative D^n f(x); the zero multi-index returns f itself."""
        exps = _as_exponents(n)
        if len(exps) != self.d:
            raise ValueError(f"multi-index length {len(exps)} != dimension {self.d}")
        xa = self._coerce(x)
        if all(v == 0 for v in exps):
            out = self.value_fn(xa)
        else:
            out = self.derivative_fn(exps, xa)
        return float(out) if np.ndim(out) == 0 else out

    def sobolev_bound(self, n: int) -> float:
        """Declared bound on max over |n'| <= n of sup |D^n' f|."""
        return float(self.sobolev_bound_fn(int(n)))

    def deriv_sup(self, n: int) -> float:
        """Declared bound on the top-order sup, max over |n'| = n of sup |D^n' f|."""
        if self.deriv_sup_fn is not None:
            return float(self.deriv_sup_fn(int(n)))
        return self.sobolev_bound(n)

    def _coerce(self, x) -> np.ndarray:
        xa = np.asarray(x, dtype=np.float64)
        if xa.shape[-1] != self.d:
            raise ValueError(f"point dimension {xa.shape[-1]} != oracle dimension {self.d}")
        return xa


def _falling(alpha: int, k: int) -> int:
    """alpha * (alpha-1) * ... * (alpha-k+1); zero when k > alpha."""
    if k > alpha:
        return 0
    out = 1
    for j in range(k):
        out *= alpha - j
    return out


def polynomial_oracle(name: str, d: int, terms: dict[tuple[int, ...], float]) -> FunctionOracle:
    """Oracle for sum_t c_t * x^alpha_t with exact term-wise derivatives."""
    terms = {tuple(int(v) for v in a): float(c) for a, c in terms.items()}
    for alpha in terms:
        if len(alpha) != d:
            raise ValueError(f"term {alpha} has wrong length for d={d}")
    degree = max((sum(a) for a in terms), default=0)

    def value(X):
        out = np.zeros(X.shape[:-1], dtype=np.float64)
        for alpha, c in terms.items():
            out += c * np.prod(X ** np.asarray(alpha), axis=-1)
        return out

    def derivative(nvec, X):
        out = np.zeros(X.shape[:-1], dtype=np.float64)
        for alpha, c in terms.items():
            coef = c
            for a_k, n_k in zip(alpha, nvec):
                coef *= _falling(a_k, n_k)
            if coef == 0.0:
                continue
            rest = tuple(a_k - n_k for a_k, n_k in zip(alpha, nvec))
            out += coef * np.prod(X ** np.asarray(rest), axis=-1)
        return out

    def order_sup(order: int) -> float:
        # Largest derivative sup on [0,1]^d among multi-indices of one order;
        # exact for monomials with positive coefficients (max at the ones vector).
        best = 0.0
        for nvec in _exponent_vectors(d, order):
            tot = 0.0
            for alpha, c in terms.items():
                coef = abs(c)
                for a_k, n_k in zip(alpha, nvec):
                    coef *= _falling(a_k, n_k)
                tot += coef
            best = max(best, tot)
        return best

    def sobolev_bound(n):
        return max(order_sup(g) for g in range(n + 1))

    return FunctionOracle(
        name=name,
        d=d,
        value_fn=value,
        derivative_fn=derivative,
        sobolev_bound_fn=sobolev_bound,
        deriv_sup_fn=order_sup,
        degree=degree,
    )


def _exponent_vectors(d: int, total: int):
    if d == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _exponent_vectors(d - 1, total - first):
            yield (first,) + rest


def _sin_product_oracle(name: str, d: int, scale: float) -> FunctionOracle:
    """c * prod_k sin(pi x_k); derivatives shift each factor by quarter periods."""

    def value(X):
        return scale * np.prod(np.sin(np.pi * X), axis=-1)

    def derivative(nvec, X):
        order = sum(nvec)
        shift = np.asarray(nvec, dtype=np.float64) * (np.pi / 2.0)
        return scale * np.pi**order * np.prod(np.sin(np.pi * X + shift), axis=-1)

    return FunctionOracle(
        name=name,
        d=d,
        value_fn=value,
        derivative_fn=derivative,
        sobolev_bound_fn=lambda n: scale * np.pi**n,
        deriv_sup_fn=lambda n: scale * np.pi**n,
    )


def _exp_sum_oracle(name: str, d: int) -> FunctionOracle:
    """e^{-d} * exp(sum_k x_k): every derivative equals the function itself."""
    scale = math.exp(-d)

    def value(X):
        return scale * np.exp(np.sum(X, axis=-1))

    def derivative(nvec, X):
        return value(X)

    return FunctionOracle(
        name=name,
        d=d,
        value_fn=value,
        derivative_fn=derivative,
        sobolev_bound_fn=lambda n: 1.0,
        deriv_sup_fn=lambda n: 1.0,
        analytic_constant=1.0,
    )


def _ridge_sin_oracle(name: str, d: int) -> FunctionOracle:
    """(1/(d pi^2)) sum_k sin(pi x_k): nonzero on every canonical subspace."""
    scale = 1.0 / (d * np.pi**2)

    def value(X):
        return scale * np.sum(np.sin(np.pi * X), axis=-1)

    def derivative(nvec, X):
        active = [k for k, v in enumerate(nvec) if v > 0]
        if len(active) != 1:
            return np.zeros(X.shape[:-1], dtype=np.float64)
        k = active[0]
        g = nvec[k]
        return scale * np.pi**g * np.sin(np.pi * X[..., k] + g * np.pi / 2.0)

    def order_sup(g):
        if g == 0:
            return scale * d
        return scale * np.pi**g

    return FunctionOracle(
        name=name,
        d=d,
        value_fn=value,
        derivative_fn=derivative,
        sobolev_bound_fn=lambda n: max(order_sup(g) for g in range(n + 1)),
        deriv_sup_fn=order_sup,
    )


def builtin_oracles() -> dict[str, FunctionOracle]:
    """Catalog of named test functions, keyed by oracle name."""
    pi = np.pi
    oracles = [
        polynomial_oracle("const1d", 1, {(0,): 0.5}),
        polynomial_oracle("lin1d", 1, {(1,): 1.0}),
        polynomial_oracle("poly1d_deg2", 1, {(2,): 0.5}),
        polynomial_oracle("poly1d_deg3", 1, {(3,): 1.0 / 6.0}),
        polynomial_oracle("poly2d_bilinear", 2, {(1, 1): 1.0}),
        polynomial_oracle("poly3d_quad", 3, {(0, 2, 0): 0.5}),
        polynomial_oracle(
            "lin3d_mean", 3, {(1, 0, 0): 1 / 3, (0, 1, 0): 1 / 3, (0, 0, 1): 1 / 3}
        ),
        _sin_product_oracle("sin1d", 1, 1.0 / pi**2),
        _sin_product_oracle("sin1d_n1", 1, 1.0 / pi),
        _sin_product_oracle("sin1d_n3", 1, 1.0 / pi**3),
        _sin_product_oracle("sin2d", 2, 1.0 / pi**2),
        _sin_product_oracle("sin3d", 3, 1.0 / pi**2),
        _exp_sum_oracle("exp1d", 1),
        _exp_sum_oracle("exp2d", 2),
        _exp_sum_oracle("exp3d", 3),
        _exp_sum_oracle("exp4d", 4),
        _ridge_sin_oracle("ridge3d", 3),
    ]
    return {o.name: o for o in oracles}
