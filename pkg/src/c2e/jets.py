"""Truncated multivariate Taylor ("jet") arithmetic.

A jet of order N in d variables stores one coefficient per multi-index
alpha with |alpha| <= N, enumerated in graded lexicographic order.  All
differential operators in this package ultimately reduce to arithmetic on
these coefficient vectors.  Sizes stay tiny (d <= 4, N <= 9), so storage
is dense and the hot loops are vectorized over precomputed index tables.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import BudgetError, NumericError, StructuralError

__all__ = [
    "Jet",
    "jet_space_size",
    "multi_indices",
    "constant_jet",
    "variable_jet",
    "jet_exp",
    "jet_log",
    "jet_sin",
    "jet_cos",
    "jet_sqrt",
    "jet_pow",
    "jet_reciprocal",
]


def jet_space_size(dim: int, order: int) -> int:
    """Number of multi-indices alpha in d variables with |alpha| <= order."""
    return math.comb(dim + order, dim)


@lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices with |alpha| <= order, graded, lex within a grade."""
    out: list[tuple[int, ...]] = []
    for total in range(order + 1):
        out.extend(_compositions(total, dim))
    return tuple(out)


def _compositions(total: int, dim: int) -> list[tuple[int, ...]]:
    if dim == 1:
        return [(total,)]
    out = []
    for head in range(total, -1, -1):
        out.extend((head, *rest) for rest in _compositions(total - head, dim - 1))
    return out


@lru_cache(maxsize=None)
def _index_of(dim: int, order: int) -> dict[tuple[int, ...], int]:
    return {alpha: k for k, alpha in enumerate(multi_indices(dim, order))}


@lru_cache(maxsize=None)
def mul_table(dim: int, oa: int, ob: int):
    """Gather/scatter tables for the truncated Cauchy product.

    Returns (I, J, starts, out_order) such that for coefficient vectors a, b
    the product coefficients are np.add.reduceat(a[I]*b[J], starts).  The
    terms are sorted by output index and every output index occurs.
    """
    oo = min(oa, ob)
    pos_out = _index_of(dim, oo)
    triples = []
    for i, alpha in enumerate(multi_indices(dim, oa)):
        for j, beta in enumerate(multi_indices(dim, ob)):
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            if sum(gamma) <= oo:
                triples.append((pos_out[gamma], i, j))
    triples.sort()
    K = np.array([t[0] for t in triples])
    I = np.array([t[1] for t in triples])
    J = np.array([t[2] for t in triples])
    starts = np.searchsorted(K, np.arange(jet_space_size(dim, oo)))
    return I, J, starts, oo


@lru_cache(maxsize=None)
def diff_table(dim: int, order: int, axis: int):
    """(source positions, factors) realizing d/dx_axis at one lower order."""
    if order < 1:
        raise BudgetError("derivative budget exhausted")
    src_of = _index_of(dim, order)
    src = []
    fac = []
    for gamma in multi_indices(dim, order - 1):
        shifted = list(gamma)
        shifted[axis] += 1
        src.append(src_of[tuple(shifted)])
        fac.append(shifted[axis])
    return np.array(src), np.array(fac, dtype=float)


def coeff_mul(a: np.ndarray, b: np.ndarray, dim: int, oa: int, ob: int) -> np.ndarray:
    """Cauchy product on raw coefficient arrays (last axis = coefficients)."""
    I, J, starts, _ = mul_table(dim, oa, ob)
    return np.add.reduceat(a[..., I] * b[..., J], starts, axis=-1)


class Jet:
    """Truncated Taylor expansion at a base point."""

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs=None, dtype=float):
        if dim < 1 or order < 0:
            raise StructuralError(f"invalid jet shape dim={dim} order={order}")
        self.dim = dim
        self.order = order
        n = jet_space_size(dim, order)
        if coeffs is None:
            self.coeffs = np.zeros(n, dtype=dtype)
        else:
            self.coeffs = np.asarray(coeffs, dtype=None).astype(
                np.result_type(np.asarray(coeffs).dtype, dtype), copy=True
            )
            if self.coeffs.shape != (n,):
                raise StructuralError(
                    f"expected {n} coefficients, got {self.coeffs.shape}"
                )

    # -- basic structure ------------------------------------------------

    @property
    def value(self):
        """Constant coefficient (the value at the base point)."""
        return self.coeffs[0]

    def truncated(self, order: int) -> "Jet":
        if order > self.order:
            raise BudgetError(
                f"cannot extend jet of order {self.order} to order {order}"
            )
        if order == self.order:
            return self
        return Jet(self.dim, order, self.coeffs[: jet_space_size(self.dim, order)])

    def copy(self) -> "Jet":
        return Jet(self.dim, self.order, self.coeffs)

    def __repr__(self):
        return f"Jet(dim={self.dim}, order={self.order}, value={self.value})"

    # -- ring operations -------------------------------------------------

    def _match(self, other: "Jet") -> int:
        if self.dim != other.dim:
            raise StructuralError(
                f"jet dimension mismatch: {self.dim} vs {other.dim}"
            )
        return min(self.order, other.order)

    def __add__(self, other):
        if not isinstance(other, Jet):
            out = self.coeffs.copy()
            out[0] += other
            return Jet(self.dim, self.order, out)
        oo = self._match(other)
        n = jet_space_size(self.dim, oo)
        return Jet(self.dim, oo, self.coeffs[:n] + other.coeffs[:n])

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.dim, self.order, -self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order, self.coeffs * other)
        oo = self._match(other)
        out = coeff_mul(self.coeffs, other.coeffs, self.dim, self.order, other.order)
        return Jet(self.dim, oo, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * jet_reciprocal(other)
        return Jet(self.dim, self.order, self.coeffs / other)

    # -- calculus ----------------------------------------------------------

    def partial(self, axis: int) -> "Jet":
        """Formal partial derivative; the order drops by one."""
        if not 0 <= axis < self.dim:
            raise StructuralError(f"axis {axis} out of range for dim {self.dim}")
        if self.order < 1:
            raise BudgetError("derivative budget exhausted")
        src, fac = diff_table(self.dim, self.order, axis)
        return Jet(self.dim, self.order - 1, self.coeffs[src] * fac)

    def evaluate(self, offset) -> complex:
        """Evaluate the truncated Taylor polynomial at base point + offset."""
        offset = np.asarray(offset, dtype=float)
        acc = 0.0
        for alpha, c in zip(multi_indices(self.dim, self.order), self.coeffs):
            acc += c * np.prod(offset**np.array(alpha))
        return acc


def constant_jet(dim: int, order: int, value, dtype=float) -> Jet:
    j = Jet(dim, order, dtype=np.result_type(dtype, np.asarray(value).dtype))
    j.coeffs[0] = value
    return j


def variable_jet(dim: int, order: int, axis: int, base: float) -> Jet:
    """Jet of the coordinate function x_axis at the given base value."""
    j = Jet(dim, order)
    j.coeffs[0] = base
    if order >= 1:
        unit = tuple(1 if k == axis else 0 for k in range(dim))
        j.coeffs[_index_of(dim, order)[unit]] = 1.0
    return j


# -- composition with elementary functions ---------------------------------


def compose_series(series: np.ndarray, a: Jet) -> Jet:
    """Sum_k series[k] * (a - a.value)^k by Horner's scheme."""
    u = a.copy()
    u.coeffs = u.coeffs.copy()
    u.coeffs[0] = 0.0
    acc = constant_jet(a.dim, a.order, series[-1], dtype=np.asarray(series).dtype)
    for c in series[-2::-1]:
        acc = acc * u + c
    return acc


def _taylor_coeffs(f: str, c, order: int, extra=None) -> np.ndarray:
    k = np.arange(order + 1)
    fact = np.array([math.factorial(i) for i in k], dtype=float)
    if f == "exp":
        return np.exp(c) / fact
    if f == "log":
        if not np.real(c) > 0:
            raise NumericError("log of jet with non-positive constant term")
        out = np.empty(order + 1)
        out[0] = np.log(c)
        out[1:] = -((-1.0 / c) ** k[1:]) / k[1:]
        return out
    if f == "sin":
        cycle = np.array([np.sin(c), np.cos(c), -np.sin(c), -np.cos(c)])
        return cycle[k % 4] / fact
    if f == "cos":
        cycle = np.array([np.cos(c), -np.sin(c), -np.cos(c), np.sin(c)])
        return cycle[k % 4] / fact
    if f == "pow":
        r = extra
        if c == 0:
            raise NumericError("pow of jet with zero constant term")
        if np.real(c) < 0 and r != int(r):
            raise NumericError("fractional power of negative constant term")
        coef = np.empty(order + 1)
        acc = 1.0
        for i in k:
            coef[i] = acc * c ** (r - i) / math.factorial(i)
            acc *= r - i
        return coef
    raise StructuralError(f"unknown elementary function {f!r}")


def jet_exp(a: Jet) -> Jet:
    return compose_series(_taylor_coeffs("exp", a.value, a.order), a)


def jet_log(a: Jet) -> Jet:
    return compose_series(_taylor_coeffs("log", a.value, a.order), a)


def jet_sin(a: Jet) -> Jet:
    return compose_series(_taylor_coeffs("sin", a.value, a.order), a)


def jet_cos(a: Jet) -> Jet:
    return compose_series(_taylor_coeffs("cos", a.value, a.order), a)


def jet_pow(a: Jet, r: float) -> Jet:
    return compose_series(_taylor_coeffs("pow", a.value, a.order, extra=r), a)


def jet_sqrt(a: Jet) -> Jet:
    return jet_pow(a, 0.5)


def jet_reciprocal(a: Jet) -> Jet:
    if a.value == 0:
        raise NumericError("reciprocal of jet with zero constant term")
    return jet_pow(a, -1.0)
