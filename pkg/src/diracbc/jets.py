"""Truncated multivariate Taylor expansions with scalar or matrix coefficients.

A Jet stores the monomial coefficients c_beta of f(x) = sum_beta c_beta x^beta
for multi-indices |beta| <= order, all based at x = 0.  The monomial convention
(c_beta = d^beta f(0) / beta!) makes multiplication a plain convolution.

``order`` is also the exactness guarantee: every stored coefficient is exact.
Operations that consume derivatives shrink it; consumers that need more must
check ``order`` and fail loudly rather than read truncated zeros.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable

import numpy as np

__all__ = ["Jet", "multi_indices", "InsufficientOrder"]


class InsufficientOrder(ValueError):
    """A jet was asked for more derivative orders than it carries."""


@lru_cache(maxsize=None)
def multi_indices(nvars: int, max_order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices over nvars variables with total degree <= max_order."""
    if nvars == 0:
        return ((),)
    out = []
    for total in range(max_order + 1):
        out.extend(_compositions(nvars, total))
    return tuple(out)


@lru_cache(maxsize=None)
def index_list(nvars: int, max_order: int) -> tuple[tuple[int, ...], ...]:
    return multi_indices(nvars, max_order)


@lru_cache(maxsize=None)
def index_ranks(nvars: int, max_order: int) -> dict[tuple[int, ...], int]:
    return {b: i for i, b in enumerate(multi_indices(nvars, max_order))}


@lru_cache(maxsize=None)
def _compositions(nvars: int, total: int) -> tuple[tuple[int, ...], ...]:
    if nvars == 1:
        return ((total,),)
    out = []
    for head in range(total + 1):
        for tail in _compositions(nvars - 1, total - head):
            out.append((head,) + tail)
    return tuple(out)


def _as_array(value) -> np.ndarray:
    a = np.asarray(value)
    if a.dtype not in (np.float64, np.complex128):
        a = a.astype(np.complex128 if np.iscomplexobj(a) else np.float64)
    return a


class Jet:
    """Truncated Taylor polynomial; coefficients share a common array shape."""

    __slots__ = ("nvars", "order", "shape", "coeffs")

    def __init__(self, nvars: int, order: int, shape: tuple[int, ...],
                 coeffs: dict[tuple[int, ...], np.ndarray] | None = None):
        if order < 0:
            raise InsufficientOrder("jet truncated below order 0")
        self.nvars = nvars
        self.order = order
        self.shape = tuple(shape)
        self.coeffs = {} if coeffs is None else coeffs

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        v = _as_array(value)
        j = cls(nvars, order, v.shape)
        if np.any(v != 0):
            j.coeffs[(0,) * nvars] = v
        return j

    @classmethod
    def variable(cls, i: int, nvars: int, order: int) -> "Jet":
        j = cls(nvars, order, ())
        if order >= 1:
            beta = [0] * nvars
            beta[i] = 1
            j.coeffs[tuple(beta)] = np.asarray(1.0)
        return j

    @classmethod
    def from_derivatives(cls, derivs: dict[tuple[int, ...], np.ndarray],
                         nvars: int, order: int) -> "Jet":
        """Build from derivative values d^beta f(0), converting to monomial form."""
        shape = _as_array(next(iter(derivs.values()))).shape if derivs else ()
        j = cls(nvars, order, shape)
        for beta, val in derivs.items():
            if sum(beta) > order:
                continue
            fact = 1.0
            for b in beta:
                fact *= math.factorial(b)
            v = _as_array(val) / fact
            if np.any(v != 0):
                j.coeffs[tuple(beta)] = v
        return j

    # -- bookkeeping ---------------------------------------------------------

    def copy(self) -> "Jet":
        return Jet(self.nvars, self.order, self.shape,
                   {b: v.copy() for b, v in self.coeffs.items()})

    def truncated(self, order: int) -> "Jet":
        order = min(order, self.order)
        return Jet(self.nvars, order, self.shape,
                   {b: v for b, v in self.coeffs.items() if sum(b) <= order})

    def cleaned(self, tol: float = 0.0) -> "Jet":
        return Jet(self.nvars, self.order, self.shape,
                   {b: v for b, v in self.coeffs.items()
                    if np.max(np.abs(v)) > tol})

    def coefficient(self, beta: tuple[int, ...]) -> np.ndarray:
        if sum(beta) > self.order:
            raise InsufficientOrder(
                f"jet carries order {self.order}, coefficient {beta} requested")
        return self.coeffs.get(tuple(beta), np.zeros(self.shape))

    def derivative_value(self, beta: tuple[int, ...]) -> np.ndarray:
        """d^beta f(0): monomial coefficient times beta factorial."""
        fact = 1.0
        for b in beta:
            fact *= math.factorial(b)
        return self.coefficient(beta) * fact

    @property
    def is_zero(self) -> bool:
        return not self.coeffs or all(np.all(v == 0) for v in self.coeffs.values())

    def max_norm(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(np.max(np.abs(v)) for v in self.coeffs.values())

    # -- algebra -------------------------------------------------------------

    def __add__(self, other: "Jet") -> "Jet":
        self._compat(other)
        order = min(self.order, other.order)
        out = Jet(self.nvars, order, np.broadcast_shapes(self.shape, other.shape))
        for b, v in self.coeffs.items():
            if sum(b) <= order:
                out.coeffs[b] = v.copy() if b not in other.coeffs else v + other.coeffs[b]
        for b, v in other.coeffs.items():
            if sum(b) <= order and b not in self.coeffs:
                out.coeffs[b] = v.copy()
        return out

    def __neg__(self) -> "Jet":
        return Jet(self.nvars, self.order, self.shape,
                   {b: -v for b, v in self.coeffs.items()})

    def __sub__(self, other: "Jet") -> "Jet":
        return self + (-other)

    def scale(self, c) -> "Jet":
        return Jet(self.nvars, self.order, self.shape,
                   {b: c * v for b, v in self.coeffs.items()})

    def __mul__(self, other: "Jet") -> "Jet":
        """Product; matrix-valued factors compose with matmul, scalars scale."""
        self._compat(other)
        order = min(self.order, other.order)
        both_mat = len(self.shape) >= 2 and len(other.shape) >= 2
        out_shape = (np.matmul(np.zeros(self.shape), np.zeros(other.shape)).shape
                     if both_mat else np.broadcast_shapes(self.shape, other.shape))
        out = Jet(self.nvars, order, out_shape)
        if len(self.coeffs) * len(other.coeffs) >= 16:
            return self._mul_batched(other, order, out_shape, both_mat)
        for b1, v1 in self.coeffs.items():
            if sum(b1) > order:
                continue
            for b2, v2 in other.coeffs.items():
                tot = tuple(a + b for a, b in zip(b1, b2))
                if sum(tot) > order:
                    continue
                term = v1 @ v2 if both_mat else v1 * v2
                if tot in out.coeffs:
                    out.coeffs[tot] = out.coeffs[tot] + term
                else:
                    out.coeffs[tot] = term
        return out

    def _mul_batched(self, other: "Jet", order: int, out_shape,
                     both_mat: bool) -> "Jet":
        """Vectorized convolution (the symbol-engine hotspot)."""
        keys1 = [b for b in self.coeffs if sum(b) <= order]
        keys2 = [b for b in other.coeffs if sum(b) <= order]
        out = Jet(self.nvars, order, out_shape)
        if not keys1 or not keys2:
            return out
        b1 = np.array(keys1)
        b2 = np.array(keys2)
        v1 = np.stack([self.coeffs[k] for k in keys1]).astype(np.complex128)
        v2 = np.stack([other.coeffs[k] for k in keys2]).astype(np.complex128)
        tot = b1[:, None, :] + b2[None, :, :]
        mask = tot.sum(axis=2) <= order
        i1, i2 = np.nonzero(mask)
        if both_mat:
            prods = np.matmul(v1[i1], v2[i2])
        else:
            a = v1[i1]
            b = v2[i2]
            extra = len(out_shape)
            a = a.reshape(a.shape[:1] + (1,) * (extra - (a.ndim - 1)) + a.shape[1:])
            b = b.reshape(b.shape[:1] + (1,) * (extra - (b.ndim - 1)) + b.shape[1:])
            prods = a * b
        keys_out = tot[i1, i2]
        ranks = index_ranks(self.nvars, order)
        flat = np.array([ranks[tuple(k)] for k in keys_out])
        buf = np.zeros((len(ranks),) + out_shape, dtype=np.complex128)
        np.add.at(buf, flat, prods)
        inv = index_list(self.nvars, order)
        for r in np.unique(flat):
            out.coeffs[inv[r]] = buf[r]
        return out

    def deriv(self, i: int) -> "Jet":
        """Partial derivative in variable i; drops one exact order."""
        if self.order < 1:
            raise InsufficientOrder("cannot differentiate an order-0 jet")
        out = Jet(self.nvars, self.order - 1, self.shape)
        for b, v in self.coeffs.items():
            if b[i] == 0:
                continue
            nb = list(b)
            nb[i] -= 1
            out.coeffs[tuple(nb)] = b[i] * v
        return out

    def inv(self) -> "Jet":
        """Multiplicative inverse (matrix or scalar); constant term must be invertible."""
        c0 = self.coefficient((0,) * self.nvars)
        if len(self.shape) >= 2:
            inv0 = np.linalg.inv(c0)
        else:
            if c0 == 0:
                raise ZeroDivisionError("jet with zero constant term")
            inv0 = 1.0 / c0
        out = Jet.constant(inv0, self.nvars, self.order)
        for total in range(1, self.order + 1):
            for beta in _compositions(self.nvars, total):
                acc = np.zeros(out.shape, dtype=np.complex128 if
                               (np.iscomplexobj(c0) or any(np.iscomplexobj(v) for v in self.coeffs.values()))
                               else np.float64)
                for b1, v1 in self.coeffs.items():
                    if sum(b1) == 0 or any(x > y for x, y in zip(b1, beta)):
                        continue
                    b2 = tuple(y - x for x, y in zip(b1, beta))
                    v2 = out.coeffs.get(b2)
                    if v2 is None:
                        continue
                    acc = acc + (v1 @ v2 if len(self.shape) >= 2 else v1 * v2)
                term = -(inv0 @ acc) if len(self.shape) >= 2 else -inv0 * acc
                if np.any(term != 0):
                    out.coeffs[beta] = term
        return out

    def sqrt_spd(self) -> "Jet":
        """Symmetric square root of a symmetric-positive-definite matrix jet.

        Solves S s_beta + s_beta S = rhs_beta order by order via the
        eigendecomposition of the constant term.
        """
        c0 = self.coefficient((0,) * self.nvars)
        w, V = np.linalg.eigh((c0 + c0.T.conj()) / 2)
        if np.min(w) <= 0:
            raise ValueError("matrix jet is not positive definite at the base point")
        sw = np.sqrt(w)
        S0 = (V * sw) @ V.conj().T
        denom = sw[:, None] + sw[None, :]
        out = Jet.constant(S0, self.nvars, self.order)
        for total in range(1, self.order + 1):
            for beta in _compositions(self.nvars, total):
                acc = np.zeros(self.shape, dtype=c0.dtype)
                for b1, v1 in out.coeffs.items():
                    t1 = sum(b1)
                    if t1 == 0 or t1 == total:
                        continue
                    if any(x > y for x, y in zip(b1, beta)):
                        continue
                    b2 = tuple(y - x for x, y in zip(b1, beta))
                    v2 = out.coeffs.get(b2)
                    if v2 is not None:
                        acc = acc + v1 @ v2
                rhs = self.coeffs.get(beta, np.zeros(self.shape)) - acc
                term = V @ ((V.conj().T @ rhs @ V) / denom) @ V.conj().T
                if np.any(term != 0):
                    out.coeffs[beta] = term
        return out

    def sqrt_scalar(self) -> "Jet":
        """Square root of a scalar jet with positive constant term."""
        lifted = self.map_values(lambda v: np.asarray(v).reshape(1, 1))
        return lifted.sqrt_spd().map_values(lambda v: v.reshape(()))

    def int_power(self, p: int) -> "Jet":
        """Integer power of a scalar jet (negative p via inverse)."""
        base = self if p >= 0 else self.inv()
        k = abs(p)
        out = Jet.constant(np.asarray(1.0), self.nvars, self.order)
        for _ in range(k):
            out = out * base
        return out

    def expm(self) -> "Jet":
        """exp of a jet with zero constant term (nilpotent in the jet algebra)."""
        z = (0,) * self.nvars
        if z in self.coeffs and np.any(np.abs(self.coeffs[z]) > 1e-14):
            raise ValueError("expm requires a zero constant term")
        n = self.shape[0] if self.shape else 1
        ident = np.eye(n) if self.shape else np.asarray(1.0)
        out = Jet.constant(ident, self.nvars, self.order)
        power = Jet.constant(ident, self.nvars, self.order)
        for k in range(1, self.order + 1):
            power = power * self
            if power.is_zero:
                break
            out = out + power.scale(1.0 / math.factorial(k))
        return out

    # -- structure ops -------------------------------------------------------

    def map_values(self, fn) -> "Jet":
        newcoeffs = {b: _as_array(fn(v)) for b, v in self.coeffs.items()}
        shape = next(iter(newcoeffs.values())).shape if newcoeffs else self.shape
        return Jet(self.nvars, self.order, shape, newcoeffs)

    def transpose(self) -> "Jet":
        return self.map_values(lambda v: v.T)

    def adjoint(self) -> "Jet":
        return self.map_values(lambda v: v.conj().T)

    def conjugate(self) -> "Jet":
        return self.map_values(np.conj)

    def entry(self, *idx) -> "Jet":
        out = self.map_values(lambda v: v[idx])
        out.shape = np.zeros(self.shape)[idx].shape
        return out

    def promote(self, nvars: int, var_map: Iterable[int]) -> "Jet":
        """Re-embed into a jet over nvars variables via variable index mapping."""
        vm = tuple(var_map)
        out = Jet(nvars, self.order, self.shape)
        for b, v in self.coeffs.items():
            nb = [0] * nvars
            for old_i, e in enumerate(b):
                nb[vm[old_i]] += e
            out.coeffs[tuple(nb)] = v.copy()
        return out

    def restrict(self, i: int) -> "Jet":
        """Set variable i to zero (keep only coefficients with beta_i = 0)."""
        return Jet(self.nvars, self.order, self.shape,
                   {b: v for b, v in self.coeffs.items() if b[i] == 0})

    def shift_exponent(self, i: int, k: int) -> "Jet":
        """Multiply by x_i^k (coefficients above the truncation order drop)."""
        out = Jet(self.nvars, self.order, self.shape)
        for b, v in self.coeffs.items():
            if sum(b) + k > self.order:
                continue
            nb = list(b)
            nb[i] += k
            out.coeffs[tuple(nb)] = v.copy()
        return out

    def eval(self, point) -> np.ndarray:
        pt = np.asarray(point, dtype=float)
        acc = np.zeros(self.shape, dtype=np.complex128)
        for b, v in self.coeffs.items():
            mono = 1.0
            for x, e in zip(pt, b):
                if e:
                    mono *= x ** e
            acc = acc + mono * v
        return acc

    def _compat(self, other: "Jet"):
        if not isinstance(other, Jet):
            raise TypeError("expected a Jet")
        if self.nvars != other.nvars:
            raise ValueError("jets over different variable counts")

    def __repr__(self) -> str:
        return (f"Jet(nvars={self.nvars}, order={self.order}, shape={self.shape}, "
                f"terms={len(self.coeffs)})")
