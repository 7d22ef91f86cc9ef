"""Tensor sections, differential operators of order <= 2 and their symbols.

Conventions
-----------
* ``nabla^m u`` stores the m derivative axes after the fiber axes, the
  innermost derivative first: ``D[..., d1, d2]`` with ``d2`` the outer one,
  so ``nabla^2_{X,Y} u = D[..., j, k] Y^j X^k``.
* A coefficient ``A_m`` (m = p - r derivatives) is an array
  ``(n,)*m + out_fiber + in_fiber``.  Its symbol axes pair with the
  derivative axes outermost first, so ``A_2 = X (x) Y`` acts as
  ``nabla^2_{X,Y}``.  The pairing is a plain contraction; no 1/m! factor.
"""
from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BaseMismatch, OutOfChart, TypeMismatch
from .geometry import CotangentVector, TangentVector, _christoffel, inverse_metric_at
from .transport import FiberValue, TensorType, pullback_batch

__all__ = [
    "TensorSection",
    "DifferentialOperator",
    "nabla",
    "covariant_derivative",
    "second_covariant_derivative",
    "covariant_derivative_power",
    "symmetrized_covariant_derivative",
    "symmetrized_derivative_via_exp",
    "radial_derivative_via_exp",
    "curvature_commutator",
    "direct_apply",
    "total_symbol",
    "identity",
    "covariant_derivative_along",
    "laplace_beltrami",
    "generic_third_order",
    "build_operator",
    "OPERATORS",
    "H_FD",
    "H_EXP",
]

H_FD = 1e-5
H_EXP = 1e-3
_LETTERS = string.ascii_letters


@dataclass(frozen=True)
class TensorSection:
    """A smooth section given by a vectorised callback.

    ``fn`` maps points ``(..., n)`` to fibers ``(...,) + (n,)*rank``.  The
    optional ``partials`` callback returns first partial derivatives with the
    derivative axis last; when present it replaces finite differences at the
    innermost level of covariant derivatives.
    """

    ttype: TensorType
    fn: Callable
    dim: int
    partials: Optional[Callable] = None
    is_zero: bool = False
    name: str = ""

    @property
    def derivative_hint(self):
        return "closed_form_available" if self.partials is not None else "numeric_only"

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=complex)


# ---------------------------------------------------------------------------
# covariant derivatives by stencils

def _connection_term(G, T, ttype):
    """Christoffel part of nabla T: the new derivative axis goes last."""
    rank = ttype.rank
    idx = _LETTERS[:rank]
    n = G.shape[-1]
    out = np.zeros(T.shape + (n,), dtype=complex)
    for s, kind in enumerate(ttype.kinds()):
        t_in = idx[:s] + "y" + idx[s + 1:]
        if kind == "u":
            out += np.einsum(f"...{idx[s]}zy,...{t_in}->...{idx}z", G, T)
        else:
            out -= np.einsum(f"...yz{idx[s]},...{t_in}->...{idx}z", G, T)
    return out


_STENCILS = {
    2: ((1, 0.5), (-1, -0.5)),
    4: ((2, -1 / 12), (1, 8 / 12), (-1, -8 / 12), (-2, 1 / 12)),
}


def _partials_fd(chart, f, y, h, stencil):
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    weights = _STENCILS[stencil]
    offsets = np.array([[w[0] * h * e for w in weights] for e in np.eye(n)])  # (n, k, n)
    pts = y[..., None, None, :] + offsets
    if not np.all(chart.contains(pts)):
        raise OutOfChart(f"{chart.name}: finite-difference stencil leaves the chart")
    vals = np.asarray(f(chart.wrap(pts)), dtype=complex)  # (..., n, k) + fiber
    coef = np.array([w[1] for w in weights]) / h
    d = np.moveaxis(vals, y.ndim, -1) @ coef  # (..., n) + fiber
    return np.moveaxis(d, y.ndim - 1, -1)


def nabla(chart, u, h=H_FD, stencil=2):
    """The covariant derivative of ``u`` as a new section of type (a, b + 1)."""
    ttype = u.ttype

    def fn(y):
        y = np.asarray(y, dtype=float)
        if u.partials is not None:
            d = np.asarray(u.partials(y), dtype=complex)
        else:
            d = _partials_fd(chart, u, y, h, stencil)
        return d + _connection_term(_christoffel(chart, y), u(y), ttype)

    return TensorSection(
        TensorType(ttype.contravariant, ttype.covariant + 1), fn, u.dim, name=f"nabla({u.name})"
    )


def covariant_derivative_power(chart, u, x, p, h=H_FD, stencil=2):
    """``nabla^p u(x)`` by nested stencils."""
    x = chart.check(x)
    field_ = u
    for _ in range(p):
        field_ = nabla(chart, field_, h, stencil)
    return FiberValue(field_.ttype, field_(x))


def covariant_derivative(chart, u, x, h=H_FD, stencil=2):
    return covariant_derivative_power(chart, u, x, 1, h, stencil)


def second_covariant_derivative(chart, u, x, h=H_FD, stencil=2):
    return covariant_derivative_power(chart, u, x, 2, h, stencil)


def _contract_directions(D, etas):
    """Contract derivative axes of D with vectors; ``etas[0]`` is the outermost."""
    out = D
    for eta in etas:
        out = np.tensordot(out, np.asarray(eta, dtype=float), axes=([out.ndim - 1], [0]))
    return out


def symmetrized_covariant_derivative(chart, u, x, etas, h=H_FD, stencil=2):
    """``(1/p!) sum_sigma nabla^p_{eta_sigma} u(x)`` from stencil derivatives."""
    p = len(etas)
    D = covariant_derivative_power(chart, u, x, p, h, stencil).comps
    total = sum(_contract_directions(D, [etas[i] for i in perm])
                for perm in itertools.permutations(range(p)))
    return FiberValue(u.ttype, total / math.factorial(p))


# ---------------------------------------------------------------------------
# derivatives through the exponential map

def _vec(eta):
    return np.asarray(eta.comps if isinstance(eta, TangentVector) else eta, dtype=float)


def symmetrized_derivative_via_exp(chart, u, x, etas, fd_step=H_EXP, steps=64):
    """Mixed t-derivative of ``tau_x u(exp_x(t_1 eta_1 + ... + t_p eta_p))`` at 0.

    Central differences in each ``t_i`` (p <= 2).
    """
    x = chart.check(x)
    etas = [_vec(e) for e in etas]
    p = len(etas)
    if p == 0:
        return FiberValue(u.ttype, u(x))
    if p > 2:
        raise ValueError("symmetrized_derivative_via_exp supports p <= 2")
    signs = list(itertools.product((1, -1), repeat=p))
    V = np.array([sum(s * fd_step * e for s, e in zip(sig, etas)) for sig in signs])
    vals = pullback_batch(chart, u, x, V, steps)
    weights = np.array([np.prod(sig) for sig in signs], dtype=float)
    value = np.tensordot(weights, vals, axes=1) / (2 * fd_step) ** p
    return FiberValue(u.ttype, value)


def radial_derivative_via_exp(chart, u, x, eta, p, fd_step=H_EXP, steps=64):
    """``d^p/dt^p tau_x u(exp_x(t eta))`` at t = 0 (p in {1, 2})."""
    x = chart.check(x)
    eta = _vec(eta)
    if p == 1:
        vals = pullback_batch(chart, u, x, np.array([fd_step * eta, -fd_step * eta]), steps)
        return FiberValue(u.ttype, (vals[0] - vals[1]) / (2 * fd_step))
    if p == 2:
        vals = pullback_batch(chart, u, x, np.array([fd_step * eta, 0 * eta, -fd_step * eta]), steps)
        return FiberValue(u.ttype, (vals[0] - 2 * vals[1] + vals[2]) / fd_step**2)
    raise ValueError("radial_derivative_via_exp supports p in {1, 2}")


def curvature_commutator(chart, u, x, eta1, eta2, h=H_FD, stencil=2):
    """``nabla^2_{eta1,eta2} u - nabla^2_{eta2,eta1} u`` for a vector field u."""
    if u.ttype != TensorType(1, 0):
        raise TypeMismatch("curvature_commutator expects a vector field")
    D = second_covariant_derivative(chart, u, x, h, stencil).comps
    e1, e2 = _vec(eta1), _vec(eta2)
    a = _contract_directions(D, [e1, e2])
    b = _contract_directions(D, [e2, e1])
    return FiberValue(u.ttype, a - b)


# ---------------------------------------------------------------------------
# operators

def _symmetrize(arr, m):
    if m < 2:
        return arr
    perms = list(itertools.permutations(range(m)))
    rest = tuple(range(m, arr.ndim))
    return sum(np.transpose(arr, perm + rest) for perm in perms) / len(perms)


@dataclass(frozen=True)
class DifferentialOperator:
    """``A = sum_m A_m nabla^m`` with ``coeffs[m]`` a callable x -> array.

    Coefficients are symmetrised in their symbol axes unless the operator
    was built with ``symmetric=False`` (only used for the order-3 demo).
    """

    ttype_in: TensorType
    ttype_out: TensorType
    dim: int
    coeffs: dict = field(default_factory=dict)
    symmetric: bool = True
    name: str = ""

    @classmethod
    def build(cls, ttype_in, ttype_out, dim, coeffs, symmetric=True, name=""):
        wrapped = {}
        for m, c in coeffs.items():
            if symmetric and m >= 2:
                wrapped[m] = (lambda c_, m_: lambda x: _symmetrize(np.asarray(c_(x)), m_))(c, m)
            else:
                wrapped[m] = c
        return cls(ttype_in, ttype_out, dim, wrapped, symmetric, name)

    @property
    def order(self):
        return max(self.coeffs) if self.coeffs else 0

    def coefficient(self, m, x):
        n = self.dim
        shape = (n,) * m + self.ttype_out.shape(n) + self.ttype_in.shape(n)
        if m not in self.coeffs:
            return np.zeros(shape, dtype=complex)
        arr = np.asarray(self.coeffs[m](np.asarray(x, dtype=float)), dtype=complex)
        if arr.shape != shape:
            raise TypeMismatch(f"coefficient A_{m} has shape {arr.shape}, expected {shape}")
        return arr

    def _check_compatible(self, other):
        if (self.ttype_in, self.ttype_out, self.dim) != (other.ttype_in, other.ttype_out, other.dim):
            raise TypeMismatch("operators act between different bundles")

    def __add__(self, other):
        self._check_compatible(other)
        coeffs = {}
        for m in set(self.coeffs) | set(other.coeffs):
            coeffs[m] = (lambda m_: lambda x: self.coefficient(m_, x) + other.coefficient(m_, x))(m)
        return DifferentialOperator(self.ttype_in, self.ttype_out, self.dim, coeffs,
                                    self.symmetric and other.symmetric, f"({self.name} + {other.name})")

    def __mul__(self, alpha):
        coeffs = {m: (lambda m_: lambda x: alpha * self.coefficient(m_, x))(m) for m in self.coeffs}
        return DifferentialOperator(self.ttype_in, self.ttype_out, self.dim, coeffs, self.symmetric,
                                    f"{alpha}*{self.name}")

    __rmul__ = __mul__


def _fiber_identity(n, ttype):
    d = ttype.fiber_dim(n)
    return np.eye(d).reshape(ttype.shape(n) * 2)


def identity(dim, ttype=TensorType()):
    ident = _fiber_identity(dim, ttype)
    return DifferentialOperator.build(ttype, ttype, dim, {0: lambda x: ident}, name="identity")


def covariant_derivative_along(dim, eta, ttype=TensorType()):
    """``nabla_eta``; ``eta`` is a constant chart vector or a callable of x."""
    ident = _fiber_identity(dim, ttype)
    eta_fn = eta if callable(eta) else (lambda x, e=np.asarray(eta, dtype=float): e)
    return DifferentialOperator.build(
        ttype, ttype, dim, {1: lambda x: np.multiply.outer(eta_fn(x), ident)}, name="nabla"
    )


def laplace_beltrami(chart, ttype=TensorType()):
    """Rough Laplacian ``g^{ij} nabla^2_{ij}`` (Laplace-Beltrami on scalars)."""
    ident = _fiber_identity(chart.dim, ttype)
    return DifferentialOperator.build(
        ttype, ttype, chart.dim,
        {2: lambda x: np.multiply.outer(inverse_metric_at(chart, x), ident)},
        name="laplace_beltrami",
    )


def generic_third_order(dim, etas, ttype=TensorType()):
    """``nabla^3_{eta1, eta2, eta3}`` with its coefficient left unsymmetrised."""
    ident = _fiber_identity(dim, ttype)
    e1, e2, e3 = (np.asarray(e, dtype=float) for e in etas)
    coeff = np.multiply.outer(np.multiply.outer(np.multiply.outer(e1, e2), e3), ident)
    return DifferentialOperator.build(ttype, ttype, dim, {3: lambda x: coeff}, symmetric=False,
                                      name="nabla3")


def direct_apply(chart, A, u, x, h=H_FD, stencil=2):
    """``sum_m A_m . nabla^m u(x)`` with stencil covariant derivatives."""
    if u.ttype != A.ttype_in or u.dim != A.dim:
        raise TypeMismatch(f"operator expects {A.ttype_in} sections, got {u.ttype}")
    x = chart.check(x)
    n = A.dim
    rin, rout = A.ttype_in.rank, A.ttype_out.rank
    result = np.zeros(A.ttype_out.shape(n), dtype=complex)
    field_ = u
    for m in range(A.order + 1):
        if m > 0:
            field_ = nabla(chart, field_, h, stencil)
        if m not in A.coeffs:
            continue
        D = field_(x)
        C = A.coefficient(m, x)
        sym = _LETTERS[:m]
        out = _LETTERS[m: m + rout]
        inn = _LETTERS[m + rout: m + rout + rin]
        spec = f"{sym}{out}{inn},{inn}{sym[::-1]}->{out}"
        result = result + np.einsum(spec, C, D)
    return FiberValue(A.ttype_out, result)


def total_symbol(A, lam, x=None):
    """``a(lambda) = sum_m (2 pi i)^m lambda^{(x)m} -| A_m`` at base point x.

    ``lam`` is a :class:`CotangentVector` or chart covector components of
    shape ``(n,)`` or ``(K, n)``; the result has shape ``[(K,)] + out + in``.
    """
    if isinstance(lam, CotangentVector):
        if x is not None and not np.allclose(lam.base, x):
            raise BaseMismatch("covector is not based at the evaluation point")
        x, lam = lam.base, lam.comps
    if x is None:
        raise BaseMismatch("total_symbol needs the base point of lambda")
    lam = np.asarray(lam, dtype=float)
    batched = lam.ndim == 2
    lam_b = lam if batched else lam[None]
    n = A.dim
    out_shape = (lam_b.shape[0],) + A.ttype_out.shape(n) + A.ttype_in.shape(n)
    total = np.zeros(out_shape, dtype=complex)
    for m in A.coeffs:
        T = A.coefficient(m, x)
        if m == 0:
            total += T[None]
            continue
        T = np.einsum("s...,Ks->K...", T, lam_b)
        for _ in range(m - 1):
            T = np.einsum("Ks...,Ks->K...", T, lam_b)
        total += (2j * np.pi) ** m * T
    return total if batched else total[0]


def build_operator(chart, name, ttype=TensorType(), **params):
    """Operator by registry name (used by experiment configs)."""
    try:
        builder = OPERATORS[name]
    except KeyError:
        raise KeyError(f"unknown operator {name!r}; known: {sorted(OPERATORS)}") from None
    return builder(chart, ttype, **params)


OPERATORS = {
    "identity": lambda chart, ttype: identity(chart.dim, ttype),
    "nabla": lambda chart, ttype, eta: covariant_derivative_along(chart.dim, eta, ttype),
    "laplace_beltrami": lambda chart, ttype: laplace_beltrami(chart, ttype),
    "nabla3": lambda chart, ttype, etas: generic_third_order(chart.dim, etas, ttype),
}
