"""Parallel transport of tensor fibers along radial geodesics.

Fibers are complex arrays with ``a`` contravariant axes followed by ``b``
covariant axes, each of length n, holding chart-frame components.
"""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, SingularTransport
from .geodesics import exp_map, integrate_geodesics

__all__ = [
    "TensorType",
    "FiberValue",
    "TransportOperator",
    "transport_along",
    "apply_transport",
    "act_on_fibers",
    "compose",
    "reverse_path",
    "transport_field_pullback",
    "fiber_norm",
    "SCALAR",
    "pullback_batch",
    "loop_transport",
]


@dataclass(frozen=True)
class TensorType:
    contravariant: int = 0
    covariant: int = 0

    @property
    def rank(self):
        return self.contravariant + self.covariant

    def shape(self, n):
        return (n,) * self.rank

    def fiber_dim(self, n):
        return n**self.rank

    def kinds(self):
        """Axis kinds in storage order: 'u' contravariant, 'd' covariant."""
        return "u" * self.contravariant + "d" * self.covariant


SCALAR = TensorType(0, 0)


@dataclass(frozen=True)
class FiberValue:
    ttype: TensorType
    comps: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.comps, dtype=complex)
        if comps.ndim != self.ttype.rank or len(set(comps.shape)) > 1:
            raise ShapeMismatch(f"components of shape {comps.shape} do not match {self.ttype}")
        object.__setattr__(self, "comps", comps)


@dataclass(frozen=True)
class TransportOperator:
    """Transport from ``source`` (the geodesic endpoint) back to ``target``.

    ``vector_matrix`` maps tangent components at source to those at target;
    ``covector_matrix`` is its inverse transpose.
    """

    source: np.ndarray
    target: np.ndarray
    vector_matrix: np.ndarray
    covector_matrix: np.ndarray

    def inverse(self):
        return TransportOperator(
            source=self.target,
            target=self.source,
            vector_matrix=np.linalg.inv(self.vector_matrix),
            covector_matrix=self.vector_matrix.T.copy(),
        )


def _from_forward(P, start, end):
    """Operator end -> start from the forward (start -> end) frame matrix."""
    if not np.all(np.isfinite(P)) or np.linalg.cond(P) > 1e12:
        raise SingularTransport("transported basis is numerically singular")
    back = np.linalg.inv(P)
    return TransportOperator(source=end, target=start, vector_matrix=back, covector_matrix=P.T.copy())


def transport_along(chart, path):
    """Parallel transport from the end of ``path`` back to its start.

    A basis is transported outward with RK4 on the same parameter grid as
    the path, then inverted.
    """
    end, _, P, _ = integrate_geodesics(
        chart, path.start, path.velocities[0], path.step_count, t_final=path.t_final, transport=True
    )
    return _from_forward(P, path.start, end)


def compose(first, second):
    """Transport by ``first`` then by ``second`` (second.source == first.target)."""
    return TransportOperator(
        source=first.source,
        target=second.target,
        vector_matrix=second.vector_matrix @ first.vector_matrix,
        covector_matrix=second.covector_matrix @ first.covector_matrix,
    )


def reverse_path(chart, path):
    """Geodesic retracing ``path`` from its endpoint."""
    return exp_map(chart, path.endpoint, -path.velocities[-1], path.step_count, t_final=path.t_final)


def act_on_fibers(vec, cov, comps, ttype):
    """Apply per-axis matrices to fibers.

    ``vec``/``cov`` are ``(n, n)`` or batched ``(M, n, n)``; ``comps`` is
    ``fiber`` or ``(M,) + fiber`` accordingly.
    """
    comps = np.asarray(comps)
    if ttype.rank == 0:
        return comps.copy()
    batched = np.ndim(vec) == 3
    letters = string.ascii_letters
    axes_in = letters[: ttype.rank]
    axes_out = letters[ttype.rank: 2 * ttype.rank]
    b = "Z" if batched else ""
    operands, subs = [], []
    for kind, i, o in zip(ttype.kinds(), axes_in, axes_out):
        operands.append(vec if kind == "u" else cov)
        subs.append(b + o + i)
    spec = ",".join(subs + [b + axes_in]) + "->" + b + axes_out
    return np.einsum(spec, *operands, comps, optimize=True)


def apply_transport(op, v):
    """Transport the fiber ``v`` (based at ``op.source``) to ``op.target``."""
    if not isinstance(v, FiberValue):
        raise ShapeMismatch("apply_transport expects a FiberValue")
    n = op.vector_matrix.shape[0]
    if v.comps.shape != v.ttype.shape(n):
        raise ShapeMismatch(f"fiber of shape {v.comps.shape} is not a {v.ttype} fiber in dimension {n}")
    return FiberValue(v.ttype, act_on_fibers(op.vector_matrix, op.covector_matrix, v.comps, v.ttype))


def pullback_batch(chart, u, x, V, steps):
    """``tau_x u(exp_x(V[m]))`` for a batch of tangent vectors ``V`` at x.

    Scalar sections skip the transport integration entirely.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    need = u.ttype.rank > 0
    end, _, P, _ = integrate_geodesics(chart, x, V, steps, transport=need)
    vals = np.asarray(u(end), dtype=complex)
    if not need:
        return vals
    if not np.all(np.isfinite(P)):
        raise SingularTransport("transport integration blew up")
    back = np.linalg.inv(P)
    return act_on_fibers(back, np.swapaxes(P, -1, -2), vals, u.ttype)


def transport_field_pullback(chart, u, x, xi, steps=256):
    """``tau_x u(exp_x(xi))``: evaluate ``u`` at the geodesic endpoint and
    transport the value back to ``x``."""
    path = exp_map(chart, x, xi, steps)
    op = transport_along(chart, path)
    return apply_transport(op, FiberValue(u.ttype, u(path.endpoint)))


def loop_transport(chart, vertices, steps=256):
    """Transport once around the geodesic polygon through ``vertices``.

    Legs use the chart oracle's logarithm for their initial velocities.
    Returns the operator from ``vertices[0]`` (after the loop) back to itself.
    """
    if chart.oracle is None or not hasattr(chart.oracle, "log"):
        raise ValueError(f"{chart.name} has no logarithm oracle")
    pts = [chart.check(v) for v in vertices]
    total = None
    for a, b in zip(pts, pts[1:] + pts[:1]):
        path = exp_map(chart, a, chart.oracle.log(a, b), steps)
        # transport_along maps end -> start; the loop needs start -> end
        leg = transport_along(chart, path).inverse()
        total = leg if total is None else compose(total, leg)
    return total


def fiber_norm(g, v):
    """Hermitian norm of a fiber under the metric ``g`` of its base point."""
    ginv = np.linalg.inv(g)
    lowered = act_on_fibers(g, ginv, v.comps, v.ttype)
    return float(np.sqrt(np.abs(np.sum(lowered * np.conj(v.comps)))))
