"""Pointwise Fourier inversion of differential operators on a manifold.

For a base point x the section is pulled back to the tangent space by the
exponential map, transported to the fiber over x and cut off by a radial
window.  Its Fourier transform over ``T_x`` is weighted by the total symbol
and integrated over ``T*_x``, which reproduces ``Au(x)`` for operators of
order <= 2.

Both integrals are discretised on DFT-conjugate grids in a g-orthonormal
frame at x: the xi-grid has N nodes per axis on ``[-L, L)`` with
``L = 2 epsilon``, the lambda-grid has spacing ``1 / (2L)``.  The lambda sum
runs over the closed Nyquist band ``[-N/(4L), N/(4L)]`` with half weights on
its faces.
"""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .errors import OrderTooHigh, PlanMismatch, TypeMismatch
from .geodesics import make_window
from .geometry import OrthonormalFrame, orthonormal_frame_at
from .operators import total_symbol
from .transport import FiberValue, pullback_batch

__all__ = [
    "QuadraturePlan",
    "WindowedPullback",
    "make_plan",
    "windowed_pullback",
    "fiber_fourier",
    "invert",
    "invert_at",
    "chi_independence_check",
    "pairwise_sum",
    "DEFAULT_N",
    "DEFAULT_STEPS",
]

DEFAULT_N = 64
DEFAULT_STEPS = 256
DEFAULT_EPSILON_CAP = 1.0
CHUNK = 8192


def pairwise_sum(a):
    """Sum over axis 0 by a fixed binary tree.

    The order of additions depends only on ``len(a)``, so results are
    reproducible bit for bit.
    """
    a = np.asarray(a)
    if a.shape[0] == 0:
        return np.zeros(a.shape[1:], dtype=a.dtype)
    while a.shape[0] > 1:
        if a.shape[0] % 2:
            a = np.concatenate([a, np.zeros((1,) + a.shape[1:], dtype=a.dtype)])
        a = a[0::2] + a[1::2]
    return a[0]


@dataclass(frozen=True)
class QuadraturePlan:
    n: int
    half_width: float
    nodes_per_axis: int
    frame: OrthonormalFrame

    @property
    def h(self):
        return 2 * self.half_width / self.nodes_per_axis

    @property
    def dlam(self):
        return 1.0 / (2 * self.half_width)

    @property
    def cutoff(self):
        return self.nodes_per_axis / (4 * self.half_width)

    @property
    def offsets(self):
        N = self.nodes_per_axis
        return np.arange(N) - N // 2

    @property
    def xi_nodes(self):
        """Frame coordinates of the xi-grid, shape ``(N,)*n + (n,)``."""
        axis = self.offsets * self.h
        return np.stack(np.meshgrid(*([axis] * self.n), indexing="ij"), -1)

    def lambda_band(self):
        """Closed-band lambda nodes ``(K, n)``, quadrature weights ``(K,)`` and
        the flat indices into the N-periodic transform that supply them."""
        N = self.nodes_per_axis
        m = np.arange(-(N // 2), N // 2 + 1)
        w1 = np.ones(N + 1)
        w1[0] = w1[-1] = 0.5
        grids = np.meshgrid(*([m] * self.n), indexing="ij")
        lam = np.stack(grids, -1).reshape(-1, self.n) * self.dlam
        weights = np.ones(1)
        for _ in range(self.n):
            weights = np.multiply.outer(weights, w1)
        idx = np.ravel_multi_index(tuple((g + N // 2) % N for g in grids), (N,) * self.n).ravel()
        return lam, weights.ravel() * self.dlam**self.n, idx


def make_plan(chart, x, window, N=DEFAULT_N, frame=None):
    if N % 2:
        raise ValueError("nodes per axis must be even")
    if frame is None:
        frame = orthonormal_frame_at(chart, x)
    return QuadraturePlan(chart.dim, 2.0 * window.epsilon, int(N), frame)


@dataclass(frozen=True)
class WindowedPullback:
    """Samples of ``chi_x(xi) tau_x u(exp_x(xi))`` on the xi-grid."""

    values: np.ndarray
    plan: QuadraturePlan


def _check_plan(plan, x, window):
    if not np.isclose(plan.half_width, 2 * window.epsilon, rtol=1e-12, atol=0):
        raise PlanMismatch("plan half width must equal twice the window radius")
    if not np.allclose(plan.frame.base, x, rtol=0, atol=1e-14):
        raise PlanMismatch("plan frame is not based at x")


def windowed_pullback(chart, u, x, window, plan, steps=DEFAULT_STEPS):
    x = chart.check(x)
    _check_plan(plan, x, window)
    n, N = plan.n, plan.nodes_per_axis
    fshape = u.ttype.shape(n)
    values = np.zeros((N**n,) + fshape, dtype=complex)
    if u.is_zero:
        return WindowedPullback(values.reshape((N,) * n + fshape), plan)
    xi = plan.xi_nodes.reshape(-1, n)
    norms = np.linalg.norm(xi, axis=-1)  # frame is orthonormal
    weights = window(norms)
    active = np.flatnonzero(weights > 0)
    assert np.all(norms[active] < 2 * window.epsilon)
    V = xi[active] @ plan.frame.frame.T
    for start in range(0, len(active), CHUNK):
        sl = active[start: start + CHUNK]
        vals = pullback_batch(chart, u, x, V[start: start + CHUNK], steps)
        values[sl] = vals * weights[sl].reshape((-1,) + (1,) * len(fshape))
    return WindowedPullback(values.reshape((N,) * n + fshape), plan)


def fiber_fourier(wp, plan):
    """Rectangle-rule transform ``h^n sum_xi U(xi) exp(-2 pi i lambda . xi)``
    on the conjugate grid; entry m along an axis is ``lambda = (m - N/2) dlam``."""
    if wp.plan != plan:
        raise PlanMismatch("windowed pullback was sampled on a different plan")
    axes = tuple(range(plan.n))
    spec = np.fft.fftn(np.fft.ifftshift(wp.values, axes=axes), axes=axes)
    return np.fft.fftshift(spec, axes=axes) * plan.h**plan.n


def _invert(chart, A, u, x, window, plan, steps):
    n = plan.n
    out_shape = A.ttype_out.shape(n)
    if u.is_zero:
        return FiberValue(A.ttype_out, np.zeros(out_shape, dtype=complex))
    wp = windowed_pullback(chart, u, x, window, plan, steps)
    uhat = fiber_fourier(wp, plan)
    lam_frame, weights, idx = plan.lambda_band()
    uhat = uhat.reshape((-1,) + u.ttype.shape(n))[idx]
    lam_chart = lam_frame @ plan.frame.coframe.T
    symbol = total_symbol(A, lam_chart, x)
    rin, rout = A.ttype_in.rank, A.ttype_out.rank
    letters = string.ascii_letters
    o, i = letters[:rout], letters[rout: rout + rin]
    terms = np.einsum(f"Z{o}{i},Z{i}->Z{o}", symbol, uhat) * weights.reshape((-1,) + (1,) * rout)
    return FiberValue(A.ttype_out, pairwise_sum(terms))


def invert(chart, A, u, x, window, plan, steps=DEFAULT_STEPS):
    """``Au(x)`` from the symbol-weighted Fourier transform of the windowed,
    transported pullback of ``u``.

    Raises :class:`OrderTooHigh` for operators of order >= 3.
    """
    if A.order >= 3:
        raise OrderTooHigh(f"order {A.order} operators are outside the exact formula; "
                           "see run_breakdown_demo")
    if u.ttype != A.ttype_in:
        raise TypeMismatch(f"operator expects {A.ttype_in} sections, got {u.ttype}")
    x = chart.check(x)
    return _invert(chart, A, u, x, window, plan, steps)


def invert_at(chart, A, u, x, N=DEFAULT_N, steps=DEFAULT_STEPS, epsilon_cap=DEFAULT_EPSILON_CAP,
              within_chart=True, profile="standard", frame=None):
    """Convenience wrapper building the window and plan at ``x``.

    The window radius is ``epsilon_cap`` unless the injectivity radius (or,
    with ``within_chart``, the chart) leaves less room.
    """
    window = make_window(chart, x, epsilon_cap, within_chart=within_chart, profile=profile)
    plan = make_plan(chart, chart.check(x), window, N, frame)
    return invert(chart, A, u, x, window, plan, steps)


def chi_independence_check(chart, A, u, x, windows, N=DEFAULT_N, steps=DEFAULT_STEPS):
    """Max-norm difference between the inversions with two admissible windows."""
    w1, w2 = windows
    x = chart.check(x)
    r1 = invert(chart, A, u, x, w1, make_plan(chart, x, w1, N), steps)
    if w2 == w1:
        return 0.0
    r2 = invert(chart, A, u, x, w2, make_plan(chart, x, w2, N), steps)
    return float(np.max(np.abs(r1.comps - r2.comps), initial=0.0))
