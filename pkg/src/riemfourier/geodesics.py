"""Geodesic flow, exponential map and the cutoff window.

Geodesics solve ``x'' + G(x)(x', x') = 0`` with classical fixed-step RK4 on
the parameter interval ``[0, t_final]``.  The integrator works on batches of
initial velocities at once; the single-geodesic API (:func:`exp_map`) is a
thin wrapper that also records the path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LeftChart, OutsideInjectivity, ZeroInjectivityRadius
from .geometry import TangentVector, _christoffel, chart_distance, metric_at

__all__ = [
    "GeodesicState",
    "GeodesicPath",
    "CutoffWindow",
    "smooth_step",
    "PROFILES",
    "exp_map",
    "integrate_geodesics",
    "geodesic_flow_compose_check",
    "make_window",
    "path_speeds",
]

MIN_STEPS = 8
WINDOW_SAFETY = 0.99


@dataclass(frozen=True)
class GeodesicState:
    position: np.ndarray
    velocity: np.ndarray


@dataclass(frozen=True)
class GeodesicPath:
    """Positions and velocities at ``step_count + 1`` uniform parameter values."""

    positions: np.ndarray
    velocities: np.ndarray
    t_final: float
    step_count: int

    @property
    def states(self):
        return [GeodesicState(p, v) for p, v in zip(self.positions, self.velocities)]

    @property
    def start(self):
        return self.positions[0]

    @property
    def endpoint(self):
        return self.positions[-1]

    @property
    def parameters(self):
        return np.linspace(0.0, self.t_final, self.step_count + 1)


def _rhs(chart, x, v, frame):
    G = _christoffel(chart, x)
    acc = -np.einsum("...kij,...i,...j->...k", G, v, v)
    if frame is None:
        return v, acc, None
    dframe = -np.einsum("...kij,...i,...jl->...kl", G, v, frame)
    return v, acc, dframe


def integrate_geodesics(chart, x, v, steps, t_final=1.0, transport=False, record=False):
    """RK4 integration of a batch of geodesics.

    ``x`` has shape ``(n,)`` or ``(M, n)``, ``v`` shape ``(M, n)`` (or ``(n,)``).
    With ``transport=True`` the identity frame is carried along by parallel
    transport, giving ``P`` with ``P[m] @ w`` the transport of ``w`` from x to
    the endpoint.  Returns ``(end_x, end_v, P, trajectory)`` where the
    trajectory is ``None`` unless ``record`` is set.
    Raises :class:`LeftChart` if any geodesic exits the chart.
    """
    v = np.array(v, dtype=float)
    x = np.array(np.broadcast_to(np.asarray(x, dtype=float), v.shape))
    n = x.shape[-1]
    P = np.broadcast_to(np.eye(n), v.shape[:-1] + (n, n)).copy() if transport else None
    h = t_final / steps
    traj_x, traj_v = ([x.copy()], [v.copy()]) if record else (None, None)
    for _ in range(steps):
        k1 = _rhs(chart, x, v, P)
        k2 = _rhs(chart, x + 0.5 * h * k1[0], v + 0.5 * h * k1[1],
                  None if P is None else P + 0.5 * h * k1[2])
        k3 = _rhs(chart, x + 0.5 * h * k2[0], v + 0.5 * h * k2[1],
                  None if P is None else P + 0.5 * h * k2[2])
        k4 = _rhs(chart, x + h * k3[0], v + h * k3[1],
                  None if P is None else P + h * k3[2])
        x = x + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v = v + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if P is not None:
            P = P + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not np.all(chart.contains(x)):
            raise LeftChart(f"{chart.name}: geodesic left the chart")
        if record:
            traj_x.append(x.copy())
            traj_v.append(v.copy())
    trajectory = (np.array(traj_x), np.array(traj_v)) if record else None
    return chart.wrap(x), v, P, trajectory


def _components(xi, x):
    if isinstance(xi, TangentVector):
        if not np.allclose(xi.base, x):
            raise ValueError("tangent vector is not based at x")
        return np.asarray(xi.comps, dtype=float)
    return np.asarray(xi, dtype=float)


def _norm(chart, x, v):
    g = metric_at(chart, x)
    return np.sqrt(np.einsum("...i,...ij,...j->...", v, g, v))


def exp_map(chart, x, xi, steps=256, t_final=1.0):
    """Geodesic from ``x`` with initial velocity ``xi`` on ``[0, t_final]``.

    The time-1 endpoint is ``exp_{g,x}(xi)``.
    """
    if steps < MIN_STEPS:
        raise ValueError(f"steps must be >= {MIN_STEPS}")
    x = chart.check(x)
    v = _components(xi, x)
    length = abs(t_final) * _norm(chart, x, v)
    inj = chart.inj_radius_fn(x)
    if length >= inj:
        raise OutsideInjectivity(f"|xi| = {length:.6g} >= injectivity radius {inj:.6g}")
    _, _, _, (xs, vs) = integrate_geodesics(chart, x, v, steps, t_final=t_final, record=True)
    xs = chart.wrap(xs)
    return GeodesicPath(positions=xs, velocities=vs, t_final=float(t_final), step_count=int(steps))


def path_speeds(chart, path):
    """Metric speed ``|gamma'(t)|_g`` at every recorded state."""
    return _norm(chart, path.positions, path.velocities)


def geodesic_flow_compose_check(chart, x, eta, t, s, steps=512):
    """Residual of ``exp(gamma_s, t gamma'_s) = exp(x, (t + s) eta)``.

    The first leg follows ``eta`` for parameter time ``s``; the second leg
    starts from the integrated end velocity of the first leg.
    """
    x = chart.check(x)
    eta = _components(eta, x)
    if s == 0:
        mid, mid_v = x, eta
    else:
        first = exp_map(chart, x, eta, steps, t_final=s)
        mid, mid_v = first.endpoint, first.velocities[-1]
    composed = mid if t == 0 else exp_map(chart, mid, mid_v, steps, t_final=t).endpoint
    direct = x if t + s == 0 else exp_map(chart, x, eta, steps, t_final=t + s).endpoint
    return float(chart_distance(chart, composed, direct))


# ---------------------------------------------------------------------------
# cutoff window

def _exp_inv(t):
    pos = t > 0
    return np.where(pos, np.exp(-1.0 / np.where(pos, t, 1.0)), 0.0)


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, from ``exp(-1/t)``."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    a, b = _exp_inv(s), _exp_inv(1.0 - s)
    return a / (a + b)


def _standard_profile(t):
    return 1.0 - smooth_step(np.asarray(t, dtype=float) - 1.0)


def _quadratic_profile(t):
    # same support, transition driven by t^2 instead of t
    t = np.asarray(t, dtype=float)
    return 1.0 - smooth_step((t * t - 1.0) / 3.0)


PROFILES = {"standard": _standard_profile, "quadratic": _quadratic_profile}


@dataclass(frozen=True)
class CutoffWindow:
    """Radial window ``chi(|xi|_g / epsilon)``; equal to 1 on the epsilon ball
    and 0 outside the 2 epsilon ball."""

    epsilon: float
    profile: str = "standard"

    def profile_value(self, t):
        return PROFILES[self.profile](t)

    def __call__(self, norms):
        return self.profile_value(np.asarray(norms, dtype=float) / self.epsilon)


def make_window(chart, x, epsilon_cap, within_chart=False, profile="standard", safety=WINDOW_SAFETY):
    """Cutoff window at ``x`` with ``epsilon = min(cap, safety * inj / 2)``.

    With ``within_chart`` the radius is also limited to ``safety`` times half
    the chart radius, so every geodesic of the 2 epsilon ball stays in the
    coordinate chart.
    """
    x = chart.check(x)
    inj = float(chart.inj_radius_fn(x))
    if not inj > 0:
        raise ZeroInjectivityRadius(f"{chart.name}: zero injectivity radius at {x}")
    eps = min(float(epsilon_cap), safety * inj / 2)
    if within_chart:
        eps = min(eps, safety * float(chart.chart_radius_at(x)) / 2)
        if not eps > 0:
            raise ZeroInjectivityRadius(f"{chart.name}: no room inside the chart at {x}")
    if not np.isfinite(eps):
        raise ValueError(f"{chart.name}: unbounded window radius at {x}; pass a finite epsilon_cap")
    if profile not in PROFILES:
        raise ValueError(f"unknown window profile {profile!r}")
    return CutoffWindow(epsilon=eps, profile=profile)
