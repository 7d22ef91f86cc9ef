"""Chart-based Riemannian manifolds.

A :class:`ManifoldChart` bundles the metric, Christoffel symbols and
injectivity radius of a manifold in one coordinate chart.  Every field
function is vectorised: it takes points of shape ``(..., n)`` and returns
arrays with the same leading shape.

The zoo (:func:`zoo`) provides manifolds with closed-form geometry:

>>> chart = zoo("sphere2", radius=1.0)
>>> metric_at(chart, [np.pi / 2, 0.0])
array([[1., 0.],
       [0., 1.]])
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NotSPD, OutOfChart, UnknownManifold

__all__ = [
    "ManifoldChart",
    "OrthonormalFrame",
    "TangentVector",
    "CotangentVector",
    "metric_at",
    "inverse_metric_at",
    "christoffel_at",
    "christoffel_from_metric",
    "orthonormal_frame_at",
    "chart_distance",
    "with_christoffel_source",
    "zoo",
    "euclidean",
    "flat_torus",
    "sphere2",
    "poincare_disk",
    "surface_of_revolution",
]

DEFAULT_CHRISTOFFEL_STEP = 1e-4


@dataclass(frozen=True)
class ManifoldChart:
    """A Riemannian manifold restricted to one coordinate chart.

    ``lower``/``upper`` bound the non-periodic axes; an axis with a period is
    wrapped into ``[0, period)`` and its bounds are ignored.  ``domain_fn``
    adds a non-box constraint (e.g. the open unit disk).  ``chart_radius_fn``
    gives a radius r such that every geodesic of length < r started at x
    stays inside the chart; it defaults to +inf.
    """

    name: str
    dim: int
    metric_fn: Callable[[np.ndarray], np.ndarray]
    inj_radius_fn: Callable[[np.ndarray], np.ndarray]
    lower: tuple
    upper: tuple
    periods: tuple
    christoffel_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    christoffel_source: str = "closed_form"
    fd_step: float = DEFAULT_CHRISTOFFEL_STEP
    domain_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    chart_radius_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    flat: bool = False
    oracle: Optional[object] = field(default=None, compare=False)
    params: dict = field(default_factory=dict, compare=False)

    def wrap(self, x):
        """Wrap periodic axes into their fundamental interval."""
        x = np.array(x, dtype=float)
        for axis, period in enumerate(self.periods):
            if period is not None:
                x[..., axis] = np.mod(x[..., axis], period)
        return x

    def contains(self, x):
        """Boolean mask of points inside the chart (after wrapping)."""
        x = np.asarray(x, dtype=float)
        ok = np.all(np.isfinite(x), axis=-1)
        for axis, period in enumerate(self.periods):
            if period is None:
                ok &= (x[..., axis] >= self.lower[axis]) & (x[..., axis] <= self.upper[axis])
        if self.domain_fn is not None:
            ok &= self.domain_fn(x)
        return ok

    def check(self, x):
        """Validate and wrap ``x``; raises :class:`OutOfChart`."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise OutOfChart(f"{self.name}: expected points of dimension {self.dim}, got shape {x.shape}")
        if not np.all(self.contains(x)):
            raise OutOfChart(f"{self.name}: point(s) outside chart bounds: {x if x.ndim == 1 else '...'}")
        return self.wrap(x)

    def inj_radius_at(self, x):
        return self.inj_radius_fn(self.check(x))

    def chart_radius_at(self, x):
        x = self.check(x)
        if self.chart_radius_fn is None:
            return np.full(x.shape[:-1], np.inf)
        return self.chart_radius_fn(x)


@dataclass(frozen=True)
class OrthonormalFrame:
    """Columns of ``frame`` are g-orthonormal tangent vectors at ``base``;
    columns of ``coframe`` are the dual covectors, so ``coframe.T @ frame = I``."""

    base: np.ndarray
    frame: np.ndarray
    coframe: np.ndarray

    def rotated(self, q):
        """Frame ``F Q`` for an orthogonal matrix ``Q`` (coframe follows)."""
        q = np.asarray(q, dtype=float)
        return OrthonormalFrame(self.base, self.frame @ q, self.coframe @ q)


@dataclass(frozen=True)
class TangentVector:
    base: np.ndarray
    comps: np.ndarray


@dataclass(frozen=True)
class CotangentVector:
    base: np.ndarray
    comps: np.ndarray


def metric_at(chart, x):
    """Metric components ``g_ij`` at ``x``.

    Raises :class:`NotSPD` if the metric fails a Cholesky factorisation,
    which signals a broken chart definition rather than a user error.
    """
    x = chart.check(x)
    g = chart.metric_fn(x)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotSPD(f"{chart.name}: metric not positive definite") from exc
    return g


def inverse_metric_at(chart, x):
    return np.linalg.inv(metric_at(chart, x))


def christoffel_from_metric(metric_fn, x, step=DEFAULT_CHRISTOFFEL_STEP):
    """Christoffel symbols ``G[..., k, i, j]`` by central differences of the metric."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    dg = np.empty(x.shape[:-1] + (n, n, n))
    for axis in range(n):
        e = np.zeros(n)
        e[axis] = step
        dg[..., axis, :, :] = (metric_fn(x + e) - metric_fn(x - e)) / (2 * step)
    ginv = np.linalg.inv(metric_fn(x))
    # dg[l, i, j] = d_l g_ij;  lowered[l, i, j] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    lowered = 0.5 * (
        np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg
    )
    return np.einsum("...kl,...lij->...kij", ginv, lowered)


def christoffel_at(chart, x):
    """Christoffel symbols ``G[..., k, i, j]`` (upper index first)."""
    x = chart.check(x)
    return _christoffel(chart, x)


def _christoffel(chart, x):
    # unchecked fast path used inside integrators
    if chart.christoffel_source == "closed_form" and chart.christoffel_fn is not None:
        return chart.christoffel_fn(x)
    return christoffel_from_metric(chart.metric_fn, x, chart.fd_step)


def with_christoffel_source(chart, source, step=DEFAULT_CHRISTOFFEL_STEP):
    if source not in ("closed_form", "finite_difference"):
        raise ValueError(f"unknown christoffel source {source!r}")
    if source == "closed_form" and chart.christoffel_fn is None:
        raise ValueError(f"{chart.name} has no closed-form Christoffel symbols")
    return dataclasses.replace(chart, christoffel_source=source, fd_step=step)


def orthonormal_frame_at(chart, x):
    """Deterministic g-orthonormal frame from the Cholesky factor ``g = L L^T``.

    The frame is ``L^{-T}`` and the coframe is ``L``.
    """
    x = chart.check(x)
    if x.ndim != 1:
        raise ValueError("orthonormal_frame_at takes a single point")
    g = metric_at(chart, x)
    lower = np.linalg.cholesky(g)
    frame = np.linalg.inv(lower).T
    return OrthonormalFrame(base=x, frame=frame, coframe=lower)


def chart_distance(chart, a, b):
    """Coordinate distance with minimal-image wrapping on periodic axes."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    for axis, period in enumerate(chart.periods):
        if period is not None:
            d[..., axis] = (d[..., axis] + period / 2) % period - period / 2
    return np.linalg.norm(d, axis=-1)


# ---------------------------------------------------------------------------
# zoo

def _const_metric(n):
    def metric(x):
        return np.broadcast_to(np.eye(n), np.shape(x)[:-1] + (n, n)).copy()
    return metric


def _zero_christoffel(n):
    def christoffel(x):
        return np.zeros(np.shape(x)[:-1] + (n, n, n))
    return christoffel


def euclidean(n=2):
    return ManifoldChart(
        name=f"euclidean({n})",
        dim=n,
        metric_fn=_const_metric(n),
        christoffel_fn=_zero_christoffel(n),
        inj_radius_fn=lambda x: np.full(np.shape(x)[:-1], np.inf),
        lower=(-np.inf,) * n,
        upper=(np.inf,) * n,
        periods=(None,) * n,
        flat=True,
        params={"n": n},
    )


def flat_torus(periods=(1.0, 1.0)):
    periods = tuple(float(p) for p in periods)
    n = len(periods)
    inj = min(periods) / 2
    return ManifoldChart(
        name=f"flat_torus{periods}",
        dim=n,
        metric_fn=_const_metric(n),
        christoffel_fn=_zero_christoffel(n),
        inj_radius_fn=lambda x: np.full(np.shape(x)[:-1], inj),
        lower=(0.0,) * n,
        upper=periods,
        periods=periods,
        flat=True,
        params={"periods": list(periods)},
    )


class SphereOracle:
    """Closed-form exponential map and parallel transport on the round sphere,
    computed through the embedding in R^3."""

    def __init__(self, radius):
        self.radius = radius

    @staticmethod
    def _basis(x):
        th, ph = x[..., 0], x[..., 1]
        p = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], -1)
        e_th = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], -1)
        e_ph = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], -1)
        return p, e_th, e_ph

    def embed_vector(self, x, v):
        """Chart components at x -> vector in R^3 (unit-sphere scale)."""
        x, v = np.asarray(x, float), np.asarray(v, float)
        _, e_th, e_ph = self._basis(x)
        return v[..., :1] * e_th + (v[..., 1:2] * np.sin(x[..., :1])) * e_ph

    def chart_vector(self, x, w):
        x = np.asarray(x, float)
        _, e_th, e_ph = self._basis(x)
        a = np.sum(w * e_th, -1)
        b = np.sum(w * e_ph, -1) / np.sin(x[..., 0])
        return np.stack([a, b], -1)

    @staticmethod
    def chart_point(p):
        th = np.arccos(np.clip(p[..., 2], -1.0, 1.0))
        ph = np.mod(np.arctan2(p[..., 1], p[..., 0]), 2 * np.pi)
        return np.stack([th, ph], -1)

    def exp(self, x, v):
        p, _, _ = self._basis(np.asarray(x, float))
        w = self.embed_vector(x, v)
        s = np.linalg.norm(w, axis=-1, keepdims=True)
        safe = np.where(s > 0, s, 1.0)
        q = p * np.cos(s) + w / safe * np.sin(s)
        return self.chart_point(q)

    def transport(self, x, v, w):
        """Parallel transport of the chart vector ``w`` from x to exp(x, v)."""
        p, _, _ = self._basis(np.asarray(x, float))
        vv = self.embed_vector(x, v)
        ww = self.embed_vector(x, w)
        s = np.linalg.norm(vv, axis=-1, keepdims=True)
        safe = np.where(s > 0, s, 1.0)
        t = vv / safe
        par = np.sum(ww * t, -1, keepdims=True)
        moved = ww - par * t + par * (t * np.cos(s) - p * np.sin(s))
        end = self.exp(x, v)
        return self.chart_vector(end, moved)

    def log(self, x, y):
        """Chart velocity of the minimising geodesic from x to y."""
        p, _, _ = self._basis(np.asarray(x, float))
        q, _, _ = self._basis(np.asarray(y, float))
        c = np.clip(np.sum(p * q, -1, keepdims=True), -1.0, 1.0)
        ang = np.arccos(c)
        d = q - c * p
        nd = np.linalg.norm(d, axis=-1, keepdims=True)
        w = np.where(nd > 0, d / np.where(nd > 0, nd, 1.0), 0.0) * ang
        return self.chart_vector(x, w)


def sphere2(radius=1.0, pole_margin=0.02):
    """Round sphere of the given radius in the (theta, phi) chart.

    theta is confined to ``[pole_margin, pi - pole_margin]``; phi is periodic.
    Experiments keep base points in ``[0.2, pi - 0.2]``.
    """
    r2 = float(radius) ** 2

    def metric(x):
        th = x[..., 0]
        g = np.zeros(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = r2
        g[..., 1, 1] = r2 * np.sin(th) ** 2
        return g

    def christoffel(x):
        th = x[..., 0]
        G = np.zeros(x.shape[:-1] + (2, 2, 2))
        G[..., 0, 1, 1] = -np.sin(th) * np.cos(th)
        G[..., 1, 0, 1] = G[..., 1, 1, 0] = np.cos(th) / np.sin(th)
        return G

    lo, hi = pole_margin, np.pi - pole_margin
    inj = np.pi * radius
    return ManifoldChart(
        name=f"sphere2({radius})",
        dim=2,
        metric_fn=metric,
        christoffel_fn=christoffel,
        inj_radius_fn=lambda x: np.full(np.shape(x)[:-1], inj),
        lower=(lo, 0.0),
        upper=(hi, 2 * np.pi),
        periods=(None, 2 * np.pi),
        chart_radius_fn=lambda x: radius * np.minimum(x[..., 0] - lo, hi - x[..., 0]),
        oracle=SphereOracle(radius),
        params={"radius": radius, "pole_margin": pole_margin},
    )


class PoincareOracle:
    """Closed-form exp and transport on the Poincare disk via Moebius maps."""

    @staticmethod
    def _z(x):
        return x[..., 0] + 1j * x[..., 1]

    @staticmethod
    def _xy(z):
        return np.stack([z.real, z.imag], -1)

    def _pieces(self, x, v):
        a = self._z(np.asarray(x, float))
        w = self._z(np.asarray(v, float)) / (1 - abs(a) ** 2)  # pulled back to the origin
        s = abs(w)
        y0 = np.where(s > 0, np.tanh(s) * w / np.where(s > 0, s, 1.0), 0)
        return a, y0

    def exp(self, x, v):
        a, y0 = self._pieces(x, v)
        return self._xy((y0 + a) / (1 + np.conj(a) * y0))

    def transport(self, x, v, w):
        a, y0 = self._pieces(x, v)
        wz = self._z(np.asarray(w, float)) / (1 - abs(a) ** 2)
        moved = wz * (1 - abs(y0) ** 2)  # radial transport from the origin
        deriv = (1 - abs(a) ** 2) / (1 + np.conj(a) * y0) ** 2
        return self._xy(moved * deriv)


def poincare_disk(max_radius=0.9):
    """Hyperbolic plane in the Poincare disk model, ``g = 4/(1-r^2)^2 I``.

    The chart is the Euclidean disk of radius ``max_radius``.
    """

    def metric(x):
        r2 = np.sum(x * x, -1)
        c = 4.0 / (1.0 - r2) ** 2
        return c[..., None, None] * np.eye(2)

    def christoffel(x):
        # conformal metric e^{2f} I with df_k = 2 x_k / (1 - r^2)
        r2 = np.sum(x * x, -1)
        df = 2.0 * x / (1.0 - r2)[..., None]
        eye = np.eye(2)
        return (
            np.einsum("ki,...j->...kij", eye, df)
            + np.einsum("kj,...i->...kij", eye, df)
            - np.einsum("ij,...k->...kij", eye, df)
        )

    rmax = float(max_radius)
    return ManifoldChart(
        name="poincare_disk",
        dim=2,
        metric_fn=metric,
        christoffel_fn=christoffel,
        inj_radius_fn=lambda x: np.full(np.shape(x)[:-1], np.inf),
        lower=(-rmax, -rmax),
        upper=(rmax, rmax),
        periods=(None, None),
        domain_fn=lambda x: np.sum(x * x, -1) <= rmax**2,
        chart_radius_fn=lambda x: 2 * np.arctanh(rmax) - 2 * np.arctanh(np.sqrt(np.sum(x * x, -1))),
        oracle=PoincareOracle(),
        params={"max_radius": rmax},
    )


_PROFILES = {
    # name: (rho, rho', rho'', conservative injectivity radius)
    "catenoid": (np.cosh, np.sinh, np.cosh, np.pi),
    "cylinder": (np.ones_like, np.zeros_like, np.zeros_like, np.pi),
}


def surface_of_revolution(profile="catenoid", z_max=1.0):
    """Surface ``(rho(z) cos phi, rho(z) sin phi, z)`` in the (z, phi) chart.

    Profiles: ``catenoid`` (rho = cosh z, curvature <= 0 so the radius pi of
    its waist loop bounds the injectivity radius from below) and ``cylinder``
    (rho = 1).
    """
    try:
        rho, drho, ddrho, inj = _PROFILES[profile]
    except KeyError:
        raise UnknownManifold(f"unknown surface profile {profile!r}") from None

    def metric(x):
        z = x[..., 0]
        g = np.zeros(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0 + drho(z) ** 2
        g[..., 1, 1] = rho(z) ** 2
        return g

    def christoffel(x):
        z = x[..., 0]
        r, dr, ddr = rho(z), drho(z), ddrho(z)
        G = np.zeros(x.shape[:-1] + (2, 2, 2))
        G[..., 0, 0, 0] = dr * ddr / (1.0 + dr**2)
        G[..., 0, 1, 1] = -r * dr / (1.0 + dr**2)
        G[..., 1, 0, 1] = G[..., 1, 1, 0] = dr / r
        return G

    zm = float(z_max)
    return ManifoldChart(
        name=f"surface_of_revolution({profile})",
        dim=2,
        metric_fn=metric,
        christoffel_fn=christoffel,
        inj_radius_fn=lambda x: np.full(np.shape(x)[:-1], inj),
        lower=(-zm, 0.0),
        upper=(zm, 2 * np.pi),
        periods=(None, 2 * np.pi),
        # g_zz >= 1, so a geodesic of length r moves z by at most r
        chart_radius_fn=lambda x: np.minimum(x[..., 0] + zm, zm - x[..., 0]),
        flat=(profile == "cylinder"),
        params={"profile": profile, "z_max": zm},
    )


_ZOO = {
    "euclidean": euclidean,
    "flat_torus": flat_torus,
    "sphere2": sphere2,
    "poincare_disk": poincare_disk,
    "surface_of_revolution": surface_of_revolution,
}


def zoo(name, **params):
    """Build a zoo manifold by name (see module docstring)."""
    try:
        builder = _ZOO[name]
    except KeyError:
        raise UnknownManifold(f"unknown manifold {name!r}; known: {sorted(_ZOO)}") from None
    return builder(**params)
