"""Seeded randomized checks of the geometric and inversion invariants.

Each check takes a chart and a numpy ``Generator`` and returns the list of
residuals of its samples; :data:`CHECKS` pairs every check with its
tolerance.  ``run_property_suite`` in :mod:`riemfourier.experiments` drives
them over the manifold zoo.
"""
from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from .geodesics import exp_map, geodesic_flow_compose_check, make_window
from .geometry import _christoffel, metric_at, orthonormal_frame_at
from .inversion import invert, make_plan
from .operators import (
    TensorSection,
    covariant_derivative_along,
    laplace_beltrami,
    nabla,
    symmetrized_covariant_derivative,
    symmetrized_derivative_via_exp,
)
from .sections import random_trig
from .transport import FiberValue, TensorType, apply_transport, fiber_norm, loop_transport, transport_along

__all__ = [
    "CHECKS",
    "sample_point",
    "random_unit_vector",
    "corrupt_christoffel",
    "octant_vertices",
    "holonomy_angle",
    "check_semigroup",
    "check_symmetrized_derivative",
    "check_transport_isometry",
    "check_metric_compatibility",
    "check_holonomy",
    "check_inversion_linearity",
    "check_frame_independence",
]

ISOMETRY_TYPES = (TensorType(0, 0), TensorType(1, 0), TensorType(0, 1), TensorType(1, 1), TensorType(0, 2))
MIN_ROOM = 0.4


def _room(chart, x):
    return float(min(chart.inj_radius_at(x), chart.chart_radius_at(x), 2.0))


def sample_point(chart, rng, min_room=MIN_ROOM):
    """Random chart point with at least ``min_room`` of geodesic room."""
    lo, hi = [], []
    for a, p in enumerate(chart.periods):
        if p is not None:
            lo.append(0.0), hi.append(p)
        else:
            lo.append(max(chart.lower[a], -1.0)), hi.append(min(chart.upper[a], 1.0))
    for _ in range(10_000):
        x = rng.uniform(lo, hi)
        if chart.contains(x) and _room(chart, x) >= min_room:
            return x
    raise RuntimeError(f"{chart.name}: could not sample a point with room {min_room}")


def random_unit_vector(chart, x, rng):
    """Tangent vector at x with unit g-norm and uniformly random direction."""
    d = rng.normal(size=chart.dim)
    return orthonormal_frame_at(chart, x).frame @ (d / np.linalg.norm(d))


def corrupt_christoffel(chart, delta=0.05):
    """Chart whose connection is perturbed away from the Levi-Civita one.

    The perturbation keeps the symbols symmetric, so geodesics stay well
    defined; only metric compatibility is broken.
    """
    def christoffel(x):
        G = np.array(_christoffel(chart, x), dtype=float)
        G[..., 0, 0, 1] += delta
        G[..., 0, 1, 0] += delta
        return G

    return dataclasses.replace(chart, christoffel_fn=christoffel, christoffel_source="closed_form",
                               name=f"{chart.name}[corrupt]")


def check_semigroup(chart, rng, samples=50, steps=512):
    out = []
    for _ in range(samples):
        x = sample_point(chart, rng)
        length = rng.uniform(0.1, 0.45) * _room(chart, x)
        eta = length * random_unit_vector(chart, x, rng)
        s = rng.uniform(0.1, 0.9)
        t = rng.uniform(0.05, 1.0 - s)
        out.append(geodesic_flow_compose_check(chart, x, eta, t, s, steps))
    return out


def check_symmetrized_derivative(chart, rng, samples=20, orders=(1, 2)):
    """Derivatives through the exponential map against stencil derivatives."""
    out = []
    types = ((0, 0), (1, 0), (0, 1))
    for _ in range(samples):
        x = sample_point(chart, rng)
        a, b = types[rng.integers(len(types))]
        u = random_trig(chart, a, b, seed=int(rng.integers(2**31)))
        for p in orders:
            etas = [random_unit_vector(chart, x, rng) for _ in range(p)]
            via_exp = symmetrized_derivative_via_exp(chart, u, x, etas).comps
            stencil = symmetrized_covariant_derivative(chart, u, x, etas).comps
            out.append(float(np.max(np.abs(via_exp - stencil)) / max(1.0, np.max(np.abs(stencil)))))
    return out


def check_transport_isometry(chart, rng, samples=20, steps=256):
    """Relative change of fiber norms under transport, over all tensor types."""
    out = []
    for _ in range(samples):
        x = sample_point(chart, rng)
        xi = rng.uniform(0.2, 0.5) * _room(chart, x) * random_unit_vector(chart, x, rng)
        path = exp_map(chart, x, xi, steps)
        op = transport_along(chart, path)
        g_end, g_start = metric_at(chart, path.endpoint), metric_at(chart, x)
        worst = 0.0
        for ttype in ISOMETRY_TYPES:
            shape = ttype.shape(chart.dim)
            v = FiberValue(ttype, rng.normal(size=shape) + 1j * rng.normal(size=shape))
            before = fiber_norm(g_end, v)
            after = fiber_norm(g_start, apply_transport(op, v))
            worst = max(worst, abs(after - before) / before)
        out.append(worst)
    return out


def check_metric_compatibility(chart, rng, samples=10):
    """``nabla g = 0`` at random points."""
    g = TensorSection(TensorType(0, 2), lambda y: metric_at(chart, y), chart.dim, name="metric")
    dg = nabla(chart, g)
    out = []
    for _ in range(samples):
        x = sample_point(chart, rng)
        out.append(float(np.max(np.abs(dg(x))) / max(1.0, np.max(np.abs(g(x))))))
    return out


def octant_vertices(chart):
    """Chart coordinates of a right-angled geodesic triangle on the sphere,
    tilted so that it stays away from the poles."""
    pts = []
    for k in range(3):
        c, s = np.cos(2 * np.pi * k / 3), np.sin(2 * np.pi * k / 3)
        pts.append(chart.oracle.chart_point(np.array([np.sqrt(2 / 3) * c, np.sqrt(2 / 3) * s, np.sqrt(1 / 3)])))
    return pts


def holonomy_angle(chart, vertices, steps=256):
    """Rotation angle of the loop transport, measured in an orthonormal frame."""
    op = loop_transport(chart, vertices, steps)
    f = orthonormal_frame_at(chart, vertices[0])
    m = f.coframe.T @ op.vector_matrix @ f.frame
    return float(np.arctan2(m[1, 0], m[0, 0]))


def check_holonomy(chart, rng, samples=1, steps=256):
    """Holonomy of the octant triangle on the sphere.

    The rotation equals the enclosed curvature, ``K * area = pi/2`` for
    every radius.  Other manifolds contribute no samples.
    """
    if chart.oracle is None or not hasattr(chart.oracle, "chart_point"):
        return []
    return [abs(holonomy_angle(chart, octant_vertices(chart), steps) - np.pi / 2) for _ in range(samples)]


def _inversion_setup(chart, rng, N, steps):
    x = sample_point(chart, rng)
    window = make_window(chart, x, 0.6, within_chart=True)
    a, b = ((0, 0), (1, 0))[rng.integers(2)]
    u = random_trig(chart, a, b, seed=int(rng.integers(2**31)))
    x = chart.check(x)
    return x, window, u, make_plan(chart, x, window, N)


def check_inversion_linearity(chart, rng, samples=3, N=32, steps=64):
    out = []
    for _ in range(samples):
        x, window, u, plan = _inversion_setup(chart, rng, N, steps)
        A = laplace_beltrami(chart, u.ttype)
        B = covariant_derivative_along(chart.dim, random_unit_vector(chart, x, rng), u.ttype)
        alpha, beta = rng.normal(size=2) + 1j * rng.normal(size=2)
        lhs = invert(chart, alpha * A + beta * B, u, x, window, plan, steps).comps
        rhs = (alpha * invert(chart, A, u, x, window, plan, steps).comps
               + beta * invert(chart, B, u, x, window, plan, steps).comps)
        out.append(float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(rhs)))))
    return out


def _signed_permutations(n):
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1.0, -1.0), repeat=n):
            yield np.eye(n)[:, perm] * np.array(signs)


def check_frame_independence(chart, rng, samples=3, N=32, steps=64):
    """Inversion under a random grid symmetry of the orthonormal frame."""
    qs = list(_signed_permutations(chart.dim))
    out = []
    for _ in range(samples):
        x, window, u, plan = _inversion_setup(chart, rng, N, steps)
        A = laplace_beltrami(chart, u.ttype)
        q = qs[rng.integers(len(qs))]
        turned = dataclasses.replace(plan, frame=plan.frame.rotated(q))
        a = invert(chart, A, u, x, window, plan, steps).comps
        b = invert(chart, A, u, x, window, turned, steps).comps
        out.append(float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))))
    return out


# name -> (function, tolerance, default sample count)
CHECKS = {
    "semigroup": (check_semigroup, 1e-8, 50),
    "symmetrized_derivative": (check_symmetrized_derivative, 1e-4, 20),
    "transport_isometry": (check_transport_isometry, 1e-8, 20),
    "metric_compatibility": (check_metric_compatibility, 1e-6, 10),
    "holonomy": (check_holonomy, 1e-3, 1),
    "inversion_linearity": (check_inversion_linearity, 1e-10, 3),
    "frame_independence": (check_frame_independence, 1e-10, 3),
}
