"""Ready-made sections for tests and experiment configs.

Every builder takes the chart first so that configs can build sections by
name: ``build_section(chart, "plane_wave", k=[1, 0])``.
"""
from __future__ import annotations

import numpy as np

from .operators import TensorSection
from .transport import TensorType

__all__ = [
    "constant",
    "zero",
    "linear",
    "cos_theta",
    "plane_wave",
    "gaussian_bump",
    "rotation_field",
    "random_trig",
    "build_section",
    "SECTIONS",
]

SCALAR = TensorType()


def constant(chart, value=1.0, contravariant=0, covariant=0):
    ttype = TensorType(contravariant, covariant)
    value = np.broadcast_to(np.asarray(value, dtype=complex), ttype.shape(chart.dim)).copy()
    n = chart.dim

    def fn(x):
        return np.broadcast_to(value, np.shape(x)[:-1] + value.shape).copy()

    def partials(x):
        return np.zeros(np.shape(x)[:-1] + value.shape + (n,), dtype=complex)

    return TensorSection(ttype, fn, n, partials=partials, name="constant")


def zero(chart, contravariant=0, covariant=0):
    sec = constant(chart, 0.0, contravariant, covariant)
    return TensorSection(sec.ttype, sec.fn, sec.dim, sec.partials, is_zero=True, name="zero")


def linear(chart, coeffs, offset=0.0):
    """Scalar ``offset + coeffs . x``."""
    c = np.asarray(coeffs, dtype=float)

    def fn(x):
        return offset + np.asarray(x) @ c

    def partials(x):
        return np.broadcast_to(c, np.shape(x)).astype(complex)

    return TensorSection(SCALAR, fn, chart.dim, partials=partials, name="linear")


def cos_theta(chart):
    """``cos(x_0)``; on the sphere this is the l = 1 zonal harmonic."""

    def fn(x):
        return np.cos(x[..., 0])

    def partials(x):
        d = np.zeros(np.shape(x), dtype=complex)
        d[..., 0] = -np.sin(x[..., 0])
        return d

    return TensorSection(SCALAR, fn, chart.dim, partials=partials, name="cos_theta")


def plane_wave(chart, k, phase=0.0, amplitude=1.0):
    """Scalar ``amplitude * sin(2 pi k . x + phase)``."""
    k = np.asarray(k, dtype=float)

    def fn(x):
        return amplitude * np.sin(2 * np.pi * (np.asarray(x) @ k) + phase)

    def partials(x):
        c = amplitude * np.cos(2 * np.pi * (np.asarray(x) @ k) + phase)
        return (2 * np.pi * c[..., None] * k).astype(complex)

    return TensorSection(SCALAR, fn, chart.dim, partials=partials, name="plane_wave")


def gaussian_bump(chart, center, sigma, amplitude=1.0):
    """Scalar Gaussian; periodic axes use the minimal-image displacement."""
    c = np.asarray(center, dtype=float)
    periods = chart.periods

    def displacement(x):
        d = np.asarray(x, dtype=float) - c
        for axis, period in enumerate(periods):
            if period is not None:
                d[..., axis] = (d[..., axis] + period / 2) % period - period / 2
        return d

    def fn(x):
        d = displacement(x)
        return amplitude * np.exp(-np.sum(d * d, -1) / (2 * sigma**2))

    def partials(x):
        d = displacement(x)
        f = amplitude * np.exp(-np.sum(d * d, -1) / (2 * sigma**2))
        return (-f[..., None] * d / sigma**2).astype(complex)

    return TensorSection(SCALAR, fn, chart.dim, partials=partials, name="gaussian_bump")


def rotation_field(chart, axis=(0.0, 0.0, 1.0)):
    """Velocity field of the rotation of the round sphere about ``axis``."""
    if chart.oracle is None or not hasattr(chart.oracle, "chart_vector"):
        raise ValueError("rotation_field needs the sphere chart")
    w = np.asarray(axis, dtype=float)
    oracle = chart.oracle

    def fn(x):
        x = np.asarray(x, dtype=float)
        p, _, _ = oracle._basis(x)
        return oracle.chart_vector(x, np.cross(w, p))

    return TensorSection(TensorType(1, 0), fn, chart.dim, name="rotation_field")


def random_trig(chart, contravariant=0, covariant=0, seed=0, terms=3, max_freq=1):
    """Complex trigonometric section with seeded coefficients.

    Frequencies are integers per unit of ``2 pi / period`` on periodic axes
    (``2 pi`` elsewhere), so the section is smooth on tori and on the
    sphere's phi axis.
    """
    rng = np.random.default_rng(seed)
    n = chart.dim
    ttype = TensorType(contravariant, covariant)
    fshape = ttype.shape(n)
    scale = np.array([2 * np.pi / p if p is not None else 1.0 for p in chart.periods])
    ks = rng.integers(-max_freq, max_freq + 1, size=(terms, n)) * scale
    phases = rng.uniform(0, 2 * np.pi, size=terms)
    amps = rng.normal(size=(terms,) + fshape) + 1j * rng.normal(size=(terms,) + fshape)
    amps /= terms

    def fn(x):
        arg = np.asarray(x, dtype=float) @ ks.T + phases  # (..., terms)
        return np.tensordot(np.cos(arg), amps, axes=([-1], [0]))

    flat_amps = amps.reshape(terms, -1)

    def partials(x):
        x = np.asarray(x, dtype=float)
        slope = -np.sin(x @ ks.T + phases)[..., None] * ks  # (..., terms, n)
        d = np.einsum("...tj,tf->...fj", slope, flat_amps)
        return d.reshape(x.shape[:-1] + fshape + (n,))

    return TensorSection(ttype, fn, n, partials=partials, name=f"random_trig({seed})")


SECTIONS = {
    "constant": constant,
    "zero": zero,
    "linear": linear,
    "cos_theta": cos_theta,
    "plane_wave": plane_wave,
    "gaussian_bump": gaussian_bump,
    "rotation_field": rotation_field,
    "random_trig": random_trig,
}


def build_section(chart, name, **params):
    try:
        builder = SECTIONS[name]
    except KeyError:
        raise KeyError(f"unknown section {name!r}; known: {sorted(SECTIONS)}") from None
    return builder(chart, **params)
