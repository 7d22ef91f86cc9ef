import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from riemfourier.errors import OrderTooHigh, PlanMismatch, TypeMismatch
from riemfourier.geodesics import CutoffWindow, make_window
from riemfourier.geometry import orthonormal_frame_at, zoo
from riemfourier.inversion import (
    chi_independence_check,
    fiber_fourier,
    invert,
    invert_at,
    make_plan,
    pairwise_sum,
    windowed_pullback,
)
from riemfourier.operators import (
    covariant_derivative_along,
    direct_apply,
    generic_third_order,
    identity,
    laplace_beltrami,
)
from riemfourier.properties import check_frame_independence, check_inversion_linearity
from riemfourier.sections import constant, cos_theta, gaussian_bump, plane_wave, random_trig, zero
from riemfourier.transport import TensorType


def setup(chart, x, cap, N, profile="standard"):
    x = chart.check(x)
    w = make_window(chart, x, cap, within_chart=True, profile=profile)
    return x, w, make_plan(chart, x, w, N)


# plan

@pytest.mark.parametrize("N", [8, 32, 64, 128])
def test_plan_conjugate_grids(N):
    c = zoo("sphere2")
    _, _, plan = setup(c, [1.0, 1.0], 0.6, N)
    assert_allclose(plan.h * plan.dlam * N, 1.0, rtol=1e-15)
    assert_allclose(plan.cutoff, N * plan.dlam / 2)
    axis = plan.xi_nodes[:, 0, 0]
    assert_allclose(axis[0], -plan.half_width)
    assert axis[N // 2] == 0.0


def test_plan_lambda_band():
    c = zoo("euclidean", n=2)
    _, _, plan = setup(c, [0.0, 0.0], 1.0, 8)
    lam, weights, idx = plan.lambda_band()
    assert lam.shape == (81, 2)
    assert_allclose(np.abs(lam).max(), plan.cutoff)
    # corners of the closed band carry a quarter weight, edges a half
    assert_allclose(weights.reshape(9, 9)[0, 0], 0.25 * plan.dlam**2)
    assert_allclose(weights.reshape(9, 9)[0, 4], 0.5 * plan.dlam**2)
    assert_allclose(weights.sum(), (8 * plan.dlam) ** 2)
    # +cutoff and -cutoff read the same periodic entry
    assert idx.reshape(9, 9)[0, 4] == idx.reshape(9, 9)[8, 4]


def test_plan_mismatch():
    c = zoo("euclidean", n=2)
    x, w, plan = setup(c, [0.0, 0.0], 1.0, 16)
    with pytest.raises(PlanMismatch):
        windowed_pullback(c, constant(c), x, CutoffWindow(0.5), plan)
    with pytest.raises(PlanMismatch):
        windowed_pullback(c, constant(c), np.array([0.1, 0.0]), w, plan)
    wp = windowed_pullback(c, constant(c), x, w, plan)
    other = make_plan(c, x, w, 32)
    with pytest.raises(PlanMismatch):
        fiber_fourier(wp, other)


def test_plan_odd_N():
    c = zoo("euclidean", n=2)
    with pytest.raises(ValueError):
        make_plan(c, np.zeros(2), CutoffWindow(1.0), 33)


# windowed pullback

def test_pullback_center_exact(sphere):
    u = random_trig(sphere, 1, 1, seed=9)
    x, w, plan = setup(sphere, [1.1, 2.0], 0.6, 32)
    wp = windowed_pullback(sphere, u, x, w, plan, steps=32)
    assert np.array_equal(wp.values[16, 16], u(x))


def test_pullback_constant_is_window():
    c = zoo("euclidean", n=2)
    x, w, plan = setup(c, [0.3, 0.3], 0.8, 32)
    wp = windowed_pullback(c, constant(c), x, w, plan, steps=16)
    expected = w(np.linalg.norm(plan.xi_nodes, axis=-1))
    assert np.array_equal(wp.values.real, expected)
    assert np.all(wp.values.imag == 0)


def test_pullback_sphere_closed_form(sphere):
    x, w, plan = setup(sphere, [np.pi / 2, 0.5], 0.6, 32)
    wp = windowed_pullback(sphere, cos_theta(sphere), x, w, plan, steps=256)
    xi = plan.xi_nodes.reshape(-1, 2)
    weights = w(np.linalg.norm(xi, axis=-1))
    for k in np.flatnonzero(weights > 0)[::7]:
        end = sphere.oracle.exp(x, plan.frame.frame @ xi[k])
        assert abs(wp.values.reshape(-1)[k] - np.cos(end[0]) * weights[k]) < 1e-8


def test_pullback_support():
    c = zoo("flat_torus")
    x, w, plan = setup(c, [0.5, 0.5], 1.0, 32)
    wp = windowed_pullback(c, plane_wave(c, [1, 1]), x, w, plan, steps=8)
    outside = np.linalg.norm(plan.xi_nodes, axis=-1) >= 2 * w.epsilon
    assert np.all(wp.values[outside] == 0)


# Fourier transform

def test_fourier_zero():
    c = zoo("euclidean", n=2)
    x, w, plan = setup(c, [0.0, 0.0], 1.0, 16)
    wp = windowed_pullback(c, zero(c), x, w, plan)
    assert np.all(fiber_fourier(wp, plan) == 0)


def test_fourier_gaussian_oracle():
    c = zoo("euclidean", n=1)
    sigma = 0.1
    x, w, plan = setup(c, [0.2], 1.0, 128)
    wp = windowed_pullback(c, gaussian_bump(c, [0.2], sigma), x, w, plan, steps=8)
    uhat = fiber_fourier(wp, plan)
    lam = plan.offsets * plan.dlam
    exact = sigma * np.sqrt(2 * np.pi) * np.exp(-2 * np.pi**2 * sigma**2 * lam**2)
    assert np.max(np.abs(uhat - exact)) < 1e-9


def test_parseval(sphere):
    u = random_trig(sphere, 1, 0, seed=4)
    x, w, plan = setup(sphere, [1.3, 0.2], 0.6, 32)
    wp = windowed_pullback(sphere, u, x, w, plan, steps=32)
    uhat = fiber_fourier(wp, plan)
    lhs = plan.h**2 * np.sum(np.abs(wp.values) ** 2)
    rhs = plan.dlam**2 * np.sum(np.abs(uhat) ** 2)
    assert_allclose(lhs, rhs, rtol=1e-10)


# inversion

def test_invert_flat_identity():
    c = zoo("euclidean", n=2)
    u = gaussian_bump(c, [0.1, 0.2], 0.5)
    x, w, plan = setup(c, [0.3, 0.1], 1.0, 64)
    val = invert(c, identity(2), u, x, w, plan, steps=16)
    assert abs(val.comps - u(x)) < 1e-9


def test_invert_identity_tensor(sphere):
    # Id only reads the xi = 0 node, where the pullback is exact
    u = random_trig(sphere, 1, 1, seed=3)
    x, w, plan = setup(sphere, [1.0, 4.0], 0.6, 16)
    val = invert(sphere, identity(2, u.ttype), u, x, w, plan, steps=16)
    assert_allclose(val.comps, u(x), atol=1e-13)


def test_invert_torus_first_order():
    c = zoo("flat_torus", periods=(1, 1))
    u = plane_wave(c, [1.0, 0.0])
    A = covariant_derivative_along(2, [1.0, 0.0])
    # the pullback is even in xi_1 here, so the odd symbol integrates to zero
    assert abs(invert_at(c, A, u, [0.25, 0.5], N=64, steps=64).comps) < 1e-12
    assert abs(invert_at(c, A, u, [0.0, 0.0], N=64, steps=64).comps - 2 * np.pi) / (2 * np.pi) < 1e-4


def test_invert_sphere_laplacian_example(sphere):
    val = invert_at(sphere, laplace_beltrami(sphere), cos_theta(sphere), [np.pi / 3, 1.0],
                    N=64, steps=256, epsilon_cap=0.6)
    assert abs(val.comps + 1.0) < 1e-3


def test_invert_matches_direct_first_order(chart, rng):
    # the first-order formula against the first-order branch of direct_apply
    from riemfourier.properties import random_unit_vector, sample_point
    x = sample_point(chart, rng)
    u = random_trig(chart, 0, 1, seed=21)
    A = covariant_derivative_along(2, random_unit_vector(chart, x, rng), u.ttype)
    inv = invert_at(chart, A, u, x, N=64, steps=128, epsilon_cap=0.6).comps
    direct = direct_apply(chart, A, u, x).comps
    assert np.max(np.abs(inv - direct)) < 1e-3 * max(1.0, np.max(np.abs(direct)))


def test_invert_refuses_order_three(sphere):
    A = generic_third_order(2, ([1, 0], [0, 1], [0, 1]))
    with pytest.raises(OrderTooHigh):
        invert_at(sphere, A, cos_theta(sphere), [1.0, 1.0], N=16)


def test_invert_type_mismatch(sphere):
    with pytest.raises(TypeMismatch):
        invert_at(sphere, identity(2, TensorType(1, 0)), cos_theta(sphere), [1.0, 1.0], N=16)


def test_zero_section_short_circuit(sphere):
    def broken(x):
        raise AssertionError("no geodesics should be integrated")

    chart = dataclasses.replace(sphere, christoffel_fn=broken)
    x, w, plan = setup(sphere, [1.0, 1.0], 0.6, 16)
    val = invert(chart, laplace_beltrami(sphere, TensorType(1, 0)), zero(sphere, 1, 0), x, w, plan)
    assert np.all(val.comps == 0) and val.comps.shape == (2,)


def test_spectral_convergence_flat():
    # well-resolved Gaussian inside the plateau of the window
    c = zoo("euclidean", n=2)
    u = gaussian_bump(c, [0.05, -0.03], 0.1)
    x = np.array([0.0, 0.0])
    A = laplace_beltrami(c)
    r2 = 0.05**2 + 0.03**2
    exact = (r2 / 0.1**4 - 2 / 0.1**2) * np.exp(-r2 / (2 * 0.1**2))
    errs = [abs(invert_at(c, A, u, x, N=N, steps=8, epsilon_cap=1.0).comps - exact) for N in (64, 128)]
    assert errs[1] < errs[0] / 1e4
    assert errs[1] < 1e-8 * abs(exact)


def test_linearity(chart, rng):
    assert max(check_inversion_linearity(chart, rng, samples=2)) < 1e-10


def test_frame_independence_grid_symmetries(chart, rng):
    assert max(check_frame_independence(chart, rng, samples=2)) < 1e-10


def test_frame_independence_random_rotation_flat(rng):
    # generic rotations move the grid; with a resolved integrand the result does not move
    c = zoo("euclidean", n=2)
    u = gaussian_bump(c, [0.05, -0.03], 0.1)
    x, w, plan = setup(c, [0.0, 0.0], 1.0, 128)
    A = laplace_beltrami(c) + covariant_derivative_along(2, [0.3, -0.4])
    base = invert(c, A, u, x, w, plan, steps=8).comps
    for _ in range(3):
        q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
        turned = dataclasses.replace(plan, frame=plan.frame.rotated(q))
        assert abs(invert(c, A, u, x, w, turned, steps=8).comps - base) < 1e-10 * abs(base)


def test_chi_independence_flat():
    c = zoo("euclidean", n=2)
    u = gaussian_bump(c, [0.1, 0.0], 0.3)
    x = np.array([0.0, 0.0])
    r = chi_independence_check(c, identity(2), u, x, (CutoffWindow(0.5), CutoffWindow(1.0)), N=64, steps=8)
    assert r < 1e-9


def test_chi_independence_sphere(sphere):
    x = np.array([np.pi / 2, 1.0])
    windows = (CutoffWindow(0.4), CutoffWindow(0.7, "quadratic"))
    r = chi_independence_check(sphere, laplace_beltrami(sphere), cos_theta(sphere), x, windows, N=64, steps=256)
    assert r < 1e-3


def test_chi_independence_identical(sphere):
    w = CutoffWindow(0.5)
    assert chi_independence_check(sphere, laplace_beltrami(sphere), cos_theta(sphere), [1.5, 1.0], (w, w), N=16) == 0.0


# summation

@settings(max_examples=50)
@given(st.lists(st.floats(-1e6, 1e6), min_size=0, max_size=300))
def test_pairwise_sum_close_to_fsum(values):
    import math
    a = np.array(values)
    assert abs(pairwise_sum(a) - math.fsum(values)) <= 1e-9 * max(1.0, np.abs(a).sum())


def test_pairwise_sum_order_fixed(rng):
    a = rng.normal(size=(1001, 2)) + 1j * rng.normal(size=(1001, 2))
    assert pairwise_sum(a).tobytes() == pairwise_sum(a.copy()).tobytes()
