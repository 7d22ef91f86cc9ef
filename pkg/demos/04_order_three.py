# Applying the formula to a third-order operator
#
# For nabla^3 the symbol pairs only the symmetric part of the third
# covariant derivative.  In flat space the derivatives commute and nothing is
# lost.  On the sphere the antisymmetric part is a curvature term, and the
# inverted value converges, as N grows, to the symmetrised derivative instead
# of nabla^3.  invert() refuses such operators; the unchecked routine used
# here is what run_breakdown_demo calls.

# In[1]:

import numpy as np

from riemfourier import zoo
from riemfourier.errors import OrderTooHigh
from riemfourier.geodesics import make_window
from riemfourier.inversion import _invert, invert, make_plan
from riemfourier.operators import build_operator, direct_apply
from riemfourier.sections import cos_theta, gaussian_bump

etas = [[1, 0], [0, 1], [0, 1]]


def discrepancy(chart, u, x, cap, N, steps, h_fd):
    A = build_operator(chart, "nabla3", u.ttype, etas=etas)
    x = chart.check(x)
    w = make_window(chart, x, cap, within_chart=True)
    inv = _invert(chart, A, u, x, w, make_plan(chart, x, w, N), steps).comps
    ref = direct_apply(chart, A, u, x, h=h_fd, stencil=4).comps
    return abs(inv - ref) / abs(ref), inv.real, ref.real


# In[2]:

torus = zoo("flat_torus")
bump = gaussian_bump(torus, [0.47, 0.48], 0.03)
for N in (128, 256):
    rel, inv, ref = discrepancy(torus, bump, [0.5, 0.5], 1.0, N, 64, 1e-4)
    print(f"torus  N={N}  inverted {inv:+.6e}  nabla^3 {ref:+.6e}  rel {rel:.1e}")


# In[3]:

sphere = zoo("sphere2")
for N in (64, 128, 256):
    rel, inv, ref = discrepancy(sphere, cos_theta(sphere), [np.pi / 2 - 0.3, 1.0], 0.6, N, 128, 1e-3)
    print(f"sphere N={N}  inverted {inv:+.6f}  nabla^3 {ref:+.6f}  rel {rel:.3f}")


# The checked entry point raises instead of returning the wrong number.

# In[4]:

A = build_operator(sphere, "nabla3", cos_theta(sphere).ttype, etas=etas)
x = sphere.check([1.0, 1.0])
w = make_window(sphere, x, 0.6, within_chart=True)
try:
    invert(sphere, A, cos_theta(sphere), x, w, make_plan(sphere, x, w, 32))
except OrderTooHigh as exc:
    print("OrderTooHigh:", exc)
