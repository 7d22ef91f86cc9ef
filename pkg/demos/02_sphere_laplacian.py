# The Laplace-Beltrami operator on the unit sphere
#
# cos(theta) is a degree one spherical harmonic, so its Laplacian is
# -2 cos(theta).  The inversion sees only the pullback of cos(theta) through
# the exponential map at x, windowed well inside the injectivity radius.

# In[1]:

import numpy as np

from riemfourier import zoo
from riemfourier.geodesics import make_window
from riemfourier.inversion import invert, invert_at, make_plan
from riemfourier.operators import direct_apply, laplace_beltrami
from riemfourier.sections import cos_theta

sphere = zoo("sphere2", radius=1.0)
lap = laplace_beltrami(sphere)
u = cos_theta(sphere)


# Base points from near the north pole to near the south pole.

# In[2]:

for theta in (0.5, 1.0, 1.5, 2.0, 2.6):
    x = [theta, 1.0]
    val = invert_at(sphere, lap, u, x, N=64, steps=256, epsilon_cap=0.6).comps
    exact = -2 * np.cos(theta)
    print(f"theta={theta:.1f}  inverted {val.real:+.6f}  exact {exact:+.6f}  "
          f"rel {abs(val - exact) / abs(exact):.1e}")


# The symbol of the Laplacian is -4 pi^2 |lambda|^2 in the dual metric.  The
# same number comes out of a Christoffel-corrected finite-difference stencil.

# In[3]:

x = [1.0, 1.0]
print("stencil ", direct_apply(sphere, lap, u, x, h=1e-3, stencil=4).comps.real)


# The window only has to be admissible.  A different profile and radius give
# the same limit; a steeper window just needs more nodes to get there.

# In[4]:

xc = sphere.check(x)
for cap, profile in ((0.6, "standard"), (0.4, "quadratic")):
    w = make_window(sphere, xc, cap, within_chart=True, profile=profile)
    for N in (64, 128):
        val = invert(sphere, lap, u, xc, w, make_plan(sphere, xc, w, N), 256).comps
        print(f"eps={w.epsilon:.3f} {profile:9s} N={N:3d} {val.real:+.8f}")
