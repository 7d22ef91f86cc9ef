# How the inversion error depends on N and on the geodesic step count
#
# There is no remainder term: the only errors are the lattice sum over the
# tangent space and the ODE integration.  The first decays faster than any
# power of N (in irregular jumps, following the transform of the smooth
# window); the second does not show at all for an operator of order <= 2,
# because fixed-step RK4 reproduces the exponential map to fourth order in xi.

# In[1]:

import numpy as np

from riemfourier import zoo
from riemfourier.inversion import invert_at
from riemfourier.operators import laplace_beltrami
from riemfourier.sections import cos_theta

sphere = zoo("sphere2")
lap, u = laplace_beltrami(sphere), cos_theta(sphere)
theta = 1.5
exact = -2 * np.cos(theta)


# In[2]:

prev = None
for N in (16, 32, 64, 128, 256):
    err = abs(invert_at(sphere, lap, u, [theta, 1.0], N=N, steps=16, epsilon_cap=0.6).comps - exact)
    ratio = "" if prev is None else f"  ratio {prev / err:8.1f}"
    print(f"N={N:4d}  error {err:.2e}{ratio}")
    prev = err


# The step count changes the pullback by O(|xi|^5), invisible to the symbol.

# In[3]:

for steps in (8, 32, 128):
    err = abs(invert_at(sphere, lap, u, [theta, 1.0], N=64, steps=steps, epsilon_cap=0.6).comps - exact)
    print(f"steps={steps:4d}  error {err:.6e}")
