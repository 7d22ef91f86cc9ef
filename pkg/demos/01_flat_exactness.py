# Fourier inversion in flat space
#
# On euclidean space the exponential map is x + xi and transport is the
# identity, so the windowed pullback of u is just u(x + xi) cut off by the
# window.  Summing its transform over the lambda band gives back the value at
# xi = 0 up to rounding, for any window.

# In[1]:

import numpy as np

from riemfourier import zoo
from riemfourier.geodesics import CutoffWindow
from riemfourier.inversion import fiber_fourier, invert, make_plan, windowed_pullback
from riemfourier.operators import identity, laplace_beltrami
from riemfourier.sections import gaussian_bump

plane = zoo("euclidean", n=2)
u = gaussian_bump(plane, [0.1, 0.2], 0.5)
x = np.array([0.3, 0.1])


# The grids: N nodes per axis on [-2 eps, 2 eps) and the conjugate lambda grid.

# In[2]:

window = CutoffWindow(1.0)
plan = make_plan(plane, x, window, N=64)
print("h =", plan.h, " dlam =", plan.dlam, " h * dlam * N =", plan.h * plan.dlam * 64)


# The pullback is zero outside the 2 eps ball and equals u(x) at the centre node.

# In[3]:

wp = windowed_pullback(plane, u, x, window, plan, steps=16)
print("centre node", wp.values[32, 32].real, " u(x)", u(x))
print("nonzero nodes", np.count_nonzero(wp.values), "of", wp.values.size)


# Its transform obeys Parseval on the N x N grids.

# In[4]:

uhat = fiber_fourier(wp, plan)
print("h^2 sum |U|^2    ", plan.h**2 * np.sum(np.abs(wp.values) ** 2))
print("dlam^2 sum |U^|^2", plan.dlam**2 * np.sum(np.abs(uhat) ** 2))


# Identity: exact.  Laplacian of a Gaussian: spectral, against the closed form.

# In[5]:

print("Id   error", abs(invert(plane, identity(2), u, x, window, plan, 16).comps - u(x)))

d = x - [0.1, 0.2]
r2 = d @ d
exact = (r2 / 0.5**4 - 2 / 0.5**2) * np.exp(-r2 / (2 * 0.5**2))
for N in (16, 32, 64):
    p = make_plan(plane, x, window, N=N)
    val = invert(plane, laplace_beltrami(plane), u, x, window, p, 16).comps
    print(f"N={N:3d}  Laplacian error {abs(val - exact):.2e}")
