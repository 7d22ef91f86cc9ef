"""Pointwise Fourier inversion of differential operators on Riemannian manifolds.

``Au(x)`` is recovered from the Fourier transform, over the tangent space at
x, of the windowed and parallel-transported pullback of u by the exponential
map, weighted by the total symbol of A.  The package provides the geometric
pieces (charts, geodesics, transport, covariant derivatives), the inversion
itself, and batch experiments that check it against direct application.
"""
from .errors import (
    BaseMismatch,
    ConfigError,
    LeftChart,
    NotSPD,
    OrderTooHigh,
    OutOfChart,
    OutsideInjectivity,
    PlanMismatch,
    ReportIntegrityError,
    RiemFourierError,
    ShapeMismatch,
    SingularTransport,
    TypeMismatch,
    UnknownManifold,
    ZeroInjectivityRadius,
)
from .geodesics import CutoffWindow, GeodesicPath, exp_map, geodesic_flow_compose_check, make_window
from .geometry import (
    CotangentVector,
    ManifoldChart,
    OrthonormalFrame,
    TangentVector,
    christoffel_at,
    euclidean,
    flat_torus,
    metric_at,
    orthonormal_frame_at,
    poincare_disk,
    sphere2,
    surface_of_revolution,
    zoo,
)
from .inversion import (
    QuadraturePlan,
    WindowedPullback,
    chi_independence_check,
    fiber_fourier,
    invert,
    invert_at,
    make_plan,
    windowed_pullback,
)
from .operators import (
    DifferentialOperator,
    TensorSection,
    covariant_derivative,
    covariant_derivative_along,
    direct_apply,
    generic_third_order,
    identity,
    laplace_beltrami,
    total_symbol,
)
from .transport import FiberValue, TensorType, apply_transport, transport_along

__version__ = "0.1.0"
