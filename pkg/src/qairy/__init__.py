"""Numerical q-series special functions: Ramanujan's A_q, the q-Airy function,
Jacobi theta, q-Bessel functions, and the q-Borel/Laplace resummation that
connects them."""
from .errors import (
    BranchError,
    ConvergenceError,
    DomainError,
    OverflowGuard,
    PoleError,
    QSeriesError,
    ShapeError,
    TruncationExhausted,
)
from .formal import LaurentWindow, TruncatedSeries, apply_operator, q_borel, q_borel_inverse
from .operators import QOperator, qairy_operator, ramanujan_operator
from .qcore import (
    HypergeometricSpec,
    QBase,
    SeriesParams,
    qpochhammer_finite,
    qpochhammer_infinite,
    rphi_s,
    theta,
    theta_product,
    theta_series,
)
from .resum import ContourConfig, f_direct, g_eval, laplace_of_borel, q_laplace, q_laplace_contour, residue_sum_f
from .special import (
    BesselOrder,
    connection_residual,
    qairy_Aiq,
    qbessel,
    ramanujan_Aq,
    watson_residual,
)

__version__ = "0.1.0"
