"""Lagrangian dynamics of second-order Riccati equations and isochronous oscillators."""

from .analytic import (
    cubic_solution,
    cubic_velocity,
    ince_linearization_oracle,
    oscillator_solution,
    quadrature_time,
    turning_points,
    velocity_branches,
)
from .conserved import (
    ConservedReport,
    Integral,
    IntegralId,
    drift_report,
    energy,
    energy_2d,
    evaluate_integral,
    i3_i4_dissipative,
    ixw,
    j_integrals,
    k_functions,
    kij_constant,
    limit_checks,
    t_generators,
    xw_pair,
)
from .errors import (
    NonFiniteStage,
    OutOfRange,
    OutsideAllowedRegion,
    PositiveMomentum,
    RiccatiError,
    RootDomain,
    SingularDenominator,
    SingularIntegrand,
    SingularTime,
    WrongBranch,
    ZeroCrossing,
    ZeroEnergy,
)
from .hamiltonian import (
    CanonicalPoint,
    canonical_qp,
    hamiltonian_of_state,
    hamiltonian_osc,
    hamiltonian_u,
    momentum,
    poisson_bracket_check,
)
from .integrate import (
    IntegratorConfig,
    Status,
    Trajectory,
    dense_eval,
    integrate,
    integrate_window,
    step_embedded,
)
from .model import (
    CubicRiccati,
    GeneralU,
    NonlinearOscillator,
    Product2D,
    QuadraticU,
    State,
    alternative_lagrangian,
    euler_lagrange_residual,
    force,
    lagrangian,
    lagrangian_value,
    riccati_coefficients,
    rhs,
)

__version__ = "0.1.0"

__all__ = [
    "CanonicalPoint",
    "ConservedReport",
    "CubicRiccati",
    "GeneralU",
    "Integral",
    "IntegralId",
    "IntegratorConfig",
    "NonFiniteStage",
    "NonlinearOscillator",
    "OutOfRange",
    "OutsideAllowedRegion",
    "PositiveMomentum",
    "Product2D",
    "QuadraticU",
    "RiccatiError",
    "RootDomain",
    "SingularDenominator",
    "SingularIntegrand",
    "SingularTime",
    "State",
    "Status",
    "Trajectory",
    "WrongBranch",
    "ZeroCrossing",
    "ZeroEnergy",
    "alternative_lagrangian",
    "canonical_qp",
    "cubic_solution",
    "cubic_velocity",
    "dense_eval",
    "drift_report",
    "energy",
    "energy_2d",
    "euler_lagrange_residual",
    "evaluate_integral",
    "force",
    "hamiltonian_of_state",
    "hamiltonian_osc",
    "hamiltonian_u",
    "i3_i4_dissipative",
    "ince_linearization_oracle",
    "integrate",
    "integrate_window",
    "ixw",
    "j_integrals",
    "k_functions",
    "kij_constant",
    "lagrangian",
    "lagrangian_value",
    "limit_checks",
    "momentum",
    "oscillator_solution",
    "poisson_bracket_check",
    "quadrature_time",
    "rhs",
    "riccati_coefficients",
    "step_embedded",
    "t_generators",
    "turning_points",
    "velocity_branches",
    "xw_pair",
]
