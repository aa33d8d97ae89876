"""Mean-SIR analytics for Poisson wireless networks, with a Monte Carlo oracle.

Closed-form mean SIR, spectrum-efficiency bound and throughput capacity for
a marked Poisson field of transmitters under general fading, distance,
power-control and opportunistic-scheduling models, validated against an
independent simulator of the underlying point process.
"""

__version__ = "0.1.0"

from .analytics import (
    AnalyticReport,
    RayleighAnalyticCcdf,
    SimulatedCcdf,
    analytic_report,
    kappa,
    laplace_interference,
    mean_inverse_interference,
    mean_sir,
    mean_sir_nakagami,
    pi_lambda_membership,
    rayleigh_sir_ccdf,
    spectrum_efficiency_upper,
    theorem_conditions,
    throughput_capacity,
)
from .models import (
    AlwaysOn,
    ChannelAware,
    ConstantPower,
    NetworkModel,
    Opportunistic,
    effective_network,
    sample_mark,
    tx_power,
)
from .optimizer import OptimizationResult, certify_unimodal, maximize_throughput
from .simulator import (
    Estimate,
    SirSample,
    SirSamples,
    estimate_ccdf,
    estimate_mean_sir,
    estimate_spectrum_efficiency,
    pick_radius,
    sample_realization,
    simulate,
)
from .specfun import (
    Constant,
    DistributionSpec,
    ExponentialUnitMean,
    GammaUnitMean,
    UniformInterval,
    central_derivatives,
    fractional_moment,
    gamma_fn,
    truncated_moment_lower,
    truncated_moment_upper,
)

__all__ = [
    "__version__",
    "AnalyticReport",
    "RayleighAnalyticCcdf",
    "SimulatedCcdf",
    "analytic_report",
    "kappa",
    "laplace_interference",
    "mean_inverse_interference",
    "mean_sir",
    "mean_sir_nakagami",
    "pi_lambda_membership",
    "rayleigh_sir_ccdf",
    "spectrum_efficiency_upper",
    "theorem_conditions",
    "throughput_capacity",
    "AlwaysOn",
    "ChannelAware",
    "ConstantPower",
    "NetworkModel",
    "Opportunistic",
    "effective_network",
    "sample_mark",
    "tx_power",
    "OptimizationResult",
    "certify_unimodal",
    "maximize_throughput",
    "Estimate",
    "SirSample",
    "SirSamples",
    "estimate_ccdf",
    "estimate_mean_sir",
    "estimate_spectrum_efficiency",
    "pick_radius",
    "sample_realization",
    "simulate",
    "Constant",
    "DistributionSpec",
    "ExponentialUnitMean",
    "GammaUnitMean",
    "UniformInterval",
    "central_derivatives",
    "fractional_moment",
    "gamma_fn",
    "truncated_moment_lower",
    "truncated_moment_upper",
]
