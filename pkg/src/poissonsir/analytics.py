"""Closed-form performance metrics for the Poisson network model.

Implements the interference Laplace transform, mean inverse interference,
the general closed-form mean SIR and its Nakagami special case, the
spectrum-efficiency upper bound and its tightness diagnostic, the
channel-aware power-control condition report, the Rayleigh SIR CCDF, the
throughput capacity, and the concavity-set membership test that certifies
a unique throughput-maximizing intensity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    DomainError,
    InterpolationRangeError,
    StepSizeError,
    UnsupportedModelError,
)
from .models import (
    ChannelAware,
    ConstantPower,
    AlwaysOn,
    NetworkModel,
    Opportunistic,
    effective_network,
)
from .specfun import (
    Constant,
    GammaUnitMean,
    central_derivatives,
    fractional_moment,
    gamma_fn,
)

__all__ = [
    "AnalyticReport",
    "laplace_interference",
    "mean_inverse_interference",
    "mean_sir",
    "mean_sir_nakagami",
    "kappa",
    "spectrum_efficiency_upper",
    "analytic_report",
    "theorem_conditions",
    "PowerControlConditions",
    "rayleigh_sir_ccdf",
    "RayleighAnalyticCcdf",
    "SimulatedCcdf",
    "throughput_capacity",
    "throughput_curve",
    "pi_lambda_membership",
    "PiLambdaReport",
    "TIGHTNESS_FLAG_RATIO",
]

TIGHTNESS_FLAG_RATIO = 10.0


@dataclass(frozen=True)
class AnalyticReport:
    """Closed-form metrics for one model: mean SIR, its intensity-free
    coefficient, the spectrum-efficiency bound and the bound-tightness ratio."""

    mean_sir: float
    kappa: float
    se_upper_bound: float
    tightness_ratio: float
    tight: bool


@dataclass(frozen=True)
class _MomentBundle:
    """Moment ingredients of the closed forms, already scheduling-thinned."""

    lambda_eff: float
    thinning: float  # lambda_eff / model intensity
    signal_mean: float  # E[P H D^-alpha]
    power_frac: float  # E[P^{2/alpha}]
    gain_frac: float  # E[G^{2/alpha}]


def _moments(model: NetworkModel) -> _MomentBundle:
    eff = effective_network(model)
    alpha = eff.alpha
    frac = 2.0 / alpha
    gain_frac = fractional_moment(eff.fading_g, frac)
    law = eff.power
    if isinstance(law, ConstantPower):
        signal = (
            law.power
            * fractional_moment(eff.fading_h, 1.0)
            * fractional_moment(eff.distance, -alpha)
        )
        power_frac = law.power**frac
    else:
        scale = law.mean_raw_power if law.mean_raw_power is not None else 1.0
        signal = (
            fractional_moment(eff.fading_h, law.rho + 1.0)
            * fractional_moment(eff.distance, law.upsilon - alpha)
            / scale
        )
        power_frac = (
            fractional_moment(eff.fading_h, frac * law.rho)
            * fractional_moment(eff.distance, frac * law.upsilon)
            / scale**frac
        )
    return _MomentBundle(
        lambda_eff=eff.intensity,
        thinning=eff.intensity / model.intensity,
        signal_mean=signal,
        power_frac=power_frac,
        gain_frac=gain_frac,
    )


def laplace_interference(model: NetworkModel, s: float) -> float:
    """E[exp(-s * I0)] for the aggregate interference at the origin."""
    s = float(s)
    if s < 0.0:
        raise DomainError(f"the transform argument must be nonnegative, got {s}")
    if s == 0.0:
        return 1.0
    b = _moments(model)
    alpha = model.alpha
    exponent = (
        math.pi
        * b.lambda_eff
        * gamma_fn(1.0 - 2.0 / alpha)
        * s ** (2.0 / alpha)
        * b.power_frac
        * b.gain_frac
    )
    return math.exp(-exponent)


def mean_inverse_interference(model: NetworkModel) -> float:
    """E[1/I0] in closed form; equals the integral of the Laplace transform."""
    b = _moments(model)
    alpha = model.alpha
    base = math.pi * b.lambda_eff * gamma_fn(1.0 - 2.0 / alpha) * b.power_frac * b.gain_frac
    return gamma_fn(1.0 + alpha / 2.0) / base ** (alpha / 2.0)


def kappa(model: NetworkModel) -> float:
    """Intensity-free mean-SIR coefficient: mean SIR = kappa * lambda^(-alpha/2)."""
    b = _moments(model)
    alpha = model.alpha
    base = math.pi * b.thinning * gamma_fn(1.0 - 2.0 / alpha) * b.power_frac * b.gain_frac
    return b.signal_mean * gamma_fn(1.0 + alpha / 2.0) / base ** (alpha / 2.0)


def mean_sir(model: NetworkModel) -> float:
    """Closed-form mean SIR of the reference receiver.

    Scheduling, power control and the plain constant-power case are all the
    same computation with different moment sources: the thinned intensity and
    the conditional mark moments feed the one closed form.
    """
    return kappa(model) * model.intensity ** (-model.alpha / 2.0)


def mean_sir_nakagami(m: float, alpha: float, d: float, intensity: float) -> float:
    """Mean SIR for Nakagami fading, constant power and fixed distance ``d``."""
    m = float(m)
    if not m > 0.0:
        raise DomainError(f"Nakagami shape must be positive, got {m}")
    if not alpha > 2.0:
        raise DomainError(f"alpha must exceed 2, got {alpha}")
    if not d >= 1.0:
        raise DomainError(f"distance must be at least 1, got {d}")
    if not intensity > 0.0:
        raise DomainError(f"intensity must be positive, got {intensity}")
    half_alpha = alpha / 2.0
    gain_frac = GammaUnitMean(m).moment(2.0 / alpha)
    base = math.pi * d * d * intensity * gamma_fn(1.0 - 2.0 / alpha) * gain_frac
    return gamma_fn(1.0 + half_alpha) / base**half_alpha


def spectrum_efficiency_upper(model: NetworkModel) -> float:
    """Upper bound log2(1 + mean SIR) on the mean spectrum efficiency."""
    return math.log2(1.0 + mean_sir(model))


def analytic_report(model: NetworkModel) -> AnalyticReport:
    """Evaluate the closed-form metric set for one model."""
    k = kappa(model)
    sir = k * model.intensity ** (-model.alpha / 2.0)
    ratio = model.intensity / k ** (2.0 / model.alpha)
    return AnalyticReport(
        mean_sir=sir,
        kappa=k,
        se_upper_bound=math.log2(1.0 + sir),
        tightness_ratio=ratio,
        tight=ratio >= TIGHTNESS_FLAG_RATIO,
    )


@dataclass(frozen=True)
class PowerControlConditions:
    """Literal sufficient conditions for the channel-aware law to raise the
    mean SIR, plus the actual analytic ordering so the two can disagree."""

    rho_at_least_minus_one: bool
    gain_moment_nondecreasing: bool
    upsilon_at_least_alpha: bool
    distance_moment_condition: bool
    all_satisfied: bool
    mean_sir_ratio: float
    empirically_improves: bool
    scheduling_interference_reduced: bool | None


def theorem_conditions(
    model: NetworkModel, rho: float, upsilon: float
) -> PowerControlConditions:
    """Check the sufficient conditions for P = H^rho D^upsilon to help.

    The four conditions are evaluated literally on the model's unconditioned
    mark laws; the report separately carries the actual ratio of the two
    closed-form mean SIRs, because the printed distance condition is
    typically unsatisfiable for distances >= 1 even where the law does help.
    """
    rho = float(rho)
    upsilon = float(upsilon)
    h_law, d_law = model.fading_h, model.distance
    cond_rho = rho >= -1.0
    cond_gain = fractional_moment(h_law, 1.0 + rho) >= fractional_moment(h_law, rho)
    cond_upsilon = upsilon >= model.alpha
    if upsilon > 0.0:
        cond_distance = fractional_moment(
            d_law, 1.0 - model.alpha / upsilon
        ) >= fractional_moment(d_law, 1.0)
    else:
        cond_distance = False
    aware = model.with_power(ChannelAware(rho=rho, upsilon=upsilon))
    constant = model.with_power(ConstantPower(1.0))
    ratio = mean_sir(aware) / mean_sir(constant)

    sched_reduced: bool | None = None
    if isinstance(model.scheduling, Opportunistic):
        policy = model.scheduling
        frac = 2.0 / model.alpha
        eff = effective_network(model)
        lhs = (
            float(h_law.ccdf(policy.min_gain))
            * float(d_law.cdf(policy.max_distance))
            * fractional_moment(eff.fading_h, frac * rho)
            * fractional_moment(eff.distance, frac * upsilon)
        )
        rhs = fractional_moment(h_law, frac * rho) * fractional_moment(d_law, frac * upsilon)
        sched_reduced = lhs < rhs

    return PowerControlConditions(
        rho_at_least_minus_one=cond_rho,
        gain_moment_nondecreasing=cond_gain,
        upsilon_at_least_alpha=cond_upsilon,
        distance_moment_condition=cond_distance,
        all_satisfied=cond_rho and cond_gain and cond_upsilon and cond_distance,
        mean_sir_ratio=ratio,
        empirically_improves=ratio > 1.0,
        scheduling_interference_reduced=sched_reduced,
    )


def _require_rayleigh_regime(model: NetworkModel) -> float:
    """Validate the closed-form CCDF regime; returns the fixed link distance."""
    ok_h = isinstance(model.fading_h, GammaUnitMean) and model.fading_h.shape == 1.0
    ok_g = isinstance(model.fading_g, GammaUnitMean) and model.fading_g.shape == 1.0
    ok_p = isinstance(model.power, ConstantPower)
    ok_d = isinstance(model.distance, Constant)
    ok_s = isinstance(model.scheduling, AlwaysOn)
    if not (ok_h and ok_g and ok_p and ok_d and ok_s):
        raise UnsupportedModelError(
            "the closed-form SIR CCDF needs unit-mean exponential gains, constant "
            "power, a fixed link distance and always-on scheduling; use a "
            "simulated CCDF curve for this model"
        )
    return model.distance.value


def _rayleigh_ccdf_value(intensity: float, alpha: float, d: float, theta: float) -> float:
    if theta < 0.0:
        raise DomainError(f"SIR threshold must be nonnegative, got {theta}")
    if theta == 0.0:
        return 1.0
    frac = 2.0 / alpha
    exponent = (
        math.pi
        * intensity
        * d
        * d
        * theta**frac
        * gamma_fn(1.0 + frac)
        * gamma_fn(1.0 - frac)
    )
    return math.exp(-exponent)


def rayleigh_sir_ccdf(model: NetworkModel, theta: float) -> float:
    """P[SIR >= theta] in closed form for the Rayleigh/constant regime."""
    d = _require_rayleigh_regime(model)
    return _rayleigh_ccdf_value(model.intensity, model.alpha, d, float(theta))


class RayleighAnalyticCcdf:
    """CCDF source backed by the Rayleigh closed form, evaluable at any
    intensity; validates the model regime once at construction."""

    def __init__(self, model: NetworkModel):
        self._distance = _require_rayleigh_regime(model)
        self._alpha = model.alpha
        self.lambda_range: tuple[float, float] | None = None

    def __call__(self, intensity: float, theta: float) -> float:
        if not intensity > 0.0:
            raise DomainError(f"intensity must be positive, got {intensity}")
        return _rayleigh_ccdf_value(intensity, self._alpha, self._distance, float(theta))


def _pava_nonincreasing(values: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators projection onto nonincreasing sequences."""
    level = list(values.astype(float))
    weight = [1.0] * len(level)
    merged: list[float] = []
    wts: list[float] = []
    for v, w in zip(level, weight):
        merged.append(v)
        wts.append(w)
        while len(merged) > 1 and merged[-2] < merged[-1]:
            total = wts[-2] + wts[-1]
            pooled = (merged[-2] * wts[-2] + merged[-1] * wts[-1]) / total
            merged[-2:] = [pooled]
            wts[-2:] = [total]
    out = np.empty(len(level))
    i = 0
    for v, w in zip(merged, wts):
        n = int(round(w))
        out[i : i + n] = v
        i += n
    return out


class SimulatedCcdf:
    """Monotone-interpolated CCDF-versus-intensity curve at a fixed threshold.

    Raw estimates are projected onto nonincreasing sequences (pool adjacent
    violators) and interpolated with a shape-preserving cubic in log
    intensity. Immutable once constructed.
    """

    def __init__(self, theta, lambdas, values, std_errors):
        lambdas = np.asarray(lambdas, dtype=float)
        values = np.asarray(values, dtype=float)
        std_errors = np.asarray(std_errors, dtype=float)
        if lambdas.ndim != 1 or lambdas.size < 2:
            raise DomainError("a simulated CCDF curve needs at least two grid points")
        if np.any(np.diff(lambdas) <= 0.0):
            raise DomainError("intensity grid must be strictly increasing")
        if values.shape != lambdas.shape or std_errors.shape != lambdas.shape:
            raise DomainError("grid, values and errors must have matching shapes")
        self.theta = float(theta)
        self.lambdas = lambdas
        self.values = values
        self.std_errors = std_errors
        self.fitted = np.clip(_pava_nonincreasing(values), 0.0, 1.0)
        self.lambda_range = (float(lambdas[0]), float(lambdas[-1]))
        self._interp = PchipInterpolator(np.log(lambdas), self.fitted, extrapolate=False)

    def __call__(self, intensity: float, theta: float) -> float:
        if not math.isclose(theta, self.theta, rel_tol=1e-9, abs_tol=1e-12):
            raise DomainError(
                f"curve was built for threshold {self.theta}, queried at {theta}"
            )
        lo, hi = self.lambda_range
        if not (lo <= intensity <= hi):
            raise InterpolationRangeError(
                f"intensity {intensity} outside the simulated range [{lo}, {hi}]"
            )
        return float(np.clip(self._interp(math.log(intensity)), 0.0, 1.0))


def throughput_curve(model: NetworkModel, theta: float, ccdf):
    """Return T(lambda) = lambda * ccdf(lambda) * log2(1 + kappa lambda^(-alpha/2))."""
    k = kappa(model)
    alpha = model.alpha
    theta = float(theta)

    def capacity(intensity: float) -> float:
        return (
            intensity
            * ccdf(intensity, theta)
            * math.log2(1.0 + k * intensity ** (-alpha / 2.0))
        )

    return capacity


def throughput_capacity(model: NetworkModel, theta: float, ccdf) -> float:
    """Throughput capacity at the model's intensity, per the given CCDF source."""
    return throughput_curve(model, theta, ccdf)(model.intensity)


@dataclass(frozen=True)
class PiLambdaReport:
    """Concavity-set membership of one intensity, with the compared quantities.

    ``concavity_lhs`` is (lambda/2) * l'', ``decay`` is -l' and ``growth_cap``
    is l / lambda; membership needs concavity_lhs < decay < growth_cap. The
    comparisons carry a small relative slack because both derivatives come
    from finite differences and, at the exact maximizer, decay equals
    growth_cap.
    """

    member: bool
    ell: float
    d_ell: float
    d2_ell: float
    concavity_lhs: float
    decay: float
    growth_cap: float

    def __bool__(self) -> bool:
        return self.member


def pi_lambda_membership(
    model: NetworkModel,
    theta: float,
    intensity: float,
    ccdf,
    slack: float = 1e-3,
) -> PiLambdaReport:
    """Test whether an intensity lies in the throughput-concavity set.

    Derivatives of l(lambda) = ccdf * log2(1 + kappa lambda^(-alpha/2)) use
    central differences with a relative step of 1e-4 and one Richardson
    refinement.
    """
    intensity = float(intensity)
    if not intensity > 0.0:
        raise DomainError(f"intensity must be positive, got {intensity}")
    k = kappa(model)
    alpha = model.alpha
    theta = float(theta)

    def ell(lam: float) -> float:
        return ccdf(lam, theta) * math.log2(1.0 + k * lam ** (-alpha / 2.0))

    h = max(1e-4 * intensity, 1e-9)
    if intensity - h <= 0.0 or intensity + h == intensity:
        raise StepSizeError(
            f"derivative step {h} unusable at intensity {intensity}"
        )
    d1_coarse, d2_coarse = central_derivatives(ell, intensity, h)
    d1_fine, d2_fine = central_derivatives(ell, intensity, h / 2.0)
    d1 = (4.0 * d1_fine - d1_coarse) / 3.0
    d2 = (4.0 * d2_fine - d2_coarse) / 3.0
    value = ell(intensity)

    concavity_lhs = 0.5 * intensity * d2
    decay = -d1
    growth_cap = value / intensity
    tol_left = slack * max(abs(concavity_lhs), abs(decay))
    tol_right = slack * max(abs(decay), abs(growth_cap))
    member = (concavity_lhs < decay + tol_left) and (decay < growth_cap + tol_right)
    return PiLambdaReport(
        member=member,
        ell=value,
        d_ell=d1,
        d2_ell=d2,
        concavity_lhs=concavity_lhs,
        decay=decay,
        growth_cap=growth_cap,
    )
