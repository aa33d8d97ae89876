"""Declarative description of the marked Poisson transmitter process.

A :class:`NetworkModel` bundles the transmitter intensity, path-loss
exponent, mark laws (own-link gain H, interfering gain G, link distance D),
the power-control law and the scheduling policy. Models are immutable;
:func:`effective_network` folds an opportunistic scheduling policy into the
model by thinning the intensity and conditioning the mark laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConfigError,
    DegenerateConfigurationError,
    DomainError,
    EmptyConditioningError,
    EmptyNetworkError,
)
from .specfun import (
    Constant,
    DistributionSpec,
    GammaUnitMean,
    UniformInterval,
    fractional_moment,
    truncated_moment_lower,
    truncated_moment_upper,
)

__all__ = [
    "ConstantPower",
    "ChannelAware",
    "AlwaysOn",
    "Opportunistic",
    "NetworkModel",
    "ConditionedAtLeast",
    "ConditionedAtMost",
    "sample_mark",
    "tx_power",
    "effective_network",
    "model_from_keys",
    "model_to_keys",
]

_UNIT_MEAN_TOL = 1e-9


@dataclass(frozen=True)
class ConstantPower:
    """Every transmitter uses the same power."""

    power: float = 1.0

    def __post_init__(self):
        if not self.power > 0.0:
            raise DomainError(f"transmit power must be positive, got {self.power}")


@dataclass(frozen=True)
class ChannelAware:
    """Stochastic power control P = H^rho * D^upsilon / mean_raw_power.

    ``mean_raw_power`` is the normalization E[H^rho * D^upsilon] that makes
    the mean transmit power equal one; it is filled in when the law is
    attached to a :class:`NetworkModel` and left untouched afterwards, so a
    scheduling-thinned model keeps the normalization of the original laws.
    """

    rho: float
    upsilon: float
    mean_raw_power: float | None = None


PowerControlLaw = ConstantPower | ChannelAware


@dataclass(frozen=True)
class AlwaysOn:
    """Every transmitter is always scheduled."""


@dataclass(frozen=True)
class Opportunistic:
    """Transmit only when the own-link gain is at least ``min_gain`` and the
    link distance is at most ``max_distance``."""

    min_gain: float
    max_distance: float

    def __post_init__(self):
        if self.min_gain < 0.0:
            raise DomainError(f"gain threshold must be nonnegative, got {self.min_gain}")
        if not self.max_distance > 1.0:
            raise DomainError(
                f"distance cap must exceed 1, got {self.max_distance}"
            )


SchedulingPolicy = AlwaysOn | Opportunistic


def _rejection_sample(base: DistributionSpec, accept, acceptance_prob: float, rng, size):
    """Draw from ``base`` conditioned on ``accept`` by vectorized rejection."""
    scalar = size is None
    n = 1 if scalar else int(size)
    out = np.empty(n, dtype=float)
    filled = 0
    chunk_scale = 1.2 / max(acceptance_prob, 1e-6)
    for _ in range(200):
        need = n - filled
        if need == 0:
            break
        draw = max(int(need * chunk_scale) + 16, need)
        candidates = np.asarray(base.sample(rng, draw), dtype=float)
        kept = candidates[accept(candidates)]
        take = min(kept.size, need)
        out[filled : filled + take] = kept[:take]
        filled += take
    if filled < n:
        raise DegenerateConfigurationError(
            "rejection sampling failed to accept enough conditioned marks"
        )
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class ConditionedAtLeast(DistributionSpec):
    """Law of Z | Z >= bound; moment queries route to the truncated moments."""

    base: DistributionSpec
    bound: float

    def __post_init__(self):
        if float(self.base.ccdf(self.bound)) <= 0.0 and not (
            isinstance(self.base, Constant) and self.base.value >= self.bound
        ):
            raise EmptyConditioningError(
                f"P[Z >= {self.bound}] = 0; the conditioned law is empty"
            )

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.base.support
        return (max(lo, self.bound), hi)

    def moment(self, a: float) -> float:
        return truncated_moment_upper(self.base, a, self.bound)

    def cdf(self, x):
        keep = float(self.base.ccdf(self.bound))
        shifted = (np.asarray(self.base.cdf(x), dtype=float) - (1.0 - keep)) / keep
        return np.clip(shifted, 0.0, 1.0)[()]

    def ccdf(self, x):
        keep = float(self.base.ccdf(self.bound))
        return np.clip(np.asarray(self.base.ccdf(x), dtype=float) / keep, 0.0, 1.0)[()]

    def pdf(self, x):
        keep = float(self.base.ccdf(self.bound))
        x = np.asarray(x, dtype=float)
        return np.where(x >= self.bound, np.asarray(self.base.pdf(x), dtype=float) / keep, 0.0)[()]

    def sample(self, rng, size=None):
        keep = float(self.base.ccdf(self.bound))
        return _rejection_sample(self.base, lambda z: z >= self.bound, keep, rng, size)


@dataclass(frozen=True)
class ConditionedAtMost(DistributionSpec):
    """Law of Z | Z <= bound; moment queries route to the truncated moments."""

    base: DistributionSpec
    bound: float

    def __post_init__(self):
        if float(self.base.cdf(self.bound)) <= 0.0 and not (
            isinstance(self.base, Constant) and self.base.value <= self.bound
        ):
            raise EmptyConditioningError(
                f"P[Z <= {self.bound}] = 0; the conditioned law is empty"
            )

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.base.support
        return (lo, min(hi, self.bound))

    def moment(self, a: float) -> float:
        return truncated_moment_lower(self.base, a, self.bound)

    def cdf(self, x):
        keep = float(self.base.cdf(self.bound))
        return np.clip(np.asarray(self.base.cdf(x), dtype=float) / keep, 0.0, 1.0)[()]

    def pdf(self, x):
        keep = float(self.base.cdf(self.bound))
        x = np.asarray(x, dtype=float)
        return np.where(x <= self.bound, np.asarray(self.base.pdf(x), dtype=float) / keep, 0.0)[()]

    def sample(self, rng, size=None):
        keep = float(self.base.cdf(self.bound))
        return _rejection_sample(self.base, lambda z: z <= self.bound, keep, rng, size)


@dataclass(frozen=True)
class NetworkModel:
    """Complete description of the marked Poisson transmitter process.

    Invariants enforced at construction: positive intensity, path-loss
    exponent above 2, unit-mean gain laws, distance support inside
    [1, inf), and a normalized channel-aware power law.
    """

    intensity: float
    alpha: float
    fading_h: DistributionSpec
    distance: DistributionSpec
    fading_g: DistributionSpec | None = None
    power: PowerControlLaw = ConstantPower(1.0)
    scheduling: SchedulingPolicy = AlwaysOn()

    def __post_init__(self):
        if not self.intensity > 0.0:
            raise DomainError(f"intensity must be positive, got {self.intensity}")
        if not self.alpha > 2.0:
            raise DomainError(f"alpha must exceed 2, got {self.alpha}")
        if self.fading_g is None:
            object.__setattr__(self, "fading_g", self.fading_h)
        for name, dist in (("fading_h", self.fading_h), ("fading_g", self.fading_g)):
            if isinstance(dist, (ConditionedAtLeast, ConditionedAtMost)):
                continue
            if abs(fractional_moment(dist, 1.0) - 1.0) > _UNIT_MEAN_TOL:
                raise DomainError(f"{name} must have unit mean")
        if self.distance.support[0] < 1.0:
            raise DomainError("distance support must lie in [1, inf)")
        if isinstance(self.power, ChannelAware) and self.power.mean_raw_power is None:
            raw = fractional_moment(self.fading_h, self.power.rho) * fractional_moment(
                self.distance, self.power.upsilon
            )
            if not (math.isfinite(raw) and raw > 0.0):
                raise DomainError("channel-aware power law has no finite normalization")
            object.__setattr__(self, "power", replace(self.power, mean_raw_power=raw))
        if isinstance(self.scheduling, Opportunistic):
            if float(self.fading_h.ccdf(self.scheduling.min_gain)) <= 0.0:
                raise DomainError("gain threshold removes every transmitter")
            if float(self.distance.cdf(self.scheduling.max_distance)) <= 0.0:
                raise DomainError("distance cap removes every transmitter")

    def with_intensity(self, intensity: float) -> "NetworkModel":
        return replace(self, intensity=float(intensity))

    def with_power(self, power: PowerControlLaw) -> "NetworkModel":
        return replace(self, power=power)


def sample_mark(dist: DistributionSpec, rng: np.random.Generator, size=None):
    """Draw mark variates from ``dist``; deterministic given the stream state."""
    return dist.sample(rng, size)


def tx_power(law: PowerControlLaw, h, d):
    """Transmit power for own-link gain ``h`` and distance ``d``.

    Accepts scalars or arrays; the channel-aware law divides by its
    normalization so the mean transmit power is one.
    """
    if isinstance(law, ConstantPower):
        return law.power
    scale = law.mean_raw_power if law.mean_raw_power is not None else 1.0
    h = np.asarray(h, dtype=float)
    d = np.asarray(d, dtype=float)
    return (h**law.rho * d**law.upsilon / scale)[()]


def effective_network(model: NetworkModel) -> NetworkModel:
    """Fold the scheduling policy into the model.

    Always-on models pass through unchanged. Opportunistic scheduling thins
    the intensity to lambda * P[H >= min_gain] * P[D <= max_distance] and
    replaces the own-link mark laws by their conditioned versions (so moment
    queries route to the truncated moments). The interfering-gain law G is
    left unconditioned: a transmitter schedules on its own link, not on its
    gain toward other receivers. The result is always-on, so the
    transformation is idempotent.
    """
    if isinstance(model.scheduling, AlwaysOn):
        return model
    policy = model.scheduling
    keep_gain = float(model.fading_h.ccdf(policy.min_gain))
    keep_dist = float(model.distance.cdf(policy.max_distance))
    thinned = model.intensity * keep_gain * keep_dist
    if not thinned > 0.0:
        raise EmptyNetworkError("scheduling thins the network to intensity zero")
    h_lo = model.fading_h.support[0]
    d_hi = model.distance.support[1]
    fading_h = (
        ConditionedAtLeast(model.fading_h, policy.min_gain)
        if policy.min_gain > h_lo
        else model.fading_h
    )
    distance = (
        ConditionedAtMost(model.distance, policy.max_distance)
        if policy.max_distance < d_hi
        else model.distance
    )
    return replace(
        model,
        intensity=thinned,
        fading_h=fading_h,
        distance=distance,
        scheduling=AlwaysOn(),
    )


# --- model description text format -----------------------------------------
#
# Flat key=value keys: lambda, alpha, fading, fading_g (optional), distance,
# power, sched. Value syntax:
#   fading   = rayleigh | nakagami:m=<f> | none
#   distance = fixed:<d> | uniform:<lo>,<hi>
#   power    = const:<p> | aware:rho=<f>,upsilon=<f>
#   sched    = none | opp:h0=<f>,d0=<f>

MODEL_KEYS = ("lambda", "alpha", "fading", "fading_g", "distance", "power", "sched")


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{what}: expected a number, got {text!r}") from None


def _parse_kwargs(body: str, what: str, expected: tuple[str, ...]) -> dict[str, float]:
    out: dict[str, float] = {}
    for part in body.split(","):
        if "=" not in part:
            raise ConfigError(f"{what}: expected name=value pairs, got {part!r}")
        name, _, value = part.partition("=")
        name = name.strip()
        if name not in expected:
            raise ConfigError(f"{what}: unknown parameter {name!r}")
        out[name] = _parse_float(value.strip(), f"{what}.{name}")
    missing = [name for name in expected if name not in out]
    if missing:
        raise ConfigError(f"{what}: missing parameter(s) {', '.join(missing)}")
    return out


def _parse_fading(text: str, what: str) -> DistributionSpec:
    kind, _, body = text.partition(":")
    kind = kind.strip()
    if kind == "rayleigh":
        return GammaUnitMean(1.0)
    if kind == "none":
        return Constant(1.0)
    if kind == "nakagami":
        params = _parse_kwargs(body, what, ("m",))
        return GammaUnitMean(params["m"])
    raise ConfigError(f"{what}: unknown fading kind {kind!r}")


def _parse_distance(text: str) -> DistributionSpec:
    kind, _, body = text.partition(":")
    kind = kind.strip()
    if kind == "fixed":
        return Constant(_parse_float(body, "distance"))
    if kind == "uniform":
        parts = body.split(",")
        if len(parts) != 2:
            raise ConfigError(f"distance: uniform expects lo,hi, got {body!r}")
        return UniformInterval(
            _parse_float(parts[0], "distance.lo"), _parse_float(parts[1], "distance.hi")
        )
    raise ConfigError(f"distance: unknown kind {kind!r}")


def _parse_power(text: str) -> PowerControlLaw:
    kind, _, body = text.partition(":")
    kind = kind.strip()
    if kind == "const":
        return ConstantPower(_parse_float(body, "power"))
    if kind == "aware":
        params = _parse_kwargs(body, "power", ("rho", "upsilon"))
        return ChannelAware(rho=params["rho"], upsilon=params["upsilon"])
    raise ConfigError(f"power: unknown kind {kind!r}")


def _parse_sched(text: str) -> SchedulingPolicy:
    kind, _, body = text.partition(":")
    kind = kind.strip()
    if kind == "none":
        return AlwaysOn()
    if kind == "opp":
        params = _parse_kwargs(body, "sched", ("h0", "d0"))
        return Opportunistic(min_gain=params["h0"], max_distance=params["d0"])
    raise ConfigError(f"sched: unknown kind {kind!r}")


def model_from_keys(keys: dict[str, str]) -> NetworkModel:
    """Build a model from the flat key=value description format."""
    unknown = sorted(set(keys) - set(MODEL_KEYS))
    if unknown:
        raise ConfigError(f"unknown model key(s): {', '.join(unknown)}")
    missing = [k for k in ("lambda", "alpha", "fading", "distance") if k not in keys]
    if missing:
        raise ConfigError(f"missing model key(s): {', '.join(missing)}")
    fading_h = _parse_fading(keys["fading"], "fading")
    fading_g = _parse_fading(keys["fading_g"], "fading_g") if "fading_g" in keys else None
    return NetworkModel(
        intensity=_parse_float(keys["lambda"], "lambda"),
        alpha=_parse_float(keys["alpha"], "alpha"),
        fading_h=fading_h,
        fading_g=fading_g,
        distance=_parse_distance(keys["distance"]),
        power=_parse_power(keys.get("power", "const:1")),
        scheduling=_parse_sched(keys.get("sched", "none")),
    )


def _fading_text(dist: DistributionSpec) -> str:
    if isinstance(dist, Constant) and dist.value == 1.0:
        return "none"
    if isinstance(dist, GammaUnitMean):
        if dist.shape == 1.0:
            return "rayleigh"
        return f"nakagami:m={dist.shape!r}"
    raise DomainError(f"no text form for fading law {dist!r}")


def _distance_text(dist: DistributionSpec) -> str:
    if isinstance(dist, Constant):
        return f"fixed:{dist.value!r}"
    if isinstance(dist, UniformInterval):
        return f"uniform:{dist.lower!r},{dist.upper!r}"
    raise DomainError(f"no text form for distance law {dist!r}")


def model_to_keys(model: NetworkModel) -> dict[str, str]:
    """Serialize a (non-thinned) model back to the flat description format."""
    keys = {
        "lambda": repr(model.intensity),
        "alpha": repr(model.alpha),
        "fading": _fading_text(model.fading_h),
        "distance": _distance_text(model.distance),
    }
    if model.fading_g is not model.fading_h and model.fading_g != model.fading_h:
        keys["fading_g"] = _fading_text(model.fading_g)
    if isinstance(model.power, ConstantPower):
        keys["power"] = f"const:{model.power.power!r}"
    else:
        keys["power"] = f"aware:rho={model.power.rho!r},upsilon={model.power.upsilon!r}"
    if isinstance(model.scheduling, Opportunistic):
        keys["sched"] = (
            f"opp:h0={model.scheduling.min_gain!r},d0={model.scheduling.max_distance!r}"
        )
    else:
        keys["sched"] = "none"
    return keys
