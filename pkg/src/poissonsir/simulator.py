"""Independent Monte Carlo oracle for the Poisson network model.

Realizes the marked point process on a finite disk around the reference
receiver, forms the SIR of each realization, and turns batches of
realizations into mean-SIR, CCDF, spectrum-efficiency and Laplace-transform
estimates with standard errors.

Reproducibility contract: realizations are generated in fixed-size batches,
each batch from its own counter-based stream keyed by (seed, batch index).
The batch partition never depends on the worker count, and estimates reduce
arrays in batch order, so a given (model, n, seed, radius) produces
bit-identical results whether it runs on one worker or many; realization i
is a pure function of the seed and its batch block.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import trim_mean

from .analytics import SimulatedCcdf
from .errors import DegenerateConfigurationError, DomainError
from .models import (
    ChannelAware,
    ConstantPower,
    NetworkModel,
    Opportunistic,
    effective_network,
    tx_power,
)
from .specfun import fractional_moment

__all__ = [
    "SirSample",
    "SirSamples",
    "Estimate",
    "BATCH_SIZE",
    "pick_radius",
    "sample_realization",
    "simulate",
    "estimate_mean_sir",
    "estimate_ccdf",
    "estimate_spectrum_efficiency",
    "mean_sir_from_samples",
    "ccdf_from_samples",
    "spectrum_efficiency_from_samples",
    "laplace_from_samples",
    "ccdf_curve",
]

BATCH_SIZE = 4096
POINT_COUNT_FLOOR = 2000.0
MAX_REDRAWS = 100
TRIM_FRACTION = 1e-3


@dataclass(frozen=True)
class SirSample:
    """One realization: SIR, the interference and signal powers behind it,
    and how many interferers contributed."""

    sir: float
    interference: float
    signal: float
    n_interferers: int


@dataclass(frozen=True)
class SirSamples:
    """A batch of realizations as arrays, with the stream/radius that made them."""

    sir: np.ndarray
    interference: np.ndarray
    n_interferers: np.ndarray
    seed: int
    radius_m: float

    @property
    def n(self) -> int:
        return int(self.sir.size)

    @property
    def signal(self) -> np.ndarray:
        return self.sir * self.interference


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo statistic: point value, standard error and provenance."""

    value: float
    std_error: float
    n_realizations: int
    seed: int
    radius_m: float
    trimmed_value: float | None = None


def pick_radius(model: NetworkModel, eps: float = 1e-4) -> float:
    """Simulation disk radius for a truncated realization of the network.

    The radius is the larger of two requirements: the expected far-field
    interference beyond the disk, 2*pi*lambda_s*E[P]*E[G]*R^(2-alpha)/(alpha-2),
    must not exceed the budget ``eps``, and the disk must hold at least 2000
    expected scheduled transmitters so count fluctuations stay small. At the
    point-count floor the far-field term is orders of magnitude below the
    mean-interference scale for every supported exponent near 4.
    """
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    eff = effective_network(model)
    alpha = model.alpha
    law = eff.power
    if isinstance(law, ConstantPower):
        mean_power = law.power
    else:
        scale = law.mean_raw_power if law.mean_raw_power is not None else 1.0
        mean_power = (
            fractional_moment(eff.fading_h, law.rho)
            * fractional_moment(eff.distance, law.upsilon)
            / scale
        )
    mean_gain = fractional_moment(eff.fading_g, 1.0)
    floor = math.sqrt(POINT_COUNT_FLOOR / (math.pi * eff.intensity))
    tail = (2.0 * math.pi * eff.intensity * mean_power * mean_gain / ((alpha - 2.0) * eps)) ** (
        1.0 / (alpha - 2.0)
    )
    return max(floor, tail)


def _needs_own_marks(model: NetworkModel) -> bool:
    return isinstance(model.power, ChannelAware) or isinstance(
        model.scheduling, Opportunistic
    )


def _segment_sums(values: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Per-realization sums of a flat array laid out in ``counts`` segments."""
    starts = np.zeros(counts.size, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    sums = np.add.reduceat(values, starts)
    # reduceat returns values[start] for empty segments; zero them out
    sums[counts == 0] = 0.0
    return sums


def _interference_rows(
    model: NetworkModel, gen: np.random.Generator, rows: int, mu: float, radius: float
) -> tuple[np.ndarray, np.ndarray]:
    """Interference totals and retained-interferer counts for ``rows`` realizations."""
    counts = gen.poisson(mu, rows)
    total = int(counts.sum())
    if total == 0:
        return np.zeros(rows), np.zeros(rows, dtype=np.int64)
    u = gen.random(total)
    np.subtract(1.0, u, out=u)  # in (0, 1]: keeps every contribution finite
    # positions are uniform on the disk, so r = R*sqrt(u) and
    # r^(-alpha) = R^(-alpha) * u^(-alpha/2)
    alpha = model.alpha
    if alpha == 4.0:
        np.multiply(u, u, out=u)
    else:
        np.power(u, alpha / 2.0, out=u)
    contrib = np.asarray(model.fading_g.sample(gen, total), dtype=float)
    contrib /= u
    scale = radius**-alpha
    if _needs_own_marks(model):
        own_gain = np.asarray(model.fading_h.sample(gen, total), dtype=float)
        own_dist = np.asarray(model.distance.sample(gen, total), dtype=float)
        if isinstance(model.power, ChannelAware):
            contrib *= tx_power(model.power, own_gain, own_dist)
            contrib *= scale
        else:
            contrib *= scale * model.power.power
        if isinstance(model.scheduling, Opportunistic):
            keep = (own_gain >= model.scheduling.min_gain) & (
                own_dist <= model.scheduling.max_distance
            )
            contrib *= keep
            retained = _segment_sums(keep.astype(float), counts).astype(np.int64)
        else:
            retained = counts.astype(np.int64)
    else:
        contrib *= scale * model.power.power
        retained = counts.astype(np.int64)
    return _segment_sums(contrib, counts), retained


def _batch(
    model: NetworkModel,
    eff: NetworkModel,
    seed: int,
    batch_index: int,
    radius: float,
    mu: float,
    rows: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    gen = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=(int(seed), int(batch_index))))
    )
    # reference link marks come from the scheduled (conditioned) laws
    own_gain = np.asarray(eff.fading_h.sample(gen, rows), dtype=float)
    own_dist = np.asarray(eff.distance.sample(gen, rows), dtype=float)
    power = tx_power(model.power, own_gain, own_dist)
    signal = power * own_gain * own_dist**-model.alpha

    interference, retained = _interference_rows(model, gen, rows, mu, radius)
    for _ in range(MAX_REDRAWS):
        empty = np.flatnonzero(interference <= 0.0)
        if empty.size == 0:
            break
        redrawn, recount = _interference_rows(model, gen, empty.size, mu, radius)
        interference[empty] = redrawn
        retained[empty] = recount
    else:
        raise DegenerateConfigurationError(
            f"more than {MAX_REDRAWS} consecutive zero-interferer redraws; "
            "the truncated network is effectively empty"
        )
    return signal / interference, interference, retained


def _batch_task(args):
    model, eff, seed, batch_index, radius, mu, rows = args
    return batch_index, _batch(model, eff, seed, batch_index, radius, mu, rows)


def sample_realization(
    model: NetworkModel, rng: np.random.Generator, radius: float
) -> SirSample:
    """Draw one SIR realization on a disk of the given radius.

    Candidate interferers arrive as a Poisson count at the full model
    intensity; opportunistic scheduling is applied by rejection on each
    interferer's own (gain, distance) pair. The reference link draws its
    marks from the conditioned laws. Zero-interferer draws are retried.
    """
    eff = effective_network(model)
    own_gain = float(eff.fading_h.sample(rng))
    own_dist = float(eff.distance.sample(rng))
    power = float(tx_power(model.power, own_gain, own_dist))
    signal = power * own_gain * own_dist**-model.alpha
    mu = model.intensity * math.pi * radius * radius
    for _ in range(MAX_REDRAWS + 1):
        interference, retained = _interference_rows(model, rng, 1, mu, radius)
        if interference[0] > 0.0:
            return SirSample(
                sir=float(signal / interference[0]),
                interference=float(interference[0]),
                signal=float(signal),
                n_interferers=int(retained[0]),
            )
    raise DegenerateConfigurationError(
        f"more than {MAX_REDRAWS} consecutive zero-interferer redraws; "
        "the truncated network is effectively empty"
    )


def simulate(
    model: NetworkModel,
    n: int,
    seed: int,
    radius: float | None = None,
    n_jobs: int = 1,
) -> SirSamples:
    """Generate ``n`` SIR realizations; deterministic in (model, n, seed, radius).

    Batches may be computed by several worker processes; results are
    identical for any ``n_jobs``.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"need at least one realization, got {n}")
    if radius is None:
        radius = pick_radius(model)
    radius = float(radius)
    if not radius > 0.0:
        raise DomainError(f"radius must be positive, got {radius}")
    eff = effective_network(model)
    mu = model.intensity * math.pi * radius * radius
    n_batches = (n + BATCH_SIZE - 1) // BATCH_SIZE
    # every batch is generated at full size so realization i never depends on n
    tasks = [
        (model, eff, int(seed), b, radius, mu, BATCH_SIZE) for b in range(n_batches)
    ]
    if n_jobs > 1 and n_batches > 1:
        results: list = [None] * n_batches
        with ProcessPoolExecutor(max_workers=int(n_jobs)) as pool:
            for index, parts in pool.map(_batch_task, tasks, chunksize=1):
                results[index] = parts
    else:
        results = [_batch(*task) for task in tasks]
    sir = np.concatenate([r[0] for r in results])[:n]
    interference = np.concatenate([r[1] for r in results])[:n]
    retained = np.concatenate([r[2] for r in results])[:n]
    return SirSamples(
        sir=sir,
        interference=interference,
        n_interferers=retained,
        seed=int(seed),
        radius_m=radius,
    )


def mean_sir_from_samples(samples: SirSamples) -> Estimate:
    """Sample-mean SIR with standard error and a trimmed-mean tail diagnostic."""
    n = samples.n
    if n < 2:
        raise DomainError("standard errors need at least two realizations")
    value = float(np.mean(samples.sir))
    std_error = float(np.std(samples.sir, ddof=1) / math.sqrt(n))
    trimmed = float(trim_mean(samples.sir, TRIM_FRACTION))
    return Estimate(
        value=value,
        std_error=std_error,
        n_realizations=n,
        seed=samples.seed,
        radius_m=samples.radius_m,
        trimmed_value=trimmed,
    )


def ccdf_from_samples(samples: SirSamples, thetas) -> list[Estimate]:
    """Empirical P[SIR >= theta] at each threshold, sharing the realizations."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 1 or thetas.size == 0:
        raise DomainError("thetas must be a nonempty 1-d sequence")
    if np.any(np.diff(thetas) < 0.0):
        raise DomainError("thetas must be sorted ascending")
    n = samples.n
    ordered = np.sort(samples.sir)
    below = np.searchsorted(ordered, thetas, side="left")
    out = []
    for theta, k in zip(thetas, below):
        p = float((n - k) / n)
        std_error = math.sqrt(p * (1.0 - p) / n)
        out.append(
            Estimate(
                value=p,
                std_error=std_error,
                n_realizations=n,
                seed=samples.seed,
                radius_m=samples.radius_m,
            )
        )
    return out


def spectrum_efficiency_from_samples(samples: SirSamples) -> Estimate:
    """Sample mean of log2(1 + SIR) with standard error."""
    n = samples.n
    if n < 2:
        raise DomainError("standard errors need at least two realizations")
    rates = np.log1p(samples.sir) / math.log(2.0)
    return Estimate(
        value=float(np.mean(rates)),
        std_error=float(np.std(rates, ddof=1) / math.sqrt(n)),
        n_realizations=n,
        seed=samples.seed,
        radius_m=samples.radius_m,
    )


def laplace_from_samples(samples: SirSamples, s: float) -> Estimate:
    """Empirical E[exp(-s * I0)] from the stored interference values."""
    s = float(s)
    if s < 0.0:
        raise DomainError(f"the transform argument must be nonnegative, got {s}")
    values = np.exp(-s * samples.interference)
    n = samples.n
    return Estimate(
        value=float(np.mean(values)),
        std_error=float(np.std(values, ddof=1) / math.sqrt(n)),
        n_realizations=n,
        seed=samples.seed,
        radius_m=samples.radius_m,
    )


def estimate_mean_sir(
    model: NetworkModel,
    n: int,
    seed: int,
    radius: float | None = None,
    n_jobs: int = 1,
) -> Estimate:
    """Monte Carlo mean SIR over ``n`` realizations."""
    if n < 1000:
        raise DomainError(f"mean-SIR estimation needs n >= 1000, got {n}")
    return mean_sir_from_samples(simulate(model, n, seed, radius, n_jobs))


def estimate_ccdf(
    model: NetworkModel,
    thetas,
    n: int,
    seed: int,
    radius: float | None = None,
    n_jobs: int = 1,
) -> list[Estimate]:
    """Monte Carlo SIR CCDF at ascending thresholds over shared realizations."""
    return ccdf_from_samples(simulate(model, n, seed, radius, n_jobs), thetas)


def estimate_spectrum_efficiency(
    model: NetworkModel,
    n: int,
    seed: int,
    radius: float | None = None,
    n_jobs: int = 1,
) -> Estimate:
    """Monte Carlo mean spectrum efficiency E[log2(1 + SIR)]."""
    if n < 1000:
        raise DomainError(f"spectrum-efficiency estimation needs n >= 1000, got {n}")
    return spectrum_efficiency_from_samples(simulate(model, n, seed, radius, n_jobs))


def ccdf_curve(
    model: NetworkModel,
    theta: float,
    lambdas,
    n: int,
    seed: int,
    n_jobs: int = 1,
) -> SimulatedCcdf:
    """Simulate P[SIR >= theta] across an intensity grid and wrap the result
    as a monotone-interpolated CCDF source for the optimizer."""
    lambdas = np.asarray(lambdas, dtype=float)
    values = np.empty(lambdas.size)
    errors = np.empty(lambdas.size)
    for i, lam in enumerate(lambdas):
        point = model.with_intensity(float(lam))
        est = ccdf_from_samples(simulate(point, n, seed, None, n_jobs), [theta])[0]
        values[i] = est.value
        errors[i] = est.std_error
    return SimulatedCcdf(theta, lambdas, values, errors)
