"""Command-line front end.

Subcommands: ``analytic`` (closed-form metrics as key=value lines),
``simulate`` (Monte Carlo estimates), ``sweep`` (intensity sweep written as
CSV), ``optimize`` (throughput-maximizing intensity) and ``fig1``..``fig4``
(preset sweeps over the standard experiment grids, with a companion gnuplot
script). Exit codes: 0 success, 2 usage/parse error, 3 domain error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analytics import (
    RayleighAnalyticCcdf,
    analytic_report,
    mean_sir as analytic_mean_sir,
)
from .errors import ConfigError, DomainError
from .models import (
    MODEL_KEYS,
    ChannelAware,
    ConstantPower,
    GammaUnitMean,
    NetworkModel,
    UniformInterval,
    model_from_keys,
    model_to_keys,
)
from .optimizer import maximize_throughput
from .simulator import (
    ccdf_curve,
    ccdf_from_samples,
    mean_sir_from_samples,
    pick_radius,
    simulate,
    spectrum_efficiency_from_samples,
)
from .specfun import Constant

__all__ = [
    "run_command",
    "main",
    "parse_config",
    "SweepResult",
    "SweepRow",
    "write_sweep_csv",
    "read_sweep_csv",
    "CSV_COLUMNS",
]

RUN_KEYS = ("n", "seed", "theta", "radius", "out", "threads")

CSV_COLUMNS = (
    "param",
    "mean_sir_analytic",
    "mean_sir_mc",
    "mean_sir_mc_se",
    "ccdf_mc",
    "ccdf_mc_se",
    "se_bound",
    "se_mc",
    "se_mc_se",
    "thrpt_cap",
    "n",
    "seed",
    "radius_m",
)


@dataclass(frozen=True)
class SweepRow:
    """One sweep grid point; missing metrics stay None and serialize empty."""

    param: float
    mean_sir_analytic: float | None = None
    mean_sir_mc: float | None = None
    mean_sir_mc_se: float | None = None
    ccdf_mc: float | None = None
    ccdf_mc_se: float | None = None
    se_bound: float | None = None
    se_mc: float | None = None
    se_mc_se: float | None = None
    thrpt_cap: float | None = None
    n: int | None = None
    seed: int | None = None
    radius_m: float | None = None


@dataclass
class SweepResult:
    """A parameter sweep: ordered rows plus run metadata.

    The creation timestamp stays on the object and is never serialized, so
    repeated runs with the same seed produce byte-identical CSV files.
    """

    rows: list[SweepRow]
    metadata: dict[str, str]
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        params = [row.param for row in self.rows]
        if any(b <= a for a, b in zip(params, params[1:])):
            raise DomainError("sweep parameter values must be strictly increasing")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _parse_cell(text: str):
    if text == "":
        return None
    return float(text)


def write_sweep_csv(path: str, sweeps: list[SweepResult] | SweepResult) -> None:
    """Write sweep blocks to CSV atomically (temp file + rename).

    Each block is a run of ``# key=value`` metadata lines, the fixed header,
    and one line per row; blocks are separated by two blank lines so generic
    plotting tools can address them by index.
    """
    if isinstance(sweeps, SweepResult):
        sweeps = [sweeps]
    blocks = []
    for sweep in sweeps:
        lines = [f"# {key}={value}" for key, value in sweep.metadata.items()]
        lines.append(",".join(CSV_COLUMNS))
        for row in sweep.rows:
            lines.append(",".join(_fmt(getattr(row, col)) for col in CSV_COLUMNS))
        blocks.append("\n".join(lines))
    payload = "\n\n\n".join(blocks) + "\n"
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sweep-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_sweep_csv(path: str) -> list[SweepResult]:
    """Parse a sweep CSV back into blocks; float cells round-trip bit-exactly."""
    with open(path, "r") as handle:
        text = handle.read()
    sweeps: list[SweepResult] = []
    metadata: dict[str, str] = {}
    rows: list[SweepRow] = []
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            if saw_header:
                sweeps.append(SweepResult(rows=rows, metadata=metadata))
                metadata, rows, saw_header = {}, [], False
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                metadata[key.strip()] = value
            continue
        if line.startswith("param,"):
            if line != ",".join(CSV_COLUMNS):
                raise ConfigError(f"unexpected CSV header {line!r}", line=lineno)
            saw_header = True
            continue
        cells = line.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise ConfigError(
                f"expected {len(CSV_COLUMNS)} columns, got {len(cells)}", line=lineno
            )
        values = [_parse_cell(cell) for cell in cells]
        kwargs = dict(zip(CSV_COLUMNS, values))
        for int_col in ("n", "seed"):
            if kwargs[int_col] is not None:
                kwargs[int_col] = int(kwargs[int_col])
        rows.append(SweepRow(**kwargs))
    if saw_header:
        sweeps.append(SweepResult(rows=rows, metadata=metadata))
    return sweeps


def parse_config(path: str):
    """Parse a key=value config file into a model and run parameters.

    Model keys are those of the flat model description format; run keys are
    n, seed, theta, radius (auto or meters), out and threads. Unknown keys
    raise an error listing them; malformed lines carry their line number.
    """
    model_keys: dict[str, str] = {}
    run_keys: dict[str, str] = {}
    unknown: list[str] = []
    with open(path, "r") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"expected key=value, got {line!r}", line=lineno)
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in MODEL_KEYS:
                model_keys[key] = value
            elif key in RUN_KEYS:
                run_keys[key] = value
            else:
                unknown.append(key)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(set(unknown)))}")
    model = model_from_keys(model_keys)
    run: dict = {}
    try:
        if "n" in run_keys:
            run["n"] = int(run_keys["n"])
        if "seed" in run_keys:
            run["seed"] = int(run_keys["seed"])
        if "threads" in run_keys:
            run["threads"] = int(run_keys["threads"])
        if "theta" in run_keys:
            run["theta"] = float(run_keys["theta"])
        if "radius" in run_keys:
            run["radius"] = (
                None if run_keys["radius"] == "auto" else float(run_keys["radius"])
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "out" in run_keys:
        run["out"] = run_keys["out"]
    return model, run


# --- argument handling -------------------------------------------------------


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--lambda", dest="intensity", help="transmitter intensity per m^2")
    parser.add_argument("--alpha", help="path loss exponent (> 2)")
    parser.add_argument("--fading", help="rayleigh | nakagami:m=<f> | none")
    parser.add_argument("--fading-g", dest="fading_g", help="interferer gain law override")
    parser.add_argument("--distance", help="fixed:<d> | uniform:<lo>,<hi>")
    parser.add_argument("--power", help="const:<p> | aware:rho=<f>,upsilon=<f>")
    parser.add_argument("--sched", help="none | opp:h0=<f>,d0=<f>")


def _add_run_args(parser: argparse.ArgumentParser, with_theta: bool = True) -> None:
    parser.add_argument("--n", type=int, default=None, help="realizations per point")
    parser.add_argument("--seed", type=int, default=None, help="simulation seed")
    parser.add_argument("--radius", default=None, help="auto or meters")
    parser.add_argument("--threads", type=int, default=None, help="worker processes")
    if with_theta:
        parser.add_argument("--theta", type=float, default=None, help="SIR threshold")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would call sys.exit(2) with a bare message
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poissonsir", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_analytic = sub.add_parser("analytic", help="closed-form metrics")
    _add_model_args(p_analytic)
    p_analytic.add_argument("--theta", type=float, default=None)

    p_sim = sub.add_parser("simulate", help="Monte Carlo estimates")
    _add_model_args(p_sim)
    _add_run_args(p_sim)

    p_sweep = sub.add_parser("sweep", help="intensity sweep to CSV")
    _add_model_args(p_sweep)
    _add_run_args(p_sweep)
    p_sweep.add_argument("--lambdas", help="comma-separated intensity grid")
    p_sweep.add_argument("--lambda-range", dest="lambda_range",
                         help="lo:hi:count, log-spaced")
    p_sweep.add_argument("--out", required=True, help="output CSV path")

    p_opt = sub.add_parser("optimize", help="throughput-maximizing intensity")
    _add_model_args(p_opt)
    _add_run_args(p_opt)
    p_opt.add_argument("--ccdf", choices=("analytic", "simulated"), default="analytic")
    p_opt.add_argument("--bounds", help="lo:hi intensity search bounds")
    p_opt.add_argument("--lambdas", help="grid for the simulated CCDF curve")

    for name in ("fig1", "fig2", "fig3", "fig4"):
        p_fig = sub.add_parser(name, help=f"preset sweep for {name}")
        p_fig.add_argument("--out", required=True, help="output CSV path")
        p_fig.add_argument("--n", type=int, default=None)
        p_fig.add_argument("--seed", type=int, default=None)
        p_fig.add_argument("--threads", type=int, default=None)
    return parser


def _collect_model(args) -> tuple[NetworkModel, dict]:
    run: dict = {}
    keys: dict[str, str] = {}
    if getattr(args, "config", None):
        model, run = parse_config(args.config)
        keys = model_to_keys(model)
    overrides = {
        "lambda": getattr(args, "intensity", None),
        "alpha": getattr(args, "alpha", None),
        "fading": getattr(args, "fading", None),
        "fading_g": getattr(args, "fading_g", None),
        "distance": getattr(args, "distance", None),
        "power": getattr(args, "power", None),
        "sched": getattr(args, "sched", None),
    }
    for key, value in overrides.items():
        if value is not None:
            keys[key] = value
    if not keys:
        raise ConfigError("no model given: pass --config or model flags")
    model = model_from_keys(keys)
    for attr in ("n", "seed", "theta", "threads"):
        value = getattr(args, attr, None)
        if value is not None:
            run[attr] = value
    radius = getattr(args, "radius", None)
    if radius is not None:
        run["radius"] = None if radius == "auto" else float(radius)
    return model, run


def _print_kv(pairs) -> None:
    for key, value in pairs:
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (int, np.integer)):
            text = str(int(value))
        elif value is None:
            text = ""
        else:
            text = repr(float(value))
        print(f"{key}={text}")


def _cmd_analytic(args) -> int:
    model, run = _collect_model(args)
    report = analytic_report(model)
    pairs = [
        ("mean_sir", report.mean_sir),
        ("kappa", report.kappa),
        ("se_upper_bound", report.se_upper_bound),
        ("tightness_ratio", report.tightness_ratio),
        ("tight", report.tight),
    ]
    theta = run.get("theta", getattr(args, "theta", None))
    if theta is not None:
        from .analytics import rayleigh_sir_ccdf

        pairs.append(("rayleigh_ccdf", rayleigh_sir_ccdf(model, theta)))
    _print_kv(pairs)
    return 0


def _cmd_simulate(args) -> int:
    model, run = _collect_model(args)
    n = run.get("n", 10000)
    seed = run.get("seed", 0)
    threads = run.get("threads", 1)
    radius = run.get("radius")
    samples = simulate(model, n, seed, radius, n_jobs=threads)
    mean = mean_sir_from_samples(samples)
    rate = spectrum_efficiency_from_samples(samples)
    pairs = [
        ("mean_sir", mean.value),
        ("mean_sir_se", mean.std_error),
        ("mean_sir_trimmed", mean.trimmed_value),
        ("spectrum_efficiency", rate.value),
        ("spectrum_efficiency_se", rate.std_error),
    ]
    theta = run.get("theta")
    if theta is not None:
        tail = ccdf_from_samples(samples, [theta])[0]
        pairs += [("ccdf", tail.value), ("ccdf_se", tail.std_error)]
    pairs += [
        ("n", samples.n),
        ("seed", samples.seed),
        ("radius_m", samples.radius_m),
    ]
    _print_kv(pairs)
    return 0


def _sweep_lambdas(args) -> np.ndarray:
    if getattr(args, "lambdas", None):
        values = np.array([float(v) for v in args.lambdas.split(",")])
    elif getattr(args, "lambda_range", None):
        parts = args.lambda_range.split(":")
        if len(parts) != 3:
            raise ConfigError(f"--lambda-range expects lo:hi:count, got {args.lambda_range!r}")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        values = np.geomspace(lo, hi, count)
    else:
        raise ConfigError("sweep needs --lambdas or --lambda-range")
    if values.ndim != 1 or values.size == 0 or np.any(np.diff(values) <= 0.0):
        raise ConfigError("intensity grid must be strictly increasing")
    return values


def run_sweep(
    model: NetworkModel,
    lambdas,
    n: int,
    seed: int,
    theta: float | None = None,
    radius: float | None = None,
    threads: int = 1,
    label: str | None = None,
) -> SweepResult:
    """Sweep the intensity grid: analytic metrics plus simulated estimates."""
    rows = []
    for lam in np.asarray(lambdas, dtype=float):
        point = model.with_intensity(float(lam))
        report = analytic_report(point)
        samples = simulate(point, n, seed, radius, n_jobs=threads)
        mean = mean_sir_from_samples(samples)
        rate = spectrum_efficiency_from_samples(samples)
        ccdf_val = ccdf_se = thrpt = None
        if theta is not None:
            tail = ccdf_from_samples(samples, [theta])[0]
            ccdf_val, ccdf_se = tail.value, tail.std_error
            thrpt = report.se_upper_bound * float(lam) * ccdf_val
        rows.append(
            SweepRow(
                param=float(lam),
                mean_sir_analytic=report.mean_sir,
                mean_sir_mc=mean.value,
                mean_sir_mc_se=mean.std_error,
                ccdf_mc=ccdf_val,
                ccdf_mc_se=ccdf_se,
                se_bound=report.se_upper_bound,
                se_mc=rate.value,
                se_mc_se=rate.std_error,
                thrpt_cap=thrpt,
                n=samples.n,
                seed=samples.seed,
                radius_m=samples.radius_m,
            )
        )
    metadata = {}
    if label is not None:
        metadata["label"] = label
    metadata.update(
        {
            "model": ";".join(f"{k}={v}" for k, v in model_to_keys(model).items()),
            "n": str(int(n)),
            "seed": str(int(seed)),
        }
    )
    if theta is not None:
        metadata["theta"] = repr(float(theta))
    metadata["radius"] = "auto" if radius is None else repr(float(radius))
    metadata["tool_version"] = __version__
    return SweepResult(rows=rows, metadata=metadata)


def _cmd_sweep(args) -> int:
    model, run = _collect_model(args)
    lambdas = _sweep_lambdas(args)
    sweep = run_sweep(
        model,
        lambdas,
        n=run.get("n", 10000),
        seed=run.get("seed", 0),
        theta=run.get("theta"),
        radius=run.get("radius"),
        threads=run.get("threads", 1),
    )
    out = getattr(args, "out", None) or run.get("out")
    write_sweep_csv(out, sweep)
    print(f"wrote {out}")
    return 0


def _cmd_optimize(args) -> int:
    model, run = _collect_model(args)
    theta = run.get("theta")
    if theta is None:
        raise ConfigError("optimize needs --theta")
    bounds = None
    if getattr(args, "bounds", None):
        parts = args.bounds.split(":")
        if len(parts) != 2:
            raise ConfigError(f"--bounds expects lo:hi, got {args.bounds!r}")
        bounds = (float(parts[0]), float(parts[1]))
    if args.ccdf == "analytic":
        source = RayleighAnalyticCcdf(model)
    else:
        if not getattr(args, "lambdas", None):
            raise ConfigError("simulated CCDF mode needs --lambdas")
        grid = np.array([float(v) for v in args.lambdas.split(",")])
        source = ccdf_curve(
            model,
            theta,
            grid,
            n=run.get("n", 20000),
            seed=run.get("seed", 0),
            n_jobs=run.get("threads", 1),
        )
    result = maximize_throughput(model, theta, source, bounds=bounds)
    _print_kv(
        [
            ("lambda_star", result.lambda_star),
            ("t_star", result.t_star),
            ("in_pi_lambda", result.in_pi_lambda),
            ("bracket_lo", result.bracket[0]),
            ("bracket_hi", result.bracket[1]),
            ("evaluations", result.evaluations),
        ]
    )
    return 0


# --- figure presets ----------------------------------------------------------
#
# The presets fix the models; grids, realization counts and seeds are repo
# choices recorded in the emitted metadata, overridable with --n/--seed.

FIG1_M_GRID = (0.5, 1.0, 2.0, 4.0, 8.0)
FIG1_LAMBDAS = (1e-4, 3e-4, 1e-3)
FIG23_LAMBDAS = tuple(np.geomspace(1e-4, 1e-3, 5))
FIG4_LAMBDAS = tuple(np.geomspace(1e-4, 3e-3, 12))
FIG_THETA = 0.5
FIG4_SHAPE = 2.0
FIG_POWER = ChannelAware(rho=1.0, upsilon=4.0)


def fig1_models() -> list[tuple[str, NetworkModel]]:
    return [
        (
            f"m={m:g}",
            NetworkModel(
                intensity=1e-3,
                alpha=4.0,
                fading_h=GammaUnitMean(m),
                distance=Constant(15.0),
            ),
        )
        for m in FIG1_M_GRID
    ]


def _uniform_distance_model(shape: float, power) -> NetworkModel:
    return NetworkModel(
        intensity=1e-4,
        alpha=4.0,
        fading_h=GammaUnitMean(shape),
        distance=UniformInterval(15.0, 25.0),
        power=power,
    )


def fig23_models() -> list[tuple[str, NetworkModel]]:
    return [
        ("constant-power", _uniform_distance_model(1.0, ConstantPower(1.0))),
        ("power-control", _uniform_distance_model(1.0, FIG_POWER)),
    ]


def fig4_models() -> list[tuple[str, NetworkModel]]:
    return [
        ("constant-power", _uniform_distance_model(FIG4_SHAPE, ConstantPower(1.0))),
        ("power-control", _uniform_distance_model(FIG4_SHAPE, FIG_POWER)),
    ]


_PRESETS = {
    "fig1": (fig1_models, FIG1_LAMBDAS, None, 200000),
    "fig2": (fig23_models, FIG23_LAMBDAS, None, 200000),
    "fig3": (fig23_models, FIG23_LAMBDAS, FIG_THETA, 200000),
    "fig4": (fig4_models, FIG4_LAMBDAS, FIG_THETA, 25000),
}


def _gnuplot_script(csv_path: str, labels: list[str], theta: float | None) -> str:
    base = os.path.basename(csv_path)
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set logscale x",
        "set xlabel 'transmitter intensity (per m^2)'",
        "set key outside",
    ]
    plots = []
    for i, label in enumerate(labels):
        plots.append(f"'{base}' index {i} using 1:2 with lines title '{label} analytic'")
        plots.append(
            f"'{base}' index {i} using 1:3:4 with yerrorbars title '{label} simulated'"
        )
    if theta is not None:
        lines.append(f"# threshold theta={theta}: outage = 1 - column 5")
    lines.append("plot \\")
    lines.append(", \\\n".join("  " + p for p in plots))
    return "\n".join(lines) + "\n"


def _cmd_fig(args) -> int:
    models_fn, lambdas, theta, default_n = _PRESETS[args.command]
    n = args.n if args.n is not None else default_n
    seed = args.seed if args.seed is not None else 42
    threads = args.threads if args.threads is not None else 1
    sweeps = []
    labels = []
    for label, model in models_fn():
        sweeps.append(
            run_sweep(
                model,
                lambdas,
                n=n,
                seed=seed,
                theta=theta,
                threads=threads,
                label=f"{args.command} {label}",
            )
        )
        labels.append(label)
    write_sweep_csv(args.out, sweeps)
    script = os.path.splitext(args.out)[0] + ".gp"
    with open(script, "w") as handle:
        handle.write(_gnuplot_script(args.out, labels, theta))
    print(f"wrote {args.out}")
    print(f"wrote {script}")
    return 0


_DISPATCH = {
    "analytic": _cmd_analytic,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "optimize": _cmd_optimize,
    "fig1": _cmd_fig,
    "fig2": _cmd_fig,
    "fig3": _cmd_fig,
    "fig4": _cmd_fig,
}


def run_command(argv=None) -> int:
    """Run one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help and friends
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return _DISPATCH[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
