"""Configuration-driven experiment runner; emits CSV.

One JSON config describes the datum, the profile order, the norm indices,
the time schedule and the kernel variants; subcommands run restrictions of
the full pipeline:

    heatshift shifts      --config cfg.json [--out DIR]   -> shifts.csv
    heatshift check       --config cfg.json [--out DIR]   -> shifts.csv + report
    heatshift identities  --config cfg.json [--out DIR]   -> identities.csv
    heatshift decay       --config cfg.json [--out DIR]   -> decay.csv
    heatshift all         --config cfg.json [--out DIR]   -> everything

Exit status: 0 on success, 1 on a config error, 2 when the requested order
has no surviving moments or the isotropy check fails while a time shift was
requested.  Reruns of the same config produce byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import (
    GridSpec,
    error_component_coefficients,
    expected_exponent,
    fit_decay,
    lp_error_norm,
)
from .initialdata import (
    HermiteGaussianSum,
    InitialData,
    MomentTable,
    SampledData,
    TensorTerm,
    compute_moment_table,
)
from .kernels import build_modified_kernel
from .parallel import parallel_map, worker_count
from .shifts import (
    ShiftDerivationError,
    ShiftSet,
    derive_shift_set,
    find_min_nondegenerate_order,
    verify_shift_identities,
    with_zero_spatial_shifts,
    with_zero_time_shifts,
)
from .solution import datum_field, default_sphere_quadrature, sphere_average_profile

DEFAULT_K_MAX = 6
VARIANTS = ("full_shift", "no_time_shift", "no_shift")


class ConfigError(ValueError):
    "Raised when the experiment configuration does not validate."


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    data: InitialData
    k: int | str  # integer order or "auto"
    k_max: int
    p_values: tuple[float, ...]
    times: tuple[float, ...]
    grid_half_width: float
    grid_points_per_axis: int
    sphere: bool
    variants: tuple[str, ...]
    zero_tol: float
    isotropy_tol: float
    output_path: str


def _parse_p(raw) -> float:
    if raw == "inf":
        return math.inf
    try:
        p = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid norm index {raw!r}")
    if p < 1:
        raise ConfigError(f"norm index must be >= 1, got {p}")
    return p


def _parse_data(spec, n: int) -> InitialData:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError('"data" must be an object with a "type" key')
    kind = spec["type"]
    if kind == "hermite_gaussian_sum":
        terms = spec.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ConfigError('"terms" must be a non-empty list of per-axis coefficient lists')
        built = []
        for term in terms:
            if not isinstance(term, list) or len(term) != n:
                raise ConfigError(f"each term needs exactly {n} axis coefficient lists")
            built.append(TensorTerm(tuple(tuple(float(c) for c in axis) for axis in term)))
        return HermiteGaussianSum(tuple(built))
    if kind == "sampled":
        # JSON cannot carry arbitrary evaluators, so sampled data wraps a
        # closed-form base datum behind the quadrature path.
        base = _parse_data(spec.get("base"), n)
        if not isinstance(base, HermiteGaussianSum):
            raise ConfigError('"sampled" data needs a "base" hermite_gaussian_sum datum')
        radius = float(spec.get("radius", 8.0))
        nodes = int(spec.get("nodes_per_axis", 64))
        return SampledData(base.evaluate, n, radius, nodes)
    raise ConfigError(f"unknown data type {kind!r}")


def load_config(path) -> ExperimentConfig:
    "Parse and validate a JSON experiment configuration."
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    try:
        n = int(raw["n"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError('config needs an integer dimension "n"')
    if n < 1:
        raise ConfigError(f"dimension must be >= 1, got {n}")

    if "data" not in raw:
        raise ConfigError('config needs a "data" object')
    data = _parse_data(raw["data"], n)

    k_max = int(raw.get("k_max", DEFAULT_K_MAX))
    if k_max < 0:
        raise ConfigError("k_max must be >= 0")
    k = raw.get("k", "auto")
    if k != "auto":
        try:
            k = int(k)
        except (TypeError, ValueError):
            raise ConfigError(f'"k" must be an integer or "auto", got {k!r}')
        if not 0 <= k <= k_max:
            raise ConfigError(f"k must lie in [0, k_max={k_max}], got {k}")

    p_values = tuple(_parse_p(p) for p in raw.get("p_values", [1, 2, "inf"]))
    if not p_values:
        raise ConfigError("p_values must be non-empty")

    times_spec = raw.get("times", {"start": 16.0, "stop": 1024.0, "count": 7})
    try:
        start = float(times_spec["start"])
        stop = float(times_spec["stop"])
        count = int(times_spec["count"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError('"times" needs numeric "start" < "stop" and integer "count"')
    if not (0 < start < stop) or count < 3:
        raise ConfigError("times need 0 < start < stop and count >= 3")
    times = tuple(float(t) for t in np.geomspace(start, stop, count))

    grid_spec = raw.get("grid", {})
    half_width = float(grid_spec.get("half_width", 8.0))
    points = int(grid_spec.get("points_per_axis", 129 if n <= 2 else 65))
    if half_width <= 0 or points < 3 or points % 2 == 0:
        raise ConfigError("grid needs half_width > 0 and odd points_per_axis >= 3")

    sphere = bool(raw.get("sphere", False))
    variants = tuple(raw.get("variants", ["full_shift", "no_time_shift", "no_shift"]))
    for variant in variants:
        if variant not in VARIANTS:
            raise ConfigError(f"unknown variant {variant!r}; expected subset of {VARIANTS}")

    tolerances = raw.get("tolerances", {})
    zero_tol = float(tolerances.get("zero_tol", 1e-12))
    isotropy_tol = float(tolerances.get("isotropy_tol", 1e-9))
    if zero_tol < 0 or isotropy_tol <= 0:
        raise ConfigError("tolerances must be positive")

    return ExperimentConfig(
        n=n,
        data=data,
        k=k,
        k_max=k_max,
        p_values=p_values,
        times=times,
        grid_half_width=half_width,
        grid_points_per_axis=points,
        sphere=sphere,
        variants=variants,
        zero_tol=zero_tol,
        isotropy_tol=isotropy_tol,
        output_path=str(raw.get("output_path", "out")),
    )


class DegenerateOrderError(RuntimeError):
    "No surviving moment indices at the requested or searched orders."


class IsotropyFailure(RuntimeError):
    "The isotropy check failed while a time shift was requested."


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _fmt_p(p: float) -> str:
    return "inf" if math.isinf(p) else _fmt(p)


def _fmt_tuple(values) -> str:
    return ",".join(_fmt(v) for v in values)


def _fmt_alpha(alpha) -> str:
    return ",".join(str(a) for a in alpha)


@dataclass(frozen=True)
class Derived:
    "Everything the pipeline stages share."

    config: ExperimentConfig
    k: int
    table: MomentTable
    shifts: ShiftSet
    time_shift_requested: bool


def prepare(config: ExperimentConfig) -> Derived:
    "Resolve the order, build the moment table, derive the shifts."
    if config.k == "auto":
        search = compute_moment_table(config.data, config.k_max, config.zero_tol)
        k = find_min_nondegenerate_order(search, config.k_max)
        if k is None:
            raise DegenerateOrderError(
                f"no nonzero moments up to order k_max = {config.k_max}"
            )
    else:
        k = int(config.k)
    table = compute_moment_table(config.data, k + 2, config.zero_tol)
    try:
        shifts = derive_shift_set(
            table, k, zero_tol=config.zero_tol, isotropy_tol=config.isotropy_tol
        )
    except ShiftDerivationError as exc:
        raise DegenerateOrderError(str(exc))
    requested = "full_shift" in config.variants or (config.sphere and k % 2 == 0)
    if requested and not shifts.report.holds:
        lines = [
            "isotropy check failed; time shifts are not well defined:",
            *(
                f"  alpha={alpha} i={i} j={j} residual={_fmt(residual)}"
                for alpha, i, j, residual in shifts.report.violations
            ),
        ]
        raise IsotropyFailure("\n".join(lines))
    return Derived(
        config=config, k=k, table=table, shifts=shifts, time_shift_requested=requested
    )


SHIFTS_HEADER = [
    "alpha",
    "m_alpha",
    "x_star",
    "c_alpha",
    "t_star",
    "max_offdiag_residual",
    "max_diag_spread",
    "complement_residual",
    "isotropy_holds",
]


def write_shifts_csv(path: Path, derived: Derived) -> None:
    report = derived.shifts.report
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SHIFTS_HEADER)
        for alpha in derived.shifts.indices:
            writer.writerow(
                [
                    _fmt_alpha(alpha),
                    _fmt(derived.table[alpha]),
                    _fmt_tuple(derived.shifts.x_star[alpha]),
                    _fmt(report.constants[alpha]),
                    _fmt(derived.shifts.t_star[alpha]),
                    _fmt(report.max_offdiag_residual),
                    _fmt(report.max_diag_spread),
                    _fmt(report.complement_residual),
                    str(report.holds).lower(),
                ]
            )


IDENTITIES_HEADER = ["name", "value"]


def write_identities_csv(path: Path, derived: Derived) -> None:
    residuals = verify_shift_identities(derived.table, derived.shifts)
    components = error_component_coefficients(derived.table, derived.shifts)
    rows = [
        ("shift_identity_scale", residuals.scale),
        ("shift_identity_residual_zeroth_order", residuals.zeroth_order),
        ("shift_identity_residual_general", residuals.general),
        ("first_order_max", components.first_order),
        ("mixed_second_max", components.mixed_second),
        ("diagonal_second_max", components.diagonal_second),
        ("complement_max", components.complement),
    ]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(IDENTITIES_HEADER)
        for name, value in rows:
            writer.writerow([name, _fmt(value)])


DECAY_HEADER = [
    "record",
    "p",
    "variant",
    "t",
    "error",
    "log10_t",
    "log10_error",
    "slope",
    "intercept",
    "r_squared",
    "expected_exponent",
    "expected_exponent_improved",
]

_EXPONENT_VARIANT = {
    "full_shift": "base",
    "no_time_shift": "no_time_shift",
    "sphere": "sphere",
}


def _variant_shift_set(shifts: ShiftSet, variant: str, k: int) -> ShiftSet:
    if variant == "full_shift":
        return shifts
    if variant == "no_time_shift":
        return with_zero_time_shifts(shifts)
    if variant == "no_shift":
        return with_zero_time_shifts(with_zero_spatial_shifts(shifts))
    if variant == "sphere":
        # even orders keep the time shift and drop the spatial one; odd
        # orders keep the spatial shift and drop the time one
        if k % 2 == 0:
            return with_zero_spatial_shifts(shifts)
        return with_zero_time_shifts(shifts)
    raise ValueError(f"unknown variant {variant!r}")


def _difference_evaluator(derived: Derived, variant: str):
    data = derived.config.data
    if not isinstance(data, HermiteGaussianSum):
        raise ConfigError(
            "decay experiments need closed-form data "
            '("hermite_gaussian_sum"); sampled data supports the other stages'
        )
    varied = _variant_shift_set(derived.shifts, variant, derived.k)
    kernel = build_modified_kernel(
        derived.table, derived.k, varied.indices, varied.x_star, varied.t_star
    )
    diff = datum_field(data) - kernel.field()
    if variant != "sphere":
        return diff
    quadrature = default_sphere_quadrature(derived.config.n)

    def sphere_diff(points, t):
        radii = np.sqrt((np.asarray(points) ** 2).sum(axis=1))
        return sphere_average_profile(diff, radii, t, quadrature)

    return sphere_diff


def run_decay(derived: Derived) -> list[list[str]]:
    "Compute all decay series and fits; returns CSV rows below the header."
    config = derived.config
    variants = list(config.variants) + (["sphere"] if config.sphere else [])
    rows: list[list[str]] = []
    for variant in variants:
        diff = _difference_evaluator(derived, variant)
        for p in config.p_values:
            grid = GridSpec(config.grid_half_width, config.grid_points_per_axis, p)
            errors = parallel_map(
                lambda t: lp_error_norm(diff, t, grid, config.n), config.times
            )
            for t, error in zip(config.times, errors):
                rows.append(
                    [
                        "sample",
                        _fmt_p(p),
                        variant,
                        _fmt(t),
                        _fmt(error),
                        _fmt(math.log10(t)),
                        _fmt(math.log10(error)) if error > 0 else "",
                        "",
                        "",
                        "",
                        "",
                        "",
                    ]
                )
            exponent_variant = _EXPONENT_VARIANT.get(variant)
            expected = (
                _fmt(expected_exponent(derived.k, config.n, p, exponent_variant))
                if exponent_variant
                else ""
            )
            improved = (
                _fmt(expected_exponent(derived.k, config.n, p, "improved"))
                if variant == "full_shift"
                else ""
            )
            if all(e > 0 for e in errors):
                fit = fit_decay(config.times, errors)
                slope, intercept, r2 = _fmt(fit.slope), _fmt(fit.intercept), _fmt(fit.r_squared)
            else:
                # the profile reproduces the solution exactly; no rate to fit
                slope = intercept = r2 = ""
            rows.append(
                [
                    "fit",
                    _fmt_p(p),
                    variant,
                    "",
                    "",
                    "",
                    "",
                    slope,
                    intercept,
                    r2,
                    expected,
                    improved,
                ]
            )
    return rows


def write_decay_csv(path: Path, rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(DECAY_HEADER)
        writer.writerows(rows)


def run_experiment(config: ExperimentConfig, out_dir: Path, stages) -> int:
    "Run the requested pipeline stages; returns the process exit status."
    try:
        derived = prepare(config)
    except DegenerateOrderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IsotropyFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir.mkdir(parents=True, exist_ok=True)
    report = derived.shifts.report
    print(f"order k = {derived.k}; surviving indices: "
          + "; ".join(_fmt_alpha(a) for a in derived.shifts.indices))
    print(f"isotropy holds: {report.holds} "
          f"(offdiag {report.max_offdiag_residual:.3e}, "
          f"diag spread {report.max_diag_spread:.3e}, "
          f"complement {report.complement_residual:.3e})")

    if "shifts" in stages:
        write_shifts_csv(out_dir / "shifts.csv", derived)
        print(f"wrote {out_dir / 'shifts.csv'}")
    if "identities" in stages:
        write_identities_csv(out_dir / "identities.csv", derived)
        print(f"wrote {out_dir / 'identities.csv'}")
    if "decay" in stages:
        try:
            rows = run_decay(derived)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        write_decay_csv(out_dir / "decay.csv", rows)
        print(f"wrote {out_dir / 'decay.csv'}")
    return 0


_STAGES = {
    "shifts": ("shifts",),
    "check": ("shifts",),
    "identities": ("identities",),
    "decay": ("decay",),
    "all": ("shifts", "identities", "decay"),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="heatshift",
        description="moment-shifted heat-kernel profiles: shifts, checks, decay rates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("shifts", "derive the shift table and write shifts.csv"),
        ("check", "verify the isotropy condition (exit 2 on failure when required)"),
        ("identities", "write the identity and vanishing-coefficient residuals"),
        ("decay", "run the decay experiments and write decay.csv"),
        ("all", "run every stage"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument("--out", default=None, help="output directory (default: config output_path)")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        worker_count()  # validate HEATSHIFT_THREADS early
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out) if args.out else Path(config.output_path)
    return run_experiment(config, out_dir, _STAGES[args.command])


if __name__ == "__main__":
    sys.exit(main())
