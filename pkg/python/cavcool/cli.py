#!/usr/bin/env python3
"""
cavcool Command Line Interface

Rates, parameter scans, excitation spectra, Monte Carlo ensembles and the
acceptance suite. Tables go to stdout (or --output); logs go to stderr.

Exit codes: 0 success, 1 validation failure or runtime diagnostic,
2 usage or configuration error.
"""

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np

from cavcool.amplitudes import delta_opt, dressed_states, excitation_spectrum, rates_weak_drive
from cavcool.config import CavcoolConfig
from cavcool.dynamics import (
    CoolingTrajectory,
    PhononDistribution,
    default_n_max,
    evolve_pn,
    mean_n_closed_form,
    trajectory_from_distributions,
)
from cavcool.emission import EmissionPattern
from cavcool.errors import CavcoolError, ConfigError, DegenerateCoupling
from cavcool.geometry import GEOMETRY_PRESETS, MCWF_PANELS, apply_geometry_preset, derive_geometry, mcwf_preset
from cavcool.limits import (
    limit_bad_cavity,
    limit_heating_suppression,
    limit_interference_delta0,
    limit_sideband,
    rates_smallk_saturating,
    standing_wave_rates,
)
from cavcool.liouvillian import InternalSpace, auto_truncation, numerical_rates
from cavcool.mcwf import EnsembleSpec, ensemble_mean, fit_cooling_rate, run_ensemble
from cavcool.models import DriveKind, RateResult, SystemParams
from cavcool.records import metadata_for, to_json, write_csv, write_trajectories
from cavcool.scan import Engine, ScanAxis, delta_opt_curve, run_scan

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# Flags that set SystemParams fields directly.
SYSTEM_FLAGS = (
    "gamma",
    "kappa",
    "g",
    "phi",
    "omega",
    "delta",
    "delta_c",
    "eta",
    "theta_l",
    "theta_c",
    "phi_l",
    "drive",
)


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def _parse_set(items: Optional[Sequence[str]]) -> Dict[str, str]:
    overrides = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects section.key=value, got '{item}'")
        overrides[key.strip()] = value.strip()
    return overrides


def load_config(args: argparse.Namespace) -> CavcoolConfig:
    """Defaults, then the config file, then --set, then direct flags"""
    if args.config:
        config = CavcoolConfig.from_yaml(Path(args.config))
    else:
        config = CavcoolConfig.from_default_locations()

    overrides = _parse_set(args.set)
    for name in SYSTEM_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[f"system.{name}"] = value
    if overrides:
        config = config.with_overrides(overrides)

    system = config.system
    if getattr(args, "geometry", None):
        system = apply_geometry_preset(system, args.geometry, derive_geometry(system).g_tilde)
    if getattr(args, "optimal_delta", False):
        system = system.replace(delta=delta_opt(system.delta_c, system))
    if system is not config.system:
        config = config.model_copy(update={"system": system})
    return config


@contextmanager
def open_output(path: Optional[str]) -> Iterator:
    """Yield stdout for None or '-', else the opened file"""
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as f:
            yield f


def exact_rates(p: SystemParams, e: EmissionPattern, pole_floor: float) -> RateResult:
    if p.drive == DriveKind.STANDING_WAVE:
        return standing_wave_rates(p, e, pole_floor)
    return rates_weak_drive(p, e, pole_floor=pole_floor)


def _format_n(value: Optional[float]) -> str:
    return "heating" if value is None else f"{value:.6g}"


def limit_rows(p: SystemParams, e: EmissionPattern, exact: RateResult) -> List[dict]:
    """Each asymptotic formula applicable to ``p`` with its gap to the exact n_st"""
    candidates = [
        ("bad cavity", lambda: limit_bad_cavity(p, e).n_st),
        ("sideband", lambda: limit_sideband(p, e).rates.n_st),
    ]
    if p.drive == DriveKind.TRAVELING_WAVE and p.delta_c == 0.0:
        candidates.append(
            ("interference (δc=0)", lambda: limit_interference_delta0(p, e).n_first_order_kappa)
        )
        candidates.append(("small-κ saturating", lambda: rates_smallk_saturating(p, e).n_st))
    if p.drive == DriveKind.TRAVELING_WAVE and p.delta_c == p.nu / 2.0:
        candidates.append(
            ("heating suppression (δc=ν/2)", lambda: limit_heating_suppression(p, e).n_kappa)
        )

    rows = []
    for name, evaluate in candidates:
        row = {"limit": name, "n_st": None, "gap": None, "note": ""}
        try:
            row["n_st"] = evaluate()
        except CavcoolError as error:
            row["note"] = error.code
            rows.append(row)
            continue
        if row["n_st"] is None:
            row["note"] = "heating"
        elif exact.n_st is not None and exact.n_st != 0.0:
            row["gap"] = (row["n_st"] - exact.n_st) / exact.n_st
        rows.append(row)
    return rows


def write_evolution(args, config: CavcoolConfig, rates: RateResult) -> None:
    """Rate-equation cooling from a Fock state, tabulated with the closed form"""
    p = config.system
    n0 = args.n0
    n_max = default_n_max(n0, rates)
    start = PhononDistribution.fock(n0, n_max, leak_bound=config.numerics.leak_bound)
    if args.t_max is not None:
        t_max = args.t_max
    elif rates.w > 0:
        t_max = 5.0 / rates.w
    else:
        raise ConfigError("--t-max is required when the rates do not cool")
    times = np.linspace(0.0, t_max, args.n_times)
    curve = trajectory_from_distributions(times, evolve_pn(start, rates, p.eta, times), rates)
    closed = np.atleast_1d(mean_n_closed_form(n0, rates, p.eta, times, allow_heating=True))
    with open(args.evolve, "w", newline="") as f:
        write_csv(
            f,
            ["time", "mean_n", "closed_form", "p0", "purity"],
            zip(curve.times, curve.mean_n, closed, curve.ground_population, curve.purity),
            metadata_for(p, "rate_equation", n0=n0, n_max=n_max, w=rates.w),
        )
    logger.info(f"Wrote rate-equation evolution to {args.evolve}")


def cmd_rates(args):
    """Print rates at one parameter point with the limit formulas alongside"""
    config = load_config(args)
    p, e = config.system, config.emission
    try:
        exact = exact_rates(p, e, config.numerics.pole_floor)
    except CavcoolError as error:
        print(f"✗ {type(error).__name__}: {error}")
        return EXIT_FAILURE

    print("Cooling rates:")
    print("-" * 80)
    if p.omega == 0.0:
        print("Note: no drive (Ω = 0), all rates vanish")
    print(f"  A+   = {exact.a_plus:.6g}")
    print(f"  A-   = {exact.a_minus:.6g}")
    print(f"  D    = {exact.d:.6g}")
    print(f"  W    = {exact.w:.6g}")
    print(f"  n_st = {'undefined' if exact.is_undriven else _format_n(exact.n_st)}")
    if exact.is_heating and not exact.is_undriven:
        print("⚠ Heating: A- <= A+, the phonon number grows")

    rows = limit_rows(p, e, exact)
    print()
    print(f"{'Limit formula':32} {'n_st':>14} {'gap':>12}  note")
    print("-" * 80)
    for row in rows:
        value = "" if row["n_st"] is None else f"{row['n_st']:.6g}"
        gap = "" if row["gap"] is None else f"{100 * row['gap']:+.2f}%"
        print(f"{row['limit']:32} {value:>14} {gap:>12}  {row['note']}")

    numeric = None
    if args.numerical:
        if config.numerics.auto_truncate:
            space = auto_truncation(p, start=config.numerics.n_cavity, variant=p.drive)
        else:
            space = InternalSpace(config.numerics.n_cavity)
        try:
            numeric = numerical_rates(p, space, e, variant=p.drive)
        except CavcoolError as error:
            print(f"✗ liouvillian engine: {type(error).__name__}: {error}")
            return EXIT_FAILURE
        print()
        print(f"Liouvillian engine (n_cavity={space.n_cavity}):")
        print(f"  A+ = {numeric.a_plus:.6g}  A- = {numeric.a_minus:.6g}  D = {numeric.d:.6g}")
        print(f"  n_st = {_format_n(numeric.n_st)}")

    if args.evolve:
        write_evolution(args, config, exact)

    if args.json:
        data = {
            "params": p.to_record(),
            "rates": exact.as_dict(),
            "limits": rows,
            "numerical": numeric.as_dict() if numeric else None,
        }
        with open(args.json, "w") as f:
            f.write(to_json(data) + "\n")
    return EXIT_OK


def _apply_scan_flags(config: CavcoolConfig, args) -> CavcoolConfig:
    changes = {}
    if args.axis1:
        changes["axis1"] = ScanAxis.parse(args.axis1)
    if args.axis2:
        changes["axis2"] = ScanAxis.parse(args.axis2)
    if args.engine:
        changes["engine"] = Engine(args.engine)
    if args.follow_optimum is not None:
        changes["follow_optimum"] = args.follow_optimum
    if args.outputs:
        changes["outputs"] = [name.strip() for name in args.outputs.split(",")]
    if not changes:
        return config
    scan = config.scan.model_validate({**config.scan.model_dump(), **changes})
    return config.model_copy(update={"scan": scan})


def cmd_scan(args):
    """Scan a one- or two-dimensional parameter grid"""
    config = load_config(args)
    try:
        config = _apply_scan_flags(config, args)
    except ValueError as exc:
        raise ConfigError(f"invalid scan options: {exc}") from exc

    result = run_scan(config.scan_spec(), workers=args.workers)
    with open_output(args.output) as stream:
        result.write_csv(stream)
    gnuplot = args.gnuplot
    if gnuplot is None and config.output.gnuplot:
        gnuplot = str(config.output.directory / f"{config.output.prefix}_scan.dat")
    if gnuplot:
        with open(gnuplot, "w") as f:
            result.write_gnuplot(f, args.gnuplot_output)
    if args.curve:
        if result.spec.axis1.name != "delta_c":
            logger.warning("--curve needs delta_c on axis 1; skipped")
        else:
            curve = delta_opt_curve(config.system, result.xs)
            with open(args.curve, "w") as f:
                write_csv(
                    f,
                    ["delta_c", "delta_opt"],
                    [(dc, "inf" if d is None else d) for dc, d in curve],
                    metadata_for(config.system, "analytic"),
                )

    heating = sum(1 for cell in result.cells if cell.heating and cell.error is None)
    failed = sum(1 for cell in result.cells if cell.error is not None)
    print(
        f"✓ Scanned {len(result.cells)} cells ({heating} heating, {failed} errors)",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_spectrum(args):
    """Weak-drive excitation spectrum with dressed-state markers"""
    config = load_config(args)
    p = config.system
    grid = np.linspace(args.start, args.stop, args.points)
    rates = excitation_spectrum(p, grid)

    markers = [""] * grid.size
    extra = {}
    try:
        dressed = dressed_states(p)
    except DegenerateCoupling:
        dressed = None
    if dressed is not None:
        for label, position in zip(("+", "-"), dressed.resonances):
            extra[f"resonance_{'plus' if label == '+' else 'minus'}"] = position
            if grid[0] <= position <= grid[-1]:
                markers[int(np.argmin(np.abs(grid - position)))] = label
        extra.update(
            lambda_plus=dressed.lambda_plus,
            lambda_minus=dressed.lambda_minus,
            gamma_plus=dressed.gamma_plus,
            gamma_minus=dressed.gamma_minus,
            theta_mix=dressed.theta_mix,
        )

    with open_output(args.output) as stream:
        write_csv(
            stream,
            ["delta", "rate", "marker"],
            zip(grid, rates, markers),
            metadata_for(p, "analytic", delta_cav=p.delta_cav, **extra),
        )
    return EXIT_OK


def _summarize(trajectories) -> CoolingTrajectory:
    if len(trajectories) >= 2:
        return ensemble_mean(trajectories)
    only = trajectories[0]
    w, n_inf = fit_cooling_rate(only.times, only.phonons)
    return CoolingTrajectory(
        times=only.times.copy(),
        mean_n=only.phonons.copy(),
        w=w,
        n_st=n_inf,
        std_error=np.zeros_like(only.phonons),
        extra={
            "n_trajectories": 1,
            "excitation": only.excitation,
            "photons": only.photons,
            "total_jumps": only.n_jumps,
        },
    )


def cmd_mcwf(args):
    """Run a trajectory ensemble and compare with the rate equation"""
    config = load_config(args)
    updates = {
        "n_trajectories": args.trajectories,
        "seed": args.seed,
        "t_max": args.t_max,
        "n_times": args.n_times,
    }
    updates = {key: value for key, value in updates.items() if value is not None}
    if updates:
        try:
            mcwf = config.mcwf.model_validate({**config.mcwf.model_dump(), **updates})
        except ValueError as exc:
            raise ConfigError(f"invalid ensemble options: {exc}") from exc
        config = config.model_copy(update={"mcwf": mcwf})
    settings = config.mcwf

    p = mcwf_preset(*MCWF_PANELS[args.panel]) if args.panel else config.system
    e = config.emission
    spec = EnsembleSpec(
        params=p.model_dump(mode="json"),
        emission=e.model_dump(mode="json"),
        n_cavity=settings.n_cavity,
        n_motion=settings.n_motion,
        t_grid=settings.time_grid(),
        seed=settings.seed,
        initial_n=settings.initial_n,
        initial=settings.initial,
        dt=settings.dt,
        leak_bound=settings.leak_bound,
    )
    trajectories = run_ensemble(spec, settings.n_trajectories, args.workers)
    summary = _summarize(trajectories)

    rates = numerical_rates(p, InternalSpace(config.numerics.n_cavity), e, variant=p.drive)
    n0 = float(summary.mean_n[0])
    overlay = np.atleast_1d(mean_n_closed_form(n0, rates, p.eta, summary.times, allow_heating=True))

    metadata = metadata_for(
        p,
        "mcwf",
        seed=settings.seed,
        n_trajectories=len(trajectories),
        n_cavity=settings.n_cavity,
        n_motion=settings.n_motion,
        initial=settings.initial,
        initial_n=settings.initial_n,
        w_fit=summary.w,
        w_rate_equation=rates.w,
        n_st_rate_equation=rates.n_st,
        total_jumps=summary.extra["total_jumps"],
    )
    rows = zip(
        summary.times,
        summary.mean_n,
        summary.std_error,
        overlay,
        summary.extra["excitation"],
        summary.extra["photons"],
    )
    with open_output(args.output) as stream:
        write_csv(
            stream,
            ["time", "mean_n", "std_error", "rate_equation", "excitation", "photons"],
            rows,
            metadata,
        )
    if args.binary:
        write_trajectories(Path(args.binary), trajectories, p, settings.seed)
    if args.json:
        with open(args.json, "w") as f:
            f.write(
                to_json(
                    {
                        "params": p.to_record(),
                        "n_trajectories": len(trajectories),
                        "w_fit": summary.w,
                        "n_fit": summary.n_st,
                        "final_mean_n": float(summary.mean_n[-1]),
                        "rate_equation": rates.as_dict(),
                    }
                )
                + "\n"
            )
    return EXIT_OK


def cmd_validate(args):
    """Run the acceptance suite"""
    from cavcool.reports.validation_report import render_json, render_markdown, render_text
    from cavcool.validation import run_validation

    selected = None
    if args.criteria:
        try:
            selected = [int(item) for item in args.criteria.split(",") if item.strip()]
        except ValueError:
            raise ConfigError(f"--criteria expects numbers like 1,2,5, got '{args.criteria}'")
    try:
        report = run_validation(selected, quick=args.quick, workers=args.workers)
    except ValueError as error:
        raise ConfigError(str(error)) from error

    print(render_text(report), end="")
    if args.json:
        with open(args.json, "w") as f:
            f.write(render_json(report) + "\n")
    if args.markdown:
        with open(args.markdown, "w") as f:
            f.write(render_markdown(report))
    return EXIT_OK if report.passed else EXIT_FAILURE


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to cavcool.yaml (default: auto-detect)")
    common.add_argument(
        "--set",
        action="append",
        metavar="SECTION.KEY=VALUE",
        help="Override a config value (repeatable)",
    )
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: INFO)",
    )
    common.add_argument("--workers", type=int, help="Worker processes (default: CAVCOOL_WORKERS or CPU count)")

    system = common.add_argument_group("system parameters (override the config file)")
    for name in SYSTEM_FLAGS:
        flag = "--" + name.replace("_", "-")
        if name == "drive":
            system.add_argument(flag, choices=[kind.value for kind in DriveKind])
        else:
            system.add_argument(flag, metavar="VALUE", help=f"SystemParams.{name} (angles accept pi/4)")
    system.add_argument(
        "--geometry", choices=sorted(GEOMETRY_PRESETS), help="Named axis geometry (keeps g_tilde)"
    )
    system.add_argument(
        "--optimal-delta", action="store_true", help="Set delta to delta_opt(delta_c)"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="cavcool",
        description="Cavity-assisted ground-state cooling simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    rates = subparsers.add_parser("rates", parents=[common], help="Rates at one parameter point")
    rates.add_argument("--numerical", action="store_true", help="Also run the liouvillian engine")
    rates.add_argument("--json", help="Write a JSON report")
    rates.add_argument("--evolve", help="Write the rate-equation evolution table")
    rates.add_argument("--n0", type=int, default=2, help="Initial Fock state of --evolve")
    rates.add_argument("--t-max", type=float, help="Final time of --evolve (default 5/W)")
    rates.add_argument("--n-times", type=int, default=101, help="Time points of --evolve")

    scan = subparsers.add_parser("scan", parents=[common], help="Parameter scan to CSV")
    scan.add_argument("--axis1", help="name:start:stop:points")
    scan.add_argument("--axis2", help="name:start:stop:points")
    scan.add_argument("--engine", choices=[engine.value for engine in Engine])
    scan.add_argument(
        "--follow-optimum",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Put delta on the optimum line delta_opt(delta_c)",
    )
    scan.add_argument("--outputs", help="Comma-separated subset of n_st,w,a_plus,a_minus,d")
    scan.add_argument("--output", help="CSV path (default: stdout)")
    scan.add_argument("--gnuplot", help="Also write a gnuplot matrix")
    scan.add_argument("--gnuplot-output", default="n_st", help="Output shown in the gnuplot matrix")
    scan.add_argument("--curve", help="Also write the delta_opt(delta_c) curve")

    spectrum = subparsers.add_parser("spectrum", parents=[common], help="Excitation spectrum")
    spectrum.add_argument("--start", type=float, default=-100.0, help="First laser detuning")
    spectrum.add_argument("--stop", type=float, default=100.0, help="Last laser detuning")
    spectrum.add_argument("--points", type=int, default=2001, help="Grid points")
    spectrum.add_argument("--output", help="CSV path (default: stdout)")

    mcwf = subparsers.add_parser("mcwf", parents=[common], help="Monte Carlo ensemble")
    mcwf.add_argument("--panel", choices=sorted(MCWF_PANELS), help="Preset comparison panel")
    mcwf.add_argument("--trajectories", type=int, help="Ensemble size")
    mcwf.add_argument("--seed", type=int, help="Ensemble seed")
    mcwf.add_argument("--t-max", type=float, help="Final time")
    mcwf.add_argument("--n-times", type=int, help="Output grid points")
    mcwf.add_argument("--output", help="CSV path (default: stdout)")
    mcwf.add_argument("--binary", help="Write binary trajectory records")
    mcwf.add_argument("--json", help="Write a JSON summary")

    validate = subparsers.add_parser("validate", parents=[common], help="Run the acceptance suite")
    validate.add_argument("--quick", action="store_true", help="Reduced workload for CI")
    validate.add_argument("--criteria", help="Comma-separated criterion numbers")
    validate.add_argument("--json", help="Write machine-readable verdicts")
    validate.add_argument("--markdown", help="Write a Markdown report")
    return parser


COMMANDS = {
    "rates": cmd_rates,
    "scan": cmd_scan,
    "spectrum": cmd_spectrum,
    "mcwf": cmd_mcwf,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as error:
        print(f"✗ Configuration error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except CavcoolError as error:
        print(f"✗ {type(error).__name__} ({error.code}): {error}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
