# sif/main.py
"""
Command line for the spherical iterative filtering toolkit.

Run from the `app/` directory; global flags go before the subcommand:

    python -m sif.main --out results/test1 test1
    python -m sif.main --out results/test2 test2 --n 100 --iterations 200
"""

import argparse
import logging
import math
import os
import sys
import time
import traceback
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from sif.artifacts import (
    DecompositionReport,
    RunManifest,
    read_signal_csv,
    read_table,
    write_json,
    write_manifest,
    write_signal_csv,
    write_table,
)
from sif.conic_filter import FilterSpec
from sif.container import serialize
from sif.decomposition import DecompositionConfig, ExtremaScaled, FixedRadius, decompose, extract_imf
from sif.glt_symbol import SymbolSpec, counterexample_scan, sample_symbol
from sif.grid import GridPoint, cell_area, cell_diameter, grid_summary, make_grid
from sif.line_if import LineBackend, LineConfig
from sif.operator import SiftOperator, build_approx_Op, build_exact_B, row_sums
from sif.signal_synth import TAPER_FRACTION, WaveSpec, circular_wave, error_curve, error_map, two_wave_preset
from sif.sifting_graph import run_decomposition
from sif.spectrum import FORMS, SORT_CONVENTION, eig_block_circulant, eig_dense, eig_symbol, spectrum_compare
from sif.utils.config import get_settings, reload_settings
from sif.utils.errors import SIFError, UsageError
from sif.utils.logger import get_logger, set_console_level

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# helpers


def _parameters(args: argparse.Namespace) -> dict:
    params = {}
    for key, value in vars(args).items():
        if key == "handler":
            continue
        params[key] = str(value) if isinstance(value, Path) else value
    return params


def _filter(args: argparse.Namespace, gridspec) -> FilterSpec:
    """Filter from --radius or --m; rejects radii the operators cannot take."""
    if args.m is not None:
        filter = FilterSpec.from_cells(args.m, gridspec)
    else:
        filter = FilterSpec.from_radius(args.radius)
    if filter.R >= math.pi / 2:
        raise UsageError(f"--radius must be below pi/2, got {filter.R:.6g}")
    return filter


def _build(args: argparse.Namespace, gridspec, filter: FilterSpec) -> SiftOperator:
    if args.kind == "exact":
        renormalize = getattr(args, "renormalize", False)
        return build_exact_B(gridspec, filter, args.quad_level, renormalize=renormalize)
    return build_approx_Op(gridspec, filter)


def _output_dir(args: argparse.Namespace) -> Path:
    if args.out is None:
        raise UsageError(f"'{args.command}' writes several files and needs --out <directory>")
    out = Path(args.out)
    if not out.is_dir():
        raise FileNotFoundError(f"Output directory does not exist: {out}")
    return out


def _emit_table(
    args: argparse.Namespace,
    frame: pd.DataFrame,
    meta: Dict[str, object],
    timings: Dict[str, float],
    results: Optional[dict] = None,
) -> None:
    """Single-table commands: stdout without --out, else the file plus `<file>.manifest.json`."""
    if args.out is None:
        sys.stdout.write(frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"))
        return
    path = write_table(frame, args.out, meta)
    manifest = RunManifest(
        command=args.command, parameters=_parameters(args), timings=timings, results=results or {}
    )
    manifest.add_output(path)
    write_manifest(manifest, path.with_name(path.name + ".manifest.json"))


def _eig_frame(eigs: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"index": np.arange(1, eigs.size + 1), "real": eigs.real, "imag": eigs.imag})


class _Stopwatch:
    def __init__(self):
        self.timings: Dict[str, float] = {}

    def run(self, name: str, fn: Callable, *a, **kw):
        started = time.perf_counter()
        result = fn(*a, **kw)
        self.timings[name] = round(time.perf_counter() - started, 6)
        return result


# ---------------------------------------------------------------------------
# commands


def cmd_grid_info(args: argparse.Namespace) -> int:
    """JSON summary of the grid; --table lists every latitude row instead."""
    gridspec = make_grid(args.n)
    if args.table:
        j = np.arange(1, gridspec.N + 1)
        frame = pd.DataFrame(
            {
                "j": j,
                "phi": gridspec.phi_centers,
                "cell_area": [cell_area(gridspec, int(k)) for k in j],
                "cell_diameter": [cell_diameter(gridspec, int(k)) for k in j],
            }
        )
        meta = {"N": gridspec.N, "h": gridspec.h, "units": "phi=rad,cell_area=fraction of sphere,cell_diameter=rad"}
        _emit_table(args, frame, meta, {}, {"total_area": float(gridspec.N * frame["cell_area"].sum())})
        return 0
    summary = grid_summary(gridspec)
    if args.out is None:
        sys.stdout.write(summary.model_dump_json(indent=2) + "\n")
        return 0
    path = write_json(summary, args.out)
    manifest = RunManifest(
        command=args.command, parameters=_parameters(args), results={"total_area": summary.total_area}
    )
    manifest.add_output(path)
    write_manifest(manifest, path.with_name(path.name + ".manifest.json"))
    return 0


def cmd_build_operator(args: argparse.Namespace) -> int:
    if args.out is None:
        raise UsageError("build-operator needs --out <file>")
    gridspec = make_grid(args.n)
    filter = _filter(args, gridspec)
    watch = _Stopwatch()
    op = watch.run("assemble", _build, args, gridspec, filter)
    path = watch.run("serialize", serialize, op, args.out)
    sums = row_sums(op)
    manifest = RunManifest(
        command=args.command,
        parameters=_parameters(args),
        timings=watch.timings,
        results={"s_max": op.s_max, "max_row_sum_error": float(np.max(np.abs(sums - 1.0)))},
    )
    manifest.add_output(path)
    write_manifest(manifest, path.with_name(path.name + ".manifest.json"))
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    gridspec = make_grid(args.n)
    filter = _filter(args, gridspec)
    watch = _Stopwatch()
    if args.method == "symbol":
        report = watch.run("eig", eig_symbol, gridspec.N, filter.cells(gridspec))
    else:
        op = watch.run("assemble", _build, args, gridspec, filter)
        if args.method == "dense":
            report = watch.run("eig", eig_dense, op, args.form)
        else:
            report = watch.run("eig", eig_block_circulant, op, args.form, args.threads, args.force)
    meta = {
        "N": report.N,
        "R": report.R,
        "method": report.method,
        "form": report.form,
        "kind": report.kind,
        "sort": SORT_CONVENTION,
        "units": "dimensionless",
    }
    _emit_table(args, _eig_frame(report.eigenvalues), meta, watch.timings, {"min_real": report.min_real})
    return 0


def cmd_spectrum_compare(args: argparse.Namespace) -> int:
    watch = _Stopwatch()
    radius = None if args.m is not None else args.radius
    comparison = watch.run("compare", spectrum_compare, args.n, radius, args.m, args.quad_level, args.force)
    frame = comparison.zoom if args.zoom else comparison.table
    meta = {"N": args.n, "sort": "real parts ascending per column", "zoom": args.zoom, "units": "dimensionless"}
    results = {f"min_real_{name}": report.min_real for name, report in comparison.reports.items()}
    _emit_table(args, frame, meta, watch.timings, results)
    return 0


def cmd_symbol(args: argparse.Namespace) -> int:
    if args.x2 is not None:
        value = sample_symbol(SymbolSpec(m=args.m), args.x2, args.theta1, args.theta2).value
        frame = pd.DataFrame(
            {
                "x2": [args.x2],
                "theta1": [args.theta1],
                "theta2": [args.theta2],
                "real": [value.real],
                "imag": [value.imag],
            }
        )
        _emit_table(args, frame, {"m": args.m, "units": "x2=fraction of latitude,theta=rad"}, {})
        return 0
    if args.n is None:
        raise UsageError("symbol needs either --x2 (point value) or --n (quantiles)")
    watch = _Stopwatch()
    report = watch.run("quantiles", eig_symbol, args.n, args.m, args.oversample)
    meta = {"N": args.n, "m": args.m, "method": "glt_symbol", "sort": SORT_CONVENTION}
    _emit_table(args, _eig_frame(report.eigenvalues), meta, watch.timings, {"min_real": report.min_real})
    return 0


def cmd_counterexample(args: argparse.Namespace) -> int:
    frame = counterexample_scan(args.m, resolution=args.resolution)
    limit = frame.attrs["limit"]
    meta = {"m": args.m, "theta": "(0,pi)", "limit": f"{limit:.17g}"}
    near_zero = frame.loc[frame["x2"] <= 0.02, "negative"]
    _emit_table(args, frame, meta, {}, {"limit": limit, "negative_below_0.02": bool(near_zero.all())})
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    gridspec = make_grid(args.n)
    if args.preset == "two-wave":
        g, _, _ = two_wave_preset(gridspec)
    else:
        if args.k is None:
            raise UsageError("synth without --preset needs --k")
        spec = WaveSpec(
            center=GridPoint(theta=args.center[0], phi=args.center[1]),
            angular_frequency=args.k,
            amplitude=args.amplitude,
            support_radius=args.support,
            taper_fraction=args.taper,
        )
        g = circular_wave(gridspec, spec)
    if args.out is None:
        raise UsageError("synth needs --out <file>")
    path = write_signal_csv(g, args.out, preset=args.preset or "wave")
    manifest = RunManifest(command=args.command, parameters=_parameters(args))
    manifest.add_output(path)
    write_manifest(manifest, path.with_name(path.name + ".manifest.json"))
    return 0


def _write_report(finish_reason: Optional[str], diagnostics: List[dict], path: Path) -> Path:
    return write_json(DecompositionReport(finish_reason=finish_reason, imfs=list(diagnostics)), path)


def cmd_decompose(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    if args.input is not None:
        g = read_signal_csv(args.input)
    else:
        g, _, _ = two_wave_preset(make_grid(args.n))
    rule = FixedRadius(R=args.radius) if args.radius is not None else ExtremaScaled(chi=args.chi)
    overrides = {"radius_rule": rule, "stabilized": not args.naive, "kind": args.kind, "quad_level": args.quad_level}
    if args.delta is not None:
        overrides["delta"] = args.delta
    if args.max_iter is not None:
        overrides["max_inner_iterations"] = args.max_iter
    if args.max_imfs is not None:
        overrides["max_imfs"] = args.max_imfs
    config = DecompositionConfig.from_settings(**overrides)

    watch = _Stopwatch()
    result = watch.run("decompose", decompose, g, config)
    manifest = RunManifest(
        command=args.command,
        parameters=_parameters(args),
        timings=watch.timings,
        results={"imfs": len(result.imfs), "finish_reason": result.finish_reason},
    )
    for k, imf in enumerate(result.imfs, start=1):
        manifest.add_output(write_signal_csv(imf, out / f"imf_{k}.csv", component=f"imf_{k}"), out)
    manifest.add_output(write_signal_csv(result.remainder, out / "remainder.csv", component="remainder"), out)
    manifest.add_output(_write_report(result.finish_reason, result.diagnostics, out / "diagnostics.json"), out)
    write_manifest(manifest, out / "manifest.json")
    return 0


def cmd_dif(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    frame = read_table(args.input)
    if "value" not in frame.columns:
        raise UsageError(f"{args.input}: expected a 'value' column")
    g = frame["value"].to_numpy(dtype=float)
    settings = get_settings().decomposition
    config = LineConfig(
        delta=args.delta if args.delta is not None else settings.delta,
        max_inner_iterations=args.max_iter if args.max_iter is not None else settings.max_inner_iterations,
        max_imfs=args.max_imfs if args.max_imfs is not None else settings.max_imfs,
        chi=args.chi,
        fixed_length=args.length,
        energy_floor=settings.energy_floor,
    )
    watch = _Stopwatch()
    imfs, remainder, diagnostics, finish_reason = watch.run(
        "decompose", run_decomposition, g, LineBackend(config)
    )
    table = pd.DataFrame({"sample": np.arange(g.size)})
    for k, imf in enumerate(imfs, start=1):
        table[f"imf_{k}"] = imf
    table["remainder"] = remainder
    manifest = RunManifest(
        command=args.command,
        parameters=_parameters(args),
        timings=watch.timings,
        results={"imfs": len(imfs), "finish_reason": finish_reason},
    )
    manifest.add_output(write_table(table, out / "components.csv", {"n": g.size}), out)
    manifest.add_output(_write_report(finish_reason, diagnostics, out / "diagnostics.json"), out)
    write_manifest(manifest, out / "manifest.json")
    return 0


def cmd_test1(args: argparse.Namespace) -> int:
    """Eigenvalues of Exact_B, Approx_Op and the symbol quantiles at one radius."""
    out = _output_dir(args)
    gridspec = make_grid(args.n)
    filter = _filter(args, gridspec)
    watch = _Stopwatch()
    comparison = watch.run("compare", spectrum_compare, gridspec.N, filter.R, None, args.quad_level, args.force)

    manifest = RunManifest(command=args.command, parameters=_parameters(args), timings=watch.timings)
    files = {"exact": "eigs_exact.csv", "approx": "eigs_op.csv", "symbol": "eigs_symbol.csv"}
    for name, filename in files.items():
        report = comparison.reports[name]
        meta = {"N": report.N, "R": report.R, "method": report.method, "kind": report.kind, "sort": SORT_CONVENTION}
        manifest.add_output(write_table(_eig_frame(report.eigenvalues), out / filename, meta), out)
        manifest.results[f"min_real_{name}"] = report.min_real
    manifest.add_output(write_table(comparison.table, out / "eigs_compare.csv", {"N": gridspec.N}), out)
    zoom = write_table(comparison.zoom, out / "eigs_zoom.csv", {"N": gridspec.N, "slice": "lowest 20%"})
    manifest.add_output(zoom, out)
    write_manifest(manifest, out / "manifest.json")
    return 0


def cmd_test2(args: argparse.Namespace) -> int:
    """Naive against stabilized extraction of the fast wave of the two-wave preset."""
    out = _output_dir(args)
    gridspec = make_grid(args.n)
    filter = _filter(args, gridspec)
    g, high, _ = two_wave_preset(gridspec)
    watch = _Stopwatch()
    op = watch.run("assemble", _build, args, gridspec, filter)

    naive_curve = watch.run("naive", error_curve, g, high, op, False, args.iterations)
    sif_curve = watch.run("sif", error_curve, g, high, op, True, args.iterations)
    base = dict(delta=args.delta, max_inner_iterations=args.iterations, radius_rule=FixedRadius(R=filter.R))
    naive_imf, naive_diag = extract_imf(g, DecompositionConfig(stabilized=False, **base), operator=op)
    sif_imf, sif_diag = extract_imf(g, DecompositionConfig(stabilized=True, **base), operator=op)

    curves = pd.DataFrame(
        {
            "iteration": np.arange(0, args.iterations + 1),
            "naive_error": [naive_curve.initial_error] + naive_curve.errors,
            "sif_error": [sif_curve.initial_error] + sif_curve.errors,
        }
    )
    meta = {"N": gridspec.N, "R": filter.R, "units": "area-weighted L2 error against the fast wave"}
    manifest = RunManifest(
        command=args.command,
        parameters=_parameters(args),
        timings=watch.timings,
        results={
            "naive_stop_reason": naive_diag["stop_reason"],
            "naive_iterations": naive_diag["iterations"],
            "naive_best_iteration": naive_curve.best_iteration,
            "naive_final_over_initial": naive_curve.errors[-1] / naive_curve.initial_error,
            "sif_stop_reason": sif_diag["stop_reason"],
            "sif_iterations": sif_diag["iterations"],
            "sif_max_over_initial": max(sif_curve.errors) / sif_curve.initial_error,
            "sif_converged": sif_diag["stop_reason"] == "converged",
            "naive_converged": naive_diag["stop_reason"] == "converged",
        },
    )
    outputs = [
        write_signal_csv(g, out / "signal.csv", component="signal"),
        write_signal_csv(
            naive_imf, out / "imf1_naive.csv", component="imf1", iterations=naive_diag["iterations"]
        ),
        write_signal_csv(sif_imf, out / "imf1_sif.csv", component="imf1", iterations=sif_diag["iterations"]),
        write_table(error_map(naive_imf, high), out / "err_map_naive.csv", meta),
        write_table(error_map(sif_imf, high), out / "err_map_sif.csv", meta),
        write_table(curves, out / "err_curves.csv", meta),
    ]
    for path in outputs:
        manifest.add_output(path, out)
    write_manifest(manifest, out / "manifest.json")
    logger.info(
        f"test2: naive {naive_diag['stop_reason']}, "
        f"sif {sif_diag['stop_reason']} after {sif_diag['iterations']} iterations"
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_filter_flags(parser: argparse.ArgumentParser, radius: Optional[float]) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--radius", type=float, default=radius, help="Filter radius in radians.")
    group.add_argument("--m", type=float, default=None, help="Filter radius in grid steps (R = m*pi/N).")


def _add_operator_flags(parser: argparse.ArgumentParser, kind: str = "approx") -> None:
    parser.add_argument("--kind", choices=["exact", "approx"], default=kind, help="Exact_B or Approx_Op.")
    parser.add_argument("--quad-level", type=int, default=None, help="Midpoint subdivisions per axis for Exact_B.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sif", description="Spherical iterative filtering experiments.")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (overrides SIF_THREADS).")
    parser.add_argument("--seed", type=int, default=None, help="Reserved; recorded in the manifest.")
    parser.add_argument("--out", type=Path, default=None, help="Output file or directory.")
    parser.add_argument("--config", type=Path, default=None, help="JSON configuration file.")
    parser.add_argument("--log-level", default=None, help="Console log level.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid-info", help="Grid step, total area and cell extremes as JSON.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--table", action="store_true", help="CSV of every latitude row instead of the summary.")
    p.set_defaults(handler=cmd_grid_info)

    p = sub.add_parser("build-operator", help="Assemble an operator into the binary container.")
    p.add_argument("--n", type=int, required=True)
    _add_filter_flags(p, math.pi / 10)
    _add_operator_flags(p, "exact")
    p.add_argument("--renormalize", action="store_true", help="Scale Exact_B rows to sum exactly 1.")
    p.set_defaults(handler=cmd_build_operator)

    p = sub.add_parser("spectrum", help="Eigenvalues of one operator.")
    p.add_argument("--n", type=int, required=True)
    _add_filter_flags(p, math.pi / 10)
    _add_operator_flags(p)
    p.add_argument("--method", choices=["dense", "block", "symbol"], default="block")
    p.add_argument("--form", choices=list(FORMS), default="B")
    p.add_argument("--force", action="store_true", help="Ignore the block-size cap.")
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("spectrum-compare", help="Sorted real parts of Exact_B, Approx_Op and the symbol.")
    p.add_argument("--n", type=int, required=True)
    _add_filter_flags(p, math.pi / 10)
    p.add_argument("--quad-level", type=int, default=None)
    p.add_argument("--zoom", action="store_true", help="Only the lowest 20% of indices.")
    p.add_argument("--force", action="store_true")
    p.set_defaults(handler=cmd_spectrum_compare)

    p = sub.add_parser("symbol", help="Symbol value at a point, or its quantiles for a grid size.")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--x2", type=float, default=None)
    p.add_argument("--theta1", type=float, default=0.0)
    p.add_argument("--theta2", type=float, default=math.pi)
    p.add_argument("--oversample", type=int, default=None)
    p.set_defaults(handler=cmd_symbol)

    p = sub.add_parser("counterexample", help="Symbol at (0, pi) as x2 approaches 0.")
    p.add_argument("--m", type=float, default=2.0)
    p.add_argument("--resolution", type=int, default=50)
    p.set_defaults(handler=cmd_counterexample)

    p = sub.add_parser("synth", help="Write a synthetic signal CSV.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--preset", choices=["two-wave"], default=None)
    p.add_argument("--center", type=float, nargs=2, metavar=("THETA", "PHI"), default=(0.0, math.pi / 2))
    p.add_argument("--k", type=float, default=None, help="Angular frequency.")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--support", type=float, default=None, help="Taper radius in radians.")
    p.add_argument("--taper", type=float, default=TAPER_FRACTION, help="Share of the support the ramp spans.")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("decompose", help="SIF decomposition of a signal CSV (or the two-wave preset).")
    p.add_argument("--input", type=Path, default=None)
    p.add_argument("--n", type=int, default=100, help="Grid size for the preset when --input is absent.")
    radius = p.add_mutually_exclusive_group()
    radius.add_argument("--radius", type=float, default=None, help="Fixed radius in radians.")
    radius.add_argument(
        "--auto-chi",
        "--chi",
        dest="chi",
        type=float,
        default=1.6,
        help="Extrema rule R = chi * 2 sqrt(4 pi / E); the default when --radius is absent.",
    )
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None, help="Cap on sifting steps per IMF.")
    p.add_argument("--max-imfs", type=int, default=None)
    p.add_argument("--naive", action="store_true", help="Iterate I - B instead of I - BᵀB.")
    _add_operator_flags(p)
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("dif", help="1D discrete iterative filtering of a CSV 'value' column.")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--length", type=int, default=None, help="Fixed filter half-support in samples.")
    p.add_argument("--chi", type=float, default=1.6)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None, help="Cap on sifting steps per IMF.")
    p.add_argument("--max-imfs", type=int, default=None)
    p.set_defaults(handler=cmd_dif)

    p = sub.add_parser("test1", help="Spectra of Exact_B, Approx_Op and the symbol.")
    p.add_argument("--n", type=int, default=100)
    _add_filter_flags(p, math.pi / 10)
    p.add_argument("--quad-level", type=int, default=None)
    p.add_argument("--force", action="store_true")
    p.set_defaults(handler=cmd_test1)

    p = sub.add_parser("test2", help="Naive IF against SIF on the two-wave preset.")
    p.add_argument("--n", type=int, default=100)
    _add_filter_flags(p, math.pi / 20)
    _add_operator_flags(p, "exact")
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--iterations", type=int, default=200)
    p.set_defaults(handler=cmd_test2)

    return parser


def handle_command_error(exc: BaseException) -> int:
    """
    Logs `exc` and returns the exit code: 2 usage, 3 resource limit, 4 numerical failure.
    """
    if isinstance(exc, SIFError):
        level = logging.CRITICAL if exc.exit_code == 4 else logging.ERROR
        logger.log(level, f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    if isinstance(exc, ValidationError):
        logger.error(f"Invalid parameters: {exc}")
        return 2
    if isinstance(exc, np.linalg.LinAlgError):
        logger.critical(f"Numerical failure: {exc}")
        return 4
    if isinstance(exc, (OSError, ValueError)):
        logger.error(f"{type(exc).__name__}: {exc}")
        return 2
    if isinstance(exc, MemoryError):
        logger.error("Out of memory; reduce --n or the quadrature level.")
        return 3
    logger.critical(f"Unexpected failure: {exc}")
    logger.critical(traceback.format_exc())
    return 4


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        os.environ["SIF_CONFIG"] = str(args.config)
    if args.threads is not None:
        os.environ["SIF_THREADS"] = str(args.threads)
    reload_settings()
    try:
        # loading settings applies their logging section; --log-level goes on top
        get_settings()
        if args.log_level:
            set_console_level(args.log_level)
        logger.debug(f"Running {args.command} with {_parameters(args)}")
        return args.handler(args)
    except Exception as exc:
        return handle_command_error(exc)


if __name__ == "__main__":
    sys.exit(main())
