"""Scenario runner: recall / capture / roundtrip / sweep / calibrate.

Each command reads an optional scenario file, runs one operation and
writes plot-ready CSV (plus a short text report where useful) into the
output directory.  Times are serialized in ns, resistances in ohm,
energies in fJ.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import crossbar, recording, variability
from .scenario import Scenario, ScenarioError, load_scenario
from .wavefront import read_wavefront_csv, write_wavefront_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tempmem",
        description="Behavioral simulator of a memristive temporal memory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", metavar="FILE", help="scenario file")
        p.add_argument("--out", metavar="DIR", default="out",
                       help="output directory (default: out)")
        p.add_argument("--seed", type=int, metavar="U64",
                       help="override variation.seed")

    p = sub.add_parser("recall", help="recall a stored column as a wavefront")
    common(p)
    p.add_argument("--grid", metavar="CSV",
                   help="resistance grid (row,col,resistance_ohm); "
                        "default: fresh ON array")

    p = sub.add_parser("capture", help="record a wavefront into a column")
    common(p)
    p.add_argument("--input", metavar="CSV", required=True,
                   help="wavefront file (channel,time_ns)")
    p.add_argument("--path", choices=["native", "digital"],
                   help="override run.path")

    p = sub.add_parser("roundtrip", help="capture, reset, recall and score")
    common(p)
    p.add_argument("--input", metavar="CSV", required=True)
    p.add_argument("--path", choices=["native", "digital"])

    p = sub.add_parser("sweep", help="Monte Carlo round trips with variation")
    common(p)
    p.add_argument("--trials", type=int, metavar="N", help="override run.trials")
    p.add_argument("--path", choices=["native", "digital"])

    p = sub.add_parser("calibrate",
                       help="derive amp_a, theta and v_read from targets")
    common(p)
    return parser


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario) if args.scenario else Scenario()
    if args.seed is not None:
        scenario = replace(scenario,
                           variation=replace(scenario.variation, seed=args.seed))
    if getattr(args, "path", None):
        scenario = replace(scenario, run=replace(scenario.run, path=args.path))
    if getattr(args, "trials", None):
        scenario = replace(scenario, run=replace(scenario.run, trials=args.trials))
    return scenario


def _fj(energy_j: float) -> str:
    return repr(energy_j / 1e-15)


def _write_csv_row(path: Path, header: list[str], row: list[str]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerow(row)


def _cmd_recall(args, scenario: Scenario, outdir: Path) -> int:
    cfg = scenario.array
    if args.grid:
        state = crossbar.read_grid_csv(args.grid, cfg, scenario.device)
    else:
        state = crossbar.new_array(cfg, scenario.device)
    w, energy = crossbar.recall(state, cfg, scenario.run.column)
    write_wavefront_csv(outdir / "wavefront.csv", w)
    _write_csv_row(outdir / "energy.csv",
                   ["per_line_fj", "stored_fj", "dissipated_fj"],
                   [_fj(energy.per_line), _fj(energy.stored), _fj(energy.dissipated)])
    print(f"recalled column {scenario.run.column}: "
          f"span {w.span:.3f} ns, {energy.per_line / 1e-15:.1f} fJ/line")
    return 0


def _capture(scenario: Scenario, w) -> tuple:
    cfg = scenario.array
    run = scenario.run
    state = crossbar.new_array(cfg, scenario.device)
    if run.path == "native":
        return recording.capture_native(
            state, cfg, scenario.device, run.column, w, run.v_write,
            window_ns=run.window_ns)
    return recording.capture_digital(
        state, cfg, scenario.device, run.column, w, scenario.quantizer,
        tol=run.tol, v_write=run.v_write, step=run.step_ns,
        max_iters=run.max_iters, window_ns=run.window_ns)


def _cmd_capture(args, scenario: Scenario, outdir: Path) -> int:
    w = read_wavefront_csv(args.input)
    if len(w) != scenario.array.rows:
        scenario = replace(scenario,
                           array=replace(scenario.array, rows=len(w)))
    state, result = _capture(scenario, w)
    recording.write_capture_csv(outdir / "capture.csv", result)
    crossbar.write_grid_csv(outdir / "grid.csv", state)
    report = [
        f"path:             {scenario.run.path}",
        f"write energy:     {result.write_energy / 1e-15:.2f} fJ",
        f"window exceeded:  {result.window_exceeded}",
        f"all converged:    {all(result.converged)}",
    ]
    (outdir / "capture_report.txt").write_text("\n".join(report) + "\n")
    print("\n".join(report))
    return 0


def _cmd_roundtrip(args, scenario: Scenario, outdir: Path) -> int:
    w = read_wavefront_csv(args.input)
    if len(w) != scenario.array.rows:
        scenario = replace(scenario,
                           array=replace(scenario.array, rows=len(w)))
    settings = scenario.sweep_settings()
    rt = recording.round_trip(
        w, scenario.array, scenario.device, path=settings.path,
        col=settings.column, v_write=settings.v_write,
        quantizer=settings.quantizer, tol=settings.tol, step=settings.step_ns,
        max_iters=settings.max_iters, scale_cap=settings.scale_cap,
        window_ns=settings.window_ns)
    write_wavefront_csv(outdir / "input_wavefront.csv", rt.input_normalized)
    write_wavefront_csv(outdir / "recalled_wavefront.csv", rt.recalled)
    _write_csv_row(
        outdir / "metrics.csv",
        ["tau", "rms_ns", "max_abs_ns", "effective_bits", "span_ns",
         "c_scale_pf", "write_energy_fj", "recall_per_line_fj",
         "window_exceeded", "all_converged"],
        [repr(rt.tau), repr(rt.rms_ns), repr(rt.max_abs_ns), repr(rt.bits),
         repr(w.span), repr(rt.c_used / 1e-12), _fj(rt.capture.write_energy),
         _fj(rt.recall_energy.per_line), str(int(rt.capture.window_exceeded)),
         str(int(all(rt.capture.converged)))])
    print(f"round trip ({scenario.run.path}): tau {rt.tau:.3f}, "
          f"rms {rt.rms_ns:.3f} ns, {rt.bits:.2f} bits")
    return 0


def _cmd_sweep(args, scenario: Scenario, outdir: Path) -> int:
    cfg = scenario.array
    if scenario.run.channels != cfg.rows:
        cfg = replace(cfg, rows=scenario.run.channels)
    report, rows = variability.monte_carlo(
        cfg, scenario.device, scenario.variation, scenario.run.trials,
        scenario.sweep_settings(), workers=scenario.run.workers)
    variability.write_trial_report_csv(outdir / "trial_report.csv", report)
    variability.write_trials_csv(outdir / "trials.csv", rows)
    text = variability.format_trial_report(report)
    (outdir / "trial_report.txt").write_text(text)
    print(text, end="")
    return 0


def _cmd_calibrate(args, scenario: Scenario, outdir: Path) -> int:
    cal = scenario.calibrate
    dev = scenario.device
    cfg = scenario.array
    amp_a = cal.r_span_ohm / math.log1p(cal.span_ns / dev.tau_w)
    lnf = cal.span_ns * 1e-9 / (cal.r_span_ohm * cfg.c_line)
    theta = 1.0 - math.exp(-lnf)
    v_read = math.sqrt(cal.energy_fj * 1e-15 / cfg.c_line)
    _write_csv_row(
        outdir / "calibration.csv",
        ["amp_a_ohm", "theta", "v_read_v", "span_ns", "r_span_ohm",
         "energy_fj", "c_line_pf", "tau_w_ns"],
        [repr(amp_a), repr(theta), repr(v_read), repr(cal.span_ns),
         repr(cal.r_span_ohm), repr(cal.energy_fj), repr(cfg.c_line / 1e-12),
         repr(dev.tau_w)])
    print(f"amp_a = {amp_a:.2f} ohm, theta = {theta:.4f}, "
          f"v_read = {v_read:.4f} V")
    return 0


_COMMANDS = {
    "recall": _cmd_recall,
    "capture": _cmd_capture,
    "roundtrip": _cmd_roundtrip,
    "sweep": _cmd_sweep,
    "calibrate": _cmd_calibrate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scenario = _load(args)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](args, scenario, outdir)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
