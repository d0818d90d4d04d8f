"""Command-line interface: simulate, estimate, repeater, sensitivity,
reconstruct, oracle-check.

Every emitted file starts with a schema-version line: JSON-lines logs carry
it in the header object, CSV files as a leading '# <schema>' comment line,
and graymaps as the comment line right after the P2 magic (the magic has to
come first for the format to stay readable by standard tools).

All randomness flows from the configured master seed through named
substreams; nothing reads the clock, so equal (config, seed) pairs give
byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import config as cfg
from .errors import ConfigError, InfeasibleBudgetError, LowStatisticsError
from .estimation import BaselineSet, estimate_visibility, reconstruct_image
from .eventlog import EventLog, fringe_counts, pair_counts
from .repeater import chain_simulate, figure_of_merit
from .rng import stream
from .schemes import simulate_run
from .sensitivity import limiting_magnitude
from .sky import Baseline, save_pgm, visibility

SUMMARY_CSV_SCHEMA = "entscope.delta-summary-csv.v1"
PAIR_CSV_SCHEMA = "entscope.pair-summary-csv.v1"
FIT_CSV_SCHEMA = "entscope.fringe-fit-csv.v1"
CHAIN_CSV_SCHEMA = "entscope.chain-csv.v1"
BUDGET_CSV_SCHEMA = "entscope.budget-csv.v1"
IMAGE_PGM_SCHEMA = "entscope.image-pgm.v1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_LOW_STATISTICS = 3
EXIT_INFEASIBLE = 4


def _write_csv(path, schema: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"# {schema}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _ensure_out_dir(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def _delta_summary_rows(log: EventLog):
    deltas, successes, totals = fringe_counts(log)
    rows = []
    for i, d in enumerate(log.deltas):
        corr = int(successes[i]) if i < len(successes) else 0
        acc = int(totals[i]) if i < len(totals) else 0
        rows.append([f"{float(d):.12g}", corr, acc - corr, acc])
    return rows


def cmd_simulate(args) -> int:
    parser = cfg.load_config(args.config)
    scheme = cfg.build_scheme(parser)
    source = cfg.build_source(parser, os.path.dirname(os.path.abspath(args.config)))
    geometry = cfg.build_geometry(parser, scheme)
    seed, out_dir, threads, _, n_slots = cfg.run_options(
        parser, args.seed, args.out_dir, args.threads)
    if args.n_slots is not None:
        n_slots = args.n_slots
    out_dir = _ensure_out_dir(out_dir)
    log = simulate_run(scheme, source, geometry, n_slots, seed, threads=threads)
    log_path = os.path.join(out_dir, "events.jsonl")
    log.write_jsonl(log_path)
    if scheme.kind == "w_state":
        table = sorted(pair_counts(log, scheme.n_telescopes).items())
        rows = [[i, j, c, t] for (i, j), (c, t) in table]
        _write_csv(os.path.join(out_dir, "summary.csv"), PAIR_CSV_SCHEMA,
                   ["tel_i", "tel_j", "correlated", "accepted"], rows)
        accepted = sum(t for _, (_, t) in table)
    else:
        _write_csv(os.path.join(out_dir, "summary.csv"), SUMMARY_CSV_SCHEMA,
                   ["delta", "correlated", "anticorrelated", "accepted"],
                   _delta_summary_rows(log))
        accepted = int(fringe_counts(log)[2].sum())
    print(f"simulated {n_slots} slots ({scheme.kind}); {accepted} accepted "
          f"coincidences -> {log_path}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    log = EventLog.read_jsonl(args.log)
    fit = estimate_visibility(log)
    out_dir = _ensure_out_dir(args.out_dir or "out")
    rows = [[f"{d:.12g}", s, t] for d, s, t in fit.table]
    _write_csv(os.path.join(out_dir, "fringe_fit.csv"), FIT_CSV_SCHEMA,
               ["delta", "correlated", "accepted"], rows)
    print(f"V_hat = {fit.visibility.real:+.6f}{fit.visibility.imag:+.6f}j  "
          f"|V| = {fit.amplitude:.6f} +- {fit.amplitude_error:.6f}  "
          f"arg V = {fit.phase:+.6f} +- {fit.phase_error:.6f}  "
          f"({fit.accepted} accepted events)")
    return EXIT_OK


def cmd_repeater(args) -> int:
    parser = cfg.load_config(args.config)
    segments, links, policy, n_trials, efficiency, bandwidth = cfg.build_chain(parser)
    seed, out_dir, _, mode, _ = cfg.run_options(
        parser, args.seed, args.out_dir, None, _mode_from_flags(args))
    out_dir = _ensure_out_dir(out_dir)
    rng = stream(seed) if mode == "monte-carlo" else None
    result = chain_simulate(segments, links, policy, rng=rng, n_trials=n_trials)
    merit = figure_of_merit(result.rate, efficiency, bandwidth)
    policy_label = (f"{'memory' if policy.with_memory else 'memoryless'}"
                    f"/distill={','.join(map(str, policy.distill_rounds)) or 'none'}")
    _write_csv(os.path.join(out_dir, "chain.csv"), CHAIN_CSV_SCHEMA,
               ["segments", "policy", "rate", "fidelity", "merit_nm"],
               [[segments, policy_label, f"{result.rate:.9e}",
                 f"{result.fidelity:.9f}", f"{merit:.9e}"]])
    print(f"segments={segments} policy={policy_label} r={result.rate:.6e} "
          f"F={result.fidelity:.6f} s={merit:.6e} nm")
    return EXIT_OK


def _budget_rows(budget) -> list[list[str]]:
    m_lim = limiting_magnitude(budget)
    rows = [
        ["wavelength_nm", f"{budget.wavelength * 1e9:.6g}"],
        ["bandwidth_nm", f"{budget.bandwidth_nm:.6g}"],
        ["aperture_diameter_m", f"{budget.aperture_diameter:.6g}"],
        ["rate", f"{budget.rate:.6g}"],
        ["efficiency", f"{budget.efficiency:.6g}"],
        ["dark_counts_per_s", f"{budget.dark_counts_per_s:.6g}"],
        ["timing_fwhm_ps", f"{budget.timing_fwhm * 1e12:.6g}"],
        ["atmospheric_coherence_time_ms",
         f"{budget.atmospheric_coherence_time * 1e3:.6g}"],
        ["min_events", str(budget.min_events)],
        ["n_channels", str(budget.n_channels)],
        ["merit_nm", f"{budget.merit_nm:.6g}"],
        ["limiting_magnitude", f"{m_lim:.2f}"],
    ]
    return rows


def cmd_sensitivity(args) -> int:
    if args.config:
        parser = cfg.load_config(args.config)
        budget = cfg.build_budget(parser)
        out_dir = args.out_dir
        if out_dir is None and parser.has_section("run"):
            out_dir = parser.get("run", "out_dir", fallback=None)
    else:
        budget = cfg.budget_preset(args.budget)
        out_dir = args.out_dir
    rows = _budget_rows(budget)
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value}")
    if out_dir:
        out_dir = _ensure_out_dir(out_dir)
        _write_csv(os.path.join(out_dir, "budget.csv"), BUDGET_CSV_SCHEMA,
                   ["quantity", "value"], rows)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    parser = cfg.load_config(args.config)
    source = cfg.build_source(parser, os.path.dirname(os.path.abspath(args.config)))
    grid, pixel_scale = cfg.build_reconstruct(parser)
    wavelength = 800e-9
    if parser.has_section("baseline"):
        wavelength = parser.getfloat("baseline", "wavelength", fallback=800e-9)
    out_dir = _ensure_out_dir(args.out_dir or (
        parser.get("run", "out_dir", fallback="out")
        if parser.has_section("run") else "out"))

    two_d = source.grid is not None or (
        source.points and isinstance(source.points[0][0], tuple))
    samples = BaselineSet()
    unit = wavelength / (grid * pixel_scale)
    half = grid // 2
    if two_d:
        for kx in range(-half, grid - half):
            for ky in range(-half, grid - half):
                b = Baseline((kx * unit, ky * unit), wavelength)
                samples.add(b, visibility(source, b))
        image = reconstruct_image(samples, (grid, grid), pixel_scale)
    else:
        for k in range(-half, grid - half):
            b = Baseline(k * unit, wavelength)
            samples.add(b, visibility(source, b))
        image = reconstruct_image(samples, grid, pixel_scale).reshape(1, -1)
    path = os.path.join(out_dir, "image.pgm")
    save_pgm(path, image, comment=IMAGE_PGM_SCHEMA)
    peak = np.unravel_index(np.argmax(image), image.shape)
    print(f"reconstructed {image.shape[0]}x{image.shape[1]} image -> {path} "
          f"(peak at pixel {tuple(int(p) for p in peak)})")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from . import oracle

    failures, lines = oracle.run_all()
    for line in lines:
        print(line)
    if failures:
        print(f"{failures} oracle comparison group(s) FAILED")
        return 1
    print("all oracle comparisons passed")
    return EXIT_OK


def _mode_from_flags(args) -> str | None:
    if getattr(args, "analytic", False):
        return "analytic"
    if getattr(args, "monte_carlo", False):
        return "monte-carlo"
    return None


def _add_common(sub, config_required=True):
    sub.add_argument("--config", required=config_required,
                     help="INI scenario file")
    sub.add_argument("--seed", type=int, default=None,
                     help="master seed (overrides [run] seed)")
    sub.add_argument("--out-dir", default=None,
                     help="artifact directory (overrides [run] out_dir)")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker threads for slot simulation")
    mode = sub.add_mutually_exclusive_group()
    mode.add_argument("--analytic", action="store_true",
                      help="closed-form expectations instead of sampling")
    mode.add_argument("--monte-carlo", action="store_true",
                      help="force Monte Carlo sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entscope",
        description="Entangled-state interferometry: simulation, estimation, "
                    "repeater chains, sensitivity budgets, imaging.")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run a measurement scheme, write "
                                           "event log + per-delta summary")
    _add_common(sim)
    sim.add_argument("--n-slots", type=int, default=None,
                     help="override [run] n_slots")
    sim.set_defaults(func=cmd_simulate)

    est = subs.add_parser("estimate", help="fit a visibility from an event log")
    est.add_argument("--log", required=True, help="events.jsonl from simulate")
    est.add_argument("--out-dir", default=None)
    est.set_defaults(func=cmd_estimate)

    rep = subs.add_parser("repeater", help="chain rate/fidelity + figure of merit")
    _add_common(rep)
    rep.set_defaults(func=cmd_repeater)

    sen = subs.add_parser("sensitivity", help="detection budget table")
    sen.add_argument("--config", default=None, help="INI file with [sensitivity]")
    sen.add_argument("--budget", default="default",
                     help="preset name when no config given (default, improved)")
    sen.add_argument("--out-dir", default=None)
    sen.set_defaults(func=cmd_sensitivity)

    rec = subs.add_parser("reconstruct", help="forward-model visibilities on a "
                                              "full grid and invert to an image")
    rec.add_argument("--config", required=True)
    rec.add_argument("--out-dir", default=None)
    rec.set_defaults(func=cmd_reconstruct)

    orc = subs.add_parser("oracle-check", help="run analytic-vs-circuit "
                                               "verification grids")
    orc.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LowStatisticsError as exc:
        print(f"low statistics: {exc}", file=sys.stderr)
        return EXIT_LOW_STATISTICS
    except InfeasibleBudgetError as exc:
        print(f"infeasible budget: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
