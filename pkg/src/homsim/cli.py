"""Command-line front end.

Subcommands: simulate, scan, hom, analyze, derive.  Every command honors
--seed and produces bit-reproducible output; --threads changes wall time
only.  Exit codes: 0 success, 2 config error, 3 numerical-guard failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

from . import analysis, counting, montecarlo, pulses
from .config import ResolvedConfig, load_config
from .errors import ConfigError, NumericalGuardError

EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homsim",
        description="Simulate interference between phase-randomized, "
                    "chirped Gaussian laser pulses")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="scenario file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out-dir", default=".")

    p_sim = sub.add_parser("simulate", help="Monte-Carlo g2 / V_HOM estimate")
    add_common(p_sim)
    p_sim.add_argument("--samples", type=int, default=None)
    p_sim.add_argument("--repeats", type=int, default=None)

    p_scan = sub.add_parser("scan", help="g2 as a function of systematic delay")
    add_common(p_scan)
    p_scan.add_argument("--samples", type=int, default=None)
    p_scan.add_argument("--repeats", type=int, default=None)
    p_scan.add_argument("--delay-range", default="-200:200",
                        help="min:max delay in ps")
    p_scan.add_argument("--delay-step", type=float, default=10.0)

    p_hom = sub.add_parser("hom", help="photon-counting coincidence histogram")
    add_common(p_hom)
    p_hom.add_argument("--gate-ps", type=float, default=None,
                       help="override the coincidence gate window")
    p_hom.add_argument("--pulses", type=int, default=None)
    p_hom.add_argument("--save-timetags", action="store_true")

    p_an = sub.add_parser("analyze", help="estimate g2 from a trace file")
    p_an.add_argument("trace", help="trace CSV: intensity per line or "
                                    "time,intensity rows")
    p_an.add_argument("--quantize-8bit", action="store_true")
    p_an.add_argument("--sample-period-ps", type=float, default=1000.0)
    p_an.add_argument("--out-dir", default=".")

    p_dv = sub.add_parser("derive", help="pulse parameters from measurements")
    p_dv.add_argument("--width-fwhm-ps", type=float, required=True)
    p_dv.add_argument("--bandwidth-ghz", type=float, required=True)
    p_dv.add_argument("--out-dir", default=".")
    return parser


def _write_manifest(args, out_dir: str, seed) -> None:
    manifest = {
        "command": args.command,
        "config": getattr(args, "config", None),
        "out_dir": out_dir,
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def cmd_simulate(args) -> int:
    resolved = load_config(args.config, seed=args.seed, samples=args.samples,
                           repeats=args.repeats)
    result = montecarlo.run(resolved.scenario, threads=args.threads)
    payload = analysis.result_payload(
        resolved.name, result.g2, result.stderr, result.n_samples,
        result.rng_seed, resolved.decisions)
    payload["n_repeats"] = result.n_repeats
    out_dir = _ensure_out_dir(args)
    analysis.write_result(os.path.join(out_dir, "result.json"), payload)
    _write_manifest(args, out_dir, result.rng_seed)
    print(f"g2 = {result.g2:.6f} +- {result.stderr:.6f}  "
          f"vhom = {result.vhom:.6f}")
    return 0


def cmd_scan(args) -> int:
    resolved = load_config(args.config, seed=args.seed, samples=args.samples,
                           repeats=args.repeats)
    try:
        lo, hi = (float(part) for part in args.delay_range.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad --delay-range {args.delay_range!r}") from exc
    scan = montecarlo.scan_delay(resolved.scenario, lo, hi, args.delay_step,
                                 threads=args.threads)
    out_dir = _ensure_out_dir(args)
    scan_path = os.path.join(out_dir, "scan.csv")
    with open(scan_path, "w") as handle:
        handle.write("delay_ps,g2,stderr\n")
        for delay, g2, err in zip(scan.delays, scan.g2_values, scan.stderr):
            handle.write(f"{delay:g},{g2!r},{err!r}\n")
    _write_manifest(args, out_dir, resolved.scenario.rng_seed)
    peak = max(scan.g2_values)
    print(f"scan of {len(scan.delays)} delays written to {scan_path} "
          f"(peak g2 = {peak:.4f})")
    return 0


def cmd_hom(args) -> int:
    resolved = load_config(args.config, seed=args.seed)
    if resolved.counting is None:
        raise ConfigError(
            f"{args.config}: hom requires a [counting] section")
    cfg = resolved.counting
    overrides = {}
    if args.gate_ps is not None:
        overrides["gate_window"] = args.gate_ps
    if args.pulses is not None:
        overrides["n_pulses"] = args.pulses
    if overrides:
        from dataclasses import replace
        cfg = replace(cfg, **overrides)
    streams = counting.simulate_clicks(cfg)
    if len(streams.times_c) == 0 and len(streams.times_d) == 0:
        raise ConfigError("no clicks recorded; check mu and efficiency")
    hist = counting.build_histogram(streams, bin_width=cfg.clock_period,
                                    gate_window=cfg.gate_window)
    v, err = counting.vhom_from_histogram(hist)
    out_dir = _ensure_out_dir(args)
    counting.write_histogram_csv(os.path.join(out_dir, "histogram.csv"), hist)
    payload = {
        "scenario": resolved.name,
        "vhom": v,
        "vhom_stderr": err,
        "gate_ps": cfg.gate_window,
        "n_pulses": cfg.n_pulses,
        "seed": cfg.scenario.rng_seed,
        "decisions": resolved.decisions,
    }
    analysis.write_result(os.path.join(out_dir, "visibility.json"), payload)
    if args.save_timetags:
        counting.write_timetags(os.path.join(out_dir, "timetags.txt"), streams)
    _write_manifest(args, out_dir, cfg.scenario.rng_seed)
    print(f"vhom = {v:.4f} +- {err:.4f} "
          f"({'gated ' + str(cfg.gate_window) + ' ps' if cfg.gate_window else 'ungated'})")
    return 0


def cmd_analyze(args) -> int:
    try:
        trace = analysis.ingest_trace(args.trace,
                                      sample_period=args.sample_period_ps,
                                      quantize=args.quantize_8bit)
        g2, stderr = analysis.estimate_g2(trace)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    payload = {
        "trace": args.trace,
        "n_samples": len(trace),
        "g2": g2,
        "g2_stderr": stderr,
        "vhom": analysis.vhom_from_g2(g2),
        "quantized_8bit": args.quantize_8bit,
    }
    out_dir = _ensure_out_dir(args)
    analysis.write_result(os.path.join(out_dir, "analysis.json"), payload)
    print(f"g2 = {g2:.6f} +- {stderr:.6f}  vhom = {g2 - 1.0:.6f}")
    return 0


def cmd_derive(args) -> int:
    try:
        pulse = pulses.PulseShape.from_fwhm(args.width_fwhm_ps)
        beta = pulses.chirp_from_bandwidth(args.bandwidth_ghz, pulse.tau_p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {
        "width_fwhm_ps": args.width_fwhm_ps,
        "bandwidth_fwhm_ghz": args.bandwidth_ghz,
        "tau_p_ps": pulse.tau_p,
        "beta_ps2": beta,
        "transform_limited_bandwidth_ghz": pulse.transform_limited_bandwidth,
    }
    out_dir = _ensure_out_dir(args)
    analysis.write_result(os.path.join(out_dir, "pulse.json"), payload)
    print(f"tau_p = {pulse.tau_p:.4f} ps  beta = {beta:.6g} ps^-2")
    return 0


def _ensure_out_dir(args) -> str:
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


_COMMANDS = {
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "hom": cmd_hom,
    "analyze": cmd_analyze,
    "derive": cmd_derive,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
