"""Command-line front end: ``chipletsca <stage> ...``.

Stages read and write trace files, so any stage can be re-run in isolation
from the artifacts of a previous ``run``.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import dpa
from .acquisition import AdcConfig, digitize_set
from .channel import Netlist, apply_impulse_response, load_impulse_response_csv, transient_solve
from .reconstruct import OFFSET_MODES, Window
from .scenario import (CHANNELS, RECONSTRUCTIONS, Scenario, StageError, build_netlist,
                       condition, load_scenario, parse_scenario, run_scenario,
                       write_distinguisher_csv, write_ranking_csv)
from .traces import read_trace_file, write_trace_file
from .victim import VictimParams, generate_trace_set


def _byte(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v <= 255:
        raise argparse.ArgumentTypeError("expected a byte (0..255)")
    return v


def _window(s: str) -> Window:
    a, b = s.split(":")
    return Window(int(a), int(b))


def cmd_gen(args):
    p = VictimParams(noise_sigma=args.noise_sigma, transition_time=args.transition_time,
                     sample_period=args.sample_period, trace_length=args.trace_length)
    write_trace_file(generate_trace_set(args.key, p, args.seed), args.out)


def cmd_couple(args):
    ts = read_trace_file(args.input)
    if args.channel == "imported_ir":
        if not args.ir:
            raise ValueError("--ir is required for channel imported_ir")
        out = apply_impulse_response(load_impulse_response_csv(args.ir), ts).i_leak
    elif args.netlist:
        out = transient_solve(Netlist.from_text(Path(args.netlist).read_text()), ts,
                              dt=args.dt).i_leak
    else:
        s = Scenario(channel=args.channel)
        out = transient_solve(build_netlist(s), ts, dt=args.dt).i_leak
    write_trace_file(out, args.out)


def cmd_digitize(args):
    ts = read_trace_file(args.input)
    cfg = AdcConfig(args.bits, args.full_scale, args.adc_period, args.gain, args.input_noise)
    out, used = digitize_set(ts, cfg, args.seed)
    write_trace_file(out, args.out)
    print(f"full_scale = {used.full_scale!r}")


def cmd_reconstruct(args):
    ts = read_trace_file(args.input)
    s = Scenario(reconstruction=args.mode, offset_mode=args.offset_mode, window=args.window,
                 window_fraction=args.window_fraction)
    write_trace_file(condition(ts, s), args.out)


def cmd_attack(args):
    ts = read_trace_file(args.input)
    values, _ = dpa.distinguisher_matrix(ts, args.distinguisher)
    ranking = dpa.KeyRanking(abs(values).max(axis=1), args.distinguisher)
    if args.ranking_csv:
        write_ranking_csv(ranking, args.ranking_csv, args.key)
    if args.distinguisher_csv:
        write_distinguisher_csv(values, ts.sample_period, args.distinguisher_csv)
    line = f"best key 0x{ranking.best:02x}, margin {ranking.margin:.3f}"
    if args.key is not None:
        line += f", rank of 0x{args.key:02x}: {dpa.key_rank(ranking, args.key)}"
    print(line)


def cmd_run(args):
    s = load_scenario(args.scenario) if args.scenario else Scenario()
    overrides = []
    for flag, name in (("key", "key"), ("channel", "channel"), ("reconstruction", "reconstruction"),
                       ("offset_mode", "offset_mode"), ("distinguisher", "distinguisher"),
                       ("window_fraction", "window_fraction"), ("ir", "ir_file")):
        v = getattr(args, flag)
        if v is not None:
            overrides.append(f"{name} = {v}")
    if args.seeds:
        overrides.append("seeds = " + ", ".join(str(x) for x in args.seeds))
    if args.noise_sigma is not None:
        overrides.append(f"victim.noise_sigma = {args.noise_sigma!r}")
    if args.adc_bits is not None:
        overrides.append(f"adc.resolution_bits = {args.adc_bits}")
    if args.gap is not None:
        overrides.append(f"geometry.gap = {args.gap!r}")
    overrides += args.set or []
    if overrides:
        s = parse_scenario("\n".join(overrides), base=s)
    summary = run_scenario(s, args.out)
    _print_summary(summary.run_dir / "summary.csv")
    print(f"runtime {summary.runtime_s:.2f} s")


def _print_summary(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    for r in rows:
        print(f"seed {r['seed']}: true key {r['true_key']} rank {r['true_key_rank']}, "
              f"best {r['best_key']}, margin {float(r['margin']):.3f}")


def cmd_report(args):
    run = Path(args.run_dir)
    if not (run / "summary.csv").exists():
        raise FileNotFoundError(f"{run} has no summary.csv")
    print((run / "scenario.txt").read_text().rstrip())
    print()
    _print_summary(run / "summary.csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chipletsca", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="synthesize the 256 victim traces")
    p.add_argument("--key", type=_byte, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--transition-time", type=float, default=VictimParams.transition_time)
    p.add_argument("--sample-period", type=float, default=VictimParams.sample_period)
    p.add_argument("--trace-length", type=int, default=VictimParams.trace_length)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("couple", help="propagate traces through a coupling channel")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--channel", choices=CHANNELS[1:], default="capacitive")
    p.add_argument("--netlist", help="custom netlist text file (overrides --channel)")
    p.add_argument("--ir", help="impulse response CSV for imported_ir")
    p.add_argument("--dt", type=float)
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("digitize", help="apply the ADC model")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bits", type=int, default=10)
    p.add_argument("--full-scale", type=float, help="default: auto-calibrate")
    p.add_argument("--adc-period", type=float)
    p.add_argument("--gain", type=float, default=1.0)
    p.add_argument("--input-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_digitize)

    p = sub.add_parser("reconstruct", help="integrate, remove offset, window")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=RECONSTRUCTIONS, default="integrate")
    p.add_argument("--offset-mode", choices=OFFSET_MODES, default="none")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--window", type=_window, help="start:end sample indices")
    g.add_argument("--window-fraction", type=float, help="trailing window start fraction")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("attack", help="rank all 256 key hypotheses")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--key", type=_byte, help="true key, for reporting its rank")
    p.add_argument("--distinguisher", choices=dpa.DISTINGUISHERS, default="difference_of_means")
    p.add_argument("--ranking-csv")
    p.add_argument("--distinguisher-csv")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("run", help="run a full scenario")
    p.add_argument("--scenario", help="scenario file (key = value lines)")
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--key", type=_byte)
    p.add_argument("--channel", choices=CHANNELS)
    p.add_argument("--reconstruction", choices=RECONSTRUCTIONS)
    p.add_argument("--offset-mode", choices=OFFSET_MODES)
    p.add_argument("--distinguisher", choices=dpa.DISTINGUISHERS)
    p.add_argument("--window-fraction", type=float)
    p.add_argument("--ir")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--adc-bits", type=int)
    p.add_argument("--gap", type=float)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="any scenario field, e.g. --set channel.k_mutual=0.5")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="summarize a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_report)
    return ap


_STAGE_OF = {"gen": "gen", "couple": "couple", "digitize": "digitize",
             "reconstruct": "reconstruct", "attack": "attack", "run": "run", "report": "report"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: [{_STAGE_OF[args.command]}] {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
