"""End-to-end experiments: generate, couple, digitize, reconstruct, attack.

Scenario files are flat ``key = value`` text with ``#`` comments. Dotted
keys address nested parameter groups (``victim.noise_sigma``,
``geometry.gap``, ``adc.resolution_bits``, ``channel.k_mutual``).
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import dpa
from .acquisition import AdcConfig, digitize_set
from .channel import (ProbeGeometry, build_capacitive_channel,
                      build_inductive_capacitive_channel, load_impulse_response_csv,
                      transient_solve, apply_impulse_response)
from .channel.builders import K_MUTUAL, LINE_RESISTANCE, RECEIVER_LOAD
from .reconstruct import OFFSET_MODES, Window, apply_window, cumulative_integrate, remove_offset
from .traces import TraceSet, write_trace_file
from .victim import VictimParams, generate_trace_set

CHANNELS = ("none", "capacitive", "inductive_capacitive", "imported_ir")
RECONSTRUCTIONS = ("raw", "integrate")


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class ChannelParams:
    receiver_load: float = RECEIVER_LOAD
    k_mutual: float = K_MUTUAL
    line_resistance: float = LINE_RESISTANCE
    dt: float | None = None


@dataclass(frozen=True)
class Scenario:
    key: int = 0x2A
    channel: str = "none"
    victim: VictimParams = field(default_factory=VictimParams)
    geometry: ProbeGeometry | None = None
    channel_params: ChannelParams = field(default_factory=ChannelParams)
    ir_file: str | None = None
    adc_enabled: bool = True
    adc: AdcConfig = field(default_factory=AdcConfig)
    reconstruction: str = "raw"
    offset_mode: str = "none"
    window: Window | None = None
    window_fraction: float | None = None
    distinguisher: str = "difference_of_means"
    seeds: tuple[int, ...] = (0,)

    def validate(self) -> None:
        if not 0 <= self.key <= 255:
            raise ValueError("key must be a byte")
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}")
        if self.channel == "none" and (self.geometry is not None
                                       or self.channel_params != ChannelParams()):
            raise ValueError("channel=none forbids geometry and channel parameters")
        if self.channel == "imported_ir" and not self.ir_file:
            raise ValueError("channel=imported_ir requires ir_file")
        if self.reconstruction not in RECONSTRUCTIONS:
            raise ValueError(f"reconstruction must be one of {RECONSTRUCTIONS}")
        if self.offset_mode not in OFFSET_MODES:
            raise ValueError(f"offset_mode must be one of {OFFSET_MODES}")
        if self.window is not None and self.window_fraction is not None:
            raise ValueError("set either window or window_fraction, not both")
        if self.distinguisher not in dpa.DISTINGUISHERS:
            raise ValueError(f"distinguisher must be one of {dpa.DISTINGUISHERS}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        self.victim.validate()
        self.adc.validate()
        if self.geometry is not None:
            self.geometry.validate()

    def probe_geometry(self) -> ProbeGeometry:
        if self.geometry is not None:
            return self.geometry
        kind = "inductive_line" if self.channel == "inductive_capacitive" else "capacitive_plate"
        return ProbeGeometry(kind)


# -- scenario text format ---------------------------------------------------

_GROUPS = {"victim": VictimParams, "geometry": ProbeGeometry, "adc": AdcConfig,
           "channel": ChannelParams}
_GROUP_ATTR = {"victim": "victim", "geometry": "geometry", "adc": "adc",
               "channel": "channel_params"}


_NULLABLE = {"ir_file", "window", "window_fraction", "full_scale", "sample_period", "dt"}


def _parse_value(raw: str, name: str):
    v = raw.strip()
    low = v.lower()
    if name in _NULLABLE and low in ("none", "auto", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    if name == "seeds":
        return tuple(int(s, 0) for s in v.replace(",", " ").split())
    if name == "window":
        a, b = v.split(":")
        return Window(int(a), int(b))
    try:
        return int(v, 0)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def parse_scenario(text: str, base: Scenario | None = None) -> Scenario:
    values: dict = {}
    groups: dict = {g: {} for g in _GROUPS}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"scenario line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        group, _, name = key.rpartition(".")
        if group:
            if group not in _GROUPS:
                raise ValueError(f"scenario line {lineno}: unknown group {group!r}")
            names = {f.name for f in fields(_GROUPS[group])}
            if name not in names:
                raise ValueError(f"scenario line {lineno}: unknown field {key!r}")
            groups[group][name] = _parse_value(value, name)
        else:
            if name not in {f.name for f in fields(Scenario)} - set(_GROUP_ATTR.values()):
                raise ValueError(f"scenario line {lineno}: unknown field {key!r}")
            values[name] = _parse_value(value, name)
    s = base or Scenario()
    if "seeds" in values and isinstance(values["seeds"], int):
        values["seeds"] = (values["seeds"],)
    if "channel" in values:
        s = replace(s, channel=values.pop("channel"))
    for g, kv in groups.items():
        if not kv:
            continue
        attr = _GROUP_ATTR[g]
        current = getattr(s, attr)
        if current is None:
            current = s.probe_geometry()
        s = replace(s, **{attr: replace(current, **kv)})
    s = replace(s, **values)
    s.validate()
    return s


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def format_scenario(s: Scenario) -> str:
    def fmt(v):
        if v is None:
            return "none"
        if isinstance(v, bool):
            return str(v).lower()
        if isinstance(v, Window):
            return f"{v.start_index}:{v.end_index}"
        if isinstance(v, tuple):
            return ", ".join(str(x) for x in v)
        return repr(v) if isinstance(v, float) else str(v)

    lines = [f"key = 0x{s.key:02x}", f"channel = {s.channel}"]
    for name in ("ir_file", "adc_enabled", "reconstruction", "offset_mode", "window",
                 "window_fraction", "distinguisher", "seeds"):
        lines.append(f"{name} = {fmt(getattr(s, name))}")
    for g, attr in _GROUP_ATTR.items():
        obj = getattr(s, attr)
        if obj is None or (s.channel == "none" and g in ("geometry", "channel")):
            continue
        lines += [f"{g}.{f.name} = {fmt(getattr(obj, f.name))}" for f in fields(obj)]
    return "\n".join(lines) + "\n"


# -- stages -----------------------------------------------------------------

def build_netlist(s: Scenario):
    g, cp = s.probe_geometry(), s.channel_params
    if s.channel == "capacitive":
        return build_capacitive_channel(g, cp.receiver_load, cp.line_resistance)
    if s.channel == "inductive_capacitive":
        return build_inductive_capacitive_channel(g, cp.receiver_load, cp.k_mutual,
                                                  cp.line_resistance)
    return None


def couple(ts: TraceSet, s: Scenario) -> TraceSet:
    if s.channel == "none":
        return ts
    if s.channel == "imported_ir":
        return apply_impulse_response(load_impulse_response_csv(s.ir_file), ts).i_leak
    return transient_solve(build_netlist(s), ts, dt=s.channel_params.dt).i_leak


def condition(ts: TraceSet, s: Scenario) -> TraceSet:
    if s.reconstruction == "integrate":
        ts = cumulative_integrate(ts)
    ts = remove_offset(ts, s.offset_mode)
    if s.window is not None:
        ts = apply_window(ts, s.window)
    elif s.window_fraction is not None:
        ts = apply_window(ts, Window.trailing(ts.n_samples, s.window_fraction))
    return ts


@dataclass
class SeedResult:
    seed: int
    ranking: dpa.KeyRanking
    rank: int
    distinguisher: np.ndarray
    traces: dict


@dataclass
class RunSummary:
    scenario: Scenario
    results: list[SeedResult]
    runtime_s: float
    run_dir: Path | None = None

    @property
    def ranks(self) -> list[int]:
        return [r.rank for r in self.results]

    @property
    def margins(self) -> list[float]:
        return [r.ranking.margin for r in self.results]


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, f"{type(exc).__name__}: {exc}") from exc


def run_seed(s: Scenario, seed: int) -> SeedResult:
    victim = _stage("gen", generate_trace_set, s.key, s.victim, seed)
    coupled = _stage("couple", couple, victim, s)
    if s.adc_enabled:
        digitized, adc_used = _stage("digitize", digitize_set, coupled, s.adc, seed + 1)
    else:
        digitized, adc_used = coupled, None
    conditioned = _stage("reconstruct", condition, digitized, s)
    values, _ = _stage("attack", dpa.distinguisher_matrix, conditioned, s.distinguisher)
    ranking = dpa.KeyRanking(np.abs(values).max(axis=1), s.distinguisher)
    traces = {"victim": victim, "coupled": coupled, "digitized": digitized,
              "conditioned": conditioned, "adc": adc_used}
    return SeedResult(seed, ranking, dpa.key_rank(ranking, s.key), values, traces)


def write_ranking_csv(ranking: dpa.KeyRanking, path, true_key: int | None = None) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["rank", "hypothesis", "peak_score", "is_true_key"])
        for i, (k, score) in enumerate(ranking.sorted(), 1):
            w.writerow([i, f"0x{k:02x}", repr(score), int(k == true_key)])


def write_distinguisher_csv(values: np.ndarray, sample_period: float, path,
                            start_index: int = 0) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["time_s"] + [f"k_0x{k:02x}" for k in range(values.shape[0])])
        for n in range(values.shape[1]):
            w.writerow([repr((start_index + n) * sample_period)]
                       + [repr(float(v)) for v in values[:, n]])


def run_scenario(s: Scenario, out_dir=None) -> RunSummary:
    """Run every seed of ``s``; if ``out_dir`` is given, write all artifacts there.

    Files written are a pure function of the scenario, so repeated runs are
    byte-identical; the runtime is only reported in the returned summary.
    """
    s.validate()
    t0 = time.perf_counter()
    results = [run_seed(s, seed) for seed in s.seeds]
    runtime = time.perf_counter() - t0
    run_dir = None
    if out_dir is not None:
        run_dir = Path(out_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "scenario.txt").write_text(format_scenario(s))
        net = build_netlist(s)
        if net is not None:
            (run_dir / "netlist.txt").write_text(net.to_text())
        for r in results:
            d = run_dir / f"seed_{r.seed}"
            d.mkdir(exist_ok=True)
            for name in ("victim", "coupled", "digitized", "conditioned"):
                write_trace_file(r.traces[name], d / f"{name}.ccsc")
            if r.traces["adc"] is not None:
                a = r.traces["adc"]
                (d / "adc.txt").write_text("".join(
                    f"adc.{f.name} = {getattr(a, f.name)!r}\n" for f in fields(a)))
            write_ranking_csv(r.ranking, d / "ranking.csv", s.key)
            start = _window_start(s, r.traces["digitized"].n_samples)
            write_distinguisher_csv(r.distinguisher, r.traces["conditioned"].sample_period,
                                    d / "distinguisher.csv", start)
        write_summary_csv(results, s.key, run_dir / "summary.csv")
    return RunSummary(s, results, runtime, run_dir)


def _window_start(s: Scenario, n: int) -> int:
    if s.window is not None:
        return s.window.start_index
    if s.window_fraction is not None:
        return Window.trailing(n, s.window_fraction).start_index
    return 0


def write_summary_csv(results, true_key: int, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["seed", "true_key", "best_key", "true_key_rank", "margin"])
        for r in results:
            w.writerow([r.seed, f"0x{true_key:02x}", f"0x{r.ranking.best:02x}", r.rank,
                        repr(r.ranking.margin)])
