import filecmp
from dataclasses import replace

import numpy as np
import pytest

from chipletsca import read_trace_file
from chipletsca.cli import main
from chipletsca.scenario import (Scenario, StageError, format_scenario, parse_scenario,
                                 run_scenario)

SHORT = """
key = 0x2a
channel = capacitive
reconstruction = integrate
seeds = 3, 4
victim.trace_length = 256
victim.transition_time = 1e-9
victim.noise_sigma = 1.5e-6
"""


def test_parse_and_format_round_trip():
    s = parse_scenario(SHORT)
    assert s.seeds == (3, 4) and s.victim.trace_length == 256
    assert s.probe_geometry().probe_kind == "capacitive_plate"
    assert parse_scenario(format_scenario(s)) == s


def test_scenario_invariants():
    with pytest.raises(ValueError, match="forbids"):
        parse_scenario("channel = none\ngeometry.gap = 1e-5\n")
    with pytest.raises(ValueError, match="ir_file"):
        parse_scenario("channel = imported_ir\n")
    with pytest.raises(ValueError, match="unknown field"):
        parse_scenario("victim.colour = 3\n")
    with pytest.raises(ValueError, match="key = value"):
        parse_scenario("just words\n")


def test_geometry_override_follows_channel():
    s = parse_scenario("channel = inductive_capacitive\ngeometry.gap = 4e-5\n")
    assert s.geometry.probe_kind == "inductive_line" and s.geometry.gap == 4e-5


def test_baseline_scenario_recovers_key():
    summary = run_scenario(Scenario(key=0x3C, seeds=(0,)))
    assert summary.ranks == [1]


def test_capacitive_integrate_beats_raw():
    s = parse_scenario(SHORT)
    integ = run_scenario(s)
    raw = run_scenario(replace(s, reconstruction="raw"))
    assert integ.ranks == [1, 1]
    assert all(r < i for r, i in zip(raw.margins, integ.margins))


def test_run_directory_is_byte_identical(tmp_path):
    s = parse_scenario(SHORT)
    run_scenario(s, tmp_path / "a")
    run_scenario(s, tmp_path / "b")
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    files = [p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file()]
    assert len(files) == 3 + 2 * 7
    for rel in files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel
    assert not cmp.diff_files


def test_stage_error_names_stage(tmp_path):
    s = replace(parse_scenario(SHORT), channel="imported_ir", ir_file=str(tmp_path / "none.csv"))
    with pytest.raises(StageError) as info:
        run_scenario(s)
    assert info.value.stage == "couple"


def test_imported_ir_scenario(tmp_path):
    ir = tmp_path / "ir.csv"
    t = np.arange(3) * 1e-11
    ir.write_text("time_s,amplitude\n" + "".join(f"{float(a)!r},{v}\n"
                                                 for a, v in zip(t, [1e11, -1e11, 0.0])))
    s = parse_scenario(f"channel = imported_ir\nir_file = {ir}\nreconstruction = integrate\n"
                       "victim.noise_sigma = 1e-6\n")
    assert run_scenario(s).ranks == [1]


def test_cli_stages_reproduce_run(tmp_path, capsys):
    scen = tmp_path / "s.txt"
    scen.write_text(SHORT)
    run = tmp_path / "run"
    assert main(["run", "--scenario", str(scen), "--out", str(run)]) == 0
    d = run / "seed_3"
    assert main(["gen", "--key", "0x2a", "--seed", "3", "--noise-sigma", "1.5e-6",
                 "--trace-length", "256", "--transition-time", "1e-9",
                 "--out", str(tmp_path / "v.ccsc")]) == 0
    assert read_trace_file(tmp_path / "v.ccsc").equals(read_trace_file(d / "victim.ccsc"))
    assert main(["couple", "--in", str(d / "victim.ccsc"), "--out", str(tmp_path / "c.ccsc"),
                 "--netlist", str(run / "netlist.txt")]) == 0
    assert read_trace_file(tmp_path / "c.ccsc").equals(read_trace_file(d / "coupled.ccsc"))
    assert main(["digitize", "--in", str(d / "coupled.ccsc"), "--out", str(tmp_path / "d.ccsc"),
                 "--seed", "4"]) == 0
    assert read_trace_file(tmp_path / "d.ccsc").equals(read_trace_file(d / "digitized.ccsc"))
    assert main(["reconstruct", "--in", str(d / "digitized.ccsc"), "--mode", "integrate",
                 "--out", str(tmp_path / "r.ccsc")]) == 0
    assert read_trace_file(tmp_path / "r.ccsc").equals(read_trace_file(d / "conditioned.ccsc"))
    assert main(["attack", "--in", str(d / "conditioned.ccsc"), "--key", "0x2a",
                 "--ranking-csv", str(tmp_path / "rank.csv"),
                 "--distinguisher-csv", str(tmp_path / "dist.csv")]) == 0
    assert (tmp_path / "rank.csv").read_bytes() == (d / "ranking.csv").read_bytes()
    assert (tmp_path / "dist.csv").read_bytes() == (d / "distinguisher.csv").read_bytes()
    assert main(["report", str(run)]) == 0
    out = capsys.readouterr().out
    assert "seed 3: true key 0x2a rank 1" in out


def test_cli_flag_overrides(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path / "r"), "--key", "0x10", "--seeds", "1",
                 "--set", "adc.resolution_bits=12"]) == 0
    text = (tmp_path / "r" / "scenario.txt").read_text()
    assert "key = 0x10" in text and "adc.resolution_bits = 12" in text


def test_cli_errors_are_stage_tagged(tmp_path, capsys):
    bad = tmp_path / "bad.ccsc"
    bad.write_bytes(b"nope")
    assert main(["attack", "--in", str(bad)]) != 0
    err = capsys.readouterr().err
    assert "[attack]" in err and "bad magic" in err
    assert main(["run", "--out", str(tmp_path / "x"), "--channel", "imported_ir",
                 "--ir", str(tmp_path / "missing.csv")]) != 0
    assert "[couple]" in capsys.readouterr().err


def test_distinguisher_csv_shape(tmp_path):
    s = replace(parse_scenario(SHORT), seeds=(0,), window_fraction=0.5)
    run_scenario(s, tmp_path)
    lines = (tmp_path / "seed_0" / "distinguisher.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "time_s" and len(header) == 257
    assert len(lines) == 1 + 128
    assert float(lines[1].split(",")[0]) == pytest.approx(128 * 1e-11)
