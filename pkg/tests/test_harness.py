import io
import json
import math
from pathlib import Path

import pytest

from conftest import QUANT_S
from toflab.errors import ScenarioError
from toflab.harness.cli import main
from toflab.harness.csvio import TAIL_COLUMNS, emit_csv, header, read_csv
from toflab.harness.montecarlo import TrialRecord, run_monte_carlo
from toflab.harness.scenario import DriftMode, load_scenario, parse_scenario
from toflab.harness.sweep import sweep
from toflab.harness.table1 import format_table, reproduce_table1
from toflab.analysis import FormulaTerms
from toflab.geometry import PropagationConstants
from toflab.protocols import Method
from toflab.timebase import PpmDrift

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def twr_doc(**extra):
    doc = {
        "method": "twr",
        "nodes": [
            {"id": "A", "role": "tag", "position": [0, 0]},
            {"id": "B", "role": "anchor", "position": [30, 0]},
        ],
    }
    doc.update(extra)
    return doc


# scenario parsing

def test_defaults():
    s = parse_scenario(twr_doc())
    assert s.trials == 1 and s.seed is None
    assert s.eps_max == PpmDrift.from_ppm(20)
    assert s.drift_mode is DriftMode.FIXED
    assert s.constants.c == 299_792_458
    assert s.schedule.reply_delay_b == 1e-3


@pytest.mark.parametrize(
    "doc, field",
    [
        (twr_doc(method="whistle"), "nodes"),
        (twr_doc(bogus=1), "<root>"),
        (twr_doc(trials=0), "trials"),
        (twr_doc(drift_mode="uniform"), "seed"),
    ],
)
def test_validation_errors(doc, field):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(doc)
    assert info.value.field == field


def test_duplicate_id():
    doc = twr_doc()
    doc["nodes"][1]["id"] = "A"
    with pytest.raises(ScenarioError, match="duplicate"):
        parse_scenario(doc)


def test_fixed_drift_beyond_eps_max():
    doc = twr_doc(eps_max_ppm=10)
    doc["nodes"][0]["drift_ppm"] = 15
    with pytest.raises(ScenarioError) as info:
        parse_scenario(doc)
    assert info.value.field == "nodes.0.drift_ppm"


def test_jitter_needs_seed():
    doc = twr_doc()
    doc["nodes"][0]["jitter_ps"] = 5
    with pytest.raises(ScenarioError):
        parse_scenario(doc)
    doc["seed"] = 1
    assert parse_scenario(doc).nodes[0].clock.jitter_sigma_ps == 5


def test_json_error_reports_line():
    with pytest.raises(ScenarioError) as info:
        load_scenario(io.StringIO('{\n  "method": "twr",\n  oops\n}'))
    assert info.value.line == 3


def test_shipped_scenarios_parse():
    for path in SCENARIOS.glob("*.json"):
        load_scenario(path)


# Monte-Carlo

def _csv(scenario, workers=1):
    buf = io.StringIO()
    emit_csv(run_monte_carlo(scenario, workers), buf, scenario.node_ids)
    return buf.getvalue()


def test_determinism_and_worker_independence():
    s = load_scenario(SCENARIOS / "dp_whistle_room.json")
    first = _csv(s)
    assert first == _csv(s)
    assert first == _csv(s, workers=4)
    other = parse_scenario({**json.loads((SCENARIOS / "dp_whistle_room.json").read_text()), "seed": 2025})
    assert _csv(other) != first


def test_corner_mode_reaches_bound():
    s = load_scenario(SCENARIOS / "whistle_corners.json")
    records = run_monte_carlo(s)
    assert len(records) == 8
    assert len({tuple(r.drifts_ppm.values()) for r in records}) == 8
    worst = max(abs(r.error_m) for r in records)
    assert worst == pytest.approx(records[0].bound_m, rel=0.01)
    assert all(abs(r.error_m) <= r.bound_m + 3 * QUANT_S * s.constants.c for r in records)


@pytest.mark.parametrize("method", ["twr", "sds_twr", "asym_ds_twr", "simple_toa"])
def test_single_zero_drift_trial_is_exact(method):
    s = parse_scenario(twr_doc(method=method))
    [r] = run_monte_carlo(s)
    assert abs(r.error_m) <= QUANT_S * s.constants.c


def test_uniform_drifts_within_eps_max():
    s = load_scenario(SCENARIOS / "dp_whistle_room.json")
    for r in run_monte_carlo(s):
        assert all(abs(v) <= 20 for v in r.drifts_ppm.values())


# CSV

def test_csv_header_only():
    buf = io.StringIO()
    emit_csv([], buf, ["A", "B"])
    assert buf.getvalue().splitlines() == [",".join(header(["A", "B"]))]
    assert header(["A", "B"])[-5:] == list(TAIL_COLUMNS)


def test_csv_round_trip_is_exact():
    rec = TrialRecord(3, "twr", {"A": 19.999999, "B": -0.1}, 1 / 3e8, 0.1 + 0.2, 1e-17 / 3, math.pi, 6.000000000000001)
    buf = io.StringIO()
    emit_csv([rec], buf, comment="note")
    text = buf.getvalue()
    assert text.startswith("# note\r\n")
    assert len(text.splitlines()) == 3
    [row] = read_csv(io.StringIO(text))
    assert float(row["eps_A"]) == 19.999999
    assert float(row["estimate_s"]) == 0.1 + 0.2
    assert float(row["error_s"]) == 1e-17 / 3
    assert float(row["bound_m"]) == 6.000000000000001
    assert row["method"] == "twr" and row["trial"] == "3"


# table1

GOLDEN = {
    "Simple ToA": ("t1 · (εB − εA)", 12000),
    "TWR": ("½ (εA − εB) · DB", 6),
    "SDS-TWR": ("¼ (εA − εB) · (DB − DA)", 0),
    "Asym-DS-TWR": ("½ (εA + εB) · dAB", 0.0006),
    "Simple TDOA": ("(εB − εA) · t1", 12000),
    "Whistle": ("(εB − εA) · DB", 12),
    "DJKM": ("(εT − εB) · DB", 12),
    "DP-Whistle": ("(εA + εB) · dAB", 0.0012),
}


def test_table1_rows():
    rows = reproduce_table1()
    assert [r.name for r in rows] == list(GOLDEN)
    for r in rows:
        formula, meters = GOLDEN[r.name]
        assert r.formula == formula
        assert r.worst_error_m == pytest.approx(meters, rel=1e-9, abs=1e-15)


def test_table1_text_and_latex():
    text = format_table(reproduce_table1())
    assert len(text.splitlines()) == 10
    latex = format_table(reproduce_table1(), latex=True)
    assert r"\frac{1}{4} (\epsilon_A - \epsilon_B) \cdot (D_B - D_A)" in latex


# sweep

def test_sweep_bound_dominates():
    pts = sweep(
        Method.WHISTLE, "d_b", [1e-4, 1e-3, 1e-2],
        FormulaTerms(d_b=1e-3, d_ab=80e-9, tdoa=10e-9), PpmDrift.from_ppm(20),
        PropagationConstants(3e8), draws=200, seed=1,
    )
    for p in pts:
        assert p.random_max_m <= p.corner_max_m <= p.bound_m * (1 + 1e-3)
    assert pts[1].bound_m == pytest.approx(12, rel=1e-3)
    with pytest.raises(ValueError):
        sweep(Method.WHISTLE, "nope", [1.0], FormulaTerms(), PpmDrift(0), PropagationConstants())


# CLI

def test_cli_run_stdout(capsys):
    assert main(["run", str(SCENARIOS / "whistle_corners.json")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# toflab run; rng=")
    assert len(read_csv(io.StringIO(out))) == 8


def test_cli_run_out_file(tmp_path):
    target = tmp_path / "out.csv"
    assert main(["run", str(SCENARIOS / "twr_fixed.json"), "--out", str(target)]) == 0
    [row] = read_csv(target.open(newline=""))
    assert abs(float(row["error_m"])) == pytest.approx(6.0, rel=0.01)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(twr_doc(method="whistle")))
    assert main(["run", str(bad)]) == 1
    assert main(["bound", "--method", "nope"]) == 1
    assert main(["sweep", "--method", "twr", "--param", "d_b", "--from", "1", "--to", "2", "--steps", "0"]) == 1
    assert main(["run", str(SCENARIOS / "twr_fixed.json"), "--out", str(tmp_path / "no" / "dir.csv")]) == 2
    capsys.readouterr()


def test_cli_bound(capsys):
    assert main(["bound", "--method", "whistle", "--c", "3e8"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["worst_error_m"] == pytest.approx(12, rel=1e-3)
    assert out["formula"] == "(εB − εA) · DB"


def test_cli_sweep(capsys):
    args = ["sweep", "--method", "twr", "--param", "d_b", "--from", "1e-4", "--to", "1e-2", "--steps", "3", "--log"]
    assert main(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "d_b,bound_m,corner_max_m,random_max_m"
    assert len(lines) == 4


def test_cli_table1(capsys):
    assert main(["table1"]) == 0
    assert "DP-Whistle" in capsys.readouterr().out


def test_cli_locate(capsys):
    assert main(["locate", str(SCENARIOS / "dp_whistle_room.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["position_error_m"] < 0.01
    assert main(["locate", str(SCENARIOS / "dp_whistle_room.json"), "--method", "whistle"]) == 0
    assert json.loads(capsys.readouterr().out)["position_error_m"] > 0.01
