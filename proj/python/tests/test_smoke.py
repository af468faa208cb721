from pathlib import Path

import pytest

import gridsiem

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"


def test_benign_run_is_quiet():
    out = gridsiem.run(SCENARIOS / "benign.yaml", duration_s=60)
    assert out.incidents() == []
    assert out.log


def test_sleep_deprivation_names_the_attacker():
    out = gridsiem.run(SCENARIOS / "sleep_deprivation.default.yaml")
    kinds = [(row["kind"], row["culprit"]) for row in out.incidents()]
    assert ("SleepDeprivation", "n4") in kinds


def test_same_seed_same_report():
    a = gridsiem.run(SCENARIOS / "synflood.shared_router.yaml")
    b = gridsiem.run(SCENARIOS / "synflood.shared_router.yaml")
    assert a.report_text == b.report_text
    assert a.digest == b.digest


def test_replay_matches_live(tmp_path):
    log = tmp_path / "events.log"
    live = gridsiem.run(SCENARIOS / "gps.override.yaml", log_path=log)
    again = gridsiem.replay(log, SCENARIOS / "gps.override.yaml")
    keys = ("incident_id", "kind", "confidence", "culprit", "window_start_us", "detected_us", "alert_ids")
    assert [{k: r[k] for k in keys} for r in again["incidents"]] == [{k: r[k] for k in keys} for r in live.incidents()]


def test_log_lines_parse():
    out = gridsiem.run(SCENARIOS / "benign.yaml", duration_s=5)
    event = gridsiem.parse_log_line(out.log[0])
    assert event["event_id"] == 0
    assert event["ts_us"] % 100_000 == 0


def test_human_report_renders():
    out = gridsiem.run(SCENARIOS / "benign.yaml", duration_s=10)
    assert "INCIDENTS" in gridsiem.render_human(out.report_text)


def test_fixture_corridors():
    paths = gridsiem.disjoint_paths(gridsiem.fixture_edges(), "r1", "r6", 2)
    assert paths == [["r1", "r2", "r3", "r6"], ["r1", "r4", "r5", "r6"]]
    with pytest.raises(gridsiem.InsufficientDisjointness):
        gridsiem.disjoint_paths(gridsiem.fixture_edges(), "r1", "r6", 3)


def test_bad_scenario_is_a_config_error(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("wsn: {}\nattacks:\n  - {kind: sleep_deprivation, attacker: zz, start_s: 1, stop_s: 2}\n")
    with pytest.raises(gridsiem.ConfigInvalid):
        gridsiem.run(bad)
