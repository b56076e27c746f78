import json

from entrovos.cli import main

from conftest import block_sequence, write_replay_sequence


def test_synth_then_bench(tmp_path, capsys):
    out_dir = tmp_path / "seq"
    assert main(["synth", "--scenario", "distractor", "--frames", "24", "--seed", "42",
                 "--out", str(out_dir)]) == 0
    assert (out_dir / "manifest.json").exists()
    report_path = tmp_path / "report.json"
    assert main(["bench", "--manifest-dir", str(tmp_path), "--out", str(report_path),
                 "--jobs", "2"]) == 0
    report = json.loads(report_path.read_text())
    assert len(report["sequences"]) == 1
    assert report["summary"]["noc"] >= 0


def test_run_with_config_and_log(tmp_path):
    probs, gts = block_sequence(12, spike_frame=7)
    manifest = write_replay_sequence(tmp_path / "seq", probs, gts)
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"tau_u": 0.5, "refiner": "oracle"}))
    report_path = tmp_path / "report.json"
    log_path = tmp_path / "episode.json"
    code = main([
        "run", "--manifest", str(manifest), "--config", str(config),
        "--agent", "simulated", "--init", "gt",
        "--out", str(report_path), "--log", str(log_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["summary"]["noc"] == 1
    episode = json.loads(log_path.read_text())
    assert episode["sequence"] == "crafted"
    clicked = [
        ev for fr in episode["frames"] for ev in fr["events"] if ev.get("click")
    ]
    assert len(clicked) == 1 and clicked[0]["frame"] == 7


def test_run_agent_none(tmp_path):
    probs, gts = block_sequence(12, spike_frame=7)
    manifest = write_replay_sequence(tmp_path / "seq", probs, gts)
    report_path = tmp_path / "report.json"
    assert main(["run", "--manifest", str(manifest), "--agent", "none",
                 "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["summary"]["noc"] == 0


def test_proxy_eval_csv(tmp_path):
    out_dir = tmp_path / "drift"
    main(["synth", "--scenario", "drift", "--frames", "32", "--seed", "1", "--out", str(out_dir)])
    csv_path = tmp_path / "proxy.csv"
    assert main(["proxy-eval", "--manifest", str(out_dir / "manifest.json"),
                 "--radii", "1,2,3", "--out", str(csv_path)]) == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "sequence,object,radius,rho"
    assert len(lines) == 4


def test_bench_ignores_scenario_sidecars(tmp_path):
    main(["synth", "--scenario", "drift", "--frames", "8", "--seed", "3",
          "--out", str(tmp_path / "a")])
    report_path = tmp_path / "r.json"
    assert main(["bench", "--manifest-dir", str(tmp_path), "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert len(report["sequences"]) == 1
    assert not report["errors"]
