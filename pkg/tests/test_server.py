import time

import pytest

pytest.importorskip("fastapi")
from fastapi.testclient import TestClient

from entrovos.formats import decode_zivp, load_manifest
from entrovos.harness import EpisodeConfig
from entrovos.server import LiveSession, create_app

from conftest import block_sequence, write_replay_sequence


def make_session(tmp_path, spike_frame=7, init="gt_mask", manual_step=False):
    probs, gts = block_sequence(12, spike_frame=spike_frame)
    path = write_replay_sequence(tmp_path / "seq", probs, gts)
    manifest = load_manifest(path)
    config = EpisodeConfig(agent="live", init=init)
    session = LiveSession(manifest, config, manifest_path=path, manual_step=manual_step)
    return session, TestClient(create_app(session))


def wait_for(client, status, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        state = client.get("/api/state").json()
        if state["status"] == status:
            return state
        time.sleep(0.01)
    raise AssertionError(f"timed out waiting for status {status}; last: {state}")


class TestProtocol:
    def test_initial_state(self, tmp_path):
        _, client = make_session(tmp_path)
        state = client.get("/api/state").json()
        assert state["frame"] == 0
        assert state["status"] == "awaiting_init"
        assert state["noc_so_far"] == 0

    def test_click_rejected_when_not_awaiting(self, tmp_path):
        _, client = make_session(tmp_path)
        resp = client.post("/api/click", json={"row": 1, "col": 1, "polarity": "positive"})
        assert resp.status_code == 409

    def test_full_session_with_click(self, tmp_path):
        session, client = make_session(tmp_path)
        assert client.post("/api/step").status_code == 200
        state = wait_for(client, "awaiting_click")
        assert state["frame"] == 7
        assert state["object"] == 1
        assert state["s_r"] is not None and state["delta"] is not None
        assert state["delta"] >= 0.5

        # frame artifacts are served while the prompt is outstanding
        entropy = client.get("/api/frame/7/entropy")
        assert entropy.status_code == 200
        grid = decode_zivp(entropy.content)
        assert grid.shape == (16, 16, 1)
        assert client.get("/api/frame/7/image").content.startswith(b"P5")
        assert client.get("/api/frame/7/mask/1").content.startswith(b"P5")

        resp = client.post("/api/click", json={"row": 8, "col": 8, "polarity": "positive"})
        assert resp.status_code == 200
        state = wait_for(client, "done")
        assert state["noc_so_far"] == 1
        assert state["report"]["summary"]["noc"] == 1
        assert state["error"] is None

    def test_skip_downgrades_to_none(self, tmp_path):
        session, client = make_session(tmp_path)
        client.post("/api/step")
        wait_for(client, "awaiting_click")
        assert client.post("/api/skip").status_code == 200
        state = wait_for(client, "done")
        assert state["noc_so_far"] == 0
        assert state["report"]["summary"]["noc"] == 0

    def test_unprocessed_frame_404(self, tmp_path):
        _, client = make_session(tmp_path)
        assert client.get("/api/frame/3/entropy").status_code == 404

    def test_click_after_done_rejected(self, tmp_path):
        session, client = make_session(tmp_path, spike_frame=None)
        client.post("/api/step")
        wait_for(client, "done")
        resp = client.post("/api/click", json={"row": 0, "col": 0})
        assert resp.status_code == 409

    def test_calm_sequence_runs_to_done_without_prompts(self, tmp_path):
        session, client = make_session(tmp_path, spike_frame=None)
        client.post("/api/step")
        state = wait_for(client, "done")
        assert state["noc_so_far"] == 0
        assert state["frame"] == 11

    def test_live_init_click(self, tmp_path):
        session, client = make_session(tmp_path, spike_frame=None, init="init_click")
        client.post("/api/step")
        state = wait_for(client, "awaiting_click")
        assert state["frame"] == 0  # object indication happens first
        client.post("/api/click", json={"row": 8, "col": 8})
        state = wait_for(client, "done")
        # the indication click is an initialization, not a correction
        assert state["noc_so_far"] == 0
        assert state["report"]["summary"]["noc"] == 0

    def test_manual_step_gates_frames(self, tmp_path):
        session, client = make_session(tmp_path, spike_frame=None, manual_step=True)
        client.post("/api/step")
        time.sleep(0.2)
        first = client.get("/api/state").json()
        assert first["frame"] == 0
        client.post("/api/step")
        deadline = time.monotonic() + 2.0
        while time.monotonic() < deadline:
            if client.get("/api/state").json()["frame"] >= 1:
                break
            time.sleep(0.01)
        state = client.get("/api/state").json()
        assert 1 <= state["frame"] <= 2
        for _ in range(20):
            client.post("/api/step")
        wait_for(client, "done")
