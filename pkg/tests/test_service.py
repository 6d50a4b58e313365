import json
import time

import pytest
from fastapi.testclient import TestClient

from wattwise.model import at
from wattwise.service import create_app
from wattwise.sim import ApplianceSpec, ScenarioSpec, WeatherParams


def live_spec(minutes=40):
    """Lights on at arrival with bright daylight outside: the natural-light
    rule fires within the first couple of simulated minutes."""
    return ScenarioSpec(
        name="live-test",
        occupancy={"mon": [8, 9]},
        weather=WeatherParams(temp_min_c=18.0, temp_max_c=30.0),
        appliances=(ApplianceSpec("lights", "lights", 0.12),
                    ApplianceSpec("monitor", "monitor", 0.06)),
        session_start=at(0, 0, 8),
        session_end=at(0, 0, 8, minutes),
    ).to_json()


def create_body(**overrides):
    body = {"mode": "explainable", "spec": live_spec(), "seed": 9,
            "speedup": 3000.0, "config": {"response_window_s": 5}}
    body.update(overrides)
    return body


def frames_from(resp_iter, want, deadline_s=30.0):
    """Collect SSE frames until `want(frames)` is satisfied or time is up."""
    frames = []
    current = {}
    start = time.monotonic()
    for line in resp_iter:
        if time.monotonic() - start > deadline_s:
            break
        if line.startswith(":"):
            continue
        if line == "":
            if current:
                frames.append(current)
                current = {}
                if want(frames):
                    return frames
            continue
        key, _, value = line.partition(": ")
        current[key] = value
    return frames


def data_of(frame):
    return json.loads(frame["data"])


def wait_for_recommendation(client, sid, deadline_s=20.0):
    """Poll the handle until a recommendation is pending (the in-process test
    client cannot deliver SSE frames incrementally)."""
    start = time.monotonic()
    while time.monotonic() - start < deadline_s:
        handle = client.get(f"/sessions/{sid}").json()
        if handle["pending"] is not None:
            return handle["pending"]
        if handle["status"] != "running":
            pytest.fail(f"session ended without a recommendation: {handle['status']}")
        time.sleep(0.02)
    pytest.fail("no recommendation issued in time")


def wait_finished(client, sid, deadline_s=40.0):
    start = time.monotonic()
    while time.monotonic() - start < deadline_s:
        handle = client.get(f"/sessions/{sid}").json()
        if handle["status"] == "finished":
            return handle
        time.sleep(0.1)
    pytest.fail("session did not finish in time")


class TestSessionLifecycle:
    def test_invalid_mode_rejected(self):
        client = TestClient(create_app())
        resp = client.post("/sessions", json=create_body(mode="verbose"))
        assert resp.status_code == 400

    def test_unknown_bundled_spec_is_404(self):
        client = TestClient(create_app())
        resp = client.post("/sessions", json=create_body(spec="no-such-office"))
        assert resp.status_code == 404

    def test_unknown_session_is_404(self):
        client = TestClient(create_app())
        assert client.get("/sessions/nope").status_code == 404
        assert client.post("/sessions/nope/recommendations/r1/response",
                           json={"response": "accept"}).status_code == 404

    def test_create_starts_at_monday_morning(self):
        client = TestClient(create_app())
        resp = client.post("/sessions", json=create_body())
        assert resp.status_code == 201
        handle = resp.json()
        assert handle["mode"] == "explainable"
        assert handle["status"] in ("running", "finished")
        assert handle["sim_time"] >= at(0, 0, 8)


class TestResponses:
    def test_accept_flow_ends_with_actuation_ack(self):
        client = TestClient(create_app())
        sid = client.post("/sessions", json=create_body()).json()["session_id"]
        rec = wait_for_recommendation(client, sid)
        resp = client.post(f"/sessions/{sid}/recommendations/{rec['id']}/response",
                           json={"response": "accept"})
        assert resp.status_code == 200
        assert resp.json()["lifecycle"] == "accepted"
        wait_finished(client, sid)
        with client.stream("GET", f"/sessions/{sid}/events") as stream:
            frames = frames_from(stream.iter_lines(),
                                 lambda fs: fs and fs[-1]["event"] == "end")
        kinds = [f["event"] for f in frames]
        idx = kinds.index("response_recorded")
        assert kinds[idx + 1] == "actuation_applied"

    def test_duplicate_response_conflicts(self):
        client = TestClient(create_app())
        sid = client.post("/sessions", json=create_body()).json()["session_id"]
        rec = wait_for_recommendation(client, sid)
        url = f"/sessions/{sid}/recommendations/{rec['id']}/response"
        assert client.post(url, json={"response": "accept"}).status_code == 200
        dup = client.post(url, json={"response": "accept"})
        assert dup.status_code == 409
        assert "already resolved" in dup.json()["detail"]

    def test_late_response_conflicts(self):
        client = TestClient(create_app())
        body = create_body(config={"response_window_s": 1}, seed=11)
        sid = client.post("/sessions", json=body).json()["session_id"]
        rec = wait_for_recommendation(client, sid)
        time.sleep(1.6)  # let the window lapse: the engine ignores it
        resp = client.post(f"/sessions/{sid}/recommendations/{rec['id']}/response",
                           json={"response": "accept"})
        assert resp.status_code == 409
        assert resp.json()["detail"] in ("window elapsed", "already resolved")

    def test_countdown_ticks_streamed_while_pending(self):
        client = TestClient(create_app())
        sid = client.post("/sessions", json=create_body(seed=12)).json()["session_id"]
        with client.stream("GET", f"/sessions/{sid}/events") as resp:
            frames = frames_from(resp.iter_lines(),
                                 lambda fs: any(f["event"] == "tick" for f in fs))
        ticks = [data_of(f) for f in frames if f["event"] == "tick"]
        assert ticks and all("remaining_s" in t for t in ticks)


class TestStreamResumption:
    def finished_session(self, client):
        body = create_body(seed=13, config={"response_window_s": 1})
        sid = client.post("/sessions", json=body).json()["session_id"]
        deadline = time.monotonic() + 30
        while time.monotonic() < deadline:
            if client.get(f"/sessions/{sid}").json()["status"] == "finished":
                return sid
            time.sleep(0.2)
        pytest.fail("session did not finish in time")

    def test_resume_after_sequence_number(self):
        client = TestClient(create_app())
        sid = self.finished_session(client)
        with client.stream("GET", f"/sessions/{sid}/events") as resp:
            full = frames_from(resp.iter_lines(), lambda fs: fs and fs[-1]["event"] == "end")
        ids = [int(f["id"]) for f in full if "id" in f]
        assert ids == list(range(1, len(ids) + 1))
        cut = ids[len(ids) // 2]
        with client.stream("GET", f"/sessions/{sid}/events",
                           headers={"last-event-id": str(cut)}) as resp:
            resumed = frames_from(resp.iter_lines(),
                                  lambda fs: fs and fs[-1]["event"] == "end")
        resumed_ids = [int(f["id"]) for f in resumed if "id" in f]
        assert resumed_ids == list(range(cut + 1, len(ids) + 1))

    def test_finished_stream_ends_with_stats(self):
        client = TestClient(create_app())
        sid = self.finished_session(client)
        with client.stream("GET", f"/sessions/{sid}/events") as resp:
            frames = frames_from(resp.iter_lines(), lambda fs: fs and fs[-1]["event"] == "end")
        kinds = [f["event"] for f in frames]
        assert kinds[-2:] == ["session_finished", "end"]
        stats = data_of(frames[-2])["data"]["stats"]
        assert {"issued", "accepted", "rejected", "ignored"} <= set(stats)

    def test_report_endpoint(self):
        client = TestClient(create_app())
        sid = self.finished_session(client)
        report = client.get(f"/sessions/{sid}/report").json()
        assert report["sessions"] == 1
        assert report["schema"] == "wattwise-report-v1"


class TestPersistenceAndRestart:
    def test_restart_reconstructs_handle(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        body = create_body(seed=21, config={"response_window_s": 1})
        sid = client.post("/sessions", json=body).json()["session_id"]
        handle = wait_finished(client, sid)
        report = client.get(f"/sessions/{sid}/report").json()

        restarted = TestClient(create_app(tmp_path))
        handle2 = restarted.get(f"/sessions/{sid}").json()
        assert handle2["status"] == "finished"
        assert handle2["sim_time"] == handle["sim_time"]
        assert handle2["counts"] == handle["counts"]
        assert handle2["events"] == handle["events"]
        assert handle2["speedup"] == handle["speedup"]
        assert handle2["spec"] == handle["spec"]
        assert restarted.get(f"/sessions/{sid}/report").json() == report

    def test_scripted_sessions_are_deterministic(self, tmp_path):
        # Identical scripted responses (instant accepts land at +0 s simulated)
        # must yield byte-identical logs.
        logs = []
        for run in range(2):
            client = TestClient(create_app(tmp_path / f"run{run}"))
            sid = client.post("/sessions", json=create_body(seed=33)).json()["session_id"]
            deadline = time.monotonic() + 30
            while time.monotonic() < deadline:
                handle = client.get(f"/sessions/{sid}").json()
                if handle["status"] == "finished":
                    break
                pending = handle.get("pending")
                if pending is not None:
                    client.post(f"/sessions/{sid}/recommendations/{pending['id']}/response",
                                json={"response": "accept"})
                time.sleep(0.02)
            logs.append((tmp_path / f"run{run}" / f"{sid}.jsonl").read_text())
        assert logs[0] == logs[1]


def test_stale_pending_resolved_as_ignored_on_restart(tmp_path):
    # Simulate a service killed mid-window: the stored log ends on an
    # unresolved recommendation. Loading must resolve it via the ignored
    # path, on disk as well.
    from wattwise.model import EventLog, canonical_json
    from wattwise.sim import ScenarioSpec, Session, schedule_kb

    spec = ScenarioSpec.from_json(live_spec())
    kb = schedule_kb(spec)
    session = Session(spec, kb, "explainable", 55, session_id="stale-1", live=True)
    session.start()
    t = spec.session_start
    rec = None
    while rec is None and t <= spec.session_end:
        rec = session.step_minute(t)
        t += 60
    assert rec is not None
    log_path = tmp_path / "stale-1.jsonl"
    with open(log_path, "w", encoding="utf-8") as fh:
        for ev in session.log.events:
            fh.write(canonical_json(ev.to_json()) + "\n")

    client = TestClient(create_app(tmp_path))
    handle = client.get("/sessions/stale-1").json()
    assert handle["status"] == "paused"
    assert handle["pending"] is None
    assert handle["counts"]["ignored"] == 1
    reloaded = EventLog.read(log_path)
    tail = [ev for ev in reloaded.events if ev.kind == "response_recorded"]
    assert tail and tail[-1].data == {"rec_id": rec.id, "response": "ignore",
                                      "automated": False}
    # posting against the long-gone window conflicts
    resp = client.post(f"/sessions/stale-1/recommendations/{rec.id}/response",
                       json={"response": "accept"})
    assert resp.status_code == 409
