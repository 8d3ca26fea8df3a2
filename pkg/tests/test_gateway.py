import json
import time

import pytest
from websockets.sync.client import connect

from blimpswarm.coordination import SelectLeader
from blimpswarm.gateway import GatewayServer, PROTOCOL_VERSION, parse_command, snapshot
from blimpswarm.scenario import resolve_scenario
from blimpswarm.simulation import ScriptedCommands, Simulation


def make_sim(duration=30.0, operator=None):
    cfg = resolve_scenario("default").with_overrides(duration_s=duration)
    return Simulation(cfg, operator=operator if operator is not None else ScriptedCommands([]))


class TestSnapshot:
    def test_initial_frame_complete(self):
        sim = make_sim()
        frame = snapshot(sim)
        assert frame["type"] == "state"
        assert frame["version"] == PROTOCOL_VERSION
        assert frame["tick"] == 0
        assert len(frame["blimps"]) == 3
        assert frame["leader"] == 0
        assert [w["turn"] for w in frame["waypoints"]] == ["none", "left", "right", "none"]

    def test_round_trips_through_json(self):
        sim = make_sim()
        sim.step_tick()
        frame = snapshot(sim)
        again = json.loads(json.dumps(frame))
        assert again == frame

    def test_frame_is_self_contained(self):
        sim = make_sim()
        sim.step_tick()
        frame = snapshot(sim)
        tick = frame["tick"]
        x = frame["blimps"][0]["x"]
        for _ in range(10):
            sim.step_tick()
        assert frame["tick"] == tick
        assert frame["blimps"][0]["x"] == x

    def test_detections_reflect_visibility(self):
        sim = make_sim()
        sim.step_tick()
        frame = snapshot(sim)
        followers = [b for b in frame["blimps"] if b["role"] == "follower"]
        assert followers
        for f in followers:
            assert 0 in f["visible_targets"]
            targets = [d["target"] for d in f["camera"]["detections"]]
            assert f["visible_targets"] == targets

    def test_frame_shows_new_roles_after_switch(self):
        sim = make_sim()
        # drive until the scripted operator would have; instead force the
        # geometry: rotate leader to see blimp 1, then switch
        sim.step_tick()
        ok = {"ok": None}
        while not sim._vis.mutual(0, 1):
            sim.submit_command(__import__("blimpswarm").coordination.RotateLeader(1))
            sim.step_tick()
            if sim.tick > 600:
                pytest.fail("never achieved mutual visibility")
        sim.submit_command(SelectLeader(1), reply=lambda k, why: ok.update(ok=k))
        sim.step_tick()
        assert ok["ok"] is True
        frame = snapshot(sim)
        assert frame["leader"] == 1
        roles = {b["id"]: b["role"] for b in frame["blimps"]}
        assert roles[1] == "leader"


class TestParseCommand:
    def test_steer_parses(self):
        kind, cmd, err = parse_command(
            json.dumps({"type": "cmd", "version": 1, "kind": "steer", "forward": 0.5, "yaw": -1.0, "vertical": 0.0})
        )
        assert err is None and kind == "steer"
        assert cmd.forward == 0.5 and cmd.yaw == -1.0

    def test_steer_out_of_bounds_rejected(self):
        _, cmd, err = parse_command(
            json.dumps({"type": "cmd", "version": 1, "kind": "steer", "forward": 2.0})
        )
        assert cmd is None and "within [-1, 1]" in err

    def test_missing_version_rejected(self):
        _, cmd, err = parse_command(json.dumps({"type": "cmd", "kind": "pause"}))
        assert cmd is None and "version" in err

    def test_unknown_kind_rejected(self):
        _, cmd, err = parse_command(json.dumps({"type": "cmd", "version": 1, "kind": "dance"}))
        assert cmd is None and "unknown kind" in err

    def test_not_json_rejected(self):
        _, cmd, err = parse_command("hello")
        assert cmd is None and "JSON" in err

    def test_rotate_directions(self):
        _, left, _ = parse_command(json.dumps({"type": "cmd", "version": 1, "kind": "rotate", "direction": "left"}))
        _, right, _ = parse_command(json.dumps({"type": "cmd", "version": 1, "kind": "rotate", "direction": "right"}))
        assert left.direction == 1 and right.direction == -1


@pytest.fixture()
def server():
    sim = make_sim(duration=60.0)
    srv = GatewayServer(sim, port=0, frame_hz=40.0, speed_factor=8.0)
    srv.start()
    yield srv
    srv.stop()


def send_cmd(ws, **kw):
    msg = {"type": "cmd", "version": PROTOCOL_VERSION}
    msg.update(kw)
    ws.send(json.dumps(msg))


def recv_until(ws, want_type, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        msg = json.loads(ws.recv(timeout=deadline - time.monotonic()))
        if msg["type"] == want_type:
            return msg
    raise AssertionError(f"no {want_type} message within {timeout}s")


class TestServer:
    def test_frames_stream_and_advance(self, server):
        with connect(f"ws://127.0.0.1:{server.port}") as ws:
            f1 = recv_until(ws, "state")
            f2 = recv_until(ws, "state")
            deadline = time.monotonic() + 5
            while f2["tick"] <= f1["tick"] and time.monotonic() < deadline:
                f2 = recv_until(ws, "state")
            assert f2["tick"] > f1["tick"]
            assert len(f2["blimps"]) == 3

    def test_steer_ack_and_effect(self, server):
        with connect(f"ws://127.0.0.1:{server.port}") as ws:
            send_cmd(ws, kind="steer", forward=1.0, yaw=0.0, vertical=0.0, client_tick=7)
            ack = recv_until(ws, "ack")
            assert ack["kind"] == "steer" and ack["client_tick"] == 7
            deadline = time.monotonic() + 5
            moving = False
            while time.monotonic() < deadline and not moving:
                f = recv_until(ws, "state")
                leader = next(b for b in f["blimps"] if b["role"] == "leader")
                moving = leader["v_h"] > 0.05
            assert moving

    def test_select_leader_rejection_and_alert(self, server):
        with connect(f"ws://127.0.0.1:{server.port}") as ws:
            send_cmd(ws, kind="select_leader", target=1)
            rej = recv_until(ws, "reject")
            assert rej["kind"] == "select_leader"
            assert "does not see" in rej["reason"]
            deadline = time.monotonic() + 5
            seen_alert = False
            while time.monotonic() < deadline and not seen_alert:
                f = recv_until(ws, "state")
                seen_alert = any(a["kind"] == "leader_selection_error" for a in f["alerts"])
            assert seen_alert

    def test_malformed_rejected(self, server):
        with connect(f"ws://127.0.0.1:{server.port}") as ws:
            send_cmd(ws, kind="steer", forward=5.0)
            rej = recv_until(ws, "reject")
            assert "within [-1, 1]" in rej["reason"]
            send_cmd(ws, kind="select_leader", target=42)
            rej = recv_until(ws, "reject")
            assert "unknown blimp" in rej["reason"]

    def test_pause_resume_gate_the_loop(self, server):
        with connect(f"ws://127.0.0.1:{server.port}") as ws:
            send_cmd(ws, kind="pause")
            ack = recv_until(ws, "ack")
            assert ack["kind"] == "pause"
            time.sleep(0.2)
            f1 = recv_until(ws, "state")
            time.sleep(0.3)
            f2 = recv_until(ws, "state")
            assert f2["tick"] == f1["tick"]
            assert f2["paused"] is True
            send_cmd(ws, kind="resume")
            recv_until(ws, "ack")
            deadline = time.monotonic() + 5
            advanced = False
            while time.monotonic() < deadline and not advanced:
                f3 = recv_until(ws, "state")
                advanced = f3["tick"] > f2["tick"]
            assert advanced

    def test_speed_factor(self, server):
        with connect(f"ws://127.0.0.1:{server.port}") as ws:
            send_cmd(ws, kind="speed", factor=4.0)
            ack = recv_until(ws, "ack")
            assert ack["kind"] == "speed"
            f = recv_until(ws, "state")
            assert f["speed_factor"] == 4.0

    def test_sim_never_blocks_on_absent_client(self, server):
        # No client connected at all; the sim keeps ticking.
        t0 = server.sim.tick
        time.sleep(0.4)
        assert server.sim.tick > t0


class TestSessionReplay:
    def test_interactive_session_replays_headlessly(self, tmp_path):
        # Drive a short interactive session through the real socket, then
        # replay the recorded command stream against a fresh simulation:
        # the run logs and metrics must match exactly.
        from blimpswarm.coordination import RotateLeader, Steer
        from blimpswarm.metrics import compute_metrics
        from blimpswarm.simulation import ScriptedCommands

        cfg = resolve_scenario("default").with_overrides(duration_s=20.0)
        sim = Simulation(cfg, operator=ScriptedCommands([]), record_commands=True)
        srv = GatewayServer(sim, port=0, frame_hz=30.0, speed_factor=10.0)
        srv.start()
        try:
            with connect(f"ws://127.0.0.1:{srv.port}") as ws:
                script = [
                    dict(kind="steer", forward=0.9, yaw=0.0, vertical=0.0),
                    dict(kind="rotate", direction="left"),
                    dict(kind="steer", forward=0.4, yaw=-0.5, vertical=0.1),
                    dict(kind="select_leader", target=1),
                    dict(kind="steer", forward=0.0, yaw=0.0, vertical=0.0),
                ]
                for step_cmd in script:
                    send_cmd(ws, **step_cmd)
                    # wait for the ack/reject so commands are spaced over ticks
                    deadline = time.monotonic() + 5
                    while time.monotonic() < deadline:
                        msg = json.loads(ws.recv(timeout=5))
                        if msg["type"] in ("ack", "reject"):
                            break
                    time.sleep(0.15)
        finally:
            srv.stop()
        time.sleep(0.1)

        live_ticks = sim.tick
        assert live_ticks > 0

        replay_script = []
        for e in sim.log.events:
            if e["type"] != "command_applied":
                continue
            if e["kind"] == "steer":
                replay_script.append((e["tick"], Steer(e["forward"], e["yaw"], e["vertical"])))
            elif e["kind"] == "rotate":
                replay_script.append((e["tick"], RotateLeader(e["direction"])))
            elif e["kind"] == "select_leader":
                replay_script.append((e["tick"], SelectLeader(e["id"])))
        assert len(replay_script) >= 4  # the rejected switch is not "applied"

        sim2 = Simulation(cfg, operator=ScriptedCommands(replay_script), record_commands=True)
        while sim2.tick < live_ticks and not sim2.done:
            sim2.step_tick()

        assert sim2.log.rows == sim.log.rows
        m1 = compute_metrics(sim.log)
        m2 = compute_metrics(sim2.log)
        assert (m1.average_area, m1.area_rmse) == (m2.average_area, m2.area_rmse)


class TestBackpressure:
    def test_frames_drop_oldest_replies_never_drop(self):
        from blimpswarm.gateway import _ConnectionSink

        sink = _ConnectionSink(max_frames=2)
        for k in range(6):
            sink.put_reply({"type": "ack", "n": k})
        for k in range(5):
            sink.put_frame({"type": "state", "tick": k})
        out = sink.drain()
        replies = [m for m in out if m["type"] == "ack"]
        frames = [m for m in out if m["type"] == "state"]
        assert [r["n"] for r in replies] == [0, 1, 2, 3, 4, 5]
        assert [f["tick"] for f in frames] == [3, 4]  # oldest dropped
