import inspect
import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radiolab.errors import RoundLimitExceeded
from radiolab.graphs import build_graph, gen_cycle, gen_path, gen_random_connected
from radiolab.sim import (
    COLLISION,
    LISTEN,
    NOISE,
    SILENCE,
    TX,
    ExecutionTrace,
    Heard,
    NodeProgram,
    RoundRecord,
    Transmit,
    dump_trace_jsonl,
    frame,
    history_of,
    observation,
    run,
    unframe,
    verify_trace,
)

P3 = build_graph(3, [(0, 1), (1, 2)])


class TestObservation:
    def test_silence_no_cd(self):
        assert observation(0, {}, P3, False, False) is NOISE

    def test_silence_cd(self):
        assert observation(0, {}, P3, True, False) is SILENCE

    def test_collision_cd(self):
        # both neighbors of node 1 transmit
        assert observation(1, {0: b"a", 2: b"b"}, P3, True, False) is COLLISION

    def test_collision_no_cd_is_noise(self):
        assert observation(1, {0: b"a", 2: b"b"}, P3, False, False) is NOISE

    def test_unique_transmitter(self):
        for cd in (False, True):
            obs = observation(1, {0: b"m"}, P3, cd, False)
            assert obs == Heard(b"m")

    def test_transmitter_marked(self):
        assert observation(0, {0: b"m"}, P3, False, True) is TX

    def test_non_neighbor_ignored(self):
        assert observation(0, {2: b"m"}, P3, False, False) is NOISE

    @given(st.integers(2, 16), st.integers(0, 2**32), st.data())
    @settings(max_examples=40, deadline=None)
    def test_no_cd_indistinguishability(self, n, seed, data):
        """Zero transmitting neighbors and two transmitting neighbors look
        identical without collision detection."""
        g = gen_random_connected(n, 0.4, seed)
        v = data.draw(st.integers(0, n - 1))
        others = [u for u in range(n) if u != v]
        nbrs = list(g.adj[v])
        silent = {
            u: b"x" for u in data.draw(st.sets(st.sampled_from(others), max_size=3))
            if u not in nbrs
        }
        assert observation(v, silent, g, False, False) is NOISE
        if len(nbrs) >= 2:
            noisy = dict(silent)
            noisy[nbrs[0]] = b"a"
            noisy[nbrs[1]] = b"b"
            assert observation(v, noisy, g, False, False) is NOISE


class LabelLengthOnce(NodeProgram):
    def action(self, rnd):
        self.output = len(self.label)
        return LISTEN


class BitDriven(NodeProgram):
    """Label bit 1: transmit 'x' in round 1; bit 0: report what was heard."""

    def action(self, rnd):
        if self.label == "1" and rnd == 1:
            return Transmit(b"x")
        return LISTEN

    def receive(self, rnd, obs):
        if self.label == "1":
            self.output = "sent"
        else:
            self.output = obs


class TestRun:
    def test_single_node_one_round(self):
        g = build_graph(1, [])
        tr = run(g, ["101"], LabelLengthOnce)
        assert tr.num_rounds == 1 and tr.outputs == [3]

    def test_p2_delivery(self):
        g = build_graph(2, [(0, 1)])
        tr = run(g, ["1", "0"], BitDriven)
        assert tr.outputs[1] == Heard(b"x")

    def test_p3_collision_is_noise(self):
        tr = run(P3, ["1", "0", "1"], BitDriven)
        assert tr.outputs[1] is NOISE

    def test_determinism(self):
        g = gen_cycle(5)
        labels = ["1", "0", "1", "0", "0"]
        t1 = run(g, labels, BitDriven)
        t2 = run(g, labels, BitDriven)
        assert t1.outputs == t2.outputs
        assert [r.transmitters for r in t1.rounds] == [r.transmitters for r in t2.rounds]
        assert [r.heard for r in t1.rounds] == [r.heard for r in t2.rounds]

    def test_label_count_checked(self):
        with pytest.raises(ValueError):
            run(P3, ["1"], BitDriven)

    def test_round_limit(self):
        class Never(NodeProgram):
            pass

        with pytest.raises(RoundLimitExceeded):
            run(P3, ["", "", ""], Never, max_rounds=10)


class TestHistory:
    def test_transmitter_history_starts_with_txmark(self):
        g = build_graph(2, [(0, 1)])
        tr = run(g, ["1", "0"], BitDriven)
        assert history_of(tr, 0)[0] is TX

    def test_silent_history_cd(self):
        class Quiet(NodeProgram):
            def action(self, rnd):
                if rnd >= 3:
                    self.output = "ok"
                return LISTEN

        g = build_graph(2, [(0, 1)])
        tr = run(g, ["", ""], Quiet, cd=True)
        assert all(o is SILENCE for o in history_of(tr, 0))

    def test_history_length_equals_rounds(self):
        g = gen_path(4)
        tr = run(g, ["1", "0", "0", "1"], BitDriven)
        for v in range(4):
            assert len(history_of(tr, v)) == tr.num_rounds

    def test_replay_reproduces_trace(self):
        g = gen_cycle(6)
        tr = run(g, ["1", "0", "0", "1", "0", "0"], BitDriven, cd=True)
        verify_trace(tr)

    def test_replay_on_composite_protocol(self):
        from radiolab.schemes import run_scheme

        res = run_scheme("fastsd", gen_path(64))
        assert res.ok
        verify_trace(res.trace)
        res = run_scheme("toprec", gen_cycle(9), cd=True)
        assert res.ok
        verify_trace(res.trace)


class TestIsolation:
    def test_program_constructed_from_label_only(self):
        sig = inspect.signature(NodeProgram.__init__)
        assert list(sig.parameters) == ["self", "label"]

    def test_engine_passes_only_rounds_and_observations(self):
        seen = []

        class Probe(NodeProgram):
            def action(self, rnd):
                assert isinstance(rnd, int)
                self.output = "done"
                return LISTEN

            def receive(self, rnd, obs):
                seen.append((self.label, rnd, type(obs).__name__))

        run(P3, ["a", "b", "c"], Probe, max_rounds=4)
        assert all(isinstance(r, int) and t in
                   {"Noise", "Heard", "TxMark", "SilenceMark", "CollisionMark"}
                   for _, r, t in seen)

    def test_equal_labels_behave_identically(self):
        """Nodes in symmetric positions with equal labels produce identical
        action streams: the interface exposes no node identity."""
        g = gen_cycle(4)
        tr = run(g, ["1"] * 4, BitDriven)
        # all four transmit in round 1, so nobody ever hears anything
        assert set(tr.rounds[0].transmitters) == {0, 1, 2, 3}
        assert tr.rounds[0].heard == {}


class TestMaxRoundsEnv:
    def test_env_override(self, monkeypatch):
        from radiolab.sim import default_max_rounds

        assert default_max_rounds(10) == 5000
        monkeypatch.setenv("RADIOLAB_MAX_ROUNDS", "123")
        assert default_max_rounds(10) == 123


class TestTraceDump:
    def test_jsonl_shape(self):
        g = build_graph(2, [(0, 1)])
        tr = run(g, ["1", "0"], BitDriven)
        buf = io.StringIO()
        dump_trace_jsonl(tr, buf)
        lines = [json.loads(line) for line in buf.getvalue().splitlines()]
        assert lines[0]["round"] == 1
        assert lines[0]["transmitters"] == [{"node": 0, "msg_hex": b"x".hex()}]
        assert lines[0]["observations"][1].startswith("heard:")

    def test_frame_round_trip(self):
        msg = frame("tag", 3, "10", [1, 2])
        assert unframe(msg) == ["tag", 3, "10", [1, 2]]


class TestObservationReconstruction:
    def test_trace_observation_of_matches_model(self):
        g = gen_cycle(5)
        tr = ExecutionTrace(g, cd=True)
        # node 1 sits between both transmitters; 3 hears b, 4 hears a
        tr.rounds.append(RoundRecord({0: b"a", 2: b"b"}, {3: b"b", 4: b"a"}))
        assert tr.observation_of(1, 1) is COLLISION
        assert tr.observation_of(4, 1) == Heard(b"a")
        verify_trace(tr)
