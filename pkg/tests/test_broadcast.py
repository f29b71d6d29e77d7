import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radiolab.broadcast import (
    PathMessageProgram,
    execack_program,
    executor_program,
    minimal_dominating_subset,
    synthesize_core,
    synthesize_execack,
    synthesize_executor,
    synthesize_mbroadcast,
    synthesize_path_message,
    verify_executor_run,
)
from radiolab.errors import EmptySourceSet, Undominatable
from radiolab.graphs import (
    build_graph,
    gen_cycle,
    gen_grid,
    gen_path,
    gen_random_connected,
    gen_star,
)
from radiolab.sim import run

K4 = build_graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


def brute_is_minimal_dominating(chosen, candidates, targets, g):
    def dominates(s):
        return all(any(w in s for w in g.adj[u]) for u in targets)

    if not dominates(chosen):
        return False
    return all(not dominates(chosen - {v}) for v in chosen)


class TestMinimalDominatingSubset:
    def test_single_candidate(self):
        g = gen_star(4)
        assert minimal_dominating_subset({0}, set(g.adj[0]), g) == {0}

    def test_path3(self):
        g = gen_path(3)
        assert minimal_dominating_subset({0, 1}, {2}, g) == {1}

    def test_star_with_extra_candidate(self):
        g = gen_star(5)
        assert minimal_dominating_subset({0, 1}, {2, 3, 4}, g) == {0}

    def test_undominatable(self):
        g = gen_path(4)
        with pytest.raises(Undominatable):
            minimal_dominating_subset({0}, {3}, g)

    @given(st.integers(3, 20), st.floats(0.1, 0.9), st.integers(0, 2**32))
    @settings(max_examples=40, deadline=None)
    def test_minimality_property(self, n, p, seed):
        g = gen_random_connected(n, p, seed)
        candidates = {v for v in range(n) if v % 2 == 0}
        targets = {
            u for u in range(n)
            if u not in candidates and any(w in candidates for w in g.adj[u])
        }
        if not targets:
            return
        chosen = minimal_dominating_subset(candidates, targets, g)
        assert chosen <= candidates
        assert brute_is_minimal_dominating(chosen, candidates, targets, g)


class TestSynthesizeExecutor:
    def test_single_node(self):
        b = synthesize_executor(build_graph(1, []), 0)
        assert b.meta["t"] == 0
        assert b.meta["synthesis"].tree.parent == {}

    def test_p2_one_stage(self):
        b = synthesize_executor(gen_path(2), 0)
        syn = b.meta["synthesis"]
        assert b.meta["t"] == 3
        assert syn.tree.level[1] == 1 and syn.tree.parent[1] == 0

    def test_star_one_stage(self):
        b = synthesize_executor(gen_star(5), 0)
        syn = b.meta["synthesis"]
        assert b.meta["t"] == 3
        assert all(syn.tree.level[v] == 1 for v in range(1, 5))
        assert all(syn.tree.parent[v] == 0 for v in range(1, 5))

    def test_empty_sources(self):
        with pytest.raises(EmptySourceSet):
            synthesize_core(gen_path(2), set())


class TestExecutorProgram:
    def test_p4_informs_within_three_stages(self):
        g = gen_path(4)
        b = synthesize_executor(g, 0)
        assert b.meta["t"] <= 9
        tr = run(g, b.labels, executor_program("M"))
        assert tr.outputs == ["M"] * 4
        verify_executor_run(g, b, tr)

    def test_levels_are_one_mod_three(self):
        g = gen_grid(3, 5)
        b = synthesize_executor(g, 0)
        tree = b.meta["synthesis"].tree
        assert all(l % 3 == 1 for v, l in tree.level.items() if v != 0)

    def test_c6_spanning_tree(self):
        g = gen_cycle(6)
        b = synthesize_executor(g, 0)
        tr = run(g, b.labels, executor_program("M"))
        assert tr.outputs == ["M"] * 6
        tree = b.meta["synthesis"].tree
        assert set(tree.parent) == {1, 2, 3, 4, 5}
        verify_executor_run(g, b, tr)

    @pytest.mark.parametrize("seed", [1, 2, 3, 4])
    def test_random_graphs_verified(self, seed):
        g = gen_random_connected(24, 0.12, seed)
        b = synthesize_executor(g, 0)
        tr = run(g, b.labels, executor_program("M"))
        assert tr.outputs == ["M"] * 24
        verify_executor_run(g, b, tr)

    def test_stage_count_at_most_n(self):
        for g in (gen_path(17), gen_cycle(9), gen_grid(4, 4)):
            b = synthesize_executor(g, 0)
            assert len(b.meta["synthesis"].stages) <= g.n
            assert b.meta["t"] <= 3 * g.n

    def test_alternate_sources(self):
        g = gen_grid(3, 5)
        for s in (0, 7, 14):
            b = synthesize_executor(g, s)
            tr = run(g, b.labels, executor_program("M"))
            assert tr.outputs == ["M"] * g.n
            verify_executor_run(g, b, tr)


class TestExecAck:
    def test_p2(self):
        g = gen_path(2)
        b = synthesize_execack(g, 0)
        tr = run(g, b.labels, execack_program("hi"))
        t = b.meta["t"]
        assert tr.outputs[0] == ("hi", t, 0, None)
        assert tr.outputs[1] == ("hi", t, 1, 0)
        assert tr.num_rounds <= 3 * t

    def test_single_node(self):
        g = build_graph(1, [])
        b = synthesize_execack(g, 0)
        tr = run(g, b.labels, execack_program("m"))
        assert tr.outputs[0] == ("m", 0, 0, None)

    def test_star_within_3t(self):
        g = gen_star(4)
        b = synthesize_execack(g, 0)
        tr = run(g, b.labels, execack_program("x"))
        t = b.meta["t"]
        assert t == 3 and tr.num_rounds <= 3 * t
        assert all(out[0] == "x" and out[1] == t for out in tr.outputs)

    def test_every_node_knows_levels(self):
        g = gen_grid(3, 4)
        b = synthesize_execack(g, 0)
        tr = run(g, b.labels, execack_program("x"))
        tree = b.meta["synthesis"].tree
        for v, out in enumerate(tr.outputs):
            _, t, level, parent_level = out
            assert t == b.meta["t"]
            assert level == (0 if v == 0 else tree.level[v])
            if v != 0:
                p = tree.parent[v]
                assert parent_level == (0 if p == 0 else tree.level[p])


class TestMBroadcast:
    def test_all_sources_zero_rounds(self):
        g = gen_path(5)
        b = synthesize_mbroadcast(g, set(range(5)))
        assert b.meta["t"] == 0
        tr = run(g, b.labels, executor_program("n"))
        assert tr.outputs == ["n"] * 5

    def test_p5_both_ends(self):
        g = gen_path(5)
        b = synthesize_mbroadcast(g, {0, 4})
        assert b.meta["t"] <= 6  # two stages suffice
        tr = run(g, b.labels, executor_program("n"))
        assert tr.outputs == ["n"] * 5

    def test_single_source_reduces_to_executor(self):
        g = gen_grid(3, 4)
        be = synthesize_executor(g, 0)
        bm = synthesize_mbroadcast(g, {0})
        te = run(g, be.labels, executor_program("z"))
        tm = run(g, bm.labels, executor_program("z"))
        assert [r.transmitters for r in te.rounds] == [r.transmitters for r in tm.rounds]

    def test_empty_sources_rejected(self):
        with pytest.raises(EmptySourceSet):
            synthesize_mbroadcast(gen_path(3), set())


class TestPathMessage:
    def test_single_node(self):
        g = build_graph(1, [])
        b = synthesize_path_message(g, 0, "101")
        tr = run(g, b.labels, PathMessageProgram)
        assert tr.outputs == ["101"]

    def test_p8_all_output_message(self):
        g = gen_path(8)
        b = synthesize_path_message(g, 0, "1011")
        tr = run(g, b.labels, PathMessageProgram)
        assert tr.outputs == ["1011"] * 8
        lo, hi = b.meta["collection_window"]
        # at most one transmitter per collection round, and the occupied
        # rounds are exactly the marked levels
        occupied = set()
        for r in range(lo, hi + 1):
            txs = tr.rounds[r - 1].transmitters
            assert len(txs) <= 1
            if txs:
                occupied.add(r)
        t = b.meta["t"]
        marked_levels = [l for l in b.meta["marked"] if l > 0]
        assert occupied == {3 * t + (t - 2) - l + 1 for l in marked_levels}

    def test_k4_root_chunk(self):
        b = synthesize_path_message(K4, 0, "1")
        tr = run(K4, b.labels, PathMessageProgram)
        assert tr.outputs == ["1"] * 4

    def test_one_marked_node_per_level(self):
        g = gen_random_connected(30, 0.1, 9)
        b = synthesize_path_message(g, 0, "110010")
        marked = b.meta["marked"]
        assert len(set(marked.values())) == len(marked)
        levels = [l for l in marked if l > 0]
        assert all(l % 3 == 1 for l in levels)

    def test_chunk_sizes_bounded(self):
        g = gen_path(20)
        m = "1" * 16
        b = synthesize_path_message(g, 0, m)
        t_ack = 3 * b.meta["t"]
        bound = 9 * (-(-len(m) // t_ack))
        assert all(len(c) <= bound for c in b.meta["chunks"].values())
        assert "".join(b.meta["chunks"][k] for k in sorted(b.meta["chunks"])) == m


class TestBundleSidecar:
    def test_json_shape(self):
        import json

        from radiolab.broadcast import bundle_sidecar

        g = gen_grid(3, 3)
        b = synthesize_executor(g, 0)
        side = json.loads(json.dumps(bundle_sidecar(b)))
        assert side["t"] == b.meta["t"]
        assert side["sources"] == [0]
        assert len(side["stages"]) == len(b.meta["synthesis"].stages)
        assert set(side["parent"]) == {str(v) for v in range(1, 9)}


class TestNodeLocality:
    def test_dom_decisions_match_oracle(self):
        """executor_program's DOM membership, recomputed from label+history,
        equals the offline schedule (checked inside verify_executor_run)."""
        for g in (gen_path(9), gen_grid(3, 4), gen_random_connected(18, 0.2, 7)):
            b = synthesize_executor(g, 0)
            tr = run(g, b.labels, executor_program("M"))
            verify_executor_run(g, b, tr)
