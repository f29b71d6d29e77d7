import io

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radiolab.errors import (
    Disconnected,
    DuplicateEdge,
    IndexOutOfRange,
    NotPerfectEvenSquare,
    OddSize,
    SelfLoop,
)
from radiolab.graphs import (
    bfs_layers,
    build_graph,
    diameter,
    gen_cycle,
    gen_grid,
    gen_lb_component,
    gen_lb_family,
    gen_lb_general,
    gen_path,
    gen_random_connected,
    gen_star,
    gen_tree,
    read_edge_list,
    to_dot,
    write_edge_list,
)


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


class TestBuildGraph:
    def test_single_edge(self):
        g = build_graph(2, [(0, 1)])
        assert g.max_degree() == 1 and diameter(g) == 1

    def test_path3(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        assert g.max_degree() == 2 and diameter(g) == 2

    def test_duplicate_edge(self):
        with pytest.raises(DuplicateEdge):
            build_graph(4, [(0, 1), (0, 1)])
        with pytest.raises(DuplicateEdge):
            build_graph(4, [(0, 1), (1, 0)])

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            build_graph(2, [(1, 1)])

    def test_bad_index(self):
        with pytest.raises(IndexOutOfRange):
            build_graph(2, [(0, 2)])


class TestBfsLayers:
    def test_path_end(self):
        la = bfs_layers(gen_path(4), 0)
        assert la.layer == (0, 1, 2, 3) and la.depth == 3

    def test_star_center(self):
        la = bfs_layers(gen_star(5), 0)
        assert la.layer == (0, 1, 1, 1, 1) and la.depth == 1

    def test_cycle4_against_nx(self):
        g = gen_cycle(4)
        la = bfs_layers(g, 0)
        dist = nx.single_source_shortest_path_length(to_nx(g), 0)
        assert la.layer == tuple(dist[v] for v in range(4))
        assert la.layer == (0, 1, 2, 1) and la.depth == 2

    def test_disconnected(self):
        g = build_graph(4, [(0, 1), (2, 3)])
        with pytest.raises(Disconnected):
            bfs_layers(g, 0)


class TestDiameter:
    def test_small_cases(self):
        k4 = build_graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
        assert diameter(k4) == 1
        assert diameter(gen_path(5)) == 4
        assert diameter(gen_cycle(6)) == 3

    @given(st.integers(2, 40), st.floats(0, 1), st.integers(0, 2**32))
    @settings(max_examples=30, deadline=None)
    def test_matches_networkx(self, n, p, seed):
        g = gen_random_connected(n, p, seed)
        assert diameter(g) == nx.diameter(to_nx(g))


class TestRandomConnected:
    def test_single_node(self):
        assert gen_random_connected(1, 0.5, 0).n == 1

    def test_p_zero_is_tree(self):
        g = gen_random_connected(5, 0.0, 7)
        assert g.m() == 4 and g.is_connected()

    def test_p_one_is_complete(self):
        g = gen_random_connected(5, 1.0, 1)
        assert g.m() == 10

    def test_deterministic(self):
        a = gen_random_connected(30, 0.2, 42)
        b = gen_random_connected(30, 0.2, 42)
        assert a.edges() == b.edges()

    @given(st.integers(1, 60), st.floats(0, 1), st.integers(0, 2**32))
    @settings(max_examples=40, deadline=None)
    def test_always_connected(self, n, p, seed):
        assert gen_random_connected(n, p, seed).is_connected()

    @given(st.integers(1, 80), st.integers(0, 2**32))
    @settings(max_examples=30, deadline=None)
    def test_tree_generator(self, n, seed):
        g = gen_tree(n, seed)
        assert g.m() == n - 1 and g.is_connected()


class TestLBComponent:
    def test_k2(self):
        g = gen_lb_component(2)
        assert g.edges() == [(0, 1)]

    def test_k6_degrees(self):
        g = gen_lb_component(6)
        assert g.m() == 6
        assert [g.degree(v) for v in range(3)] == [1, 2, 3]
        assert [g.degree(v) for v in range(3, 6)] == [3, 2, 1]

    def test_k4_edges(self):
        g = gen_lb_component(4)
        assert set(g.edges()) == {(0, 2), (1, 2), (1, 3)}
        assert len({g.degree(v) for v in range(4)}) == 2

    def test_odd_rejected(self):
        with pytest.raises(OddSize):
            gen_lb_component(5)
        with pytest.raises(OddSize):
            gen_lb_component(0)

    @pytest.mark.parametrize("k", [2, 4, 6, 8, 10, 12])
    def test_distinct_degree_count(self, k):
        g = gen_lb_component(k)
        assert len({g.degree(v) for v in range(k)}) == k // 2


class TestLBFamily:
    def test_n4_is_k4(self):
        g, desc = gen_lb_family(4)
        assert g.n == 4 and g.m() == 6
        assert len(desc.components) == 2

    def test_n36_counts(self):
        g, desc = gen_lb_family(36)
        assert g.n == 36 and g.m() == 576
        assert len(desc.components) == 6
        assert all(len(c) == 6 for c in desc.components)

    def test_rejects_non_square(self):
        with pytest.raises(NotPerfectEvenSquare):
            gen_lb_family(10)
        with pytest.raises(NotPerfectEvenSquare):
            gen_lb_family(9)  # odd sqrt

    @pytest.mark.parametrize("n", [4, 16, 36, 64])
    def test_degree_structure(self, n):
        g, desc = gen_lb_family(n)
        root = int(n**0.5)
        assert g.is_connected()
        for comp in desc.components:
            incomp = {
                v: sum(1 for w in g.adj[v] if w in set(comp)) for v in comp
            }
            assert len(set(incomp.values())) == root // 2
            for v in comp:
                assert g.degree(v) == incomp[v] + (n - root)


class TestLBGeneral:
    def test_delta4_n8(self):
        g, desc = gen_lb_general(4, 8)
        assert g.n == 10 and len(desc.components) == 2
        assert desc.specials == [4, 9]

    def test_delta16_n64(self):
        g, desc = gen_lb_general(16, 64)
        assert g.n == 68 and len(desc.specials) == 4
        ring = [e for e in g.edges() if e[0] in desc.specials and e[1] in desc.specials]
        assert len(ring) == 4

    def test_removing_specials_leaves_gk_copies(self):
        g, desc = gen_lb_general(4, 12)
        copies = -(-12 // 4)
        assert len(desc.components) == copies
        h = to_nx(g)
        h.remove_nodes_from(desc.specials)
        comps = list(nx.connected_components(h))
        assert len(comps) == copies
        gk = to_nx(gen_lb_family(4)[0])
        for comp in comps:
            assert nx.is_isomorphic(h.subgraph(comp), gk)

    def test_invalid_params(self):
        from radiolab.errors import InvalidParams

        with pytest.raises(InvalidParams):
            gen_lb_general(5, 5)


class TestFormats:
    def test_edge_list_round_trip(self):
        g = gen_random_connected(12, 0.3, 5)
        buf = io.StringIO()
        write_edge_list(g, buf)
        buf.seek(0)
        assert read_edge_list(buf).edges() == g.edges()

    def test_edge_list_canonical(self):
        g = gen_path(3)
        buf = io.StringIO()
        write_edge_list(g, buf)
        assert buf.getvalue() == "3 2\n0 1\n1 2\n"

    def test_dot_export(self):
        out = to_dot(gen_path(3))
        assert "0 -- 1;" in out and out.startswith("graph")


class TestGridGenerator:
    def test_grid_shape(self):
        g = gen_grid(3, 4)
        assert g.n == 12 and g.m() == 3 * 3 + 2 * 4
        assert diameter(g) == 5
