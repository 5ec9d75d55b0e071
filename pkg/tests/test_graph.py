import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iabc import kernels
from iabc.generators import chord, complete, core_network, hypercube
from iabc.graph import (
    Digraph,
    EnumerationLimitError,
    GraphError,
    GraphFormatError,
    PartitionWitness,
    arrow,
    check_condition,
    dump_graph,
    find_witness,
    graph_to_dict,
    in_neighbors,
    in_set,
    is_violating,
    iter_witnesses,
    load_graph,
    min_in_degree_ok,
    out_neighbors,
    propagate,
)
from oracles import arrow_bf, canonical_first_bf, condition_holds_bf, violates_bf

from conftest import SMALL_CORPUS


@st.composite
def digraphs(draw, min_n=2, max_n=6):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Digraph(n, frozenset(p for p, b in zip(pairs, bits) if b))


def disjoint_pairs(n):
    nodes = range(n)
    for labels in itertools.product((0, 1, 2), repeat=n):
        a = frozenset(v for v in nodes if labels[v] == 1)
        b = frozenset(v for v in nodes if labels[v] == 2)
        if a and b:
            yield a, b


class TestDigraph:
    def test_rejects_self_loop(self):
        with pytest.raises(GraphError, match="self-loop"):
            Digraph(3, frozenset({(1, 1)}))

    def test_rejects_out_of_range(self):
        with pytest.raises(GraphError, match="outside"):
            Digraph(3, frozenset({(0, 3)}))

    def test_rejects_duplicates_from_edge_list(self):
        with pytest.raises(GraphError, match="duplicate"):
            Digraph.from_edges(3, [(0, 1), (0, 1)])

    @pytest.mark.parametrize("n", [0, 1])
    def test_needs_two_nodes(self, n):
        with pytest.raises(GraphError):
            Digraph(n)

    def test_equality_ignores_edge_order(self):
        assert Digraph.from_edges(3, [(0, 1), (1, 2)]) == Digraph.from_edges(3, [(1, 2), (0, 1)])


class TestNeighbors:
    def test_chord7_in_neighbors_of_0(self):
        # edges (j, j+k mod 7), k = 1..5, that land on 0
        expected = {j for j in range(7) for k in range(1, 6) if (j + k) % 7 == 0}
        assert expected == {2, 3, 4, 5, 6}
        assert in_neighbors(chord(7, 2), 0) == expected

    def test_chord7_out_neighbors_of_0(self):
        assert out_neighbors(chord(7, 2), 0) == {k % 7 for k in range(1, 6)} == {1, 2, 3, 4, 5}

    def test_complete(self):
        g = complete(4)
        assert in_neighbors(g, 2) == out_neighbors(g, 2) == {0, 1, 3}

    def test_single_edge(self):
        g = Digraph.from_edges(2, [(0, 1)])
        assert in_neighbors(g, 0) == frozenset()
        assert out_neighbors(g, 1) == frozenset()

    @pytest.mark.parametrize("i", [-1, 4, 10])
    def test_out_of_range(self, i):
        with pytest.raises(GraphError):
            in_neighbors(complete(4), i)
        with pytest.raises(GraphError):
            out_neighbors(complete(4), i)

    @given(digraphs())
    def test_in_out_are_transposes(self, g):
        for i in g.nodes:
            assert i not in g.in_neighbors(i)
            for j in g.in_neighbors(i):
                assert i in g.out_neighbors(j)


class TestArrow:
    def test_chord7_known_counterexample(self):
        assert not arrow(chord(7, 2), 2, {1, 3, 4}, {0, 2})

    def test_complete4(self):
        assert arrow(complete(4), 1, {1, 2}, {3})

    def test_singleton_source_never_reaches_f_plus_1(self):
        g = complete(6)
        assert not arrow(g, 1, {5}, set(range(5)))

    @pytest.mark.parametrize("a,b", [({0}, {0, 1}), (set(), {1}), ({1}, set())])
    def test_bad_sets(self, a, b):
        with pytest.raises(GraphError):
            arrow(complete(3), 0, a, b)

    @pytest.mark.parametrize("name,g", [c for c in SMALL_CORPUS if c[1].n <= 5][:40])
    def test_matches_definition_on_all_pairs(self, name, g):
        for f in range(3):
            for a, b in disjoint_pairs(g.n):
                assert arrow(g, f, a, b) == arrow_bf(g.edges, f, a, b)


class TestInSet:
    def test_complete4(self):
        assert in_set(complete(4), 1, {1, 2}, {3, 0}) == {0, 3}

    def test_chord7_counterexample_is_empty(self):
        assert in_set(chord(7, 2), 2, {1, 3, 4}, {0, 2}) == frozenset()

    def test_no_edges_into_b(self):
        g = Digraph.from_edges(4, [(2, 0), (3, 0), (2, 1)])
        assert in_set(g, 0, {0, 1}, {2, 3}) == frozenset()

    @given(digraphs(max_n=5), st.integers(0, 2), st.data())
    def test_empty_iff_no_arrow(self, g, f, data):
        labels = data.draw(st.lists(st.sampled_from((0, 1, 2)), min_size=g.n, max_size=g.n))
        a = {v for v in g.nodes if labels[v] == 1}
        b = {v for v in g.nodes if labels[v] == 2}
        if a and b:
            assert bool(in_set(g, f, a, b)) == arrow(g, f, a, b)


class TestPropagate:
    def test_complete4_one_step(self):
        res = propagate(complete(4), 1, {1, 2}, {0, 3})
        assert res.propagates and res.steps == 1
        assert res.a_seq[1] == {0, 1, 2, 3} and res.b_seq[1] == frozenset()

    def test_chord7_stalls_immediately(self):
        res = propagate(chord(7, 2), 2, {0, 2}, {1, 3, 4})
        assert not res.propagates and res.steps == 0
        assert res.stalled_pair == ({0, 2}, {1, 3, 4})

    def test_f0_chain(self):
        # 0 -> 1 -> 2 -> 3 absorbs one node per step
        g = Digraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        res = propagate(g, 0, {0}, {1, 2, 3})
        assert res.propagates and res.steps == 3 <= g.n - 0 - 1
        assert [sorted(b) for b in res.b_seq] == [[1, 2, 3], [2, 3], [3], []]

    @settings(max_examples=200)
    @given(digraphs(), st.integers(0, 2), st.data())
    def test_sequence_invariants(self, g, f, data):
        labels = data.draw(st.lists(st.sampled_from((0, 1, 2)), min_size=g.n, max_size=g.n))
        a = frozenset(v for v in g.nodes if labels[v] == 1)
        b = frozenset(v for v in g.nodes if labels[v] == 2)
        if not (a and b):
            return
        res = propagate(g, f, a, b)
        assert res.a_seq[0] == a and res.b_seq[0] == b
        for at, bt in zip(res.a_seq, res.b_seq):
            assert at | bt == a | b and not at & bt
        assert all(res.b_seq[t] for t in range(res.steps))
        if res.propagates:
            assert res.b_seq[-1] == frozenset()
            assert res.steps <= g.n - f - 1
            assert len(a) >= f + 1
        else:
            at, bt = res.stalled_pair
            assert bt and not arrow(g, f, at, bt)

    def test_deterministic(self):
        g = core_network(6, 1)
        assert propagate(g, 1, {0, 1}, {2, 3, 4, 5}) == propagate(g, 1, [1, 0], [5, 4, 3, 2])


class TestIsViolating:
    def test_chord7_known_witness(self):
        w = PartitionWitness({5, 6}, {0, 2}, set(), {1, 3, 4})
        assert is_violating(chord(7, 2), 2, w)

    def test_hypercube_dimension_cut(self):
        w = PartitionWitness(set(), {0, 1, 2, 3}, set(), {4, 5, 6, 7})
        assert is_violating(hypercube(3), 1, w)

    def test_complete4_never(self):
        g = complete(4)
        assert not any(is_violating(g, 1, w) for w in iter_witnesses(g, 1))

    @pytest.mark.parametrize(
        "w",
        [
            PartitionWitness({0, 1}, {2}, set(), {3}),  # |F| > f
            PartitionWitness(set(), {0, 1}, {1}, {2, 3}),  # overlap
            PartitionWitness(set(), {0}, set(), {1, 2}),  # misses node 3
            PartitionWitness(set(), set(), {0, 1}, {2, 3}),  # empty L
        ],
    )
    def test_malformed(self, w):
        with pytest.raises(GraphError):
            is_violating(complete(4), 1, w)


def test_iter_witnesses_counts():
    # F = {} gives 3^4 - (assignments with empty L or empty R) = 81 - 2*16 + 1 = 50
    g = complete(4)
    ws = list(iter_witnesses(g, 0))
    assert len(ws) == 50
    assert len(set(ws)) == 50


class TestCheckCondition:
    def test_chord7_violated(self, backend):
        v = check_condition(chord(7, 2), 2)
        assert not v.satisfied and is_violating(chord(7, 2), 2, v.witness)

    @pytest.mark.parametrize("g,f", [(chord(5, 1), 1), (complete(4), 1), (core_network(7, 2), 2)])
    def test_satisfied(self, backend, g, f):
        assert check_condition(g, f).satisfied

    def test_guard(self):
        g = complete(16)
        with pytest.raises(EnumerationLimitError, match="15"):
            check_condition(g, 1)
        with pytest.raises(EnumerationLimitError):
            find_witness(g, 1, [])

    def test_force_past_guard(self):
        v = check_condition(Digraph(16), 0, force=True)
        assert v.witness == PartitionWitness(set(), set(range(1, 16)), set(), {0})

    @pytest.mark.skipif(kernels.BACKEND != "cython", reason="full 16-node scan is minutes long in pure Python")
    def test_force_full_scan(self):
        assert check_condition(complete(16), 1, force=True).satisfied

    def test_low_degree_precheck_builds_single_node_witness(self):
        # node 3 has in-degree 2 <= 2f
        g = Digraph(5, frozenset(e for e in complete(5).edges if e not in {(0, 3), (1, 3)}))
        w = check_condition(g, 1).witness
        assert w.L == {3} and w.C == frozenset()
        assert w.F | (w.R & g.in_neighbors(3)) == g.in_neighbors(3)
        assert is_violating(g, 1, w)

    def test_precheck_falls_back_when_r_would_be_empty(self):
        # K2 with f=2: the single-node construction leaves R empty
        v = check_condition(complete(2), 2)
        assert not v.satisfied and is_violating(complete(2), 2, v.witness)

    @pytest.mark.parametrize("f", [1, 2])
    def test_complete_graphs_need_more_than_3f_nodes(self, f):
        for n in range(2, 3 * f + 1):
            assert not check_condition(complete(n), f).satisfied
        assert check_condition(complete(3 * f + 1), f).satisfied

    def test_min_in_degree(self):
        assert min_in_degree_ok(chord(7, 2), 2)
        assert not min_in_degree_ok(hypercube(3), 2)
        assert min_in_degree_ok(Digraph(3), 0)

    @pytest.mark.parametrize("name,g", SMALL_CORPUS[:13] + SMALL_CORPUS[13::4])
    def test_first_witness_is_canonical(self, backend, name, g):
        for f in range(3):
            v = check_condition(g, f)
            if f > 0 and not min_in_degree_ok(g, f):
                continue  # precheck witness, not canonical order
            first = canonical_first_bf(g.edges, g.n, f)
            if first is None:
                assert v.satisfied
            else:
                assert v.witness is not None
                assert (set(v.witness.F), set(v.witness.L), set(v.witness.C), set(v.witness.R)) == first

    def test_find_witness_fixed_f(self, backend):
        g = chord(7, 2)
        w = find_witness(g, 2, {5, 6})
        assert w.F == {5, 6} and violates_bf(g.edges, 2, w.F, w.L, w.C, w.R)
        assert find_witness(chord(5, 1), 1, {0}) is None


@settings(max_examples=150, deadline=None)
@given(digraphs(max_n=5), st.integers(0, 2))
def test_check_condition_matches_oracle_random(g, f):
    v = check_condition(g, f)
    assert v.satisfied == condition_holds_bf(g.edges, g.n, f)
    if not v.satisfied:
        assert violates_bf(g.edges, f, v.witness.F, v.witness.L, v.witness.C, v.witness.R)


class TestJson:
    def test_round_trip(self):
        for g in (chord(7, 2), hypercube(3), core_network(5, 1), Digraph(2)):
            assert load_graph(dump_graph(g)) == g

    def test_dict_form(self):
        assert graph_to_dict(Digraph.from_edges(3, [(2, 0), (0, 1)])) == {"n": 3, "edges": [[0, 1], [2, 0]]}

    def _doc(self, edges, n=4):
        return '{\n  "n": %d,\n  "edges": [\n%s\n  ]\n}\n' % (n, ",\n".join(f"    {e}" for e in edges))

    def test_self_loop_line(self):
        text = self._doc(["[0, 1]", "[1, 2]", "[2, 2]"])
        with pytest.raises(GraphFormatError, match="self-loop") as exc:
            load_graph(text)
        assert exc.value.line == 6

    def test_duplicate_line(self):
        text = self._doc(["[0, 1]", "[0, 1]"])
        with pytest.raises(GraphFormatError, match="duplicates edge #0") as exc:
            load_graph(text)
        assert exc.value.line == 5

    def test_out_of_range_line(self):
        text = self._doc(["[0, 1]", "[1, 2]", "[3, 4]"])
        with pytest.raises(GraphFormatError, match="outside") as exc:
            load_graph(text)
        assert exc.value.line == 6

    def test_syntax_error_line(self):
        with pytest.raises(GraphFormatError) as exc:
            load_graph('{\n "n": 3,\n "edges": [[0, 1],,]\n}')
        assert exc.value.line == 3

    @pytest.mark.parametrize("text", ['{"edges": []}', '{"n": 1, "edges": []}', '{"n": 3, "edges": [[0]]}', "[]"])
    def test_shape_errors(self, text):
        with pytest.raises(GraphFormatError):
            load_graph(text)
