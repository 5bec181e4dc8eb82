import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recourse_match.graph import FailureGraph
from recourse_match.instances import (
    DirectedInstance,
    InstanceFile,
    InstanceRangeError,
    MalformedInstanceError,
    UnknownVersionError,
    fold_two_cycles,
    format_instance,
    gen_complete,
    gen_cycle,
    gen_kep,
    gen_path,
    gen_random,
    parse_instance,
    read_instance,
    write_instance,
)


def pair_instance(pv=(0.1, 0.2), pij=0.3, pji=0.4):
    return DirectedInstance(2, pv, ((0, 1, pij), (1, 0, pji)))


def test_fold_as_written():
    g = fold_two_cycles(pair_instance())
    assert g.edges == ((0, 1),)
    assert g.fail_prob[0] == pytest.approx(0.0024, abs=1e-15)


def test_fold_complement():
    g = fold_two_cycles(pair_instance(), "complement")
    assert g.fail_prob[0] == pytest.approx(1 - 0.9 * 0.8 * 0.7 * 0.6, abs=1e-15)
    assert g.fail_prob[0] == pytest.approx(0.6976, abs=1e-12)


def test_fold_one_way_arc_dropped():
    d = DirectedInstance(2, (0.1, 0.2), ((0, 1, 0.3),))
    assert fold_two_cycles(d).edge_count == 0


def test_fold_keeps_isolated_vertices():
    d = DirectedInstance(5, (0.5,) * 5, ((0, 1, 0.5), (1, 0, 0.5), (2, 3, 0.5)))
    g = fold_two_cycles(d)
    assert g.vertex_count == 5 and g.edges == ((0, 1),)


def test_fold_rejects_unknown_mode():
    with pytest.raises(ValueError):
        fold_two_cycles(pair_instance(), "average")


@st.composite
def directed(draw):
    n = draw(st.integers(2, 7))
    probs = st.floats(0, 1)
    pv = draw(st.lists(probs, min_size=n, max_size=n))
    ordered = list(itertools.permutations(range(n), 2))
    arcs = draw(st.lists(st.sampled_from(ordered), unique=True))
    pa = draw(st.lists(probs, min_size=len(arcs), max_size=len(arcs)))
    return DirectedInstance(n, tuple(pv), tuple((i, j, p) for (i, j), p in zip(arcs, pa)))


@settings(max_examples=200)
@given(directed())
def test_fold_properties(d):
    arc = {(i, j): p for i, j, p in d.arcs}
    cycles = {(i, j) for i in range(d.vertex_count) for j in range(i + 1, d.vertex_count)
              if (i, j) in arc and (j, i) in arc}
    for mode in ("as-written", "complement"):
        g = fold_two_cycles(d, mode)
        assert set(g.edges) == cycles
        for (i, j), p in zip(g.edges, g.fail_prob):
            parts = (d.vertex_fail_prob[i], d.vertex_fail_prob[j], arc[(i, j)], arc[(j, i)])
            if mode == "as-written":
                assert p <= min(parts) + 1e-15
            else:
                assert p >= max(parts) - 1e-15


def test_named_generators():
    c = gen_cycle(4, 0.5)
    assert c.edges == ((0, 1), (0, 3), (1, 2), (2, 3)) and set(c.fail_prob) == {0.5}
    k = gen_complete(4, 0.5)
    assert k.edge_count == 6
    assert gen_path(4, 0.5).edges == ((0, 1), (1, 2), (2, 3))


def test_ranged_generators_are_deterministic():
    a = gen_cycle(4, (0.2, 0.4), seed=7)
    b = gen_cycle(4, (0.2, 0.4), seed=7)
    assert a == b
    assert all(0.2 <= p <= 0.4 for p in a.fail_prob)
    assert gen_cycle(4, (0.2, 0.4), seed=8) != a


@pytest.mark.parametrize("bad", [(0.5, 0.2), (-0.1, 0.5), (0.2, 1.5)])
def test_invalid_range(bad):
    with pytest.raises(ValueError):
        gen_cycle(4, bad, seed=1)


def test_gen_random_extremes():
    assert gen_random(6, 0.0, 0.5, seed=1).edge_count == 0
    assert gen_random(4, 1.0, 0.5, seed=1).edges == gen_complete(4, 0.5).edges
    with pytest.raises(ValueError):
        gen_random(4, 1.5)


def test_gen_random_deterministic():
    a = gen_random(20, 0.1, (0.0, 1.0), seed=42)
    b = gen_random(20, 0.1, (0.0, 1.0), seed=42)
    assert a == b and a.edge_count == b.edge_count


def test_gen_kep_deterministic():
    assert gen_kep(12, 0.3, seed=5) == gen_kep(12, 0.3, seed=5)


# -- file format -----------------------------------------------------------

def test_round_trip_undirected(tmp_path):
    g = gen_random(8, 0.5, (0.0, 1.0), seed=3)
    path = tmp_path / "g.rm"
    write_instance(path, InstanceFile(g, {"generator": "random", "seed": "3"}))
    back = read_instance(path)
    assert back.payload == g
    assert back.payload.fail_prob == g.fail_prob  # bit-exact
    assert back.metadata == {"generator": "random", "seed": "3"}
    again = tmp_path / "g2.rm"
    write_instance(again, back)
    assert again.read_bytes() == path.read_bytes()


def test_round_trip_directed(tmp_path):
    d = gen_kep(7, 0.4, seed=2)
    path = tmp_path / "d.rm"
    write_instance(path, d)
    back = read_instance(path)
    assert back.payload == d
    write_instance(tmp_path / "d2.rm", back)
    assert (tmp_path / "d2.rm").read_bytes() == path.read_bytes()


def test_read_folds_only_on_request(tmp_path):
    path = tmp_path / "d.rm"
    write_instance(path, pair_instance())
    assert isinstance(read_instance(path).payload, DirectedInstance)
    folded = read_instance(path, fold="as-written")
    assert isinstance(folded.payload, FailureGraph)
    assert folded.payload.fail_prob[0] == pytest.approx(0.0024)


def test_three_cycle_folds_to_nothing():
    text = "recourse-match v1 directed\nn 3\nv 0 0.1\nv 1 0.1\nv 2 0.1\na 0 1 0.5\na 1 2 0.5\na 2 0 0.5\n"
    d = parse_instance(text).payload
    assert fold_two_cycles(d).edge_count == 0


def test_comments_and_default_weight():
    text = "# header comment\nrecourse-match v1 undirected\nn 3  # three vertices\ne 0 1 0.25\ne 1 2 0.5 3\n"
    g = parse_instance(text).payload
    assert g.weight == (2.0, 3.0)


def test_probability_out_of_range_names_edge():
    text = "recourse-match v1 undirected\nn 3\ne 0 1 0.5\ne 1 2 1.5\n"
    with pytest.raises(InstanceRangeError, match=r"edge \{1,2\}") as info:
        parse_instance(text, "bad.rm")
    assert info.value.line == 4 and info.value.field == "p"


def test_unknown_version():
    with pytest.raises(UnknownVersionError) as info:
        parse_instance("recourse-match v9 undirected\nn 2\n")
    assert info.value.line == 1


@pytest.mark.parametrize(
    "text, line",
    [
        ("graph v1 undirected\n", 1),
        ("recourse-match v1 undirected\nn 3\ne 0 x 0.5\n", 3),
        ("recourse-match v1 undirected\ne 0 1 0.5\n", 2),
        ("recourse-match v1 undirected\nn 3\ne 0 1 0.5\ne 1 0 0.5\n", 4),
        ("recourse-match v1 undirected\nn 3\nq 1\n", 3),
        ("recourse-match v1 directed\nn 2\nv 0 0.1\nv 0 0.2\n", 4),
    ],
)
def test_malformed(text, line):
    with pytest.raises(MalformedInstanceError) as info:
        parse_instance(text)
    assert info.value.line == line


def test_missing_vertex_probability():
    with pytest.raises(MalformedInstanceError):
        parse_instance("recourse-match v1 directed\nn 2\nv 0 0.1\n")


def test_seventeen_digits():
    g = gen_cycle(3, (0.0, 1.0), seed=1)
    for line in format_instance(InstanceFile(g)).splitlines():
        if line.startswith("e "):
            assert float(line.split()[3]) in g.fail_prob
