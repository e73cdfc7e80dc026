from fractions import Fraction

import pytest

from theta_upsilon.errors import UpsilonError
from theta_upsilon.graph_core import (
    Matching,
    WeightVector,
    coloring_ideal_is_trivial,
    enumerate_matchings,
    is_perfect_matching,
    link_graph,
    load_graph,
    matching_weight,
    parse_rational,
    parse_weight_vector,
    theta_graph,
    validate_graph,
)


def ids(g):
    return [m.canonical_id for m in enumerate_matchings(g)]


@pytest.mark.parametrize("raw, expected", [
    ("3/4", Fraction(3, 4)),
    (" -1/2 ", Fraction(-1, 2)),
    ("2", Fraction(2)),
    (5, Fraction(5)),
    ("6/4", Fraction(3, 2)),
])
def test_parse_rational(raw, expected):
    assert parse_rational(raw) == expected


@pytest.mark.parametrize("raw", [0.5, True, "abc", "1/0", None, ""])
def test_parse_rational_rejects(raw):
    with pytest.raises(UpsilonError) as e:
        parse_rational(raw)
    assert e.value.code == "E_PARSE"


def test_weight_vector_parse():
    t = parse_weight_vector("3/2,1/2")
    assert t.coords == (Fraction(3, 2), Fraction(1, 2))
    assert str(t) == "(3/2,1/2)"
    assert t.to_strings() == ["3/2", "1/2"]


@pytest.mark.parametrize("text", ["", "1,,2", "1,x"])
def test_weight_vector_parse_rejects(text):
    with pytest.raises(UpsilonError) as e:
        WeightVector.parse(text)
    assert e.value.code == "E_PARSE"


def test_matching_canonical_id():
    m = Matching.from_canonical_id("3-1")
    assert m.edge_ids == (1, 3)
    assert m.canonical_id == "1-3"


def test_theta_matchings(theta3):
    assert theta3.is_theta()
    assert theta3.kappa == 3
    assert ids(theta3) == ["1", "2", "3"]


def test_c4_and_k33_matchings(c4, data_dir):
    assert ids(c4) == ["1-3", "2-4"]
    assert len(enumerate_matchings(load_graph(str(data_dir / "k33.json")))) == 6


def test_disjoint_union_matchings(square):
    assert ids(square) == ["1-2", "1-4", "2-3", "3-4"]
    assert len(square.components) == 2
    assert square.components[0].edge_ids == (1, 3)


def test_validate_normalizes_reversed_edges():
    g = validate_graph({'pos': ["p"], 'neg': ["n"], 'edges': [["p", "n"], ["n", "p"]]})
    assert g.edges == (("n", "p"), ("n", "p"))
    assert g == theta_graph(2)


def test_validate_indexed_edges():
    g = validate_graph({
        'pos': ["p"], 'neg': ["n"],
        'edges': [{'index': 2, 'neg': "n", 'pos': "p"}, {'index': 1, 'neg': "n", 'pos': "p"}],
    })
    assert g.kappa == 2


@pytest.mark.parametrize("raw, code", [
    ({'pos': ["a", "b"], 'neg': ["x"], 'edges': [["a", "b"], ["x", "a"]]}, "E_BIPARTITE"),
    ({'pos': ["a", "b"], 'neg': ["x"], 'edges': [["x", "a"], ["x", "b"]]}, "E_UNBALANCED"),
    ({'pos': ["a", "b"], 'neg': ["x", "y"], 'edges': [["x", "a"], ["y", "a"]]}, "E_ISOLATED"),
    ({'pos': ["p"], 'neg': ["n"], 'edges': [{'index': 1, 'neg': "n", 'pos': "p"}, {'index': 1, 'neg': "n", 'pos': "p"}]}, "E_INDEX"),
    ({'pos': ["p"], 'neg': ["n"], 'edges': [{'index': 1, 'neg': "n", 'pos': "p"}, {'index': 3, 'neg': "n", 'pos': "p"}]}, "E_INDEX"),
    ({'pos': ["p"], 'neg': ["n"], 'edges': [["n", "q"]]}, "E_VERTEX"),
    ({'pos': ["p"], 'neg': ["p"], 'edges': [["p", "p"]]}, "E_VERTEX"),
    ({'pos': ["p"], 'edges': [["n", "p"]]}, "E_PARSE"),
    ({'pos': ["p"], 'neg': ["n"], 'edges': []}, "E_PARSE"),
    ({'pos': ["p"], 'neg': ["n"], 'edges': [["n", ["p"]]]}, "E_PARSE"),
    ({'pos': ["p"], 'neg': ["n"], 'edges': [{'neg': "n"}]}, "E_PARSE"),
])
def test_validate_graph_violations(raw, code):
    with pytest.raises(UpsilonError) as e:
        validate_graph(raw)
    assert e.value.code == code
    if code != "E_PARSE":
        assert e.value.details['violations'][0]['code'] == code


def test_validate_collects_all_violations():
    raw = {'pos': ["a", "b"], 'neg': ["x", "y"], 'edges': [["a", "b"], ["x", "y"]]}
    with pytest.raises(UpsilonError) as e:
        validate_graph(raw)
    assert [v['code'] for v in e.value.details['violations']] == ["E_BIPARTITE", "E_BIPARTITE"]


def test_unbalanced_file(data_dir):
    with pytest.raises(UpsilonError) as e:
        load_graph(str(data_dir / "unbalanced.json"))
    assert e.value.code == "E_UNBALANCED"


def test_missing_file(data_dir):
    with pytest.raises(UpsilonError) as e:
        load_graph(str(data_dir / "nope.json"))
    assert e.value.code == "E_IO"


@pytest.mark.parametrize("g, edges, expected", [
    (theta_graph(2), (1,), (2, 0)),
    (theta_graph(3), (3,), (0, 0, 2)),
])
def test_matching_weight(g, edges, expected):
    assert matching_weight(g, Matching(edges)) == WeightVector.of(expected)


def test_matching_weight_c4(c4):
    assert matching_weight(c4, Matching((1, 3))) == WeightVector.of([2, 0, 2, 0])


def test_matching_weight_rejects_non_matching(c4):
    assert not is_perfect_matching(c4, (1, 2))
    with pytest.raises(UpsilonError) as e:
        matching_weight(c4, Matching((1, 2)))
    assert e.value.code == "E_NOT_MATCHING"


def test_matching_weights_satisfy_vertex_sums(square):
    for m in enumerate_matchings(square):
        t = matching_weight(square, m)
        for v in square.vertices:
            assert sum(t[i - 1] for i in square.incidence[v]) == 2


def test_coloring_ideal():
    assert coloring_ideal_is_trivial(theta_graph(4))
    assert coloring_ideal_is_trivial(link_graph(3))
    path = validate_graph({'pos': ["a", "b"], 'neg': ["x", "y"], 'edges': [["x", "a"], ["x", "b"], ["y", "b"]]})
    assert not coloring_ideal_is_trivial(path)
