import json
from fractions import Fraction

import pytest

from theta_upsilon import corpus
from theta_upsilon.errors import ComplexValidationError, UpsilonError
from theta_upsilon.graph_core import WeightVector, theta_graph
from theta_upsilon.t_homology import t_grading, upsilon_at
from theta_upsilon.tangle_complex import (
    CFKArrow,
    CFKGenerator,
    Generator,
    KnotCFKData,
    TangleComplex,
    diagonal_link_weights,
    dual,
    dump_complex,
    from_knot_cfk,
    glue,
    load_cfk,
    load_complex,
    parse_complex,
    permute_edges,
    stabilize,
    staircase_cfk,
    tensor,
    validate_complex,
    write_complex,
)

F = Fraction

THETA2 = {'pos': ["p"], 'neg': ["n"], 'edges': [["n", "p"], ["n", "p"]]}
THETA1 = {'pos': ["p"], 'neg': ["n"], 'edges': [["n", "p"]]}


def codes(raw):
    return [v.code for v in validate_complex(parse_complex(raw))]


def gradings(c, generator_id):
    return dict(c.by_id[generator_id].gradings)


def test_load_unknot(data_dir):
    c = load_complex(str(data_dir / "unknot.json"))
    assert c.boundary_pairs == 1
    assert gradings(c, "x") == {"1": 0, "2": 0}
    assert c.metadata == "unknot"


def test_load_trefoil_matches_import(data_dir, trefoil):
    c = load_complex(str(data_dir / "trefoil.json"))
    assert dump_complex(c)['generators'] == dump_complex(trefoil)['generators']
    assert dump_complex(c)['arrows'] == dump_complex(trefoil)['arrows']


def test_load_rejects_grading_violation(data_dir):
    with pytest.raises(ComplexValidationError) as e:
        load_complex(str(data_dir / "bad_trefoil.json"))
    assert e.value.code == "E_GRADING"
    assert e.value.details['violations'][0]['where'] == ["b", "a", "1"]


def test_validate_missing_grading():
    raw = {'graph': THETA2, 'generators': [{'id': "x", 'gr': {"1": "0"}}]}
    assert codes(raw) == ["E_MISSING_GRADING"]


def test_validate_unknown_matching_and_duplicate_id():
    raw = {
        'graph': THETA2,
        'generators': [
            {'id': "x", 'gr': {"1": "0", "2": "0", "1-2": "0"}},
            {'id': "x", 'gr': {"1": "0", "2": "0"}},
        ],
    }
    assert sorted(codes(raw)) == ["E_DUPLICATE_ID", "E_UNKNOWN_MATCHING"]


def test_validate_arrow_problems():
    raw = {
        'graph': THETA1,
        'generators': [{'id': "x", 'gr': {"1": "0"}}, {'id': "y", 'gr': {"1": "1"}}],
        'arrows': [
            {'from': "x", 'to': "y", 'exp': [1]},
            {'from': "x", 'to': "y", 'exp': [1]},
            {'from': "x", 'to': "q", 'exp': [1]},
            {'from': "x", 'to': "y", 'exp': [1, 0]},
        ],
    }
    assert codes(raw) == ["E_UNKNOWN_GENERATOR", "E_EXPONENT", "E_DUPLICATE_ARROW"]


def test_validate_d_squared():
    raw = {
        'graph': THETA1,
        'generators': [
            {'id': "x", 'gr': {"1": "0"}},
            {'id': "y", 'gr': {"1": "-1"}},
            {'id': "z", 'gr': {"1": "-2"}},
        ],
        'arrows': [{'from': "x", 'to': "y", 'exp': [0]}, {'from': "y", 'to': "z", 'exp': [0]}],
    }
    report = validate_complex(parse_complex(raw))
    assert [(v.code, v.where) for v in report] == [("E_D_SQUARED", ("x", "z"))]


def test_validate_unsupported_ideal():
    raw = {
        'graph': {'pos': ["a", "b"], 'neg': ["x", "y"], 'edges': [["x", "a"], ["x", "b"], ["y", "b"]]},
        'generators': [{'id': "g", 'gr': {"1-3": "0"}}],
    }
    assert codes(raw) == ["E_UNSUPPORTED_IDEAL"]


@pytest.mark.parametrize("raw", [
    {'generators': []},
    {'graph': THETA2, 'generators': [{'gr': {}}]},
    {'graph': THETA2, 'generators': [], 'arrows': [{'from': "x"}]},
    {'graph': THETA2, 'generators': [], 'arrows': [{'from': "x", 'to': "y", 'exp': "1"}]},
])
def test_parse_complex_rejects(raw):
    with pytest.raises(UpsilonError) as e:
        parse_complex(raw)
    assert e.value.code == "E_PARSE"


def test_validate_corpus_is_clean():
    for name, c in corpus.corpus().items():
        assert validate_complex(c) == [], name


def test_from_knot_cfk_gradings(trefoil):
    assert gradings(trefoil, "a") == {"1": -2, "2": 0}
    assert gradings(trefoil, "b") == {"1": -1, "2": -1}
    assert gradings(trefoil, "c") == {"1": 0, "2": -2}


@pytest.mark.parametrize("t", ["0", "1/2", "1", "3/2", "2"])
def test_knot_grading_on_diagonal(trefoil, t):
    t = F(t)
    gr = t_grading(trefoil, WeightVector((t, 2 - t)))
    cfk = {g.id: g for g in corpus.trefoil_cfk().generators}
    assert gr == {x: cfk[x].maslov - t * cfk[x].alexander for x in cfk}


def test_from_knot_cfk_rejects_maslov_drop():
    k = KnotCFKData(
        generators=(CFKGenerator("a", F(0), F(0)), CFKGenerator("b", F(0), F(0))),
        arrows=(CFKArrow("a", "b", 1, 0),),
    )
    with pytest.raises(UpsilonError) as e:
        from_knot_cfk(k)
    assert e.value.code == "E_MASLOV_DROP"


def test_load_cfk_files(data_dir):
    trefoil = from_knot_cfk(load_cfk(str(data_dir / "trefoil_cfk.json")))
    assert len(trefoil.generators) == 3
    eight = from_knot_cfk(load_cfk(str(data_dir / "figure8_cfk.json")))
    assert len(eight.generators) == 5
    assert eight.metadata == "figure-eight"


def test_staircase_matches_trefoil():
    steps = staircase_cfk([1, 1])
    assert [(g.maslov, g.alexander) for g in steps.generators] == [(0, 1), (-1, 0), (-2, -1)]
    assert [(a.source, a.target, a.z, a.w) for a in steps.arrows] == [("x1", "x0", 0, 1), ("x1", "x2", 1, 0)]


@pytest.mark.parametrize("steps", [[], [1], [1, 0], [1, 2]])
def test_staircase_rejects(steps):
    with pytest.raises(UpsilonError) as e:
        staircase_cfk(steps)
    assert e.value.code == "E_RANGE"


def test_tensor_with_unknot(trefoil, unknot):
    product = tensor(trefoil, unknot)
    assert [g.id for g in product.generators] == ["a*x", "b*x", "c*x"]
    assert gradings(product, "a*x") == gradings(trefoil, "a")
    assert validate_complex(product) == []


def test_tensor_trefoil_squared(trefoil):
    product = tensor(trefoil, trefoil)
    assert len(product.generators) == 9
    assert validate_complex(product) == []
    t = WeightVector.of([1, 1])
    assert upsilon_at(product, t) == [2 * upsilon_at(trefoil, t)[0]]


def test_tensor_ids_stay_distinct():
    zero = {"1": F(0), "2": F(0)}
    left = TangleComplex(theta_graph(2), (Generator("a*b", zero), Generator("a", zero)), ())
    right = TangleComplex(theta_graph(2), (Generator("c", zero), Generator("b*c", zero)), ())
    assert validate_complex(left) == validate_complex(right) == []

    product = tensor(left, right)
    ids = [g.id for g in product.generators]
    assert len(set(ids)) == 4
    assert "a\\*b*c" in ids and "a*b\\*c" in ids
    assert validate_complex(product) == []


def test_tensor_shape_mismatch(trefoil):
    with pytest.raises(UpsilonError) as e:
        tensor(trefoil, corpus.theta3_trivial())
    assert e.value.code == "E_SHAPE_MISMATCH"


def test_stabilize(trefoil, unknot):
    assert stabilize(unknot, 2, 1).graph == theta_graph(3)
    s = stabilize(trefoil, 2, 1)
    assert gradings(s, "a") == {"1": -2, "2": 0, "3": 0}
    assert [list(a.exponents) for a in s.arrows] == [[0, 1, 1], [1, 0, 0]]
    assert validate_complex(s) == []
    t = WeightVector.of(["1/2", "1", "1/2"])
    assert upsilon_at(s, t) == upsilon_at(trefoil, WeightVector.of(["1/2", "3/2"]))
    t = WeightVector.of(["1/2", "3/2", "0"])
    assert upsilon_at(s, t) == upsilon_at(trefoil, WeightVector.of(["1/2", "3/2"]))


@pytest.mark.parametrize("slot, extra, code", [(3, 1, "E_BAD_SLOT"), (0, 1, "E_BAD_SLOT"), (1, 0, "E_RANGE")])
def test_stabilize_rejects(trefoil, slot, extra, code):
    with pytest.raises(UpsilonError) as e:
        stabilize(trefoil, slot, extra)
    assert e.value.code == code


def test_stabilize_needs_theta():
    with pytest.raises(UpsilonError) as e:
        stabilize(corpus.unlink2(), 1, 1)
    assert e.value.code == "E_SHAPE_MISMATCH"


def test_permute_edges(trefoil):
    swapped = permute_edges(trefoil, [2, 1])
    assert gradings(swapped, "a") == {"1": 0, "2": -2}
    assert validate_complex(swapped) == []
    with pytest.raises(UpsilonError) as e:
        permute_edges(trefoil, [1, 1])
    assert e.value.code == "E_INDEX"


def test_glue_unknots(unknot):
    glued = glue(unknot, unknot)
    assert glued.graph == theta_graph(2)
    assert upsilon_at(glued, WeightVector.of(["1/3", "5/3"])) == [0]


def test_glue_with_unknot_keeps_trefoil(trefoil, unknot):
    glued = glue(trefoil, unknot)
    for t in (["1/2", "3/2"], ["1", "1"], ["7/4", "1/4"]):
        t = WeightVector.of(t)
        assert upsilon_at(glued, t) == upsilon_at(trefoil, t)


def test_glue_with_trivial_theta3(trefoil):
    glued = glue(trefoil, corpus.theta3_trivial())
    assert glued.graph == theta_graph(3)
    assert validate_complex(glued) == []
    for t, folded in ((["1/2", "1", "1/2"], ["1/2", "3/2"]), (["3/2", "0", "1/2"], ["3/2", "1/2"])):
        assert upsilon_at(glued, WeightVector.of(t)) == upsilon_at(trefoil, WeightVector.of(folded))


def test_glue_trefoils(trefoil):
    glued = glue(trefoil, trefoil)
    assert validate_complex(glued) == []
    t = WeightVector.of(["1/2", "3/2"])
    swapped = WeightVector.of(["3/2", "1/2"])
    assert upsilon_at(glued, t) == [upsilon_at(trefoil, t)[0] + upsilon_at(trefoil, swapped)[0]]


def test_glue_sizes(trefoil):
    glued = glue(stabilize(trefoil, 1, 1), trefoil)
    assert glued.graph == theta_graph(3)
    assert validate_complex(glued) == []


def test_dual(trefoil):
    mirror = dual(trefoil)
    assert gradings(mirror, "a") == {"1": 2, "2": 0}
    assert [(a.source, a.target) for a in mirror.arrows] == [("a", "b"), ("c", "b")]
    assert validate_complex(mirror) == []
    t = WeightVector.of(["1/2", "3/2"])
    assert upsilon_at(mirror, t) == [-upsilon_at(trefoil, t)[0]]
    assert upsilon_at(tensor(trefoil, mirror), t) == [0]


def test_write_complex_round_trip(tmp_path, trefoil):
    path = tmp_path / "trefoil.json"
    write_complex(trefoil, str(path))
    assert json.loads(path.read_text(encoding="utf-8")) == dump_complex(trefoil)
    assert dump_complex(load_complex(str(path))) == dump_complex(trefoil)


@pytest.mark.parametrize("n, t, expected", [
    (2, "1/2", ["1/2", "1/2", "3/2", "3/2"]),
    (1, "0", ["0", "2"]),
    (3, "2", ["2", "2", "2", "0", "0", "0"]),
])
def test_diagonal_link_weights(n, t, expected):
    assert diagonal_link_weights(n, t).to_strings() == expected


def test_diagonal_link_weights_range():
    with pytest.raises(UpsilonError) as e:
        diagonal_link_weights(2, "5/2")
    assert e.value.code == "E_RANGE"
