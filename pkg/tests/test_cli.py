import json

import pytest

from theta_upsilon import corpus
from theta_upsilon.cli import main
from theta_upsilon.tangle_complex import dump_complex


@pytest.fixture
def run(capsys):
    def invoke(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return invoke


def last_error(err):
    return json.loads(err.strip().splitlines()[-1])


def test_matchings(run, data_dir):
    code, out, _ = run("matchings", data_dir / "theta3.json")
    assert code == 0
    assert json.loads(out) == ["1", "2", "3"]


def test_matchings_of_complex_file(run, data_dir):
    code, out, _ = run("matchings", data_dir / "trefoil.json")
    assert code == 0
    assert json.loads(out) == ["1", "2"]


def test_polytope(run, data_dir):
    code, out, _ = run("polytope", data_dir / "c4.json")
    assert code == 0
    assert json.loads(out) == {'vertices': [["0", "2", "0", "2"], ["2", "0", "2", "0"]], 'dimension': 1}


def test_decompose(run, data_dir):
    code, out, _ = run("decompose", data_dir / "c4.json", "--t", "1,1,1,1")
    assert code == 0
    assert json.loads(out)['terms'] == [
        {'matching': "1-3", 'coefficient': "1/2"},
        {'matching': "2-4", 'coefficient': "1/2"},
    ]


def test_delta_complex(run, data_dir):
    code, out, _ = run("delta-complex", data_dir / "square.json")
    assert code == 0
    assert json.loads(out)['simplices']["2"] == [[0, 1, 3], [0, 2, 3]]


def test_upsilon_eval(run, data_dir):
    code, out, _ = run("upsilon", "eval", data_dir / "trefoil.json", "--t", "3/2,1/2")
    assert code == 0
    assert json.loads(out) == {
        't': ["3/2", "1/2"],
        'upsilon': ["-1/2"],
        'free_rank': 1,
        'torsion': [{'gr': "-3/2", 'order': "1/2"}],
    }


def test_upsilon_segment_json(run, data_dir):
    code, out, _ = run("upsilon", "segment", data_dir / "trefoil.json", "--from", "2,0", "--to", "0,2")
    assert code == 0
    payload = json.loads(out)
    assert payload['from'] == ["2", "0"]
    assert payload['functions'][0]['breakpoints'] == ["0", "1/2", "1"]
    assert payload['functions'][0]['certified'] is True


def test_upsilon_segment_csv(run, data_dir):
    code, out, _ = run(
        "upsilon", "segment", data_dir / "trefoil.json",
        "--from", "2,0", "--to", "0,2", "--format", "csv",
    )
    assert code == 0
    assert out.splitlines() == ["s,upsilon_1", "0,0", "1/2,-1", "1,0"]


def test_upsilon_segment_plot(run, data_dir):
    code, out, _ = run(
        "upsilon", "segment", data_dir / "trefoil.json",
        "--from", "2,0", "--to", "0,2", "--format", "plot", "--samples", "4",
    )
    assert code == 0
    assert out.splitlines() == ["# s upsilon_1", "0 0", "0.25 -0.5", "0.5 -1", "0.75 -0.5", "1 0"]


def test_out_file(run, data_dir, tmp_path):
    target = tmp_path / "upsilon.json"
    code, out, _ = run("upsilon", "eval", data_dir / "unknot.json", "--t", "1,1", "--out", target)
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text(encoding="utf-8")) == {
        't': ["1", "1"],
        'upsilon': ["0"],
        'free_rank': 1,
        'torsion': [],
    }


def test_import_cfk(run, data_dir):
    code, out, _ = run("import-cfk", data_dir / "trefoil_cfk.json")
    assert code == 0
    payload = json.loads(out)
    expected = json.loads((data_dir / "trefoil.json").read_text(encoding="utf-8"))
    assert payload['generators'] == expected['generators']
    assert payload['arrows'] == expected['arrows']


def test_validate(run, data_dir):
    code, out, _ = run("validate", data_dir / "trefoil.json")
    assert code == 0
    assert json.loads(out) == {'valid': True, 'generators': 3, 'arrows': 2}


def test_validate_reports_violation(run, data_dir):
    code, out, err = run("validate", data_dir / "bad_trefoil.json")
    assert code == 1
    assert out == ""
    error = last_error(err)
    assert error['error'] == "E_GRADING"
    assert error['details']['violations'][0]['code'] == "E_GRADING"


def test_tensor_and_stabilize(run, data_dir):
    code, out, _ = run("tensor", data_dir / "trefoil.json", data_dir / "unknot.json")
    assert code == 0
    assert [g['id'] for g in json.loads(out)['generators']] == ["a*x", "b*x", "c*x"]

    code, out, _ = run("stabilize", data_dir / "trefoil.json", "--slot", "2")
    assert code == 0
    assert json.loads(out)['arrows'][0]['exp'] == [0, 1, 1]


def test_glue(run, data_dir):
    code, out, _ = run("glue", data_dir / "trefoil.json", data_dir / "unknot.json")
    assert code == 0
    assert len(json.loads(out)['generators']) == 3


def test_invariants(run, data_dir):
    code, out, _ = run("invariants", "d", data_dir / "s3.json")
    assert code == 0
    assert json.loads(out) == {'d': "0"}

    code, out, _ = run("invariants", "tau", data_dir / "trefoil.json")
    assert code == 0
    assert json.loads(out)['tau'] == [[None, "1"], ["1", None]]


def test_jumps(run, data_dir):
    code, out, _ = run("invariants", "jumps", data_dir / "trefoil.json", "--i", "1", "--a", "1")
    assert code == 0
    [jump] = json.loads(out)
    assert jump['delta'] == "2"
    assert jump['even'] is True

    code, out, _ = run("invariants", "jumps", data_dir / "trefoil.json")
    assert code == 0
    assert [(j['i'], j['a'], j['delta']) for j in json.loads(out)] == [(1, "1", "2"), (2, "1", "2")]


def test_fi(run, data_dir):
    code, out, _ = run("invariants", "fi", data_dir / "trefoil.json", "--k", "2")
    assert code == 0
    assert json.loads(out) == {'i': 1, 'components': ["0", "0"], 'integral': True}


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["upsilon", "eval", "data/trefoil.json"],
    ["upsilon", "eval", "data/trefoil.json", "--t", "1,x"],
    ["decompose", "data/c4.json", "--t", "1,1,1,1", "--format", "csv"],
    ["invariants", "fi", "data/trefoil.json", "--k", "0"],
])
def test_usage_errors(run, data_dir, argv):
    argv = [str(data_dir / a[len("data/"):]) if a.startswith("data/") else a for a in argv]
    code, out, err = run(*argv)
    assert code == 2
    assert out == ""
    assert last_error(err)['error'] == "E_USAGE"


@pytest.mark.parametrize("argv, error", [
    (["upsilon", "eval", "trefoil.json", "--t", "3,-1"], "E_NOT_IN_POLYTOPE"),
    (["upsilon", "eval", "trefoil.json", "--t", "1,1,0"], "E_LENGTH"),
    (["stabilize", "trefoil.json", "--slot", "3"], "E_BAD_SLOT"),
    (["invariants", "d", "trefoil.json"], "E_SHAPE_MISMATCH"),
    (["matchings", "unbalanced.json"], "E_UNBALANCED"),
    (["matchings", "missing.json"], "E_IO"),
])
def test_domain_errors(run, data_dir, argv, error):
    argv = [str(data_dir / a) if a.endswith(".json") else a for a in argv]
    code, out, err = run(*argv)
    assert code == 1
    assert out == ""
    assert last_error(err)['error'] == error


def test_malformed_edge_endpoint(run, tmp_path):
    path = tmp_path / "graph.json"
    path.write_text(json.dumps({'pos': ["p"], 'neg': ["n"], 'edges': [["n", ["p"]]]}), encoding="utf-8")
    code, out, err = run("matchings", path)
    assert code == 1
    assert out == ""
    assert last_error(err)['error'] == "E_PARSE"


def test_jumps_without_bracket_need_theta(run, tmp_path):
    path = tmp_path / "unlink2.json"
    path.write_text(json.dumps(dump_complex(corpus.unlink2())), encoding="utf-8")
    code, out, err = run("invariants", "jumps", path)
    assert code == 1
    assert out == ""
    assert last_error(err)['error'] == "E_SHAPE_MISMATCH"
