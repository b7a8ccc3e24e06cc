import json

import numpy as np
import pytest

from qwave import ProblemFile, load_problem, serialize
from qwave.cli import main, run
from qwave.exceptions import ParseError, ValidationError
from qwave.problem import loads

GAUSS = {
    "T": 0.5,
    "initial": {"family": "gaussian", "params": {"center": [3, 3], "width": 1}},
    "boundary_g0": {"family": "free_evolution_trace", "params": {"center": [3, 3]}},
    "boundary_h0": {"family": "free_evolution_trace", "params": {"center": [3, 3]}},
    "grid": {"x_min": 1.0, "x_max": 6.0, "n": 6, "times": [0.25]},
    "fd": {"L": 12.0, "n": 128, "dt": 0.002},
}


def _write(tmp_path, obj, name="p.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def _paths(err):
    return [p for p, _ in err.value.violations]


def test_minimal_file_gets_defaults():
    spec = loads("{}")
    assert spec == ProblemFile()
    assert spec.grid["times"] == [1.0] and spec.initial["family"] == "zero"
    assert loads('{"T": 0.5}').grid["times"] == [0.5]


def test_s_out_of_range():
    with pytest.raises(ValidationError) as err:
        loads('{"s": 0.6}')
    assert "[0, 1/2)" in str(err.value)


def test_alpha_above_critical():
    with pytest.raises(ValidationError) as err:
        loads('{"s": 0.4, "alpha": 5}')
    assert "13/3" in str(err.value) and "4.333" in str(err.value)
    assert loads('{"s": 0.4, "alpha": 4.3}').alpha == 4.3


def test_every_violation_reported():
    bad = {"sign": 3, "T": -1, "initial": {"family": "sech", "params": {}},
           "grid": {"x_min": 0, "x_max": 1, "n": 1, "times": [0.1]},
           "fd": {"n": 2}, "constants": {"c": 0}, "colour": 1}
    with pytest.raises(ValidationError) as err:
        loads(json.dumps(bad))
    paths = _paths(err)
    for p in ("sign", "T", "initial.family", "grid.x_min", "grid.n", "fd.n", "constants.c", ""):
        assert p in paths


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        loads("{not json")
    with pytest.raises(ParseError):
        load_problem(tmp_path / "missing.json")


def test_round_trip(tmp_path):
    spec = loads(json.dumps(GAUSS))
    assert loads(serialize(spec)) == spec
    p = tmp_path / "rt.json"
    p.write_text(serialize(spec))
    assert load_problem(p) == spec


def test_builders():
    spec = loads(json.dumps(GAUSS))
    np.testing.assert_allclose(spec.nodes(), [1, 2, 3, 4, 5, 6])
    prob = spec.linear_problem()
    assert prob.T == 0.5 and prob.u0(3.0, 3.0) == pytest.approx(1.0)
    assert spec.fd_config().n == 128
    with pytest.raises(ValidationError):
        loads('{"forcing": {"family": "gaussian", "params": {}}}').nls_problem()


def test_solve_linear_zero_data(tmp_path):
    src = _write(tmp_path, {"grid": {"x_min": 0.5, "x_max": 2, "n": 4, "times": [0, 1]}})
    assert run("solve-linear", src, tmp_path / "out") == 0
    for i in (0, 1):
        tab = np.loadtxt(tmp_path / "out" / f"field_t{i}.csv", delimiter=",", skiprows=1)
        assert tab.shape == (16, 4) and not np.any(tab[:, 2:])
    head = (tmp_path / "out" / "field_t0.csv").read_text().splitlines()[:2]
    assert head[0] == "x1,x2,re_u,im_u" and head[1].startswith("5.0000000000000000e-01")


def test_verify_zero_data(tmp_path):
    src = _write(tmp_path, {"T": 0.5})
    assert run("verify", src, tmp_path / "out") == 0
    rep = json.loads((tmp_path / "out" / "verify.json").read_text())
    assert rep["passed"] and "global_relation" in rep["checks"]


@pytest.mark.filterwarnings("ignore::qwave.exceptions.ResolutionWarning")
def test_norms_admissible_pair(tmp_path):
    src = _write(tmp_path, {**GAUSS, "s": 0, "alpha": 3})
    assert main(["norms", str(src), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "norms.json").read_text())
    text = json.dumps(rep)
    assert '"q": "3"' in text and '"p": "6"' in text and "lifespan" in text


def test_compare_free_gaussian_and_determinism(tmp_path):
    src = _write(tmp_path, GAUSS)
    assert run("compare", src, tmp_path / "a") == 0
    rep = json.loads((tmp_path / "a" / "compare.json").read_text())
    assert rep["passed"] and rep["rel_l2"] <= 1e-2
    assert run("compare", src, tmp_path / "b") == 0
    assert (tmp_path / "a" / "compare.json").read_bytes() == \
        (tmp_path / "b" / "compare.json").read_bytes()
    assert run("compare", src, tmp_path / "c", tol=1e-6) == 4


def test_solve_nls_and_no_convergence(tmp_path):
    ok = {"T": 0.1, "initial": {"family": "gaussian", "params": {"amp": 0.1}},
          "grid": {"x_min": 0.5, "x_max": 8, "n": 40, "times": [0.1]}}
    assert run("solve-nls", _write(tmp_path, ok), tmp_path / "o") == 0
    log = (tmp_path / "o" / "iteration_log.jsonl").read_text().splitlines()
    assert 1 < len(log) <= 8 and (tmp_path / "o" / "field_t0.csv").exists()
    big = {"T": 1.0, "initial": {"family": "gaussian", "params": {"amp": 10}},
           "grid": {"x_min": 0.5, "x_max": 15, "n": 60, "times": [1.0]}}
    assert run("solve-nls", _write(tmp_path, big, "b.json"), tmp_path / "b") == 5
    assert (tmp_path / "b" / "iteration_log.jsonl").exists()


def test_exit_codes_and_threads(tmp_path, monkeypatch, capsys):
    assert run("norms", _write(tmp_path, {"s": 0.6}), tmp_path / "o") == 2
    assert "error [" in capsys.readouterr().err
    assert run("bogus", tmp_path / "p.json", tmp_path / "o") == 2
    monkeypatch.setenv("QW_THREADS", "1")
    src = _write(tmp_path, {"grid": {"x_min": 1, "x_max": 2, "n": 2, "times": [0.5]}})
    assert run("solve-linear", src, tmp_path / "t", threads=4) == 0
    with pytest.raises(SystemExit):
        main(["norms", str(src)])
