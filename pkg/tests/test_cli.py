import json
import math

import numpy as np
import pytest

from opbvp.cli import main, run
from opbvp.config import load_problem
from opbvp.errors import ConfigError

SIN = "problem:\n  builtin: periodic-resonance-sin\n"


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_builtin_expansion():
    spec = load_problem(SIN)
    sp = spec.problem
    assert (sp.n, spec.m) == (1, 2000)
    assert sp.T == pytest.approx(2 * math.pi)
    assert sp.A == [["1"]] and sp.A1 == [["1"]] and sp.f == ["sin(t)"]
    assert [idx for idx, _ in spec.boundary] == [0, 2000]
    np.testing.assert_array_equal(spec.boundary[0][1] + spec.boundary[1][1], np.zeros((2, 2)))
    np.testing.assert_array_equal(spec.alpha, [0, 0])


def test_builtin_override_and_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("problem:\n  builtin: periodic-resonance-sin2\n  m: 400\nrun:\n  order: 3\n  epsilon: [0.1, 0.01]\n")
    spec = load_problem(str(path))
    assert spec.m == 400 and spec.order == 3 and spec.epsilons == [0.1, 0.01]
    assert spec.problem.f == ["sin(2*t)"]


INLINE = """
problem:
  n: 1
  T: 1.5
  m: 100
  A: [["1 + t"]]
  f: ["cos(t)"]
  boundary:
    - {t: 0, M: [[1, 0]]}
    - {t: end, M: [[0, 1]]}
  alpha: [0.5]
"""


def test_inline_config():
    spec = load_problem(INLINE)
    assert spec.problem.A1 is None
    assert [idx for idx, _ in spec.boundary] == [0, 100]
    prob = spec.build()
    assert prob.form.target_dim == 1


@pytest.mark.parametrize("mutate, field", [
    (lambda s: s.replace("M: [[0, 1]]", "M: [[0, 1, 2]]"), "problem.boundary[1].M[0]"),
    (lambda s: s.replace("m: 100", "m: 2001"), "problem.m"),
    (lambda s: s.replace('"1 + t"', '"1 + q"'), "problem.A[0][0]"),
    (lambda s: s.replace("alpha: [0.5]", "alpha: [0.5, 1]"), "problem.alpha"),
    (lambda s: s.replace("t: end", "t: 7"), "problem.boundary[1].t"),
    (lambda s: s.replace("n: 1", "n: 0"), "problem.n"),
])
def test_config_errors_name_field(mutate, field):
    with pytest.raises(ConfigError) as exc:
        load_problem(mutate(INLINE))
    assert exc.value.path == field


def test_unknown_builtin():
    with pytest.raises(ConfigError) as exc:
        load_problem("problem:\n  builtin: nope\n")
    assert exc.value.path == "problem.builtin"


def test_odd_m_override_of_builtin():
    with pytest.raises(ConfigError):
        load_problem(SIN + "  m: 2001\n")


def test_analyze_command(tmp_path, capsys):
    cfg = tmp_path / "a.yaml"
    cfg.write_text(SIN)
    assert main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["solvability"]["classification"] == "quasisolution"
    assert doc["solvability"]["defect_norm"] == pytest.approx(math.pi, abs=1e-8)
    assert doc["bifurcation_holds"] and doc["B0"]["rho"] == 0
    assert "quasisolution" in capsys.readouterr().out


def test_perturb_command(tmp_path):
    cfg = tmp_path / "a.yaml"
    cfg.write_text(SIN)
    out = tmp_path / "o"
    assert main(["perturb", "--config", str(cfg), "--epsilon", "0.01", "--order", "4", "--out", str(out)]) == 0
    header, data = read_csv(out / "series_eps_0.01.csv")
    assert header == ["t", "y_1", "dy_1"]
    assert data.shape == (2001, 3)
    np.testing.assert_allclose(data[:, 1], -100 * np.sin(data[:, 0]), atol=1e-6)
    assert (out / "coeff_m1.csv").exists() and (out / "coeff_4.csv").exists()
    doc = json.loads((out / "perturb_report.json").read_text())
    assert doc["branch"] == "laurent" and doc["order"] == 4


def test_oracle_matches_solve(tmp_path):
    cfg = tmp_path / "iv.yaml"
    cfg.write_text("problem:\n  builtin: initial-value\n")
    out = tmp_path / "o"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["oracle", "--config", str(cfg), "--epsilon", "0", "--out", str(out)]) == 0
    _, a = read_csv(out / "solution.csv")
    _, b = read_csv(out / "oracle_eps_0.csv")
    assert np.abs(a - b).max() <= 1e-12


def test_sweep_command(tmp_path):
    cfg = tmp_path / "s.yaml"
    cfg.write_text("problem:\n  builtin: periodic-resonance-sin2\nrun:\n  order: 4\n")
    out = tmp_path / "o"
    assert main(["sweep", "--config", str(cfg), "--epsilon", "0.1", "--epsilon", "0.01", "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "epsilon,sup_error,relative_error,ratio"
    errs = [float(l.split(",")[1]) for l in lines[1:]]
    assert errs[0] < 1e-4 and errs[1] < errs[0]


def test_solve_quasisolution_report(tmp_path):
    spec = load_problem(SIN)
    assert run("solve", spec, str(tmp_path)) == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["boundary_residual"] == pytest.approx(math.pi, abs=1e-8)


def test_determinism(tmp_path):
    cfg = tmp_path / "a.yaml"
    cfg.write_text(SIN + "run:\n  order: 3\n  epsilon: [0.05]\n")
    for d in ("r1", "r2"):
        assert main(["perturb", "--config", str(cfg), "--out", str(tmp_path / d)]) == 0
    for name in ("series_eps_0.05.csv", "coeff_m1.csv", "coeff_3.csv", "perturb_report.json"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_error_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(SIN + "  m: 2001\n")
    assert main(["analyze", "--config", str(bad)]) == 2
    assert "ConfigError" in capsys.readouterr().err
    neg = tmp_path / "neg.yaml"
    neg.write_text(SIN + '  A1: [["0"]]\nrun:\n  branch: laurent\n')
    assert main(["perturb", "--config", str(neg), "--out", str(tmp_path / "n")]) == 1
    assert "BifurcationConditionFailed" in capsys.readouterr().err
