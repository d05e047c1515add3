import json
from fractions import Fraction

import pytest

from biham.cli import main
from biham.operators import operator_from_json, operator_to_json


@pytest.fixture()
def toy_system_file(tmp_path, toy_system):
    payload = {
        "coordinates": list(toy_system.coords),
        "K": [[str(x) for x in row] for row in toy_system.K],
        "A2": operator_to_json(toy_system.A2),
        "hamiltonian": "1/2*(u1^2+u2^2)",
    }
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(payload))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    report = json.loads(captured.out) if captured.out.strip() else None
    return code, report, captured.err


def test_transform_fixture(capsys):
    code, report, err = run(capsys, "transform", "--fixture", "wdvv3", "--operator", "A1")
    assert code == 0
    assert report["schema_version"] == 1
    op = operator_from_json(report["operator"])
    assert op.coords == ("u1", "u2", "u3")
    assert op.entry(0, 0).coefficient(1).as_ratfn().constant_value() == Fraction(1, 2)
    assert "transform: ok" in err


def test_transform_identity_file_round_trip(capsys, tmp_path, toy_system):
    op_path = tmp_path / "op.json"
    op_path.write_text(json.dumps(operator_to_json(toy_system.A2)))
    tr_path = tmp_path / "tr.json"
    tr_path.write_text(json.dumps({
        "source": ["u1", "u2"],
        "target": ["u1", "u2"],
        "source_in_target": {"u1": "u1", "u2": "u2"},
    }))
    out_path = tmp_path / "out.json"
    code, _, _ = run(capsys, "transform", "--input", str(op_path),
                     "--transform-file", str(tr_path), "--output", str(out_path))
    assert code == 0
    report = json.loads(out_path.read_text())
    assert operator_from_json(report["operator"]) == toy_system.A2
    # determinism: a second run produces identical bytes
    out2 = tmp_path / "out2.json"
    code, _, _ = run(capsys, "transform", "--input", str(op_path),
                     "--transform-file", str(tr_path), "--output", str(out2))
    assert out_path.read_text() == out2.read_text()


def test_transform_singular_jacobian_exit_code(capsys, tmp_path, toy_system):
    op_path = tmp_path / "op.json"
    op_path.write_text(json.dumps(operator_to_json(toy_system.A2)))
    tr_path = tmp_path / "tr.json"
    tr_path.write_text(json.dumps({
        "source": ["u1", "u2"],
        "target": ["u1", "u2"],
        "source_in_target": {"u1": "u1+u2", "u2": "2*u1+2*u2"},
    }))
    code, _, err = run(capsys, "transform", "--input", str(op_path),
                       "--transform-file", str(tr_path))
    assert code == 2
    assert "input error" in err


def test_derive_toy_system(capsys, toy_system_file):
    code, report, _ = run(capsys, "derive", "--input", toy_system_file, "--json")
    assert code == 0
    assert report["pass"] is True
    stages = {s["stage"]: s["pass"] for s in report["stages"]}
    assert stages["reconstruct"] and stages["certify.lie_derivative"]
    assert report["artifacts"]["R"][0][1] == "0"
    assert report["artifacts"]["Ln"][0] == "1/4*u1_xx"


def test_derive_missing_input(capsys):
    code, _, err = run(capsys, "derive")
    assert code == 2


def test_derive_rejects_non_skew_perturbation(capsys, tmp_path, toy_system):
    """A symmetric perturbation of the second structure fails fast, naming
    the offending entry."""
    from biham.jets import DiffPoly
    from biham.operators import DiffOp, OperatorMatrix

    coords = toy_system.coords
    # u1_x Dx^2 keeps order-3 homogeneity but is not skew-adjoint
    bump = DiffOp(coords, {2: DiffPoly.jet(coords, 0, 1)})
    rows = [[toy_system.A2.entry(0, 0) + bump, toy_system.A2.entry(0, 1)],
            [toy_system.A2.entry(1, 0), toy_system.A2.entry(1, 1)]]
    bad = OperatorMatrix(coords, rows)
    payload = {
        "coordinates": list(coords),
        "K": [[str(x) for x in row] for row in toy_system.K],
        "A2": operator_to_json(bad),
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    code, _, err = run(capsys, "derive", "--input", str(path))
    assert code == 1
    assert "skew" in err and "(0, 0)" in err


def test_check_toy_operator(capsys, tmp_path, toy_system):
    op_path = tmp_path / "op.json"
    op_path.write_text(json.dumps(operator_to_json(toy_system.A2)))
    code, report, _ = run(capsys, "check", "--input", str(op_path), "--triple-order", "1")
    assert code == 0
    assert report["pass"] is True


def test_check_identity_fails_skewness(capsys, tmp_path):
    from biham.operators import OperatorMatrix

    identity = OperatorMatrix.identity(("u1", "u2"), 2)
    op_path = tmp_path / "id.json"
    op_path.write_text(json.dumps(operator_to_json(identity)))
    code, report, _ = run(capsys, "check", "--input", str(op_path), "--triple-order", "0")
    assert code == 1
    stages = {s["stage"]: s["pass"] for s in report["stages"]}
    assert stages["input.skew_adjoint"] is False


def test_curvature_from_metric_file(capsys, tmp_path):
    path = tmp_path / "metric.json"
    path.write_text(json.dumps({
        "coordinates": ["x", "y"],
        "g": [["1/(1+1/4*(x^2+y^2))^2", "0"], ["0", "1/(1+1/4*(x^2+y^2))^2"]],
    }))
    code, report, _ = run(capsys, "curvature", "--input", str(path))
    assert code == 0
    assert report["constant_sectional_curvature"] == "1"
    assert report["bianchi"] and report["riemann_symmetries"]


def test_recursion_toy(capsys, toy_system_file):
    code, report, _ = run(capsys, "recursion", "--input", toy_system_file,
                          "--density", "1/2*(u1^2+u2^2)")
    assert code == 0
    assert report["pass"] is True
    assert report["density"] != "0"


def test_recursion_jet_bound_exhaustion(capsys, toy_system_file):
    code, _, err = run(capsys, "recursion", "--input", toy_system_file,
                       "--density", "1/2*(u1^2+u2^2)", "--jet-bound", "2")
    assert code == 3
    assert "resource bound" in err


def test_conservation_toy(capsys, toy_system_file):
    code, report, _ = run(capsys, "conservation", "--input", toy_system_file)
    assert code == 0
    assert report["pass"] is True
    assert len(report["Ln"]) == 2
