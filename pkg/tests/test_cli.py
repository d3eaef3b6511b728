import json

from tracesos.cli import main
from tracesos.poly import Polynomial


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_coeff_stdout_and_file(tmp_path, capsys):
    code, out, _ = run(capsys, "coeff", "--m", "4", "--r", "2", "--n", "1")
    assert code == 0
    payload = json.loads(out)
    assert payload["terms"] == [["a[1,1]^2*b[1,1]^2", "6"]]
    path = tmp_path / "poly.json"
    code, out, _ = run(capsys, "coeff", "--m", "4", "--r", "2", "--n", "2",
                       "--oracle", "matrix", "--out", str(path))
    assert code == 0
    stored = json.loads(path.read_text())
    p = Polynomial.from_jsonable(stored["terms"])
    assert len(p.terms) > 1


def test_coeff_worker_output_is_byte_identical(tmp_path, capsys):
    blobs = set()
    for w in ("1", "2", "4"):
        path = tmp_path / f"w{w}.json"
        code, _, _ = run(capsys, "coeff", "--m", "4", "--r", "2", "--n", "3",
                         "--workers", w, "--out", str(path))
        assert code == 0
        blobs.add(path.read_bytes())
    assert len(blobs) == 1


def test_coeff_budget(capsys):
    code, _, err = run(capsys, "coeff", "--m", "8", "--r", "4", "--n", "2",
                       "--budget", "100")
    assert code == 2
    assert "budget" in err


def test_bad_arguments(capsys):
    code, _, err = run(capsys, "coeff", "--m", "3", "--r", "2", "--n", "1")
    assert code == 2
    assert "even" in err


def test_cert42_emit_and_audit(tmp_path, capsys):
    path = tmp_path / "matrices.json"
    code, _, _ = run(capsys, "cert42", "--n", "3", "--emit", str(path))
    assert code == 0
    payload = json.loads(path.read_text())
    assert payload["q1"]["rows"][0][0] == "6"
    assert payload["entry_sum"] == str(6 * 3**4)
    code, out, _ = run(capsys, "audit42", "--n", "2")
    assert code == 0 and "clean" in out
    code, out, _ = run(capsys, "audit42", "--n", "2", "--json")
    assert code == 0 and json.loads(out)["ok"]


def test_cert84_emit_then_psd(tmp_path, capsys):
    path = tmp_path / "q3.json"
    code, _, _ = run(capsys, "cert84", "--n", "3", "--emit", str(path))
    assert code == 0
    code, out, _ = run(capsys, "psd", "--in", str(path))
    assert code == 0 and "PSD via charpoly_signs" in out
    cert_path = tmp_path / "cert.json"
    code, out, _ = run(capsys, "psd", "--in", str(path), "--method", "schur",
                       "--split", "2", "--out", str(cert_path))
    assert code == 0
    assert json.loads(cert_path.read_text())["method"] == "schur_complement"


def test_cert84_rejects_general_a(capsys):
    code, _, err = run(capsys, "cert84", "--n", "3", "--general-a")
    assert code == 2
    assert "change of basis" in err


def test_cert84_params_file(tmp_path, capsys):
    from tracesos.cert84 import published_params

    vals = {f"x{k}": str(v) for k, v in published_params().items()}
    path = tmp_path / "params.json"
    path.write_text(json.dumps(vals))
    out_path = tmp_path / "q3.json"
    code, _, _ = run(capsys, "cert84", "--n", "2", "--params", str(path),
                     "--emit", str(out_path))
    assert code == 0
    assert json.loads(out_path.read_text())["entry_sum"] == "1120"


def test_paramsys_emit(tmp_path, capsys):
    path = tmp_path / "system.json"
    code, _, _ = run(capsys, "paramsys", "--n", "4", "--emit", str(path))
    assert code == 0
    payload = json.loads(path.read_text())
    assert len(payload["equations"]) == 11


def test_sdp_export_verify_cycle(tmp_path, capsys):
    prob_path = tmp_path / "prob.dat-s"
    code, _, _ = run(capsys, "sdp-export", "--m", "4", "--r", "2", "--n", "2",
                     "--basis", "certificate", "--out", str(prob_path))
    assert code == 0
    from tracesos.cert42 import build_certificate42

    cert = build_certificate42(2)
    sol_path = tmp_path / "sol.json"
    sol_path.write_text(json.dumps({
        "Q1": [[float(x) for x in row] for row in cert.q1.rows],
        "Q2": [[float(x) for x in row] for row in cert.q2.rows]}))
    code, out, _ = run(capsys, "sdp-verify", "--prob", str(prob_path),
                       "--solution", str(sol_path), "--den-bound", "1")
    assert code == 0 and "accepted" in out
    bad = json.loads(sol_path.read_text())
    bad["Q2"][0][0] += 0.5
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bad))
    code, out, _ = run(capsys, "sdp-verify", "--prob", str(prob_path),
                       "--solution", str(bad_path), "--den-bound", "2")
    assert code == 1 and "rejected" in out


def test_sdp_export_auto_basis(tmp_path, capsys):
    path = tmp_path / "auto.dat-s"
    code, out, _ = run(capsys, "sdp-export", "--m", "4", "--r", "0", "--n", "1",
                       "--basis", "auto", "--out", str(path))
    assert code == 0 and "1 constraints" in out


def test_reproduce_named_objects(capsys):
    for obj in ("Q1-n1", "counterexample-ABAB", "Q3-n5-charpoly"):
        code, out, _ = run(capsys, "reproduce", obj)
        assert code == 0 and out.startswith("OK"), obj
    code, out, _ = run(capsys, "reproduce", "Q1-n3", "--json")
    assert code == 0 and json.loads(out)[0]["ok"]


def test_reproduce_unknown_object(capsys):
    code, _, err = run(capsys, "reproduce", "Q9-n9")
    assert code == 2
    assert "unknown object" in err


def test_reproduce_all(capsys):
    code, out, _ = run(capsys, "reproduce", "all")
    assert code == 0
    assert out.count("OK  ") == 14
