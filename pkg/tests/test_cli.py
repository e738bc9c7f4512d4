import csv
import json
from pathlib import Path

import pytest

from rlsigma import cli

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def payload(out):
    return json.loads(out)["payload"]


def validate_schema(doc):
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(doc, SCHEMA)


def write_cfg(tmp_path, **kw):
    cfg = {"dimension": 3, "g_screen": [["1"]], "g_mix": ["0"], "g_m": "2"}
    cfg.update(kw)
    path = tmp_path / "model.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_validate_exit_codes(capsys, tmp_path):
    assert run(capsys, "validate", "builtin:flat")[0] == cli.EXIT_OK
    code, _, err = run(capsys, "validate", write_cfg(tmp_path, g_m="3"))
    assert code == cli.EXIT_INVALID and "g_m" in err
    code, _, err = run(capsys, "validate", write_cfg(tmp_path, g_screen=[["1 + *x2"]]))
    assert code == cli.EXIT_USAGE and "byte offset 4" in err


def test_usage_errors(capsys):
    assert run(capsys, "validate", "builtin:nope")[0] == cli.EXIT_USAGE
    assert run(capsys, "limit-probe", "builtin:flat", "--quantity", "foo:N")[0] == cli.EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == cli.EXIT_USAGE


def test_sigma_report_examples(capsys):
    code, out, _ = run(capsys, "sigma-report", "builtin:hcurved", "--point", "0.8,0")
    assert code == 0
    validate_schema(json.loads(out))
    p = payload(out)
    assert p["flatness"]["ii_flat"] is True and p["flatness"]["h_flat"] is False
    assert p["H_screen"][0][0] == pytest.approx(-0.4)
    p = payload(run(capsys, "sigma-report", "builtin:flat")[1])
    assert all(p["flatness"][k] for k in ("ii_flat", "h_flat", "iii_flat"))
    p = payload(run(capsys, "sigma-report", "builtin:iicurved", "--point", "0,0")[1])
    assert p["II_screen"] == [[-0.5]]


def test_limit_probe_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "limit-probe", "builtin:flat", "--quantity", "ric:NN",
                       "--quantity", "sec:N,V", "--csv-dir", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    validate_schema(doc)
    nn, nv = doc["payload"]["reports"]
    assert abs(nn["probe"]["slope"] + 2) < 0.05
    assert nv["classification"] == "finite" and abs(nv["value"]) < 1e-8
    for path in doc["payload"]["csv"]:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["eps", "value"] and len(rows) == 8


def test_limit_probe_iicurved_cov(capsys):
    # Upsilon(N,V,V,R) = 1/2 at the origin, so this component diverges like 1/(2 eps)
    out = run(capsys, "limit-probe", "builtin:iicurved", "--quantity", "cov:N,V,V,R")[1]
    rep = payload(out)["reports"][0]
    assert rep["classification"] == "divergent" and rep["order"] == -1
    assert rep["details"]["upsilon"] == pytest.approx(0.5)
    assert rep["coefficient"] == pytest.approx(0.25)


def test_two_sided_csv_rows(capsys, tmp_path):
    run(capsys, "limit-probe", "builtin:flat", "--quantity", "cov:N,R,N,R", "--two-sided",
        "--csv-dir", str(tmp_path), "--samples", "5")
    rows = list(csv.reader(open(tmp_path / "cov_N_R_N_R.csv")))
    eps = [float(r[0]) for r in rows[1:]]
    assert len(eps) == 10 and sum(e < 0 for e in eps) == 5


def test_reports_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert cli.main(["verify", "builtin:hcurved", "--suite", "curvature", "--seed", "7",
                         "-q", "-o", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    run(capsys, "limit-probe", "builtin:twisted", "--quantity", "ric:NV", "-o", str(a))
    run(capsys, "limit-probe", "builtin:twisted", "--quantity", "ric:NV", "-o", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_verify_examples(capsys):
    code, out, err = run(capsys, "verify", "builtin:twisted", "--suite", "connections")
    assert code == 0 and "PASS twisted main.torsion_is_drho_R" in err
    doc = json.loads(out)
    validate_schema(doc)
    names = {c["name"] for c in doc["payload"]["models"][0]["checks"]}
    assert "main.torsion_is_drho_R" in names
    code, out, _ = run(capsys, "verify", "builtin:hcurved", "--suite", "curvature", "-q")
    checks = {c["name"]: c for c in payload(out)["models"][0]["checks"]}
    assert code == 0 and checks["gauss.formula"]["passed"]


def test_verify_failure_exit_code(capsys, monkeypatch):
    from rlsigma import verify

    def failing(M, suite, seed):
        return [verify.Check("forced", 1.0, 0.0, False)]

    monkeypatch.setattr(cli, "run_suite", failing)
    assert run(capsys, "verify", "builtin:flat", "-q")[0] == cli.EXIT_VERIFY


def test_thread_env(monkeypatch):
    monkeypatch.setenv("RLSIGMA_THREADS", "3")
    assert cli._threads() == 3
