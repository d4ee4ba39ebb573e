import csv
import io
import subprocess
import sys

import pytest

from stablequad.cli import ExperimentConfig, main, read_config_header
from stablequad.errors import InvalidArgument


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _body(text):
    return list(csv.reader(io.StringIO("".join(l for l in text.splitlines(True) if not l.startswith("#")))))


def _meta(text):
    items = {}
    for line in text.splitlines()[1:]:
        if line.startswith("# "):
            for tok in line[2:].split():
                k, _, v = tok.partition("=")
                items[k] = v
    return items


def test_weights_constant(capsys):
    code, out, _ = _run(["weights", "--weight", "one", "--d", "0", "--N", "4"], capsys)
    assert code == 0
    assert out.startswith("# config: {")
    rows = _body(out)
    assert rows[0] == ["node", "weight"]
    assert [float(r[1]) for r in rows[1:]] == pytest.approx([0.5] * 4, rel=1e-14)


def test_weights_nnls_sign_consistent(capsys):
    code, out, _ = _run(["weights", "--weight", "cos20pix", "--N", "200", "--method", "nnls"], capsys)
    assert code == 0
    meta = _meta(out)
    assert float(meta["S_omega"]) == 0.0
    assert meta["method"] == "nnls"


def test_weights_too_few_nodes(capsys):
    code, _, err = _run(["weights", "--d", "10", "--N", "10"], capsys)
    assert code == 2
    assert "N" in err


def test_bad_interval_for_weight(capsys):
    code, _, _ = _run(["weights", "--weight", "x_sqrt_one_minus_x3", "--interval", "0,2", "--N", "20"], capsys)
    assert code == 2


def test_sweep_stability_columns(capsys):
    code, out, _ = _run(
        ["sweep", "--measure", "stability", "--weight", "cos20pix", "--d", "5", "--N-range", "20:40:10"], capsys
    )
    assert code == 0
    rows = _body(out)
    assert rows[0] == ["d", "N", "method", "kappa", "K_omega", "kappa_minus_K", "error"]
    assert len(rows) == 1 + 3 * 2
    for r in rows[1:]:
        assert float(r[3]) - float(r[4]) == pytest.approx(float(r[5]), abs=1e-12)


def test_sweep_records_point_errors(capsys):
    code, out, _ = _run(["sweep", "--measure", "exactness", "--d", "10", "--N-range", "5:12"], capsys)
    assert code == 0
    rows = _body(out)[1:]
    bad = [r for r in rows if int(r[1]) <= 10]
    good = [r for r in rows if int(r[1]) > 10]
    assert bad and all(r[-1] and r[3] == "" for r in bad)
    assert good and all(r[-1] == "" for r in good)


@pytest.mark.parametrize("weight", ["x_sqrt_one_minus_x3", "cos20pix"])
def test_ls_sign_sweep_nonzero(capsys, weight):
    code, out, _ = _run(
        ["sweep", "--measure", "sign", "--weight", weight, "--method", "ls,nnls", "--N-range", "100:300:100"],
        capsys,
    )
    assert code == 0
    rows = _body(out)[1:]
    ls = [float(r[3]) for r in rows if r[2] == "ls"]
    nnls = [float(r[3]) for r in rows if r[2] == "nnls"]
    assert max(ls) > 0
    assert all(v == 0.0 for v in nnls)


def test_accuracy_sweep_over_degrees(capsys):
    code, out, _ = _run(["sweep", "--measure", "accuracy", "--d-range", "2:4"], capsys)
    assert code == 0
    rows = _body(out)
    assert rows[0][3:] == ["error_absx3", "error_expx", "error"]
    assert {r[2] for r in rows[1:]} == {"ls", "nnls", "trap"}
    assert [int(r[1]) for r in rows[1:] if r[2] == "ls"] == [5, 13, 25]


def test_ratio_needs_two_degrees(capsys):
    code, _, err = _run(["ratio", "--weight", "one", "--d-range", "1:1"], capsys)
    assert code == 2
    assert "fit" in err


def test_ratio_output(capsys):
    code, out, _ = _run(["ratio", "--weight", "one", "--d-range", "0:6"], capsys)
    assert code == 0
    assert _body(out)[0] == ["d", "minimal_N", "error"]
    assert out.rstrip().splitlines()[-1].startswith("# fit=N=C*d^s")


def test_ratio_rejects_large_degree(capsys):
    code, _, _ = _run(["ratio", "--weight", "one", "--d-range", "0:41"], capsys)
    assert code == 2


def test_replay_byte_identical(tmp_path, capsys):
    first = tmp_path / "a.csv"
    argv = ["sweep", "--measure", "stability", "--weight", "x_sqrt_one_minus_x3", "--nodes", "sc",
            "--seed", "7", "--d", "6", "--N-range", "30:60:15", "--method", "ls,nnls"]
    assert main(argv + ["--out", str(first)]) == 0
    second = tmp_path / "b.csv"
    assert main(["replay", str(first), "--out", str(second), "--jobs", "3"]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_jobs_do_not_change_output(capsys):
    argv = ["sweep", "--measure", "exactness", "--weight", "cos20pix", "--N-range", "20:60:20", "--method", "ls,nnls"]
    _, serial, _ = _run(argv, capsys)
    _, parallel, _ = _run(argv + ["--jobs", "2"], capsys)
    assert serial == parallel


def test_weight_from_file(tmp_path, capsys):
    src = tmp_path / "w.txt"
    src.write_text("1 - x^2\n")
    code, out, _ = _run(["weights", "--weight", str(src), "--d", "3", "--N", "12"], capsys)
    assert code == 0
    ref_code, ref, _ = _run(["weights", "--weight", "one_minus_x2", "--d", "3", "--N", "12"], capsys)
    assert _body(out) == _body(ref)


def test_expression_weight(capsys):
    code, out, _ = _run(["weights", "--weight", "expr:exp(x)", "--d", "2", "--N", "6"], capsys)
    assert code == 0
    assert sum(float(r[1]) for r in _body(out)[1:]) == pytest.approx(2.3504023872876028, rel=1e-12)


def test_replay_bad_header(tmp_path, capsys):
    bad = tmp_path / "x.csv"
    bad.write_text("d,N\n1,2\n")
    code, _, _ = _run(["replay", str(bad)], capsys)
    assert code == 2
    with pytest.raises(InvalidArgument):
        read_config_header(str(bad))


def test_config_roundtrip():
    cfg = ExperimentConfig(command="sweep", measure="sign", N_range=(10, 20, 5), method=("ls", "nnls"))
    cfg.validate()
    again = ExperimentConfig.from_json(cfg.to_json())
    assert again == cfg


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "stablequad", "weights", "--weight", "one", "--d", "0", "--N", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    node, weight = proc.stdout.splitlines()[-1].split(",")
    assert float(node) == 1.0
    assert float(weight) == pytest.approx(1.0, rel=1e-14)
