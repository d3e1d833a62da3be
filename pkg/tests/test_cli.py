import json

import pytest

from scheno.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_PARSE, main
from scheno.formats import read_decomposition, read_pgm, write_pgm, ImageGrid

from helpers import DATA


@pytest.fixture
def c7_missing(tmp_path):
    f = tmp_path / "c7.el"
    f.write_text("".join(f"{i} {i + 1}\n" for i in range(6)))
    return f


def run_json(capsys, argv):
    assert main(argv + ["--json"]) == 0
    return [json.loads(line) for line in capsys.readouterr().out.splitlines()]


def test_param(capsys):
    assert main(["param", "-n", "5"]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert first.startswith("p: ")
    assert float(first[3:]) == pytest.approx(0.125737, abs=5e-7)


def test_score_empty_noise(capsys, c7_missing):
    (rec,) = run_json(capsys, ["score", str(c7_missing), "--noise", "empty", "--trials", "3"])
    assert rec["gain_over_all_structure"] == 0 and rec["noise_size"] == 0


def test_score_with_noise_file(capsys, c7_missing, tmp_path):
    noise = tmp_path / "n.txt"
    noise.write_text("6 0\n")
    (rec,) = run_json(capsys, ["score", str(c7_missing), "--noise", str(noise), "--trials", "3"])
    assert rec["gain_over_all_structure"] > 1.7


def test_search_writes_outputs(capsys, c7_missing, tmp_path):
    out, dot, cp = tmp_path / "d.txt", tmp_path / "d.dot", tmp_path / "cp.json"
    argv = ["search", str(c7_missing), "--population", "30", "--generations", "20", "--patience", "6", "-q"]
    (rec,) = run_json(capsys, argv + ["--out", str(out), "--dot", str(dot), "--checkpoint", str(cp)])
    assert rec["added"] == "0-6" and rec["deleted"] == ""
    g, noise = read_decomposition(out)
    assert noise.pairs == {(0, 6)}
    assert "teal" in dot.read_text()
    state = json.loads(cp.read_text())
    assert len(state["population"]) == 30
    # resuming a finished run returns the same answer
    (again,) = run_json(capsys, argv + ["--resume", str(cp)])
    assert again["added"] == "0-6"


def test_ktruss_karate(capsys):
    rows = run_json(capsys, ["ktruss", str(DATA / "karate.el"), "--trials", "3"])
    assert [r["k"] for r in rows] == [3, 4, 5]
    assert all(r["decompositions"] == "2^561" for r in rows)


def test_score_ext_and_sweep(capsys, c7_missing, tmp_path):
    schema = tmp_path / "s.el"
    schema.write_text("".join(f"{i} {(i + 1) % 7}\n" for i in range(7)))
    (rec,) = run_json(capsys, ["score-ext", str(c7_missing), str(schema), "--trials", "3"])
    assert rec["gain_over_all_structure"] > 1.7
    csv_out = tmp_path / "s.csv"
    assert main(["sweep", str(c7_missing), str(schema), "--steps", "5", "--trials", "2", "--out", str(csv_out)]) == 0
    assert csv_out.read_text().startswith("k,k_over_E,")


def test_mnist_roundtrip(capsys, tmp_path):
    img = ImageGrid.from_rows([[False, True, False], [True, False, True], [False, False, True]])
    write_pgm(img, tmp_path / "in.pgm")
    assert main(["mnist", "encode", str(tmp_path / "in.pgm"), "--out", str(tmp_path / "g.el")]) == 0
    assert main(["mnist", "decode", "--graph", str(tmp_path / "g.el"), "--width", "3", "--out", str(tmp_path / "o.pgm")]) == 0
    assert read_pgm(tmp_path / "o.pgm") == img


def test_oracle_sumaut(capsys, tmp_path):
    assert main(["oracle", "sumaut", "-n", "4"]) == 0
    assert capsys.readouterr().out.strip() == "90"
    table = tmp_path / "t.tsv"
    assert main(["oracle", "sumaut", "-n", "3", "--directed", "--write-table", str(table)]) == 0
    assert "3\t1\t34" in table.read_text()


def test_label_remapping_is_reported(capsys, tmp_path):
    f = tmp_path / "g.el"
    f.write_text("x y\ny z\n")
    mapping = tmp_path / "g.map"
    run_json(capsys, ["score", str(f), "--mapping", str(mapping), "--trials", "2"])
    assert mapping.read_text().splitlines()[1:] == ["0\tx", "1\ty", "2\tz"]


def test_exit_codes(capsys, tmp_path, c7_missing):
    bad = tmp_path / "bad.el"
    bad.write_text("1 1\n")
    assert main(["score", str(bad)]) == EXIT_PARSE
    assert main(["param", "-n", "1"]) == EXIT_CONFIG
    assert main(["score", str(c7_missing), "--trials", "0"]) == EXIT_CONFIG
    assert main(["aut", str(DATA / "karate.el"), "--budget", "1"]) == EXIT_BUDGET
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2
