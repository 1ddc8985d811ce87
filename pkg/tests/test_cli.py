import filecmp
import subprocess
import sys

import pytest

from gwofi.apriori import read_rules_tsv
from gwofi.cli import cli_main
from gwofi.synthetic import write_example


@pytest.fixture(scope="module")
def example(tmp_path_factory):
    root = tmp_path_factory.mktemp("example")
    cfg = write_example(root, n=220, seed=1)
    # shrink the search so every CLI run stays quick
    text = cfg.read_text().replace("gwo.max_iter = 15", "gwo.max_iter = 3")
    cfg.write_text(text.replace("gwo.pack_size = 10", "gwo.pack_size = 5"))
    return cfg


def test_no_config_no_dataset(capsys):
    assert cli_main(["rules"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert cli_main(["dance"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_bad_flag_value(capsys, example):
    assert cli_main(["run", "--config", str(example), "--seed", "x"]) == 1


def test_rules_sorted_by_max_confidence(example, tmp_path):
    out = tmp_path / "r"
    code = cli_main(["rules", "--config", str(example), "--min-support", "0.01",
                     "--target", "InhospitalMortality", "--out", str(out)])
    assert code == 0
    rows = read_rules_tsv((out / "rules_InhospitalMortality.tsv").read_text())
    values = [r["max_confidence"] for r in rows]
    assert rows and values == sorted(values, reverse=True)
    assert {r["consequent"][0].split("=")[0] for r in rows} == {"InhospitalMortality"}


def test_rules_single_mode(example, tmp_path):
    out = tmp_path / "s"
    assert cli_main(["rules", "--config", str(example), "--mode", "single", "--out", str(out)]) == 0
    rows = read_rules_tsv((out / "rules_InhospitalMortality.tsv").read_text())
    assert all(len(r["antecedent"]) == 1 for r in rows)


def test_mine_to_stdout(example, capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(example.read_text().replace("output.dir = out", "")
                   .replace("data.csv", str(example.parent / "data.csv"))
                   .replace("schema.tsv", str(example.parent / "schema.tsv"))
                   .replace("binspec.tsv", str(example.parent / "binspec.tsv")))
    assert cli_main(["mine", "--config", str(cfg), "--min-support", "0.5", "--max-len", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "itemset\tsize\tcount\tsupport" and len(lines) > 1


def test_run_twice_identical(example, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli_main(["run", "--config", str(example), "--seed", "7", "--out", str(out)]) == 0
    cmp = filecmp.dircmp(a, b)
    assert not cmp.left_only and not cmp.right_only
    for name in cmp.common_files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_no_augment_and_report(example, tmp_path, capsys):
    out = tmp_path / "n"
    assert cli_main(["run", "--config", str(example), "--no-augment", "--out", str(out)]) == 0
    report = (out / "report.tsv").read_text()
    assert "Apriori" not in report and "Original dataset" in report
    capsys.readouterr()
    assert cli_main(["report", "--out", str(out)]) == 0
    assert "Original dataset + GWO + NB [holdout]" in capsys.readouterr().out


def test_train_command(example, tmp_path):
    out = tmp_path / "t"
    assert cli_main(["train", "--config", str(example), "--out", str(out)]) == 0
    assert (out / "model.txt").read_text().startswith("gwofi-model\t1")


def test_data_error_exit_code(example, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("Nope\n1\n")
    code = cli_main(["run", str(bad), "--schema", str(example.parent / "schema.tsv")])
    assert code == 2
    assert "[load]" in capsys.readouterr().err


def test_unknown_positive_label_is_data_error(example, tmp_path):
    code = cli_main(["run", "--config", str(example), "--target", "AspirinHos",
                     "--positive", "maybe", "--out", str(tmp_path / "x")])
    assert code == 2


def test_bad_override_is_usage_error(example):
    assert cli_main(["run", "--config", str(example), "--min-support", "2"]) == 1


def test_single_class_target_is_numeric_error(tmp_path, capsys):
    (tmp_path / "d.csv").write_text("a,y\n" + "yes,yes\nno,yes\n" * 5)
    (tmp_path / "s.tsv").write_text("a\tbinary\tfeature\ny\tbinary\ttarget\n")
    code = cli_main(["run", str(tmp_path / "d.csv"), "--schema", str(tmp_path / "s.tsv")])
    assert code == 3
    assert "[split]" in capsys.readouterr().err


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "gwofi.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "run" in proc.stdout
