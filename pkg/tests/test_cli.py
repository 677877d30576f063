import json
import subprocess
import sys

import pytest

import dewatselect
from dewatselect.cli import main

FIXTURES = {name: str(dewatselect.fixture_path(name))
            for name in ("paper_tables.csv", "table41_scores.csv",
                         "table41_top3.csv", "table41_qual_cols.json")}

TECHS = ("CW", "Septic", "MSL", "Sand", "RBC", "MBBR", "DHS")


def _judgments_doc(cyclic_criteria=(), equal_criteria=(1, 2, 3, 4)):
    docs = []
    for cid in equal_criteria:
        for i, a in enumerate(TECHS):
            for b in TECHS[i + 1:]:
                docs.append({"criterion_id": cid, "tech_a": a, "tech_b": b,
                             "worse": a, "value": 1, "consensus": True})
    for cid in cyclic_criteria:
        for i, a in enumerate(TECHS):
            for jdx in range(i + 1, len(TECHS)):
                b = TECHS[jdx]
                worse = a if (jdx - i) % 2 == 1 else b
                docs.append({"criterion_id": cid, "tech_a": a, "tech_b": b,
                             "worse": worse, "value": 5, "consensus": True})
    return docs


# --- run ---------------------------------------------------------------------

def test_run_inject_to_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["run", "--dataset", FIXTURES["paper_tables.csv"],
                 "--inject", FIXTURES["table41_qual_cols.json"],
                 "--policy", "inject", "--out", str(out)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "Septic" in stdout and "rejected" in stdout

    doc = json.loads(out.read_text())
    ranked = sorted(doc["rank"], key=doc["rank"].get)
    assert set(ranked[:3]) == {"DHS", "MSL", "MBBR"}
    assert ranked[-1] == "Septic"


def test_run_writes_report_to_stdout_without_out(capsys):
    code = main(["run", "--dataset", FIXTURES["paper_tables.csv"],
                 "--inject", FIXTURES["table41_qual_cols.json"],
                 "--policy", "inject"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "dewatselect-report/1"


def test_run_with_judgments_file(tmp_path, capsys):
    jf = tmp_path / "judgments.json"
    jf.write_text(json.dumps(_judgments_doc()))
    code = main(["run", "--dataset", FIXTURES["paper_tables.csv"],
                 "--judgments", str(jf)])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"]["1"]["CW"] == pytest.approx(1 / 7)
    assert doc["inputs"]["options"]["policy"] == "exclude_renormalize"


def test_run_missing_data_exits_4(capsys):
    code = main(["run", "--dataset", FIXTURES["paper_tables.csv"]])
    assert code == 4
    assert "error:" in capsys.readouterr().err


def test_run_consistency_gate_exits_3(tmp_path, capsys):
    jf = tmp_path / "judgments.json"
    jf.write_text(json.dumps(_judgments_doc(cyclic_criteria=(1,),
                                            equal_criteria=(2, 3, 4))))
    args = ["run", "--dataset", FIXTURES["paper_tables.csv"],
            "--judgments", str(jf)]
    assert main(args) == 3
    assert "inconsistent judgment" in capsys.readouterr().err
    assert main(args + ["--allow-inconsistent"]) == 0


def test_run_file_and_schema_problems_exit_2(tmp_path, capsys):
    assert main(["run", "--dataset", "/no/such/file.csv"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--dataset", FIXTURES["paper_tables.csv"],
                 "--judgments", str(bad)]) == 2
    assert main(["run", "--dataset", FIXTURES["paper_tables.csv"],
                 "--policy", "nope"]) == 2
    assert main(["run", "--dataset", FIXTURES["paper_tables.csv"],
                 "--inject", FIXTURES["table41_qual_cols.json"],
                 "--policy", "inject", "--weights", "a,b,c"]) == 2
    capsys.readouterr()


def test_run_custom_weights(tmp_path, capsys):
    w = ",".join(["0.1"] * 10)
    code = main(["run", "--dataset", FIXTURES["paper_tables.csv"],
                 "--inject", FIXTURES["table41_qual_cols.json"],
                 "--policy", "inject", "--weights", w])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["inputs"]["options"]["weights"] == pytest.approx([0.1] * 10)


# --- anova ---------------------------------------------------------------------

def test_anova_human_output(capsys):
    assert main(["anova", "--matrix", FIXTURES["table41_scores.csv"]]) == 0
    out = capsys.readouterr().out
    assert "7 rows x 10 columns" in out
    assert "H0 (no row effect) rejected" in out

    assert main(["anova", "--matrix", FIXTURES["table41_top3.csv"]]) == 0
    assert "not rejected" in capsys.readouterr().out


def test_anova_json_output(capsys):
    assert main(["anova", "--matrix", FIXTURES["table41_scores.csv"],
                 "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["p_rows"] == pytest.approx(0.00436, abs=5e-4)
    assert doc["decision"]["reject_rows"] is True
    assert doc["row_labels"][0] == "CW"


def test_anova_reads_stdin(monkeypatch, capsys):
    import io

    grid = "g,c1,c2\nr1,1,2\nr2,3,9\n"
    monkeypatch.setattr(sys, "stdin", io.StringIO(grid))
    assert main(["anova", "--matrix", "-"]) == 0
    assert "2 rows x 2 columns" in capsys.readouterr().out


def test_anova_bad_grid_exits_2(tmp_path, capsys):
    bad = tmp_path / "grid.csv"
    bad.write_text("g,c1,c2\nr1,1,two\n")
    assert main(["anova", "--matrix", str(bad)]) == 2
    assert main(["anova", "--matrix", "/no/such/grid.csv"]) == 2
    capsys.readouterr()


def test_anova_custom_alpha_changes_decision(capsys):
    assert main(["anova", "--matrix", FIXTURES["table41_scores.csv"],
                 "--alpha", "0.001", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["decision"]["alpha"] == 0.001
    assert doc["decision"]["reject_rows"] is False


# --- midrange ---------------------------------------------------------------------

def test_midrange_human_output(capsys):
    assert main(["midrange", "--dataset", FIXTURES["paper_tables.csv"],
                 "--criterion", "HRT"]) == 0
    out = capsys.readouterr().out
    assert "HRT mid-ranges (day)" in out
    assert "Septic" in out


def test_midrange_json_marks_missing(capsys):
    assert main(["midrange", "--dataset", FIXTURES["paper_tables.csv"],
                 "--criterion", "COD_t", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["missing"] == ["Septic"]
    assert doc["values"]["CW"] == pytest.approx(141.05)
    assert doc["unit"] == "mg/L"


def test_midrange_rejects_unknown_criterion(capsys):
    with pytest.raises(SystemExit) as err:
        main(["midrange", "--dataset", FIXTURES["paper_tables.csv"],
              "--criterion", "PH"])
    assert err.value.code == 2
    capsys.readouterr()


# --- console script wiring -----------------------------------------------------------

def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "dewatselect.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "run" in proc.stdout and "anova" in proc.stdout
