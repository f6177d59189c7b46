# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT

import io
import json
import logging
import math
import os

import pytest

import esfstl
from esfstl import cli
from esfstl.coalescent import exact


@pytest.fixture
def sample_file(tmp_path):
    path = tmp_path / "sample.dat"
    path.write_text("# three haplotypes\n3 1 2\n")
    return str(path)


def run(argv):
    stdout = io.StringIO()
    code = cli.run_cli(argv, stdout=stdout)
    return code, stdout.getvalue()


def run_json(argv):
    code, out = run(argv + ["--format", "json"])
    assert code == 0
    return json.loads(out)


def estimates(report):
    return {e["name"]: e for e in report["estimates"]}


def test_importance_text_report(sample_file):
    code, out = run([sample_file, "3", "3", "1.5", "200", "1"])
    assert code == 0
    assert "mode: is" in out
    assert "likelihood" in out
    assert "Mean mutation times" in out
    assert "Mean coalescence times" not in out


def test_importance_json_report(sample_file):
    report = run_json([sample_file, "3", "3", "1.5", "200", "1", "-a", "-t", "0.5", "-t", "0.1,1.0"])
    metadata = report["metadata"]
    assert metadata["mode"] == "is"
    assert metadata["model"] == "constant"
    assert (metadata["n"], metadata["k"], metadata["s"]) == (6, 3, 3)
    assert metadata["seed"] == 1
    assert "wall time" not in metadata
    values = estimates(report)
    assert values["ESF probability"]["value"] == pytest.approx(math.exp(exact.esf_log_probability((3, 1, 2), 1.5)))
    assert values["likelihood"]["std_error"] >= 0
    tables = report["tables"]
    assert len(tables["mutation_times"]["rows"]) == 3
    assert [row[0] for row in tables["loss_times"]["rows"]] == [1, 2, "TMRCA"]
    assert tables["loss_times"]["rows"][-1][1] == pytest.approx(values["TMRCA"]["value"])
    assert len(tables["coalescence_times"]["rows"]) == 5
    assert [row[0] for row in tables["allele_ages"]["rows"]] == [1, 2, 3]
    assert [row[0] for row in tables["group_ages"]["rows"]] == [1, 2, 3]
    assert [row[0] for row in tables["config_at_time"]["rows"]] == [0.1, 0.5, 1.0]
    assert tables["counts_at_time"]["columns"] == ["t", "1", "2", "3"]
    for t in (0.1, 0.5, 1.0):
        mass = sum(row[2] for row in tables["lines_at_time"]["rows"] if row[0] == t)
        assert mass == pytest.approx(1.0)


def test_same_seed_same_report(sample_file):
    argv = [sample_file, "3", "3", "1.5", "100", "77", "--chunk-size", "25"]
    first = run_json(argv)
    second = run_json(argv + ["--workers", "2"])
    assert second["metadata"]["command"] == argv + ["--format", "json"]
    assert first == second
    other = run_json([sample_file, "3", "3", "1.5", "100", "78", "--chunk-size", "25"])
    assert estimates(other)["likelihood"]["value"] != estimates(first)["likelihood"]["value"]


def test_growth_model(sample_file):
    report = run_json([sample_file, "3", "3", "1.5", "100", "1", "-g", "2.0"])
    assert report["metadata"]["model"] == "growth beta=2"
    assert "ESF probability" not in estimates(report)


def test_rejection_modes(sample_file):
    report = run_json([sample_file, "3", "3", "1.5", "50", "2", "--mode", "reject3"])
    assert report["metadata"]["prior"] == "fixed:1.5"
    grid = report["tables"]["grid"]
    assert grid["columns"] == ["t", "A", "A_se"]
    assert [row[0] for row in grid["rows"]] == list(cli.DEFAULT_GRID)
    assert estimates(report)["theta"]["value"] == pytest.approx(1.5)

    report = run_json([sample_file, "3", "3", "1.5", "50", "2", "--mode", "reject4", "--prior", "uniform:0,5",
                       "-t", "0.3"])
    grid = report["tables"]["grid"]
    assert grid["columns"] == ["t", "A", "A_se", "S", "S_se"]
    assert len(grid["rows"]) == 1
    assert 0 <= grid["rows"][0][3] <= 3
    assert 0 < estimates(report)["theta"]["value"] < 5


def test_exact_mode(sample_file):
    report = run_json([sample_file, "3", "3", "1.5", "1", "0", "--mode", "exact", "-t", "0.5"])
    values = estimates(report)
    assert values["likelihood"]["value"] == pytest.approx(exact.unordered_sample_probability((3, 1, 2), 3, 1.5))
    assert values["P(S_n = s)"]["value"] == pytest.approx(exact.seg_sites_pmf(6, 1.5, 3))
    row = report["tables"]["grid"]["rows"][0]
    assert row[2] == pytest.approx(exact.cond_mean_ancestors(6, 1.5, 0.5, 3))


def test_exact_mode_skips_large_samples():
    report = run_json(["builtin:hammer", "10", "9", "2.5", "1", "0", "--mode", "exact"])
    values = estimates(report)
    assert values["ESF probability"]["value"] == pytest.approx(1.1722e-18, rel=1e-4)
    assert "likelihood" not in values


def test_exact_mode_rejects_growth(sample_file):
    code, _ = run([sample_file, "3", "3", "1.5", "1", "0", "--mode", "exact", "-g", "1"])
    assert code == 2


def test_stats_mode():
    report = run_json(["builtin:tbl1y", "134", "278", "82", "1", "0", "--mode", "stats", "--pi", "6.49"])
    values = estimates(report)
    assert round(values["Watterson theta"]["value"]) == 44
    assert values["Ewens theta"]["value"] == pytest.approx(82.5285, abs=1e-3)
    assert 65.9 <= values["E[alpha_1]"]["value"] <= 66.1
    assert values["singletons observed"]["value"] == 107
    assert values["singletons Poisson mean"]["value"] == pytest.approx(65.84, abs=0.005)
    assert values["singletons+doubletons Poisson mean"]["value"] == pytest.approx(92.27, abs=0.01)
    assert values["singletons+doubletons P(Z >= observed)"]["value"] == pytest.approx(0.0043, rel=0.05)
    assert values["Tajima's D"]["value"] == pytest.approx(-2.6, abs=0.05)


def test_csv_output(sample_file, tmp_path):
    prefix = str(tmp_path / "csv" / "run")
    code, out = run([sample_file, "3", "3", "1.5", "50", "1", "--format", "csv", "--output", prefix])
    assert code == 0
    assert out == ""
    assert os.path.exists(f"{prefix}_estimates.csv")
    assert os.path.exists(f"{prefix}_coalescence_times.csv")
    code, _ = run([sample_file, "3", "3", "1.5", "50", "1", "--format", "csv"])
    assert code == 2


def test_text_output_file(sample_file, tmp_path):
    path = tmp_path / "report.txt"
    code, out = run([sample_file, "3", "3", "1.5", "50", "1", "--output", str(path), "--timing"])
    assert code == 0
    assert out == ""
    assert "wall time:" in path.read_text()


def test_settings_file(sample_file, tmp_path):
    settings_path = tmp_path / "settings.json"
    settings_path.write_text(json.dumps({"chunk_size": 20}))
    report = run_json([sample_file, "3", "3", "1.5", "50", "1", "--config", str(settings_path)])
    assert report["metadata"]["chunk size"] == 20
    settings_path.write_text(json.dumps({"bogus": 1}))
    code, _ = run([sample_file, "3", "3", "1.5", "50", "1", "--config", str(settings_path)])
    assert code == 2


@pytest.mark.parametrize("argv, expected", [
    (["{sample}", "4", "3", "1.5", "10", "1"], 3),
    (["{sample}", "3", "3", "0", "10", "1"], 2),
    (["{sample}", "3", "3", "1.5", "0", "1"], 2),
    (["{sample}", "3", "3", "1.5", "10", "-1"], 2),
    (["{sample}", "3", "-1", "1.5", "10", "1"], 2),
    (["{sample}", "3", "3", "1.5", "10", "1", "--mode", "bogus"], 2),
    (["{sample}", "3", "3", "1.5", "10", "1", "--log-level", "loud"], 2),
    (["{sample}", "3", "3", "1.5", "10", "1", "--prior", "normal:0,1", "--mode", "reject3"], 2),
    (["{sample}", "3", "3", "1.5", "10", "1", "-t", "-0.5"], 2),
    (["{sample}", "3", "3"], 2),
    (["{missing}", "3", "3", "1.5", "10", "1"], 3),
])
def test_exit_codes(argv, expected, sample_file, tmp_path, capsys):
    argv = [a.format(sample=sample_file, missing=str(tmp_path / "missing.dat")) for a in argv]
    code, out = run(argv)
    assert code == expected
    assert out == ""
    assert "error" in capsys.readouterr().err


def test_bad_counts_are_data_errors(tmp_path, capsys):
    path = tmp_path / "bad.dat"
    path.write_text("3 0 2\n")
    code, _ = run([str(path), "3", "3", "1.5", "10", "1"])
    assert code == 3
    assert "haplotype count 0 is not positive" in capsys.readouterr().err


def test_impossible_site_count_is_reported(sample_file):
    report = run_json([sample_file, "3", "1", "1.5", "20", "1"])
    assert estimates(report)["likelihood"]["value"] == 0.0


def test_handler_is_removed(sample_file):
    before = list(esfstl.logger.handlers)
    run([sample_file, "3", "3", "1.5", "20", "1", "--log-level", "info"])
    assert esfstl.logger.handlers == before
    assert logging.getLogger("esfstl").level == logging.INFO


def test_replay_command_drops_workers():
    assert cli._replay_command(["a", "--workers", "4", "b", "--workers=2", "c"]) == ["a", "b", "c"]
