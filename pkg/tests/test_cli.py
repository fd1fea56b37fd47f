"""Tests for the ``hsl`` command-line interface."""

import csv
import json
import math
from pathlib import Path

import pytest

from henon_symmetry_lab.cli import _parse_alphas, main
from henon_symmetry_lab.errors import InvalidParameter
from henon_symmetry_lab.grids import RadialFunction, load_function


def run(capsys, *argv: str) -> dict:
    assert main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def fail(capsys, *argv: str) -> tuple:
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"]


# -- classify ----------------------------------------------------------------


class DescribeClassifyCommand:
    def it_prints_the_report_with_provenance(self, capsys):
        document = run(capsys, "classify", "--N", "3", "--p", "5", "--q", "5")
        assert document["result"]["side"] == "On"
        assert document["result"]["hypotheses"]["starshaped_nonexistence"]["holds"] is True
        provenance = document["provenance"]
        assert provenance["command"] == "classify"
        assert len(provenance["config_hash"]) == 64

    def it_hashes_identical_configurations_identically(self, capsys):
        first = run(capsys, "classify", "--N", "4", "--alpha", "1")["provenance"]["config_hash"]
        second = run(capsys, "classify", "--N", "4", "--alpha", "1")["provenance"]["config_hash"]
        third = run(capsys, "classify", "--N", "4", "--alpha", "2")["provenance"]["config_hash"]
        assert first == second != third

    def it_writes_the_region_csv(self, capsys, tmp_path: Path):
        path = tmp_path / "region.csv"
        run(capsys, "classify", "--N", "3", "--region-grid", "5", "--out", str(path))
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("# henon-symmetry-lab")
        rows = list(csv.reader(line for line in lines if not line.startswith("#")))
        assert rows[0] == ["p_plus_1", "q_plus_1", "gap", "m_gap", "side"]
        assert len(rows) == 1 + 25

    def it_rejects_bad_parameters_with_exit_code_2(self, capsys):
        code, error = fail(capsys, "classify", "--N", "1")
        assert code == 2
        assert error["code"] == "dimension_too_small"

    def it_rejects_a_negative_tolerance(self, capsys):
        code, error = fail(capsys, "classify", "--N", "3", "--tol", "-1")
        assert code == 2
        assert error["code"] == "invalid_parameter"

    def it_rejects_sublinear_exponents(self, capsys):
        code, error = fail(capsys, "classify", "--N", "3", "--p", "0.5")
        assert code == 2
        assert error["code"] == "invalid_parameter"


# -- solve-scalar / solve-system ---------------------------------------------


class DescribeSolveScalarCommand:
    def it_solves_the_radial_problem(self, capsys, tmp_path: Path):
        result = run(capsys, "solve-scalar", "--N", "3", "--p", "1", "--grid", "128", "--out", str(tmp_path))["result"]
        assert result["level"] == pytest.approx(math.pi**2, rel=1e-2)
        assert result["converged"] is True
        saved = load_function(tmp_path / "u_radial.txt")
        assert isinstance(saved, RadialFunction)
        assert saved.grid.m == 128

    def it_adds_the_disk_solve(self, capsys):
        argv = ("solve-scalar", "--N", "2", "--p", "3", "--grid", "16", "--grid-theta", "32", "--init", "radial")
        result = run(capsys, *argv)["result"]
        assert result["init_full"] == "radial"
        assert result["ratio"] == pytest.approx(1.0, abs=1e-4)

    def it_refuses_the_disk_outside_the_plane(self, capsys):
        code, error = fail(capsys, "solve-scalar", "--N", "3", "--grid", "16", "--grid-theta", "32")
        assert code == 2
        assert error["code"] == "invalid_parameter"

    def it_rejects_a_zero_tolerance(self, capsys):
        code, error = fail(capsys, "solve-scalar", "--N", "3", "--grid", "16", "--tol", "0")
        assert code == 2
        assert error["code"] == "invalid_parameter"

    def it_reports_supercritical_exponents(self, capsys):
        code, error = fail(capsys, "solve-scalar", "--N", "3", "--p", "5")
        assert code == 2
        assert error["code"] == "supercritical_exponent"


class DescribeSolveSystemAndPohozaev:
    def it_round_trips_a_solution_through_the_pohozaev_check(self, capsys, tmp_path: Path):
        argv = ("solve-system", "--N", "3", "--p", "1", "--q", "1", "--grid", "128", "--tol", "1e-10")
        result = run(capsys, *argv, "--out", str(tmp_path))["result"]
        assert result["level"] == pytest.approx(math.pi**4, rel=3e-2)
        assert result["breaks"] is None

        report = run(
            capsys,
            "pohozaev",
            "--u",
            str(tmp_path / "u.txt"),
            "--v",
            str(tmp_path / "v.txt"),
            "--p",
            "1",
            "--q",
            "1",
            "--multiplier",
            repr(result["multiplier"]),
        )["result"]
        assert report["branch"] == "hardy"
        assert report["relative"] < 0.1
        assert report["el_residual"] < 1e-2

    def it_reports_a_missing_input_file(self, capsys, tmp_path: Path):
        missing = str(tmp_path / "missing.json")
        code, error = fail(capsys, "pohozaev", "--u", missing, "--v", missing)
        assert code == 2
        assert error["code"] == "file_access"
        assert "missing.json" in error["message"]

    def it_reports_a_malformed_input_file(self, capsys, tmp_path: Path):
        path = tmp_path / "u.txt"
        path.write_text("sphere 3 4\n1\n2\n3\n4\n", encoding="utf-8")
        code, error = fail(capsys, "pohozaev", "--u", str(path), "--v", str(path))
        assert code == 2
        assert error["code"] == "malformed_file"

    def it_certifies_on_request(self, capsys):
        result = run(capsys, "solve-system", "--N", "3", "--p", "2", "--q", "2", "--grid", "128", "--certify")["result"]
        assert result["breaks"] is False
        assert result["bump_upper"] > result["level"]

    def it_reports_hypothesis_violations(self, capsys):
        code, error = fail(capsys, "solve-system", "--N", "3", "--p", "5", "--q", "5")
        assert code == 2
        assert error["code"] == "hypothesis_violation"


# -- scan / alpha-star / asymptotics -----------------------------------------


class DescribeScanCommand:
    def it_writes_one_row_per_alpha(self, capsys, tmp_path: Path):
        path = tmp_path / "scan.csv"
        argv = ("scan", "--p", "3", "--alphas", "0,2", "--grid", "16", "--grid-theta", "32", "--tol", "1e-6")
        result = run(capsys, *argv, "--out", str(path))["result"]
        assert [row["alpha"] for row in result["rows"]] == [0.0, 2.0]
        assert result["breaking_alphas"] == []
        rows = list(csv.DictReader(line for line in path.read_text(encoding="utf-8").splitlines() if line[0] != "#"))
        assert list(rows[0]) == ["alpha", "level_rad", "level_full", "ratio", "iters_rad", "iters_full", "init_full"]


class DescribeAlphaStarCommand:
    def it_exits_with_3_when_the_threshold_is_not_bracketed(self, capsys):
        argv = ("alpha-star", "--grid", "16", "--grid-theta", "32", "--alpha-max", "1", "--no-refine", "--tol", "1e-6")
        code, error = fail(capsys, *argv)
        assert code == 3
        assert error["code"] == "not_bracketed"


class DescribeAsymptoticsCommand:
    def it_fits_an_existing_level_file(self, capsys, tmp_path: Path):
        path = tmp_path / "levels.csv"
        rows = "\n".join(f"{a},{2.0 * a**1.5!r}" for a in (100.0, 200.0, 400.0, 800.0))
        path.write_text("alpha,level\n" + rows + "\n", encoding="utf-8")
        result = run(capsys, "asymptotics", "--N", "2", "--p", "3", "--input", str(path))["result"]
        assert result["fit"]["slope"] == pytest.approx(1.5)
        assert result["theory"] == {"radial": 1.5, "upper": 1.0}


class DescribeParseAlphas:
    def it_expands_ranges_inclusively(self):
        assert _parse_alphas("0:25:100") == [0.0, 25.0, 50.0, 75.0, 100.0]

    def it_accepts_lists(self):
        assert _parse_alphas("1, 2.5,4") == [1.0, 2.5, 4.0]

    def it_rejects_malformed_ranges(self):
        with pytest.raises(InvalidParameter):
            _parse_alphas("0:0:10")

    def it_rejects_non_numeric_entries(self):
        with pytest.raises(InvalidParameter, match="numbers"):
            _parse_alphas("1,two")
