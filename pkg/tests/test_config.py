"""Tests for solver options, run provenance and the error hierarchy."""

import dataclasses
import logging

import pytest

from henon_symmetry_lab import __version__
from henon_symmetry_lab.asymptotics import DominatedLimitReport, SubstitutionResult, SweepPoint
from henon_symmetry_lab.config import RunConfig, SolverOptions, log_level_from_env
from henon_symmetry_lab.errors import (
    FileAccessError,
    GridTooCoarse,
    HenonLabError,
    InvalidParameter,
    MalformedFile,
    NotBracketed,
    NotConverged,
    NumericalError,
)
from henon_symmetry_lab.exponents import HypothesisVerdict, ProblemSpec
from henon_symmetry_lab.scalar import BumpResult, ScanRow
from henon_symmetry_lab.system import PohozaevReport


class DescribeSolverOptions:
    def it_has_documented_defaults(self):
        options = SolverOptions()
        assert options.tol == 1e-6
        assert options.eps_floor == 1e-8
        assert options.delta == 0.02
        assert options.strict is False

    @pytest.mark.parametrize(
        "changes",
        [{"tol": 0.0}, {"max_iter": 0}, {"backtrack": 1.0}, {"armijo": 0.0}, {"eps_floor": -1.0}, {"newton_tol": 0.0}],
    )
    def it_rejects_invalid_values(self, changes: dict):
        with pytest.raises(InvalidParameter):
            SolverOptions(**changes)

    def it_replaces_fields_without_mutating(self):
        options = SolverOptions()
        stricter = options.replace(tol=1e-9, strict=True)
        assert stricter.tol == 1e-9
        assert options.tol == 1e-6
        assert stricter.to_dict()["strict"] is True


class DescribeRunConfig:
    def it_hashes_parameters_independently_of_their_order(self):
        a = RunConfig("scan", {"p": 3.0, "alphas": "0:25:200"})
        b = RunConfig("scan", {"alphas": "0:25:200", "p": 3.0})
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != RunConfig("scan", {"p": 2.0, "alphas": "0:25:200"}).config_hash()

    def it_carries_version_and_seed(self):
        provenance = RunConfig("solve-scalar", {"seed": 7}).provenance()
        assert provenance["version"] == __version__
        assert provenance["seed"] == 7


class DescribeLogLevelFromEnv:
    def it_defaults_to_warning(self, monkeypatch: pytest.MonkeyPatch):
        monkeypatch.delenv("HSL_LOG", raising=False)
        assert log_level_from_env() == logging.WARNING

    def it_reads_the_environment(self, monkeypatch: pytest.MonkeyPatch):
        monkeypatch.setenv("HSL_LOG", "debug")
        assert log_level_from_env() == logging.DEBUG

    def it_falls_back_on_unknown_names(self, monkeypatch: pytest.MonkeyPatch):
        monkeypatch.setenv("HSL_LOG", "chatty")
        assert log_level_from_env() == logging.WARNING


class DescribeErrors:
    def it_maps_families_to_exit_codes(self):
        assert GridTooCoarse("x").exit_code == 2
        assert NotBracketed("x").exit_code == 3

    def it_keeps_builtin_bases(self):
        assert issubclass(InvalidParameter, ValueError)
        assert issubclass(NumericalError, ArithmeticError)
        assert issubclass(NotConverged, HenonLabError)

    def it_renders_as_a_dict(self):
        assert GridTooCoarse("need more cells").to_dict() == {
            "code": "grid_too_coarse",
            "type": "GridTooCoarse",
            "message": "need more cells",
        }

    def it_reports_file_problems_as_invalid_parameters(self):
        assert FileAccessError("x").exit_code == 2
        assert MalformedFile("x").to_dict()["code"] == "malformed_file"


class DescribePublicRecords:
    @pytest.mark.parametrize(
        "record",
        [HypothesisVerdict, ScanRow, BumpResult, PohozaevReport, SubstitutionResult, DominatedLimitReport, SweepPoint],
    )
    def it_documents_each_result_record(self, record: type):
        # dataclasses without a docstring get their signature as __doc__
        assert not record.__doc__.startswith(f"{record.__name__}(")

    def it_keeps_problem_specs_to_the_problem_data(self):
        assert [f.name for f in dataclasses.fields(ProblemSpec)] == ["N", "alpha", "beta", "p", "q"]
