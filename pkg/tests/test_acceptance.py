import pytest

from singlet import acceptance


# ---- Selftest runner Tests ----
class TestRunSelftest:

    def test_worker_processes_report_in_number_order(self):
        # Act
        parallel = acceptance.run_selftest([10, 8], workers=2)
        in_process = acceptance.run_selftest([10, 8], workers=1)

        # Assert
        assert [r.number for r in parallel] == [8, 10]
        assert [(r.number, r.passed, r.detail) for r in parallel] == [
            (r.number, r.passed, r.detail) for r in in_process
        ]
        assert all(r.passed for r in parallel)

    def test_runtime_criterion_sums_the_others(self):
        results = acceptance.run_selftest([10, acceptance.RUNTIME_CRITERION], workers=1)

        assert [r.number for r in results] == [10, acceptance.RUNTIME_CRITERION]
        assert results[-1].seconds == pytest.approx(results[0].seconds)

    def test_unknown_criterion(self):
        with pytest.raises(ValueError):
            acceptance.run_selftest([99])

    def test_failures_are_reported_not_raised(self, mocker):
        failing = mocker.Mock(side_effect=ArithmeticError("boom"))
        mocker.patch.dict(acceptance.CRITERIA, {10: ("verlinde oracle", failing)})

        results = acceptance.run_selftest([10])

        assert results[0].passed is False
        assert results[0].detail == "ArithmeticError: boom"
