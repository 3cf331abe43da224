import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from palmqp.stats import (BenchRecord, performance_profile, profile_to_csv,
                          records_from_csv, records_to_csv, sgm, sgm_by_solver)


def test_sgm_constant():
    assert sgm([1.0, 1.0], 1.0) == pytest.approx(1.0)


def test_sgm_two_point():
    # sqrt(1 * 4) - 1 = 1
    assert sgm([0.0, 3.0], 1.0) == pytest.approx(1.0)


def test_sgm_log_space_oracle():
    times = [0.5, 2.0, 8.0]
    expected = math.exp((math.log(1.5) + math.log(3.0) + math.log(9.0)) / 3.0) - 1.0
    assert sgm(times, 1.0) == pytest.approx(expected, rel=1e-15)


def test_sgm_rejects_bad_input():
    with pytest.raises(ValueError):
        sgm([], 1.0)
    with pytest.raises(ValueError):
        sgm([1.0], 0.0)
    with pytest.raises(ValueError):
        sgm([-1.0], 1.0)


@hyp_settings(deadline=None, max_examples=100)
@given(st.lists(st.floats(0.0, 1e6), min_size=1, max_size=12),
       st.integers(0, 2 ** 32 - 1))
def test_sgm_permutation_invariant_and_monotone(times, seed):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(times))
    shuffled = [times[i] for i in perm]
    assert sgm(shuffled, 1.0) == pytest.approx(sgm(times, 1.0), rel=1e-12, abs=1e-12)
    bumped = list(times)
    bumped[0] += 1.0
    assert sgm(bumped, 1.0) >= sgm(times, 1.0) - 1e-12


def test_sgm_by_solver_failure_convention():
    recs = [BenchRecord("p1", "a", 1.0, "solved"),
            BenchRecord("p2", "a", 2.0, "max_iter")]
    table = sgm_by_solver(recs, shift=1.0, time_limit=100.0)
    assert table["a"] == pytest.approx(sgm([1.0, 100.0], 1.0))
    # infeasibility certificates count as answers, not failures
    recs2 = [BenchRecord("p1", "a", 1.0, "primal_infeasible")]
    assert sgm_by_solver(recs2, time_limit=100.0)["a"] == pytest.approx(1.0)


def test_profile_single_solver():
    recs = [BenchRecord("p1", "a", 1.0, "solved"),
            BenchRecord("p2", "a", 4.0, "solved")]
    prof = performance_profile(recs)
    assert prof["a"][0] == (1.0, 1.0)  # q(1) = 1 when alone and all solved


def test_profile_two_solvers_hand_example():
    recs = [BenchRecord("p1", "a", 1.0, "solved"),
            BenchRecord("p1", "b", 2.0, "solved"),
            BenchRecord("p2", "a", 2.0, "solved"),
            BenchRecord("p2", "b", 1.0, "solved")]
    prof = performance_profile(recs)
    for s in ("a", "b"):
        pts = dict(prof[s])
        assert pts[1.0] == pytest.approx(0.5)
        assert pts[2.0] == pytest.approx(1.0)


def test_profile_failure_plateaus_below_one():
    recs = [BenchRecord("p1", "a", 1.0, "solved"),
            BenchRecord("p1", "b", 2.0, "solved"),
            BenchRecord("p2", "a", 1.0, "solved"),
            BenchRecord("p2", "b", 5.0, "time_limit")]
    prof = performance_profile(recs)
    assert prof["b"][-1][1] == pytest.approx(0.5)  # never reaches 1


def test_profile_unsolved_problem_excluded():
    recs = [BenchRecord("p1", "a", 1.0, "solved"),
            BenchRecord("p2", "a", 1.0, "stalled")]
    with pytest.warns(UserWarning):
        prof = performance_profile(recs)
    assert prof["a"][-1][1] == pytest.approx(1.0)  # p2 dropped from |P|


def test_profile_missing_record_rejected():
    recs = [BenchRecord("p1", "a", 1.0, "solved"),
            BenchRecord("p1", "b", 1.0, "solved"),
            BenchRecord("p2", "a", 1.0, "solved")]
    with pytest.raises(ValueError):
        performance_profile(recs)


def test_csv_roundtrip():
    recs = [BenchRecord("p1", "a", 1.25, "solved", -3.5, 1e-7, 2e-8),
            BenchRecord("p2", "a", 0.5, "time_limit", float("nan"), 1.0, 1.0)]
    text = records_to_csv(recs)
    back = records_from_csv(text)
    assert back[0].runtime == recs[0].runtime
    assert back[0].objective == recs[0].objective
    assert back[1].status == "time_limit"
    assert math.isnan(back[1].objective)


def test_profile_csv_format():
    recs = [BenchRecord("p1", "a", 1.0, "solved")]
    text = profile_to_csv(performance_profile(recs))
    lines = text.strip().splitlines()
    assert lines[0] == "solver,f,q"
    assert lines[1].startswith("a,1.0,")
