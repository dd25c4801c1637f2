import threading
import time

import pytest

from quotient_regularization.errors import NumericError
from quotient_regularization.trial_pool import TrialPool


def test_results_keep_submission_order():
    def slow_for_small(x):
        time.sleep(0.01 * (5 - x))
        return x * x

    assert TrialPool(jobs=4).map(slow_for_small, range(5)) == [0, 1, 4, 9, 16]


def test_runs_on_several_threads():
    seen = set()
    barrier = threading.Barrier(2, timeout=5)

    def record(_):
        seen.add(threading.get_ident())
        barrier.wait()

    TrialPool(jobs=2).map(record, range(2))
    assert len(seen) == 2


def test_single_job_runs_inline():
    caller = threading.get_ident()
    assert TrialPool(jobs=1).map(lambda _: threading.get_ident(), range(3)) == [caller] * 3


def test_empty_input():
    assert TrialPool(jobs=3).map(lambda x: x, []) == []


def test_default_jobs_is_positive():
    assert TrialPool().jobs >= 1
    assert TrialPool(jobs=0).jobs >= 1


def test_first_failure_is_raised(caplog):
    def fail_odd(x):
        if x % 2:
            raise NumericError(f"trial {x}")
        return x

    with pytest.raises(NumericError, match="trial 1"):
        TrialPool(jobs=1).map(fail_odd, range(4))
    with pytest.raises(NumericError):
        TrialPool(jobs=3).map(fail_odd, range(6), tag="odd")
    assert "[odd] task" in caplog.text
