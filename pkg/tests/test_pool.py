import threading
import time

import pytest

from cusplab.pool import OrderedPool


def slow_square(x):
    # later items finish first
    time.sleep(0.002 * (10 - x))
    return x * x


def test_results_come_back_in_submission_order():
    pool = OrderedPool(4)
    tasks = pool.map(slow_square, range(10))
    assert [t.index for t in tasks] == list(range(10))
    assert [t.value for t in tasks] == [x * x for x in range(10)]
    # the pool can be reused after a run
    assert pool.map_values(slow_square, [3, 1, 2]) == [9, 1, 4]
    assert pool.threads == []


def test_single_worker_runs_inline():
    seen = []
    pool = OrderedPool(1)
    pool.map(lambda x: seen.append(threading.current_thread()), [1, 2, 3])
    assert seen == [threading.current_thread()] * 3


def test_failures_are_captured_and_reraised():
    def explode(x):
        if x == 2:
            raise ValueError('bad member {}'.format(x))
        return x

    pool = OrderedPool(3)
    tasks = pool.map(explode, [1, 2, 3], labels=['a', 'b', 'c'])
    assert tasks[1].label == 'b'
    assert isinstance(tasks[1].error, ValueError)
    assert 'bad member 2' in tasks[1].trace
    assert tasks[2].value == 3
    with pytest.raises(ValueError, match='bad member 2'):
        pool.map_values(explode, [1, 2, 3])
