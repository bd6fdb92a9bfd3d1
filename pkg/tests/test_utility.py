import numpy as np

from cusplab.utility import Periodic, digest_array, humanize_time, humanize_time_str, seeded_rng


def test_humanize_time():
    assert humanize_time(173, 'hours') == [(1, 'week'), (5, 'hours')]
    assert humanize_time(17313, 'seconds') == [(4, 'hours'), (48, 'minutes'), (33, 'seconds')]
    assert humanize_time_str(0, 'seconds') == '0 seconds'
    assert humanize_time_str(61, 'seconds') == '1 minute, 1 second'


def test_periodic():
    p = Periodic(0)
    assert p.check()
    p = Periodic(3600)
    p.set()
    assert not p.check()


def test_seeded_rng_streams_depend_only_on_keys():
    a = seeded_rng(7, 1, 2).normal(size=5)
    b = seeded_rng(7, 1, 2).normal(size=5)
    c = seeded_rng(7, 2, 1).normal(size=5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_digest_array_sees_values_and_header():
    values = np.arange(6.0)
    assert digest_array(values, (2, 3)) == digest_array(values.copy(), (2, 3))
    assert digest_array(values, (2, 3)) != digest_array(values, (3, 2))
    bumped = values.copy()
    bumped[5] = np.nextafter(bumped[5], 10.0)
    assert digest_array(values, (2, 3)) != digest_array(bumped, (2, 3))
