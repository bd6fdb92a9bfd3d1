import logging
import os

import pytest

from cusplab.report import FAIL, INFO, OK, VACUOUS, VIOLATION, ExperimentReport, ReportLogHandler, write_summary
from cusplab.storage import read_csv


def test_pass_requires_a_genuine_ok_row():
    report = ExperimentReport('sample', ['value'])
    assert report.columns == ['member', 'check', 'value', 'status']
    report.add('a', 'bound', VACUOUS, value=1.0)
    report.add('b', 'control', VIOLATION, value=2.0)
    report.add('c', 'sweep', INFO)
    assert not report.passed
    assert report.vacuous
    report.add('d', 'bound', OK, value=0.5)
    assert report.passed
    report.add('e', 'bound', FAIL, value=9.0)
    assert not report.passed
    assert not report.vacuous
    assert [row['member'] for row in report.failures()] == ['e']


def test_error_fails_the_report():
    report = ExperimentReport('sample', [])
    report.add('a', 'bound', OK)
    report.error = 'no members'
    assert not report.passed
    assert ' fail ' in report.summary_line()


def test_unknown_status():
    with pytest.raises(ValueError):
        ExperimentReport('sample', []).add('a', 'bound', 'maybe')


def test_write(tmp_path):
    report = ExperimentReport('sample', ['value'])
    report.add('a', 'bound', OK, value=0.25)
    report.measure('alpha', 0.5)
    report.note('calibrated on 1 member')
    out_dir = str(tmp_path / 'out')
    path = report.write(out_dir, ['log line'])
    assert path == os.path.join(out_dir, 'sample.csv')
    rows = read_csv(path)
    assert rows == [{'member': 'a', 'check': 'bound', 'value': '0.25', 'status': 'ok'}]
    with open(os.path.join(out_dir, 'sample.notes.txt')) as f:
        notes = f.read().splitlines()
    assert notes[0] == 'sample pass rows=1 ok=1 fail=0 alpha=0.5'
    assert 'alpha = 0.5' in notes
    assert notes[-1] == 'log line'

    summary = write_summary(out_dir, [report])
    with open(summary) as f:
        assert f.read() == report.summary_line() + '\n'


def test_log_handler_is_bounded():
    handler = ReportLogHandler('run')
    logger = logging.getLogger('cusplab.test_report')
    logger.setLevel(logging.INFO)
    logger.addHandler(handler)
    try:
        for i in range(ReportLogHandler.LOG_MAX_ELEMENTS + 50):
            logger.info('entry %d', i)
    finally:
        logger.removeHandler(handler)
    assert len(handler.entries) == ReportLogHandler.LOG_MAX_ELEMENTS
    assert handler.entries[0]['message'] == 'entry 50'
    assert handler.lines()[-1].endswith('entry 249')
    assert ' INFO test_report.py:' in handler.lines()[0]
