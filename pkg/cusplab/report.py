"""
Experiment reports and the bounded log capture written next to them
"""
import collections
import datetime
import logging
import os

from cusplab.storage import format_cell, write_csv
from cusplab.utility import ISO_STRFTIME_FORMAT

OK = 'ok'
FAIL = 'fail'
INFO = 'info'
VACUOUS = 'vacuous'
VIOLATION = 'violation'

STATUSES = (OK, FAIL, INFO, VACUOUS, VIOLATION)


class ReportLogHandler(logging.Handler):
    """
    Logging handler that keeps the last LOG_MAX_ELEMENTS records of a run in
    a bounded deque so they can be written into the run's notes
    """
    LOG_MAX_ELEMENTS = 200

    def __init__(self, name):
        logging.Handler.__init__(self)
        self.name = name
        self.entries = collections.deque(maxlen=ReportLogHandler.LOG_MAX_ELEMENTS)

    def emit(self, record):
        self.entries.append({
            'time': datetime.datetime.now(datetime.timezone.utc).strftime(ISO_STRFTIME_FORMAT),
            'run': self.name,
            'message': record.getMessage(),
            'filename': record.filename,
            'line': record.lineno,
            'level': record.levelname})

    def lines(self):
        return ['{time} {level} {filename}:{line} {message}'.format(**entry) for entry in self.entries]


class ExperimentReport(object):
    """
    Rows carry a 'status' column. The report passes when no row failed and at
    least one row is a genuine ok; 'vacuous', 'info' and 'violation' rows
    (negative controls) never decide the outcome.
    """

    def __init__(self, name, columns):
        self.name = name
        self.columns = ['member', 'check'] + [c for c in columns if c not in ('member', 'check', 'status')] + \
            ['status']
        self.rows = []
        self.constants = collections.OrderedDict()
        self.notes = []
        self.series = collections.OrderedDict()
        self.error = None

    def add(self, member, check, status, **values):
        if status not in STATUSES:
            raise ValueError('unknown row status {}'.format(status))
        row = {'member': member, 'check': check, 'status': status}
        row.update(values)
        self.rows.append(row)
        return row

    def measure(self, key, value):
        self.constants[key] = value

    def note(self, text):
        self.notes.append(text)

    def count(self, status):
        return sum(1 for row in self.rows if row['status'] == status)

    @property
    def passed(self):
        return self.error is None and self.count(FAIL) == 0 and self.count(OK) > 0

    @property
    def vacuous(self):
        return self.error is None and self.count(FAIL) == 0 and self.count(OK) == 0

    def failures(self):
        return [row for row in self.rows if row['status'] == FAIL]

    def summary_line(self):
        outcome = 'pass' if self.passed else ('vacuous' if self.vacuous else 'fail')
        constants = ' '.join('{}={}'.format(k, format_cell(v)) for k, v in self.constants.items())
        return '{} {} rows={} ok={} fail={} {}'.format(
            self.name, outcome, len(self.rows), self.count(OK), self.count(FAIL), constants).rstrip()

    def write(self, out_dir, log_lines=None):
        """Write <name>.csv and <name>.notes.txt; returns the CSV path"""
        if not os.path.exists(out_dir):
            os.makedirs(out_dir)
        path = os.path.join(out_dir, '{}.csv'.format(self.name))
        write_csv(path, self.name, self.columns, self.rows)
        with open(os.path.join(out_dir, '{}.notes.txt'.format(self.name)), 'w', encoding='utf-8') as f:
            f.write(self.summary_line() + '\n')
            for key, value in self.constants.items():
                f.write('{} = {}\n'.format(key, format_cell(value)))
            for text in self.notes:
                f.write(text + '\n')
            if self.error:
                f.write(self.error + '\n')
            for line in log_lines or []:
                f.write(line + '\n')
        return path

    def __repr__(self):
        return 'ExperimentReport({})'.format(self.summary_line())


def write_summary(out_dir, reports):
    """summary.txt: one line per report"""
    if not os.path.exists(out_dir):
        os.makedirs(out_dir)
    path = os.path.join(out_dir, 'summary.txt')
    with open(path, 'w', encoding='utf-8') as f:
        for report in reports:
            f.write(report.summary_line() + '\n')
    return path
