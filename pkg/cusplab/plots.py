"""Raster plots of survival curves and dyadic oscillation decay"""
import logging
import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

log = logging.getLogger('cusplab.plots')

DPI = 120


def survival_plot(path, curves):
    """log-log |{u > t} n B_1| against t, one line per member; zero measures are dropped"""
    fig, ax = plt.subplots(1, 1, figsize=(6.4, 4.8), dpi=DPI)
    for name, curve in curves.items():
        points = [(t, m) for _, t, m in curve if m > 0.0]
        if points:
            ax.loglog([t for t, _ in points], [m for _, m in points], marker='o', label=name)
    ax.set_xlabel('t')
    ax.set_ylabel('|{u > t} n B_1|')
    ax.set_title('survival')
    if curves:
        ax.legend(fontsize='x-small', ncol=2)
    fig.savefig(path, bbox_inches='tight')
    plt.close(fig)
    return path


def oscillation_plot(path, series):
    """osc over B_(2^-k) against k on a log axis"""
    fig, ax = plt.subplots(1, 1, figsize=(6.4, 4.8), dpi=DPI)
    for name, points in series.items():
        points = [(k, osc) for k, osc in points if osc > 0.0]
        if points:
            ax.semilogy([k for k, _ in points], [osc for _, osc in points], marker='.', label=name)
    ax.set_xlabel('k')
    ax.set_ylabel('oscillation on B_(2^-k)')
    ax.set_title('dyadic oscillation')
    if series:
        ax.legend(fontsize='x-small', ncol=2)
    fig.savefig(path, bbox_inches='tight')
    plt.close(fig)
    return path


def write_report_plots(report, out_dir):
    """Plots for the reports that carry series; returns the written paths"""
    if not report.series:
        return []
    if not os.path.exists(out_dir):
        os.makedirs(out_dir)
    path = os.path.join(out_dir, '{}.png'.format(report.name))
    if report.name == 'lepsilon':
        survival_plot(path, report.series)
    elif report.name == 'holder':
        oscillation_plot(path, report.series)
    else:
        return []
    log.info('plot written to {}'.format(path))
    return [path]
