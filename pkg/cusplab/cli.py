"""
This module defines the command line entry point for the cusplab library
"""

import argparse
import logging
import os
import sys

from cusplab.config import load_file
from cusplab.contact import ContactRecord, CuspParams, ParaboloidParams, build_contact_set
from cusplab.corpus import build_corpus
from cusplab.covering import InkSpotsReport, MaskSet, grow_ink_spots, ink_spots_check, ink_spots_trace
from cusplab.errors import CuspLabError, GfnFormatError, ParameterError
from cusplab.experiments import EXPERIMENTS, ExperimentRunner, corpus_directory
from cusplab.lattice import ball
from cusplab.pucci import EllipticityParams, HypothesisReport, check_subsolution, check_supersolution, \
    check_two_sided
from cusplab.regularize import clamp_above_and_convolve, inf_convolve, semi_concavity_certificate
from cusplab.report import write_summary
from cusplab.storage import read_gfn, read_mask, write_csv, write_gfn, write_mask
from cusplab.utility import log_formatter

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

log = logging.getLogger('cusplab.cli')


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def _out_dir(config):
    out = config.get('output', 'out', 'cusplab-out')
    if not os.path.exists(out):
        os.makedirs(out)
    return out


def cmd_gen(args, config):
    corpus = build_corpus(config, workers=config.get_int('experiments', 'workers', 4))
    corpus.write(corpus_directory(_out_dir(config)))
    print('{} corpus members written'.format(len(corpus)))
    return EXIT_OK


def cmd_check(args, config):
    u = read_gfn(args.file)
    params = EllipticityParams.from_config(config)
    level = args.level if args.level is not None else config.get_float('experiments', 'c0', 1.0)
    region = ball(args.radius, u.lattice.dim)
    tol = config.get_float('experiments', 'tol', 1e-9)
    checker = {'super': check_supersolution, 'sub': check_subsolution, 'both': check_two_sided}[args.side]
    report = checker(u, level, params, region, tol)
    out = _out_dir(config)
    write_csv(os.path.join(out, '{}.check.csv'.format(_stem(args.file))), 'check', HypothesisReport.CSV_COLUMNS,
              [report.csv_row()])
    print(report)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_infconv(args, config):
    u = read_gfn(args.file)
    if args.clamp is not None:
        result = clamp_above_and_convolve(u, args.clamp, args.epsilon)
    else:
        result = inf_convolve(u, args.epsilon)
    h = u.lattice.spacing
    bound = (1.0 + 4.0 * h) / args.epsilon
    concave, worst = semi_concavity_certificate(result.smoothed, bound)
    out = _out_dir(config)
    write_gfn(os.path.join(out, '{}.infconv.gfn'.format(_stem(args.file))), result.smoothed)
    write_gfn(os.path.join(out, '{}.displacement.gfn'.format(_stem(args.file))), result.displacement_function())
    print('epsilon={} max displacement={:.6g} within bound={} semi-concavity worst={:.6g} bound={:.6g}'.format(
        args.epsilon, result.max_displacement, result.within_bound, worst, bound))
    return EXIT_OK if concave and result.within_bound else EXIT_FAILED


def cmd_slide(args, config):
    u = read_gfn(args.file)
    cusp = CuspParams.from_config(config)
    threshold = args.threshold if args.threshold is not None else cusp.M
    profile = ParaboloidParams(args.paraboloid) if args.paraboloid is not None else cusp
    contacts = build_contact_set(u, profile, threshold=threshold, tol=config.get_float('experiments', 'tol', 1e-9))
    out = _out_dir(config)
    write_csv(os.path.join(out, '{}.contacts.csv'.format(_stem(args.file))), 'contacts',
              ContactRecord.CSV_COLUMNS, contacts.csv_rows())
    holds, bound = True, float('nan')
    if profile is cusp:
        # the contact map Jacobian is only tracked for the cusp
        holds, bound = contacts.measure_comparison(config.get_float('experiments', 'measure_slack', 4.0))
    print('vertices={} contacts={} flagged={} |U|={:.6g} |T|={:.6g} bound={:.6g}'.format(
        len(contacts.records), len(contacts.valid_records), contacts.flagged, contacts.u_measure,
        contacts.t_measure, bound))
    failed = contacts.level_violations or contacts.q_violations or contacts.injectivity_violations
    return EXIT_OK if holds and not failed else EXIT_FAILED


def cmd_cover(args, config):
    lattice, bits = read_mask(args.E)
    E = MaskSet(lattice, bits)
    if args.F:
        F_lattice, F_bits = read_mask(args.F)
        if F_lattice != lattice:
            raise ParameterError('E and F live on different lattices')
        F = MaskSet(F_lattice, F_bits)
    else:
        F = grow_ink_spots(E, args.delta)
        write_mask(os.path.join(_out_dir(config), '{}.grown.gfm'.format(_stem(args.E))), lattice, F.bits)
    report = ink_spots_check(E, F, args.delta, config.get_int('experiments', 'ink_samples', 32),
                             config.get_int('corpus', 'seed', 7))
    write_csv(os.path.join(_out_dir(config), '{}.cover.csv'.format(_stem(args.E))), 'cover',
              InkSpotsReport.CSV_COLUMNS, [report.csv_row()])
    print(report)
    if args.trace:
        trace = ink_spots_trace(E, F, args.delta)
        print('maximal balls={} dense={} selected={} uncovered={} chain={} holds={}'.format(
            trace.maximal_balls, trace.dense_maximal, len(trace.selection), trace.uncovered,
            trace.chain, trace.chain_holds))
    return EXIT_OK if report.passed else EXIT_FAILED


def _run(names, args, config):
    out = _out_dir(config)
    runner = ExperimentRunner(config, out_dir=out, plots=args.plots or config.get_bool('output', 'plots'))
    reports = [runner.run(name) for name in names]
    write_summary(out, reports)
    for report in reports:
        print(report.summary_line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_experiment(args, config):
    return _run([args.name], args, config)


def cmd_all(args, config):
    return _run(EXPERIMENTS, args, config)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default='default', help='config file (or "default")')
    common.add_argument('--out', type=str, default=None, help='output directory')
    common.add_argument('--seed', type=int, default=None, help='corpus seed')
    common.add_argument('--grid', type=int, default=None, help='lattice nodes per axis')
    common.add_argument('--workers', type=int, default=None, help='worker threads for per-member work')
    common.add_argument('--plots', action='store_true', help='write raster plots next to the reports')
    common.add_argument('--quiet', action='store_true', help='only log warnings and errors')
    common.add_argument('--verbose', action='store_true', help='Enable debug logging')

    parser = argparse.ArgumentParser(prog='cusplab-cli',
                                     description='Numerical checks of degenerate elliptic estimates.')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    commands.add_parser('gen', parents=[common], help='build and write the certified corpus')

    check = commands.add_parser('check', parents=[common], help='certify a .gfn grid function')
    check.add_argument('file')
    check.add_argument('--level', type=float, default=None, help='right-hand side level (default c0)')
    check.add_argument('--radius', type=float, default=2.0, help='radius of the checked ball')
    check.add_argument('--side', choices=('super', 'sub', 'both'), default='super')

    infconv = commands.add_parser('infconv', parents=[common], help='inf-convolve a .gfn grid function')
    infconv.add_argument('file')
    infconv.add_argument('--epsilon', type=float, required=True)
    infconv.add_argument('--clamp', type=float, default=None, help='clamp at 2M before convolving')

    slide = commands.add_parser('slide', parents=[common], help='dump the contact set of a .gfn function')
    slide.add_argument('file')
    slide.add_argument('--threshold', type=float, default=None, help='level M of the vertex set')
    slide.add_argument('--paraboloid', type=float, default=None, help='slide paraboloids of this opening')

    cover = commands.add_parser('cover', parents=[common], help='ink-spots check on mask files')
    cover.add_argument('E')
    cover.add_argument('F', nargs='?', default=None)
    cover.add_argument('--delta', type=float, default=0.1)
    cover.add_argument('--trace', action='store_true', help='also record the covering argument')

    experiment = commands.add_parser('experiment', parents=[common], help='run one experiment')
    experiment.add_argument('name', choices=EXPERIMENTS)

    commands.add_parser('all', parents=[common], help='run every experiment')
    return parser


def configure(args):
    config = load_file(args.config)
    if args.grid is not None:
        config.set('lattice', 'grid', args.grid)
    if args.seed is not None:
        config.set('corpus', 'seed', args.seed)
    if args.out is not None:
        config.set('output', 'out', args.out)
    if args.workers is not None:
        config.set('experiments', 'workers', args.workers)
    return config


def main(argv=None):
    """ Entry point for command line usage of cusplab"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    # Create console handler
    root_log = logging.getLogger()
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(log_formatter())
    if args.verbose:
        console_handler.setLevel(logging.DEBUG)
    elif args.quiet:
        console_handler.setLevel(logging.WARNING)
    else:
        console_handler.setLevel(logging.INFO)
    root_log.addHandler(console_handler)
    root_log.setLevel(logging.DEBUG if args.verbose else logging.INFO)

    try:
        if args.config not in (None, 'default') and not os.path.exists(args.config):
            log.error('config file {} does not exist'.format(args.config))
            return EXIT_USAGE
        config = configure(args)
        func = globals()['cmd_' + args.command]
        return func(args, config)
    except (IOError, OSError, GfnFormatError) as exc:
        log.error('file error: {}'.format(exc))
        return EXIT_USAGE
    except ParameterError as exc:
        log.error('invalid arguments: {}'.format(exc))
        return EXIT_USAGE
    except CuspLabError as exc:
        log.error('{}: {}'.format(type(exc).__name__, exc))
        return EXIT_FAILED
    finally:
        root_log.removeHandler(console_handler)


if __name__ == '__main__':
    sys.exit(main())
