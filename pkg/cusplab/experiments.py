"""
Experiment runners: measure estimate, doubling, L-epsilon decay, Holder
oscillation decay and Harnack ratios over the certified corpus
"""
import logging
import math
import os
import time
import traceback

import numpy as np

from cusplab import plots
from cusplab.contact import CuspParams, ParaboloidParams, build_contact_set
from cusplab.corpus import AFFINE, NEGATIVE_SUB, NEGATIVE_SUPER, NONNEG, PERTURBED, SMALL_INF, SUPER, TWO_SIDED, \
    build_corpus
from cusplab.covering import MaskSet, ink_spots_check
from cusplab.errors import ExperimentError, ParameterError
from cusplab.estimates import ball_fraction, decay_factor, dyadic_oscillation, fit_decay_slope, harnack_ratio, \
    harnack_slide_diagnostic, holder_exponent, holder_scale, holder_seminorm, lebesgue_power_integral, \
    lepsilon_constants, mu_beta_feasibility, resolution_depth, survival_curve
from cusplab.generate import BarrierParams, scaled_barrier
from cusplab.lattice import Annulus, ball
from cusplab.pool import OrderedPool
from cusplab.pucci import EllipticityParams, scale_transform
from cusplab.report import FAIL, INFO, OK, VACUOUS, VIOLATION, ExperimentReport, ReportLogHandler
from cusplab.utility import humanize_time_str

log = logging.getLogger('cusplab.experiments')

EXPERIMENTS = ('measure', 'doubling', 'lepsilon', 'holder', 'harnack')
NEGATIVE_CONTROLS = (NEGATIVE_SUB, NEGATIVE_SUPER)
SCALED_RADII = (1.0, 0.5, 0.25)
LEPSILON_RADII = (0.5, 0.25)
LEPSILON_ALPHA = 0.5
AFFINE_EXPONENT_TOLERANCE = 0.02


class ExperimentConfig(object):
    """Typed view of the [experiments] section plus the operator and cusp parameters"""

    def __init__(self, config):
        self.config = config
        self.params = EllipticityParams.from_config(config)
        self.cusp = CuspParams.from_config(config)
        self.seed = config.get_int('corpus', 'seed', 7)
        self.c0 = config.get_float('experiments', 'c0', 1.0)
        self.tol = config.get_float('experiments', 'tol', 1e-9)
        self.delta_default = config.get_float('experiments', 'delta_default', 0.1)
        self.survival_levels = config.get_int('experiments', 'survival_levels', 4)
        self.lepsilon_slope = config.get_float('experiments', 'lepsilon_slope', 0.05)
        self.holder_epsilon1 = config.get_float('experiments', 'holder_epsilon1', 0.5)
        self.holder_epsilon0 = config.get_float('experiments', 'holder_epsilon0', 1.0)
        self.holder_factor = config.get_float('experiments', 'holder_factor', 0.97)
        self.holder_ratio = config.get_float('experiments', 'holder_ratio', 1.5)
        self.gamma_sweep = config.get_floats('experiments', 'gamma_sweep')
        self.harnack_ratio = config.get_float('experiments', 'harnack_ratio', 10.0)
        self.harnack_epsilon = config.get_float('experiments', 'harnack_epsilon', 0.5)
        self.harnack_epsilon0 = config.get_float('experiments', 'harnack_epsilon0', 1.0)
        self.gradient_match_bound = config.get_float('experiments', 'gradient_match_bound', 200.0)
        self.measure_slack = config.get_float('experiments', 'measure_slack', 4.0)
        self.ink_samples = config.get_int('experiments', 'ink_samples', 32)
        self.paraboloid_opening = config.get_float('experiments', 'paraboloid_opening', 8.0)
        self.contact_delta_default = config.get_float('experiments', 'contact_delta_default', 0.05)
        self.workers = config.get_int('experiments', 'workers', 4)


def calibrated_delta(members, M, default):
    """
    Half the smallest gap 1 - |{u > M} n B_1|/|B_1| among members whose
    minimum over B_1/4 is at most 1, capped by the default
    """
    gaps = [1.0 - ball_fraction(m.function, M, 1.0) for m in members
            if m.function.min_over(ball(0.25, m.function.lattice.dim)) <= 1.0]
    if not gaps or min(gaps) <= 0.0:
        return default
    return min(default, 0.5 * min(gaps))


class ContactMeasures(object):
    """|U| with the cusp and paraboloid contact-set measures of one member"""

    def __init__(self, name, gamma, u_measure, cusp_measure, paraboloid_measure):
        self.name = name
        self.gamma = gamma
        self.u_measure = u_measure
        self.cusp_measure = cusp_measure
        self.paraboloid_measure = paraboloid_measure

    @property
    def smallest(self):
        return min(self.cusp_measure, self.paraboloid_measure)


def calibrated_contact_delta(samples, unit_measure, default):
    """
    Half the smallest contact-measure fraction min(|T_cusp|, |T_paraboloid|)/|B_1|
    over members with a nonempty U, capped by the default. The gamma = 0
    members calibrate when there are any; a zero fraction leaves the default.
    """
    samples = [s for s in samples if s.u_measure > 0.0]
    calibration = [s for s in samples if s.gamma == 0.0] or samples
    if not calibration:
        return default
    smallest = min(s.smallest for s in calibration) / unit_measure
    if smallest <= 0.0:
        return default
    return min(default, 0.5 * smallest)


class ExperimentRunner(object):
    """
    Dispatches `exp_<name>` methods. Every run gets its own bounded log capture;
    an exception inside a run marks that report failed and never stops the
    remaining runs.
    """

    def __init__(self, config, corpus=None, out_dir=None, plots=False):
        self.config = config
        self.settings = ExperimentConfig(config)
        self._corpus = corpus
        self.out_dir = out_dir
        self.plots = plots

    @property
    def corpus(self):
        if self._corpus is None:
            self._corpus = build_corpus(self.config, workers=self.settings.workers)
        return self._corpus

    def checked_corpus(self):
        corpus = self.corpus
        corpus.verify()
        return corpus

    @property
    def doubling_constant(self):
        value = self.corpus.constants.get('doubling_M')
        if value is None:
            value = self.scaled_barrier().meta['M']
            self.corpus.constants['doubling_M'] = value
        return value

    def scaled_barrier(self):
        bp = BarrierParams.from_config(self.config, self.settings.params)
        return scaled_barrier(bp, self.corpus.lattice, self.settings.params.gamma)

    def for_members(self, func, members):
        """Per-member work on the ordered pool; results come back in corpus order"""
        pool = OrderedPool(self.settings.workers)
        return pool.map_values(func, members, [m.name for m in members])

    def run(self, name):
        func_name = 'exp_' + name
        func = getattr(self, func_name, None)
        if func is None:
            raise ParameterError("Unknown experiment '{}'".format(name))

        capture = ReportLogHandler(name)
        package_log = logging.getLogger('cusplab')
        package_log.addHandler(capture)
        started = time.time()
        try:
            report = func()
        except Exception as exc:
            status_msg = "An exception occurred while running experiment '{}' - {} - {}".format(
                name, str(exc), traceback.format_exc())
            log.error(status_msg)
            report = ExperimentReport(name, [])
            report.error = '{}: {}'.format(type(exc).__name__, exc)
        finally:
            package_log.removeHandler(capture)

        log.info('{} finished in {}'.format(name, humanize_time_str(int(round(time.time() - started)), 'seconds')))
        log.info(report.summary_line())
        if self.out_dir:
            report.write(self.out_dir, capture.lines())
            if self.plots:
                plots.write_report_plots(report, self.out_dir)
        return report

    def run_all(self):
        return [self.run(name) for name in EXPERIMENTS]

    def _delta(self, corpus):
        members = corpus.select(SUPER, exclude=NEGATIVE_CONTROLS)
        return calibrated_delta(members, self.settings.cusp.M, self.settings.delta_default)

    #
    # Measure estimate
    #
    def exp_measure(self):
        s = self.settings
        corpus = self.checked_corpus()
        M = s.cusp.M
        combined = M * self.doubling_constant
        members = corpus.select(SUPER, exclude=NEGATIVE_CONTROLS)
        if not members:
            raise ExperimentError('no certified non-negative super-solution in the corpus')
        delta = self._delta(corpus)

        report = ExperimentReport('measure', [
            'fraction', 'minimum', 'delta', 'hypotheses', 'conclusion', 'r', 'kappa', 'agree',
            'vertices', 'contacts', 'flagged', 'jacobian', 'gradientMatch', 'injectivity', 'hessianGap',
            'measureU', 'measureT', 'measureTParaboloid', 'deltaPrime', 'bound'])
        report.measure('M', M)
        report.measure('combined_M', combined)
        report.measure('delta_cal', delta)

        def per_member(member):
            return self._measure_member(member, M, combined, delta)

        contrapositive = 0
        samples = []
        for rows, sample in self.for_members(per_member, members):
            for member, check, status, values in rows:
                report.add(member, check, status, **values)
                if check == 'lemma' and not values['conclusion']:
                    contrapositive += 1
            if sample is not None:
                samples.append(sample)
        report.measure('contrapositive_members', contrapositive)

        unit_measure = ball(1.0, corpus.lattice.dim).lebesgue_measure()
        delta_prime = calibrated_contact_delta(samples, unit_measure, s.contact_delta_default)
        report.measure('delta_prime_cal', delta_prime)
        for sample in samples:
            name, check, status, values = self._crosscheck_row(sample, delta_prime, unit_measure)
            report.add(name, check, status, **values)
        return report

    def _crosscheck_row(self, sample, delta_prime, unit_measure):
        """Both the cusp and the paraboloid contact sets must hold delta' |B_1|"""
        values = {'measureU': sample.u_measure, 'measureT': sample.cusp_measure,
                  'measureTParaboloid': sample.paraboloid_measure, 'deltaPrime': delta_prime,
                  'bound': delta_prime * unit_measure}
        if sample.u_measure == 0.0:
            return sample.name, 'crosscheck', VACUOUS, values
        holds = sample.smallest >= delta_prime * unit_measure
        if not holds:
            log.warning('{}: contact sets below delta\' |B_1| (cusp {:.4g}, paraboloid {:.4g}, bound {:.4g})'.format(
                sample.name, sample.cusp_measure, sample.paraboloid_measure, delta_prime * unit_measure))
        return sample.name, 'crosscheck', OK if holds else FAIL, values

    def _measure_member(self, member, M, combined, delta):
        s = self.settings
        u = member.function
        d = u.lattice.dim
        rows = []
        sample = None

        fraction = ball_fraction(u, M, 1.0)
        minimum = u.min_over(ball(0.25, d))
        hypotheses = fraction > 1.0 - delta
        conclusion = minimum > 1.0
        if hypotheses:
            status = OK if conclusion else FAIL
        else:
            status = INFO
        rows.append((member.name, 'lemma', status, {'fraction': fraction, 'minimum': minimum, 'delta': delta,
                                                   'hypotheses': hypotheses, 'conclusion': conclusion}))

        if minimum <= 1.0 and u.min_over(ball(1.0, d)) >= 0.0:
            contacts = build_contact_set(u, s.cusp, threshold=M, tol=s.tol)
            rows.append(self._contact_row(member, contacts, M))
            para = build_contact_set(u, ParaboloidParams(s.paraboloid_opening), threshold=M, tol=s.tol)
            sample = ContactMeasures(member.name, member.params.gamma, contacts.u_measure, contacts.t_measure,
                                     para.t_measure)

        fraction_c = ball_fraction(u, combined, 1.0)
        minimum_c = u.min_over(ball(1.0, d))
        hyp_c = fraction_c > 1.0 - delta
        concl_c = minimum_c > 1.0
        rows.append((member.name, 'corollary', (OK if concl_c else FAIL) if hyp_c else VACUOUS,
                     {'fraction': fraction_c, 'minimum': minimum_c, 'delta': delta, 'hypotheses': hyp_c,
                      'conclusion': concl_c}))

        for r in SCALED_RADII:
            for power in range(3):
                kappa = combined ** power
                rows.append(self._scaled_row(member, r, kappa, combined, delta))
        return rows, sample

    def _contact_row(self, member, contacts, M):
        s = self.settings
        values = {'vertices': len(contacts.records), 'contacts': len(contacts.valid_records),
                  'flagged': contacts.flagged, 'measureU': contacts.u_measure, 'measureT': contacts.t_measure}
        if not contacts.records:
            return member.name, 'contact', VACUOUS, values
        measure_ok, bound = contacts.measure_comparison(s.measure_slack)
        values.update({'jacobian': contacts.jacobian_bound_observed,
                       'gradientMatch': contacts.gradient_match_constant,
                       'injectivity': contacts.injectivity_error, 'hessianGap': contacts.min_hessian_gap,
                       'bound': bound})
        holds = (contacts.level_violations == 0 and contacts.q_violations == 0 and
                 contacts.injectivity_violations == 0 and
                 contacts.gradient_match_constant <= s.gradient_match_bound and
                 contacts.min_hessian_gap >= -s.tol * max(1.0, M) and measure_ok)
        if not holds:
            log.warning('{}: contact invariants failed (level={}, q={}, injectivity={}, measure={})'.format(
                member.name, contacts.level_violations, contacts.q_violations, contacts.injectivity_violations,
                measure_ok))
        return member.name, 'contact', OK if holds else FAIL, values

    def _scaled_row(self, member, r, kappa, combined, delta):
        """The scaled corollary checked directly on B_r/2 and on u(r x / 2) / kappa over B_1"""
        u = member.function
        d = u.lattice.dim
        level = member.certification.super_level
        hyp_direct = level <= kappa and ball_fraction(u, kappa * combined, 0.5 * r) > 1.0 - delta
        concl_direct = u.min_over(ball(0.5 * r, d)) > kappa

        v = scale_transform(u, (0.0,) * d, 0.5 * r, 1.0).divided(kappa)
        hyp_scaled = level * (0.5 * r) ** 2 / kappa <= 1.0 and ball_fraction(v, combined, 1.0) > 1.0 - delta
        concl_scaled = v.min_over(ball(1.0, d)) > 1.0

        agree = hyp_direct == hyp_scaled and concl_direct == concl_scaled
        if not agree:
            status = FAIL
        elif hyp_direct:
            status = OK if concl_direct else FAIL
        else:
            status = VACUOUS
        return member.name, 'scaled', status, {'r': r, 'kappa': kappa, 'delta': delta, 'hypotheses': hyp_direct,
                                               'conclusion': concl_direct, 'agree': agree}

    #
    # Doubling
    #
    def exp_doubling(self):
        s = self.settings
        corpus = self.checked_corpus()
        B = self.scaled_barrier()
        M = B.meta['M']
        d = corpus.lattice.dim
        report = ExperimentReport('doubling', ['minQuarter', 'minUnit', 'margin', 'comparison', 'M'])
        report.measure('doubling_M', M)
        report.add('scaled_barrier', 'certified', OK if B.meta['min_b1'] >= 1.0 else FAIL,
                   minUnit=B.meta['min_b1'], M=M)

        quarter = ball(0.25, d)
        ring = Annulus((0.0,) * d, 0.25, 2.0).mask(corpus.lattice)
        candidates = corpus.select(SUPER, exclude=NEGATIVE_CONTROLS) + corpus.select(NEGATIVE_SUPER)
        filtered = [m for m in candidates if m.function.min_over(quarter) > M]
        honest = [m for m in filtered if NEGATIVE_SUPER not in m.roles]
        if not honest:
            report.note('vacuous: no certified member exceeds M on B_1/4')

        for member in filtered:
            u = member.function
            min_quarter = u.min_over(quarter)
            min_unit = u.min_over(ball(1.0, d))
            comparison = bool(np.all(B.values[ring] <= u.values[ring] + s.tol * np.maximum(1.0, u.values[ring])))
            values = {'minQuarter': min_quarter, 'minUnit': min_unit, 'margin': min_unit - 1.0,
                      'comparison': comparison, 'M': M}
            if NEGATIVE_SUPER in member.roles:
                report.add(member.name, 'doubling', VIOLATION, **values)
                report.note('{}: super-solution hypothesis violated (M- level {:.4g} > 1)'.format(
                    member.name, member.certification.super_level))
            else:
                report.add(member.name, 'doubling', OK if min_unit > 1.0 and comparison else FAIL, **values)
        return report

    #
    # L-epsilon
    #
    def exp_lepsilon(self):
        s = self.settings
        corpus = self.checked_corpus()
        M = s.cusp.M
        d = corpus.lattice.dim
        members = corpus.select(SUPER, exclude=NEGATIVE_CONTROLS)
        for member in members:
            if SMALL_INF not in member.roles:
                log.info('{}: inf over B_1 exceeds 1, left out of the L-epsilon run'.format(member.name))
        members = [m for m in members if SMALL_INF in m.roles]
        if not members:
            raise ExperimentError('no certified super-solution with inf over B_1 at most 1')

        delta = self._delta(corpus)
        reference = lepsilon_constants(delta, M, d)
        report = ExperimentReport('lepsilon', [
            'k', 't', 'measure', 'slope', 'ratio', 'bound', 'denseBalls', 'hypothesisViolations', 'r', 'alpha',
            'fraction', 'epsilon1', 'integral'])
        report.measure('delta_cal', delta)
        report.measure('epsilon_ref', reference['epsilon'])
        report.measure('C_ref', reference['C'])
        report.measure('log_tau', reference['log_tau'])
        report.measure('epsilon1_ref', reference['epsilon1'])

        def per_member(member):
            return self._lepsilon_member(member, M, delta, reference)

        slopes = []
        for member, (rows, curve, slope) in zip(members, self.for_members(per_member, members)):
            report.series[member.name] = curve
            for check, status, values in rows:
                report.add(member.name, check, status, **values)
            if slope is not None:
                slopes.append(-slope)
        if slopes:
            report.measure('epsilon_emp', min(slopes))
        return report

    def _lepsilon_member(self, member, M, delta, reference):
        s = self.settings
        u = member.function
        lattice = u.lattice
        floor = lattice.node_measure
        rows = []
        curve = survival_curve(u, M, s.survival_levels)
        measures = [m for _, _, m in curve]
        nonincreasing = all(b <= a for a, b in zip(measures, measures[1:]))
        slope = None
        if measures[0] == 0.0:
            rows.append(('survival', VACUOUS, {'k': 0, 't': 1.0, 'measure': 0.0}))
        else:
            slope = fit_decay_slope(curve, floor)
            ok = nonincreasing and slope <= -s.lepsilon_slope
            rows.append(('survival', OK if ok else FAIL, {'k': len(curve) - 1, 'measure': measures[0],
                                                         'slope': slope}))

        unit = ball(1.0, lattice.dim).mask(lattice)
        c = reference['c']
        for k in range(len(curve) - 1):
            if measures[k + 1] == 0.0:
                break
            F = MaskSet(lattice, unit & (u.values > M ** k))
            E = MaskSet(lattice, unit & (u.values > M ** (k + 1)))
            audit = ink_spots_check(E, F, delta, s.ink_samples, s.seed + k)
            ratio = measures[k + 1] / measures[k]
            rows.append(('ink', OK if ratio <= 1.0 - c * delta else FAIL,
                         {'k': k, 't': M ** (k + 1), 'measure': measures[k + 1], 'ratio': ratio,
                          'bound': 1.0 - c * delta, 'denseBalls': audit.dense_balls,
                          'hypothesisViolations': audit.hypothesis_violations}))

        epsilon1 = reference['epsilon1']
        for r in LEPSILON_RADII:
            threshold = r ** LEPSILON_ALPHA
            fraction = ball_fraction(u, threshold, r)
            minimum = u.min_over(ball(r, lattice.dim))
            hypotheses = member.certification.super_level <= epsilon1 and fraction >= 0.5
            values = {'r': r, 'alpha': LEPSILON_ALPHA, 'fraction': fraction, 'epsilon1': minimum / threshold,
                      'bound': epsilon1}
            if hypotheses:
                rows.append(('scaled', OK if minimum > epsilon1 * threshold else FAIL, values))
            else:
                rows.append(('scaled', VACUOUS, values))

        if slope is not None:
            rows.append(('integral', INFO, {'slope': slope,
                                            'integral': lebesgue_power_integral(u, -slope)}))
        return rows, curve, slope

    #
    # Holder
    #
    def exp_holder(self):
        s = self.settings
        corpus = self.checked_corpus()
        members = corpus.select(TWO_SIDED, exclude=NEGATIVE_CONTROLS)
        if not members:
            raise ExperimentError('no two-sided certified member in the corpus')
        epsilon1 = s.holder_epsilon1
        alpha_ref = holder_exponent(epsilon1)
        report = ExperimentReport('holder', [
            'rho', 'k', 'a', 'b', 'm', 'oscillation', 'alternative', 'fraction', 'factor', 'alpha', 'seminorm',
            'bound', 'baselineFactor', 'gamma', 'predicted'])
        report.measure('alpha_ref', alpha_ref)
        report.measure('epsilon1', epsilon1)

        results = self.for_members(self._holder_member, members)
        factors = {}
        alphas = []
        for member, (rows, iterations, factor) in zip(members, results):
            factors[member.name] = factor
            report.series[member.name] = [(it.k, it.oscillation) for it in iterations]
            for check, status, values in rows:
                report.add(member.name, check, status, **values)
            if factor > 0.0:
                alphas.append(-math.log2(factor))

            if AFFINE in member.roles:
                alpha = -math.log2(factor) if factor > 0.0 else math.inf
                ok = abs(alpha - 1.0) <= AFFINE_EXPONENT_TOLERANCE
                report.add(member.name, 'affine', OK if ok else FAIL, alpha=alpha, factor=factor)

        for member in members:
            if PERTURBED not in member.roles or member.baseline not in factors:
                continue
            base = factors[member.baseline]
            limit = s.holder_ratio * base
            report.add(member.name, 'perturbed', OK if factors[member.name] <= limit else FAIL,
                       factor=factors[member.name], baselineFactor=base, bound=limit)

        if alphas:
            report.measure('alpha_emp', min(alphas))
        for gamma in s.gamma_sweep:
            self._gamma_sweep(report, members, gamma, alpha_ref)
        return report

    def _holder_member(self, member):
        s = self.settings
        epsilon1 = s.holder_epsilon1
        alpha_ref = holder_exponent(epsilon1)
        d = member.function.lattice.dim
        rho = holder_scale(member.params.gamma, member.c0, s.holder_epsilon0, epsilon1)
        v = scale_transform(member.function, (0.0,) * d, rho, 1.0).divided(member.c0 * (1.0 + 1.0 / epsilon1))
        depth = resolution_depth(v.lattice)
        if depth < 3:
            raise ExperimentError('grid too coarse: {} dyadic levels above 8h for {}'.format(depth, member.name))

        iterations = dyadic_oscillation(v, depth, alpha_ref, epsilon1)
        rows = []
        monotone = all(b.a >= a.a and b.b <= a.b for a, b in zip(iterations, iterations[1:]))
        base = iterations[0]
        rows.append(('base', OK if base.oscillation <= 2.0 and monotone else FAIL,
                     {'rho': rho, 'k': 0, 'a': base.a, 'b': base.b, 'oscillation': base.oscillation, 'bound': 2.0}))
        for it in iterations[:-1]:
            rows.append(('alternative', INFO, {'k': it.k, 'a': it.a, 'b': it.b, 'm': it.m,
                                               'oscillation': it.oscillation, 'alternative': it.alternative,
                                               'fraction': it.above_fraction}))
        factor = decay_factor(iterations)
        alpha = -math.log2(factor) if factor > 0.0 else math.inf
        rows.append(('decay', OK if factor <= s.holder_factor else FAIL,
                     {'rho': rho, 'k': depth, 'factor': factor, 'alpha': alpha, 'bound': s.holder_factor}))
        rows.append(('seminorm', INFO, {'alpha': alpha_ref, 'seminorm': holder_seminorm(v, alpha_ref),
                                        'bound': 4.0}))
        return rows, iterations, factor

    def _gamma_sweep(self, report, members, gamma, alpha_ref):
        """Descriptive: seminorm of u on B_rho against (gamma / C0)^alpha"""
        s = self.settings
        for member in members:
            if PERTURBED in member.roles:
                continue
            rho = holder_scale(gamma, member.c0, s.holder_epsilon0, s.holder_epsilon1)
            seminorm = holder_seminorm(member.function, alpha_ref, rho) / member.c0
            report.add(member.name, 'gamma_sweep', INFO, gamma=gamma, rho=rho, seminorm=seminorm,
                       predicted=(gamma / member.c0) ** alpha_ref, alpha=alpha_ref)

    #
    # Harnack
    #
    def exp_harnack(self):
        s = self.settings
        corpus = self.checked_corpus()
        d = corpus.lattice.dim
        members = corpus.select(TWO_SIDED, NONNEG, exclude=NEGATIVE_CONTROLS)
        if not members:
            raise ExperimentError('no non-negative two-sided member in the corpus')
        report = ExperimentReport('harnack', [
            'ratio', 'c0', 'monotone', 'tStar', 'x0', 'r', 'H0', 'beta', 'mu', 'dominates', 'bound',
            'subLevel'])

        combined = s.cusp.M * self.doubling_constant
        feasibility = mu_beta_feasibility(combined, s.harnack_epsilon0, s.harnack_epsilon, d,
                                          s.params.gamma / s.c0)
        for key, value in feasibility.as_dict().items():
            report.measure('feasibility_{}'.format(key), value)
        report.add('corpus', 'feasibility', INFO, beta=feasibility.beta, mu=feasibility.mu)

        def per_member(member):
            return self._harnack_member(member, feasibility.mu)

        ratios = {}
        for member, (ratio, rows) in zip(members, self.for_members(per_member, members)):
            ratios[member.name] = ratio
            for check, status, values in rows:
                report.add(member.name, check, status, **values)

        for member in corpus.select(NEGATIVE_SUB):
            ratio = harnack_ratio(member.function, member.c0)
            report.add(member.name, 'ratio', VIOLATION, ratio=ratio, c0=member.c0,
                       subLevel=member.certification.sub_level)
            report.note('{}: sub-solution hypothesis violated (M+ >= -{:.4g} fails, level {:.4g}), ratio {:.4g}'
                        .format(member.name, member.c0, member.certification.sub_level, ratio))

        perturbed = [m for m in members if PERTURBED in m.roles and m.baseline in ratios]
        if perturbed:
            worst = max(ratios[m.name] for m in perturbed)
            baseline = max(ratios[m.baseline] for m in perturbed)
            limit = s.harnack_ratio * baseline
            report.add('perturbed', 'stability', OK if worst <= limit else FAIL, ratio=worst, bound=limit)
        if ratios:
            report.measure('C_emp', max(ratios.values()))
        return report

    def _harnack_member(self, member, mu):
        s = self.settings
        u = member.function
        d = u.lattice.dim
        rows = []
        ratio = harnack_ratio(u, member.c0)
        monotone = harnack_ratio(u, 2.0 * member.c0) <= ratio
        rows.append(('ratio', OK if np.isfinite(ratio) and monotone else FAIL,
                     {'ratio': ratio, 'c0': member.c0, 'monotone': monotone}))

        normalizer = member.c0 + u.min_over(ball(0.5, d))
        gamma = member.params.gamma / normalizer
        beta = max(d, gamma) / s.harnack_epsilon
        diagnostic = harnack_slide_diagnostic(u.divided(normalizer), beta, s.tol, mu)
        values = diagnostic.csv_row()
        rows.append(('slide', OK if diagnostic.dominates else FAIL, values))
        return ratio, rows


def run_experiments(config, names, out_dir=None, plots=False, corpus=None):
    runner = ExperimentRunner(config, corpus, out_dir, plots)
    return [runner.run(name) for name in names]


def corpus_directory(out_dir):
    return os.path.join(out_dir, 'corpus')
