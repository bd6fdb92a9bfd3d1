"""
The certified corpus the experiments run on. Every member carries the levels
at which it certifies, the C0 it is used with and a sha256 digest of its
values; roles are assigned from measured properties, never from the family
name alone.
"""
import logging
import math
import os

import numpy as np

from cusplab.contact import CuspParams
from cusplab.errors import ExperimentError, ParameterError
from cusplab.generate import BarrierParams, SolveConfig, barrier, bump, perturb_low_gradient, scaled_barrier, \
    solve_pucci
from cusplab.lattice import GridFunction, Lattice, ball
from cusplab.pool import OrderedPool
from cusplab.pucci import EllipticityParams, certification_levels
from cusplab.storage import write_gfn, write_provenance
from cusplab.utility import Periodic, seeded_rng

log = logging.getLogger('cusplab.corpus')

SUPER = 'super'
TWO_SIDED = 'two_sided'
NONNEG = 'nonneg'
SMALL_INF = 'small_inf'
BASELINE = 'baseline'
PERTURBED = 'perturbed'
AFFINE = 'affine'
CONSTANT = 'constant'
DOUBLING = 'doubling'
NEGATIVE_SUB = 'negative_sub'
NEGATIVE_SUPER = 'negative_super'

BARRIER_DISTANCE = 1.5
SPIKE_AMPLITUDES = (10.0, 100.0, 1000.0)
DOUBLING_FACTORS = (1.5, 4.0)
WELL_CENTRE = 0.6
WELL_WIDTH = 0.3
FREQUENCY_RANGE = (0.2, 0.6)
BOUNDARY_FLOOR = 0.1
BOUNDARY_MODES = 3


def corpus_lattice(config):
    return Lattice.centered(config.get_int('lattice', 'grid', 289), config.get_float('lattice', 'half_width', 2.25),
                            config.get_int('lattice', 'dim', 2))


class Certification(object):
    """Levels (super, sub) measured on B_radius plus the digest they were measured on"""

    def __init__(self, super_level, sub_level, radius, gamma, digest):
        self.super_level = float(super_level)
        self.sub_level = float(sub_level)
        self.radius = float(radius)
        self.gamma = float(gamma)
        self.digest = digest

    def passes(self, level, tol=0.0):
        return self.super_level <= level + tol and self.sub_level <= level + tol

    def verify(self, name, u):
        if u.digest() != self.digest:
            raise ExperimentError('stale certification for corpus member {}'.format(name))

    def as_dict(self):
        return {'super_level': self.super_level, 'sub_level': self.sub_level, 'radius': self.radius,
                'gamma': self.gamma, 'digest': self.digest}

    def __repr__(self):
        return 'Certification(super={:.6g}, sub={:.6g}, radius={}, gamma={})'.format(
            self.super_level, self.sub_level, self.radius, self.gamma)


def certify(u, params, radius):
    region = ball(radius, u.lattice.dim)
    super_level, sub_level = certification_levels(u, params, region)
    return Certification(super_level, sub_level, radius, params.gamma, u.digest())


class CorpusMember(object):
    def __init__(self, name, family, function, params, c0, certification, roles=(), provenance=None,
                 baseline=None):
        self.name = name
        self.family = family
        self.function = function
        self.params = params
        self.c0 = float(c0)
        self.certification = certification
        self.roles = set(roles)
        self.provenance = dict(provenance or {})
        self.baseline = baseline

    def has(self, *roles):
        return all(r in self.roles for r in roles)

    def verify(self):
        self.certification.verify(self.name, self.function)

    def __repr__(self):
        return 'CorpusMember({}, family={}, c0={:.4g}, roles={})'.format(
            self.name, self.family, self.c0, ','.join(sorted(self.roles)))


def measure_roles(u, certification, c0, tol=1e-9):
    """Roles a function earns from its values and certification levels"""
    d = u.lattice.dim
    roles = set()
    inner = ball(1.0, d)
    if certification.radius >= 2.0 and u.min_over(ball(2.0, d)) >= 0.0 and certification.super_level <= 1.0 + tol:
        roles.add(SUPER)
    if certification.passes(c0, tol) and float(np.max(np.abs(u.values[inner.mask(u.lattice)]))) <= c0 + tol:
        roles.add(TWO_SIDED)
    if u.min_over(inner) >= 0.0:
        roles.add(NONNEG)
    if u.min_over(inner) <= 1.0:
        roles.add(SMALL_INF)
    return roles


class Corpus(object):
    """Members in fixed generation order; the order is the report order"""

    def __init__(self, lattice, members, constants=None):
        self.lattice = lattice
        self.members = list(members)
        self.constants = dict(constants or {})
        names = [m.name for m in self.members]
        if len(set(names)) != len(names):
            raise ParameterError('duplicate corpus member names')

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def get(self, name):
        for member in self.members:
            if member.name == name:
                return member
        raise KeyError(name)

    def select(self, *roles, **kwargs):
        exclude = kwargs.get('exclude', ())
        return [m for m in self.members if m.has(*roles) and not any(r in m.roles for r in exclude)]

    def verify(self):
        for member in self.members:
            member.verify()

    def write(self, out_dir):
        if not os.path.exists(out_dir):
            os.makedirs(out_dir)
        for member in self.members:
            write_gfn(os.path.join(out_dir, '{}.gfn'.format(member.name)), member.function)
            provenance = dict(member.provenance)
            provenance.update({'family': member.family, 'c0': member.c0, 'roles': ' '.join(sorted(member.roles)),
                               'lambda': member.params.lam, 'Lambda': member.params.Lam,
                               'gamma': member.params.gamma})
            write_provenance(os.path.join(out_dir, '{}.prov'.format(member.name)), provenance,
                             member.certification.as_dict())
        log.info('wrote {} corpus members to {}'.format(len(self.members), out_dir))


class CorpusBuilder(object):
    """
    Builds the shipped corpus from a Config. Families are generated in a fixed
    order with per-member seeded streams, so the corpus only depends on the
    config and the seed.
    """

    def __init__(self, config, lattice=None, workers=None):
        self.config = config
        self.lattice = lattice or corpus_lattice(config)
        self.params = EllipticityParams.from_config(config)
        self.seed = config.get_int('corpus', 'seed', 7)
        self.c0 = config.get_float('experiments', 'c0', 1.0)
        self.tol = config.get_float('experiments', 'tol', 1e-9)
        self.workers = workers or config.get_int('experiments', 'workers', 4)
        self.progress = Periodic(config.get_float('solver', 'progress_interval', 5.0))
        self._doubling_constant = None

    def count(self, key, default):
        return max(0, self.config.get_int('corpus', key, default))

    @property
    def dim(self):
        return self.lattice.dim

    def doubling_constant(self):
        """M of the certified scaled barrier on this lattice"""
        if self._doubling_constant is None:
            bp = BarrierParams.from_config(self.config, self.params)
            self._doubling_constant = scaled_barrier(bp, self.lattice, self.params.gamma).meta['M']
        return self._doubling_constant

    def member(self, name, family, u, params, radius=2.0, c0=None, extra_roles=(), provenance=None,
               baseline=None):
        certification = certify(u, params, radius)
        if c0 is None:
            inner = ball(1.0, self.dim).mask(self.lattice)
            c0 = max(self.c0, certification.super_level, certification.sub_level,
                     float(np.max(np.abs(u.values[inner]))))
        roles = measure_roles(u, certification, c0, self.tol) | set(extra_roles)
        prov = {'generator': u.meta.get('generator', family), 'seed': self.seed}
        prov.update(provenance or {})
        member = CorpusMember(name, family, u, params, c0, certification, roles, prov, baseline)
        log.debug('{} {}'.format(member, certification))
        return member

    def build(self):
        members = []
        members.extend(self.barriers())
        potentials = self.potentials()
        members.extend(potentials)
        members.extend(self.doubling())
        solved = self.solver()
        members.extend(solved)
        members.extend(self.perturbed(solved))
        if solved:
            members.extend(self.spikes(solved[0]))
        members.extend(self.wells())
        members.extend(self.controls())
        constants = {'doubling_M': self.doubling_constant()}
        corpus = Corpus(self.lattice, members, constants)
        log.info('corpus: {} members on {}'.format(len(corpus), self.lattice))
        return corpus

    def barriers(self):
        bp = BarrierParams.from_config(self.config, self.params)
        unit_ball = ball(1.0, self.dim)
        out = []
        n = self.count('barrier_members', 3)
        for j in range(n):
            angle = 2.0 * math.pi * j / max(n, 1)
            centre = np.zeros(self.dim)
            centre[0] = BARRIER_DISTANCE * math.cos(angle)
            if self.dim > 1:
                centre[1] = BARRIER_DISTANCE * math.sin(angle)
            b = barrier(bp, self.lattice, centre)
            u = b.divided(b.max_over(unit_ball))
            out.append(self.member('barrier_{}'.format(j), 'barrier', u, self.params, radius=1.0,
                                   provenance={'p': bp.p, 'centre': tuple(centre)}))
        return out

    def potential_exponent(self):
        """q with lambda (q + 1) = Lambda (d - 1): the largest power keeping M-(r^-q) <= 0"""
        return self.params.Lam * (self.dim - 1) / self.params.lam - 1.0

    def potential(self, epsilon, target):
        """A ((r^2 + eps^2)^(-q/2) - (R^2 + eps^2)^(-q/2)) with min over B_1/4 equal to target"""
        q = self.potential_exponent()
        h = self.lattice.spacing
        corner = self.lattice.spacing * (max(self.lattice.shape) - 1) / 2.0 * math.sqrt(self.dim) + h
        r = self.lattice.radii()
        shape = (r * r + epsilon * epsilon) ** (-0.5 * q) - (corner * corner + epsilon * epsilon) ** (-0.5 * q)
        quarter = ball(0.25, self.dim).mask(self.lattice)
        amplitude = target / float(np.min(shape[quarter]))
        return GridFunction(self.lattice, amplitude * shape,
                            {'generator': 'potential', 'q': q, 'epsilon': epsilon, 'amplitude': amplitude})

    def potentials(self):
        n = self.count('potential_members', 4)
        if n == 0:
            return []
        if self.potential_exponent() <= 0.0:
            log.warning('potential family skipped: Lambda (d - 1) <= 2 lambda')
            return []
        h = self.lattice.spacing
        targets = np.linspace(0.5, 1.0, n) if n > 1 else [1.0]
        out = []
        for j, target in enumerate(targets):
            epsilon = (6.0 + 2.0 * j) * h
            u = self.potential(epsilon, float(target))
            out.append(self.member('potential_{}'.format(j), 'potential', u, self.params,
                                   provenance={'epsilon': epsilon, 'target': float(target)}))
        return out

    def doubling(self):
        n = self.count('doubling_members', 2)
        if n == 0 or self.potential_exponent() <= 0.0:
            return []
        M = self.doubling_constant()
        h = self.lattice.spacing
        out = []
        for j in range(n):
            kappa = DOUBLING_FACTORS[j % len(DOUBLING_FACTORS)] * (1 + j // len(DOUBLING_FACTORS))
            u = self.potential(8.0 * h, kappa * M)
            out.append(self.member('doubling_{}'.format(j), 'doubling', u, self.params, extra_roles=(DOUBLING,),
                                   provenance={'kappa': kappa, 'doubling_M': M}))
        return out

    def boundary_data(self, rng):
        lo = BOUNDARY_FLOOR
        hi = self.config.get_float('corpus', 'gmax', 3.0)
        points = self.lattice.points()
        weights = rng.dirichlet(np.ones(BOUNDARY_MODES))
        sigma = np.full(self.lattice.shape, 0.5)
        for weight in weights:
            direction = rng.normal(size=self.dim)
            direction /= np.linalg.norm(direction)
            omega = rng.uniform(*FREQUENCY_RANGE) * direction
            sigma += 0.5 * weight * np.cos(points.dot(omega) + rng.uniform(0.0, 2.0 * math.pi))
        return lo + (hi - lo) * sigma

    def right_hand_side(self, rng):
        amplitude = self.config.get_float('corpus', 'rhs_amplitude', 0.5)
        direction = rng.normal(size=self.dim)
        direction /= np.linalg.norm(direction)
        nu = rng.uniform(0.0, 1.0) * direction
        phase = rng.uniform(0.0, 2.0 * math.pi)
        return -amplitude * 0.5 * (1.0 + np.cos(self.lattice.points().dot(nu) + phase))

    def solve_member(self, j):
        rng = seeded_rng(self.seed, 0x736f6c76, j)
        g = GridFunction(self.lattice, self.boundary_data(rng))
        f = GridFunction(self.lattice, self.right_hand_side(rng))
        u = solve_pucci(f, g, self.params, SolveConfig.from_config(self.config))
        if self.progress.check():
            log.info('solved corpus member {}'.format(j))
        return u

    def solver(self):
        n = self.count('solver_members', 12)
        if n == 0:
            return []
        self.progress.set()
        pool = OrderedPool(self.workers)
        labels = ['solver_{}'.format(j) for j in range(n)]
        solutions = pool.map_values(self.solve_member, range(n), labels)
        baseline_params = self.params.with_gamma(0.0)
        return [self.member(labels[j], 'solver', u, baseline_params, extra_roles=(BASELINE,),
                            provenance={'index': j, 'residual': u.meta['residual'],
                                        'iterations': u.meta['iterations']})
                for j, u in enumerate(solutions)]

    def perturbed(self, baselines):
        budget = self.config.get_float('corpus', 'perturb_budget', 0.05)
        bumps = self.config.get_int('corpus', 'perturb_bumps', 4)
        region = ball(2.0, self.dim)
        out = []
        for j, base in enumerate(baselines):
            u = perturb_low_gradient(base.function, self.params, budget, (self.seed << 8) + j, base.c0, region,
                                     self.tol, bumps)
            out.append(self.member('perturbed_{}'.format(j), 'perturbed', u, self.params, c0=base.c0,
                                   extra_roles=(PERTURBED,), baseline=base.name,
                                   provenance={'eta': u.meta['eta'], 'bumps': len(u.meta['bumps'])}))
        return out

    def spikes(self, base):
        n = self.count('spike_members', 3)
        width = 3.0 * self.lattice.spacing
        psi = bump(self.lattice, np.zeros(self.dim), width)
        out = []
        for j in range(n):
            amplitude = SPIKE_AMPLITUDES[j % len(SPIKE_AMPLITUDES)] * 10.0 ** (j // len(SPIKE_AMPLITUDES))
            u = base.function.with_values(base.function.values + amplitude * psi, generator='spike',
                                          spike=amplitude)
            out.append(self.member('spike_{}'.format(j), 'spike', u, self.params, c0=base.c0,
                                   extra_roles=(NEGATIVE_SUB,), baseline=base.name,
                                   provenance={'amplitude': amplitude}))
        return out

    def wells(self):
        if self.count('doubling_members', 2) == 0 or self.potential_exponent() <= 0.0:
            return []
        base = self.potential(8.0 * self.lattice.spacing, DOUBLING_FACTORS[0] * self.doubling_constant())
        centre = np.zeros(self.dim)
        centre[0] = WELL_CENTRE
        u = base.with_values(base.values * (1.0 - bump(self.lattice, centre, WELL_WIDTH)), generator='well')
        return [self.member('well_0', 'well', u, self.params, c0=self.c0, extra_roles=(NEGATIVE_SUPER,),
                            provenance={'centre': tuple(centre), 'width': WELL_WIDTH})]

    def controls(self):
        points = self.lattice.points()
        affine = GridFunction(self.lattice, 2.0 + 0.5 * points[..., 0], {'generator': 'affine', 'slope': 0.5})
        constant_value = CuspParams.from_config(self.config).M + 1.0
        constant = GridFunction(self.lattice, np.full(self.lattice.shape, constant_value),
                                {'generator': 'constant', 'value': constant_value})
        return [self.member('affine_0', 'affine', affine, self.params, extra_roles=(AFFINE,)),
                self.member('constant_0', 'constant', constant, self.params, extra_roles=(CONSTANT,))]


def build_corpus(config, lattice=None, workers=None):
    return CorpusBuilder(config, lattice, workers).build()
