"""
Inf-convolution v_eps(x) = min_y v(y) + |y - x|^2 / (2 eps) over lattice nodes,
computed exactly by separable quadratic lower envelopes, plus semi-concavity
certification of grid functions.
"""
import itertools
import logging
import math

import numpy as np

from cusplab.errors import ParameterError
from cusplab.lattice import GridFunction

log = logging.getLogger('cusplab.regularize')


class InfConvResult(object):
    def __init__(self, original, smoothed, argmin, epsilon, bound=None):
        self.original = original
        self.smoothed = smoothed
        self.argmin = argmin
        self.epsilon = epsilon
        lattice = smoothed.lattice
        own = np.stack(np.meshgrid(*[np.arange(n) for n in lattice.shape], indexing='ij'), axis=-1)
        delta = (argmin - own).astype(float)
        self.displacement = lattice.spacing * np.sqrt(np.sum(delta * delta, axis=-1))
        self.max_displacement = float(np.max(self.displacement))
        self.bound = bound

    @property
    def within_bound(self):
        return self.bound is None or self.max_displacement <= self.bound + self.smoothed.lattice.spacing

    def displacement_function(self):
        return GridFunction(self.smoothed.lattice, self.displacement, {'channel': 'displacement'})


def lower_envelope(f, c):
    """
    Exact lower envelope of the parabolas f[j] + c (i - j)^2 at i = 0..n-1.
    Returns (values, argmins) with ties going to the smallest j.
    """
    n = len(f)
    verts = np.zeros(n, dtype=int)
    bounds = np.empty(n + 1)
    k = 0
    bounds[0] = -np.inf
    bounds[1] = np.inf
    for q in range(1, n):
        fq = f[q] + c * q * q
        p = verts[k]
        s = (fq - (f[p] + c * p * p)) / (2.0 * c * (q - p))
        # bounds[0] is -inf so k never drops below zero
        while s <= bounds[k]:
            k -= 1
            p = verts[k]
            s = (fq - (f[p] + c * p * p)) / (2.0 * c * (q - p))
        k += 1
        verts[k] = q
        bounds[k] = s
        bounds[k + 1] = np.inf

    count = k + 1
    values = np.empty(n)
    argmins = np.empty(n, dtype=int)
    k = 0
    for i in range(n):
        while k + 1 < count and bounds[k + 1] < i:
            k += 1
        # exact re-check over neighbouring envelope parabolas
        best_j = -1
        best = np.inf
        for m in range(max(0, k - 2), min(count, k + 3)):
            j = verts[m]
            val = f[j] + c * float((i - j) ** 2)
            if val < best or (val == best and j < best_j):
                best = val
                best_j = j
        values[i] = best
        argmins[i] = best_j
    return values, argmins


def _axis_pass(values, axis, c):
    moved = np.moveaxis(values, axis, -1)
    out = np.empty_like(moved)
    arg = np.empty(moved.shape, dtype=int)
    for index in np.ndindex(*moved.shape[:-1]):
        out[index], arg[index] = lower_envelope(moved[index], c)
    return np.moveaxis(out, -1, axis), np.moveaxis(arg, -1, axis)


def inf_convolve(v, epsilon):
    """Exact discrete inf-convolution of v with parameter epsilon"""
    if not epsilon > 0:
        raise ParameterError('epsilon must be positive, got {}'.format(epsilon))
    lattice = v.lattice
    d = lattice.dim
    c = lattice.spacing * lattice.spacing / (2.0 * epsilon)

    # last axis first so the final pass runs over axis 0
    current = np.array(v.values, dtype=float)
    passes = [None] * d
    for axis in reversed(range(d)):
        current, passes[axis] = _axis_pass(current, axis, c)

    grids = np.meshgrid(*[np.arange(n) for n in lattice.shape], indexing='ij')
    chosen = []
    for axis in range(d):
        index = tuple(chosen) + tuple(grids[axis:])
        chosen.append(passes[axis][index])
    argmin = np.stack(chosen, axis=-1)
    log.debug('inf-convolution eps={} over {} nodes'.format(epsilon, lattice.size))
    smoothed = GridFunction(lattice, current, {'epsilon': epsilon})
    return InfConvResult(v, smoothed, argmin, epsilon)


def clamp_above_and_convolve(u, M, epsilon):
    """v = min(u, 2M) followed by inf_convolve, with the displacement bound 2 sqrt(2 (2M) eps)"""
    if not M > 0:
        raise ParameterError('M must be positive, got {}'.format(M))
    clamped = u.with_values(np.minimum(u.values, 2.0 * M))
    result = inf_convolve(clamped, epsilon)
    result.bound = 2.0 * math.sqrt(2.0 * (2.0 * M) * epsilon)
    return result


def certificate_directions(dim):
    """Unit axes and the diagonals e_k +- e_l"""
    dirs = []
    for k in range(dim):
        e = [0] * dim
        e[k] = 1
        dirs.append(tuple(e))
    for k, l in itertools.combinations(range(dim), 2):
        for sign in (1, -1):
            e = [0] * dim
            e[k] = 1
            e[l] = sign
            dirs.append(tuple(e))
    return dirs


def directional_second_differences(values, spacing, direction):
    """(f(i+e) - 2 f(i) + f(i-e)) / (|e|^2 h^2) on the margin-1 interior"""
    def view(sign):
        return values[tuple(slice(1 + sign * s, n - 1 + sign * s) for s, n in zip(direction, values.shape))]
    norm2 = float(sum(s * s for s in direction))
    return (view(1) - 2.0 * view(0) + view(-1)) / (norm2 * spacing * spacing)


def semi_concavity_certificate(f, bound, tol=0.0):
    """
    Check every interior axis and diagonal second difference against `bound`.
    Returns (pass, worst).
    """
    worst = -np.inf
    for direction in certificate_directions(f.lattice.dim):
        diffs = directional_second_differences(f.values, f.lattice.spacing, direction)
        worst = max(worst, float(np.max(diffs)))
    return worst <= bound + tol, worst


class NestingReport(object):
    def __init__(self, epsilons, measures, target, nested, contained, violations):
        self.epsilons = list(epsilons)
        self.measures = list(measures)
        self.target = target
        self.nested = nested
        self.contained = contained
        self.violations = violations

    @property
    def monotone(self):
        return all(a <= b for a, b in zip(self.measures, self.measures[1:]))

    def __repr__(self):
        return 'NestingReport(nested={}, contained={}, measures={}, target={})'.format(
            self.nested, self.contained, self.measures, self.target)


def nested_level_sets(u, epsilons, M, region=None):
    """Verify {v_eps1 > M} is contained in {v_eps2 > M} for eps1 > eps2"""
    epsilons = [float(e) for e in epsilons]
    if not epsilons:
        raise ParameterError('at least one epsilon is required')
    if any(a <= b for a, b in zip(epsilons, epsilons[1:])):
        raise ParameterError('epsilons must be strictly descending, got {}'.format(epsilons))
    lattice = u.lattice
    within = region.mask(lattice) if region is not None else np.ones(lattice.shape, dtype=bool)
    clamped = np.minimum(u.values, 2.0 * M)
    target_set = (clamped > M) & within

    sets = []
    for eps in epsilons:
        smoothed = clamp_above_and_convolve(u, M, eps).smoothed
        sets.append((smoothed.values > M) & within)

    violations = 0
    for larger, smaller in zip(sets, sets[1:]):
        violations += int(np.count_nonzero(larger & ~smaller))
    contained = all(not np.any(s & ~target_set) for s in sets)
    measures = [float(np.count_nonzero(s)) * lattice.node_measure for s in sets]
    target = float(np.count_nonzero(target_set)) * lattice.node_measure
    return NestingReport(epsilons, measures, target, violations == 0, contained, violations)
