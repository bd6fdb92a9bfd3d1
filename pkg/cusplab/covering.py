"""
Vitali ball selection and the growing ink-spots lemma evaluated on node masks
"""
import logging
import math

import numpy as np
from scipy import ndimage, signal

from cusplab.errors import ParameterError
from cusplab.lattice import Ball
from cusplab.utility import seeded_rng

log = logging.getLogger('cusplab.covering')

VITALI_DILATION = 5.0
INK_RADIUS_LEVELS = 6
MIN_BALL_NODES = 4


class MaskSet(object):
    """
    A discretized open set: one bit per lattice node. `open` records whether
    the bits are the node discretization of a declared union of balls or boxes.
    """

    def __init__(self, lattice, bits, open=True):
        bits = np.array(bits, dtype=bool)
        if bits.shape != lattice.shape:
            raise ParameterError('mask shape {} does not match lattice {}'.format(bits.shape, lattice.shape))
        bits.setflags(write=False)
        self.lattice = lattice
        self.bits = bits
        self.open = bool(open)

    @classmethod
    def from_region(cls, lattice, region):
        return cls(lattice, region.mask(lattice), True)

    @classmethod
    def from_regions(cls, lattice, regions):
        bits = np.zeros(lattice.shape, dtype=bool)
        for region in regions:
            bits |= region.mask(lattice)
        return cls(lattice, bits, True)

    @classmethod
    def empty(cls, lattice):
        return cls(lattice, np.zeros(lattice.shape, dtype=bool), True)

    @property
    def count(self):
        return int(np.count_nonzero(self.bits))

    @property
    def measure(self):
        return self.count * self.lattice.node_measure

    def _same_lattice(self, other):
        if self.lattice != other.lattice:
            raise ParameterError('mask sets live on different lattices')

    def subset_of(self, other):
        self._same_lattice(other)
        return not np.any(self.bits & ~other.bits)

    def union(self, other):
        self._same_lattice(other)
        return MaskSet(self.lattice, self.bits | other.bits, self.open and other.open)

    def intersection(self, other):
        self._same_lattice(other)
        return MaskSet(self.lattice, self.bits & other.bits, self.open and other.open)

    def difference(self, other):
        self._same_lattice(other)
        return MaskSet(self.lattice, self.bits & ~other.bits, False)

    def __contains__(self, idx):
        return bool(self.bits[tuple(idx)])

    def __repr__(self):
        return 'MaskSet(nodes={}, measure={:.6g})'.format(self.count, self.measure)


class BallCover(object):
    def __init__(self, balls, disjoint, dilation_factor=VITALI_DILATION):
        self.balls = [(tuple(float(c) for c in center), float(radius)) for center, radius in balls]
        self.disjoint = bool(disjoint)
        self.dilation_factor = float(dilation_factor)

    def dilated(self):
        return [(center, self.dilation_factor * radius) for center, radius in self.balls]

    def union_mask(self, lattice, dilated=False):
        bits = np.zeros(lattice.shape, dtype=bool)
        for center, radius in (self.dilated() if dilated else self.balls):
            bits |= Ball(center, radius).mask(lattice)
        return bits

    def covers(self, balls, lattice):
        """Every input ball's node mask lies inside the union of the dilated kept balls"""
        cover = self.union_mask(lattice, dilated=True)
        return all(not np.any(Ball(c, r).mask(lattice) & ~cover) for c, r in balls)

    def masks_disjoint(self, lattice):
        seen = np.zeros(lattice.shape, dtype=bool)
        for center, radius in self.balls:
            bits = Ball(center, radius).mask(lattice)
            if np.any(seen & bits):
                return False
            seen |= bits
        return True

    def __len__(self):
        return len(self.balls)

    def __repr__(self):
        return 'BallCover(balls={}, disjoint={})'.format(len(self.balls), self.disjoint)


def vitali_select(balls):
    """
    Greedy selection by descending radius (ties: lexicographic center), keeping
    a ball iff it is disjoint from every kept ball. Each input ball then lies in
    the 5-dilation of a kept ball.
    """
    balls = [(tuple(float(c) for c in center), float(radius)) for center, radius in balls]
    if not balls:
        raise ParameterError('vitali selection needs at least one ball')
    if any(not r > 0 for _, r in balls):
        raise ParameterError('ball radii must be positive')
    kept = []
    for center, radius in sorted(balls, key=lambda b: (-b[1], b[0])):
        c = np.asarray(center)
        if all(np.linalg.norm(c - np.asarray(kc)) > radius + kr for kc, kr in kept):
            kept.append((center, radius))
    return BallCover(kept, True)


def disk_kernel(k, dim):
    """Node offsets within integer radius k as a (2k+1)^dim indicator"""
    offsets = np.indices((2 * k + 1,) * dim) - k
    return (np.sum(offsets * offsets, axis=0) <= k * k).astype(float)


def _inscribed_radii(F):
    """
    For every node of F the largest integer k (in node units) such that the
    node ball of radius k around it stays inside F; -1 outside F
    """
    padded = np.pad(F.bits, 1, mode='constant', constant_values=False)
    dist = ndimage.distance_transform_edt(padded)[tuple(slice(1, -1) for _ in F.bits.shape)]
    k = np.ceil(dist).astype(int) - 1
    k[~F.bits] = -1
    return k


def maximal_ball_at(x, F, radii=None):
    """
    Largest node ball (radius step h) containing node x and contained in F.
    Returns (center, radius); a lone node gives the degenerate ball of radius h/2.
    """
    x = tuple(int(i) for i in x)
    if x not in F:
        raise ParameterError('node {} is not in F'.format(x))
    lattice = F.lattice
    radii = _inscribed_radii(F) if radii is None else radii
    nodes = np.indices(lattice.shape)
    offset = np.stack([nodes[k] - x[k] for k in range(lattice.dim)], axis=-1)
    reach = np.sqrt(np.sum(offset * offset, axis=-1))
    valid = (radii >= 1) & (reach <= radii + 1e-9)
    if not np.any(valid):
        return tuple(lattice.point(x)), 0.5 * lattice.spacing
    best = np.max(radii[valid])
    center = tuple(np.argwhere(valid & (radii == best))[0])
    return tuple(lattice.point(center)), best * lattice.spacing


def ink_radii(lattice, levels=INK_RADIUS_LEVELS):
    """Geometric family of integer node radii from 4 nodes up to the unit radius"""
    top = int(math.floor(1.0 / lattice.spacing + 1e-9))
    if top < MIN_BALL_NODES:
        raise ParameterError('lattice spacing {} too coarse for balls of radius {}h inside B_1'.format(
            lattice.spacing, MIN_BALL_NODES))
    raw = np.geomspace(MIN_BALL_NODES, top, levels)
    return sorted(set(int(round(r)) for r in raw))


def _centre_mask(lattice, k):
    """Nodes that can carry a ball of radius k h inside B_1"""
    return lattice.radii() + k * lattice.spacing <= 1.0 + 1e-12


def _ball_counts(bits, k):
    kernel = disk_kernel(k, bits.ndim)
    return np.rint(signal.fftconvolve(bits.astype(float), kernel, mode='same')), float(np.sum(kernel))


def grow_ink_spots(E, delta, radii=None):
    """
    Smallest F containing E such that every node ball B inside B_1 from the
    radius family with |B n E| > (1 - delta)|B| lies in F
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError('delta must lie in (0, 1), got {}'.format(delta))
    lattice = E.lattice
    radii = radii or ink_radii(lattice)
    bits = np.array(E.bits)
    for k in radii:
        counts, volume = _ball_counts(E.bits, k)
        dense = (counts > (1.0 - delta) * volume) & _centre_mask(lattice, k)
        if np.any(dense):
            painted = signal.fftconvolve(dense.astype(float), disk_kernel(k, lattice.dim), mode='same')
            bits |= painted > 0.5
    return MaskSet(lattice, bits, E.open)


class InkSpotsReport(object):
    CSV_COLUMNS = ['delta', 'samples', 'denseBalls', 'hypothesisViolations', 'smallE',
                   'measureE', 'measureF', 'bound', 'margin', 'pass']

    def __init__(self, delta, samples, dense_balls, violations, small_e, measure_e, measure_f, c):
        self.delta = delta
        self.samples = samples
        self.dense_balls = dense_balls
        self.hypothesis_violations = violations
        self.small_e = small_e
        self.measure_e = measure_e
        self.measure_f = measure_f
        self.c = c
        self.bound = (1.0 - c * delta) * measure_f

    @property
    def hypotheses_hold(self):
        return self.hypothesis_violations == 0 and self.small_e

    @property
    def conclusion_holds(self):
        return self.measure_e <= self.bound

    @property
    def margin(self):
        """Relative slack of |E| <= (1 - c delta)|F|; infinite for empty E"""
        if self.measure_e == 0.0:
            return float('inf')
        return self.bound / self.measure_e - 1.0

    @property
    def passed(self):
        return self.conclusion_holds or not self.hypotheses_hold

    def csv_row(self):
        return {'delta': self.delta, 'samples': self.samples, 'denseBalls': self.dense_balls,
                'hypothesisViolations': self.hypothesis_violations, 'smallE': self.small_e,
                'measureE': self.measure_e, 'measureF': self.measure_f, 'bound': self.bound,
                'margin': self.margin, 'pass': self.passed}

    def __repr__(self):
        return 'InkSpotsReport(delta={}, |E|={:.6g}, |F|={:.6g}, margin={:.4g}, violations={})'.format(
            self.delta, self.measure_e, self.measure_f, self.margin, self.hypothesis_violations)


def _check_nested(E, F):
    E._same_lattice(F)
    if not E.subset_of(F):
        raise ParameterError('subset violation: E is not contained in F')
    unit = MaskSet.from_region(F.lattice, Ball((0.0,) * F.lattice.dim, 1.0))
    if not F.subset_of(unit):
        raise ParameterError('subset violation: F is not contained in B_1')
    return unit


def ink_spots_check(E, F, delta, samples=32, seed=0, radii=None):
    """
    Audit the density hypothesis on `samples` seeded balls stratified over the
    radius family, then test |E| <= (1 - c delta)|F| with c = 1/5^d
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError('delta must lie in (0, 1), got {}'.format(delta))
    if samples < 1:
        raise ParameterError('ball samples must be positive')
    unit = _check_nested(E, F)
    lattice = E.lattice
    radii = radii or ink_radii(lattice)
    centres = dict((k, np.argwhere(_centre_mask(lattice, k))) for k in radii)

    dense = 0
    violations = 0
    for i in range(samples):
        k = radii[i % len(radii)]
        candidates = centres[k]
        if len(candidates) == 0:
            continue
        rng = seeded_rng(seed, i)
        centre = candidates[int(rng.integers(len(candidates)))]
        ball = Ball(lattice.point(centre), k * lattice.spacing).mask(lattice)
        if np.count_nonzero(ball & E.bits) > (1.0 - delta) * np.count_nonzero(ball):
            dense += 1
            if np.any(ball & ~F.bits):
                violations += 1

    c = 1.0 / VITALI_DILATION ** lattice.dim
    small_e = E.measure <= (1.0 - delta) * unit.measure
    report = InkSpotsReport(delta, samples, dense, violations, small_e, E.measure, F.measure, c)
    log.debug('{}'.format(report))
    return report


class InkSpotsTrace(object):
    """Constructive record of the covering argument on a concrete (E, F)"""

    def __init__(self, delta, maximal_balls, dense_maximal, selection, uncovered,
                 measure_gap, selected_gap, selected_measure, c):
        self.delta = delta
        self.maximal_balls = maximal_balls
        self.dense_maximal = dense_maximal
        self.selection = selection
        self.uncovered = uncovered
        self.measure_gap = measure_gap
        self.selected_gap = selected_gap
        self.selected_measure = selected_measure
        self.c = c

    @property
    def chain(self):
        """|F \\ E| >= sum |B_j n F \\ E| >= delta sum |B_j|, as measured"""
        return [self.measure_gap, self.selected_gap, self.delta * self.selected_measure]

    @property
    def chain_holds(self):
        gap, selected, scaled = self.chain
        return gap >= selected - 1e-12 and selected >= scaled - 1e-12


def ink_spots_trace(E, F, delta):
    """
    Assign every node x of F its maximal ball B^x (largest radius, then
    lexicographic centre), run the Vitali selection on those balls and record
    each link of the measure chain
    """
    _check_nested(E, F)
    lattice = F.lattice
    h = lattice.spacing
    radii = _inscribed_radii(F)
    owner = {}
    assigned = np.zeros(lattice.shape, dtype=bool)
    for k in sorted(set(radii[radii >= 1].ravel()), reverse=True):
        kernel = disk_kernel(int(k), lattice.dim).astype(bool)
        for centre in np.argwhere(radii == k):
            window = tuple(slice(c - k, c + k + 1) for c in centre)
            fresh = kernel & ~assigned[window] & F.bits[window]
            if np.any(fresh):
                assigned[window] |= fresh
                owner[tuple(centre)] = int(k)
    balls = [(tuple(lattice.point(c)), k * h) for c, k in sorted(owner.items())]
    for x in np.argwhere(F.bits & ~assigned):
        balls.append((tuple(lattice.point(x)), 0.5 * h))

    dense = 0
    for centre, radius in balls:
        bits = Ball(centre, radius).mask(lattice)
        if np.count_nonzero(bits & E.bits) > (1.0 - delta) * np.count_nonzero(bits):
            dense += 1

    if not balls:
        return InkSpotsTrace(delta, 0, 0, BallCover([], True), 0, 0.0, 0.0, 0.0, 1.0 / VITALI_DILATION ** lattice.dim)
    selection = vitali_select(balls)
    gap = F.bits & ~E.bits
    selected_gap = 0.0
    selected_measure = 0.0
    for centre, radius in selection.balls:
        bits = Ball(centre, radius).mask(lattice)
        selected_gap += np.count_nonzero(bits & gap) * lattice.node_measure
        selected_measure += np.count_nonzero(bits) * lattice.node_measure
    uncovered = int(np.count_nonzero(F.bits & ~selection.union_mask(lattice, dilated=True)))
    log.debug('ink-spots trace: {} maximal balls, {} selected, {} dense'.format(len(balls), len(selection), dense))
    return InkSpotsTrace(delta, len(balls), dense, selection, uncovered,
                         np.count_nonzero(gap) * lattice.node_measure, selected_gap, selected_measure,
                         1.0 / VITALI_DILATION ** lattice.dim)
