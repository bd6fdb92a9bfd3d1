"""
Cutoff Pucci extremal operators, super/sub-solution certification and the
scaling transform v(x) = K u(x0 + r x)
"""
import logging

import numpy as np

from cusplab.errors import AlignmentError, ParameterError
from cusplab.lattice import (GridFunction, Lattice, eigenvalues_field, eigenvalues_sym, gradient_field,
                             hessian_field, interior_region_mask, interior_slices)

log = logging.getLogger('cusplab.pucci')

SANDWICH_TOLERANCE = 1e-10


class EllipticityParams(object):
    """Ellipticity constants 0 < lam <= Lam and the gradient threshold gamma >= 0"""

    def __init__(self, lam, Lam, gamma=0.0):
        lam, Lam, gamma = float(lam), float(Lam), float(gamma)
        if not (0.0 < lam <= Lam):
            raise ParameterError('ellipticity requires 0 < lambda <= Lambda, got {} and {}'.format(lam, Lam))
        if not gamma >= 0.0:
            raise ParameterError('gamma must be non-negative, got {}'.format(gamma))
        self.lam = lam
        self.Lam = Lam
        self.gamma = gamma

    @classmethod
    def from_config(cls, config):
        return cls(config.get_float('ellipticity', 'lambda_min', 1.0),
                   config.get_float('ellipticity', 'lambda_max', 1.0),
                   config.get_float('ellipticity', 'gamma', 0.0))

    def with_gamma(self, gamma):
        return EllipticityParams(self.lam, self.Lam, gamma)

    def as_dict(self):
        return {'lambda': self.lam, 'Lambda': self.Lam, 'gamma': self.gamma}

    def __eq__(self, other):
        return isinstance(other, EllipticityParams) and \
            (self.lam, self.Lam, self.gamma) == (other.lam, other.Lam, other.gamma)

    def __hash__(self):
        return hash((self.lam, self.Lam, self.gamma))

    def __repr__(self):
        return 'EllipticityParams(lam={!r}, Lam={!r}, gamma={!r})'.format(self.lam, self.Lam, self.gamma)


class OperatorValue(object):
    """Finite operator value or one of the two infinite sentinels"""
    FINITE = 'finite'
    PLUS_INFINITY = 'plusInfinity'
    MINUS_INFINITY = 'minusInfinity'

    def __init__(self, tag, value=None):
        if tag == OperatorValue.FINITE and value is None:
            raise ParameterError('finite operator value needs a value')
        self.tag = tag
        self.value = float(value) if tag == OperatorValue.FINITE else None

    @classmethod
    def finite(cls, value):
        return cls(cls.FINITE, value)

    @classmethod
    def plus_infinity(cls):
        return cls(cls.PLUS_INFINITY)

    @classmethod
    def minus_infinity(cls):
        return cls(cls.MINUS_INFINITY)

    @property
    def is_finite(self):
        return self.tag == OperatorValue.FINITE

    def at_most(self, bound):
        if self.tag == OperatorValue.PLUS_INFINITY:
            return False
        if self.tag == OperatorValue.MINUS_INFINITY:
            return True
        return self.value <= bound

    def at_least(self, bound):
        if self.tag == OperatorValue.MINUS_INFINITY:
            return False
        if self.tag == OperatorValue.PLUS_INFINITY:
            return True
        return self.value >= bound

    def __eq__(self, other):
        return isinstance(other, OperatorValue) and self.tag == other.tag and self.value == other.value

    def __repr__(self):
        if self.is_finite:
            return 'OperatorValue({!r})'.format(self.value)
        return 'OperatorValue({})'.format(self.tag)


def _trace_parts(eigs):
    eigs = np.asarray(eigs)
    return np.sum(np.maximum(eigs, 0.0), axis=-1), np.sum(np.maximum(-eigs, 0.0), axis=-1)


def m_plus(hess, grad, params):
    """Lam tr X+ - lam tr X- + Lam |p| above the threshold, plusInfinity below"""
    norm = float(np.linalg.norm(grad))
    if norm < params.gamma:
        return OperatorValue.plus_infinity()
    pos, neg = _trace_parts(eigenvalues_sym(hess))
    return OperatorValue.finite(params.Lam * pos - params.lam * neg + params.Lam * norm)


def m_minus(hess, grad, params):
    """lam tr X+ - Lam tr X- - Lam |p| above the threshold, minusInfinity below"""
    norm = float(np.linalg.norm(grad))
    if norm < params.gamma:
        return OperatorValue.minus_infinity()
    pos, neg = _trace_parts(eigenvalues_sym(hess))
    return OperatorValue.finite(params.lam * pos - params.Lam * neg - params.Lam * norm)


def guard_band(params, spacing):
    """Width of the ambiguous band above gamma; zero when there is no threshold"""
    if params.gamma <= 0.0:
        return 0.0
    return max(10.0 * spacing, 1e-8)


class OperatorField(object):
    """Vectorized M- and M+ over the margin-1 interior of a grid function"""

    def __init__(self, u, params):
        self.params = params
        grads = gradient_field(u)
        eigs = eigenvalues_field(hessian_field(u))
        pos, neg = _trace_parts(eigs)
        self.grad_norm = np.sqrt(np.sum(grads * grads, axis=-1))
        self.minus = params.lam * pos - params.Lam * neg - params.Lam * self.grad_norm
        self.plus = params.Lam * pos - params.lam * neg + params.Lam * self.grad_norm
        self.band = guard_band(params, u.lattice.spacing)
        self.active = self.grad_norm >= params.gamma + self.band
        self.guard = (self.grad_norm >= params.gamma) & ~self.active
        self.interior = interior_slices(u.lattice.dim)


class HypothesisReport(object):
    CSV_COLUMNS = ['nodes', 'active', 'maxSuperResidual', 'maxSubResidual', 'pass', 'tol']

    def __init__(self, checked_nodes, active_nodes, guard_nodes, max_super_residual, max_sub_residual, tolerance):
        self.checked_nodes = int(checked_nodes)
        self.active_nodes = int(active_nodes)
        self.guard_nodes = int(guard_nodes)
        self.max_super_residual = float(max_super_residual)
        self.max_sub_residual = float(max_sub_residual)
        self.tolerance = float(tolerance)

    @property
    def passed(self):
        return self.max_super_residual <= self.tolerance and self.max_sub_residual <= self.tolerance

    def csv_row(self):
        return dict(zip(HypothesisReport.CSV_COLUMNS,
                        [self.checked_nodes, self.active_nodes, self.max_super_residual,
                         self.max_sub_residual, self.passed, self.tolerance]))

    def __repr__(self):
        return 'HypothesisReport(nodes={}, active={}, guard={}, super={:.6g}, sub={:.6g}, pass={})'.format(
            self.checked_nodes, self.active_nodes, self.guard_nodes, self.max_super_residual,
            self.max_sub_residual, self.passed)


def _region_nodes(u, region):
    mask = interior_region_mask(u.lattice, region)
    return mask[interior_slices(u.lattice.dim)]


def _masked_max(values, mask):
    if not np.any(mask):
        return 0.0
    return float(np.max(values[mask]))


def check_supersolution(u, rhs, params, region, tol, field=None):
    """Certify M-(D2u, Du) <= rhs on the active nodes of region"""
    field = field or OperatorField(u, params)
    nodes = _region_nodes(u, region)
    active = nodes & field.active
    residual = _masked_max(np.maximum(field.minus - rhs, 0.0), active)
    return HypothesisReport(np.count_nonzero(nodes), np.count_nonzero(active),
                            np.count_nonzero(nodes & field.guard), residual, 0.0, tol)


def check_subsolution(u, rhs, params, region, tol, field=None):
    """Certify M+(D2u, Du) >= -rhs on the active nodes of region"""
    field = field or OperatorField(u, params)
    nodes = _region_nodes(u, region)
    active = nodes & field.active
    residual = _masked_max(np.maximum(-rhs - field.plus, 0.0), active)
    return HypothesisReport(np.count_nonzero(nodes), np.count_nonzero(active),
                            np.count_nonzero(nodes & field.guard), 0.0, residual, tol)


def check_two_sided(u, rhs, params, region, tol, field=None):
    field = field or OperatorField(u, params)
    nodes = _region_nodes(u, region)
    active = nodes & field.active
    return HypothesisReport(np.count_nonzero(nodes), np.count_nonzero(active),
                            np.count_nonzero(nodes & field.guard),
                            _masked_max(np.maximum(field.minus - rhs, 0.0), active),
                            _masked_max(np.maximum(-rhs - field.plus, 0.0), active), tol)


def certification_levels(u, params, region, field=None):
    """
    Smallest levels (super, sub) at which u certifies: M- <= super and
    M+ >= -sub on the active nodes of region. Both are -inf when no node is active.
    """
    field = field or OperatorField(u, params)
    nodes = _region_nodes(u, region)
    active = nodes & field.active
    if not np.any(active):
        return float('-inf'), float('-inf')
    return float(np.max(field.minus[active])), float(np.max(-field.plus[active]))


def scale_transform(u, x0, r, K, params=None, stride=1):
    """
    v(x) = K u(x0 + r x) on the lattice whose nodes map exactly onto every
    `stride`-th node of u's lattice. No interpolation is ever performed.
    """
    if not (0.0 < r <= 1.0):
        raise ParameterError('scale r must lie in (0, 1], got {}'.format(r))
    if not K >= 1.0:
        raise ParameterError('amplitude K must be >= 1, got {}'.format(K))
    stride = int(stride)
    if stride < 1:
        raise ParameterError('stride must be a positive integer')
    src = u.lattice
    anchor = src.index_of(x0)
    if anchor is None:
        raise AlignmentError('alignment required: x0={} is not a lattice node'.format(tuple(x0)))

    start = tuple(a % stride for a in anchor)
    values = K * u.values[tuple(slice(s, None, stride) for s in start)]
    if min(values.shape) < 3:
        raise AlignmentError('alignment required: stride {} leaves fewer than 3 nodes per axis'.format(stride))
    spacing = stride * src.spacing / r
    origin = [(o + s * src.spacing - x) / r for o, s, x in zip(src.origin, start, x0)]
    target = Lattice(values.shape, origin, spacing)

    gamma = params.gamma if params is not None else u.meta.get('gamma', 0.0)
    meta = {'threshold_factor': r * K, 'rhs_factor': r * r * K, 'drift_factor': r,
            'gamma': r * K * gamma, 'scale': r, 'amplitude': K, 'x0': tuple(float(c) for c in x0)}
    if params is not None:
        meta['params'] = params.with_gamma(r * K * params.gamma)
    return GridFunction(target, values, meta)


def linear_operator_sandwich(hess, grad, params, A, b):
    """True iff M-(X, p) <= tr(A X) + b.p <= M+(X, p) for the admissible pair (A, b)"""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    eigs = eigenvalues_sym(A)
    slack = SANDWICH_TOLERANCE * max(1.0, params.Lam)
    if eigs[0] < params.lam - slack or eigs[-1] > params.Lam + slack:
        raise ParameterError('coefficient matrix outside [lambda, Lambda]: eigenvalues {}'.format(eigs))
    if np.linalg.norm(b) > params.Lam + slack:
        raise ParameterError('drift |b| = {} exceeds Lambda'.format(np.linalg.norm(b)))
    if np.linalg.norm(grad) < params.gamma:
        raise ParameterError('sandwich needs |grad| >= gamma')
    value = float(np.trace(A.dot(hess)) + b.dot(grad))
    lower = m_minus(hess, grad, params).value
    upper = m_plus(hess, grad, params).value
    scale = SANDWICH_TOLERANCE * (1.0 + abs(lower) + abs(upper))
    return lower - scale <= value <= upper + scale
