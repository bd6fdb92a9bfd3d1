"""
Cusp sliding: for every vertex x of U = {u > M} in the vertex region, find the
node y minimising u(z) - phi(z - x) with phi(z) = -A |z|^s, collect the contact
set and measure the contact map x = m(y).
"""
import logging
import math

import numpy as np

from cusplab.errors import ParameterError, SeparationError
from cusplab.lattice import Ball, gradient, hessian
from cusplab.regularize import certificate_directions
from cusplab.utility import Periodic

log = logging.getLogger('cusplab.contact')

DEFAULT_CUSP_CONSTANT = 2.0 + 5.0 * math.sqrt(2.0)

BOUNDARY_CONTACT = 'boundary contact'
ZERO_SEPARATION = 'zero separation'

SLIDE_CHUNK = 64
PROGRESS_INTERVAL = 5.0


class CuspParams(object):
    """phi(z) = -amplitude |z|^exponent together with the level constant M"""

    def __init__(self, amplitude=10.0, exponent=0.5, M=None):
        if not amplitude > 0:
            raise ParameterError('cusp amplitude must be positive, got {}'.format(amplitude))
        if not 0.0 < exponent < 1.0:
            raise ParameterError('cusp exponent must lie in (0, 1), got {}'.format(exponent))
        self.amplitude = float(amplitude)
        self.exponent = float(exponent)
        self.M = DEFAULT_CUSP_CONSTANT if M is None else float(M)

    @classmethod
    def from_config(cls, config):
        return cls(config.get_float('cusp', 'amplitude', 10.0),
                   config.get_float('cusp', 'exponent', 0.5),
                   config.get_float('cusp', 'threshold', None))

    flags_zero_separation = True

    def profile(self, dist):
        """phi as a function of |z|"""
        return -self.amplitude * np.power(dist, self.exponent)

    def radial_slope(self, dist):
        return -self.amplitude * self.exponent * np.power(dist, self.exponent - 1.0)

    def radial_curvature(self, dist):
        return -self.amplitude * self.exponent * (self.exponent - 1.0) * np.power(dist, self.exponent - 2.0)

    def gradient(self, z):
        z = np.asarray(z, dtype=float)
        dist = float(np.linalg.norm(z))
        return self.radial_slope(dist) * z / dist

    def hessian(self, z):
        """phi'' zz^T + (phi'/r)(I - zz^T) with z the unit direction"""
        z = np.asarray(z, dtype=float)
        dist = float(np.linalg.norm(z))
        unit = z / dist
        radial = np.outer(unit, unit)
        return self.radial_curvature(dist) * radial + \
            self.radial_slope(dist) / dist * (np.eye(len(z)) - radial)

    def offset_from_gradient(self, g):
        """The unique z with grad phi(z) = g"""
        g = np.asarray(g, dtype=float)
        norm = float(np.linalg.norm(g))
        dist = (norm / (self.amplitude * self.exponent)) ** (1.0 / (self.exponent - 1.0))
        return -dist * g / norm

    def __repr__(self):
        return 'CuspParams(amplitude={!r}, exponent={!r}, M={!r})'.format(self.amplitude, self.exponent, self.M)


class ParaboloidParams(object):
    """phi(z) = -opening |z|^2 / 2; contact at the vertex itself is legitimate"""
    flags_zero_separation = False

    def __init__(self, opening):
        if not opening > 0:
            raise ParameterError('paraboloid opening must be positive, got {}'.format(opening))
        self.opening = float(opening)

    def profile(self, dist):
        return -0.5 * self.opening * np.asarray(dist) ** 2

    def gradient(self, z):
        return -self.opening * np.asarray(z, dtype=float)

    def hessian(self, z):
        return -self.opening * np.eye(len(z))


class ContactRecord(object):
    CSV_COLUMNS = ['x', 'y', 'q', 'gradNorm', 'separation', 'jacobianNorm', 'flags']

    def __init__(self, vertex, contact, q_value, grad_at_y, separation, flags=()):
        self.vertex = tuple(int(i) for i in vertex)
        self.contact = tuple(int(i) for i in contact)
        self.q_value = float(q_value)
        self.grad_at_y = grad_at_y
        self.separation = float(separation)
        self.jacobian_norm = None
        self.flags = tuple(flags)

    @property
    def valid(self):
        return not self.flags

    def csv_row(self):
        grad_norm = float(np.linalg.norm(self.grad_at_y)) if self.grad_at_y is not None else None
        return {'x': self.vertex, 'y': self.contact, 'q': self.q_value, 'gradNorm': grad_norm,
                'separation': self.separation, 'jacobianNorm': self.jacobian_norm,
                'flags': ';'.join(self.flags)}

    def __repr__(self):
        return 'ContactRecord(x={}, y={}, q={:.6g}, sep={:.4g}, flags={})'.format(
            self.vertex, self.contact, self.q_value, self.separation, self.flags)


class Slider(object):
    """
    Exhaustive sliding of a profile beneath u over the nodes of a search region.
    Search nodes are kept in row-major order so the first minimum found is the
    lexicographically smallest node.
    """

    def __init__(self, u, profile, search):
        self.u = u
        self.profile = profile
        lattice = u.lattice
        self.search_mask = search.mask(lattice)
        if not np.any(self.search_mask):
            raise ParameterError('search region {} holds no lattice node'.format(search))
        self.nodes = np.argwhere(self.search_mask)
        self.points = lattice.points()[self.search_mask]
        self.values = u.values[self.search_mask]
        self.progress = Periodic(PROGRESS_INTERVAL)

    def costs(self, vertices):
        """u(z) - phi(z - x) for a batch of vertex locations, one row per vertex"""
        offsets = self.points[None, :, :] - np.asarray(vertices, dtype=float)[:, None, :]
        dist = np.sqrt(np.sum(offsets * offsets, axis=-1))
        return self.values[None, :] - self.profile.profile(dist)

    def slide_many(self, vertex_indices):
        lattice = self.u.lattice
        vertex_indices = [tuple(v) for v in vertex_indices]
        records = []
        self.progress.set()
        for start in range(0, len(vertex_indices), SLIDE_CHUNK):
            chunk = vertex_indices[start:start + SLIDE_CHUNK]
            locations = np.array([lattice.point(v) for v in chunk])
            cost = self.costs(locations)
            best = np.argmin(cost, axis=1)
            for row, vertex in enumerate(chunk):
                records.append(self._record(vertex, self.nodes[best[row]], cost[row, best[row]]))
            if self.progress.check():
                log.info('slid {} of {} vertices'.format(len(records), len(vertex_indices)))
        return records

    def _record(self, vertex, contact, q_value):
        lattice = self.u.lattice
        contact = tuple(int(i) for i in contact)
        flags = []
        if not self._stencil_inside(contact):
            flags.append(BOUNDARY_CONTACT)
        separation = float(np.linalg.norm(np.subtract(contact, vertex))) * lattice.spacing
        if separation == 0.0 and self.profile.flags_zero_separation:
            flags.append(ZERO_SEPARATION)
        grad = gradient(self.u, contact) if lattice.is_interior(contact, 1) else None
        return ContactRecord(vertex, contact, q_value, grad, separation, flags)

    def _stencil_inside(self, idx):
        lattice = self.u.lattice
        if not lattice.is_interior(idx, 1):
            return False
        for k in range(lattice.dim):
            for step in (1, -1):
                neighbour = list(idx)
                neighbour[k] += step
                if not self.search_mask[tuple(neighbour)]:
                    return False
        return True


def _require_nonnegative(u, search):
    mask = search.mask(u.lattice)
    if np.any(u.values[mask] < 0.0):
        raise ParameterError('u must be non-negative on the search region')


def slide_cusp(u, vertex, cusp, search):
    """Exhaustive discrete argmin of u(z) - phi(z - x) over the search nodes"""
    if not u.lattice.is_interior(vertex, 1):
        raise ParameterError('vertex {} must be an interior node'.format(tuple(vertex)))
    _require_nonnegative(u, search)
    return Slider(u, cusp, search).slide_many([vertex])[0]


def slide_paraboloid(u, vertex, opening, search):
    """Same contract as slide_cusp with phi(z) = -opening |z|^2 / 2"""
    if not u.lattice.is_interior(vertex, 1):
        raise ParameterError('vertex {} must be an interior node'.format(tuple(vertex)))
    _require_nonnegative(u, search)
    return Slider(u, ParaboloidParams(opening), search).slide_many([vertex])[0]


def contact_map_jacobian(u, rec, cusp):
    """Operator norm of Dm(y) = I - (D2 phi(y - x))^-1 D2 u(y); stored on the record"""
    h = u.lattice.spacing
    if rec.separation < 3.0 * h:
        raise SeparationError('singular separation: |y - x| = {} < 3h'.format(rec.separation))
    z = u.lattice.point(rec.contact) - u.lattice.point(rec.vertex)
    dm = np.eye(u.lattice.dim) - np.linalg.solve(cusp.hessian(z), hessian(u, rec.contact))
    rec.jacobian_norm = float(np.linalg.norm(dm, 2))
    return rec.jacobian_norm


def hessian_domination(u, rec, cusp):
    """
    Smallest directional second difference of w(z) = u(z) - phi(z - x) at the
    contact node; non-negative whenever y is an interior discrete minimum
    """
    lattice = u.lattice
    h = lattice.spacing
    x = lattice.point(rec.vertex)
    worst = np.inf
    for direction in certificate_directions(lattice.dim):
        vals = []
        for sign in (1, 0, -1):
            idx = tuple(c + sign * s for c, s in zip(rec.contact, direction))
            dist = float(np.linalg.norm(lattice.point(idx) - x))
            vals.append(u.values[idx] - float(cusp.profile(dist)))
        norm2 = float(sum(s * s for s in direction))
        worst = min(worst, (vals[0] + vals[2] - 2.0 * vals[1]) / (norm2 * h * h))
    return worst


def analytic_hessian_gap(u, rec, cusp):
    """Smallest eigenvalue of D2u(y) - D2phi(y - x) with the lattice Hessian of u"""
    z = u.lattice.point(rec.contact) - u.lattice.point(rec.vertex)
    return float(np.linalg.eigvalsh(hessian(u, rec.contact) - cusp.hessian(z))[0])


def cancellation_ratio(u, rec, cusp):
    """|(D2 phi)^-1| |D2 phi - D2 u| at the contact"""
    z = u.lattice.point(rec.contact) - u.lattice.point(rec.vertex)
    hphi = cusp.hessian(z)
    return float(np.linalg.norm(np.linalg.inv(hphi), 2) * np.linalg.norm(hphi - hessian(u, rec.contact), 2))


def recovered_vertex_error(u, rec, cusp):
    """
    |x - (y - (grad phi)^-1(grad u(y)))|: how far the vertex read back from the
    contact gradient lands from the true vertex. A vanishing gradient recovers
    nothing and counts as infinitely far.
    """
    g = rec.grad_at_y
    if g is None or float(np.linalg.norm(g)) == 0.0:
        return math.inf
    recovered = u.lattice.point(rec.contact) - cusp.offset_from_gradient(g)
    return float(np.linalg.norm(recovered - u.lattice.point(rec.vertex)))


class ContactSet(object):
    def __init__(self, records, lattice, u_measure, cusp):
        self.records = records
        self.lattice = lattice
        self.cusp = cusp
        self.u_measure = float(u_measure)
        valid_nodes = set(r.contact for r in records if r.valid)
        self.t_measure = len(valid_nodes) * lattice.node_measure
        self.jacobian_bound_observed = 0.0
        self.level_violations = 0
        self.q_violations = 0
        self.shared_contacts = 0
        self.injectivity_error = 0.0
        self.injectivity_violations = 0
        self.gradient_match_constant = 0.0
        self.min_hessian_gap = np.inf
        self.min_analytic_gap = np.inf
        self.max_cancellation = 0.0
        self.max_gradient_lipschitz = 0.0

    @property
    def valid_records(self):
        return [r for r in self.records if r.valid]

    @property
    def flagged(self):
        return sum(1 for r in self.records if not r.valid)

    def measure_comparison(self, slack_factor=4.0):
        """|U| <= C^d |T| + slack * |dB_{1/4}| h^(d-1) with C the largest observed |Dm|"""
        d = self.lattice.dim
        h = self.lattice.spacing
        surface = Ball((0.0,) * d, 0.25).surface()
        rhs = self.jacobian_bound_observed ** d * self.t_measure + slack_factor * surface * h ** (d - 1)
        return self.u_measure <= rhs, rhs

    def csv_rows(self):
        return [r.csv_row() for r in self.records]


def build_contact_set(u, cusp, vertex_region=None, search_region=None, threshold=None, tol=1e-9):
    """
    Slide a profile from every node of U = {u > M} in the vertex region and
    collect the contact records with their invariant diagnostics
    """
    lattice = u.lattice
    d = lattice.dim
    h = lattice.spacing
    vertex_region = vertex_region or Ball((0.0,) * d, 0.25)
    search_region = search_region or Ball((0.0,) * d, 1.0)
    M = getattr(cusp, 'M', None) if threshold is None else threshold
    if M is None:
        raise ParameterError('no level threshold for {!r}: pass threshold=M'.format(cusp))
    _require_nonnegative(u, search_region)

    vertex_mask = vertex_region.mask(lattice) & (u.values > M) & lattice.interior_mask(1)
    vertices = [tuple(v) for v in np.argwhere(vertex_mask)]
    u_measure = len(vertices) * lattice.node_measure
    if not vertices:
        return ContactSet([], lattice, 0.0, cusp)

    slider = Slider(u, cusp, search_region)
    records = slider.slide_many(vertices)
    result = ContactSet(records, lattice, u_measure, cusp)

    by_contact = {}
    for rec in result.valid_records:
        by_contact.setdefault(rec.contact, []).append(rec)
        if u.values[rec.contact] > M - 1.0 + tol:
            result.level_violations += 1
        if hasattr(cusp, 'amplitude') and rec.q_value > 1.0 + 5.0 * math.sqrt(2.0) + tol:
            result.q_violations += 1
        result.min_hessian_gap = min(result.min_hessian_gap, hessian_domination(u, rec, cusp))
    result.shared_contacts = sum(len(group) - 1 for group in by_contact.values())

    if isinstance(cusp, CuspParams):
        _cusp_diagnostics(u, result, cusp)
    return result


def _cusp_diagnostics(u, result, cusp):
    lattice = u.lattice
    h = lattice.spacing
    for rec in result.valid_records:
        if rec.separation < 3.0 * h or not lattice.is_interior(rec.contact, 1):
            continue
        x = lattice.point(rec.vertex)
        y = lattice.point(rec.contact)
        result.jacobian_bound_observed = max(result.jacobian_bound_observed, contact_map_jacobian(u, rec, cusp))
        result.min_analytic_gap = min(result.min_analytic_gap, analytic_hessian_gap(u, rec, cusp))
        result.max_cancellation = max(result.max_cancellation, cancellation_ratio(u, rec, cusp))

        mismatch = float(np.linalg.norm(rec.grad_at_y - cusp.gradient(y - x)))
        result.gradient_match_constant = max(result.gradient_match_constant, mismatch / math.sqrt(h))

        error = recovered_vertex_error(u, rec, cusp)
        result.injectivity_error = max(result.injectivity_error, error)
        if error > 2.0 * h:
            result.injectivity_violations += 1
