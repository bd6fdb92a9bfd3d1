"""
Certified test functions: radial barriers |x|^-p with analytic oracles, the
scaled barrier used for doubling, a wide-stencil relaxation solver for the
uniformly elliptic problem and seeded low-gradient perturbations
"""
import itertools
import logging

import numpy as np
from scipy import ndimage

from cusplab.errors import CertificationError, ConvergenceError, ParameterError
from cusplab.lattice import Annulus, Ball, GridFunction, Lattice, interior_slices, shift_view, unit
from cusplab.pucci import OperatorField, check_subsolution, check_supersolution
from cusplab.regularize import certificate_directions, directional_second_differences
from cusplab.utility import Periodic, seeded_rng

log = logging.getLogger('cusplab.generate')

MASK_RADIUS_NODES = 4
SAFETY_FACTOR = 1.1
BISECTION_STEPS = 20


class BarrierParams(object):
    """Exponent p of b(x) = |x|^-p with lambda (p+1) - Lambda (d+1) >= 1"""

    def __init__(self, p, params, dim=2, M=1.0):
        self.p = float(p)
        self.params = params
        self.dim = int(dim)
        self.M = float(M)
        if not self.p > 0:
            raise ParameterError('barrier exponent must be positive, got {}'.format(p))
        if self.margin < 1.0:
            raise ParameterError('barrier exponent {} too small: lambda(p+1) - Lambda(d+1) = {} < 1'.format(
                self.p, self.margin))

    @property
    def margin(self):
        return self.params.lam * (self.p + 1.0) - self.params.Lam * (self.dim + 1.0)

    @classmethod
    def from_config(cls, config, params):
        return cls(config.get_float('barrier', 'exponent', 12.0), params, config.get_int('lattice', 'dim', 2))

    @classmethod
    def smallest(cls, params, dim=2):
        """Smallest integer exponent meeting the margin condition"""
        p = int(np.ceil((1.0 + params.Lam * (dim + 1.0)) / params.lam - 1.0))
        return cls(max(p, 1), params, dim)


class BarrierOracle(object):
    """Closed-form value, derivatives and M- of b(x) = |x - center|^-p"""

    def __init__(self, bp, center=None):
        self.bp = bp
        self.center = np.zeros(bp.dim) if center is None else np.asarray(center, dtype=float)

    def _offset(self, x):
        z = np.asarray(x, dtype=float) - self.center
        r = float(np.linalg.norm(z))
        if r == 0.0:
            raise ParameterError('barrier is singular at its center')
        return z, r

    def value(self, x):
        _, r = self._offset(x)
        return r ** -self.bp.p

    def gradient(self, x):
        z, r = self._offset(x)
        return -self.bp.p * r ** (-self.bp.p - 2.0) * z

    def hessian(self, x):
        z, r = self._offset(x)
        p = self.bp.p
        radial = np.outer(z, z) / (r * r)
        return p * r ** (-p - 2.0) * ((p + 2.0) * radial - np.eye(len(z)))

    def m_minus(self, x):
        """p r^(-p-2) (lambda (p+1) - Lambda (d-1) - Lambda r)"""
        _, r = self._offset(x)
        p = self.bp.p
        prm = self.bp.params
        return p * r ** (-p - 2.0) * (prm.lam * (p + 1.0) - prm.Lam * (self.bp.dim - 1.0) - prm.Lam * r)

    def lower_bound(self, x):
        _, r = self._offset(x)
        return self.bp.p * r ** (-self.bp.p - 2.0)


def barrier(bp, lattice, center=None):
    """
    Sample b(x) = |x|^-p. Nodes closer than 4h to the center are masked: they
    hold the value at radius 4h and are listed in meta['masked'].
    """
    if lattice.dim != bp.dim:
        raise ParameterError('barrier dimension {} does not match lattice {}'.format(bp.dim, lattice.dim))
    r = lattice.radii(center)
    floor = MASK_RADIUS_NODES * lattice.spacing
    masked = r < floor
    values = np.maximum(r, floor) ** -bp.p
    meta = {'generator': 'barrier', 'p': bp.p, 'mask_radius': floor, 'masked': masked,
            'center': tuple(center) if center is not None else (0.0,) * lattice.dim}
    return GridFunction(lattice, values, meta)


def _annulus(dim):
    return Annulus((0.0,) * dim, 0.25, 2.0)


def _field_region(lattice, region, floor):
    """Interior-field mask of region minus the nodes whose stencil touches the mask"""
    inner = lattice.interior_mask(1) & region.mask(lattice) & (lattice.radii() >= floor + 2.0 * lattice.spacing)
    return inner[interior_slices(lattice.dim)]


def scaled_barrier(bp, lattice, gamma=None, safety=SAFETY_FACTOR):
    """
    B(x) = M (|x|^-p - 2^-p) / (2 4^p) with the smallest M (times a safety
    factor) such that B >= 1 on B_1, |grad B| >= gamma on B_1 and on the ring
    1/4 <= |x| <= 2, and M-(D2B, DB) >= 2 on that ring, all checked on the grid
    """
    gamma = bp.params.gamma if gamma is None else float(gamma)
    d = lattice.dim
    p = bp.p
    b = barrier(bp, lattice)
    floor = b.meta['mask_radius']
    unit_values = (b.values - 2.0 ** -p) / (2.0 * 4.0 ** p)
    base = b.with_values(unit_values)

    ball1 = Ball((0.0,) * d, 1.0)
    ring = _annulus(d)
    in_b1 = ball1.mask(lattice)
    b1_field = _field_region(lattice, ball1, floor)
    ring_field = _field_region(lattice, ring, floor)
    grad_nodes = b1_field | ring_field
    if not np.any(in_b1) or not np.any(ring_field):
        raise CertificationError('grid', 'lattice does not resolve B_1 and the ring 1/4 <= |x| <= 2')

    field = OperatorField(base, bp.params.with_gamma(0.0))
    need = [1.0 / float(np.min(unit_values[in_b1]))]
    min_grad = float(np.min(field.grad_norm[grad_nodes]))
    if gamma > 0.0:
        if min_grad <= 0.0:
            raise CertificationError('gradient', 'barrier gradient vanishes on B_1')
        need.append(gamma / min_grad)
    min_sub = float(np.min(field.minus[ring_field]))
    if min_sub <= 0.0:
        raise CertificationError('subsolution', 'lattice M- of the barrier is {} on the ring'.format(min_sub))
    need.append(2.0 / min_sub)
    M = safety * max(need + [1.0])

    B = base.with_values(M * unit_values, generator='scaled_barrier', M=M)
    checks = [('B >= 1 on B_1', M * float(np.min(unit_values[in_b1])), 1.0),
              ('|grad B| >= gamma', M * min_grad, gamma),
              ('M-(D2B, DB) >= 2 on the ring', M * min_sub, 2.0)]
    for condition, value, bound in checks:
        if value < bound:
            raise CertificationError(condition, 'certified value {} below {}'.format(value, bound))
    B.meta.update({'min_b1': checks[0][1], 'min_grad': checks[1][1], 'subsolution_margin': checks[2][1],
                   'gamma': gamma})
    log.debug('scaled barrier p={} M={:.6g}'.format(p, M))
    return B


class SolveConfig(object):
    """Relaxation settings; dt defaults to the monotonicity bound h^2 / (2 Lambda d |directions|)"""

    def __init__(self, dt=None, max_iters=200000, tol=0.2, directions=None, coarse_levels=4,
                 progress_interval=5.0, dim=2):
        self.dt = None if dt is None else float(dt)
        self.max_iters = int(max_iters)
        self.tol = float(tol)
        self.dim = int(dim)
        self.directions = [tuple(v) for v in (directions or certificate_directions(dim))]
        self.coarse_levels = int(coarse_levels)
        self.progress_interval = float(progress_interval)
        if self.max_iters < 1 or not self.tol > 0:
            raise ParameterError('solver needs max_iters >= 1 and tol > 0')
        self.frames = build_frames(self.directions, dim)

    @classmethod
    def from_config(cls, config):
        return cls(max_iters=config.get_int('solver', 'max_iters', 200000),
                   tol=config.get_float('solver', 'tol', 0.2),
                   coarse_levels=config.get_int('solver', 'coarse_levels', 4),
                   progress_interval=config.get_float('solver', 'progress_interval', 5.0),
                   dim=config.get_int('lattice', 'dim', 2))

    def max_step(self, spacing, params):
        return spacing * spacing / (2.0 * params.Lam * self.dim * len(self.directions))

    def step(self, spacing, params):
        bound = self.max_step(spacing, params)
        if self.dt is None:
            return bound
        if self.dt > bound:
            raise ParameterError('dt {} violates the monotonicity bound {}'.format(self.dt, bound))
        return self.dt


def build_frames(directions, dim):
    """
    Orthogonal frames drawn from the direction family: the axes, and for every
    pair k < l the diagonals e_k +- e_l completed by the remaining axes
    """
    family = set(tuple(v) for v in directions)
    axes = [tuple(unit(dim, k)) for k in range(dim)]
    frames = []
    if all(a in family for a in axes):
        frames.append(axes)
    for k, l in itertools.combinations(range(dim), 2):
        plus = [0] * dim
        plus[k], plus[l] = 1, 1
        minus = [0] * dim
        minus[k], minus[l] = 1, -1
        frame = [tuple(plus), tuple(minus)] + [a for i, a in enumerate(axes) if i not in (k, l)]
        if all(v in family for v in frame):
            frames.append(frame)
    if not frames:
        raise ParameterError('direction family holds no orthogonal frame')
    return frames


def upwind_gradient_norm(values, spacing):
    """sqrt(sum_k max(D-_k u, -D+_k u, 0)^2) on the margin-1 interior"""
    d = values.ndim
    centre = shift_view(values, [0] * d)
    total = np.zeros(centre.shape)
    for k in range(d):
        back = (centre - shift_view(values, unit(d, k, -1))) / spacing
        fwd = (shift_view(values, unit(d, k, 1)) - centre) / spacing
        comp = np.maximum(np.maximum(back, -fwd), 0.0)
        total += comp * comp
    return np.sqrt(total)


def discrete_pucci_minus(values, spacing, params, frames):
    """
    Wide-stencil M-: minimum over frames of sum lambda (d2 u)+ - Lambda (d2 u)-
    minus Lambda times the upwind gradient norm
    """
    best = None
    for frame in frames:
        total = 0.0
        for direction in frame:
            second = directional_second_differences(values, spacing, direction)
            total = total + params.lam * np.maximum(second, 0.0) - params.Lam * np.maximum(-second, 0.0)
        best = total if best is None else np.minimum(best, total)
    return best - params.Lam * upwind_gradient_norm(values, spacing)


def pucci_update(values, rhs, params, spacing, dt, frames, mask=None):
    """One Jacobi step u <- u + dt (M-_h(u) - f) on the masked interior; returns (values, residual)"""
    inner = interior_slices(values.ndim)
    residual = discrete_pucci_minus(values, spacing, params, frames) - rhs[inner]
    if mask is not None:
        residual = np.where(mask[inner], residual, 0.0)
    out = np.array(values, dtype=float)
    out[inner] += dt * residual
    return out, residual


def _relax(values, rhs, mask, spacing, params, cfg, tol, label):
    dt = cfg.step(spacing, params)
    progress = Periodic(cfg.progress_interval)
    progress.set()
    history = []
    for iteration in range(cfg.max_iters):
        updated, residual = pucci_update(values, rhs, params, spacing, dt, cfg.frames, mask)
        worst = float(np.max(np.abs(residual))) if residual.size else 0.0
        history.append(worst)
        if worst <= tol:
            log.debug('{}: converged in {} iterations, residual {:.3g}'.format(label, iteration, worst))
            return values, history
        values = updated
        if progress.check():
            log.info('{}: iteration {} residual {:.4g}'.format(label, iteration, worst))
    raise ConvergenceError('{}: no convergence in {} iterations (residual {:.4g})'.format(
        label, cfg.max_iters, history[-1]), history)


def _coarsen(lattice):
    if any(n % 2 == 0 for n in lattice.shape) or min(lattice.shape) < 9:
        return None
    return Lattice([(n + 1) // 2 for n in lattice.shape], lattice.origin, 2.0 * lattice.spacing)


def solve_pucci(rhs, boundary, params, cfg, domain=None):
    """
    Relax M-_h(u) = f on the domain nodes with u = g elsewhere, warm-started
    from successively coarser lattices. gamma is ignored: the scheme solves the
    uniformly elliptic problem.
    """
    lattice = rhs.lattice
    if boundary.lattice != lattice:
        raise ParameterError('rhs and boundary data live on different lattices')
    params = params.with_gamma(0.0)
    mask = lattice.interior_mask(1)
    if domain is not None:
        mask &= domain.mask(lattice) if hasattr(domain, 'mask') else np.asarray(domain, dtype=bool)

    levels = [(lattice, rhs.values, boundary.values, mask)]
    for _ in range(cfg.coarse_levels):
        coarse = _coarsen(levels[-1][0])
        if coarse is None:
            break
        _, f, g, m = levels[-1]
        sub = tuple(slice(None, None, 2) for _ in range(lattice.dim))
        levels.append((coarse, f[sub], g[sub], m[sub]))

    values = None
    total = 0
    history = []
    for depth in reversed(range(len(levels))):
        level_lattice, f, g, m = levels[depth]
        if values is None:
            start = np.array(g, dtype=float)
        else:
            coords = np.indices(level_lattice.shape, dtype=float) / 2.0
            start = ndimage.map_coordinates(values, coords, order=3, mode='nearest')
            start = np.where(m, start, g)
        # coarser levels converge tighter so each prolongation starts below the next tolerance
        label = 'solve level {} ({} nodes)'.format(depth, level_lattice.shape)
        values, history = _relax(start, f, m, level_lattice.spacing, params, cfg, cfg.tol * 0.5 ** depth, label)
        total += len(history)

    meta = {'generator': 'solve_pucci', 'residual': history[-1], 'iterations': total}
    return GridFunction(lattice, values, meta)


def bump(lattice, centre, width):
    """(1 - |x - c|^2 / w^2)^4 clipped at zero"""
    r = lattice.radii(centre)
    return np.maximum(1.0 - (r / width) ** 2, 0.0) ** 4


def perturb_low_gradient(u, params, budget, seed, level, region, tol=1e-9, bumps=4, width=None):
    """
    Add eta * (sum of seeded bumps centred where |grad u| < gamma/2) with the
    largest eta in [0, budget] for which u stays certified at `level` on region
    """
    lattice = u.lattice
    width = width or 6.0 * lattice.spacing
    field = OperatorField(u, params)
    candidates = np.zeros(lattice.shape, dtype=bool)
    candidates[interior_slices(lattice.dim)] = field.grad_norm < 0.5 * params.gamma
    candidates &= region.mask(lattice)
    nodes = np.argwhere(candidates)
    if params.gamma <= 0.0 or len(nodes) == 0:
        return u.with_values(u.values, eta=0.0, bumps=())

    rng = seeded_rng(seed, 0x70657274)
    picks = rng.choice(len(nodes), size=min(bumps, len(nodes)), replace=False)
    centres = [tuple(lattice.point(nodes[i])) for i in sorted(picks)]
    psi = sum(bump(lattice, c, width) for c in centres)

    def certified(eta):
        candidate = u.with_values(u.values + eta * psi)
        perturbed_field = OperatorField(candidate, params)
        return check_supersolution(candidate, level, params, region, tol, perturbed_field).passed and \
            check_subsolution(candidate, level, params, region, tol, perturbed_field).passed

    if certified(budget):
        eta = budget
    else:
        lo, hi = 0.0, budget
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if certified(mid):
                lo = mid
            else:
                hi = mid
        eta = lo
    log.debug('perturbation eta={:.4g} at {} bumps'.format(eta, len(centres)))
    return u.with_values(u.values + eta * psi, eta=eta, bumps=tuple(centres))
