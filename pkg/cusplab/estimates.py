"""
Pure estimate computations shared by the experiment runners: survival
curves, dyadic oscillation, Harnack ratios, the sliding diagnostic of the
Harnack argument and the reference constants of the chain of estimates
"""
import math

import numpy as np

from cusplab.covering import VITALI_DILATION
from cusplab.errors import ParameterError
from cusplab.lattice import ball


def ball_fraction(u, level, radius):
    """|{u > level} n B_radius| / |B_radius| counted in nodes"""
    mask = ball(radius, u.lattice.dim).mask(u.lattice)
    total = np.count_nonzero(mask)
    if total == 0:
        raise ParameterError('ball of radius {} holds no lattice node'.format(radius))
    return np.count_nonzero(mask & (u.values > level)) / float(total)


def lepsilon_constants(delta, M, dim):
    """
    Reference constants of the L-epsilon chain: c = 5^-d, epsilon from
    -epsilon = log(1 - c delta) / log M, C~ = (1 - delta)|B_1| / (1 - c delta),
    and tau with C~ tau^-epsilon = |B_1| / 2, kept in log space since tau
    overflows for any realistic delta
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError('delta must lie in (0, 1), got {}'.format(delta))
    if not M > 1.0:
        raise ParameterError('M must exceed 1, got {}'.format(M))
    c = 1.0 / VITALI_DILATION ** dim
    unit = ball(1.0, dim).lebesgue_measure()
    epsilon = -math.log1p(-c * delta) / math.log(M)
    c_tilde = (1.0 - delta) * unit / (1.0 - c * delta)
    log_tau = math.log(2.0 * (1.0 - delta) / (1.0 - c * delta)) / epsilon
    return {'c': c, 'epsilon': epsilon, 'C': c_tilde, 'log_tau': log_tau, 'epsilon1': math.exp(-log_tau)}


def holder_exponent(epsilon1):
    """alpha with 2^(alpha + 1) = 2 + epsilon1"""
    return math.log2(1.0 + 0.5 * epsilon1)


def holder_scale(gamma, c0, epsilon0, epsilon1):
    """rho = min(1, epsilon0 epsilon1 C0 (1 + 1/epsilon1) / gamma) rounded down to a power of two"""
    if gamma <= 0.0:
        return 1.0
    rho = min(1.0, epsilon0 * epsilon1 * c0 * (1.0 + 1.0 / epsilon1) / gamma)
    return 2.0 ** math.floor(math.log2(rho))


def survival_curve(u, M, levels, radius=1.0):
    """[(k, M^k, |{u > M^k} n B_radius|)] for k = 0..levels"""
    mask = ball(radius, u.lattice.dim).mask(u.lattice)
    return [(k, M ** k, np.count_nonzero(mask & (u.values > M ** k)) * u.lattice.node_measure)
            for k in range(levels + 1)]


def fit_decay_slope(curve, floor):
    """Least-squares slope of log max(measure, floor) against log t"""
    if len(curve) < 2:
        raise ParameterError('slope fit needs at least two levels')
    logs_t = np.log([t for _, t, _ in curve])
    logs_m = np.log([max(m, floor) for _, _, m in curve])
    return float(np.polyfit(logs_t, logs_m, 1)[0])


def lebesgue_power_integral(u, epsilon, radius=1.0):
    """Integral of u^epsilon over B_radius (u >= 0 there)"""
    mask = ball(radius, u.lattice.dim).mask(u.lattice)
    return float(np.sum(np.maximum(u.values[mask], 0.0) ** epsilon) * u.lattice.node_measure)


class HolderIteration(object):
    def __init__(self, k, a, b, alpha, epsilon1, above_fraction=None):
        self.k = k
        self.a = a
        self.b = b
        self.m = 0.5 * (a + b)
        self.alpha = alpha
        self.epsilon1 = epsilon1
        self.above_fraction = above_fraction

    @property
    def oscillation(self):
        return self.b - self.a

    @property
    def alternative(self):
        """'first' when {v > m_k} fills at least half of the next ball; ties go to the first case"""
        if self.above_fraction is None:
            return None
        return 'first' if self.above_fraction >= 0.5 else 'second'

    def __repr__(self):
        return 'HolderIteration(k={}, a={:.6g}, b={:.6g}, alternative={})'.format(
            self.k, self.a, self.b, self.alternative)


def resolution_depth(lattice):
    """Largest k with 2^-k >= 8h"""
    k = 0
    while 2.0 ** -(k + 1) >= 8.0 * lattice.spacing:
        k += 1
    return k


def dyadic_oscillation(v, depth, alpha, epsilon1):
    """a_k, b_k on B_(2^-k) for k = 0..depth with the alternative fired at each k < depth"""
    out = []
    for k in range(depth + 1):
        mask = ball(2.0 ** -k, v.lattice.dim).mask(v.lattice)
        values = v.values[mask]
        a, b = float(values.min()), float(values.max())
        above = None
        if k < depth:
            above = ball_fraction(v, 0.5 * (a + b), 2.0 ** -(k + 1))
        out.append(HolderIteration(k, a, b, alpha, epsilon1, above))
    return out


def decay_factor(iterations):
    """(osc_K / osc_0)^(1/K); a constant function decays with factor 0"""
    first, last = iterations[0], iterations[-1]
    if first.oscillation <= 0.0:
        return 0.0
    return (last.oscillation / first.oscillation) ** (1.0 / last.k)


def holder_seminorm(v, alpha, radius=1.0):
    """sup over nodes 0 < |x| <= radius of |v(x) - v(0)| / |x|^alpha"""
    lattice = v.lattice
    centre = lattice.index_of((0.0,) * lattice.dim)
    if centre is None:
        raise ParameterError('the origin is not a lattice node')
    r = lattice.radii()
    mask = ball(radius, lattice.dim).mask(lattice) & (r > 0.0)
    return float(np.max(np.abs(v.values[mask] - v.values[centre]) / r[mask] ** alpha))


def harnack_ratio(u, c0, radius=0.5):
    """sup_B u / (inf_B u + C0) on B_radius"""
    region = ball(radius, u.lattice.dim)
    return u.max_over(region) / (u.min_over(region) + c0)


class HarnackDiagnostic(object):
    CSV_COLUMNS = ['tStar', 'x0', 'r', 'H0', 'beta', 'mu', 'dominates']

    def __init__(self, log_t, x0, r, log_h0, beta, mu=None, dominates=True):
        self.log_t = log_t
        self.x0 = x0
        self.r = r
        self.log_h0 = log_h0
        self.beta = beta
        self.mu = mu
        self.dominates = dominates

    @property
    def t_star(self):
        return 0.0 if self.log_t == -np.inf else math.exp(self.log_t)

    @property
    def h0(self):
        return 0.0 if self.log_h0 == -np.inf else math.exp(self.log_h0)

    def csv_row(self):
        return {'tStar': self.t_star, 'x0': self.x0, 'r': self.r, 'H0': self.h0, 'beta': self.beta,
                'mu': self.mu, 'dominates': self.dominates}

    def __repr__(self):
        return 'HarnackDiagnostic(log t*={:.6g}, x0={}, r={:.4g}, beta={:.4g})'.format(
            self.log_t, self.x0, self.r, self.beta)


def harnack_slide_diagnostic(u, beta, tol=1e-9, mu=None):
    """
    Smallest t with t (3/4 - |x|)^-beta >= u on the nodes of B_3/4, its
    touching node x0 (first in row-major order), r = (3/4 - |x0|)/2 and
    H0 = t (2r)^-beta. Computed in log space: beta is large in practice.
    """
    lattice = u.lattice
    r = lattice.radii()
    inside = r < 0.75
    if np.any(u.values[inside] < 0.0):
        raise ParameterError('sliding diagnostic needs u >= 0 on B_3/4')
    with np.errstate(divide='ignore'):
        log_u = np.where(inside, np.log(np.where(inside, u.values, 1.0)), -np.inf)
        log_dist = np.log(np.where(inside, 0.75 - r, 1.0))
    scores = np.where(inside, log_u + beta * log_dist, -np.inf)
    flat = int(np.argmax(scores))
    x0 = tuple(int(i) for i in np.unravel_index(flat, lattice.shape))
    log_t = float(scores.ravel()[flat])
    if log_t == -np.inf:
        centre = lattice.index_of((0.0,) * lattice.dim, exact=False)
        x0 = tuple(int(i) for i in centre) if centre is not None else x0
        return HarnackDiagnostic(-np.inf, x0, 0.5 * (0.75 - float(r[x0])), -np.inf, beta, mu, True)

    radius = 0.5 * (0.75 - float(r[x0]))
    log_h0 = log_t - beta * math.log(2.0 * radius)
    with np.errstate(over='ignore'):
        h = np.exp(log_t - beta * log_dist)
    dominates = bool(np.all(h[inside] >= u.values[inside] - tol * np.maximum(1.0, u.values[inside])))
    return HarnackDiagnostic(log_t, x0, radius, log_h0, beta, mu, dominates)


class MuBetaFeasibility(object):
    """The four inequalities closing the Harnack iteration for one (mu, beta)"""
    NAMES = ('growth', 'curvature', 'threshold', 'integrability')

    def __init__(self, mu, beta, K, checks, recipe):
        self.mu = mu
        self.beta = beta
        self.K = K
        self.checks = checks
        self.recipe = recipe

    @property
    def feasible(self):
        return all(self.checks)

    def as_dict(self):
        out = {'mu': self.mu, 'beta': self.beta, 'K': self.K, 'feasible': self.feasible}
        out.update(dict(zip(MuBetaFeasibility.NAMES, self.checks)))
        return out

    def __repr__(self):
        return 'MuBetaFeasibility(mu={:.4g}, beta={:.4g}, feasible={})'.format(self.mu, self.beta, self.feasible)


def _growth(mu, beta):
    """(1 - mu/2)^-beta - 1"""
    try:
        return math.expm1(-beta * math.log1p(-0.5 * mu))
    except OverflowError:
        return math.inf


def mu_beta_feasibility(M, epsilon0, epsilon, dim, gamma, r=0.375, max_power=200):
    """
    beta = max(d, gamma) / epsilon, then scan mu = 2^-j for the first mu with
    M K <= 1/2, (mu r)^2 / K <= 1, mu r gamma / K <= epsilon0 and
    beta >= d / epsilon, where K = (1 - mu/2)^-beta - 1. Returns the last
    candidate tried when none is feasible.
    """
    if not (M > 0 and epsilon > 0 and epsilon0 > 0):
        raise ParameterError('feasibility needs positive M, epsilon and epsilon0')
    beta = max(dim, gamma) / epsilon
    result = None
    for j in range(1, max_power + 1):
        mu = 2.0 ** -j
        K = _growth(mu, beta)
        if K <= 0.0:
            break
        checks = (M * K <= 0.5,
                  (mu * r) ** 2 / K <= 1.0,
                  mu * r * gamma / K <= epsilon0,
                  beta >= dim / epsilon)
        recipe = (mu <= (gamma / epsilon0 if gamma > 0 else math.inf),
                  math.log1p(mu * gamma / epsilon) / -math.log1p(-0.5 * mu) <= max(gamma, dim) / epsilon,
                  K <= 1.0 / (2.0 * M))
        result = MuBetaFeasibility(mu, beta, K, checks, recipe)
        if result.feasible:
            break
    return result
