"""
Uniform lattices, grid functions, discrete calculus and region geometry
"""
import math

import numpy as np

from cusplab.errors import LatticeError, ParameterError
from cusplab.utility import digest_array

SYMMETRY_TOLERANCE = 1e-12


class Lattice(object):
    """
    Uniform grid: node i sits at origin + spacing * i. Values are stored
    row-major (numpy C order).
    """

    def __init__(self, shape, origin, spacing):
        shape = tuple(int(n) for n in shape)
        origin = tuple(float(o) for o in origin)
        spacing = float(spacing)
        if len(shape) == 0 or len(origin) != len(shape):
            raise LatticeError('shape and origin must have the same positive length')
        if not (spacing > 0 and math.isfinite(spacing)):
            raise LatticeError('spacing must be a positive real, got {}'.format(spacing))
        if min(shape) < 3:
            raise LatticeError('all extents must be >= 3, got {}'.format(shape))
        self.shape = shape
        self.origin = origin
        self.spacing = spacing

    @classmethod
    def centered(cls, nodes, half_width, dim):
        """Lattice with `nodes` points per axis covering [-half_width, half_width]^dim"""
        nodes = int(nodes)
        if nodes < 3:
            raise LatticeError('all extents must be >= 3, got {}'.format(nodes))
        spacing = 2.0 * half_width / (nodes - 1)
        return cls((nodes,) * dim, (-float(half_width),) * dim, spacing)

    @property
    def dim(self):
        return len(self.shape)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def node_measure(self):
        return self.spacing ** self.dim

    def point(self, idx):
        idx = np.asarray(idx, dtype=float)
        return np.asarray(self.origin) + self.spacing * idx

    def axes(self):
        return [self.origin[k] + self.spacing * np.arange(n) for k, n in enumerate(self.shape)]

    def points(self):
        """Array of shape `shape + (dim,)` holding every node location"""
        grids = np.meshgrid(*self.axes(), indexing='ij')
        return np.stack(grids, axis=-1)

    def radii(self, center=None):
        pts = self.points()
        if center is not None:
            pts = pts - np.asarray(center, dtype=float)
        return np.sqrt(np.sum(pts * pts, axis=-1))

    def index_of(self, x, exact=True):
        """
        Multi-index of the node at location x. With exact=True the location
        must coincide with a node, otherwise None is returned.
        """
        raw = (np.asarray(x, dtype=float) - np.asarray(self.origin)) / self.spacing
        idx = np.rint(raw).astype(int)
        if exact and np.max(np.abs(raw - idx)) > 1e-9:
            return None
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.shape)):
            return None
        return tuple(int(i) for i in idx)

    def is_interior(self, idx, margin=1):
        return all(margin <= i < n - margin for i, n in zip(idx, self.shape))

    def interior_mask(self, margin=1):
        mask = np.zeros(self.shape, dtype=bool)
        mask[interior_slices(self.dim, margin)] = True
        return mask

    def __eq__(self, other):
        return (isinstance(other, Lattice) and self.shape == other.shape and
                self.origin == other.origin and self.spacing == other.spacing)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.shape, self.origin, self.spacing))

    def __repr__(self):
        return 'Lattice(shape={}, origin={}, spacing={!r})'.format(self.shape, self.origin, self.spacing)


def interior_slices(dim, margin=1):
    return tuple(slice(margin, -margin if margin else None) for _ in range(dim))


class Region(object):
    """A closed subset of R^d tested at node centers"""

    def contains(self, points):
        raise NotImplementedError()

    def mask(self, lattice):
        return self.contains(lattice.points())

    def measure(self, lattice):
        return float(np.count_nonzero(self.mask(lattice))) * lattice.node_measure


class Ball(Region):
    def __init__(self, center, radius):
        if not radius > 0:
            raise ParameterError('ball radius must be positive, got {}'.format(radius))
        self.center = tuple(float(c) for c in center)
        self.radius = float(radius)

    def contains(self, points):
        offset = np.asarray(points, dtype=float) - np.asarray(self.center)
        dist2 = np.sum(offset * offset, axis=-1)
        return dist2 <= self.radius * self.radius * (1.0 + 1e-12)

    def lebesgue_measure(self):
        d = len(self.center)
        return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * self.radius ** d

    def surface(self):
        d = len(self.center)
        return d * self.lebesgue_measure() / self.radius

    def __repr__(self):
        return 'Ball(center={}, radius={!r})'.format(self.center, self.radius)


class Annulus(Region):
    """Closed ring inner <= |x - center| <= outer"""

    def __init__(self, center, inner, outer):
        if not 0.0 <= inner < outer:
            raise ParameterError('annulus needs 0 <= inner < outer, got {} and {}'.format(inner, outer))
        self.center = tuple(float(c) for c in center)
        self.inner = float(inner)
        self.outer = float(outer)

    def contains(self, points):
        offset = np.asarray(points, dtype=float) - np.asarray(self.center)
        dist2 = np.sum(offset * offset, axis=-1)
        return (dist2 >= self.inner * self.inner * (1.0 - 1e-12)) & \
            (dist2 <= self.outer * self.outer * (1.0 + 1e-12))

    def __repr__(self):
        return 'Annulus(center={}, inner={!r}, outer={!r})'.format(self.center, self.inner, self.outer)


class Box(Region):
    def __init__(self, lo, hi):
        self.lo = tuple(float(v) for v in lo)
        self.hi = tuple(float(v) for v in hi)
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ParameterError('box corners must satisfy lo <= hi')

    def contains(self, points):
        pts = np.asarray(points, dtype=float)
        return np.all((pts >= np.asarray(self.lo)) & (pts <= np.asarray(self.hi)), axis=-1)

    def __repr__(self):
        return 'Box(lo={}, hi={})'.format(self.lo, self.hi)


def ball(radius, dim=2, center=None):
    """Ball B_radius(center), centered at the origin by default"""
    if center is None:
        center = (0.0,) * dim
    return Ball(center, radius)


class GridFunction(object):
    """
    Real values on every node of a lattice. Values are finite and read-only;
    `meta` carries provenance such as transformed thresholds.
    """

    def __init__(self, lattice, values, meta=None):
        arr = np.array(values, dtype=np.float64)
        if arr.size != lattice.size:
            raise LatticeError('values table length {} does not match lattice size {}'.format(
                arr.size, lattice.size))
        arr = arr.reshape(lattice.shape)
        if not np.all(np.isfinite(arr)):
            raise LatticeError('grid function values must be finite')
        arr.setflags(write=False)
        self.lattice = lattice
        self.values = arr
        self.meta = dict(meta or {})

    @classmethod
    def from_function(cls, lattice, func, meta=None):
        """Sample func(points) where points has shape lattice.shape + (dim,)"""
        return cls(lattice, func(lattice.points()), meta)

    def __getitem__(self, idx):
        return float(self.values[tuple(idx)])

    def with_values(self, values, **meta):
        merged = dict(self.meta)
        merged.update(meta)
        return GridFunction(self.lattice, values, merged)

    def scaled(self, factor):
        return self.with_values(self.values * factor)

    def divided(self, divisor):
        return self.with_values(self.values / divisor)

    def min_over(self, region):
        return float(np.min(self.values[region.mask(self.lattice)]))

    def max_over(self, region):
        return float(np.max(self.values[region.mask(self.lattice)]))

    def digest(self):
        lat = self.lattice
        return digest_array(self.values, lat.shape, lat.origin, lat.spacing)

    def __repr__(self):
        return 'GridFunction({}, min={:.6g}, max={:.6g})'.format(
            self.lattice, float(self.values.min()), float(self.values.max()))


def _check_node(lattice, idx, margin):
    idx = tuple(int(i) for i in idx)
    if len(idx) != lattice.dim:
        raise LatticeError('index {} does not match lattice dimension {}'.format(idx, lattice.dim))
    if not lattice.is_interior(idx, margin):
        raise LatticeError('interior required: node {} is within {} node(s) of the boundary'.format(idx, margin))
    return idx


def _shifted(idx, axis, step):
    out = list(idx)
    out[axis] += step
    return tuple(out)


def gradient(f, idx):
    """Central-difference gradient at an interior node"""
    idx = _check_node(f.lattice, idx, 1)
    h = f.lattice.spacing
    vals = f.values
    return np.array([(vals[_shifted(idx, k, 1)] - vals[_shifted(idx, k, -1)]) / (2.0 * h)
                     for k in range(f.lattice.dim)])


def hessian(f, idx):
    """Second central differences on the diagonal, 4-point cross stencil off it"""
    idx = _check_node(f.lattice, idx, 1)
    h = f.lattice.spacing
    d = f.lattice.dim
    vals = f.values
    out = np.zeros((d, d))
    centre = vals[idx]
    for k in range(d):
        out[k, k] = (vals[_shifted(idx, k, 1)] - 2.0 * centre + vals[_shifted(idx, k, -1)]) / (h * h)
        for l in range(k + 1, d):
            pp = vals[_shifted(_shifted(idx, k, 1), l, 1)]
            pm = vals[_shifted(_shifted(idx, k, 1), l, -1)]
            mp = vals[_shifted(_shifted(idx, k, -1), l, 1)]
            mm = vals[_shifted(_shifted(idx, k, -1), l, -1)]
            out[k, l] = out[l, k] = (pp - pm - mp + mm) / (4.0 * h * h)
    return 0.5 * (out + out.T)


def shift_view(values, offsets):
    """View of values shifted by `offsets`, restricted to the margin-1 interior"""
    slices = []
    for off, n in zip(offsets, values.shape):
        slices.append(slice(1 + off, n - 1 + off))
    return values[tuple(slices)]


def unit(dim, axis, step=1):
    offsets = [0] * dim
    offsets[axis] = step
    return offsets


def gradient_field(f):
    """Central-difference gradients on all margin-1 interior nodes, shape (n-2,...) + (d,)"""
    d = f.lattice.dim
    h = f.lattice.spacing
    comps = [(shift_view(f.values, unit(d, k, 1)) - shift_view(f.values, unit(d, k, -1))) / (2.0 * h)
             for k in range(d)]
    return np.stack(comps, axis=-1)


def hessian_field(f):
    """Lattice Hessians on all margin-1 interior nodes, shape (n-2,...) + (d, d)"""
    d = f.lattice.dim
    h = f.lattice.spacing
    vals = f.values
    centre = shift_view(vals, [0] * d)
    out = np.zeros(centre.shape + (d, d))
    for k in range(d):
        out[..., k, k] = (shift_view(vals, unit(d, k, 1)) - 2.0 * centre +
                          shift_view(vals, unit(d, k, -1))) / (h * h)
        for l in range(k + 1, d):
            def corner(sk, sl):
                offsets = [0] * d
                offsets[k] = sk
                offsets[l] = sl
                return shift_view(vals, offsets)
            mixed = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * h * h)
            out[..., k, l] = mixed
            out[..., l, k] = mixed
    return out


def eigenvalues_sym(m):
    """Ascending eigenvalues of a symmetric matrix"""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LatticeError('square matrix required, got shape {}'.format(m.shape))
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOLERANCE:
        raise LatticeError('symmetric matrix required')
    return np.linalg.eigvalsh(m)


def eigenvalues_field(hessians):
    """Ascending eigenvalues of a stack of (already symmetrized) lattice Hessians"""
    return np.linalg.eigvalsh(hessians)


def restrict_measure(f, pred, region):
    """h^d times the number of nodes of `region` whose value satisfies pred"""
    mask = region.mask(f.lattice) & np.asarray(pred(f.values), dtype=bool)
    return float(np.count_nonzero(mask)) * f.lattice.node_measure


def interior_region_mask(lattice, region, margin=1):
    """
    Node mask of `region`, which must keep `margin` nodes away from the
    lattice boundary and hold at least one node
    """
    mask = region.mask(lattice)
    if not np.any(mask):
        raise LatticeError('region {} is outside the lattice'.format(region))
    if np.any(mask & ~lattice.interior_mask(margin)):
        raise LatticeError('region {} is outside the lattice interior'.format(region))
    return mask
