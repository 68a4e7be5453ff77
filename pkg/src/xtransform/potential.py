"""Bounded densities in R^n and their normalized kernel integrals.

All integrals carry the normalization ``J(h) = (n / omega_n) int h``, where
``omega_n`` is the area of the unit sphere, so a unit-weight ball of radius r
has ``J(1) = r**n``.  Kernels are translated so the singularity sits at the
base point; with ``u = zeta - x``:

====== ==========================
f      ``|u|**(2-n)`` (1 if n=2)
g      ``|u|**(-n)``
phi    ``u_1 |u|**(-n)``
g_inv  ``|u|**(-(n+2))``
phi_inv ``u_1 |u|**(-(n+2))``
====== ==========================

``g_inv``/``phi_inv`` are the images of ``f``/``phi`` under the inversion
``u -> u/|u|**2`` (with its Jacobian ``|u|**(-2n)``), which gives closed forms
for balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .profile import m_n, t_n


class SupportError(ValueError):
    """The evaluation point lies in (or on) the support of the density."""


class DensityError(ValueError):
    """Invalid density data."""


class Kernel(str, Enum):
    F = "f"
    G = "g"
    PHI = "phi"
    G_INV = "g_inv"
    PHI_INV = "phi_inv"


KernelKind = Kernel


def sphere_area(n: int) -> float:
    """``omega_n``, the (n-1)-dimensional measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def normalization(n: int) -> float:
    return n / sphere_area(n)


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise DensityError(f"ball radius must be positive, got {self.radius}")
        if not 0.0 <= self.weight <= 1.0:
            raise DensityError(f"ball weight must lie in [0, 1], got {self.weight}")

    @property
    def c(self) -> np.ndarray:
        return np.array(self.center)


@dataclass(frozen=True)
class Grid:
    """Cell-centred samples: ``values[i, j, ...]`` is the density on the cell
    ``origin + spacing * ([i, i+1) x [j, j+1) x ...)``."""

    origin: tuple
    spacing: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))
        if not self.spacing > 0:
            raise DensityError("grid spacing must be positive")
        if vals.ndim != len(self.origin):
            raise DensityError(f"grid values have {vals.ndim} axes but origin has {len(self.origin)}")
        if vals.size and (vals.min() < 0.0 or vals.max() > 1.0 or not np.all(np.isfinite(vals))):
            raise DensityError("grid values must lie in [0, 1]")

    def cells(self):
        """Centres and values of the nonzero cells."""
        idx = np.argwhere(self.values > 0)
        centers = np.array(self.origin) + (idx + 0.5) * self.spacing
        return centers, self.values[tuple(idx.T)]


@dataclass(frozen=True)
class Density:
    """A density ``0 <= rho <= 1`` built from weighted balls and/or a grid."""

    dim: int
    balls: tuple = ()
    grid: Grid | None = None

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))
        if self.dim < 2:
            raise DensityError("dimension must be at least 2")
        for b in self.balls:
            if len(b.center) != self.dim:
                raise DensityError(f"ball center {b.center} is not in R^{self.dim}")
        if self.grid is not None and len(self.grid.origin) != self.dim:
            raise DensityError("grid dimension does not match density dimension")

    # -- constructors ------------------------------------------------------

    @classmethod
    def ball(cls, center, radius, weight=1.0) -> Density:
        return cls(len(center), (Ball(center, radius, weight),))

    @classmethod
    def empty(cls, dim: int) -> Density:
        return cls(dim)

    @classmethod
    def from_dict(cls, data: dict) -> Density:
        dim = int(data["dim"])
        balls = tuple(Ball(b["center"], b["radius"], b.get("weight", 1.0)) for b in data.get("balls", []))
        grid = None
        if data.get("grid"):
            g = data["grid"]
            grid = Grid(g["origin"], g["spacing"], np.array(g["values"], dtype=float))
        return cls(dim, balls, grid)

    def to_dict(self) -> dict:
        out = {"dim": self.dim,
               "balls": [{"center": list(b.center), "radius": b.radius, "weight": b.weight}
                         for b in self.balls]}
        if self.grid is not None:
            out["grid"] = {"origin": list(self.grid.origin), "spacing": self.grid.spacing,
                           "values": self.grid.values.tolist()}
        return out

    # -- queries -----------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        no_balls = all(b.weight == 0 for b in self.balls)
        return no_balls and (self.grid is None or not np.any(self.grid.values > 0))

    def value(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(len(pts))
        for b in self.balls:
            out += b.weight * (np.sum((pts - b.c) ** 2, axis=1) < b.radius**2)
        if self.grid is not None:
            g = self.grid
            idx = np.floor((pts - np.array(g.origin)) / g.spacing).astype(int)
            inside = np.all((idx >= 0) & (idx < np.array(g.values.shape)), axis=1)
            out[inside] += g.values[tuple(idx[inside].T)]
        return out

    def support_distance(self, x) -> float:
        """Distance from ``x`` to the support; zero or negative means inside."""
        x = np.asarray(x, dtype=float)
        best = math.inf
        for b in self.balls:
            if b.weight > 0:
                best = min(best, float(np.linalg.norm(x - b.c)) - b.radius)
        if self.grid is not None:
            centers, _ = self.grid.cells()
            if len(centers):
                half = self.grid.spacing / 2.0
                gap = np.maximum(np.abs(centers - x) - half, 0.0)
                best = min(best, float(np.sqrt(np.min(np.sum(gap**2, axis=1)))))
        return best

    def bounding_sphere(self) -> tuple[np.ndarray, float]:
        """Centroid of the support pieces and a radius enclosing the support."""
        pieces, radii = [], []
        for b in self.balls:
            if b.weight > 0:
                pieces.append(b.c)
                radii.append(b.radius)
        if self.grid is not None:
            centers, _ = self.grid.cells()
            half_diag = self.grid.spacing * math.sqrt(self.dim) / 2.0
            pieces.extend(centers)
            radii.extend([half_diag] * len(centers))
        if not pieces:
            return np.zeros(self.dim), 0.0
        pts = np.array(pieces)
        centroid = pts.mean(axis=0)
        radius = float(np.max(np.linalg.norm(pts - centroid, axis=1) + np.array(radii)))
        return centroid, radius

    def check_overlaps(self, samples: int = 2000, seed: int = 0) -> float:
        """Largest sampled density value over the ball union; raises above 1."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for b in self.balls:
            pts = b.c + b.radius * _uniform_ball(rng, samples, self.dim)
            worst = max(worst, float(self.value(pts).max()))
        if worst > 1.0 + 1e-12:
            raise DensityError(f"overlapping weights reach {worst:.6f} > 1")
        return worst

    # -- transformations ---------------------------------------------------

    def _map_balls(self, fn) -> tuple:
        return tuple(fn(b) for b in self.balls)

    def scaled(self, a: float) -> Density:
        """``rho_a(x) = rho(a x)``."""
        if not a > 0:
            raise ValueError("homothety factor must be positive")
        balls = self._map_balls(lambda b: Ball(b.c / a, b.radius / a, b.weight))
        grid = None
        if self.grid is not None:
            g = self.grid
            grid = Grid(np.array(g.origin) / a, g.spacing / a, g.values)
        return Density(self.dim, balls, grid)

    def translated(self, shift) -> Density:
        shift = np.asarray(shift, dtype=float)
        balls = self._map_balls(lambda b: Ball(b.c + shift, b.radius, b.weight))
        grid = None
        if self.grid is not None:
            grid = Grid(np.array(self.grid.origin) + shift, self.grid.spacing, self.grid.values)
        return Density(self.dim, balls, grid)

    def reflected(self) -> Density:
        """``rho*(x_1, y) = rho(-x_1, y)``."""
        flip = np.ones(self.dim)
        flip[0] = -1.0
        balls = self._map_balls(lambda b: Ball(b.c * flip, b.radius, b.weight))
        grid = None
        if self.grid is not None:
            g = self.grid
            origin = np.array(g.origin)
            origin[0] = -(origin[0] + g.spacing * g.values.shape[0])
            grid = Grid(origin, g.spacing, g.values[::-1])
        return Density(self.dim, balls, grid)

    def rotated(self, Q) -> Density:
        """Image under the orthogonal map ``x -> Q x`` (ball components only)."""
        if self.grid is not None:
            raise DensityError("grid components cannot be rotated")
        Q = np.asarray(Q, dtype=float)
        return Density(self.dim, self._map_balls(lambda b: Ball(Q @ b.c, b.radius, b.weight)))

    def inverted(self) -> Density:
        """Image of the ball components under ``x -> x / |x|**2``.

        The image of ``B(c, r)`` with ``|c| > r`` is the ball with centre
        ``c / (|c|^2 - r^2)`` and radius ``r / (|c|^2 - r^2)``.
        """
        if self.grid is not None:
            raise DensityError("grid components cannot be inverted")

        def inv(b):
            s = float(b.c @ b.c) - b.radius**2
            if s <= 0:
                raise SupportError("ball contains the origin; inversion undefined")
            return Ball(b.c / s, b.radius / s, b.weight)

        return Density(self.dim, self._map_balls(inv))

    def __add__(self, other: Density) -> Density:
        if other.dim != self.dim:
            raise DensityError("dimension mismatch")
        if self.grid is not None and other.grid is not None:
            raise DensityError("cannot add two grid components")
        return Density(self.dim, self.balls + other.balls, self.grid or other.grid)


def householder_to_axis(v) -> np.ndarray:
    """Householder reflection mapping ``v / |v|`` to ``e_1``.

    The mirror is the hyperplane bisecting ``v/|v|`` and ``e_1``; for ``v``
    already along ``+e_1`` the identity is returned.
    """
    v = np.asarray(v, dtype=float)
    n = len(v)
    unit = v / np.linalg.norm(v)
    e1 = np.zeros(n)
    e1[0] = 1.0
    u = unit - e1
    norm2 = float(u @ u)
    if norm2 < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(u, u) / norm2


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedIntegral:
    value: float
    abs_error_estimate: float = 0.0


def _ball_scalar(b: Ball, base: np.ndarray, kernel: Kernel, n: int) -> float:
    cu = b.c - base
    d = float(np.linalg.norm(cu))
    r = b.radius
    if kernel in (Kernel.G_INV, Kernel.PHI_INV):
        s = d * d - r * r
        cu, d, r = cu / s, d / s, r / s
        kernel = Kernel.F if kernel is Kernel.G_INV else Kernel.PHI
    if kernel is Kernel.F:
        val = r**n if n == 2 else r**n * d ** (2 - n)
    elif kernel is Kernel.PHI:
        val = r**n * cu[0] / d**n
    elif kernel is Kernel.G:
        val = t_n(n, math.atanh(r / d))
    else:
        raise ValueError(kernel)
    return b.weight * val


def _ball_vector(b: Ball, base: np.ndarray, kernel: Kernel, n: int) -> np.ndarray:
    cu = b.c - base
    d = float(np.linalg.norm(cu))
    r = b.radius
    if kernel is Kernel.PHI_INV:
        s = d * d - r * r
        cu, d, r = cu / s, d / s, r / s
    elif kernel is not Kernel.PHI:
        raise ValueError(f"no vector form for kernel {kernel}")
    return b.weight * r**n * cu / d**n


def _kernel_values(u: np.ndarray, kernel: Kernel, n: int, vector: bool = False) -> np.ndarray:
    r2 = np.sum(u * u, axis=-1)
    if kernel is Kernel.F:
        return np.ones_like(r2) if n == 2 else r2 ** ((2 - n) / 2.0)
    if kernel is Kernel.G:
        return r2 ** (-n / 2.0)
    if kernel is Kernel.G_INV:
        return r2 ** (-(n + 2) / 2.0)
    p = n if kernel is Kernel.PHI else n + 2
    w = r2 ** (-p / 2.0)
    return u * w[..., None] if vector else u[..., 0] * w


def _subcell_offsets(n: int, s: int, h: float) -> np.ndarray:
    ticks = ((np.arange(s) + 0.5) / s - 0.5) * h
    mesh = np.meshgrid(*([ticks] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


_CHUNK = 1 << 17


def _grid_integral(grid: Grid, base: np.ndarray, kernel: Kernel, n: int, vector: bool):
    """Midpoint rule on each cell at two resolutions, Richardson-combined.

    Cells within 4 spacings of ``base`` get one extra level of subdivision.
    Returns ``(value, abs_error)`` before normalization.
    """
    centers, vals = grid.cells()
    h = grid.spacing
    shape = (n,) if vector else ()
    if len(centers) == 0:
        return np.zeros(shape), 0.0
    near = np.linalg.norm(centers - base, axis=1) < 4.0 * h
    coarse = np.zeros(shape)
    fine = np.zeros(shape)
    for mask, s in ((~near, 1), (near, 2)):
        if not mask.any():
            continue
        cs, vs = centers[mask], vals[mask]
        for level, acc in ((s, "coarse"), (2 * s, "fine")):
            offs = _subcell_offsets(n, level, h)
            total = np.zeros(shape)
            step = max(1, _CHUNK // len(offs))
            for i in range(0, len(cs), step):
                u = cs[i:i + step, None, :] + offs[None, :, :] - base
                kv = _kernel_values(u, kernel, n, vector)
                total = total + np.tensordot(vs[i:i + step], kv.sum(axis=1), axes=(0, 0))
            total = total * (h / level) ** n
            if acc == "coarse":
                coarse = coarse + total
            else:
                fine = fine + total
    value = (4.0 * fine - coarse) / 3.0
    err = float(np.max(np.abs(fine - coarse)))
    return value, err


def _check_exterior(rho: Density, x: np.ndarray):
    if len(x) != rho.dim:
        raise ValueError(f"point {x} is not in R^{rho.dim}")
    if not rho.is_empty and rho.support_distance(x) <= 0:
        raise SupportError(f"point {x.tolist()} lies in the support of the density")


def j_functional(rho: Density, kernel, base_point=None) -> NormalizedIntegral:
    """``(n/omega_n) int rho(zeta) k(zeta - base_point) d zeta``.

    Ball components use closed forms, grid components cell quadrature.
    """
    kernel = Kernel(kernel)
    n = rho.dim
    base = np.zeros(n) if base_point is None else np.asarray(base_point, dtype=float)
    _check_exterior(rho, base)
    # closed forms come out normalized; only the grid part needs n / omega_n
    value = math.fsum(_ball_scalar(b, base, kernel, n) for b in rho.balls if b.weight > 0)
    err = 1e-15 * abs(value)
    if rho.grid is not None:
        gv, ge = _grid_integral(rho.grid, base, kernel, n, vector=False)
        value += normalization(n) * float(gv)
        err += normalization(n) * ge
    return NormalizedIntegral(value, err)


def vector_integral(rho: Density, kernel, base_point) -> tuple[np.ndarray, float]:
    """Vector version of the ``phi``/``phi_inv`` kernels: ``J(u |u|^{-p})``."""
    kernel = Kernel(kernel)
    n = rho.dim
    base = np.asarray(base_point, dtype=float)
    _check_exterior(rho, base)
    vec = np.zeros(n)
    for b in rho.balls:
        if b.weight > 0:
            vec += _ball_vector(b, base, kernel, n)
    err = 1e-15 * float(np.linalg.norm(vec))
    if rho.grid is not None:
        gv, ge = _grid_integral(rho.grid, base, kernel, n, vector=True)
        vec += normalization(n) * gv
        err += normalization(n) * ge
    return vec, err


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------


def v_rho(rho: Density, x) -> float:
    """``V_rho(x) = (n/omega_n) int rho(zeta) |x - zeta|^{-n} d zeta``."""
    return j_functional(rho, Kernel.G, x).value


def e_rho(rho: Density, x) -> float:
    """The exponential transform ``exp(-2 V_rho(x) / n)``."""
    return math.exp(-2.0 * v_rho(rho, x) / rho.dim)


def u_rho(rho: Density, x) -> float:
    """Coulomb potential ``(n/omega_n) int rho(zeta) |x - zeta|^{2-n} d zeta``, n >= 3."""
    if rho.dim < 3:
        raise ValueError("the Coulomb potential is only defined here for n >= 3")
    return j_functional(rho, Kernel.F, x).value


def coulomb_gradient(rho: Density, x) -> np.ndarray:
    """``grad U_rho(x) = (n-2) J(u |u|^{-n})`` with ``u = zeta - x``."""
    if rho.dim < 3:
        raise ValueError("the Coulomb potential is only defined here for n >= 3")
    vec, _ = vector_integral(rho, Kernel.PHI, x)
    return (rho.dim - 2) * vec


def coulomb_estimate(rho: Density, x) -> tuple[float, float, float]:
    """``(|grad U|^2, (n-2)^2 M_n(V) U, U)`` at an exterior point, n >= 3.

    The middle value bounds the first; balls give equality.  The ``(n-2)^2``
    factor comes with this normalization of ``U`` and is 1 for n = 3.
    """
    n = rho.dim
    grad = coulomb_gradient(rho, x)
    U = u_rho(rho, x)
    return float(grad @ grad), (n - 2) ** 2 * m_n(n, v_rho(rho, x)) * U, U


def gradient_integrals(rho: Density, x) -> tuple[np.ndarray, float]:
    """``A = J((x - zeta) |x - zeta|^{-(n+2)})`` and ``B = J(|x - zeta|^{-(n+2)})``.

    ``grad V_rho = -n A`` and ``grad E_rho = 2 E_rho A``.
    """
    vec, _ = vector_integral(rho, Kernel.PHI_INV, x)
    B = j_functional(rho, Kernel.G_INV, x).value
    return -vec, B


# ---------------------------------------------------------------------------
# rasterization and random densities
# ---------------------------------------------------------------------------

# coverage fractions put O(h^2) relative error on the integrals; 2-D can afford a finer grid
DEFAULT_CELLS_PER_RADIUS = {2: 80, 3: 40}
FALLBACK_CELLS_PER_RADIUS = 12


def rasterize(rho: Density, spacing: float | None = None, oversample: int = 4) -> Density:
    """Grid version of the ball components of ``rho``.

    Cell values are coverage fractions: along axis 0 the chord of the ball
    through the cell is exact, the remaining axes are sampled with
    ``oversample`` midpoints each.
    """
    if rho.grid is not None:
        raise DensityError("density already has a grid component")
    if not rho.balls:
        return rho
    n = rho.dim
    if spacing is None:
        cells = DEFAULT_CELLS_PER_RADIUS.get(n, FALLBACK_CELLS_PER_RADIUS)
        spacing = min(b.radius for b in rho.balls) / cells
    lo = np.min([b.c - b.radius for b in rho.balls], axis=0) - spacing
    hi = np.max([b.c + b.radius for b in rho.balls], axis=0) + spacing
    shape = tuple(int(math.ceil(s)) for s in (hi - lo) / spacing)
    values = np.zeros(shape)
    ticks = ((np.arange(oversample) + 0.5) / oversample - 0.5) * spacing
    lines = np.stack([m.ravel() for m in np.meshgrid(*([ticks] * (n - 1)), indexing="ij")], axis=1) \
        if n > 1 else np.zeros((1, 0))
    for b in rho.balls:
        i0 = np.maximum(np.floor((b.c - b.radius - lo) / spacing).astype(int), 0)
        i1 = np.minimum(np.ceil((b.c + b.radius - lo) / spacing).astype(int), shape)
        axes = [np.arange(a, z) for a, z in zip(i0, i1)]
        # transverse coordinates of every (cell, line) pair
        trans_idx = np.stack([m.ravel() for m in np.meshgrid(*axes[1:], indexing="ij")], axis=1)
        trans_c = lo[1:] + (trans_idx + 0.5) * spacing
        pts = trans_c[:, None, :] + lines[None, :, :]
        rho2 = np.sum((pts - b.c[1:]) ** 2, axis=-1)
        half = np.sqrt(np.maximum(b.radius**2 - rho2, 0.0))
        x_lo = lo[0] + axes[0] * spacing
        a = np.maximum(x_lo[None, None, :], (b.c[0] - half)[..., None])
        z = np.minimum(x_lo[None, None, :] + spacing, (b.c[0] + half)[..., None])
        cover = np.clip(z - a, 0.0, None).mean(axis=1) / spacing
        block = np.moveaxis(cover.reshape([len(a_) for a_ in axes[1:]] + [len(axes[0])]), -1, 0)
        sl = tuple(slice(a_, z_) for a_, z_ in zip(i0, i1))
        values[sl] += b.weight * block
    return Density(n, (), Grid(lo, spacing, np.clip(values, 0.0, 1.0)))


def _uniform_direction(rng, count, n):
    v = rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _uniform_ball(rng, count, n):
    return _uniform_direction(rng, count, n) * rng.random((count, 1)) ** (1.0 / n)


def _neighbour_load(centers, radii, weights):
    d = np.linalg.norm(centers[:, None] - centers[None], axis=-1)
    touch = d < radii[:, None] + radii[None]
    return (touch * weights[None]).sum(axis=1)


def random_ball_density(rng, n: int, max_balls: int = 8, r_range=(0.2, 1.0)) -> Density:
    """Random union of weighted balls, each at distance >= 2 radii from 0.

    Weights are redrawn until every ball plus its overlapping neighbours
    carries total weight <= 1 (sufficient for ``rho <= 1``); after 50 draws
    the weights are scaled down instead.
    """
    k = int(rng.integers(1, max_balls + 1))
    radii = rng.uniform(*r_range, size=k)
    dist = 2.0 * radii + rng.uniform(0.0, 3.0, size=k)
    centers = _uniform_direction(rng, k, n) * dist[:, None]
    for _ in range(50):
        weights = rng.uniform(0.0, 1.0, size=k)
        load = _neighbour_load(centers, radii, weights)
        if load.max() <= 1.0:
            break
    else:
        weights = weights / load.max()
    return Density(n, tuple(Ball(c, r, w) for c, r, w in zip(centers, radii, weights)))


def random_grid_density(rng, n: int, cells: int = 8, radius: float = 0.6) -> Density:
    """A perturbed smooth bump on a small grid, away from the origin."""
    h = 2.0 * radius / cells
    center = _uniform_direction(rng, 1, n)[0] * rng.uniform(2.5 * radius, 2.5 * radius + 2.0)
    origin = center - radius
    axes = [origin[i] + (np.arange(cells) + 0.5) * h for i in range(n)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    r2 = np.sum((mesh - center) ** 2, axis=-1) / radius**2
    bump = np.clip(1.0 - r2, 0.0, None) ** 2
    freq = rng.uniform(1.0, 4.0, size=n)
    phase = rng.uniform(0, 2 * np.pi, size=n)
    wiggle = 1.0 + 0.3 * np.prod(np.sin(freq * (mesh - center) / radius + phase), axis=-1)
    values = np.clip(rng.uniform(0.3, 1.0) * bump * wiggle, 0.0, 1.0)
    return Density(n, (), Grid(origin, h, values))
