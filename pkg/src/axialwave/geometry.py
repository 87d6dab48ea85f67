"""Schwarzschild exterior background geometry.

Radial metric factors, the tortoise coordinate and its stable inverse,
horizon-adapted time, retarded/advanced coordinates, and the spacelike
foliations (stationary horizon-adapted slices and hyperboloidal slices)
used for flux accounting.

Conventions: geometric units G = c = 1, mass M > 0, exterior region
r > 2M.  The tortoise coordinate is normalized to vanish at the photon
sphere, r_star(3M) = 0, and horizon-adapted time differs from static
time by 2M log(r - 2M).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import lambertw

__all__ = [
    "compactness",
    "lapse_squared",
    "horizon_poly",
    "tortoise_from_radius",
    "gap_from_tortoise",
    "radius_from_tortoise",
    "horizon_time_offset",
    "retarded_advanced",
    "log_lapse",
    "log_radial_stretch",
    "log_area_factor",
    "log_azimuth_factor",
    "RadialGrid",
    "Foliation",
    "build_foliation",
]


def compactness(r, mass=1.0):
    """2M/r: one at the horizon, zero at spatial infinity."""
    return 2.0 * mass / np.asanyarray(r)


def lapse_squared(r, mass=1.0):
    """1 - 2M/r, the squared lapse of the static slicing."""
    return 1.0 - 2.0 * mass / np.asanyarray(r)


def horizon_poly(r, mass=1.0):
    """r(r - 2M): the radial polynomial vanishing at the horizon."""
    r = np.asanyarray(r)
    return r * (r - 2.0 * mass)


def tortoise_from_radius(r, mass=1.0):
    """Tortoise coordinate r + 2M log((r-2M)/M) - 3M, zero at r = 3M."""
    r = np.asanyarray(r)
    return r - 3.0 * mass + 2.0 * mass * np.log((r - 2.0 * mass) / mass)


def gap_from_tortoise(r_star, mass=1.0):
    """Invert the tortoise map for the horizon gap r - 2M.

    Works directly with the gap so that radii exponentially close to the
    horizon keep full relative precision (the gap underflows double
    precision only below r_star ~ -1400 M).  The defining relation
    (gap/2M) exp(gap/2M) = (1/2) exp((r_star + M)/2M) is solved by the
    principal Lambert-W branch where its argument is representable and by
    an asymptotic start elsewhere; two Newton corrections in the gap then
    enforce relative tolerance 1e-12 uniformly.
    """
    r_star = np.asanyarray(r_star, dtype=float)
    scalar = r_star.ndim == 0
    rs = np.atleast_1d(r_star)
    expo = (rs + mass) / (2.0 * mass)

    gap = np.empty_like(rs)
    small = expo < 700.0  # exp representable: use Lambert W directly
    if np.any(small):
        z = 0.5 * np.exp(expo[small])
        gap[small] = 2.0 * mass * np.real(lambertw(z))
    if np.any(~small):
        # far zone: r ~ r_star, two fixed-point sweeps give a good start
        g = rs[~small]
        for _ in range(3):
            g = rs[~small] + 3.0 * mass - 2.0 * mass - 2.0 * mass * np.log(g / mass)
            g = np.maximum(g, mass)
        gap[~small] = g

    # Newton polish on F(g) = g - M + 2M log(g/M) - r_star, F' = 1 + 2M/g
    for _ in range(2):
        resid = gap - mass + 2.0 * mass * np.log(gap / mass) - rs
        gap = gap - resid / (1.0 + 2.0 * mass / gap)

    return gap[0] if scalar else gap


def radius_from_tortoise(r_star, mass=1.0):
    """Inverse tortoise map.  Relative tolerance 1e-12.

    Note: the returned r collapses to exactly 2M once the gap drops below
    double-precision resolution of 2M (r_star below about -75 M); callers
    that need the near-horizon regime should use gap_from_tortoise.
    """
    return 2.0 * mass + gap_from_tortoise(r_star, mass)


def horizon_time_offset(gap, mass=1.0):
    """2M log(r - 2M): horizon-adapted time is t + this offset."""
    return 2.0 * mass * np.log(np.asanyarray(gap))


def retarded_advanced(t, r_star):
    """Null coordinates ((t - r_star)/2, (t + r_star)/2)."""
    t = np.asanyarray(t)
    r_star = np.asanyarray(r_star)
    return 0.5 * (t - r_star), 0.5 * (t + r_star)


def log_lapse(r, mass=1.0):
    """Log of the static lapse, (1/2) log(1 - 2M/r)."""
    return 0.5 * np.log(lapse_squared(r, mass))


def log_radial_stretch(r, mass=1.0):
    """Log radial stretch of the static slicing, -(1/2) log(1 - 2M/r)."""
    return -0.5 * np.log(lapse_squared(r, mass))


def log_area_factor(r):
    """Log of the areal radius."""
    return np.log(np.asanyarray(r))


def log_azimuth_factor(r, theta):
    """Log of the azimuthal circumference radius r sin(theta)."""
    return np.log(np.asanyarray(r)) + np.log(np.sin(np.asanyarray(theta)))


@dataclass(frozen=True)
class RadialGrid:
    """Uniform tortoise-coordinate grid with precomputed radial factors.

    The horizon gap r - 2M is carried as its own array: near the inner end
    of a deep window it is exponentially small and would be destroyed by
    forming r - 2M from r in double precision.
    """

    mass: float
    r_star: np.ndarray
    gap: np.ndarray
    r: np.ndarray
    lapse2: np.ndarray
    mu: np.ndarray
    spacing: float

    @classmethod
    def build(cls, *, mass=1.0, r_star_min, r_star_max, spacing):
        span = r_star_max - r_star_min
        n_cells = int(round(span / spacing))
        if abs(n_cells * spacing - span) > 1e-9 * max(1.0, abs(span)):
            raise ValueError("window length must be a multiple of the spacing")
        r_star = r_star_min + spacing * np.arange(n_cells + 1)
        gap = gap_from_tortoise(r_star, mass)
        r = 2.0 * mass + gap
        lapse2 = gap / r
        mu = 2.0 * mass / r
        return cls(mass=float(mass), r_star=r_star, gap=gap, r=r,
                   lapse2=lapse2, mu=mu, spacing=float(spacing))

    @property
    def size(self) -> int:
        return self.r_star.size


def _smoothstep(x):
    """C^2 quintic ramp 6x^5 - 15x^4 + 10x^3 on [0, 1], clamped outside."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


def _smoothstep_slope(x):
    x = np.clip(x, 0.0, 1.0)
    return 30.0 * x * x * (1.0 - x) * (1.0 - x)


@dataclass(frozen=True)
class Foliation:
    """Family of spacelike graph slices {t = tau + height(r_star)}.

    kind "horizon_adapted": level sets of horizon-adapted time; these
    penetrate the horizon region gracefully but become null-aligned
    outward.  kind "hyperboloidal": horizon-adapted inward, asymptotically
    hyperboloidal outward, with the retarded and advanced times t - r_star
    and t + r_star both at least tau + null_margin on every slice (that
    margin check uses the unhalved retarded/advanced times).
    """

    kind: str
    grid: RadialGrid
    height: np.ndarray
    slope: np.ndarray
    spacelike_gap: np.ndarray
    constants: dict = field(default_factory=dict)

    def crossing_times(self, tau):
        """Static time at which the slice labelled tau crosses each grid point."""
        return tau + self.height

    def null_margins(self):
        """(min(height - r_star), min(height + r_star)) over the grid.

        Both are tau-independent; for the hyperboloidal family both are
        >= the requested null margin by construction.
        """
        h, rs = self.height, self.grid.r_star
        return float(np.min(h - rs)), float(np.min(h + rs))

    def spacelike_margin(self):
        """min(1 - |height'|); positive iff every slice is strictly spacelike.

        Uses the stable per-point gap: toward the horizon 1 - |height'|
        approaches the squared lapse, which underflows the naive
        subtraction on deep windows but stays positive here.
        """
        return float(np.min(self.spacelike_gap))


def _hyperboloidal_slope_shift(r_star, mass, blend_lo, blend_hi):
    """Blend weight times (outer slope - inner slope) at given tortoise points.

    The hyperboloidal slope is the convex combination
    (1-w) * (-mu) + w * (r A / sqrt(r^2 + M^2)); both branch slopes are
    strictly inside (-1, 1), so every blend is automatically spacelike.
    This helper returns the w-weighted difference, i.e. slope + mu.
    """
    gap = gap_from_tortoise(r_star, mass)
    r = 2.0 * mass + gap
    w = _smoothstep((r - blend_lo) / (blend_hi - blend_lo))
    lapse2 = gap / r
    mu = 2.0 * mass / r
    return w * (r * lapse2 / np.hypot(r, mass) + mu)


# 5-point Gauss-Legendre rule on [-1, 1], enough for machine-level cell quadrature
_GL_NODES = np.array([-0.9061798459386640, -0.5384693101056831, 0.0,
                      0.5384693101056831, 0.9061798459386640])
_GL_WEIGHTS = np.array([0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                        0.4786286704993665, 0.2369268850561891])


def build_foliation(kind, grid, *, null_margin=4.0, blend=(3.0, 20.0)):
    """Construct a slice family over the grid window.

    null_margin and blend are in units of the grid mass; the blend bounds
    are areal radii bracketing the transition region of the hyperboloidal
    family.  That family's slope is a smooth convex combination of the
    horizon-adapted slope -2M/r and the asymptotically hyperboloidal slope
    r A / sqrt(r^2 + M^2), so it is strictly spacelike by construction;
    the height is the slope's antiderivative (per-cell Gauss quadrature on
    top of the closed-form inner part) plus a vertical shift that enforces
    the retarded/advanced-time margin.
    """
    mass = grid.mass
    if kind == "horizon_adapted":
        height = -horizon_time_offset(grid.gap, mass)
        slope = -grid.mu
        gap_sl = grid.lapse2.copy()  # 1 - |-mu| = A, formed without cancellation
        return Foliation(kind=kind, grid=grid, height=height, slope=slope,
                         spacelike_gap=gap_sl,
                         constants={"spacelike_margin": float(np.min(gap_sl))})
    if kind != "hyperboloidal":
        raise ValueError(f"unknown foliation kind: {kind!r}")

    blend_lo, blend_hi = (blend[0] * mass, blend[1] * mass)
    margin = null_margin * mass

    shift = _hyperboloidal_slope_shift(grid.r_star, mass, blend_lo, blend_hi)
    slope = -grid.mu + shift
    # stable 1 - |slope|: A + shift where the inner branch dominates (slope <= 0),
    # plain subtraction on the outer side where slope is safely below 1
    gap_sl = np.where(slope <= 0.0, grid.lapse2 + shift, 1.0 - slope)
    # antiderivative: -2M log(gap) integrates -mu exactly; the shift term is
    # integrated cell by cell with 5-point Gauss nodes (machine accuracy)
    half = 0.5 * grid.spacing
    mids = grid.r_star[:-1] + half
    nodes = (mids[:, None] + half * _GL_NODES[None, :]).ravel()
    vals = _hyperboloidal_slope_shift(nodes, mass, blend_lo, blend_hi)
    cell = half * (vals.reshape(-1, _GL_NODES.size) @ _GL_WEIGHTS)
    cumulative = np.concatenate([[0.0], np.cumsum(cell)])
    h = -horizon_time_offset(grid.gap, mass) + cumulative

    # vertical shift: both retarded and advanced margins become >= margin
    lift = margin - float(np.min(h - np.abs(grid.r_star)))
    height = h + lift
    constants = {
        "vertical_shift": lift,
        "null_margin": margin,
        "blend_lo": blend_lo,
        "blend_hi": blend_hi,
        "spacelike_margin": float(np.min(gap_sl)),
    }
    return Foliation(kind=kind, grid=grid, height=height, slope=slope,
                     spacelike_gap=gap_sl, constants=constants)
