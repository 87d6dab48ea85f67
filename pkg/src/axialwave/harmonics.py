"""Axisymmetric spin-weighted spherical harmonics and their ladder operators.

Sections of spin weight s are represented by the coefficient f(theta) relative
to the s-th power of the unit radial frame factor, sampled at Gauss-Legendre
nodes in x = cos(theta).  A pole-regular section factors as
f = sin(theta)^(2s) q(x) with q polynomial, so the Hermitian inner product

    <f, g> = 2 pi * integral of f conj(g) sin(theta)^(1 - 2s) d(theta)

has a polynomial integrand in x for band-limited fields and Gauss-Legendre
quadrature evaluates it exactly.  The raising and lowering operators act
through the polynomial part; harmonics are built by repeated raising from
Legendre polynomials and normalized, with signs fixed by keeping raise
constants positive.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

_SQRT2 = math.sqrt(2.0)
_TABLE_CACHE: dict[tuple[int, int, int], "HarmonicTable"] = {}


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre quadrature grid in x = cos(theta)."""

    order: int

    def __post_init__(self) -> None:
        if self.order < 4:
            raise ValueError("quadrature order must be at least 4")
        nodes, weights = npleg.leggauss(self.order)
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_weights", weights)

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def sin2(self) -> np.ndarray:
        """sin(theta)^2 at the nodes."""
        return 1.0 - self.nodes**2


def sphere_grid(ell_max: int) -> SphereGrid:
    """Grid exact for all quadratic functionals of harmonics up to ell_max."""
    return SphereGrid(order=max(4 * ell_max, 16))


@dataclass(frozen=True)
class ModeIndex:
    spin: int
    ell: int

    def __post_init__(self) -> None:
        if self.spin not in (1, 2):
            raise ValueError("spin weight must be 1 or 2")
        if self.ell < self.spin:
            raise ValueError(
                "no harmonic with ell < spin (raising annihilates these)"
            )


def bundle_inner_product(
    f: np.ndarray, g: np.ndarray, spin: int, grid: SphereGrid
) -> complex:
    """Hermitian inner product with the bundle measure weight sin^(1-2s)."""
    weight = grid.sin2 ** (-spin)
    integrand = f * np.conjugate(g) * weight
    if not np.all(np.isfinite(integrand)):
        raise ValueError("integrand not finite near the poles; section is not "
                         "pole-regular for this spin")
    return complex(2.0 * np.pi * np.sum(grid.weights * integrand))


def _polynomial_part(f: np.ndarray, spin: int, grid: SphereGrid) -> np.ndarray:
    """Legendre coefficients of q = f / sin^(2s), the polynomial part."""
    q = f / grid.sin2**spin
    if not np.all(np.isfinite(q)):
        raise ValueError("section violates sin^(2s) pole regularity")
    return npleg.legfit(grid.nodes, q, deg=grid.order - 1)


def pole_regularity_error(f: np.ndarray, spin: int, grid: SphereGrid) -> float:
    """Growth of the pointwise quotient q = f / sin^(2s) toward the poles:
    the two nodes nearest each pole against the midgrid scale.  Sections with
    genuine sin^(2s) decay score near 1; a section missing the decay blows up
    like sin^(-2s) at the outermost nodes."""
    q = np.abs(np.asarray(f)) / grid.sin2**spin
    mid = np.max(q[grid.order // 4 : -grid.order // 4])
    edge = max(q[0], q[1], q[-1], q[-2])
    return float(edge / mid) if mid > 0 else 0.0


def eth_raise(f: np.ndarray, spin: int, grid: SphereGrid) -> np.ndarray:
    """Raising operator: on f = sin^(2s) q it returns sin^(2s+2) (-q_x/sqrt 2),
    a section of spin weight s + 1."""
    if spin < 0:
        raise ValueError("spin weight must be nonnegative")
    series = (
        npleg.legfit(grid.nodes, np.asarray(f, dtype=complex), deg=grid.order - 1)
        if spin == 0
        else _polynomial_part(np.asarray(f, dtype=complex), spin, grid)
    )
    dq = npleg.legval(grid.nodes, npleg.legder(series))
    return grid.sin2 ** (spin + 1) * (-dq / _SQRT2)


def eth_lower(f: np.ndarray, spin: int, grid: SphereGrid) -> np.ndarray:
    """Lowering operator: maps spin weight s to s - 1 via
    (2 s x q - sin^2 q_x)/sqrt 2 on the polynomial part."""
    if spin < 1:
        raise ValueError("cannot lower below spin weight 0")
    series = _polynomial_part(np.asarray(f, dtype=complex), spin, grid)
    x = grid.nodes
    q = npleg.legval(x, series)
    dq = npleg.legval(x, npleg.legder(series))
    new_q = (2 * spin * x * q - grid.sin2 * dq) / _SQRT2
    return grid.sin2 ** (spin - 1) * new_q


def angular_laplacian(f: np.ndarray, spin: int, grid: SphereGrid) -> np.ndarray:
    """Unit-sphere bundle Laplacian, (1-x^2) f_xx + (2s-2) x f_x + s f.

    Equivalent theta form: f_thth - (2s-1) cot(theta) f_th + s f; on a
    harmonic it returns (s^2 - l(l+1)) times the harmonic.
    """
    series = npleg.legfit(grid.nodes, np.asarray(f, dtype=complex), deg=grid.order - 1)
    x = grid.nodes
    d1 = npleg.legval(x, npleg.legder(series))
    d2 = npleg.legval(x, npleg.legder(series, 2))
    return grid.sin2 * d2 + (2 * spin - 2) * x * d1 + spin * np.asarray(f)


@dataclass(frozen=True)
class HarmonicTable:
    """Normalized axisymmetric harmonic sampled on a quadrature grid."""

    mode: ModeIndex
    grid: SphereGrid
    values: np.ndarray
    norm: float


def harmonic_table(spin: int, ell: int, grid: SphereGrid | None = None) -> HarmonicTable:
    """Build (and cache) Y at the given spin weight and degree by repeated
    raising from the Legendre polynomial, normalizing at each rung with a
    positive scalar so every raise constant is positive."""
    mode = ModeIndex(spin, ell)
    if grid is None:
        grid = sphere_grid(max(8, ell))
    key = (spin, ell, grid.order)
    cached = _TABLE_CACHE.get(key)
    if cached is not None:
        return cached

    coeffs = np.zeros(ell + 1)
    coeffs[ell] = 1.0
    vals = npleg.legval(grid.nodes, coeffs).astype(complex)
    nrm = math.sqrt(bundle_inner_product(vals, vals, 0, grid).real)
    vals = vals / nrm
    for s in range(spin):
        vals = eth_raise(vals, s, grid)
        nrm = math.sqrt(bundle_inner_product(vals, vals, s + 1, grid).real)
        if nrm == 0.0:
            raise ValueError("raising annihilated the section")
        vals = vals / nrm
    table = HarmonicTable(
        mode=mode,
        grid=grid,
        values=vals.real.astype(float),
        norm=math.sqrt(bundle_inner_product(vals, vals, spin, grid).real),
    )
    _TABLE_CACHE[key] = table
    return table


def eval_harmonic(mode: ModeIndex, grid: SphereGrid | None = None) -> HarmonicTable:
    return harmonic_table(mode.spin, mode.ell, grid)


def raise_constant(ell: int, grid: SphereGrid | None = None) -> float:
    """Measured ladder constant <raise Y(1,ell), Y(2,ell)>, positive by the
    sign convention; its square is (l-1)(l+2)/2."""
    if grid is None:
        grid = sphere_grid(max(8, ell))
    low = harmonic_table(1, ell, grid)
    if ell < 2:
        return 0.0
    high = harmonic_table(2, ell, grid)
    raised = eth_raise(low.values.astype(complex), 1, grid)
    return bundle_inner_product(raised, high.values.astype(complex), 2, grid).real


def lower_constant(ell: int, grid: SphereGrid | None = None) -> float:
    """Measured <lower Y(2,ell), Y(1,ell)>; equals minus the raise constant."""
    if grid is None:
        grid = sphere_grid(max(8, ell))
    high = harmonic_table(2, ell, grid)
    low = harmonic_table(1, ell, grid)
    lowered = eth_lower(high.values.astype(complex), 2, grid)
    return bundle_inner_product(lowered, low.values.astype(complex), 1, grid).real


def angular_gradient_ratio(spin: int, ell: int) -> float:
    """Quadrature value of int |grad Y|^2 / int |Y|^2, which must equal
    l(l+1) - s^2; used for the Poincare-constant certification."""
    grid = sphere_grid(max(8, ell))
    table = harmonic_table(spin, ell, grid)
    vals = table.values.astype(complex)
    lap = angular_laplacian(vals, spin, grid)
    num = -bundle_inner_product(lap, vals, spin, grid).real
    den = bundle_inner_product(vals, vals, spin, grid).real
    return num / den


def project_modes(
    f: np.ndarray, spin: int, grid: SphereGrid, ell_max: int
) -> np.ndarray:
    """Coefficients <f, Y(spin, ell)> for ell = spin .. ell_max."""
    out = np.zeros(ell_max - spin + 1, dtype=complex)
    for i, ell in enumerate(range(spin, ell_max + 1)):
        table = harmonic_table(spin, ell, grid)
        out[i] = bundle_inner_product(
            np.asarray(f, dtype=complex), table.values.astype(complex), spin, grid
        )
    return out


def reconstruct(
    coefficients: np.ndarray, spin: int, grid: SphereGrid
) -> np.ndarray:
    """Sum of coefficient times harmonic, inverse of project_modes on
    band-limited sections."""
    out = np.zeros(grid.order, dtype=complex)
    for i, c in enumerate(coefficients):
        ell = spin + i
        table = harmonic_table(spin, ell, grid)
        out = out + c * table.values
    return out


def write_harmonic_csv(table: HarmonicTable, path) -> None:
    """Dump (cos_theta, coefficient) rows for external plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cos_theta", "coefficient"])
        for x, v in zip(table.grid.nodes, table.values):
            writer.writerow(["%.17g" % x, "%.17g" % v])
