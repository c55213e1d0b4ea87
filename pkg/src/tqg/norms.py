"""Sobolev and Gevrey-weighted norms, and analyticity-radius estimation.

Norms are computed as weighted lattice sums over the mean-free modes,

    ||f||_{H^r}^2      = sum_k |k|^(2r) |fhat_k|^2,
    ||e^{phi L} f||    with the weight e^{phi |k|} applied per mode,

where the half-Laplacian symbol is |k| (so applying symbol_pow with exponent
2r to a field and taking the plain l2 sum reproduces the H^(2r) norm).  All
functions accept scalar or two-component fields; vector norms sum component
squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GevreyOverflowError, GridMismatchError
from .spectral import SpectralField, SpectralGrid, VectorSpectralField, _field

__all__ = [
    "GevreyParams",
    "RadiusFit",
    "symbol_pow",
    "gevrey_weight",
    "sobolev_norm",
    "gevrey_norm",
    "product_norm_sq",
    "estimate_radius",
]

# e^(phi |k|) is capped at 1e300; anything beyond is treated as overflow.
_LOG_CAP = math.log(1e300)


@dataclass(frozen=True)
class GevreyParams:
    """Weight parameters: Sobolev order r >= 0 and radius phi >= 0.

    The Gevrey index is fixed at 1 (analytic scale); only r and phi vary.
    """

    r: float
    phi: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"r must be nonnegative, got {self.r}")
        if self.phi < 0:
            raise ValueError(f"phi must be nonnegative, got {self.phi}")


@dataclass(frozen=True)
class RadiusFit:
    """Result of the shell-decay regression: estimated phi, p, and RMS residual."""

    phi_est: float
    p_est: float
    residual: float


def _components(obj) -> list[SpectralField]:
    if isinstance(obj, VectorSpectralField):
        return [obj.x1, obj.x2]
    if isinstance(obj, SpectralField):
        return [obj]
    raise TypeError(f"expected a spectral field, got {type(obj).__name__}")


def _grid_of(obj) -> SpectralGrid:
    return obj.grid


def _check_cap(phi: float, kmag: np.ndarray, nonzero: np.ndarray) -> None:
    """Raise if the per-mode weight e^(phi|k|) overflows on a populated mode."""
    bad = nonzero & (phi * kmag > _LOG_CAP)
    if np.any(bad):
        shell = float(np.min(kmag[bad]))
        raise GevreyOverflowError(
            f"gevrey weight overflow: exp(phi*|k|) exceeds 1e300 at shell "
            f"|k|={shell:.6g} with phi={phi:.6g}"
        )


def symbol_pow(field: SpectralField, a: float) -> SpectralField:
    """Multiply coefficients by |k|^a (the half-Laplacian symbol to power a).

    The mean mode is left at zero for every a, including a <= 0.
    """
    g = field.grid
    with np.errstate(divide="ignore"):
        mult = g.kmag ** a
    mult[0, 0] = 0.0
    return _field(g, field.coeffs * mult, field.is_real)


def gevrey_weight(field: SpectralField, phi: float) -> SpectralField:
    """Apply the exponential weight e^(phi |k|) to every coefficient."""
    if phi < 0:
        raise ValueError(f"phi must be nonnegative, got {phi}")
    g = field.grid
    c = field.coeffs
    if phi == 0.0:
        return _field(g, c.copy(), field.is_real)
    nz = c != 0
    _check_cap(phi, g.kmag, nz)
    out = np.zeros_like(c)
    out[nz] = c[nz] * np.exp(phi * g.kmag[nz])
    return _field(g, out, field.is_real)


def _gev_sq(obj, r: float, phi: float) -> float:
    """Squared weighted norm sum_k |k|^(2r) e^(2 phi |k|) |fhat_k|^2."""
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    if phi < 0:
        raise ValueError(f"phi must be nonnegative, got {phi}")
    total = 0.0
    for comp in _components(obj):
        c = comp.coeffs
        nz = c != 0
        if not np.any(nz):
            continue
        km = comp.grid.kmag[nz]
        # the mean mode is pinned to zero, so km >= 1 on every populated mode
        if phi:
            _check_cap(phi, comp.grid.kmag, nz)
            w = np.exp(2.0 * phi * km)
        else:
            w = 1.0
        term = float(np.sum(km ** (2.0 * r) * w * np.abs(c[nz]) ** 2))
        total += term
    if not math.isfinite(total):
        raise GevreyOverflowError(
            f"weighted norm overflow for r={r}, phi={phi}: sum is not finite"
        )
    return total


def sobolev_norm(field, r: float) -> float:
    """H^r norm over the mean-free modes."""
    return math.sqrt(_gev_sq(field, r, 0.0))


def gevrey_norm(field, params: GevreyParams) -> float:
    """Weighted norm ||e^(phi L) f||_{H^r} for L the half-Laplacian."""
    return math.sqrt(_gev_sq(field, params.r, params.phi))


def product_norm_sq(field_a, ra: float, field_b, rb: float, phi: float) -> float:
    """Squared product-space norm: gevrey(a, ra, phi)^2 + gevrey(b, rb, phi)^2."""
    ga, gb = _grid_of(field_a), _grid_of(field_b)
    if ga != gb:
        raise GridMismatchError(f"grid mismatch: n={ga.n} vs n={gb.n}")
    return _gev_sq(field_a, ra, phi) + _gev_sq(field_b, rb, phi)


def estimate_radius(field: SpectralField, shell_min: float, shell_max: float) -> RadiusFit:
    """Estimate the exponential decay rate of the coefficients.

    Fits log max_{|k| in shell} |fhat_k| ~ C - phi*|k| - p*log(1+|k|) by least
    squares over the radial shells (distinct |k| values) whose radius lies in
    [shell_min, shell_max], weighting each shell by its population.  At least
    four populated shells are required.

    The algebraic factor uses log(1+|k|), matching the (1+|k|)^{-p} law of
    random_gevrey_field; with log|k| the model mismatch at small shells leaks
    a +p/|k|-shaped term into phi and the planted rate comes back ~0.03 high.
    """
    if shell_min <= 0 or shell_max <= shell_min:
        raise ValueError(f"invalid shell range [{shell_min}, {shell_max}]")
    g = field.grid
    index, mags, pops = g.shell_table
    maxabs = np.zeros(len(mags))
    np.maximum.at(maxabs, index.ravel(), np.abs(field.coeffs).ravel())
    sel = (mags >= shell_min) & (mags <= shell_max) & (maxabs > 0) & (mags > 0)
    count = int(np.count_nonzero(sel))
    if count < 4:
        raise ValueError(
            f"at least 4 nonempty shells required in [{shell_min}, {shell_max}], "
            f"found {count}"
        )
    rho = mags[sel]
    y = np.log(maxabs[sel])
    design = np.column_stack([np.ones_like(rho), -rho, -np.log1p(rho)])
    w = np.sqrt(pops[sel].astype(np.float64))
    sol, *_ = np.linalg.lstsq(design * w[:, None], y * w, rcond=None)
    fitted = design @ sol
    residual = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return RadiusFit(phi_est=float(sol[1]), p_est=float(sol[2]), residual=residual)
