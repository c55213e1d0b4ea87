"""Thermal quasi-geostrophic vector field in spectral form.

State variables are buoyancy b and potential vorticity q; the streamfunction
solves (Laplacian - 1) psi = q - f for a fixed forcing f, and advecting
velocities are rotated gradients.  Products are evaluated either on a
zero-padded collocation grid (alias-free for every retained mode) or by the
exact truncated convolution sum, which serves as the independent oracle for
the fast path.

The advection output is restricted to the negation-symmetric band
max(|k1|,|k2|) <= n/2 - 1: dropping the Nyquist lines keeps real data exactly
real and makes trajectories at opposite ray angles exact conjugates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import GridMismatchError
from .spectral import (
    SpectralField,
    SpectralGrid,
    VectorSpectralField,
    _field,
    _same_grid,
    derivative,
    perp_gradient,
    divergence_defect,
    zero_field,
)

__all__ = [
    "TQGState",
    "TQGDataSet",
    "solve_streamfunction",
    "velocity",
    "bathymetry_velocity",
    "advect",
    "tqg_rhs",
    "inner_product_complex",
    "trilinear",
]

TWO_PI_SQ = (2.0 * np.pi) ** 2

ADVECT_METHODS = ("pseudospectral", "convolution")


@dataclass(frozen=True)
class TQGState:
    """Prognostic pair (b, q) on a shared grid."""

    b: SpectralField
    q: SpectralField

    def __post_init__(self):
        _same_grid(self.b, self.q)

    @property
    def grid(self) -> SpectralGrid:
        return self.b.grid


@dataclass(frozen=True)
class TQGDataSet:
    """Problem data: bathymetry drift u_h, forcing f, initial (b0, q0), phi0.

    u_h must be divergence-free; all fields are mean-free by construction.
    """

    u_h: VectorSpectralField
    f: SpectralField
    b0: SpectralField
    q0: SpectralField
    phi0: float

    def __post_init__(self):
        g = _same_grid(self.b0, self.q0)
        _same_grid(self.f, self.b0)
        _same_grid(self.u_h.x1, self.b0)
        if self.phi0 <= 0:
            raise ValueError(f"phi0 must be positive, got {self.phi0}")
        defect = divergence_defect(self.u_h)
        scale = max(1.0, self.u_h.x1.max_abs(), self.u_h.x2.max_abs()) * g.n
        if defect > 1e-13 * scale:
            raise ValueError(
                f"u_h is not divergence-free: max |k . uhat_k| = {defect:.3e}"
            )

    @property
    def grid(self) -> SpectralGrid:
        return self.b0.grid

    def initial_state(self) -> TQGState:
        return TQGState(self.b0, self.q0)


def zero_dataset(
    grid: SpectralGrid,
    b0: SpectralField | None = None,
    q0: SpectralField | None = None,
    phi0: float = 0.25,
) -> TQGDataSet:
    """Dataset with zero forcing and zero bathymetry drift."""
    z = zero_field(grid)
    return TQGDataSet(
        VectorSpectralField(z, z),
        z,
        b0 if b0 is not None else z,
        q0 if q0 is not None else z,
        phi0,
    )


def solve_streamfunction(q: SpectralField, f: SpectralField) -> SpectralField:
    """Invert (Laplacian - 1) psi = q - f mode by mode: psihat = (qhat - fhat)/(-|k|^2 - 1)."""
    g = _same_grid(q, f)
    mult = -1.0 / (g.ksq.astype(np.float64) + 1.0)
    return _field(g, (q.coeffs - f.coeffs) * mult, q.is_real and f.is_real)


def velocity(psi: SpectralField) -> VectorSpectralField:
    """Advecting velocity from a streamfunction, u = (-d2 psi, d1 psi)."""
    return perp_gradient(psi)


def bathymetry_velocity(h: SpectralField) -> VectorSpectralField:
    """Half rotated gradient of the bathymetry field, u_h = perp_grad(h)/2."""
    return perp_gradient(h) * 0.5


def _project_band(c: np.ndarray, n: int) -> np.ndarray:
    """Zero the mean mode and the Nyquist lines (symmetric-band truncation)."""
    half = n // 2
    c[half, :] = 0.0
    c[:, half] = 0.0
    c[0, 0] = 0.0
    return c


def _advect_pseudospectral(u: VectorSpectralField, gx: SpectralField, gy: SpectralField) -> np.ndarray:
    g = u.grid
    m, i1, i2 = g.pad_plan

    def phys(c: np.ndarray) -> np.ndarray:
        p = np.zeros((m, m), dtype=np.complex128)
        p[i1, i2] = c
        return np.fft.ifft2(p) * (m * m)

    prod = phys(u.x1.coeffs) * phys(gx.coeffs) + phys(u.x2.coeffs) * phys(gy.coeffs)
    chat = np.fft.fft2(prod) / (m * m)
    return chat[i1, i2]


def _centered(c: np.ndarray, n: int) -> np.ndarray:
    return np.roll(c, (n // 2 - 1, n // 2 - 1), axis=(0, 1))


def _advect_convolution(u: VectorSpectralField, gx: SpectralField, gy: SpectralField) -> np.ndarray:
    # Exact truncated double sum: out_l = sum_{j+k=l} uhat_j . (i k) ghat_k,
    # realised as a direct full convolution in the centered layout.
    n = u.grid.n
    conv = convolve2d(_centered(u.x1.coeffs, n), _centered(gx.coeffs, n), mode="full")
    conv += convolve2d(_centered(u.x2.coeffs, n), _centered(gy.coeffs, n), mode="full")
    lo = n // 2 - 1
    window = conv[lo : lo + n, lo : lo + n]
    return np.roll(window, (-(n // 2 - 1), -(n // 2 - 1)), axis=(0, 1))


def advect(u: VectorSpectralField, g: SpectralField, method: str = "pseudospectral") -> SpectralField:
    """Advection term (u . grad) g, projected onto the symmetric mean-free band.

    ``pseudospectral`` zero-pads to >= 3n/2 collocation points per axis, which
    leaves no aliasing in any retained mode; ``convolution`` evaluates the
    truncated convolution sum directly and is the reference oracle.
    """
    _same_grid(u.x1, g)
    if method not in ADVECT_METHODS:
        raise ValueError(f"unknown advection method {method!r}")
    gx = derivative(g, 1)
    gy = derivative(g, 2)
    if method == "pseudospectral":
        out = _advect_pseudospectral(u, gx, gy)
    else:
        out = _advect_convolution(u, gx, gy)
    out = _project_band(out, g.grid.n)
    return _field(g.grid, out, u.is_real and g.is_real)


def tqg_rhs(state: TQGState, data: TQGDataSet, method: str = "pseudospectral") -> tuple[SpectralField, SpectralField]:
    """Complexified right-hand side: (db, dq) = (-B(u,b), -B(u,q-b) - B(u_h,b)).

    The same bilinear formula applies to complex coefficient fields, matching
    the componentwise complexification of the real advection term.
    """
    _same_grid(state.b, data.b0)
    psi = solve_streamfunction(state.q, data.f)
    u = perp_gradient(psi)
    db = -advect(u, state.b, method)
    dq = -advect(u, state.q - state.b, method) - advect(data.u_h, state.b, method)
    return db, dq


def inner_product_complex(f: SpectralField, g: SpectralField) -> complex:
    """Complexified pairing (2 pi)^2 sum_k fhat_k conj(ghat_k).

    Equals the integral of f * conj(g) over the square, and reduces to the
    real L2 inner product when both fields are real.
    """
    _same_grid(f, g)
    return complex(TWO_PI_SQ * np.sum(f.coeffs * np.conj(g.coeffs)))


def trilinear(f: VectorSpectralField, g: SpectralField, h: SpectralField) -> complex:
    """Trilinear advection pairing <(f . grad) g, h>, by the convolution oracle."""
    return inner_product_complex(advect(f, g, "convolution"), h)
