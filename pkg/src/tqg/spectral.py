"""Mean-free spectral fields on the doubly periodic square of side 2*pi.

A field is a dense complex coefficient array in FFT index order over the
integer wavevectors k in {-n/2+1, ..., n/2}^2; the slot that numpy labels
-n/2 carries the frequency +n/2 here (the two coincide on the collocation
grid).  Coefficients are the amplitudes of the series

    f(x) = sum_k  fhat_k * exp(i k . x),

so the forward discrete transform includes a 1/n^2 factor.  The zero (mean)
coefficient is pinned to exactly 0 by every constructor and operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GridMismatchError

__all__ = [
    "SpectralGrid",
    "SpectralField",
    "VectorSpectralField",
    "make_grid",
    "zero_field",
    "from_modes",
    "transform_to_physical",
    "transform_to_spectral",
    "derivative",
    "perp_gradient",
    "divergence_defect",
    "reality_defect",
    "random_gevrey_field",
]

TWO_PI = 2.0 * np.pi


class SpectralGrid:
    """Wavevector bookkeeping for an n-by-n mode lattice (n even).

    Instances are immutable in spirit: all derived arrays are computed once
    and marked read-only.  Grids compare equal iff they have the same n.
    """

    def __init__(self, n: int):
        if n % 2 != 0:
            raise ValueError(f"N must be even, got {n}")
        if not 4 <= n <= 1024:
            raise ValueError(f"N must lie in [4, 1024], got {n}")
        self.n = int(n)
        k1d = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)
        k1d[n // 2] = n // 2  # +n/2 and -n/2 alias on the collocation grid
        kx, ky = np.meshgrid(k1d, k1d, indexing="ij")
        self.k1d = k1d
        self.kx = kx
        self.ky = ky
        self.ksq = kx * kx + ky * ky
        self.kmag = np.sqrt(self.ksq.astype(np.float64))
        for arr in (self.k1d, self.kx, self.ky, self.ksq, self.kmag):
            arr.flags.writeable = False

    # -- derived tables ----------------------------------------------------

    @cached_property
    def rev_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays mapping each mode to its negated wavevector (mod n)."""
        idx = np.arange(self.n)
        i, j = np.meshgrid(idx, idx, indexing="ij")
        return (-i) % self.n, (-j) % self.n

    @cached_property
    def pad_plan(self) -> tuple[int, np.ndarray, np.ndarray]:
        """Padded transform size (>= 3n/2, even) and embedding indices."""
        m = 3 * self.n // 2
        if m % 2:
            m += 1
        return m, (self.kx % m), (self.ky % m)

    @cached_property
    def shell_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(shell index per mode, shell |k| values, shell populations)."""
        flat = self.ksq.ravel()
        values, index = np.unique(flat, return_inverse=True)
        pops = np.bincount(index, minlength=len(values))
        mags = np.sqrt(values.astype(np.float64))
        return index.reshape(self.ksq.shape), mags, pops

    # -- basics ------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpectralGrid) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("SpectralGrid", self.n))

    def __repr__(self) -> str:
        return f"SpectralGrid(n={self.n})"


def make_grid(n: int) -> SpectralGrid:
    """Create a grid with n modes per axis; n must be even and in [4, 1024]."""
    return SpectralGrid(n)


def _same_grid(a, b) -> SpectralGrid:
    ga = a.grid if hasattr(a, "grid") else a
    gb = b.grid if hasattr(b, "grid") else b
    if ga != gb:
        raise GridMismatchError(f"grid mismatch: n={ga.n} vs n={gb.n}")
    return ga


@dataclass(frozen=True)
class SpectralField:
    """A scalar field held as mean-free Fourier coefficients.

    ``is_real`` records that the coefficients are conjugate-symmetric, i.e.
    the field takes real values on the collocation grid.
    """

    grid: SpectralGrid
    coeffs: np.ndarray
    is_real: bool = False

    def __post_init__(self):
        n = self.grid.n
        if self.coeffs.shape != (n, n):
            raise ValueError(
                f"coefficient array has shape {self.coeffs.shape}, expected {(n, n)}"
            )

    # Linear combinations preserve the mean-free property and reality.

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _same_grid(self, other)
        return _field(self.grid, self.coeffs + other.coeffs, self.is_real and other.is_real)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _same_grid(self, other)
        return _field(self.grid, self.coeffs - other.coeffs, self.is_real and other.is_real)

    def __mul__(self, z) -> "SpectralField":
        z = complex(z)
        return _field(self.grid, self.coeffs * z, self.is_real and z.imag == 0.0)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return _field(self.grid, -self.coeffs, self.is_real)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))


@dataclass(frozen=True)
class VectorSpectralField:
    """A two-component field; both components share one grid."""

    x1: SpectralField
    x2: SpectralField

    def __post_init__(self):
        _same_grid(self.x1, self.x2)

    @property
    def grid(self) -> SpectralGrid:
        return self.x1.grid

    @property
    def is_real(self) -> bool:
        return self.x1.is_real and self.x2.is_real

    def __mul__(self, z) -> "VectorSpectralField":
        return VectorSpectralField(self.x1 * z, self.x2 * z)

    __rmul__ = __mul__


def _field(grid: SpectralGrid, coeffs: np.ndarray, is_real: bool = False) -> SpectralField:
    """Internal constructor: coerce dtype, pin the mean mode, freeze the array."""
    c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    if c is coeffs:
        c = c.copy()
    c[0, 0] = 0.0
    c.flags.writeable = False
    return SpectralField(grid, c, is_real)


def zero_field(grid: SpectralGrid) -> SpectralField:
    return _field(grid, np.zeros((grid.n, grid.n), dtype=np.complex128), is_real=True)


def from_modes(
    grid: SpectralGrid,
    entries: Iterable[tuple[Sequence[int], complex]],
    enforce_real: bool = False,
) -> SpectralField:
    """Build a field from explicit (wavevector, amplitude) pairs.

    With ``enforce_real`` the conjugate partner of every entry is filled in
    automatically.  Modes that are their own partner under negation modulo n
    (Nyquist combinations) must then carry a real amplitude.
    """
    n = grid.n
    half = n // 2
    c = np.zeros((n, n), dtype=np.complex128)
    for k, amp in entries:
        k1, k2 = int(k[0]), int(k[1])
        if not (-half + 1 <= k1 <= half and -half + 1 <= k2 <= half):
            raise ValueError(f"wavevector ({k1}, {k2}) outside grid range for N={n}")
        if k1 == 0 and k2 == 0:
            raise ValueError("mean mode not allowed")
        amp = complex(amp)
        i = (k1 % n, k2 % n)
        if enforce_real:
            ri = ((-k1) % n, (-k2) % n)
            if ri == i:
                if amp.imag != 0.0:
                    raise ValueError(
                        f"mode ({k1}, {k2}) is self-conjugate on this grid and "
                        "requires a real amplitude when enforce_real is set"
                    )
                c[i] = amp
            else:
                c[i] = amp
                c[ri] = amp.conjugate()
        else:
            c[i] = amp
    return _field(grid, c, enforce_real)


def transform_to_physical(field: SpectralField) -> np.ndarray:
    """Evaluate the Fourier series on the n-by-n collocation grid."""
    n = field.grid.n
    return np.fft.ifft2(field.coeffs) * (n * n)


def transform_to_spectral(values: np.ndarray, grid: SpectralGrid) -> SpectralField:
    """Forward transform of collocation values; the mean mode is projected out.

    Reality of the input is detected from the conjugate symmetry of the
    resulting coefficients rather than trusted from the caller.
    """
    vals = np.asarray(values, dtype=np.complex128)
    if vals.shape != (grid.n, grid.n):
        raise ValueError(f"value array has shape {vals.shape}, expected {(grid.n, grid.n)}")
    c = np.fft.fft2(vals) / (grid.n * grid.n)
    c[0, 0] = 0.0
    scale = float(np.max(np.abs(c)))
    is_real = scale == 0.0 or _symmetry_defect(grid, c) <= 1e-14 * scale
    return _field(grid, c, is_real)


def _symmetry_defect(grid: SpectralGrid, coeffs: np.ndarray) -> float:
    ri, rj = grid.rev_index
    return float(np.max(np.abs(coeffs[ri, rj] - np.conj(coeffs))))


def reality_defect(field: SpectralField) -> float:
    """Worst-case deviation from conjugate symmetry, max_k |fhat(-k) - conj(fhat(k))|."""
    return _symmetry_defect(field.grid, field.coeffs)


def _nyquist_content(field: SpectralField, axis: int) -> float:
    half = field.grid.n // 2
    line = field.coeffs[half, :] if axis == 1 else field.coeffs[:, half]
    return float(np.max(np.abs(line)))


def derivative(field: SpectralField, axis: int) -> SpectralField:
    """Spectral partial derivative along axis 1 or 2 (multiplier i*k_axis).

    The +n/2 convention at the Nyquist slot means conjugate symmetry survives
    only when the field carries no content on that line; the is_real flag is
    dropped otherwise.
    """
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    g = field.grid
    mult = 1j * (g.kx if axis == 1 else g.ky)
    keeps_real = field.is_real and _nyquist_content(field, axis) == 0.0
    return _field(g, field.coeffs * mult, keeps_real)


def perp_gradient(psi: SpectralField) -> VectorSpectralField:
    """Rotated gradient (-d/dx2, d/dx1) of a streamfunction; divergence-free."""
    g = psi.grid
    u1 = _field(g, psi.coeffs * (-1j * g.ky), psi.is_real and _nyquist_content(psi, 2) == 0.0)
    u2 = _field(g, psi.coeffs * (1j * g.kx), psi.is_real and _nyquist_content(psi, 1) == 0.0)
    return VectorSpectralField(u1, u2)


def divergence_defect(u: VectorSpectralField) -> float:
    """max_k |k . uhat_k|; exactly zero for perp-gradient fields."""
    g = u.grid
    return float(np.max(np.abs(g.kx * u.x1.coeffs + g.ky * u.x2.coeffs)))


def random_gevrey_field(
    grid: SpectralGrid,
    rng_seed,
    phi_star: float = 0.5,
    p: float = 2.0,
    amplitude: float = 1.0,
    real: bool = True,
    kmax: int | None = None,
) -> SpectralField:
    """Random field with planted exponential-polynomial coefficient decay.

    Coefficient magnitudes follow amplitude * rho_k * exp(-phi_star*|k|) *
    (1+|k|)^(-p) with rho_k uniform in [1/2, 1] and uniform phases.  Modes are
    restricted to max(|k1|,|k2|) <= kmax (default n/2 - 1, which keeps the
    lattice closed under negation so real fields stay exactly real under
    differentiation and products).  Deterministic for a fixed seed.
    """
    if phi_star < 0:
        raise ValueError(f"phi_star must be nonnegative, got {phi_star}")
    if p < 0:
        raise ValueError(f"p must be nonnegative, got {p}")
    n = grid.n
    if kmax is None:
        kmax = n // 2 - 1
    if not 1 <= kmax <= n // 2 - 1:
        raise ValueError(f"kmax must lie in [1, {n // 2 - 1}], got {kmax}")
    rng = np.random.default_rng(rng_seed)
    rho = rng.uniform(0.5, 1.0, size=(n, n))
    alpha = rng.uniform(0.0, TWO_PI, size=(n, n))
    mag = amplitude * rho * np.exp(-phi_star * grid.kmag) * (1.0 + grid.kmag) ** (-p)
    band = (np.abs(grid.kx) <= kmax) & (np.abs(grid.ky) <= kmax)
    band[0, 0] = False
    a = np.where(band, mag * np.exp(1j * alpha), 0.0)
    if real:
        # Draw one half-lattice and mirror; the band contains no self-paired
        # modes, so every populated mode keeps magnitude mag exactly.
        pos = (grid.kx > 0) | ((grid.kx == 0) & (grid.ky > 0))
        ri, rj = grid.rev_index
        c = np.where(pos, a, np.conj(a[ri, rj]))
        c = np.where(band, c, 0.0)
    else:
        c = a
    return _field(grid, c, is_real=real)
