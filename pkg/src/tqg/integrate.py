"""Fixed-step RK4 integration along rays and polylines in complex time.

On the ray zeta = s * exp(i*theta) the state obeys dX/ds = e^{i theta} *
F(X) with F the complexified model vector field; a polyline path chains
straight segments with per-segment unit directions.  A finite-difference
Cauchy-Riemann residual probes holomorphy of the time dependence.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dynamics import TQGDataSet, TQGState, solve_streamfunction, tqg_rhs
from .errors import BlowUpError
from .norms import _gev_sq, sobolev_norm
from .spectral import SpectralField, perp_gradient, transform_to_physical

__all__ = [
    "RaySpec",
    "RayFailure",
    "Trajectory",
    "step_rk4",
    "integrate_ray",
    "integrate_polyline",
    "cr_residual",
]

log = logging.getLogger("tqg.integrate")

# Norm growth beyond this factor over the initial value is treated as blow-up.
_GROWTH_LIMIT = 1e6
_CFL_RECHECK = 100


@dataclass(frozen=True)
class RaySpec:
    """A ray in complex time: angle theta, arc length s_max, step ds.

    theta must lie strictly inside (-pi/2, pi/2); s_max/ds must be an integer
    up to rounding tolerance 1e-9.  s_max = 0 denotes the trivial ray (the
    trajectory is a single snapshot and ds is unused).
    """

    theta: float
    s_max: float
    ds: float

    def __post_init__(self):
        if not -math.pi / 2 < self.theta < math.pi / 2:
            raise ValueError(
                f"theta must lie strictly inside (-pi/2, pi/2), got {self.theta}"
            )
        if self.s_max < 0:
            raise ValueError(f"s_max must be nonnegative, got {self.s_max}")
        if self.ds <= 0:
            raise ValueError(f"ds must be positive, got {self.ds}")
        if self.s_max > 0:
            if self.ds > self.s_max:
                raise ValueError(f"ds={self.ds} exceeds s_max={self.s_max}")
            ratio = self.s_max / self.ds
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValueError(
                    f"s_max/ds = {ratio!r} is not an integer number of steps"
                )

    @property
    def n_steps(self) -> int:
        return int(round(self.s_max / self.ds)) if self.s_max > 0 else 0

    @property
    def direction(self) -> complex:
        return cmath.exp(1j * self.theta)


@dataclass(frozen=True)
class RayFailure:
    s: float
    message: str


@dataclass
class Trajectory:
    """Snapshots (s, state) at a fixed stride; partial when an error record is set."""

    samples: list[tuple[float, TQGState]] = dc_field(default_factory=list)
    error: RayFailure | None = None


def _axpy(state: TQGState, rhs: tuple[SpectralField, SpectralField], coef: float) -> TQGState:
    return TQGState(state.b + coef * rhs[0], state.q + coef * rhs[1])


def step_rk4(
    state: TQGState,
    data: TQGDataSet,
    direction: complex,
    ds: float,
    method: str = "pseudospectral",
    s_label: float | None = None,
) -> TQGState:
    """One classical RK4 step of dX/ds = direction * F(X); |direction| = 1."""
    d = complex(direction)
    if abs(abs(d) - 1.0) > 1e-12:
        raise ValueError(f"direction must be unimodular, got |direction|={abs(d)!r}")
    if ds <= 0:
        raise ValueError(f"ds must be positive, got {ds}")

    def rhs(x: TQGState) -> tuple[SpectralField, SpectralField]:
        db, dq = tqg_rhs(x, data, method)
        return d * db, d * dq

    k1 = rhs(state)
    k2 = rhs(_axpy(state, k1, ds / 2.0))
    k3 = rhs(_axpy(state, k2, ds / 2.0))
    k4 = rhs(_axpy(state, k3, ds))
    out = TQGState(
        state.b + (ds / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state.q + (ds / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    )
    if not (np.all(np.isfinite(out.b.coeffs)) and np.all(np.isfinite(out.q.coeffs))):
        where = f" at s={s_label:.6g}" if s_label is not None else ""
        raise BlowUpError(f"blow-up or instability detected{where}", s=s_label)
    return out


def _max_speed(state: TQGState, data: TQGDataSet) -> float:
    psi = solve_streamfunction(state.q, data.f)
    u = perp_gradient(psi)
    u1 = transform_to_physical(u.x1)
    u2 = transform_to_physical(u.x2)
    return float(np.max(np.sqrt(np.abs(u1) ** 2 + np.abs(u2) ** 2)))


def _check_step_bound(state: TQGState, data: TQGDataSet, ds: float, s: float) -> None:
    umax = _max_speed(state, data)
    if umax == 0.0:
        return
    bound = 0.5 / (state.grid.n * umax)
    if ds > bound:
        raise BlowUpError(
            f"step size ds={ds:.6g} exceeds the stability bound {bound:.6g} "
            f"(max |u|={umax:.6g}) at s={s:.6g}",
            s=s,
        )


def _h_energy(state: TQGState) -> float:
    return math.sqrt(_gev_sq(state.b, 4.0, 0.0) + _gev_sq(state.q, 3.0, 0.0))


def integrate_ray(
    data: TQGDataSet,
    ray: RaySpec,
    stride: int = 10,
    observer=None,
    method: str = "pseudospectral",
) -> Trajectory:
    """Integrate the complexified model along a ray.

    The observer, if given, is called as observer(s, state) at s = 0 and
    after every accepted step, which is how norm tracking hooks in.  Blow-up
    (non-finite coefficients, energy growth beyond 1e6x, or a violated step
    bound) terminates the run with a partial trajectory and an error record.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    state = data.initial_state()
    traj = Trajectory(samples=[(0.0, state)])
    if observer is not None:
        observer(0.0, state)
    n = ray.n_steps
    if n == 0:
        return traj
    try:
        _check_step_bound(state, data, ray.ds, 0.0)
    except BlowUpError as err:
        traj.error = RayFailure(s=0.0, message=str(err))
        return traj
    e0 = _h_energy(state)
    direction = ray.direction
    log.info("integrate_ray: theta=%.6g s_max=%.6g n_steps=%d", ray.theta, ray.s_max, n)
    for i in range(1, n + 1):
        s = i * ray.ds
        try:
            state = step_rk4(state, data, direction, ray.ds, method, s_label=s)
            e = _h_energy(state)
            if e > _GROWTH_LIMIT * max(e0, 1e-300):
                raise BlowUpError(
                    f"blow-up or instability detected at s={s:.6g}: "
                    f"energy grew by {e / max(e0, 1e-300):.3e}x",
                    s=s,
                )
            if i % _CFL_RECHECK == 0 and i < n:
                _check_step_bound(state, data, ray.ds, s)
        except BlowUpError as err:
            traj.error = RayFailure(s=s, message=str(err))
            log.warning("integrate_ray aborted: %s", err)
            return traj
        if observer is not None:
            observer(s, state)
        if i % stride == 0 or i == n:
            traj.samples.append((s, state))
    return traj


def integrate_polyline(
    data: TQGDataSet,
    points: list[complex],
    ds: float,
    method: str = "pseudospectral",
) -> TQGState:
    """Integrate from points[0] (must be 0) through straight segments.

    Each segment of length L is covered by ceil(L/ds) equal RK4 steps with
    the segment's unit complex direction.
    """
    if ds <= 0:
        raise ValueError(f"ds must be positive, got {ds}")
    if not points or points[0] != 0:
        raise ValueError("polyline must start at 0")
    state = data.initial_state()
    z = complex(points[0])
    for target in points[1:]:
        target = complex(target)
        seg = target - z
        length = abs(seg)
        if length == 0.0:
            continue
        direction = seg / length
        n = max(1, math.ceil(length / ds - 1e-12))
        h = length / n
        for i in range(1, n + 1):
            state = step_rk4(
                state, data, direction, h, method,
                s_label=abs(z) + i * h,
            )
        z = target
    return state


def cr_residual(
    data: TQGDataSet,
    s_center: float,
    theta: float,
    h: float,
    ds: float = 1e-3,
    method: str = "pseudospectral",
) -> float:
    """Finite-difference Cauchy-Riemann defect of the time dependence.

    States are computed at zeta_c +/- h and zeta_c +/- i*h (zeta_c on the
    ray), each reached along the ray to zeta_c and then an axis-parallel
    segment; the centered differences D_x and D_y then feed the residual
    ||D_x b - (1/i) D_y b||_{H^1} + ||D_x q - (1/i) D_y q||_{H^1}, which
    vanishes like h^2 when the trajectory is holomorphic in zeta.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if s_center <= 0:
        raise ValueError(f"s_center must be positive, got {s_center}")
    zc = s_center * cmath.exp(1j * theta)
    probes = {}
    for delta in (h, -h, 1j * h, -1j * h):
        probes[delta] = integrate_polyline(data, [0, zc, zc + delta], ds, method)

    def defect(pick) -> float:
        dx = (pick(probes[h]) - pick(probes[-h])) * (1.0 / (2.0 * h))
        dy = (pick(probes[1j * h]) - pick(probes[-1j * h])) * (1.0 / (2.0 * h))
        # D_x - (1/i) D_y == D_x + i D_y
        return sobolev_norm(dx + 1j * dy, 1.0)

    return defect(lambda st: st.b) + defect(lambda st: st.q)
