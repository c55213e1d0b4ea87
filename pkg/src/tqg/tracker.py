"""Radius-of-analyticity tracking along complex-time rays.

The tracked radius phi shrinks according to d(phi)/ds = -c * Theta(s) * phi
with Theta the weighted-norm functional of the running state plus a constant
data part; the monitors then check the induced a-priori bounds on the
weighted energy

    G(s) = ||e^{phi(s) L} b||_{H^4}^2 + ||e^{phi(s) L} q||_{H^3}^2:

(i) G(s) <= G(0) + c * s * cos(theta) * D^{3/2} on the whole trace, and
(ii) G(s) <= D wherever 0 < s * sqrt(D) < 1/(c * cos(theta)), with
D the squared weighted norm of the data.

Runs store per-step shell profiles (power sums of |coeff|^2 over radial
shells), which make re-evolving phi, Theta and G under a different constant c
exact and cheap; calibration scans a dyadic grid for the smallest c whose
re-evolved monitors pass on every run.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dynamics import TQGDataSet, TQGState
from .errors import CalibrationError, GevreyOverflowError, TqgError
from .norms import _gev_sq, product_norm_sq

__all__ = [
    "RadiusTrace",
    "RunRecord",
    "MonitorViolation",
    "MonitorReport",
    "GevreyTracker",
    "theta_functional",
    "data_functional",
    "gevrey_energy",
    "evolve_phi",
    "region_predicate",
    "trace_from_record",
    "bound_monitor",
    "calibrate_c",
    "CALIBRATION_GRID",
]

log = logging.getLogger("tqg.tracker")

# Dyadic calibration grid 2^m, m = -4 .. 10.
CALIBRATION_GRID = tuple(2.0 ** m for m in range(-4, 11))

_LOG_CAP = math.log(1e300)

# Sobolev orders of the tracked quantities.
_R_B, _R_Q = 4.0, 3.0          # state part of Theta and of G
_R_DATA_THETA = 3.0            # data part of Theta
_R_DATA_D = 3.5                # data part of D
_R_B_HI, _R_Q_HI = 4.5, 3.5    # optional high-order column Gamma


def theta_functional(state: TQGState, data: TQGDataSet, phi: float) -> float:
    """Shrink-rate functional: weighted state norm at (4,3) with weight phi
    plus weighted data norm at (3,3) with the fixed weight phi0."""
    state_part = math.sqrt(product_norm_sq(state.b, _R_B, state.q, _R_Q, phi))
    data_part = math.sqrt(
        product_norm_sq(data.u_h, _R_DATA_THETA, data.f, _R_DATA_THETA, data.phi0)
    )
    return state_part + data_part


def data_functional(data: TQGDataSet) -> float:
    """Squared weighted size of the data: initial state at (4,3) plus
    forcing pair at (7/2,7/2), all with weight phi0."""
    return product_norm_sq(data.b0, _R_B, data.q0, _R_Q, data.phi0) + product_norm_sq(
        data.u_h, _R_DATA_D, data.f, _R_DATA_D, data.phi0
    )


def gevrey_energy(state: TQGState, phi: float) -> float:
    """Weighted energy G = ||e^{phi L} b||_{H^4}^2 + ||e^{phi L} q||_{H^3}^2."""
    return product_norm_sq(state.b, _R_B, state.q, _R_Q, phi)


def evolve_phi(phi0: float, thetas, ds: float, c: float) -> float:
    """phi after integrating the shrink ODE with trapezoid-rule Theta samples.

    ``thetas`` holds Theta at the uniformly spaced points 0, ds, ..., through
    the newest sample; the result is phi0 * exp(-c * integral).
    """
    if phi0 <= 0:
        raise ValueError(f"phi0 must be positive, got {phi0}")
    if ds <= 0:
        raise ValueError(f"ds must be positive, got {ds}")
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 1 or len(thetas) == 0:
        raise ValueError("thetas must be a nonempty 1-d sequence")
    if np.any(thetas < 0):
        raise ValueError("Theta samples must be nonnegative")
    integral = 0.0
    for i in range(1, len(thetas)):
        integral += ds * (thetas[i - 1] + thetas[i]) / 2.0
    return phi0 * math.exp(-c * integral)


def region_predicate(s: float, theta: float, c: float, d_data: float) -> bool:
    """True iff 0 < s * sqrt(D) < 1/(c * cos(theta))."""
    if not -math.pi / 2 < theta < math.pi / 2:
        raise ValueError(f"theta must lie strictly inside (-pi/2, pi/2), got {theta}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if d_data < 0:
        raise ValueError(f"d_data must be nonnegative, got {d_data}")
    x = s * math.sqrt(d_data)
    return 0.0 < x < 1.0 / (c * math.cos(theta))


@dataclass(frozen=True)
class RunRecord:
    """Per-step shell profiles of one ray run, enough to re-evolve the trace.

    prof_b/prof_q have shape (n_samples, n_shells): row i holds the sums of
    |coeff|^2 over each radial shell at s = i * ds.
    """

    run_id: str
    theta: float
    ds: float
    phi0: float
    shell_mags: np.ndarray
    prof_b: np.ndarray
    prof_q: np.ndarray
    theta_data: float
    d_data: float
    gamma_data: float

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.prof_b.shape[0]) * self.ds

    @property
    def n_samples(self) -> int:
        return self.prof_b.shape[0]


@dataclass(frozen=True)
class RadiusTrace:
    """Sampled trace (s, Theta, phi, G) with its constants; Gamma optional."""

    s: np.ndarray
    theta_vals: np.ndarray
    phi_vals: np.ndarray
    g_vals: np.ndarray
    c: float
    d_data: float
    theta: float
    gamma_vals: np.ndarray | None = None

    @property
    def n_samples(self) -> int:
        return len(self.s)


@dataclass(frozen=True)
class MonitorViolation:
    s: float
    kind: str
    lhs: float
    rhs: float


@dataclass(frozen=True)
class MonitorReport:
    run_id: str
    violations: tuple[MonitorViolation, ...] = ()

    @property
    def first_violation(self) -> MonitorViolation | None:
        return self.violations[0] if self.violations else None

    @property
    def passed(self) -> bool:
        return not self.violations


class GevreyTracker:
    """Observer for integrate_ray: collects shell profiles every step."""

    def __init__(self, data: TQGDataSet, theta: float, ds: float):
        grid = data.grid
        index, mags, _pops = grid.shell_table
        self._index = index.ravel()
        self._mags = mags
        self._nsh = len(mags)
        self.theta = theta
        self.ds = ds
        self.phi0 = data.phi0
        self.theta_data = math.sqrt(
            product_norm_sq(data.u_h, _R_DATA_THETA, data.f, _R_DATA_THETA, data.phi0)
        )
        self.d_data = data_functional(data)
        self.gamma_data = product_norm_sq(
            data.u_h, _R_DATA_D, data.f, _R_DATA_D, data.phi0
        )
        self._prof_b: list[np.ndarray] = []
        self._prof_q: list[np.ndarray] = []

    def _profile(self, coeffs: np.ndarray) -> np.ndarray:
        return np.bincount(
            self._index, weights=(np.abs(coeffs) ** 2).ravel(), minlength=self._nsh
        )

    def __call__(self, s: float, state: TQGState) -> None:
        self._prof_b.append(self._profile(state.b.coeffs))
        self._prof_q.append(self._profile(state.q.coeffs))

    def finish(self, run_id: str = "run") -> RunRecord:
        if not self._prof_b:
            raise TqgError("tracker observed no samples", module="tracker")
        return RunRecord(
            run_id=run_id,
            theta=self.theta,
            ds=self.ds,
            phi0=self.phi0,
            shell_mags=self._mags,
            prof_b=np.array(self._prof_b),
            prof_q=np.array(self._prof_q),
            theta_data=self.theta_data,
            d_data=self.d_data,
            gamma_data=self.gamma_data,
        )


def _shell_energy(mags_pow: np.ndarray, mags: np.ndarray, prof: np.ndarray, phi: float) -> float:
    if phi * mags[-1] > _LOG_CAP:
        bad = mags[(prof > 0) & (phi * mags > _LOG_CAP)]
        if bad.size:
            raise GevreyOverflowError(
                f"gevrey weight overflow: exp(phi*|k|) exceeds 1e300 at shell "
                f"|k|={float(bad[0]):.6g} with phi={phi:.6g}"
            )
        keep = phi * mags <= _LOG_CAP
        return float(np.sum(mags_pow[keep] * np.exp(2.0 * phi * mags[keep]) * prof[keep]))
    return float(np.sum(mags_pow * np.exp(2.0 * phi * mags) * prof))


def trace_from_record(record: RunRecord, c: float, include_gamma: bool = False) -> RadiusTrace:
    """Re-evolve (Theta, phi, G) from stored shell profiles with constant c.

    The discrete scheme matches the live tracker exactly: Theta at step i is
    evaluated with the frozen phi from step i-1, then phi advances by the
    trapezoid-rule exponential.  Re-running with the same c is bit-stable.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    mags = record.shell_mags
    pow_b = mags ** (2.0 * _R_B)
    pow_q = mags ** (2.0 * _R_Q)
    if include_gamma:
        pow_bh = mags ** (2.0 * _R_B_HI)
        pow_qh = mags ** (2.0 * _R_Q_HI)
    n = record.n_samples
    thetas = np.zeros(n)
    phis = np.zeros(n)
    gs = np.zeros(n)
    gammas = np.zeros(n) if include_gamma else None
    integral = 0.0
    phi = record.phi0
    for i in range(n):
        pb, pq = record.prof_b[i], record.prof_q[i]
        state_sq = _shell_energy(pow_b, mags, pb, phi) + _shell_energy(pow_q, mags, pq, phi)
        thetas[i] = math.sqrt(state_sq) + record.theta_data
        if i > 0:
            integral += record.ds * (thetas[i - 1] + thetas[i]) / 2.0
            phi = record.phi0 * math.exp(-c * integral)
        phis[i] = phi
        gs[i] = _shell_energy(pow_b, mags, pb, phi) + _shell_energy(pow_q, mags, pq, phi)
        if include_gamma:
            gammas[i] = (
                _shell_energy(pow_bh, mags, pb, phi)
                + _shell_energy(pow_qh, mags, pq, phi)
                + record.gamma_data
            )
    return RadiusTrace(
        s=record.s,
        theta_vals=thetas,
        phi_vals=phis,
        g_vals=gs,
        c=c,
        d_data=record.d_data,
        theta=record.theta,
        gamma_vals=gammas,
    )


def bound_monitor(trace: RadiusTrace, run_id: str = "run") -> MonitorReport:
    """Check the growth and in-region bounds sample by sample.

    Tolerance 1e-9 * (1 + D) absorbs quadrature and roundoff error.
    """
    d = trace.d_data
    tol = 1e-9 * (1.0 + d)
    cos_t = math.cos(trace.theta)
    g0 = trace.g_vals[0] if trace.n_samples else 0.0
    violations: list[MonitorViolation] = []
    for i in range(trace.n_samples):
        s = float(trace.s[i])
        g = float(trace.g_vals[i])
        growth_rhs = g0 + trace.c * s * cos_t * d ** 1.5 + tol
        if g > growth_rhs:
            violations.append(MonitorViolation(s=s, kind="growth", lhs=g, rhs=growth_rhs))
        if region_predicate(s, trace.theta, trace.c, d) and g > d + tol:
            violations.append(MonitorViolation(s=s, kind="region", lhs=g, rhs=d + tol))
    return MonitorReport(run_id=run_id, violations=tuple(violations))


def calibrate_c(records: list[RunRecord]) -> float:
    """Smallest c on the dyadic grid whose monitors pass on every run.

    phi, Theta and G are re-evolved per candidate from the stored shell
    profiles, so the check is self-consistent in c.
    """
    if not records:
        raise CalibrationError("empty ensemble: no runs to calibrate against")
    for c in CALIBRATION_GRID:
        if all(bound_monitor(trace_from_record(r, c), r.run_id).passed for r in records):
            log.info("calibrate_c: selected c=%.6g", c)
            return c
    worst_id, worst_excess = "", -math.inf
    c_last = CALIBRATION_GRID[-1]
    for r in records:
        report = bound_monitor(trace_from_record(r, c_last), r.run_id)
        for v in report.violations:
            if v.lhs - v.rhs > worst_excess:
                worst_excess = v.lhs - v.rhs
                worst_id = r.run_id
    raise CalibrationError(
        f"no c in [{CALIBRATION_GRID[0]:g}, {c_last:g}] satisfies the bounds; "
        f"worst run: {worst_id}",
        worst_run=worst_id,
    )


def track_ray(
    data: TQGDataSet,
    ray,
    c: float | None = None,
    stride: int = 10,
    method: str = "pseudospectral",
    include_gamma: bool = False,
    run_id: str = "run",
):
    """Integrate a ray while tracking shell profiles; returns
    (trajectory, record, trace, report) with c calibrated when not given."""
    from .integrate import integrate_ray  # local import to avoid a cycle

    tracker = GevreyTracker(data, theta=ray.theta, ds=ray.ds)
    trajectory = integrate_ray(data, ray, stride=stride, observer=tracker, method=method)
    record = tracker.finish(run_id)
    if c is None:
        c = calibrate_c([record])
    trace = trace_from_record(record, c, include_gamma=include_gamma)
    report = bound_monitor(trace, run_id)
    return trajectory, record, trace, report
