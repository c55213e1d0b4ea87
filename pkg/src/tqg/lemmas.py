"""Brute-force numerical checks of the functional inequalities behind the
radius tracking: the weighted trilinear advection estimate, the velocity
regularity bound, a scalar mean-value inequality for weighted powers,
inverse-power lattice sums, and the commutator split of the weighted
advection pairing.

Each check reports the largest observed ratio of left to right side; the
fitted constant is that maximum, and a "violation" counts ratios exceeding
fitted_constant * slack.  Randomised trials derive their streams from
(seed, trial index), so results are independent of execution order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dynamics import advect, inner_product_complex
from .norms import _gev_sq, gevrey_weight, symbol_pow
from .spectral import SpectralField, SpectralGrid, VectorSpectralField, random_gevrey_field

__all__ = [
    "LemmaReport",
    "SplitRecord",
    "SplitSummary",
    "LatticeRow",
    "LatticeSumTable",
    "verify_convest",
    "verify_veltovor",
    "velocity_vorticity_ratio",
    "verify_algebraic",
    "lattice_sum",
    "fit_tail_exponent",
    "log_divergence_slope",
    "leading_term_ratio",
    "verify_i1_i2_split",
    "run_split_trials",
    "LEMMA_NAMES",
]

log = logging.getLogger("tqg.lemmas")

LEMMA_NAMES = ("convest", "veltovor", "algebraic", "lattice", "split")


@dataclass(frozen=True)
class LemmaReport:
    """Outcome of one randomised or gridded inequality check."""

    lemma_id: str
    trials: int
    max_ratio: float
    fitted_constant: float
    violations: int
    slack: float = 1.0
    parameters: dict = dc_field(default_factory=dict)


def _trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))


# Decay laws cycle deterministically with the trial index (all combinations
# every len(_P_LAWS) * len(_PHI_LAWS) trials).  Random laws would make the
# ensemble maximum track whichever rare slow-decay corner happened to be
# drawn, so fitted constants could not be compared across seed batches.
_P_LAWS = (1.0, 1.5, 2.0, 2.5, 3.0)
_PHI_LAWS = (0.1, 0.35, 0.6)


def _trial_fields(grid: SpectralGrid, seed: int, trial: int, n_fields: int, kmax: int):
    """Independent random fields for one trial, with stratified decay laws."""
    ss = _trial_seed(seed, trial)
    fields = []
    for i, child in enumerate(ss.spawn(n_fields)):
        p = _P_LAWS[(trial + i) % len(_P_LAWS)]
        phi_star = _PHI_LAWS[(trial // len(_P_LAWS) + i) % len(_PHI_LAWS)]
        fields.append(
            random_gevrey_field(
                grid, child, phi_star=phi_star, p=p, amplitude=1.0, real=True, kmax=kmax
            )
        )
    return fields


def _weighted(f: SpectralField, r: float, phi: float) -> SpectralField:
    """Apply the weight |k|^r e^(phi |k|) coefficientwise."""
    return symbol_pow(gevrey_weight(f, phi), r)


def _hnorm(obj, r: float, phi: float = 0.0) -> float:
    return math.sqrt(_gev_sq(obj, r, phi))


# ---------------------------------------------------------------------------
# trilinear advection estimate
# ---------------------------------------------------------------------------

def convest_ratio(
    grid: SpectralGrid,
    r: float,
    phi: float,
    u: VectorSpectralField,
    v: SpectralField,
    w: SpectralField,
) -> float:
    """Ratio of the weighted advection pairing to its two-group bound.

    Left side: |< |k|^r e^{phi|k|} (u.grad v), |k|^r e^{phi|k|} w >| by the
    convolution oracle.  Right side: ||u||_r ||v||_r ||w||_r plus
    phi * (||e^phi v||_r ||e^phi u||_{r+1/2} + ||e^phi u||_r ||e^phi v||_{r+1/2})
    * ||e^phi w||_{r+1/2}.  u need not be divergence-free.
    """
    a = advect(u, v, "convolution")
    lhs = abs(inner_product_complex(_weighted(a, r, phi), _weighted(w, r, phi)))
    g1 = _hnorm(u, r) * _hnorm(v, r) * _hnorm(w, r)
    g2 = phi * (
        _hnorm(v, r, phi) * _hnorm(u, r + 0.5, phi)
        + _hnorm(u, r, phi) * _hnorm(v, r + 0.5, phi)
    ) * _hnorm(w, r + 0.5, phi)
    rhs = g1 + g2
    if rhs == 0.0:
        return 0.0
    return lhs / rhs


def verify_convest(
    grid: SpectralGrid, r: float, phi: float, trials: int, seed: int
) -> LemmaReport:
    """Randomised check of the trilinear advection estimate."""
    if r <= 2.5:
        raise ValueError(f"r must exceed 5/2, got {r}")
    if phi < 0:
        raise ValueError(f"phi must be nonnegative, got {phi}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    kmax = max(1, grid.n // 3)
    max_ratio = 0.0
    for t in range(trials):
        u1, u2, v, w = _trial_fields(grid, seed, t, 4, kmax)
        ratio = convest_ratio(grid, r, phi, VectorSpectralField(u1, u2), v, w)
        max_ratio = max(max_ratio, ratio)
    return LemmaReport(
        lemma_id="convest",
        trials=trials,
        max_ratio=max_ratio,
        fitted_constant=max_ratio,
        violations=0,
        parameters={"N": grid.n, "r": r, "phi": phi, "seed": seed, "kmax": kmax},
    )


# ---------------------------------------------------------------------------
# velocity regularity bound
# ---------------------------------------------------------------------------

def velocity_vorticity_ratio(psi: SpectralField, r: float) -> float:
    """||perp_grad psi||_{H^{r+1}}^2 / ||(Lap - 1) psi||_{H^r}^2.

    Per mode this is |k|^4 / (|k|^2 + 1)^2 < 1, so the ratio never reaches 1.
    """
    from .spectral import perp_gradient, _field

    g = psi.grid
    u = perp_gradient(psi)
    omega = _field(g, psi.coeffs * (-(g.ksq.astype(np.float64) + 1.0)), psi.is_real)
    num = _gev_sq(u, r + 1.0, 0.0)
    den = _gev_sq(omega, r, 0.0)
    if den == 0.0:
        return 0.0
    return num / den


def verify_veltovor(grid: SpectralGrid, r: float, trials: int, seed: int) -> LemmaReport:
    """Randomised check that velocity gains one derivative with constant < 1."""
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    max_ratio = 0.0
    violations = 0
    for t in range(trials):
        (psi,) = _trial_fields(grid, seed, t, 1, grid.n // 2 - 1)
        ratio = velocity_vorticity_ratio(psi, r)
        if ratio >= 1.0:
            violations += 1
        max_ratio = max(max_ratio, ratio)
    return LemmaReport(
        lemma_id="veltovor",
        trials=trials,
        max_ratio=max_ratio,
        fitted_constant=1.0,
        violations=violations,
        parameters={"N": grid.n, "r": r, "seed": seed},
    )


# ---------------------------------------------------------------------------
# scalar mean-value inequality for weighted powers
# ---------------------------------------------------------------------------

def verify_algebraic(
    r: float,
    phi_values,
    xi_values,
    eta_values,
) -> LemmaReport:
    """Grid scan of |xi^r e^{phi xi} - eta^r e^{phi eta}| against
    |xi-eta| * [ (|xi-eta|^{r-1} + eta^{r-1})
                 + phi (|xi-eta|^r + eta^r) e^{phi(|xi-eta| + eta)} ].

    Diagonal points xi == eta are asserted to give an exactly zero left side
    and are excluded from the ratio statistics.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    xi = np.asarray(xi_values, dtype=np.float64)
    eta = np.asarray(eta_values, dtype=np.float64)
    if np.any(xi < 0) or np.any(eta < 0):
        raise ValueError("xi and eta grids must be nonnegative")
    x, e = np.meshgrid(xi, eta, indexing="ij")
    max_ratio = 0.0
    trials = 0
    with np.errstate(invalid="ignore"):
        for phi in phi_values:
            if phi < 0:
                raise ValueError(f"phi must be nonnegative, got {phi}")
            lhs = np.abs(x ** r * np.exp(phi * x) - e ** r * np.exp(phi * e))
            d = np.abs(x - e)
            diag = d == 0.0
            if np.any(lhs[diag] != 0.0):
                raise AssertionError("left side must vanish exactly on the diagonal")
            bracket = d ** (r - 1.0) + e ** (r - 1.0) + phi * (d ** r + e ** r) * np.exp(
                phi * (d + e)
            )
            rhs = d * bracket
            mask = ~diag
            ratios = lhs[mask] / rhs[mask]
            trials += int(np.count_nonzero(mask))
            max_ratio = max(max_ratio, float(np.max(ratios)))
    return LemmaReport(
        lemma_id="algebraic",
        trials=trials,
        max_ratio=max_ratio,
        fitted_constant=max_ratio,
        violations=0,
        parameters={
            "r": r,
            "phi_values": list(map(float, phi_values)),
            "xi_points": len(xi),
            "eta_points": len(eta),
        },
    )


# ---------------------------------------------------------------------------
# inverse-power lattice sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeRow:
    radius: float
    partial_sum: float
    tail_estimate: float | None


@dataclass(frozen=True)
class LatticeSumTable:
    r: float
    rows: tuple[LatticeRow, ...]
    limit: float | None
    tail_coefficient: float | None

    @property
    def radii(self) -> np.ndarray:
        return np.array([row.radius for row in self.rows])

    @property
    def partial_sums(self) -> np.ndarray:
        return np.array([row.partial_sum for row in self.rows])


def _squared_radius_counts(max_msq: int) -> np.ndarray:
    """Counts of integer lattice points with |j|^2 = m, for m = 0 .. max_msq."""
    cnt = np.zeros(max_msq + 1, dtype=np.int64)
    amax = math.isqrt(max_msq)
    a = np.arange(1, amax + 1, dtype=np.int64)
    cnt[a * a] += 4  # the four axis points at each radius a
    chunk = max(1, (1 << 22) // max(1, amax))
    bsq = a * a
    for lo in range(0, amax, chunk):
        ablock = a[lo : lo + chunk]
        m = ablock[:, None] * ablock[:, None] + bsq[None, :]
        m = m[m <= max_msq]
        cnt += np.bincount(m, minlength=max_msq + 1).astype(np.int64)[: max_msq + 1] * 4
    return cnt


def lattice_sum(r: float, radii) -> LatticeSumTable:
    """Partial sums S(R) = sum_{0 < |j| <= R} |j|^(-2(r - 3/2)) over the
    integer lattice, with a tail-model extrapolation when r > 5/2.

    The tail model is S(inf) - S(R) ~ C * R^(-(2r-5)); the limit and C come
    from a least-squares fit of (1, -R^(-(2r-5))) against the partial sums
    over the larger half of the requested radii.
    """
    radii = sorted(float(x) for x in radii)
    if not radii:
        raise ValueError("at least one radius is required")
    if radii[0] <= 0:
        raise ValueError("radii must be positive")
    s_exp = r - 1.5
    rmax = radii[-1]
    sums = []
    if rmax < 1.0:
        sums = [0.0 for _ in radii]  # no lattice point has |j| < 1
    else:
        max_msq = int(math.floor(rmax * rmax + 1e-9))
        cnt = _squared_radius_counts(max_msq)
        m = np.arange(1, max_msq + 1, dtype=np.float64)
        cum = np.cumsum(cnt[1:] * m ** (-s_exp))
        for radius in radii:
            msq = int(math.floor(radius * radius + 1e-9))
            sums.append(float(cum[msq - 1]) if msq >= 1 else 0.0)
    limit = None
    coeff = None
    kappa = 2.0 * r - 5.0
    if kappa > 0 and len(radii) >= 3:
        rad = np.array(radii)
        s_arr = np.array(sums)
        sel = rad >= rad[-1] / 2.0
        if np.count_nonzero(sel) < 3:
            sel = np.ones_like(rad, dtype=bool)
        design = np.column_stack([np.ones(np.count_nonzero(sel)), -rad[sel] ** (-kappa)])
        sol, *_ = np.linalg.lstsq(design, s_arr[sel], rcond=None)
        limit, coeff = float(sol[0]), float(sol[1])
    rows = tuple(
        LatticeRow(
            radius=radius,
            partial_sum=s,
            tail_estimate=(limit - s) if limit is not None else None,
        )
        for radius, s in zip(radii, sums)
    )
    return LatticeSumTable(r=r, rows=rows, limit=limit, tail_coefficient=coeff)


def fit_tail_exponent(table: LatticeSumTable) -> float:
    """Slope of log(S(R_{i+1}) - S(R_i)) against log R_i.

    For a tail C * R^(-kappa) sampled on a geometric ladder the slope is
    -kappa, independent of the fitted limit.
    """
    rad = table.radii
    sums = table.partial_sums
    diffs = np.diff(sums)
    keep = diffs > 0
    if np.count_nonzero(keep) < 2:
        raise ValueError("not enough increasing partial sums to fit a tail exponent")
    x = np.log(rad[:-1][keep])
    y = np.log(diffs[keep])
    slope = float(np.polyfit(x, y, 1)[0])
    return slope


def log_divergence_slope(table: LatticeSumTable, tail_fraction: float = 0.5) -> float:
    """Slope of S(R) against log R over the largest radii (2*pi if marginal)."""
    rad = table.radii
    sums = table.partial_sums
    sel = rad >= rad[-1] * tail_fraction
    if np.count_nonzero(sel) < 2:
        sel = np.ones_like(rad, dtype=bool)
    return float(np.polyfit(np.log(rad[sel]), sums[sel], 1)[0])


def leading_term_ratio(r_values, radii=None) -> list[tuple[float, float]]:
    """Extrapolated lattice-sum limit divided by pi*(2r-3)/(2r-5), per r."""
    out = []
    if radii is None:
        radii = np.unique(np.round(np.geomspace(64, 2048, 14))).tolist()
    for r in r_values:
        if 2.0 * r - 5.0 <= 0:
            raise ValueError(f"leading-term ratio needs r > 5/2, got {r}")
        table = lattice_sum(r, radii)
        leading = math.pi * (2.0 * r - 3.0) / (2.0 * r - 5.0)
        out.append((float(r), table.limit / leading))
    return out


# ---------------------------------------------------------------------------
# commutator split of the weighted pairing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitRecord:
    """One trial of the weighted-pairing split: values, identity error, bounds."""

    i1: complex
    i2: complex
    total: complex
    split_rel_err: float
    i1_bound: float
    i2a_bound: float
    i2b_bound: float

    @property
    def i1_ratio(self) -> float | None:
        return abs(self.i1) / self.i1_bound if self.i1_bound > 0 else None

    @property
    def i2_ratio(self) -> float | None:
        denom = self.i2a_bound + self.i2b_bound
        return abs(self.i2) / denom if denom > 0 else None


def verify_i1_i2_split(
    grid: SpectralGrid,
    r: float,
    phi: float,
    u: VectorSpectralField,
    v: SpectralField,
    w: SpectralField,
) -> SplitRecord:
    """Split the weighted pairing <W(u.grad v), W w> into the commuted part
    I1 = <(u.grad)(W v), W w> and the remainder I2, all via the convolution
    oracle, and record the bound material for each part.

    W is the weight |k|^r e^{phi|k|}.  I1 + I2 reproduces the total pairing
    up to roundoff; I2 is computed as <(u.grad) v, W^2 w> - I1 so both
    routes through the weight are exercised.
    """
    if phi < 0:
        raise ValueError(f"phi must be nonnegative, got {phi}")
    wv = _weighted(v, r, phi)
    ww = _weighted(w, r, phi)
    ww2 = _weighted(ww, r, phi)  # W^2 w
    a_plain = advect(u, v, "convolution")
    total = inner_product_complex(_weighted(a_plain, r, phi), ww)
    i1 = inner_product_complex(advect(u, wv, "convolution"), ww)
    t1 = inner_product_complex(a_plain, ww2)
    i2 = t1 - i1
    scale = max(abs(total), abs(i1), abs(i2), 1e-300)
    split_rel_err = abs((i1 + i2) - total) / scale
    i1_bound = phi * _hnorm(u, r, phi) * _hnorm(v, r + 0.5, phi) * _hnorm(w, r + 0.5, phi)
    i2a_bound = _hnorm(u, r) * _hnorm(v, r) * _hnorm(w, r)
    i2b_bound = phi * (
        _hnorm(v, r, phi) * _hnorm(u, r + 0.5, phi)
        + _hnorm(u, r, phi) * _hnorm(v, r + 0.5, phi)
    ) * _hnorm(w, r + 0.5, phi)
    return SplitRecord(
        i1=i1,
        i2=i2,
        total=total,
        split_rel_err=split_rel_err,
        i1_bound=i1_bound,
        i2a_bound=i2a_bound,
        i2b_bound=i2b_bound,
    )


@dataclass(frozen=True)
class SplitSummary:
    trials: int
    max_split_err: float
    i1_constant: float | None
    i2_constant: float
    i1_peak: float | None
    i2_peak: float
    parameters: dict


def run_split_trials(
    grid: SpectralGrid, r: float, phi: float, trials: int, seed: int
) -> SplitSummary:
    """Randomised split trials over stratified decay laws.

    The fitted constants are the 90th-percentile bound ratios over the
    ensemble.  Sample maxima of these ratio distributions keep creeping with
    the trial count (the within-law tails are roughly lognormal), so a raw
    maximum cannot be compared across seed batches; a high quantile is the
    stable estimate of the working constant, and the observed maxima stay
    available as ``i1_peak`` / ``i2_peak``.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    kmax = max(1, grid.n // 3)
    max_err = 0.0
    i1_ratios: list[float] = []
    i2_ratios: list[float] = []
    for t in range(trials):
        u1, u2, v, w = _trial_fields(grid, seed, t, 4, kmax)
        rec = verify_i1_i2_split(grid, r, phi, VectorSpectralField(u1, u2), v, w)
        max_err = max(max_err, rec.split_rel_err)
        if rec.i1_ratio is not None:
            i1_ratios.append(rec.i1_ratio)
        if rec.i2_ratio is not None:
            i2_ratios.append(rec.i2_ratio)
    return SplitSummary(
        trials=trials,
        max_split_err=max_err,
        i1_constant=float(np.quantile(i1_ratios, 0.9)) if i1_ratios else None,
        i2_constant=float(np.quantile(i2_ratios, 0.9)) if i2_ratios else 0.0,
        i1_peak=max(i1_ratios) if i1_ratios else None,
        i2_peak=max(i2_ratios) if i2_ratios else 0.0,
        parameters={"N": grid.n, "r": r, "phi": phi, "seed": seed, "kmax": kmax},
    )
