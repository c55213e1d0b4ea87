"""TQG constraint solve, advection (both methods), and the trilinear pairing.

The hand-convolution oracle: with u from a single streamfunction mode and g a
single mode, B(u, g) has exactly one output mode whose coefficient is
u_hat_j . (i k) g_hat_k at j + k -- computed on paper and frozen here.
"""

import math

import numpy as np
import pytest

from tqg.dynamics import (
    TQGDataSet,
    TQGState,
    advect,
    bathymetry_velocity,
    inner_product_complex,
    solve_streamfunction,
    tqg_rhs,
    trilinear,
    velocity,
    zero_dataset,
)
from tqg.errors import GridMismatchError
from tqg.norms import sobolev_norm
from tqg.spectral import (
    VectorSpectralField,
    from_modes,
    make_grid,
    perp_gradient,
    random_gevrey_field,
    reality_defect,
    transform_to_physical,
    zero_field,
)

TWO_PI_SQ = (2.0 * math.pi) ** 2


def random_real_pair(grid, seed):
    u = perp_gradient(random_gevrey_field(grid, seed, amplitude=0.5, kmax=grid.n // 3))
    g = random_gevrey_field(grid, seed + 1000, amplitude=0.5, kmax=grid.n // 3)
    return u, g


class TestSolveStreamfunction:
    def test_single_mode_value(self, grid8):
        q = from_modes(grid8, [((1, 0), 1.0)])
        psi = solve_streamfunction(q, zero_field(grid8))
        assert psi.coeffs[1, 0] == pytest.approx(-0.5, rel=1e-15)

    def test_q_equals_f_gives_zero(self, grid16):
        q = random_gevrey_field(grid16, 1)
        psi = solve_streamfunction(q, q)
        assert np.all(psi.coeffs == 0)

    def test_reconstruction_residual(self, grid16):
        q = random_gevrey_field(grid16, 2, real=False)
        f = random_gevrey_field(grid16, 3, real=False)
        psi = solve_streamfunction(q, f)
        # independent reconstruction: (Delta - 1) psi + f
        g = grid16
        recon = psi.coeffs * (-(g.ksq.astype(np.float64)) - 1.0) + f.coeffs
        defect = np.abs(recon - q.coeffs)
        defect[0, 0] = 0.0
        assert np.max(defect) < 1e-13 * max(q.max_abs(), 1.0)

    def test_real_inputs_give_real_psi(self, grid16):
        q = random_gevrey_field(grid16, 4)
        f = random_gevrey_field(grid16, 5)
        psi = solve_streamfunction(q, f)
        assert psi.is_real and reality_defect(psi) < 1e-14


class TestVelocities:
    def test_velocity_single_mode(self, grid8):
        psi = from_modes(grid8, [((1, 0), 1.0)])
        u = velocity(psi)
        assert u.x1.coeffs[1, 0] == 0
        assert u.x2.coeffs[1, 0] == 1j

    def test_bathymetry_half_factor(self, grid8):
        h = from_modes(grid8, [((1, 0), 2.0)])
        uh = bathymetry_velocity(h)
        assert uh.x1.coeffs[1, 0] == 0
        assert uh.x2.coeffs[1, 0] == 1j

    def test_bathymetry_divergence_free(self, grid16):
        h = random_gevrey_field(grid16, 6)
        uh = bathymetry_velocity(h)
        g = grid16
        assert np.max(np.abs(g.kx * uh.x1.coeffs + g.ky * uh.x2.coeffs)) < 1e-13


class TestAdvect:
    def test_two_mode_hand_convolution(self, grid8):
        # u = perp_grad(psi) for psi at (1,0): u_hat_{(1,0)} = (0, i)
        # g at (0,1): (u.grad g)_hat at (1,1) = (0,i).(i*(0,1)) = i*i = -1
        psi = from_modes(grid8, [((1, 0), 1.0)])
        u = velocity(psi)
        g = from_modes(grid8, [((0, 1), 1.0)])
        for method in ("pseudospectral", "convolution"):
            out = advect(u, g, method)
            assert out.coeffs[1, 1] == pytest.approx(-1.0, abs=1e-14)
            assert np.count_nonzero(np.abs(out.coeffs) > 1e-14) == 1

    def test_orthogonal_gradient_degenerate(self, grid8):
        # u has only an x2 component; g depends only on x1
        psi = from_modes(grid8, [((1, 0), 1.0)], enforce_real=True)
        u = velocity(psi)
        g = from_modes(grid8, [((2, 0), 1.0)], enforce_real=True)
        out = advect(u, g, "convolution")
        assert np.max(np.abs(out.coeffs)) < 1e-15

    def test_methods_agree_on_random_fields(self, grid16):
        for seed in range(5):
            u, g = random_real_pair(grid16, 10 + seed)
            a = advect(u, g, "pseudospectral")
            b = advect(u, g, "convolution")
            assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-12

    def test_mean_mode_projected(self, grid16):
        u, g = random_real_pair(grid16, 20)
        assert advect(u, g, "pseudospectral").coeffs[0, 0] == 0
        assert advect(u, g, "convolution").coeffs[0, 0] == 0

    def test_reality_preserved(self, grid16):
        u, g = random_real_pair(grid16, 30)
        out = advect(u, g, "pseudospectral")
        assert out.is_real
        assert reality_defect(out) < 1e-13

    def test_unknown_method_rejected(self, grid8):
        psi = from_modes(grid8, [((1, 0), 1.0)])
        with pytest.raises(ValueError):
            advect(velocity(psi), psi, "spectral")

    def test_complexified_matches_four_real_advections(self, grid16):
        ur = perp_gradient(random_gevrey_field(grid16, 40, kmax=5))
        ui = perp_gradient(random_gevrey_field(grid16, 41, kmax=5))
        gr = random_gevrey_field(grid16, 42, kmax=5)
        gi = random_gevrey_field(grid16, 43, kmax=5)
        u = VectorSpectralField(ur.x1 + 1j * ui.x1, ur.x2 + 1j * ui.x2)
        g = gr + 1j * gi
        direct = advect(u, g, "convolution")
        via_parts = (
            advect(ur, gr, "convolution").coeffs
            - advect(ui, gi, "convolution").coeffs
            + 1j * (advect(ur, gi, "convolution").coeffs + advect(ui, gr, "convolution").coeffs)
        )
        assert np.max(np.abs(direct.coeffs - via_parts)) < 1e-12 * max(direct.max_abs(), 1.0)


class TestTqgRhs:
    def test_single_mode_steady_state(self, grid16):
        q0 = from_modes(grid16, [((1, 0), 1.0)], enforce_real=True)
        data = zero_dataset(grid16, phi0=0.3)
        state = TQGState(b=zero_field(grid16), q=q0)
        db, dq = tqg_rhs(state, data)
        assert np.max(np.abs(db.coeffs)) < 1e-15
        assert np.max(np.abs(dq.coeffs)) < 1e-15

    def test_zero_state_zero_data(self, grid8):
        data = zero_dataset(grid8, phi0=0.5)
        db, dq = tqg_rhs(TQGState(zero_field(grid8), zero_field(grid8)), data)
        assert np.all(db.coeffs == 0) and np.all(dq.coeffs == 0)

    def test_real_data_keeps_symmetry(self, grid16):
        uh = bathymetry_velocity(random_gevrey_field(grid16, 50, amplitude=0.3))
        data = TQGDataSet(
            u_h=uh,
            f=random_gevrey_field(grid16, 51, amplitude=0.3),
            b0=random_gevrey_field(grid16, 52, amplitude=0.3),
            q0=random_gevrey_field(grid16, 53, amplitude=0.3),
            phi0=0.4,
        )
        db, dq = tqg_rhs(TQGState(data.b0, data.q0), data)
        assert db.is_real and dq.is_real
        assert reality_defect(db) < 1e-13
        assert reality_defect(dq) < 1e-13


class TestInnerProduct:
    def test_parseval_cosine_pair(self, grid8):
        f = from_modes(grid8, [((1, 0), 1.0)], enforce_real=True)
        assert inner_product_complex(f, f) == pytest.approx(TWO_PI_SQ * 2.0, rel=1e-14)

    def test_i_times_field(self, grid16):
        f = random_gevrey_field(grid16, 60)
        val = inner_product_complex(f, 1j * f)
        norm_sq = sobolev_norm(f, 0.0) ** 2
        assert val == pytest.approx(-1j * TWO_PI_SQ * norm_sq, rel=1e-13)

    def test_quadrature_oracle(self, grid16):
        f = random_gevrey_field(grid16, 61, real=False)
        g = random_gevrey_field(grid16, 62, real=False)
        spectral = inner_product_complex(f, g)
        pf, pg = transform_to_physical(f), transform_to_physical(g)
        quad = TWO_PI_SQ * np.mean(pf * np.conj(pg))
        assert spectral == pytest.approx(quad, rel=1e-12)


class TestTrilinear:
    def test_real_orthogonality(self, grid16):
        for seed in range(5):
            u, g = random_real_pair(grid16, 70 + seed)
            val = abs(trilinear(u, g, g))
            u_h1 = math.sqrt(sobolev_norm(u.x1, 1.0) ** 2 + sobolev_norm(u.x2, 1.0) ** 2)
            assert val < 1e-12 * u_h1 * sobolev_norm(g, 1.0) ** 2

    def test_complexified_closed_form(self, grid16):
        # <B(f, g1 + i g2), g1 + i g2> = -2i <B(f, g1), g2> for real
        # divergence-free f and real g1, g2
        f = perp_gradient(random_gevrey_field(grid16, 80, kmax=5))
        g1 = random_gevrey_field(grid16, 81, kmax=5)
        g2 = random_gevrey_field(grid16, 82, kmax=5)
        g = g1 + 1j * g2
        lhs = trilinear(f, g, g)
        rhs = -2j * inner_product_complex(advect(f, g1, "convolution"), g2)
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert abs(lhs) > 1e-8  # complexified form is genuinely non-orthogonal

    def test_zero_velocity(self, grid8):
        z = zero_field(grid8)
        g = from_modes(grid8, [((1, 0), 1.0)])
        assert trilinear(VectorSpectralField(z, z), g, g) == 0


class TestDataSetValidation:
    def test_phi0_positive_required(self, grid8):
        z = zero_field(grid8)
        with pytest.raises(ValueError, match="phi0"):
            TQGDataSet(u_h=VectorSpectralField(z, z), f=z, b0=z, q0=z, phi0=0.0)

    def test_divergent_uh_rejected(self, grid8):
        z = zero_field(grid8)
        bad = VectorSpectralField(from_modes(grid8, [((1, 0), 1.0)]), z)
        with pytest.raises(ValueError, match="divergence"):
            TQGDataSet(u_h=bad, f=z, b0=z, q0=z, phi0=0.5)

    def test_mixed_grids_rejected(self, grid8, grid16):
        z8, z16 = zero_field(grid8), zero_field(grid16)
        with pytest.raises(GridMismatchError):
            TQGDataSet(u_h=VectorSpectralField(z8, z8), f=z16, b0=z8, q0=z8, phi0=0.5)

    def test_state_grid_check(self, grid8, grid16):
        with pytest.raises(GridMismatchError):
            TQGState(zero_field(grid8), zero_field(grid16))
