import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from zkbs import (
    GridField,
    SpectralField,
    apply_semigroup,
    audit_linear_identity,
    attach_refinement_order,
    duhamel_solve,
    phi,
    plan_domain,
    symbol,
    to_grid,
    to_spectral,
)


def single_mode(d, j, l, amp=1.0, theta=0.0):
    c = np.zeros(d.shape, dtype=complex)
    if j == 0:
        c[0, l - 1] = amp * math.cos(theta)
    else:
        c[j, l - 1] = 0.5 * amp * np.exp(1j * theta)
        c[-j, l - 1] = np.conj(c[j, l - 1])
    return SpectralField(c)


class TestPhi:
    def test_phi1_matches_closed_form(self):
        z = np.array([0.3, 0.49, 2.0, -4.0, 0.4j, 1.0 + 2.0j], dtype=complex)
        got = phi(1, z)
        want = np.expm1(z) / z
        assert np.max(np.abs(got - want) / np.abs(want)) <= 1e-14

    def test_small_z_series_is_stable(self):
        # the closed form loses digits below |z| ~ 1e-8; the series must not
        z = np.array([1e-12, 1e-8, -1e-10, 1e-9j], dtype=complex)
        for k, lead, nxt in ((1, 1.0, 0.5), (2, 0.5, 1 / 6), (3, 1 / 6, 1 / 24)):
            got = phi(k, z)
            want = lead + nxt * z
            assert np.max(np.abs(got - want)) <= 1e-14, k

    def test_recurrence_across_series_boundary(self):
        # phi_{k+1}(z) = (phi_k(z) - 1/k!) / z ties the series branch
        # (|z| < 0.5) to the closed-form branch
        z = np.array([0.49, 0.51, -0.49, -0.51, 0.49j, 0.51j], dtype=complex)
        for k in (1, 2):
            lhs = phi(k + 1, z)
            rhs = (phi(k, z) - 1.0 / math.factorial(k)) / z
            assert np.max(np.abs(lhs - rhs)) <= 1e-14

    def test_rejects_bad_order(self):
        for order in (-1, 0, 4):
            with pytest.raises(ValueError):
                phi(order, np.array([1.0 + 0j]))


class TestSymbol:
    def test_symbol_values(self, small_domain):
        d = small_domain
        S = symbol(d)
        j, l = 5, 3
        xi = np.pi * j / d.X
        lam = (np.pi * l / d.L) ** 2
        want = 1j * (xi**3 + xi * lam) - d.delta * (xi**2 + lam)
        assert abs(S.m[j, l - 1] - want) <= 1e-15 * abs(want)

    def test_nyquist_column_is_pure_decay(self, small_domain):
        d = small_domain
        S = symbol(d)
        col = S.m[-d.nx // 2, :]
        assert np.max(np.abs(col.imag)) == 0.0
        assert np.all(col.real < 0.0)

    def test_slowest_rate(self, small_domain):
        d = small_domain
        assert np.isclose(symbol(d).slowest_rate, -d.delta * np.pi**2 / d.L**2)

    def test_dissipative_bound(self, small_domain):
        # |e^{m t}| <= e^{-delta pi^2 t / L^2} for every mode
        d = small_domain
        S = symbol(d)
        for t in (0.1, 1.0, 3.0):
            mags = np.abs(np.exp(S.m * t))
            assert np.max(mags) <= math.exp(S.slowest_rate * t) * (1.0 + 1e-14)


class TestPropagator:
    def test_single_mode_closed_form(self, small_domain):
        d = small_domain
        S = symbol(d)
        j, l, amp, theta = 7, 2, 1.4, 0.9
        xi = np.pi * j / d.X
        lam = (np.pi * l / d.L) ** 2
        s0 = single_mode(d, j, l, amp, theta)
        for t in (0.0, 0.4, 1.7):
            got = to_grid(apply_semigroup(s0, t, S), d).values
            envelope = amp * math.exp(-d.delta * (xi**2 + lam) * t)
            want = envelope * np.outer(
                np.cos(xi * d.x + theta + (xi**3 + xi * lam) * t),
                np.sin(np.pi * l * d.y / d.L),
            )
            scale = max(np.max(np.abs(want)), 1e-30)
            assert np.max(np.abs(got - want)) <= 1e-12 * scale, t

    def test_x_independent_data_follows_heat_law(self, small_domain):
        d = small_domain
        S = symbol(d)
        u0 = GridField(np.outer(np.ones(d.nx), np.sin(np.pi * d.y / d.L)))
        s = to_spectral(u0, d)
        got = to_grid(apply_semigroup(s, 0.8, S), d).values
        want = math.exp(-d.delta * (np.pi / d.L) ** 2 * 0.8) * u0.values
        assert np.max(np.abs(got - want)) <= 1e-13

    def test_semigroup_property(self, small_domain, rng):
        d = small_domain
        S = symbol(d)
        s = to_spectral(GridField(rng.standard_normal(d.shape)), d)
        one = apply_semigroup(s, 0.9, S).coeffs
        two = apply_semigroup(apply_semigroup(s, 0.5, S), 0.4, S).coeffs
        assert np.max(np.abs(one - two)) <= 1e-13 * np.max(np.abs(one))

    def test_rejects_negative_time(self, small_domain, rng):
        d = small_domain
        s = to_spectral(GridField(rng.standard_normal(d.shape)), d)
        with pytest.raises(ValueError, match="t >= 0"):
            apply_semigroup(s, -0.1, symbol(d))


class TestDuhamel:
    def test_constant_forcing_closed_form(self, small_domain):
        # u' = m u + f with constant f: u(T) = e^{mT} u0 + (e^{mT}-1)/m f
        d = small_domain
        S = symbol(d)
        rng = np.random.default_rng(3)
        u0 = to_spectral(GridField(rng.standard_normal(d.shape)), d)
        f = to_spectral(GridField(rng.standard_normal(d.shape)), d).coeffs
        T = 0.5
        traj = duhamel_solve(u0, lambda t: f, T, 1e-3, S, snapshot_stride=0)
        got = traj.snapshots[-1]
        want = np.exp(S.m * T) * u0.coeffs + (np.exp(S.m * T) - 1.0) / S.m * f
        assert np.max(np.abs(got - want)) <= 1e-11 * np.max(np.abs(want))

    def test_quadratic_forcing_is_integrated_exactly(self, small_domain):
        # the three-node weights are exact for forcing polynomials of
        # degree <= 2, so halving dt must not change the answer
        d = small_domain
        S = symbol(d)
        rng = np.random.default_rng(4)
        u0 = to_spectral(GridField(rng.standard_normal(d.shape)), d)
        f = to_spectral(GridField(rng.standard_normal(d.shape)), d).coeffs

        def forcing(t):
            return f * (1.0 - 2.0 * t + 3.0 * t**2)

        a = duhamel_solve(u0, forcing, 0.4, 2e-3, S, snapshot_stride=0).snapshots[-1]
        b = duhamel_solve(u0, forcing, 0.4, 1e-3, S, snapshot_stride=0).snapshots[-1]
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))

    def test_against_adaptive_oracle(self, small_domain):
        d = small_domain
        S = symbol(d)
        rng = np.random.default_rng(7)
        modes = [(j, l) for j in (-3, 0, 2, 5) for l in (1, 2)]
        u0c = np.zeros(d.shape, dtype=complex)
        f0 = np.zeros(d.shape, dtype=complex)
        for j, l in modes:
            u0c[j, l - 1] = rng.standard_normal() + 1j * rng.standard_normal()
            f0[j, l - 1] = rng.standard_normal() + 1j * rng.standard_normal()

        def forcing(t):
            return f0 * math.sin(2.5 * t) * math.exp(-0.5 * t)

        T = 1.0
        traj = duhamel_solve(SpectralField(u0c), forcing, T, 1e-3, S,
                             snapshot_stride=0)
        got = traj.snapshots[-1]
        worst = 0.0
        scale = 0.0
        for j, l in modes:
            m = S.m[j, l - 1]
            fa = f0[j, l - 1]
            sol = solve_ivp(
                lambda t, y: m * y + fa * math.sin(2.5 * t) * math.exp(-0.5 * t),
                (0.0, T),
                np.array([u0c[j, l - 1]]),
                method="DOP853", rtol=1e-12, atol=1e-14,
            )
            ref = sol.y[0, -1]
            worst = max(worst, abs(got[j, l - 1] - ref))
            scale = max(scale, abs(ref))
        assert worst <= 1e-8 * scale

    def test_rejects_non_divisible_dt(self, small_domain):
        d = small_domain
        u0 = SpectralField(np.zeros(d.shape, dtype=complex))
        with pytest.raises(ValueError, match="divide"):
            duhamel_solve(u0, None, 0.35, 1e-4 * 3, symbol(d))

    def test_rejects_non_finite_forcing(self, small_domain):
        d = small_domain
        u0 = SpectralField(np.zeros(d.shape, dtype=complex))
        bad = np.full(d.shape, np.nan, dtype=complex)
        with pytest.raises(ValueError, match="finite"):
            duhamel_solve(u0, lambda t: bad, 0.01, 1e-3, symbol(d))


class TestLinearAudits:
    def test_homogeneous_mass_residual_is_tiny(self):
        # single-mode semigroup run on a small grid: the midpoint rule
        # integrates e^{-2 rate t} with fourth-derivative error; at
        # dt = 1e-5 over 100 steps that sits below 1e-10
        d = plan_domain(L=math.pi, X=2 * math.pi, nx=16, ny=8, delta=0.5)
        S = symbol(d)
        s0 = single_mode(d, 1, 1, amp=1.0)
        nrm = math.sqrt(d.parseval_weight * np.sum(np.abs(s0.coeffs) ** 2))
        s0 = SpectralField(s0.coeffs / nrm)
        traj = duhamel_solve(s0, None, 1e-3, 1e-5, S, snapshot_stride=0)
        rep = audit_linear_identity(traj, "mass")
        assert rep.identity == "linear_mass"
        assert rep.max_residual <= 1e-10

    @pytest.mark.parametrize("which", ["mass", "grad", "hess"])
    def test_homogeneous_residuals_refine_at_second_order(self, small_domain, which):
        d = small_domain
        S = symbol(d)
        rng = np.random.default_rng(11)
        u0 = to_spectral(GridField(rng.standard_normal(d.shape)), d)
        coarse = audit_linear_identity(
            duhamel_solve(u0, None, 0.2, 2e-3, S, snapshot_stride=0), which)
        fine = attach_refinement_order(
            coarse,
            audit_linear_identity(
                duhamel_solve(u0, None, 0.2, 1e-3, S, snapshot_stride=0), which))
        assert fine.dt_pair == (2e-3, 1e-3)
        assert 1.7 <= fine.order <= 2.3

    def test_forced_mass_residual_refines_at_second_order(self, small_domain):
        d = small_domain
        S = symbol(d)
        rng = np.random.default_rng(12)
        u0 = to_spectral(GridField(rng.standard_normal(d.shape)), d)
        f0c = to_spectral(GridField(rng.standard_normal(d.shape)), d).coeffs
        f1c = to_spectral(GridField(rng.standard_normal(d.shape)), d).coeffs
        f2c = to_spectral(GridField(rng.standard_normal(d.shape)), d).coeffs

        def mk(c):
            return lambda t: c * math.cos(3.0 * t)

        def run(dt):
            def forcing(t):
                w = math.cos(3.0 * t)
                # f = f0 + d/dx f1 + d/dy f2; f2 lives in the cosine basis,
                # so its y derivative lands in the sine basis with a minus
                fx = 1j * d.xi_odd[:, None] * f1c
                fy = -d.ky[None, :] * f2c
                return w * (f0c + fx + fy)

            traj = duhamel_solve(u0, forcing, 0.2, dt, S, snapshot_stride=1)
            return audit_linear_identity(
                traj, "mass", f0=mk(f0c), f1=mk(f1c), f2=mk(f2c))

        coarse, fine = run(2e-3), run(1e-3)
        fine = attach_refinement_order(coarse, fine)
        assert 1.7 <= fine.order <= 2.3

    def test_forced_grad_and_hess_residuals_refine(self, small_domain):
        d = small_domain
        S = symbol(d)
        rng = np.random.default_rng(13)
        u0 = to_spectral(GridField(rng.standard_normal(d.shape)), d)
        f0c = to_spectral(GridField(rng.standard_normal(d.shape)), d).coeffs

        def forcing(t):
            return f0c * math.exp(-t)

        def rep(which, dt):
            traj = duhamel_solve(u0, forcing, 0.2, dt, S, snapshot_stride=1)
            return audit_linear_identity(traj, which, f0=lambda t: f0c * math.exp(-t))

        for which in ("grad", "hess"):
            fine = attach_refinement_order(rep(which, 2e-3), rep(which, 1e-3))
            assert 1.7 <= fine.order <= 2.3, which

    def test_unknown_identity_rejected(self, small_domain):
        d = small_domain
        u0 = SpectralField(np.zeros(d.shape, dtype=complex))
        traj = duhamel_solve(u0, None, 0.01, 1e-3, symbol(d))
        with pytest.raises(ValueError, match="unknown"):
            audit_linear_identity(traj, "momentum")
