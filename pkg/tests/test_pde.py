import math

import numpy as np
import pytest

from oracles import greedy_matching_distance
from platoon.model import MistuningProfile, PlatoonConfig, Scenario, build_gain_schedule
from platoon.pde import (
    Boundary,
    assemble_galerkin,
    assemble_operator,
    boundary_for_scenario,
    default_basis_size,
    discretize_pde_fd,
    effective_density,
    mean_density,
    mode_resolved_spectrum,
    mode_wavenumbers,
    nominal_pde_eigenvalues,
    pde_spectrum,
)
from platoon.statespace import build_closed_loop, eigenvalues_dense

TWO_PI = 2 * math.pi
DD = Boundary.DIRICHLET_DIRICHLET
ND = Boundary.NEUMANN_DIRICHLET


def quadratic_roots(b0, c):
    disc = complex(b0 * b0 - 4.0 * c)
    r = np.sqrt(disc)
    return (-b0 + r) / 2.0, (-b0 - r) / 2.0


def test_boundary_pairing():
    assert boundary_for_scenario(Scenario.I) is DD
    assert boundary_for_scenario(Scenario.II) is ND


def test_mode_wavenumbers():
    np.testing.assert_allclose(mode_wavenumbers(DD, 3), [0.5, 1.0, 1.5])
    np.testing.assert_allclose(mode_wavenumbers(ND, 3), [0.25, 0.75, 1.25])


def test_nominal_eigenvalue_quadratic_formula():
    # direct evaluation of the characteristic quadratic, mean density
    a0_sq = (TWO_PI / 25) ** 2
    expected = (-0.5 + math.sqrt(0.25 - a0_sq)) / 2.0
    pairs = nominal_pde_eigenvalues(1.0, 0.5, 25, DD, 1, density="mean")
    assert pairs[0][0].real == pytest.approx(expected, abs=1e-14)
    assert pairs[0][0].imag == 0.0
    # cross-check with a brute-force root of the same quadratic
    brute = sorted(np.roots([1.0, 0.5, a0_sq / 4.0]).real)[-1]
    assert pairs[0][0].real == pytest.approx(brute, abs=1e-12)


def test_nominal_double_root():
    # zero discriminant: b0^2 = a0^2 l^2 for DD mode l
    n, l, k0 = 30, 2, 1.0
    rho0 = mean_density(n)
    b0 = math.sqrt(k0) * l / rho0
    pairs = nominal_pde_eigenvalues(k0, b0, n, DD, l, density="mean")
    s_plus, s_minus = pairs[l - 1]
    assert s_plus == pytest.approx(s_minus, abs=1e-12)
    assert s_plus.real == pytest.approx(-b0 / 2.0, abs=1e-12)


def test_nominal_large_n_limit():
    # s_1^+ -> -pi^2 k0/(b0 N^2) as N grows
    n = 10_000
    s = nominal_pde_eigenvalues(1.0, 0.5, n, DD, 1, density="mean")[0][0]
    assert s.real * n ** 2 == pytest.approx(-math.pi ** 2 / 0.5, rel=1e-4)


def test_nominal_complex_branch_real_part():
    # above the critical wavenumber both roots share Re = -b0/2
    pairs = nominal_pde_eigenvalues(1.0, 0.5, 10, DD, 6, density="mean")
    s_plus, s_minus = pairs[5]
    assert s_plus.real == pytest.approx(-0.25, abs=1e-14)
    assert s_minus.real == pytest.approx(-0.25, abs=1e-14)
    assert s_plus.imag > 0 > s_minus.imag


def test_galerkin_nominal_is_diagonal():
    disc = assemble_galerkin(PlatoonConfig(25), basis_size=8, density="mean")
    a0_sq = 1.0 / mean_density(25) ** 2
    expected = -a0_sq * (np.arange(1, 9) / 2.0) ** 2
    np.testing.assert_allclose(np.diag(disc.stiffness), expected, rtol=1e-14)
    off = disc.stiffness - np.diag(np.diag(disc.stiffness))
    assert np.max(np.abs(off)) < 1e-10
    assert disc.companion.shape == (16, 16)


def test_galerkin_consistency_with_nominal():
    # companion spectrum reproduces the analytic pairs for every retained mode
    cfg = PlatoonConfig(12)
    disc = assemble_galerkin(cfg, basis_size=24)
    ev = eigenvalues_dense(disc.companion)
    pairs = nominal_pde_eigenvalues(cfg.k0, cfg.b0, cfg.n_vehicles, DD, 24)
    exact = np.array([s for pair in pairs for s in pair])
    assert greedy_matching_distance(exact, ev) < 1e-8


def test_basis_size_independence_nominal():
    cfg = PlatoonConfig(20, scenario=Scenario.II)
    m1 = pde_spectrum(assemble_galerkin(cfg, basis_size=40)).least_stable
    m2 = pde_spectrum(assemble_galerkin(cfg, basis_size=80)).least_stable
    assert abs(m1 - m2) < 1e-10


def test_mistuned_basis_convergence():
    # step-profile spectrum converges fast in basis size
    cfg = PlatoonConfig(50, epsilon=0.1, profile=MistuningProfile.optimal_step())
    m64 = pde_spectrum(assemble_galerkin(cfg, basis_size=64)).stability_margin
    m128 = pde_spectrum(assemble_galerkin(cfg, basis_size=128)).stability_margin
    m256 = pde_spectrum(assemble_galerkin(cfg, basis_size=256)).stability_margin
    assert abs(m128 - m64) / m128 < 1e-4
    assert abs(m256 - m128) / m256 < 1e-3


def test_default_basis_size():
    assert default_basis_size(10) == 64
    assert default_basis_size(100) == 200
    assert default_basis_size(400) == 512


def test_mistuned_shift_tracks_first_order():
    # Galerkin shift of the least stable eigenvalue vs the first-order rate;
    # eps*N is kept small enough that second-order effects stay subdominant
    n, eps, b0 = 50, 0.02, 0.5
    base = pde_spectrum(assemble_galerkin(PlatoonConfig(n, b0=b0))).stability_margin
    cfg = PlatoonConfig(n, b0=b0, epsilon=eps, profile=MistuningProfile.optimal_step())
    mist = pde_spectrum(assemble_galerkin(cfg)).stability_margin
    shift = -(mist - base)
    predicted = -4.0 * eps / (b0 * n)
    assert shift == pytest.approx(predicted, rel=0.25)


def test_advection_sign_neumann_dirichlet():
    # k_m > 0 everywhere strictly improves the least stable eigenvalue
    base = pde_spectrum(assemble_galerkin(PlatoonConfig(40, scenario=Scenario.II)))
    cfg = PlatoonConfig(40, scenario=Scenario.II, epsilon=0.05,
                        profile=MistuningProfile.optimal_constant())
    mist = pde_spectrum(assemble_galerkin(cfg))
    assert mist.least_stable.real < base.least_stable.real


def test_effective_density_values():
    assert effective_density(25, DD) == pytest.approx(26 / TWO_PI)
    assert effective_density(25, ND) == pytest.approx(25.5 / TWO_PI)
    assert mean_density(25) == pytest.approx(25 / TWO_PI)


def test_galerkin_least_stable_matches_platoon():
    # continuum vs discrete spectra agree at the percent level for N=25
    for scenario in Scenario:
        cfg = PlatoonConfig(25, scenario=scenario)
        margin_pde = pde_spectrum(assemble_galerkin(cfg, basis_size=64)).stability_margin
        margin_platoon = eigenvalues_dense(
            build_closed_loop(build_gain_schedule(cfg)).a_matrix
        ).real.max()
        assert margin_pde == pytest.approx(-margin_platoon, rel=0.02)


def test_mode_resolved_spectrum_nominal():
    cfg = PlatoonConfig(30)
    disc = assemble_galerkin(cfg, basis_size=60)
    modes = mode_resolved_spectrum(disc, cfg.b0, 3)
    pairs = nominal_pde_eigenvalues(cfg.k0, cfg.b0, 30, DD, 3)
    for l in (1, 2, 3):
        assert modes[l][0] == pytest.approx(pairs[l - 1][0], abs=1e-10)
        assert modes[l][1] == pytest.approx(pairs[l - 1][1], abs=1e-10)


def test_assemble_operator_pure_ks_term():
    # a constant gain-sum perturbation shifts every diagonal entry by
    # eps*ks/(2 rho0^2) * lambda_l (projection of the extra diffusion)
    n, eps = 40, 0.01
    disc0 = assemble_operator(1.0, 0.5, n, 0.0, lambda x: 0.0, lambda x: 0.0, DD,
                              basis_size=16, density="mean")
    disc1 = assemble_operator(1.0, 0.5, n, eps, lambda x: 0.0, lambda x: 2.0, DD,
                              basis_size=16, density="mean")
    rho0 = mean_density(n)
    mu = mode_wavenumbers(DD, 16)
    expected = np.diag(disc0.stiffness) + eps * (2.0 / (2.0 * rho0 ** 2)) * (-mu ** 2)
    np.testing.assert_allclose(np.diag(disc1.stiffness), expected, rtol=1e-10)


@pytest.mark.parametrize("scenario", list(Scenario))
@pytest.mark.parametrize("eps", [0.0, 0.1, 0.3])
@pytest.mark.parametrize("n", [5, 20, 100])
def test_fd_roundtrip_identity(scenario, eps, n):
    # the central-difference discretization recovers the discrete system
    profile = (MistuningProfile.optimal_step() if scenario is Scenario.I
               else MistuningProfile.optimal_constant())
    if eps == 0.0:
        profile = MistuningProfile.symmetric()
    cfg = PlatoonConfig(n, scenario=scenario, epsilon=eps, profile=profile)
    fd = discretize_pde_fd(cfg)
    exact = build_closed_loop(build_gain_schedule(cfg)).a_matrix
    assert np.max(np.abs(fd - exact)) < 1e-14


def test_fd_roundtrip_general_gains():
    # also with a non-unit nominal gain and a smooth profile
    cfg = PlatoonConfig(17, k0=2.5, b0=0.8, scenario=Scenario.II, epsilon=0.2,
                        profile=MistuningProfile.sine(1.0, 3))
    fd = discretize_pde_fd(cfg)
    exact = build_closed_loop(build_gain_schedule(cfg)).a_matrix
    assert np.max(np.abs(fd - exact)) < 1e-14
