"""Continuum (PDE) model of the platoon: analytic modes, Galerkin spectra,
and the finite-difference round trip back to the discrete system.

Differentiating the closed loop in time turns the velocity-error field
v(x, t) on the scaled axis [0, 2*pi] into a damped wave equation with an
advection term proportional to the front/back gain difference:

    v_tt + b0 v_t = a0^2 v_xx + eps*[ (k_m(x)/rho0) v_x + (k_s(x)/(2 rho0^2)) v_xx ]

with wave speed a0 = sqrt(k0)/rho0.  Boundary conditions are Dirichlet at
both ends with lead and follow vehicles, Neumann-Dirichlet with a lead
vehicle only.  The eigenvalue problem is solved two ways: analytically for
constant coefficients, and by Galerkin projection on the Laplacian
eigenfunctions for mistuned coefficients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .model import PlatoonConfig, Scenario
from .statespace import (
    NumericalError,
    Spectrum,
    eigenvalues_dense,
    spectrum_from_eigenvalues,
)

TWO_PI = 2.0 * math.pi


class Boundary(enum.Enum):
    DIRICHLET_DIRICHLET = "DD"
    NEUMANN_DIRICHLET = "ND"


def boundary_for_scenario(scenario: Scenario) -> Boundary:
    """Fixed pairing: lead+follow ends pin both boundaries (DD); a lead
    vehicle only leaves the far end free (ND)."""
    return Boundary.DIRICHLET_DIRICHLET if scenario is Scenario.I else Boundary.NEUMANN_DIRICHLET


def mean_density(n_vehicles: int) -> float:
    """Mean vehicle density N/(2*pi), the nominal continuum parameter."""
    return n_vehicles / TWO_PI


def effective_density(n_vehicles: int, boundary: Boundary) -> float:
    """Density matched to the discrete spectrum's mode quantization.

    The exact coupling eigenvalues quantize as sin^2(l*pi/(2(N+1))) with
    pinned ends and sin^2((2l-1)*pi/(2(2N+1))) with a free end, so the
    continuum reproduces them to O(1/N^2) only with an effective vehicle
    count of N+1 (DD) or N+1/2 (ND).  Both reduce to N/(2*pi) at leading
    order but the distinction is what makes the Galerkin and state-space
    spectra agree at the percent level for small platoons.
    """
    if boundary is Boundary.DIRICHLET_DIRICHLET:
        return (n_vehicles + 1.0) / TWO_PI
    return (n_vehicles + 0.5) / TWO_PI


def _density(n_vehicles: int, boundary: Boundary, density: str) -> float:
    if density == "effective":
        return effective_density(n_vehicles, boundary)
    if density == "mean":
        return mean_density(n_vehicles)
    raise ValueError(f"density must be 'effective' or 'mean', got {density!r}")


def mode_wavenumbers(boundary: Boundary, basis_size: int) -> np.ndarray:
    """Continuous wavenumbers mu_l with Laplacian eigenvalue -mu_l^2:
    l/2 for DD modes sin(l x/2), (2l-1)/4 for ND modes cos((2l-1)x/4)."""
    l = np.arange(1, basis_size + 1, dtype=float)
    if boundary is Boundary.DIRICHLET_DIRICHLET:
        return l / 2.0
    return (2.0 * l - 1.0) / 4.0


def basis_matrices(boundary: Boundary, basis_size: int, x: np.ndarray):
    """Values, first and second derivatives of the basis functions at x.

    Rows index the mode l = 1..basis_size.  Both families have L2 norm
    sqrt(pi) on [0, 2*pi].
    """
    mu = mode_wavenumbers(boundary, basis_size)
    phase = np.outer(mu, x)
    if boundary is Boundary.DIRICHLET_DIRICHLET:
        psi = np.sin(phase)
        dpsi = mu[:, None] * np.cos(phase)
    else:
        psi = np.cos(phase)
        dpsi = -mu[:, None] * np.sin(phase)
    d2psi = -(mu ** 2)[:, None] * psi
    return psi, dpsi, d2psi


def default_basis_size(n_vehicles: int) -> int:
    """Resolve all modes comparable to the discrete platoon, desk-scale capped."""
    return min(max(2 * n_vehicles, 64), 512)


def nominal_pde_eigenvalues(
    k0: float,
    b0: float,
    n_vehicles: int,
    boundary: Boundary,
    l_max: int,
    density: str = "effective",
) -> list[tuple[complex, complex]]:
    """Analytic eigenvalue pairs (s_l^+, s_l^-) of the constant-coefficient model.

    Each Laplacian mode contributes the roots of s^2 + b0*s + a0^2*mu_l^2 = 0;
    s_l^+ is the root with the larger real part when both are real, otherwise
    the member with nonnegative imaginary part (both then share Re = -b0/2).
    """
    if not (k0 > 0 and b0 > 0):
        raise ValueError("k0 and b0 must be positive")
    if n_vehicles < 2 or l_max < 1:
        raise ValueError("need n_vehicles >= 2 and l_max >= 1")
    rho0 = _density(n_vehicles, boundary, density)
    a0_sq = k0 / rho0 ** 2
    mu = mode_wavenumbers(boundary, l_max)
    pairs = []
    for mu_l in mu:
        disc = complex(b0 ** 2 - 4.0 * a0_sq * mu_l ** 2)
        root = np.sqrt(disc)
        s_plus = (-b0 + root) / 2.0
        s_minus = (-b0 - root) / 2.0
        pairs.append((complex(s_plus), complex(s_minus)))
    return pairs


@dataclass(frozen=True)
class PdeDiscretization:
    """Galerkin projection of the mistuned operator and its first-order form."""

    boundary: Boundary
    basis_size: int
    wave_speed_sq: float
    stiffness: np.ndarray
    companion: np.ndarray


def assemble_operator(
    k0: float,
    b0: float,
    n_vehicles: int,
    epsilon: float,
    k_m,
    k_s,
    boundary: Boundary,
    basis_size: int | None = None,
    breakpoints=(),
    density: str = "effective",
) -> PdeDiscretization:
    """Galerkin matrices for arbitrary coefficient functions k_m(x), k_s(x).

    stiffness[m][l] = (1/pi) * integral of
        psi_m * [a0^2 psi_l'' + eps*(k_m/rho0) psi_l' + eps*(k_s/(2 rho0^2)) psi_l'']

    The constant-coefficient part is integrated exactly (orthogonality gives
    the diagonal a0^2 * lambda_l); the mistuning part uses panel quadrature
    with panels split at the profile breakpoints.
    """
    if basis_size is None:
        basis_size = default_basis_size(n_vehicles)
    if basis_size < 1:
        raise ValueError("basis_size must be >= 1")
    rho0 = _density(n_vehicles, boundary, density)
    a0_sq = k0 / rho0 ** 2
    mu = mode_wavenumbers(boundary, basis_size)
    stiffness = np.diag(-a0_sq * mu ** 2)
    if epsilon != 0.0:
        x, w = quadrature.panel_nodes(breakpoints)
        psi, dpsi, d2psi = basis_matrices(boundary, basis_size, x)
        km_vals = np.array([k_m(xi) for xi in x])
        ks_vals = np.array([k_s(xi) for xi in x])
        forcing = epsilon * (
            (km_vals / rho0) * dpsi + (ks_vals / (2.0 * rho0 ** 2)) * d2psi
        )
        correction = (psi * w) @ forcing.T / math.pi
        if not np.all(np.isfinite(correction)):
            raise NumericalError("quadrature produced non-finite Galerkin entries")
        stiffness = stiffness + correction
    companion = np.zeros((2 * basis_size, 2 * basis_size))
    companion[:basis_size, basis_size:] = np.eye(basis_size)
    companion[basis_size:, :basis_size] = stiffness
    companion[basis_size:, basis_size:] = -b0 * np.eye(basis_size)
    return PdeDiscretization(boundary, basis_size, a0_sq, stiffness, companion)


def assemble_galerkin(
    config: PlatoonConfig,
    boundary: Boundary | None = None,
    basis_size: int | None = None,
    density: str = "effective",
) -> PdeDiscretization:
    """Galerkin discretization of the mistuned model for a platoon configuration."""
    if boundary is None:
        boundary = boundary_for_scenario(config.scenario)
    return assemble_operator(
        config.k0,
        config.b0,
        config.n_vehicles,
        config.epsilon,
        config.k_m,
        config.k_s,
        boundary,
        basis_size=basis_size,
        breakpoints=config.profile.breakpoints(),
        density=density,
    )


def pde_spectrum(disc: PdeDiscretization) -> Spectrum:
    """Spectrum of the first-order companion matrix."""
    return spectrum_from_eigenvalues(eigenvalues_dense(disc.companion))


def mode_resolved_spectrum(disc: PdeDiscretization, b0: float, l_max: int):
    """Match companion eigenvalues to basis modes by eigenvector dominance.

    Returns {l: (s_plus, s_minus)} for l = 1..l_max.  The +/- split uses
    Re(s) >= -b0/2; within a branch, the eigenvalue whose eigenvector has
    its largest basis coefficient at index l wins.  Robust for mistuning
    small enough that modes remain identifiable.
    """
    size = disc.basis_size
    if l_max > size:
        raise ValueError("l_max exceeds basis size")
    ev, vec = np.linalg.eig(disc.companion)
    top = np.abs(vec[:size, :])
    dominant = np.argmax(top, axis=0)
    tie = 1e-9 * max(1.0, b0)
    out = {}
    for l in range(1, l_max + 1):
        plus_best = minus_best = None
        plus_w = minus_w = -1.0
        for j in range(len(ev)):
            if dominant[j] != l - 1:
                continue
            weight = top[l - 1, j]
            # real branches split around -b0/2; complex pairs sit exactly on
            # it and split by the sign of the imaginary part instead
            on_axis = abs(ev[j].real + b0 / 2.0) <= tie
            is_plus = (ev[j].imag >= 0.0) if on_axis else (ev[j].real > -b0 / 2.0)
            if is_plus:
                if weight > plus_w:
                    plus_best, plus_w = ev[j], weight
            else:
                if weight > minus_w:
                    minus_best, minus_w = ev[j], weight
        if plus_best is None and minus_best is None:
            raise NumericalError(f"no companion eigenvector is dominated by mode {l}")
        out[l] = (plus_best, minus_best)
    return out


def discretize_pde_fd(config: PlatoonConfig) -> np.ndarray:
    """Central-difference discretization of the continuum model on the vehicle grid.

    Uses the grid x_i = 2*pi - i*delta with spacing delta and density
    rho0 = 1/delta, a Dirichlet ghost at each pinned end and a mirror ghost
    (v_{N+1} = v_N) at the free end.  By construction this reproduces the
    velocity form of the discrete closed loop entrywise to roundoff.
    """
    n = config.n_vehicles
    delta = config.delta
    x = config.sample_positions()
    k_plus = np.array([config.front_gain(xi) + config.back_gain(xi) for xi in x])
    k_minus = np.array([config.front_gain(xi) - config.back_gain(xi) for xi in x])
    inv_rho0 = delta  # this grid's density is exactly 1/delta
    adv = (k_minus * inv_rho0) / (2.0 * delta)
    diff = (k_plus * 0.5 * inv_rho0 ** 2) / delta ** 2
    block = np.zeros((n, n))
    for i in range(n):
        c_front = adv[i] + diff[i]     # couples to v_{i-1} (x_i + delta)
        c_self = -2.0 * diff[i]
        c_back = diff[i] - adv[i]      # couples to v_{i+1} (x_i - delta)
        if i > 0:
            block[i, i - 1] += c_front
        # i == 0: ghost at x = 2*pi is Dirichlet (lead vehicle), term drops
        block[i, i] += c_self
        if i < n - 1:
            block[i, i + 1] += c_back
        elif config.scenario is Scenario.II:
            block[i, i] += c_back      # mirror ghost for the free end
        # scenario I: ghost at x = 0 is Dirichlet (follow vehicle), term drops
    a = np.zeros((2 * n, 2 * n))
    a[:n, n:] = np.eye(n)
    a[n:, :n] = block
    a[n:, n:] = -np.diag(np.full(n, config.b0))
    return a
