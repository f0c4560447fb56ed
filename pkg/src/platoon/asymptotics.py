"""Closed-form asymptotic predictors for the slow eigenvalue branches.

With constant symmetric gains the l-th slow eigenvalue decays like 1/N^2;
an antisymmetric gain perturbation shifts it at first order in the
mistuning amplitude by an integral of the gain-difference profile against
the mode shape.  The single source of truth for those shifts is the
first-order resonance condition (solvability of the perturbed eigenvalue
problem); the convenience predictors below are its large-N specialization.

All first-order formulas here use the mean density N/(2*pi); their
accuracy is O(eps^2) + O(1/N^2) against the Galerkin or state-space
spectra, which is the regime the validity flags describe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .model import MistuningProfile, PlatoonConfig
from .pde import Boundary, boundary_for_scenario, mean_density
from .statespace import NumericalError

TWO_PI = 2.0 * math.pi

# Predictions are trusted only for modes well below the critical wavenumber.
VALIDITY_FRACTION = 0.25


@dataclass(frozen=True)
class ValidityWindow:
    l_c: float
    n_c: float
    valid: bool


@dataclass(frozen=True)
class AsymptoticPrediction:
    mode_index: int
    s_plus: float
    s_minus: float
    shift: float
    validity: ValidityWindow


def critical_wavenumber(k0: float, b0: float, n_vehicles: int) -> float:
    """Modes with l << l_c have real slow/fast branch pairs."""
    return b0 * n_vehicles / (TWO_PI * math.sqrt(k0))


def critical_platoon_size(k0: float, b0: float) -> float:
    """Size at which the fundamental branch pair collides on the real axis."""
    return math.pi * math.sqrt(2.0 * k0) / b0


def _validity(k0: float, b0: float, n_vehicles: int, l: int) -> ValidityWindow:
    l_c = critical_wavenumber(k0, b0, n_vehicles)
    return ValidityWindow(l_c, critical_platoon_size(k0, b0), l < VALIDITY_FRACTION * l_c)


def symmetric_asymptote(
    k0: float, b0: float, n_vehicles: int, l: int, boundary: Boundary
) -> AsymptoticPrediction:
    """Large-N slow eigenvalue of the constant-gain platoon.

    Re s_l^+ ~ -pi^2 k0 l^2/(b0 N^2) with both ends pinned, a quarter of
    that with a free end; the companion branch keeps the damping budget:
    s_l^+ + s_l^- = -b0 exactly.
    """
    if l < 1:
        raise ValueError("mode index l must be >= 1")
    s_plus = -(math.pi ** 2) * k0 * l ** 2 / (b0 * n_vehicles ** 2)
    if boundary is Boundary.NEUMANN_DIRICHLET:
        s_plus /= 4.0
    return AsymptoticPrediction(
        l, s_plus, -b0 - s_plus, 0.0, _validity(k0, b0, n_vehicles, l)
    )


def _mode_weight(boundary: Boundary, l: int):
    """Weight w(x) in the first-order shift integral of mode l, plus the
    prefactor multiplying integral/(denominator)."""
    if boundary is Boundary.DIRICHLET_DIRICHLET:
        return (lambda x: math.sin(l * x)), l / 2.0
    nu2 = (2 * l - 1) / 2.0  # doubled ND wavenumber
    return (lambda x: math.sin(nu2 * x)), -nu2 / 2.0


def first_order_shift_integral(k_m, boundary: Boundary, l: int, breakpoints=()) -> float:
    """The profile integral entering the first-order eigenvalue shift."""
    weight, _ = _mode_weight(boundary, l)
    return quadrature.integrate(lambda x: k_m(x) * weight(x), breakpoints)


def mistuned_asymptote(
    config: PlatoonConfig, l: int, boundary: Boundary | None = None
) -> AsymptoticPrediction:
    """Symmetric asymptote plus the first-order mistuning shift of mode l.

    The shift is the N -> infinity limit of the resonance condition: the
    k_s term is dropped (it is O(1/N^2)) and the denominator reduces to b0.
    For pinned ends the shift of s_l^+ is

        eps * l/(2 b0 N) * integral k_m(x) sin(l x) dx,

    and with a free end the mode shape makes it

        -eps * (2l-1)/(4 b0 N) * integral k_m(x) sin((2l-1) x/2) dx.

    s_minus mirrors the shift so the pair sum stays exactly -b0.
    """
    if boundary is None:
        boundary = boundary_for_scenario(config.scenario)
    base = symmetric_asymptote(config.k0, config.b0, config.n_vehicles, l, boundary)
    weight, prefactor = _mode_weight(boundary, l)
    integral = quadrature.integrate(
        lambda x: config.k_m(x) * weight(x), config.profile.breakpoints()
    )
    rho0 = mean_density(config.n_vehicles)
    shift = config.epsilon * prefactor * integral / (TWO_PI * rho0 * config.b0)
    s_plus = base.s_plus + shift
    return AsymptoticPrediction(l, s_plus, -config.b0 - s_plus, shift, base.validity)


def resonance_condition(
    k_m,
    k_s,
    r0: complex,
    b0: float,
    n_vehicles: int,
    l: int,
    boundary: Boundary = Boundary.DIRICHLET_DIRICHLET,
    breakpoints=(),
) -> complex:
    """First-order eigenvalue perturbation r1 of the mode-l branch at r0.

    Solvability of the perturbed eigenvalue problem forces, with both ends
    pinned (mode sin(l x/2)),

        (2 r0 + b0) r1 = l/(4 pi rho0) I_m - l^2/(8 pi rho0^2) I_s,
        I_m = integral k_m(x) sin(l x) dx,
        I_s = integral k_s(x) sin^2(l x/2) dx,

    and the analogous projection on cos((2l-1)x/4) with a free end.  Unlike
    the theorem-style predictors this keeps the k_s term and the exact
    denominator, so it remains meaningful near the branch collision -- up to
    the point where the denominator itself degenerates.
    """
    if l < 1:
        raise ValueError("mode index l must be >= 1")
    denom = 2.0 * complex(r0) + b0
    if abs(denom) < 1e-8:
        raise NumericalError(
            "degenerate mode: branch pair collides (2*r0 + b0 ~ 0), "
            "first-order perturbation is not defined"
        )
    rho0 = mean_density(n_vehicles)
    if boundary is Boundary.DIRICHLET_DIRICHLET:
        i_m = quadrature.integrate(lambda x: k_m(x) * math.sin(l * x), breakpoints)
        i_s = quadrature.integrate(
            lambda x: k_s(x) * math.sin(0.5 * l * x) ** 2, breakpoints
        )
        numer = l / (4.0 * math.pi * rho0) * i_m - l ** 2 / (
            8.0 * math.pi * rho0 ** 2
        ) * i_s
    else:
        nu = (2 * l - 1) / 4.0
        i_m = quadrature.integrate(lambda x: k_m(x) * math.sin(2.0 * nu * x), breakpoints)
        i_s = quadrature.integrate(
            lambda x: k_s(x) * math.cos(nu * x) ** 2, breakpoints
        )
        numer = -nu / (2.0 * math.pi * rho0) * i_m - nu ** 2 / (
            2.0 * math.pi * rho0 ** 2
        ) * i_s
    return numer / denom


# ---------------------------------------------------------------------------
# Optimal profile search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProfileSearchResult:
    profile: MistuningProfile
    integral: float
    """Signed value of integral k_m(x) w_l(x) dx at the optimum (k_m = 2*profile)."""
    attainable: bool
    """False when no profile in the family produces a first-order improvement."""


def _weight_zeros(boundary: Boundary, l: int) -> list[float]:
    if boundary is Boundary.DIRICHLET_DIRICHLET:
        return [k * math.pi / l for k in range(1, 2 * l)]
    q = (2 * l - 1) / 2.0
    return [k * math.pi / q for k in range(1, 2 * l - 1)]


def _weight_primitive(boundary: Boundary, l: int):
    if boundary is Boundary.DIRICHLET_DIRICHLET:
        return lambda a, b: (math.cos(l * a) - math.cos(l * b)) / l
    q = (2 * l - 1) / 2.0
    return lambda a, b: (math.cos(q * a) - math.cos(q * b)) / q


def optimal_profile_search(
    boundary: Boundary, l: int = 1, max_breakpoints: int = 1
) -> ProfileSearchResult:
    """Best piecewise-constant front perturbation with at most K breakpoints.

    Maximizes |integral k_m(x) w_l(x) dx| over sup-norm-1 piecewise-constant
    profiles, taking the sign that lowers Re s_l^+.  With enough breakpoints
    the optimum is bang-bang against the sign of the mode weight: the
    midpoint step with pinned ends, the constant profile with a free end.
    """
    if max_breakpoints < 0:
        raise ValueError("max_breakpoints must be >= 0")
    if l < 1:
        raise ValueError("mode index l must be >= 1")
    # Re s_l^+ shift is prefactor * integral; stabilizing means shift < 0.
    _, prefactor = _mode_weight(boundary, l)
    want_sign = -1.0 if prefactor > 0 else 1.0
    seg = _weight_primitive(boundary, l)
    zeros = _weight_zeros(boundary, l)

    if len(zeros) <= max_breakpoints:
        breaks = zeros
    else:
        # exhaustive search of breakpoint placements on a refined grid
        candidates = sorted(set(np.linspace(0.0, TWO_PI, 257)[1:-1]) | set(zeros))
        best, best_val = (), -1.0
        from itertools import combinations

        for combo in combinations(candidates, max_breakpoints):
            edges = [0.0, *combo, TWO_PI]
            val = sum(abs(seg(a, b)) for a, b in zip(edges, edges[1:]))
            if val > best_val + 1e-15:
                best_val, best = val, combo
        breaks = list(best)

    edges = [0.0, *breaks, TWO_PI]
    pieces = []
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        piece_integral = seg(a, b)
        sign = want_sign * (1.0 if piece_integral >= 0 else -1.0)
        if abs(piece_integral) < 1e-12:
            sign = 1.0
        pieces.append((a, sign))
        total += 2.0 * sign * piece_integral  # k_m carries the factor 2
    attainable = abs(total) > 1e-9

    profile = MistuningProfile.piecewise_constant(pieces)
    values = [v for _, v in pieces]
    if boundary is Boundary.DIRICHLET_DIRICHLET and l == 1 and len(pieces) == 2:
        if abs(pieces[1][0] - math.pi) < 1e-9 and values == [-1.0, 1.0]:
            profile = MistuningProfile.optimal_step()
    if len(pieces) == 1 and values == [1.0]:
        if boundary is Boundary.NEUMANN_DIRICHLET and attainable:
            profile = MistuningProfile.optimal_constant()
    return ProfileSearchResult(profile, total if attainable else 0.0, attainable)


def predictions_to_csv(rows, digits: int = 12) -> str:
    """CSV ``N,l,s_plus_pred,s_plus_numeric,rel_err`` from (N, l, pred, numeric) rows."""
    lines = ["N,l,s_plus_pred,s_plus_numeric,rel_err"]
    for n, l, pred, numeric in rows:
        rel = abs(pred - numeric) / abs(numeric) if numeric != 0 else float("nan")
        lines.append(
            f"{n},{l},{pred:.{digits}g},{numeric:.{digits}g},{rel:.{digits}g}"
        )
    return "\n".join(lines) + "\n"
