"""H-infinity norm of the disturbance-to-spacing-error transfer function.

Two independent routes that must agree:

* Hamiltonian bisection -- gamma exceeds the norm exactly when the
  associated 4N x 4N Hamiltonian matrix has no eigenvalue on the imaginary
  axis, so the norm is bracketed and bisected without any frequency grid.
* Frequency sweep -- the largest singular value of G(j w) is maximized
  over a log-spaced grid and refined by golden-section search.

The transfer function here peaks at or near zero frequency, so the sweep
evaluates the static gain as well whenever the grid maximum sits on the
lower edge.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .statespace import ClosedLoopModel, NumericalError, analyze_spectrum

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

AXIS_TOLERANCE = 1e-7          # imaginary-axis test for Hamiltonian eigenvalues
POWER_TOL = 1e-8               # relative convergence of the power iteration
POWER_MAX_ITER = 500
SWEEP_REFINE_REL = 1e-4        # relative frequency window left by refinement
DEFAULT_GRID_POINTS = 2000
GRID_SPAN = (1e-3, 1e2)


@dataclass(frozen=True)
class HinfResult:
    gamma: float
    peak_frequency: float
    method: str
    bracket: tuple[float, float] | None = None


def _power_iteration_sigma_max(g: np.ndarray) -> float:
    """Largest singular value via power iteration on G^H G.

    Deterministic all-ones start vector; converges to POWER_TOL relative.
    """
    m = g.shape[1]
    v = np.ones(m, dtype=complex) / math.sqrt(m)
    gh = g.conj().T
    sigma_prev = 0.0
    for _ in range(POWER_MAX_ITER):
        u = gh @ (g @ v)
        norm_u = np.linalg.norm(u)
        if norm_u == 0.0:
            return 0.0
        sigma = math.sqrt(float(np.real(np.vdot(v, u))))
        v = u / norm_u
        if abs(sigma - sigma_prev) <= POWER_TOL * max(sigma, 1e-300):
            return sigma
        sigma_prev = sigma
    raise NumericalError("power iteration for sigma_max did not converge")


def sigma_max(model: ClosedLoopModel, omega: float) -> float:
    """Largest singular value of G(j*omega) = C (j*omega I - A)^{-1} B.

    The frequency response is obtained from one LU-factored solve with all
    B columns as right-hand sides; no explicit inverse is formed.
    """
    a = model.a_matrix
    n2 = a.shape[0]
    lhs = 1j * omega * np.eye(n2) - a
    try:
        x = np.linalg.solve(lhs, model.b_matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"resolvent solve failed at omega={omega!r}: {exc}") from exc
    residual = np.linalg.norm(lhs @ x - model.b_matrix) / max(
        np.linalg.norm(model.b_matrix), 1e-300
    )
    if residual > 1e-4:
        warnings.warn(
            f"resolvent solve at omega={omega:g} looks ill-conditioned "
            f"(relative residual {residual:.2e})",
            RuntimeWarning,
        )
    return _power_iteration_sigma_max(model.c_matrix @ x)


def _require_hurwitz(model: ClosedLoopModel) -> float:
    spectrum = analyze_spectrum(model)
    if spectrum.stability_margin <= 0.0:
        raise ValueError("closed loop is not Hurwitz; the norm is unbounded")
    return spectrum.stability_margin


def _spectral_norm_real(matrix: np.ndarray) -> float:
    return _power_iteration_sigma_max(matrix.astype(complex))


def hinf_bisection(model: ClosedLoopModel, tol_rel: float = 1e-4) -> HinfResult:
    """Norm via bisection on the Hamiltonian imaginary-axis test.

    For gamma > 0 the matrix [[A, B B^T/gamma], [-C^T C/gamma, -A^T]] has an
    eigenvalue within AXIS_TOLERANCE of the imaginary axis exactly when
    gamma does not exceed the norm (D = 0 throughout).  The initial lower
    bracket samples eight coarse frequencies; the upper starts from the
    resolvent safety bound and doubles until the test clears.
    """
    if not 1e-8 < tol_rel < 1e-2:
        raise ValueError("tol_rel must lie in (1e-8, 1e-2)")
    margin = _require_hurwitz(model)
    a = model.a_matrix
    bbt = model.b_matrix @ model.b_matrix.T
    ctc = model.c_matrix.T @ model.c_matrix

    def axis_crossings(gamma: float) -> np.ndarray:
        h = np.block([[a, bbt / gamma], [-ctc / gamma, -a.T]])
        ev = np.linalg.eigvals(h)
        return ev.imag[np.abs(ev.real) < AXIS_TOLERANCE]

    coarse = np.logspace(
        math.log10(GRID_SPAN[0]), math.log10(GRID_SPAN[1]), 8
    )
    lower = max(sigma_max(model, w) for w in coarse)
    upper = 2.0 * _spectral_norm_real(model.b_matrix) * _spectral_norm_real(
        model.c_matrix
    ) / margin
    upper = max(upper, 2.0 * lower)
    doublings = 0
    while len(axis_crossings(upper)) > 0:
        upper *= 2.0
        doublings += 1
        if doublings > 60:
            raise NumericalError("H-infinity upper bracket failed to clear")
    bracket = (lower, upper)
    if len(axis_crossings(lower)) == 0:
        # lower bound already above the norm can only mean the coarse sample
        # hit the peak within tolerance
        return HinfResult(lower, 0.0, "hamiltonian-bisection", bracket)
    while (upper - lower) / upper > tol_rel:
        mid = 0.5 * (upper + lower)
        if len(axis_crossings(mid)) > 0:
            lower = mid
        else:
            upper = mid
    # at the final lower bound the Hamiltonian still crosses the axis; the
    # crossing frequencies locate the peak
    freqs = np.abs(axis_crossings(lower))
    peak = 0.0
    if len(freqs) > 0:
        peak = float(freqs[np.argmax([sigma_max(model, w) for w in freqs])])
    return HinfResult(0.5 * (upper + lower), peak, "hamiltonian-bisection", bracket)


def default_omega_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.logspace(math.log10(GRID_SPAN[0]), math.log10(GRID_SPAN[1]), points)


def hinf_sweep(model: ClosedLoopModel, omega_grid: np.ndarray | None = None) -> HinfResult:
    """Norm via grid search over frequency plus golden-section refinement.

    The default grid is 2000 log-spaced points on [1e-3, 1e2].  Refinement
    brackets the grid maximizer between its neighbors; when the maximizer is
    the first grid point the bracket extends down to omega = 0 so a static
    peak is still found.
    """
    _require_hurwitz(model)
    if omega_grid is None:
        omega_grid = default_omega_grid()
    omega_grid = np.asarray(omega_grid, dtype=float)
    if len(omega_grid) < 2:
        raise ValueError("omega grid needs at least two points")
    if np.any(np.diff(omega_grid) <= 0):
        raise ValueError("omega grid must be strictly increasing")

    sig = np.array([sigma_max(model, w) for w in omega_grid])
    i = int(np.argmax(sig))
    lo = 0.0 if i == 0 else omega_grid[i - 1]
    hi = omega_grid[min(i + 1, len(omega_grid) - 1)]
    if hi <= lo:
        hi = omega_grid[i]

    # golden-section search for the maximum on [lo, hi]
    a_, b_ = lo, hi
    c_ = b_ - GOLDEN * (b_ - a_)
    d_ = a_ + GOLDEN * (b_ - a_)
    fc = sigma_max(model, c_)
    fd = sigma_max(model, d_)
    scale = max(hi, omega_grid[i], 1e-12)
    while (b_ - a_) > SWEEP_REFINE_REL * scale:
        if fc >= fd:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - GOLDEN * (b_ - a_)
            fc = sigma_max(model, c_)
        else:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + GOLDEN * (b_ - a_)
            fd = sigma_max(model, d_)
    candidates = [(sig[i], omega_grid[i]), (fc, c_), (fd, d_)]
    gamma, peak = max(candidates, key=lambda t: t[0])
    return HinfResult(float(gamma), float(peak), "frequency-sweep",
                      (float(omega_grid[0]), float(omega_grid[-1])))


def sweep_to_csv(model: ClosedLoopModel, omega_grid: np.ndarray | None = None,
                 digits: int = 12) -> str:
    """CSV ``omega,sigma_max`` over the sweep grid (Bode-style export)."""
    if omega_grid is None:
        omega_grid = default_omega_grid()
    lines = ["omega,sigma_max"]
    for w in omega_grid:
        lines.append(f"{w:.{digits}g},{sigma_max(model, w):.{digits}g}")
    return "\n".join(lines) + "\n"
