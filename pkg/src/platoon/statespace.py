"""Exact closed-loop state-space model of the platoon and its spectrum.

The closed loop in scaled error coordinates is first order in the stacked
state [position errors; velocity errors]:

    d/dt [y; v] = [[0, I], [-(K_f M^T + K_b M_or_Mo), -diag(b)]] [y; v]

where M is upper bidiagonal (1 on the diagonal, -1 on the superdiagonal)
and, with a fictitious lead vehicle only, the last back coupling is absent.
The disturbance input enters the accelerations (B = [0; I]) and the output
collects the inter-vehicle spacing errors.

The stability margin is minus the real part of the least stable eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import GainSchedule, PlatoonConfig, Scenario, build_gain_schedule

MAX_DENSE_ORDER = 2000

# tie-break window for "maximal real part" (deterministic CSV output)
_REAL_TIE = 1e-10


class NumericalError(RuntimeError):
    """Raised when a numerical routine fails to converge or produce finite output."""


@dataclass(frozen=True)
class ClosedLoopModel:
    """Closed-loop system matrices (A, B, C) for one gain schedule.

    ``c_matrix`` maps the state to the inter-vehicle spacing errors
    e_i = y_{i-1} - y_i (fictitious neighbors pinned at zero error).  With
    lead and follow vehicles there are N+1 gaps, with a lead vehicle only
    there are N.
    """

    a_matrix: np.ndarray
    b_matrix: np.ndarray
    c_matrix: np.ndarray
    n_vehicles: int


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    least_stable: complex
    stability_margin: float


def bidiagonal_difference(n: int) -> np.ndarray:
    """The matrix M: identity with -1 on the superdiagonal."""
    return np.eye(n) - np.diag(np.ones(n - 1), 1)


def build_closed_loop(schedule: GainSchedule) -> ClosedLoopModel:
    """Assemble the 2N x 2N closed-loop matrix plus disturbance/output maps."""
    n = schedule.n_vehicles
    m = bidiagonal_difference(n)
    # Scenario II carries k_back[n-1] = 0, which zeroes the same entries the
    # truncated difference matrix would; a single assembly covers both.
    coupling = np.diag(schedule.k_front) @ m.T + np.diag(schedule.k_back) @ m
    a = np.zeros((2 * n, 2 * n))
    a[:n, n:] = np.eye(n)
    a[n:, :n] = -coupling
    a[n:, n:] = -np.diag(schedule.damping)

    b = np.zeros((2 * n, n))
    b[n:, :] = np.eye(n)

    n_gaps = n + 1 if schedule.scenario is Scenario.I else n
    c = np.zeros((n_gaps, 2 * n))
    c[:n, :n] = -m.T
    if schedule.scenario is Scenario.I:
        # gap between the last vehicle and the fictitious follower: y_N - 0
        c[n, n - 1] = 1.0
    return ClosedLoopModel(a, b, c, n)


def eigenvalues_dense(matrix: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense real matrix.

    Backed by LAPACK's balanced Hessenberg QR iteration; callers get the
    full spectrum or a NumericalError, never a partial result.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    if matrix.shape[0] > MAX_DENSE_ORDER:
        raise ValueError(f"dense eigensolver capped at order {MAX_DENSE_ORDER}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix entries must be finite")
    try:
        ev = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericalError("eigenvalue computation produced non-finite values")
    return ev


def least_stable_eigenvalue(eigenvalues: np.ndarray) -> complex:
    """Eigenvalue with maximal real part; ties go to smaller |Im|, then Im >= 0."""
    ev = np.asarray(eigenvalues)
    re_max = ev.real.max()
    near = ev[ev.real >= re_max - _REAL_TIE]
    order = sorted(range(len(near)), key=lambda i: (abs(near[i].imag), -near[i].imag))
    return complex(near[order[0]])


def spectrum_from_eigenvalues(eigenvalues: np.ndarray) -> Spectrum:
    least = least_stable_eigenvalue(eigenvalues)
    return Spectrum(np.asarray(eigenvalues), least, -least.real)


def analyze_spectrum(model: ClosedLoopModel) -> Spectrum:
    """Full spectrum and stability margin of a closed-loop model."""
    return spectrum_from_eigenvalues(eigenvalues_dense(model.a_matrix))


def spectrum_of_config(config: PlatoonConfig) -> Spectrum:
    return analyze_spectrum(build_closed_loop(build_gain_schedule(config)))


# ---------------------------------------------------------------------------
# Analytic oracle for the symmetric case
# ---------------------------------------------------------------------------

def coupling_eigenvalues_symmetric(config: PlatoonConfig) -> np.ndarray:
    """Exact eigenvalues of the symmetric coupling matrix (tridiagonal Toeplitz
    with lead+follow ends, or with a free last row when there is no follower)."""
    n, k0 = config.n_vehicles, config.k0
    l = np.arange(1, n + 1, dtype=float)
    if config.scenario is Scenario.I:
        theta = l * math.pi / (n + 1)
    else:
        theta = (2 * l - 1) * math.pi / (2 * n + 1)
    return k0 * (2.0 - 2.0 * np.cos(theta))


def symmetric_spectrum_analytic(config: PlatoonConfig) -> Spectrum:
    """Closed-form spectrum for the symmetric (epsilon = 0) configuration.

    Each coupling eigenvalue lam contributes the pair of roots of
    s^2 + b0*s + lam = 0.  Serves as the independent oracle for the dense
    eigensolver on every symmetric configuration.
    """
    if config.epsilon != 0.0:
        raise ValueError("analytic spectrum requires epsilon = 0")
    lam = coupling_eigenvalues_symmetric(config)
    disc = np.asarray(config.b0 ** 2 - 4.0 * lam, dtype=complex)
    root = np.sqrt(disc)
    s_plus = (-config.b0 + root) / 2.0
    s_minus = (-config.b0 - root) / 2.0
    return spectrum_from_eigenvalues(np.concatenate([s_plus, s_minus]))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def sorted_representatives(eigenvalues: np.ndarray) -> np.ndarray:
    """Eigenvalues sorted by descending real part, ties by ascending |Im|.

    Real parts are quantized before comparison so that floating-point noise
    among analytically-equal real parts cannot scramble the order.
    """
    ev = np.asarray(eigenvalues)
    re_q = np.round(ev.real, 9)
    order = np.lexsort((-ev.imag, np.abs(ev.imag), -re_q))
    return ev[order]


def spectrum_to_csv(spectrum: Spectrum, digits: int = 12) -> str:
    """CSV with header ``l,re,im`` sorted by descending real part."""
    lines = ["l,re,im"]
    for rank, ev in enumerate(sorted_representatives(spectrum.eigenvalues), start=1):
        lines.append(f"{rank},{ev.real:.{digits}g},{ev.imag:.{digits}g}")
    return "\n".join(lines) + "\n"


def format_matrix(matrix: np.ndarray) -> str:
    """Plain-text matrix format: 'rows cols' then one row per line,
    full double precision (17 significant digits)."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    rows, cols = matrix.shape
    lines = [f"{rows} {cols}"]
    for row in matrix:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    """Inverse of :func:`format_matrix`."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    rows, cols = (int(tok) for tok in lines[0].split())
    data = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
    if data.shape != (rows, cols):
        raise ValueError(f"matrix body {data.shape} does not match header ({rows}, {cols})")
    return data
