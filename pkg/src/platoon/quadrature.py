"""Composite Gauss-Legendre quadrature on [0, 2*pi] with breakpoint-aligned panels.

The gain profiles used in this package may be discontinuous (steps), which
destroys naive spectral quadrature accuracy.  Panels are therefore split at
the profile breakpoints so each panel integrand is smooth: 64 base panels,
32 Gauss-Legendre nodes per panel.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi

N_PANELS = 64
N_NODES = 32


def panel_nodes(breakpoints=(), n_panels: int = N_PANELS, n_nodes: int = N_NODES):
    """Quadrature nodes and weights on [0, 2*pi].

    Parameters
    ----------
    breakpoints : iterable of float
        Interior points that become panel edges (integrand discontinuities).
    n_panels : int
        Number of uniform base panels before breakpoint insertion.
    n_nodes : int
        Gauss-Legendre nodes per panel.

    Returns
    -------
    (x, w) : pair of 1-D arrays of equal length.
    """
    edges = np.linspace(0.0, TWO_PI, n_panels + 1)
    if len(breakpoints):
        extra = np.asarray(list(breakpoints), dtype=float)
        if np.any((extra < 0.0) | (extra > TWO_PI)):
            raise ValueError("breakpoints must lie in [0, 2*pi]")
        edges = np.unique(np.concatenate([edges, extra]))
    xs, ws = np.polynomial.legendre.leggauss(n_nodes)
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = (half[:, None] * xs[None, :] + mid[:, None]).ravel()
    w = (half[:, None] * ws[None, :]).ravel()
    return x, w


def integrate(f, breakpoints=()) -> float:
    """Integrate a scalar function over [0, 2*pi] with breakpoint-aware panels."""
    x, w = panel_nodes(breakpoints)
    vals = np.array([f(xi) for xi in x])
    return float(np.dot(w, vals))
