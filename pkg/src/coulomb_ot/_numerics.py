"""Small numerical kernels: vectorised bisection and Gauss-Legendre panels."""

import numpy as np

MAX_BISECT = 80


def bisect_increasing(fun, target, lo, hi, maxiter=MAX_BISECT):
    """Solve ``fun(x) = target`` elementwise for a non-decreasing ``fun``.

    The bracket ``[lo, hi]`` is halved until it stops shrinking in floating
    point or ``maxiter`` halvings were made. When ``target`` lies outside
    the range of ``fun`` on the bracket the nearest endpoint is returned.
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        below = fun(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def gauss_legendre_panels(edges, order=16):
    """Nodes and weights of composite Gauss-Legendre over consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    t, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * t[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def unit_interval_panels(n_uniform=64, n_geometric=40, smallest=1e-14, breaks=()):
    """Panel edges on ``[0, 1]`` refined geometrically toward 0, 1 and ``breaks``."""
    geo = np.geomspace(smallest, 1.0 / n_uniform, n_geometric)
    pieces = [[0.0, 1.0], geo, 1.0 - geo, np.linspace(0.0, 1.0, n_uniform + 1)]
    inner = np.geomspace(1e-10, 1.0 / n_uniform, n_geometric // 2)
    for b in breaks:
        pieces += [[b], b - inner, b + inner]
    return np.unique(np.clip(np.concatenate(pieces), 0.0, 1.0))
