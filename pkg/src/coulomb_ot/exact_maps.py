"""Optimal transport maps for equal marginals in closed form.

For an interval density the optimal map exchanges the two halves around
the median with increasing branches. For a radial density on ``R^d`` it
sends the sphere of radius ``t`` to the antipodal sphere of radius ``t*``
where the mass inside ``B_t`` equals the mass outside ``B_{t*}``. Both maps
are evaluated by bisection on the exact distribution functions; a PCHIP
table of 512 nodes is kept for export and fast approximate evaluation.
"""

import csv

import numpy as np
from scipy.interpolate import PchipInterpolator
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._numerics import bisect_increasing, gauss_legendre_panels, unit_interval_panels
from .densities import Density, median_split
from .exceptions import CoulombOTError, NotRadial, OriginSingularity, SingularCost
from .kantorovich import resolve_cost

__all__ = [
    "IdentityMap",
    "MedianSplitMap",
    "RadialMap",
    "evaluate",
    "monge_cost",
    "pushforward_residual",
    "solve_map_1d",
    "solve_map_radial",
]

N_TABLE = 512
CORE_MASS = 1e-8


def _check_density(density):
    if not isinstance(density, Density):
        raise CoulombOTError("expected a Density")
    return density


class MedianSplitMap(TransformerMixin, BaseEstimator):
    """Optimal map of an interval density onto itself.

    With median ``a`` and support ``[alpha, beta]``, points left of ``a``
    go to the point right of ``a`` that cuts off the same mass from ``a`` as
    ``x`` does from ``alpha``, and symmetrically on the right.

    Parameters
    ----------
    n_table : int, default=512
        Nodes per branch in :attr:`table_`.
    evaluation : {"exact", "table"}, default="exact"
        ``exact`` inverts the distribution function by bisection;
        ``table`` uses the monotone PCHIP interpolant of :attr:`table_`.

    Attributes
    ----------
    median_ : float
    left_limit_, right_limit_ : float
        One-sided limits ``T(a-) = beta`` and ``T(a+) = alpha``; the map is
        undefined exactly at ``a`` and evaluates to NaN there.
    table_ : ndarray of shape (2 * n_table, 2)
        Rows ``(x, T(x))``.
    """

    def __init__(self, n_table=N_TABLE, evaluation="exact"):
        self.n_table = n_table
        self.evaluation = evaluation

    def fit(self, density, y=None):
        density = _check_density(density)
        if density.is_radial:
            raise CoulombOTError("MedianSplitMap needs an interval density")
        self.density_ = density
        self.median_ = a = median_split(density)
        lo, hi = density.lower, density.upper
        self.left_limit_, self.right_limit_ = hi, lo
        self.branches_ = (((lo, a), (a, hi)), ((a, hi), (lo, a)))
        k = int(self.n_table)
        left = np.linspace(lo, a, k + 2)[1:-1]
        right = np.linspace(a, hi, k + 2)[1:-1]
        xs = np.concatenate([left, right])
        self.table_ = np.column_stack([xs, self._exact(xs)])
        self.interpolants_ = (
            PchipInterpolator(left, self.table_[:k, 1]),
            PchipInterpolator(right, self.table_[k:, 1]),
        )
        _assert_monotone(self.interpolants_[0], left)
        _assert_monotone(self.interpolants_[1], right)
        return self

    def _exact(self, x):
        d, a = self.density_, self.median_
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, np.nan)
        below, above = x < a, x > a
        mass_a = float(d.cdf(a))
        if np.any(below):
            # mu((a, y)) = mu((alpha, x))
            target = mass_a + d.cdf(x[below])
            out[below] = bisect_increasing(d.cdf, target, a, d.upper)
        if np.any(above):
            # mu((y, a)) = mu((x, beta))
            target = mass_a - d.sf(x[above])
            out[above] = bisect_increasing(d.cdf, target, d.lower, a)
        return out

    def transform(self, X):
        """Map points; accepts a scalar, a 1D array or an ``(n, 1)`` array."""
        check_is_fitted(self, "median_")
        arr = np.asarray(X, dtype=float)
        flat = check_array(arr.reshape(-1, 1), ensure_all_finite=True).ravel()
        d = self.density_
        if np.any((flat < d.lower) | (flat > d.upper)):
            raise CoulombOTError("points outside the support window")
        if self.evaluation == "table":
            out = np.full(flat.shape, np.nan)
            below, above = flat < self.median_, flat > self.median_
            out[below] = self.interpolants_[0](flat[below])
            out[above] = self.interpolants_[1](flat[above])
        else:
            out = self._exact(flat)
        return out.reshape(arr.shape)

    def export_csv(self, path):
        _write_table(path, ("x", "T"), self.table_)


class RadialMap(TransformerMixin, BaseEstimator):
    """Optimal map ``T(x) = g(|x|) x / |x|`` of a radial density onto itself.

    ``g`` is negative and increasing with ``g(0+) = -inf`` and
    ``g(R) = 0``. It is tabulated from the radius where the ball mass is
    ``1e-8``; evaluation closer to the origin raises
    :class:`OriginSingularity`.

    Parameters
    ----------
    n_table : int, default=512
    evaluation : {"exact", "table"}, default="exact"

    Attributes
    ----------
    r_min_ : float
        Inner radius of the tabulated range.
    table_ : ndarray of shape (n_table, 2)
        Rows ``(r, g(r))`` at geometrically spaced radii.
    """

    def __init__(self, n_table=N_TABLE, evaluation="exact"):
        self.n_table = n_table
        self.evaluation = evaluation

    def fit(self, density, y=None):
        density = _check_density(density)
        if not density.is_radial:
            raise NotRadial("RadialMap needs a radial density")
        self.density_ = density
        self.r_min_ = float(density.quantile(CORE_MASS))
        radii = np.geomspace(self.r_min_, density.upper, int(self.n_table))
        self.table_ = np.column_stack([radii, self.g(radii)])
        self.interpolant_ = PchipInterpolator(radii, self.table_[:, 1])
        _assert_monotone(self.interpolant_, radii)
        return self

    def radius_image(self, t):
        """``|g(t)|``: the radius whose exterior mass equals the mass of ``B_t``."""
        check_is_fitted(self, "r_min_")
        t = np.asarray(t, dtype=float)
        if np.any(t < self.r_min_ * (1 - 1e-12)):
            raise OriginSingularity("radius inside the untabulated core around the origin")
        d = self.density_
        return d.isf(d.cdf(t))

    def g(self, t):
        """Signed radial profile ``g(t) = -|g(t)|``."""
        return -self.radius_image(t)

    def transform(self, X):
        """Map points of shape ``(n, d)``."""
        check_is_fitted(self, "r_min_")
        X = check_array(X, ensure_all_finite=True)
        if X.shape[1] != self.density_.dimension:
            raise CoulombOTError("points have the wrong dimension")
        r = np.linalg.norm(X, axis=1)
        if np.any(r < self.r_min_ * (1 - 1e-12)):
            raise OriginSingularity("radius inside the untabulated core around the origin")
        if self.evaluation == "table":
            g = self.interpolant_(np.minimum(r, self.density_.upper))
        else:
            g = self.g(np.minimum(r, self.density_.upper))
        return X * (g / r)[:, None]

    def export_csv(self, path):
        _write_table(path, ("r", "g"), self.table_)


class IdentityMap(TransformerMixin, BaseEstimator):
    """The identity on an interval density; a test double with infinite Coulomb cost."""

    def fit(self, density, y=None):
        self.density_ = _check_density(density)
        self.branches_ = (((density.lower, density.upper), (density.lower, density.upper)),)
        return self

    def transform(self, X):
        check_is_fitted(self, "density_")
        return np.asarray(X, dtype=float).copy()


def _assert_monotone(interp, nodes):
    fine = np.linspace(nodes[0], nodes[-1], 8 * nodes.size)
    if np.any(np.diff(interp(fine)) < -1e-12 * (1 + np.abs(interp(fine[:-1])))):
        raise CoulombOTError("tabulated map is not monotone")


def _write_table(path_or_file, header, rows):
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for a, b in rows:
            writer.writerow([f"{a:.12g}", f"{b:.12g}"])
    finally:
        if own:
            fh.close()


def solve_map_1d(density, **params):
    """Fitted :class:`MedianSplitMap` for an interval density."""
    return MedianSplitMap(**params).fit(density)


def solve_map_radial(density, **params):
    """Fitted :class:`RadialMap` for a radial density."""
    return RadialMap(**params).fit(density)


def evaluate(fitted_map, x):
    """Apply a fitted map to points; NaN at the 1D median."""
    return fitted_map.transform(x)


def pushforward_residual(fitted_map, density=None, n_intervals=200):
    """Largest ``|mu(T^-1(V)) - mu(V)|`` over a panel of test sets ``V``.

    Interval maps are tested on intervals, radial maps on centred annuli.
    Preimages are computed by bisection on the monotone branches, so the
    residual measures how exactly the map transports the density.
    """
    check_is_fitted(fitted_map, "density_")
    density = fitted_map.density_ if density is None else density
    if density.is_radial:
        return _radial_residual(fitted_map, density, n_intervals)
    u = np.linspace(0.0, 1.0, 21)
    pairs = [(s, t) for s in u for t in u if s < t][: int(n_intervals)]
    lo_u, hi_u = np.array(pairs).T
    c = density.quantile(lo_u)
    e = density.quantile(hi_u)
    target = density.between(c, e)
    pre = np.zeros_like(target)
    for (d0, d1), (r0, r1) in fitted_map.branches_:
        lo_t = np.clip(c, r0, r1)
        hi_t = np.clip(e, r0, r1)
        f = getattr(fitted_map, "_exact", fitted_map.transform)
        x_lo = bisect_increasing(f, lo_t, np.full_like(lo_t, d0), np.full_like(lo_t, d1))
        x_hi = bisect_increasing(f, hi_t, np.full_like(hi_t, d0), np.full_like(hi_t, d1))
        pre += np.where(hi_t > lo_t, density.between(x_lo, x_hi), 0.0)
    return float(np.max(np.abs(pre - target)))


def _radial_residual(fitted_map, density, n_intervals):
    u = np.linspace(0.0, 1.0, 21)
    pairs = [(s, t) for s in u for t in u if s < t][: int(n_intervals)]
    lo_u, hi_u = np.array(pairs).T
    r1 = density.quantile(lo_u)
    r2 = density.quantile(hi_u)
    target = density.between(r1, r2)
    r_min = fitted_map.r_min_

    def neg_image(t):
        # -|g| is increasing; treat the core as the limit g(0+) = -inf
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, -np.inf)
        ok = t >= r_min
        out[ok] = -fitted_map.radius_image(t[ok])
        return out

    lo = np.zeros_like(r1)
    hi = np.full_like(r1, density.upper)
    # |g(t)| in (r1, r2)  <=>  t in (|g|^-1(r2), |g|^-1(r1))
    t_lo = bisect_increasing(neg_image, -r2, lo, hi)
    t_hi = bisect_increasing(neg_image, -r1, lo, hi)
    pre = density.between(t_lo, t_hi)
    return float(np.max(np.abs(pre - target)))


def monge_cost(fitted_map, density=None, cost="coulomb", order=16):
    """``int l(|x - T(x)|) d rho(x)`` by Gauss-Legendre quadrature in mass coordinates."""
    check_is_fitted(fitted_map, "density_")
    density = fitted_map.density_ if density is None else density
    cost = resolve_cost(cost)
    if isinstance(fitted_map, RadialMap):
        u_lo = float(density.cdf(fitted_map.r_min_))
        edges = u_lo + (1.0 - u_lo) * unit_interval_panels()
        u, w = gauss_legendre_panels(edges, order)
        t = density.quantile(u)
        dist = t + fitted_map.radius_image(np.maximum(t, fitted_map.r_min_))
    else:
        edges = unit_interval_panels(breaks=(0.5,))
        u, w = gauss_legendre_panels(edges, order)
        x = density.quantile(u)
        dist = np.abs(x - fitted_map.transform(x))
    if np.any(~np.isfinite(dist)) or np.any(dist <= 0):
        raise SingularCost("map has fixed points; the cost diverges")
    return float(np.sum(w * cost.l(dist)))
