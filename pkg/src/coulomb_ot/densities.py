"""Densities on an interval and radially symmetric densities on ``R^d``.

A :class:`Density` is an immutable description of a nonnegative function.
``dimension == 1`` means a density on a bounded interval of the real line;
``dimension >= 2`` means a radial density ``rho(x) = lambda(|x|)`` and every
coordinate argument is a radius. Integrals are exact for the analytic kinds
(special functions) and exact for piecewise-linear grid samples.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple

import numpy as np
from scipy import optimize, special

from ._numerics import bisect_increasing, gauss_legendre_panels
from .exceptions import (
    CoulombOTError,
    DisconnectedSupport,
    NegativeValue,
    NotRadial,
    UnboundedDomainWithoutTruncation,
    ZeroMass,
)

__all__ = [
    "Density",
    "NormPair",
    "TRUNCATION",
    "convolve",
    "crossing_gaussian_pair",
    "dilate",
    "discretize",
    "lp_norms",
    "median_split",
    "mollify",
    "normalize",
    "radial_cdfs",
    "sphere_area",
]

TRUNCATION = 1e-14
KINDS = ("exponential", "gaussian", "uniform", "grid")
_TAIL = math.sqrt(math.log(1.0 / TRUNCATION))


def sphere_area(d):
    """Surface area of the unit sphere in ``R^d``."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


class NormPair(NamedTuple):
    """``L^1`` and ``L^3`` norms of a density."""

    l1: float
    l3: float

    @property
    def max(self):
        return max(self.l1, self.l3)


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative density, analytic or tabulated.

    Use the constructors :meth:`exponential`, :meth:`gaussian`,
    :meth:`uniform`, :meth:`uniform_ball` and :meth:`grid` rather than the
    raw initialiser. Values are ``shape(x) / norm``; the constructors pick
    ``norm`` so that the total mass is one unless ``normalize=False``.

    Attributes
    ----------
    kind : str
        One of ``exponential``, ``gaussian``, ``uniform``, ``grid``.
    dimension : int
        1 for an interval density, ``d >= 2`` for a radial density on ``R^d``.
    params : mapping
        ``scale`` (exponential) or ``sigma`` (gaussian).
    lower, upper : float
        Support window. Radial densities always have ``lower == 0``.
    norm : float
        Normalisation constant ``Z``.
    """

    kind: str
    dimension: int
    params: Mapping[str, float]
    lower: float
    upper: float
    norm: float = 1.0
    points: np.ndarray = None
    values: np.ndarray = None
    _grid: tuple = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CoulombOTError(f"unknown density kind {self.kind!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise CoulombOTError("dimension must be a positive integer")
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise UnboundedDomainWithoutTruncation("support window must be finite")
        if not self.lower < self.upper:
            raise CoulombOTError("support window must have lower < upper")
        if self.is_radial and self.lower != 0.0:
            raise CoulombOTError("radial densities are supported on [0, R]")
        if not (np.isfinite(self.norm) and self.norm > 0):
            raise ZeroMass("normalisation constant must be positive and finite")
        if self.kind == "grid":
            object.__setattr__(self, "_grid", self._prepare_grid())

    # constructors -----------------------------------------------------

    @classmethod
    def exponential(cls, scale=1.0, dimension=1, lower=None, upper=None, normalize=True):
        """``exp(-|x| / scale)``, truncated where it drops below 1e-14 of its peak."""
        _check_positive(scale, "scale")
        lo, hi = _window(dimension, lower, upper, _exp_cutoff(scale, dimension))
        d = cls("exponential", dimension, {"scale": float(scale)}, lo, hi)
        return d.normalized() if normalize else d

    @classmethod
    def gaussian(cls, sigma=1.0, dimension=1, lower=None, upper=None, normalize=True):
        """``exp(-x^2 / (2 sigma^2))`` with automatic truncation."""
        _check_positive(sigma, "sigma")
        lo, hi = _window(dimension, lower, upper, _gauss_cutoff(sigma, dimension))
        d = cls("gaussian", dimension, {"sigma": float(sigma)}, lo, hi)
        return d.normalized() if normalize else d

    @classmethod
    def uniform(cls, lower=0.0, upper=1.0, normalize=True):
        """Indicator of the interval ``[lower, upper]``."""
        d = cls("uniform", 1, {}, float(lower), float(upper))
        return d.normalized() if normalize else d

    @classmethod
    def uniform_ball(cls, radius=1.0, dimension=3, normalize=True):
        """Indicator of the centred ball of the given radius in ``R^dimension``."""
        _check_positive(radius, "radius")
        if dimension < 2:
            raise CoulombOTError("use Density.uniform for interval densities")
        d = cls("uniform", dimension, {}, 0.0, float(radius))
        return d.normalized() if normalize else d

    @classmethod
    def grid(cls, points, values, dimension=1, normalize=True):
        """Piecewise-linear interpolant of ``values`` at increasing ``points``.

        The density vanishes outside ``[points[0], points[-1]]``. Leading
        and trailing zeros are trimmed; an interior zero run raises
        :class:`DisconnectedSupport`.
        """
        x = np.asarray(points, dtype=float).ravel()
        v = np.asarray(values, dtype=float).ravel()
        if x.shape != v.shape or x.size < 2:
            raise CoulombOTError("grid needs matching points and values, at least two")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise CoulombOTError("grid points and values must be finite")
        if np.any(np.diff(x) <= 0):
            raise CoulombOTError("grid points must be strictly increasing")
        if np.any(v < 0):
            raise NegativeValue("density values must be nonnegative")
        if dimension >= 2 and x[0] < 0:
            raise CoulombOTError("radial grid points must be nonnegative")
        nz = np.flatnonzero(v > 0)
        if nz.size == 0:
            raise ZeroMass("grid density is identically zero")
        first, last = max(nz[0] - 1, 0), min(nz[-1] + 1, x.size - 1)
        if np.any(v[nz[0] : nz[-1] + 1] == 0):
            raise DisconnectedSupport("grid density support has a gap")
        if dimension >= 2 and x[0] == 0.0:
            first = 0
        x, v = x[first : last + 1], v[first : last + 1]
        if dimension >= 2 and x[0] > 0:
            # radial support must reach the origin to stay connected
            raise DisconnectedSupport("radial grid support must contain the origin")
        x.flags.writeable = False
        v.flags.writeable = False
        d = cls("grid", dimension, {}, float(x[0]), float(x[-1]), 1.0, x, v)
        return d.normalized() if normalize else d

    # basic queries ------------------------------------------------------

    @property
    def is_radial(self):
        return self.dimension >= 2

    @property
    def radius(self):
        """Truncation radius ``R_max`` of a radial density."""
        self._require_radial()
        return self.upper

    def normalized(self):
        return normalize(self)

    def shape(self, x):
        """Unnormalised profile at coordinates (or radii) ``x``."""
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lower) & (x <= self.upper)
        if self.kind == "exponential":
            out = np.exp(-np.abs(x) / self.params["scale"])
        elif self.kind == "gaussian":
            out = np.exp(-0.5 * (x / self.params["sigma"]) ** 2)
        elif self.kind == "uniform":
            out = np.ones_like(x)
        else:
            out = np.interp(x, self.points, self.values)
        return np.where(inside, out, 0.0)

    def __call__(self, x):
        return self.shape(x) / self.norm

    value = __call__

    def mass_density(self, x):
        """Mass per unit coordinate: ``rho`` in 1D, ``|S^{d-1}| r^{d-1} lambda(r)`` if radial."""
        x = np.asarray(x, dtype=float)
        if not self.is_radial:
            return self(x)
        d = self.dimension
        return sphere_area(d) * np.abs(x) ** (d - 1) * self(x)

    def mass(self):
        return float(self._raw_between(self.lower, self.upper)) / self.norm

    def cdf(self, x):
        """Mass in ``[lower, x]`` (the ball of radius ``x`` when radial)."""
        x = np.clip(np.asarray(x, dtype=float), self.lower, self.upper)
        return self._raw_between(np.full_like(x, self.lower), x) / self.norm

    def sf(self, x):
        """Mass in ``[x, upper]``; accurate in the far tail."""
        x = np.clip(np.asarray(x, dtype=float), self.lower, self.upper)
        return self._raw_between(x, np.full_like(x, self.upper)) / self.norm

    def between(self, a, b):
        """Mass in ``[a, b]`` for ``a <= b``, elementwise."""
        a = np.clip(np.asarray(a, dtype=float), self.lower, self.upper)
        b = np.clip(np.asarray(b, dtype=float), self.lower, self.upper)
        a, b = np.broadcast_arrays(a, b)
        return self._raw_between(a, np.maximum(a, b)) / self.norm

    def quantile(self, u):
        """Smallest ``x`` with ``cdf(x) = u``, by bisection."""
        return bisect_increasing(self.cdf, u, self.lower, self.upper)

    def isf(self, v):
        """Point ``x`` with ``sf(x) = v``; keeps precision for small ``v``."""
        v = np.asarray(v, dtype=float)
        return bisect_increasing(lambda x: -self.sf(x), -v, self.lower, self.upper)

    def integrate_power(self, p):
        """``int rho^p`` over the support (volume measure of ``R^d`` if radial)."""
        if p <= 0:
            raise CoulombOTError("power must be positive")
        if self.kind == "exponential":
            scaled = replace(self, params={"scale": self.params["scale"] / p})
        elif self.kind == "gaussian":
            scaled = replace(self, params={"sigma": self.params["sigma"] / math.sqrt(p)})
        elif self.kind == "uniform":
            scaled = self
        else:
            x, dx, v, slope = self._grid[:4]
            t, w = np.polynomial.legendre.leggauss(8)
            s = 0.5 * (t + 1.0)[None, :] * dx[:, None]
            vals = np.maximum(v[:-1, None] + slope[:, None] * s, 0.0) ** p
            pts = x[:-1, None] + s
            weight = self._radial_weight(pts)
            return float(np.sum(vals * weight * 0.5 * dx[:, None] * w[None, :])) / self.norm**p
        return float(scaled._raw_between(self.lower, self.upper)) / self.norm**p

    def to_csv(self, path_or_file, n=None):
        """Write ``point,value`` rows: the samples of a grid density, else ``n`` nodes."""
        if self.kind == "grid" and n is None:
            pts, vals = self.points, self.values / self.norm
        else:
            pts = np.linspace(self.lower, self.upper, int(n or 513))
            vals = self(pts)
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            fh.write("point,value\n")
            for p, v in zip(pts, vals):
                fh.write(f"{p:.12g},{v:.12g}\n")
        finally:
            if own:
                fh.close()

    def to_spec(self):
        """JSON-serialisable description that :meth:`from_spec` inverts."""
        spec = {"kind": self.kind, "dimension": int(self.dimension)}
        if self.kind == "grid":
            spec["samples"] = [[float(a), float(b)] for a, b in zip(self.points, self.values)]
        else:
            spec["params"] = dict(self.params)
            spec["lower"], spec["upper"] = self.lower, self.upper
        return spec

    @classmethod
    def from_spec(cls, spec):
        kind = spec.get("kind")
        dim = int(spec.get("dimension", 1))
        params = dict(spec.get("params", {}))
        normalize_flag = bool(spec.get("normalize", True))
        lower, upper = spec.get("lower"), spec.get("upper")
        if kind == "exponential":
            return cls.exponential(params.get("scale", 1.0), dim, lower, upper, normalize_flag)
        if kind == "gaussian":
            return cls.gaussian(params.get("sigma", 1.0), dim, lower, upper, normalize_flag)
        if kind == "uniform":
            if dim == 1:
                lo = 0.0 if lower is None else lower
                hi = 1.0 if upper is None else upper
                return cls.uniform(lo, hi, normalize_flag)
            radius = params.get("radius", 1.0 if upper is None else upper)
            return cls.uniform_ball(radius, dim, normalize_flag)
        if kind == "grid":
            samples = np.asarray(spec.get("samples", []), dtype=float)
            if samples.ndim != 2 or samples.shape[1] != 2:
                raise CoulombOTError("grid samples must be a list of [x, value] pairs")
            return cls.grid(samples[:, 0], samples[:, 1], dim, normalize_flag)
        raise CoulombOTError(f"unknown density kind {kind!r}")

    # internals ----------------------------------------------------------

    def _require_radial(self):
        if not self.is_radial:
            raise NotRadial("operation needs a radial density (dimension >= 2)")

    def _radial_weight(self, r):
        if not self.is_radial:
            return np.ones_like(r)
        d = self.dimension
        return sphere_area(d) * r ** (d - 1)

    def _raw_between(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.kind == "grid":
            return self._grid_between(a, b)
        d = self.dimension
        if not self.is_radial:
            if self.kind == "exponential":
                return _laplace_mass(a, b, self.params["scale"])
            if self.kind == "gaussian":
                return _gauss_mass(a, b, self.params["sigma"])
            return b - a
        area = sphere_area(d)
        if self.kind == "exponential":
            s = self.params["scale"]
            const = area * s**d * math.gamma(d)
            return const * _gamma_mass(d, a / s, b / s)
        if self.kind == "gaussian":
            sig = self.params["sigma"]
            const = area * sig**d * 2.0 ** (d / 2.0 - 1.0) * math.gamma(d / 2.0)
            return const * _gamma_mass(d / 2.0, 0.5 * (a / sig) ** 2, 0.5 * (b / sig) ** 2)
        return area * (b**d - a**d) / d

    def _prepare_grid(self):
        x, v = self.points, self.values
        dx = np.diff(x)
        slope = np.diff(v) / dx
        seg = self._partial(x[:-1], v[:-1], slope, dx)
        left = np.concatenate([[0.0], np.cumsum(seg)])
        right = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        return x, dx, v, slope, seg, left, right

    def _partial(self, x0, v0, slope, delta):
        # exact integral of (v0 + slope*s) * w(x0 + s) for s in [0, delta]
        p = self.dimension - 1 if self.is_radial else 0
        total = np.zeros(np.broadcast(x0, delta).shape)
        for k in range(p + 1):
            coef = math.comb(p, k) * x0 ** (p - k)
            total = total + coef * (
                v0 * delta ** (k + 1) / (k + 1) + slope * delta ** (k + 2) / (k + 2)
            )
        if self.is_radial:
            total = total * sphere_area(self.dimension)
        return total

    def _grid_cdf_parts(self, t):
        x, dx, v, slope, seg, left, right = self._grid
        i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
        delta = np.clip(t - x[i], 0.0, dx[i])
        part = self._partial(x[i], v[i], slope[i], delta)
        return i, part

    def _grid_between(self, a, b):
        x, dx, v, slope, seg, left, right = self._grid
        a, b = np.broadcast_arrays(a, b)
        ia, pa = self._grid_cdf_parts(a)
        ib, pb = self._grid_cdf_parts(b)
        cdf_a, cdf_b = left[ia] + pa, left[ib] + pb
        sf_a, sf_b = right[ia + 1] + (seg[ia] - pa), right[ib + 1] + (seg[ib] - pb)
        # use whichever tail keeps the smaller numbers
        from_left = cdf_b - cdf_a
        from_right = sf_a - sf_b
        use_right = cdf_a > sf_b
        return np.maximum(np.where(use_right, from_right, from_left), 0.0)


def _check_positive(value, name):
    if not (np.isfinite(value) and value > 0):
        raise CoulombOTError(f"{name} must be positive and finite")


def _window(dimension, lower, upper, cutoff):
    if dimension >= 2:
        if lower not in (None, 0, 0.0):
            raise CoulombOTError("radial densities start at the origin")
        return 0.0, float(cutoff if upper is None else upper)
    lo = -cutoff if lower is None else float(lower)
    hi = cutoff if upper is None else float(upper)
    return lo, hi


def _exp_cutoff(scale, d):
    if d == 1:
        return scale * math.log(1.0 / TRUNCATION)
    peak = (d - 1) * scale
    log_peak = (d - 1) * math.log(peak) - peak / scale
    fun = lambda r: (d - 1) * math.log(r) - r / scale - log_peak - math.log(TRUNCATION)
    return optimize.brentq(fun, peak, peak + 200.0 * scale)


def _gauss_cutoff(sigma, d):
    if d == 1:
        return sigma * math.sqrt(2.0) * _TAIL
    peak = sigma * math.sqrt(d - 1)
    log_peak = (d - 1) * math.log(peak) - 0.5 * (peak / sigma) ** 2
    fun = lambda r: (d - 1) * math.log(r) - 0.5 * (r / sigma) ** 2 - log_peak - math.log(TRUNCATION)
    return optimize.brentq(fun, peak, peak + 40.0 * sigma)


def _laplace_mass(a, b, s):
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    pos = s * (np.exp(-np.maximum(a, 0) / s) - np.exp(-np.maximum(b, 0) / s))
    neg = s * (np.exp(np.minimum(b, 0) / s) - np.exp(np.minimum(a, 0) / s))
    return np.where(a >= 0, pos, np.where(b <= 0, neg, pos + neg))


def _gauss_mass(a, b, sigma):
    a, b = np.broadcast_arrays(np.asarray(a, float) / sigma, np.asarray(b, float) / sigma)
    right = special.ndtr(-a) - special.ndtr(-b)
    left = special.ndtr(b) - special.ndtr(a)
    return sigma * math.sqrt(2.0 * math.pi) * np.where(a >= 0, right, left)


def _gamma_mass(shape, lo, hi):
    lower_side = special.gammainc(shape, hi) - special.gammainc(shape, lo)
    upper_side = special.gammaincc(shape, lo) - special.gammaincc(shape, hi)
    return np.where(lo > shape, upper_side, lower_side)


# operations ---------------------------------------------------------------


def normalize(density):
    """Return ``density`` with ``norm`` set so that its mass is one.

    Idempotent: normalising a normalised density leaves ``norm`` unchanged.
    """
    raw = float(density._raw_between(density.lower, density.upper))
    if not raw > 0:
        raise ZeroMass("density has zero mass")
    return replace(density, norm=raw)


def median_split(density):
    """Point ``a`` carrying half the mass on each side of an interval density."""
    if density.is_radial:
        raise CoulombOTError("median split is defined for interval densities")
    a = float(density.quantile(0.5))
    if abs(float(density.cdf(a)) - 0.5 * density.mass()) > 1e-10:
        raise DisconnectedSupport("median is not isolated; support may be disconnected")
    return a


def radial_cdfs(density):
    """Return ``(F1, F2)`` with ``F1(t) = mu(B_t)`` and ``F2(-t) = mu(R^d minus B_t)``."""
    density._require_radial()

    def F1(t):
        return density.cdf(t)

    def F2(s):
        return density.sf(-np.asarray(s, dtype=float))

    return F1, F2


def lp_norms(density):
    """``(||rho||_1, ||rho||_3)`` with the volume measure of the ambient space."""
    return NormPair(density.mass(), density.integrate_power(3.0) ** (1.0 / 3.0))


def dilate(density, alpha):
    """The density ``alpha^d rho(alpha x)``; mass is preserved."""
    _check_positive(alpha, "alpha")
    d = density.dimension
    norm = density.norm / alpha**d
    if density.kind == "exponential":
        params = {"scale": density.params["scale"] / alpha}
    elif density.kind == "gaussian":
        params = {"sigma": density.params["sigma"] / alpha}
    else:
        params = dict(density.params)
    if density.kind == "grid":
        pts = density.points / alpha
        pts.flags.writeable = False
        return replace(density, lower=pts[0], upper=pts[-1], norm=norm, points=pts)
    return replace(
        density,
        params=params,
        lower=density.lower / alpha,
        upper=density.upper / alpha,
        norm=norm,
    )


def _input_panels(density, width):
    edges = [density.lower, density.upper]
    if density.kind == "grid":
        edges = list(density.points)
    elif density.kind == "exponential" and density.lower < 0 < density.upper:
        edges.append(0.0)
    edges = np.unique(edges)
    refined = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        k = max(1, int(math.ceil((b - a) / width)))
        refined.extend(np.linspace(a, b, k + 1)[1:])
    return np.asarray(refined)


def convolve(density, eps, x, order=8):
    """Exact values of ``phi_eps * rho`` at ``x`` (radii when radial).

    ``phi_eps(z) = (pi eps^2)^{-d/2} exp(-|z|^2 / eps^2)``.
    """
    _check_positive(eps, "eps")
    x = np.asarray(x, dtype=float)
    nodes, weights = gauss_legendre_panels(_input_panels(density, eps / 4.0), order)
    w = weights * density(nodes)
    d = density.dimension
    out = np.empty(x.size)
    flat = x.ravel()
    for start in range(0, flat.size, 256):
        xs = flat[start : start + 256, None]
        if d == 1:
            kern = np.exp(-((xs - nodes) ** 2) / eps**2) / (math.sqrt(math.pi) * eps)
        elif d == 2:
            kern = (2.0 / eps**2) * nodes * np.exp(-((xs - nodes) ** 2) / eps**2)
            kern = kern * special.i0e(2.0 * xs * nodes / eps**2)
        elif d == 3:
            r = np.where(xs > 0, xs, 1.0)
            diff = np.exp(-((xs - nodes) ** 2) / eps**2) * -np.expm1(-4.0 * xs * nodes / eps**2)
            kern = nodes * diff / r
            at_origin = 4.0 * nodes**2 * np.exp(-(nodes**2) / eps**2) / eps**2
            kern = np.where(xs > 0, kern, at_origin) / (math.sqrt(math.pi) * eps)
        else:
            raise CoulombOTError("mollification is implemented for dimensions 1 to 3")
        out[start : start + 256] = kern @ w
    return out.reshape(x.shape)


def mollify(density, eps, n=4097):
    """Gaussian smoothing ``phi_eps * rho`` sampled on an ``n``-point grid.

    The result is a normalised grid density on the input window widened by
    ``eps * sqrt(ln 1e14)``, beyond which the mollifier is negligible.
    """
    _check_positive(eps, "eps")
    if n < 8:
        raise CoulombOTError("mollified grid needs at least 8 points")
    pad = eps * _TAIL
    lo = density.lower if density.is_radial else density.lower - pad
    x = np.linspace(lo, density.upper + pad, int(n))
    vals = np.maximum(convolve(density, eps, x), 0.0)
    return Density.grid(x, vals, density.dimension)


def discretize(density, n, scheme=None):
    """Discrete measure approximating ``density`` on a line.

    ``scheme="nodes"`` (default for interval densities) puts weights
    proportional to ``rho`` on ``n`` equispaced nodes including the window
    ends. ``scheme="cells"`` (default for radial densities) splits the window
    into ``n`` equal cells carrying their exact mass at the cell centre. A
    radial density is mapped to the symmetric line measure that puts half of
    each shell's mass at ``+r`` and half at ``-r``; this is the one
    dimensional problem to which the radial problem reduces.
    """
    from .measures import DiscreteMeasure

    n = int(n)
    if n < 2:
        raise CoulombOTError("discretisation needs n >= 2")
    scheme = scheme or ("cells" if density.is_radial else "nodes")
    if scheme == "nodes":
        if density.is_radial:
            raise CoulombOTError("radial densities use the cells scheme")
        x = np.linspace(density.lower, density.upper, n)
        w = density(x)
        return DiscreteMeasure(x[:, None], w / w.sum())
    if scheme != "cells":
        raise CoulombOTError(f"unknown discretisation scheme {scheme!r}")
    edges = np.linspace(density.lower, density.upper, n + 1)
    masses = density.between(edges[:-1], edges[1:])
    centres = 0.5 * (edges[:-1] + edges[1:])
    if not density.is_radial:
        return DiscreteMeasure(centres[:, None], masses / masses.sum())
    line = np.concatenate([-centres[::-1], centres])
    weights = np.concatenate([masses[::-1], masses]) / (2.0 * masses.sum())
    return DiscreteMeasure(line[:, None], weights)


def crossing_gaussian_pair(length=4.0, n=None):
    """Interval densities ``(1 -+ x + x^2) exp(-x^2)`` on ``[-length, length]``.

    The pair has equal mass; ``rho_B - rho_A`` is ``4 x exp(-x^2)`` up to
    normalisation, so the positive part of the difference has a square root
    that is not weakly differentiable at 0. With ``n`` the densities are
    returned as grid densities sampled at ``n`` nodes.
    """
    x = np.linspace(-length, length, int(n) if n else 2049)
    base = np.exp(-(x**2))
    a = Density.grid(x, (1.0 - x + x**2) * base, 1, normalize=False)
    b = Density.grid(x, (1.0 + x + x**2) * base, 1, normalize=False)
    z = 0.5 * (a.mass() + b.mass())
    return replace(a, norm=z), replace(b, norm=z)
