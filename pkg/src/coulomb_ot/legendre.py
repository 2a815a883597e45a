"""Generalised Legendre transform, c-transforms and the potential form of optimal maps.

For a cost ``c(x, y) = l(|x - y|)`` the transform is
``h*(y) = sup_{b > 0} (-b |y| - l(b))``; optimal maps take the form
``T(x) = x - grad h*(grad psi(x))``. For the Coulomb profile ``l(b) = 1/b``
this gives ``h*(y) = -2 sqrt|y|`` and ``T(x) = x + z / |z|^{3/2}`` with
``z = grad psi(x)``.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .exceptions import AllInfinite, CoulombOTError, NonConvergent, VanishingGradient
from .kantorovich import resolve_cost

__all__ = [
    "PotentialField",
    "c_transform",
    "coulomb_legendre",
    "coulomb_legendre_gradient",
    "coulomb_map_from_gradient",
    "coulomb_map_from_potential",
    "generalized_legendre",
    "legendre_gradient",
    "potentials_from_plan",
]

MAX_EXPANSIONS = 200


def generalized_legendre(cost, y):
    """``sup_{b > 0} (-b |y| - l(b))`` by bounded golden-section/Brent search.

    The objective is concave in ``b``. The bracket starts at ``[1e-8, 1]``;
    its right end is doubled while the objective still increases there.
    """
    cost = resolve_cost(cost)
    s = float(np.linalg.norm(np.atleast_1d(np.asarray(y, dtype=float))))
    if s == 0.0:
        # the supremum of -l(b) is its limit as b grows
        return -float(cost.l(np.array([1e300]))[0])

    def neg(b):
        return b * s + float(cost.l(np.array([b]))[0])

    lo, hi = 1e-8, 1.0
    expansions = 0
    while neg(2.0 * hi) < neg(hi):
        hi *= 2.0
        expansions += 1
        if expansions > MAX_EXPANSIONS:
            raise NonConvergent("bracket search for the Legendre transform did not close")
    while neg(0.5 * lo) < neg(lo) and lo > 1e-300:
        lo *= 0.5
    res = optimize.minimize_scalar(
        neg, bounds=(0.5 * lo, 2.0 * hi), method="bounded", options={"xatol": 1e-15}
    )
    return -float(res.fun)


def legendre_gradient(cost, z, step=1e-6):
    """Central finite-difference gradient of :func:`generalized_legendre` at ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    grad = np.empty_like(z)
    for k in range(z.size):
        dz = np.zeros_like(z)
        dz[k] = step * max(1.0, np.linalg.norm(z))
        grad[k] = (generalized_legendre(cost, z + dz) - generalized_legendre(cost, z - dz)) / (
            2.0 * dz[k]
        )
    return grad


def coulomb_legendre(y):
    """Closed form ``-2 sqrt|y|`` for the Coulomb profile."""
    y = np.asarray(y, dtype=float)
    norm = np.linalg.norm(y, axis=-1) if y.ndim else np.abs(y)
    return -2.0 * np.sqrt(norm)


def coulomb_legendre_gradient(z):
    """``-z / |z|^{3/2}``, the gradient of ``-2 sqrt|z|``."""
    z = np.asarray(z, dtype=float)
    norm = np.linalg.norm(z, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise VanishingGradient("gradient of the potential vanishes")
    return -z / norm**1.5


def coulomb_map_from_gradient(x, grad):
    """``x + grad / |grad|^{3/2}``."""
    return np.asarray(x, dtype=float) - coulomb_legendre_gradient(grad)


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Values of a potential at points, with ``-inf`` allowed.

    Parameters
    ----------
    points : array of shape (k, dim)
    values : array of shape (k,)
    axes : tuple of 1D arrays, optional
        When the points form the tensor grid of ``axes`` (C order),
        :meth:`gradient` uses central differences on that grid.
    """

    points: np.ndarray
    values: np.ndarray
    axes: tuple = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        vals = np.asarray(self.values, dtype=float).ravel()
        if pts.shape[0] != vals.size:
            raise CoulombOTError("one value per point is required")
        if np.any(np.isnan(vals)) or np.any(vals == np.inf):
            raise CoulombOTError("potential values must be finite or -inf")
        if np.all(vals == -np.inf):
            raise AllInfinite("potential is identically -inf")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @classmethod
    def on_grid(cls, axes, values):
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)
        return cls(points, np.asarray(values, dtype=float).ravel(), axes)

    def gradient(self):
        """Central differences; NaN where a neighbour is missing or ``-inf``.

        A singleton axis marks a field embedded in a lower-dimensional slice
        and contributes a zero component.
        """
        if self.axes is None:
            if self.points.shape[1] != 1:
                raise CoulombOTError("gradients need tensor-grid axes in dimension > 1")
            order = np.argsort(self.points[:, 0])
            axes = (self.points[order, 0],)
            vals = self.values[order]
        else:
            axes, vals = self.axes, self.values
        shape = tuple(a.size for a in axes)
        v = vals.reshape(shape)
        grads = []
        for k, ax in enumerate(axes):
            if ax.size == 1:
                grads.append(np.where(np.isfinite(vals), 0.0, np.nan))
                continue
            g = np.full(shape, np.nan)
            lead = [slice(None)] * len(shape)
            fwd, bwd, mid = list(lead), list(lead), list(lead)
            fwd[k], bwd[k], mid[k] = slice(2, None), slice(None, -2), slice(1, -1)
            h = (ax[2:] - ax[:-2]).reshape([-1 if i == k else 1 for i in range(len(shape))])
            with np.errstate(invalid="ignore"):
                diff = (v[tuple(fwd)] - v[tuple(bwd)]) / h
            ok = np.isfinite(v[tuple(fwd)]) & np.isfinite(v[tuple(bwd)])
            g[tuple(mid)] = np.where(ok, diff, np.nan)
            grads.append(g.reshape(-1))
        out = np.stack(grads, axis=1)
        if self.axes is None:
            restored = np.empty_like(out)
            restored[order] = out
            return restored
        return out

    def to_csv(self, path_or_file):
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["point", "psi"])
            for p, v in zip(self.points, self.values):
                writer.writerow([";".join(f"{t:.12g}" for t in p), f"{v:.12g}"])
        finally:
            if own:
                fh.close()


def c_transform(field, cost="coulomb", targets=None):
    """``psi^c(y) = min_x (c(x, y) - psi(x))`` over the points of ``field``.

    Zero-distance pairs are skipped, realising the infinite diagonal cost.
    ``-inf`` values of ``psi`` make their points irrelevant to the minimum.
    """
    cost = resolve_cost(cost)
    targets = field.points if targets is None else np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.ndim == 2 and targets.shape[1] != field.points.shape[1] and targets.shape[0] == 1:
        targets = targets.T
    c = cost.pairwise(field.points, targets)
    finite = np.isfinite(field.values)
    if finite.sum() < 1 or field.points.shape[0] < 2:
        raise AllInfinite("c-transform needs finite values on at least two points")
    with np.errstate(invalid="ignore"):
        terms = np.where(np.isfinite(c) & finite[:, None], c - field.values[:, None], np.inf)
    vals = terms.min(axis=0)
    if np.all(~np.isfinite(vals)):
        raise AllInfinite("every candidate pair has infinite cost")
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    return PotentialField(targets, vals)


def potentials_from_plan(plan):
    """Dual potential ``psi`` on the source atoms of a solved plan, ``psi[0] = 0``."""
    if plan.potentials is None:
        raise CoulombOTError("plan carries no dual potentials; solve it with KantorovichSolver")
    u = plan.potentials[0]
    return PotentialField(plan.mu.points, u - u[0])


def coulomb_map_from_potential(field, index):
    """Coulomb optimal map at grid point ``index`` from finite-difference ``grad psi``."""
    grad = field.gradient()[index]
    if np.any(~np.isfinite(grad)):
        raise CoulombOTError("gradient undefined at this point (boundary or -inf neighbour)")
    if not np.linalg.norm(grad) > 0:
        raise VanishingGradient("gradient of the potential vanishes")
    return coulomb_map_from_gradient(field.points[index], grad)
