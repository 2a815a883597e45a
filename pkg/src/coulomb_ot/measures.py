"""Finitely supported measures and couplings between them."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .costs import COULOMB
from .exceptions import CoulombOTError, NegativeValue, ZeroMass

__all__ = ["DiscreteMeasure", "TransportPlan"]


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted point cloud ``sum_i w_i delta_{x_i}``.

    Repeated points are merged by adding their weights. Total mass need not
    be one, which allows the unnormalised two-point measure
    ``delta_a + delta_b``.

    Parameters
    ----------
    points : array-like of shape (n,) or (n, dim)
    weights : array-like of shape (n,)
    """

    points: np.ndarray
    weights: np.ndarray
    merged: bool = field(default=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.ndim != 2 or pts.shape[0] != w.size or w.size == 0:
            raise CoulombOTError("points and weights must describe the same atoms")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise CoulombOTError("points and weights must be finite")
        if np.any(w < 0):
            raise NegativeValue("weights must be nonnegative")
        if not w.sum() > 0:
            raise ZeroMass("measure has zero mass")
        uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
        if uniq.shape[0] < pts.shape[0]:
            merged_w = np.bincount(inverse.ravel(), weights=w, minlength=uniq.shape[0])
            pts, w, merged = uniq, merged_w, True
        else:
            merged = self.merged
        pts.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "merged", merged)

    @property
    def size(self):
        return self.weights.size

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def mass(self):
        return float(self.weights.sum())

    def normalized(self):
        return DiscreteMeasure(self.points, self.weights / self.weights.sum())

    def same_support(self, other):
        return self.points.shape == other.points.shape and np.array_equal(
            self.points, other.points
        )

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self.same_support(other) and np.array_equal(self.weights, other.weights)

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Coupling between two discrete measures, stored as a dense matrix.

    Attributes
    ----------
    mu, nu : DiscreteMeasure
        Source and target marginals.
    coupling : ndarray of shape (mu.size, nu.size)
    cost : CostSpec
        Cost used for :attr:`total_cost`.
    potentials : tuple of ndarray or None
        Dual potentials ``(u, v)`` with ``u_i + v_j <= c_ij``, when known.
    """

    mu: DiscreteMeasure
    nu: DiscreteMeasure
    coupling: np.ndarray
    cost: object = COULOMB
    potentials: tuple = None

    def __post_init__(self):
        g = np.asarray(self.coupling, dtype=float)
        if g.shape != (self.mu.size, self.nu.size):
            raise CoulombOTError("coupling shape does not match the marginals")
        g.flags.writeable = False
        object.__setattr__(self, "coupling", g)

    def cost_matrix(self):
        return self.cost.pairwise(self.mu.points, self.nu.points)

    @property
    def total_cost(self):
        c = self.cost_matrix()
        g = self.coupling
        mask = g > 0
        return float(np.sum(g[mask] * c[mask]))

    def marginals(self):
        return self.coupling.sum(axis=1), self.coupling.sum(axis=0)

    def entries(self, threshold=0.0):
        """Support as a list of ``(i, j, mass)`` with ``mass > threshold``."""
        i, j = np.nonzero(self.coupling > threshold)
        return [(int(a), int(b), float(self.coupling[a, b])) for a, b in zip(i, j)]

    def is_symmetric(self, atol=1e-10):
        return self.mu.same_support(self.nu) and np.allclose(
            self.coupling, self.coupling.T, rtol=0.0, atol=atol
        )

    def with_coupling(self, coupling):
        return TransportPlan(self.mu, self.nu, coupling, self.cost)

    def to_csv(self, path_or_file, threshold=0.0):
        """Write rows ``i,j,x_i,y_j,mass,cost_ij`` with 12 significant digits."""
        c = self.cost_matrix()

        def fmt(v):
            return f"{v:.12g}"

        def coord(p):
            return ";".join(fmt(t) for t in p)

        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["i", "j", "x_i", "y_j", "mass", "cost_ij"])
            for i, j, m in self.entries(threshold):
                writer.writerow(
                    [i, j, coord(self.mu.points[i]), coord(self.nu.points[j]), fmt(m), fmt(c[i, j])]
                )
        finally:
            if own:
                fh.close()
