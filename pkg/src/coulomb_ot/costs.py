"""Repulsive pair costs ``c(x, y) = l(|x - y|)`` with a singular diagonal."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import InvalidCost

__all__ = ["CostSpec", "COULOMB", "coulomb", "power_cost"]


@dataclass(frozen=True)
class CostSpec:
    """A pair cost given by a strictly convex, strictly decreasing profile.

    Parameters
    ----------
    profile : callable
        Vectorised map ``l`` from distances ``> 0`` to costs.
    name : str
        Label used in reports and serialisation.
    check : bool
        Validate monotonicity and midpoint convexity on random triples.
    """

    profile: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    check: bool = True

    def __post_init__(self):
        if self.check and self.name != "coulomb":
            _check_profile(self.profile)

    def l(self, distance):
        """Cost as a function of distance; ``+inf`` at distance zero."""
        d = np.asarray(distance, dtype=float)
        out = np.full(d.shape, np.inf)
        pos = d > 0
        out[pos] = self.profile(d[pos])
        return out

    def pairwise(self, x, y):
        """Cost matrix between point sets of shape ``(n, dim)`` and ``(m, dim)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        dist = np.sqrt(((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=-1))
        return self.l(dist)

    def __call__(self, x, y):
        """Cost between two single points (scalars or vectors)."""
        diff = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        return float(self.l(np.linalg.norm(diff)))

def _check_profile(profile, n_triples=1000, seed=0):
    rng = np.random.default_rng(seed)
    lo = 10.0 ** rng.uniform(-2, 2, n_triples)
    hi = lo * (1.0 + 10.0 ** rng.uniform(-2, 1, n_triples))
    mid = 0.5 * (lo + hi)
    with np.errstate(all="ignore"):
        fl, fm, fh = profile(lo), profile(mid), profile(hi)
    if not (np.all(np.isfinite(fl)) and np.all(np.isfinite(fh))):
        raise InvalidCost("cost profile must be finite at positive distances")
    if not np.all(fl > fh):
        raise InvalidCost("cost profile must be strictly decreasing")
    if not np.all(fm < 0.5 * (fl + fh)):
        raise InvalidCost("cost profile must be strictly convex")


def _inverse(d):
    return 1.0 / d


COULOMB = CostSpec(_inverse, name="coulomb")


def coulomb():
    """The Coulomb cost ``1 / |x - y|``."""
    return COULOMB


def power_cost(s):
    """The Riesz-type cost ``|x - y| ** -s`` for ``s > 0``."""
    if not s > 0:
        raise InvalidCost("exponent must be positive")
    if s == 1:
        return COULOMB
    return CostSpec(lambda d: d ** (-float(s)), name=f"power:{s:g}")
