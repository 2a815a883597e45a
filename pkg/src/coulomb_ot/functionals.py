"""Energy functionals of a single-particle density.

All functionals take probability-normalised densities. ``rescale_to_electrons``
converts a per-pair value to an ``N``-electron total.
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._numerics import gauss_legendre_panels
from .densities import dilate, discretize
from .exact_maps import monge_cost, solve_map_1d, solve_map_radial
from .exceptions import CoulombOTError, UnsupportedKernel
from .kantorovich import solve

__all__ = [
    "C_X",
    "EnergyReport",
    "dilate",
    "e_ot",
    "electron_gas_pair_density",
    "energy_report",
    "lda",
    "mean_field_j",
    "rescale_to_electrons",
]

C_X = 0.75 * (3.0 / math.pi) ** (1.0 / 3.0)
METHODS = ("analytic_map", "discrete_grid")


@dataclass(frozen=True)
class EnergyReport:
    """Energies of one density.

    ``lda`` is ``None`` outside three dimensions. For interval densities
    ``j_mean_field`` uses the regularised kernel ``1 / max(|x - y|, h)``.
    """

    e_ot: float
    j_mean_field: float
    lda: float
    method: str
    n: int

    def to_json(self):
        return json.dumps({k: _round(v) for k, v in asdict(self).items()}, sort_keys=True)


def _round(v):
    return float(f"{v:.12g}") if isinstance(v, float) else v


def e_ot(density, method="analytic_map", n=128, cost="coulomb"):
    """Optimal transport energy ``inf int c d gamma`` with both marginals ``density``.

    Parameters
    ----------
    density : Density
    method : {"analytic_map", "discrete_grid"}
        Closed-form optimal map with quadrature, or exact LP on an
        ``n``-point discretisation (``2n`` line points for radial densities).
    n : int
    cost : {"coulomb"}, CostSpec or callable
    """
    if method == "analytic_map":
        fitted = solve_map_radial(density) if density.is_radial else solve_map_1d(density)
        return monge_cost(fitted, density, cost)
    if method == "discrete_grid":
        return solve(cost, discretize(density, n)).total_cost
    raise CoulombOTError(f"unknown method {method!r}")


def _radial_panels(density):
    if density.kind == "grid":
        knots = density.points
        edges = [knots[0]]
        for a, b in zip(knots[:-1], knots[1:]):
            edges.extend(np.linspace(a, b, 3)[1:])
        return np.asarray(edges)
    r = density.upper
    return np.unique(np.concatenate([np.linspace(0, r, 257), np.geomspace(r * 1e-6, r, 64), [0.0]]))


def mean_field_j(density, regularization=None, n=1024):
    """Mean-field repulsion ``J = 1/2 int int rho(x) rho(y) / |x - y|``.

    For radial densities in three dimensions the shell theorem gives
    ``J = int_0^R F(r) f(r) / r dr`` with ``F`` the ball mass and ``f`` the
    radial mass density. Interval densities need ``regularization``: either
    a positive cutoff ``h`` or ``"grid"`` for the spacing of an ``n``-node
    grid, and use the kernel ``1 / max(|x - y|, h)``.
    """
    if density.is_radial:
        if density.dimension != 3:
            raise UnsupportedKernel("mean-field energy is implemented for d = 3")
        r, w = gauss_legendre_panels(_radial_panels(density), 16)
        return float(np.sum(w * density.cdf(r) * density.mass_density(r) / r))
    if regularization is None:
        raise UnsupportedKernel("interval densities need a regularised kernel")
    x = np.linspace(density.lower, density.upper, int(n))
    h = x[1] - x[0] if regularization == "grid" else float(regularization)
    if not h > 0:
        raise CoulombOTError("regularisation must be positive")
    w = density(x)
    w = w / w.sum()
    kernel = 1.0 / np.maximum(np.abs(x[:, None] - x[None, :]), h)
    return float(0.5 * w @ kernel @ w)


def lda(density):
    """Local density approximation ``J - c_x int rho^(4/3)`` in three dimensions."""
    if density.dimension != 3:
        raise UnsupportedKernel("the local density approximation is three dimensional")
    return mean_field_j(density) - C_X * density.integrate_power(4.0 / 3.0)


def _h(s):
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 5e-2
    safe = np.where(small, 1.0, s)
    direct = 3.0 * (np.sin(safe) - safe * np.cos(safe)) / safe**3
    s2 = s * s
    series = 1.0 - s2 / 10.0 + s2**2 / 280.0 - s2**3 / 15120.0
    return np.where(small, series, direct)


def electron_gas_pair_density(rho_bar, s, q=2):
    """Pair density of the free electron gas at density ``rho_bar`` and distance ``s``.

    ``q`` is the number of spin states (1 or 2).
    """
    if not rho_bar > 0:
        raise CoulombOTError("rho_bar must be positive")
    if q not in (1, 2):
        raise CoulombOTError("q must be 1 or 2")
    k = (3.0 * rho_bar * math.pi**2) ** (1.0 / 3.0)
    out = 0.5 * rho_bar**2 * (1.0 - _h(k * np.asarray(s, dtype=float)) ** 2 / q)
    return out if np.ndim(out) else float(out)


def rescale_to_electrons(value, n_electrons):
    """Multiply a pair-normalised energy by ``C(N, 2)``."""
    if int(n_electrons) != n_electrons or n_electrons < 2:
        raise CoulombOTError("need at least two electrons")
    return value * math.comb(int(n_electrons), 2)


def energy_report(density, method="analytic_map", n=128, cost="coulomb"):
    """Collect ``e_ot``, ``J`` and (in 3D) LDA for one density."""
    e = e_ot(density, method, n, cost)
    if density.is_radial:
        j = mean_field_j(density)
        approx = lda(density) if density.dimension == 3 else None
    else:
        j = mean_field_j(density, regularization="grid", n=max(int(n), 8))
        approx = None
    return EnergyReport(e, j, approx, method, int(n))
