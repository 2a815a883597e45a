"""Surgery on transport plans: marginal re-instatement, mollification,
strong positivisation, and numerical checks of the accompanying bounds.

Plans on a shared grid are :class:`~coulomb_ot.measures.TransportPlan`
objects whose two marginals live on the same points. Radial plans in
three dimensions are handled as :class:`ShellPlan`: a coupling between
spherical shells split into angular modes, which keeps the Coulomb cost of
composed plans exact.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ._numerics import gauss_legendre_panels
from .costs import COULOMB
from .densities import Density, discretize
from .exceptions import (
    BetaOutOfRange,
    CoulombOTError,
    GridMismatch,
    MarginalMismatch,
    UnsupportedKernel,
    ZeroTransfer,
)
from .kantorovich import solve
from .measures import DiscreteMeasure, TransportPlan

__all__ = [
    "C0",
    "CSTAR",
    "CostGapReport",
    "MollifiedPlan",
    "OverlapSplit",
    "PositivityCertificate",
    "ShellPlan",
    "SupBoundReport",
    "bridge_plan",
    "check_strong_positivity",
    "cost_gap_bound",
    "coulomb_sup_bound",
    "dirichlet_energy",
    "mollify_plan",
    "newton_shell_average",
    "positivize",
    "radial_crossing_pair",
    "reinstate",
    "smoothed_reinstated_plan",
    "split_overlap",
]

C0 = 2.0 * (8.0 * math.pi / 3.0) ** (1.0 / 3.0)
CSTAR = 3.0 * C0
DENSITY_FLOOR = 1e-14
BOUND_SLACK = 1e-3


# overlap splitting and bridges ---------------------------------------------


@dataclass(frozen=True)
class OverlapSplit:
    """``f = min(rho_A, rho_B)`` and the two positive remainders on a shared grid."""

    points: np.ndarray
    f: np.ndarray
    f_a: np.ndarray
    f_b: np.ndarray

    @property
    def shared(self):
        return float(self.f.sum())

    @property
    def transfer(self):
        return float(self.f_a.sum())

    @property
    def rho_a(self):
        return self.f + self.f_a

    @property
    def rho_b(self):
        return self.f + self.f_b


def _weights_on(points, m):
    if isinstance(m, DiscreteMeasure):
        if points is not None and not np.array_equal(m.points, points):
            raise GridMismatch("measures live on different grids")
        return m.points, m.weights
    w = np.asarray(m, dtype=float).ravel()
    if points is not None and w.size != points.shape[0]:
        raise GridMismatch("weight vector does not match the grid")
    return points, w


def split_overlap(rho_a, rho_b):
    """Split two measures on one grid into common part and remainders."""
    points, a = _weights_on(None, rho_a)
    points, b = _weights_on(points, rho_b)
    if points is None:
        if a.size != b.size:
            raise GridMismatch("weight vectors have different lengths")
        points = np.arange(a.size, dtype=float)[:, None]
    f = np.minimum(a, b)
    return OverlapSplit(points, f, a - f, b - f)


def bridge_plan(split, direction="AB"):
    """Coupling ``f(x) delta_x(y) + f_A(x) f_B(y) / int f_B`` from A to B.

    ``direction="BA"`` gives the transpose construction from B to A.
    """
    if direction not in ("AB", "BA"):
        raise CoulombOTError("direction must be 'AB' or 'BA'")
    src, dst = (split.f_a, split.f_b) if direction == "AB" else (split.f_b, split.f_a)
    coupling = np.diag(split.f)
    moved, received = src.sum(), dst.sum()
    if received > 0:
        coupling = coupling + np.outer(src, dst) / received
    elif moved > 0:
        raise ZeroTransfer("remainders have different mass; marginals differ in total mass")
    left = split.rho_a if direction == "AB" else split.rho_b
    right = split.rho_b if direction == "AB" else split.rho_a
    return TransportPlan(
        DiscreteMeasure(split.points, left), DiscreteMeasure(split.points, right), coupling
    )


def _inverse_weights(w):
    out = np.zeros_like(w)
    keep = w > DENSITY_FLOOR
    out[keep] = 1.0 / w[keep]
    return out


def reinstate(gamma_aa, rho_b):
    """Composite plan ``P = gamma_BA . (1/rho_A) . gamma_AA . (1/rho_A) . gamma_AB``.

    Parameters
    ----------
    gamma_aa : TransportPlan
        Plan with both marginals equal to ``rho_A`` on one grid.
    rho_b : DiscreteMeasure or array
        Target weights on the same grid.

    Returns
    -------
    TransportPlan
        Plan whose two marginals are ``rho_b``.
    """
    if not gamma_aa.mu.same_support(gamma_aa.nu):
        raise GridMismatch("plan marginals live on different grids")
    rho_a = gamma_aa.mu.weights
    rows, cols = gamma_aa.marginals()
    tol = 1e-8 * max(1.0, rho_a.sum())
    if (
        np.max(np.abs(rows - rho_a)) > tol
        or np.max(np.abs(cols - rho_a)) > tol
        or np.max(np.abs(gamma_aa.nu.weights - rho_a)) > tol
    ):
        raise MarginalMismatch("plan marginals differ from rho_A")
    points, b = _weights_on(gamma_aa.mu.points, rho_b)
    split = split_overlap(rho_a, b)
    g_ab = bridge_plan(split, "AB").coupling
    g_ba = bridge_plan(split, "BA").coupling
    inv = _inverse_weights(rho_a)
    p = (g_ba * inv[None, :]) @ gamma_aa.coupling @ (g_ab * inv[:, None])
    target = DiscreteMeasure(points, b)
    return TransportPlan(target, target, p, gamma_aa.cost)


# radial shell plans -----------------------------------------------------------

_MODES = ("aligned", "antipodal", "independent")
_PRODUCT = {
    ("aligned", "aligned"): "aligned",
    ("aligned", "antipodal"): "antipodal",
    ("antipodal", "aligned"): "antipodal",
    ("antipodal", "antipodal"): "aligned",
}


@dataclass(frozen=True)
class ShellPlan:
    """Coupling of radial measures on shells ``radii`` in three dimensions.

    ``modes[name][k, l]`` is the mass moved from shell ``k`` to shell ``l``
    with the angular relation ``name``: same direction (``aligned``),
    opposite direction (``antipodal``) or independent uniform directions.
    """

    radii: np.ndarray
    modes: dict

    @classmethod
    def from_line_plan(cls, plan):
        """Lift a symmetric plan on the line points ``+-r_k`` to shells."""
        x = plan.mu.points[:, 0]
        if not np.array_equal(plan.mu.points, plan.nu.points):
            raise GridMismatch("line plan must have one grid")
        radii = np.unique(np.abs(x))
        idx = np.searchsorted(radii, np.abs(x))
        sign = np.sign(x)
        n = radii.size
        aligned = np.zeros((n, n))
        antipodal = np.zeros((n, n))
        g = plan.coupling
        same = sign[:, None] == sign[None, :]
        ii, jj = np.meshgrid(idx, idx, indexing="ij")
        np.add.at(aligned, (ii[same], jj[same]), g[same])
        np.add.at(antipodal, (ii[~same], jj[~same]), g[~same])
        return cls(radii, {"aligned": aligned, "antipodal": antipodal, "independent": np.zeros((n, n))})

    @classmethod
    def bridge(cls, radii, split):
        n = radii.size
        ind = np.zeros((n, n))
        if split.f_b.sum() > 0:
            ind = np.outer(split.f_a, split.f_b) / split.f_b.sum()
        return cls(radii, {"aligned": np.diag(split.f), "antipodal": np.zeros((n, n)), "independent": ind})

    def compose(self, weights, other):
        """``self . diag(weights) . other`` with angular kernels multiplied."""
        out = {m: np.zeros_like(self.modes["aligned"]) for m in _MODES}
        for m1, a in self.modes.items():
            for m2, b in other.modes.items():
                mode = _PRODUCT.get((m1, m2), "independent")
                out[mode] = out[mode] + (a * weights[None, :]) @ b
        return ShellPlan(self.radii, out)

    def marginals(self):
        total = sum(self.modes.values())
        return total.sum(axis=1), total.sum(axis=0)

    def total_cost(self):
        r = self.radii
        with np.errstate(divide="ignore"):
            k_al = 1.0 / np.abs(r[:, None] - r[None, :])
        k_anti = 1.0 / (r[:, None] + r[None, :])
        k_ind = 1.0 / np.maximum(r[:, None], r[None, :])
        total = 0.0
        for mass, kern in (
            (self.modes["aligned"], k_al),
            (self.modes["antipodal"], k_anti),
            (self.modes["independent"], k_ind),
        ):
            pos = mass > 0
            total += float(np.sum(mass[pos] * kern[pos]))
        return total


@dataclass(frozen=True)
class CostGapReport:
    gap: float
    bound_m: float
    bound_cstar: float
    energy_gap: float
    holds: bool

    def as_dict(self):
        return {
            "gap": self.gap,
            "bound_M": self.bound_m,
            "bound_cstar": self.bound_cstar,
            "energy_gap": self.energy_gap,
            "holds": self.holds,
        }


def _radial_norms(fun, radius, breaks=()):
    edges = np.unique(np.concatenate([np.linspace(0.0, radius, 513), np.asarray(breaks, float)]))
    edges = edges[(edges >= 0) & (edges <= radius)]
    r, w = gauss_legendre_panels(edges, 16)
    vals = np.abs(fun(r))
    shell = 4.0 * math.pi * r**2 * w
    return float(np.sum(vals * shell)), float(np.sum(vals**3 * shell)) ** (1.0 / 3.0)


def _density_breaks(*densities):
    out = []
    for d in densities:
        out.append(d.upper)
        if d.kind == "grid":
            out.extend(d.points)
    return out


def cost_gap_bound(gamma_aa, rho_a, rho_b, cost="coulomb", n=64):
    """Check the re-instatement cost bound and the continuity bound.

    Parameters
    ----------
    gamma_aa : TransportPlan, ShellPlan or None
        Plan with marginals ``rho_A``; ``None`` uses the optimal plan of the
        shell discretisation.
    rho_a, rho_b : Density
        Radial densities in three dimensions.
    n : int
        Number of shells.
    """
    if not (cost == "coulomb" or cost is COULOMB):
        raise UnsupportedKernel("the bounds are stated for the Coulomb cost")
    for d in (rho_a, rho_b):
        if d.dimension != 3:
            raise UnsupportedKernel("bounds are checked for radial densities in three dimensions")
    radius = max(rho_a.upper, rho_b.upper)
    edges = np.linspace(0.0, radius, int(n) + 1)
    centres = 0.5 * (edges[:-1] + edges[1:])
    m_a = rho_a.between(edges[:-1], edges[1:])
    m_b = rho_b.between(edges[:-1], edges[1:])
    line_a, line_b = _shell_line(centres, m_a), _shell_line(centres, m_b)
    if gamma_aa is None:
        plan_a = solve(COULOMB, line_a)
        gamma_aa = ShellPlan.from_line_plan(plan_a)
        e_a = plan_a.total_cost
    else:
        if isinstance(gamma_aa, TransportPlan):
            gamma_aa = ShellPlan.from_line_plan(gamma_aa)
        e_a = solve(COULOMB, line_a).total_cost
    e_b = solve(COULOMB, line_b).total_cost
    shell_a = gamma_aa.marginals()[0]
    if np.max(np.abs(shell_a - m_a / m_a.sum())) > 1e-8:
        raise MarginalMismatch("plan marginals differ from rho_A on the shells")
    split = split_overlap(shell_a, m_b / m_b.sum())
    radii = gamma_aa.radii
    inv = _inverse_weights(shell_a)
    to_b = ShellPlan.bridge(radii, split)
    from_b = ShellPlan.bridge(radii, _swap(split))
    p = from_b.compose(inv, gamma_aa).compose(inv, to_b)
    gap = p.total_cost() - gamma_aa.total_cost()
    potential = (split.f_b[None, :] / np.maximum(radii[:, None], radii[None, :])).sum(axis=1)
    bound_m = 3.0 * float(potential.max())
    l1a, l3a = _radial_norms(rho_a, rho_a.upper, _density_breaks(rho_a))
    l1b, l3b = _radial_norms(rho_b, rho_b.upper, _density_breaks(rho_b))
    diff = lambda r: rho_a(r) - rho_b(r)
    l1d, l3d = _radial_norms(diff, radius, _density_breaks(rho_a, rho_b))
    bound_cstar = CSTAR * (max(l1a, l3a) + max(l1b, l3b)) * max(l1d, l3d)
    energy_gap = abs(e_a - e_b)
    # absolute slack absorbs rounding when the two densities coincide
    floor = 1e-12 * max(1.0, e_a)
    holds = gap <= bound_m * (1 + BOUND_SLACK) + floor and energy_gap <= bound_cstar * (
        1 + BOUND_SLACK
    ) + floor
    return CostGapReport(gap, bound_m, bound_cstar, energy_gap, bool(holds))


def _swap(split):
    return OverlapSplit(split.points, split.f, split.f_b, split.f_a)


def _shell_line(centres, masses):
    line = np.concatenate([-centres[::-1], centres])
    w = np.concatenate([masses[::-1], masses]) / (2.0 * masses.sum())
    return DiscreteMeasure(line[:, None], w)


def radial_crossing_pair(radius=4.0, n=2049):
    """Radial densities proportional to ``(1 -+ r + r^2) exp(-r^2)`` in three dimensions."""
    r = np.linspace(0.0, radius, int(n))
    base = np.exp(-(r**2))
    a = Density.grid(r, (1.0 - r + r**2) * base, 3)
    b = Density.grid(r, (1.0 + r + r**2) * base, 3)
    return a, b


# Coulomb potential bound --------------------------------------------------------


@dataclass(frozen=True)
class SupBoundReport:
    lhs: float
    rhs: float
    holds: bool


def coulomb_sup_bound(g, radius=None, n=401, breaks=()):
    """Compare ``sup_x |int g(y) / |x - y| dy|`` with ``c0 max(||g||_1, ||g||_3)``.

    Parameters
    ----------
    g : Density or callable
        Radial function on ``R^3`` (signed allowed), vanishing beyond ``radius``.
    radius : float, optional
        Support radius; taken from ``g`` when it is a :class:`Density`.
    n : int
        Number of radii at which the potential is evaluated (including 0).
    """
    if isinstance(g, Density):
        if g.dimension != 3:
            raise UnsupportedKernel("the sup bound is checked in three dimensions")
        radius = g.upper if radius is None else radius
        breaks = tuple(breaks) + tuple(_density_breaks(g))
    if radius is None or not radius > 0:
        raise CoulombOTError("a positive support radius is required")
    grid = np.linspace(0.0, radius, int(n))
    edges = np.unique(np.concatenate([grid, [b for b in breaks if 0 <= b <= radius]]))
    r, w = gauss_legendre_panels(edges, 16)
    vals = np.asarray(g(r), dtype=float)
    inner = np.concatenate([[0.0], np.cumsum(np.add.reduceat(vals * r**2 * w, np.arange(0, r.size, 16)))])
    outer_terms = np.add.reduceat(vals * r * w, np.arange(0, r.size, 16))
    outer = np.concatenate([np.cumsum(outer_terms[::-1])[::-1], [0.0]])
    pos = np.searchsorted(edges, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        pot = 4.0 * math.pi * np.where(grid > 0, inner[pos] / grid, 0.0) + 4.0 * math.pi * outer[pos]
    lhs = float(np.max(np.abs(pot)))
    l1, l3 = _radial_norms(g, radius, breaks)
    rhs = C0 * max(l1, l3)
    return SupBoundReport(lhs, rhs, bool(lhs <= rhs * (1 + BOUND_SLACK)))


def newton_shell_average(a, r):
    """Mean of ``1 / |a - y|`` over the uniform sphere ``|y| = r`` in three dimensions."""
    a, r = abs(float(a)), float(r)
    fun = lambda t: math.sin(t) / (2.0 * math.sqrt(a * a + r * r - 2.0 * a * r * math.cos(t)))
    if a == r:
        fun = lambda t: math.cos(0.5 * t) / (2.0 * r)
    val, _ = integrate.quad(fun, 0.0, math.pi, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


# mollification and positivity -----------------------------------------------------


def _gaussian(z, eps):
    d = z.shape[-1]
    return np.exp(-np.sum(z**2, axis=-1) / eps**2) / (math.pi ** (d / 2) * eps**d)


@dataclass(frozen=True)
class MollifiedPlan:
    """``(phi_eps x phi_eps) * gamma`` for a discrete plan ``gamma``."""

    base: TransportPlan
    eps: float

    @property
    def dim(self):
        return self.base.mu.dim

    def marginal_density(self, z, side=0):
        """``phi_eps * rho`` for the left (``side=0``) or right marginal."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        m = self.base.mu if side == 0 else self.base.nu
        w = self.base.coupling.sum(axis=1 - side)
        return _gaussian(z[:, None, :] - m.points[None, :, :], self.eps) @ w

    def density(self, x, y):
        """Joint density at paired points ``x[k], y[k]``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        px = _gaussian(x[:, None, :] - self.base.mu.points[None], self.eps)
        py = _gaussian(y[:, None, :] - self.base.nu.points[None], self.eps)
        return np.einsum("ki,ij,kj->k", px, self.base.coupling, py)

    def total_cost(self):
        """Exact Coulomb cost; the smeared kernel is ``erf(|a| / (sqrt2 eps)) / |a|``."""
        if self.dim != 3:
            raise UnsupportedKernel("mollified Coulomb cost is finite and implemented in 3D")
        a = self.base.mu.points[:, None, :] - self.base.nu.points[None, :, :]
        dist = np.linalg.norm(a, axis=-1)
        s = math.sqrt(2.0) * self.eps
        # erf(.) * (1/|a|) with the base cost matrix keeps C[gamma_eps] <= C[gamma] under rounding
        c = COULOMB.pairwise(self.base.mu.points, self.base.nu.points)
        finite = np.isfinite(c)
        kern = np.full(c.shape, math.sqrt(2.0 / math.pi) / self.eps)
        kern[finite] = special.erf(dist[finite] / s) * c[finite]
        g = self.base.coupling
        mask = g > 0
        return float(np.sum(g[mask] * kern[mask]))

    def on_grid(self, nodes):
        """Cell masses on a uniform 1D grid as a :class:`TransportPlan`."""
        if self.dim != 1:
            raise CoulombOTError("grid sampling is implemented for one-dimensional plans")
        nodes = np.asarray(nodes, dtype=float).ravel()
        h = nodes[1] - nodes[0]
        px = _gaussian(nodes[:, None, None] - self.base.mu.points[None], self.eps) * h
        py = _gaussian(nodes[:, None, None] - self.base.nu.points[None], self.eps) * h
        cells = px @ self.base.coupling @ py.T
        left = DiscreteMeasure(nodes, np.maximum(cells.sum(axis=1), 1e-300))
        right = DiscreteMeasure(nodes, np.maximum(cells.sum(axis=0), 1e-300))
        return TransportPlan(left, right, cells, self.base.cost)


def mollify_plan(plan, eps):
    """Smooth a discrete plan with the Gaussian ``phi_eps`` in both variables."""
    if not eps > 0:
        raise CoulombOTError("eps must be positive")
    return MollifiedPlan(plan, float(eps))


def positivize(plan, beta):
    """``(1 - beta) gamma + beta mu x nu / m``; keeps both marginals.

    ``m`` is the total mass, so the product term has the mass of ``gamma``.
    """
    if not 0.0 <= beta <= 1.0:
        raise BetaOutOfRange("beta must lie in [0, 1]")
    if isinstance(plan, MollifiedPlan):
        return MollifiedPlan(positivize(plan.base, beta), plan.eps)
    return plan.with_coupling((1.0 - beta) * plan.coupling + beta * _product(plan))


def _product(plan):
    rows, cols = plan.marginals()
    total = rows.sum()
    return np.outer(rows, cols) / total if total > 0 else np.outer(rows, cols)


@dataclass(frozen=True)
class PositivityCertificate:
    beta: float
    holds: bool


def check_strong_positivity(plan):
    """Largest ``beta`` with ``gamma >= beta mu x nu / m`` entrywise, ``m`` the mass.

    For a mollified plan the certificate of the underlying discrete plan is
    returned; convolution preserves the inequality.
    """
    if isinstance(plan, MollifiedPlan):
        plan = plan.base
    prod = _product(plan)
    pos = prod > 0
    if not np.any(pos):
        return PositivityCertificate(0.0, False)
    beta = float(np.clip(np.min(plan.coupling[pos] / prod[pos]), 0.0, 1.0))
    return PositivityCertificate(beta, beta > 0)


# discrete Dirichlet energy -------------------------------------------------------


def dirichlet_energy(cells, h):
    """``sum |grad sqrt(p)|^2 h^dim`` for cell masses on a uniform grid.

    ``cells`` holds masses per cell (any dimension); ``p = cells / h^dim``
    is the sampled density and gradients are forward differences.
    """
    cells = np.asarray(cells, dtype=float)
    dim = cells.ndim
    root = np.sqrt(np.maximum(cells, 0.0) / h**dim)
    total = 0.0
    for axis in range(dim):
        total += float(np.sum(np.diff(root, axis=axis) ** 2))
    return total * h ** (dim - 2)


def smoothed_reinstated_plan(density, n, eps=0.1, beta=0.1):
    """Optimal plan of ``density`` on ``n`` nodes, mollified, positivised and re-instated.

    Returns ``(P, raw)``: the re-instated plan on the nodes and the raw
    optimal plan it was built from. Both live on the same uniform grid.
    """
    if density.is_radial:
        raise CoulombOTError("expects an interval density")
    mu = discretize(density, n)
    raw = solve(COULOMB, mu)
    nodes = mu.points[:, 0]
    smooth = mollify_plan(raw, eps).on_grid(nodes)
    tilde = positivize(smooth, beta).coupling
    tilde = tilde / tilde.sum()
    tilde = 0.5 * (tilde + tilde.T)
    rho_a = DiscreteMeasure(nodes, tilde.sum(axis=1))
    gamma = TransportPlan(rho_a, rho_a, tilde)
    return reinstate(gamma, mu), raw
