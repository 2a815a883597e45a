"""Discrete Kantorovich problem for repulsive costs.

The estimator :class:`KantorovichSolver` wraps an exact network simplex in
which zero-distance pairs are removed from the arc set, so the singular
diagonal of the cost is honoured exactly rather than through a large
penalty.
"""

import itertools
import json
import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._network_simplex import solve_transport
from .costs import COULOMB, CostSpec
from .exceptions import CoulombOTError, Infeasible, MarginalMismatch, NoFiniteCostPlan, TooLarge
from .measures import DiscreteMeasure, TransportPlan

__all__ = [
    "KantorovichSolver",
    "brute_force_oracle",
    "check_1d_configurations",
    "check_cyclical_monotonicity",
    "check_symmetry",
    "cyclical_monotonicity_violations",
    "load_problem",
    "resolve_cost",
    "solve",
]

MASS_TOL = 1e-10


def resolve_cost(cost):
    """Accept ``"coulomb"``, a :class:`CostSpec` or a distance profile callable."""
    if cost is None or (isinstance(cost, str) and cost == "coulomb"):
        return COULOMB
    if isinstance(cost, CostSpec):
        return cost
    if callable(cost):
        return CostSpec(cost)
    raise CoulombOTError(f"unrecognised cost {cost!r}")


def _as_measure(m):
    if isinstance(m, DiscreteMeasure):
        return m
    points, weights = m
    return DiscreteMeasure(points, weights)


class KantorovichSolver(BaseEstimator):
    """Exact optimal coupling between two discrete measures.

    Parameters
    ----------
    cost : {"coulomb"}, CostSpec or callable, default="coulomb"
        Pair cost ``l(|x - y|)``; zero-distance pairs are forbidden.
    symmetrize : {"auto", True, False}, default="auto"
        For equal marginals, replace the vertex optimum ``G`` by the equally
        optimal ``(G + G^T) / 2`` and average the dual potentials.
    max_iter : int, optional
        Pivot budget; a generous multiple of the problem size by default.

    Attributes
    ----------
    plan_ : TransportPlan
    cost_ : float
        Optimal value.
    potentials_ : tuple of ndarray
        Dual potentials ``(u, v)``, shifted so that ``u[0] == 0``.
    n_iter_ : int
    """

    def __init__(self, cost="coulomb", symmetrize="auto", max_iter=None):
        self.cost = cost
        self.symmetrize = symmetrize
        self.max_iter = max_iter

    def fit(self, mu, nu=None):
        mu = _as_measure(mu)
        nu = mu if nu is None else _as_measure(nu)
        cost = resolve_cost(self.cost)
        if mu.dim != nu.dim:
            raise CoulombOTError("marginals live in different dimensions")
        if abs(mu.mass - nu.mass) > MASS_TOL * max(1.0, mu.mass):
            raise Infeasible("marginals have different total mass")
        c = cost.pairwise(mu.points, nu.points)
        allowed = np.isfinite(c)
        rows = np.flatnonzero(mu.weights > 0)
        cols = np.flatnonzero(nu.weights > 0)
        sub_allowed = allowed[np.ix_(rows, cols)]
        sub_cost = np.where(sub_allowed, c[np.ix_(rows, cols)], 0.0)
        g, u, v, n_iter = solve_transport(
            mu.weights[rows], nu.weights[cols], sub_cost, sub_allowed, max_iter=self.max_iter
        )
        coupling = np.zeros(c.shape)
        coupling[np.ix_(rows, cols)] = g
        full_u = np.full(mu.size, np.nan)
        full_v = np.full(nu.size, np.nan)
        full_u[rows], full_v[cols] = u, v
        if self.symmetrize in ("auto", True) and mu == nu:
            coupling = 0.5 * (coupling + coupling.T)
            full_u = full_v = 0.5 * (full_u + full_v)
        shift = full_u[rows[0]]
        full_u, full_v = full_u - shift, full_v + shift
        self.plan_ = TransportPlan(mu, nu, coupling, cost, (full_u, full_v))
        self.cost_ = self.plan_.total_cost
        self.potentials_ = (full_u, full_v)
        self.n_iter_ = n_iter
        return self

    def fit_plan(self, mu, nu=None):
        """Fit and return the optimal :class:`TransportPlan`."""
        return self.fit(mu, nu).plan_

    def score(self, mu, nu=None):
        """Negative optimal cost, so that higher is better."""
        check_is_fitted(self, "plan_")
        return -KantorovichSolver(**self.get_params()).fit(mu, nu).cost_


def _measure_from_json(obj):
    if isinstance(obj, dict):
        return DiscreteMeasure(obj["points"], obj["weights"])
    pairs = list(obj)
    if not pairs:
        raise CoulombOTError("a measure needs at least one atom")
    points = [p[0] for p in pairs]
    return DiscreteMeasure(points, [p[1] for p in pairs])


def load_problem(spec):
    """``(cost, mu, nu)`` from ``{"cost": "coulomb", "mu": ..., "nu": ...}``.

    Measures are ``{"points": [...], "weights": [...]}`` or a list of
    ``[point, weight]`` pairs; ``nu`` defaults to ``mu``.
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    cost = spec.get("cost", "coulomb")
    if cost != "coulomb":
        raise CoulombOTError("only the Coulomb cost can be named in a problem file")
    try:
        mu = _measure_from_json(spec["mu"])
        nu = _measure_from_json(spec["nu"]) if spec.get("nu") is not None else mu
    except (KeyError, TypeError, IndexError) as exc:
        raise CoulombOTError(f"malformed problem spec: {exc}") from None
    return resolve_cost(cost), mu, nu


def solve(cost, mu, nu=None, **kwargs):
    """Optimal coupling of ``mu`` and ``nu``; function-style wrapper."""
    return KantorovichSolver(cost=cost, **kwargs).fit_plan(mu, nu)


def brute_force_oracle(cost, mu, nu=None):
    """Exhaustive minimum over permutation couplings of two uniform measures.

    Valid as an oracle because for equal uniform weights the transportation
    polytope has the scaled permutation matrices as vertices.
    """
    mu = _as_measure(mu)
    nu = mu if nu is None else _as_measure(nu)
    cost = resolve_cost(cost)
    n = mu.size
    if n > 8:
        raise TooLarge("exhaustive oracle is limited to n <= 8")
    if nu.size != n:
        raise CoulombOTError("oracle needs measures with the same number of atoms")
    if not (np.allclose(mu.weights, mu.weights[0]) and np.allclose(nu.weights, mu.weights[0])):
        raise CoulombOTError("oracle needs equal uniform weights")
    c = cost.pairwise(mu.points, nu.points)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    totals = c[np.arange(n), perms].sum(axis=1)
    best = int(np.argmin(totals))
    if not np.isfinite(totals[best]):
        raise NoFiniteCostPlan("every permutation meets a zero-distance pair")
    coupling = np.zeros((n, n))
    coupling[np.arange(n), perms[best]] = mu.weights[0]
    return TransportPlan(mu, nu, coupling, cost)


def check_symmetry(plan, atol=1e-10):
    """True when ``plan`` equals its transpose; both marginals must coincide."""
    if not plan.mu == plan.nu:
        raise MarginalMismatch("symmetry is defined for plans with equal marginals")
    return plan.is_symmetric(atol)


def cyclical_monotonicity_violations(plan, cost=None, max_cycle=4, trials=1000, seed=None, rtol=1e-12):
    """Count random support tuples that a permutation of targets would improve."""
    cost = plan.cost if cost is None else resolve_cost(cost)
    rng = np.random.default_rng(seed)
    entries = plan.entries()
    if len(entries) < 2:
        return 0
    src = np.array([e[0] for e in entries])
    dst = np.array([e[1] for e in entries])
    c = cost.pairwise(plan.mu.points, plan.nu.points)
    violations = 0
    for _ in range(int(trials)):
        k = int(rng.integers(2, min(max_cycle, len(entries)) + 1))
        pick = rng.choice(len(entries), size=k, replace=False)
        xs, ys = src[pick], dst[pick]
        base = c[xs, ys].sum()
        for perm in itertools.permutations(range(k)):
            alt = c[xs[list(perm)], ys].sum()
            if base > alt + rtol * max(1.0, abs(alt)):
                violations += 1
                break
    return violations


def check_cyclical_monotonicity(plan, cost=None, max_cycle=4, trials=1000, seed=None):
    """True when no sampled support tuple of length ``<= max_cycle`` can be improved."""
    return cyclical_monotonicity_violations(plan, cost, max_cycle, trials, seed) == 0


_PAIR_PATTERNS = (
    # each pattern lists (x1, y1, x2, y2) positions as chains; "<=" marked by 0, "<" by 1
    ((0, 1, 3, 2), (0, 1, 0)),  # x1 <= y1 < y2 <= x2
    ((1, 0, 2, 3), (0, 1, 0)),  # y1 <= x1 < x2 <= y2
    ((0, 2, 3, 1), (1, 0, 1)),  # x1 < x2 <= y2 < y1
    ((1, 3, 2, 0), (1, 0, 1)),  # y1 < y2 <= x2 < x1
)

# six-point chains over (x_i, y_i, x_j, y_j, x_k, y_k) -> indices 0..5
_TRIPLE_PATTERNS = (
    (0, 4, 3, 2, 5, 1),  # x_i < x_k < y_j < x_j < y_k < y_i
    (0, 5, 3, 2, 4, 1),  # x_i < y_k < y_j < x_j < x_k < y_i
    (1, 4, 2, 3, 5, 0),  # y_i < x_k < x_j < y_j < y_k < x_i
    (1, 5, 2, 3, 4, 0),  # y_i < y_k < x_j < y_j < x_k < x_i
    (0, 1, 2, 3, 4, 5),  # x_i < y_i < x_j < y_j < x_k < y_k
    (1, 0, 3, 2, 5, 4),  # y_i < x_i < y_j < x_j < y_k < x_k
)


def check_1d_configurations(plan, n_triples=20000, seed=None):
    """Count support pairs and triples in orderings excluded for 1D optima.

    Returns a dict with keys ``pairs`` and ``triples``. All pairs are
    checked; triples are checked exhaustively when there are at most
    ``n_triples`` of them and sampled otherwise.
    """
    if plan.mu.dim != 1:
        raise CoulombOTError("configuration check needs one-dimensional plans")
    entries = plan.entries()
    x = np.array([plan.mu.points[i, 0] for i, _, _ in entries])
    y = np.array([plan.nu.points[j, 0] for _, j, _ in entries])
    s = len(entries)
    i1, i2 = np.triu_indices(s, k=1)
    pair_hits = 0
    for a, b in ((i1, i2), (i2, i1)):
        pts = np.stack([x[a], y[a], x[b], y[b]], axis=1)
        for order, strict in _PAIR_PATTERNS:
            ok = np.ones(a.size, dtype=bool)
            for t in range(3):
                lo, hi = pts[:, order[t]], pts[:, order[t + 1]]
                ok &= (lo < hi) if strict[t] else (lo <= hi)
            pair_hits += int(ok.sum())
    total = math.comb(s, 3)
    if total <= n_triples:
        combos = np.array(list(itertools.combinations(range(s), 3)), dtype=np.intp).reshape(-1, 3)
    else:
        rng = np.random.default_rng(seed)
        combos = np.sort(
            np.array([rng.choice(s, 3, replace=False) for _ in range(n_triples)]), axis=1
        )
    triple_hits = 0
    if combos.size:
        for labels in itertools.permutations(range(3)):
            idx = combos[:, list(labels)]
            pts = np.stack(
                [x[idx[:, 0]], y[idx[:, 0]], x[idx[:, 1]], y[idx[:, 1]], x[idx[:, 2]], y[idx[:, 2]]],
                axis=1,
            )
            for chain in _TRIPLE_PATTERNS:
                ok = np.all(np.diff(pts[:, list(chain)], axis=1) > 0, axis=1)
                triple_hits += int(ok.sum())
    return {"pairs": pair_hits, "triples": triple_hits}
