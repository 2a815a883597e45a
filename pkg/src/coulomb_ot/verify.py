"""Quick invariant suite behind ``coulomb-ot verify``."""

import math
import os
from dataclasses import dataclass

import numpy as np

from .costs import power_cost
from .densities import Density, dilate, discretize
from .exact_maps import monge_cost, pushforward_residual, solve_map_1d, solve_map_radial
from .functionals import e_ot, mean_field_j
from .kantorovich import (
    brute_force_oracle,
    check_1d_configurations,
    check_cyclical_monotonicity,
    check_symmetry,
    solve,
)
from .legendre import (
    PotentialField,
    c_transform,
    coulomb_legendre_gradient,
    generalized_legendre,
    legendre_gradient,
)
from .measures import DiscreteMeasure
from .transport_ops import (
    C0,
    coulomb_sup_bound,
    cost_gap_bound,
    mollify_plan,
    newton_shell_average,
    radial_crossing_pair,
    reinstate,
)

__all__ = ["Check", "SUITES", "run_suite", "seed_from_env"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def seed_from_env(default=0):
    """Seed for randomized checks, overridable through ``COULOMB_OT_SEED``."""
    raw = os.environ.get("COULOMB_OT_SEED")
    return default if raw in (None, "") else int(raw)


def _random_uniform_measure(rng, n, dim=1):
    return DiscreteMeasure(rng.uniform(-1, 1, (n, dim)), np.full(n, 1.0 / n))


def _kantorovich(rng):
    plan = solve("coulomb", DiscreteMeasure([0.0, 1.0], [1.0, 1.0]))
    yield Check("two-dirac", abs(plan.total_cost - 2.0) < 1e-12, f"cost={plan.total_cost:.12g}")
    worst = 0.0
    for k in range(40):
        n = int(rng.integers(2, 7))
        mu = _random_uniform_measure(rng, n, dim=int(rng.integers(1, 4)))
        cost = "coulomb" if k % 2 else power_cost(2.0)
        worst = max(worst, abs(solve(cost, mu).total_cost - brute_force_oracle(cost, mu).total_cost))
    yield Check("oracle", worst < 1e-12, f"max |diff|={worst:.3g}")
    plan = solve("coulomb", discretize(Density.uniform(), 64))
    sym = check_symmetry(plan)
    mono = check_cyclical_monotonicity(plan, max_cycle=4, trials=1000, seed=rng)
    hits = check_1d_configurations(plan, seed=rng)
    yield Check(
        "structure",
        sym and mono and hits == {"pairs": 0, "triples": 0},
        f"symmetric={sym} monotone={mono} hits={hits}",
    )


def _maps(rng):
    u = solve_map_1d(Density.uniform())
    x = rng.uniform(0, 1, 50)
    x = x[np.abs(x - 0.5) > 1e-9]
    err = np.max(np.abs(u.transform(x) - np.where(x < 0.5, x + 0.5, x - 0.5)))
    cost = monge_cost(u)
    yield Check(
        "uniform-map",
        abs(u.median_ - 0.5) < 1e-9 and err < 1e-9 and abs(cost - 2.0) < 1e-6,
        f"a={u.median_:.12g} max|T-T*|={err:.3g} E={cost:.12g}",
    )
    for name, dens in (("exponential", Density.exponential(1.0, 3)), ("gaussian", Density.gaussian(1.0, 3))):
        fitted = solve_map_radial(dens)
        res = pushforward_residual(fitted)
        exact = monge_cost(fitted)
        disc = e_ot(dens, "discrete_grid", 128)
        rel = abs(disc - exact) / exact
        yield Check(
            f"radial-{name}",
            res <= 1e-6 and rel < 0.02,
            f"residual={res:.3g} E={exact:.10g} discrete rel diff={rel:.3g}",
        )


def _energy(rng):
    e = e_ot(Density.uniform())
    yield Check("e_ot-uniform", abs(e - 2.0) < 1e-6, f"E={e:.12g}")
    j = mean_field_j(Density.uniform_ball(1.0))
    yield Check("j-uniform-ball", abs(j - 0.6) < 1e-10, f"J={j:.12g}")
    base = Density.exponential(1.0, 3)
    e0 = e_ot(base)
    worst = max(abs(e_ot(dilate(base, a)) - a * e0) / (a * e0) for a in (0.5, 2.0, 3.0))
    yield Check("dilation", worst <= 1e-6, f"max rel dev={worst:.3g}")


def _transport(rng):
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(6, 12))
        pts = np.sort(rng.uniform(-1, 1, n))
        a = rng.uniform(0.2, 1.0, n)
        b = rng.uniform(0.2, 1.0, n)
        mu = DiscreteMeasure(pts, a / a.sum())
        p = reinstate(solve("coulomb", mu), b / b.sum())
        rows, cols = p.marginals()
        worst = max(worst, np.max(np.abs(rows - b / b.sum())), np.max(np.abs(cols - b / b.sum())))
    yield Check("reinstate-marginals", worst <= 1e-10, f"max error={worst:.3g}")
    a, b = radial_crossing_pair()
    rep = cost_gap_bound(None, a, b, n=64)
    yield Check(
        "cost-gap",
        rep.holds,
        f"gap={rep.gap:.4g}<=3M={rep.bound_m:.4g} |dE|={rep.energy_gap:.4g}<={rep.bound_cstar:.4g}",
    )
    sup = coulomb_sup_bound(Density.uniform_ball(1.0))
    yield Check(
        "sup-bound-ball",
        sup.holds and abs(sup.lhs - 1.5) < 1e-8,
        f"lhs={sup.lhs:.12g} rhs={sup.rhs:.6g} c0={C0:.6g}",
    )
    worst = max(
        abs(newton_shell_average(s, r) - 1.0 / max(s, r))
        for s, r in rng.uniform(0.1, 3.0, (50, 2))
    )
    yield Check("newton-shell", worst < 1e-8, f"max error={worst:.3g}")
    pts = rng.normal(size=(12, 3))
    plan = solve("coulomb", DiscreteMeasure(pts, np.full(12, 1 / 12)))
    ok = all(mollify_plan(plan, e).total_cost() <= plan.total_cost for e in (0.05, 0.3, 1.0))
    yield Check("mollified-cost", ok, "C[gamma_eps] <= C[gamma] for eps in (0.05, 0.3, 1)")


def _legendre(rng):
    ys = np.geomspace(1e-3, 1e3, 1000)
    worst = max(abs(generalized_legendre("coulomb", y) + 2.0 * math.sqrt(y)) for y in ys)
    yield Check("legendre-closed-form", worst <= 1e-8, f"max error={worst:.3g}")
    rel = 0.0
    for z in rng.normal(size=(5, 3)):
        exact = coulomb_legendre_gradient(z)
        rel = max(rel, np.linalg.norm(legendre_gradient("coulomb", z) - exact) / np.linalg.norm(exact))
    yield Check("legendre-gradient", rel <= 1e-4, f"max rel error={rel:.3g}")
    psi_c = c_transform(PotentialField([0.0, 1.0], [0.0, 0.0]))
    yield Check("c-transform", np.allclose(psi_c.values, 1.0), f"values={psi_c.values.tolist()}")


SUITES = {
    "kantorovich": _kantorovich,
    "maps": _maps,
    "energy": _energy,
    "transport": _transport,
    "legendre": _legendre,
}


def run_suite(name="all", seed=None):
    """Run one suite (or ``"all"``) and return the list of :class:`Check` results."""
    if name != "all" and name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    rng = np.random.default_rng(seed_from_env() if seed is None else seed)
    names = list(SUITES) if name == "all" else [name]
    return [check for n in names for check in SUITES[n](rng)]
