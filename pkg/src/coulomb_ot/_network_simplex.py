"""Primal network simplex for the transportation problem with forbidden arcs.

Nodes ``0..n-1`` are sources, ``n..n+m-1`` sinks and ``n+m`` an artificial
root joined to every node by an artificial arc. Phase 1 starts from that
star and minimises the artificial flow; phase 2 optimises the true costs
with artificial arcs pinned to zero flow. The spanning tree is rebuilt from
its arc list after every pivot, so potentials never drift. Entering arcs
come from block pricing, switching to Bland's lowest-index rule during
long degenerate stretches; the leaving arc is the last blocking arc after
the cycle apex.
"""

import numpy as np
from numba import njit

from .exceptions import NoFiniteCostPlan, NonConvergent

_OK, _BUDGET, _UNBOUNDED = 0, 1, 2


@njit(cache=True)
def _rebuild(n_nodes, root, src, dst, cost, tree, parent, parent_arc, depth, pi, order):
    deg = np.zeros(n_nodes + 1, np.int64)
    for t in range(tree.size):
        a = tree[t]
        deg[src[a] + 1] += 1
        deg[dst[a] + 1] += 1
    for i in range(n_nodes):
        deg[i + 1] += deg[i]
    fill = deg[:-1].copy()
    nb = np.empty(2 * tree.size, np.int64)
    nb_arc = np.empty(2 * tree.size, np.int64)
    for t in range(tree.size):
        a = tree[t]
        u, v = src[a], dst[a]
        nb[fill[u]] = v
        nb_arc[fill[u]] = a
        fill[u] += 1
        nb[fill[v]] = u
        nb_arc[fill[v]] = a
        fill[v] += 1
    parent[root] = -1
    parent_arc[root] = -1
    depth[root] = 0
    pi[root] = 0.0
    order[0] = root
    head, tail = 0, 1
    while head < tail:
        x = order[head]
        head += 1
        for s in range(deg[x], deg[x + 1]):
            y = nb[s]
            if y == parent[x]:
                continue
            a = nb_arc[s]
            parent[y] = x
            parent_arc[y] = a
            depth[y] = depth[x] + 1
            if src[a] == x:
                pi[y] = pi[x] - cost[a]
            else:
                pi[y] = pi[x] + cost[a]
            order[tail] = y
            tail += 1
    return tail


@njit(cache=True)
def _room(a, forward, n_real, phase, flow):
    if a >= n_real and phase == 2:
        if forward:
            return 0.0
        return flow[a]
    if forward:
        return np.inf
    return flow[a]


@njit(cache=True)
def _phase(n_nodes, root, n_real, src, dst, cost, flow, tree, tree_pos, in_tree,
           phase, tol, budget):
    parent = np.empty(n_nodes, np.int64)
    parent_arc = np.empty(n_nodes, np.int64)
    depth = np.empty(n_nodes, np.int64)
    pi = np.empty(n_nodes)
    order = np.empty(n_nodes, np.int64)
    path_p = np.empty(n_nodes, np.int64)
    path_q = np.empty(n_nodes, np.int64)
    block = max(64, int(np.sqrt(n_real)))
    start = 0
    pivots = 0
    degenerate_run = 0
    bland_after = 5 * n_nodes
    while True:
        _rebuild(n_nodes, root, src, dst, cost, tree, parent, parent_arc, depth, pi, order)
        if n_real == 0:
            return pivots, _OK
        # pricing
        enter = -1
        best = -tol
        if degenerate_run > bland_after:
            for a in range(n_real):
                if not in_tree[a] and cost[a] - pi[src[a]] + pi[dst[a]] < -tol:
                    enter = a
                    best = cost[a] - pi[src[a]] + pi[dst[a]]
                    break
        else:
            scanned = 0
            pos = start
            while scanned < n_real:
                stop = min(scanned + block, n_real)
                while scanned < stop:
                    a = pos
                    if not in_tree[a]:
                        r = cost[a] - pi[src[a]] + pi[dst[a]]
                        if r < best:
                            best = r
                            enter = a
                    pos += 1
                    if pos == n_real:
                        pos = 0
                    scanned += 1
                if enter >= 0:
                    break
            start = pos
        if enter < 0:
            return pivots, _OK
        if pivots >= budget:
            return pivots, _BUDGET
        pivots += 1
        p, q = src[enter], dst[enter]
        u, w = p, q
        n_p, n_q = 0, 0
        while depth[u] > depth[w]:
            path_p[n_p] = u
            n_p += 1
            u = parent[u]
        while depth[w] > depth[u]:
            path_q[n_q] = w
            n_q += 1
            w = parent[w]
        while u != w:
            path_p[n_p] = u
            n_p += 1
            u = parent[u]
            path_q[n_q] = w
            n_q += 1
            w = parent[w]
        delta = np.inf
        leave_node = -1
        for t in range(n_p - 1, -1, -1):
            x = path_p[t]
            a = parent_arc[x]
            room = _room(a, dst[a] == x, n_real, phase, flow)
            if room <= delta:
                delta = room
                leave_node = x
        for t in range(n_q):
            x = path_q[t]
            a = parent_arc[x]
            room = _room(a, src[a] == x, n_real, phase, flow)
            if room <= delta:
                delta = room
                leave_node = x
        if leave_node < 0:
            return pivots, _UNBOUNDED
        if delta < 0.0:
            delta = 0.0
        if delta == 0.0:
            degenerate_run += 1
        else:
            degenerate_run = 0
            for t in range(n_p):
                x = path_p[t]
                a = parent_arc[x]
                if dst[a] == x:
                    flow[a] += delta
                else:
                    flow[a] -= delta
            for t in range(n_q):
                x = path_q[t]
                a = parent_arc[x]
                if src[a] == x:
                    flow[a] += delta
                else:
                    flow[a] -= delta
        flow[enter] = delta
        leave = parent_arc[leave_node]
        flow[leave] = 0.0
        in_tree[leave] = False
        in_tree[enter] = True
        slot = tree_pos[leave]
        tree[slot] = enter
        tree_pos[enter] = slot
        tree_pos[leave] = -1


@njit(cache=True)
def _exact_flows(n_nodes, root, src, dst, cost, tree, supply, flow):
    parent = np.empty(n_nodes, np.int64)
    parent_arc = np.empty(n_nodes, np.int64)
    depth = np.empty(n_nodes, np.int64)
    pi = np.empty(n_nodes)
    order = np.empty(n_nodes, np.int64)
    count = _rebuild(n_nodes, root, src, dst, cost, tree, parent, parent_arc, depth, pi, order)
    net = supply.copy()
    for t in range(count - 1, 0, -1):
        x = order[t]
        a = parent_arc[x]
        if src[a] == x:
            flow[a] = net[x]
        else:
            flow[a] = -net[x]
        net[parent[x]] += net[x]
    return pi


def solve_transport(a, b, cost, allowed=None, *, max_iter=None, tol=None):
    """Minimise ``<cost, G>`` over couplings ``G`` of ``a`` and ``b`` on ``allowed`` arcs.

    Returns
    -------
    coupling : ndarray of shape (n, m)
    u, v : ndarray
        Optimal duals with ``u_i + v_j <= cost_ij`` on allowed arcs and
        equality on the support of ``coupling``.
    n_iter : int
        Number of pivots over both phases.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if allowed is None:
        allowed = np.isfinite(cost)
    tails, heads = np.nonzero(allowed)
    k = tails.size
    n_nodes = n + m + 1
    root = n + m
    src = np.concatenate([tails, np.arange(n), np.full(m, root)]).astype(np.int64)
    dst = np.concatenate([n + heads, np.full(n, root), n + np.arange(m)]).astype(np.int64)
    real_cost = cost[tails, heads]
    n_arcs = k + n + m
    flow = np.zeros(n_arcs)
    flow[k : k + n] = a
    flow[k + n :] = b
    supply = np.concatenate([a, -b, [0.0]])
    tree = np.arange(k, n_arcs, dtype=np.int64)
    tree_pos = np.full(n_arcs, -1, dtype=np.int64)
    tree_pos[k:] = np.arange(n + m)
    in_tree = np.zeros(n_arcs, dtype=np.bool_)
    in_tree[k:] = True
    scale = max(1.0, float(np.max(np.abs(real_cost)))) if k else 1.0
    mass = max(1.0, float(a.sum()))
    budget = max_iter or 200 * n_nodes * max(10, int(np.sqrt(max(k, 1))))

    cost1 = np.concatenate([np.zeros(k), np.ones(n + m)])
    it1, status = _phase(n_nodes, root, k, src, dst, cost1, flow, tree, tree_pos, in_tree,
                         1, 1e-12, budget)
    _check_status(status)
    _exact_flows(n_nodes, root, src, dst, cost1, tree, supply, flow)
    if np.any(flow[k:] > 1e-10 * mass):
        raise NoFiniteCostPlan("no coupling avoids the forbidden (diagonal) pairs")
    flow[k:] = 0.0

    cost2 = np.concatenate([real_cost, np.zeros(n + m)])
    tol = tol if tol is not None else 1e-13 * scale
    it2, status = _phase(n_nodes, root, k, src, dst, cost2, flow, tree, tree_pos, in_tree,
                         2, tol, budget - it1)
    _check_status(status)
    pi = _exact_flows(n_nodes, root, src, dst, cost2, tree, supply, flow)
    out = np.where(in_tree[:k], np.maximum(flow[:k], 0.0), 0.0)
    coupling = np.zeros((n, m))
    coupling[tails, heads] = out
    return coupling, pi[:n].copy(), -pi[n : n + m], it1 + it2


def _check_status(status):
    if status == _BUDGET:
        raise NonConvergent("network simplex exceeded its pivot budget")
    if status == _UNBOUNDED:
        raise NonConvergent("unbounded pivot in the transportation problem")
