"""Independent reference implementations used by the unit and acceptance tests."""

import networkx as nx
import numpy as np

from ttplan import kf_dynamic as kd
from ttplan.topomap import TopologyMap


def random_params(rng, j):
    return kd.BilinearParams(
        j,
        phi=rng.normal(0.2, 0.2, j),
        b=rng.normal(0.1, 0.1, j),
        c=rng.normal(0.1, 0.1, (j, j)),
        xi_mean=rng.uniform(0, 0.3),
        xi_std=rng.uniform(0.01, 0.3),
        q_std=rng.uniform(0.1, 2.0),
        r_std=rng.uniform(0.05, 1.0),
    )


def random_state(rng, params):
    """State with explicit xi/X histories and a random PSD covariance (constant row zero)."""
    j, n = params.regression_no, params.n
    s = np.r_[1.0, rng.uniform(0, 0.3, j), rng.uniform(1, 30, j)]
    a = rng.normal(size=(n - 1, n - 1))
    p = np.zeros((n, n))
    p[1:, 1:] = a @ a.T / n
    return kd.BilinearState(
        s=s, p_mat=p, mu=rng.uniform(1, 30), n_mean=int(rng.integers(0, 20)),
        last_innovation=rng.normal(0, 1), n_hist=j,
    )


def scalar_next_x(params, xi_hist, x_hist, xi_next, mu, innovation):
    """Direct evaluation of the bilinear recursion for X(m+1).

    ``xi_hist[-1]`` is xi(m) and ``x_hist[-1]`` is X(m).
    """
    j = params.regression_no
    X = lambda back: x_hist[len(x_hist) - 1 - back]  # X(m - back)
    XI = lambda back: xi_hist[len(xi_hist) - 1 - back]  # xi(m - back)
    total = mu + xi_next + innovation
    for i in range(1, j + 1):
        total -= params.phi[i - 1] * X(i - 1)
    for r in range(1, j + 1):
        total += params.b[r - 1] * XI(r - 1)
        for z in range(1, j + 1):
            total += params.c[r - 1, z - 1] * XI(r - 1) * X(z - 1)
    return total


def dense_kf_update(x_prior, p_prior, H, R, y):
    """Textbook Kalman measurement update with dense matrices."""
    S = H @ p_prior @ H.T + R
    K = np.linalg.solve(S.T, (p_prior @ H.T).T).T
    x = x_prior + K @ (y - H @ x_prior)
    P = (np.eye(len(x_prior)) - K @ H) @ p_prior
    return x, P


def random_graph(rng, n, extra, directed_fraction=0.3):
    """Connected random map: a random tree plus extra edges, some one-way."""
    coords = rng.uniform(0, 10, size=(n, 2))
    pairs = set()
    for v in range(1, n):
        pairs.add((int(rng.integers(0, v)), v))
    for _ in range(extra):
        u, v = rng.integers(0, n, 2)
        if u != v:
            pairs.add((int(min(u, v)), int(max(u, v))))
    edges = []
    for u, v in sorted(pairs):
        if rng.random() < directed_fraction:
            edges.append((u, v) if rng.random() < 0.5 else (v, u))
        else:
            edges += [(u, v), (v, u)]
    return TopologyMap(tuple(map(tuple, coords)), tuple(edges))


def to_nx(topo, weights):
    g = nx.DiGraph()
    g.add_nodes_from(range(topo.node_count))
    for e, (u, v) in enumerate(topo.edges):
        g.add_edge(u, v, w=weights[e])
    return g


def brute_force_cost(topo, weights, s, d):
    """Cheapest simple path by exhaustive enumeration, summed left to right."""
    return min(
        sum(weights[topo.edge_index(u, v)] for u, v in zip(p, p[1:]))
        for p in nx.all_simple_paths(to_nx(topo, weights), s, d)
    )
