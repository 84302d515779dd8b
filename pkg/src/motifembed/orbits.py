"""Exact per-edge counts of the 13 connected edge orbits on 2-4 vertices.

Orbit taxonomy (1-based ids, fixed):
  O1  the edge itself
  O2  wedge edge
  O3  triangle edge
  O4  4-path end edge
  O5  4-path middle edge
  O6  4-star edge
  O7  4-cycle edge
  O8  tailed-triangle tail edge
  O9  tailed-triangle triangle edge incident to the attachment node
  O10 tailed-triangle triangle edge opposite the attachment node
  O11 diamond cycle edge
  O12 diamond chord edge
  O13 4-clique edge

All counts are induced: a subgraph on a vertex subset contains every edge
between those vertices. The fast counter works edge-locally from neighbor
sets; the brute-force oracle enumerates vertex subsets and classifies the
induced subgraph by its degree sequence.
"""

from __future__ import annotations

import multiprocessing as mp
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from motifembed.factorize import normalize_columns
from motifembed.graph import Graph

NUM_ORBITS = 13

ORBIT_NAMES = (
    "edge",
    "wedge",
    "triangle",
    "path4-end",
    "path4-middle",
    "star4",
    "cycle4",
    "tailed-tri-tail",
    "tailed-tri-at-attachment",
    "tailed-tri-opposite",
    "diamond-cycle",
    "diamond-chord",
    "clique4",
)


@dataclass(frozen=True)
class EdgeOrbitCounts:
    """M x 13 table of per-edge orbit counts, bound to a graph by fingerprint."""

    counts: np.ndarray
    graph_fingerprint: str

    def __post_init__(self):
        c = self.counts
        if c.ndim != 2 or c.shape[1] != NUM_ORBITS:
            raise ValueError(f"counts must be M x {NUM_ORBITS}")
        c.flags.writeable = False

    def orbit_column(self, orbit: int) -> np.ndarray:
        """Counts for one orbit id in 1..13, a length-M vector."""
        if not 1 <= orbit <= NUM_ORBITS:
            raise ValueError(f"orbit id must be in 1..{NUM_ORBITS}, got {orbit}")
        return self.counts[:, orbit - 1]


def _count_rows(adj: list[set[int]], degs: list[int], edge_u, edge_v, lo: int, hi: int) -> np.ndarray:
    """Orbit counts for edges lo..hi using closed-form set algebra.

    For edge (i, j) let C = N(i) & N(j), Xi = N(i) - N(j) - {j},
    Xj = N(j) - N(i) - {i}. Pair-type totals over these three sets give every
    orbit; per-node terms use deg(u) minus the locally visible part so each
    edge costs O((deg_i + deg_j) * avg_deg) set operations.
    """
    out = np.zeros((hi - lo, NUM_ORBITS), dtype=np.int64)
    for row, e in enumerate(range(lo, hi)):
        i = edge_u[e]
        j = edge_v[e]
        ni = adj[i]
        nj = adj[j]
        common = ni & nj
        nc = len(common)
        xi = ni - nj
        xi.discard(j)
        xj = nj - ni
        xj.discard(i)
        si = len(xi)
        sj = len(xj)
        o2 = si + sj

        tri_pairs = 0  # 2 * adjacent pairs within C
        o11 = 0
        o10 = 0
        for u in common:
            nu = adj[u]
            in_c = len(nu & common)
            in_i = len(nu & xi)
            in_j = len(nu & xj)
            tri_pairs += in_c
            o11 += in_i + in_j
            # neighbors of u outside N(i) | N(j): u sees i, j, C, Xi, Xj locally
            o10 += degs[u] - in_i - in_j - in_c - 2
        o13 = tri_pairs >> 1
        o12 = nc * (nc - 1) // 2 - o13
        o9 = nc * o2 - o11

        o7 = 0
        o4 = 0
        within = 0  # 2 * adjacent pairs within Xi plus within Xj
        for u in xi:
            nu = adj[u]
            in_own = len(nu & xi)
            across = len(nu & xj)
            in_c = len(nu & common)
            within += in_own
            o7 += across
            o4 += degs[u] - in_own - across - in_c - 1
        for u in xj:
            nu = adj[u]
            in_own = len(nu & xj)
            across = len(nu & xi)
            in_c = len(nu & common)
            within += in_own
            o4 += degs[u] - in_own - across - in_c - 1
        o8 = within >> 1
        o6 = si * (si - 1) // 2 + sj * (sj - 1) // 2 - o8
        o5 = si * sj - o7

        out[row] = (1, o2, nc, o4, o5, o6, o7, o8, o9, o10, o11, o12, o13)
    return out


_POOL_STATE: dict = {}


def _pool_init(graph: Graph) -> None:
    _POOL_STATE["adj"] = graph.adjacency_sets()
    _POOL_STATE["degs"] = graph.degrees.tolist()
    _POOL_STATE["edge_u"] = graph.edge_u.tolist()
    _POOL_STATE["edge_v"] = graph.edge_v.tolist()


def _pool_chunk(bounds: tuple[int, int]) -> np.ndarray:
    lo, hi = bounds
    return _count_rows(
        _POOL_STATE["adj"], _POOL_STATE["degs"], _POOL_STATE["edge_u"], _POOL_STATE["edge_v"], lo, hi
    )


def count_edge_orbits(g: Graph, workers: int = 1) -> EdgeOrbitCounts:
    """Exact induced orbit counts for every edge.

    Rows follow the graph's canonical edge order. Work is split by edge range
    when ``workers`` > 1; counts are integers, so the result is identical for
    any worker count.
    """
    m = g.num_edges
    if workers <= 1 or m < 1024:
        adj = g.adjacency_sets()
        degs = g.degrees.tolist()
        rows = _count_rows(adj, degs, g.edge_u.tolist(), g.edge_v.tolist(), 0, m)
        return EdgeOrbitCounts(rows, g.fingerprint())

    chunks = max(workers * 4, 1)
    bounds = [
        (m * c // chunks, m * (c + 1) // chunks)
        for c in range(chunks)
        if m * c // chunks < m * (c + 1) // chunks
    ]
    ctx = mp.get_context("fork")
    with ctx.Pool(processes=workers, initializer=_pool_init, initargs=(g,)) as pool:
        parts = pool.map(_pool_chunk, bounds)
    return EdgeOrbitCounts(np.vstack(parts), g.fingerprint())


def brute_force_orbit_counts(g: Graph, node_cap: int = 64) -> EdgeOrbitCounts:
    """Oracle: enumerate all 2-4 vertex subsets and classify induced subgraphs.

    Deliberately independent of the closed-form counter; the only shared code
    is the Graph itself. Refuses graphs above ``node_cap`` nodes.
    """
    if g.num_nodes > node_cap:
        raise ValueError(f"oracle refuses graphs above {node_cap} nodes, got {g.num_nodes}")
    adj = g.adjacency_sets()
    counts = np.zeros((g.num_edges, NUM_ORBITS), dtype=np.int64)
    counts[:, 0] = 1  # every edge is the 2-vertex graphlet once

    for a, b, c in combinations(range(g.num_nodes), 3):
        present = [(a, b, b in adj[a]), (a, c, c in adj[a]), (b, c, c in adj[b])]
        ne = sum(p for _, _, p in present)
        if ne == 3:
            for x, y, _ in present:
                counts[g.edge_id(x, y), 2] += 1
        elif ne == 2:
            for x, y, p in present:
                if p:
                    counts[g.edge_id(x, y), 1] += 1

    for quad in combinations(range(g.num_nodes), 4):
        pairs = list(combinations(quad, 2))
        present = [v in adj[u] for u, v in pairs]
        ne = sum(present)
        if ne < 3:
            continue
        deg = dict.fromkeys(quad, 0)
        for (u, v), p in zip(pairs, present):
            if p:
                deg[u] += 1
                deg[v] += 1
        if min(deg.values()) == 0:
            continue
        live = [uv for uv, p in zip(pairs, present) if p]
        if ne == 3:
            if max(deg.values()) == 3:
                orbit_ix = [5] * 3  # star
            else:
                orbit_ix = [4 if deg[u] == 2 and deg[v] == 2 else 3 for u, v in live]
        elif ne == 4:
            if max(deg.values()) == 3:  # tailed triangle
                orbit_ix = []
                for u, v in live:
                    du, dv = deg[u], deg[v]
                    if 1 in (du, dv):
                        orbit_ix.append(7)
                    elif 3 in (du, dv):
                        orbit_ix.append(8)
                    else:
                        orbit_ix.append(9)
            else:
                orbit_ix = [6] * 4  # 4-cycle
        elif ne == 5:
            orbit_ix = [11 if deg[u] == 3 and deg[v] == 3 else 10 for u, v in live]
        else:
            orbit_ix = [12] * 6  # 4-clique
        for (u, v), ix in zip(live, orbit_ix):
            counts[g.edge_id(u, v), ix] += 1

    return EdgeOrbitCounts(counts, g.fingerprint())


def node_motif_features(g: Graph, counts: EdgeOrbitCounts) -> np.ndarray:
    """N x 52 node feature matrix from per-edge orbit counts.

    Base block: per-orbit sums over incident edges (the per-orbit motif
    degree). Then sum, mean, and max of neighbors' base features. Columns are
    unit-Euclidean-normalized; degree-0 nodes get zero aggregates.
    """
    if counts.graph_fingerprint != g.fingerprint():
        raise ValueError("orbit counts were computed for a different graph")
    n = g.num_nodes
    table = counts.counts.astype(np.float64)
    base = np.zeros((n, NUM_ORBITS))
    np.add.at(base, g.edge_u, table)
    np.add.at(base, g.edge_v, table)

    nbr_sum = np.zeros_like(base)
    np.add.at(nbr_sum, g.edge_u, base[g.edge_v])
    np.add.at(nbr_sum, g.edge_v, base[g.edge_u])

    deg = g.degrees.astype(np.float64)
    inv_deg = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    nbr_mean = nbr_sum * inv_deg[:, None]

    nbr_max = np.zeros_like(base)
    np.maximum.at(nbr_max, g.edge_u, base[g.edge_v])
    np.maximum.at(nbr_max, g.edge_v, base[g.edge_u])

    return normalize_columns(np.hstack([base, nbr_sum, nbr_mean, nbr_max]))
