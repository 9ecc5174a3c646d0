"""Undirected graphs and their Laplacian spectra.

Node ids are 1-based everywhere in the public API. Matrices are indexed
0-based as usual for numpy, so row ``i - 1`` belongs to node ``i``.
"""
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DuplicateEdgeError,
    GraphError,
    NodeRangeError,
    PreconditionError,
    SelfLoopError,
)


def zero_tol(n):
    """Eigenvalues below this magnitude are treated as zero."""
    return 1e-10 * max(n, 1)


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GraphTopology:
    n: int
    edges: tuple  # sorted ((i, j), ...) with i < j

    @cached_property
    def adjacency(self):
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for i, j in self.edges:
            a[i - 1, j - 1] = 1
            a[j - 1, i - 1] = 1
        return _readonly(a)

    @cached_property
    def degree(self):
        return _readonly(self.adjacency.sum(axis=1))

    @cached_property
    def laplacian(self):
        return _readonly(np.diag(self.degree) - self.adjacency)

    def neighbors(self, i):
        """Sorted neighbour ids of node ``i``."""
        return tuple(int(j) + 1 for j in np.flatnonzero(self.adjacency[i - 1]))

    @cached_property
    def directed_edges(self):
        """Both orientations of every edge, grouped by source node.

        This ordering is canonical: packed estimator and coefficient arrays
        and exported column names all follow it.
        """
        return tuple((i, j) for i in range(1, self.n + 1) for j in self.neighbors(i))

    @cached_property
    def edge_index(self):
        return {e: k for k, e in enumerate(self.directed_edges)}

    def has_edge(self, i, j):
        return 1 <= i <= self.n and 1 <= j <= self.n and bool(self.adjacency[i - 1, j - 1])


def build_graph(n, edges):
    """Validate ``edges`` and return the graph on nodes ``1..n``."""
    if int(n) != n or n < 1:
        raise GraphError(f"node count must be a positive integer, got {n!r}")
    n = int(n)
    seen = set()
    for e in edges:
        i, j = (int(v) for v in e)
        if i == j:
            raise SelfLoopError(f"self-loop at node {i}")
        if not (1 <= i <= n and 1 <= j <= n):
            raise NodeRangeError(f"edge ({i}, {j}) references a node outside 1..{n}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge {key}")
        seen.add(key)
    return GraphTopology(n, tuple(sorted(seen)))


def line_graph(n):
    return build_graph(n, [(i, i + 1) for i in range(1, n)])


def complete_graph(n):
    return build_graph(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def random_connected_graph(n, rng, extra_edge_prob=0.3):
    """Random spanning tree plus independently sampled extra edges."""
    order = rng.permutation(n) + 1
    edges = set()
    for k in range(1, n):
        parent = order[rng.integers(0, k)]
        child = order[k]
        edges.add((min(parent, child), max(parent, child)))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    return build_graph(n, sorted(edges))


def is_connected(g):
    """Breadth-first traversal from node 1."""
    seen = {1}
    queue = deque([1])
    while queue:
        i = queue.popleft()
        for j in g.neighbors(i):
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == g.n


def laplacian_spectrum(g):
    """Ascending Laplacian eigenvalues; the smallest is snapped to exactly 0."""
    lam = np.linalg.eigvalsh(g.laplacian.astype(float))
    if abs(lam[0]) < zero_tol(g.n):
        lam[0] = 0.0
    return lam


def algebraic_connectivity(g):
    return 0.0 if g.n == 1 else float(laplacian_spectrum(g)[1])


def lemma1_certificate(g, k):
    """Smallest eigenvalue of ``L + diag(k)`` and whether it is positive definite.

    Requires a connected graph and nonnegative gains with at least one
    strictly positive entry; otherwise raises :class:`PreconditionError`.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (g.n,):
        raise PreconditionError(f"gain vector must have length {g.n}, got shape {k.shape}")
    if np.any(k < 0):
        raise PreconditionError("gains must be nonnegative")
    if not np.any(k > 0):
        raise PreconditionError("at least one gain must be strictly positive")
    if not is_connected(g):
        raise PreconditionError("graph is not connected")
    lam_min = float(np.linalg.eigvalsh(g.laplacian + np.diag(k))[0])
    return lam_min, lam_min > zero_tol(g.n)


def min_eig_l_plus_k(g, k):
    """``lambda_min(L + diag(k))`` without precondition checks."""
    return float(np.linalg.eigvalsh(g.laplacian + np.diag(np.asarray(k, dtype=float)))[0])
