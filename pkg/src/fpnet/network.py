"""Communication graphs and doubly-stochastic mixing matrices.

Agents are numbered 0..N-1. A graph is a set of undirected edges (i, j),
i < j, with no self-loops; self-weights live on the diagonal of the mixing
matrix. The spectral quantities consumed by the convergence theory are

    alpha = ||I - W||_2          (largest singular value)
    kappa = 1 - max{|lambda_2|, |lambda_N|}   (spectral gap, eigenvalues
                                               sorted in descending order)

For a symmetric doubly-stochastic W of a connected graph, 1 - kappa equals
||W - (1/N) 11^T||_2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConnectivityError, ContractViolation, InvalidParameterError

ROW_SUM_TOL = 1e-12

TOPOLOGIES = ("complete", "ring", "path", "random_connected")


@dataclass(frozen=True)
class Graph:
    """Undirected communication graph over agents 0..n_agents-1."""

    n_agents: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n_agents < 1:
            raise InvalidParameterError(f"n_agents must be >= 1, got {self.n_agents}")
        for (i, j) in self.edges:
            if i == j:
                raise InvalidParameterError(f"self-loop ({i},{i}) not allowed")
            if not (0 <= i < self.n_agents and 0 <= j < self.n_agents):
                raise InvalidParameterError(f"edge ({i},{j}) out of range")
            if i > j:
                raise InvalidParameterError(f"edges must be stored as (i,j) with i<j, got ({i},{j})")

    def neighbors(self, i):
        out = set()
        for (a, b) in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return sorted(out)

    def degrees(self):
        d = np.zeros(self.n_agents, dtype=int)
        for (i, j) in self.edges:
            d[i] += 1
            d[j] += 1
        return d

    def adjacency(self):
        a = np.zeros((self.n_agents, self.n_agents))
        for (i, j) in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a


@dataclass(frozen=True)
class MixingMatrix:
    """Doubly-stochastic weights plus the derived spectral quantities."""

    w: np.ndarray
    alpha: float
    kappa: float

    @property
    def n_agents(self):
        return self.w.shape[0]

    def neighbor_sets(self):
        """Neighbor lists implied by the sparsity pattern (off-diagonal positives)."""
        n = self.n_agents
        return [
            [j for j in range(n) if j != i and self.w[i, j] > 0.0]
            for i in range(n)
        ]


def _edge(i, j):
    return (i, j) if i < j else (j, i)


def is_connected(graph: Graph) -> bool:
    """Breadth-first reachability from agent 0."""
    if graph.n_agents == 1:
        return True
    adj = {i: set() for i in range(graph.n_agents)}
    for (i, j) in graph.edges:
        adj[i].add(j)
        adj[j].add(i)
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for j in adj[i]:
                if j not in seen:
                    seen.add(j)
                    nxt.append(j)
        frontier = nxt
    return len(seen) == graph.n_agents


def build_graph(topology: str, n_agents: int, p: float = 0.5, seed: int = 0,
                max_retries: int = 1000) -> Graph:
    """Construct a connected graph of the requested topology.

    random_connected samples Erdos-Renyi G(n, p) edges and retries (up to
    max_retries) until the sample is connected; deterministic failure beats
    silent bias.
    """
    if n_agents < 2:
        raise InvalidParameterError(f"n_agents must be >= 2, got {n_agents}")
    if topology == "complete":
        edges = frozenset(_edge(i, j) for i in range(n_agents) for j in range(i + 1, n_agents))
        return Graph(n_agents, edges)
    if topology == "ring":
        edges = frozenset(_edge(i, (i + 1) % n_agents) for i in range(n_agents))
        return Graph(n_agents, edges)
    if topology == "path":
        edges = frozenset(_edge(i, i + 1) for i in range(n_agents - 1))
        return Graph(n_agents, edges)
    if topology == "random_connected":
        if not (0.0 < p <= 1.0):
            raise InvalidParameterError(f"edge probability must be in (0,1], got {p}")
        rng = np.random.default_rng(seed)
        for _ in range(max_retries):
            edges = frozenset(
                _edge(i, j)
                for i in range(n_agents)
                for j in range(i + 1, n_agents)
                if rng.random() < p
            )
            g = Graph(n_agents, edges)
            if is_connected(g):
                return g
        raise ConnectivityError(
            f"no connected sample in {max_retries} draws of G({n_agents},{p})"
        )
    raise InvalidParameterError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")


def spectral_params(w: np.ndarray):
    """(alpha, kappa) of a symmetric doubly-stochastic matrix.

    alpha is the largest singular value of I - W; kappa the spectral gap
    1 - max{|lambda_2|, |lambda_N|} with eigenvalues sorted descending.
    """
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ContractViolation(f"mixing matrix must be square, got shape {w.shape}")
    if not np.allclose(w, w.T, atol=1e-10):
        raise ContractViolation("mixing matrix must be symmetric")
    if np.max(np.abs(w.sum(axis=1) - 1.0)) > 1e-9 or np.max(np.abs(w.sum(axis=0) - 1.0)) > 1e-9:
        raise ContractViolation("mixing matrix must be doubly stochastic")
    if n == 1:
        return 0.0, 1.0
    eigs = np.linalg.eigvalsh(w)[::-1]  # descending
    alpha = float(np.max(np.abs(1.0 - eigs)))
    kappa = float(1.0 - max(abs(eigs[1]), abs(eigs[-1])))
    return alpha, kappa


def metropolis_mixing(graph: Graph) -> MixingMatrix:
    """Metropolis-Hastings weights: w_ij = 1/(1 + max(d_i, d_j)) on edges.

    Symmetric and doubly stochastic by construction; deterministic given
    the graph.
    """
    if not is_connected(graph):
        raise ConnectivityError("metropolis_mixing requires a connected graph")
    n = graph.n_agents
    deg = graph.degrees()
    w = np.zeros((n, n))
    for (i, j) in sorted(graph.edges):
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    alpha, kappa = spectral_params(w)
    m = MixingMatrix(w=w, alpha=alpha, kappa=kappa)
    validate_mixing_matrix(m, graph)
    return m


def validate_mixing_matrix(m: MixingMatrix, graph: Graph | None = None):
    """Assert the runtime contract of a mixing matrix; raises ContractViolation."""
    w = m.w
    n = w.shape[0]
    if np.max(np.abs(w.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
        raise ContractViolation("row sums deviate from 1 beyond 1e-12")
    if np.max(np.abs(w.sum(axis=0) - 1.0)) > ROW_SUM_TOL:
        raise ContractViolation("column sums deviate from 1 beyond 1e-12")
    if np.min(w) < 0.0 or np.max(w) > 1.0:
        raise ContractViolation("entries must lie in [0,1]")
    if graph is not None:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                on_edge = _edge(i, j) in graph.edges
                if on_edge and w[i, j] <= 0.0:
                    raise ContractViolation(f"edge ({i},{j}) carries zero weight")
                if not on_edge and w[i, j] != 0.0:
                    raise ContractViolation(f"non-edge ({i},{j}) carries weight {w[i, j]}")
    if n > 1:
        if not (0.0 < m.kappa <= 1.0):
            raise ContractViolation(f"spectral gap kappa={m.kappa} outside (0,1]")
        j_mat = np.full((n, n), 1.0 / n)
        gap_norm = float(np.linalg.norm(w - j_mat, 2))
        if abs(gap_norm - (1.0 - m.kappa)) > 1e-10:
            raise ContractViolation(
                f"||W - J/N||_2 = {gap_norm} disagrees with 1 - kappa = {1.0 - m.kappa}"
            )


def single_agent_mixing() -> MixingMatrix:
    """Degenerate 1x1 mixing matrix for single-agent (no communication) runs."""
    return MixingMatrix(w=np.ones((1, 1)), alpha=0.0, kappa=1.0)
