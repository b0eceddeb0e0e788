"""Attack-defense graphs: loading, push-attack probabilities, spectral analysis.

Edges are stored as directed pairs ``(u, v)`` meaning ``u`` can push-attack
``v``.  Internally edges are kept sorted by target then source, which gives a
CSR layout over in-neighbourhoods: the in-edges of ``v`` occupy
``src[indptr[v]:indptr[v + 1]]``.  Every per-node quantity in the dynamics is
a reduction over that slice.
"""

from __future__ import annotations

import dataclasses
import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConfigError, EdgeListError, EmptyGraphError


@dataclass(frozen=True, eq=False)
class AttackDefenseGraph:
    """Immutable directed graph with one push-attack probability per edge.

    ``node_ids[k]`` is the original (file) id of internal node ``k``.
    Undirected inputs carry ``directed=False`` and store both orientations of
    every pair with the same gamma.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    gamma: np.ndarray
    node_ids: np.ndarray
    directed: bool = True

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        gamma = np.asarray(self.gamma, dtype=float)
        if not (src.shape == dst.shape == gamma.shape) or src.ndim != 1:
            raise ValueError("src, dst and gamma must be 1-d arrays of equal length")
        if src.size:
            if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(src == dst):
                raise ValueError("self-loops are not allowed")
            if np.any(gamma <= 0) or np.any(gamma > 1):
                raise ValueError("gamma values must lie in (0, 1]")
        order = np.lexsort((src, dst))
        src, dst, gamma = src[order], dst[order], gamma[order]
        if src.size > 1:
            dup = (np.diff(src) == 0) & (np.diff(dst) == 0)
            if dup.any():
                raise ValueError("duplicate edges; build through from_edges to collapse them")
        for name, arr in (("src", src), ("dst", dst), ("gamma", gamma)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        ids = np.asarray(self.node_ids, dtype=np.int64)
        if ids.shape != (self.n,):
            raise ValueError("node_ids must have one entry per node")
        ids.setflags(write=False)
        object.__setattr__(self, "node_ids", ids)

    @classmethod
    def from_edges(cls, n, edges, gamma=1.0, node_ids=None, directed=True):
        """Build from an iterable of ``(u, v)`` pairs.

        Self-loops are dropped and duplicates collapse onto their first
        occurrence (including its gamma).  With ``directed=False`` each pair
        is stored in both directions.
        """
        edges = list(edges)
        gammas = np.broadcast_to(np.asarray(gamma, dtype=float), (len(edges),))
        seen = {}
        for (u, v), g in zip(edges, gammas):
            u, v = int(u), int(v)
            if u == v:
                continue
            pairs = [(u, v)] if directed else [(u, v), (v, u)]
            for pair in pairs:
                seen.setdefault(pair, float(g))
        if seen:
            uv = np.array(list(seen.keys()), dtype=np.int64)
            src, dst = uv[:, 0], uv[:, 1]
            gam = np.fromiter(seen.values(), dtype=float, count=len(seen))
        else:
            src = dst = np.zeros(0, dtype=np.int64)
            gam = np.zeros(0)
        if node_ids is None:
            node_ids = np.arange(n)
        return cls(n=n, src=src, dst=dst, gamma=gam, node_ids=node_ids, directed=directed)

    @property
    def m(self):
        return int(self.src.size)

    @property
    def edges(self):
        return list(zip(self.src.tolist(), self.dst.tolist()))

    @property
    def gamma_max(self):
        return float(self.gamma.max()) if self.m else 0.0

    @cached_property
    def indptr(self):
        counts = np.bincount(self.dst, minlength=self.n)
        ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=ptr[1:])
        ptr.setflags(write=False)
        return ptr

    @cached_property
    def in_degree(self):
        return np.diff(self.indptr)

    @property
    def in_neighbors(self):
        """``N_v`` for every node, as Python lists."""
        return [self.src[self.indptr[v]:self.indptr[v + 1]].tolist() for v in range(self.n)]

    def gamma_of(self, u, v):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        hits = np.nonzero(self.src[lo:hi] == u)[0]
        if hits.size == 0:
            raise KeyError((u, v))
        return float(self.gamma[lo + hits[0]])

    def adjacency(self):
        """Sparse ``A`` with ``A[v, u] = 1`` iff ``(u, v)`` is an edge."""
        return sp.csr_matrix((np.ones(self.m), (self.dst, self.src)), shape=(self.n, self.n))

    def gamma_matrix(self):
        """Sparse ``K^T`` with ``K^T[v, u] = gamma_uv`` (rows are targets)."""
        return sp.csr_matrix((self.gamma, (self.dst, self.src)), shape=(self.n, self.n))

    def with_gamma(self, gamma):
        """Copy with per-edge gammas replaced (aligned with ``self.src``)."""
        return dataclasses.replace(self, gamma=np.asarray(gamma, dtype=float).copy())

    def same_structure(self, other):
        return (
            self.n == other.n
            and self.directed == other.directed
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.node_ids, other.node_ids)
        )

    def __eq__(self, other):
        if not isinstance(other, AttackDefenseGraph):
            return NotImplemented
        return self.same_structure(other) and np.array_equal(self.gamma, other.gamma)

    __hash__ = None


def load_edge_list(text, directed=True):
    """Parse a SNAP-style edge list.

    Lines starting with ``#`` are comments, blank lines are skipped, every
    other line must hold exactly two non-negative integer ids.  Ids are
    remapped to ``0..n-1`` in increasing id order.  Nodes that only appear on
    a self-loop line are kept as isolated nodes; the loop itself is dropped.
    Gammas default to 1 until :func:`assign_gammas` is called.
    """
    pairs = []
    for line_no, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"expected two node ids, got {len(parts)} fields: {line!r}", line_no)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"node ids must be integers: {line!r}", line_no) from None
        if u < 0 or v < 0:
            raise EdgeListError(f"node ids must be non-negative: {line!r}", line_no)
        pairs.append((u, v))
    if not any(u != v for u, v in pairs):
        raise EmptyGraphError("edge list contains no edges")

    ids = np.unique(np.array(pairs, dtype=np.int64).ravel())
    index = {int(x): k for k, x in enumerate(ids)}
    edges = [(index[u], index[v]) for u, v in pairs]
    return AttackDefenseGraph.from_edges(len(ids), edges, node_ids=ids, directed=directed)


def read_edge_list(path, directed=True):
    return load_edge_list(Path(path).read_text(encoding="utf-8"), directed=directed)


def dump_edge_list(graph):
    """Serialize ``graph`` with its original ids; inverse of :func:`load_edge_list`.

    Undirected graphs write each pair once.  Isolated nodes are written as
    self-loop lines, which the loader keeps as nodes without edges.
    """
    ids = graph.node_ids
    out = [f"# Nodes: {graph.n} Edges: {graph.m if graph.directed else graph.m // 2}\n"]
    for u, v in graph.edges:
        if graph.directed or u < v:
            out.append(f"{ids[u]}\t{ids[v]}\n")
    touched = np.zeros(graph.n, dtype=bool)
    touched[graph.src] = True
    touched[graph.dst] = True
    for k in np.nonzero(~touched)[0]:
        out.append(f"{ids[k]}\t{ids[k]}\n")
    return "".join(out)


def assign_gammas(graph, gamma_max, seed):
    """Draw every gamma uniformly from ``(0, gamma_max]``.

    Undirected graphs get one draw per unordered pair, shared by both
    orientations.
    """
    if not (0 < gamma_max <= 1):
        raise ConfigError(f"gamma_max must lie in (0, 1], got {gamma_max}")
    rng = np.random.default_rng(seed)
    if graph.directed:
        draws = gamma_max * (1.0 - rng.random(graph.m))
    else:
        lo = np.minimum(graph.src, graph.dst)
        hi = np.maximum(graph.src, graph.dst)
        key = lo * graph.n + hi
        pairs, inverse = np.unique(key, return_inverse=True)
        draws = (gamma_max * (1.0 - rng.random(pairs.size)))[inverse]
    return graph.with_gamma(draws)


def erdos_renyi(n, mean_degree, seed, directed=True):
    """Seeded G(n, p) graph with ``p = mean_degree / (n - 1)``.

    Uses a dense Bernoulli mask, so it is meant for desk-scale ``n``.
    """
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < mean_degree / (n - 1)
    np.fill_diagonal(mask, False)
    if not directed:
        mask = np.triu(mask)
    u, v = np.nonzero(mask)
    return AttackDefenseGraph.from_edges(n, zip(u, v), directed=directed)


@dataclass
class SpectralReport:
    lambda_max: float
    iterations: int
    residual: float
    converged: bool = True
    # Collatz-Wielandt bound max_i (Mx)_i / x_i; always >= the true radius.
    upper_bound: float = 0.0
    components: int = 0


def _power_iteration(M, tol, max_iter, rng):
    """Shifted power iteration on an irreducible nonnegative block.

    Iterating with ``M + I`` makes the block primitive, so periodic
    structures such as directed cycles converge as well.
    """
    n = M.shape[0]
    x = rng.random(n) + 0.5
    x /= x.sum()
    lam, residual = 0.0, np.inf
    for it in range(1, max_iter + 1):
        y = M @ x
        lam = y.sum()  # ||x||_1 = 1 and everything is nonnegative
        residual = np.abs(y - lam * x).sum()
        if residual <= tol:
            break
        x = y + x
        x /= x.sum()
    ratios = (M @ x) / x
    return float(lam), it, float(residual), residual <= tol, float(ratios.max())


def spectral_radius(matrix, tol=1e-8, max_iter=10_000, seed=0):
    """Dominant eigenvalue of a nonnegative square matrix by power iteration.

    The matrix is split into strongly connected components and each
    non-trivial block is iterated separately; the radius of a reducible
    matrix is the maximum over its blocks.  Acyclic structure therefore
    yields exactly zero instead of a slowly converging iteration.
    Non-convergence is flagged in the report, never raised.
    """
    M = sp.csr_matrix(matrix, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if M.nnz and M.data.min() < 0:
        raise ValueError("matrix must be nonnegative")
    M.eliminate_zeros()
    if M.nnz == 0:
        return SpectralReport(0.0, 0, 0.0, True, 0.0, 0)

    ncomp, labels = connected_components(M, directed=True, connection="strong")
    rng = np.random.default_rng(seed)
    best = SpectralReport(0.0, 0, 0.0, True, 0.0, 0)
    total_iter, all_converged, upper = 0, True, 0.0
    diag = M.diagonal()
    sizes = np.bincount(labels, minlength=ncomp)
    for c in np.argsort(-sizes, kind="stable"):
        idx = np.nonzero(labels == c)[0]
        if idx.size == 1:
            lam = float(diag[idx[0]])
            cand = SpectralReport(lam, 0, 0.0, True, lam)
        else:
            block = M[idx][:, idx]
            lam, it, res, ok, ub = _power_iteration(block, tol, max_iter, rng)
            total_iter += it
            cand = SpectralReport(lam, it, res, ok, ub)
        if cand.lambda_max > best.lambda_max:
            best = cand
        all_converged = all_converged and cand.converged
        upper = max(upper, cand.upper_bound)
    best.iterations = total_iter
    best.converged = all_converged
    best.upper_bound = upper
    best.components = int(ncomp)
    return best


@dataclass
class PrecontrolReport:
    ok: bool
    beta_minus: float
    gamma_max: float
    lambda_max: float
    ratio: float  # beta_minus / gamma_max
    margin: float  # ratio - lambda_max
    spectral: SpectralReport = field(repr=False, default=None)

    def __bool__(self):
        return self.ok


def precontrol_check(graph, beta_minus, lambda_max=None):
    """Sufficient condition for a zero equilibrium under the weaker defense.

    Passes iff ``beta_minus / gamma_max >= lambda_{A,1}``.  A precomputed
    ``lambda_max`` (e.g. a published value) skips the power iteration.
    """
    if not (0 < beta_minus <= 1):
        raise ConfigError(f"beta_minus must lie in (0, 1], got {beta_minus}")
    if graph.n == 0:
        raise EmptyGraphError("graph has no nodes")
    spectral = None
    if lambda_max is None:
        spectral = spectral_radius(graph.adjacency())
        lambda_max = spectral.lambda_max
    gmax = graph.gamma_max
    ratio = np.inf if gmax == 0 else beta_minus / gmax
    return PrecontrolReport(
        ok=bool(ratio >= lambda_max),
        beta_minus=beta_minus,
        gamma_max=gmax,
        lambda_max=float(lambda_max),
        ratio=float(ratio),
        margin=float(ratio - lambda_max),
        spectral=spectral,
    )
