"""Network generators, degree statistics and edge-list persistence."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, GraphFormatError, SizeError

MAX_APOLLONIAN_GENERATION = 12


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..n_nodes-1``.

    ``edges`` is an ``(E, 2)`` int64 array with ``u < v`` in each row, rows
    sorted lexicographically and unique.
    """

    n_nodes: int
    edges: np.ndarray

    def __post_init__(self):
        e = self.edges
        if self.n_nodes < 0:
            raise DomainError("n_nodes must be >= 0")
        if e.ndim != 2 or e.shape[1] != 2:
            raise DomainError("edges must have shape (E, 2)")
        if len(e):
            if np.any(e[:, 0] >= e[:, 1]):
                raise DomainError("edges must satisfy u < v (no self-loops)")
            if e.min() < 0 or e.max() >= self.n_nodes:
                raise DomainError("edge endpoint outside node range")
            keys = e[:, 0] * self.n_nodes + e[:, 1]
            if np.any(np.diff(keys) <= 0):
                raise DomainError("edges must be sorted and unique")
        e.setflags(write=False)

    @classmethod
    def from_pairs(cls, n_nodes: int, pairs, simplify: bool = False) -> "Graph":
        """Normalize an arbitrary pair list.

        With ``simplify`` self-loops and repeated pairs are dropped; otherwise
        they raise.
        """
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if len(arr):
            if arr.min() < 0 or arr.max() >= n_nodes:
                raise DomainError("edge endpoint outside node range")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        loops = lo == hi
        if loops.any() and not simplify:
            raise DomainError("self-loop in edge list")
        lo, hi = lo[~loops], hi[~loops]
        keys = lo * max(n_nodes, 1) + hi
        uniq = np.unique(keys)
        if len(uniq) != len(keys) and not simplify:
            raise DomainError("repeated edge in edge list")
        n = max(n_nodes, 1)
        edges = np.column_stack([uniq // n, uniq % n]).astype(np.int64)
        return cls(int(n_nodes), edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges.ravel(), minlength=self.n_nodes).astype(np.int64)
        deg.setflags(write=False)
        return deg

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` of the symmetric adjacency, neighbours sorted."""
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((dst, src))
        indices = np.ascontiguousarray(dst[order], dtype=np.int64)
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        return indptr, indices

    def neighbors(self, i: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[i]:indptr[i + 1]]

    def adjacency(self):
        from scipy import sparse

        indptr, indices = self.csr
        return sparse.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(self.n_nodes, self.n_nodes))

    def dense_adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes))
        a[self.edges[:, 0], self.edges[:, 1]] = 1.0
        a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def relabel(self, perm) -> "Graph":
        """Graph with node ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        return Graph.from_pairs(self.n_nodes, perm[self.edges])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n_nodes == other.n_nodes and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n_nodes, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class DegreeStats:
    k_max: int
    mean_k: float
    second_moment_ratio: float
    mean_k2: float


def degree_stats(g: Graph) -> DegreeStats:
    if g.n_nodes == 0:
        raise DomainError("degree statistics of an empty graph")
    k = g.degrees.astype(float)
    mean_k = float(k.mean())
    mean_k2 = float((k * k).mean())
    ratio = mean_k2 / mean_k if mean_k > 0 else 0.0
    return DegreeStats(int(k.max()), mean_k, ratio, mean_k2)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ring_lattice(n: int, z: int) -> Graph:
    """Circulant graph: each node linked to its z/2 nearest nodes on either side."""
    if z < 2 or z % 2:
        raise DomainError(f"z must be even and >= 2, got {z}")
    if z >= n:
        raise DomainError(f"need n > z, got n={n}, z={z}")
    i = np.arange(n)
    pairs = [np.column_stack([i, (i + d) % n]) for d in range(1, z // 2 + 1)]
    return Graph.from_pairs(n, np.concatenate(pairs))


def complete_graph(n: int) -> Graph:
    iu = np.triu_indices(n, 1)
    return Graph(n, np.column_stack(iu).astype(np.int64))


def star_graph(n: int) -> Graph:
    """Hub 0 joined to n-1 leaves."""
    leaves = np.arange(1, n)
    return Graph(n, np.column_stack([np.zeros(n - 1, dtype=np.int64), leaves]))


def path_graph(n: int) -> Graph:
    i = np.arange(n - 1)
    return Graph(n, np.column_stack([i, i + 1]).astype(np.int64))


def _pair_from_index(idx: np.ndarray, n: int) -> np.ndarray:
    """Map linear indices over the strict upper triangle (row-major) to (i, j)."""
    idx = idx.astype(np.int64)
    # rows start at S(i) = i*(2n - i - 1)/2
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    # repair float rounding at row boundaries
    over = start > idx
    i[over] -= 1
    start = i * (2 * n - i - 1) // 2
    nxt = (i + 1) * (2 * n - i - 2) // 2
    under = idx >= nxt
    i[under] += 1
    start = i * (2 * n - i - 1) // 2
    j = idx - start + i + 1
    return np.column_stack([i, j])


def erdos_renyi(n: int, mean_degree: float, seed=None) -> Graph:
    """G(n, p) with p = mean_degree / (n - 1).

    The edge count is drawn from Binomial(n(n-1)/2, p) and that many distinct
    pairs are chosen uniformly, which is the same distribution as independent
    per-pair inclusion.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if not 0 < mean_degree <= n - 1:
        raise DomainError(f"mean degree must lie in (0, n-1], got {mean_degree}")
    rng = _rng(seed)
    total = n * (n - 1) // 2
    p = min(mean_degree / (n - 1), 1.0)
    m = int(rng.binomial(total, p))
    idx = np.sort(rng.choice(total, size=m, replace=False))
    return Graph.from_pairs(n, _pair_from_index(idx, n))


def structural_cutoff(n: int, gamma: float) -> int:
    return int(math.floor(min(math.sqrt(n), n ** (1.0 / (gamma - 1.0))) + 1e-9))


def sample_power_law_degrees(n: int, gamma: float, k_min: int, k_max: int, rng) -> np.ndarray:
    """i.i.d. degrees from P(k) ~ k^-gamma on [k_min, k_max] with an even sum."""
    support = np.arange(k_min, k_max + 1)
    if len(support) == 0:
        raise DomainError(f"empty degree support [{k_min}, {k_max}]")
    w = support.astype(float) ** (-gamma)
    w /= w.sum()
    deg = rng.choice(support, size=n, p=w)
    if deg.sum() % 2:
        if len(np.unique(support % 2)) < 2:
            raise DomainError("degree support cannot produce an even degree sum")
        node = int(rng.integers(n))
        old = deg[node]
        while True:
            new = rng.choice(support, p=w)
            if (new - old) % 2:
                deg[node] = new
                break
    return deg


def configuration_model(degrees: np.ndarray, rng) -> Graph:
    """Uniform stub matching; self-loops and multi-edges erased afterwards."""
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.sum() % 2:
        raise DomainError("degree sum must be even")
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    rng.shuffle(stubs)
    return Graph.from_pairs(len(degrees), stubs.reshape(-1, 2), simplify=True)


def scale_free(n: int, gamma: float, k_min: int = 2, seed=None) -> Graph:
    """Configuration-model network with P(k) ~ k^-gamma below the structural cutoff."""
    if not gamma > 2:
        raise DomainError(f"gamma must exceed 2, got {gamma}")
    if k_min < 1:
        raise DomainError("k_min must be >= 1")
    k_cut = structural_cutoff(n, gamma)
    if k_cut < k_min:
        raise DomainError(f"empty degree support: k_min={k_min} exceeds cutoff {k_cut}")
    rng = _rng(seed)
    deg = sample_power_law_degrees(n, gamma, k_min, k_cut, rng)
    return configuration_model(deg, rng)


def apollonian_size(generation: int) -> tuple[int, int]:
    """(nodes, edges) after the given number of subdivision rounds."""
    return (3**generation + 5) // 2, 3 * (3**generation + 1) // 2


def apollonian(generation: int) -> Graph:
    """Recursive triangle subdivision starting from the triangle {0, 1, 2}."""
    if generation < 0:
        raise DomainError("generation must be >= 0")
    if generation > MAX_APOLLONIAN_GENERATION:
        raise SizeError(f"generation {generation} exceeds guard {MAX_APOLLONIAN_GENERATION}")
    faces = np.array([[0, 1, 2]], dtype=np.int64)
    edges = [np.array([[0, 1], [0, 2], [1, 2]], dtype=np.int64)]
    n = 3
    for _ in range(generation):
        new = np.arange(n, n + len(faces), dtype=np.int64)
        n += len(faces)
        for c in range(3):
            edges.append(np.column_stack([faces[:, c], new]))
        a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
        faces = np.stack([
            np.column_stack([a, b, new]),
            np.column_stack([a, new, c]),
            np.column_stack([new, b, c]),
        ], axis=1).reshape(-1, 3)
    return Graph.from_pairs(n, np.concatenate(edges))


def watts_strogatz(n: int, z: int, p: float, seed=None) -> Graph:
    """Ring lattice with each original edge rewired with probability p.

    Edges are visited by distance d = 1..z/2, then by node i; a rewired edge
    (i, i+d) keeps i and moves its clockwise end to a uniform node, resampling
    on self-loops and duplicates.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    ring = ring_lattice(n, z)
    if p == 0.0:
        return ring
    rng = _rng(seed)
    adj = [set() for _ in range(n)]
    for u, v in ring.edges.tolist():
        adj[u].add(v)
        adj[v].add(u)
    for d in range(1, z // 2 + 1):
        for i in range(n):
            if rng.random() >= p:
                continue
            j = (i + d) % n
            if len(adj[i]) >= n - 1:
                continue
            while True:
                k = int(rng.integers(n))
                if k != i and k not in adj[i]:
                    break
            adj[i].discard(j)
            adj[j].discard(i)
            adj[i].add(k)
            adj[k].add(i)
    pairs = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph.from_pairs(n, pairs)


# ---------------------------------------------------------------- edge lists

def format_edgelist(g: Graph, comments=()) -> str:
    lines = [f"# nodes={g.n_nodes}"]
    lines += [f"# {c}" for c in comments]
    lines += [f"{u} {v}" for u, v in g.edges.tolist()]
    return "\n".join(lines) + "\n"


def save_edgelist(g: Graph, path, comments=()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edgelist(g, comments))


def parse_edgelist(text: str) -> Graph:
    n_nodes = None
    pairs = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if n_nodes is None and body.startswith("nodes="):
                try:
                    n_nodes = int(body[len("nodes="):])
                except ValueError:
                    raise GraphFormatError(f"bad node count {body!r}", lineno) from None
                if n_nodes < 0:
                    raise GraphFormatError("negative node count", lineno)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {raw!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer node id in {raw!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphFormatError("negative node id", lineno)
        if u == v:
            raise GraphFormatError("self-loop", lineno)
        if n_nodes is not None and max(u, v) >= n_nodes:
            raise GraphFormatError(f"node id exceeds nodes={n_nodes}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"repeated edge {key[0]} {key[1]}", lineno)
        seen.add(key)
        pairs.append((u, v))
    if n_nodes is None:
        n_nodes = 1 + max((max(p) for p in pairs), default=-1)
    try:
        return Graph.from_pairs(n_nodes, pairs)
    except DomainError as exc:
        raise GraphFormatError(str(exc)) from None


def load_edgelist(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edgelist(fh.read())
