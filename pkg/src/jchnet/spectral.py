"""Largest adjacency eigenvalue and its finite-size scaling."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats
from scipy.sparse.csgraph import connected_components

from . import graphs
from ._backend import kernels
from .errors import DomainError, IterationLimitError, SizeError
from .graphs import Graph, degree_stats

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
# near-degenerate localized modes of lightly rewired rings need ~2.5e5 steps
CURVE_MAX_ITER = 1_000_000
DENSE_LIMIT = 2000
JACOBI_TOL = 1e-12


@dataclass(frozen=True)
class EigenResult:
    lambda_max: float
    iterations: int
    residual: float


def components(g: Graph) -> list[np.ndarray]:
    """Node arrays of the connected components, largest first."""
    _, labels = connected_components(g.adjacency(), directed=False)
    order = np.argsort(labels, kind="stable")
    splits = np.flatnonzero(np.diff(labels[order])) + 1
    parts = np.split(order, splits)
    parts.sort(key=len, reverse=True)
    return parts


def _subgraph_csr(g: Graph, nodes: np.ndarray):
    indptr, indices = g.csr
    local = np.full(g.n_nodes, -1, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    starts, stops = indptr[nodes], indptr[nodes + 1]
    counts = stops - starts
    sub_ptr = np.zeros(len(nodes) + 1, dtype=np.int64)
    np.cumsum(counts, out=sub_ptr[1:])
    take = np.concatenate([np.arange(a, b) for a, b in zip(starts, stops)]) if len(nodes) else np.empty(0, np.int64)
    sub_idx = np.ascontiguousarray(local[indices[take]], dtype=np.int64)
    return sub_ptr, sub_idx


def max_eigenvalue(g: Graph, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> EigenResult:
    """Spectral radius of the adjacency matrix by shifted power iteration.

    Each connected component is iterated separately on ``A + I`` starting from
    its degree vector; the largest component root is returned. Components
    whose maximal degree cannot beat the current best are skipped since
    ``lambda <= k_max``.
    """
    if g.n_nodes == 0:
        raise DomainError("empty graph")
    if not tol > 0:
        raise DomainError("tol must be > 0")
    deg = g.degrees
    best = EigenResult(0.0, 0, 0.0)
    for nodes in components(g):
        size = len(nodes)
        kmax = int(deg[nodes].max())
        if kmax == 0 or kmax <= best.lambda_max:
            continue
        if size == 2:
            res = EigenResult(1.0, 0, 0.0)
        else:
            ptr, idx = _subgraph_csr(g, nodes)
            lam, _, it, resid, ok = kernels.power_iteration(ptr, idx, deg[nodes].astype(float), 1.0, tol, max_iter)
            if not ok:
                raise IterationLimitError(
                    f"power iteration did not converge in {max_iter} iterations "
                    f"(estimate {lam:.12g}, residual {resid:.3g})",
                    estimate=lam, residual=resid, iterations=it)
            res = EigenResult(float(lam), int(it), float(resid))
        if res.lambda_max > best.lambda_max:
            best = res
    return best


def perron_vector(g: Graph, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> np.ndarray:
    """Unit Perron vector of the component holding the spectral radius, zero elsewhere."""
    deg = g.degrees
    best_lam, vec = -1.0, np.zeros(g.n_nodes)
    for nodes in components(g):
        if len(nodes) < 2:
            continue
        ptr, idx = _subgraph_csr(g, nodes)
        lam, x, _, _, ok = kernels.power_iteration(ptr, idx, deg[nodes].astype(float), 1.0, tol, max_iter)
        if not ok:
            raise IterationLimitError("power iteration did not converge", estimate=lam)
        if lam > best_lam:
            best_lam = lam
            vec = np.zeros(g.n_nodes)
            vec[nodes] = x
    return vec


def max_eigenvalue_dense(g: Graph) -> float:
    """Largest eigenvalue of the dense adjacency by cyclic Jacobi rotations (test oracle)."""
    if g.n_nodes > DENSE_LIMIT:
        raise SizeError(f"dense oracle limited to {DENSE_LIMIT} nodes, got {g.n_nodes}")
    if g.n_nodes == 0:
        raise DomainError("empty graph")
    w, _, off = kernels.jacobi_eigenvalues(g.dense_adjacency(), JACOBI_TOL, 100)
    if off >= JACOBI_TOL:
        raise IterationLimitError("Jacobi sweeps did not converge", estimate=float(w.max()), residual=off)
    return float(w.max())


def spectral_bounds_check(g: Graph, lam: float, tol: float = 1e-8) -> bool:
    """Check max(sqrt(k_max), sqrt(<k^2>), <k>) <= lam <= k_max."""
    s = degree_stats(g)
    lower = max(math.sqrt(s.k_max), math.sqrt(s.mean_k2), s.mean_k)
    return lower <= lam + tol and lam <= s.k_max + tol


# ------------------------------------------------------------ scaling studies

@dataclass(frozen=True)
class NetworkFamily:
    """A named generator. ``size`` is the node count, or the generation for apollonian."""

    name: str
    params: dict = field(default_factory=dict)

    GENERATORS = ("ring", "er", "scalefree", "apollonian", "smallworld")

    def __post_init__(self):
        if self.name not in self.GENERATORS:
            raise DomainError(f"unknown family {self.name!r}; choose from {', '.join(self.GENERATORS)}")

    @property
    def deterministic(self) -> bool:
        return self.name in ("ring", "apollonian") or (self.name == "smallworld" and self.params.get("p", 0) == 0)

    def generate(self, size: int, seed=None) -> Graph:
        p = self.params
        if self.name == "ring":
            return graphs.ring_lattice(size, p.get("z", 4))
        if self.name == "er":
            return graphs.erdos_renyi(size, p.get("mean_degree", 4.0), seed)
        if self.name == "scalefree":
            return graphs.scale_free(size, p.get("gamma", 2.2), p.get("k_min", 2), seed)
        if self.name == "apollonian":
            return graphs.apollonian(size)
        return graphs.watts_strogatz(size, p.get("z", 4), p.get("p", 0.0), seed)


@dataclass(frozen=True)
class ScalingResult:
    sizes: list
    lambda_means: list
    lambda_stddevs: list
    exponent: float
    exponent_stderr: float
    intercept: float


def _realization_seed(seed, *keys):
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def fit_power_law(sizes, values) -> tuple[float, float, float]:
    """Least squares of log(value) on log(size): (exponent, stderr, intercept)."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if len(x) < 3:
        raise DomainError("need at least three sizes")
    if np.ptp(x) == 0:
        raise DomainError("degenerate fit: all sizes equal")
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.stderr), float(fit.intercept)


def scaling_study(family: NetworkFamily | Callable, sizes, realizations: int = 1, seed: int = 0,
                  workers: int | None = None, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER) -> ScalingResult:
    """Mean largest eigenvalue per size and its power-law fit in N.

    Realization r at size index s uses the RNG stream ``SeedSequence([seed, s, r])``,
    so results do not depend on ``workers``.
    """
    sizes = list(sizes)
    if len(sizes) < 3:
        raise DomainError("need at least three sizes")
    if realizations < 1:
        raise DomainError("realizations must be >= 1")
    gen = family.generate if isinstance(family, NetworkFamily) else family
    reps = 1 if isinstance(family, NetworkFamily) and family.deterministic else realizations
    jobs = [(s, r) for s in range(len(sizes)) for r in range(reps)]

    def run(job):
        s, r = job
        g = gen(sizes[s], _realization_seed(seed, s, r))
        return g.n_nodes, max_eigenvalue(g, tol=tol, max_iter=max_iter).lambda_max

    out = _map(run, jobs, workers)
    n_nodes, means, stds = [], [], []
    for s in range(len(sizes)):
        chunk = out[s * reps:(s + 1) * reps]
        lams = np.array([lam for _, lam in chunk])
        n_nodes.append(int(np.mean([n for n, _ in chunk])))
        means.append(float(lams.mean()))
        stds.append(float(lams.std()))
    a, err, b = fit_power_law(n_nodes, means)
    return ScalingResult(n_nodes, means, stds, a, err, b)


def small_world_lambda_curve(n: int, z: int, p_grid, realizations: int = 100, seed: int = 0,
                             workers: int | None = None, tol: float = DEFAULT_TOL,
                             max_iter: int = CURVE_MAX_ITER) -> list[tuple]:
    """Rows ``(p, mean lambda, std lambda)`` over Watts-Strogatz realizations."""
    p_grid = [float(p) for p in p_grid]
    if any(not 0.0 <= p <= 1.0 for p in p_grid):
        raise DomainError("p values must lie in [0, 1]")
    jobs = [(i, r) for i in range(len(p_grid)) for r in range(realizations)]

    def run(job):
        i, r = job
        g = graphs.watts_strogatz(n, z, p_grid[i], _realization_seed(seed, i, r))
        return max_eigenvalue(g, tol=tol, max_iter=max_iter).lambda_max

    out = np.array(_map(run, jobs, workers)).reshape(len(p_grid), realizations)
    return [(p, float(row.mean()), float(row.std())) for p, row in zip(p_grid, out)]


# ---------------------------------------------------------------- output

def write_scaling_csv(result: ScalingResult, fh, comments=()):
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["N", "lambda_mean", "lambda_std"])
    for n, m, s in zip(result.sizes, result.lambda_means, result.lambda_stddevs):
        w.writerow([n, repr(m), repr(s)])


def write_curve_csv(rows, fh, comments=()):
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["p", "lambda_mean", "lambda_std"])
    for p, m, s in rows:
        w.writerow([repr(p), repr(m), repr(s)])


def scaling_summary(result: ScalingResult, **extra) -> str:
    doc = {"schema": 1, **extra,
           "fit": {"exponent": result.exponent, "stderr": result.exponent_stderr, "intercept": result.intercept},
           "sizes": result.sizes, "lambda_mean": result.lambda_means, "lambda_std": result.lambda_stddevs}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
