"""Mean-field Mott/superfluid phase diagrams of the Jaynes-Cummings-Hubbard model.

The hopping term is decoupled into a local field, so each cavity sees

    H_i = eps s+s- + omega a+a + beta (s+ a + s- a+) - mu N - kappa eta_i (a + a+)

with ``eta_i = sum_j tau_ij psi_j`` and ``psi_i = <a_i>`` real and >= 0. The
local problem is diagonalized on the truncated basis ``|n, s>``,
``0 <= n <= n_trunc``, stored at index ``2n + s`` (s = 0 down, 1 up).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .cavity import CavityParams, ground_state_occupation, r_coefficient
from .errors import DegeneracyError, DomainError, TruncationError
from ._backend import kernels
from .graphs import Graph

TOP_WEIGHT_LIMIT = 1e-8
MAX_TRUNC = 96
_CHUNK = 2048


@dataclass(frozen=True)
class MeanFieldConfig:
    n_trunc: int = 12
    tol_psi: float = 1e-10
    max_iter: int = 10_000
    damping: float = 0.5
    psi_init: float = 0.1
    sf_threshold: float = 1e-6

    def __post_init__(self):
        if self.n_trunc < 2:
            raise DomainError("n_trunc must be >= 2")
        if not 0 < self.damping <= 1:
            raise DomainError("damping must lie in (0, 1]")
        if not self.sf_threshold > self.tol_psi:
            raise DomainError("sf_threshold must exceed tol_psi")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")


@dataclass(frozen=True)
class PhasePoint:
    mu_rel: float
    kappa_lambda: float
    order_param: float
    mott_n: Optional[int]
    converged: bool
    energy: float = math.nan
    note: str = ""

    @property
    def superfluid(self) -> bool:
        return self.mott_n is None


class LocalGroundState(NamedTuple):
    psi: float
    energy: float
    top_weight: float


# ------------------------------------------------------------ local problem

def _ground_batch(x, fields, delta, beta, n_trunc):
    """Ground state <a>, energy and top-level weight for each (omega - mu, field) pair."""
    return kernels.local_ground_states(np.asarray(x, dtype=float), np.asarray(fields, dtype=float),
                                       float(delta), float(beta), int(n_trunc))


def _check_params(p: CavityParams):
    if not p.omega - p.mu > 0:
        raise DomainError("need omega - mu > 0")


def local_ground_state(eta: float, kappa: float, p: CavityParams, n_trunc: int = 12) -> LocalGroundState:
    """Ground state of one cavity in the mean field ``kappa * eta``.

    Raises TruncationError when more than 1e-8 of the weight sits on the two
    highest photon levels.
    """
    if n_trunc < 2:
        raise DomainError("n_trunc must be >= 2")
    if eta < 0:
        raise DomainError("eta must be >= 0 (gauge choice)")
    _check_params(p)
    psi, e, top = _ground_batch([p.omega - p.mu], [kappa * eta], p.delta, p.beta, n_trunc)
    if top[0] > TOP_WEIGHT_LIMIT:
        raise TruncationError(f"top photon levels carry weight {top[0]:.3g}; retry with larger n_trunc",
                              top_weight=float(top[0]), n_trunc=n_trunc)
    # without a field N is conserved and <a> vanishes identically
    value = 0.0 if kappa * eta == 0 else float(psi[0])
    return LocalGroundState(value, float(e[0]), float(top[0]))


def response_slope(p: CavityParams, n_trunc: int = 12, step: float = 1e-7) -> float:
    """Central finite difference of <a> with respect to the field kappa*eta at zero."""
    _check_params(p)
    psi, _, top = _ground_batch([p.omega - p.mu] * 2, [step, -step], p.delta, p.beta, n_trunc)
    if np.any(top > TOP_WEIGHT_LIMIT):
        raise TruncationError("truncated basis too small for the response", n_trunc=n_trunc)
    return float((psi[0] - psi[1]) / (2 * step))


# ------------------------------------------------------------ perturbative line

def critical_hopping(mu_rel: float, p: CavityParams, lam: float) -> float:
    """kappa_c = 1 / (lambda * R_n) at the given (mu - omega)/beta."""
    q = p.with_mu_rel(mu_rel)
    _check_params(q)
    n = ground_state_occupation(q)
    return 1.0 / (lam * r_coefficient(n, q))


class CriticalPoint(NamedTuple):
    mu_rel: float
    n: int
    kappa_lambda: float
    degenerate: bool


def critical_line(p: CavityParams, lam: float, mu_grid) -> list[CriticalPoint]:
    """Lobe index and kappa_c*Lambda/beta per grid value; boundary points flagged degenerate.

    ``lam`` only fixes the units of kappa_c; the product kappa_c*Lambda is returned.
    """
    rows = []
    for m in mu_grid:
        q = p.with_mu_rel(float(m))
        _check_params(q)
        n = ground_state_occupation(q)
        try:
            kl = 1.0 / r_coefficient(n, q) / p.beta
            rows.append(CriticalPoint(float(m), n, kl, False))
        except DegeneracyError:
            rows.append(CriticalPoint(float(m), n, math.nan, True))
    return rows


def tight_binding_instability(p: CavityParams, lam: float, kappa: float) -> bool:
    return kappa * lam > p.omega - p.mu


# ------------------------------------------------------------ self-consistency

class _BatchResult(NamedTuple):
    psi: np.ndarray
    energy: np.ndarray
    converged: np.ndarray
    truncated: np.ndarray


def _iterate_uniform(x, fields_scale, delta, beta, cfg: MeanFieldConfig, n_trunc) -> _BatchResult:
    """Damped iteration psi <- (1-a) psi + a F(psi) for many independent points.

    ``fields_scale`` is kappa*Lambda per point, so the local field is
    ``fields_scale * psi``.
    """
    x = np.asarray(x, dtype=float)
    kl = np.asarray(fields_scale, dtype=float)
    size = len(x)
    psi = np.full(size, cfg.psi_init)
    energy = np.full(size, math.nan)
    converged = np.zeros(size, dtype=bool)
    truncated = np.zeros(size, dtype=bool)

    free = kl == 0
    psi[free] = 0.0
    converged[free] = True

    active = np.flatnonzero(~free)
    alpha = cfg.damping
    for _ in range(cfg.max_iter):
        if len(active) == 0:
            break
        f, e, top = _ground_batch(x[active], kl[active] * psi[active], delta, beta, n_trunc)
        bad = top > TOP_WEIGHT_LIMIT
        truncated[active[bad]] = True
        new = (1 - alpha) * psi[active] + alpha * f
        done = (np.abs(new - psi[active]) < cfg.tol_psi) & ~bad
        psi[active[~bad]] = new[~bad]
        energy[active] = e
        converged[active[done]] = True
        active = active[~(done | bad)]

    if free.any():
        _, e, top = _ground_batch(x[free], np.zeros(int(free.sum())), delta, beta, n_trunc)
        energy[free] = e
        # deep Mott states can outgrow the basis even without a field
        truncated[free] = top > TOP_WEIGHT_LIMIT
    # constant mean-field term kappa * Lambda * psi^2 per site
    energy = energy + kl * psi**2
    return _BatchResult(psi, energy, converged, truncated)


def _solve_adaptive(x, kl, delta, beta, cfg):
    """Run the batch, retrying truncated points with doubled n_trunc up to MAX_TRUNC.

    Points past the tight-binding instability (kappa*Lambda > omega - mu) have
    an unbounded order parameter and are not retried.
    """
    size = len(x)
    unstable = kl > x
    psi = np.zeros(size)
    energy = np.full(size, math.nan)
    converged = np.zeros(size, dtype=bool)
    truncated = np.zeros(size, dtype=bool)
    todo = np.arange(size)
    n_trunc = cfg.n_trunc
    while len(todo):
        for start in range(0, len(todo), _CHUNK):
            idx = todo[start:start + _CHUNK]
            r = _iterate_uniform(x[idx], kl[idx], delta, beta, cfg, n_trunc)
            psi[idx], energy[idx] = r.psi, r.energy
            converged[idx], truncated[idx] = r.converged, r.truncated
        todo = np.flatnonzero(truncated & ~unstable)
        if n_trunc >= MAX_TRUNC:
            break
        n_trunc = min(2 * n_trunc, MAX_TRUNC)
    return psi, energy, converged, truncated


def uniform_self_consistent(kappa_lambda: float, p: CavityParams, cfg: MeanFieldConfig = MeanFieldConfig()) -> PhasePoint:
    """Order parameter of the uniform (Lambda-mode) mean-field solution.

    ``kappa_lambda`` is kappa*Lambda in energy units.
    """
    _check_params(p)
    psi, energy, conv, trunc = _solve_adaptive(np.array([p.omega - p.mu]), np.array([kappa_lambda]),
                                               p.delta, p.beta, cfg)
    if trunc[0]:
        raise TruncationError(f"order parameter grows beyond n_trunc={MAX_TRUNC} (psi={psi[0]:.4g})",
                              psi=float(psi[0]), n_trunc=MAX_TRUNC)
    return _classify(p, p.mu_rel, kappa_lambda / p.beta, float(psi[0]), bool(conv[0]), float(energy[0]), cfg)


def _classify(p, mu_rel, kl_rel, psi, converged, energy, cfg, note=""):
    if not converged and not note:
        note = "max_iter"
    if psi >= cfg.sf_threshold or note == "truncation":
        return PhasePoint(mu_rel, kl_rel, psi, None, converged, energy, note)
    return PhasePoint(mu_rel, kl_rel, psi, ground_state_occupation(p.with_mu_rel(mu_rel)), converged, energy, note)


@dataclass(frozen=True)
class NetworkSolution:
    psi: np.ndarray
    superfluid: bool
    converged: bool
    iterations: int
    n_trunc: int


def network_self_consistent(g: Graph, kappa: float, p: CavityParams,
                            cfg: MeanFieldConfig = MeanFieldConfig()) -> NetworkSolution:
    """Site-resolved mean field with simultaneous (Jacobi) updates of every psi_i."""
    _check_params(p)
    adj = g.adjacency()
    n_trunc = cfg.n_trunc
    while True:
        x = np.full(g.n_nodes, p.omega - p.mu)
        psi = np.full(g.n_nodes, 0.0 if kappa == 0 else cfg.psi_init)
        converged, bad_sites = kappa == 0, None
        it = 0
        while not converged and it < cfg.max_iter:
            it += 1
            eta = adj @ psi
            f, _, top = _ground_batch(x, kappa * eta, p.delta, p.beta, n_trunc)
            if np.any(top > TOP_WEIGHT_LIMIT):
                bad_sites = np.flatnonzero(top > TOP_WEIGHT_LIMIT)
                break
            f[eta == 0] = 0.0
            new = (1 - cfg.damping) * psi + cfg.damping * f
            converged = bool(np.max(np.abs(new - psi)) < cfg.tol_psi)
            psi = new
        if bad_sites is None:
            break
        if n_trunc >= MAX_TRUNC:
            raise TruncationError(f"sites {bad_sites[:10].tolist()} exceed n_trunc={MAX_TRUNC}",
                                  psi=float(psi.max()), n_trunc=n_trunc)
        n_trunc = min(2 * n_trunc, MAX_TRUNC)
    return NetworkSolution(psi, bool(psi.max(initial=0.0) >= cfg.sf_threshold), converged, it, n_trunc)


# ------------------------------------------------------------ phase diagrams

@dataclass
class PhaseDiagram:
    """Grid over (mu - omega)/beta (rows) and kappa*Lambda/beta (columns)."""

    mu_grid: np.ndarray
    kappa_grid: np.ndarray
    order_param: np.ndarray
    mott_n: np.ndarray          # -1 where superfluid
    converged: np.ndarray
    notes: np.ndarray
    params: CavityParams
    lam: float
    config: MeanFieldConfig
    boundary: list = field(default_factory=list)

    @property
    def superfluid(self) -> np.ndarray:
        return self.mott_n < 0

    def point(self, i: int, j: int) -> PhasePoint:
        n = int(self.mott_n[i, j])
        return PhasePoint(float(self.mu_grid[i]), float(self.kappa_grid[j]), float(self.order_param[i, j]),
                          None if n < 0 else n, bool(self.converged[i, j]), note=str(self.notes[i, j]))


def _validate_mu_grid(p, mu_grid):
    bad = [float(m) for m in mu_grid if not p.omega - p.with_mu_rel(float(m)).mu > 0]
    if bad:
        raise DomainError(f"mu_rel values {bad} violate omega - mu > 0")


def phase_diagram(p: CavityParams, lam: float, mu_grid, kappa_grid, cfg: MeanFieldConfig = MeanFieldConfig(),
                  numeric: bool = True) -> PhaseDiagram:
    """Numerical (uniform mean-field) phase map plus the perturbative boundary.

    Points whose order parameter outgrows the largest truncation (beyond the
    tight-binding instability) are reported superfluid with note 'truncation'.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    kappa_grid = np.asarray(kappa_grid, dtype=float)
    if mu_grid.size == 0 or kappa_grid.size == 0:
        raise DomainError("grids must be nonempty")
    _validate_mu_grid(p, mu_grid)
    shape = (len(mu_grid), len(kappa_grid))
    boundary = critical_line(p, lam, mu_grid)
    psi = np.full(shape, math.nan)
    mott = np.full(shape, -1, dtype=np.int64)
    conv = np.zeros(shape, dtype=bool)
    notes = np.full(shape, "", dtype=object)
    if numeric:
        mm, kk = np.meshgrid(mu_grid, kappa_grid, indexing="ij")
        x = -mm.ravel() * p.beta
        res_psi, _, res_conv, res_trunc = _solve_adaptive(x, kk.ravel() * p.beta, p.delta, p.beta, cfg)
        occ = {i: ground_state_occupation(p.with_mu_rel(float(m))) for i, m in enumerate(mu_grid)}
        for flat in range(mm.size):
            i, j = divmod(flat, shape[1])
            note = "truncation" if res_trunc[flat] else ("" if res_conv[flat] else "max_iter")
            psi[i, j] = res_psi[flat]
            conv[i, j] = res_conv[flat] and not res_trunc[flat]
            notes[i, j] = note
            if res_psi[flat] < cfg.sf_threshold and not res_trunc[flat]:
                mott[i, j] = occ[i]
    return PhaseDiagram(mu_grid, kappa_grid, psi, mott, conv, notes, p, float(lam), cfg, boundary)


# ------------------------------------------------------------ output

PHASE_HEADER = ("mu_rel", "kappa_lambda", "phase", "order_param", "mott_n", "converged")


def write_phase_csv(d: PhaseDiagram, fh, comments=()):
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(PHASE_HEADER)
    for i, m in enumerate(d.mu_grid):
        for j, k in enumerate(d.kappa_grid):
            n = int(d.mott_n[i, j])
            w.writerow([repr(float(m)), repr(float(k)), "SF" if n < 0 else "MI",
                        repr(float(d.order_param[i, j])), "" if n < 0 else n,
                        "true" if d.converged[i, j] else "false"])


def write_boundary_csv(rows, fh, comments=()):
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["mu_rel", "mott_n", "kappa_lambda_c", "degenerate"])
    for r in rows:
        w.writerow([repr(r.mu_rel), r.n, "" if r.degenerate else repr(r.kappa_lambda),
                    "true" if r.degenerate else "false"])


def _finite(v):
    return None if v is None or (isinstance(v, float) and not math.isfinite(v)) else v


def phase_sidecar(d: PhaseDiagram, **extra) -> str:
    doc = {
        "schema": 1,
        **extra,
        "params": {"omega": d.params.omega, "epsilon": d.params.epsilon, "beta": d.params.beta,
                   "delta": d.params.delta},
        "lambda": d.lam,
        "config": asdict(d.config),
        "mu_grid": [float(m) for m in d.mu_grid],
        "kappa_grid": [float(k) for k in d.kappa_grid],
        "boundary": [{"mu_rel": r.mu_rel, "mott_n": r.n, "kappa_lambda_c": _finite(r.kappa_lambda),
                      "degenerate": r.degenerate} for r in d.boundary],
        "flags": {"not_converged": int((~d.converged).sum()),
                  "truncation": int((d.notes == "truncation").sum())},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
