"""Single-cavity Jaynes-Cummings spectrum and perturbative response coefficients.

Energies are in units with hbar = 1. The dressed doublet of the n-polariton
sector is

    |n,->  = cos(theta_n)|n,down> - sin(theta_n)|n-1,up>
    |n,+>  = sin(theta_n)|n,down> + cos(theta_n)|n-1,up>

with ``theta_n`` taken on the continuous branch in (0, pi/2) so that ``|n,->``
is always the lower level.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import DegeneracyError, DomainError, UnboundedOccupationError

LOWER = "-"
UPPER = "+"
BRANCHES = (LOWER, UPPER)

_DEGENERACY_EPS = 1e-12


@dataclass(frozen=True)
class CavityParams:
    """Photon frequency, atomic frequency, coupling and chemical potential."""

    omega: float
    epsilon: float
    beta: float
    mu: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"coupling beta must be > 0, got {self.beta}")

    @property
    def delta(self) -> float:
        return self.epsilon - self.omega

    @property
    def mu_rel(self) -> float:
        """(mu - omega)/beta, the sweep variable used by phase diagrams."""
        return (self.mu - self.omega) / self.beta

    @classmethod
    def dimensionless(cls, delta: float, mu_rel: float, beta: float = 1.0, omega: float = 1.0) -> "CavityParams":
        """Build from detuning and (mu - omega) both measured in units of beta."""
        return cls(omega=omega, epsilon=omega + delta * beta, beta=beta, mu=omega + mu_rel * beta)

    def with_mu_rel(self, mu_rel: float) -> "CavityParams":
        return CavityParams(self.omega, self.epsilon, self.beta, self.omega + mu_rel * self.beta)


@dataclass(frozen=True)
class DressedLevel:
    n: int
    branch: Optional[str]
    energy: float
    theta: Optional[float]


def _check_branch(branch):
    if branch in (-1, LOWER):
        return LOWER
    if branch in (1, UPPER):
        return UPPER
    raise DomainError(f"branch must be '-' or '+', got {branch!r}")


def mixing_angle(n: int, p: CavityParams) -> float:
    """Dressed-state mixing angle with tan(2 theta) = 2 beta sqrt(n) / delta."""
    if n < 1:
        raise DomainError("the vacuum (n = 0) has no mixing angle")
    delta = p.delta
    if delta == 0:
        return math.pi / 4
    return 0.5 * math.atan2(2.0 * p.beta * math.sqrt(n), delta)


def dressed_energy(n: int, branch, p: CavityParams, grand_canonical: bool = False) -> float:
    """E(n, +/-), or E^mu(n, +/-) when ``grand_canonical`` (omega -> omega - mu)."""
    if n < 0:
        raise DomainError(f"polariton number must be >= 0, got {n}")
    if n == 0:
        if branch is not None:
            raise DomainError("the vacuum level carries no branch")
        return 0.0
    sign = 1.0 if _check_branch(branch) == UPPER else -1.0
    w = p.omega - p.mu if grand_canonical else p.omega
    d = p.delta
    return w * n + 0.5 * d + sign * math.sqrt(n * p.beta**2 + 0.25 * d * d)


def dressed_level(n: int, branch, p: CavityParams) -> DressedLevel:
    """Grand-canonical level with its mixing angle."""
    if n == 0:
        return DressedLevel(0, None, dressed_energy(0, branch, p, True), None)
    branch = _check_branch(branch)
    return DressedLevel(n, branch, dressed_energy(n, branch, p, True), mixing_angle(n, p))


def degeneracy_point(n: int, delta: float, beta: float) -> float:
    """omega/beta at which E(n,-) = E(n+1,-)."""
    if n < 1:
        raise DomainError(f"degeneracy points are defined for n >= 1, got {n}")
    if not beta > 0:
        raise DomainError("beta must be > 0")
    d2 = (delta / (2.0 * beta)) ** 2
    # difference of square roots written without cancellation
    return 1.0 / (math.sqrt(n + 1 + d2) + math.sqrt(n + d2))


def vacuum_degeneracy_point(delta: float, beta: float) -> float:
    """omega/beta at which E(1,-) = 0 = E_0."""
    if not beta > 0:
        raise DomainError("beta must be > 0")
    h = delta / (2.0 * beta)
    return math.sqrt(h * h + 1.0) - h


def occupation_search_limit(p: CavityParams) -> int:
    w = p.omega - p.mu
    if not w > 0:
        raise UnboundedOccupationError("chemical potential reaches photon frequency; polariton number diverges")
    return math.ceil((p.beta / w) ** 2) + 2


def ground_state_occupation(p: CavityParams) -> int:
    """Polariton number of the single-cavity grand-canonical ground state.

    Ties go to the smaller n.
    """
    n_stop = occupation_search_limit(p)
    best_n, best_e = 0, 0.0
    for n in range(1, n_stop + 1):
        e = dressed_energy(n, LOWER, p, grand_canonical=True)
        if e < best_e:
            best_n, best_e = n, e
    return best_n


def _ratio(num2, denom, scale):
    if abs(denom) < _DEGENERACY_EPS * scale:
        raise DegeneracyError("vanishing energy denominator: point lies on a lobe boundary")
    return num2 / denom


def r_coefficient(n: int, p: CavityParams) -> float:
    """Linear response of <a> to the mean field in the n-polariton Mott state.

    ``<a> = R_n * kappa * eta`` to first order, where ``eta`` is the summed
    neighbour order parameter.
    """
    if n < 0:
        raise DomainError(f"polariton number must be >= 0, got {n}")
    occupation_search_limit(p)  # validates omega - mu > 0
    b = p.beta

    def energy(k, branch):
        return dressed_energy(k, branch, p, grand_canonical=True)

    if n == 0:
        t1 = mixing_angle(1, p)
        return (_ratio(math.cos(t1) ** 2, energy(1, LOWER), b)
                + _ratio(math.sin(t1) ** 2, energy(1, UPPER), b))

    t = mixing_angle(n, p)
    c, s = math.cos(t), math.sin(t)
    e_n = energy(n, LOWER)

    tp = mixing_angle(n + 1, p)
    cp, sp = math.cos(tp), math.sin(tp)
    up_lower = math.sqrt(n + 1) * c * cp + math.sqrt(n) * s * sp
    up_upper = math.sqrt(n + 1) * c * sp - math.sqrt(n) * s * cp
    total = (_ratio(up_lower**2, e_n - energy(n + 1, LOWER), b)
             + _ratio(up_upper**2, e_n - energy(n + 1, UPPER), b))

    if n == 1:
        # the n-1 = 0 sector holds only the vacuum, <0|a|1,-> = cos(theta_1)
        total += _ratio(c * c, e_n, b)
    else:
        tm = mixing_angle(n - 1, p)
        cm, sm = math.cos(tm), math.sin(tm)
        down_lower = math.sqrt(n) * c * cm + math.sqrt(n - 1) * s * sm
        down_upper = math.sqrt(n) * c * sm - math.sqrt(n - 1) * s * cm
        total += (_ratio(down_lower**2, e_n - energy(n - 1, LOWER), b)
                  + _ratio(down_upper**2, e_n - energy(n - 1, UPPER), b))
    return -total


def anharmonic_spectrum(n_max: int, delta_grid: Iterable[float], p: CavityParams) -> list[tuple]:
    """Rows ``(n, branch, delta, E(n,+/-) - n*omega)`` ordered by (n, branch, delta).

    Only ``p.beta`` is used; the rescaled energy does not depend on omega.
    """
    deltas = sorted(float(d) for d in delta_grid)
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    if not deltas:
        raise DomainError("delta grid is empty")
    rows = []
    for n in range(1, n_max + 1):
        for branch in BRANCHES:
            sign = 1.0 if branch == UPPER else -1.0
            for d in deltas:
                rows.append((n, branch, d, 0.5 * d + sign * math.sqrt(n * p.beta**2 + 0.25 * d * d)))
    return rows


SPECTRUM_HEADER = ("n", "branch", "delta", "energy_rescaled")


def write_spectrum_csv(rows, fh, comments=()):
    for line in comments:
        fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SPECTRUM_HEADER)
    for n, branch, d, e in rows:
        writer.writerow([n, branch, repr(float(d)), repr(float(e))])
