"""Worst-case pairs of measures that unknown illuminations cannot tell apart.

``mu`` sits at ``-tau, ..., -n tau`` and ``rho`` at ``0, tau, ..., (n-1) tau``;
per frame the amplitudes of ``rho`` are chosen so that the first ``n``
power moments of both illuminated measures agree, which leaves a
Fourier-domain difference of order ``(omega tau)^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificationError, DomainError
from .forward import nudft, uniform_grid
from .measure import DiscreteMeasure, IlluminationSet

__all__ = [
    "SPACING_CONST",
    "AdversarialInstance",
    "lagrange_row",
    "moment_match",
    "adversarial_spacing",
    "amplitude_sum_bound",
    "build_instance",
]

SPACING_CONST = 0.043


def lagrange_row(t_nodes, t: float) -> np.ndarray:
    """Cardinal polynomials of ``t_nodes`` evaluated at ``t``.

    ``out[j] = prod_{q != j} (t - t_q) / (t_j - t_q)``.
    """
    x = np.asarray(t_nodes, float)
    k = x.size
    if k < 1:
        raise DomainError("need at least one node")
    diff = x[:, None] - x[None, :]
    off = ~np.eye(k, dtype=bool)
    if np.any(diff[off] == 0):
        raise DomainError("nodes must be distinct")
    out = np.empty(k)
    for j in range(k):
        q = off[j]
        out[j] = np.prod((t - x[q]) / (x[j] - x[q]))
    return out


def _dot(row, vals, compensated):
    if not compensated:
        return complex(np.dot(row, vals))
    terms = row * vals
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def moment_match(weights, y_nodes, yhat_nodes, omega: float = 1.0, compensated: bool | None = None) -> np.ndarray:
    """Amplitudes on ``yhat_nodes`` whose moments ``k < n`` equal those of ``weights`` on ``y_nodes``.

    Moments are ``sum_j w_j (omega y_j)^k``. Because a polynomial of degree
    below ``n`` is reproduced by its cardinal interpolant,
    ``ahat_p = sum_j L_p(y_j) w_j`` with ``L_p`` the cardinal basis on
    ``yhat_nodes``. The scale ``omega`` cancels.
    """
    y = np.asarray(y_nodes, float)
    yh = np.asarray(yhat_nodes, float)
    w = np.asarray(weights, complex)
    if y.size != w.size:
        raise DomainError("one weight per node")
    if np.unique(yh).size != yh.size:
        raise DomainError("target nodes must be distinct")
    n = yh.size
    if compensated is None:
        compensated = n >= 4
    # rows[j, p] = L_p(y_j)
    rows = np.array([lagrange_row(yh, t) for t in y]).reshape(y.size, n)
    return np.array([_dot(rows[:, p], w, compensated) for p in range(n)])


def adversarial_spacing(n: int, omega: float, sigma: float, m_min: float) -> float:
    return SPACING_CONST / omega * (sigma / m_min) ** (1 / n)


def amplitude_sum_bound(n: int, m_min: float) -> float:
    """Cap on ``sum_j |ahat_{j,t}|`` when ``|I_t| <= 1`` and ``|a_j| = m_min``."""
    return math.e * 2 ** (3 * n - 0.5) / (math.pi ** 1.5 * (n - 1)) * n ** 2 * m_min


@dataclass
class AdversarialInstance:
    n: int
    omega: float
    sigma: float
    m_min: float
    tau: float
    mu: DiscreteMeasure
    rho: DiscreteMeasure
    matched_amplitudes: np.ndarray
    residuals: np.ndarray
    amplitude_sums: np.ndarray = field(default=None)

    @property
    def disjoint(self) -> bool:
        return bool(self.mu.locations.max() < 0 <= self.rho.locations.min())

    def to_dict(self) -> dict:
        a = self.matched_amplitudes
        return {
            "n": self.n, "omega": self.omega, "sigma": self.sigma, "m_min": self.m_min, "tau": self.tau,
            "mu": {"locations": self.mu.locations.tolist(),
                   "amplitudes_re": self.mu.amplitudes.real.tolist(),
                   "amplitudes_im": self.mu.amplitudes.imag.tolist()},
            "rho_locations": self.rho.locations.tolist(),
            "matched_amplitudes_re": a.real.tolist(),
            "matched_amplitudes_im": a.imag.tolist(),
            "residuals": self.residuals.tolist(),
        }


def build_instance(n: int, omega: float, sigma: float, m_min: float, illum: IlluminationSet,
                   phases=None, grid_size: int = 1024) -> AdversarialInstance:
    """Build and certify the pair for the given (unknown to the solver) illuminations.

    Raises ``CertificationError`` if some frame's grid-RMS difference is not
    below ``sigma``.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if not (sigma > 0 and m_min > 0 and sigma / m_min <= 1):
        raise DomainError("need 0 < sigma / m_min <= 1")
    if illum.bound() > 1 + 1e-12:
        raise DomainError("illumination patterns must be bounded by 1")
    tau = adversarial_spacing(n, omega, sigma, m_min)
    if not omega * tau < 0.05:
        raise CertificationError("omega * tau must stay below 0.05")
    phases = np.zeros(n) if phases is None else np.asarray(phases, float)
    a = m_min * np.exp(1j * phases)
    steps = np.arange(1, n + 1)
    mu = DiscreteMeasure(-steps * tau, a)
    rho_loc = (steps - 1) * tau
    I = illum.evaluate(mu.locations).reshape(illum.T, n)
    weights = I * a[None, :]
    # work in units of tau: the cardinal ratios are then exact small integers
    ahat = np.array([moment_match(w, -steps, steps - 1) for w in weights])
    # rho carries per-frame amplitudes; the measure itself records their largest modulus
    peak = np.max(np.abs(ahat), axis=0)
    rho = DiscreteMeasure(rho_loc, np.where(peak > 0, peak, m_min))
    grid = uniform_grid(omega, grid_size)
    diff = nudft(rho_loc, ahat, grid.nodes) - nudft(mu.locations, weights, grid.nodes)
    res = np.sqrt(np.mean(np.abs(diff) ** 2, axis=1))
    inst = AdversarialInstance(n, omega, sigma, m_min, tau, mu, rho, ahat, res,
                               np.sum(np.abs(ahat), axis=1))
    if not np.all(res < sigma):
        raise CertificationError(f"frame residual {res.max():.3e} is not below sigma = {sigma:.3e}")
    return inst
