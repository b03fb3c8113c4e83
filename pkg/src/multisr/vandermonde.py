"""Vandermonde vectors, eta-products and numeric checks of the approximation lemmas.

Angles are reals read modulo ``2 pi``; nodes on the unit circle are
``exp(i theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize

from .errors import CertificationError, DomainError, PreconditionError, RankDeficiencyError
from .incoherence import sigma_inf_min
from .measure import wrapped_distance

__all__ = [
    "phi",
    "eta",
    "zeta",
    "xi",
    "lam",
    "min_angle_gap",
    "complement_vector",
    "projection_distance",
    "approx_residual",
    "worst_case_approx_lower_bound",
    "EtaCheckReport",
    "eta_lower_bound_check",
    "MatchingReport",
    "stability_inversion",
    "pair_perturbation_decreases",
    "eta_certificate",
]

TWO_PI = 2 * np.pi


def phi(s: int, z) -> np.ndarray:
    """Moment vector ``(1, z, ..., z^s)``."""
    if s < 0:
        raise DomainError("degree must be nonnegative")
    return np.power(complex(z), np.arange(s + 1))


def eta(z, zhat) -> np.ndarray:
    """``eta[j] = prod_m |z_j - zhat_m|``."""
    z = np.atleast_1d(np.asarray(z, complex))
    zhat = np.atleast_1d(np.asarray(zhat, complex))
    if z.size < 1 or zhat.size < 1:
        raise DomainError("eta needs at least one node on each side")
    return np.prod(np.abs(z[:, None] - zhat[None, :]), axis=1)


# factorial constants, kept exact until the caller asks for a float

def zeta(k: int) -> Fraction:
    if k < 1:
        raise DomainError("zeta is defined for k >= 1")
    if k % 2:
        return Fraction(math.factorial((k - 1) // 2) ** 2)
    return Fraction(math.factorial(k // 2) * math.factorial((k - 2) // 2))


def xi(k: int) -> Fraction:
    if k < 1:
        raise DomainError("xi is defined for k >= 1")
    if k == 1:
        return Fraction(1, 2)
    if k % 2:
        return Fraction(math.factorial((k - 1) // 2) * math.factorial((k - 3) // 2), 4)
    return Fraction(math.factorial((k - 2) // 2) ** 2, 4)


def lam(k: int) -> Fraction:
    if k < 2:
        raise DomainError("lambda is defined for k >= 2")
    return Fraction(1) if k == 2 else xi(k - 2)


def min_angle_gap(theta) -> float:
    """Smallest pairwise distance modulo ``2 pi``."""
    theta = np.atleast_1d(np.asarray(theta, float))
    if theta.size < 2:
        raise DomainError("need at least two angles")
    d = wrapped_distance(theta[:, None], theta[None, :], TWO_PI)
    iu = np.triu_indices(theta.size, 1)
    return float(np.min(d[iu]))


def _columns(theta_hat, degree):
    z = np.exp(1j * np.asarray(theta_hat, float))
    return np.power(z[None, :], np.arange(degree + 1)[:, None])


def complement_vector(theta_hat, degree: int | None = None, seed: int = 0) -> np.ndarray:
    """Unit vector orthogonal to ``phi_degree(exp(i theta_hat_j))`` for all ``j``.

    Modified Gram-Schmidt (two passes) on the columns, then the same for a
    random vector against the resulting basis. ``degree`` defaults to
    ``len(theta_hat)``, where the complement is one-dimensional.
    """
    theta_hat = np.atleast_1d(np.asarray(theta_hat, float))
    k = theta_hat.size
    degree = k if degree is None else degree
    if k < 1 or degree < k:
        raise DomainError("need 1 <= len(theta_hat) <= degree")
    if k > 1 and min_angle_gap(theta_hat) < 1e-12:
        raise RankDeficiencyError("repeated candidate node")
    cols = _columns(theta_hat, degree)
    Q = np.zeros((degree + 1, k), complex)
    for j in range(k):
        u = cols[:, j].copy()
        for _ in range(2):
            for i in range(j):
                u -= np.vdot(Q[:, i], u) * Q[:, i]
        nu = np.linalg.norm(u)
        if nu < 1e-12 * np.linalg.norm(cols[:, j]):
            raise RankDeficiencyError("Vandermonde columns are numerically dependent")
        Q[:, j] = u / nu
    rng = np.random.default_rng(seed)
    for _ in range(10):
        v = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        for _ in range(2):
            for i in range(k):
                v -= np.vdot(Q[:, i], v) * Q[:, i]
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            return v / nv
    raise RankDeficiencyError("could not complete the basis")  # pragma: no cover


def projection_distance(theta_hat, theta: float) -> float:
    """Distance from ``phi_k(exp(i theta))`` to the span of the candidate columns."""
    v = complement_vector(theta_hat)
    target = phi(len(np.atleast_1d(theta_hat)), np.exp(1j * theta))
    return float(abs(np.vdot(v, target)))


def approx_residual(theta_hat, theta, B) -> float:
    """``max_t min_alpha ||Ahat alpha - A B[t]||_2`` with ``k = len(theta_hat)`` columns.

    ``A`` has columns ``phi_k(exp(i theta_j))``; ``B`` is ``T x len(theta)``.
    """
    theta_hat = np.atleast_1d(np.asarray(theta_hat, float))
    theta = np.atleast_1d(np.asarray(theta, float))
    B = np.atleast_2d(np.asarray(B, complex))
    v = complement_vector(theta_hat)
    proj = np.conj(v) @ _columns(theta, theta_hat.size)
    return float(np.max(np.abs(B @ proj)))


def worst_case_approx_lower_bound(theta, B, sigma_inf: float | None = None) -> float:
    """``sigma_inf(B) xi(k) theta_min^k / pi^k`` for ``k + 1 = len(theta)`` nodes."""
    theta = np.atleast_1d(np.asarray(theta, float))
    B = np.atleast_2d(np.asarray(B, complex))
    k = theta.size - 1
    if k < 1:
        raise DomainError("need at least two nodes")
    if B.shape[1] != k + 1:
        raise DomainError("B needs one column per node")
    gap = min_angle_gap(theta)
    if gap <= 0:
        raise DomainError("nodes must be distinct modulo 2 pi")
    if sigma_inf is None:
        sigma_inf = sigma_inf_min(B).value
    return float(sigma_inf * float(xi(k)) * (gap / np.pi) ** k)


@dataclass
class EtaCheckReport:
    k: int
    theta_min: float
    bound: float
    min_found: float
    starts: int
    violations: int
    argmin: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"k": self.k, "theta_min": self.theta_min, "bound": self.bound,
                "min_found": self.min_found, "starts": self.starts,
                "violations": self.violations, "argmin": self.argmin.tolist()}


def _interlaced_starts(theta):
    s = np.sort(np.mod(theta, TWO_PI))
    gaps = np.append(s[1:], s[0] + TWO_PI)
    mids = 0.5 * (s + gaps)
    # drop one gap at a time: k of the k+1 midpoints
    return [np.delete(mids, i) for i in range(mids.size)]


def eta_lower_bound_check(theta, trials: int = 200, seed: int = 0) -> EtaCheckReport:
    """Minimise ``max_j prod_m |e^{i theta_j} - e^{i theta_hat_m}|`` from many starts.

    Every start's local minimum is compared to ``xi(k) (2 theta_min / pi)^k``;
    the report counts the starts that fall below it.
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    k = theta.size - 1
    if k < 1:
        raise DomainError("need at least two nodes")
    gap = min_angle_gap(theta)
    if gap <= 0:
        raise DomainError("nodes must be distinct modulo 2 pi")
    bound = float(xi(k)) * (2 * gap / np.pi) ** k
    z = np.exp(1j * theta)

    def obj(th):
        return float(np.max(np.prod(np.abs(z[:, None] - np.exp(1j * th)[None, :]), axis=1)))

    rng = np.random.default_rng(seed)
    starts = _interlaced_starts(theta) + [rng.uniform(0, TWO_PI, k) for _ in range(trials)]
    best, best_x, bad = np.inf, None, 0
    for x0 in starts:
        res = minimize(obj, x0, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 400 * k})
        val = min(res.fun, obj(x0))
        if val < bound:
            bad += 1
        if val < best:
            best, best_x = val, np.mod(res.x, TWO_PI)
    return EtaCheckReport(k, gap, bound, float(best), len(starts), bad, best_x)


@dataclass
class MatchingReport:
    permutation: np.ndarray
    deviations: np.ndarray
    theta_min: float
    eta_norm: float
    coarse_bound: float
    fine_bound: float | None

    def to_dict(self) -> dict:
        return {"permutation": self.permutation.tolist(), "deviations": self.deviations.tolist(),
                "theta_min": self.theta_min, "eta_norm": self.eta_norm,
                "coarse_bound": self.coarse_bound, "fine_bound": self.fine_bound}


def stability_inversion(theta, theta_hat, eps: float) -> MatchingReport:
    """Match candidate angles to true ones when the eta-product is small.

    Checks the two hypotheses first (``PreconditionError`` names the one
    that fails), then returns ``permutation`` with ``theta_hat[permutation[j]]``
    close to ``theta[j]``. The deviation bound with the ``(k-2)!`` factor is
    only asserted for ``k >= 3``.
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    theta_hat = np.atleast_1d(np.asarray(theta_hat, float))
    k = theta.size
    if theta_hat.size != k:
        raise DomainError("theta and theta_hat must have equal length")
    if k < 2:
        raise DomainError("need k >= 2")
    if not eps > 0:
        raise DomainError("eps must be positive")
    gap = min_angle_gap(theta)
    eta_norm = float(np.max(eta(np.exp(1j * theta), np.exp(1j * theta_hat))))
    if not eta_norm < (2 / np.pi) ** k * eps:
        raise PreconditionError(f"eta norm {eta_norm:.3e} is not below (2/pi)^k eps = {(2 / np.pi) ** k * eps:.3e}")
    need = (4 * eps / float(lam(k))) ** (1 / k)
    if not gap >= need:
        raise PreconditionError(f"theta_min {gap:.3e} is below (4 eps / lambda(k))^(1/k) = {need:.3e}")

    cost = wrapped_distance(theta[:, None], theta_hat[None, :], TWO_PI)
    rows, cols = linear_sum_assignment(cost)
    perm = cols[np.argsort(rows)]
    dev = cost[np.arange(k), perm]
    coarse = gap / 2
    if not np.all(dev < coarse):
        raise CertificationError("no matching within theta_min / 2")
    fine = None
    if k >= 3:
        fine = 2 ** (k - 1) * eps / (math.factorial(k - 2) * gap ** (k - 1))
        if not np.all(dev < fine):
            raise CertificationError("matched deviation exceeds the quantitative bound")
    return MatchingReport(perm, dev, gap, eta_norm, coarse, fine)


def pair_perturbation_decreases(p: float, q: float, delta: float) -> bool:
    """Whether pushing ``p`` down and ``q`` up by ``delta`` shrinks ``|(1-e^{ip})(1-e^{iq})|``."""
    if not (0 < p <= q < min(p + np.pi, TWO_PI)):
        raise DomainError("need 0 < p <= q < min(p + pi, 2 pi)")
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    before = abs((1 - np.exp(1j * p)) * (1 - np.exp(1j * q)))
    after = abs((1 - np.exp(1j * (p - delta))) * (1 - np.exp(1j * (q + delta))))
    return bool(after < before)


def eta_certificate(theta, theta_hat, B, sigma: float, sigma_inf: float | None = None) -> dict:
    """Check ``||eta_{k,k}||_inf < 2^k sigma / sigma_inf(B)`` given a residual below ``sigma``.

    Returns a dict with the residual, the eta norm, the right-hand side and
    whether the hypothesis (residual < sigma) and the conclusion held.
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    theta_hat = np.atleast_1d(np.asarray(theta_hat, float))
    k = theta.size
    if theta_hat.size != k or k < 2:
        raise DomainError("need k >= 2 nodes on both sides")
    B = np.atleast_2d(np.asarray(B, complex))
    res = approx_residual(theta_hat, theta, B)
    if sigma_inf is None:
        sigma_inf = sigma_inf_min(B).value
    e = float(np.max(eta(np.exp(1j * theta), np.exp(1j * theta_hat))))
    rhs = 2 ** k * sigma / sigma_inf if sigma_inf > 0 else np.inf
    return {"residual": res, "eta_norm": e, "rhs": rhs,
            "hypothesis": res < sigma, "holds": (res >= sigma) or (e < rhs)}
