"""Closed-form separation thresholds, location error bounds and the factorial inequalities behind them."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import mpmath

from .errors import DomainError
from .vandermonde import lam, xi

__all__ = [
    "BoundReport",
    "noise_ratio",
    "threshold_1d_wrapped",
    "threshold_1d_euclidean",
    "threshold_2d",
    "error_constant",
    "location_error_bound",
    "bound_report",
    "verify_combinatorial_lemmas",
]

WRAPPED_CONST = 2.2
EUCLID_CONST = 4.4
MODES = ("1d-wrapped", "1d-euclidean", "2d")
# separations computed from coordinates land within rounding of the threshold
HYPOTHESIS_RTOL = 1e-9


def _check_common(n, omega, sigma, m_min, sigma_inf):
    if n < 1:
        raise DomainError("n must be >= 1")
    if not omega > 0:
        raise DomainError("omega must be positive")
    if sigma < 0 or not m_min > 0 or not sigma_inf > 0:
        raise DomainError("need sigma >= 0, m_min > 0, sigma_inf > 0")


def noise_ratio(sigma: float, m_min: float, sigma_inf: float) -> float:
    """``(1 / sigma_inf) * (sigma / m_min)``; every guarantee needs this <= 1."""
    return sigma / (m_min * sigma_inf)


def threshold_1d_wrapped(n, omega, sigma, m_min, sigma_inf) -> float:
    """Minimum separation for stable recovery on the circle of length ``n pi / omega``."""
    _check_common(n, omega, sigma, m_min, sigma_inf)
    return WRAPPED_CONST * math.e * math.pi / omega * noise_ratio(sigma, m_min, sigma_inf) ** (1 / n)


def threshold_1d_euclidean(n, omega, sigma, m_min, sigma_inf, c0=1.0) -> float:
    """Minimum separation on an interval of length ``c0 n pi / omega``."""
    _check_common(n, omega, sigma, m_min, sigma_inf)
    if not c0 >= 1:
        raise DomainError("c0 must be >= 1")
    return EUCLID_CONST * c0 * math.e * math.pi / omega * noise_ratio(sigma, m_min, sigma_inf) ** (1 / n)


def threshold_2d(n, omega, sigma, m_min, sigma_inf, c0=1.0) -> float:
    """Minimum separation in a disk of radius ``c0 n pi / omega``; ``n >= 2``."""
    if n < 2:
        raise DomainError("the 2D threshold is stated for n >= 2")
    _check_common(n, omega, sigma, m_min, sigma_inf)
    if not c0 >= 1:
        raise DomainError("c0 must be >= 1")
    return (WRAPPED_CONST * c0 * math.e * math.pi * (n + 1) * (n + 2) / omega
            * noise_ratio(sigma, m_min, sigma_inf) ** (1 / n))


def _log_error_constant(mode, n, c0):
    # log C(n); e^n and the powers overflow floats well before n = 100
    base = math.log(math.sqrt(2 * math.pi) * n) + n
    if mode == "1d-wrapped":
        return math.log(2) + base
    if mode == "1d-euclidean":
        return n * math.log(2) + (n - 1) * math.log(c0) + base
    if mode == "2d":
        return n * math.log((n + 1) * (n + 2)) + (n - 1) * math.log(c0) + base
    raise DomainError(f"unknown mode {mode!r}")


def error_constant(mode: str, n: int, c0: float = 1.0) -> float:
    return math.exp(_log_error_constant(mode, n, c0))


def _threshold(mode, n, omega, sigma, m_min, sigma_inf, c0):
    if mode == "1d-wrapped":
        return threshold_1d_wrapped(n, omega, sigma, m_min, sigma_inf)
    if mode == "1d-euclidean":
        return threshold_1d_euclidean(n, omega, sigma, m_min, sigma_inf, c0)
    if mode == "2d":
        return threshold_2d(n, omega, sigma, m_min, sigma_inf, c0)
    raise DomainError(f"unknown mode {mode!r}")


def location_error_bound(mode, n, omega, d_min, sigma, m_min, sigma_inf, c0=1.0) -> float:
    """``(C(n) / omega) SRF^(n-1) (sigma / m_min) / sigma_inf``, ``SRF = pi / (omega d_min)``.

    Returns ``inf`` when the separation or noise-ratio hypothesis fails.
    """
    _check_common(n, omega, sigma, m_min, sigma_inf)
    if not d_min > 0:
        raise DomainError("d_min must be positive")
    ratio = noise_ratio(sigma, m_min, sigma_inf)
    if ratio > 1 or d_min < _threshold(mode, n, omega, sigma, m_min, sigma_inf, c0) * (1 - HYPOTHESIS_RTOL):
        return math.inf
    if sigma == 0:
        return 0.0
    srf = math.pi / (omega * d_min)
    log_b = (_log_error_constant(mode, n, c0) - math.log(omega)
             + (n - 1) * math.log(srf) + math.log(ratio))
    return math.exp(log_b)


@dataclass(frozen=True)
class BoundReport:
    mode: str
    n: int
    omega: float
    sigma: float
    m_min: float
    sigma_inf: float
    c0: float
    d_min: float | None
    threshold: float
    srf: float | None
    location_error_bound: float | None
    constant_C: float
    vacuous: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        rows = [(k, v) for k, v in self.to_dict().items()]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{w}}  {v}" for k, v in rows)


def bound_report(mode, n, omega, sigma, m_min, sigma_inf, c0=1.0, d_min=None) -> BoundReport:
    thr = _threshold(mode, n, omega, sigma, m_min, sigma_inf, c0)
    vacuous = noise_ratio(sigma, m_min, sigma_inf) > 1
    srf = err = None
    if d_min is not None:
        srf = math.pi / (omega * d_min)
        err = location_error_bound(mode, n, omega, d_min, sigma, m_min, sigma_inf, c0)
        vacuous = vacuous or math.isinf(err)
    return BoundReport(mode, n, omega, sigma, m_min, sigma_inf, c0, d_min, thr, srf, err,
                       error_constant(mode, n, c0), vacuous)


def verify_combinatorial_lemmas(n_max: int = 50, dps: int = 60) -> dict:
    """Check the two root inequalities and two-sided Stirling up to ``n_max``.

    Factorials are exact Python integers; roots and exponentials go through
    mpmath at ``dps`` digits. Returns per-family lists of failing ``n``
    (empty means every check held) and a ``passed`` flag.
    """
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    fails = {"number_root": [], "support_root": [], "stirling_lower": [], "stirling_upper": []}
    with mpmath.workdps(dps):
        limit = mpmath.mpf("4.4") * mpmath.e
        for n in range(2, n_max + 1):
            x = xi(n - 1)
            v = (2 * mpmath.sqrt(n) * mpmath.mpf(n) ** (n - 1) * x.denominator / x.numerator) ** (mpmath.mpf(1) / (n - 1))
            if not v < limit:
                fails["number_root"].append(n)
            lm = lam(n)
            v = (8 * mpmath.sqrt(n) * mpmath.mpf(n) ** n * lm.denominator / lm.numerator) ** (mpmath.mpf(1) / n)
            if not v < limit:
                fails["support_root"].append(n)
        for n in range(1, n_max + 1):
            f = mpmath.mpf(math.factorial(n))
            # ratio n! e^n / n^(n + 1/2) must lie in [sqrt(2 pi), e]
            r = f * mpmath.exp(n) / mpmath.mpf(n) ** (n + mpmath.mpf(1) / 2)
            if not r >= mpmath.sqrt(2 * mpmath.pi):
                fails["stirling_lower"].append(n)
            if not r <= mpmath.e * (1 + mpmath.mpf(10) ** (-dps + 5)):
                fails["stirling_upper"].append(n)
    return {"n_max": n_max, **fails, "passed": not any(fails.values())}
