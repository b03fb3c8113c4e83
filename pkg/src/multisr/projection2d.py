"""Reducing 2D localisation to 1D: direction fans, the two-projection inequality and pigeonhole matching."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, DomainError

__all__ = [
    "DirectionFan",
    "fan_angle",
    "select_directions",
    "projected_separation",
    "two_projection_bound",
    "pigeonhole_factor",
    "PigeonholeReport",
    "pigeonhole_match",
]


def fan_angle(n: int) -> float:
    """Half-spacing ``pi / ((n + 2)(n + 1))`` of the candidate directions."""
    if n < 2:
        raise DomainError("n must be >= 2")
    return math.pi / ((n + 2) * (n + 1))


@dataclass(frozen=True)
class DirectionFan:
    n: int
    delta: float
    theta: float
    candidates: np.ndarray
    selected_steps: tuple

    @property
    def selected(self) -> np.ndarray:
        return self.candidates[np.asarray(self.selected_steps) - 1]

    @property
    def N(self) -> int:
        return self.candidates.shape[0]

    def to_dict(self) -> dict:
        return {"n": self.n, "delta": self.delta, "theta": self.theta, "N": self.N,
                "selected_steps": list(self.selected_steps), "selected": self.selected.tolist()}


def _points(points) -> np.ndarray:
    p = np.asarray(points, float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise DomainError("points must have shape (n, 2)")
    return p


def select_directions(points) -> DirectionFan:
    """First ``n + 1`` fan directions that keep every pair of points apart after projection.

    Candidates are ``(cos s theta, sin s theta)`` for ``s = 1..floor(pi / theta)``
    with ``theta = 2 delta``; a candidate is dropped when
    ``|v . u| < |u| sin(delta)`` for some difference ``u = y_p - y_j``, ``p < j``.
    """
    pts = _points(points)
    n = pts.shape[0]
    delta = fan_angle(n)
    theta = 2 * delta
    N = int(math.floor(math.pi / theta + 1e-12))
    ang = theta * np.arange(1, N + 1)
    cand = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    iu = np.triu_indices(n, 1)
    u = pts[iu[0]] - pts[iu[1]]
    un = np.linalg.norm(u, axis=1)
    if np.any(un == 0):
        raise DomainError("points must be pairwise distinct")
    ok = np.all(np.abs(cand @ u.T) >= un[None, :] * math.sin(delta), axis=1)
    steps = tuple(int(s) for s in np.flatnonzero(ok)[: n + 1] + 1)
    if len(steps) < n + 1:
        raise CertificationError(f"only {len(steps)} admissible directions, need {n + 1}")
    return DirectionFan(n, delta, theta, cand, steps)


def projected_separation(points, v) -> float:
    """Smallest gap between the projections of ``points`` onto ``v``."""
    s = np.sort(_points(points) @ np.asarray(v, float))
    return float(np.min(np.diff(s)))


def two_projection_bound(u, v1, v2, theta: float | None = None) -> bool:
    """``(v1 . u)^2 + (v2 . u)^2 >= (1 - cos theta) |u|^2`` for unit ``v1, v2``.

    ``theta`` defaults to the angle between the lines of ``v1`` and ``v2``;
    when given, ``|v1 . v2| <= cos theta`` is required (the sign of ``v2``
    does not affect the projections).
    """
    u = np.asarray(u, float)
    v1 = np.asarray(v1, float)
    v2 = np.asarray(v2, float)
    for v in (v1, v2):
        if abs(np.linalg.norm(v) - 1) > 1e-9:
            raise DomainError("v1 and v2 must be unit vectors")
    c = abs(float(v1 @ v2))
    if theta is None:
        cos_t = c
    else:
        cos_t = math.cos(theta)
        if c > cos_t + 1e-12:
            raise DomainError("|v1 . v2| exceeds cos(theta)")
    lhs = float(v1 @ u) ** 2 + float(v2 @ u) ** 2
    rhs = (1 - cos_t) * float(u @ u)
    return lhs >= rhs * (1 - 1e-12) - 1e-300


def pigeonhole_factor(n: int, exact: bool = False) -> float:
    """Multiplier from a 1D deviation bound to a 2D one.

    ``sqrt(2 / (1 - cos 2 delta))`` when ``exact``; otherwise its closed-form
    cap ``(n + 2)(n + 1) / 2``.
    """
    delta = fan_angle(n)
    if exact:
        return math.sqrt(2 / (1 - math.cos(2 * delta)))
    return (n + 2) * (n + 1) / 2


@dataclass
class PigeonholeReport:
    assignment: np.ndarray        # recovered index for each truth atom
    direction_pairs: np.ndarray   # (n, 2) fan indices that agreed
    deviations: np.ndarray        # actual 2D distances
    derived_bounds: np.ndarray    # from the two agreeing 1D deviations
    formula_bound: float          # pigeonhole_factor * d1 bound
    within_half_separation: bool

    def to_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()}


def pigeonhole_match(truth, recovered, matchings, fan: DirectionFan, d1_error_bound: float) -> PigeonholeReport:
    """Turn ``n + 1`` one-dimensional matchings into a 2D matching.

    ``matchings[q][j]`` is the recovered index paired with truth ``j`` along
    fan direction ``q``. For each ``j`` two directions must agree on a
    recovered atom; the two 1D gaps along them bound the 2D distance.
    """
    y = _points(truth)
    yh = _points(recovered)
    n = y.shape[0]
    V = fan.selected
    M = np.asarray(matchings, int)
    if M.shape != (n + 1, n) or yh.shape[0] != n:
        raise DomainError("need n + 1 matchings of n atoms")
    cos_t = math.cos(fan.theta)
    assign = np.empty(n, int)
    pairs = np.empty((n, 2), int)
    derived = np.empty(n)
    for j in range(n):
        seen = {}
        hit = None
        for q in range(n + 1):
            p = M[q, j]
            if p in seen:
                hit = (seen[p], q, p)
                break
            seen[p] = q
        if hit is None:  # pragma: no cover - n + 1 labels over n values always repeat
            raise CertificationError("pigeonhole failed")
        q1, q2, p = hit
        g1 = abs(float(V[q1] @ (yh[p] - y[j])))
        g2 = abs(float(V[q2] @ (yh[p] - y[j])))
        assign[j] = p
        pairs[j] = (q1, q2)
        derived[j] = math.sqrt((g1 * g1 + g2 * g2) / (1 - cos_t))
    dev = np.linalg.norm(yh[assign] - y, axis=1)
    iu = np.triu_indices(n, 1)
    dmin = float(np.min(np.linalg.norm(y[iu[0]] - y[iu[1]], axis=1))) if n > 1 else math.inf
    ok = bool(np.unique(assign).size == n and np.all(dev < dmin / 2))
    return PigeonholeReport(assign, pairs, dev, derived, pigeonhole_factor(n) * d1_error_bound, ok)
