r"""The incoherence functional :math:`\sigma_{\infty,\min}(A) = \min_{\|x\|_\infty \ge 1} \|Ax\|_\infty`.

Because the functional is positively homogeneous, the minimum is attained
on :math:`\|x\|_\infty = 1`. Splitting that sphere by which coordinate has
modulus one, and rotating that coordinate to ``1`` (global phase does not
change the objective), leaves ``k`` convex problems

.. math:: \min \|Ax\|_\infty \quad \text{s.t.}\quad x_j = 1,\ |x_i| \le 1.

Each is attacked by vectorised projected subgradient descent from random
starts, then polished with SLSQP on the epigraph form.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

from .errors import DomainError

__all__ = [
    "IncoherenceReport",
    "sigma_inf_min",
    "sigma_inf_min_2x2",
    "sigma_inf_min_oracle",
    "singular_values",
    "svd_lower_bound",
    "duplicate_row_invariance_check",
]

# subgradient iterations between stall checks; the SLSQP polish finishes the job
_STALL_EVERY = 250


@dataclass(frozen=True)
class IncoherenceReport:
    value: float
    argmin: np.ndarray
    lower_bound_svd: float
    method: str
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmin_re": self.argmin.real.tolist(),
            "argmin_im": self.argmin.imag.tolist(),
            "lower_bound_svd": self.lower_bound_svd,
            "method": self.method,
            "converged": self.converged,
        }


def _as_matrix(A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DomainError("expected a nonempty T x k matrix")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def singular_values(A, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """All ``k`` singular values of a ``T x k`` matrix, descending.

    One-sided (Hestenes) Jacobi on the columns. When ``T < k`` the trailing
    ``k - T`` values are zero, i.e. the result is the spectrum of ``A^H A``
    rather than the ``min(T, k)`` values LAPACK reports.
    """
    U = np.array(_as_matrix(A), copy=True)
    k = U.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(k - 1):
            for q in range(p + 1, k):
                alpha = np.vdot(U[:, p], U[:, p]).real
                beta = np.vdot(U[:, q], U[:, q]).real
                gamma = np.vdot(U[:, p], U[:, q])
                g = abs(gamma)
                if g <= tol * np.sqrt(alpha * beta) or g == 0.0:
                    continue
                rotated = True
                # rotate the phase out of gamma, then apply a real rotation
                uq = U[:, q] * np.exp(-1j * np.angle(gamma))
                diff = beta - alpha
                if abs(diff) > 1e150 * g:
                    t = g / diff  # small-angle limit; zeta would overflow
                elif diff == 0:
                    t = 1.0
                else:
                    zeta = diff / (2 * g)
                    t = np.sign(zeta) / (abs(zeta) + np.sqrt(1 + zeta * zeta))
                c = 1 / np.sqrt(1 + t * t)
                s = c * t
                up = U[:, p].copy()
                U[:, p] = c * up - s * uq
                U[:, q] = s * up + c * uq
        if not rotated:
            break
    sv = np.sqrt(np.sum(np.abs(U) ** 2, axis=0))
    return np.sort(sv)[::-1]


def svd_lower_bound(A) -> float:
    """``sigma_min(A) / sqrt(T)``, a lower bound on the incoherence."""
    A = _as_matrix(A)
    return float(singular_values(A)[-1] / np.sqrt(A.shape[0]))


def sigma_inf_min_2x2(s: float) -> float:
    """Closed form ``1 - s`` for ``[[1, s], [s, 1]]``, ``0 <= s <= 1``."""
    if not 0 <= s <= 1:
        raise DomainError("s must lie in [0, 1]")
    return 1.0 - s


def _is_symmetric_unit_2x2(A: np.ndarray) -> bool:
    if A.shape != (2, 2) or np.any(A.imag != 0):
        return False
    s = A[0, 1].real
    return A[0, 0] == 1 and A[1, 1] == 1 and A[1, 0] == A[0, 1] and 0 <= s <= 1


def _subgradient(A, R, max_iter, tol, rng):
    T, k = A.shape
    fixed = np.repeat(np.arange(k), R)
    S = fixed.size
    rows = np.arange(S)
    r = np.sqrt(rng.uniform(size=(S, k)))
    X = r * np.exp(2j * np.pi * rng.uniform(size=(S, k)))
    X[rows, fixed] = 1.0
    best = np.full(S, np.inf)
    best_x = X.copy()
    last_check = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        Z = X @ A.T
        mag = np.abs(Z)
        tstar = np.argmax(mag, axis=1)
        f = mag[rows, tstar]
        improved = f < best
        best[improved] = f[improved]
        best_x[improved] = X[improved]
        z = Z[rows, tstar]
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(f > 0, z / f, 0.0)
        g = np.conj(A[tstar]) * unit[:, None]
        g[rows, fixed] = 0.0
        gn = np.linalg.norm(g, axis=1)
        gn[gn == 0] = 1.0
        X = X - (1.0 / np.sqrt(it)) * g / gn[:, None]
        m = np.abs(X)
        X = np.where(m > 1, X / np.maximum(m, 1e-300), X)
        X[rows, fixed] = 1.0
        if it % _STALL_EVERY == 0:
            cur = best.min()
            if last_check - cur < tol:
                break
            last_check = cur
    return fixed, best, best_x, it


def _polish(A: np.ndarray, j: int, x0: np.ndarray):
    """SLSQP on ``min u`` s.t. ``u^2 >= |A_t x|^2``, ``|x_i|^2 <= 1``, ``x_j = 1``."""
    T, k = A.shape
    free = [i for i in range(k) if i != j]
    Af = A[:, free]
    aj = A[:, j]
    nf = len(free)

    def unpack(v):
        return v[1:1 + nf] + 1j * v[1 + nf:]

    def cons(v):
        xf = unpack(v)
        z = aj + Af @ xf
        return np.concatenate([v[0] ** 2 - np.abs(z) ** 2, 1 - np.abs(xf) ** 2])

    def cons_jac(v):
        xf = unpack(v)
        z = aj + Af @ xf
        J = np.zeros((T + nf, 1 + 2 * nf))
        J[:T, 0] = 2 * v[0]
        w = np.conj(z)[:, None] * Af
        J[:T, 1:1 + nf] = -2 * w.real
        J[:T, 1 + nf:] = 2 * w.imag
        J[T + np.arange(nf), 1 + np.arange(nf)] = -2 * xf.real
        J[T + np.arange(nf), 1 + nf + np.arange(nf)] = -2 * xf.imag
        return J

    xf0 = x0[free]
    u0 = np.max(np.abs(aj + Af @ xf0))
    v0 = np.concatenate([[u0], xf0.real, xf0.imag])
    grad = np.zeros_like(v0)
    grad[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = minimize(lambda v: v[0], v0, jac=lambda v: grad, method="SLSQP",
                       constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                       bounds=[(0, None)] + [(-1, 1)] * (2 * nf),
                       options={"maxiter": 500, "ftol": 1e-15})
    xf = unpack(res.x)
    m = np.abs(xf)
    xf = np.where(m > 1, xf / np.maximum(m, 1e-300), xf)
    x = np.empty(k, complex)
    x[j] = 1.0
    x[free] = xf
    return float(np.max(np.abs(A @ x))), x


def sigma_inf_min(A, tol: float = 1e-6, method: str = "auto", restarts: int = 20,
                  max_iter: int = 50_000, seed: int = 0) -> IncoherenceReport:
    """Compute the incoherence of a ``T x k`` complex matrix.

    ``method`` is ``"convex"`` (subproblem decomposition), ``"oracle"``
    (grid search plus local descent, slow) or ``"auto"``, which uses the
    closed form for ``[[1, s], [s, 1]]`` and the convex route otherwise.
    """
    A = _as_matrix(A)
    if not tol > 0:
        raise DomainError("tol must be positive")
    T, k = A.shape
    lb = svd_lower_bound(A)
    if method == "auto" and _is_symmetric_unit_2x2(A):
        s = A[0, 1].real
        return IncoherenceReport(sigma_inf_min_2x2(s), np.array([1.0, -1.0], complex), lb, "closed-form-2x2")
    if method == "oracle":
        value, x = sigma_inf_min_oracle(A, seed=seed)
        return IncoherenceReport(value, x, lb, "random-oracle")
    if method not in ("auto", "convex"):
        raise DomainError(f"unknown method {method!r}")

    if k == 1:
        return IncoherenceReport(float(np.max(np.abs(A[:, 0]))), np.ones(1, complex), lb, "convex-subproblems")

    if T < k:
        # a nontrivial kernel vector, scaled to unit sup-norm, attains 0
        x = null_space(A)[:, 0].astype(complex)
        x = x / x[np.argmax(np.abs(x))]
        return IncoherenceReport(float(np.max(np.abs(A @ x))), x, lb, "convex-subproblems")

    rng = np.random.default_rng(seed)
    fixed, best, best_x, iters = _subgradient(A, restarts, max_iter, tol, rng)
    converged = iters < max_iter
    value, argmin = np.inf, None
    for j in range(k):
        idx = np.flatnonzero(fixed == j)
        s = idx[np.argmin(best[idx])]
        cand_v, cand_x = float(best[s]), best_x[s]
        pv, px = _polish(A, j, cand_x)
        if pv < cand_v:
            cand_v, cand_x = pv, px
        if cand_v < value:
            value, argmin = cand_v, cand_x
    if not converged:
        warnings.warn("sigma_inf_min: iteration budget exhausted; reporting best value found")
    return IncoherenceReport(value, argmin, lb, "convex-subproblems", converged)


def sigma_inf_min_oracle(A, phases: int = 24, radii: int = 6, refine: int = 8, seed: int = 0):
    """Brute-force estimate: dense polar grid on the free coordinates, then Nelder-Mead.

    Exponential in ``k``; intended for ``k <= 3`` cross-checks.
    """
    A = _as_matrix(A)
    T, k = A.shape
    if k == 1:
        return float(np.max(np.abs(A[:, 0]))), np.ones(1, complex)
    ph = np.exp(2j * np.pi * np.arange(phases) / phases)
    rad = np.linspace(0, 1, radii)
    pts = (rad[:, None] * ph[None, :]).ravel()
    pts = np.unique(np.round(pts, 14))
    best_v, best_x = np.inf, None
    rng = np.random.default_rng(seed)

    for j in range(k):
        free = [i for i in range(k) if i != j]
        grid = np.array(list(itertools.product(pts, repeat=k - 1)))
        X = np.ones((grid.shape[0], k), complex)
        X[:, free] = grid
        vals = np.max(np.abs(X @ A.T), axis=1)
        order = np.argsort(vals)[:refine]

        def obj(p):
            r = np.clip(p[: k - 1], 0, 1)
            x = np.ones(k, complex)
            x[free] = r * np.exp(1j * p[k - 1:])
            return np.max(np.abs(A @ x))

        for s in order:
            xf = X[s, free]
            p0 = np.concatenate([np.abs(xf), np.angle(xf)]) + 1e-3 * rng.standard_normal(2 * (k - 1))
            res = minimize(obj, p0, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000 * k})
            if res.fun < best_v:
                r = np.clip(res.x[: k - 1], 0, 1)
                x = np.ones(k, complex)
                x[free] = r * np.exp(1j * res.x[k - 1:])
                best_v, best_x = float(np.max(np.abs(A @ x))), x
    return best_v, best_x


def duplicate_row_invariance_check(A, tol: float = 1e-6) -> bool:
    """Appending a copy of the last row leaves the incoherence unchanged."""
    A = _as_matrix(A)
    a = sigma_inf_min(A, tol=tol, method="convex").value
    b = sigma_inf_min(np.vstack([A, A[-1:]]), tol=tol, method="convex").value
    return abs(a - b) <= 2 * tol
