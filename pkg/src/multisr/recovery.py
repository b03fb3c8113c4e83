"""Sparsest-measure recovery from multi-frame band-limited data.

The solver scans sparsity levels ``k = 0, 1, ...`` and, at each level,
scores candidate supports drawn from a location grid by least-squares
amplitude fits, refines the most promising ones off the grid by a
coordinate pattern search, and stops at the first level whose best
support fits every frame to within ``sigma``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bounds import HYPOTHESIS_RTOL, location_error_bound, threshold_1d_euclidean, threshold_1d_wrapped, threshold_2d
from .errors import DomainError, InterpolationError
from .forward import FrequencyGrid, MeasurementSet
from .incoherence import sigma_inf_min
from .measure import DiscreteMeasure, IlluminationSet, wrapped_distance

__all__ = [
    "RecoveryProblem",
    "RecoveryResult",
    "solve_l0",
    "fit_support",
    "match_supports",
    "Certificate",
    "certify_against_theorem",
    "project_problem_1d",
]

MODES = ("known", "approximated", "unknown")
_FEAS = 1 - 1e-9
_COND_MAX = 1e12
_CHUNK = 4096
_EXHAUSTIVE_MAX = 3
_EXHAUSTIVE_COMBOS = 400_000


@dataclass(frozen=True)
class RecoveryProblem:
    """Everything the solver needs.

    ``domain`` is ``(lo, hi)`` in 1D or ``(cx, cy, radius)`` in 2D.
    ``illumination`` holds the true patterns in ``known`` mode and the
    approximations in ``approximated`` mode; it is ignored in ``unknown``
    mode, where every frame gets its own amplitudes.
    """

    measurements: MeasurementSet
    mode: str
    domain: tuple
    grid_pitch: float
    illumination: IlluminationSet | None = None
    perturbation_bound: float | None = None
    sigma: float | None = None
    max_sparsity: int = 6
    refine_top: int = 3
    beam_width: int = 24
    max_sweeps: int = 500

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if self.mode != "unknown" and self.illumination is None:
            raise DomainError(f"{self.mode} mode needs an illumination set")
        if self.mode != "unknown" and self.illumination.T != self.measurements.T:
            raise DomainError("one illumination pattern per frame")
        if not self.grid_pitch > 0:
            raise DomainError("grid_pitch must be positive")
        if not 0 <= self.max_sparsity <= 6:
            raise DomainError("max_sparsity must lie in 0..6")
        dim = self.measurements.grid.dim
        if len(self.domain) != (2 if dim == 1 else 3):
            raise DomainError("domain must be (lo, hi) in 1D or (cx, cy, radius) in 2D")
        if dim == 1 and not self.domain[0] < self.domain[1]:
            raise DomainError("empty interval")
        if dim == 2 and not self.domain[2] > 0:
            raise DomainError("disk radius must be positive")
        if not self.tolerance > 0:
            raise DomainError("feasibility tolerance must be positive")

    @property
    def dim(self) -> int:
        return self.measurements.grid.dim

    @property
    def tolerance(self) -> float:
        return self.measurements.sigma if self.sigma is None else float(self.sigma)

    @staticmethod
    def default_disk(n: int, omega: float, c0: float = 1.0, center=(0.0, 0.0)) -> tuple:
        return (float(center[0]), float(center[1]), c0 * n * math.pi / omega)


@dataclass
class RecoveryResult:
    measure: DiscreteMeasure
    sparsity: int
    per_frame_residuals: np.ndarray
    effective_amplitudes: np.ndarray
    feasible: bool
    refinement_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        m = self.measure
        eff = self.effective_amplitudes
        return {
            "sparsity": self.sparsity,
            "feasible": self.feasible,
            "locations": m.locations.tolist(),
            "amplitudes_re": m.amplitudes.real.tolist(),
            "amplitudes_im": m.amplitudes.imag.tolist(),
            "per_frame_residuals": self.per_frame_residuals.tolist(),
            "effective_amplitudes_re": eff.real.tolist(),
            "effective_amplitudes_im": eff.imag.tolist(),
            "refinement_trace": self.refinement_trace,
        }


# -- helpers -----------------------------------------------------------------

def _norms(r: np.ndarray, mode: str) -> np.ndarray:
    # r has the sample axis last
    if mode == "rms":
        return np.sqrt(np.mean(np.abs(r) ** 2, axis=-1))
    return np.max(np.abs(r), axis=-1)


def _candidates(problem: RecoveryProblem) -> np.ndarray:
    h = problem.grid_pitch
    if problem.dim == 1:
        lo, hi = problem.domain
        pts = np.arange(lo, hi + 0.5 * h, h)
        return pts[pts <= hi + 1e-12 * max(1.0, abs(hi))]
    cx, cy, R = problem.domain
    ax = np.arange(-R, R + 0.5 * h, h)
    ax = ax - 0.5 * (ax[0] + ax[-1])
    X, Y = np.meshgrid(cx + ax, cy + ax, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    r = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
    inside = pts[r <= R]
    # points just outside are pulled onto the circle so the rim is covered
    ring = pts[(r > R) & (r < R + h)]
    ring = _project_domain(problem, ring)
    pts = np.vstack([inside, ring])
    keep = np.ones(len(pts), bool)
    for i in range(len(inside), len(pts)):
        if np.min(np.hypot(*(pts[:i][keep[:i]] - pts[i]).T)) < 0.5 * h:
            keep[i] = False
    return pts[keep]


def _atoms(nodes: np.ndarray, locs: np.ndarray) -> np.ndarray:
    """Columns ``exp(i w . y)``, shape ``(M, len(locs))``."""
    if nodes.ndim == 1:
        return np.exp(1j * np.outer(nodes, locs))
    return np.exp(1j * nodes @ np.asarray(locs).reshape(-1, 2).T)


def _weights(problem: RecoveryProblem, locs) -> np.ndarray | None:
    if problem.mode == "unknown":
        return None
    return problem.illumination.evaluate(locs).reshape(problem.measurements.T, -1)


def _batch_scores(E, W, Y, supports, mode, norm_mode):
    """Per-frame residual norms and condition numbers for a stack of supports.

    ``E`` is ``(M, P)``, ``W`` is ``(T, P)`` or ``None`` (per-frame fits),
    ``Y`` is ``(T, M)``, ``supports`` is ``(N, k)``.
    """
    T, M = Y.shape
    N, k = supports.shape
    res = np.empty((N, T))
    cond = np.empty(N)
    for s in range(0, N, _CHUNK):
        sup = supports[s:s + _CHUNK]
        A = np.transpose(E[:, sup], (1, 0, 2))  # (n, M, k)
        if W is None:
            Q, R = np.linalg.qr(A)
            C = np.conj(np.transpose(Q, (0, 2, 1))) @ Y.T  # (n, k, T)
            r = Y.T[None] - Q @ C
            res[s:s + len(sup)] = _norms(np.transpose(r, (0, 2, 1)), norm_mode)
        else:
            As = np.concatenate([A * W[t][sup][:, None, :] for t in range(T)], axis=1)
            Q, R = np.linalg.qr(As)
            y = Y.reshape(-1)
            c = np.conj(np.transpose(Q, (0, 2, 1))) @ y
            r = y[None] - np.einsum("nmk,nk->nm", Q, c)
            res[s:s + len(sup)] = _norms(r.reshape(len(sup), T, M), norm_mode)
        sv = np.linalg.svd(R, compute_uv=False)
        with np.errstate(divide="ignore"):
            cond[s:s + len(sup)] = np.where(sv[:, -1] > 0, sv[:, 0] / sv[:, -1], np.inf)
    return res, cond


def fit_support(problem: RecoveryProblem, locs):
    """Least-squares amplitudes on fixed locations.

    Returns ``(residuals (T,), effective (T, k), shared amplitudes or None, cond)``.
    """
    ms = problem.measurements
    Y = ms.frames
    T, M = Y.shape
    locs = np.asarray(locs, float)
    k = locs.shape[0]
    if k == 0:
        return _norms(Y, ms.norm_mode), np.zeros((T, 0), complex), np.zeros(0, complex), 1.0
    E = _atoms(ms.grid.nodes, locs)
    W = _weights(problem, locs)
    if W is None:
        coef, *_ = np.linalg.lstsq(E, Y.T, rcond=None)
        eff = coef.T
        shared = None
        sv = np.linalg.svd(E, compute_uv=False)
    else:
        As = np.concatenate([E * W[t][None, :] for t in range(T)], axis=0)
        shared, *_ = np.linalg.lstsq(As, Y.reshape(-1), rcond=None)
        eff = W * shared[None, :]
        sv = np.linalg.svd(As, compute_uv=False)
    res = _norms(Y - eff @ E.T, ms.norm_mode)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    return res, eff, shared, cond


def _project_domain(problem, x):
    if problem.dim == 1:
        lo, hi = problem.domain
        return np.clip(x, lo, hi)
    cx, cy, R = problem.domain
    d = x - np.array([cx, cy])
    r = np.hypot(d[:, 0], d[:, 1])
    scale = np.where(r > R, R / np.maximum(r, 1e-300), 1.0)
    return np.array([cx, cy]) + d * scale[:, None]


def _distinct(x):
    pts = x.reshape(len(x), -1)
    if len(pts) < 2:
        return True
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    return bool(np.all(d[np.triu_indices(len(pts), 1)] > 1e-12))


def _refine(problem: RecoveryProblem, locs):
    """Coordinate pattern search on the locations.

    A move is taken when it lowers the max per-frame residual, or keeps it
    and lowers the sum of squares; so the max residual never increases.
    """
    x = np.array(locs, float)
    res, *_ = fit_support(problem, x)
    best = (res.max(), np.sum(res ** 2))
    step = problem.grid_pitch / 2
    floor = problem.grid_pitch * 1e-10
    sweeps = 0
    flat = x.reshape(-1)
    while sweeps < problem.max_sweeps and step > floor:
        sweeps += 1
        moved = False
        for c in range(flat.size):
            for sgn in (1.0, -1.0):
                trial = x.copy().reshape(-1)
                trial[c] += sgn * step
                trial = _project_domain(problem, trial.reshape(x.shape))
                if not _distinct(trial):
                    continue
                r, _, _, cond = fit_support(problem, trial)
                if cond > _COND_MAX:
                    continue
                cand = (r.max(), np.sum(r ** 2))
                if cand[0] < best[0] or (cand[0] <= best[0] and cand[1] < best[1]):
                    x, best, moved = trial, cand, True
                    break
        flat = x.reshape(-1)
        if not moved:
            step /= 2
    return x, best[0], sweeps


def _rank(res, cond, supports):
    worst = res.max(axis=1)
    worst = np.where(cond > _COND_MAX, np.inf, worst)
    keys = [supports[:, j] for j in range(supports.shape[1] - 1, -1, -1)] + [worst]
    return np.lexsort(keys), worst


def _level_supports(P, k, prev_top):
    if k <= _EXHAUSTIVE_MAX and math.comb(P, k) <= _EXHAUSTIVE_COMBOS:
        return np.array(list(itertools.combinations(range(P), k)), dtype=int).reshape(-1, k), "exhaustive"
    grown = set()
    for sup in prev_top:
        s = set(sup.tolist())
        for p in range(P):
            if p not in s:
                grown.add(tuple(sorted(s | {p})))
    return np.array(sorted(grown), dtype=int).reshape(-1, k), "beam"


def solve_l0(problem: RecoveryProblem) -> RecoveryResult:
    """Smallest ``k <= max_sparsity`` admitting a measure that fits every frame within ``sigma``."""
    ms = problem.measurements
    sigma = problem.tolerance
    cap = sigma * _FEAS
    trace = []

    res0 = _norms(ms.frames, ms.norm_mode)
    trace.append({"k": 0, "residual": float(res0.max())})
    if res0.max() <= cap:
        return RecoveryResult(DiscreteMeasure.empty(problem.dim), 0, res0, np.zeros((ms.T, 0), complex), True, trace)
    if problem.max_sparsity == 0:
        return RecoveryResult(DiscreteMeasure.empty(problem.dim), 1, res0, np.zeros((ms.T, 0), complex), False, trace)

    grid = _candidates(problem)
    P = grid.shape[0]
    E = _atoms(ms.grid.nodes, grid)
    W = _weights(problem, grid)
    prev_top = None
    best_overall = None
    for k in range(1, problem.max_sparsity + 1):
        if k > P:
            break
        supports, how = _level_supports(P, k, prev_top)
        res, cond = _batch_scores(E, W, ms.frames, supports, problem.mode, ms.norm_mode)
        order, worst = _rank(res, cond, supports)
        skipped = int(np.sum(cond > _COND_MAX))
        prev_top = supports[order[:problem.beam_width]]
        level = {"k": k, "search": how, "supports": int(len(supports)), "ill_conditioned": skipped,
                 "refined": []}
        best_k = None
        for idx in order[:problem.refine_top]:
            if not np.isfinite(worst[idx]):
                break
            x0 = grid[supports[idx]]
            x, r, sweeps = _refine(problem, x0)
            level["refined"].append({"support": supports[idx].tolist(), "grid_residual": float(worst[idx]),
                                     "refined_residual": float(r), "sweeps": sweeps})
            if best_k is None or r < best_k[1]:
                best_k = (x, r)
        trace.append(level)
        if best_k is None:
            continue
        if best_overall is None or best_k[1] < best_overall[1]:
            best_overall = best_k
        if best_k[1] <= cap:
            return _finish(problem, best_k[0], True, trace)
    if best_overall is None:
        return RecoveryResult(DiscreteMeasure.empty(problem.dim), problem.max_sparsity + 1, res0,
                              np.zeros((ms.T, 0), complex), False, trace)
    out = _finish(problem, best_overall[0], False, trace)
    out.sparsity = problem.max_sparsity + 1
    return out


def _finish(problem, x, feasible, trace):
    res, eff, shared, _ = fit_support(problem, x)
    if shared is None:
        # one amplitude per atom: the frame where it is largest
        t = np.argmax(np.abs(eff), axis=0)
        amps = eff[t, np.arange(eff.shape[1])]
    else:
        amps = shared
    amps = np.where(amps == 0, 1e-300, amps)
    order = np.lexsort(x.reshape(len(x), -1).T[::-1])
    m = DiscreteMeasure(x[order], amps[order], problem.dim)
    return RecoveryResult(m, len(m), res, eff[:, order], feasible, trace)


# -- matching and certification ------------------------------------------------

def _pairwise(truth: DiscreteMeasure, rec: DiscreteMeasure, period):
    a, b = truth.locations, rec.locations
    if truth.dim == 1:
        if period is None:
            return np.abs(a[:, None] - b[None, :])
        return wrapped_distance(a[:, None], b[None, :], period)
    if period is not None:
        raise DomainError("wrapped metric is one-dimensional")
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def match_supports(truth: DiscreteMeasure, recovered: DiscreteMeasure, period: float | None = None):
    """Optimal assignment; ``recovered[perm[j]]`` is matched to ``truth[j]``."""
    if len(truth) != len(recovered):
        raise DomainError("atom counts differ")
    if truth.dim != recovered.dim:
        raise DomainError("dimensions differ")
    if len(truth) == 0:
        return np.zeros(0, int), np.zeros(0)
    cost = _pairwise(truth, recovered, period)
    rows, cols = linear_sum_assignment(cost)
    perm = cols[np.argsort(rows)]
    return perm, cost[np.arange(len(truth)), perm]


@dataclass
class Certificate:
    mode: str
    holds: bool
    vacuous: bool
    d_min: float
    threshold: float
    error_bound: float
    deviations: np.ndarray
    slack: float
    sigma_inf: float
    reason: str = ""

    def to_dict(self) -> dict:
        return {"mode": self.mode, "holds": self.holds, "vacuous": self.vacuous, "d_min": self.d_min,
                "threshold": self.threshold, "error_bound": self.error_bound,
                "deviations": self.deviations.tolist(), "slack": self.slack,
                "sigma_inf": self.sigma_inf, "reason": self.reason}

    def report(self) -> str:
        state = "VACUOUS" if self.vacuous else ("HOLDS" if self.holds else "FAILS")
        lines = [f"certificate [{self.mode}]: {state}",
                 f"  d_min        {self.d_min:.6g}",
                 f"  threshold    {self.threshold:.6g}",
                 f"  error bound  {self.error_bound:.6g}",
                 f"  max dev      {self.deviations.max() if self.deviations.size else 0.0:.6g}",
                 f"  slack        {self.slack:.6g}"]
        if self.reason:
            lines.append(f"  note         {self.reason}")
        return "\n".join(lines)


def certify_against_theorem(truth: DiscreteMeasure, recovered: DiscreteMeasure, illum_matrix, sigma: float,
                            omega: float, mode: str = "1d-wrapped", c0: float = 1.0,
                            sigma_inf: float | None = None) -> Certificate:
    """Check a recovery against the separation theorem for ``mode``.

    The separation hypothesis gates the check: when it fails the
    certificate is vacuous rather than failed.
    """
    n = len(truth)
    if n < 1:
        raise DomainError("empty truth")
    if sigma_inf is None:
        sigma_inf = sigma_inf_min(np.asarray(illum_matrix)).value
    period = n * math.pi / omega if mode == "1d-wrapped" else None
    if n > 1:
        d = truth.d_min(period)
    else:
        d = math.inf
    m = truth.m_min
    thr_fn = {"1d-wrapped": lambda: threshold_1d_wrapped(n, omega, sigma, m, sigma_inf),
              "1d-euclidean": lambda: threshold_1d_euclidean(n, omega, sigma, m, sigma_inf, c0),
              "2d": lambda: threshold_2d(n, omega, sigma, m, sigma_inf, c0)}
    if mode not in thr_fn:
        raise DomainError(f"unknown mode {mode!r}")
    thr = thr_fn[mode]()
    empty = np.zeros(0)
    if sigma / (m * sigma_inf) > 1 or d < thr * (1 - HYPOTHESIS_RTOL):
        return Certificate(mode, False, True, d, thr, math.inf, empty, math.nan, sigma_inf,
                           "separation or noise hypothesis not met")
    if len(recovered) != n:
        return Certificate(mode, False, False, d, thr, math.nan, empty, -math.inf, sigma_inf,
                           f"recovered {len(recovered)} atoms, expected {n}")
    bound = location_error_bound(mode, n, omega, d, sigma, m, sigma_inf, c0) if n > 1 else math.inf
    _, dev = match_supports(truth, recovered, period)
    limit = min(d / 2, bound)
    slack = float(limit - dev.max())
    return Certificate(mode, bool(np.all(dev < limit)), False, d, thr, bound, dev, slack, sigma_inf)


# -- 2D to 1D ------------------------------------------------------------------

def project_problem_1d(problem: RecoveryProblem, v, source=None, count: int | None = None) -> RecoveryProblem:
    """The 1D problem seen along unit direction ``v``.

    Samples of the 2D transform at ``w v`` are the 1D transform of the
    projected measure at ``w``. Nodes on the line through the origin along
    ``v`` are taken from the existing grid; if there are fewer than two,
    ``source(nodes_2d) -> frames`` is called on ``count`` fresh nodes, and
    without a source an ``InterpolationError`` is raised. Illumination
    values cannot be written as functions of the projected coordinate, so
    the 1D problem is always posed with unknown illumination.
    """
    if problem.dim != 2:
        raise DomainError("projection needs a 2D problem")
    v = np.asarray(v, float)
    if v.shape != (2,) or abs(np.linalg.norm(v) - 1) > 1e-12:
        raise DomainError("v must be a unit 2-vector")
    ms = problem.measurements
    nodes = ms.grid.nodes
    omega = ms.grid.omega
    cross = nodes[:, 0] * v[1] - nodes[:, 1] * v[0]
    on_line = np.abs(cross) <= 1e-9 * omega
    if on_line.sum() >= 2:
        w = nodes[on_line] @ v
        frames = ms.frames[:, on_line]
        order = np.argsort(w)
        w, frames = w[order], frames[:, order]
    elif source is not None:
        count = count or 16
        w = -omega + (np.arange(count) + 0.5) * 2 * omega / count
        frames = np.asarray(source(np.outer(w, v)), complex)
    else:
        raise InterpolationError("no grid nodes along this direction and no source to evaluate")
    grid = FrequencyGrid(omega, w, "projected", {"direction": v.tolist()})
    sub = MeasurementSet(grid, frames, ms.sigma, ms.norm_mode)
    cx, cy, R = problem.domain
    c = float(np.dot([cx, cy], v))
    return RecoveryProblem(sub, "unknown", (c - R, c + R), problem.grid_pitch, sigma=problem.sigma,
                           max_sparsity=problem.max_sparsity, refine_top=problem.refine_top,
                           beam_width=problem.beam_width, max_sweeps=problem.max_sweeps)
