"""Band-limited multi-frame Fourier measurements and their norms."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .measure import DiscreteMeasure, IlluminationSet, build_illumination_matrix

__all__ = [
    "FrequencyGrid",
    "MeasurementSet",
    "uniform_grid",
    "theorem_grid",
    "polar_grid",
    "nudft",
    "fourier_transform",
    "add_noise",
    "frame_norm",
    "residual",
]

_BAND_TOL = 1e-12


@dataclass(frozen=True)
class FrequencyGrid:
    """Sampling nodes inside the band ``|w| <= omega``."""

    omega: float
    nodes: np.ndarray
    scheme: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("cut-off frequency must be positive")
        nodes = np.asarray(self.nodes, float)
        if nodes.ndim == 2 and nodes.shape[1] == 1:
            nodes = nodes[:, 0]
        if nodes.ndim == 1:
            radius = np.abs(nodes)
        elif nodes.ndim == 2 and nodes.shape[1] == 2:
            radius = np.hypot(nodes[:, 0], nodes[:, 1])
        else:
            raise DomainError("nodes must have shape (M,) or (M, 2)")
        if nodes.shape[0] == 0:
            raise DomainError("a frequency grid needs at least one node")
        if np.any(radius > self.omega * (1 + _BAND_TOL)):
            raise DomainError("frequency node outside the band")
        nodes = nodes.copy()
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def dim(self) -> int:
        return self.nodes.ndim

    def __len__(self) -> int:
        return self.nodes.shape[0]


def uniform_grid(omega: float, M: int) -> FrequencyGrid:
    """``M`` evenly spaced midpoint nodes on ``[-omega, omega]``.

    When ``n`` divides ``M`` the grid is the union of ``M / n`` shifted
    theorem grids with spacing ``2 omega / n``.
    """
    if M < 1:
        raise DomainError("M must be positive")
    h = 2 * omega / M
    nodes = -omega + (np.arange(M) + 0.5) * h
    return FrequencyGrid(omega, nodes, "uniform", {"M": M})


def theorem_grid(omega: float, n: int, count: int | None = None, offset: float = 0.0,
                 setting: str = "wrapped", c0: float = 1.0) -> FrequencyGrid:
    """Nodes ``offset + j h - omega`` for ``j = 0..count-1``.

    ``h = 2 omega / n`` in the wrapped setting and ``omega / (c0 n)`` in the
    Euclidean-interval setting.
    """
    if n < 1:
        raise DomainError("n must be positive")
    if setting == "wrapped":
        h = 2 * omega / n
    elif setting == "euclidean":
        h = omega / (c0 * n)
    else:
        raise DomainError(f"unknown theorem-grid setting {setting!r}")
    if not 0 <= offset <= h:
        raise DomainError("offset must lie in [0, h]")
    count = n if count is None else int(count)
    nodes = offset + np.arange(count) * h - omega
    return FrequencyGrid(omega, nodes, "theorem-grid",
                         {"n": n, "count": count, "offset": offset, "setting": setting, "c0": c0, "h": h})


def polar_grid(omega: float, radii: int, angles: int, origin: bool = True) -> FrequencyGrid:
    """Radii ``l * omega / radii`` times ``angles`` equally spaced directions.

    With an even ``angles`` every radial line has its antipode, so each line
    through the origin is a symmetric 1D grid of spacing ``omega / radii``.
    """
    r = omega * np.arange(1, radii + 1) / radii
    a = 2 * np.pi * np.arange(angles) / angles
    rr, aa = np.meshgrid(r, a, indexing="ij")
    pts = np.stack([rr.ravel() * np.cos(aa.ravel()), rr.ravel() * np.sin(aa.ravel())], axis=1)
    if origin:
        pts = np.vstack([np.zeros((1, 2)), pts])
    return FrequencyGrid(omega, pts, "polar", {"radii": radii, "angles": angles, "origin": origin})


@dataclass(frozen=True)
class MeasurementSet:
    """Per-frame samples ``Y_t(w)`` on a grid.

    ``frames`` has shape ``(T, M)``. ``norm_mode`` is ``"rms"`` for the 1D
    theorems and ``"sup"`` for the 2D ones.
    """

    grid: FrequencyGrid
    frames: np.ndarray
    sigma: float = 0.0
    norm_mode: str = "rms"

    def __post_init__(self):
        frames = np.atleast_2d(np.asarray(self.frames, complex))
        if frames.shape[1] != len(self.grid):
            raise DomainError("every frame needs one sample per grid node")
        if self.norm_mode not in ("rms", "sup"):
            raise DomainError(f"unknown norm mode {self.norm_mode!r}")
        if self.sigma < 0:
            raise DomainError("noise level must be nonnegative")
        frames = frames.copy()
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def T(self) -> int:
        return self.frames.shape[0]


def nudft(locations, weights, nodes) -> np.ndarray:
    """``out[t, m] = sum_j weights[t, j] * exp(i y_j . w_m)``."""
    locations = np.asarray(locations, float)
    nodes = np.asarray(nodes, float)
    weights = np.atleast_2d(np.asarray(weights, complex))
    if locations.shape[0] == 0:
        return np.zeros((weights.shape[0], nodes.shape[0]), complex)
    if nodes.ndim == 1:
        phase = np.outer(nodes, locations)
    else:
        phase = nodes @ locations.T
    return weights @ np.exp(1j * phase).T


def _default_mode(dim: int) -> str:
    return "rms" if dim == 1 else "sup"


def fourier_transform(measure: DiscreteMeasure, illum: IlluminationSet, grid: FrequencyGrid,
                      norm_mode: str | None = None) -> MeasurementSet:
    """Noiseless samples ``sum_j I_t(y_j) a_j exp(i y_j . w)``."""
    if measure.dim != grid.dim:
        raise DomainError("measure and grid dimensions differ")
    eff = build_illumination_matrix(illum, measure) * measure.amplitudes[None, :]
    frames = nudft(measure.locations, eff, grid.nodes)
    return MeasurementSet(grid, frames, 0.0, norm_mode or _default_mode(grid.dim))


def frame_norm(samples, mode: str = "rms") -> float:
    """Grid RMS or max modulus of one frame.

    The RMS is the discrete stand-in for ``((1/2W) int |f|^2)^(1/2)``.
    """
    s = np.asarray(samples, complex)
    if s.size == 0:
        raise DomainError("frame_norm of an empty frame")
    if mode == "rms":
        return float(np.sqrt(np.mean(np.abs(s) ** 2)))
    if mode == "sup":
        return float(np.max(np.abs(s)))
    raise DomainError(f"unknown norm mode {mode!r}")


def _frame_norms(frames: np.ndarray, mode: str) -> np.ndarray:
    if mode == "rms":
        return np.sqrt(np.mean(np.abs(frames) ** 2, axis=-1))
    return np.max(np.abs(frames), axis=-1)


def add_noise(ms: MeasurementSet, sigma: float, model: str = "gaussian", seed=None,
              scale: float = 0.5) -> MeasurementSet:
    """Return a copy of ``ms`` with noise strictly inside the norm ball of radius ``sigma``.

    ``gaussian``: circular complex normal with ``E|W|^2 = (scale*sigma)^2``
    per sample, rescaled onto ``sigma (1 - 1e-9)`` when a draw leaves the
    ball. ``uniform-disk``: each sample uniform in the disk of radius
    ``scale * sigma * (1 - 1e-9)``.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if not 0 < scale <= 1:
        raise DomainError("scale must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    shape = ms.frames.shape
    cap = sigma * (1 - 1e-9)
    if model == "gaussian":
        w = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * (scale * sigma / np.sqrt(2))
        norms = _frame_norms(w, ms.norm_mode)
        over = norms >= cap
        if np.any(over):
            w[over] *= (cap / norms[over])[:, None]
    elif model == "uniform-disk":
        r = np.sqrt(rng.uniform(size=shape)) * scale * cap
        w = r * np.exp(2j * np.pi * rng.uniform(size=shape))
    else:
        raise DomainError(f"unknown noise model {model!r}")
    return replace(ms, frames=ms.frames + w, sigma=float(sigma))


def residual(candidate: DiscreteMeasure, ms: MeasurementSet, illum: IlluminationSet | None = None,
             effective=None) -> np.ndarray:
    """Per-frame norm of ``F[effective measure] - Y_t``.

    ``effective`` gives the ``(T, k)`` amplitudes of each frame directly;
    otherwise they are ``I_t(y_j) a_j`` from ``illum`` (``I = 1`` if absent).
    """
    if len(candidate) and candidate.dim != ms.grid.dim:
        raise DomainError("candidate and grid dimensions differ")
    if effective is None:
        if illum is None:
            effective = np.tile(candidate.amplitudes, (ms.T, 1))
        else:
            effective = build_illumination_matrix(illum, candidate) * candidate.amplitudes[None, :]
    effective = np.asarray(effective, complex).reshape(ms.T, len(candidate))
    model = nudft(candidate.locations, effective, ms.grid.nodes)
    return _frame_norms(model - ms.frames, ms.norm_mode)
