"""Discrete measures, illumination patterns and the wrapped metric."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, OutOfDomainError

__all__ = [
    "DiscreteMeasure",
    "ConstantPattern",
    "SinusoidPattern",
    "SpeckleGrid",
    "IlluminationSet",
    "wrapped_distance",
    "separation",
    "build_illumination_matrix",
    "matched_sinusoids",
    "random_speckle",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteMeasure:
    """A finite sum of weighted Dirac masses in one or two dimensions.

    Parameters
    ----------
    locations : array_like
        Shape ``(n,)`` for ``dim=1`` or ``(n, 2)`` for ``dim=2``.
    amplitudes : array_like
        Complex weights, shape ``(n,)``. Zero weights are rejected.
    """

    locations: np.ndarray
    amplitudes: np.ndarray
    dim: int = 1

    def __post_init__(self):
        dim = int(self.dim)
        if dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2, got {dim}")
        loc = np.asarray(self.locations, dtype=float)
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if dim == 1:
            loc = loc.reshape(-1)
        else:
            loc = loc.reshape(-1, 2)
        if loc.shape[0] != amp.shape[0]:
            raise DomainError("locations and amplitudes differ in length")
        if not (np.all(np.isfinite(loc)) and np.all(np.isfinite(amp))):
            raise DomainError("non-finite location or amplitude")
        if amp.size and np.any(amp == 0):
            raise DomainError("zero-amplitude atoms are not allowed")
        keys = [tuple(np.atleast_1d(p)) for p in loc]
        if len(set(keys)) != len(keys):
            raise DomainError("locations must be pairwise distinct")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "locations", _frozen(loc))
        object.__setattr__(self, "amplitudes", _frozen(amp))

    def __len__(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def m_min(self) -> float:
        if len(self) == 0:
            raise DomainError("m_min is undefined for the empty measure")
        return float(np.min(np.abs(self.amplitudes)))

    def d_min(self, period: float | None = None) -> float:
        return separation(self, period)

    def permuted(self, order: Sequence[int]) -> "DiscreteMeasure":
        order = np.asarray(order, dtype=int)
        return DiscreteMeasure(self.locations[order], self.amplitudes[order], self.dim)

    def shifted(self, s) -> "DiscreteMeasure":
        return DiscreteMeasure(self.locations + np.asarray(s, float), self.amplitudes, self.dim)

    @classmethod
    def empty(cls, dim: int = 1) -> "DiscreteMeasure":
        shape = (0,) if dim == 1 else (0, 2)
        return cls(np.zeros(shape), np.zeros(0, complex), dim)


def wrapped_distance(x, y, period: float):
    """Distance between ``x`` and ``y`` on the circle of circumference ``period``."""
    if not period > 0:
        raise DomainError(f"period must be positive, got {period}")
    r = np.mod(np.asarray(x, float) - np.asarray(y, float), period)
    d = np.minimum(r, period - r)
    return float(d) if np.ndim(d) == 0 else d


def separation(measure: DiscreteMeasure, period: float | None = None) -> float:
    """Minimum pairwise distance of the atoms.

    ``period=None`` selects the Euclidean metric; a positive ``period``
    selects the wrapped metric, which is only defined in 1D.
    """
    n = len(measure)
    if n < 2:
        raise DomainError("separation needs at least two atoms")
    loc = measure.locations
    iu = np.triu_indices(n, 1)
    if measure.dim == 2:
        if period is not None:
            raise DomainError("the wrapped metric is only defined in 1D")
        diff = loc[:, None, :] - loc[None, :, :]
        dist = np.sqrt(np.sum(diff**2, axis=-1))
    elif period is None:
        dist = np.abs(loc[:, None] - loc[None, :])
    else:
        dist = wrapped_distance(loc[:, None], loc[None, :], period)
    return float(np.min(dist[iu]))


# -- illumination patterns --------------------------------------------------

class ConstantPattern:
    representation = "constant"

    def __init__(self, value: complex = 1.0):
        self.value = complex(value)

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, float)
        shape = y.shape[:-1] if y.ndim == 2 else y.shape
        return np.full(shape, self.value, dtype=complex)

    def bound(self) -> float:
        return abs(self.value)


class SinusoidPattern:
    """``amplitude * exp(i (k . y + phase))``, or its real part when ``real=True``.

    ``wavevector`` is a scalar in 1D and a length-2 vector in 2D.
    """

    representation = "analytic-sinusoid"

    def __init__(self, wavevector, phase: float = 0.0, amplitude: float = 1.0, real: bool = False):
        self.wavevector = np.asarray(wavevector, float)
        self.phase = float(phase)
        self.amplitude = float(amplitude)
        self.real = bool(real)

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, float)
        if self.wavevector.ndim == 0:
            arg = self.wavevector * y
        else:
            arg = y @ self.wavevector
        arg = arg + self.phase
        if self.real:
            return (self.amplitude * np.cos(arg)).astype(complex)
        return self.amplitude * np.exp(1j * arg)

    def bound(self) -> float:
        return abs(self.amplitude)


class SpeckleGrid:
    """Tabulated complex pattern with (bi)linear interpolation.

    Node ``i`` (1D) sits at ``origin + i * pitch``; in 2D node ``(i, j)``
    sits at ``origin + (i * pitch, j * pitch)``.
    """

    representation = "speckle-grid"

    def __init__(self, values, pitch: float, origin):
        values = np.asarray(values, dtype=complex)
        if values.ndim not in (1, 2):
            raise DomainError("speckle values must be a 1D or 2D table")
        if not pitch > 0:
            raise DomainError("pitch must be positive")
        if min(values.shape) < 2:
            raise DomainError("speckle table needs at least two nodes per axis")
        self.values = _frozen(values)
        self.pitch = float(pitch)
        self.origin = np.atleast_1d(np.asarray(origin, float))
        if self.origin.size != values.ndim:
            raise DomainError("origin dimension does not match the table")

    @property
    def dim(self) -> int:
        return self.values.ndim

    def extent(self):
        hi = self.origin + (np.array(self.values.shape) - 1) * self.pitch
        return self.origin.copy(), hi

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, float)
        if self.dim == 1:
            u = (y - self.origin[0]) / self.pitch
            n = self.values.shape[0]
            if np.any(u < -1e-12) or np.any(u > n - 1 + 1e-12):
                raise OutOfDomainError("location outside the tabulated speckle grid")
            u = np.clip(u, 0, n - 1)
            i = np.minimum(np.floor(u).astype(int), n - 2)
            f = u - i
            return (1 - f) * self.values[i] + f * self.values[i + 1]
        pts = y.reshape(-1, 2)
        u = (pts - self.origin) / self.pitch
        shape = np.array(self.values.shape)
        if np.any(u < -1e-12) or np.any(u > shape - 1 + 1e-12):
            raise OutOfDomainError("location outside the tabulated speckle grid")
        u = np.clip(u, 0, shape - 1)
        i = np.minimum(np.floor(u).astype(int), shape - 2)
        f = u - i
        v = self.values
        out = ((1 - f[:, 0]) * (1 - f[:, 1]) * v[i[:, 0], i[:, 1]]
               + f[:, 0] * (1 - f[:, 1]) * v[i[:, 0] + 1, i[:, 1]]
               + (1 - f[:, 0]) * f[:, 1] * v[i[:, 0], i[:, 1] + 1]
               + f[:, 0] * f[:, 1] * v[i[:, 0] + 1, i[:, 1] + 1])
        return out.reshape(y.shape[:-1])

    def bound(self) -> float:
        # interpolation is a convex combination of nodes
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class IlluminationSet:
    patterns: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pats = tuple(self.patterns)
        if len(pats) < 1:
            raise DomainError("an illumination set needs at least one pattern")
        for p in pats:
            if not callable(p):
                raise DomainError("patterns must be callable")
        object.__setattr__(self, "patterns", pats)

    def __len__(self) -> int:
        return len(self.patterns)

    @property
    def T(self) -> int:
        return len(self.patterns)

    @property
    def representation(self) -> str:
        kinds = {getattr(p, "representation", "callable") for p in self.patterns}
        return kinds.pop() if len(kinds) == 1 else "mixed"

    def evaluate(self, locations) -> np.ndarray:
        """Pattern values, shape ``(T, n)``."""
        locations = np.asarray(locations, float)
        return np.stack([np.asarray(p(locations), complex) for p in self.patterns])

    def bound(self) -> float:
        """Upper bound on ``|I_t(y)|`` over the pattern domains."""
        return max(float(p.bound()) for p in self.patterns)

    @classmethod
    def constant(cls, T: int = 1, value: complex = 1.0) -> "IlluminationSet":
        return cls(tuple(ConstantPattern(value) for _ in range(T)))


def build_illumination_matrix(illum: IlluminationSet, measure: DiscreteMeasure) -> np.ndarray:
    """``I[t, j] = I_t(y_j)`` as a ``(T, n)`` complex array."""
    if len(measure) == 0:
        return np.zeros((illum.T, 0), complex)
    return illum.evaluate(measure.locations)


def matched_sinusoids(T: int, spacing: float, direction=None, phases=None, n: int | None = None):
    """Complex sinusoids whose values on an equispaced chain form DFT rows.

    Pattern ``t`` has wavenumber ``2 pi t / (n * spacing)`` for
    ``t = 0..T-1`` along ``direction`` (2D) or the real line (1D), so at
    atoms ``y_1 + j * spacing`` the illumination matrix is the first ``T``
    rows of the ``n``-point DFT up to one unit phase per row.
    """
    n = T if n is None else int(n)
    if phases is None:
        phases = np.zeros(T)
    pats = []
    for t in range(T):
        k = 2 * np.pi * t / (n * spacing)
        wv = k if direction is None else k * np.asarray(direction, float)
        pats.append(SinusoidPattern(wv, phase=float(phases[t])))
    return IlluminationSet(tuple(pats))


def random_speckle(rng: np.random.Generator, omega: float, lo, hi, T: int = 1,
                   pitch: float | None = None, grain: float | None = None,
                   intensity: bool = True) -> IlluminationSet:
    """Random smooth patterns tabulated on a grid covering ``[lo, hi]``.

    A white complex field is low-passed to a correlation length ``grain``
    (default half a Rayleigh length), and either its normalised intensity
    (values in ``[0, 1]``) or its normalised complex amplitude is kept.
    """
    if pitch is None:
        pitch = (np.pi / omega) / 8
    if grain is None:
        grain = 0.5 * np.pi / omega
    lo = np.atleast_1d(np.asarray(lo, float))
    hi = np.atleast_1d(np.asarray(hi, float))
    counts = np.ceil((hi - lo) / pitch).astype(int) + 2
    pats = []
    for _ in range(T):
        field_ = rng.standard_normal(tuple(counts)) + 1j * rng.standard_normal(tuple(counts))
        spec = np.fft.fftn(field_)
        freqs = np.meshgrid(*[np.fft.fftfreq(c, d=pitch) for c in counts], indexing="ij")
        k2 = sum(f**2 for f in freqs)
        spec *= np.exp(-0.5 * k2 * (2 * np.pi * grain / 2.0) ** 2)
        smooth = np.fft.ifftn(spec)
        vals = np.abs(smooth) ** 2 if intensity else smooth
        vals = vals / np.max(np.abs(vals))
        pats.append(SpeckleGrid(vals, pitch, lo if lo.size > 1 else lo[0]))
    return IlluminationSet(tuple(pats))
