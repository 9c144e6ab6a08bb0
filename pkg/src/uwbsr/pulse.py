"""Gaussian-monocycle synthesis and elementary waveform algebra.

Waveforms are stored as samples on a uniform grid. Sample ``k`` stands for the
bin ``[t0 + k*dt, t0 + (k+1)*dt)``, so a pulse occupying ``(0, Tw)`` with
``Tw = n*dt`` is exactly ``n`` samples long starting at ``t0 = 0``.
All times are in nanoseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite_e
from scipy.optimize import brentq

from .errors import ConfigurationError

GRID_TOL = 1e-9
TRUNCATION_LEVEL = 1e-4


def grid_steps(t: float, dt: float, what: str = "time") -> int:
    """Return ``t / dt`` as an integer, raising if ``t`` is off the grid."""
    n = t / dt
    k = round(n)
    if abs(n - k) > GRID_TOL * max(1.0, abs(n)):
        raise ConfigurationError(f"{what}={t} ns is not a multiple of dt={dt} ns")
    return int(k)


@dataclass(frozen=True, eq=False)
class SampledWaveform:
    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ConfigurationError("waveform needs a non-empty 1-D sample array")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return len(self) * self.dt

    @property
    def t_end(self) -> float:
        return self.t0 + self.duration

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) * self.dt

    def index_of(self, t: float) -> int:
        return grid_steps(t - self.t0, self.dt, "time offset")

    def shifted(self, delay: float) -> SampledWaveform:
        return SampledWaveform(self.samples, self.dt, self.t0 + delay)

    def padded_to(self, t_start: float, t_end: float) -> np.ndarray:
        """Samples over ``[t_start, t_end)``, zero outside this waveform."""
        i0 = self.index_of(t_start)
        n = grid_steps(t_end - t_start, self.dt, "window length")
        out = np.zeros(n)
        lo, hi = max(i0, 0), min(i0 + n, len(self))
        if hi > lo:
            out[lo - i0:hi - i0] = self.samples[lo:hi]
        return out

    def _check_grid(self, other: SampledWaveform):
        if not math.isclose(self.dt, other.dt, rel_tol=1e-12):
            raise ConfigurationError(f"sample interval mismatch: {self.dt} vs {other.dt}")
        grid_steps(other.t0 - self.t0, self.dt, "relative start time")

    def __add__(self, other):
        if not isinstance(other, SampledWaveform):
            return NotImplemented
        self._check_grid(other)
        t0 = min(self.t0, other.t0)
        t1 = max(self.t_end, other.t_end)
        return SampledWaveform(self.padded_to(t0, t1) + other.padded_to(t0, t1), self.dt, t0)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return SampledWaveform(-self.samples, self.dt, self.t0)

    def __mul__(self, scale):
        if isinstance(scale, SampledWaveform):
            return NotImplemented
        return SampledWaveform(self.samples * float(scale), self.dt, self.t0)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PulseSpec:
    derivative_order: int = 2
    width: float = 0.7
    dt: float = 0.025

    def __post_init__(self):
        if int(self.derivative_order) != self.derivative_order or self.derivative_order < 1:
            raise ConfigurationError(
                f"derivative_order must be an integer >= 1, got {self.derivative_order}")
        if not self.dt > 0 or not self.width > 0:
            raise ConfigurationError("pulse width and dt must be positive")
        grid_steps(self.width, self.dt, "pulse width Tw")

    @property
    def n_samples(self) -> int:
        return grid_steps(self.width, self.dt)


def monocycle_shape(order: int, u: np.ndarray) -> np.ndarray:
    """Unnormalized order-``n`` derivative of ``exp(-u**2/2)`` (sign included)."""
    coef = np.zeros(order + 1)
    coef[order] = 1.0
    return (-1) ** order * hermite_e.hermeval(u, coef) * np.exp(-u * u / 2)


def truncation_point(order: int, level: float = TRUNCATION_LEVEL) -> float:
    """Normalized half-width ``u`` where the outer tail falls to ``level`` of peak."""
    coef = np.zeros(order + 1)
    coef[order] = 1.0
    last_zero = max(hermite_e.hermeroots(coef).real.max(), 0.0) if order > 0 else 0.0
    u = np.linspace(0.0, last_zero + 12.0, 20001)
    peak = np.abs(monocycle_shape(order, u)).max()
    # past the last zero |f| has a single maximum and then decays monotonically
    tail = u[u > last_zero]
    u_max = tail[np.argmax(np.abs(monocycle_shape(order, tail)))]
    f = lambda x: abs(monocycle_shape(order, np.array([x]))[0]) / peak - level
    return brentq(f, u_max, last_zero + 12.0, xtol=1e-14)


def gaussian_monocycle(spec: PulseSpec = PulseSpec()) -> SampledWaveform:
    """Unit-energy Gaussian monocycle supported on ``(0, Tw)``.

    The Gaussian is centred at ``Tw/2`` with its spread chosen so that the
    truncation level ``1e-4`` of peak falls exactly on the support edges.
    Polarity is fixed so the largest lobe is positive.
    """
    n = spec.n_samples
    sigma = (spec.width / 2) / truncation_point(spec.derivative_order)
    t = (np.arange(n) + 0.5) * spec.dt - spec.width / 2
    s = monocycle_shape(spec.derivative_order, t / sigma)
    if s[np.argmax(np.abs(s))] < 0:
        s = -s
    s /= math.sqrt(np.sum(s * s) * spec.dt)
    return SampledWaveform(s, spec.dt, 0.0)


def energy(w: SampledWaveform) -> float:
    return float(np.dot(w.samples, w.samples) * w.dt)


def correlate(a: SampledWaveform, b: SampledWaveform, window: tuple[float, float]) -> float:
    """Riemann-sum inner product of ``a`` and ``b`` over ``[t_start, t_end)``.

    Both waveforms must cover the window; the window edges must lie on the grid.
    """
    a._check_grid(b)
    t_start, t_end = window
    if not t_end > t_start:
        raise ConfigurationError(f"empty correlation window {window}")
    for w in (a, b):
        tol = GRID_TOL * w.dt
        if t_start < w.t0 - tol or t_end > w.t_end + tol:
            raise ConfigurationError(
                f"window {window} exceeds waveform extent [{w.t0}, {w.t_end})")
    xa = a.padded_to(t_start, t_end)
    xb = b.padded_to(t_start, t_end)
    return float(np.dot(xa, xb) * a.dt)
