"""Bit-to-waveform mapping for the TR, DTR and SR transmitters."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .pulse import SampledWaveform, grid_steps

TW = 0.7
TF_DTR = 10.75
TF_SR = 5.375
TD = 8.75
# Not given for conventional TR; two DTR frames keep TR at half the DTR bit rate.
TF_TR = 2 * TF_DTR

SCHEMES = ("tr", "dtr", "sr")


@dataclass(frozen=True)
class FrameConfig:
    """Frame timing in ns. ``t_int`` of None means "choose from the channel"."""

    scheme: str
    tf: float
    td: float = TD
    ns: int = 1
    tw: float = TW
    t_int: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if int(self.ns) != self.ns or self.ns < 1:
            raise ConfigurationError(f"ns must be an integer >= 1, got {self.ns}")
        if not 0 < self.tw <= self.tf:
            raise ConfigurationError(f"need 0 < tw <= tf (tw={self.tw}, tf={self.tf})")
        if self.scheme == "tr" and not (self.td >= self.tw and self.td + self.tw <= self.tf):
            raise ConfigurationError(
                f"TR needs td >= tw and td + tw <= tf (td={self.td}, tw={self.tw}, tf={self.tf})")
        if self.t_int is not None and not self.t_int > 0:
            raise ConfigurationError(f"t_int must be positive, got {self.t_int}")

    @classmethod
    def default(cls, scheme: str, **overrides) -> FrameConfig:
        tf = {"tr": TF_TR, "dtr": TF_DTR, "sr": TF_SR}.get(scheme)
        if tf is None:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
        overrides.setdefault("tf", tf)
        return cls(scheme, **overrides)

    @property
    def pulses_per_frame(self) -> int:
        return 2 if self.scheme == "tr" else 1

    def with_t_int(self, t_int: float) -> FrameConfig:
        return replace(self, t_int=t_int)

    def frame_samples(self, dt: float) -> int:
        return grid_steps(self.tf, dt, "frame duration tf")


def check_bits(bits) -> np.ndarray:
    b = np.asarray(bits)
    if b.ndim != 1 or b.size == 0:
        raise ConfigurationError("bit block must be a non-empty 1-D sequence")
    if not np.all((b == 1) | (b == -1)):
        raise ConfigurationError("bits must take values +1 or -1 only")
    return b.astype(np.int8)


def encode_differential(bits, ns: int = 1, m_init: int = 1) -> np.ndarray:
    """Per-frame polarities ``m_i = m_{i-1} * b_{floor(i/ns)}`` with ``m_{-1} = m_init``."""
    b = check_bits(bits)
    if m_init not in (1, -1):
        raise ConfigurationError("m_init must be +1 or -1")
    return (m_init * np.cumprod(np.repeat(b, ns))).astype(np.int8)


def decode_differential(m, ns: int = 1) -> np.ndarray:
    """Invert :func:`encode_differential`: bit ``i`` is ``m_{i*ns} * m_{i*ns - 1}``.

    Bit 0 needs ``m_{-1}`` and is therefore not returned.
    """
    m = np.asarray(m)
    first = np.arange(1, m.size // ns) * ns
    return (m[first] * m[first - 1]).astype(np.int8)


def pulse_train(bits, cfg: FrameConfig, m_init: int = 1, differential: bool | None = None):
    """Pulse start times (ns) and polarities for a burst.

    ``differential`` defaults to True for DTR only; SR can opt in for the
    optional differential detector.
    """
    b = check_bits(bits)
    n_frames = b.size * cfg.ns
    starts = np.arange(n_frames) * cfg.tf
    if differential is None:
        differential = cfg.scheme == "dtr"
    if cfg.scheme == "tr":
        data = np.repeat(b, cfg.ns)
        times = np.stack([starts, starts + cfg.td], axis=1).ravel()
        pols = np.stack([np.ones(n_frames, dtype=np.int8), data], axis=1).ravel()
        return times, pols
    if differential:
        return starts, encode_differential(b, cfg.ns, m_init)
    return starts, np.repeat(b, cfg.ns)


def burst_duration(cfg: FrameConfig, n_bits: int) -> float:
    """Air time of ``n_bits``: the span of their frames."""
    return n_bits * cfg.ns * cfg.tf


def synthesize(times, polarities, pulse: SampledWaveform, n_samples: int) -> SampledWaveform:
    out = np.zeros(n_samples)
    n = len(pulse)
    for t, p in zip(times, polarities):
        k = grid_steps(t, pulse.dt, "pulse position")
        out[k:k + n] += p * pulse.samples[:max(0, n_samples - k)]
    return SampledWaveform(out, pulse.dt, 0.0)


def _build(bits, cfg: FrameConfig, pulse: SampledWaveform, scheme: str, **kw) -> SampledWaveform:
    if cfg.scheme != scheme:
        raise ConfigurationError(f"frame config is for {cfg.scheme!r}, not {scheme!r}")
    b = check_bits(bits)
    times, pols = pulse_train(b, cfg, **kw)
    n = cfg.frame_samples(pulse.dt) * b.size * cfg.ns + len(pulse)
    return synthesize(times, pols, pulse, n)


def build_dtr_signal(bits, cfg: FrameConfig, pulse: SampledWaveform, m_init: int = 1) -> SampledWaveform:
    return _build(bits, cfg, pulse, "dtr", m_init=m_init)


def build_sr_signal(bits, cfg: FrameConfig, pulse: SampledWaveform, differential: bool = False) -> SampledWaveform:
    return _build(bits, cfg, pulse, "sr", differential=differential)


def build_tr_signal(bits, cfg: FrameConfig, pulse: SampledWaveform) -> SampledWaveform:
    return _build(bits, cfg, pulse, "tr")
