"""Detectors: coherent Rake variants and the autocorrelation receivers.

Every receiver assumes perfect frame timing: frame ``f`` of the burst starts
at ``t = f*Tf`` on the received waveform's time axis and is integrated over
``[f*Tf, f*Tf + T_int)``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .channel import TapVector, apply
from .errors import ConfigurationError
from .modem import FrameConfig
from .pulse import SampledWaveform, grid_steps


@dataclass(frozen=True, eq=False)
class DecisionTrace:
    """Receiver output for one burst.

    ``bits[j]`` and ``statistics[j]`` refer to transmitted bit ``first_bit + j``;
    differential detectors cannot decide bit 0 and start at 1.
    """

    statistics: np.ndarray
    bits: np.ndarray
    frame_statistics: np.ndarray
    first_bit: int = 0

    def errors(self, tx_bits) -> int:
        ref = np.asarray(tx_bits)[self.first_bit:self.first_bit + self.bits.size]
        return int(np.count_nonzero(ref != self.bits))


def integration_samples(cfg: FrameConfig, dt: float) -> int:
    if cfg.t_int is None:
        t_int = cfg.td if cfg.scheme == "tr" else cfg.tf
    else:
        t_int = cfg.t_int
    return grid_steps(t_int, dt, "integration window t_int")


def frame_windows(received: SampledWaveform, n_frames: int, frame_len: int, width: int,
                  offset: int = 0) -> np.ndarray:
    """Matrix of ``width`` samples starting at ``f*frame_len + offset`` for each frame.

    Samples outside the received waveform read as zero.
    """
    base = received.index_of(0.0) + offset
    starts = base + np.arange(n_frames) * frame_len
    left = max(0, -int(starts.min()))
    right = max(0, int(starts.max()) + width - len(received))
    padded = np.concatenate([np.zeros(left), received.samples, np.zeros(right)])
    return sliding_window_view(padded, width)[starts + left]


def lowpass_integrate(statistics, ns: int) -> np.ndarray:
    """Integrate-and-dump: mean of each bit's ``ns`` frame statistics."""
    y = np.asarray(statistics, dtype=float)
    if ns < 1 or y.size % ns:
        raise ValueError(f"{y.size} frame statistics do not split into bits of {ns} frames")
    return y.reshape(-1, ns).mean(axis=1)


def _hard(v: np.ndarray) -> np.ndarray:
    return np.where(v >= 0, 1, -1).astype(np.int8)


def _decide(frame_stats: np.ndarray, ns: int, differential: bool) -> DecisionTrace:
    if differential:
        # soft product of consecutive frames; bit 0 has no predecessor
        z = np.concatenate([[0.0], frame_stats[1:] * frame_stats[:-1]])
        per_bit = lowpass_integrate(z[ns:], ns)
        return DecisionTrace(per_bit, _hard(per_bit), frame_stats, 1)
    per_bit = lowpass_integrate(frame_stats, ns)
    return DecisionTrace(per_bit, _hard(per_bit), frame_stats, 0)


def _n_frames(received: SampledWaveform, cfg: FrameConfig, n_bits: int | None) -> int:
    if n_bits is not None:
        return n_bits * cfg.ns
    nf = cfg.frame_samples(received.dt)
    n = (len(received) - received.index_of(0.0)) // (nf * cfg.ns)
    if n < 1:
        raise ConfigurationError("received waveform shorter than one bit")
    return n * cfg.ns


# -- coherent Rake family ---------------------------------------------------

def select_strongest(taps: TapVector, count: int) -> TapVector:
    """Keep the ``count`` largest-magnitude bins (SRake)."""
    nz = taps.nonzero()
    if not 1 <= count <= nz.size:
        raise ConfigurationError(f"Lb={count} outside 1..{nz.size} resolvable taps")
    order = nz[np.argsort(-np.abs(taps.values[nz]), kind="stable")][:count]
    values = np.zeros_like(taps.values)
    values[order] = taps.values[order]
    return TapVector(values, taps.dt, dict(taps.meta, selected=f"strongest {count}"))


def select_earliest(taps: TapVector, count: int) -> TapVector:
    """Keep the first ``count`` non-empty bins (PRake)."""
    nz = taps.nonzero()
    if not 1 <= count <= nz.size:
        raise ConfigurationError(f"Lp={count} outside 1..{nz.size} resolvable taps")
    values = np.zeros_like(taps.values)
    values[nz[:count]] = taps.values[nz[:count]]
    return TapVector(values, taps.dt, dict(taps.meta, selected=f"earliest {count}"))


def captured_energy(taps: TapVector) -> float:
    """Channel energy collected by a (possibly partial) Rake: sum of kept tap powers."""
    return taps.energy


def _as_tap_list(taps) -> list[TapVector]:
    if taps is None:
        raise ConfigurationError("Rake receivers need the channel taps (perfect channel knowledge)")
    taps = [taps] if isinstance(taps, TapVector) else list(taps)
    if not taps:
        raise ConfigurationError("Rake receivers need the channel taps (perfect channel knowledge)")
    return taps


def rake_templates(taps: Sequence[TapVector], pulse: SampledWaveform, width: int) -> np.ndarray:
    rows = np.zeros((len(taps), width))
    for j, t in enumerate(taps):
        p = apply(t, pulse).samples[:width]
        rows[j, :p.size] = p
    return rows


def arake_demodulate(received: SampledWaveform, taps, pulse: SampledWaveform, cfg: FrameConfig,
                     *, bit_channels=None, differential: bool = False,
                     n_bits: int | None = None, shapes=None) -> DecisionTrace:
    """Correlate each frame with the channel-shaped pulse (all paths).

    ``taps`` is one tap vector or one per coherence block, with
    ``bit_channels[i]`` naming the block of bit ``i``. Set ``differential`` for
    differentially encoded bursts. ``shapes`` may carry the already computed
    ``apply(taps[j], pulse)`` sample arrays.
    """
    taps = _as_tap_list(taps)
    n_frames = _n_frames(received, cfg, n_bits)
    width = integration_samples(cfg, received.dt)
    frames = frame_windows(received, n_frames, cfg.frame_samples(received.dt), width)
    if shapes is None:
        templates = rake_templates(taps, pulse, width)
    else:
        templates = np.zeros((len(shapes), width))
        for j, p in enumerate(shapes):
            templates[j, :min(width, p.size)] = p[:width]
    if bit_channels is None:
        bit_channels = np.zeros(n_frames // cfg.ns, dtype=int)
    per_frame_channel = np.repeat(np.asarray(bit_channels, dtype=int), cfg.ns)
    if per_frame_channel.size != n_frames:
        raise ConfigurationError("bit_channels must name one channel per bit")
    y = np.einsum("fk,fk->f", frames, templates[per_frame_channel]) * received.dt
    return _decide(y, cfg.ns, differential)


def srake_demodulate(received, taps, pulse, cfg, lb: int, **kw) -> DecisionTrace:
    return arake_demodulate(received, [select_strongest(t, lb) for t in _as_tap_list(taps)],
                            pulse, cfg, **kw)


def prake_demodulate(received, taps, pulse, cfg, lp: int, **kw) -> DecisionTrace:
    return arake_demodulate(received, [select_earliest(t, lp) for t in _as_tap_list(taps)],
                            pulse, cfg, **kw)


# -- autocorrelation receivers ---------------------------------------------

def tr_demodulate(received: SampledWaveform, cfg: FrameConfig, n_bits: int | None = None) -> DecisionTrace:
    """Use each frame's received reference pulse as the template for its data pulse."""
    if cfg.scheme != "tr":
        raise ConfigurationError(f"tr_demodulate needs a TR frame config, got {cfg.scheme!r}")
    n_frames = _n_frames(received, cfg, n_bits)
    nf = cfg.frame_samples(received.dt)
    width = integration_samples(cfg, received.dt)
    d = grid_steps(cfg.td, received.dt, "td")
    ref = frame_windows(received, n_frames, nf, width)
    data = frame_windows(received, n_frames, nf, width, offset=d)
    y = np.einsum("fk,fk->f", ref, data) * received.dt
    return _decide(y, cfg.ns, False)


def dtr_demodulate(received: SampledWaveform, cfg: FrameConfig, delay: float | None = None,
                   n_bits: int | None = None) -> DecisionTrace:
    """Correlate each frame with the received signal delayed by ``delay``.

    The default delay is one frame, pairing every pulse with its predecessor.
    Frame 0 has no predecessor and bit 0 is not decided.
    """
    if cfg.scheme != "dtr":
        raise ConfigurationError(f"dtr_demodulate needs a DTR frame config, got {cfg.scheme!r}")
    n_frames = _n_frames(received, cfg, n_bits)
    nf = cfg.frame_samples(received.dt)
    width = integration_samples(cfg, received.dt)
    d = grid_steps(cfg.tf if delay is None else delay, received.dt, "DTR delay")
    cur = frame_windows(received, n_frames, nf, width)
    prev = frame_windows(received, n_frames, nf, width, offset=-d)
    y = np.einsum("fk,fk->f", cur, prev) * received.dt
    y[:1] = 0.0
    per_bit = lowpass_integrate(y[cfg.ns:], cfg.ns)
    return DecisionTrace(per_bit, _hard(per_bit), y, 1)


@dataclass(frozen=True, eq=False)
class SrTemplate:
    """Gate multiplying ``|r|``: the monocycle over ``(0, Tw)``, exactly 1 after."""

    gate: np.ndarray
    dt: float

    @classmethod
    def build(cls, pulse: SampledWaveform, width: int) -> SrTemplate:
        gate = np.ones(width)
        n = min(width, len(pulse))
        gate[:n] = pulse.samples[:n]
        gate.flags.writeable = False
        return cls(gate, pulse.dt)


def sr_reference(frame: np.ndarray, template: SrTemplate) -> np.ndarray:
    return np.abs(frame) * template.gate


def sr_demodulate(received: SampledWaveform, cfg: FrameConfig, template: SrTemplate,
                  *, differential: bool = False, n_bits: int | None = None) -> DecisionTrace:
    """Self-reference detection: each frame is correlated with ``|r| * q`` of itself.

    ``differential`` adds the optional post-detection differential decoder,
    which only makes sense for a differentially encoded transmitter.
    """
    if cfg.scheme != "sr":
        raise ConfigurationError(f"sr_demodulate needs an SR frame config, got {cfg.scheme!r}")
    if abs(template.dt - received.dt) > 1e-12 * received.dt:
        raise ConfigurationError("SR template grid does not match the received waveform")
    width = integration_samples(cfg, received.dt)
    if template.gate.size != width:
        raise ConfigurationError(
            f"SR template spans {template.gate.size} samples, integration window {width}")
    n_frames = _n_frames(received, cfg, n_bits)
    r = frame_windows(received, n_frames, cfg.frame_samples(received.dt), width)
    y = np.einsum("fk,fk->f", r, sr_reference(r, template)) * received.dt
    return _decide(y, cfg.ns, differential)
