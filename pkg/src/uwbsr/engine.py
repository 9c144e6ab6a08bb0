"""Monte-Carlo BER estimation over SNR grids.

SNR is Eb/N0 at the receiver. Each channel response is scaled so that every
received pulse carries the transmitted pulse energy, and Eb counts every pulse
sent for a bit (TR therefore pays for its reference pulse).

Streams are split hierarchically: sweep seed -> SNR point index -> burst
index -> {0: bits, 1: channels, 2: noise}. Every number drawn is fixed by the
seed and its position in that tree, never by execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.stats import binomtest

from . import channel as chan
from .errors import ConfigurationError
from .modem import TD, TW, FrameConfig, pulse_train
from .pulse import PulseSpec, SampledWaveform, energy, gaussian_monocycle, grid_steps
from .receivers import (DecisionTrace, SrTemplate, arake_demodulate, dtr_demodulate,
                        integration_samples, prake_demodulate, sr_demodulate,
                        srake_demodulate, tr_demodulate)
from .streams import RandomStream

LINK_SCHEMES = ("arake", "srake", "prake", "tr", "dtr", "sr")
RAKES = ("arake", "srake", "prake")
COHERENCE = ("per-symbol", "per-2-symbols", "static")
DEFAULT_COHERENCE = {"dtr": "per-2-symbols"}


@dataclass(frozen=True)
class LinkConfig:
    """Complete description of one BER experiment.

    ``None`` for ``coherence``, ``tf`` and ``t_int`` selects the scheme's default.
    Rake receivers detect the SR (plain antipodal) waveform.
    """

    scheme: str = "sr"
    channel: str = "cm1"
    snr_db: tuple[float, ...] = tuple(float(x) for x in range(0, 21, 2))
    max_bits: int = 1_000_000
    min_errors: int = 100
    seed: int = 1
    coherence: str | None = None
    ns: int = 1
    dt: float = 0.025
    t_int: float | None = None
    tf: float | None = None
    td: float = TD
    tw: float = TW
    shadowing: bool = False
    sr_diff: bool = False
    dtr_delay: str = "tf"
    lb: int = 5
    lp: int = 5
    burst_bits: int = 200
    polarity: str = "random"
    pulse_order: int = 2

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.scheme not in LINK_SCHEMES:
            raise ConfigurationError(f"scheme: expected one of {LINK_SCHEMES}, got {self.scheme!r}")
        if not self.snr_db:
            raise ConfigurationError("snr: grid must not be empty")
        if self.min_errors < 1:
            raise ConfigurationError("min_errors: must be >= 1")
        if self.max_bits < 10 * self.min_errors:
            raise ConfigurationError(
                f"bits: max_bits={self.max_bits} must be >= 10*min_errors={10 * self.min_errors}")
        if self.coherence is not None and self.coherence not in COHERENCE:
            raise ConfigurationError(f"coherence: expected one of {COHERENCE}, got {self.coherence!r}")
        if self.dtr_delay not in ("tf", "td"):
            raise ConfigurationError(f"dtr_delay: expected 'tf' or 'td', got {self.dtr_delay!r}")
        if self.polarity not in ("random", "positive"):
            raise ConfigurationError(f"polarity: expected 'random' or 'positive', got {self.polarity!r}")
        if self.burst_bits < 2:
            raise ConfigurationError("burst_bits: need at least 2 bits per burst")
        if self.lb < 1 or self.lp < 1:
            raise ConfigurationError("lb/lp: must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed: must be an unsigned 64-bit integer")
        if not (self.channel in ("awgn", *chan.PRESETS) or self.channel.startswith("file:")):
            raise ConfigurationError(
                f"channel: expected awgn, cm1..cm4 or file:<path>, got {self.channel!r}")
        self.pulse_spec()
        self.frame_config()

    @property
    def modem_scheme(self) -> str:
        return "sr" if self.scheme in RAKES else self.scheme

    def pulse_spec(self) -> PulseSpec:
        try:
            return PulseSpec(self.pulse_order, self.tw, self.dt)
        except ConfigurationError as exc:
            raise ConfigurationError(f"tw/dt: {exc}") from None

    def channel_params(self) -> chan.ChannelParams | None:
        if self.channel not in chan.PRESETS:
            return None
        p = chan.PRESETS[self.channel]
        return replace(p, random_polarity=self.polarity == "random")

    def delay_spread(self) -> float:
        """99%-energy span used to default the integration window."""
        if self.channel == "awgn":
            return 0.0
        if self.channel in chan.T_MDS:
            return chan.T_MDS[self.channel]
        return chan.realization_stats(self.fixed_channel())[4]

    def fixed_channel(self) -> chan.ChannelRealization | None:
        if self.channel == "awgn":
            return chan.ChannelRealization.single_tap()
        if self.channel.startswith("file:"):
            return chan.read_realization(self.channel[5:])
        return None

    def frame_config(self) -> FrameConfig:
        try:
            base = FrameConfig.default(self.modem_scheme, td=self.td, ns=self.ns, tw=self.tw)
            if self.tf is not None:
                base = replace(base, tf=self.tf)
                FrameConfig(**{f.name: getattr(base, f.name) for f in fields(base)})
            base.frame_samples(self.dt)
            if base.scheme == "tr":
                grid_steps(base.td, self.dt, "td")
        except ConfigurationError as exc:
            raise ConfigurationError(f"tf/td/tw/ns: {exc}") from None
        if self.t_int is not None:
            t_int = self.t_int
        else:
            # window covers the pulse plus the channel's 99% span, capped by the frame
            cap = base.td if base.scheme == "tr" else base.tf
            t_int = min(cap, self.delay_spread() + self.tw)
            t_int = math.floor(t_int / self.dt + 1e-9) * self.dt
        try:
            grid_steps(t_int, self.dt, "t_int")
            return base.with_t_int(t_int)
        except ConfigurationError as exc:
            raise ConfigurationError(f"tint: {exc}") from None

    def resolved_coherence(self) -> str:
        if self.coherence is not None:
            return self.coherence
        return DEFAULT_COHERENCE.get(self.scheme, "per-symbol")


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    errors: int
    trials: int
    ber: float
    ci_low: float
    ci_high: float
    censored: bool = False


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(errors, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def snr_to_n0(snr_db: float, eb: float) -> float:
    if not eb > 0:
        raise ConfigurationError(f"energy per bit must be positive, got {eb}")
    return eb / 10.0 ** (snr_db / 10.0)


def awgn_add(w: SampledWaveform, n0: float, rng: RandomStream) -> SampledWaveform:
    """Add white Gaussian noise of two-sided density ``n0/2`` (variance ``n0/(2 dt)`` per sample)."""
    if n0 < 0:
        raise ConfigurationError(f"N0 must be non-negative, got {n0}")
    if n0 == 0:
        return w
    noise = rng.generator.standard_normal(len(w)) * math.sqrt(n0 / (2.0 * w.dt))
    return SampledWaveform(w.samples + noise, w.dt, w.t0)


@dataclass(eq=False)
class Burst:
    bits: np.ndarray
    received: SampledWaveform
    trace: DecisionTrace
    taps: list
    bit_channels: np.ndarray
    clean: SampledWaveform | None = None
    meta: dict = field(default_factory=dict)

    @property
    def errors(self) -> int:
        return self.trace.errors(self.bits)

    @property
    def counted(self) -> int:
        return self.trace.bits.size


class Link:
    """A resolved :class:`LinkConfig` that simulates bursts."""

    def __init__(self, cfg: LinkConfig):
        self.cfg = cfg
        self.frame = cfg.frame_config()
        self.pulse = gaussian_monocycle(cfg.pulse_spec())
        self.eb = self.frame.pulses_per_frame * self.frame.ns * energy(self.pulse)
        self.params = cfg.channel_params()
        self.fixed = cfg.fixed_channel()
        coherence = "static" if self.fixed is not None else cfg.resolved_coherence()
        self.block_bits = {"per-symbol": 1, "per-2-symbols": 2, "static": cfg.burst_bits}[coherence]
        self.coherence = coherence
        self.width = integration_samples(self.frame, cfg.dt)
        self.template = SrTemplate.build(self.pulse, self.width)
        self.differential_tx = cfg.scheme == "dtr" or (cfg.scheme == "sr" and cfg.sr_diff)
        self.span = self.params.max_span if self.params is not None else None

    def n0(self, snr_db: float) -> float:
        return snr_to_n0(snr_db, self.eb)

    def channel_taps(self, stream: RandomStream, n_blocks: int) -> tuple[list, list]:
        """Tap vectors and received pulse shapes, each scaled to the pulse energy."""
        taps, shapes = [], []
        e_pulse = energy(self.pulse)
        for j in range(n_blocks):
            if self.fixed is not None:
                real = self.fixed
            else:
                real = chan.draw_realization(self.params, stream.split(j))
            t = chan.discretize(real, self.cfg.dt, self.span)
            shape = chan.apply(t, self.pulse)
            scale = math.sqrt(e_pulse / energy(shape))
            if self.cfg.shadowing:
                scale *= real.shadowing
            taps.append(t.scaled(scale))
            shapes.append(shape.samples * scale)
        return taps, shapes

    def burst(self, stream: RandomStream, n0: float, bits=None, keep_clean: bool = False) -> Burst:
        cfg, frame = self.cfg, self.frame
        if bits is None:
            bits = 2 * stream.split(0).generator.integers(0, 2, cfg.burst_bits, dtype=np.int8) - 1
        bits = np.asarray(bits, dtype=np.int8)
        n_bits = bits.size
        bit_channels = np.arange(n_bits) // self.block_bits
        taps, shapes = self.channel_taps(stream.split(1), int(bit_channels[-1]) + 1)

        times, pols = pulse_train(bits, frame, differential=self.differential_tx)
        nf = frame.frame_samples(cfg.dt)
        n_frames = n_bits * frame.ns
        n_rx = n_frames * nf + nf + self.width
        rx = np.zeros(n_rx)
        pulse_bit = np.arange(times.size) // (frame.pulses_per_frame * frame.ns)
        for t, p, b in zip(times, pols, pulse_bit):
            k = grid_steps(t, cfg.dt)
            seg = shapes[bit_channels[b]][:n_rx - k]
            rx[k:k + seg.size] += p * seg
        clean = SampledWaveform(rx, cfg.dt, 0.0)
        received = awgn_add(clean, n0, stream.split(2))
        trace = self.demodulate(received, taps, bit_channels, n_bits, shapes)
        return Burst(bits, received, trace, taps, bit_channels, clean if keep_clean else None,
                     {"coherence": self.coherence, "n0": n0, "stream": str(stream)})

    def demodulate(self, received: SampledWaveform, taps, bit_channels, n_bits: int,
                   shapes=None) -> DecisionTrace:
        cfg, frame = self.cfg, self.frame
        if cfg.scheme == "arake":
            return arake_demodulate(received, taps, self.pulse, frame, bit_channels=bit_channels,
                                    n_bits=n_bits, shapes=shapes)
        if cfg.scheme == "srake":
            return srake_demodulate(received, taps, self.pulse, frame, cfg.lb,
                                    bit_channels=bit_channels, n_bits=n_bits)
        if cfg.scheme == "prake":
            return prake_demodulate(received, taps, self.pulse, frame, cfg.lp,
                                    bit_channels=bit_channels, n_bits=n_bits)
        if cfg.scheme == "tr":
            return tr_demodulate(received, frame, n_bits=n_bits)
        if cfg.scheme == "dtr":
            delay = frame.tf if cfg.dtr_delay == "tf" else frame.td
            return dtr_demodulate(received, frame, delay, n_bits=n_bits)
        return sr_demodulate(received, frame, self.template, differential=cfg.sr_diff, n_bits=n_bits)


def make_point(snr_db: float, errors: int, trials: int, min_errors: int) -> BerPoint:
    low, high = wilson_interval(errors, trials)
    censored = errors < min_errors
    ber = high if censored else errors / trials
    return BerPoint(float(snr_db), errors, trials, ber, low, high, censored)


def run_ber_point(cfg: LinkConfig, snr_db: float, stream: RandomStream, link: Link | None = None) -> BerPoint:
    """Simulate bursts until ``min_errors`` errors or ``max_bits`` counted bits.

    A point that stops on the bit budget is censored and reports the Wilson
    upper bound as its BER.
    """
    link = link or Link(cfg)
    n0 = link.n0(snr_db)
    errors = trials = 0
    k = 0
    while errors < cfg.min_errors and trials < cfg.max_bits:
        b = link.burst(stream.split(k), n0)
        errors += b.errors
        trials += b.counted
        k += 1
    return make_point(snr_db, errors, trials, cfg.min_errors)


def _point_job(args):
    cfg, index = args
    return run_ber_point(cfg, cfg.snr_db[index], RandomStream(cfg.seed).split(index))


def run_sweep(cfg: LinkConfig, workers: int = 1) -> list[BerPoint]:
    """All grid points, ordered by SNR; identical for any ``workers``."""
    jobs = [(cfg, i) for i in range(len(cfg.snr_db))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            points = list(pool.map(_point_job, jobs))
    else:
        link = Link(cfg)
        root = RandomStream(cfg.seed)
        points = [run_ber_point(cfg, cfg.snr_db[i], root.split(i), link) for i in range(len(jobs))]
    return sorted(points, key=lambda p: p.snr_db)


def q_function(x):
    from scipy.special import erfc
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0))


def antipodal_ber(ebn0_db):
    """Closed-form coherent antipodal BER ``Q(sqrt(2 Eb/N0))``."""
    return q_function(np.sqrt(2.0 * 10.0 ** (np.asarray(ebn0_db) / 10.0)))
