import numpy as np
import pytest
from scipy.special import erfc

from uwbsr import channel as chan
from uwbsr.engine import Link, LinkConfig, awgn_add
from uwbsr.errors import ConfigurationError
from uwbsr.modem import FrameConfig, build_dtr_signal, build_sr_signal, build_tr_signal
from uwbsr.pulse import SampledWaveform, correlate, energy, gaussian_monocycle
from uwbsr.receivers import (SrTemplate, arake_demodulate, captured_energy, dtr_demodulate,
                             frame_windows, lowpass_integrate, prake_demodulate, select_earliest,
                             select_strongest, sr_demodulate, sr_reference, srake_demodulate,
                             tr_demodulate)
from uwbsr.streams import RandomStream

DT = 0.025
SINGLE = chan.discretize(chan.ChannelRealization.single_tap(), DT)


@pytest.fixture(scope="module")
def pulse():
    return gaussian_monocycle()


def cm1_taps(seed=0, name="cm1"):
    return chan.discretize(chan.draw_realization(chan.PRESETS[name], RandomStream(seed)), DT)


def random_bits(n, seed=0):
    return 2 * np.random.default_rng(seed).integers(0, 2, n) - 1


def sr_cfg(**kw):
    return FrameConfig.default("sr", **kw).with_t_int(kw.get("tf", 5.375))


# -- integrate and dump -------------------------------------------------------

def test_lowpass_examples():
    np.testing.assert_array_equal(lowpass_integrate([1.0, -2.0, 3.0], 1), [1.0, -2.0, 3.0])
    np.testing.assert_array_equal(lowpass_integrate([1.0, 3.0], 2), [2.0])
    v = np.random.default_rng(3).standard_normal(40)
    brute = [sum(v[4 * i:4 * i + 4]) / 4 for i in range(10)]
    np.testing.assert_allclose(lowpass_integrate(v, 4), brute, rtol=1e-14)
    with pytest.raises(ValueError):
        lowpass_integrate(v[:7], 2)


def test_frame_windows_zero_pad():
    w = SampledWaveform(np.arange(5.0), 1.0)
    m = frame_windows(w, 3, 2, 3)
    np.testing.assert_array_equal(m, [[0, 1, 2], [2, 3, 4], [4, 0, 0]])
    m = frame_windows(w, 2, 2, 2, offset=-1)
    np.testing.assert_array_equal(m, [[0, 0], [1, 2]])


# -- Rake family --------------------------------------------------------------

def test_arake_noiseless_single_tap(pulse):
    cfg = sr_cfg()
    rx = chan.apply(SINGLE, build_sr_signal([1, -1], cfg, pulse))
    tr = arake_demodulate(rx, SINGLE, pulse, cfg)
    assert list(tr.bits) == [1, -1]
    assert tr.statistics == pytest.approx([1.0, -1.0])


def test_arake_statistic_is_window_correlation(pulse):
    taps = cm1_taps(4)
    cfg = sr_cfg()
    bits = random_bits(6, 4)
    rx = chan.apply(taps, build_sr_signal(bits, cfg, pulse))
    tr = arake_demodulate(rx, taps, pulse, cfg, n_bits=6)
    template = chan.apply(taps, pulse)
    for f in range(6):
        t0 = f * cfg.tf
        seg = SampledWaveform(rx.padded_to(t0, t0 + cfg.t_int), DT, t0)
        ref = SampledWaveform(template.padded_to(0.0, cfg.t_int), DT, t0)
        assert tr.frame_statistics[f] == pytest.approx(correlate(seg, ref, (t0, t0 + cfg.t_int)), rel=1e-10)


def test_arake_noiseless_cm1_without_isi(pulse):
    taps = cm1_taps(1)
    cfg = sr_cfg(tf=201.0)
    bits = random_bits(100, 1)
    rx = chan.apply(taps, build_sr_signal(bits, cfg, pulse))
    assert arake_demodulate(rx, taps, pulse, cfg, n_bits=100).errors(bits) == 0


def test_arake_awgn_matches_q_function(pulse):
    # Tf = Tw: a single-tap channel has no ISI, so frames can be packed back to back
    cfg = FrameConfig("sr", tf=0.7).with_t_int(0.7)
    ebn0_db, n_bits, chunk = 4.0, 1_000_000, 100_000
    n0 = energy(pulse) / 10 ** (ebn0_db / 10)
    errors = 0
    for k in range(n_bits // chunk):
        bits = random_bits(chunk, 100 + k)
        tx = build_sr_signal(bits, cfg, pulse)
        rx = awgn_add(tx, n0, RandomStream(7).split(k))
        errors += arake_demodulate(rx, SINGLE, pulse, cfg, n_bits=chunk).errors(bits)
    p = 0.5 * erfc(np.sqrt(10 ** (ebn0_db / 10)))
    sigma = np.sqrt(p * (1 - p) / n_bits)
    assert abs(errors / n_bits - p) < 3 * sigma


def test_srake_all_taps_equals_arake(pulse):
    rng = RandomStream(9)
    taps = cm1_taps(9)
    cfg = sr_cfg()
    bits = random_bits(50, 9)
    rx = awgn_add(chan.apply(taps, build_sr_signal(bits, cfg, pulse)), 0.3, rng)
    a = arake_demodulate(rx, taps, pulse, cfg, n_bits=50)
    s = srake_demodulate(rx, taps, pulse, cfg, lb=taps.nonzero().size, n_bits=50)
    np.testing.assert_array_equal(a.bits, s.bits)
    np.testing.assert_allclose(a.statistics, s.statistics, rtol=1e-12)


def test_prake_single_tap_equals_arake(pulse):
    cfg = sr_cfg()
    bits = random_bits(30, 2)
    rx = awgn_add(chan.apply(SINGLE, build_sr_signal(bits, cfg, pulse)), 0.5, RandomStream(2))
    a = arake_demodulate(rx, SINGLE, pulse, cfg)
    p = prake_demodulate(rx, SINGLE, pulse, cfg, lp=1)
    np.testing.assert_array_equal(a.statistics, p.statistics)


def test_partial_rake_energy_monotone():
    for seed in range(20):
        taps = cm1_taps(seed)
        n = taps.nonzero().size
        strongest = [captured_energy(select_strongest(taps, k)) for k in range(1, n + 1)]
        earliest = [captured_energy(select_earliest(taps, k)) for k in range(1, n + 1)]
        assert np.all(np.diff(strongest) >= 0)
        assert np.all(np.diff(earliest) >= 0)
        assert strongest[-1] == pytest.approx(taps.energy)
        e1, e4, eall = (captured_energy(select_strongest(taps, k)) for k in (1, 4, n))
        assert e1 <= e4 <= eall
        # strongest-first selection dominates earliest-first at equal finger count
        assert all(s >= e - 1e-15 for s, e in zip(strongest, earliest))


def test_partial_rake_range_errors(pulse):
    taps = cm1_taps(0)
    with pytest.raises(ConfigurationError):
        select_strongest(taps, 0)
    with pytest.raises(ConfigurationError):
        select_earliest(taps, taps.nonzero().size + 1)
    with pytest.raises(ConfigurationError):
        arake_demodulate(SampledWaveform(np.zeros(500), DT), None, pulse, sr_cfg())


# -- DTR -----------------------------------------------------------------------

def dtr_cfg(**kw):
    cfg = FrameConfig.default("dtr", **kw)
    return cfg.with_t_int(cfg.tf)


def test_dtr_noiseless_single_tap(pulse):
    cfg = dtr_cfg()
    # with m_init = +1, bits (+1, +1) give m = (+1, +1) and bits (+1, -1) give m = (+1, -1)
    rx = chan.apply(SINGLE, build_dtr_signal([1, 1], cfg, pulse))
    tr = dtr_demodulate(rx, cfg)
    assert tr.frame_statistics[1] == pytest.approx(energy(pulse))
    assert list(tr.bits) == [1] and tr.first_bit == 1
    rx = chan.apply(SINGLE, build_dtr_signal([1, -1], cfg, pulse))
    tr = dtr_demodulate(rx, cfg)
    assert tr.frame_statistics[1] == pytest.approx(-energy(pulse))
    assert list(tr.bits) == [-1]


def test_dtr_noiseless_cm1_without_isi(pulse):
    taps = cm1_taps(5)
    cfg = dtr_cfg(tf=201.0)
    bits = random_bits(100, 5)
    rx = chan.apply(taps, build_dtr_signal(bits, cfg, pulse))
    tr = dtr_demodulate(rx, cfg, n_bits=100)
    assert tr.bits.size == 99
    assert tr.errors(bits) == 0


def test_dtr_delay_must_be_on_grid(pulse):
    cfg = dtr_cfg()
    rx = chan.apply(SINGLE, build_dtr_signal([1, 1], cfg, pulse))
    with pytest.raises(ConfigurationError):
        dtr_demodulate(rx, cfg, delay=8.76)
    assert dtr_demodulate(rx, cfg, delay=8.75).bits.size == 1


# -- TR ------------------------------------------------------------------------

def test_tr_noiseless_single_tap(pulse):
    cfg = FrameConfig.default("tr")
    cfg = cfg.with_t_int(cfg.tw)
    for b in (1, -1):
        rx = chan.apply(SINGLE, build_tr_signal([b], cfg, pulse))
        tr = tr_demodulate(rx, cfg)
        assert np.sign(tr.statistics[0]) == b
        assert tr.statistics[0] == pytest.approx(b * energy(pulse))


# -- SR ------------------------------------------------------------------------

def test_sr_template_shape(pulse):
    q = SrTemplate.build(pulse, 215)
    np.testing.assert_array_equal(q.gate[:28], pulse.samples)
    assert np.all(q.gate[28:] == 1.0)


def test_sr_reference_positive_for_negative_bit(pulse):
    cfg = sr_cfg()
    q = SrTemplate.build(pulse, 215)
    rx = chan.apply(SINGLE, build_sr_signal([-1], cfg, pulse))
    r = frame_windows(rx, 1, 215, 215)[0]
    ref = sr_reference(r, q)
    # |r| * q is positive wherever the gate is (outside the pulse the gate is exactly 1)
    assert np.all(ref[28:] >= 0)
    np.testing.assert_array_equal(ref, np.abs(r) * q.gate)
    np.testing.assert_array_equal(sr_reference(-r, q), ref)


def test_sr_antipodal_statistics(pulse):
    cfg = sr_cfg()
    q = SrTemplate.build(pulse, 215)
    rx = chan.apply(SINGLE, build_sr_signal([1, -1], cfg, pulse))
    tr = sr_demodulate(rx, cfg, q)
    assert tr.statistics[0] > 0
    assert tr.statistics[0] == pytest.approx(-tr.statistics[1], rel=1e-12)
    assert list(tr.bits) == [1, -1]


def test_sr_noiseless_cm1_statistic_follows_bit_times_channel_sign(pulse):
    # With random ray polarity the SR statistic of bit b is b * C + ISI, where
    # C = sum p|p|q over the window is a property of the realization. The
    # detector beats the inverted rule exactly when C > 0 and loses when C < 0.
    cfg = sr_cfg()
    q = SrTemplate.build(pulse, 215)
    wins = {True: [0, 0], False: [0, 0]}
    for seed in range(40):
        taps = cm1_taps(seed)
        p = chan.apply(taps, pulse).padded_to(0.0, cfg.t_int)
        c_positive = float(np.sum(p * np.abs(p) * q.gate)) > 0
        bits = random_bits(100, seed)
        rx = chan.apply(taps, build_sr_signal(bits, cfg, pulse))
        e = sr_demodulate(rx, cfg, q, n_bits=100).errors(bits)
        wins[c_positive][0] += e
        wins[c_positive][1] += 100 - e
    assert wins[True][0] < wins[True][1]
    assert wins[False][0] > wins[False][1]


def test_sr_noiseless_positive_polarity_beats_inverted_rule(pulse):
    params = chan.ChannelParams(0.0233, 2.5, 7.1, 4.3, name="cm1", random_polarity=False)
    cfg = sr_cfg()
    q = SrTemplate.build(pulse, 215)
    errors = flipped = 0
    for seed in range(20):
        taps = chan.discretize(chan.draw_realization(params, RandomStream(seed)), DT)
        bits = random_bits(100, seed)
        e = sr_demodulate(chan.apply(taps, build_sr_signal(bits, cfg, pulse)), cfg, q, n_bits=100).errors(bits)
        errors += e
        flipped += 100 - e
    assert errors < flipped


def test_sr_template_mismatch(pulse):
    cfg = sr_cfg()
    rx = chan.apply(SINGLE, build_sr_signal([1], cfg, pulse))
    with pytest.raises(ConfigurationError):
        sr_demodulate(rx, cfg, SrTemplate.build(pulse, 100))
    with pytest.raises(ConfigurationError):
        sr_demodulate(rx, cfg, SrTemplate(np.ones(215), 0.05))
    with pytest.raises(ConfigurationError):
        sr_demodulate(rx, dtr_cfg(), SrTemplate.build(pulse, 430))


def test_sr_differential_stage(pulse):
    cfg = sr_cfg()
    q = SrTemplate.build(pulse, 215)
    bits = random_bits(60, 8)
    taps = cm1_taps(8)
    rx = chan.apply(taps, build_sr_signal(bits, cfg, pulse, differential=True))
    tr = sr_demodulate(rx, cfg, q, differential=True, n_bits=60)
    assert tr.first_bit == 1 and tr.bits.size == 59
    # product of consecutive statistics removes the channel sign ambiguity
    assert tr.errors(bits) < 59 / 2


# -- properties over engine bursts --------------------------------------------------

ANTIPODAL = ("arake", "srake", "prake", "sr")


@pytest.mark.parametrize("scheme", ["arake", "srake", "prake", "sr", "tr", "dtr"])
def test_sign_covariance(scheme):
    link = Link(LinkConfig(scheme=scheme, channel="cm1", burst_bits=20))
    for k in range(100):
        b = link.burst(RandomStream(42).split(k), link.n0(10.0))
        neg = link.demodulate(-b.received, b.taps, b.bit_channels, b.bits.size)
        if scheme in ANTIPODAL:
            np.testing.assert_allclose(neg.statistics, -b.trace.statistics, rtol=1e-12, atol=1e-15)
        else:
            np.testing.assert_allclose(neg.statistics, b.trace.statistics, rtol=1e-12, atol=1e-15)


def flip_frame(w: SampledWaveform, start: int, length: int) -> SampledWaveform:
    s = w.samples.copy()
    s[start:start + length] *= -1
    return SampledWaveform(s, w.dt, w.t0)


@pytest.mark.parametrize("scheme, reach", [("sr", 0), ("dtr", 1)])
def test_error_locality(scheme, reach):
    link = Link(LinkConfig(scheme=scheme, channel="cm1", burst_bits=30, coherence="static"))
    nf = link.frame.frame_samples(link.cfg.dt)
    worst = 0
    for k in range(10):
        b = link.burst(RandomStream(8).split(k), 0.0)
        for i in range(1, 29):
            tr = link.demodulate(flip_frame(b.received, i * nf, nf), b.taps, b.bit_channels, 30)
            changed = np.flatnonzero(tr.bits != b.trace.bits) + tr.first_bit
            assert set(changed) <= set(range(i, i + reach + 1))
            worst = max(worst, changed.size)
    assert worst >= 1
