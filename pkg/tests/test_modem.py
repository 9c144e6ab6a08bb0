import numpy as np
import pytest
from hypothesis import given, strategies as st

from uwbsr.errors import ConfigurationError
from uwbsr.modem import (TD, TF_DTR, TF_SR, TW, FrameConfig, build_dtr_signal, build_sr_signal,
                         build_tr_signal, burst_duration, decode_differential,
                         encode_differential)
from uwbsr.pulse import energy, gaussian_monocycle

bit_blocks = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=40)


@pytest.fixture
def pulse():
    return gaussian_monocycle()


def unroll(bits, ns, m_init):
    # oracle: the recurrence written out one frame at a time
    m, prev = [], m_init
    for i in range(len(bits) * ns):
        prev = prev * bits[i // ns]
        m.append(prev)
    return m


@pytest.mark.parametrize("bits, ns, expected", [
    ((1, 1, 1), 1, (1, 1, 1)),
    ((-1, -1), 1, (-1, 1)),
    ((1, -1, -1), 2, (1, 1, -1, 1, -1, 1)),
])
def test_encode_differential_examples(bits, ns, expected):
    assert tuple(encode_differential(bits, ns, 1)) == expected
    assert list(expected) == unroll(bits, ns, 1)


@given(bits=bit_blocks, ns=st.integers(1, 4), m_init=st.sampled_from([-1, 1]))
def test_encode_matches_unrolled_recurrence(bits, ns, m_init):
    assert list(encode_differential(bits, ns, m_init)) == unroll(bits, ns, m_init)


def test_differential_round_trip_10k_blocks():
    rng = np.random.default_rng(20)
    for _ in range(10_000):
        n, ns = rng.integers(2, 30), rng.integers(1, 4)
        b = 2 * rng.integers(0, 2, n) - 1
        m = encode_differential(b, ns, int(rng.choice([-1, 1])))
        np.testing.assert_array_equal(decode_differential(m, ns), b[1:])


def pulses_at(w, pulse, cfg_times):
    n = len(pulse)
    return [float(np.dot(w.samples[round(t / w.dt):round(t / w.dt) + n], pulse.samples) * w.dt)
            for t in cfg_times]


def test_dtr_examples(pulse):
    cfg = FrameConfig.default("dtr")
    w = build_dtr_signal([1], cfg, pulse)
    assert pulses_at(w, pulse, [0.0]) == pytest.approx([1.0])
    w = build_dtr_signal([1, -1], cfg, pulse)
    assert pulses_at(w, pulse, [0.0, TF_DTR]) == pytest.approx([1.0, -1.0])
    assert w.duration == pytest.approx(2 * TF_DTR + TW)
    bits = np.random.default_rng(1).choice([-1, 1], 25)
    assert energy(build_dtr_signal(bits, cfg, pulse)) == pytest.approx(25.0, abs=1e-9)


def test_sr_examples(pulse):
    cfg = FrameConfig.default("sr")
    w = build_sr_signal([1], cfg, pulse)
    assert pulses_at(w, pulse, [0.0]) == pytest.approx([1.0])
    w = build_sr_signal([-1, 1], cfg, pulse)
    assert pulses_at(w, pulse, [0.0, TF_SR]) == pytest.approx([-1.0, 1.0])


def test_tr_examples(pulse):
    cfg = FrameConfig.default("tr")
    assert pulses_at(build_tr_signal([1], cfg, pulse), pulse, [0.0, TD]) == pytest.approx([1.0, 1.0])
    assert pulses_at(build_tr_signal([-1], cfg, pulse), pulse, [0.0, TD]) == pytest.approx([1.0, -1.0])


@given(bits=bit_blocks, ns=st.integers(1, 3), scheme=st.sampled_from(["tr", "dtr", "sr"]))
def test_energy_per_bit(bits, ns, scheme):
    pulse = gaussian_monocycle()
    cfg = FrameConfig.default(scheme, ns=ns)
    build = {"tr": build_tr_signal, "dtr": build_dtr_signal, "sr": build_sr_signal}[scheme]
    e = energy(build(bits, cfg, pulse))
    assert e == pytest.approx(cfg.pulses_per_frame * ns * len(bits), abs=1e-9)


def test_tr_costs_twice_sr_energy(pulse):
    bits = [1, -1, -1, 1]
    for ns in (1, 2, 3):
        e_tr = energy(build_tr_signal(bits, FrameConfig.default("tr", ns=ns), pulse))
        e_sr = energy(build_sr_signal(bits, FrameConfig.default("sr", ns=ns), pulse))
        assert e_tr == pytest.approx(2 * e_sr, rel=1e-12)
        assert e_sr == pytest.approx(ns * len(bits) * energy(pulse), rel=1e-12)


@given(n=st.integers(1, 500))
def test_sr_burst_is_half_dtr(n):
    assert burst_duration(FrameConfig.default("sr"), n) == burst_duration(FrameConfig.default("dtr"), n) / 2


def test_sr_differential_option(pulse):
    cfg = FrameConfig.default("sr")
    w = build_sr_signal([-1, -1], cfg, pulse, differential=True)
    assert pulses_at(w, pulse, [0.0, TF_SR]) == pytest.approx([-1.0, 1.0])


def test_scheme_mismatch(pulse):
    with pytest.raises(ConfigurationError):
        build_sr_signal([1], FrameConfig.default("dtr"), pulse)
    with pytest.raises(ConfigurationError):
        build_tr_signal([1], FrameConfig.default("sr"), pulse)
    with pytest.raises(ConfigurationError):
        build_dtr_signal([1], FrameConfig.default("tr"), pulse)


@pytest.mark.parametrize("kwargs", [
    dict(scheme="tr", tf=10.0, td=0.5),
    dict(scheme="tr", tf=9.0, td=8.75),
    dict(scheme="sr", tf=0.5),
    dict(scheme="sr", tf=5.375, ns=0),
    dict(scheme="xx", tf=5.0),
])
def test_frame_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        FrameConfig(**kwargs)


def test_defaults():
    assert FrameConfig.default("dtr").tf == 10.75
    assert FrameConfig.default("sr").tf == 5.375
    assert (FrameConfig.default("dtr").td, FrameConfig.default("dtr").tw) == (8.75, 0.7)


def test_bits_validated(pulse):
    with pytest.raises(ConfigurationError):
        build_sr_signal([1, 0], FrameConfig.default("sr"), pulse)
    with pytest.raises(ConfigurationError):
        encode_differential([])


def test_off_grid_frame(pulse):
    cfg = FrameConfig("sr", tf=5.37)
    with pytest.raises(ConfigurationError):
        build_sr_signal([1, 1], cfg, pulse)
