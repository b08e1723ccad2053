"""Multipath channel against shift/convolution oracles and SNR checks."""

import numpy as np
import pytest

from uwchirp.channel import (
    ChannelProfile,
    ChannelTap,
    apply_channel,
    load_profile,
    random_profile,
    save_profile,
)
from uwchirp.errors import ProfileFormatError
from uwchirp.iqio import IqBuffer

FS = 12000.0


def _rand_buf(n, seed):
    rng = np.random.default_rng(seed)
    return IqBuffer(rng.standard_normal(n) + 1j * rng.standard_normal(n), FS)


def test_identity_channel_exact():
    buf = _rand_buf(1000, 0)
    prof = ChannelProfile(((0.0, 1.0 + 0.0j),))
    out = apply_channel(buf, prof, seed=1)
    assert np.array_equal(out.samples, buf.samples)


def test_integer_delay_is_exact_shift():
    buf = _rand_buf(500, 1)
    prof = ChannelProfile(((45.0, 1.0 + 0.0j),))
    out = apply_channel(buf, prof, seed=1)
    assert len(out) == 545
    assert np.array_equal(out.samples[45:], buf.samples)
    assert np.array_equal(out.samples[:45], np.zeros(45))


def test_two_taps_match_dense_convolution():
    buf = _rand_buf(400, 2)
    g2 = 0.7 * np.exp(1j * 1.2)
    prof = ChannelProfile(((0.0, 1.0 + 0.0j), (33.0, g2)))
    out = apply_channel(buf, prof, seed=1)
    h = np.zeros(34, dtype=complex)
    h[0] = 1.0
    h[33] = g2
    oracle = np.convolve(buf.samples, h)
    assert np.abs(out.samples - oracle).max() < 1e-6 * np.abs(oracle).max()


def test_fractional_delay_matches_sinc_oracle():
    # a pure tone delayed by tau gains phase -2*pi*f*tau/fs
    fs = FS
    f = 800.0
    n = np.arange(4096)
    tone = np.exp(2j * np.pi * f * n / fs)
    tau = 12.4
    prof = ChannelProfile(((tau, 1.0 + 0.0j),))
    out = apply_channel(IqBuffer(tone, fs), prof, seed=0)
    mid = slice(200, 3800)  # away from interpolator edges
    expect = np.exp(2j * np.pi * f * (n[mid] - tau) / fs)
    assert np.abs(out.samples[mid] - expect).max() < 1e-3


def test_fractional_delay_against_dense_sinc_convolution():
    buf = _rand_buf(300, 3)
    tau = 7.5
    prof = ChannelProfile(((tau, 0.9 + 0.0j),))
    out = apply_channel(buf, prof, seed=0)
    n = np.arange(-15, 16)
    kern = np.sinc(n - 0.5) * (0.5 + 0.5 * np.cos(np.pi * (n - 0.5) / 16))
    oracle = np.zeros(308, dtype=complex)
    y = 0.9 * np.convolve(buf.samples, kern)
    start = 7 - 15
    lo = max(0, start)
    oracle[lo : start + len(y)] = y[lo - start :][: len(oracle) - lo]
    assert np.abs(out.samples - oracle).max() < 1e-9


def test_snr_calibration():
    buf = _rand_buf(20000, 4)
    prof = ChannelProfile(((0.0, 1.0 + 0.0j),), snr_db=10.0)
    clean = apply_channel(buf, ChannelProfile(((0.0, 1.0 + 0.0j),)), 0).samples
    meas = []
    for seed in range(100):
        out = apply_channel(buf, prof, seed=seed)
        noise = out.samples - clean
        meas.append(
            10 * np.log10(np.mean(np.abs(clean) ** 2) / np.mean(np.abs(noise) ** 2))
        )
    assert abs(np.mean(meas) - 10.0) < 0.3


def test_snr_support_excludes_padding():
    # leading/trailing silence must not dilute the measured SNR
    sig = np.concatenate([np.zeros(5000), np.ones(5000), np.zeros(5000)])
    prof = ChannelProfile(((0.0, 1.0 + 0.0j),), snr_db=6.0)
    meas = []
    for seed in range(60):
        out = apply_channel(IqBuffer(sig, FS), prof, seed=seed)
        noise = out.samples - sig
        mid = slice(5000, 10000)
        meas.append(
            10
            * np.log10(
                np.mean(np.abs(sig[mid]) ** 2) / np.mean(np.abs(noise[mid]) ** 2)
            )
        )
    assert abs(np.mean(meas) - 6.0) < 0.3


def test_noise_determinism():
    buf = _rand_buf(1000, 5)
    prof = ChannelProfile(((0.0, 1.0 + 0.0j),), snr_db=0.0)
    a = apply_channel(buf, prof, seed=7)
    b = apply_channel(buf, prof, seed=7)
    assert np.array_equal(a.samples, b.samples)


def test_profile_validation():
    with pytest.raises(ValueError):
        ChannelProfile(())
    with pytest.raises(ValueError):
        ChannelProfile(((0.0, 0.0 + 0.0j),))
    with pytest.raises(ValueError):
        ChannelTap(-1.0, 1.0)


def test_taps_sorted_ascending():
    prof = ChannelProfile(((50.0, 0.5 + 0j), (0.0, 1.0 + 0j), (20.0, 0.3 + 0j)))
    delays = [t.delay_samples for t in prof.taps]
    assert delays == sorted(delays)


def test_random_profile_single_path():
    prof = random_profile(1, 512, seed=0)
    assert len(prof.taps) == 1
    assert prof.taps[0].delay_samples == 0.0
    assert prof.taps[0].gain == 1.0 + 0.0j


def test_random_profile_delays_within_symbol():
    prof = random_profile(4, 512, seed=3)
    assert len(prof.taps) == 4
    assert all(0 <= t.delay_samples <= 512 for t in prof.taps)
    assert all(
        float(t.delay_samples).is_integer() for t in prof.taps
    )  # oversampled grid


def test_random_profile_deterministic():
    a = random_profile(4, 512, seed=9)
    b = random_profile(4, 512, seed=9)
    assert a == b


def test_random_profile_amp_range():
    prof = random_profile(6, 512, seed=1, amp_range=(0.8, 1.0), first_tap_unit=False)
    for t in prof.taps:
        assert 0.8 - 1e-12 <= abs(t.gain) <= 1.0 + 1e-12


def test_profile_roundtrip(tmp_path):
    prof = ChannelProfile(
        ((0.0, 1.0 + 0.0j), (45.5, 0.3 - 0.2j)), snr_db=5.0
    )
    p = tmp_path / "prof.json"
    save_profile(prof, p)
    assert load_profile(p) == prof


def test_profile_zero_taps_rejected(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text('{"taps": [], "snr_db": 0}\n')
    with pytest.raises((ProfileFormatError, ValueError)):
        load_profile(p)


def test_profile_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json\n")
    with pytest.raises(ProfileFormatError) as err:
        load_profile(p)
    assert "1" in str(err.value)  # line context


def test_non_first_dominant_profile_usable(tmp_path):
    # pool-style: a later arrival stronger than the first
    prof = ChannelProfile(((0.0, 0.4 + 0.0j), (120.0, 1.0 + 0.0j)))
    p = tmp_path / "dom.json"
    save_profile(prof, p)
    loaded = load_profile(p)
    buf = _rand_buf(600, 6)
    out = apply_channel(buf, loaded, seed=0)
    assert len(out) == 720


def test_strong_tap_count():
    prof = ChannelProfile(
        ((0.0, 1.0 + 0j), (1.0, 0.9 + 0j), (2.0, 0.5 + 0j), (3.0, 0.61 + 0j))
    )
    assert prof.strong_tap_count(0.6) == 3
