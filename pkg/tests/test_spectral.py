import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import speech_shaped_noise, tone
from ttseval.audio_io import AudioBuffer
from ttseval.errors import InvalidParams, InvalidRange, NonInvertibleParams, OrderTooHigh, RateMismatch
from ttseval.spectral import (
    LOG_FLOOR,
    ComplexSpectrogram,
    MelSpectrogram,
    SpectralParams,
    analysis_window,
    frame_count,
    frame_energy,
    hz_to_mel,
    inverse_mel_cepstrum,
    istft,
    log_mel_spectrogram,
    mel_cepstrum,
    mel_filterbank,
    mel_to_hz,
    stft,
)

SR = 22050
P = SpectralParams()


def test_defaults():
    assert (P.n_fft, P.win_length, P.hop_length, P.center) == (1024, 1024, 256, True)


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_fft=1000), dict(hop_length=0), dict(win_length=2048), dict(hop_length=2000), dict(window="hamming")],
)
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParams):
        SpectralParams(**kwargs)


def test_zero_signal_gives_zero_spectrogram():
    spec = stft(AudioBuffer(np.zeros(5000), SR))
    assert not np.any(spec.data)


@pytest.mark.parametrize("n", [1, 100, 511, 512, 513, 22050])
def test_frame_count_formula(n):
    spec = stft(AudioBuffer(np.ones(n) * 0.1, SR))
    assert spec.n_frames == 1 + (n + 1024 - 1024) // 256 == frame_count(n, P)


def test_one_second_has_87_frames():
    assert frame_count(22050, P) == 87


def test_uncentred_frame_count():
    p = SpectralParams(center=False)
    assert stft(AudioBuffer(np.zeros(3000), SR), p).n_frames == 1 + (3000 - 1024) // 256
    with pytest.raises(InvalidParams):
        stft(AudioBuffer(np.zeros(100), SR), p)


def test_bin_centre_sine_peaks_at_bin_10():
    buf = tone(10 * SR / 1024, sr=SR)
    mag = np.abs(stft(buf).data)
    assert np.all(np.argmax(mag, axis=1)[2:-2] == 10)


def test_bins_match_direct_windowed_dft():
    x = speech_shaped_noise(n=3000).samples
    p = SpectralParams(n_fft=64, win_length=48, hop_length=16)
    spec = stft(AudioBuffer(x, SR), p)
    padded = np.pad(x, 32, mode="reflect")
    w = analysis_window(p)
    t = 5
    frame = padded[t * 16:t * 16 + 64] * w
    n = np.arange(64)
    for k in (0, 3, 17, 32):
        direct = np.sum(frame * np.exp(-2j * np.pi * k * n / 64))
        assert spec.data[t, k] == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_parseval_per_frame():
    x = speech_shaped_noise().samples
    spec = stft(AudioBuffer(x, SR))
    padded = np.pad(x, 512, mode="reflect")
    w = analysis_window(P)
    weights = np.full(P.n_bins, 2.0)
    weights[[0, -1]] = 1.0
    for t in (0, 10, 40, spec.n_frames - 1):
        frame = padded[t * 256:t * 256 + 1024] * w
        time_energy = float(np.sum(frame**2))
        freq_energy = float(np.sum(weights * np.abs(spec.data[t]) ** 2)) / 1024
        assert freq_energy == pytest.approx(time_energy, rel=1e-6)


def test_stft_linearity():
    a = speech_shaped_noise(seed=1).samples
    b = tone(300.0).samples
    sa, sb = stft(AudioBuffer(a, SR)).data, stft(AudioBuffer(b, SR)).data
    sab = stft(AudioBuffer(2 * a - 0.5 * b, SR)).data
    np.testing.assert_allclose(sab, 2 * sa - 0.5 * sb, atol=1e-10)


@pytest.mark.parametrize("params", [P, SpectralParams(512, 400, 100), SpectralParams(center=False)])
def test_istft_round_trip(params):
    x = speech_shaped_noise().samples
    spec = stft(AudioBuffer(x, SR), params)
    y = istft(spec, length=len(x)).samples
    edge = params.n_fft // 2
    inner = slice(edge, len(x) - edge)
    err = np.linalg.norm(y[inner] - x[inner]) / np.linalg.norm(x[inner])
    assert err <= 1e-6


def test_istft_default_length():
    spec = stft(AudioBuffer(np.zeros(22050), SR))
    assert len(istft(spec)) == (spec.n_frames - 1) * 256


def test_istft_zero_and_linearity():
    rng = np.random.default_rng(0)
    shape = (20, P.n_bins)
    A = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    B = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    zero = istft(ComplexSpectrogram(np.zeros(shape, complex), P, SR)).samples
    assert not np.any(zero)
    ya = istft(ComplexSpectrogram(A, P, SR)).samples
    yb = istft(ComplexSpectrogram(B, P, SR)).samples
    yab = istft(ComplexSpectrogram(A + B, P, SR)).samples
    np.testing.assert_allclose(yab, ya + yb, atol=1e-9)


def test_istft_rejects_non_cola():
    p = SpectralParams(1024, 1024, 768)
    with pytest.raises(NonInvertibleParams):
        istft(ComplexSpectrogram(np.zeros((3, p.n_bins), complex), p, SR))


def test_mel_scale_values():
    assert float(hz_to_mel(700.0)) == pytest.approx(2595 * math.log10(2), abs=1e-9)
    assert float(hz_to_mel(700.0)) == pytest.approx(781.1728387480312, abs=1e-9)
    assert float(hz_to_mel(0.0)) == 0.0


@settings(max_examples=200)
@given(st.floats(min_value=1e-3, max_value=SR / 2))
def test_mel_scale_invertible(f):
    assert float(mel_to_hz(hz_to_mel(f))) == pytest.approx(f, rel=1e-6)


def test_mel_scale_monotonic():
    f = np.linspace(0, SR / 2, 1000)
    assert np.all(np.diff(hz_to_mel(f)) > 0)


def test_filterbank_shape_and_peaks():
    fb = mel_filterbank(80, P, SR)
    assert fb.weights.shape == (80, P.n_bins)
    assert np.all(fb.weights >= 0)
    np.testing.assert_allclose(fb.weights.max(axis=1), 1.0)
    for row in fb.weights:
        nz = np.flatnonzero(row)
        assert nz.size and np.all(np.diff(nz) == 1)


def test_filterbank_centres_equally_spaced_in_mel():
    fb = mel_filterbank(10, SpectralParams(n_fft=8192, win_length=8192, hop_length=2048), SR, 100.0, 8000.0)
    freqs = np.arange(fb.weights.shape[1]) * SR / 8192
    centres = hz_to_mel(freqs[np.argmax(fb.weights, axis=1)])
    spacing = np.diff(centres)
    assert np.ptp(spacing) < 0.1 * spacing.mean()


@pytest.mark.parametrize("args", [(1, 0.0, None), (80, 500.0, 400.0), (80, -1.0, None), (80, 0.0, 20000.0)])
def test_filterbank_bad_range(args):
    n_mels, f_min, f_max = args
    with pytest.raises(InvalidRange):
        mel_filterbank(n_mels, P, SR, f_min, f_max)


def test_filterbank_rejects_empty_filters():
    with pytest.raises(InvalidRange):
        mel_filterbank(128, SpectralParams(128, 128, 32), SR)


def test_log_mel_of_silence_is_floor():
    fb = mel_filterbank(80, P, SR)
    mel = log_mel_spectrogram(AudioBuffer(np.zeros(5000), SR), P, fb)
    np.testing.assert_allclose(mel.data, math.log(LOG_FLOOR))
    assert math.log(LOG_FLOOR) == pytest.approx(-23.025850929940457)


def test_log_mel_scaling_adds_log2():
    fb = mel_filterbank(80, P, SR)
    x = speech_shaped_noise().samples
    m1 = log_mel_spectrogram(AudioBuffer(x, SR), P, fb).data
    m2 = log_mel_spectrogram(AudioBuffer(2 * x, SR), P, fb).data
    live = m1 > math.log(LOG_FLOOR) + 1
    np.testing.assert_allclose((m2 - m1)[live], math.log(2), atol=1e-9)


def test_log_mel_frame_count_and_rate_check():
    fb = mel_filterbank(80, P, SR)
    buf = tone(200.0)
    assert log_mel_spectrogram(buf, P, fb).data.shape[0] == stft(buf, P).n_frames
    with pytest.raises(RateMismatch):
        log_mel_spectrogram(tone(200.0, sr=16000), P, fb)


def _mel(data, n_mels=None):
    return MelSpectrogram(np.asarray(data, dtype=float), P, SR, 0.0, SR / 2)


def test_cepstrum_of_constant_frame():
    c = -3.5
    mc = mel_cepstrum(_mel(np.full((2, 80), c)), 24).data
    np.testing.assert_allclose(mc[:, 0], c * math.sqrt(80))
    np.testing.assert_allclose(mc[:, 1:], 0.0, atol=1e-12)


def test_cepstrum_full_order_inverts():
    data = np.random.default_rng(0).standard_normal((5, 40))
    mc = mel_cepstrum(_mel(data), 39)
    np.testing.assert_allclose(inverse_mel_cepstrum(mc, 40), data, atol=1e-9)


def test_cepstrum_zero_frame_and_order_check():
    assert not np.any(mel_cepstrum(_mel(np.zeros((3, 80))), 24).data)
    with pytest.raises(OrderTooHigh):
        mel_cepstrum(_mel(np.zeros((3, 20))), 20)


def test_frame_energy():
    spec = stft(speech_shaped_noise())
    energy = frame_energy(spec)
    for t in (0, 7, spec.n_frames - 1):
        direct = math.sqrt(sum(abs(v) ** 2 for v in spec.data[t]))
        assert energy[t] == pytest.approx(direct, rel=1e-12)
    assert not np.any(frame_energy(stft(AudioBuffer(np.zeros(3000), SR))))
    x = speech_shaped_noise().samples
    np.testing.assert_allclose(frame_energy(stft(AudioBuffer(2 * x, SR))), 2 * energy, rtol=1e-12)
