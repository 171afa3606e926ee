"""Framed spectral analysis: STFT/ISTFT, mel filterbank, log-mel, mel cepstrum, energy."""

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct, idct
from scipy.signal import get_window

from .audio_io import AudioBuffer
from .errors import (
    InvalidParams,
    InvalidRange,
    NonInvertibleParams,
    OrderTooHigh,
    RateMismatch,
)

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class SpectralParams:
    n_fft: int = 1024
    win_length: int = 1024
    hop_length: int = 256
    center: bool = True
    window: str = "hann"

    def __post_init__(self):
        for name in ("n_fft", "win_length", "hop_length"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidParams(f"{name} must be an integer, got {value!r}")
        if self.n_fft < 2 or self.n_fft & (self.n_fft - 1):
            raise InvalidParams(f"n_fft must be a power of two >= 2, got {self.n_fft}")
        if not 0 < self.hop_length <= self.win_length <= self.n_fft:
            raise InvalidParams(
                "need 0 < hop_length <= win_length <= n_fft, got "
                f"hop={self.hop_length} win={self.win_length} n_fft={self.n_fft}"
            )
        if self.window != "hann":
            raise InvalidParams(f"only the Hann window is supported, got {self.window!r}")

    @property
    def n_bins(self):
        return self.n_fft // 2 + 1

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ComplexSpectrogram:
    data: np.ndarray  # frames x bins, complex
    params: SpectralParams
    sample_rate_hz: int

    @property
    def n_frames(self):
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class MelFilterbank:
    weights: np.ndarray  # n_mels x bins
    f_min: float
    f_max: float
    n_fft: int
    sample_rate_hz: int

    @property
    def n_mels(self):
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class MelSpectrogram:
    data: np.ndarray  # frames x n_mels, natural-log magnitudes
    params: SpectralParams
    sample_rate_hz: int
    f_min: float
    f_max: float

    @property
    def n_mels(self):
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class MelCepstrum:
    data: np.ndarray  # frames x (order + 1)

    @property
    def order(self):
        return self.data.shape[1] - 1


@lru_cache(maxsize=16)
def analysis_window(params):
    """Periodic Hann of ``win_length`` zero-padded (centred) to ``n_fft``."""
    win = get_window(params.window, params.win_length, fftbins=True)
    left = (params.n_fft - params.win_length) // 2
    out = np.zeros(params.n_fft)
    out[left:left + params.win_length] = win
    out.setflags(write=False)
    return out


def frame_count(n_samples, params):
    padded = n_samples + (params.n_fft if params.center else 0)
    if padded < params.n_fft:
        return 0
    return 1 + (padded - params.n_fft) // params.hop_length


def _pad(x, params):
    if not params.center:
        return x
    pad = params.n_fft // 2
    if len(x) > pad:
        return np.pad(x, pad, mode="reflect")
    # numpy's reflect needs more than one sample; fall back to zeros for tiny inputs
    return np.pad(x, pad, mode="reflect" if len(x) > 1 else "constant")


def stft(buffer, params=SpectralParams()):
    x = buffer.samples
    if len(x) < 1:
        raise InvalidParams("cannot analyse an empty buffer")
    if frame_count(len(x), params) < 1:
        raise InvalidParams(f"{len(x)} samples is shorter than n_fft={params.n_fft} without centering")
    padded = _pad(x, params)
    frames = np.lib.stride_tricks.sliding_window_view(padded, params.n_fft)[:: params.hop_length]
    data = np.fft.rfft(frames * analysis_window(params), axis=1)
    return ComplexSpectrogram(data, params, buffer.sample_rate_hz)


def check_invertible(params):
    if params.hop_length * 2 > params.win_length:
        raise NonInvertibleParams(
            f"hop_length {params.hop_length} exceeds win_length/2 = {params.win_length / 2}; "
            "Hann overlap-add is not invertible"
        )


def istft(spec, length=None):
    """Weighted overlap-add inverse of :func:`stft` (window-square normalised).

    Without ``length`` the output has ``(frames - 1) * hop`` samples when
    centred, ``n_fft + (frames - 1) * hop`` otherwise.
    """
    params = spec.params
    check_invertible(params)
    n_frames = spec.data.shape[0]
    n_fft, hop = params.n_fft, params.hop_length
    win = analysis_window(params)
    frames = np.fft.irfft(spec.data, n=n_fft, axis=1) * win

    total = n_fft + hop * (n_frames - 1) if n_frames else 0
    y = np.zeros(total)
    wss = np.zeros(total)
    win_sq = win * win
    for t in range(n_frames):
        s = t * hop
        y[s:s + n_fft] += frames[t]
        wss[s:s + n_fft] += win_sq
    nonzero = wss > 1e-10
    y[nonzero] /= wss[nonzero]

    if params.center:
        y = y[n_fft // 2:]
        default_len = max(total - n_fft, 0)
    else:
        default_len = total
    if length is None:
        length = default_len
    if len(y) >= length:
        y = y[:length]
    else:
        y = np.concatenate([y, np.zeros(length - len(y))])
    return AudioBuffer(y, spec.sample_rate_hz)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels, params, sample_rate_hz, f_min=0.0, f_max=None):
    """Peak-normalised triangular filters with centres equally spaced in HTK mel.

    Raises :class:`InvalidRange` for a bad frequency range or when some
    filter is too narrow to cover any FFT bin.
    """
    nyquist = sample_rate_hz / 2.0
    if f_max is None:
        f_max = nyquist
    if n_mels < 2:
        raise InvalidRange(f"need at least 2 mel bands, got {n_mels}")
    if not 0.0 <= f_min < f_max <= nyquist:
        raise InvalidRange(f"need 0 <= f_min < f_max <= {nyquist}, got [{f_min}, {f_max}]")

    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    freqs = np.arange(params.n_bins) * sample_rate_hz / params.n_fft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    weights = np.maximum(0.0, np.minimum(rising, falling))

    peaks = weights.max(axis=1)
    empty = np.flatnonzero(peaks <= 0.0)
    if empty.size:
        raise InvalidRange(
            f"{empty.size} mel filters cover no FFT bin (first: {empty[0]}); "
            "use fewer mels or a larger n_fft"
        )
    weights /= peaks[:, None]
    return MelFilterbank(weights, float(f_min), float(f_max), params.n_fft, int(sample_rate_hz))


def log_mel_from_magnitude(mag, fb):
    return np.log(np.maximum(mag @ fb.weights.T, LOG_FLOOR))


def log_mel_spectrogram(buffer, params, fb):
    if fb.sample_rate_hz != buffer.sample_rate_hz or fb.n_fft != params.n_fft:
        raise RateMismatch(
            f"filterbank built for {fb.sample_rate_hz} Hz / n_fft {fb.n_fft}, "
            f"signal is {buffer.sample_rate_hz} Hz / n_fft {params.n_fft}"
        )
    spec = stft(buffer, params)
    return MelSpectrogram(
        log_mel_from_magnitude(np.abs(spec.data), fb), params, buffer.sample_rate_hz, fb.f_min, fb.f_max
    )


def mel_cepstrum(mel, order=24):
    """Orthonormal DCT-II of each log-mel frame, truncated to ``order + 1`` coefficients."""
    if order < 0 or order + 1 > mel.n_mels:
        raise OrderTooHigh(f"order {order} needs at least {order + 1} mel bands, have {mel.n_mels}")
    return MelCepstrum(dct(mel.data, type=2, norm="ortho", axis=1)[:, : order + 1])


def inverse_mel_cepstrum(mc, n_mels):
    """Zero-extend to ``n_mels`` coefficients and apply the inverse DCT."""
    full = np.zeros((mc.data.shape[0], n_mels))
    full[:, : mc.data.shape[1]] = mc.data
    return idct(full, type=2, norm="ortho", axis=1)


def frame_energy(spec):
    return np.linalg.norm(np.abs(spec.data), axis=1)
