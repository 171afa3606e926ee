"""Frame-synchronous F0 estimation (YIN) with a voiced/unvoiced decision."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParams, TooShort
from .spectral import SpectralParams, frame_count


@dataclass(frozen=True)
class PitchParams:
    f0_min: float = 70.0
    f0_max: float = 400.0
    voicing_threshold: float = 0.15

    def __post_init__(self):
        if not 0.0 < self.f0_min < self.f0_max:
            raise InvalidParams(f"need 0 < f0_min < f0_max, got {self.f0_min}, {self.f0_max}")
        if not 0.0 < self.voicing_threshold < 1.0:
            raise InvalidParams(f"voicing_threshold must lie in (0, 1), got {self.voicing_threshold}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class PitchTrack:
    f0_hz: np.ndarray  # 0 marks unvoiced frames
    hop_length: int
    sample_rate_hz: int

    def __len__(self):
        return self.f0_hz.shape[0]

    @property
    def voiced(self):
        return self.f0_hz > 0


def _difference(frames, width, max_lag):
    """YIN difference d(tau) for tau = 0..max_lag on every row of ``frames``.

    Row length must be at least ``width + max_lag``; the integration window
    is the first ``width`` samples.
    """
    seg_len = frames.shape[1]
    n = 1 << int(np.ceil(np.log2(seg_len + width)))
    head = frames[:, :width]
    corr = np.fft.irfft(
        np.conj(np.fft.rfft(head, n, axis=1)) * np.fft.rfft(frames, n, axis=1), n, axis=1
    )[:, : max_lag + 1]
    sq = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(frames**2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    shifted_energy = sq[:, lags + width] - sq[:, lags]
    d = sq[:, [width]] + shifted_energy - 2.0 * corr
    return np.maximum(d, 0.0)


def _cmnd(d):
    """Cumulative-mean-normalised difference; d'(0) = 1, and 1 where the running sum is 0."""
    out = np.ones_like(d)
    lags = np.arange(1, d.shape[1])
    running = np.cumsum(d[:, 1:], axis=1)
    ok = running > 0
    scaled = np.ones_like(running)
    scaled[ok] = (d[:, 1:] * lags)[ok] / running[ok]
    out[:, 1:] = scaled
    return out


def _pick_lag(row, lag_lo, lag_hi, threshold):
    below = np.flatnonzero(row[lag_lo:lag_hi] < threshold)
    if below.size == 0:
        return None
    tau = lag_lo + below[0]
    while tau + 1 < lag_hi and row[tau + 1] < row[tau]:
        tau += 1
    a, b, c = row[tau - 1], row[tau], row[tau + 1]
    denom = a - 2.0 * b + c
    if denom > 0:
        return tau + 0.5 * (a - c) / denom
    return float(tau)


def extract_f0(buffer, sp=SpectralParams(), pp=PitchParams()):
    """YIN F0 track aligned with the STFT frames produced by ``sp``.

    Each frame analyses ``4 / f0_min`` seconds of signal centred on the frame
    centre (zero padded at the edges). Frames with no CMND dip below
    ``voicing_threshold`` inside the lag range for ``[f0_min, f0_max]`` are
    unvoiced (0 Hz); voiced estimates are clamped into that band.
    """
    sr = buffer.sample_rate_hz
    if pp.f0_max >= sr / 2:
        raise InvalidParams(f"f0_max {pp.f0_max} must be below Nyquist ({sr / 2})")
    if buffer.duration < 2.0 / pp.f0_min:
        raise TooShort(
            f"{buffer.duration:.4f} s is shorter than the {2.0 / pp.f0_min:.4f} s pitch analysis minimum"
        )

    lag_lo = max(2, int(np.floor(sr / pp.f0_max)))
    lag_hi = int(np.ceil(sr / pp.f0_min)) + 1  # exclusive bound for the dip search
    seg_len = max(int(round(4.0 * sr / pp.f0_min)), 2 * (lag_hi + 1))
    width = seg_len - (lag_hi + 1)

    x = buffer.samples
    n_frames = frame_count(len(x), sp)
    offset = 0 if sp.center else sp.n_fft // 2
    centres = np.arange(n_frames) * sp.hop_length + offset
    half = seg_len // 2
    padded = np.pad(x, (half, half + seg_len))
    frames = np.lib.stride_tricks.sliding_window_view(padded, seg_len)[centres]

    cmnd = _cmnd(_difference(frames, width, lag_hi))
    silent = np.sum(frames[:, :width] ** 2, axis=1) <= 1e-20 * width

    f0 = np.zeros(n_frames)
    for t in range(n_frames):
        if silent[t]:
            continue
        tau = _pick_lag(cmnd[t], lag_lo, lag_hi, pp.voicing_threshold)
        if tau is None:
            continue
        # refinement may overshoot the band edge by up to half a lag
        if sr / pp.f0_max - 0.5 <= tau <= sr / pp.f0_min + 0.5:
            f0[t] = min(max(sr / tau, pp.f0_min), pp.f0_max)
    return PitchTrack(f0, sp.hop_length, sr)


def log_f0(track):
    """Natural-log F0 and the voiced mask; unvoiced entries hold 0 and are masked out."""
    voiced = track.voiced
    values = np.zeros(len(track))
    values[voiced] = np.log(track.f0_hz[voiced])
    return values, voiced
