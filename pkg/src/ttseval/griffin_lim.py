"""Mel inversion and Griffin-Lim phase reconstruction."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParams, ShapeMismatch
from .spectral import ComplexSpectrogram, check_invertible, frame_count, istft, stft

INIT_PHASES = ("zero", "random")


@dataclass(frozen=True)
class GriffinLimConfig:
    n_iters: int = 60
    init_phase: str = "zero"
    momentum: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n_iters, bool) or int(self.n_iters) != self.n_iters or self.n_iters < 0:
            raise InvalidParams(f"n_iters must be a non-negative integer, got {self.n_iters!r}")
        if self.init_phase not in INIT_PHASES:
            raise InvalidParams(f"init_phase must be one of {INIT_PHASES}, got {self.init_phase!r}")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidParams(f"momentum must lie in [0, 1), got {self.momentum}")

    def to_dict(self):
        return asdict(self)


def mel_to_linear(mel, fb):
    """Approximate linear magnitudes from a log-mel spectrogram.

    Applies the Moore-Penrose pseudo-inverse of the filterbank to ``exp(mel)``
    and clamps negative results to zero.
    """
    if mel.n_mels != fb.n_mels or mel.params.n_fft != fb.n_fft:
        raise ShapeMismatch(
            f"mel has {mel.n_mels} bands / n_fft {mel.params.n_fft}, "
            f"filterbank has {fb.n_mels} bands / n_fft {fb.n_fft}"
        )
    inverse = np.linalg.pinv(fb.weights)
    return np.maximum(np.exp(mel.data) @ inverse.T, 0.0)


def spectral_convergence(mag, buffer, params):
    """``||  |STFT(y)| - mag ||_F / ||mag||_F``; 0 when both are zero."""
    est = np.abs(stft(buffer, params).data)
    if est.shape != mag.shape:
        raise ShapeMismatch(f"estimate has shape {est.shape}, target {mag.shape}")
    norm = np.linalg.norm(mag)
    diff = np.linalg.norm(est - mag)
    if norm == 0.0:
        return 0.0 if diff == 0.0 else np.inf
    return diff / norm


def _unit_phase(X):
    mag = np.abs(X)
    out = np.ones_like(X)
    nz = mag > 0
    out[nz] = X[nz] / mag[nz]
    return out


def griffin_lim(mag, params, cfg=GriffinLimConfig(), sample_rate_hz=22050, length=None, callback=None):
    """Estimate a waveform whose STFT magnitude matches ``mag`` (frames x bins).

    Each round resynthesises with the target magnitude and the phase of the
    current estimate's STFT. ``momentum > 0`` switches to the accelerated
    variant. ``length`` defaults to the ISTFT length for the frame count.
    ``callback(i, y)`` is called after each round with the current waveform.
    """
    mag = np.asarray(mag, dtype=np.float64)
    if mag.ndim != 2 or mag.shape[1] != params.n_bins:
        raise ShapeMismatch(f"magnitude must be frames x {params.n_bins}, got {mag.shape}")
    if np.any(mag < 0) or not np.all(np.isfinite(mag)):
        raise InvalidParams("magnitudes must be finite and non-negative")
    check_invertible(params)
    if length is not None and frame_count(length, params) != mag.shape[0]:
        raise ShapeMismatch(f"length {length} does not yield {mag.shape[0]} frames")

    if cfg.init_phase == "random":
        rng = np.random.default_rng(cfg.seed)
        phase = np.exp(2j * np.pi * rng.random(mag.shape))
    else:
        phase = np.ones(mag.shape, dtype=np.complex128)

    def synth(X):
        return istft(ComplexSpectrogram(X, params, sample_rate_hz), length)

    y = synth(mag * phase)
    prev = None
    for i in range(cfg.n_iters):
        proj = mag * _unit_phase(stft(y, params).data)
        if cfg.momentum > 0.0 and prev is not None:
            target = proj + cfg.momentum * (proj - prev)
        else:
            target = proj
        prev = proj
        y = synth(target)
        if callback is not None:
            callback(i, y)
    return y
