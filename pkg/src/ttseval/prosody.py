"""Durations from attention, token-averaged prosody, and random window sampling."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidAttention, LengthMismatch, WindowTooLarge

ROW_SUM_TOL = 1e-4


def check_attention(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidAttention(f"attention must be a non-empty T_out x T_in matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)) or np.any(A < 0) or np.any(A > 1):
        raise InvalidAttention("attention weights must lie in [0, 1]")
    worst = np.max(np.abs(A.sum(axis=1) - 1.0))
    if worst > ROW_SUM_TOL:
        raise InvalidAttention(f"attention rows must sum to 1 (max deviation {worst:.3g})")
    return A


def durations_from_attention(A):
    """Frames per input token: how many output frames attend hardest to each token.

    Argmax ties go to the lowest token index.
    """
    A = check_attention(A)
    return np.bincount(np.argmax(A, axis=1), minlength=A.shape[1])


def token_average(frame_values, durations, voiced_mask=None):
    """Average frame values over each token's span.

    With ``voiced_mask`` only flagged frames contribute; a token with no
    contributing frames gets 0.
    """
    values = np.asarray(frame_values, dtype=np.float64)
    durations = np.asarray(durations)
    if durations.ndim != 1 or np.any(durations < 0) or not np.issubdtype(durations.dtype, np.integer):
        raise LengthMismatch("durations must be a 1-D array of non-negative integers")
    if int(durations.sum()) != values.shape[0]:
        raise LengthMismatch(f"durations sum to {int(durations.sum())}, expected {values.shape[0]} frames")
    if voiced_mask is None:
        weights = np.ones_like(values)
    else:
        weights = np.asarray(voiced_mask, dtype=bool).astype(np.float64)
        if weights.shape != values.shape:
            raise LengthMismatch(f"mask has shape {weights.shape}, values {values.shape}")

    token = np.repeat(np.arange(durations.shape[0]), durations)
    n = durations.shape[0]
    # zero out excluded frames so their values cannot leak in as NaN/inf
    contrib = np.where(weights > 0, values, 0.0)
    sums = np.bincount(token, weights=contrib, minlength=n)
    counts = np.bincount(token, weights=weights, minlength=n)
    out = np.zeros(n)
    ok = counts > 0
    out[ok] = sums[ok] / counts[ok]
    return out


@dataclass(frozen=True)
class WindowSpec:
    frame_start: int
    frame_len: int
    sample_start: int
    sample_len: int
    seed: int


def sample_random_window(total_frames, window_frames, hop_length, seed):
    """Uniformly placed window of ``window_frames`` frames, reproducible from ``seed``."""
    if window_frames < 1:
        raise WindowTooLarge(f"window must span at least one frame, got {window_frames}")
    if window_frames > total_frames:
        raise WindowTooLarge(f"window of {window_frames} frames exceeds {total_frames} available")
    rng = np.random.default_rng(seed)
    start = int(rng.integers(0, total_frames - window_frames + 1))
    return WindowSpec(start, window_frames, start * hop_length, window_frames * hop_length, seed)
