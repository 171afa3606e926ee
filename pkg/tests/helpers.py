"""Signal generators and independent oracles used across the test suite."""

from functools import lru_cache
import math

import numpy as np
from scipy.signal import lfilter

from ttseval.audio_io import AudioBuffer, write_wav


def tone(freq, sr=22050, seconds=1.0, amp=0.5, n=None):
    n = int(round(sr * seconds)) if n is None else n
    t = np.arange(n) / sr
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t), sr)


def harmonic(f0, sr=22050, seconds=1.0, vibrato=0.0, n_harm=4):
    """Voiced, speech-like test signal: decaying harmonics with optional vibrato."""
    t = np.arange(int(round(sr * seconds))) / sr
    inst = f0 * (1.0 + vibrato * np.sin(2 * np.pi * 5.0 * t))
    phase = 2 * np.pi * np.cumsum(inst) / sr
    x = sum(0.3 / k * np.sin(k * phase) for k in range(1, n_harm + 1))
    return AudioBuffer(x, sr)


def speech_shaped_noise(sr=22050, n=22050, seed=0):
    """Gaussian noise with a speech-like low-pass spectral tilt."""
    rng = np.random.default_rng(seed)
    return AudioBuffer(0.05 * lfilter([1.0], [1.0, -0.9], rng.standard_normal(n)), sr)


def write_corpus(tmp_path, buffers, name="ref"):
    """Write ``{utt_id: AudioBuffer}`` as WAVs plus a TSV manifest; return the manifest path."""
    wav_dir = tmp_path / name
    wav_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for utt_id, buf in buffers.items():
        path = wav_dir / f"{utt_id}.wav"
        write_wav(buf, path)
        lines.append(f"{utt_id}\t{path}\n")
    manifest = tmp_path / f"{name}.tsv"
    manifest.write_text("".join(lines), encoding="utf-8")
    return manifest


def fft_peak_hz(buffer):
    """Dominant frequency by FFT peak with parabolic refinement on log magnitude."""
    x = buffer.samples * np.hanning(len(buffer))
    spec = np.abs(np.fft.rfft(x))
    k = int(np.argmax(spec[1:-1])) + 1
    a, b, c = np.log(spec[k - 1:k + 2] + 1e-300)
    shift = 0.5 * (a - c) / (a - 2 * b + c)
    return (k + shift) * buffer.sample_rate_hz / len(buffer)


# ---- DTW oracle -----------------------------------------------------------

def all_monotonic_paths(n, m):
    """Every path from (0,0) to (n-1,m-1) with steps (1,0), (0,1), (1,1)."""
    out = []

    def walk(i, j, acc):
        if (i, j) == (n - 1, m - 1):
            out.append(acc)
            return
        for di, dj in ((1, 1), (0, 1), (1, 0)):
            a, b = i + di, j + dj
            if a < n and b < m:
                walk(a, b, acc + [(a, b)])

    walk(0, 0, [(0, 0)])
    return out


def brute_force_dtw_cost(ref, gen):
    ref = np.atleast_2d(np.asarray(ref, dtype=float).T).T
    gen = np.atleast_2d(np.asarray(gen, dtype=float).T).T
    best = math.inf
    for path in all_monotonic_paths(len(ref), len(gen)):
        total = 0.0
        for i, j in path:
            total += math.sqrt(sum((a - b) ** 2 for a, b in zip(ref[i], gen[j])))
        best = min(best, total)
    return best


# ---- edit distance oracle -------------------------------------------------

def levenshtein(a, b):
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))
