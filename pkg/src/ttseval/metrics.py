"""DTW alignment, MCD, log-F0 RMSE, CER and MOS/aggregate statistics."""

from dataclasses import dataclass
import math
import unicodedata

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    DimMismatch,
    EmptyInput,
    EmptyReference,
    EmptySequence,
    InvalidPath,
    InvalidRating,
    NoVoicedOverlap,
    OrderMismatch,
    TooFewRatings,
)

MCD_SCALE = 10.0 / math.log(10.0)
CI95_Z = 1.96


def _frames(x):
    return np.asarray(getattr(x, "data", x), dtype=np.float64)


def dtw_align(ref_frames, gen_frames):
    """Exact DTW with Euclidean local cost and steps (1,0), (0,1), (1,1).

    Returns ``(path, cost)`` where ``path`` is an ``(L, 2)`` int array of
    ``(ref_index, gen_index)`` pairs from ``(0, 0)`` to the last frames and
    ``cost`` is the summed local distance along it. Equal-cost predecessors
    are resolved diagonal first, then (0,1), then (1,0).
    """
    ref = _frames(ref_frames)
    gen = _frames(gen_frames)
    if ref.ndim == 1:
        ref = ref[:, None]
    if gen.ndim == 1:
        gen = gen[:, None]
    if ref.shape[0] == 0 or gen.shape[0] == 0:
        raise EmptySequence("DTW needs two non-empty sequences")
    if ref.shape[1] != gen.shape[1]:
        raise DimMismatch(f"feature dims differ: {ref.shape[1]} vs {gen.shape[1]}")

    n, m = ref.shape[0], gen.shape[0]
    local = cdist(ref, gen)

    # Sweep anti-diagonals i + j = k; each cell is local + min(predecessors),
    # the same left fold a path-by-path sum would perform.
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for k in range(n + m - 1):
        i = np.arange(max(0, k - m + 1), min(n, k + 1))
        j = k - i
        best = np.minimum(np.minimum(acc[i, j], acc[i + 1, j]), acc[i, j + 1])
        acc[i + 1, j + 1] = best + local[i, j]
    # acc[0, 0] = 0 feeds only cell (0, 0) via its diagonal.

    path = [(n - 1, m - 1)]
    i, j = n, m
    while (i, j) != (1, 1):
        diag, left, up = acc[i - 1, j - 1], acc[i, j - 1], acc[i - 1, j]
        if diag <= left and diag <= up:
            i, j = i - 1, j - 1
        elif left <= up:
            j -= 1
        else:
            i -= 1
        path.append((i - 1, j - 1))
    path.reverse()
    return np.array(path, dtype=np.int64), float(acc[n, m])


def validate_path(path, n_ref, n_gen):
    path = np.asarray(path)
    if path.ndim != 2 or path.shape[1] != 2 or path.shape[0] == 0:
        raise InvalidPath(f"path must be a non-empty (L, 2) array, got shape {path.shape}")
    if tuple(path[0]) != (0, 0) or tuple(path[-1]) != (n_ref - 1, n_gen - 1):
        raise InvalidPath(
            f"path must run from (0, 0) to ({n_ref - 1}, {n_gen - 1}), "
            f"got {tuple(path[0])} .. {tuple(path[-1])}"
        )
    steps = np.diff(path, axis=0)
    ok = np.isin(steps[:, 0], (0, 1)) & np.isin(steps[:, 1], (0, 1)) & (steps.sum(axis=1) > 0)
    if not np.all(ok):
        raise InvalidPath(f"illegal step at position {int(np.argmin(ok)) + 1}")
    return path


def mcd(ref_mc, gen_mc, path):
    """Mean mel-cepstral distortion in dB over aligned frame pairs, mc_0 excluded."""
    ref = _frames(ref_mc)
    gen = _frames(gen_mc)
    if ref.shape[1] != gen.shape[1]:
        raise OrderMismatch(f"cepstral orders differ: {ref.shape[1] - 1} vs {gen.shape[1] - 1}")
    path = validate_path(path, ref.shape[0], gen.shape[0])
    diff = ref[path[:, 0], 1:] - gen[path[:, 1], 1:]
    return float(np.mean(MCD_SCALE * np.sqrt(2.0 * np.sum(diff**2, axis=1))))


def f0_rmse(ref_track, gen_track, path):
    """RMSE of natural-log F0 over path pairs voiced on both sides."""
    ref = np.asarray(getattr(ref_track, "f0_hz", ref_track), dtype=np.float64)
    gen = np.asarray(getattr(gen_track, "f0_hz", gen_track), dtype=np.float64)
    path = validate_path(path, ref.shape[0], gen.shape[0])
    a, b = ref[path[:, 0]], gen[path[:, 1]]
    both = (a > 0) & (b > 0)
    if not np.any(both):
        raise NoVoicedOverlap("no aligned frame pair is voiced in both tracks")
    return float(np.sqrt(np.mean((np.log(a[both]) - np.log(b[both])) ** 2)))


@dataclass(frozen=True)
class CerCounts:
    substitutions: int
    deletions: int
    insertions: int
    ref_length: int

    @property
    def errors(self):
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self):
        return self.errors / self.ref_length


def normalize_text(text):
    """Lowercase, drop Unicode punctuation, collapse whitespace runs, trim."""
    text = "".join(ch for ch in text.lower() if not unicodedata.category(ch).startswith("P"))
    return " ".join(text.split())


def cer(ref_text, hyp_text):
    """Character error counts and rate of ``hyp_text`` against ``ref_text``.

    Both strings are normalised first. Among minimal alignments the
    backtrace prefers substitution (or match), then deletion, then insertion.
    """
    ref = normalize_text(ref_text)
    hyp = normalize_text(hyp_text)
    if not ref:
        raise EmptyReference("reference transcript is empty after normalisation")
    n, m = len(ref), len(hyp)
    dist = [list(range(m + 1))]
    for i in range(1, n + 1):
        r = ref[i - 1]
        prev = dist[-1]
        row = [i] + [0] * m
        for j in range(1, m + 1):
            row[j] = min(prev[j - 1] + (r != hyp[j - 1]), prev[j] + 1, row[j - 1] + 1)
        dist.append(row)

    s = d = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            s += ref[i - 1] != hyp[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    counts = CerCounts(s, d, ins, n)
    return counts, counts.rate


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float
    count: int
    unit: str = ""

    def render(self, decimals=2):
        return f"{self.mean:.{decimals}f} ± {self.std:.{decimals}f}"

    def to_dict(self):
        return {"mean": self.mean, "std": self.std, "count": self.count, "unit": self.unit}


def summarize(values, unit=""):
    """Mean and population standard deviation."""
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        raise EmptyInput("cannot summarise an empty sequence")
    return MetricSummary(float(v.mean()), float(v.std(ddof=0)), int(v.size), unit)


@dataclass(frozen=True)
class MosSummary:
    mean: float
    ci95: float
    n: int

    def render(self, decimals=2):
        return f"{self.mean:.{decimals}f} ± {self.ci95:.{decimals}f}"

    def to_dict(self):
        return {"mean": self.mean, "ci95": self.ci95, "n": self.n}


def mos_summary(ratings):
    """Mean opinion score with a normal-approximation 95% interval half-width."""
    r = np.asarray(list(ratings), dtype=np.float64)
    if r.size < 2:
        raise TooFewRatings(f"need at least 2 ratings, got {r.size}")
    if np.any((r < 1) | (r > 5)) or not np.all(np.isfinite(r)):
        raise InvalidRating("ratings must lie in [1, 5]")
    ci = CI95_Z * r.std(ddof=1) / math.sqrt(r.size)
    return MosSummary(float(r.mean()), float(ci), int(r.size))
