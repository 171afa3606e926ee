"""Mono WAV reading/writing and band-limited resampling."""

from dataclasses import dataclass
from functools import lru_cache
from math import gcd
import struct
import wave

import numpy as np
from scipy.signal import firwin, resample_poly

from .errors import (
    InvalidParams,
    IoFailure,
    MalformedWav,
    MultiChannelUnsupported,
    UnsupportedEncoding,
)

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# resampler design
TAPS_PER_PHASE = 64
CUTOFF_RATIO = 0.95
KAISER_BETA = 8.6


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Single-channel waveform. ``samples`` is a float64 1-D array."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidParams(f"expected 1-D mono samples, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise InvalidParams("samples must be finite")
        rate = self.sample_rate_hz
        if isinstance(rate, bool) or int(rate) != rate or rate <= 0:
            raise InvalidParams(f"sample rate must be a positive integer, got {rate!r}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate_hz


def _parse_fmt(body):
    if len(body) < 16:
        raise MalformedWav(f"fmt chunk too short ({len(body)} bytes)")
    tag, channels, rate, byte_rate, block_align, bits = struct.unpack("<HHIIHH", body[:16])
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 40:
            raise MalformedWav("WAVE_FORMAT_EXTENSIBLE fmt chunk too short")
        # sub-format GUID starts at byte 24; its first two bytes carry the real tag
        tag = struct.unpack("<H", body[24:26])[0]
    return tag, channels, rate, byte_rate, block_align, bits


def read_wav(path):
    """Read a mono 16-bit PCM or 32-bit float WAV file.

    Integer samples are scaled by 1/32768. Raises :class:`MalformedWav`,
    :class:`UnsupportedEncoding`, :class:`MultiChannelUnsupported` or
    :class:`IoFailure`.
    """
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e

    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav(f"{path}: not a RIFF/WAVE file")
    riff_size = struct.unpack("<I", data[4:8])[0]
    if riff_size + 8 > len(data):
        raise MalformedWav(f"{path}: RIFF size {riff_size} exceeds file length {len(data)}")
    end = riff_size + 8

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= end:
        chunk_id = data[pos:pos + 4]
        size = struct.unpack("<I", data[pos + 4:pos + 8])[0]
        body = data[pos + 8:pos + 8 + size]
        if pos + 8 + size > end:
            raise MalformedWav(f"{path}: chunk {chunk_id!r} overruns the RIFF container")
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise MalformedWav(f"{path}: missing fmt chunk")
    if payload is None:
        raise MalformedWav(f"{path}: missing data chunk")

    tag, channels, rate, _, block_align, bits = fmt
    if channels != 1:
        raise MultiChannelUnsupported(f"{path}: {channels} channels; only mono is supported")
    if tag == WAVE_FORMAT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedEncoding(f"{path}: format tag {tag:#06x} with {bits} bits per sample")
    if block_align != dtype.itemsize:
        raise MalformedWav(f"{path}: block align {block_align} inconsistent with {bits}-bit mono")
    if rate == 0:
        raise MalformedWav(f"{path}: zero sample rate")
    if len(payload) % dtype.itemsize:
        raise MalformedWav(f"{path}: data chunk size {len(payload)} is not a whole number of samples")

    samples = np.frombuffer(payload, dtype=dtype).astype(np.float64) * scale
    if not np.all(np.isfinite(samples)):
        raise MalformedWav(f"{path}: non-finite float samples")
    return AudioBuffer(samples, rate)


def quantize(samples):
    """Map amplitudes to int16 codes: clamp to [-1, 1], scale by 32768, saturate."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    return np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")


def write_wav(buffer, path, bit_depth=16):
    """Write ``buffer`` as 16-bit PCM. Out-of-range amplitudes are clamped."""
    if bit_depth != 16:
        raise UnsupportedEncoding(f"only 16-bit PCM output is supported, got {bit_depth}")
    codes = quantize(buffer.samples)
    try:
        with wave.open(str(path), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(buffer.sample_rate_hz)
            w.writeframes(codes.tobytes())
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


@lru_cache(maxsize=32)
def _lowpass(up, down):
    # 64 taps per phase of the faster of the two rates; odd length keeps delay integral
    max_rate = max(up, down)
    numtaps = TAPS_PER_PHASE * max_rate + 1
    h = firwin(numtaps, CUTOFF_RATIO / max_rate, window=("kaiser", KAISER_BETA))
    h.setflags(write=False)
    return h


def resample(buffer, target_rate_hz):
    """Resample to ``target_rate_hz`` with a Kaiser-windowed sinc polyphase filter.

    The passband edge sits at 0.95 of the lower Nyquist frequency. Output length
    is ``ceil(len * target / source)``.
    """
    if isinstance(target_rate_hz, bool) or int(target_rate_hz) != target_rate_hz or target_rate_hz <= 0:
        raise InvalidParams(f"target rate must be a positive integer, got {target_rate_hz!r}")
    target_rate_hz = int(target_rate_hz)
    source = buffer.sample_rate_hz
    if target_rate_hz == source:
        return AudioBuffer(buffer.samples.copy(), source)
    g = gcd(source, target_rate_hz)
    up, down = target_rate_hz // g, source // g
    if len(buffer) == 0:
        return AudioBuffer(np.zeros(0), target_rate_hz)
    y = resample_poly(buffer.samples, up, down, window=_lowpass(up, down))
    return AudioBuffer(y, target_rate_hz)
