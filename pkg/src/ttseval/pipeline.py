"""Per-utterance work items shared by the batch commands.

Every function here is a top-level, picklable callable taking plain data so
the commands can fan work out to a process pool.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio_io import read_wav, resample, write_wav
from .dump import read_dump, write_dump
from .errors import NoVoicedOverlap, SchemaMismatch, TtsEvalError
from .griffin_lim import griffin_lim, mel_to_linear
from .metrics import cer, dtw_align, f0_rmse, mcd
from .pitch import PitchTrack, extract_f0
from .spectral import (
    MelCepstrum,
    MelSpectrogram,
    SpectralParams,
    frame_count,
    frame_energy,
    log_mel_from_magnitude,
    mel_cepstrum,
    mel_filterbank,
    stft,
)


def describe(exc):
    return f"{type(exc).__name__}: {exc}"


@lru_cache(maxsize=32)
def filterbank(n_mels, params, sample_rate_hz, f_min, f_max):
    return mel_filterbank(n_mels, params, sample_rate_hz, f_min, f_max)


@dataclass(frozen=True, eq=False)
class Features:
    mel: MelSpectrogram
    mcep: MelCepstrum
    energy: np.ndarray
    f0: PitchTrack = None


def analyze(buffer, cfg, with_f0=True):
    sp = cfg.spectral
    sr = buffer.sample_rate_hz
    fb = filterbank(cfg.n_mels, sp, sr, cfg.f_min, cfg.f_max)
    spec = stft(buffer, sp)
    mel = MelSpectrogram(log_mel_from_magnitude(np.abs(spec.data), fb), sp, sr, fb.f_min, fb.f_max)
    f0 = extract_f0(buffer, sp, cfg.pitch) if with_f0 else None
    return Features(mel, mel_cepstrum(mel, cfg.mcep_order), frame_energy(spec), f0)


def score_pair(item, cfg):
    """Score one ``(EvalPair, texts)`` item; ``texts`` is ``(ref, hyp)``, ``None``, or an error string."""
    pair, texts = item
    rec = {"id": pair.utterance_id, "mcd": None, "f0_rmse": None, "cer": None, "cer_counts": None, "errors": []}

    if "mcd" in cfg.metrics or "f0_rmse" in cfg.metrics:
        want_f0 = "f0_rmse" in cfg.metrics
        try:
            ref = read_wav(pair.ref)
            gen = read_wav(pair.gen)
            if gen.sample_rate_hz != ref.sample_rate_hz:
                gen = resample(gen, ref.sample_rate_hz)
            fr = analyze(ref, cfg, want_f0)
            fg = analyze(gen, cfg, want_f0)
            # one alignment on mc_1..mc_D serves both metrics
            path, _ = dtw_align(fr.mcep.data[:, 1:], fg.mcep.data[:, 1:])
        except TtsEvalError as e:
            rec["errors"].append(describe(e))
        else:
            if "mcd" in cfg.metrics:
                rec["mcd"] = mcd(fr.mcep, fg.mcep, path)
            if want_f0:
                try:
                    rec["f0_rmse"] = f0_rmse(fr.f0, fg.f0, path)
                except NoVoicedOverlap as e:
                    rec["errors"].append(describe(e))

    if "cer" in cfg.metrics and texts is not None:
        if isinstance(texts, str):
            rec["errors"].append(texts)
        else:
            try:
                counts, rate = cer(*texts)
            except TtsEvalError as e:
                rec["errors"].append(describe(e))
            else:
                rec["cer"] = rate
                rec["cer_counts"] = _counts_dict(counts)
    return rec


def _counts_dict(counts):
    return {
        "substitutions": counts.substitutions,
        "deletions": counts.deletions,
        "insertions": counts.insertions,
        "ref_length": counts.ref_length,
    }


def score_text(item):
    utt_id, ref_text, hyp_text = item
    rec = {"id": utt_id, "cer": None, "cer_counts": None, "errors": []}
    try:
        counts, rate = cer(ref_text, hyp_text)
    except TtsEvalError as e:
        rec["errors"].append(describe(e))
    else:
        rec["cer"] = rate
        rec["cer_counts"] = _counts_dict(counts)
    return rec


def feature_header(utt_id, buffer, cfg, fb_f_max):
    return {
        "utterance_id": utt_id,
        "sample_rate_hz": buffer.sample_rate_hz,
        "num_samples": len(buffer),
        "spectral": cfg.spectral.to_dict(),
        "mel": {"n_mels": cfg.n_mels, "f_min": cfg.f_min, "f_max": fb_f_max},
        "pitch": cfg.pitch.to_dict(),
        "mcep_order": cfg.mcep_order,
    }


def dump_features(item, cfg):
    """Extract features for ``(utt_id, wav_path, dump_path)`` and write the dump."""
    utt_id, wav_path, dump_path = item
    rec = {"id": utt_id, "path": None, "frames": None, "errors": []}
    try:
        buffer = read_wav(wav_path)
        feats = analyze(buffer, cfg, with_f0=True)
        header = feature_header(utt_id, buffer, cfg, feats.mel.f_max)
        write_dump(
            dump_path,
            header,
            {"mel": feats.mel.data, "mcep": feats.mcep.data, "f0": feats.f0.f0_hz, "energy": feats.energy},
        )
    except TtsEvalError as e:
        rec["errors"].append(describe(e))
    else:
        rec["path"] = str(dump_path)
        rec["frames"] = int(feats.mel.data.shape[0])
    return rec


def _mel_from_dump(header, streams, source):
    try:
        sp = SpectralParams(**header["spectral"])
        sr = int(header["sample_rate_hz"])
        mel_cfg = header["mel"]
        mel = streams["mel"]
    except (KeyError, TypeError) as e:
        raise SchemaMismatch(f"{source}: missing or malformed field {e}") from None
    if mel.ndim != 2 or mel.shape[1] != mel_cfg.get("n_mels"):
        raise SchemaMismatch(f"{source}: mel stream shape {mel.shape} disagrees with n_mels")
    fb = filterbank(int(mel_cfg["n_mels"]), sp, sr, float(mel_cfg["f_min"]), float(mel_cfg["f_max"]))
    return MelSpectrogram(mel, sp, sr, fb.f_min, fb.f_max), fb


def vocode_dump(item, gl_cfg):
    """Griffin-Lim resynthesis of ``(utt_id, dump_path, wav_path)``."""
    utt_id, dump_path, wav_path = item
    rec = {"id": utt_id, "path": None, "samples": None, "sample_rate_hz": None, "errors": []}
    try:
        header, streams = read_dump(dump_path)
        mel, fb = _mel_from_dump(header, streams, dump_path)
        n = header.get("num_samples")
        length = n if isinstance(n, int) and frame_count(n, mel.params) == mel.data.shape[0] else None
        y = griffin_lim(mel_to_linear(mel, fb), mel.params, gl_cfg, mel.sample_rate_hz, length=length)
        write_wav(y, wav_path)
    except TtsEvalError as e:
        rec["errors"].append(describe(e))
    else:
        rec.update(path=str(wav_path), samples=len(y), sample_rate_hz=y.sample_rate_hz)
    return rec

