"""Kaldi-style manifests, utterance pairing, and evaluation config loading.

Manifest files are UTF-8 TSV, one ``<utt_id>\\t<payload>`` record per line.
Config files are flat ``key = value`` lines; ``#`` starts a comment, lists
are written ``[a, b]`` and strings may be quoted. Recognised keys and their
defaults::

    n_fft = 1024              hop_length = 256       win_length = 1024
    center = true             n_mels = 80            f_min = 0.0
    f_max = <Nyquist>         mcep_order = 24
    f0_min = 70.0             f0_max = 400.0         voicing_threshold = 0.15
    gl_iters = 60             gl_init = zero         gl_momentum = 0.0
    seed = 0                  metrics = [mcd, f0_rmse, cer]
"""

from dataclasses import dataclass, field
import difflib
import re
from typing import NamedTuple

from .errors import (
    ConfigError,
    ConfigTypeError,
    DuplicateId,
    EmptyIntersection,
    IoFailure,
    KindMismatch,
    MalformedLine,
    TtsEvalError,
    UnknownKey,
)
from .griffin_lim import GriffinLimConfig
from .pitch import PitchParams
from .spectral import SpectralParams

KINDS = ("audio", "text", "ratings")
METRICS = ("mcd", "f0_rmse", "cer")


@dataclass(frozen=True)
class Manifest:
    items: tuple  # ((utt_id, payload), ...) in file order
    kind: str
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"manifest kind must be one of {KINDS}, got {self.kind!r}")
        object.__setattr__(self, "_index", dict(self.items))

    def __len__(self):
        return len(self.items)

    def __contains__(self, utt_id):
        return utt_id in self._index

    def __getitem__(self, utt_id):
        return self._index[utt_id]

    @property
    def ids(self):
        return [utt_id for utt_id, _ in self.items]


def parse_manifest(lines, kind, source="<manifest>"):
    items = []
    seen = set()
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        utt_id, sep, payload = line.partition("\t")
        if not sep:
            raise MalformedLine(source, lineno, "expected '<id>\\t<payload>'")
        if not utt_id or utt_id != utt_id.strip():
            raise MalformedLine(source, lineno, f"bad utterance id {utt_id!r}")
        if not payload and kind != "text":
            raise MalformedLine(source, lineno, f"empty payload for {utt_id!r}")
        if utt_id in seen:
            raise DuplicateId(source, lineno, utt_id)
        seen.add(utt_id)
        items.append((utt_id, payload))
    return Manifest(tuple(items), kind)


def load_manifest(path, kind="audio"):
    try:
        with open(path, encoding="utf-8") as f:
            return parse_manifest(f, kind, str(path))
    except OSError as e:
        raise IoFailure(f"cannot read manifest {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise MalformedLine(str(path), "?", f"not UTF-8 ({e})") from e


def save_manifest(manifest, path):
    for utt_id, payload in manifest.items:
        if "\t" in utt_id or "\n" in payload or "\n" in utt_id:
            raise ValueError(f"record {utt_id!r} cannot be written as a single TSV line")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for utt_id, payload in manifest.items:
                f.write(f"{utt_id}\t{payload}\n")
    except OSError as e:
        raise IoFailure(f"cannot write manifest {path}: {e}") from e


@dataclass(frozen=True)
class EvalPair:
    utterance_id: str
    ref: str
    gen: str


class Pairing(NamedTuple):
    pairs: list
    missing_in_gen: list
    missing_in_ref: list


def pair_utterances(ref, gen):
    """Pair records sharing an id, in reference order, and report the leftovers."""
    if ref.kind != gen.kind:
        raise KindMismatch(f"cannot pair a {ref.kind} manifest with a {gen.kind} manifest")
    pairs = [EvalPair(i, p, gen[i]) for i, p in ref.items if i in gen]
    if not pairs:
        raise EmptyIntersection("reference and generated manifests share no utterance ids")
    missing_in_gen = [i for i in ref.ids if i not in gen]
    missing_in_ref = [i for i in gen.ids if i not in ref]
    return Pairing(pairs, missing_in_gen, missing_in_ref)


@dataclass(frozen=True)
class EvalConfig:
    spectral: SpectralParams = SpectralParams()
    pitch: PitchParams = PitchParams()
    n_mels: int = 80
    f_min: float = 0.0
    f_max: float = None  # None means the Nyquist frequency of each signal
    mcep_order: int = 24
    griffin_lim: GriffinLimConfig = GriffinLimConfig()
    metrics: tuple = METRICS

    def __post_init__(self):
        if not self.metrics:
            raise ConfigError("at least one metric must be enabled")
        unknown = [m for m in self.metrics if m not in METRICS]
        if unknown:
            raise ConfigError(f"unknown metric(s) {unknown}; choose from {list(METRICS)}")
        if len(set(self.metrics)) != len(self.metrics):
            raise ConfigError("metrics list contains duplicates")
        if self.n_mels < 2:
            raise ConfigError(f"n_mels must be at least 2, got {self.n_mels}")
        if not 1 <= self.mcep_order < self.n_mels:
            raise ConfigError(f"mcep_order must lie in [1, n_mels - 1], got {self.mcep_order}")
        if self.f_min < 0 or (self.f_max is not None and self.f_max <= self.f_min):
            raise ConfigError(f"need 0 <= f_min < f_max, got f_min={self.f_min} f_max={self.f_max}")

    @property
    def stages(self):
        stages = []
        if "mcd" in self.metrics or "f0_rmse" in self.metrics:
            stages += ["features", "align"]
        return tuple(stages + [m for m in METRICS if m in self.metrics])

    def to_dict(self):
        return {
            "spectral": self.spectral.to_dict(),
            "pitch": self.pitch.to_dict(),
            "n_mels": self.n_mels,
            "f_min": self.f_min,
            "f_max": self.f_max,
            "mcep_order": self.mcep_order,
            "griffin_lim": self.griffin_lim.to_dict(),
            "metrics": list(self.metrics),
        }


# key -> (type, default); None default means "leave the dataclass default"
SCHEMA = {
    "n_fft": (int, 1024),
    "win_length": (int, 1024),
    "hop_length": (int, 256),
    "center": (bool, True),
    "n_mels": (int, 80),
    "f_min": (float, 0.0),
    "f_max": (float, None),
    "mcep_order": (int, 24),
    "f0_min": (float, 70.0),
    "f0_max": (float, 400.0),
    "voicing_threshold": (float, 0.15),
    "gl_iters": (int, 60),
    "gl_init": (str, "zero"),
    "gl_momentum": (float, 0.0),
    "seed": (int, 0),
    "metrics": (list, list(METRICS)),
}

_INT = re.compile(r"[+-]?\d+\Z")
_BOOLS = {"true": True, "yes": True, "on": True, "false": False, "no": False, "off": False}


def _strip_comment(line):
    quote = None
    for pos, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:pos]
    return line


def _unquote(token):
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "\"'":
        return token[1:-1]
    if any(c in token for c in "\"'[]"):
        raise ValueError(f"malformed string {token!r}")
    return token


def _coerce(kind, raw):
    if kind is int:
        if not _INT.match(raw):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(raw)
    if kind is float:
        value = float(raw)
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"expected a finite number, got {raw!r}")
        return value
    if kind is bool:
        if raw.lower() not in _BOOLS:
            raise ValueError(f"expected true/false, got {raw!r}")
        return _BOOLS[raw.lower()]
    if kind is str:
        value = _unquote(raw)
        if not value:
            raise ValueError("expected a non-empty string")
        return value
    if not (raw.startswith("[") and raw.endswith("]")):
        raise ValueError(f"expected a list like [a, b], got {raw!r}")
    inner = raw[1:-1].strip()
    if not inner:
        return []
    items = [_unquote(tok.strip()) for tok in inner.split(",")]
    if any(not item for item in items):
        raise ValueError(f"empty list item in {raw!r}")
    return items


def parse_config(text, source="<config>"):
    """Parse config text into an :class:`EvalConfig`; every failure is a located ConfigError."""
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {line!r}", source, lineno)
        if key not in SCHEMA:
            close = difflib.get_close_matches(key, SCHEMA, n=1)
            hint = f" (did you mean {close[0]!r}?)" if close else ""
            raise UnknownKey(f"unknown key {key!r}{hint}", source, lineno)
        if key in values:
            raise ConfigError(f"key {key!r} already set on line {lines[key]}", source, lineno)
        kind = SCHEMA[key][0]
        try:
            values[key] = _coerce(kind, value)
        except ValueError as e:
            raise ConfigTypeError(f"{key}: {e}", source, lineno) from None
        lines[key] = lineno

    def get(key):
        return values.get(key, SCHEMA[key][1])

    try:
        return EvalConfig(
            spectral=SpectralParams(
                n_fft=get("n_fft"),
                win_length=get("win_length"),
                hop_length=get("hop_length"),
                center=get("center"),
            ),
            pitch=PitchParams(get("f0_min"), get("f0_max"), get("voicing_threshold")),
            n_mels=get("n_mels"),
            f_min=get("f_min"),
            f_max=get("f_max"),
            mcep_order=get("mcep_order"),
            griffin_lim=GriffinLimConfig(get("gl_iters"), get("gl_init"), get("gl_momentum"), get("seed")),
            metrics=tuple(get("metrics")),
        )
    except ConfigError as e:
        raise ConfigError(str(e), source) from None
    except TtsEvalError as e:
        raise ConfigError(str(e), source) from None


def load_config(path=None):
    """Read an EvalConfig from ``path``; ``None`` gives the defaults."""
    if path is None:
        return EvalConfig()
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise IoFailure(f"cannot read config {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"not UTF-8 ({e})", str(path)) from None
    return parse_config(text, str(path))
