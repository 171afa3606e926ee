"""Exception hierarchy shared by every ttseval module.

Everything raised on purpose derives from :class:`TtsEvalError`, so batch
commands can isolate per-utterance failures with a single ``except``.
Most classes also derive from the builtin they refine (``ValueError``,
``OSError``, ...) so callers that don't know about ttseval still catch them.
"""


class TtsEvalError(Exception):
    pass


# audio_io
class MalformedWav(TtsEvalError, ValueError):
    pass


class UnsupportedEncoding(TtsEvalError, ValueError):
    pass


class MultiChannelUnsupported(TtsEvalError, ValueError):
    pass


class IoFailure(TtsEvalError, OSError):
    pass


# spectral / shared parameter validation
class InvalidParams(TtsEvalError, ValueError):
    pass


class NonInvertibleParams(InvalidParams):
    pass


class InvalidRange(InvalidParams):
    pass


class RateMismatch(TtsEvalError, ValueError):
    pass


class OrderTooHigh(TtsEvalError, ValueError):
    pass


# pitch
class TooShort(TtsEvalError, ValueError):
    pass


# metrics
class EmptySequence(TtsEvalError, ValueError):
    pass


class DimMismatch(TtsEvalError, ValueError):
    pass


class OrderMismatch(TtsEvalError, ValueError):
    pass


class InvalidPath(TtsEvalError, ValueError):
    pass


class NoVoicedOverlap(TtsEvalError, ValueError):
    pass


class EmptyReference(TtsEvalError, ValueError):
    pass


class TooFewRatings(TtsEvalError, ValueError):
    pass


class InvalidRating(TtsEvalError, ValueError):
    pass


class EmptyInput(TtsEvalError, ValueError):
    pass


# griffin_lim
class ShapeMismatch(TtsEvalError, ValueError):
    pass


# prosody
class InvalidAttention(TtsEvalError, ValueError):
    pass


class LengthMismatch(TtsEvalError, ValueError):
    pass


class WindowTooLarge(TtsEvalError, ValueError):
    pass


# corpus
class MalformedLine(TtsEvalError, ValueError):
    def __init__(self, path, lineno, reason):
        super().__init__(f"{path}:{lineno}: {reason}")
        self.path = path
        self.lineno = lineno


class DuplicateId(TtsEvalError, ValueError):
    def __init__(self, path, lineno, utt_id):
        super().__init__(f"{path}:{lineno}: duplicate utterance id {utt_id!r}")
        self.path = path
        self.lineno = lineno
        self.utt_id = utt_id


class KindMismatch(TtsEvalError, ValueError):
    pass


class EmptyIntersection(TtsEvalError, ValueError):
    pass


class ConfigError(TtsEvalError, ValueError):
    """A config problem, located by file and line when known."""

    def __init__(self, message, path=None, lineno=None):
        where = ""
        if path is not None:
            where = f"{path}:{lineno}: " if lineno is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.lineno = lineno


class UnknownKey(ConfigError):
    pass


class ConfigTypeError(ConfigError, TypeError):
    pass


# feature dumps
class SchemaMismatch(TtsEvalError, ValueError):
    pass
