"""Versioned JSON container for per-utterance feature dumps.

Layout::

    {
      "format": "ttseval-dump",
      "schema_version": 1,
      "header": {...},                      # free-form settings (params, rates, ids)
      "streams": {
        "<name>": {"shape": [rows, cols], "data": [row-major floats]}
      }
    }

Keys are sorted and floats use Python's shortest round-trip repr, so the same
arrays always serialise to the same bytes.
"""

import json

import numpy as np

from .errors import IoFailure, SchemaMismatch

FORMAT = "ttseval-dump"
SCHEMA_VERSION = 1


def encode(header, streams):
    doc = {
        "format": FORMAT,
        "schema_version": SCHEMA_VERSION,
        "header": header,
        "streams": {
            name: {"shape": list(np.shape(arr)), "data": np.asarray(arr, dtype=np.float64).ravel().tolist()}
            for name, arr in streams.items()
        },
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def decode(text, source="<dump>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaMismatch(f"{source}: not valid JSON ({e})") from e
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise SchemaMismatch(f"{source}: not a {FORMAT} document")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(f"{source}: unsupported schema_version {doc.get('schema_version')!r}")
    header = doc.get("header")
    raw = doc.get("streams")
    if not isinstance(header, dict) or not isinstance(raw, dict):
        raise SchemaMismatch(f"{source}: missing header or streams")
    streams = {}
    for name, rec in raw.items():
        try:
            shape = tuple(int(s) for s in rec["shape"])
            arr = np.asarray(rec["data"], dtype=np.float64).reshape(shape)
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaMismatch(f"{source}: stream {name!r} is malformed ({e})") from e
        streams[name] = arr
    return header, streams


def write_dump(path, header, streams):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(encode(header, streams))
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def read_dump(path):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    return decode(text, str(path))


def read_attention(path, stream="attention"):
    """Load a frames x tokens attention matrix stored as a dump stream."""
    _, streams = read_dump(path)
    if stream not in streams or streams[stream].ndim != 2:
        raise SchemaMismatch(f"{path}: no 2-D {stream!r} stream")
    return streams[stream]
