import json

import numpy as np
import pytest

from ttseval.dump import FORMAT, SCHEMA_VERSION, decode, encode, read_attention, read_dump, write_dump
from ttseval.errors import IoFailure, SchemaMismatch


def test_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    streams = {"mel": rng.standard_normal((7, 5)), "f0": np.array([0.0, 101.25, 1e-300, -3.5])}
    header = {"utterance_id": "u1", "sample_rate_hz": 22050}
    path = tmp_path / "d.json"
    write_dump(path, header, streams)
    h, s = read_dump(path)
    assert h == header
    for name, arr in streams.items():
        assert s[name].shape == arr.shape
        np.testing.assert_array_equal(s[name], arr)


def test_encoding_is_canonical():
    a = encode({"b": 1, "a": 2}, {"x": np.arange(3.0)})
    b = encode({"a": 2, "b": 1}, {"x": [0.0, 1.0, 2.0]})
    assert a == b
    doc = json.loads(a)
    assert doc["format"] == FORMAT and doc["schema_version"] == SCHEMA_VERSION


def test_non_finite_values_are_rejected():
    with pytest.raises(ValueError):
        encode({}, {"x": np.array([np.nan])})


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        '{"format": "other", "schema_version": 1, "header": {}, "streams": {}}',
        '{"format": "ttseval-dump", "schema_version": 2, "header": {}, "streams": {}}',
        '{"format": "ttseval-dump", "schema_version": 1, "streams": {}}',
        '{"format": "ttseval-dump", "schema_version": 1, "header": {}, "streams": {"m": {"shape": [2, 2], "data": [1]}}}',
        '{"format": "ttseval-dump", "schema_version": 1, "header": {}, "streams": {"m": {"data": [1]}}}',
    ],
)
def test_schema_mismatch(text):
    with pytest.raises(SchemaMismatch):
        decode(text)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        read_dump(tmp_path / "none.json")


def test_read_attention(tmp_path):
    path = tmp_path / "a.json"
    write_dump(path, {}, {"attention": np.eye(3), "vec": np.ones(3)})
    np.testing.assert_array_equal(read_attention(path), np.eye(3))
    with pytest.raises(SchemaMismatch):
        read_attention(path, "vec")
    with pytest.raises(SchemaMismatch):
        read_attention(path, "missing")
