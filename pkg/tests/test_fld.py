import json

import numpy as np
import pytest

from lagreul.fld import Field, read_fld, write_fld
from lagreul.grid import Grid


def test_round_trip_vector(tmp_path, rng):
    grid = Grid(2, 16, 3.5)
    field = Field(grid, rng.standard_normal((2,) + grid.shape), "velocity")
    write_fld(tmp_path / "v.fld", field)
    back = read_fld(tmp_path / "v.fld")
    assert back.grid == grid
    assert back.name == "velocity"
    assert np.array_equal(back.values, field.values)


def test_round_trip_symmetric_tensor(tmp_path, rng):
    grid = Grid(2, 8)
    a = rng.standard_normal((2, 2) + grid.shape)
    field = Field(grid, a + a.transpose(1, 0, 2, 3), "stress", symmetric=True)
    write_fld(tmp_path / "s.fld", field)
    back = read_fld(tmp_path / "s.fld")
    assert back.symmetric
    assert np.array_equal(back.values, field.values)


def test_header_and_payload_layout(tmp_path):
    grid = Grid(1, 8)
    values = np.arange(16, dtype=float).reshape(2, 8)
    write_fld(tmp_path / "f.fld", Field(grid, values[:1].reshape(1, 8), "x"))
    raw = (tmp_path / "f.fld").read_bytes()
    header, payload = raw.split(b"\n", 1)
    meta = json.loads(header)
    assert meta["n"] == 8 and meta["d"] == 1
    assert np.array_equal(np.frombuffer(payload, "<f8"), values[0])


def test_rejects_asymmetric_flag(rng):
    grid = Grid(2, 8)
    with pytest.raises(ValueError):
        Field(grid, rng.standard_normal((2, 2) + grid.shape), symmetric=True)


def test_rejects_wrong_shape():
    with pytest.raises(ValueError):
        Field(Grid(2, 8), np.zeros((3, 8, 8)))


def test_rejects_truncated_file(tmp_path):
    grid = Grid(2, 8)
    write_fld(tmp_path / "f.fld", Field(grid, np.zeros(grid.shape)))
    raw = (tmp_path / "f.fld").read_bytes()
    (tmp_path / "g.fld").write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        read_fld(tmp_path / "g.fld")
    (tmp_path / "h.fld").write_bytes(b"not a header\n")
    with pytest.raises(ValueError):
        read_fld(tmp_path / "h.fld")
