import json

import numpy as np
import pytest

from lagreul.errors import ManifestError
from lagreul.fld import Field, write_fld
from lagreul.grid import Grid
from lagreul.manifest import Manifest, build_field, parse_manifest, suite_options


def test_defaults():
    m = parse_manifest(None)
    assert m.common.n == 128 and m.common.d == 2
    assert m.model.model == "oldroyd_b"
    assert m.data.u0.family == "gaussian_vortex"


def test_dict_and_json_string_agree():
    raw = {"common": {"n": 32, "seed": 3}, "model": {"k": 0.1}}
    assert parse_manifest(raw) == parse_manifest(json.dumps(raw))


@pytest.mark.parametrize(
    "raw",
    [
        {"common": {"n": 31}},
        {"common": {"nu": 0.0}},
        {"common": {"alpha": 1.0}},
        {"model": {"model": "maxwell"}},
        {"solver": {"scheme": "cubic"}},
        {"velocity": 1},
        {"data": {"u0": {"family": "gaussian_vortex", "path": "u.fld"}}},
        {"data": {"u0": {}}},
    ],
)
def test_invalid_manifests(raw):
    with pytest.raises(ManifestError):
        parse_manifest(raw)


def test_error_message_names_the_field():
    with pytest.raises(ManifestError, match="common.n"):
        parse_manifest({"common": {"n": 31}})


def test_invalid_json():
    with pytest.raises(ManifestError):
        parse_manifest("{not json")


def test_manifest_file_resolves_relative_field_paths(tmp_path):
    grid = Grid(2, 16)
    u = np.random.default_rng(0).standard_normal((2,) + grid.shape)
    write_fld(tmp_path / "u.fld", Field(grid, u, "velocity"))
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"common": {"n": 16}, "data": {"u0": {"path": "u.fld"}}}))
    m = parse_manifest(path)
    assert np.array_equal(build_field(m.data.u0, grid, m._base), u)


def test_field_on_wrong_grid(tmp_path):
    write_fld(tmp_path / "u.fld", Field(Grid(2, 16), np.zeros((2, 16, 16)), "velocity"))
    m = parse_manifest({"data": {"u0": {"path": str(tmp_path / "u.fld")}}})
    with pytest.raises(ManifestError):
        build_field(m.data.u0, Grid(2, 32), None)


def test_missing_field_file(tmp_path):
    m = parse_manifest({"data": {"u0": {"path": str(tmp_path / "nope.fld")}}})
    with pytest.raises(ManifestError):
        build_field(m.data.u0, Grid(2, 16), None)


def test_unknown_family_and_bad_params():
    grid = Grid(2, 16)
    with pytest.raises(ManifestError):
        build_field(parse_manifest({"data": {"u0": {"family": "vortex_sheet"}}}).data.u0, grid)
    with pytest.raises(ManifestError):
        build_field(parse_manifest({"data": {"u0": {"family": "gaussian_vortex", "params": {"spin": 2}}}}).data.u0, grid)


def test_suite_options():
    def suite(setup, T=0.25, scales=(1.0,)):
        return T, scales

    assert suite_options(suite, {"scales": [1.0, 0.5]}) == {"scales": (1.0, 0.5)}
    with pytest.raises(ManifestError):
        suite_options(suite, {"setup": 1})
    with pytest.raises(ManifestError):
        suite_options(suite, {"horizon": 1.0})


def test_schema_round_trip():
    m = Manifest()
    assert Manifest.model_validate_json(m.model_dump_json()) == m
