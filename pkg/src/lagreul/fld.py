"""Validated field container and the FLD1 binary dump format.

An FLD1 file is one JSON header line followed by raw little-endian float64
samples in row-major node order with components outermost.
"""
import json
from dataclasses import dataclass

import numpy as np

from .grid import Grid, check_finite

FORMAT = "FLD1"
SYMMETRY_TOL = 1e-12


@dataclass
class Field:
    """Samples of a scalar, vector or tensor field on ``grid``.

    ``values`` has shape ``component_shape + grid.shape``; ``component_shape``
    is ``()``, ``(d,)`` or ``(d, d)``.
    """

    grid: Grid
    values: np.ndarray
    name: str = "field"
    symmetric: bool = False

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        check_finite(self.values, self.name)
        shape = self.values.shape
        if shape[len(shape) - self.grid.d:] != self.grid.shape:
            raise ValueError(f"{self.name}: trailing axes {shape} do not match grid {self.grid.shape}")
        comp = self.component_shape
        if comp not in ((), (self.grid.d,), (self.grid.d, self.grid.d)):
            raise ValueError(f"{self.name}: unsupported component shape {comp}")
        if self.symmetric:
            if len(comp) != 2:
                raise ValueError(f"{self.name}: only tensors can be flagged symmetric")
            asym = np.abs(self.values - np.swapaxes(self.values, 0, 1)).max()
            if asym > SYMMETRY_TOL * max(np.abs(self.values).max(), 1e-300):
                raise ValueError(f"{self.name}: tensor flagged symmetric has asymmetry {asym:.3e}")

    @property
    def component_shape(self):
        return self.values.shape[: self.values.ndim - self.grid.d]

    @property
    def components(self):
        return int(np.prod(self.component_shape, dtype=int))


def write_fld(path, field):
    header = {
        "format": FORMAT,
        "d": field.grid.d,
        "n": field.grid.n,
        "L": field.grid.L,
        "components": field.components,
        "component_shape": list(field.component_shape),
        "symmetric": field.symmetric,
        "name": field.name,
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        fh.write(field.values.astype("<f8").tobytes(order="C"))


def read_fld(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        payload = fh.read()
    if header.get("format") != FORMAT:
        raise ValueError(f"{path}: not an {FORMAT} file")
    grid = Grid(int(header["d"]), int(header["n"]), float(header["L"]))
    comp = tuple(header.get("component_shape", []))
    expected = int(header["components"]) * grid.size * 8
    if len(payload) != expected:
        raise ValueError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype="<f8").reshape(comp + grid.shape).astype(float)
    return Field(grid, values, header.get("name", "field"), bool(header.get("symmetric", False)))
