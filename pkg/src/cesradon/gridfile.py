"""CSV files carrying values sampled on a log grid.

Layout (human-inspectable, plot-ready):

    # cesradon-grid v1
    # n=2 u_min=-8,-8 u_max=8,8 shape=256,256
    u1,u2,value
    -8,-8,0.0012
    ...

Rows are written in ascending row-major order (last axis fastest), one row
per grid node, so the row count always equals the product of the shape.
Floats are written with 17 significant digits and round-trip exactly; the
same inputs therefore produce byte-identical files.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .errors import ConfigError
from .grids import LogGrid

__all__ = ["GRID_HEADER", "write_grid", "read_grid"]

GRID_HEADER = "# cesradon-grid v1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_grid(path: str, grid: LogGrid, values: np.ndarray) -> None:
    """Write one value per grid node to ``path``.

    Parameters
    ----------
    path : str
    grid : LogGrid
    values : array_like
        Shaped like the grid (or flat with matching size); must be finite.
    """
    values = np.asarray(values, dtype=float).reshape(grid.shape)
    if not np.all(np.isfinite(values)):
        raise ConfigError("grid values must be finite")
    n = grid.dim
    axes = [grid.axis_nodes(k) for k in range(n)]
    meta = (
        f"# n={n}"
        f" u_min={','.join(_fmt(v) for v in grid.u_min)}"
        f" u_max={','.join(_fmt(v) for v in grid.u_max)}"
        f" shape={','.join(str(int(v)) for v in grid.shape)}"
    )
    cols = ",".join(f"u{k + 1}" for k in range(n)) + ",value"
    lines = [GRID_HEADER, meta, cols]
    flat = values.ravel()
    idx = np.stack(
        np.meshgrid(*[np.arange(s) for s in grid.shape], indexing="ij"), axis=-1
    ).reshape(-1, n)
    for row, v in zip(idx, flat):
        coords = ",".join(_fmt(axes[k][row[k]]) for k in range(n))
        lines.append(f"{coords},{_fmt(v)}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_meta(line: str):
    fields = {}
    for tok in line.lstrip("#").split():
        if "=" not in tok:
            raise ConfigError(f"malformed grid metadata token {tok!r}")
        key, val = tok.split("=", 1)
        fields[key] = val
    try:
        n = int(fields["n"])
        u_min = tuple(float(v) for v in fields["u_min"].split(","))
        u_max = tuple(float(v) for v in fields["u_max"].split(","))
        shape = tuple(int(v) for v in fields["shape"].split(","))
    except (KeyError, ValueError) as e:
        raise ConfigError(f"malformed grid metadata line: {line!r}") from e
    if not (len(u_min) == len(u_max) == len(shape) == n):
        raise ConfigError("grid metadata fields disagree about the dimension")
    return LogGrid(u_min=u_min, u_max=u_max, shape=shape)


def read_grid(path: str) -> Tuple[LogGrid, np.ndarray]:
    """Read a grid file back into (LogGrid, values).

    Raises
    ------
    ConfigError
        On a wrong header, malformed metadata, a row-count mismatch, or
        coordinates that disagree with the declared grid.
    """
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if header != GRID_HEADER:
            raise ConfigError(
                f"not a cesradon grid file (header {header!r}, "
                f"expected {GRID_HEADER!r})"
            )
        grid = _parse_meta(fh.readline().rstrip("\n"))
        fh.readline()  # column names
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as e:
            raise ConfigError(f"malformed grid rows: {e}") from e

    n = grid.dim
    total = int(np.prod(grid.shape))
    if data.shape != (total, n + 1):
        raise ConfigError(
            f"grid file carries {data.shape[0]} rows of width {data.shape[1]}, "
            f"expected {total} rows of width {n + 1}"
        )
    axes = [grid.axis_nodes(k) for k in range(n)]
    expect = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    scale = max(1.0, float(np.max(np.abs(expect))))
    if not np.allclose(data[:, :n], expect, rtol=0.0, atol=1e-9 * scale):
        raise ConfigError("grid file coordinates disagree with the declared grid")
    values = data[:, n].reshape(grid.shape)
    if not np.all(np.isfinite(values)):
        raise ConfigError("grid file contains non-finite values")
    return grid, values
