"""CSV ingestion and export.

Files are UTF-8 with a header row.  ``target`` names the response
column; every other column is a covariate, kept in file order.  Values
are written with ``repr`` so a save/load round trip reproduces the
arrays bit for bit.  Parse failures name the offending line and column.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CsvFormatError, InvalidArgumentError
from .model import Dataset

__all__ = ["load_csv", "load_grouped_csv", "save_csv"]


def _read_rows(path: str | Path):
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CsvFormatError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise CsvFormatError(f"{path} is not valid UTF-8: {exc}") from exc
    rows = [row for row in rows if row]  # tolerate blank lines
    if not rows:
        raise InvalidArgumentError(f"{path} is empty")
    if len(rows) < 2:
        raise InvalidArgumentError(f"{path} has a header but no data rows")
    header = rows[0]
    seen = set()
    for name in header:
        if name in seen:
            raise CsvFormatError(f"{path}: duplicate column name '{name}' in header")
        seen.add(name)
    return path, rows


def _parse_body(path: Path, header: list[str], body: list[list[str]]) -> np.ndarray:
    width = len(header)
    out = np.empty((len(body), width))
    for i, row in enumerate(body):
        line_no = i + 2  # header is line 1
        if len(row) != width:
            missing = header[min(len(row), width - 1)]
            raise CsvFormatError(
                f"{path}: line {line_no} has {len(row)} fields, expected {width} "
                f"(near column '{missing}')"
            )
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise CsvFormatError(
                    f"{path}: line {line_no}, column '{header[j]}': "
                    f"cannot parse {cell!r} as a number"
                ) from None
    return out


def _standardize(x: np.ndarray, names: Sequence[str]) -> np.ndarray:
    mean = x.mean(axis=0)
    sd = x.std(axis=0)
    flat = np.nonzero(sd == 0.0)[0]
    if flat.size:
        raise InvalidArgumentError(
            f"cannot standardize constant column '{names[flat[0]]}'"
        )
    return (x - mean) / sd


def _assemble(
    path: Path,
    header: list[str],
    values: np.ndarray,
    target: str,
    add_intercept: bool,
    standardize: bool,
    drop: Sequence[str] = (),
) -> Dataset:
    if target not in header:
        raise InvalidArgumentError(f"{path}: no column named '{target}'")
    keep = [j for j, name in enumerate(header) if name != target and name not in drop]
    if not keep:
        raise InvalidArgumentError(f"{path}: no covariate columns besides '{target}'")
    x = values[:, keep]
    y = values[:, header.index(target)]
    if standardize:
        x = _standardize(x, [header[j] for j in keep])
    if add_intercept:
        x = np.hstack([x, np.ones((x.shape[0], 1))])
    return Dataset(x=x, y=y)


def load_csv(
    path: str | Path,
    target: str = "y",
    add_intercept: bool = False,
    standardize: bool = False,
) -> Dataset:
    """Load a dataset; covariates are every column except ``target``.

    ``standardize`` centers and scales each covariate column to unit
    (population) standard deviation; the intercept column, if requested,
    is appended afterwards as the last column and never scaled.
    """
    path, rows = _read_rows(path)
    values = _parse_body(path, rows[0], rows[1:])
    return _assemble(path, rows[0], values, target, add_intercept, standardize)


def load_grouped_csv(
    path: str | Path,
    target: str = "y",
    group_column: str = "group",
    add_intercept: bool = False,
    standardize: bool = False,
) -> tuple[Dataset, list[str]]:
    """Like :func:`load_csv` but peel off a grouping column (kept as strings).

    Returns the dataset and the per-row group labels, for grouped
    metrics such as top-k hits per day.
    """
    path, rows = _read_rows(path)
    header = rows[0]
    if group_column not in header:
        raise InvalidArgumentError(f"{path}: no column named '{group_column}'")
    g_idx = header.index(group_column)
    labels = []
    stripped = []
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise CsvFormatError(
                f"{path}: line {i + 2} has {len(row)} fields, expected {len(header)}"
            )
        labels.append(row[g_idx])
        stripped.append([cell for j, cell in enumerate(row) if j != g_idx])
    sub_header = [name for j, name in enumerate(header) if j != g_idx]
    values = _parse_body(path, sub_header, stripped)
    data = _assemble(path, sub_header, values, target, add_intercept, standardize)
    return data, labels


def save_csv(
    data: Dataset,
    path: str | Path,
    target: str = "y",
    feature_names: Sequence[str] | None = None,
) -> None:
    """Write a dataset as CSV, covariates first, response last.

    Default feature names are x1..xp.  Values use ``repr`` so reloading
    reproduces the floats exactly.
    """
    if feature_names is None:
        feature_names = [f"x{j + 1}" for j in range(data.p)]
    if len(feature_names) != data.p:
        raise InvalidArgumentError(
            f"expected {data.p} feature names, got {len(feature_names)}"
        )
    if target in feature_names:
        raise InvalidArgumentError(f"target '{target}' collides with a feature name")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(feature_names) + [target])
        for i in range(data.n):
            writer.writerow([repr(float(v)) for v in data.x[i]] + [repr(float(data.y[i]))])
