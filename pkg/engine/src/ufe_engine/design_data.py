"""Datasets for single- and two-factor designs.

Observations are held as nested tuples so a dataset is immutable once built.
Level labels are kept alongside the data in first-appearance order; all
indices used by the API are 0-based, while reports show 1-based positions.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Union

import numpy as np
import pandas as pd

from .exceptions import InvalidInputError, SchemaError

logger = logging.getLogger(__name__)


class Schema(str, enum.Enum):
    SINGLE = "single"
    TWO = "two"


class Factor(str, enum.Enum):
    A = "A"
    B = "B"


class AdjustmentOrigin(str, enum.Enum):
    SHIFT = "shift-by-mu0"
    CELL = "cell-baseline"
    COLLAPSED_A = "collapsed-A"
    COLLAPSED_B = "collapsed-B"


def _as_row(values: Iterable[float], where: str) -> tuple[float, ...]:
    row = tuple(float(v) for v in values)
    if not row:
        raise InvalidInputError(f"{where} has no observations")
    if not all(math.isfinite(v) for v in row):
        raise InvalidInputError(f"{where} contains non-finite observations")
    return row


def cell_index_name(i: int, j: int, levels_a: int, levels_b: int) -> str:
    """1-based name of cell (i, j): ``"12"`` while every index is one digit, else ``"1,12"``."""
    if max(levels_a, levels_b) < 10:
        return f"{i + 1}{j + 1}"
    return f"{i + 1},{j + 1}"


def _default_labels(count: int) -> tuple[str, ...]:
    return tuple(str(k + 1) for k in range(count))


@dataclass(frozen=True)
class SingleFactorData:
    """Observations z_ij of a single-factor design.

    Attributes:
        obs: Ragged table, row i holds the m_i replicates of level i in input order.
        labels: Level labels; defaults to "1".."r".
    """

    obs: tuple[tuple[float, ...], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        rows = tuple(_as_row(row, f"level {i + 1}") for i, row in enumerate(self.obs))
        if len(rows) < 2:
            raise InvalidInputError("level count r >= 2 required")
        labels = tuple(str(label) for label in self.labels) or _default_labels(len(rows))
        if len(labels) != len(rows):
            raise InvalidInputError(f"expected {len(rows)} labels, got {len(labels)}")
        object.__setattr__(self, "obs", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def levels(self) -> int:
        return len(self.obs)

    @property
    def replicates(self) -> tuple[int, ...]:
        return tuple(len(row) for row in self.obs)

    @property
    def total(self) -> int:
        return sum(self.replicates)

    @property
    def weights(self) -> tuple[Fraction, ...]:
        """Exact weights w_i = m_i / N; they sum to 1."""
        n = self.total
        return tuple(Fraction(m, n) for m in self.replicates)

    @property
    def balanced(self) -> bool:
        return len(set(self.replicates)) == 1

    def row(self, i: int) -> np.ndarray:
        return np.asarray(self.obs[i], dtype=float)

    def values(self) -> np.ndarray:
        """All observations flattened in (i, j) order."""
        return np.concatenate([self.row(i) for i in range(self.levels)])


@dataclass(frozen=True)
class TwoFactorData:
    """Observations z_ijl of an r x s design with m_ij >= 1 replicates per cell."""

    cells: tuple[tuple[tuple[float, ...], ...], ...]
    labels_a: tuple[str, ...] = ()
    labels_b: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        table = tuple(
            tuple(_as_row(cell, f"cell ({i + 1},{j + 1})") for j, cell in enumerate(row))
            for i, row in enumerate(self.cells)
        )
        r = len(table)
        s = len(table[0]) if table else 0
        if r < 2 or s < 2:
            raise InvalidInputError("level counts r >= 2 and s >= 2 required")
        if any(len(row) != s for row in table):
            raise InvalidInputError("every level of A needs a cell for every level of B")
        labels_a = tuple(str(x) for x in self.labels_a) or _default_labels(r)
        labels_b = tuple(str(x) for x in self.labels_b) or _default_labels(s)
        if len(labels_a) != r or len(labels_b) != s:
            raise InvalidInputError("label counts do not match the table shape")
        object.__setattr__(self, "cells", table)
        object.__setattr__(self, "labels_a", labels_a)
        object.__setattr__(self, "labels_b", labels_b)

    @property
    def levels_a(self) -> int:
        return len(self.cells)

    @property
    def levels_b(self) -> int:
        return len(self.cells[0])

    @property
    def cell_replicates(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(len(cell) for cell in row) for row in self.cells)

    @property
    def replicates_a(self) -> tuple[int, ...]:
        """m_i. for every level of A."""
        return tuple(sum(row) for row in self.cell_replicates)

    @property
    def replicates_b(self) -> tuple[int, ...]:
        """m_.j for every level of B."""
        return tuple(sum(col) for col in zip(*self.cell_replicates))

    @property
    def total(self) -> int:
        return sum(self.replicates_a)

    @property
    def cell_weights(self) -> tuple[tuple[Fraction, ...], ...]:
        n = self.total
        return tuple(tuple(Fraction(m, n) for m in row) for row in self.cell_replicates)

    @property
    def weights_a(self) -> tuple[Fraction, ...]:
        n = self.total
        return tuple(Fraction(m, n) for m in self.replicates_a)

    @property
    def weights_b(self) -> tuple[Fraction, ...]:
        n = self.total
        return tuple(Fraction(m, n) for m in self.replicates_b)

    @property
    def balanced(self) -> bool:
        return len({m for row in self.cell_replicates for m in row}) == 1

    def cell(self, i: int, j: int) -> np.ndarray:
        return np.asarray(self.cells[i][j], dtype=float)

    def cell_name(self, i: int, j: int) -> str:
        return cell_index_name(i, j, self.levels_a, self.levels_b)

    def cell_mean(self, i: int, j: int) -> float:
        return float(np.mean(self.cell(i, j)))

    def responses(self) -> np.ndarray:
        """Response vector Z stacked in (i, j, l) order."""
        return np.concatenate(
            [self.cell(i, j) for i in range(self.levels_a) for j in range(self.levels_b)]
        )


Dataset = Union[SingleFactorData, TwoFactorData]


@dataclass(frozen=True)
class AdjustedSample:
    """A sample with fixed constants subtracted elementwise.

    Attributes:
        values: Adjusted values, same length and order as the source sample.
        origin: Which adjustment produced the values.
        constants: (name, value) pairs that were subtracted.
    """

    values: tuple[float, ...]
    origin: AdjustmentOrigin
    constants: tuple[tuple[str, float], ...] = field(default=())

    @property
    def offset(self) -> float:
        return sum(value for _, value in self.constants)

    def restore(self) -> tuple[float, ...]:
        """Add the recorded constants back."""
        offset = self.offset
        return tuple(v + offset for v in self.values)


def _line_of(index: int) -> int:
    # header is line 1
    return int(index) + 2


def _read_frame(stream: Union[IO[bytes], IO[str]], columns: Sequence[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            stream,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as exc:
        raise SchemaError("input is empty; expected a header row", line=1) from exc
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise SchemaError(f"unreadable CSV: {exc}") from exc

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}", line=1)

    frame = frame[list(columns)].fillna("").apply(lambda col: col.str.strip())
    frame = frame[(frame != "").any(axis=1)]
    if frame.empty:
        raise SchemaError("no data rows after the header", line=2)

    for column in columns[:-1]:
        blank = frame.index[frame[column] == ""]
        if len(blank):
            raise SchemaError(f"empty {column}", line=_line_of(blank[0]))

    numeric = pd.to_numeric(frame["value"], errors="coerce")
    bad = frame.index[~np.isfinite(numeric.to_numpy(dtype=float))]
    if len(bad):
        raise SchemaError(
            f"value {frame.at[bad[0], 'value']!r} is not a finite number",
            line=_line_of(bad[0]),
        )
    frame = frame.assign(value=numeric.astype(float))
    return frame


def parse_csv(stream: Union[IO[bytes], IO[str]], schema: Union[Schema, str]) -> Dataset:
    """Read a design from CSV.

    The header is ``level_a,value`` for single-factor data and
    ``level_a,level_b,value`` for two-factor data. Labels are mapped to
    indices in order of first appearance and row order within a level or
    cell becomes the replicate index.

    Args:
        stream: Text or binary stream holding UTF-8 CSV.
        schema: ``single`` or ``two``.

    Returns:
        A validated SingleFactorData or TwoFactorData.

    Raises:
        SchemaError: On missing columns, non-numeric values, too few levels
            or an absent cell; the message names the offending line.
    """
    schema = Schema(schema)
    if schema is Schema.SINGLE:
        frame = _read_frame(stream, ("level_a", "value"))
        labels = [str(x) for x in pd.unique(frame["level_a"])]
        if len(labels) < 2:
            raise SchemaError("level count r >= 2 required", line=_line_of(frame.index[-1]))
        rows: dict[str, list[float]] = {label: [] for label in labels}
        for label, value in zip(frame["level_a"], frame["value"]):
            rows[label].append(float(value))
        data: Dataset = SingleFactorData(tuple(tuple(rows[x]) for x in labels), tuple(labels))
        logger.debug("parsed single-factor data: m=%s", data.replicates)
        return data

    frame = _read_frame(stream, ("level_a", "level_b", "value"))
    labels_a = [str(x) for x in pd.unique(frame["level_a"])]
    labels_b = [str(x) for x in pd.unique(frame["level_b"])]
    if len(labels_a) < 2 or len(labels_b) < 2:
        raise SchemaError(
            "level counts r >= 2 and s >= 2 required", line=_line_of(frame.index[-1])
        )
    cells: dict[tuple[str, str], list[float]] = {
        (a, b): [] for a in labels_a for b in labels_b
    }
    for a, b, value in zip(frame["level_a"], frame["level_b"], frame["value"]):
        cells[(a, b)].append(float(value))
    for (a, b), values in cells.items():
        if not values:
            raise SchemaError(f"cell (level_a={a}, level_b={b}) has no observations")
    data = TwoFactorData(
        tuple(tuple(tuple(cells[(a, b)]) for b in labels_b) for a in labels_a),
        tuple(labels_a),
        tuple(labels_b),
    )
    logger.debug("parsed two-factor data: m=%s", data.cell_replicates)
    return data


def collapse_by_factor(d: TwoFactorData, which: Union[Factor, str]) -> SingleFactorData:
    """Merge all cells sharing one level of a factor into a single sample.

    For factor A, level i holds cells (i, 1), (i, 2), ... concatenated in
    (j, l) order; factor B is symmetric with (i, l) order.
    """
    which = Factor(which)
    if which is Factor.A:
        rows = tuple(
            tuple(v for cell in d.cells[i] for v in cell) for i in range(d.levels_a)
        )
        return SingleFactorData(rows, d.labels_a)
    rows = tuple(
        tuple(v for i in range(d.levels_a) for v in d.cells[i][j]) for j in range(d.levels_b)
    )
    return SingleFactorData(rows, d.labels_b)


def adjust_shift(
    sample: Sequence[float],
    mu0: float,
    origin: AdjustmentOrigin = AdjustmentOrigin.SHIFT,
) -> AdjustedSample:
    """Subtract a fixed overall level mu0 from every value."""
    mu0 = float(mu0)
    if not math.isfinite(mu0):
        raise InvalidInputError(f"mu0 must be finite, got {mu0!r}")
    values = tuple(float(x) - mu0 for x in sample)
    return AdjustedSample(values, AdjustmentOrigin(origin), (("mu0", mu0),))


def adjust_cell(
    d: TwoFactorData, i: int, j: int, mu0: float, ai0: float, bj0: float
) -> AdjustedSample:
    """Subtract the additive cell baseline mu0 + a_i0 + b_j0 from cell (i, j)."""
    if not (0 <= i < d.levels_a and 0 <= j < d.levels_b):
        raise InvalidInputError(f"cell ({i}, {j}) is outside a {d.levels_a}x{d.levels_b} design")
    constants = (("mu0", float(mu0)), (f"a{i + 1}0", float(ai0)), (f"b{j + 1}0", float(bj0)))
    baseline = sum(value for _, value in constants)
    values = tuple(float(x) - baseline for x in d.cells[i][j])
    return AdjustedSample(values, AdjustmentOrigin.CELL, constants)


def moment_sigma(sample: Sequence[float], center: float) -> float:
    """Root mean square deviation of sample about center, sqrt((1/m) sum (x - center)^2)."""
    values = np.asarray(sample, dtype=float)
    if values.size == 0:
        raise InvalidInputError("moment_sigma needs a non-empty sample")
    return float(np.sqrt(np.mean((values - float(center)) ** 2)))
