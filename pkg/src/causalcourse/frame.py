"""Columnar data container with typed columns and complete records.

Every analysis in the package consumes a :class:`Frame`: a fixed set of
named float64 columns, each declared ``continuous`` or ``binary``, with an
optional cluster label vector for grouped data (sibling pairs, repeated
measures). Frames are immutable; transformations return new frames.

Missing values are handled once, at load time: rows with missing entries
in any schema column are dropped and the drop count is carried on the
frame, so downstream estimators never see incomplete records.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import DataError

CONTINUOUS = "continuous"
BINARY = "binary"
_KINDS = (CONTINUOUS, BINARY)


def _as_column(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"column {name!r} must be one-dimensional")
    if arr.size == 0:
        raise DataError(f"column {name!r} is empty")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"column {name!r} contains missing or non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Frame:
    """Immutable columnar dataset.

    Parameters
    ----------
    data : mapping of column name to 1-d float64 array, all equal length.
    kinds : mapping of column name to ``"continuous"`` or ``"binary"``.
        Binary columns may only contain 0.0 and 1.0.
    cluster_id : optional integer array of group labels, same length as
        the columns. Required by cluster resampling and cluster-robust
        covariance.
    dropped_rows : number of incomplete rows removed when the frame was
        loaded. Informational; carried into result diagnostics.
    """

    data: Mapping[str, np.ndarray]
    kinds: Mapping[str, str]
    cluster_id: np.ndarray | None = None
    dropped_rows: int = 0

    def __post_init__(self):
        if not self.data:
            raise DataError("frame must have at least one column")
        if set(self.data) != set(self.kinds):
            raise DataError("data and kinds must declare the same columns")
        clean = {name: _as_column(name, vals) for name, vals in self.data.items()}
        lengths = {arr.size for arr in clean.values()}
        if len(lengths) != 1:
            raise DataError("all columns must have the same length")
        for name, kind in self.kinds.items():
            if kind not in _KINDS:
                raise DataError(f"column {name!r} has unknown kind {kind!r}")
            if kind == BINARY:
                vals = clean[name]
                if not np.all((vals == 0.0) | (vals == 1.0)):
                    raise DataError(f"binary column {name!r} has values outside {{0, 1}}")
        object.__setattr__(self, "data", dict(clean))
        object.__setattr__(self, "kinds", dict(self.kinds))
        if self.cluster_id is not None:
            cid = np.asarray(self.cluster_id)
            if cid.ndim != 1 or cid.size != lengths.pop():
                raise DataError("cluster_id must be one-dimensional and match column length")
            cid = cid.copy()
            cid.flags.writeable = False
            object.__setattr__(self, "cluster_id", cid)

    @property
    def n_rows(self) -> int:
        return next(iter(self.data.values())).size

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.data)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[name]
        except KeyError:
            raise DataError(f"frame has no column {name!r}") from None

    def kind(self, name: str) -> str:
        self.column(name)
        return self.kinds[name]

    def require(self, names: Iterable[str]) -> None:
        missing = [n for n in names if n not in self.data]
        if missing:
            raise DataError("frame is missing columns: " + ", ".join(sorted(missing)))

    def select(self, names: Sequence[str]) -> "Frame":
        """Frame restricted to ``names``, preserving cluster labels."""
        self.require(names)
        return Frame(
            data={n: self.data[n] for n in names},
            kinds={n: self.kinds[n] for n in names},
            cluster_id=self.cluster_id,
            dropped_rows=self.dropped_rows,
        )

    def take(self, indices: np.ndarray, cluster_id: np.ndarray | None = None) -> "Frame":
        """Row subset / resample by integer indices.

        Skips re-validation: a row subset of a valid frame is valid, and
        this sits on the bootstrap hot path. ``cluster_id`` overrides the
        subsetted labels; the cluster bootstrap passes fresh labels so
        that a cluster drawn twice counts as two distinct clusters.
        """
        idx = np.asarray(indices, dtype=np.intp)
        if idx.size == 0:
            raise DataError("cannot take an empty row subset")
        data = {}
        for n, v in self.data.items():
            col = v[idx]
            col.flags.writeable = False
            data[n] = col
        out = object.__new__(Frame)
        object.__setattr__(out, "data", data)
        object.__setattr__(out, "kinds", self.kinds)
        if cluster_id is not None:
            cid = np.asarray(cluster_id, dtype=np.int64)
            if cid.shape[0] != idx.shape[0]:
                raise DataError("cluster labels must match the selected rows")
        else:
            cid = None if self.cluster_id is None else self.cluster_id[idx]
        object.__setattr__(out, "cluster_id", cid)
        object.__setattr__(out, "dropped_rows", self.dropped_rows)
        return out

    def with_columns(self, new: Mapping[str, np.ndarray], kinds: Mapping[str, str]) -> "Frame":
        """New frame with columns added or replaced."""
        if set(new) != set(kinds):
            raise DataError("new columns and kinds must match")
        data = dict(self.data)
        all_kinds = dict(self.kinds)
        data.update(new)
        all_kinds.update(kinds)
        return Frame(
            data=data,
            kinds=all_kinds,
            cluster_id=self.cluster_id,
            dropped_rows=self.dropped_rows,
        )

    @classmethod
    def from_pandas(
        cls,
        df: pd.DataFrame,
        schema: Mapping[str, str],
        cluster_col: str | None = None,
    ) -> "Frame":
        """Build a frame from a DataFrame, dropping incomplete rows.

        Only schema columns (plus ``cluster_col``) are read; completeness
        is judged on those columns alone.
        """
        wanted = list(schema)
        if cluster_col is not None:
            if cluster_col in schema:
                raise DataError("cluster column cannot also be a schema column")
            wanted = wanted + [cluster_col]
        missing = [c for c in wanted if c not in df.columns]
        if missing:
            raise DataError("input is missing columns: " + ", ".join(missing))
        sub = df[wanted]
        complete = sub.notna().all(axis=1)
        dropped = int((~complete).sum())
        sub = sub[complete]
        if len(sub) == 0:
            raise DataError("no complete rows remain after dropping missing values")
        cluster = None
        if cluster_col is not None:
            codes, _ = pd.factorize(sub[cluster_col])
            cluster = codes.astype(np.int64)
        try:
            data = {c: sub[c].to_numpy(dtype=np.float64) for c in schema}
        except (TypeError, ValueError) as exc:
            raise DataError(f"non-numeric values in schema columns: {exc}") from exc
        return cls(
            data=data,
            kinds=dict(schema),
            cluster_id=cluster,
            dropped_rows=dropped,
        )


def load_frame(
    path,
    schema: Mapping[str, str],
    cluster_col: str | None = None,
) -> Frame:
    """Read a CSV with a header row into a Frame.

    Decimal points use ``.``; rows missing any schema value are dropped
    and counted on ``frame.dropped_rows``.
    """
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"could not read {path}: {exc}") from exc
    return Frame.from_pandas(df, schema, cluster_col=cluster_col)


def write_frame(frame: Frame, path) -> None:
    """Write a frame to CSV with a header row (cluster labels included)."""
    df = pd.DataFrame({n: frame.data[n] for n in frame.names})
    if frame.cluster_id is not None:
        df["cluster_id"] = frame.cluster_id
    df.to_csv(path, index=False)


@dataclass(frozen=True)
class StandardizationReport:
    """Means and standard deviations used by :func:`standardize`.

    ``sds`` are computed with n-1 in the denominator. Needed to undo the
    transform or to map new data onto the same scale.
    """

    columns: tuple[str, ...]
    means: tuple[float, ...]
    sds: tuple[float, ...]

    def as_dict(self) -> dict[str, dict[str, float]]:
        return {
            c: {"mean": m, "sd": s}
            for c, m, s in zip(self.columns, self.means, self.sds)
        }


def standardize(frame: Frame, columns: Sequence[str]) -> tuple[Frame, StandardizationReport]:
    """Center and scale continuous columns to mean 0, sd 1."""
    frame.require(columns)
    means, sds, new = [], [], {}
    for c in columns:
        if frame.kinds[c] != CONTINUOUS:
            raise DataError(f"cannot standardize non-continuous column {c!r}")
        vals = frame.data[c]
        if vals.size < 2:
            raise DataError(f"column {c!r} has too few rows to standardize")
        m = float(np.mean(vals))
        s = float(np.std(vals, ddof=1))
        if s == 0.0:
            raise DataError(f"column {c!r} is constant; cannot standardize")
        means.append(m)
        sds.append(s)
        new[c] = (vals - m) / s
    report = StandardizationReport(tuple(columns), tuple(means), tuple(sds))
    out = frame.with_columns(new, {c: CONTINUOUS for c in columns})
    return out, report


def destandardize(frame: Frame, report: StandardizationReport) -> Frame:
    """Invert :func:`standardize` using the recorded means and sds."""
    frame.require(report.columns)
    new = {
        c: frame.data[c] * s + m
        for c, m, s in zip(report.columns, report.means, report.sds)
    }
    return frame.with_columns(new, {c: CONTINUOUS for c in report.columns})


def log_transform(frame: Frame, columns: Sequence[str]) -> Frame:
    """Natural log of strictly positive continuous columns."""
    frame.require(columns)
    new = {}
    for c in columns:
        if frame.kinds[c] != CONTINUOUS:
            raise DataError(f"cannot log-transform non-continuous column {c!r}")
        vals = frame.data[c]
        if np.any(vals <= 0.0):
            raise DataError(f"column {c!r} has non-positive values; log undefined")
        new[c] = np.log(vals)
    return frame.with_columns(new, {c: CONTINUOUS for c in columns})
