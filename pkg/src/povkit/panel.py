"""Tabular panel container and delimited-file ingestion.

A panel is a flat table with an (entity, time) key, optionally carrying
province / district / cluster key columns used elsewhere for fixed
effects, instrument construction, and clustered covariances.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError, DuplicateKeyError, UnknownColumnError


@dataclass
class PanelDataset:
    """A validated panel: unique (entity, time) keys, clean key columns.

    Parameters
    ----------
    frame : pandas.DataFrame
        The underlying table. Not copied; treat as read-only.
    entity, time : str
        Names of the key columns.
    province, district, cluster : str, optional
        Names of grouping columns, when present.
    meta : dict, optional
        Free-form metadata (synthetic generators attach ground truth here).
    """

    frame: pd.DataFrame
    entity: str
    time: str
    province: str | None = None
    district: str | None = None
    cluster: str | None = None
    meta: dict | None = None
    ingest_report: dict = field(default_factory=dict)

    def __post_init__(self):
        key_cols = [self.entity, self.time]
        for col in key_cols + [c for c in (self.province, self.district, self.cluster) if c]:
            if col not in self.frame.columns:
                raise UnknownColumnError(f"key column {col!r} not in panel")
            if self.frame[col].isna().any():
                raise DataError(f"key column {col!r} contains missing values")
        dup = self.frame.duplicated(subset=key_cols)
        if dup.any():
            idx = dup.idxmax()   # column-wise lookup keeps each key's dtype
            ev = self.frame[self.entity].loc[idx]
            tv = self.frame[self.time].loc[idx]
            ev = ev.item() if hasattr(ev, "item") else ev
            tv = tv.item() if hasattr(tv, "item") else tv
            raise DuplicateKeyError(
                f"duplicate ({self.entity}, {self.time}) key: ({ev!r}, {tv!r})"
            )

    @property
    def n_obs(self) -> int:
        return len(self.frame)

    def require_columns(self, columns) -> None:
        missing = [c for c in columns if c not in self.frame.columns]
        if missing:
            raise UnknownColumnError(f"columns not in panel: {missing}")

    def waves(self) -> list:
        """Distinct time values in sorted order."""
        return sorted(pd.unique(self.frame[self.time]))


def read_panel(path, *, entity: str, time: str, province: str | None = None,
               district: str | None = None, cluster: str | None = None) -> PanelDataset:
    """Ingest a delimited text file with a header row into a PanelDataset.

    Row order is preserved as stored. The returned dataset carries an
    ``ingest_report`` with the row count and per-column missing counts.
    """
    try:
        # round_trip parsing: floats written with shortest-round-trip repr
        # must come back bit-identical or rewrites change bytes
        frame = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    except pd.errors.EmptyDataError:
        raise DataError(f"empty input file: {path}") from None
    except pd.errors.ParserError as exc:
        raise DataError(f"malformed input file {path}: {exc}") from None
    if len(frame) == 0:
        raise DataError(f"input file has a header but no rows: {path}")
    ds = PanelDataset(frame, entity=entity, time=time, province=province,
                      district=district, cluster=cluster)
    missing = {c: int(frame[c].isna().sum()) for c in frame.columns if frame[c].isna().any()}
    ds.ingest_report = {"rows": int(len(frame)), "columns": list(frame.columns),
                        "missing": missing}
    return ds


def write_panel(panel, path) -> None:
    """Write a panel (or bare DataFrame) as delimited text, atomically.

    The file is written to a temporary name in the target directory and
    renamed into place, so readers never observe a partial file. Floats
    use shortest round-trip formatting, which makes write -> read ->
    write reproduce the file byte for byte.
    """
    frame = panel.frame if isinstance(panel, PanelDataset) else panel
    atomic_write_text(path, frame.to_csv(index=False))


def atomic_write_text(path, text: str) -> None:
    """Write text to `path` via a same-directory temp file and rename."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def listwise_complete(frame: pd.DataFrame, columns) -> np.ndarray:
    """Boolean mask of rows with no missing values in `columns`."""
    sub = frame[list(columns)]
    return ~sub.isna().any(axis=1).to_numpy()
