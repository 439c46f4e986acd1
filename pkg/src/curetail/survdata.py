"""Observed right-censored data ``(time, status, covariate)``."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BadStatus, EmptyFile, MissingColumn, NonFiniteValue

COLUMNS = ("time", "status", "covariate")


@dataclass(frozen=True)
class Observation:
    time: float
    status: int
    covariate: float


@dataclass(frozen=True, eq=False)
class SurvivalSample:
    """An immutable sample of triplets ``(T_i, delta_i, X_i)``.

    Arrays are stored in input order. ``sorted_index`` orders them by time;
    among equal times the uncensored observations come first, which is the
    usual product-limit convention.
    """

    times: np.ndarray
    status: np.ndarray
    covariates: np.ndarray
    sorted_index: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def observations(self) -> list[Observation]:
        return [
            Observation(float(t), int(d), float(x))
            for t, d, x in zip(self.times, self.status, self.covariates)
        ]

    def sorted(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(times, status, covariates)`` along ``sorted_index``."""
        idx = self.sorted_index
        return self.times[idx], self.status[idx], self.covariates[idx]

    def scaled(self, factor: float) -> "SurvivalSample":
        """Copy with every time multiplied by ``factor`` (> 0)."""
        return make_sample(self.times * factor, self.status, self.covariates)


def _order(times: np.ndarray, status: np.ndarray) -> np.ndarray:
    # lexsort: last key is primary; status 1 sorts before 0 at equal times
    return np.lexsort((1 - status, times))


def make_sample(times, status, covariates) -> SurvivalSample:
    """Validate arrays and build a :class:`SurvivalSample`."""
    times = np.array(times, dtype=float)
    covariates = np.array(covariates, dtype=float)
    raw_status = np.asarray(status)
    if times.ndim != 1 or times.shape != covariates.shape or times.shape != raw_status.shape:
        raise ValueError("time, status and covariate must be 1-d arrays of equal length")
    if len(times) == 0:
        raise EmptyFile("sample has no observations")
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(covariates))):
        raise NonFiniteValue("time and covariate must be finite")
    raw_status = raw_status.astype(float)
    if not np.all((raw_status == 0) | (raw_status == 1)):
        raise BadStatus("status must be 0 or 1")
    status = raw_status.astype(np.int8)
    for arr in (times, status, covariates):
        arr.setflags(write=False)
    idx = _order(times, status)
    idx.setflags(write=False)
    return SurvivalSample(times, status, covariates, idx)


def from_observations(observations: Iterable[Observation]) -> SurvivalSample:
    obs = list(observations)
    return make_sample(
        [o.time for o in obs], [o.status for o in obs], [o.covariate for o in obs]
    )


def _parse_float(text: str, column: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise NonFiniteValue(f"line {line}: {column}={text!r} is not a number") from None
    if not math.isfinite(value):
        raise NonFiniteValue(f"line {line}: {column}={text!r} is not finite")
    return value


def load_csv(path: str | Path) -> SurvivalSample:
    """Read a ``time,status,covariate`` CSV file.

    Raises
    ------
    MissingColumn, NonFiniteValue, BadStatus, EmptyFile
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise EmptyFile(f"{path}: no header row")
        header = [h.strip() for h in header]
        reader.fieldnames = header
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
        times, status, covs = [], [], []
        for line, row in enumerate(reader, start=2):
            times.append(_parse_float(row["time"], "time", line))
            s = _parse_float(row["status"], "status", line)
            if s not in (0.0, 1.0):
                raise BadStatus(f"line {line}: status={row['status']!r} not in {{0, 1}}")
            status.append(int(s))
            covs.append(_parse_float(row["covariate"], "covariate", line))
    if not times:
        raise EmptyFile(f"{path}: no data rows")
    return make_sample(times, status, covs)


def write_csv(sample: SurvivalSample, path: str | Path) -> None:
    """Write a sample in input order; ``repr`` floats round-trip exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for t, d, x in zip(sample.times, sample.status, sample.covariates):
            w.writerow([repr(float(t)), int(d), repr(float(x))])


def max_followup(sample: SurvivalSample) -> float:
    """Largest observed time ``tau_n``, the estimate of the censoring endpoint."""
    if len(sample) == 0:
        raise EmptyFile("sample has no observations")
    return float(np.max(sample.times))
