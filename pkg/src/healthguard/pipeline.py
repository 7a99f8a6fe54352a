"""Data collection and preprocessing: raw readings to labelled minute vectors.

Each device's readings are grouped, averaged into per-minute values (the
sleep stage takes the majority code instead of a mean), and merged into
fixed-width vectors: twelve feature columns in canonical order followed by
eight per-device availability flags. A minute with no readings from a
device carries the previous minute's value forward and drops that device's
availability flag to zero, so "no data" stays distinguishable from "bad
data".
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .domain import (
    CONDITION_INDEX,
    CONDITION_ORDER,
    DEVICE_FEATURES,
    DEVICE_ORDER,
    FEATURE_ORDER,
    NOMINAL_RANGES,
    ConditionLabel,
    DeviceKind,
    FeatureKind,
)
from .errors import DataIntegrityError, StratificationError
from .simulator import DeviceSeries, TelemetryStream

DATASET_SCHEMA_VERSION = 1

N_FEATURES = len(FEATURE_ORDER)
N_DEVICES = len(DEVICE_ORDER)
VECTOR_WIDTH = N_FEATURES + N_DEVICES

CSV_COLUMNS: tuple[str, ...] = (
    ("minute",)
    + tuple(f.value for f in FEATURE_ORDER)
    + tuple(f"avail_{d.value}" for d in DEVICE_ORDER)
    + ("label",)
)

_SLEEP_COL = FEATURE_ORDER.index(FeatureKind.SLEEP_STATE)
_MIDPOINTS = np.asarray([NOMINAL_RANGES[f].midpoint for f in FEATURE_ORDER])


@dataclass(frozen=True)
class FeatureVector:
    """One merged per-minute observation: 12 values + 8 availability flags."""

    minute: int
    values: np.ndarray
    availability: np.ndarray

    def as_row(self) -> np.ndarray:
        return np.concatenate([self.values, self.availability])


@dataclass(frozen=True)
class LabeledInstance:
    vector: FeatureVector
    label: ConditionLabel


@dataclass
class LabeledDataset:
    """Ordered labelled minute vectors, stored as arrays.

    ``X`` is (n, 20): feature columns then availability columns.
    ``label_codes`` indexes CONDITION_ORDER.
    """

    minutes: np.ndarray
    X: np.ndarray
    label_codes: np.ndarray
    device_mask: tuple[DeviceKind, ...]
    schema_version: int = DATASET_SCHEMA_VERSION

    def __post_init__(self) -> None:
        n = self.X.shape[0]
        if n == 0:
            raise DataIntegrityError("dataset is empty")
        if self.X.ndim != 2 or self.X.shape[1] != VECTOR_WIDTH:
            raise DataIntegrityError(f"dataset vectors must be n x {VECTOR_WIDTH}")
        if self.minutes.shape[0] != n or self.label_codes.shape[0] != n:
            raise DataIntegrityError("dataset column lengths disagree")

    def __len__(self) -> int:
        return int(self.X.shape[0])

    def labels(self) -> list[ConditionLabel]:
        return [CONDITION_ORDER[c] for c in self.label_codes]

    def instances(self) -> Iterator[LabeledInstance]:
        for i in range(len(self)):
            vec = FeatureVector(
                int(self.minutes[i]),
                self.X[i, :N_FEATURES].copy(),
                self.X[i, N_FEATURES:].copy(),
            )
            yield LabeledInstance(vec, CONDITION_ORDER[self.label_codes[i]])

    def select(self, indices: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(
            self.minutes[indices],
            self.X[indices],
            self.label_codes[indices],
            self.device_mask,
            self.schema_version,
        )

    def class_counts(self) -> dict[ConditionLabel, int]:
        counts = np.bincount(self.label_codes, minlength=len(CONDITION_ORDER))
        return {c: int(counts[CONDITION_INDEX[c]]) for c in CONDITION_ORDER}


def collect(stream: TelemetryStream) -> dict[DeviceKind, DeviceSeries]:
    """Group readings per device, verifying strict time order.

    No resampling and no loss: the result holds exactly the readings the
    stream carries, keyed by device in canonical order.
    """
    collected: dict[DeviceKind, DeviceSeries] = {}
    for device in DEVICE_ORDER:
        if device not in stream.series:
            continue
        series = stream.series[device]
        if series.t_seconds.size and np.any(np.diff(series.t_seconds) <= 0):
            raise DataIntegrityError(f"out-of-order timestamps for {device.value}")
        collected[device] = series
    return collected


def resample_per_minute(
    series: DeviceSeries,
    device: DeviceKind,
    total_minutes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate one device's readings into per-minute values.

    Returns ``(values, availability)`` with ``values`` of shape
    (total_minutes, n_device_features). Numeric features take the
    arithmetic mean of the minute's readings; the sleep stage takes the
    majority code (ties resolve to the lower code). Gap minutes carry the
    previous minute's value forward with availability 0; leading gaps use
    the nominal midpoint.
    """
    features = DEVICE_FEATURES[device]
    minutes = series.t_seconds // 60
    if np.any(minutes >= total_minutes) or np.any(minutes < 0):
        raise DataIntegrityError(f"{device.value} readings fall outside the scenario span")

    counts = np.bincount(minutes, minlength=total_minutes).astype(np.int64)
    availability = counts > 0
    values = np.empty((total_minutes, len(features)))
    safe = np.maximum(counts, 1)
    for j, feature in enumerate(features):
        if feature is FeatureKind.SLEEP_STATE:
            codes = series.values[:, j].astype(np.int64)
            per_code = np.bincount(minutes * 3 + codes, minlength=total_minutes * 3)
            values[:, j] = per_code.reshape(total_minutes, 3).argmax(axis=1)
        else:
            sums = np.bincount(minutes, weights=series.values[:, j], minlength=total_minutes)
            values[:, j] = sums / safe

    if not availability.all():
        # Forward-fill gap minutes from the last available minute.
        idx = np.where(availability, np.arange(total_minutes), -1)
        np.maximum.accumulate(idx, out=idx)
        midpoints = np.asarray([NOMINAL_RANGES[f].midpoint for f in features])
        filled = np.where(idx[:, None] >= 0, values[np.maximum(idx, 0)], midpoints)
        values = filled
    return values, availability.astype(np.float64)


def merge(
    per_device: dict[DeviceKind, tuple[np.ndarray, np.ndarray]],
    device_mask: tuple[DeviceKind, ...],
) -> np.ndarray:
    """Merge per-minute device maps into (n, 20) vectors.

    Devices outside ``device_mask`` contribute a constant nominal midpoint
    with availability 1, keeping vector width fixed while carrying no
    signal. All supplied maps must cover the same minute span.
    """
    spans = {vals.shape[0] for vals, _ in per_device.values()}
    if len(spans) > 1:
        raise DataIntegrityError(f"minute spans disagree across devices: {sorted(spans)}")
    if not spans:
        raise DataIntegrityError("nothing to merge")
    total_minutes = spans.pop()

    X = np.empty((total_minutes, VECTOR_WIDTH))
    X[:, :N_FEATURES] = _MIDPOINTS
    X[:, N_FEATURES:] = 1.0
    for device in DEVICE_ORDER:
        if device not in device_mask:
            continue
        if device not in per_device:
            raise DataIntegrityError(f"mask includes {device.value} but no map was supplied")
        values, availability = per_device[device]
        cols = [FEATURE_ORDER.index(f) for f in DEVICE_FEATURES[device]]
        X[:, cols] = values
        X[:, N_FEATURES + DEVICE_ORDER.index(device)] = availability
    return X


def assemble_dataset(
    stream: TelemetryStream,
    merge_mask: tuple[DeviceKind, ...] | None = None,
) -> LabeledDataset:
    """Collect, resample, and merge a stream into a labelled dataset."""
    total_minutes = stream.total_minutes
    collected = collect(stream)
    per_device = {
        device: resample_per_minute(series, device, total_minutes)
        for device, series in collected.items()
    }
    mask = tuple(merge_mask) if merge_mask is not None else tuple(collected)
    for device in mask:
        if device not in collected:
            raise DataIntegrityError(f"merge mask names absent device {device.value}")
    X = merge(per_device, mask)
    return LabeledDataset(
        minutes=np.arange(total_minutes, dtype=np.int64),
        X=X,
        label_codes=stream.ground_truth.astype(np.int16),
        device_mask=mask,
    )


def split(
    dataset: LabeledDataset,
    train_fraction: float,
    seed: int,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified random split; per label the train share is within one
    instance of the requested fraction. Both sides keep time order."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for code in np.unique(dataset.label_codes):
        members = np.nonzero(dataset.label_codes == code)[0]
        if members.size < 2:
            raise StratificationError(
                f"label {CONDITION_ORDER[code].value} has {members.size} instance(s); need >= 2"
            )
        n_train = int(np.clip(round(train_fraction * members.size), 1, members.size - 1))
        shuffled = rng.permutation(members)
        train_idx.append(shuffled[:n_train])
        test_idx.append(shuffled[n_train:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return dataset.select(train), dataset.select(test)


def split_literal(
    dataset: LabeledDataset,
    train_fraction: float,
    seed: int,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Alternative split: train on a benign-only share, test on the rest
    plus every malicious instance. Leaves attacks unseen during training;
    kept for comparison, not the default path."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    benign_codes = {CONDITION_INDEX[c] for c in CONDITION_ORDER if c.is_benign}
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for code in np.unique(dataset.label_codes):
        members = np.nonzero(dataset.label_codes == code)[0]
        if int(code) not in benign_codes:
            test_idx.append(members)
            continue
        if members.size < 2:
            raise StratificationError(
                f"label {CONDITION_ORDER[code].value} has {members.size} instance(s); need >= 2"
            )
        n_train = int(np.clip(round(train_fraction * members.size), 1, members.size - 1))
        shuffled = rng.permutation(members)
        train_idx.append(shuffled[:n_train])
        test_idx.append(shuffled[n_train:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return dataset.select(train), dataset.select(test)


def write_dataset_csv(dataset: LabeledDataset, path) -> None:
    """Write the dataset in the canonical CSV schema.

    Feature columns use six decimal digits and availability flags are 0/1
    integers, so identical datasets always hash identically.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for i in range(len(dataset)):
            feats = ",".join(f"{v:.6f}" for v in dataset.X[i, :N_FEATURES])
            avail = ",".join(str(int(v)) for v in dataset.X[i, N_FEATURES:])
            label = CONDITION_ORDER[dataset.label_codes[i]].value
            fh.write(f"{int(dataset.minutes[i])},{feats},{avail},{label}\n")


def read_dataset_rows(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a dataset CSV into (minutes, X, label_codes); may be empty."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataIntegrityError(f"{path}: missing header row") from None
        if tuple(header) != CSV_COLUMNS:
            raise DataIntegrityError(
                f"{path}: header does not match the dataset schema"
            )
        minutes, rows, codes = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_COLUMNS):
                raise DataIntegrityError(f"{path}: line {lineno}: wrong column count")
            try:
                minutes.append(int(row[0]))
                rows.append([float(v) for v in row[1:-1]])
                codes.append(CONDITION_INDEX[ConditionLabel(row[-1])])
            except (ValueError, KeyError):
                raise DataIntegrityError(f"{path}: line {lineno}: malformed row") from None
    if not rows:
        return (
            np.empty(0, dtype=np.int64),
            np.empty((0, VECTOR_WIDTH)),
            np.empty(0, dtype=np.int16),
        )
    return (
        np.asarray(minutes, dtype=np.int64),
        np.asarray(rows),
        np.asarray(codes, dtype=np.int16),
    )


def read_dataset_csv(path, device_mask: tuple[DeviceKind, ...] = DEVICE_ORDER) -> LabeledDataset:
    """Load a dataset CSV written by :func:`write_dataset_csv`."""
    minutes, X, codes = read_dataset_rows(path)
    return LabeledDataset(minutes, X, codes, device_mask)
