"""Shared training/prediction interface and versioned model files.

All four detectors train on standardized feature columns (availability
flags pass through unscaled, they are already 0/1) and share one Model
container. Model files start with the magic string ``HGMODEL`` followed by
a schema version, a JSON header, and raw little-endian array payloads;
loading a file reproduces predictions bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..domain import CONDITION_ORDER, ConditionLabel
from ..errors import ConfigError, ModelFormatError
from ..pipeline import N_FEATURES, VECTOR_WIDTH, FeatureVector, LabeledDataset
from ..utils import worker_count
from . import knn as _knn
from . import mlp as _mlp
from . import tree as _tree

ALGORITHMS: tuple[str, ...] = ("knn", "dt", "rf", "ann")
MODEL_MAGIC = b"HGMODEL"
MODEL_SCHEMA_VERSION = 1

N_CLASSES = len(CONDITION_ORDER)


@dataclass(frozen=True)
class Hyperparams:
    """Training knobs for all four algorithms, sized for desk-scale runs."""

    knn_k: int = 5
    dt_max_depth: int = 16
    dt_min_samples_split: int = 2
    rf_trees: int = 100
    rf_features_per_split: int = int(np.sqrt(VECTOR_WIDTH))  # floor(sqrt(20)) = 4
    ann_hidden: tuple[int, ...] = (64,)
    ann_learning_rate: float = 0.01
    ann_momentum: float = 0.9
    ann_epochs: int = 50
    ann_batch: int = 32

    def __post_init__(self) -> None:
        positive = (
            self.knn_k, self.dt_max_depth, self.dt_min_samples_split,
            self.rf_trees, self.rf_features_per_split,
            self.ann_learning_rate, self.ann_epochs, self.ann_batch,
        )
        if any(v <= 0 for v in positive) or any(h <= 0 for h in self.ann_hidden):
            raise ConfigError("hyperparameters must be positive")
        if self.rf_features_per_split > VECTOR_WIDTH:
            raise ConfigError(f"rf_features_per_split cannot exceed {VECTOR_WIDTH}")
        if not 0.0 <= self.ann_momentum < 1.0:
            raise ConfigError("ann_momentum must be in [0, 1)")

    def with_overrides(self, overrides: dict[str, str]) -> "Hyperparams":
        """Apply string-valued overrides (e.g. from the command line)."""
        fields = {f.name: f for f in dataclasses.fields(self)}
        parsed = {}
        for key, raw in overrides.items():
            if key not in fields:
                raise ConfigError(
                    f"unknown hyperparameter {key!r}; valid: {', '.join(sorted(fields))}"
                )
            try:
                if key == "ann_hidden":
                    parsed[key] = tuple(int(p) for p in raw.replace(",", " ").split())
                elif key in ("ann_learning_rate", "ann_momentum"):
                    parsed[key] = float(raw)
                else:
                    parsed[key] = int(raw)
            except ValueError:
                raise ConfigError(f"bad value {raw!r} for hyperparameter {key}") from None
        return dataclasses.replace(self, **parsed)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["ann_hidden"] = list(self.ann_hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        d = dict(d)
        d["ann_hidden"] = tuple(d["ann_hidden"])
        return cls(**d)


@dataclass
class Standardizer:
    """Per-feature z-scaling fit on training data; flags pass through."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X[:, :N_FEATURES].mean(axis=0)
        std = X[:, :N_FEATURES].std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)  # constant columns scale by 1
        return cls(mean=mean, std=std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        out = X.astype(np.float64, copy=True)
        out[:, :N_FEATURES] = (out[:, :N_FEATURES] - self.mean) / self.std
        return out

    def inverse_transform(self, X: np.ndarray) -> np.ndarray:
        out = X.astype(np.float64, copy=True)
        out[:, :N_FEATURES] = out[:, :N_FEATURES] * self.std + self.mean
        return out


@dataclass
class Model:
    """A trained detector plus everything needed to reproduce predictions."""

    algorithm: str
    hyperparams: Hyperparams
    standardizer: Standardizer
    params: object
    label_set: tuple[str, ...] = field(
        default_factory=lambda: tuple(c.value for c in CONDITION_ORDER)
    )
    schema_version: int = MODEL_SCHEMA_VERSION


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, FeatureVector):
        return vectors.as_row()[None, :]
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != VECTOR_WIDTH:
        raise ValueError(f"expected vectors of width {VECTOR_WIDTH}, got shape {X.shape}")
    return X


def train(
    algorithm: str,
    dataset: LabeledDataset,
    hyperparams: Hyperparams | None = None,
    seed: int = 0,
) -> Model:
    """Train one detector on a labelled dataset. Deterministic in seed."""
    if algorithm not in ALGORITHMS:
        raise ConfigError(
            f"unknown algorithm {algorithm!r}; valid: {', '.join(ALGORITHMS)}"
        )
    hp = hyperparams or Hyperparams()
    scaler = Standardizer.fit(dataset.X)
    X = scaler.transform(dataset.X)
    y = dataset.label_codes.astype(np.int64)

    if algorithm == "knn":
        params: object = _knn.KnnParams(train_x=X, train_y=y)
    elif algorithm == "dt":
        params = _tree.build_tree(
            X, y, N_CLASSES, hp.dt_max_depth, hp.dt_min_samples_split
        )
    elif algorithm == "rf":
        params = _tree.build_forest(
            X, y, N_CLASSES,
            n_trees=hp.rf_trees,
            max_depth=hp.dt_max_depth,
            min_samples_split=hp.dt_min_samples_split,
            features_per_split=hp.rf_features_per_split,
            seed=seed,
            workers=worker_count(),
        )
    else:
        params = _mlp.train_mlp(
            X, y,
            hidden=hp.ann_hidden,
            n_classes=N_CLASSES,
            learning_rate=hp.ann_learning_rate,
            momentum=hp.ann_momentum,
            epochs=hp.ann_epochs,
            batch_size=hp.ann_batch,
            seed=seed,
        )
    return Model(algorithm=algorithm, hyperparams=hp, standardizer=scaler, params=params)


def predict_batch(model: Model, vectors) -> tuple[np.ndarray, np.ndarray]:
    """Predict class codes and per-class scores for raw (unscaled) vectors."""
    X = model.standardizer.transform(_as_matrix(vectors))
    if model.algorithm == "knn":
        return _knn.predict_knn(model.params, model.hyperparams.knn_k, X, N_CLASSES)
    if model.algorithm == "dt":
        return _tree.predict_tree(model.params, X)
    if model.algorithm == "rf":
        return _tree.predict_forest(model.params, X, N_CLASSES)
    if model.algorithm == "ann":
        return _mlp.predict_mlp(model.params, X)
    raise ConfigError(f"model has unknown algorithm tag {model.algorithm!r}")


def predict(model: Model, vector) -> tuple[ConditionLabel, np.ndarray]:
    """Single-vector prediction: (label, per-class scores)."""
    codes, scores = predict_batch(model, vector)
    return CONDITION_ORDER[int(codes[0])], scores[0]


def knn_brute_force(model: Model, vector) -> ConditionLabel:
    """Exhaustive-scan reference prediction for a KNN model."""
    if model.algorithm != "knn":
        raise ConfigError("brute-force oracle only applies to knn models")
    X = model.standardizer.transform(_as_matrix(vector))
    code = _knn.brute_force_label(
        model.params, model.hyperparams.knn_k, X[0], N_CLASSES
    )
    return CONDITION_ORDER[code]


# --- model files ----------------------------------------------------------

def _payload_arrays(model: Model) -> list[tuple[str, np.ndarray]]:
    arrays: list[tuple[str, np.ndarray]] = [
        ("std_mean", model.standardizer.mean),
        ("std_std", model.standardizer.std),
    ]
    p = model.params
    if model.algorithm == "knn":
        arrays += [("knn_x", p.train_x), ("knn_y", p.train_y)]
    elif model.algorithm == "dt":
        arrays += _tree_arrays("tree0", p)
    elif model.algorithm == "rf":
        for i, tree in enumerate(p.trees):
            arrays += _tree_arrays(f"tree{i}", tree)
    elif model.algorithm == "ann":
        for i, (w, b) in enumerate(zip(p.weights, p.biases)):
            arrays += [(f"w{i}", w), (f"b{i}", b)]
    return arrays


def _tree_arrays(prefix: str, tree: _tree.TreeArrays) -> list[tuple[str, np.ndarray]]:
    return [
        (f"{prefix}_feature", tree.feature),
        (f"{prefix}_threshold", tree.threshold),
        (f"{prefix}_left", tree.left),
        (f"{prefix}_right", tree.right),
        (f"{prefix}_counts", tree.counts),
    ]


_DTYPE_TAGS = {"int32": "<i4", "int64": "<i8", "float64": "<f8"}


def save_model(model: Model, path) -> None:
    """Write a model file (magic, version, JSON header, array payload)."""
    arrays = _payload_arrays(model)
    manifest = []
    offset = 0
    blobs = []
    for name, arr in arrays:
        tag = _DTYPE_TAGS[str(arr.dtype)]
        blob = np.ascontiguousarray(arr).astype(tag, copy=False).tobytes()
        manifest.append(
            {"name": name, "dtype": tag, "shape": list(arr.shape),
             "offset": offset, "nbytes": len(blob)}
        )
        blobs.append(blob)
        offset += len(blob)

    header = {
        "schema_version": model.schema_version,
        "algorithm": model.algorithm,
        "hyperparams": model.hyperparams.to_dict(),
        "label_set": list(model.label_set),
        "arrays": manifest,
    }
    if model.algorithm == "rf":
        header["n_trees"] = len(model.params.trees)
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()

    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_SCHEMA_VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for blob in blobs:
            fh.write(blob)


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ModelFormatError(
            f"truncated model file: wanted {n} bytes for {what} at byte offset {fh.tell() - len(data)}"
        )
    return data


def load_model(path) -> Model:
    """Read a model file; predictions of the result are bit-identical."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise ModelFormatError(f"{path}: bad magic bytes, not a model file")
        version = struct.unpack("<I", _read_exact(fh, 4, "schema version"))[0]
        if version != MODEL_SCHEMA_VERSION:
            raise ModelFormatError(f"{path}: unsupported schema version {version}")
        header_len = struct.unpack("<Q", _read_exact(fh, 8, "header length"))[0]
        try:
            header = json.loads(_read_exact(fh, header_len, "header"))
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: corrupt header: {exc}") from None
        payload_start = fh.tell()
        arrays: dict[str, np.ndarray] = {}
        for entry in header["arrays"]:
            fh.seek(payload_start + entry["offset"])
            blob = _read_exact(fh, entry["nbytes"], f"array {entry['name']}")
            arr = np.frombuffer(blob, dtype=entry["dtype"]).reshape(entry["shape"])
            arrays[entry["name"]] = arr.astype(arr.dtype.newbyteorder("="))

    algorithm = header["algorithm"]
    if algorithm not in ALGORITHMS:
        raise ModelFormatError(f"{path}: unknown algorithm tag {algorithm!r}")
    hp = Hyperparams.from_dict(header["hyperparams"])
    scaler = Standardizer(mean=arrays["std_mean"], std=arrays["std_std"])

    def _tree_from(prefix: str) -> _tree.TreeArrays:
        try:
            return _tree.TreeArrays(
                feature=arrays[f"{prefix}_feature"],
                threshold=arrays[f"{prefix}_threshold"],
                left=arrays[f"{prefix}_left"],
                right=arrays[f"{prefix}_right"],
                counts=arrays[f"{prefix}_counts"],
            )
        except KeyError as exc:
            raise ModelFormatError(f"{path}: missing array {exc}") from None

    if algorithm == "knn":
        params: object = _knn.KnnParams(train_x=arrays["knn_x"], train_y=arrays["knn_y"])
    elif algorithm == "dt":
        params = _tree_from("tree0")
    elif algorithm == "rf":
        params = _tree.ForestParams(
            trees=[_tree_from(f"tree{i}") for i in range(header["n_trees"])]
        )
    else:
        sizes = len([k for k in arrays if k.startswith("w")])
        params = _mlp.MlpParams(
            weights=[arrays[f"w{i}"] for i in range(sizes)],
            biases=[arrays[f"b{i}"] for i in range(sizes)],
        )
    return Model(
        algorithm=algorithm,
        hyperparams=hp,
        standardizer=scaler,
        params=params,
        label_set=tuple(header["label_set"]),
        schema_version=version,
    )
