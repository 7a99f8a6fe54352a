"""Metrics and experiment harness.

The confusion matrix is always 15x15 (rows = truth, columns = prediction).
Reports restrict it to a view: all instances, only benign-truth instances,
only malicious-truth instances, or the binary benign/malicious projection.
Precision, recall, and F1 are macro-averaged over the classes present in
the view's truth.

Three experiments mirror the evaluation protocol this toolkit reproduces:
a 70/30 detection experiment, a device-count ablation, and a simultaneous
(overlapping) attack stress test.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .classifiers import ALGORITHMS, Hyperparams, predict_batch, train
from .domain import (
    ATTACK_CONDITIONS,
    CONDITION_INDEX,
    CONDITION_ORDER,
    DEVICE_INDEX,
    DEVICE_ORDER,
    ConditionLabel,
    DeviceKind,
)
from .errors import ConfigError
from .pipeline import LabeledDataset, assemble_dataset, split, split_literal
from .simulator import (
    AttackConfig,
    AttackEvent,
    ScenarioConfig,
    apply_events,
    cycled_segments,
    generate_benign,
    inject_attacks,
)

N_CLASSES = len(CONDITION_ORDER)
BENIGN_CODES = tuple(
    CONDITION_INDEX[c] for c in CONDITION_ORDER if c.is_benign
)
MALICIOUS_CODES = tuple(CONDITION_INDEX[c] for c in ATTACK_CONDITIONS)

VIEW_ALL = "all"
VIEW_BENIGN = "benign"
VIEW_MALICIOUS = "malicious"
VIEW_BINARY = "binary"
VIEWS = (VIEW_ALL, VIEW_BENIGN, VIEW_MALICIOUS, VIEW_BINARY)

# Ablation drops the sparsest, most specialized devices first.
DEFAULT_REMOVAL_ORDER: tuple[DeviceKind, ...] = (
    DeviceKind.HEMOGLOBIN_METER,
    DeviceKind.ALCOHOL_MONITOR,
    DeviceKind.NEURAL_HEADSET,
    DeviceKind.PULSE_OXIMETER,
)

DEFAULT_SEEDS = (1, 2, 3, 4, 5)


def confusion(predicted: np.ndarray, actual: np.ndarray) -> np.ndarray:
    """Exact 15x15 count matrix; rows are true labels, columns predictions."""
    predicted = np.asarray(predicted, dtype=np.int64)
    actual = np.asarray(actual, dtype=np.int64)
    if predicted.shape != actual.shape or predicted.ndim != 1 or predicted.size == 0:
        raise ValueError("predictions and labels must be equal-length nonempty vectors")
    if predicted.min() < 0 or predicted.max() >= N_CLASSES:
        raise ValueError("prediction codes out of range")
    if actual.min() < 0 or actual.max() >= N_CLASSES:
        raise ValueError("label codes out of range")
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(cm, (actual, predicted), 1)
    return cm


def project_binary(cm: np.ndarray) -> np.ndarray:
    """Collapse the 15x15 matrix to 2x2: benign (0) vs malicious (1)."""
    b, m = np.asarray(BENIGN_CODES), np.asarray(MALICIOUS_CODES)
    out = np.zeros((2, 2), dtype=np.int64)
    out[0, 0] = cm[np.ix_(b, b)].sum()
    out[0, 1] = cm[np.ix_(b, m)].sum()
    out[1, 0] = cm[np.ix_(m, b)].sum()
    out[1, 1] = cm[np.ix_(m, m)].sum()
    return out


@dataclass(frozen=True)
class MetricsReport:
    view: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    n_instances: int

    def __post_init__(self) -> None:
        for value in (self.accuracy, self.precision, self.recall, self.f1):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"metric {value} outside [0, 1]")


def _macro_prf(cm: np.ndarray, rows: np.ndarray) -> tuple[float, float, float]:
    sub = cm[rows]
    row_totals = sub.sum(axis=1)
    precisions, recalls, f1s = [], [], []
    for i, c in enumerate(rows):
        if row_totals[i] == 0:
            continue  # class absent from the view's truth
        tp = float(cm[c, c])
        fn = float(row_totals[i] - cm[c, c])
        fp = float(sub[:, c].sum() - cm[c, c])
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
    return (
        float(np.mean(precisions)),
        float(np.mean(recalls)),
        float(np.mean(f1s)),
    )


def class_metrics(cm: np.ndarray, code: int) -> tuple[float, float, float]:
    """Precision, recall, F1 of one class over the whole matrix."""
    tp = float(cm[code, code])
    fp = float(cm[:, code].sum() - cm[code, code])
    fn = float(cm[code, :].sum() - cm[code, code])
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def metrics(cm: np.ndarray, view: str = VIEW_ALL) -> MetricsReport:
    """Accuracy plus macro precision/recall/F1 over a view of the matrix."""
    if view == VIEW_BINARY:
        cm = project_binary(cm)
        rows = np.arange(2)
    elif view == VIEW_ALL:
        rows = np.arange(N_CLASSES)
    elif view == VIEW_BENIGN:
        rows = np.asarray(BENIGN_CODES)
    elif view == VIEW_MALICIOUS:
        rows = np.asarray(MALICIOUS_CODES)
    else:
        raise ValueError(f"unknown view {view!r}; valid: {', '.join(VIEWS)}")
    total = int(cm[rows].sum())
    if total == 0:
        raise ValueError(f"view {view!r} contains no instances")
    accuracy = float(cm[rows, rows].sum() / total)
    precision, recall, f1 = _macro_prf(cm, rows)
    return MetricsReport(view, accuracy, precision, recall, f1, total)


@dataclass(frozen=True)
class ResultRow:
    """One evaluated cell: an algorithm on one configuration and seed."""

    algorithm: str
    seed: int
    view: str
    report: MetricsReport
    device_count: int | None = None
    attack_kinds: int | None = None


@dataclass
class ExperimentResult:
    experiment: str
    config: dict
    rows: list[ResultRow] = field(default_factory=list)

    def select(self, algorithm=None, view=None, device_count=None, attack_kinds=None):
        out = []
        for row in self.rows:
            if algorithm is not None and row.algorithm != algorithm:
                continue
            if view is not None and row.view != view:
                continue
            if device_count is not None and row.device_count != device_count:
                continue
            if attack_kinds is not None and row.attack_kinds != attack_kinds:
                continue
            out.append(row)
        return out

    def mean_se(self, metric: str, **filters) -> tuple[float, float]:
        """Seed-averaged metric with its standard error."""
        values = [getattr(r.report, metric) for r in self.select(**filters)]
        if not values:
            raise ValueError(f"no rows match {filters}")
        arr = np.asarray(values)
        se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        return float(arr.mean()), se


def _evaluate_split(
    train_ds: LabeledDataset,
    test_ds: LabeledDataset,
    algorithms: tuple[str, ...],
    seed: int,
    hyperparams: Hyperparams | None,
    views: tuple[str, ...],
    **row_kwargs,
) -> list[ResultRow]:
    rows = []
    for algorithm in algorithms:
        model = train(algorithm, train_ds, hyperparams, seed=seed)
        codes, _ = predict_batch(model, test_ds.X)
        cm = confusion(codes, test_ds.label_codes)
        for view in views:
            rows.append(
                ResultRow(
                    algorithm=algorithm,
                    seed=seed,
                    view=view,
                    report=metrics(cm, view),
                    **row_kwargs,
                )
            )
    return rows


def run_detection_experiment(
    dataset: LabeledDataset,
    algorithms: tuple[str, ...] = ALGORITHMS,
    seed: int = 1,
    hyperparams: Hyperparams | None = None,
    train_fraction: float = 0.7,
    split_mode: str = "stratified",
) -> ExperimentResult:
    """70/30 split, train every algorithm, report benign and malicious views."""
    if split_mode == "stratified":
        train_ds, test_ds = split(dataset, train_fraction, seed)
    elif split_mode == "literal":
        train_ds, test_ds = split_literal(dataset, train_fraction, seed)
    else:
        raise ConfigError(f"unknown split mode {split_mode!r}")
    result = ExperimentResult(
        experiment="detection",
        config={
            "n_train": len(train_ds),
            "n_test": len(test_ds),
            "seed": seed,
            "split": split_mode,
            "train_fraction": train_fraction,
        },
    )
    result.rows = _evaluate_split(
        train_ds, test_ds, algorithms, seed, hyperparams,
        views=(VIEW_BENIGN, VIEW_MALICIOUS),
    )
    return result


def ablation_mask(count: int, removal_order=DEFAULT_REMOVAL_ORDER) -> tuple[DeviceKind, ...]:
    """Device mask for a target device count under the fixed removal order."""
    n_devices = len(DEVICE_ORDER)
    if not n_devices - len(removal_order) <= count <= n_devices:
        raise ConfigError(
            f"device count {count} outside [{n_devices - len(removal_order)}, {n_devices}]"
        )
    removed = set(removal_order[: n_devices - count])
    return tuple(d for d in DEVICE_ORDER if d not in removed)


def run_device_ablation(
    scenario_config: ScenarioConfig,
    attack_config: AttackConfig,
    device_counts: tuple[int, ...] = (4, 5, 6, 7, 8),
    algorithms: tuple[str, ...] = ALGORITHMS,
    seeds: tuple[int, ...] = DEFAULT_SEEDS,
    hyperparams: Hyperparams | None = None,
    removal_order: tuple[DeviceKind, ...] = DEFAULT_REMOVAL_ORDER,
    train_fraction: float = 0.7,
) -> list[ExperimentResult]:
    """Re-merge the same attack campaign under shrinking device masks.

    The full eight-device telemetry and its attacks are generated once per
    seed; each device count only changes which devices feed the merged
    vectors. Attacks on merged-out devices become invisible, which is
    exactly the monitoring blind spot the experiment measures.
    """
    masks = {count: ablation_mask(count, removal_order) for count in device_counts}
    results = {
        count: ExperimentResult(
            experiment="ablation",
            config={
                "device_count": count,
                "devices": [d.value for d in masks[count]],
                "seeds": list(seeds),
            },
        )
        for count in device_counts
    }
    for seed in seeds:
        scenario = dataclasses.replace(scenario_config, seed=seed)
        attack = dataclasses.replace(attack_config, seed=seed + 1)
        stream = inject_attacks(generate_benign(scenario), attack)
        for count in device_counts:
            dataset = assemble_dataset(stream, merge_mask=masks[count])
            train_ds, test_ds = split(dataset, train_fraction, seed)
            results[count].rows.extend(
                _evaluate_split(
                    train_ds, test_ds, algorithms, seed, hyperparams,
                    views=(VIEW_ALL, VIEW_BENIGN, VIEW_MALICIOUS),
                    device_count=count,
                )
            )
    return [results[count] for count in device_counts]


_CLUSTER_OVERLAP = 2  # minutes each added window shares with its predecessor
_CLUSTER_TAIL = 8     # minimum minutes each added window extends the burst


def _overlapping_events(
    rng: np.random.Generator,
    total_minutes: int,
    clusters: int,
    kinds: int,
    duration_min: int,
    duration_max: int,
    tamper_target: DeviceKind,
    pool: tuple[DeviceKind, ...],
) -> list[AttackEvent]:
    """Clusters of ``kinds`` distinct chained-overlapping attack windows.

    Each cluster is one connected multi-threat burst: every added kind's
    window opens shortly before its predecessor closes and runs past it,
    so consecutive windows overlap and every kind labels an exclusive tail
    of its own. Parameters for all three kinds are drawn up front, making
    the event sets nested across kind counts: raising the kind count only
    extends the attacked portion of an otherwise identical stream, which
    keeps comparisons across counts paired.
    """
    block = total_minutes // clusters
    margin = 3 * duration_max + 2 * _CLUSTER_TAIL + 8
    if block <= margin:
        raise ConfigError("stream too short for the requested cluster count")
    events: list[AttackEvent] = []
    for j in range(clusters):
        base = block * j + int(rng.integers(0, block - margin))
        rotation = [
            ATTACK_CONDITIONS[(j + i) % len(ATTACK_CONDITIONS)] for i in range(3)
        ]
        end = 0
        for i, kind in enumerate(rotation):
            duration = int(rng.integers(duration_min, duration_max + 1))
            if kind is ConditionLabel.TAMPERED_DEVICE:
                target = tamper_target
            else:
                target = pool[int(rng.integers(0, len(pool)))]
            if i == 0:
                onset = base
                end = onset + duration
            else:
                onset = end - _CLUSTER_OVERLAP
                end = max(end + _CLUSTER_TAIL, onset + duration)
            if i < kinds:
                events.append(
                    AttackEvent(kind, target, onset, min(end, total_minutes) - onset)
                )
    return events


def run_simultaneous_attacks(
    scenario_config: ScenarioConfig,
    attack_config: AttackConfig,
    concurrent_kinds: tuple[int, ...] = (1, 2, 3),
    algorithms: tuple[str, ...] = ALGORITHMS,
    seeds: tuple[int, ...] = DEFAULT_SEEDS,
    hyperparams: Hyperparams | None = None,
    test_minutes: int = 2000,
    clusters_per_stream: int = 10,
) -> list[ExperimentResult]:
    """Stress detection with overlapping attack windows.

    Models train once per seed on a standard single-threat campaign, then
    face fresh test streams in which 1..3 distinct threat kinds overlap in
    each attack cluster. Streams are nested per seed (the two-kind stream
    adds events to the one-kind stream), so comparisons are paired and the
    reported trend is not an artifact of regenerated benign data.
    """
    for k in concurrent_kinds:
        if not 0 <= k <= 3:
            raise ConfigError("concurrent kind counts must be within [0, 3]")
    results = {
        k: ExperimentResult(
            experiment="simultaneous",
            config={
                "attack_kinds": k,
                "test_minutes": test_minutes,
                "clusters": clusters_per_stream,
                "seeds": list(seeds),
            },
        )
        for k in concurrent_kinds
    }
    test_segments = cycled_segments(total_minutes=test_minutes)
    for seed in seeds:
        train_scenario = dataclasses.replace(scenario_config, seed=seed)
        train_attack = dataclasses.replace(attack_config, seed=seed + 1)
        train_ds = assemble_dataset(inject_attacks(generate_benign(train_scenario), train_attack))
        models = {a: train(a, train_ds, hyperparams, seed=seed) for a in algorithms}

        test_scenario = dataclasses.replace(
            scenario_config, segments=test_segments, seed=seed + 7919
        )
        benign_test = generate_benign(test_scenario)
        pool = tuple(sorted(benign_test.series, key=lambda d: DEVICE_INDEX[d]))
        for k in concurrent_kinds:
            event_rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(97,))
            )
            events = _overlapping_events(
                event_rng, test_minutes, clusters_per_stream, k,
                attack_config.duration_min, attack_config.duration_max,
                attack_config.tamper_target, pool,
            )
            effect_rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(98, k))
            )
            attacked = apply_events(benign_test, events, effect_rng)
            dataset = assemble_dataset(attacked)
            for algorithm in algorithms:
                codes, _ = predict_batch(models[algorithm], dataset.X)
                cm = confusion(codes, dataset.label_codes)
                for view in (VIEW_BINARY, VIEW_ALL):
                    results[k].rows.append(
                        ResultRow(
                            algorithm=algorithm,
                            seed=seed,
                            view=view,
                            report=metrics(cm, view),
                            attack_kinds=k,
                        )
                    )
    return [results[k] for k in concurrent_kinds]


# --- report rendering -------------------------------------------------------

_METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


def _format_cell(result: ExperimentResult, **filters) -> str:
    mean, se = result.mean_se(**filters)
    return f"{mean:.3f}" if se == 0.0 else f"{mean:.3f}±{se:.3f}"


def _render_result(result: ExperimentResult) -> str:
    lines = [f"== experiment: {result.experiment} =="]
    for key in sorted(result.config):
        lines.append(f"   {key} = {result.config[key]}")
    algorithms = sorted({r.algorithm for r in result.rows},
                        key=lambda a: ALGORITHMS.index(a))
    views = sorted({r.view for r in result.rows}, key=VIEWS.index)
    header = f"{'metric':<12}" + "".join(
        f"{f'{a}/{v}':>16}" for v in views for a in algorithms
    )
    lines.append(header)
    for metric in _METRIC_NAMES:
        cells = "".join(
            f"{_format_cell(result, metric=metric, algorithm=a, view=v):>16}"
            for v in views
            for a in algorithms
        )
        lines.append(f"{metric:<12}" + cells)
    return "\n".join(lines) + "\n"


def render_report(results: list[ExperimentResult], path) -> None:
    """Write a fixed-width summary table and a machine-readable CSV.

    The CSV lands next to ``path`` with a ``.csv`` suffix. Rendering the
    same results twice produces byte-identical files.
    """
    if not results:
        raise ValueError("nothing to render")
    text = "\n".join(_render_result(r) for r in results)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)

    import os

    csv_path = os.fspath(path)
    csv_path = csv_path[: csv_path.rfind(".")] + ".csv" if "." in os.path.basename(csv_path) else csv_path + ".csv"
    flat = []
    for result in results:
        for row in result.rows:
            flat.append((
                result.experiment,
                row.algorithm,
                "" if row.device_count is None else row.device_count,
                "" if row.attack_kinds is None else row.attack_kinds,
                row.seed,
                row.view,
                row.report.accuracy,
                row.report.precision,
                row.report.recall,
                row.report.f1,
            ))
    flat.sort(key=lambda r: tuple(str(v) for v in r[:6]))
    with open(csv_path, "w", newline="\n") as fh:
        fh.write("experiment,algorithm,device_count,attack_kinds,seed,view,accuracy,precision,recall,f1\n")
        for row in flat:
            head = ",".join(str(v) for v in row[:6])
            tail = ",".join(f"{v:.6f}" for v in row[6:])
            fh.write(f"{head},{tail}\n")
