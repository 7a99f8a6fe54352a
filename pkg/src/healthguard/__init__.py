"""Smart-healthcare telemetry simulation and ML-based attack detection.

The toolkit synthesizes multi-device vital-sign telemetry for benign and
attacked patients, trains four from-scratch classifiers on the merged
per-minute vectors, and reproduces a detection/ablation/stress evaluation
protocol at desk scale.
"""

from .domain import (
    BENIGN_CONDITIONS,
    ATTACK_CONDITIONS,
    CONDITION_ORDER,
    DEVICE_FEATURES,
    DEVICE_ORDER,
    FEATURE_ORDER,
    ConditionLabel,
    DeviceKind,
    FeatureKind,
    ShiftDirection,
    ValueRange,
    affected_features,
    in_nominal,
    nominal_range,
)
from .simulator import (
    AttackConfig,
    AttackEvent,
    DeviceSeries,
    Reading,
    ScenarioConfig,
    TelemetryStream,
    build_dataset,
    default_attack_config,
    default_scenario_config,
    generate_benign,
    inject_attacks,
    load_config,
    sample_attack_onsets,
)
from .pipeline import (
    FeatureVector,
    LabeledDataset,
    LabeledInstance,
    assemble_dataset,
    collect,
    merge,
    read_dataset_csv,
    resample_per_minute,
    split,
    split_literal,
    write_dataset_csv,
)
from .classifiers import (
    ALGORITHMS,
    Hyperparams,
    Model,
    Standardizer,
    knn_brute_force,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from .evaluation import (
    ExperimentResult,
    MetricsReport,
    confusion,
    metrics,
    render_report,
    run_detection_experiment,
    run_device_ablation,
    run_simultaneous_attacks,
)

__version__ = "0.1.0"
