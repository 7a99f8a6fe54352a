"""Command-line frontend: generate, train, detect, evaluate.

Exit codes follow a fixed contract: 0 on success, 2 for usage or
configuration problems (including unreadable inputs), 3 for I/O failures
while writing outputs. Alerts are data, not errors; detect exits 0 even
when it raises alarms.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import evaluation, pipeline, simulator
from .classifiers import (
    ALGORITHMS,
    Hyperparams,
    load_model,
    predict_batch,
    save_model,
    train,
)
from .domain import (
    CONDITION_ORDER,
    DEVICE_ORDER,
    FEATURE_DEVICE,
    FEATURE_ORDER,
    ConditionLabel,
)
from .errors import (
    ConfigError,
    DataIntegrityError,
    HealthGuardError,
    ModelFormatError,
    StratificationError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


@dataclass(frozen=True)
class Alert:
    """One malicious-prediction notification."""

    minute: int
    kind: ConditionLabel
    confidence: float
    device: str
    message: str

    def line(self) -> str:
        return (
            f"{self.minute},{self.kind.value},{self.confidence:.6f},"
            f"{self.device},{self.message}"
        )


def _load_configs(path, seed_override):
    if path is None:
        scenario = simulator.default_scenario_config()
        attack = simulator.default_attack_config()
    else:
        try:
            scenario, attack = simulator.load_config(path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    if seed_override is not None:
        import dataclasses

        scenario = dataclasses.replace(scenario, seed=seed_override)
        attack = dataclasses.replace(attack, seed=seed_override + 1)
    return scenario, attack


def _read_dataset(path):
    try:
        return pipeline.read_dataset_csv(path)
    except OSError as exc:
        raise ConfigError(f"cannot read dataset {path}: {exc.strerror}") from None


def _hyperparams(pairs: list[str] | None) -> Hyperparams:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"hyperparameter override {pair!r} is not key=value")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = value.strip()
    return Hyperparams().with_overrides(overrides)


def cmd_generate(args) -> int:
    scenario, attack = _load_configs(args.config, args.seed)
    dataset = simulator.build_dataset(scenario, attack)
    pipeline.write_dataset_csv(dataset, args.out)
    if not args.quiet:
        counts = dataset.class_counts()
        print(f"wrote {len(dataset)} instances to {args.out}")
        for condition, count in counts.items():
            if count:
                print(f"  {condition.value:<22} {count}")
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = _read_dataset(args.data)
    hyperparams = _hyperparams(args.hp)
    seed = args.seed if args.seed is not None else 0
    started = time.perf_counter()
    model = train(args.algo, dataset, hyperparams, seed=seed)
    elapsed = time.perf_counter() - started
    save_model(model, args.out)
    codes, _ = predict_batch(model, dataset.X)
    accuracy = float(np.mean(codes == dataset.label_codes))
    if not args.quiet:
        print(f"trained {args.algo} in {elapsed:.2f}s, training accuracy {accuracy:.4f}")
        print(f"model written to {args.out}")
    return EXIT_OK


def _implicated_device(model, row: np.ndarray) -> str:
    """Device with a dead availability flag, else the most deviant one."""
    avail = row[pipeline.N_FEATURES:]
    for j, device in enumerate(DEVICE_ORDER):
        if avail[j] == 0.0:
            return device.value
    z = np.abs((row[: pipeline.N_FEATURES] - model.standardizer.mean) / model.standardizer.std)
    feature = FEATURE_ORDER[int(np.argmax(z))]
    return FEATURE_DEVICE[feature].value


def cmd_detect(args) -> int:
    try:
        model = load_model(args.model)
    except OSError as exc:
        raise ConfigError(f"cannot read model {args.model}: {exc.strerror}") from None
    minutes, X, _ = pipeline.read_dataset_rows(args.data)

    alerts: list[Alert] = []
    if X.shape[0]:
        codes, scores = predict_batch(model, X)
        for i in range(X.shape[0]):
            label = CONDITION_ORDER[int(codes[i])]
            if label.is_benign:
                continue
            device = _implicated_device(model, X[i])
            alerts.append(
                Alert(
                    minute=int(minutes[i]),
                    kind=label,
                    confidence=float(scores[i, codes[i]]),
                    device=device,
                    message=f"suspected {label.value.replace('_', ' ')} involving {device}",
                )
            )

    if args.alerts:
        with open(args.alerts, "w", newline="\n") as fh:
            for alert in alerts:
                fh.write(alert.line() + "\n")
    elif not args.quiet:
        for alert in alerts:
            print(alert.line())
    print(f"instances={X.shape[0]} alerts={len(alerts)}")
    return EXIT_OK


def _parse_int_list(raw: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated integer list") from None


def cmd_evaluate(args) -> int:
    hyperparams = _hyperparams(args.hp)
    seeds = _parse_int_list(args.seeds, "--seeds")
    if args.experiment == "detection":
        if not args.data:
            raise ConfigError("detection experiment needs --data")
        dataset = _read_dataset(args.data)
        results = [
            evaluation.run_detection_experiment(
                dataset,
                seed=seeds[0],
                hyperparams=hyperparams,
                split_mode=args.split,
            )
        ]
    elif args.experiment == "ablation":
        scenario, attack = _load_configs(args.config, args.seed)
        results = evaluation.run_device_ablation(
            scenario,
            attack,
            device_counts=_parse_int_list(args.devices, "--devices"),
            seeds=seeds,
            hyperparams=hyperparams,
        )
    else:
        scenario, attack = _load_configs(args.config, args.seed)
        results = evaluation.run_simultaneous_attacks(
            scenario,
            attack,
            concurrent_kinds=_parse_int_list(args.kinds, "--kinds"),
            seeds=seeds,
            hyperparams=hyperparams,
            test_minutes=args.test_minutes,
        )
    evaluation.render_report(results, args.out)
    if not args.quiet:
        with open(args.out) as fh:
            sys.stdout.write(fh.read())
        print(f"report written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="healthguard",
        description="Synthetic smart-healthcare telemetry and ML-based attack detection",
    )
    parser.add_argument("--seed", type=int, default=None, help="override config seeds")
    parser.add_argument("--config", default=None, help="scenario/attack config file")
    parser.add_argument("--quiet", action="store_true", help="suppress chatter")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a labelled dataset CSV")
    p.add_argument("--out", required=True, help="output dataset CSV path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one detector on a dataset CSV")
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--out", required=True, help="output model path")
    p.add_argument("--hp", action="append", metavar="KEY=VALUE",
                   help="hyperparameter override (repeatable)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="scan a dataset with a trained model")
    p.add_argument("--model", required=True, help="model file path")
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument("--alerts", default=None, help="write alert lines here instead of stdout")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="run an evaluation experiment")
    p.add_argument("--experiment", required=True,
                   choices=("detection", "ablation", "simultaneous"))
    p.add_argument("--data", default=None, help="dataset CSV (detection only)")
    p.add_argument("--devices", default="4,5,6,7,8", help="device counts (ablation)")
    p.add_argument("--kinds", default="1,2,3", help="concurrent kinds (simultaneous)")
    p.add_argument("--seeds", default="1,2,3,4,5", help="experiment seeds")
    p.add_argument("--split", default="stratified", choices=("stratified", "literal"))
    p.add_argument("--test-minutes", type=int, default=2000,
                   help="test stream length (simultaneous)")
    p.add_argument("--out", default="hg_report.txt", help="report path (text + csv)")
    p.add_argument("--hp", action="append", metavar="KEY=VALUE",
                   help="hyperparameter override (repeatable)")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, DataIntegrityError, StratificationError,
            ModelFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HealthGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
