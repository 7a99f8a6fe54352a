"""Telemetry simulation: scripted benign scenarios plus attack injection.

Benign generation draws each device's readings at its native cadence from
Gaussians tied to the active condition: features the condition affects are
centered 20% of the nominal-range width beyond the range boundary (above
for HIGH shifts, below for LOW), everything else sits at the nominal
midpoint. Draws are truncated at three sigma and clipped to physical
bounds, so a zero noise scale degenerates to exact centers.

Attacks arrive as a homogeneous Poisson process. Three behaviors are
injected: forged-healthy readings that mask the patient's true state, a
tampered sleep monitor that never reports sleep, and denial of service
that silences a device entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .domain import (
    ATTACK_CONDITIONS,
    BENIGN_CONDITIONS,
    CONDITION_INDEX,
    CONDITION_ORDER,
    DEVICE_FEATURES,
    DEVICE_INDEX,
    DEVICE_ORDER,
    FEATURE_INDEX,
    FEATURE_ORDER,
    NOMINAL_RANGES,
    PHYSICAL_BOUNDS,
    ConditionLabel,
    DeviceKind,
    FeatureKind,
    ShiftDirection,
    condition_from_name,
    device_from_name,
    effect_entry,
)
from .errors import ConfigError, DataIntegrityError

# Native emission period per device, in seconds. The hemoglobin meter is an
# interval device: it reports every minute but takes a fresh measurement
# only every five minutes, holding the last measurement in between.
DEVICE_PERIOD_S: dict[DeviceKind, int] = {
    DeviceKind.HEART_BP_MONITOR: 10,
    DeviceKind.INSULIN_PUMP: 60,
    DeviceKind.PULSE_OXIMETER: 10,
    DeviceKind.RESP_SWEAT_MONITOR: 15,
    DeviceKind.ALCOHOL_MONITOR: 60,
    DeviceKind.HEMOGLOBIN_METER: 60,
    DeviceKind.NEURAL_HEADSET: 10,
    DeviceKind.SLEEP_MOTION_WATCH: 30,
}
HEMOGLOBIN_MEASURE_INTERVAL_S = 300

# How far past the nominal boundary an affected feature is centered, as a
# fraction of the nominal-range width.
SHIFT_FRACTION = 0.2

# Calibrated so the default 20,000-minute scenario relabels roughly 15% of
# minutes as malicious (about 3,000 attack instances).
DEFAULT_ATTACK_RATE_PER_HOUR = 0.54

DEFAULT_SEGMENT_MINUTES = 20
DEFAULT_TOTAL_MINUTES = 20_000
DEFAULT_SCENARIO_SEED = 7
DEFAULT_NOISE_SCALE = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    """Scripted benign scenario: an ordered schedule of condition segments."""

    segments: tuple[tuple[ConditionLabel, int], ...]
    seed: int = DEFAULT_SCENARIO_SEED
    enabled_devices: tuple[DeviceKind, ...] = DEVICE_ORDER
    noise_scale: float = DEFAULT_NOISE_SCALE

    def __post_init__(self) -> None:
        if not self.segments:
            raise ConfigError("scenario needs at least one segment")
        for condition, minutes in self.segments:
            if not condition.is_benign:
                raise ConfigError(f"segment condition {condition.value} is an attack label")
            if minutes < 1:
                raise ConfigError(f"segment duration {minutes} must be >= 1 minute")
        if not self.enabled_devices:
            raise ConfigError("scenario needs at least one enabled device")
        if len(set(self.enabled_devices)) != len(self.enabled_devices):
            raise ConfigError("enabled_devices contains duplicates")
        if self.noise_scale < 0:
            raise ConfigError("noise_scale must be >= 0")

    @property
    def total_minutes(self) -> int:
        return sum(minutes for _, minutes in self.segments)

    def minute_condition_codes(self) -> np.ndarray:
        """Per-minute condition codes (indexes into CONDITION_ORDER)."""
        codes = [CONDITION_INDEX[c] for c, _ in self.segments]
        lengths = [m for _, m in self.segments]
        return np.repeat(np.asarray(codes, dtype=np.int16), lengths)


@dataclass(frozen=True)
class AttackConfig:
    """Poisson attack campaign parameters."""

    rate_per_hour: float = DEFAULT_ATTACK_RATE_PER_HOUR
    duration_min: int = 5
    duration_max: int = 30
    enabled_threats: tuple[ConditionLabel, ...] = ATTACK_CONDITIONS
    seed: int = DEFAULT_SCENARIO_SEED + 1
    tamper_target: DeviceKind = DeviceKind.SLEEP_MOTION_WATCH

    def __post_init__(self) -> None:
        if self.rate_per_hour < 0:
            raise ConfigError("attack rate must be >= 0")
        if self.duration_min < 1 or self.duration_min > self.duration_max:
            raise ConfigError("attack duration range must satisfy 1 <= min <= max")
        for threat in self.enabled_threats:
            if threat.is_benign:
                raise ConfigError(f"{threat.value} is not an attack label")


@dataclass(frozen=True)
class Reading:
    """One raw device observation at a point in time."""

    device: DeviceKind
    t_seconds: int
    values: dict[FeatureKind, float]


@dataclass
class DeviceSeries:
    """Time-ordered readings of one device, stored as arrays.

    Column j of ``values`` holds DEVICE_FEATURES[device][j].
    """

    device: DeviceKind
    t_seconds: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] != self.t_seconds.shape[0]:
            raise DataIntegrityError(f"misshapen series for {self.device.value}")
        if self.values.shape[1] != len(DEVICE_FEATURES[self.device]):
            raise DataIntegrityError(f"wrong feature count for {self.device.value}")

    def __len__(self) -> int:
        return int(self.t_seconds.shape[0])

    def copy(self) -> "DeviceSeries":
        return DeviceSeries(self.device, self.t_seconds.copy(), self.values.copy())

    def readings(self) -> Iterator[Reading]:
        feats = DEVICE_FEATURES[self.device]
        for i in range(len(self)):
            vals = {f: float(self.values[i, j]) for j, f in enumerate(feats)}
            yield Reading(self.device, int(self.t_seconds[i]), vals)


@dataclass(frozen=True)
class AttackEvent:
    """One injected attack window against a single device."""

    kind: ConditionLabel
    target: DeviceKind
    onset_minute: int
    duration_minutes: int

    def __post_init__(self) -> None:
        if self.kind.is_benign:
            raise ConfigError(f"attack event kind {self.kind.value} is benign")
        if self.onset_minute < 0 or self.duration_minutes < 1:
            raise ConfigError("attack window must start at minute >= 0 and last >= 1 minute")

    @property
    def end_minute(self) -> int:
        return self.onset_minute + self.duration_minutes


@dataclass
class TelemetryStream:
    """Per-device reading series plus per-minute ground truth.

    ``ground_truth`` holds condition codes (indexes into CONDITION_ORDER);
    use :meth:`ground_truth_labels` for the enum view.
    """

    series: dict[DeviceKind, DeviceSeries]
    ground_truth: np.ndarray
    events: list[AttackEvent] = field(default_factory=list)
    noise_scale: float = DEFAULT_NOISE_SCALE

    @property
    def total_minutes(self) -> int:
        return int(self.ground_truth.shape[0])

    def ground_truth_labels(self) -> list[ConditionLabel]:
        return [CONDITION_ORDER[c] for c in self.ground_truth]

    def copy(self) -> "TelemetryStream":
        return TelemetryStream(
            {d: s.copy() for d, s in self.series.items()},
            self.ground_truth.copy(),
            list(self.events),
            self.noise_scale,
        )


def _condition_tables(noise_scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Per (condition, feature) Gaussian center and sigma for benign draws."""
    n_cond, n_feat = len(CONDITION_ORDER), len(FEATURE_ORDER)
    centers = np.empty((n_cond, n_feat))
    sigmas = np.empty((n_cond, n_feat))
    for j, feature in enumerate(FEATURE_ORDER):
        rng_def = NOMINAL_RANGES[feature]
        centers[:, j] = rng_def.midpoint
        sigmas[:, j] = noise_scale * rng_def.width
    for condition in BENIGN_CONDITIONS:
        entry = effect_entry(condition)
        i = CONDITION_INDEX[condition]
        for feature in entry.affected:
            j = FEATURE_INDEX[feature]
            rng_def = NOMINAL_RANGES[feature]
            offset = SHIFT_FRACTION * rng_def.width
            if entry.direction[feature] is ShiftDirection.HIGH:
                centers[i, j] = rng_def.hi + offset
            else:
                centers[i, j] = rng_def.lo - offset
    return centers, sigmas


def _finalize_columns(values: np.ndarray, features: tuple[FeatureKind, ...]) -> np.ndarray:
    """Clip to physical bounds and quantize categorical columns in place."""
    for j, feature in enumerate(features):
        lo, hi = PHYSICAL_BOUNDS[feature]
        np.clip(values[:, j], lo, hi, out=values[:, j])
        if feature is FeatureKind.SLEEP_STATE:
            values[:, j] = np.rint(values[:, j])
    return values


def _draw_conditioned(
    rng: np.random.Generator,
    condition_codes: np.ndarray,
    features: tuple[FeatureKind, ...],
    centers: np.ndarray,
    sigmas: np.ndarray,
) -> np.ndarray:
    cols = np.asarray([FEATURE_INDEX[f] for f in features])
    c = centers[condition_codes[:, None], cols[None, :]]
    s = sigmas[condition_codes[:, None], cols[None, :]]
    z = np.clip(rng.standard_normal(c.shape), -3.0, 3.0)
    return _finalize_columns(c + s * z, features)


def draw_healthy_values(
    rng: np.random.Generator,
    n: int,
    features: tuple[FeatureKind, ...],
    noise_scale: float,
) -> np.ndarray:
    """Draw n readings of the given features from the healthy distribution."""
    centers = np.asarray([NOMINAL_RANGES[f].midpoint for f in features])
    sigmas = np.asarray([noise_scale * NOMINAL_RANGES[f].width for f in features])
    z = np.clip(rng.standard_normal((n, len(features))), -3.0, 3.0)
    return _finalize_columns(centers + sigmas * z, features)


def generate_benign(config: ScenarioConfig) -> TelemetryStream:
    """Simulate benign telemetry for every enabled device.

    Deterministic in ``config.seed``; each device consumes an independent
    child RNG stream, so disabling one device never perturbs another.
    """
    total_minutes = config.total_minutes
    minute_codes = config.minute_condition_codes()
    centers, sigmas = _condition_tables(config.noise_scale)
    horizon_s = total_minutes * 60

    children = np.random.SeedSequence(config.seed).spawn(len(DEVICE_ORDER))
    series: dict[DeviceKind, DeviceSeries] = {}
    for device in DEVICE_ORDER:
        if device not in config.enabled_devices:
            continue
        rng = np.random.Generator(np.random.PCG64(children[DEVICE_INDEX[device]]))
        features = DEVICE_FEATURES[device]
        ts = np.arange(0, horizon_s, DEVICE_PERIOD_S[device], dtype=np.int64)
        if device is DeviceKind.HEMOGLOBIN_METER:
            # Fresh measurement on the five-minute grid; reports in between
            # repeat the held measurement.
            measure_ts = np.arange(0, horizon_s, HEMOGLOBIN_MEASURE_INTERVAL_S, dtype=np.int64)
            measured = _draw_conditioned(
                rng, minute_codes[measure_ts // 60], features, centers, sigmas
            )
            values = measured[ts // HEMOGLOBIN_MEASURE_INTERVAL_S]
        else:
            values = _draw_conditioned(
                rng, minute_codes[ts // 60], features, centers, sigmas
            )
        series[device] = DeviceSeries(device, ts, values)
    return TelemetryStream(series, minute_codes.copy(), [], config.noise_scale)


def sample_attack_onsets(rate_per_hour: float, horizon_minutes: int, seed: int) -> list[int]:
    """Onset minutes of a homogeneous Poisson process over the horizon.

    Intensity is ``rate_per_hour / 60`` per minute; arrival times are
    accumulated exponential gaps, floored to whole minutes.
    """
    if rate_per_hour < 0:
        raise ValueError("rate must be >= 0")
    if horizon_minutes < 1:
        raise ValueError("horizon must be >= 1 minute")
    if rate_per_hour == 0:
        return []
    rng = np.random.default_rng(seed)
    mean_gap = 60.0 / rate_per_hour
    onsets: list[int] = []
    t = rng.exponential(mean_gap)
    while t < horizon_minutes:
        onsets.append(int(t))
        t += rng.exponential(mean_gap)
    return onsets


def _merge_same_kind_windows(events: list[AttackEvent]) -> list[AttackEvent]:
    """Merge overlapping windows of identical kind and target."""
    merged: dict[tuple[ConditionLabel, DeviceKind], list[AttackEvent]] = {}
    for event in sorted(events, key=lambda e: (e.onset_minute, e.end_minute)):
        bucket = merged.setdefault((event.kind, event.target), [])
        if bucket and event.onset_minute <= bucket[-1].end_minute:
            last = bucket[-1]
            end = max(last.end_minute, event.end_minute)
            bucket[-1] = replace(last, duration_minutes=end - last.onset_minute)
        else:
            bucket.append(event)
    flat = [e for bucket in merged.values() for e in bucket]
    flat.sort(key=lambda e: (e.onset_minute, CONDITION_INDEX[e.kind], DEVICE_INDEX[e.target]))
    return flat


def _window_mask(series: DeviceSeries, event: AttackEvent) -> np.ndarray:
    lo, hi = event.onset_minute * 60, event.end_minute * 60
    return (series.t_seconds >= lo) & (series.t_seconds < hi)


def apply_events(
    stream: TelemetryStream,
    events: list[AttackEvent],
    rng: np.random.Generator,
) -> TelemetryStream:
    """Apply attack effects and relabel ground truth on a copy of the stream.

    Events act in (onset, kind, target) order on the evolving stream, so a
    later window operates on whatever an earlier overlapping one left
    behind. Minutes covered by several windows take the earliest onset's
    label.
    """
    events = _merge_same_kind_windows(events)
    out = stream.copy()
    total = out.total_minutes
    for event in events:
        if event.end_minute > total:
            raise ConfigError(f"attack window {event} exceeds the {total}-minute scenario")
        if event.target not in out.series:
            continue  # device not generated (disabled); nothing to disturb
        series = out.series[event.target]
        mask = _window_mask(series, event)
        features = DEVICE_FEATURES[event.target]
        if event.kind is ConditionLabel.FALSE_DATA_INJECTION:
            n = int(mask.sum())
            if n:
                series.values[mask] = draw_healthy_values(rng, n, features, out.noise_scale)
        elif event.kind is ConditionLabel.TAMPERED_DEVICE:
            if FeatureKind.SLEEP_STATE in features:
                series.values[mask, features.index(FeatureKind.SLEEP_STATE)] = 0.0
            if FeatureKind.MOTION_LEVEL in features:
                col = features.index(FeatureKind.MOTION_LEVEL)
                before = np.nonzero(series.t_seconds < event.onset_minute * 60)[0]
                frozen = (
                    float(series.values[before[-1], col])
                    if before.size
                    else NOMINAL_RANGES[FeatureKind.MOTION_LEVEL].midpoint
                )
                series.values[mask, col] = frozen
        elif event.kind is ConditionLabel.DENIAL_OF_SERVICE:
            keep = ~mask
            out.series[event.target] = DeviceSeries(
                event.target, series.t_seconds[keep], series.values[keep]
            )
        else:  # pragma: no cover - enum is exhaustive
            raise ConfigError(f"unsupported attack kind {event.kind}")

    assigned = np.zeros(total, dtype=bool)
    for event in events:
        window = np.arange(event.onset_minute, event.end_minute)
        fresh = window[~assigned[window]]
        out.ground_truth[fresh] = CONDITION_INDEX[event.kind]
        assigned[fresh] = True
    out.events = events
    return out


def inject_attacks(stream: TelemetryStream, attack_config: AttackConfig) -> TelemetryStream:
    """Inject a Poisson attack campaign into a benign stream.

    Every sampled onset picks a threat kind uniformly from the enabled
    set and (except for the tampered-device threat, which goes after the
    configured sleep monitor) a target uniformly over the stream's
    devices. Returns a new stream; the input is untouched.
    """
    if stream.events:
        raise ConfigError("stream already contains attack events")
    if not attack_config.enabled_threats:
        raise ConfigError("no threats enabled")
    total = stream.total_minutes
    if attack_config.duration_min > total:
        raise ConfigError("minimum attack duration exceeds the scenario length")

    onsets = sample_attack_onsets(attack_config.rate_per_hour, total, attack_config.seed)
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=attack_config.seed, spawn_key=(1,)))
    )
    threats = sorted(set(attack_config.enabled_threats), key=lambda c: CONDITION_INDEX[c])
    pool = sorted(stream.series, key=lambda d: DEVICE_INDEX[d])

    events = []
    for onset in onsets:
        # Fixed draw order per event (kind, duration, target) keeps the
        # campaign reproducible.
        kind = threats[int(rng.integers(0, len(threats)))]
        duration = int(rng.integers(attack_config.duration_min, attack_config.duration_max + 1))
        if kind is ConditionLabel.TAMPERED_DEVICE:
            target = attack_config.tamper_target
        else:
            target = pool[int(rng.integers(0, len(pool)))]
        duration = min(duration, total - onset)
        events.append(AttackEvent(kind, target, onset, duration))
    return apply_events(stream, events, rng)


def build_dataset(
    scenario_config: ScenarioConfig,
    attack_config: AttackConfig | None = None,
    merge_mask: tuple[DeviceKind, ...] | None = None,
):
    """Generate, attack, resample, and merge into a labelled dataset.

    ``merge_mask`` restricts which devices feed the merged vectors (their
    columns collapse to constants), without changing the underlying
    telemetry or attack campaign; by default all enabled devices are used.
    """
    from . import pipeline

    stream = generate_benign(scenario_config)
    if attack_config is not None:
        stream = inject_attacks(stream, attack_config)
    return pipeline.assemble_dataset(stream, merge_mask=merge_mask)


def cycled_segments(
    total_minutes: int = DEFAULT_TOTAL_MINUTES,
    segment_minutes: int = DEFAULT_SEGMENT_MINUTES,
    conditions: tuple[ConditionLabel, ...] = BENIGN_CONDITIONS,
) -> tuple[tuple[ConditionLabel, int], ...]:
    """Cycle conditions in fixed-length segments until total_minutes is reached."""
    if total_minutes < 1 or segment_minutes < 1:
        raise ConfigError("total_minutes and segment_minutes must be >= 1")
    segments = []
    remaining = total_minutes
    i = 0
    while remaining > 0:
        minutes = min(segment_minutes, remaining)
        segments.append((conditions[i % len(conditions)], minutes))
        remaining -= minutes
        i += 1
    return tuple(segments)


def default_scenario_config(seed: int = DEFAULT_SCENARIO_SEED) -> ScenarioConfig:
    """The stock 20,000-minute scenario cycling all twelve benign conditions."""
    return ScenarioConfig(segments=cycled_segments(), seed=seed)


def default_attack_config(seed: int = DEFAULT_SCENARIO_SEED + 1) -> AttackConfig:
    """The stock Poisson campaign (about 15% of minutes end up malicious)."""
    return AttackConfig(seed=seed)


# --- plain-text key/value configuration files ---------------------------

_CONFIG_KEYS = {
    "segments", "total_minutes", "segment_minutes", "seed", "attack_seed",
    "devices", "noise_scale", "rate_per_hour", "duration_min", "duration_max",
    "threats", "tamper_target",
}


def _parse_segments(value: str, lineno: int) -> tuple[tuple[ConditionLabel, int], ...]:
    segments = []
    for part in value.replace(",", " ").split():
        if ":" not in part:
            raise ConfigError(f"line {lineno}: segment {part!r} is not condition:minutes")
        name, _, minutes = part.partition(":")
        try:
            segments.append((condition_from_name(name), int(minutes)))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    if not segments:
        raise ConfigError(f"line {lineno}: empty segment list")
    return tuple(segments)


def load_config(path) -> tuple[ScenarioConfig, AttackConfig]:
    """Parse a key/value config file into scenario and attack configs.

    Unknown keys and malformed values fail with the offending line number.
    ``segments`` may be combined with ``total_minutes`` to cycle the listed
    segments up to a fixed horizon. ``attack_seed`` defaults to seed + 1.
    """
    raw: dict[str, tuple[str, int]] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"line {lineno}: expected key = value, got {text!r}")
            key, _, value = text.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            raw[key] = (value, lineno)

    def _get(key: str, default=None):
        return raw.get(key, (default, 0))

    def _number(key: str, cast, default):
        value, lineno = _get(key)
        if value is None:
            return default
        try:
            return cast(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} must be a {cast.__name__}") from None

    seed = _number("seed", int, DEFAULT_SCENARIO_SEED)
    attack_seed = _number("attack_seed", int, seed + 1)
    noise_scale = _number("noise_scale", float, DEFAULT_NOISE_SCALE)
    rate = _number("rate_per_hour", float, DEFAULT_ATTACK_RATE_PER_HOUR)
    duration_min = _number("duration_min", int, 5)
    duration_max = _number("duration_max", int, 30)
    total_minutes = _number("total_minutes", int, None)
    segment_minutes = _number("segment_minutes", int, DEFAULT_SEGMENT_MINUTES)

    value, lineno = _get("segments")
    if value is not None:
        base_segments = _parse_segments(value, lineno)
        if total_minutes is not None:
            cycle = tuple(c for c, _ in base_segments)
            segments = cycled_segments(total_minutes, segment_minutes, cycle)
        else:
            segments = base_segments
    else:
        segments = cycled_segments(total_minutes or DEFAULT_TOTAL_MINUTES, segment_minutes)

    value, lineno = _get("devices")
    if value is None or value == "all":
        devices = DEVICE_ORDER
    else:
        try:
            devices = tuple(device_from_name(n) for n in value.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None

    value, lineno = _get("threats")
    if value is None or value == "all":
        threats = ATTACK_CONDITIONS
    else:
        try:
            threats = tuple(condition_from_name(n) for n in value.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None

    value, lineno = _get("tamper_target")
    if value is None:
        tamper_target = DeviceKind.SLEEP_MOTION_WATCH
    else:
        try:
            tamper_target = device_from_name(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None

    scenario = ScenarioConfig(
        segments=segments, seed=seed, enabled_devices=devices, noise_scale=noise_scale
    )
    attack = AttackConfig(
        rate_per_hour=rate,
        duration_min=duration_min,
        duration_max=duration_max,
        enabled_threats=threats,
        seed=attack_seed,
        tamper_target=tamper_target,
    )
    return scenario, attack
