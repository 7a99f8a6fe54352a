"""Clinical domain model for a multi-device smart healthcare system.

Encodes the device catalog, the vital-sign features each device reports,
nominal (healthy) value ranges, and which features shift out of range for
each monitored activity or disease. Everything here is an immutable
constant; all other modules derive their feature ordering and label
encoding from this one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum


class DeviceKind(Enum):
    """The eight smart medical devices of the monitored system."""

    HEART_BP_MONITOR = "heart_bp_monitor"      # ECG + blood pressure cuff
    INSULIN_PUMP = "insulin_pump"              # blood glucose
    PULSE_OXIMETER = "pulse_oximeter"          # oxygen saturation
    RESP_SWEAT_MONITOR = "resp_sweat_monitor"  # breathing + sweating rate
    ALCOHOL_MONITOR = "alcohol_monitor"        # blood alcohol
    HEMOGLOBIN_METER = "hemoglobin_meter"      # blood hemoglobin
    NEURAL_HEADSET = "neural_headset"          # EEG dominant band frequency
    SLEEP_MOTION_WATCH = "sleep_motion_watch"  # sleep stage + human motion


class FeatureKind(Enum):
    """The twelve physiological features observed across all devices."""

    HEART_RATE = "heart_rate"              # beats per minute
    SYSTOLIC = "systolic"                  # mm Hg
    DIASTOLIC = "diastolic"                # mm Hg
    GLUCOSE = "glucose"                    # mg/dl
    SPO2 = "spo2"                          # percent saturation
    RESPIRATION = "respiration"            # breaths per minute
    SWEAT_RATE = "sweat_rate"              # microliter per minute per cm^2
    ALCOHOL = "alcohol"                    # g/dl
    HEMOGLOBIN = "hemoglobin"              # g/dl
    EEG_DOMINANT_FREQ = "eeg_dominant_freq"  # Hz
    SLEEP_STATE = "sleep_state"            # 0=awake, 1=NREM, 2=REM
    MOTION_LEVEL = "motion_level"          # unitless, 0..1


class ConditionLabel(Enum):
    """15-way ground-truth label: 7 activities, 5 diseases, 3 attacks."""

    SLEEPING = "sleeping"
    WALKING = "walking"
    STRESS = "stress"
    EXERCISE = "exercise"
    DRUNK = "drunk"
    HEART_ATTACK = "heart_attack"
    STROKE = "stroke"
    HIGH_BLOOD_PRESSURE = "high_blood_pressure"
    HIGH_CHOLESTEROL = "high_cholesterol"
    EXCESSIVE_SWEATING = "excessive_sweating"
    ABNORMAL_OXYGEN = "abnormal_oxygen"
    ABNORMAL_BLOOD_SUGAR = "abnormal_blood_sugar"
    FALSE_DATA_INJECTION = "false_data_injection"
    TAMPERED_DEVICE = "tampered_device"
    DENIAL_OF_SERVICE = "denial_of_service"

    @property
    def is_benign(self) -> bool:
        return self not in ATTACK_CONDITIONS


class ShiftDirection(Enum):
    """Which way an affected feature moves relative to its nominal range."""

    HIGH = "H"
    LOW = "L"


# Canonical orderings. Feature order defines dataset columns; device order
# defines availability-flag columns; condition order defines label codes.
FEATURE_ORDER: tuple[FeatureKind, ...] = tuple(FeatureKind)
DEVICE_ORDER: tuple[DeviceKind, ...] = tuple(DeviceKind)
CONDITION_ORDER: tuple[ConditionLabel, ...] = tuple(ConditionLabel)

FEATURE_INDEX = {f: i for i, f in enumerate(FEATURE_ORDER)}
DEVICE_INDEX = {d: i for i, d in enumerate(DEVICE_ORDER)}
CONDITION_INDEX = {c: i for i, c in enumerate(CONDITION_ORDER)}

ATTACK_CONDITIONS: tuple[ConditionLabel, ...] = (
    ConditionLabel.FALSE_DATA_INJECTION,
    ConditionLabel.TAMPERED_DEVICE,
    ConditionLabel.DENIAL_OF_SERVICE,
)
BENIGN_CONDITIONS: tuple[ConditionLabel, ...] = tuple(
    c for c in CONDITION_ORDER if c not in ATTACK_CONDITIONS
)

DEVICE_FEATURES: dict[DeviceKind, tuple[FeatureKind, ...]] = {
    DeviceKind.HEART_BP_MONITOR: (
        FeatureKind.HEART_RATE,
        FeatureKind.SYSTOLIC,
        FeatureKind.DIASTOLIC,
    ),
    DeviceKind.INSULIN_PUMP: (FeatureKind.GLUCOSE,),
    DeviceKind.PULSE_OXIMETER: (FeatureKind.SPO2,),
    DeviceKind.RESP_SWEAT_MONITOR: (
        FeatureKind.RESPIRATION,
        FeatureKind.SWEAT_RATE,
    ),
    DeviceKind.ALCOHOL_MONITOR: (FeatureKind.ALCOHOL,),
    DeviceKind.HEMOGLOBIN_METER: (FeatureKind.HEMOGLOBIN,),
    DeviceKind.NEURAL_HEADSET: (FeatureKind.EEG_DOMINANT_FREQ,),
    DeviceKind.SLEEP_MOTION_WATCH: (
        FeatureKind.SLEEP_STATE,
        FeatureKind.MOTION_LEVEL,
    ),
}

FEATURE_DEVICE: dict[FeatureKind, DeviceKind] = {
    f: d for d, feats in DEVICE_FEATURES.items() for f in feats
}


@dataclass(frozen=True)
class ValueRange:
    """Closed/half-open interval for a vital sign."""

    lo: float
    hi: float
    lo_inclusive: bool = True
    hi_inclusive: bool = True

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("range bounds must be finite")
        if self.lo > self.hi:
            raise ValueError(f"range lower bound {self.lo} exceeds upper bound {self.hi}")
        if self.lo == self.hi and not (self.lo_inclusive and self.hi_inclusive):
            raise ValueError("degenerate range must be inclusive on both ends")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2.0

    def contains(self, value: float) -> bool:
        above = value > self.lo or (self.lo_inclusive and value == self.lo)
        below = value < self.hi or (self.hi_inclusive and value == self.hi)
        return above and below


# Healthy value ranges. Alcohol treats the 0.08 g/dl legal limit as a
# violation point, so its upper bound is exclusive; everything else is
# inclusive on both ends. Blood pressure uses the conventional 120/80
# point values as upper bounds of normal.
NOMINAL_RANGES: dict[FeatureKind, ValueRange] = {
    FeatureKind.HEART_RATE: ValueRange(60.0, 100.0),
    FeatureKind.SYSTOLIC: ValueRange(90.0, 120.0),
    FeatureKind.DIASTOLIC: ValueRange(60.0, 80.0),
    FeatureKind.GLUCOSE: ValueRange(70.0, 130.0),
    FeatureKind.SPO2: ValueRange(94.0, 99.0),
    FeatureKind.RESPIRATION: ValueRange(12.0, 20.0),
    FeatureKind.SWEAT_RATE: ValueRange(0.0, 0.5),
    FeatureKind.ALCOHOL: ValueRange(0.0, 0.08, hi_inclusive=False),
    FeatureKind.HEMOGLOBIN: ValueRange(12.3, 17.5),
    FeatureKind.EEG_DOMINANT_FREQ: ValueRange(0.5, 24.0),
    FeatureKind.SLEEP_STATE: ValueRange(0.0, 2.0),
    FeatureKind.MOTION_LEVEL: ValueRange(0.0, 1.0),
}

# Hard physical bounds used to truncate simulated values. Wider than the
# nominal ranges; a shifted draw can never escape these.
PHYSICAL_BOUNDS: dict[FeatureKind, tuple[float, float]] = {
    FeatureKind.HEART_RATE: (0.0, 250.0),
    FeatureKind.SYSTOLIC: (0.0, 300.0),
    FeatureKind.DIASTOLIC: (0.0, 200.0),
    FeatureKind.GLUCOSE: (0.0, 600.0),
    FeatureKind.SPO2: (0.0, 100.0),
    FeatureKind.RESPIRATION: (0.0, 60.0),
    FeatureKind.SWEAT_RATE: (0.0, 5.0),
    FeatureKind.ALCOHOL: (0.0, 1.0),
    FeatureKind.HEMOGLOBIN: (0.0, 25.0),
    FeatureKind.EEG_DOMINANT_FREQ: (0.0, 100.0),
    FeatureKind.SLEEP_STATE: (0.0, 2.0),
    FeatureKind.MOTION_LEVEL: (0.0, 1.0),
}

# Device-effect catalog, transcribed verbatim from the monitoring study it
# models (including its oddities, e.g. heart rate unaffected under high
# blood pressure). Tags name the measured parameter, not the device:
#   ECG heart rate, BP blood pressure, GL glucose, BR breathing, OX oxygen,
#   SW sweating, AL alcohol, HG hemoglobin, NA neural activity,
#   SL sleep, HM human motion.
_PARAM_FEATURES: dict[str, tuple[FeatureKind, ...]] = {
    "ECG": (FeatureKind.HEART_RATE,),
    "BP": (FeatureKind.SYSTOLIC, FeatureKind.DIASTOLIC),
    "GL": (FeatureKind.GLUCOSE,),
    "BR": (FeatureKind.RESPIRATION,),
    "OX": (FeatureKind.SPO2,),
    "SW": (FeatureKind.SWEAT_RATE,),
    "AL": (FeatureKind.ALCOHOL,),
    "HG": (FeatureKind.HEMOGLOBIN,),
    "NA": (FeatureKind.EEG_DOMINANT_FREQ,),
    "SL": (FeatureKind.SLEEP_STATE,),
    "HM": (FeatureKind.MOTION_LEVEL,),
}

_CONDITION_MARKS: dict[ConditionLabel, tuple[str, ...]] = {
    # activities
    ConditionLabel.SLEEPING: ("ECG", "BP", "GL", "BR", "OX"),
    ConditionLabel.WALKING: ("ECG", "GL", "BR", "OX", "SW", "HM", "HG", "NA"),
    ConditionLabel.STRESS: ("ECG", "BP", "BR", "SW", "NA"),
    ConditionLabel.EXERCISE: ("ECG", "BP", "GL", "BR", "OX", "SW", "HM", "NA"),
    ConditionLabel.DRUNK: ("BP", "GL", "BR", "AL"),
    ConditionLabel.HEART_ATTACK: ("ECG", "BR", "SW", "NA"),
    ConditionLabel.STROKE: ("ECG", "BP", "HM", "HG", "NA"),
    # diseases
    ConditionLabel.HIGH_BLOOD_PRESSURE: ("SW", "BP", "GL", "OX", "SL", "HG", "AL", "NA"),
    ConditionLabel.HIGH_CHOLESTEROL: ("SW", "BP", "GL", "OX", "HG", "NA"),
    ConditionLabel.EXCESSIVE_SWEATING: ("ECG", "SW", "BP", "GL", "OX", "HG", "NA", "HM"),
    ConditionLabel.ABNORMAL_OXYGEN: ("ECG", "BP", "GL", "BR", "OX", "SL", "NA", "HM"),
    ConditionLabel.ABNORMAL_BLOOD_SUGAR: ("ECG", "SW", "BP", "GL", "OX", "HG", "NA"),
}

# Features that shift below their nominal range instead of above it.
_LOW_SHIFTS: dict[ConditionLabel, tuple[FeatureKind, ...]] = {
    ConditionLabel.EXERCISE: (
        FeatureKind.GLUCOSE,
        FeatureKind.SPO2,
        FeatureKind.HEMOGLOBIN,
    ),
    ConditionLabel.SLEEPING: (
        FeatureKind.HEART_RATE,
        FeatureKind.RESPIRATION,
    ),
}


@dataclass(frozen=True)
class EffectEntry:
    """Which features a benign condition disturbs, and in which direction."""

    condition: ConditionLabel
    affected: frozenset[FeatureKind]
    direction: dict[FeatureKind, ShiftDirection]


def _build_effects() -> dict[ConditionLabel, EffectEntry]:
    effects = {}
    for condition, marks in _CONDITION_MARKS.items():
        feats = frozenset(f for tag in marks for f in _PARAM_FEATURES[tag])
        lows = _LOW_SHIFTS.get(condition, ())
        direction = {
            f: (ShiftDirection.LOW if f in lows else ShiftDirection.HIGH)
            for f in feats
        }
        effects[condition] = EffectEntry(condition, feats, direction)
    return effects


CONDITION_EFFECTS: dict[ConditionLabel, EffectEntry] = _build_effects()


def nominal_range(feature: FeatureKind) -> ValueRange:
    """Healthy range for a feature; total over all twelve features."""
    return NOMINAL_RANGES[feature]


def physical_bounds(feature: FeatureKind) -> tuple[float, float]:
    """Hard truncation bounds for simulated values of a feature."""
    return PHYSICAL_BOUNDS[feature]


def in_nominal(feature: FeatureKind, value: float) -> bool:
    """True iff value lies inside the feature's nominal range."""
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r} for {feature.value}")
    return NOMINAL_RANGES[feature].contains(value)


def affected_features(condition: ConditionLabel) -> frozenset[FeatureKind]:
    """Features disturbed by a benign condition. Attacks have no entry."""
    if not condition.is_benign:
        raise ValueError(f"{condition.value} is an attack, not a monitored condition")
    return CONDITION_EFFECTS[condition].affected


def effect_entry(condition: ConditionLabel) -> EffectEntry:
    """Full effect record (affected set plus shift directions)."""
    if not condition.is_benign:
        raise ValueError(f"{condition.value} is an attack, not a monitored condition")
    return CONDITION_EFFECTS[condition]


def condition_from_name(name: str) -> ConditionLabel:
    try:
        return ConditionLabel(name)
    except ValueError:
        raise ValueError(f"unknown condition label {name!r}") from None


def device_from_name(name: str) -> DeviceKind:
    try:
        return DeviceKind(name)
    except ValueError:
        raise ValueError(f"unknown device {name!r}") from None


def write_effect_matrix_csv(path) -> None:
    """Export the condition/feature effect matrix (H, L, or -) as CSV.

    One row per benign condition, one column per feature, so tests and
    documentation share a single machine-readable source of truth.
    """
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["condition"] + [f.value for f in FEATURE_ORDER])
        for condition in BENIGN_CONDITIONS:
            entry = CONDITION_EFFECTS[condition]
            row = [condition.value]
            for f in FEATURE_ORDER:
                row.append(entry.direction[f].value if f in entry.affected else "-")
            writer.writerow(row)


def write_nominal_ranges_csv(path) -> None:
    """Export nominal ranges (bounds and inclusivity) as CSV."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", "lo", "hi", "lo_inclusive", "hi_inclusive"])
        for f in FEATURE_ORDER:
            r = NOMINAL_RANGES[f]
            writer.writerow([f.value, repr(r.lo), repr(r.hi),
                             int(r.lo_inclusive), int(r.hi_inclusive)])


def _check_catalog() -> None:
    # Every feature owned by exactly one device, and the device map covers
    # all twelve features with no overlap.
    seen: list[FeatureKind] = []
    for device in DEVICE_ORDER:
        feats = DEVICE_FEATURES[device]
        if not feats:
            raise AssertionError(f"{device} owns no features")
        seen.extend(feats)
    if len(seen) != len(set(seen)) or set(seen) != set(FEATURE_ORDER):
        raise AssertionError("device/feature ownership is not a partition")
    for condition in BENIGN_CONDITIONS:
        if not CONDITION_EFFECTS[condition].affected:
            raise AssertionError(f"{condition} affects no features")


_check_catalog()
