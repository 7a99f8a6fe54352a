#!/usr/bin/env python3
"""Tour of the clinical domain model: devices, ranges, and condition effects.

Run: python demos/explore_domain.py
"""

from healthguard.domain import (
    BENIGN_CONDITIONS,
    CONDITION_EFFECTS,
    DEVICE_FEATURES,
    DEVICE_ORDER,
    FEATURE_ORDER,
    nominal_range,
)

print("Device catalog")
print("=" * 60)
for device in DEVICE_ORDER:
    features = ", ".join(f.value for f in DEVICE_FEATURES[device])
    print(f"  {device.value:<20} -> {features}")

print("\nNominal (healthy) ranges")
print("=" * 60)
for feature in FEATURE_ORDER:
    r = nominal_range(feature)
    hi_mark = "]" if r.hi_inclusive else ")"
    print(f"  {feature.value:<18} [{r.lo:g}, {r.hi:g}{hi_mark}  midpoint {r.midpoint:g}")

print("\nCondition effect matrix (H = shifts high, L = shifts low)")
print("=" * 60)
header = " " * 22 + " ".join(f"{f.value[:6]:>7}" for f in FEATURE_ORDER)
print(header)
for condition in BENIGN_CONDITIONS:
    entry = CONDITION_EFFECTS[condition]
    marks = [
        entry.direction[f].value if f in entry.affected else "-"
        for f in FEATURE_ORDER
    ]
    print(f"  {condition.value:<20}" + " ".join(f"{m:>7}" for m in marks))

print("\nEvery condition disturbs a distinct feature set, which is what the")
print("classifiers exploit to tell conditions (and attacks) apart.")
