"""Benign generation, Poisson onsets, and attack injection."""

import dataclasses
import math

import numpy as np
import pytest

from healthguard.domain import (
    BENIGN_CONDITIONS,
    CONDITION_INDEX,
    DEVICE_FEATURES,
    DEVICE_ORDER,
    FEATURE_ORDER,
    NOMINAL_RANGES,
    ConditionLabel,
    DeviceKind,
    FeatureKind,
    affected_features,
    in_nominal,
    nominal_range,
)
from healthguard.errors import ConfigError
from healthguard.simulator import (
    AttackConfig,
    AttackEvent,
    DEVICE_PERIOD_S,
    ScenarioConfig,
    apply_events,
    cycled_segments,
    generate_benign,
    inject_attacks,
    load_config,
    sample_attack_onsets,
)

HR = FEATURE_ORDER.index(FeatureKind.HEART_RATE)


def _stream_fingerprint(stream):
    parts = [stream.ground_truth.tobytes()]
    for device in sorted(stream.series, key=lambda d: d.value):
        s = stream.series[device]
        parts.append(s.t_seconds.tobytes())
        parts.append(s.values.tobytes())
    return b"".join(parts)


def _feature_minute_means(stream, feature, minutes=None):
    device = next(d for d in DEVICE_ORDER if feature in DEVICE_FEATURES[d])
    series = stream.series[device]
    col = DEVICE_FEATURES[device].index(feature)
    sel = np.ones(len(series), dtype=bool)
    if minutes is not None:
        sel = np.isin(series.t_seconds // 60, minutes)
    return series.values[sel, col]


class TestScenarioConfig:
    def test_rejects_attack_segment(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(segments=((ConditionLabel.DENIAL_OF_SERVICE, 5),))

    def test_rejects_empty_devices(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(
                segments=((ConditionLabel.SLEEPING, 5),), enabled_devices=()
            )

    def test_minute_codes_lengths(self):
        cfg = ScenarioConfig(
            segments=((ConditionLabel.SLEEPING, 3), (ConditionLabel.WALKING, 2))
        )
        codes = cfg.minute_condition_codes()
        assert codes.tolist() == [0, 0, 0, 1, 1]


class TestGenerateBenign:
    def test_exercise_shifts_follow_directions(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.EXERCISE, 60),), seed=3)
        stream = generate_benign(cfg)
        hr = _feature_minute_means(stream, FeatureKind.HEART_RATE)
        assert hr.mean() > 100.0
        glucose = _feature_minute_means(stream, FeatureKind.GLUCOSE)
        assert glucose.mean() < nominal_range(FeatureKind.GLUCOSE).midpoint
        spo2 = _feature_minute_means(stream, FeatureKind.SPO2)
        assert spo2.mean() < nominal_range(FeatureKind.SPO2).midpoint
        sweat = _feature_minute_means(stream, FeatureKind.SWEAT_RATE)
        assert sweat.mean() > nominal_range(FeatureKind.SWEAT_RATE).hi
        # hemoglobin is not marked for exercise in the effect table
        hemoglobin = _feature_minute_means(stream, FeatureKind.HEMOGLOBIN)
        assert abs(hemoglobin.mean() - nominal_range(FeatureKind.HEMOGLOBIN).midpoint) < 0.5

    def test_zero_noise_pins_unaffected_features_at_midpoint(self):
        cfg = ScenarioConfig(
            segments=((ConditionLabel.SLEEPING, 10),), seed=5, noise_scale=0.0
        )
        stream = generate_benign(cfg)
        unaffected = set(FEATURE_ORDER) - affected_features(ConditionLabel.SLEEPING)
        for feature in unaffected:
            values = _feature_minute_means(stream, feature)
            assert np.all(values == nominal_range(feature).midpoint), feature

    def test_determinism(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.STRESS, 30),), seed=11)
        assert _stream_fingerprint(generate_benign(cfg)) == _stream_fingerprint(
            generate_benign(cfg)
        )

    def test_native_cadences(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.WALKING, 5),), seed=1)
        stream = generate_benign(cfg)
        for device, series in stream.series.items():
            assert len(series) == 5 * 60 // DEVICE_PERIOD_S[device]
            assert series.t_seconds[0] == 0
            if len(series) > 1:
                assert np.all(np.diff(series.t_seconds) == DEVICE_PERIOD_S[device])

    def test_hemoglobin_holds_measurements_for_five_minutes(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.SLEEPING, 10),), seed=2)
        stream = generate_benign(cfg)
        series = stream.series[DeviceKind.HEMOGLOBIN_METER]
        values = series.values[:, 0]
        for start in range(0, 10, 5):
            assert np.all(values[start : start + 5] == values[start])
        assert values[0] != values[5]  # fresh measurement on the next interval

    def test_sleep_state_is_integer_coded(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.WALKING, 20),), seed=4)
        stream = generate_benign(cfg)
        col = DEVICE_FEATURES[DeviceKind.SLEEP_MOTION_WATCH].index(FeatureKind.SLEEP_STATE)
        sleep = stream.series[DeviceKind.SLEEP_MOTION_WATCH].values[:, col]
        assert set(np.unique(sleep)) <= {0.0, 1.0, 2.0}

    def test_disabled_devices_are_absent(self):
        cfg = ScenarioConfig(
            segments=((ConditionLabel.STRESS, 5),),
            enabled_devices=(DeviceKind.HEART_BP_MONITOR, DeviceKind.INSULIN_PUMP),
        )
        stream = generate_benign(cfg)
        assert set(stream.series) == {
            DeviceKind.HEART_BP_MONITOR,
            DeviceKind.INSULIN_PUMP,
        }

    @pytest.mark.parametrize("condition", BENIGN_CONDITIONS)
    def test_benign_separability(self, condition):
        # Over 100+ minutes, at least one affected feature's mean must sit
        # outside its nominal range.
        cfg = ScenarioConfig(segments=((condition, 120),), seed=9, noise_scale=0.05)
        stream = generate_benign(cfg)
        outside = False
        for feature in affected_features(condition):
            mean = float(_feature_minute_means(stream, feature).mean())
            if not in_nominal(feature, mean):
                outside = True
                break
        assert outside, condition


class TestPoissonOnsets:
    def test_zero_rate_empty(self):
        assert sample_attack_onsets(0.0, 100, seed=1) == []

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            sample_attack_onsets(-1.0, 100, seed=1)

    def test_sorted_and_in_range(self):
        onsets = sample_attack_onsets(30.0, 200, seed=3)
        assert onsets == sorted(onsets)
        assert all(0 <= o < 200 for o in onsets)

    def test_mean_count_matches_intensity(self):
        # lambda * T = 2/hr * 10h = 20 expected events
        counts = [len(sample_attack_onsets(2.0, 600, seed=s)) for s in range(300)]
        tolerance = 3.0 * math.sqrt(20.0 / 300)
        assert abs(np.mean(counts) - 20.0) < tolerance

    def test_zero_count_probability_matches_poisson(self):
        # rate 60/hr over 1 minute: count ~ Poisson(1), P(0) = e^-1
        zeros = sum(
            1 for s in range(4000) if len(sample_attack_onsets(60.0, 1, seed=s)) == 0
        )
        assert abs(zeros / 4000 - math.exp(-1)) < 0.02


class TestInjectAttacks:
    def _benign(self, minutes=60, seed=21):
        cfg = ScenarioConfig(segments=cycled_segments(minutes, 10), seed=seed)
        return generate_benign(cfg)

    def test_zero_rate_is_identity(self):
        stream = self._benign()
        out = inject_attacks(stream, AttackConfig(rate_per_hour=0.0))
        assert out.events == []
        assert _stream_fingerprint(out) == _stream_fingerprint(stream)

    def test_input_stream_is_untouched(self):
        stream = self._benign()
        before = _stream_fingerprint(stream)
        inject_attacks(stream, AttackConfig(rate_per_hour=20.0, seed=5))
        assert _stream_fingerprint(stream) == before

    def test_rejects_attacked_stream(self):
        stream = self._benign()
        attacked = inject_attacks(stream, AttackConfig(rate_per_hour=20.0, seed=5))
        if not attacked.events:
            pytest.skip("no events sampled")
        with pytest.raises(ConfigError):
            inject_attacks(attacked, AttackConfig())

    def test_dos_silences_target_and_relabels(self):
        stream = self._benign()
        event = AttackEvent(
            ConditionLabel.DENIAL_OF_SERVICE, DeviceKind.PULSE_OXIMETER, 10, 5
        )
        out = apply_events(stream, [event], np.random.default_rng(0))
        series = out.series[DeviceKind.PULSE_OXIMETER]
        window = (series.t_seconds >= 600) & (series.t_seconds < 900)
        assert window.sum() == 0
        assert np.all(
            out.ground_truth[10:15] == CONDITION_INDEX[ConditionLabel.DENIAL_OF_SERVICE]
        )
        assert out.ground_truth[9] == stream.ground_truth[9]
        assert out.ground_truth[15] == stream.ground_truth[15]

    def test_dos_leaves_other_devices_bit_identical(self):
        stream = self._benign()
        event = AttackEvent(
            ConditionLabel.DENIAL_OF_SERVICE, DeviceKind.PULSE_OXIMETER, 10, 5
        )
        out = apply_events(stream, [event], np.random.default_rng(0))
        for device in stream.series:
            if device is DeviceKind.PULSE_OXIMETER:
                continue
            assert np.array_equal(
                out.series[device].values, stream.series[device].values
            )

    def test_tamper_forces_wake_and_freezes_motion(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.SLEEPING, 40),), seed=8)
        stream = generate_benign(cfg)
        event = AttackEvent(
            ConditionLabel.TAMPERED_DEVICE, DeviceKind.SLEEP_MOTION_WATCH, 10, 10
        )
        out = apply_events(stream, [event], np.random.default_rng(0))
        series = out.series[DeviceKind.SLEEP_MOTION_WATCH]
        feats = DEVICE_FEATURES[DeviceKind.SLEEP_MOTION_WATCH]
        window = (series.t_seconds >= 600) & (series.t_seconds < 1200)
        sleep = series.values[window, feats.index(FeatureKind.SLEEP_STATE)]
        motion = series.values[window, feats.index(FeatureKind.MOTION_LEVEL)]
        assert np.all(sleep == 0.0)
        assert np.unique(motion).size == 1  # frozen at the pre-window value

    def test_forgery_masks_true_condition(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.EXERCISE, 40),), seed=13)
        stream = generate_benign(cfg)
        event = AttackEvent(
            ConditionLabel.FALSE_DATA_INJECTION, DeviceKind.HEART_BP_MONITOR, 5, 20
        )
        out = apply_events(stream, [event], np.random.default_rng(1))
        hr_forged = _feature_minute_means(
            out, FeatureKind.HEART_RATE, minutes=np.arange(5, 25)
        )
        # exercise pushes heart rate above 100; forged values look healthy
        assert hr_forged.mean() < 100.0
        assert abs(hr_forged.mean() - NOMINAL_RANGES[FeatureKind.HEART_RATE].midpoint) < 5.0

    def test_relabeling_covers_exactly_the_union(self):
        stream = self._benign()
        events = [
            AttackEvent(ConditionLabel.DENIAL_OF_SERVICE, DeviceKind.INSULIN_PUMP, 5, 10),
            AttackEvent(ConditionLabel.FALSE_DATA_INJECTION, DeviceKind.PULSE_OXIMETER, 12, 6),
        ]
        out = apply_events(stream, events, np.random.default_rng(0))
        malicious = out.ground_truth >= 12
        expected = np.zeros(60, dtype=bool)
        expected[5:15] = True
        expected[12:18] = True
        assert np.array_equal(malicious, expected)
        # earliest onset wins the overlap
        assert np.all(
            out.ground_truth[12:15] == CONDITION_INDEX[ConditionLabel.DENIAL_OF_SERVICE]
        )
        assert np.all(
            out.ground_truth[15:18]
            == CONDITION_INDEX[ConditionLabel.FALSE_DATA_INJECTION]
        )

    def test_same_kind_overlaps_merge(self):
        stream = self._benign()
        events = [
            AttackEvent(ConditionLabel.DENIAL_OF_SERVICE, DeviceKind.INSULIN_PUMP, 5, 10),
            AttackEvent(ConditionLabel.DENIAL_OF_SERVICE, DeviceKind.INSULIN_PUMP, 10, 10),
        ]
        out = apply_events(stream, events, np.random.default_rng(0))
        assert len(out.events) == 1
        assert out.events[0].onset_minute == 5
        assert out.events[0].duration_minutes == 15

    def test_windows_truncate_at_horizon(self):
        stream = self._benign(minutes=30)
        config = AttackConfig(rate_per_hour=50.0, duration_min=5, duration_max=30, seed=3)
        out = inject_attacks(stream, config)
        assert all(e.end_minute <= 30 for e in out.events)

    def test_forgery_keeps_availability(self):
        stream = self._benign()
        event = AttackEvent(
            ConditionLabel.FALSE_DATA_INJECTION, DeviceKind.INSULIN_PUMP, 5, 10
        )
        out = apply_events(stream, [event], np.random.default_rng(0))
        assert len(out.series[DeviceKind.INSULIN_PUMP]) == len(
            stream.series[DeviceKind.INSULIN_PUMP]
        )

    def test_empty_threats_rejected(self):
        stream = self._benign()
        with pytest.raises(ConfigError):
            inject_attacks(stream, AttackConfig(enabled_threats=()))

    def test_tamper_target_override(self):
        stream = self._benign(minutes=600, seed=3)
        config = AttackConfig(
            rate_per_hour=10.0,
            enabled_threats=(ConditionLabel.TAMPERED_DEVICE,),
            tamper_target=DeviceKind.SLEEP_MOTION_WATCH,
            seed=4,
        )
        out = inject_attacks(stream, config)
        assert out.events
        assert all(e.target is DeviceKind.SLEEP_MOTION_WATCH for e in out.events)


class TestConfigFile:
    def test_default_config_file_matches_code_defaults(self, tmp_path):
        import healthguard.simulator as sim
        from pathlib import Path

        cfg_path = Path(__file__).resolve().parents[1] / "configs" / "default.cfg"
        scenario, attack = load_config(cfg_path)
        assert scenario == sim.default_scenario_config()
        assert attack == sim.default_attack_config()

    def test_unknown_key_reports_line_number(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("seed = 1\nbogus = 2\n")
        with pytest.raises(ConfigError, match="line 2"):
            load_config(p)

    def test_malformed_segment_reports_line_number(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("segments = sleeping\n")
        with pytest.raises(ConfigError, match="line 1"):
            load_config(p)

    def test_roundtrip_custom_values(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text(
            "segments = stress:7 drunk:3\n"
            "seed = 42\n"
            "devices = heart_bp_monitor, insulin_pump\n"
            "noise_scale = 0.1\n"
            "rate_per_hour = 2.5\n"
            "duration_min = 2\n"
            "duration_max = 4\n"
            "threats = denial_of_service\n"
        )
        scenario, attack = load_config(p)
        assert scenario.total_minutes == 10
        assert scenario.seed == 42
        assert scenario.enabled_devices == (
            DeviceKind.HEART_BP_MONITOR,
            DeviceKind.INSULIN_PUMP,
        )
        assert attack.rate_per_hour == 2.5
        assert attack.enabled_threats == (ConditionLabel.DENIAL_OF_SERVICE,)
        assert attack.seed == 43  # defaults to scenario seed + 1
