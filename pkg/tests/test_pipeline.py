"""Collection, per-minute resampling, merge, split, and the CSV schema."""

import hashlib

import numpy as np
import pytest

from healthguard.domain import (
    DEVICE_FEATURES,
    DEVICE_ORDER,
    FEATURE_ORDER,
    ConditionLabel,
    DeviceKind,
    FeatureKind,
    nominal_range,
)
from healthguard.errors import DataIntegrityError, StratificationError
from healthguard.pipeline import (
    CSV_COLUMNS,
    LabeledDataset,
    N_FEATURES,
    assemble_dataset,
    collect,
    merge,
    read_dataset_csv,
    read_dataset_rows,
    resample_per_minute,
    split,
    split_literal,
    write_dataset_csv,
)
from healthguard.simulator import (
    AttackConfig,
    DeviceSeries,
    ScenarioConfig,
    build_dataset,
    cycled_segments,
    generate_benign,
)


def _series(device, t_seconds, values):
    return DeviceSeries(
        device,
        np.asarray(t_seconds, dtype=np.int64),
        np.asarray(values, dtype=np.float64),
    )


def _toy_dataset(n=100, n_classes=4, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 20))
    labels = np.arange(n) % n_classes
    return LabeledDataset(
        minutes=np.arange(n, dtype=np.int64),
        X=X,
        label_codes=labels.astype(np.int16),
        device_mask=DEVICE_ORDER,
    )


class TestCollect:
    def test_grouping_conserves_readings(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.WALKING, 3),), seed=1)
        stream = generate_benign(cfg)
        collected = collect(stream)
        total_in = sum(len(s) for s in stream.series.values())
        total_out = sum(len(s) for s in collected.values())
        assert total_in == total_out

    def test_empty_device_is_not_an_error(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.WALKING, 3),), seed=1)
        stream = generate_benign(cfg)
        empty = DeviceKind.PULSE_OXIMETER
        stream.series[empty] = _series(empty, [], np.empty((0, 1)))
        collected = collect(stream)
        assert len(collected[empty]) == 0

    def test_out_of_order_rejected(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.WALKING, 3),), seed=1)
        stream = generate_benign(cfg)
        bad = DeviceKind.INSULIN_PUMP
        stream.series[bad] = _series(bad, [60, 0], [[100.0], [100.0]])
        with pytest.raises(DataIntegrityError):
            collect(stream)


class TestResample:
    def test_minute_mean(self):
        dev = DeviceKind.HEART_BP_MONITOR
        t = [0, 10, 20, 30, 40, 50]
        hr = [70.0, 72.0, 74.0, 76.0, 78.0, 80.0]
        values = [[h, 110.0, 70.0] for h in hr]
        out, avail = resample_per_minute(_series(dev, t, values), dev, 1)
        assert out[0, 0] == pytest.approx(75.0)
        assert avail[0] == 1.0

    def test_per_minute_cadence_is_identity(self):
        dev = DeviceKind.INSULIN_PUMP
        t = [0, 60, 120]
        values = [[100.0], [110.0], [120.0]]
        out, avail = resample_per_minute(_series(dev, t, values), dev, 3)
        assert np.array_equal(out[:, 0], [100.0, 110.0, 120.0])
        assert np.all(avail == 1.0)

    def test_gap_carries_forward_with_dead_flag(self):
        dev = DeviceKind.INSULIN_PUMP
        out, avail = resample_per_minute(
            _series(dev, [0, 120], [[100.0], [120.0]]), dev, 3
        )
        assert np.array_equal(avail, [1.0, 0.0, 1.0])
        assert out[1, 0] == 100.0  # previous minute's value

    def test_leading_gap_uses_nominal_midpoint(self):
        dev = DeviceKind.INSULIN_PUMP
        out, avail = resample_per_minute(_series(dev, [120], [[111.0]]), dev, 3)
        mid = nominal_range(FeatureKind.GLUCOSE).midpoint
        assert np.array_equal(out[:, 0], [mid, mid, 111.0])
        assert np.array_equal(avail, [0.0, 0.0, 1.0])

    def test_sleep_state_takes_majority_code(self):
        dev = DeviceKind.SLEEP_MOTION_WATCH
        t = [0, 30]
        values = [[1.0, 0.5], [2.0, 0.5]]
        out, _ = resample_per_minute(_series(dev, t, values), dev, 1)
        # 1 vs 2 split: tie resolves to the lower code
        assert out[0, 0] == 1.0
        t = [0, 30, 60, 90, 120, 150]
        values = [[2.0, 0.5]] * 4 + [[1.0, 0.5]] * 2
        out, _ = resample_per_minute(_series(dev, t, values), dev, 3)
        assert out[0, 0] == 2.0 and out[1, 0] == 2.0


class TestMerge:
    def _maps(self, stream, minutes):
        return {
            d: resample_per_minute(s, d, minutes) for d, s in collect(stream).items()
        }

    def test_shape_and_projection(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.STRESS, 7),), seed=2)
        stream = generate_benign(cfg)
        maps = self._maps(stream, 7)
        X = merge(maps, DEVICE_ORDER)
        assert X.shape == (7, 20)
        for device in DEVICE_ORDER:
            cols = [FEATURE_ORDER.index(f) for f in DEVICE_FEATURES[device]]
            assert np.array_equal(X[:, cols], maps[device][0])

    def test_masked_device_is_constant_midpoint_with_live_flag(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.STRESS, 5),), seed=2)
        stream = generate_benign(cfg)
        maps = self._maps(stream, 5)
        mask = tuple(d for d in DEVICE_ORDER if d is not DeviceKind.HEMOGLOBIN_METER)
        X = merge(maps, mask)
        hgb = FEATURE_ORDER.index(FeatureKind.HEMOGLOBIN)
        assert np.all(X[:, hgb] == nominal_range(FeatureKind.HEMOGLOBIN).midpoint)
        avail_col = N_FEATURES + DEVICE_ORDER.index(DeviceKind.HEMOGLOBIN_METER)
        assert np.all(X[:, avail_col] == 1.0)

    def test_device_iteration_order_does_not_matter(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.STRESS, 5),), seed=2)
        stream = generate_benign(cfg)
        maps = self._maps(stream, 5)
        reversed_maps = dict(reversed(list(maps.items())))
        assert np.array_equal(merge(maps, DEVICE_ORDER), merge(reversed_maps, DEVICE_ORDER))

    def test_span_mismatch_rejected(self):
        cfg = ScenarioConfig(segments=((ConditionLabel.STRESS, 5),), seed=2)
        stream = generate_benign(cfg)
        maps = self._maps(stream, 5)
        vals, avail = maps[DeviceKind.INSULIN_PUMP]
        maps[DeviceKind.INSULIN_PUMP] = (vals[:3], avail[:3])
        with pytest.raises(DataIntegrityError):
            merge(maps, DEVICE_ORDER)


class TestSplit:
    def test_fraction_and_conservation(self):
        ds = _toy_dataset(n=1000, n_classes=5)
        train, test = split(ds, 0.7, seed=3)
        assert len(train) + len(test) == 1000
        assert abs(len(train) - 700) <= 5
        train_counts = train.class_counts()
        test_counts = test.class_counts()
        for condition, total in ds.class_counts().items():
            assert train_counts[condition] + test_counts[condition] == total
            if total:
                assert abs(train_counts[condition] - 0.7 * total) <= 1.0

    def test_partition_is_disjoint(self):
        ds = _toy_dataset(n=300, n_classes=3)
        train, test = split(ds, 0.5, seed=1)
        seen = np.concatenate([train.minutes, test.minutes])
        assert np.unique(seen).size == 300

    def test_deterministic(self):
        ds = _toy_dataset(n=200)
        a = split(ds, 0.7, seed=9)
        b = split(ds, 0.7, seed=9)
        assert np.array_equal(a[0].minutes, b[0].minutes)
        assert np.array_equal(a[1].minutes, b[1].minutes)

    def test_small_class_rejected(self):
        ds = _toy_dataset(n=10, n_classes=2)
        ds.label_codes[:] = 0
        ds.label_codes[0] = 1
        with pytest.raises(StratificationError):
            split(ds, 0.7, seed=0)

    def test_bad_fraction_rejected(self):
        ds = _toy_dataset()
        with pytest.raises(ValueError):
            split(ds, 1.0, seed=0)

    def test_literal_split_holds_out_all_attacks(self):
        ds = _toy_dataset(n=300, n_classes=3)
        ds.label_codes[::3] = 14  # a malicious class code
        train, test = split_literal(ds, 0.7, seed=2)
        assert not any(c >= 12 for c in train.label_codes)
        assert (test.label_codes == 14).sum() == (ds.label_codes == 14).sum()


class TestCsvSchema:
    def test_round_trip_and_hash_stability(self, tmp_path):
        cfg = ScenarioConfig(segments=cycled_segments(60, 10), seed=17)
        ds = build_dataset(cfg, AttackConfig(rate_per_hour=8.0, seed=18))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_dataset_csv(ds, p1)
        write_dataset_csv(ds, p2)
        h1 = hashlib.sha256(p1.read_bytes()).hexdigest()
        assert h1 == hashlib.sha256(p2.read_bytes()).hexdigest()

        loaded = read_dataset_csv(p1)
        assert np.array_equal(loaded.label_codes, ds.label_codes)
        assert np.array_equal(loaded.minutes, ds.minutes)
        # values round to 6 decimals in the file
        assert np.allclose(loaded.X, ds.X, atol=5e-7)

    def test_header_is_schema(self, tmp_path):
        ds = _toy_dataset(n=3)
        p = tmp_path / "d.csv"
        write_dataset_csv(ds, p)
        header = p.read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)
        assert header.split(",")[0] == "minute"
        assert header.split(",")[-1] == "label"

    def test_schema_mismatch_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("minute,heart_rate\n0,70\n")
        with pytest.raises(DataIntegrityError):
            read_dataset_rows(p)

    def test_empty_file_reads_as_zero_rows(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text(",".join(CSV_COLUMNS) + "\n")
        minutes, X, codes = read_dataset_rows(p)
        assert X.shape == (0, 20)
        assert minutes.size == 0 and codes.size == 0


class TestAssemble:
    def test_dataset_matches_ground_truth(self):
        cfg = ScenarioConfig(segments=cycled_segments(30, 10), seed=4)
        stream = generate_benign(cfg)
        ds = assemble_dataset(stream)
        assert len(ds) == 30
        assert np.array_equal(ds.label_codes, stream.ground_truth)
        assert ds.device_mask == tuple(stream.series)

    def test_merge_mask_must_exist(self):
        cfg = ScenarioConfig(
            segments=((ConditionLabel.STRESS, 5),),
            enabled_devices=(DeviceKind.HEART_BP_MONITOR,),
        )
        stream = generate_benign(cfg)
        with pytest.raises(DataIntegrityError):
            assemble_dataset(stream, merge_mask=(DeviceKind.INSULIN_PUMP,))
