import numpy as np
import pytest

from itgan.dataset import Dataset
from itgan.resample import ros, smote


def make_train(class_counts=(50, 8, 6, 4), seed=0, n_features=5):
    rng = np.random.default_rng(seed)
    y = np.concatenate([np.full(c, i) for i, c in enumerate(class_counts)])
    x = rng.random((len(y), n_features))
    return Dataset(x, y, role="Train")


def row_set(x):
    return {tuple(r) for r in x}


class TestRos:
    def test_equalizes_to_majority_by_default(self):
        out = ros(make_train())
        assert list(out.class_counts(4)) == [50, 50, 50, 50]

    def test_appended_rows_are_duplicates(self):
        train = make_train()
        out = ros(train)
        assert np.array_equal(out.x[: len(train)], train.x)
        assert row_set(out.x[len(train):]) <= row_set(train.x)

    def test_appended_labels_match_source_rows(self):
        train = make_train()
        out = ros(train)
        lookup = {tuple(r): int(c) for r, c in zip(train.x, train.y)}
        for r, c in zip(out.x[len(train):], out.y[len(train):]):
            assert lookup[tuple(r)] == int(c)

    def test_explicit_policy(self):
        out = ros(make_train(), policy={1: 20})
        assert list(out.class_counts(4)) == [50, 20, 6, 4]

    def test_target_below_count_is_noop(self):
        train = make_train()
        out = ros(train, policy={1: 3})
        assert len(out) == len(train)

    def test_empty_target_class_rejected(self):
        train = make_train(class_counts=(10, 5, 0, 0))
        with pytest.raises(ValueError, match="empty"):
            ros(train, policy={2: 5})

    def test_determinism(self):
        train = make_train()
        a, b = ros(train, seed=4), ros(train, seed=4)
        assert np.array_equal(a.x, b.x)
        assert not np.array_equal(ros(train, seed=5).x, a.x)


class TestSmote:
    def test_equalizes_to_majority_by_default(self):
        out = smote(make_train())
        assert list(out.class_counts(4)) == [50, 50, 50, 50]

    def test_two_point_class_interpolates_on_segment(self):
        # class 1 has exactly rows (0,0) and (1,2): synthetics lie on the segment
        x = np.vstack([np.random.default_rng(0).random((6, 2)) + 5.0,
                       [[0.0, 0.0], [1.0, 2.0]]])
        y = np.array([0] * 6 + [1, 1])
        out = smote(Dataset(x, y, role="Train"), seed=1)
        synth = out.x[out.y == 1][2:]
        assert len(synth) == 4
        for p in synth:
            # p = a + lam (b - a): second coordinate must be 2x the first
            assert p[1] == pytest.approx(2.0 * p[0], abs=1e-9)
            assert -1e-9 <= p[0] <= 1.0 + 1e-9

    def test_midpoint_reachable_hand_value(self):
        # lam = 0.5 between (0,0) and (1,2) gives (0.5, 1.0); verify algebra directly
        a, b = np.array([0.0, 0.0]), np.array([1.0, 2.0])
        lam = 0.5
        assert list(a + lam * (b - a)) == [0.5, 1.0]

    def test_synthetics_stay_in_class_bounding_box(self):
        train = make_train(class_counts=(40, 12, 0, 0), seed=3)
        out = smote(train, seed=2)
        rows = train.x[train.y == 1]
        lo, hi = rows.min(axis=0), rows.max(axis=0)
        synth = out.x[len(train):]
        assert np.all(synth >= lo - 1e-9)
        assert np.all(synth <= hi + 1e-9)

    def test_singleton_class_falls_back_to_duplication(self):
        x = np.vstack([np.zeros((5, 3)), [[7.0, 8.0, 9.0]]])
        y = np.array([0] * 5 + [1])
        out = smote(Dataset(x, y, role="Train"), seed=0)
        synth = out.x[len(y):]
        assert len(synth) == 4
        assert np.all(synth == [7.0, 8.0, 9.0])

    def test_k_larger_than_class_is_clamped(self):
        out = smote(make_train(class_counts=(30, 3, 0, 0)), k=10)
        assert list(out.class_counts(4))[:2] == [30, 30]

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError):
            smote(make_train(), k=0)

    def test_determinism(self):
        train = make_train()
        a, b = smote(train, seed=4), smote(train, seed=4)
        assert np.array_equal(a.x, b.x)


def test_original_rows_always_prefix():
    train = make_train()
    for fn in (ros, smote):
        out = fn(train)
        assert np.array_equal(out.x[: len(train)], train.x)
        assert np.array_equal(out.y[: len(train)], train.y)
        assert out.role == "Augment"
