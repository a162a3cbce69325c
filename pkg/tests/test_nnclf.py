import numpy as np
import pytest

from itgan.dataset import Dataset
from itgan.nnclf import (
    CNNParams,
    MLPParams,
    load_nn,
    predict_nn,
    predict_proba,
    save_nn,
    train_cnn1d,
    train_mlp,
)


def blobs(counts=(40, 20, 20, 20), seed=0, n_features=20, spread=0.04):
    rng = np.random.default_rng(seed)
    y = np.concatenate([np.full(c, i) for i, c in enumerate(counts)])
    centers = np.linspace(0.15, 0.85, 4)
    x = np.clip(centers[y, None] + rng.normal(0, spread, (len(y), n_features)), 0, 1)
    return Dataset(x, y, role="Train")


class TestMLP:
    def test_fits_separable_blobs(self):
        ds = blobs()
        model = train_mlp(ds, MLPParams(epochs=60, lr=5e-3, seed=0))
        assert (predict_nn(model, ds.x) == ds.y).mean() >= 0.98

    def test_probabilities_sum_to_one(self):
        ds = blobs()
        model = train_mlp(ds, MLPParams(epochs=5))
        probs = predict_proba(model, ds.x)
        assert probs.shape == (len(ds), 4)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_loss_curve_recorded_and_decreasing_overall(self):
        ds = blobs()
        model = train_mlp(ds, MLPParams(epochs=30))
        assert len(model.train_loss) == 30
        assert model.train_loss[-1] < model.train_loss[0]

    def test_determinism(self):
        ds = blobs()
        a = train_mlp(ds, MLPParams(epochs=3, seed=5))
        b = train_mlp(ds, MLPParams(epochs=3, seed=5))
        assert np.array_equal(predict_proba(a, ds.x), predict_proba(b, ds.x))
        assert a.train_loss == b.train_loss

    def test_empty_rejected(self):
        ds = Dataset(np.zeros((0, 20)), np.zeros(0, dtype=int))
        with pytest.raises(ValueError):
            train_mlp(ds)

    def test_binary_mode(self):
        ds = blobs(counts=(30, 30, 0, 0))
        model = train_mlp(ds, MLPParams(epochs=5), n_classes=2)
        assert predict_proba(model, ds.x).shape[1] == 2

    def test_prediction_batch_size_invariance(self):
        ds = blobs()
        model = train_mlp(ds, MLPParams(epochs=5))
        full = predict_proba(model, ds.x)
        rows = np.concatenate([predict_proba(model, ds.x[i : i + 7]) for i in range(0, len(ds), 7)])
        assert np.allclose(full, rows, atol=1e-10)


class TestCNN:
    def test_fits_separable_blobs(self):
        ds = blobs()
        model = train_cnn1d(ds, CNNParams(epochs=40, seed=0))
        assert (predict_nn(model, ds.x) == ds.y).mean() >= 0.98

    def test_probabilities_sum_to_one(self):
        ds = blobs()
        model = train_cnn1d(ds, CNNParams(epochs=3))
        probs = predict_proba(model, ds.x)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_architecture_shapes(self):
        ds = blobs()
        model = train_cnn1d(ds, CNNParams(epochs=1))
        spec = model.net.spec
        # 20 -> conv same 20 -> pool 10 -> conv same 10x32 -> flatten 320
        assert spec.input_shape == (20, 1)
        from itgan.nncore import Flatten, NetworkSpec

        flatten_idx = next(i for i, d in enumerate(spec.layers) if isinstance(d, Flatten))
        truncated = NetworkSpec(spec.layers[: flatten_idx + 1], spec.input_shape)
        assert truncated.output_shape == (320,)

    def test_determinism(self):
        ds = blobs()
        a = train_cnn1d(ds, CNNParams(epochs=2, seed=9))
        b = train_cnn1d(ds, CNNParams(epochs=2, seed=9))
        assert np.array_equal(predict_proba(a, ds.x), predict_proba(b, ds.x))

    def test_prediction_batch_size_invariance(self):
        ds = blobs()
        model = train_cnn1d(ds, CNNParams(epochs=2))
        full = predict_proba(model, ds.x)
        rows = np.concatenate([predict_proba(model, ds.x[i : i + 9]) for i in range(0, len(ds), 9)])
        assert np.allclose(full, rows, atol=1e-10)


class TestPersistence:
    def test_mlp_round_trip(self, tmp_path):
        ds = blobs()
        model = train_mlp(ds, MLPParams(epochs=3, seed=2))
        path = tmp_path / "mlp.itnn"
        save_nn(model, path)
        back = load_nn(path)
        assert back.kind == "mlp"
        assert back.train_loss == model.train_loss
        assert np.array_equal(predict_proba(model, ds.x), predict_proba(back, ds.x))

    def test_cnn_round_trip(self, tmp_path):
        ds = blobs()
        model = train_cnn1d(ds, CNNParams(epochs=2, seed=2))
        path = tmp_path / "cnn.itnn"
        save_nn(model, path)
        back = load_nn(path)
        assert back.kind == "cnn1d"
        assert np.array_equal(predict_proba(model, ds.x), predict_proba(back, ds.x))
