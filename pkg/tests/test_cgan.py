import numpy as np
import pytest

from itgan.cgan import (
    CganConfig,
    augment_dataset,
    build_cgan,
    generate,
    load_cgan,
    save_cgan,
    train_cgan,
)
from itgan.dataset import Dataset


def toy_config(**kw):
    base = dict(latent_dim=6, epochs=5, batch_size=16, embed_dim=4, seed=0)
    base.update(kw)
    return CganConfig(**base)


def toy_train(n_features=6, counts=(60, 12, 10, 8), seed=0):
    rng = np.random.default_rng(seed)
    y = np.concatenate([np.full(c, i) for i, c in enumerate(counts)])
    centers = np.linspace(0.2, 0.8, 4)[y, None]
    x = np.clip(centers + rng.normal(0, 0.05, size=(len(y), n_features)), 0, 1)
    return Dataset(x, y, role="Train")


class TestBuild:
    def test_generator_shape_chain(self):
        model = build_cgan(20, CganConfig())
        # input 20 latent + 8 embedding = 28 -> 32 -> 64 -> 20
        g = model.generator
        assert g.spec.input_shape == (28,)
        shapes = [layer.units for layer in g.spec.layers]
        assert shapes == [32, 64, 20]

    def test_discriminator_shape_chain(self):
        model = build_cgan(20, CganConfig())
        d = model.discriminator
        assert d.spec.input_shape == (28,)
        out = d.forward(np.zeros((3, 28)))
        assert out.shape == (3, 1) or out.shape == (3,)

    def test_embedding_shape(self):
        model = build_cgan(20, CganConfig(embed_dim=8))
        assert model.embedding.shape == (4, 8)

    def test_build_determinism(self):
        a = build_cgan(10, toy_config())
        b = build_cgan(10, toy_config())
        for pa, pb in zip(a.generator.parameters(), b.generator.parameters()):
            assert np.array_equal(pa, pb)
        assert np.array_equal(a.embedding, b.embedding)

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            build_cgan(10, toy_config(conditioned_classes=()))
        with pytest.raises(ValueError):
            build_cgan(0, toy_config())


class TestTrain:
    def test_unscaled_input_rejected(self):
        train = toy_train()
        bad = Dataset(train.x * 10.0, train.y, role="Train")
        with pytest.raises(ValueError, match="scaled"):
            train_cgan(bad, toy_config())

    def test_missing_conditioned_class_rejected(self):
        train = toy_train(counts=(30, 10, 8, 0))
        with pytest.raises(ValueError, match="absent"):
            train_cgan(train, toy_config())

    def test_history_length_and_finiteness(self):
        model = train_cgan(toy_train(), toy_config(epochs=3))
        assert len(model.history) == 3
        assert all(np.isfinite(d) and np.isfinite(g) for d, g in model.history)

    def test_training_determinism(self):
        train = toy_train()
        a = train_cgan(train, toy_config(epochs=2))
        b = train_cgan(train, toy_config(epochs=2))
        for pa, pb in zip(a.generator.parameters(), b.generator.parameters()):
            assert np.array_equal(pa, pb)
        assert a.history == b.history


@pytest.fixture(scope="module")
def model():
    return train_cgan(toy_train(), toy_config(epochs=3))


@pytest.fixture(scope="module")
def skew_model():
    return train_cgan(toy_train(counts=(900, 30, 50, 20)), toy_config(epochs=2))


class TestGenerate:
    def test_shape_labels_range(self, model):
        out = generate(model, 2, 25)
        assert out.x.shape == (25, 6)
        assert np.all(out.y == 2)
        assert out.role == "Synthetic"
        assert out.x.min() >= 0.0 and out.x.max() <= 1.0

    def test_unconditioned_class_rejected(self, model):
        with pytest.raises(ValueError, match="not conditioned"):
            generate(model, 0, 5)

    def test_bad_count_rejected(self, model):
        with pytest.raises(ValueError):
            generate(model, 1, 0)

    def test_determinism_and_seed_sensitivity(self, model):
        a = generate(model, 1, 10, seed=3)
        b = generate(model, 1, 10, seed=3)
        c = generate(model, 1, 10, seed=4)
        assert np.array_equal(a.x, b.x)
        assert not np.array_equal(a.x, c.x)

    def test_classes_use_distinct_streams(self, model):
        a = generate(model, 1, 10, seed=0)
        b = generate(model, 2, 10, seed=0)
        assert not np.array_equal(a.x, b.x)


class TestAugment:
    def test_default_policy_equalizes(self, skew_model):
        train = toy_train(counts=(900, 30, 50, 20))
        out = augment_dataset(train, skew_model)
        assert list(out.class_counts(4)) == [900, 900, 900, 900]

    def test_train_rows_verbatim_prefix(self, skew_model):
        train = toy_train(counts=(900, 30, 50, 20))
        out = augment_dataset(train, skew_model)
        assert np.array_equal(out.x[: len(train)], train.x)
        assert np.array_equal(out.y[: len(train)], train.y)
        assert out.role == "Augment"

    def test_explicit_policy_and_noop_target(self, skew_model):
        train = toy_train(counts=(900, 30, 50, 20))
        out = augment_dataset(train, skew_model, policy={1: 40, 2: 10})
        assert list(out.class_counts(4)) == [900, 40, 50, 20]


class TestSerialization:
    def test_round_trip(self, tmp_path):
        model = train_cgan(toy_train(), toy_config(epochs=2))
        path = tmp_path / "model.itnn"
        save_cgan(model, path)
        back = load_cgan(path)
        assert back.config == model.config
        assert back.history == model.history
        a = generate(model, 1, 8, seed=5)
        b = generate(back, 1, 8, seed=5)
        assert np.array_equal(a.x, b.x)

    def test_wrong_kind_rejected(self, tmp_path):
        from itgan.serialize import write_container

        path = tmp_path / "other.itnn"
        write_container(path, {"kind": "other"}, {})
        with pytest.raises(ValueError, match="cgan"):
            load_cgan(path)
