import json

import numpy as np
import pytest

from itgan.cli import main
from itgan.pipeline import (
    RunConfig,
    StageError,
    config_hash,
    dataset_hash,
    run_pipeline,
    strip_timing,
)


def small_config(out_dir, **kw):
    base = dict(
        gen_users=20,
        gen_days=30,
        seed=5,
        augmentations=("real",),
        models=("rf",),
        out_dir=str(out_dir),
        rf_trees=10,
        cgan_epochs=5,
        nn_epochs=3,
        make_viz=False,
    )
    base.update(kw)
    return RunConfig(**base)


class TestRunConfig:
    def test_unknown_augmentation_rejected(self):
        with pytest.raises(ValueError, match="augmentation"):
            RunConfig(augmentations=("bogus",)).validate()

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError, match="model"):
            RunConfig(models=("svm",)).validate()

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError, match="mode"):
            RunConfig(mode="triple").validate()

    def test_config_hash_sensitivity(self):
        a = RunConfig(seed=1)
        b = RunConfig(seed=2)
        assert config_hash(a) != config_hash(b)
        assert config_hash(a) == config_hash(RunConfig(seed=1))


class TestDatasetHash:
    def test_sensitive_to_values_and_labels(self):
        from itgan.dataset import Dataset

        x = np.random.default_rng(0).random((5, 3))
        y = np.array([0, 1, 0, 1, 0])
        base = dataset_hash(Dataset(x, y))
        assert dataset_hash(Dataset(x + 1e-12, y)) != base
        assert dataset_hash(Dataset(x, 1 - y)) != base
        assert dataset_hash(Dataset(x.copy(), y.copy())) == base


class TestRunPipeline:
    def test_single_cell_report_shape(self, tmp_path):
        report = run_pipeline(small_config(tmp_path / "run"))
        assert len(report["cells"]) == 1
        cell = report["cells"][0]
        assert cell["mode"] == "multiclass"
        assert cell["augmentation"] == "real"
        assert cell["model"] == "rf"
        assert set(cell["metrics"]) >= {
            "precision_macro", "recall_macro", "f1_macro", "kappa", "mcc",
        }
        assert cell["test_hash"] == report["test_hash"]
        assert (tmp_path / "run" / "report.json").exists()
        assert (tmp_path / "run" / "report.md").exists()

    def test_determinism_modulo_timing(self, tmp_path):
        a = run_pipeline(small_config(tmp_path / "a"))
        b = run_pipeline(small_config(tmp_path / "b"))
        sa, sb = strip_timing(a), strip_timing(b)
        sa["config"]["out_dir"] = sb["config"]["out_dir"] = ""
        sa["config_hash"] = sb["config_hash"] = ""
        assert sa == sb

    def test_test_hash_constant_across_cells(self, tmp_path):
        config = small_config(tmp_path / "run", augmentations=("real", "ros"), models=("rf", "mlp"))
        report = run_pipeline(config)
        hashes = {cell["test_hash"] for cell in report["cells"]}
        assert len(hashes) == 1
        assert len(report["cells"]) == 4

    def test_binary_mode_tasks(self, tmp_path):
        config = small_config(tmp_path / "run", mode="binary")
        report = run_pipeline(config)
        modes = {cell["mode"] for cell in report["cells"]}
        assert modes == {"binary-S1", "binary-S2", "binary-S3"}
        for cell in report["cells"]:
            assert np.asarray(cell["confusion"]).shape == (2, 2)

    def test_cgan_cell_and_viz_bundle(self, tmp_path):
        config = small_config(
            tmp_path / "run", augmentations=("cgan",), make_viz=True, viz_max_points=60
        )
        report = run_pipeline(config)
        assert report["cells"][0]["augmentation"] == "cgan"
        viz_dir = tmp_path / "run" / "viz"
        for name in ("kde_L1.svg", "kde_L5.svg", "pca.svg", "tsne.svg"):
            assert (viz_dir / name).exists()
            assert (viz_dir / name).with_suffix(".csv").exists()

    def test_stage_error_carries_cell_identity(self, tmp_path):
        config = small_config(tmp_path / "run", corpus_dir=str(tmp_path / "missing"))
        with pytest.raises(StageError) as exc:
            run_pipeline(config)
        assert exc.value.stage == "ingest"

    def test_strip_timing_removes_only_seconds(self, tmp_path):
        report = run_pipeline(small_config(tmp_path / "run"))
        stripped = strip_timing(report)
        assert "seconds" not in stripped["cells"][0]
        assert "seconds" in report["cells"][0]
        assert stripped["config_hash"] == report["config_hash"]


class TestCli:
    def test_gen_featurize_split_eval_chain(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        feats = tmp_path / "features.csv"
        splits = tmp_path / "splits"
        model = tmp_path / "rf.itnn"
        out = tmp_path / "eval.json"
        assert main(["gen-corpus", "--users", "25", "--days", "40", "--seed", "3",
                     "--out", str(corpus)]) == 0
        assert main(["featurize", "--corpus", str(corpus), "--out", str(feats)]) == 0
        assert main(["split", "--features", str(feats), "--out-dir", str(splits)]) == 0
        assert main(["train", "--train", str(splits / "train.csv"), "--model", "rf",
                     "--trees", "10", "--out", str(model)]) == 0
        assert main(["eval", "--model", str(model), "--test", str(splits / "test.csv"),
                     "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["model"] == "rf"
        assert "kappa" in report["metrics"]

    def test_augment_smote(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        feats = tmp_path / "features.csv"
        splits = tmp_path / "splits"
        out = tmp_path / "augmented.csv"
        main(["gen-corpus", "--users", "25", "--days", "40", "--seed", "3", "--out", str(corpus)])
        main(["featurize", "--corpus", str(corpus), "--out", str(feats)])
        main(["split", "--features", str(feats), "--out-dir", str(splits)])
        assert main(["augment", "--train", str(splits / "train.csv"), "--method", "smote",
                     "--out", str(out)]) == 0
        assert out.exists()

    def test_pipeline_toml_with_flag_override(self, tmp_path, capsys):
        toml = tmp_path / "run.toml"
        toml.write_text(
            "gen_users = 25\n"
            "gen_days = 40\n"
            "seed = 4\n"
            'augmentations = ["real"]\n'
            'models = ["rf"]\n'
            "rf_trees = 10\n"
            "make_viz = false\n"
            f'out_dir = "{tmp_path / "from-toml"}"\n'
        )
        override = tmp_path / "from-flag"
        assert main(["pipeline", "--config", str(toml), "--out-dir", str(override)]) == 0
        assert (override / "report.json").exists()
        report = json.loads((override / "report.json").read_text())
        assert report["config"]["gen_users"] == 25
        assert report["config"]["seed"] == 4

    def test_pipeline_unknown_toml_key_rejected(self, tmp_path):
        toml = tmp_path / "bad.toml"
        toml.write_text("nonsense = 1\n")
        with pytest.raises(SystemExit, match="unknown config keys"):
            main(["pipeline", "--config", str(toml)])

    def test_missing_input_returns_error_code(self, tmp_path, capsys):
        code = main(["featurize", "--corpus", str(tmp_path / "nope"), "--out",
                     str(tmp_path / "x.csv")])
        assert code == 1
        assert "error:" in capsys.readouterr().err
