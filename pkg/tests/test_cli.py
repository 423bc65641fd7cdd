"""Command-line interface: flags, outputs, and exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

from wavefuse.cli import main
from wavefuse.errors import NumericError
from wavefuse.imgio import load_image, save_image


@pytest.fixture()
def pair(tmp_path):
    rng = np.random.default_rng(7)
    t_path = tmp_path / "t.pgm"
    v_path = tmp_path / "v.pgm"
    save_image(rng.random((32, 32)), t_path)
    save_image(rng.random((32, 32)), v_path)
    return t_path, v_path


class TestUsageErrors:
    def test_no_arguments(self, capsys):
        assert main([]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["transmogrify"]) == 1

    def test_missing_required_flag(self, capsys):
        assert main(["decompose", "--out", "x"]) == 1
        assert "--input" in capsys.readouterr().err

    def test_bad_choice_value(self, capsys):
        assert main(["fuse", "--thermal", "a", "--visual", "b", "--out", "c",
                     "--wavelet", "sym4"]) == 1

    def test_non_integer_levels(self, capsys):
        assert main(["decompose", "--input", "a", "--out", "b",
                     "--levels", "two"]) == 1


class TestDecompose:
    def test_exports_tree(self, pair, tmp_path, capsys):
        t_path, _ = pair
        out = tmp_path / "tree"
        assert main(["decompose", "--input", str(t_path), "--wavelet", "haar",
                     "--levels", "3", "--out", str(out)]) == 0
        meta = json.loads((out / "tree.json").read_text())
        assert meta["wavelet"] == "haar"
        assert meta["levels"] == 3
        assert (out / "L3_cA.f64").exists()
        assert (out / "L1_cH.f64").exists()
        assert "3 levels" in capsys.readouterr().out

    def test_missing_input_is_data_error(self, tmp_path, capsys):
        assert main(["decompose", "--input", str(tmp_path / "nope.pgm"),
                     "--out", str(tmp_path / "tree")]) == 2

    def test_bad_levels_value_is_data_error(self, pair, tmp_path, capsys):
        t_path, _ = pair
        assert main(["decompose", "--input", str(t_path), "--levels", "0",
                     "--out", str(tmp_path / "tree")]) == 2


class TestFuse:
    def test_writes_fused_image(self, pair, tmp_path, capsys):
        t_path, v_path = pair
        out = tmp_path / "fused.pgm"
        assert main(["fuse", "--thermal", str(t_path), "--visual", str(v_path),
                     "--out", str(out)]) == 0
        assert load_image(out).shape == (32, 32)

    def test_self_fusion_preserves_image(self, pair, tmp_path):
        t_path, _ = pair
        out = tmp_path / "fused.pgm"
        assert main(["fuse", "--thermal", str(t_path), "--visual", str(t_path),
                     "--wavelet", "haar", "--levels", "2", "--out", str(out)]) == 0
        # quantization to 8 bits is the only loss in the round trip
        np.testing.assert_allclose(load_image(out), load_image(t_path), atol=1 / 255)

    def test_rule_flags_accepted(self, pair, tmp_path):
        t_path, v_path = pair
        out = tmp_path / "fused.pgm"
        assert main(["fuse", "--thermal", str(t_path), "--visual", str(v_path),
                     "--approx-rule", "average", "--detail-rule", "maxabs",
                     "--out", str(out)]) == 0

    def test_mismatched_dims_is_data_error(self, pair, tmp_path, capsys):
        t_path, _ = pair
        small = tmp_path / "small.pgm"
        save_image(np.zeros((16, 16)), small)
        assert main(["fuse", "--thermal", str(t_path), "--visual", str(small),
                     "--out", str(tmp_path / "f.pgm")]) == 2
        assert "error" in capsys.readouterr().err


class TestSynth:
    def test_writes_dataset(self, tmp_path, capsys):
        out = tmp_path / "data"
        assert main(["synth", "--classes", "3", "--per-class", "2",
                     "--rows", "16", "--cols", "16", "--out", str(out)]) == 0
        assert len(list(out.glob("*/*.pgm"))) == 12
        assert "12 images" in capsys.readouterr().out

    def test_bad_count_is_data_error(self, tmp_path, capsys):
        assert main(["synth", "--classes", "0", "--out", str(tmp_path / "d")]) == 2


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "data"
    assert main(["synth", "--classes", "3", "--per-class", "4",
                 "--rows", "16", "--cols", "16", "--seed", "2",
                 "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def model_path(dataset):
    path = dataset.parent / "model.json"
    code = main(["train", "--data", str(dataset), "--levels", "3",
                 "--hidden", "16", "--epochs", "300", "--model", str(path)])
    assert code == 0
    return path


class TestTrainEvaluate:
    def test_train_writes_model_and_summary(self, model_path, capsys):
        doc = json.loads(model_path.read_text())
        assert doc["format_version"] == 1
        assert len(doc["class_labels"]) == 3

    def test_evaluate_writes_report(self, dataset, model_path, capsys):
        report = dataset.parent / "report.json"
        assert main(["evaluate", "--data", str(dataset), "--model", str(model_path),
                     "--report", str(report)]) == 0
        doc = json.loads(report.read_text())
        assert doc["modality"] == "fused"
        assert doc["overall"]["tested"] == 6
        out = capsys.readouterr().out
        assert "overall" in out

    def test_evaluate_alternate_modality(self, dataset, model_path, tmp_path):
        report = tmp_path / "r.json"
        assert main(["evaluate", "--data", str(dataset), "--model", str(model_path),
                     "--report", str(report), "--modality", "thermal"]) == 0
        assert json.loads(report.read_text())["modality"] == "thermal"

    def test_missing_model_file_is_data_error(self, dataset, tmp_path, capsys):
        assert main(["evaluate", "--data", str(dataset),
                     "--model", str(tmp_path / "missing.json"),
                     "--report", str(tmp_path / "r.json")]) == 2

    def test_bad_split_fraction_is_data_error(self, dataset, tmp_path, capsys):
        assert main(["train", "--data", str(dataset), "--split", "1.0",
                     "--model", str(tmp_path / "m.json")]) == 2

    def test_unpaired_file_warns_on_stderr(self, tmp_path, capsys):
        out = tmp_path / "data"
        assert main(["synth", "--classes", "2", "--per-class", "4",
                     "--rows", "16", "--cols", "16", "--out", str(out)]) == 0
        (out / "class00" / "99_thermal.pgm").write_bytes(
            (out / "class00" / "00_thermal.pgm").read_bytes()
        )
        capsys.readouterr()
        code = main(["train", "--data", str(out), "--levels", "3", "--hidden", "8",
                     "--epochs", "50", "--model", str(tmp_path / "m.json")])
        assert code == 0
        assert "99_thermal.pgm" in capsys.readouterr().err


class TestExitCodeMapping:
    def test_numeric_error_maps_to_3(self, monkeypatch, tmp_path, capsys):
        import wavefuse.cli as cli

        def explode(*args, **kwargs):
            raise NumericError("training diverged: non-finite loss or parameters at epoch 1")

        monkeypatch.setattr(cli, "train_pipeline", explode)
        out = tmp_path / "data"
        assert main(["synth", "--classes", "2", "--per-class", "2",
                     "--rows", "16", "--cols", "16", "--out", str(out)]) == 0
        code = main(["train", "--data", str(out), "--model", str(tmp_path / "m.json")])
        assert code == 3
        assert "numeric failure" in capsys.readouterr().err


class TestEntryPoints:
    def test_module_invocation_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "wavefuse", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        for name in ("decompose", "fuse", "synth", "train", "evaluate"):
            assert name in proc.stdout

    def test_console_script_installed(self):
        proc = subprocess.run(["wavefuse", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "wavefuse" in proc.stdout
