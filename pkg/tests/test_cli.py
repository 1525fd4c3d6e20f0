"""main.py 하위 명령과 종료 코드."""

import csv

import nbformat
import numpy as np
import pytest

import main
from data_generator import gen_blobs, gen_gaussian_pair, write_labeled_csv, write_paired_csv
from drn_trainer.checkpoint import load_checkpoint
from drn_trainer.gradcheck import BlockError, GradcheckReport
from errors import NumericError, TrainingDivergedError

SMALL_TRAIN_CONFIG = """\
# 작은 학습 설정
train.epochs = 2
train.warmup_epochs = 0
train.ramp_epochs = 0
train.batch_size = 8
train.hidden = 8
train.d_proj = 4
train.proj_hidden = 8
lsmi.sigma_s = median
lsmi.sigma_t = median
lsmi.delta = 0.01
data.n_train = 16
data.n_val = 8
"""


@pytest.fixture
def pairs_csv(tmp_path):
    path = tmp_path / "pairs.csv"
    write_paired_csv(path, *gen_gaussian_pair(60, 0.5, seed=0))
    return path


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_TRAIN_CONFIG, encoding="utf-8")
    return path


class TestEstimate:

    def test_lsmi_output(self, pairs_csv, capsys):
        assert main.main(["estimate", "--input", str(pairs_csv)]) == 0
        fields = capsys.readouterr().out.strip().split(",")
        assert fields[0] == "lsmi"
        assert fields[2:4] == ["60", "1"]
        assert all(fields[4:7])
        assert np.isfinite(float(fields[1]))

    @pytest.mark.parametrize("method", ["ksg", "kde"])
    def test_baselines_leave_hyperparameters_empty(self, pairs_csv, capsys, method):
        assert main.main(["estimate", "--input", str(pairs_csv), "--method", method]) == 0
        fields = capsys.readouterr().out.strip().split(",")
        assert fields[0] == method
        assert fields[4:] == ["", "", ""]

    def test_deterministic(self, pairs_csv, capsys):
        main.main(["estimate", "--input", str(pairs_csv)])
        first = capsys.readouterr().out
        main.main(["estimate", "--input", str(pairs_csv)])
        assert capsys.readouterr().out == first

    def test_missing_input(self, tmp_path):
        assert main.main(["estimate", "--input", str(tmp_path / "none.csv")]) == 3

    def test_bad_row(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("s_0,t_0\n1,2\n3,x\n", encoding="utf-8")
        assert main.main(["estimate", "--input", str(path)]) == 3
        assert "row 2" in capsys.readouterr().err

    def test_numeric_failure(self, pairs_csv, monkeypatch):
        def failing(*args, **kwargs):
            raise NumericError("분해 실패", -1.0)

        monkeypatch.setattr(main, "lsmi_estimate", failing)
        assert main.main(["estimate", "--input", str(pairs_csv)]) == 4


class TestConfigErrors:

    @pytest.mark.parametrize("text", [
        "lsmi.kernel = laplace\n",
        "train.eta = 2\n",
        "lsmi.delta = abc\n",
        "lsmi.sigma_s = -1\n",
        "ksg.k = 0\n",
    ])
    def test_invalid_config(self, tmp_path, pairs_csv, capsys, text):
        path = tmp_path / "bad.cfg"
        path.write_text(text, encoding="utf-8")
        assert main.main(["estimate", "--input", str(pairs_csv), "--config", str(path)]) == 2
        assert "설정 오류" in capsys.readouterr().err

    def test_missing_config(self, tmp_path, pairs_csv):
        assert main.main(["estimate", "--input", str(pairs_csv), "--config", str(tmp_path / "x.cfg")]) == 2


class TestBenchmark:

    def test_sweep_with_report(self, tmp_path):
        out = tmp_path / "sweep.csv"
        report = tmp_path / "report.ipynb"
        code = main.main([
            "benchmark", "--rhos", "0.5", "--ns", "50", "--seeds", "2", "--methods", "ksg,kde",
            "--out", str(out), "--notebook", str(report), "--quiet",
        ])
        assert code == 0
        with open(out, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert [r["kind"] for r in rows] == ["run"] * 4 + ["mean", "std"] * 2
        assert all(r["wall_time"] == "" for r in rows)
        nb = nbformat.read(report, as_version=4)
        assert any("ksg" in cell.source for cell in nb.cells)

    def test_repeated_runs_identical(self, tmp_path):
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.csv"
            report = tmp_path / f"{name}.ipynb"
            main.main([
                "benchmark", "--rhos", "0,0.5", "--ns", "40", "--seeds", "2", "--methods", "lsmi,ksg,kde",
                "--out", str(out), "--notebook", str(report), "--quiet",
            ])
            notebook = report.read_text(encoding="utf-8").replace(str(out), "<csv>")
            outputs.append((out.read_bytes(), notebook))
        assert outputs[0] == outputs[1]

    @pytest.mark.parametrize("args", [
        ["--rhos", "1.0"],
        ["--methods", "mine"],
        ["--seeds", "0"],
        ["--ns", "a,b"],
    ])
    def test_bad_grid(self, tmp_path, args):
        with pytest.raises(SystemExit) as exc:
            main.main(["benchmark", "--out", str(tmp_path / "x.csv"), "--quiet", *args])
        assert exc.value.code == 2


class TestTrain:

    def test_synthetic_run(self, tmp_path, small_config, capsys):
        out_dir = tmp_path / "run"
        code = main.main([
            "train", "--dataset", "two_moons", "--config", str(small_config),
            "--out-dir", str(out_dir), "--quiet",
        ])
        assert code == 0
        variant, seed, best_f1 = capsys.readouterr().out.strip().split(",")
        assert (variant, seed) == ("DRN-MSE-LSMI", "0")
        assert 0.0 <= float(best_f1) <= 1.0
        with open(out_dir / "metrics.csv", newline="", encoding="utf-8") as f:
            assert len(list(csv.reader(f))) == 3
        tensors = load_checkpoint(out_dir / "best.ckpt")
        assert "student.cls.weight" in tensors and "teacher.cls.weight" in tensors

    def test_csv_dataset(self, tmp_path, small_config, capsys):
        data_path = tmp_path / "labeled.csv"
        write_labeled_csv(data_path, gen_blobs(24, n_classes=3, spread=0.5, seed=0))
        code = main.main([
            "train", "--dataset", "csv", "--input", str(data_path), "--config", str(small_config),
            "--out-dir", str(tmp_path / "run"), "--quiet",
        ])
        assert code == 0
        assert capsys.readouterr().out.startswith("DRN-MSE-LSMI,0,")

    def test_csv_requires_input(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main.main(["train", "--dataset", "csv", "--out-dir", str(tmp_path), "--quiet"])
        assert exc.value.code == 2

    def test_divergence(self, tmp_path, small_config, monkeypatch):
        def diverging(*args, **kwargs):
            raise TrainingDivergedError(3, "nan")

        monkeypatch.setattr(main, "train", diverging)
        code = main.main(["train", "--config", str(small_config), "--out-dir", str(tmp_path), "--quiet"])
        assert code == 4

    def test_real_divergence_exit_code(self, tmp_path, small_config, capsys):
        config = tmp_path / "diverge.cfg"
        config.write_text(small_config.read_text(encoding="utf-8") + "train.lr_peak = 1e200\n", encoding="utf-8")
        code = main.main(["train", "--config", str(config), "--out-dir", str(tmp_path / "run"), "--quiet"])
        assert code == 4
        assert "step" in capsys.readouterr().err

    def test_metrics_reproducible(self, tmp_path, small_config):
        outputs = []
        for name in ("a", "b"):
            out_dir = tmp_path / name
            main.main(["train", "--config", str(small_config), "--out-dir", str(out_dir), "--quiet"])
            outputs.append((out_dir / "metrics.csv").read_bytes())
        assert outputs[0] == outputs[1]


class TestGradcheck:

    @pytest.mark.parametrize("target", ["lsmi", "net", "total"])
    def test_targets_pass(self, capsys, target):
        assert main.main(["gradcheck", "--target", target]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "block,size,max_rel_error"
        assert len(lines) >= 2

    def test_failure_exit_code(self, monkeypatch, capsys):
        report = GradcheckReport("net", [BlockError("cls.weight", 4, 0.5)])
        monkeypatch.setattr(main, "run_gradcheck", lambda target, seed=0: report)
        assert main.main(["gradcheck", "--target", "net"]) == 5
        assert "실패" in capsys.readouterr().err
