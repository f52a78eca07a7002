# pylint: disable=redefined-outer-name, missing-function-docstring, unused-import
import json

import pandas as pd
import pytest

from molforge.cli import FAILED_FILE, PREVALENCE_FILE, SAMPLES_FILE, build_parser, main
from molforge.diffusion import BASE_FILE, SCM_FILE
from molforge.guidance import predictor_file
from molforge.metrics import REPORT_JSON, REPORT_TXT
from molforge.training import STATS_FILE
from molforge.utils import MANIFEST_FILE, file_sha256

from tests.utils import fix_seeds, small_corpus_path

TINY_CONFIG = """
diffusion_steps = 20
dim = 16
layers = 2
heads = 2
seq_len = 48
ff_dim = 32
dropout = 0.0
encoder_layers = 1
max_scaffold_len = 32
batch_size = 8
learning_rate = 1e-3
predictor_lr = 1e-3
warmup_steps = 0
max_steps = 2
predictor_layers = 1
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY_CONFIG, encoding="utf-8")
    return path


def test_help_lists_commands():
    commands = build_parser()._subparsers._group_actions[0].choices
    assert set(commands) == {"pretrain", "train-scm", "train-pcm", "sample", "evaluate", "stats", "tune"}


def test_missing_seed(small_corpus_path, tmp_path):
    assert main(["pretrain", "--corpus", str(small_corpus_path), "--run-dir", str(tmp_path / "run")]) == 2


def test_missing_base_checkpoint(small_corpus_path, tmp_path, caplog):
    code = main(
        ["train-scm", "--corpus", str(small_corpus_path), "--run-dir", str(tmp_path / "empty"), "--seed", "1"]
    )
    assert code == 4
    assert "--run-dir" in caplog.text


def test_missing_corpus(tmp_path):
    assert main(["stats", "--corpus", str(tmp_path / "none.smi"), "--out-dir", str(tmp_path)]) == 2


def test_invalid_corpus(tmp_path):
    corpus = tmp_path / "bad.smi"
    corpus.write_text("CCO\nC1CC\n", encoding="utf-8")
    assert main(["stats", "--corpus", str(corpus), "--out-dir", str(tmp_path / "out")]) == 3


def test_stats(small_corpus_path, tmp_path):
    out_dir = tmp_path / "stats"
    assert main(["stats", "--corpus", str(small_corpus_path), "--out-dir", str(out_dir)]) == 0
    stats = json.loads((out_dir / STATS_FILE).read_text(encoding="utf-8"))
    assert stats["HBD"]["count"] == 10
    prevalence = pd.read_csv(out_dir / PREVALENCE_FILE, index_col=0)["prevalence"]
    assert prevalence["Benzene"] == pytest.approx(0.3)
    assert prevalence["Pyridine"] == pytest.approx(0.1)
    manifest = json.loads((out_dir / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert manifest["inputs"][str(small_corpus_path)] == file_sha256(small_corpus_path)


def test_evaluate_exit_codes(small_corpus_path, tmp_path):
    empty = tmp_path / "empty.smi"
    empty.write_text("\n", encoding="utf-8")
    args = ["evaluate", "--samples", str(empty), "--corpus", str(small_corpus_path), "--out-dir", str(tmp_path)]
    assert main(args) == 3
    args = ["evaluate", "--samples", str(small_corpus_path), "--corpus", str(small_corpus_path)]
    assert main(args + ["--out-dir", str(tmp_path / "self")]) == 0
    report = json.loads((tmp_path / "self" / REPORT_JSON).read_text(encoding="utf-8"))
    assert report["novelty"] == 0.0
    assert report["validity"] == 1.0
    assert main(args + ["--out-dir", str(tmp_path / "bad"), "--conf-level", "1.5"]) == 2


def test_pipeline(small_corpus_path, config_path, tmp_path):
    run_dir = tmp_path / "run"
    common = ["--corpus", str(small_corpus_path), "--run-dir", str(run_dir), "--config", str(config_path)]
    assert main(["pretrain", *common, "--seed", "5"]) == 0
    assert (run_dir / BASE_FILE).exists()
    manifest = json.loads((run_dir / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert manifest["config"]["model"]["dim"] == 16
    assert manifest["config"]["max_steps"] == 2
    assert manifest["outputs"][BASE_FILE] == file_sha256(run_dir / BASE_FILE)

    assert main(["train-scm", *common, "--seed", "5"]) == 0
    assert (run_dir / SCM_FILE).exists()
    assert main(["train-pcm", *common, "--seed", "5", "--descriptors", "HBD", "--epochs", "1"]) == 0
    assert (run_dir / predictor_file("HBD")).exists()

    outputs = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        args = ["sample", "--run-dir", str(run_dir), "--out-dir", str(out_dir), "--count", "10", "--seed", "7"]
        assert main(args) == 0
        outputs.append(((out_dir / SAMPLES_FILE).read_bytes(), (out_dir / FAILED_FILE).read_bytes()))
    assert outputs[0] == outputs[1]

    guided = tmp_path / "guided"
    args = ["sample", "--run-dir", str(run_dir), "--out-dir", str(guided), "--count", "4", "--seed", "7"]
    assert main(args + ["--scaffold", "c1ccncc1", "--target", "HBD:maximize", "--w-p", "0.3"]) == 0
    manifest = json.loads((guided / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert manifest["config"]["scaffold"] == "c1ccncc1"
    assert manifest["config"]["w_s"] == pytest.approx(0.7)
    assert str(run_dir / predictor_file("HBD")) in manifest["inputs"]

    assert main(args + ["--target", "HBA:maximize"]) == 4

    samples = guided / SAMPLES_FILE
    if samples.read_text(encoding="utf-8").strip():
        args = ["evaluate", "--samples", str(samples), "--corpus", str(small_corpus_path), "--run-dir", str(run_dir)]
        assert main(args + ["--scaffold", "c1ccncc1", "--target", "HBD:maximize"]) == 0
        assert "Structure" in (guided / REPORT_TXT).read_text(encoding="utf-8")
