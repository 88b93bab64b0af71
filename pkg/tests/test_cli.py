"""
명령행 인터페이스 통합 테스트 (합성 데이터 -> 학습 -> 평가 -> 앙상블)
"""

import json

import pandas as pd
import pytest
import yaml

from src.cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main
from src.data import load_manifest, read_pgm

SMALL_CONFIG = {
    "data": {"image_size": 16},
    "model": {"channels": 8, "depth": 1, "d_model": 16},
    "train": {"batch_size": 12, "lr0": 0.01, "min_epochs": 1, "max_epochs": 2},
}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = root / "small.yaml"
    config.write_text(yaml.safe_dump(SMALL_CONFIG), encoding="utf-8")
    common = ["--config", str(config), "--quiet"]

    code = main(["gen-synth", "--classes", "3", "--per-class", "10", "--size", "16",
                 "--seed", "5", "--out", str(root / "data"), *common])
    assert code == EXIT_OK
    code = main(["train", "--manifest", str(root / "data" / "manifest.csv"),
                 "--out", str(root / "run"), *common])
    assert code == EXIT_OK
    return root, common


def test_gen_synth_outputs(workspace):
    root, _ = workspace
    assert (root / "data" / "resolved_config.yaml").exists()
    manifest = load_manifest(root / "data" / "manifest.csv")
    assert manifest.num_classes == 3
    assert sum(manifest.counts().values()) == 30


def test_train_outputs(workspace):
    root, _ = workspace
    run = root / "run"
    for name in ("best.ckpt", "last.ckpt", "metrics.csv", "resolved_config.yaml"):
        assert (run / name).exists()
    history = pd.read_csv(run / "metrics.csv")
    assert history["epoch"].tolist() == [1, 2]
    resolved = yaml.safe_load((run / "resolved_config.yaml").read_text(encoding="utf-8"))
    assert resolved["model"]["num_classes"] == 3
    assert resolved["train"]["max_epochs"] == 2


def test_eval_then_ensemble(workspace):
    root, common = workspace
    manifest = str(root / "data" / "manifest.csv")
    for name in ("best", "last"):
        code = main(["eval", "--checkpoint", str(root / "run" / f"{name}.ckpt"), "--manifest", manifest,
                     "--out", str(root / f"eval_{name}" / "report.json"), *common])
        assert code == EXIT_OK

    report = json.loads((root / "eval_best" / "report.json").read_text(encoding="utf-8"))
    assert 0.0 <= report["accuracy"] <= 1.0
    predictions = pd.read_csv(root / "eval_best" / "predictions.csv")
    assert list(predictions.columns) == ["sample_id", "p_0", "p_1", "p_2"]
    assert len(predictions) == 9

    pred_a = root / "eval_best" / "predictions.csv"
    pred_b = root / "eval_last" / "predictions.csv"
    code = main(["ensemble", "--pred", str(pred_a), str(pred_b),
                 "--truth", str(root / "eval_best" / "truth.csv"), "--search",
                 "--out", str(root / "ensemble"), *common])
    assert code == EXIT_OK
    ranking = pd.read_csv(root / "ensemble" / "ensemble_search.csv")
    assert len(ranking) == 1
    assert ranking["size"].tolist() == [2]
    assert (root / "ensemble" / "report.json").exists()


def test_refine_writes_manifest(workspace):
    root, common = workspace
    out = root / "refined" / "manifest.csv"
    code = main(["refine", "--manifest", str(root / "data" / "manifest.csv"),
                 "--strategy", "crop-train", "--out", str(out), *common])
    assert code == EXIT_OK
    assert load_manifest(out).counts() == load_manifest(root / "data" / "manifest.csv").counts()


def test_gradcam_writes_heatmap(workspace):
    root, common = workspace
    out = root / "cam" / "heat.pgm"
    code = main(["gradcam", "--checkpoint", str(root / "run" / "best.ckpt"),
                 "--image", str(root / "data" / "images" / "c000_00000.ppm"),
                 "--class", "0", "--layer", "block1", "--out", str(out), *common])
    assert code == EXIT_OK
    heatmap = read_pgm(out)
    assert heatmap.ndim == 2
    assert heatmap.min() >= 0 and heatmap.max() <= 255


def test_gradcam_unknown_layer_is_config_error(workspace):
    root, common = workspace
    code = main(["gradcam", "--checkpoint", str(root / "run" / "best.ckpt"),
                 "--image", str(root / "data" / "images" / "c000_00000.ppm"),
                 "--class", "0", "--layer", "block9", "--out", str(root / "cam2" / "h.pgm"), *common])
    assert code == EXIT_CONFIG


# ----------------------------------------------------------------------
# 종료 코드
# ----------------------------------------------------------------------
def test_gradcheck_subset(tmp_path):
    code = main(["gradcheck", "--only", "elementwise.", "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_OK
    results = pd.read_csv(tmp_path / "gradcheck.csv")
    assert results["passed"].all()
    assert main(["gradcheck", "--only", "no-such-op", "--quiet"]) == EXIT_CONFIG


def test_gradcheck_fails_when_one_op_exceeds_tolerance(monkeypatch, tmp_path):
    from src import gradient_suite

    real_grad_check = gradient_suite.grad_check
    calls = []

    def grad_check_with_one_bad_op(f, params):
        calls.append(f)
        return 1.0 if len(calls) == 1 else real_grad_check(f, params)

    monkeypatch.setattr(gradient_suite, "grad_check", grad_check_with_one_bad_op)
    code = main(["gradcheck", "--only", "elementwise.", "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_FAILURE
    results = pd.read_csv(tmp_path / "gradcheck.csv")
    assert (~results["passed"]).sum() == 1
    assert results["max_relative_error"].iloc[0] == 1.0


def test_invalid_override_is_config_error(tmp_path):
    code = main(["gen-synth", "--out", str(tmp_path), "--train.lr0", "-1", "--quiet"])
    assert code == EXIT_CONFIG


def test_missing_checkpoint_is_runtime_error(tmp_path):
    code = main(["eval", "--checkpoint", str(tmp_path / "none.ckpt"),
                 "--manifest", str(tmp_path / "m.csv"), "--out", str(tmp_path / "r.json"), "--quiet"])
    assert code == EXIT_FAILURE


def test_version_and_usage_errors():
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    with pytest.raises(SystemExit) as excinfo:
        main(["train"])
    assert excinfo.value.code == 2
