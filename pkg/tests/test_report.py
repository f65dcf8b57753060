"""Report bundle: JSON schema, text renderings, figures, overwrite guard."""

import json

import numpy as np
import pytest

from hatelab.data import default_synthetic_spec, generate_synthetic
from hatelab.evaluate import run_cv
from hatelab.models import ModelConfig
from hatelab.report import (
    REPORT_FILES,
    dumps_report,
    load_report,
    render_confusions,
    render_fold_csv,
    render_table,
    report_from_cv,
    save_confusion_figure,
    save_loss_figure,
    system_folds_from_report,
    validate_report,
    write_report,
)


CONFIG = ModelConfig(arch="cnn", k=3, embedding_dim=8, max_len=12, hidden=4,
                     windows=(2, 3), filters=4, epochs=2, batch_size=16,
                     lr=0.01, seed=0)


@pytest.fixture(scope="module")
def cv_result():
    data = generate_synthetic(default_synthetic_spec(), 60, noise=0.1, seed=4)
    return run_cv(CONFIG, data, k=5, seed=9)


@pytest.fixture(scope="module")
def report(cv_result):
    return report_from_cv("cnn-tiny", CONFIG, cv_result, seed=9)


def test_report_structure(report):
    validate_report(report)
    assert report["system"] == "cnn-tiny"
    assert report["k_folds"] == 5
    assert len(report["folds"]) == 5
    assert report["label_names"] == ["alpha", "beta", "gamma"]
    for entry in report["folds"]:
        assert len(entry["loss_history"]) == CONFIG.epochs
    assert len(report["class_rates"]) == 3
    assert report["config"]["arch"] == "cnn"


def test_pooled_matrix_total_is_n(report):
    assert int(np.asarray(report["pooled_confusion"]).sum()) == 60


def test_dumps_sorted_and_stable(report):
    text = dumps_report(report)
    assert text == dumps_report(json.loads(text))
    assert text.endswith("\n")
    keys = list(json.loads(text))
    assert keys == sorted(keys)


def test_validate_missing_key(report):
    broken = dict(report)
    del broken["pooled_confusion"]
    with pytest.raises(ValueError, match="missing"):
        validate_report(broken)


def test_validate_fold_count_mismatch(report):
    broken = dict(report, k_folds=4)
    with pytest.raises(ValueError, match="fold"):
        validate_report(broken)


def test_validate_bad_matrix_shape(report):
    broken = json.loads(dumps_report(report))
    broken["folds"][2]["confusion"] = [[1, 2], [3, 4]]
    with pytest.raises(ValueError, match="3x3"):
        validate_report(broken)


def test_system_folds_extraction(report):
    folds = system_folds_from_report(report)
    assert folds.system_id == "cnn-tiny"
    assert len(folds.folds) == 5
    assert folds.folds[0].shape == (3, 3)


def test_table_rendering(report):
    text = render_table(report)
    assert "cnn-tiny" in text
    assert "F1 (fold mean)" in text and "F1 (pooled)" in text
    assert f"{100 * report['mean_accuracy']:.2f}" in text
    for rate in report["class_rates"]:
        assert rate["label"] in text


def test_fold_csv_values_roundtrip(report):
    lines = render_fold_csv(report).splitlines()
    assert lines[0] == "fold,n,accuracy,weighted_f1"
    assert len(lines) == 1 + 5 + 1
    fold0 = lines[1].split(",")
    assert float(fold0[2]) == report["folds"][0]["accuracy"]
    pooled = lines[-1].split(",")
    assert pooled[0] == "pooled"
    assert int(pooled[1]) == 60
    assert float(pooled[3]) == report["pooled_weighted_f1"]


def test_confusions_rendering(report):
    text = render_confusions(report)
    for i in range(5):
        assert f"fold {i}" in text
    assert "pooled" in text
    assert "alpha" in text and "gamma" in text


def test_write_report_bundle(tmp_path, report):
    paths = write_report(tmp_path, report)
    assert [p.name for p in paths] == list(REPORT_FILES)
    for p in paths:
        assert p.exists() and p.stat().st_size > 0
    loaded = load_report(tmp_path / "report.json")
    assert loaded == json.loads(dumps_report(report))


def test_write_refuses_overwrite(tmp_path, report):
    write_report(tmp_path, report)
    with pytest.raises(FileExistsError, match="force"):
        write_report(tmp_path, report)
    write_report(tmp_path, report, force=True)


def test_figures_are_png_and_deterministic(tmp_path, report):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    save_loss_figure(report, a)
    save_loss_figure(report, b)
    assert a.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert a.read_bytes() == b.read_bytes()
    save_confusion_figure(report, a)
    save_confusion_figure(report, b)
    assert a.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert a.read_bytes() == b.read_bytes()


def test_report_json_reproducible_from_fresh_cv(report):
    data = generate_synthetic(default_synthetic_spec(), 60, noise=0.1, seed=4)
    again = report_from_cv("cnn-tiny", CONFIG, run_cv(CONFIG, data, k=5, seed=9),
                           seed=9)
    assert dumps_report(again) == dumps_report(report)
