"""Dataset loading, fold splitting, batching, synthetic generation."""

import numpy as np
import pytest

from hatelab.data import (
    Dataset,
    Document,
    SyntheticSpec,
    default_synthetic_spec,
    generate_synthetic,
    load_dataset_csv,
    make_batches,
    stratified_kfold,
    write_dataset_csv,
)
from oracles import naive_bayes_cv_accuracy


# --- Dataset type ---

def test_dataset_rejects_duplicate_ids():
    with pytest.raises(ValueError, match="duplicate"):
        Dataset(documents=(Document("a", "x", 0), Document("a", "y", 0)),
                label_names=("l",))


def test_dataset_rejects_bad_label():
    with pytest.raises(ValueError, match="label"):
        Dataset(documents=(Document("a", "x", 2),), label_names=("l0", "l1"))


def test_dataset_subset_keeps_labels():
    ds = Dataset(documents=(Document("a", "x", 0), Document("b", "y", 1)),
                 label_names=("l0", "l1"))
    sub = ds.subset([1])
    assert sub.documents[0].doc_id == "b" and sub.label_names == ("l0", "l1")


# --- csv loading ---

def _write(tmp_path, text):
    p = tmp_path / "data.csv"
    p.write_text(text, encoding="utf-8")
    return p


def test_load_csv_three_labels(tmp_path):
    p = _write(tmp_path, "id,text,label\n1,aaa,racism\n2,bbb,sexism\n3,ccc,neither\n")
    ds = load_dataset_csv(p)
    assert ds.k == 3
    assert ds.label_names == ("racism", "sexism", "neither")
    assert [d.label for d in ds.documents] == [0, 1, 2]


def test_load_csv_missing_column(tmp_path):
    p = _write(tmp_path, "id,text\n1,aaa\n")
    with pytest.raises(ValueError, match="label"):
        load_dataset_csv(p)


def test_load_csv_quoted_commas(tmp_path):
    p = _write(tmp_path, 'id,text,label\n1,"hello, world",yes\n')
    ds = load_dataset_csv(p)
    assert ds.documents[0].text == "hello, world"


def test_load_csv_empty_text_rows_listed(tmp_path):
    p = _write(tmp_path, "id,text,label\n1,aaa,x\n2,,x\n3,bbb,x\n4,  ,x\n")
    with pytest.raises(ValueError, match=r"\[3, 5\]"):
        load_dataset_csv(p)


def test_load_csv_duplicate_id(tmp_path):
    p = _write(tmp_path, "id,text,label\n1,aaa,x\n1,bbb,x\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_dataset_csv(p)


def test_csv_roundtrip(tmp_path):
    ds = generate_synthetic(default_synthetic_spec(), 30, seed=3)
    p = tmp_path / "out.csv"
    write_dataset_csv(ds, p)
    back = load_dataset_csv(p)
    assert back.label_names == ds.label_names
    assert [d.text for d in back.documents] == [d.text for d in ds.documents]


# --- stratified folds ---

def _dataset_with_counts(counts):
    docs = []
    i = 0
    for label, count in enumerate(counts):
        for _ in range(count):
            docs.append(Document(f"d{i}", f"text {i}", label))
            i += 1
    return Dataset(documents=tuple(docs),
                   label_names=tuple(f"c{j}" for j in range(len(counts))))


def test_kfold_exact_divisibility():
    ds = _dataset_with_counts([60, 30, 10])
    folds = stratified_kfold(ds, k=5, seed=0)
    labels = ds.labels()
    for fold in folds:
        counts = np.bincount(labels[fold], minlength=3)
        assert counts.tolist() == [12, 6, 2]


def test_kfold_off_by_one():
    ds = _dataset_with_counts([61, 30, 10])
    folds = stratified_kfold(ds, k=5, seed=1)
    labels = ds.labels()
    for c, size in enumerate((61, 30, 10)):
        per_fold = [int(np.sum(labels[fold] == c)) for fold in folds]
        assert max(per_fold) - min(per_fold) <= 1
        assert sum(per_fold) == size


def test_kfold_partition():
    ds = _dataset_with_counts([13, 29, 8])
    folds = stratified_kfold(ds, k=4, seed=2)
    flat = sorted(i for fold in folds for i in fold)
    assert flat == list(range(len(ds)))


def test_kfold_deterministic():
    ds = _dataset_with_counts([20, 20])
    assert stratified_kfold(ds, 5, seed=7) == stratified_kfold(ds, 5, seed=7)
    assert stratified_kfold(ds, 5, seed=7) != stratified_kfold(ds, 5, seed=8)


def test_kfold_small_class_error_names_class():
    ds = _dataset_with_counts([10, 3])
    with pytest.raises(ValueError, match="c1"):
        stratified_kfold(ds, k=5, seed=0)


def test_kfold_fuzz_partition_and_balance():
    rng = np.random.default_rng(42)
    for _ in range(50):
        k = int(rng.integers(2, 7))
        counts = [int(rng.integers(k, 40)) for _ in range(int(rng.integers(2, 5)))]
        ds = _dataset_with_counts(counts)
        folds = stratified_kfold(ds, k=k, seed=int(rng.integers(1000)))
        flat = sorted(i for fold in folds for i in fold)
        assert flat == list(range(len(ds)))
        labels = ds.labels()
        for c in range(len(counts)):
            per_fold = [int(np.sum(labels[fold] == c)) for fold in folds]
            assert max(per_fold) - min(per_fold) <= 1


# --- batches ---

def test_batches_sizes():
    batches = make_batches(range(10), 4, seed=0, epoch=0)
    assert [len(b) for b in batches] == [4, 4, 2]


def test_batches_singletons():
    batches = make_batches(range(5), 1, seed=0, epoch=0)
    assert [len(b) for b in batches] == [1] * 5


def test_batches_epoch_changes_order_not_content():
    a = make_batches(range(20), 6, seed=3, epoch=0)
    b = make_batches(range(20), 6, seed=3, epoch=1)
    assert a != b
    assert sorted(i for batch in a for i in batch) == sorted(i for batch in b for i in batch)


def test_batches_rejects_bad_size():
    with pytest.raises(ValueError):
        make_batches(range(5), 0, seed=0, epoch=0)


# --- synthetic corpora ---

def test_synthetic_balanced_counts():
    ds = generate_synthetic(default_synthetic_spec(), 300, seed=0)
    assert ds.class_counts().tolist() == [100, 100, 100]


def test_synthetic_remainder_to_low_classes():
    ds = generate_synthetic(default_synthetic_spec(), 301, seed=0)
    assert ds.class_counts().tolist() == [101, 100, 100]


def test_synthetic_deterministic():
    a = generate_synthetic(default_synthetic_spec(), 50, seed=9)
    b = generate_synthetic(default_synthetic_spec(), 50, seed=9)
    assert [d.text for d in a.documents] == [d.text for d in b.documents]


def test_synthetic_motif_planted():
    spec = default_synthetic_spec()
    ds = generate_synthetic(spec, 60, seed=1)
    for doc in ds.documents:
        assert spec.class_motifs[doc.label] in doc.text.split()


def test_synthetic_naive_bayes_oracle_is_perfect():
    ds = generate_synthetic(default_synthetic_spec(), 120, noise=0.0, seed=5)
    assert naive_bayes_cv_accuracy(ds, k=5, seed=0) == 1.0


def test_synthetic_noise_tokens_appear():
    spec = default_synthetic_spec()
    ds = generate_synthetic(spec, 100, noise=0.5, seed=2)
    noise_set = set(spec.noise_vocab)
    seen = sum(1 for d in ds.documents for t in d.text.split() if t in noise_set)
    assert seen > 50


def test_synthetic_spec_rejects_overlap():
    with pytest.raises(ValueError, match="disjoint"):
        SyntheticSpec(label_names=("a", "b"),
                      class_vocabs=(("x", "y"), ("y", "z")),
                      class_motifs=("qq", "ww"))


def test_synthetic_spec_json_roundtrip():
    spec = default_synthetic_spec()
    assert SyntheticSpec.from_json(spec.to_json()) == spec


def test_synthetic_noise_needs_vocab():
    spec = SyntheticSpec(label_names=("a", "b"),
                         class_vocabs=(("x",), ("y",)),
                         class_motifs=("qq", "ww"))
    with pytest.raises(ValueError, match="noise"):
        generate_synthetic(spec, 10, noise=0.2, seed=0)
