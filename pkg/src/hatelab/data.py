"""Dataset loading, stratified k-fold splits, batching, synthetic corpora.

Datasets are immutable; splits and batches are pure functions of their
seeds, so every downstream run is reproducible.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    label: int


@dataclass(frozen=True)
class Dataset:
    documents: tuple[Document, ...]
    label_names: tuple[str, ...]

    def __post_init__(self):
        k = len(self.label_names)
        seen = set()
        for doc in self.documents:
            if not 0 <= doc.label < k:
                raise ValueError(f"document {doc.doc_id!r} has label {doc.label}, k={k}")
            if doc.doc_id in seen:
                raise ValueError(f"duplicate id {doc.doc_id!r}")
            seen.add(doc.doc_id)

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def k(self) -> int:
        return len(self.label_names)

    def labels(self) -> np.ndarray:
        return np.array([d.label for d in self.documents], dtype=np.int64)

    def class_counts(self) -> np.ndarray:
        counts = np.zeros(self.k, dtype=np.int64)
        for d in self.documents:
            counts[d.label] += 1
        return counts

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(
            documents=tuple(self.documents[i] for i in indices),
            label_names=self.label_names,
        )


def load_dataset_csv(
    path: str | Path,
    text_column: str = "text",
    label_column: str = "label",
    id_column: str = "id",
) -> Dataset:
    """Read an RFC-4180 CSV with a header row into a Dataset.

    Label names are assigned indices in first-appearance order. Rows with
    empty text are rejected together, with their row numbers listed.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (id_column, text_column, label_column):
            if col not in header:
                raise ValueError(f"missing column {col!r}")
        label_names: list[str] = []
        label_index: dict[str, int] = {}
        documents: list[Document] = []
        empty_rows: list[int] = []
        for rownum, row in enumerate(reader, start=2):  # row 1 is the header
            text = row[text_column]
            if text is None or not text.strip():
                empty_rows.append(rownum)
                continue
            name = row[label_column]
            if name not in label_index:
                label_index[name] = len(label_names)
                label_names.append(name)
            documents.append(
                Document(doc_id=row[id_column], text=text, label=label_index[name])
            )
    if empty_rows:
        raise ValueError(f"empty text in rows: {empty_rows}")
    return Dataset(documents=tuple(documents), label_names=tuple(label_names))


def write_dataset_csv(dataset: Dataset, path: str | Path, extra: dict[str, list[str]] | None = None):
    """Inverse of load_dataset_csv; extra maps column name -> per-row values."""
    extra = extra or {}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "text", "label", *extra])
        for i, doc in enumerate(dataset.documents):
            writer.writerow(
                [doc.doc_id, doc.text, dataset.label_names[doc.label]]
                + [extra[col][i] for col in extra]
            )


def stratified_kfold(dataset: Dataset, k: int = 5, seed: int = 0) -> list[list[int]]:
    """Partition indices into k folds preserving class proportions.

    Within each class the indices are shuffled by seed and dealt
    round-robin, so per-fold class counts differ from the proportional
    share by at most 1.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    by_class: dict[int, list[int]] = {c: [] for c in range(dataset.k)}
    for i, doc in enumerate(dataset.documents):
        by_class[doc.label].append(i)
    for c, members in by_class.items():
        if len(members) < k:
            raise ValueError(
                f"class {dataset.label_names[c]!r} has {len(members)} examples, needs >= {k}"
            )
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in range(dataset.k):
        members = np.array(by_class[c], dtype=np.int64)
        rng = np.random.default_rng([seed, c])
        rng.shuffle(members)
        for j in range(k):
            folds[j].extend(int(i) for i in members[j::k])
    return [sorted(f) for f in folds]


def make_batches(indices: Sequence[int], batch_size: int,
                 seed: int | Sequence[int], epoch: int) -> list[list[int]]:
    """Shuffle indices with an (seed, epoch) generator and chunk; the final
    partial batch is kept."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    base = [seed] if isinstance(seed, int) else list(seed)
    rng = np.random.default_rng(base + [epoch])
    order = np.array(indices, dtype=np.int64)
    rng.shuffle(order)
    return [
        [int(i) for i in order[start:start + batch_size]]
        for start in range(0, len(order), batch_size)
    ]


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a separable toy corpus: one disjoint token vocabulary and
    one character motif per class, plus a shared noise vocabulary."""

    label_names: tuple[str, ...]
    class_vocabs: tuple[tuple[str, ...], ...]
    class_motifs: tuple[str, ...]
    noise_vocab: tuple[str, ...] = ()
    min_tokens: int = 5
    max_tokens: int = 15

    def __post_init__(self):
        if len(self.label_names) < 2:
            raise ValueError("need k >= 2 classes")
        if not (len(self.label_names) == len(self.class_vocabs) == len(self.class_motifs)):
            raise ValueError("label_names, class_vocabs, class_motifs lengths must match")
        seen: set[str] = set()
        for vocab in self.class_vocabs:
            if not vocab:
                raise ValueError("empty class vocabulary")
            overlap = seen & set(vocab)
            if overlap:
                raise ValueError(f"class vocabularies must be disjoint; shared: {sorted(overlap)}")
            seen |= set(vocab)
        if not self.min_tokens <= self.max_tokens:
            raise ValueError("min_tokens must be <= max_tokens")

    def to_json(self) -> str:
        return json.dumps(
            {
                "label_names": list(self.label_names),
                "class_vocabs": [list(v) for v in self.class_vocabs],
                "class_motifs": list(self.class_motifs),
                "noise_vocab": list(self.noise_vocab),
                "min_tokens": self.min_tokens,
                "max_tokens": self.max_tokens,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "SyntheticSpec":
        raw = json.loads(text)
        return cls(
            label_names=tuple(raw["label_names"]),
            class_vocabs=tuple(tuple(v) for v in raw["class_vocabs"]),
            class_motifs=tuple(raw["class_motifs"]),
            noise_vocab=tuple(raw.get("noise_vocab", ())),
            min_tokens=int(raw.get("min_tokens", 5)),
            max_tokens=int(raw.get("max_tokens", 15)),
        )


def default_synthetic_spec() -> SyntheticSpec:
    """Three classes mimicking a small hate-speech-style taxonomy, with
    class-marked character motifs for char-level separability."""
    return SyntheticSpec(
        label_names=("alpha", "beta", "gamma"),
        class_vocabs=(
            ("storm", "thunder", "lightning", "rain", "cloud", "wind", "hail", "fog"),
            ("apple", "banana", "cherry", "grape", "lemon", "mango", "peach", "plum"),
            ("violin", "cello", "flute", "oboe", "piano", "harp", "drum", "horn"),
        ),
        class_motifs=("zzqx", "vvjw", "kkfy"),
        noise_vocab=("the", "a", "of", "and", "to", "in", "it", "is"),
    )


def generate_synthetic(
    spec: SyntheticSpec, n: int, noise: float = 0.0, seed: int = 0
) -> Dataset:
    """Build a balanced n-document corpus.

    Each document draws 5-15 tokens from its class vocabulary (each token
    independently replaced by a noise token with probability `noise`) and
    embeds the class character motif at a random position. Class sizes are
    n//k with the remainder going to the lowest class indices.
    """
    if n < len(spec.label_names):
        raise ValueError("need at least one document per class")
    if not 0.0 <= noise < 1.0:
        raise ValueError("noise must be in [0, 1)")
    if noise > 0 and not spec.noise_vocab:
        raise ValueError("noise > 0 requires a noise vocabulary")
    k = len(spec.label_names)
    counts = [n // k + (1 if c < n % k else 0) for c in range(k)]
    rng = np.random.default_rng([seed])
    documents: list[Document] = []
    doc_id = 0
    for c, count in enumerate(counts):
        vocab = spec.class_vocabs[c]
        for _ in range(count):
            length = int(rng.integers(spec.min_tokens, spec.max_tokens + 1))
            tokens = []
            for _ in range(length):
                if noise > 0 and rng.random() < noise:
                    tokens.append(spec.noise_vocab[int(rng.integers(len(spec.noise_vocab)))])
                else:
                    tokens.append(vocab[int(rng.integers(len(vocab)))])
            slot = int(rng.integers(0, len(tokens) + 1))
            tokens.insert(slot, spec.class_motifs[c])
            documents.append(
                Document(doc_id=f"syn-{doc_id:05d}", text=" ".join(tokens), label=c)
            )
            doc_id += 1
    return Dataset(documents=tuple(documents), label_names=spec.label_names)
