"""Vocabulary building, integer encoding, embedding matrices, and
character-level one-hot encoding.

Index 0 is reserved for padding and index 1 for tokens unseen at inference
time; real tokens start at 2. Sequences are pre-padded (zeros on the left)
and truncated keeping the last tokens, so content stays adjacent to the
final time step that recurrent readouts use.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

PAD_INDEX = 0
UNK_INDEX = 1

CHAR_ALPHABET = "abcdefghijklmnopqrstuvwxyz"
CHAR_CATCHALL = len(CHAR_ALPHABET)  # index 26
CHAR_DIM = len(CHAR_ALPHABET) + 1  # 27
CHAR_SEQ_LEN = 256


@dataclass(frozen=True)
class Vocab:
    """Token to index mapping; indices 0 and 1 are reserved."""

    index: dict[str, int]

    def __post_init__(self):
        for token, idx in self.index.items():
            if idx < 2:
                raise ValueError(f"token {token!r} mapped to reserved index {idx}")

    @property
    def size(self) -> int:
        """Matrix row count, reserved rows included."""
        return len(self.index) + 2

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def get(self, token: str) -> int:
        return self.index.get(token, UNK_INDEX)


@dataclass(frozen=True)
class EmbeddingMatrix:
    rows: np.ndarray  # (V, d)

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def build_vocab(corpus: Sequence[Sequence[str]], min_freq: int = 1) -> Vocab:
    """Assign indices >= 2 to tokens with frequency >= min_freq, in
    descending frequency then lexicographic order."""
    if not corpus:
        raise ValueError("empty corpus")
    freq = Counter()
    for tokens in corpus:
        freq.update(tokens)
    kept = [t for t, c in freq.items() if c >= min_freq]
    kept.sort(key=lambda t: (-freq[t], t))
    return Vocab(index={t: i + 2 for i, t in enumerate(kept)})


def encode_pad(tokens: Sequence[str], vocab: Vocab, max_len: int) -> np.ndarray:
    """Map tokens to indices (unknown -> 1), keep the last max_len, and
    left-pad with zeros to exactly max_len."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ids = [vocab.get(t) for t in tokens][-max_len:]
    out = np.zeros(max_len, dtype=np.int64)
    if ids:
        out[-len(ids):] = ids
    return out


def load_embedding_file(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a plain-text embedding file: token followed by d reals per line.

    The dimension is inferred from the first line; later lines that disagree
    raise an error naming the line number. Duplicate tokens keep the first
    occurrence.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise ValueError(f"line {lineno}: no vector components")
                dim = len(values)
            elif len(values) != dim:
                raise ValueError(
                    f"line {lineno}: expected {dim} components, got {len(values)}"
                )
            if token in vectors:
                continue
            try:
                vectors[token] = np.asarray([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad number ({exc})") from None
    return vectors


def init_embedding_matrix(
    vocab: Vocab,
    dim: int,
    pretrained: Mapping[str, np.ndarray] | None = None,
    seed: int | Sequence[int] = 0,
    dtype=np.float32,
) -> EmbeddingMatrix:
    """Build the V x d matrix: row 0 zeros, pretrained rows copied verbatim,
    all other rows (the unknown row included) uniform in [-0.25, 0.25]."""
    pretrained = pretrained or {}
    for token, vec in pretrained.items():
        if token in vocab and len(vec) != dim:
            raise ValueError(
                f"pretrained vector for {token!r} has dimension {len(vec)}, expected {dim}"
            )
    rng = np.random.default_rng(seed)
    rows = np.zeros((vocab.size, dim), dtype=np.float64)
    by_index = sorted(vocab.index.items(), key=lambda kv: kv[1])
    rows[UNK_INDEX] = rng.uniform(-0.25, 0.25, size=dim)
    for token, idx in by_index:
        vec = pretrained.get(token)
        if vec is not None:
            rows[idx] = np.asarray(vec, dtype=np.float64)
        else:
            rows[idx] = rng.uniform(-0.25, 0.25, size=dim)
    return EmbeddingMatrix(rows=rows.astype(dtype))


def char_indices(text: str, seq_len: int = CHAR_SEQ_LEN) -> np.ndarray:
    """Column index (0..26) per character for the first seq_len characters
    of the lowercased text; shorter texts pad with the catch-all column."""
    out = np.full(seq_len, CHAR_CATCHALL, dtype=np.int64)
    for i, ch in enumerate(text.lower()[:seq_len]):
        pos = ord(ch) - ord("a")
        if 0 <= pos < 26:
            out[i] = pos
    return out


def encode_chars(text: str, seq_len: int = CHAR_SEQ_LEN, dtype=np.float32) -> np.ndarray:
    """One-hot character matrix of shape (seq_len, 27); every row sums to 1."""
    eye = np.eye(CHAR_DIM, dtype=dtype)
    return eye[char_indices(text, seq_len)]


def onehot_from_indices(indices: np.ndarray, dtype=np.float32) -> np.ndarray:
    """Expand (..., L) column indices into (..., L, 27) one-hot arrays."""
    eye = np.eye(CHAR_DIM, dtype=dtype)
    return eye[indices]
