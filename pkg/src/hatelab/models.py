"""Model assembly, training, and prediction for the six architectures.

Architectures:
  cnn            embedding -> dropout -> parallel convs (windows 3/4/5) ->
                 global max pool -> concat -> dense(k)
  lstm / bilstm  embedding -> dropout -> 2 stacked recurrent layers, where
                 layer 2 reads [e(w_t); h_t of layer 1] at each step ->
                 final state(s) -> dense(k)
  charcnn        256x27 one-hot -> conv(4, stride 4) -> pool(3) ->
                 conv(4, stride 2) -> pool(3) -> flatten -> dense(64) ->
                 dense(k)
  lstm+charcnn / bilstm+charcnn
                 word readout concatenated with the char dense(64) output
                 before the dense(k) head.

Training is plain minibatch Adam on softmax cross-entropy, one example at
a time with gradient accumulation, so results are independent of how
examples would be grouped into tensors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from hatelab.data import Dataset, Document, make_batches
from hatelab.encoding import (
    CHAR_DIM,
    CHAR_SEQ_LEN,
    Vocab,
    char_indices,
    encode_pad,
    init_embedding_matrix,
)
from hatelab.nn import Adam, BiLstm, Conv1d, Dense, Dropout, Lstm, MaxPool1d, softmax, softmax_xent

ARCHITECTURES = ("cnn", "lstm", "bilstm", "charcnn", "lstm+charcnn", "bilstm+charcnn")

WORD_ARCHES = ("cnn", "lstm", "bilstm", "lstm+charcnn", "bilstm+charcnn")
CHAR_ARCHES = ("charcnn", "lstm+charcnn", "bilstm+charcnn")


@dataclass(frozen=True)
class ModelConfig:
    arch: str
    k: int
    embedding_dim: int = 300
    embedding_path: str | None = None
    max_len: int = 50
    hidden: int = 100
    windows: tuple[int, ...] = (3, 4, 5)
    filters: int = 100
    char_filters: int = 64
    dropout: float = 0.2
    batch_size: int = 32
    epochs: int = 5
    lr: float = 0.001
    seed: int = 0

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise ValueError(f"unknown arch {self.arch!r}; expected one of {ARCHITECTURES}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        for name in ("embedding_dim", "max_len", "hidden", "filters",
                     "char_filters", "batch_size", "epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if not self.windows or any(w < 1 for w in self.windows):
            raise ValueError("windows must be positive")
        if self.arch == "cnn" and self.max_len < max(self.windows):
            raise ValueError("max_len must cover the largest conv window")

    @property
    def uses_words(self) -> bool:
        return self.arch in WORD_ARCHES

    @property
    def uses_chars(self) -> bool:
        return self.arch in CHAR_ARCHES

    def to_dict(self) -> dict:
        return {
            "arch": self.arch, "k": self.k,
            "embedding_dim": self.embedding_dim, "embedding_path": self.embedding_path,
            "max_len": self.max_len, "hidden": self.hidden,
            "windows": list(self.windows), "filters": self.filters,
            "char_filters": self.char_filters, "dropout": self.dropout,
            "batch_size": self.batch_size, "epochs": self.epochs,
            "lr": self.lr, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ModelConfig":
        data = dict(raw)
        data["windows"] = tuple(data.get("windows", (3, 4, 5)))
        return cls(**data)


@dataclass(frozen=True)
class Example:
    word_ids: np.ndarray | None
    char_idx: np.ndarray | None
    label: int


def encode_dataset(dataset: Dataset | Sequence[Document], vocab: Vocab | None,
                   config: ModelConfig) -> list[Example]:
    """Turn documents into model inputs. Tokens come from whitespace
    splitting, so feed preprocessed text for real corpora."""
    docs = dataset.documents if isinstance(dataset, Dataset) else dataset
    examples = []
    for doc in docs:
        word_ids = None
        if config.uses_words:
            word_ids = encode_pad(doc.text.split(), vocab, config.max_len)
        char_idx = char_indices(doc.text) if config.uses_chars else None
        examples.append(Example(word_ids=word_ids, char_idx=char_idx, label=doc.label))
    return examples


class _Embedding:
    """Trainable lookup table; the padding row stays pinned to zero."""

    def __init__(self, rows: np.ndarray):
        self.rows = rows
        self.grad_rows = np.zeros_like(rows)
        self._ids = None

    def forward(self, ids: np.ndarray) -> np.ndarray:
        self._ids = ids
        return self.rows[ids]

    def backward(self, grad_out: np.ndarray) -> None:
        np.add.at(self.grad_rows, self._ids, grad_out)
        self.grad_rows[0] = 0.0

    def params(self):
        return {"rows": self.rows}

    def grads(self):
        return {"rows": self.grad_rows}

    def zero_grads(self):
        self.grad_rows[...] = 0


class _WordConv:
    """Parallel conv banks over the embedded sequence, global-max-pooled
    and concatenated."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator, dtype):
        self.convs = [
            Conv1d.init(config.filters, w, config.embedding_dim, rng, stride=1, dtype=dtype)
            for w in config.windows
        ]
        self.pools = [MaxPool1d(config.max_len - w + 1) for w in config.windows]
        self.out_width = len(config.windows) * config.filters
        self.filters = config.filters

    def forward(self, emb: np.ndarray) -> np.ndarray:
        outs = [pool.forward(conv.forward(emb))[0]
                for conv, pool in zip(self.convs, self.pools)]
        return np.concatenate(outs)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        grad_emb = None
        for i, (conv, pool) in enumerate(zip(self.convs, self.pools)):
            part = grad_out[i * self.filters:(i + 1) * self.filters][None, :]
            g = conv.backward(pool.backward(part))
            grad_emb = g if grad_emb is None else grad_emb + g
        return grad_emb

    def params(self):
        return {f"conv{i}.{k}": v for i, c in enumerate(self.convs)
                for k, v in c.params().items()}

    def grads(self):
        return {f"conv{i}.{k}": v for i, c in enumerate(self.convs)
                for k, v in c.grads().items()}

    def zero_grads(self):
        for c in self.convs:
            c.zero_grads()


class _StackedRecurrent:
    """Two recurrent layers; layer 2 reads the embedding concatenated with
    layer 1's state at every step. Readout is each direction's own final
    state (position T-1 forward, position 0 backward)."""

    def __init__(self, config: ModelConfig, bidirectional: bool,
                 rng: np.random.Generator, dtype):
        d, h = config.embedding_dim, config.hidden
        self.bidirectional = bidirectional
        self.hidden = h
        width1 = 2 * h if bidirectional else h
        kind = BiLstm if bidirectional else Lstm
        self.layer1 = kind.init(d, h, rng, dtype)
        self.layer2 = kind.init(d + width1, h, rng, dtype)
        self.out_width = 2 * h if bidirectional else h
        self._emb_dim = d

    def forward(self, emb: np.ndarray) -> np.ndarray:
        self._steps = emb.shape[0]
        h1 = self.layer1.forward(emb)
        h2 = self.layer2.forward(np.concatenate([emb, h1], axis=1))
        if self.bidirectional:
            return np.concatenate([h2[-1, :self.hidden], h2[0, self.hidden:]])
        return h2[-1]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        steps = self._steps
        width2 = 2 * self.hidden if self.bidirectional else self.hidden
        grad_h2 = np.zeros((steps, width2), dtype=grad_out.dtype)
        if self.bidirectional:
            grad_h2[-1, :self.hidden] = grad_out[:self.hidden]
            grad_h2[0, self.hidden:] = grad_out[self.hidden:]
        else:
            grad_h2[-1] = grad_out
        grad_z2 = self.layer2.backward(grad_h2)
        grad_emb = grad_z2[:, :self._emb_dim]
        grad_h1 = grad_z2[:, self._emb_dim:]
        return grad_emb + self.layer1.backward(np.ascontiguousarray(grad_h1))

    def params(self):
        out = {f"layer1.{k}": v for k, v in self.layer1.params().items()}
        out.update({f"layer2.{k}": v for k, v in self.layer2.params().items()})
        return out

    def grads(self):
        out = {f"layer1.{k}": v for k, v in self.layer1.grads().items()}
        out.update({f"layer2.{k}": v for k, v in self.layer2.grads().items()})
        return out

    def zero_grads(self):
        self.layer1.zero_grads()
        self.layer2.zero_grads()


class _CharConv:
    """256x27 one-hot -> conv(4, s4) -> pool(3) -> conv(4, s2) -> pool(3)
    -> flatten -> dense(64). Stage lengths: 256 -> 64 -> 21 -> 9 -> 3."""

    OUT_WIDTH = 64

    def __init__(self, config: ModelConfig, rng: np.random.Generator, dtype):
        f = config.char_filters
        self.conv1 = Conv1d.init(f, 4, CHAR_DIM, rng, stride=4, dtype=dtype)
        self.pool1 = MaxPool1d(3)
        self.conv2 = Conv1d.init(f, 4, f, rng, stride=2, dtype=dtype)
        self.pool2 = MaxPool1d(3)
        flat = 3 * f
        self.dense = Dense.init(flat, self.OUT_WIDTH, rng, dtype=dtype)
        self._flat_shape = (3, f)

    def forward(self, onehot: np.ndarray) -> np.ndarray:
        x = self.pool1.forward(self.conv1.forward(onehot))
        x = self.pool2.forward(self.conv2.forward(x))
        return self.dense.forward(x.reshape(-1))

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        g = self.dense.backward(grad_out).reshape(self._flat_shape)
        g = self.conv2.backward(self.pool2.backward(g))
        return self.conv1.backward(self.pool1.backward(g))

    def params(self):
        out = {}
        for name, layer in (("conv1", self.conv1), ("conv2", self.conv2),
                            ("dense", self.dense)):
            out.update({f"{name}.{k}": v for k, v in layer.params().items()})
        return out

    def grads(self):
        out = {}
        for name, layer in (("conv1", self.conv1), ("conv2", self.conv2),
                            ("dense", self.dense)):
            out.update({f"{name}.{k}": v for k, v in layer.grads().items()})
        return out

    def zero_grads(self):
        for layer in (self.conv1, self.conv2, self.dense):
            layer.zero_grads()


class Model:
    def __init__(self, config: ModelConfig, vocab: Vocab | None,
                 label_names: Sequence[str], rng: np.random.Generator,
                 pretrained: Mapping[str, np.ndarray] | None = None,
                 dtype=np.float32):
        if len(label_names) != config.k:
            raise ValueError(f"config.k={config.k} but {len(label_names)} label names")
        self.config = config
        self.vocab = vocab
        self.label_names = tuple(label_names)
        self.dtype = dtype
        self.embedding = None
        self.emb_dropout = None
        self.word_branch = None
        self.char_branch = None
        width = 0
        if config.uses_words:
            if vocab is None:
                raise ValueError(f"arch {config.arch!r} needs a vocabulary")
            matrix = init_embedding_matrix(
                vocab, config.embedding_dim, pretrained, seed=rng, dtype=dtype)
            self.embedding = _Embedding(matrix.rows)
            self.emb_dropout = Dropout(config.dropout)
            if config.arch.startswith("cnn"):
                self.word_branch = _WordConv(config, rng, dtype)
            else:
                self.word_branch = _StackedRecurrent(
                    config, config.arch.startswith("bilstm"), rng, dtype)
            width += self.word_branch.out_width
        if config.uses_chars:
            self.char_branch = _CharConv(config, rng, dtype)
            width += _CharConv.OUT_WIDTH
        self.head = Dense.init(width, config.k, rng, dtype=dtype)
        self.feature_width = width
        self._char_eye = np.eye(CHAR_DIM, dtype=dtype)

    def forward_example(self, ex: Example, train: bool = False,
                        rng: np.random.Generator | None = None) -> np.ndarray:
        parts = []
        if self.word_branch is not None:
            emb = self.embedding.forward(ex.word_ids)
            emb = self.emb_dropout.forward(emb, train=train, rng=rng)
            parts.append(self.word_branch.forward(emb))
        if self.char_branch is not None:
            parts.append(self.char_branch.forward(self._char_eye[ex.char_idx]))
        return self.head.forward(np.concatenate(parts) if len(parts) > 1 else parts[0])

    def backward_example(self, grad_logits: np.ndarray) -> None:
        grad_vec = self.head.backward(grad_logits)
        offset = 0
        if self.word_branch is not None:
            w = self.word_branch.out_width
            grad_emb = self.word_branch.backward(grad_vec[:w])
            self.embedding.backward(self.emb_dropout.backward(grad_emb))
            offset = w
        if self.char_branch is not None:
            self.char_branch.backward(grad_vec[offset:])

    def params(self) -> dict[str, np.ndarray]:
        out = {}
        if self.embedding is not None:
            out.update({f"embedding.{k}": v for k, v in self.embedding.params().items()})
        if self.word_branch is not None:
            out.update({f"word.{k}": v for k, v in self.word_branch.params().items()})
        if self.char_branch is not None:
            out.update({f"char.{k}": v for k, v in self.char_branch.params().items()})
        out.update({f"head.{k}": v for k, v in self.head.params().items()})
        return out

    def grads(self) -> dict[str, np.ndarray]:
        out = {}
        if self.embedding is not None:
            out.update({f"embedding.{k}": v for k, v in self.embedding.grads().items()})
        if self.word_branch is not None:
            out.update({f"word.{k}": v for k, v in self.word_branch.grads().items()})
        if self.char_branch is not None:
            out.update({f"char.{k}": v for k, v in self.char_branch.grads().items()})
        out.update({f"head.{k}": v for k, v in self.head.grads().items()})
        return out

    def zero_grads(self):
        for part in (self.embedding, self.word_branch, self.char_branch, self.head):
            if part is not None:
                part.zero_grads()


def build_model(config: ModelConfig, vocab: Vocab | None,
                label_names: Sequence[str],
                pretrained: Mapping[str, np.ndarray] | None = None,
                seed: int | Sequence[int] | None = None,
                dtype=np.float32) -> Model:
    base = [config.seed] if seed is None else ([seed] if isinstance(seed, int) else list(seed))
    rng = np.random.default_rng(base + [0])
    return Model(config, vocab, label_names, rng, pretrained=pretrained, dtype=dtype)


def train_model(model: Model, examples: Sequence[Example],
                seed: int | Sequence[int] | None = None) -> list[float]:
    """Minibatch Adam over epochs; returns the mean loss of each epoch."""
    if not examples:
        raise ValueError("empty training set")
    config = model.config
    for i, ex in enumerate(examples):
        if not 0 <= ex.label < config.k:
            raise ValueError(f"example {i} has label {ex.label}, k={config.k}")
    base = [config.seed] if seed is None else ([seed] if isinstance(seed, int) else list(seed))
    dropout_rng = np.random.default_rng(base + [1])
    opt = Adam(lr=config.lr)
    history = []
    for epoch in range(config.epochs):
        batches = make_batches(range(len(examples)), config.batch_size,
                               seed=base + [2], epoch=epoch)
        total = 0.0
        for batch in batches:
            model.zero_grads()
            scale = 1.0 / len(batch)
            for idx in batch:
                ex = examples[idx]
                logits = model.forward_example(ex, train=True, rng=dropout_rng)
                loss, grad = softmax_xent(logits.astype(np.float64), ex.label)
                total += loss
                model.backward_example((grad * scale).astype(model.dtype))
            opt.step(model.params(), model.grads())
        history.append(total / len(examples))
    return history


def predict(model: Model, examples: Sequence[Example]) -> np.ndarray:
    """Argmax class per example; ties go to the lowest class index. Runs
    one example at a time, so grouping can never change the output."""
    out = np.zeros(len(examples), dtype=np.int64)
    for i, ex in enumerate(examples):
        out[i] = int(np.argmax(model.forward_example(ex, train=False)))
    return out


def predict_proba(model: Model, examples: Sequence[Example]) -> np.ndarray:
    out = np.zeros((len(examples), model.config.k), dtype=np.float64)
    for i, ex in enumerate(examples):
        out[i] = softmax(model.forward_example(ex, train=False).astype(np.float64))
    return out


def table3_configs(k: int, **overrides) -> list[tuple[str, ModelConfig]]:
    """The 13 benchmark rows: three embedding sources (w2v d=300,
    glove d=100, fasttext d=300) across cnn/lstm/bilstm, plus charcnn and
    three hybrids. Desk-scale runs leave embedding_path unset and train
    randomly initialized vectors of the matching width."""
    dims = {"w2v": 300, "glove": 100, "fasttext": 300}
    rows = [
        ("cnn-w2v", "cnn", "w2v"),
        ("lstm-w2v", "lstm", "w2v"),
        ("bilstm-w2v", "bilstm", "w2v"),
        ("cnn-glove", "cnn", "glove"),
        ("lstm-glove", "lstm", "glove"),
        ("bilstm-glove", "bilstm", "glove"),
        ("cnn-fasttext", "cnn", "fasttext"),
        ("lstm-fasttext", "lstm", "fasttext"),
        ("bilstm-fasttext", "bilstm", "fasttext"),
        ("charcnn", "charcnn", None),
        ("lstm-glove+charcnn", "lstm+charcnn", "glove"),
        ("bilstm-glove+charcnn", "bilstm+charcnn", "glove"),
        ("bilstm-fasttext+charcnn", "bilstm+charcnn", "fasttext"),
    ]
    configs = []
    for name, arch, source in rows:
        cfg = ModelConfig(arch=arch, k=k,
                          embedding_dim=dims[source] if source else 300,
                          **overrides)
        configs.append((name, cfg))
    return configs
