"""Binary model checkpoints with integrity checking.

Layout, all integers little-endian:

    magic b"HLCK" | version u32 | total_size u64 | header_len u32 |
    header JSON (utf-8) | parameter blocks (float32) | crc32 u32

The header carries the model config, vocabulary, label names, and an
ordered parameter manifest (name + shape). The CRC covers every byte
before it. Verification order: length/magic, declared size, checksum,
version, structure; a flipped payload byte is therefore reported as a
checksum failure, not as garbage downstream.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from hatelab.encoding import Vocab
from hatelab.models import Model, ModelConfig, build_model

MAGIC = b"HLCK"
VERSION = 1
_PREFIX = struct.Struct("<4sIQI")  # magic, version, total_size, header_len


class CheckpointError(Exception):
    pass


class CheckpointFormatError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointChecksumError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


def save_checkpoint(model: Model, path: str | Path) -> None:
    params = model.params()
    names = sorted(params)
    header = json.dumps(
        {
            "config": model.config.to_dict(),
            "vocab": model.vocab.index if model.vocab is not None else None,
            "label_names": list(model.label_names),
            "params": [{"name": n, "shape": list(params[n].shape)} for n in names],
        },
        sort_keys=True,
    ).encode("utf-8")
    blocks = b"".join(
        np.ascontiguousarray(params[n], dtype="<f4").tobytes() for n in names
    )
    total = _PREFIX.size + len(header) + len(blocks) + 4
    payload = _PREFIX.pack(MAGIC, VERSION, total, len(header)) + header + blocks
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def load_checkpoint(path: str | Path) -> Model:
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size + 4:
        raise CheckpointTruncatedError(f"file is {len(data)} bytes, too short")
    magic, version, total, header_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointFormatError(f"bad magic {magic!r}")
    if len(data) < total:
        raise CheckpointTruncatedError(f"expected {total} bytes, found {len(data)}")
    if len(data) > total:
        raise CheckpointFormatError(f"{len(data) - total} bytes of trailing data")
    stored_crc = struct.unpack_from("<I", data, total - 4)[0]
    if zlib.crc32(data[:total - 4]) != stored_crc:
        raise CheckpointChecksumError("crc32 mismatch")
    if version != VERSION:
        raise CheckpointVersionError(f"version {version}, expected {VERSION}")
    header_end = _PREFIX.size + header_len
    if total - 4 < header_end:
        raise CheckpointFormatError("header extends past declared size")
    try:
        header = json.loads(data[_PREFIX.size:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"bad header: {exc}") from None

    config = ModelConfig.from_dict(header["config"])
    vocab = Vocab(index=header["vocab"]) if header["vocab"] is not None else None
    model = build_model(config, vocab, header["label_names"])
    params = model.params()
    manifest = header["params"]
    if sorted(p["name"] for p in manifest) != sorted(params):
        raise CheckpointFormatError("parameter manifest does not match architecture")

    offset = header_end
    for entry in manifest:
        target = params[entry["name"]]
        shape = tuple(entry["shape"])
        if target.shape != shape:
            raise CheckpointFormatError(
                f"parameter {entry['name']} has shape {shape}, expected {target.shape}")
        nbytes = int(np.prod(shape, dtype=np.int64)) * 4
        if offset + nbytes > total - 4:
            raise CheckpointTruncatedError(f"parameter {entry['name']} extends past payload")
        block = np.frombuffer(data, dtype="<f4", count=nbytes // 4, offset=offset)
        target[...] = block.reshape(shape).astype(target.dtype)
        offset += nbytes
    if offset != total - 4:
        raise CheckpointFormatError("payload size does not match manifest")
    return model
