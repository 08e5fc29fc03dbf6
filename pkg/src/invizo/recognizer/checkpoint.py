"""Self-describing binary checkpoint format.

Layout: a little-endian uint32 giving the byte length of a UTF-8 JSON
manifest, the manifest itself, then every tensor's data concatenated as
flat little-endian float32.  The manifest lists ``name``, ``shape`` and
``offset`` (in float32 elements) for each entry plus a free-form ``meta``
object, so a checkpoint can be inspected without instantiating a model.

All state-dict entries are stored, including batch-norm running
statistics.  Integer entries (batch-norm step counters) survive the
float32 round trip exactly for any realistic training length and are
cast back on load.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from invizo.recognizer.model import LineRecognizer

FORMAT_VERSION = 1


class CheckpointError(Exception):
    """Malformed or mismatched checkpoint file."""


def save_checkpoint(
    model: LineRecognizer, path: str | Path, meta: dict | None = None
) -> None:
    entries = []
    blobs: list[np.ndarray] = []
    offset = 0
    for name, tensor in model.state_dict().items():
        array = tensor.detach().cpu().numpy().astype("<f4", copy=True)
        entries.append(
            {"name": name, "shape": list(tensor.shape), "offset": offset}
        )
        blobs.append(array.reshape(-1))
        offset += array.size
    manifest = {
        "format_version": FORMAT_VERSION,
        "meta": meta or {},
        "tensors": entries,
    }
    manifest_bytes = json.dumps(
        manifest, ensure_ascii=False, sort_keys=True
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(manifest_bytes)))
        fh.write(manifest_bytes)
        if blobs:
            fh.write(np.concatenate(blobs).tobytes())


def read_manifest(path: str | Path) -> dict:
    """Read just the JSON manifest without touching tensor data."""
    with open(path, "rb") as fh:
        header = fh.read(4)
        if len(header) != 4:
            raise CheckpointError("truncated checkpoint: missing header")
        (length,) = struct.unpack("<I", header)
        manifest_bytes = fh.read(length)
    if len(manifest_bytes) != length:
        raise CheckpointError("truncated checkpoint: incomplete manifest")
    try:
        manifest = json.loads(manifest_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"invalid manifest: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported format version {manifest.get('format_version')!r}"
        )
    return manifest


def load_checkpoint(model: LineRecognizer, path: str | Path) -> dict:
    """Restore a model's weights in place; returns the ``meta`` object."""
    manifest = read_manifest(path)
    header_len = 4 + len(
        json.dumps(manifest, ensure_ascii=False, sort_keys=True).encode("utf-8")
    )
    data = np.fromfile(path, dtype="<f4", offset=header_len)

    state = model.state_dict()
    listed = {entry["name"] for entry in manifest["tensors"]}
    missing = set(state) - listed
    extra = listed - set(state)
    if missing or extra:
        raise CheckpointError(
            f"state mismatch: missing {sorted(missing)}, extra {sorted(extra)}"
        )

    new_state = {}
    for entry in manifest["tensors"]:
        name, shape, offset = entry["name"], entry["shape"], entry["offset"]
        current = state[name]
        if list(current.shape) != shape:
            raise CheckpointError(
                f"shape mismatch for {name}: file {shape}, model "
                f"{list(current.shape)}"
            )
        numel = int(np.prod(shape)) if shape else 1
        if offset + numel > data.size:
            raise CheckpointError("truncated checkpoint: incomplete tensor data")
        chunk = data[offset : offset + numel].reshape(shape)
        new_state[name] = torch.from_numpy(chunk.copy()).to(current.dtype)
    model.load_state_dict(new_state)
    return manifest["meta"]
