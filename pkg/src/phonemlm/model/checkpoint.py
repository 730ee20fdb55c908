"""Checkpoint directories.

Layout::

    config.json     encoder config, vocab hash, step, seed, optimizer hyperparameters
    manifest.json   [{"name", "shape", "offset"}] in tensor order (offsets in bytes)
    params.bin      little-endian float32 tensors concatenated in manifest order
    optimizer.bin   Adam first then second moments, same order (optional)
"""
import json
import math
import os
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import CheckpointError
from .encoder import EncoderConfig, param_shapes
from .optim import AdamState

_DTYPE = np.dtype("<f4")


@dataclass
class Checkpoint:
    config: EncoderConfig
    params: "OrderedDict[str, np.ndarray]"
    step: int
    seed: int
    vocab_hash: str
    optimizer: Optional[AdamState] = None


def manifest(config: EncoderConfig):
    entries, offset = [], 0
    for name, shape in param_shapes(config).items():
        entries.append({"name": name, "shape": list(shape), "offset": offset})
        offset += math.prod(shape) * _DTYPE.itemsize
    return entries, offset


def _dump_json(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_tensors(path, tensors):
    with open(path, "wb") as f:
        for t in tensors:
            f.write(np.ascontiguousarray(t, dtype=_DTYPE).tobytes())


def save(directory, ckpt: Checkpoint) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries, _ = manifest(ckpt.config)
    names = [e["name"] for e in entries]
    if list(ckpt.params) != names:
        raise CheckpointError("parameter names do not match the config manifest")
    meta = {"config": ckpt.config.to_dict(), "vocab_hash": ckpt.vocab_hash,
            "step": ckpt.step, "seed": ckpt.seed}
    _write_tensors(directory / "params.bin", (ckpt.params[n] for n in names))
    if ckpt.optimizer is not None:
        meta["optimizer"] = dict(ckpt.optimizer.hyperparams(), step=ckpt.optimizer.step)
        _write_tensors(directory / "optimizer.bin",
                       [ckpt.optimizer.m[n] for n in names] + [ckpt.optimizer.v[n] for n in names])
    elif (directory / "optimizer.bin").exists():
        os.remove(directory / "optimizer.bin")
    _dump_json(entries, directory / "manifest.json")
    _dump_json(meta, directory / "config.json")
    return directory


def _read_tensors(path, entries, total, base=0):
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size < base + total:
        raise CheckpointError(f"{path}: truncated ({raw.size} bytes, expected {base + total})")
    out = OrderedDict()
    for e in entries:
        n = math.prod(e["shape"])
        start = base + e["offset"]
        out[e["name"]] = raw[start:start + n * _DTYPE.itemsize].view(_DTYPE).reshape(e["shape"]).astype(np.float32)
    return out


def load(directory, with_optimizer: bool = True) -> Checkpoint:
    directory = Path(directory)
    for fname in ("config.json", "manifest.json", "params.bin"):
        if not (directory / fname).exists():
            raise CheckpointError(f"{directory}: missing {fname}")
    with open(directory / "config.json", encoding="utf-8") as f:
        meta = json.load(f)
    with open(directory / "manifest.json", encoding="utf-8") as f:
        stored = json.load(f)
    try:
        config = EncoderConfig(**meta["config"]).validate()
    except TypeError as e:
        raise CheckpointError(f"{directory}: bad config ({e})") from None
    entries, total = manifest(config)
    if stored != entries:
        raise CheckpointError(f"{directory}: manifest does not match config")
    params = _read_tensors(directory / "params.bin", entries, total)
    opt = None
    if with_optimizer and "optimizer" in meta and (directory / "optimizer.bin").exists():
        hyper = dict(meta["optimizer"])
        step = hyper.pop("step")
        opt = AdamState(step=step, **hyper)
        opt.m = _read_tensors(directory / "optimizer.bin", entries, total)
        opt.v = _read_tensors(directory / "optimizer.bin", entries, total, base=total)
    return Checkpoint(config, params, int(meta["step"]), int(meta["seed"]), meta["vocab_hash"], opt)
