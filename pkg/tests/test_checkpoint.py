import json

import numpy as np
import pytest

from phonemlm.errors import CheckpointError
from phonemlm.model import checkpoint as ckpt_io
from phonemlm.model.encoder import EncoderConfig, init_params
from phonemlm.model.optim import AdamState

CFG = EncoderConfig(n_layers=1, hidden=8, n_heads=2, ffn_dim=16, max_positions=10, vocab_size=12)


def make(with_opt=True):
    p = init_params(CFG, 3)
    opt = AdamState.for_params(p) if with_opt else None
    if opt:
        opt.step = 4
        for k in opt.m:
            opt.m[k] += 0.5
    return ckpt_io.Checkpoint(CFG, p, 4, 3, "abc", opt)


def test_roundtrip(tmp_path):
    ck = make()
    ckpt_io.save(tmp_path / "c", ck)
    back = ckpt_io.load(tmp_path / "c")
    assert back.config == CFG and back.step == 4 and back.seed == 3 and back.vocab_hash == "abc"
    assert all(np.array_equal(back.params[k], ck.params[k]) for k in ck.params)
    assert back.optimizer.step == 4 and np.all(back.optimizer.m["head.bias"] == 0.5)
    assert back.optimizer.beta2 == 0.98


def test_byte_identical_saves(tmp_path):
    ckpt_io.save(tmp_path / "a", make())
    ckpt_io.save(tmp_path / "b", make())
    for f in ("config.json", "manifest.json", "params.bin", "optimizer.bin"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_little_endian_layout(tmp_path):
    ck = make(False)
    ckpt_io.save(tmp_path / "c", ck)
    raw = (tmp_path / "c" / "params.bin").read_bytes()
    first = ck.params["embed.tokens"].ravel()[0]
    assert raw[:4] == np.float32(first).astype("<f4").tobytes()
    assert not (tmp_path / "c" / "optimizer.bin").exists()
    assert ckpt_io.load(tmp_path / "c").optimizer is None


def test_corrupt_checkpoints(tmp_path):
    ckpt_io.save(tmp_path / "c", make())
    with open(tmp_path / "c" / "params.bin", "r+b") as f:
        f.truncate(100)
    with pytest.raises(CheckpointError, match="truncated"):
        ckpt_io.load(tmp_path / "c")
    ckpt_io.save(tmp_path / "d", make())
    meta = json.loads((tmp_path / "d" / "config.json").read_text())
    meta["config"]["hidden"] = 16
    (tmp_path / "d" / "config.json").write_text(json.dumps(meta))
    with pytest.raises(CheckpointError, match="manifest"):
        ckpt_io.load(tmp_path / "d")
    with pytest.raises(CheckpointError, match="missing"):
        ckpt_io.load(tmp_path / "nothing")
