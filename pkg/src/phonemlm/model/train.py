"""Pretraining loop, evaluation and feature extraction."""
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..dataset import IGNORE, PackedBlock, collate, dynamic_mask, epoch_order, n_batches
from ..errors import CheckpointError, ConfigError
from ..vocab import MASK_ID, Vocabulary, encode
from . import checkpoint as ckpt_io
from .encoder import EncoderConfig, _forward, forward, init_params, loss_and_grads
from .optim import AdamState, adam_step, lr_schedule

log = logging.getLogger(__name__)

_DROPOUT_SALT = 0xD20F


@dataclass
class TrainConfig:
    batch_size: int = 16
    epochs: int = 20
    max_steps: Optional[int] = None     # overrides epochs when set
    peak_lr: float = 1e-4
    warmup_epochs: float = 2.0
    warmup_steps: Optional[int] = None  # overrides warmup_epochs when set
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-6
    weight_decay: float = 0.01
    p_select: float = 0.15
    p_mask: float = 0.8
    p_random: float = 0.1
    checkpoint_every: int = 0
    seed: int = 0

    def mask_kw(self) -> dict:
        return {"p_select": self.p_select, "p_mask": self.p_mask, "p_random": self.p_random}


@dataclass
class Schedule:
    steps_per_epoch: int
    total_steps: int
    warmup_steps: int


def make_schedule(n_blocks: int, tc: TrainConfig) -> Schedule:
    if n_blocks == 0:
        raise ConfigError("training needs a non-empty dataset")
    spe = n_batches(n_blocks, tc.batch_size)
    total = tc.max_steps if tc.max_steps is not None else tc.epochs * spe
    warm = tc.warmup_steps if tc.warmup_steps is not None else int(round(tc.warmup_epochs * spe))
    return Schedule(spe, total, min(warm, total))


def batch_at(blocks: Sequence[PackedBlock], vocab_size: int, tc: TrainConfig, epoch: int, index: int) -> dict:
    """The ``index``-th batch of ``epoch``; depends only on (seed, epoch, index)."""
    order = epoch_order(len(blocks), tc.seed, epoch)
    idx = order[index * tc.batch_size:(index + 1) * tc.batch_size]
    return collate([dynamic_mask(blocks[i], vocab_size, tc.seed, epoch, int(i), **tc.mask_kw()) for i in idx])


@dataclass
class TrainResult:
    params: dict
    optimizer: AdamState
    step: int
    log: List[tuple] = field(default_factory=list)  # (step, lr, loss)


def train(blocks: Sequence[PackedBlock], config: EncoderConfig, tc: TrainConfig, vocab_hash: str = "",
          out_dir=None, resume: Optional[ckpt_io.Checkpoint] = None, until: Optional[int] = None) -> TrainResult:
    """Train with per-epoch re-masking; optionally checkpoint into ``out_dir``.

    ``until`` stops early at that step (the schedule still spans the full run),
    which together with ``resume`` allows interrupted runs to continue exactly.
    """
    config.validate()
    sched = make_schedule(len(blocks), tc)
    longest = max(len(b) for b in blocks)
    if longest > config.max_positions:
        raise ConfigError(f"block of length {longest} exceeds max_positions {config.max_positions}")
    hyper = {"beta1": tc.beta1, "beta2": tc.beta2, "eps": tc.eps, "weight_decay": tc.weight_decay}
    if resume is not None:
        if resume.config != config:
            raise CheckpointError("resume checkpoint was trained with a different encoder config")
        params = resume.params
        state = resume.optimizer or AdamState.for_params(params, **hyper)
        start = resume.step
    else:
        params = init_params(config, tc.seed)
        state = AdamState.for_params(params, **hyper)
        start = 0
    stop = sched.total_steps if until is None else min(until, sched.total_steps)
    result = TrainResult(params, state, start)

    def snapshot(directory, step):
        ckpt_io.save(directory, ckpt_io.Checkpoint(config, params, step, tc.seed, vocab_hash, state))

    for step in range(start, stop):
        epoch, index = divmod(step, sched.steps_per_epoch)
        batch = batch_at(blocks, config.vocab_size, tc, epoch, index)
        rng = np.random.default_rng([tc.seed, step, _DROPOUT_SALT])
        loss, grads, _ = loss_and_grads(params, config, batch, train=True, rng=rng)
        lr = lr_schedule(step + 1, sched.total_steps, sched.warmup_steps, tc.peak_lr)
        adam_step(params, grads, state, lr)
        result.log.append((step + 1, lr, loss))
        if (step + 1) % 100 == 0:
            log.info("step %d lr %.3g loss %.4f", step + 1, lr, loss)
        if out_dir is not None and tc.checkpoint_every and (step + 1) % tc.checkpoint_every == 0 and step + 1 < stop:
            snapshot(Path(out_dir) / "checkpoints" / f"step_{step + 1:07d}", step + 1)
    result.step = stop
    if out_dir is not None:
        snapshot(out_dir, stop)
        write_metrics(result.log, Path(out_dir) / "metrics.csv", append=resume is not None)
    return result


def write_metrics(rows, path, append=False):
    mode = "a" if append and Path(path).exists() else "w"
    with open(path, mode, encoding="utf-8", newline="\n") as f:
        if mode == "w":
            f.write("step,lr,loss\n")
        for step, lr, loss in rows:
            f.write(f"{step},{lr!r},{loss!r}\n")


def smoothed(values, window: int = 50) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if len(v) < window:
        return np.array([v.mean()]) if len(v) else v
    c = np.cumsum(np.insert(v, 0, 0.0))
    return (c[window:] - c[:-window]) / window


def evaluate(params, config: EncoderConfig, blocks: Sequence[PackedBlock], seed: int = 0,
             epoch: int = 10 ** 6, batch_size: int = 32, mask_only: bool = False, **mask_kw) -> dict:
    """Masked-token top-1 accuracy and mean loss over freshly masked ``blocks``.

    With ``mask_only`` the accuracy counts only positions replaced by MASK.
    """
    correct = total = 0
    loss_sum = 0.0
    for start in range(0, len(blocks), batch_size):
        masked = [dynamic_mask(blocks[i], config.vocab_size, seed, epoch, i, **mask_kw)
                  for i in range(start, min(start + batch_size, len(blocks)))]
        batch = collate(masked)
        logits, _, _ = _forward(params, config, batch["input_ids"], batch["attention_mask"])
        sel = batch["labels"] != IGNORE
        if mask_only:
            sel &= batch["input_ids"] == MASK_ID
        pred = logits.argmax(-1)
        correct += int((pred[sel] == batch["labels"][sel]).sum())
        total += int(sel.sum())
        z = logits[sel].astype(np.float64)
        z -= z.max(-1, keepdims=True)
        logp = z - np.log(np.exp(z).sum(-1, keepdims=True))
        loss_sum -= float(logp[np.arange(len(z)), batch["labels"][sel]].sum())
    return {"accuracy": correct / max(total, 1), "loss": loss_sum / max(total, 1), "n": total}


def extract_features(sentence, vocab: Vocabulary, ckpt: ckpt_io.Checkpoint) -> np.ndarray:
    """Last-layer hidden states, one row per token including BOS and EOS."""
    if ckpt.config.vocab_size != len(vocab) or (ckpt.vocab_hash and ckpt.vocab_hash != vocab.digest()):
        raise CheckpointError("vocabulary does not match the checkpoint")
    ids = np.asarray([encode(sentence, vocab)])
    _, hidden = forward(ckpt.params, ckpt.config, ids, train=False)
    return hidden[0]
