"""Block packing, dynamic masking, and batching for masked-LM pretraining."""
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence

import numpy as np

from .errors import FormatError
from .vocab import BOS_ID, EOS_ID, N_SPECIAL, MASK_ID, PAD_ID, Vocabulary

IGNORE = -100
_SHUFFLE_SALT = 0x5EED


@dataclass(frozen=True)
class PackedBlock:
    ids: tuple

    def __len__(self):
        return len(self.ids)


@dataclass(frozen=True)
class MaskedBlock:
    input_ids: tuple
    labels: tuple


def pack_blocks(encoded: Iterable[Sequence[int]], max_len: int = 512,
                doc_ids: Optional[Sequence] = None) -> List[PackedBlock]:
    """Greedily pack BOS..EOS encodings into blocks of at most ``max_len`` ids.

    Each sentence contributes its body plus EOS after a single leading BOS.  A
    block is closed when the next sentence would overflow it or when
    ``doc_ids`` changes.  Overlong sentences are truncated, keeping EOS last.
    """
    if max_len < 4:
        raise ValueError("max_len must be >= 4")
    blocks: List[PackedBlock] = []
    cur = [BOS_ID]
    cur_doc = object()
    for n, enc in enumerate(encoded):
        body = list(enc[1:-1])
        doc = doc_ids[n] if doc_ids is not None else None
        if len(cur) > 1 and (len(cur) + len(body) + 1 > max_len or doc != cur_doc):
            blocks.append(PackedBlock(tuple(cur)))
            cur = [BOS_ID]
        cur_doc = doc
        if 1 + len(body) + 1 > max_len:
            blocks.append(PackedBlock(tuple([BOS_ID] + body[:max_len - 2] + [EOS_ID])))
            continue
        cur += body + [EOS_ID]
    if len(cur) > 1:
        blocks.append(PackedBlock(tuple(cur)))
    return blocks


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def _split_counts(k: int, probs: Sequence[Fraction]) -> List[int]:
    """Largest-remainder apportionment of ``k`` items; ties go to earlier buckets."""
    quotas = [p * k for p in probs]
    counts = [math.floor(q) for q in quotas]
    order = sorted(range(len(probs)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:k - sum(counts)]:
        counts[i] += 1
    return counts


def dynamic_mask(block: PackedBlock, vocab_size: int, seed: int, epoch: int, index: int = 0,
                 p_select: float = 0.15, p_mask: float = 0.8, p_random: float = 0.1) -> MaskedBlock:
    """Select and corrupt positions of one block for one epoch.

    Exactly ``max(1, round(p_select * n))`` of the ``n`` non-special positions
    are labeled.  Those are split between MASK, a random non-special id, and
    unchanged by largest-remainder rounding.  The RNG stream depends only on
    ``(seed, epoch, index)``.
    """
    if isinstance(vocab_size, Vocabulary):
        vocab_size = len(vocab_size)
    fs, fm, fr = (Fraction(repr(p)) for p in (p_select, p_mask, p_random))
    if fm + fr > 1 or not 0 <= fs <= 1:
        raise ValueError("masking probabilities out of range")
    ids = np.asarray(block.ids, dtype=np.int64)
    labels = np.full(ids.shape, IGNORE, dtype=np.int64)
    maskable = np.flatnonzero(ids >= N_SPECIAL)
    n = len(maskable)
    if n == 0:
        return MaskedBlock(tuple(ids.tolist()), tuple(labels.tolist()))

    rng = np.random.default_rng([seed, epoch, index])
    k = min(n, max(1, _round_half_up(fs * n)))
    chosen = rng.choice(maskable, size=k, replace=False)
    n_mask, n_random, _ = _split_counts(k, [fm, fr, 1 - fm - fr])
    if vocab_size <= N_SPECIAL:
        n_random = 0  # nothing to sample from; those positions stay unchanged

    labels[chosen] = ids[chosen]
    out = ids.copy()
    out[chosen[:n_mask]] = MASK_ID
    rand_pos = chosen[n_mask:n_mask + n_random]
    out[rand_pos] = rng.integers(N_SPECIAL, max(vocab_size, N_SPECIAL + 1), size=len(rand_pos))
    return MaskedBlock(tuple(out.tolist()), tuple(labels.tolist()))


def epoch_order(n_blocks: int, seed: int, epoch: int) -> np.ndarray:
    return np.random.default_rng([seed, epoch, _SHUFFLE_SALT]).permutation(n_blocks)


def collate(masked: Sequence[MaskedBlock]) -> dict:
    width = max(len(m.input_ids) for m in masked)
    b = len(masked)
    input_ids = np.full((b, width), PAD_ID, dtype=np.int64)
    labels = np.full((b, width), IGNORE, dtype=np.int64)
    attn = np.zeros((b, width), dtype=np.int8)
    for r, m in enumerate(masked):
        n = len(m.input_ids)
        input_ids[r, :n] = m.input_ids
        labels[r, :n] = m.labels
        attn[r, :n] = 1
    return {"input_ids": input_ids, "labels": labels, "attention_mask": attn}


def make_batches(blocks: Sequence[PackedBlock], batch_size: int, seed: int, epoch: int,
                 vocab_size: int, **mask_kw) -> Iterator[dict]:
    """Yield the padded, masked batches of one epoch in a deterministic shuffled order."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    order = epoch_order(len(blocks), seed, epoch)
    for start in range(0, len(order), batch_size):
        idx = order[start:start + batch_size]
        yield collate([dynamic_mask(blocks[i], vocab_size, seed, epoch, int(i), **mask_kw) for i in idx])


def n_batches(n_blocks: int, batch_size: int) -> int:
    return -(-n_blocks // batch_size)


def batch_to_json(batch: dict) -> str:
    return json.dumps({k: batch[k].tolist() for k in ("input_ids", "labels", "attention_mask")})


def write_blocks(blocks: Iterable[PackedBlock], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for b in blocks:
            f.write(json.dumps(list(b.ids)) + "\n")


def read_blocks(path) -> List[PackedBlock]:
    blocks = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                ids = json.loads(line)
                if not isinstance(ids, list) or not all(isinstance(i, int) for i in ids):
                    raise ValueError("not an integer array")
            except ValueError as e:
                raise FormatError(f"{path}:{lineno}: bad block ({e})") from None
            blocks.append(PackedBlock(tuple(ids)))
    return blocks
