"""Central finite-difference check of the hand-written backward pass."""
from collections import OrderedDict

import numpy as np

from ..dataset import IGNORE
from .encoder import EncoderConfig, cast_params, init_params, is_bias, is_norm, loss_and_grads

# Below this magnitude both estimates are treated as an exact zero gradient
# (e.g. key biases, which softmax is invariant to).
ZERO_GRAD = 1e-8


def tensor_class(name: str) -> str:
    if name.startswith("embed.") and not is_norm(name):
        return "embedding"
    if is_norm(name):
        return "layer_norm"
    if ".attn." in name:
        return "attention"
    if ".ffn." in name:
        return "ffn"
    return "head"


def check_point(config: EncoderConfig, seed: int = 0):
    """A float64 parameter point and batch where finite differences are well conditioned.

    At the N(0, 0.02) initialization the embedding sum entering the first
    layer norm is tiny, which makes the loss sharply curved along embedding
    coordinates.  Embeddings are drawn at unit-ish scale instead, and norm
    gains/biases are jittered away from their 1/0 defaults.
    """
    rng = np.random.default_rng(seed)
    params = cast_params(init_params(config, seed, std=0.05), np.float64)
    for name in ("embed.tokens", "embed.positions"):
        params[name] = rng.normal(0.0, 0.5, params[name].shape)
    for name, value in params.items():
        if is_norm(name) or is_bias(name):
            params[name] = value + rng.normal(0.0, 0.1, value.shape)
    T = min(12, config.max_positions)
    ids = rng.integers(5, config.vocab_size, size=(2, T))
    ids[:, 0] = 0
    ids[1, T - 3:] = 1
    labels = np.full(ids.shape, IGNORE)
    for r, c in ((0, 3), (0, 5), (1, 2), (1, 6)):
        labels[r, c] = rng.integers(5, config.vocab_size)
    return params, {"input_ids": ids, "labels": labels}


def gradient_check(params, config, batch, n_coords: int = 240, step: float = 1e-3, seed: int = 0):
    """Compare analytic and central-difference gradients on sampled coordinates.

    Coordinates are spread round-robin over all tensors; embedding rows are
    sampled among tokens/positions actually present in the batch.  Returns a
    list of dicts with name, index, analytic, numeric and relative error.
    """
    rng = np.random.default_rng(seed)
    _, grads, _ = loss_and_grads(params, config, batch)
    ids = np.asarray(batch["input_ids"])
    names = list(params)
    rows = []
    for t in range(n_coords):
        name = names[t % len(names)]
        w = params[name]
        idx = [int(rng.integers(0, s)) for s in w.shape]
        if name == "embed.tokens":
            idx[0] = int(ids.flat[rng.integers(0, ids.size)])
        elif name == "embed.positions":
            idx[0] = int(rng.integers(0, ids.shape[1]))
        idx = tuple(idx)
        old = w[idx]
        w[idx] = old + step
        up = loss_and_grads(params, config, batch)[0]
        w[idx] = old - step
        down = loss_and_grads(params, config, batch)[0]
        w[idx] = old
        numeric = (up - down) / (2 * step)
        analytic = float(grads[name][idx])
        scale = max(abs(numeric), abs(analytic))
        err = abs(numeric - analytic) / scale if scale >= ZERO_GRAD else abs(numeric - analytic)
        rows.append({"name": name, "class": tensor_class(name), "index": idx,
                     "analytic": analytic, "numeric": numeric, "rel_error": err})
    return rows
