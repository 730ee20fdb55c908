"""Bidirectional transformer encoder with a masked-LM head, in plain numpy.

Post-layer-norm blocks (sublayer -> residual add -> layer norm), learned
absolute positions, GELU feed-forward, and an output projection tied to the
token embedding.  Forward and backward passes are written out by hand; every
intermediate needed by the backward pass is kept in a cache.
"""
import math
from collections import OrderedDict
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import erf

from ..dataset import IGNORE
from ..errors import ConfigError
from ..vocab import PAD_ID

Params = Dict[str, np.ndarray]


@dataclass(frozen=True)
class EncoderConfig:
    n_layers: int = 4
    hidden: int = 128
    n_heads: int = 4
    ffn_dim: int = 512
    max_positions: int = 128
    vocab_size: int = 0
    dropout: float = 0.1
    ln_eps: float = 1e-5

    def validate(self) -> "EncoderConfig":
        checks = [
            (self.n_layers >= 1, "n_layers must be >= 1"),
            (self.hidden >= 1 and self.n_heads >= 1, "hidden and n_heads must be >= 1"),
            (self.hidden % max(self.n_heads, 1) == 0, "hidden must be divisible by n_heads"),
            (self.ffn_dim >= 1, "ffn_dim must be >= 1"),
            (self.max_positions >= 1, "max_positions must be >= 1"),
            (self.vocab_size >= 1, "vocab_size must be >= 1"),
            (0.0 <= self.dropout < 1.0, "dropout must be in [0, 1)"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(f"invalid encoder config: {msg}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def base_preset(vocab_size: int = 1960) -> EncoderConfig:
    return EncoderConfig(12, 768, 12, 3072, 512, vocab_size, 0.1)


def desk_preset(vocab_size: int) -> EncoderConfig:
    return EncoderConfig(4, 128, 4, 512, 128, vocab_size, 0.1)


PRESETS = {"base": base_preset, "desk": desk_preset}


def param_shapes(config: EncoderConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    """Every tensor's name and shape, in checkpoint order."""
    h, f, v = config.hidden, config.ffn_dim, config.vocab_size
    shapes = OrderedDict()
    shapes["embed.tokens"] = (v, h)
    shapes["embed.positions"] = (config.max_positions, h)
    shapes["embed.norm.weight"] = (h,)
    shapes["embed.norm.bias"] = (h,)
    for i in range(config.n_layers):
        p = f"layers.{i}."
        for proj in "qkvo":
            shapes[p + f"attn.{proj}.weight"] = (h, h)
            shapes[p + f"attn.{proj}.bias"] = (h,)
        shapes[p + "attn_norm.weight"] = (h,)
        shapes[p + "attn_norm.bias"] = (h,)
        shapes[p + "ffn.in.weight"] = (h, f)
        shapes[p + "ffn.in.bias"] = (f,)
        shapes[p + "ffn.out.weight"] = (f, h)
        shapes[p + "ffn.out.bias"] = (h,)
        shapes[p + "ffn_norm.weight"] = (h,)
        shapes[p + "ffn_norm.bias"] = (h,)
    shapes["head.dense.weight"] = (h, h)
    shapes["head.dense.bias"] = (h,)
    shapes["head.norm.weight"] = (h,)
    shapes["head.norm.bias"] = (h,)
    shapes["head.bias"] = (v,)
    return shapes


def param_count(config: EncoderConfig) -> int:
    return sum(math.prod(s) for s in param_shapes(config).values())


def is_norm(name: str) -> bool:
    return "norm." in name


def is_bias(name: str) -> bool:
    return name.endswith(".bias") or name == "head.bias"


def _truncated_normal(rng, shape, std, dtype):
    out = rng.standard_normal(shape)
    bad = np.abs(out) > 2.0
    while bad.any():
        out[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(out) > 2.0
    return (out * std).astype(dtype)


def init_params(config: EncoderConfig, seed: int = 0, std: float = 0.02, dtype=np.float32) -> Params:
    """Weights ~ N(0, std) truncated at two standard deviations; biases 0; norm gains 1."""
    config.validate()
    rng = np.random.default_rng(seed)
    params: Params = OrderedDict()
    for name, shape in param_shapes(config).items():
        if is_norm(name):
            fill = 1.0 if name.endswith("weight") else 0.0
            params[name] = np.full(shape, fill, dtype=dtype)
        elif is_bias(name):
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            params[name] = _truncated_normal(rng, shape, std, dtype)
    return params


# ---------------------------------------------------------------------------
# Primitives.  Each *_fwd returns (output, cache); each *_bwd consumes the cache.
# ---------------------------------------------------------------------------

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gelu(x):
    return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))


def gelu_fwd(x):
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    return x * cdf, cdf


def gelu_grad(x, cdf=None):
    if cdf is None:
        cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    return cdf + x * _INV_SQRT2PI * np.exp(-0.5 * x * x)


def layer_norm_fwd(x, gain, bias, eps):
    mu = x.mean(-1, keepdims=True)
    xc = x - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(-1, keepdims=True) + eps)
    xhat = xc * inv
    return xhat * gain + bias, (xhat, inv, gain)


def layer_norm_bwd(dy, cache):
    xhat, inv, gain = cache
    axes = tuple(range(dy.ndim - 1))
    dgain = (dy * xhat).sum(axes)
    dbias = dy.sum(axes)
    dxhat = dy * gain
    dx = inv * (dxhat - dxhat.mean(-1, keepdims=True) - xhat * (dxhat * xhat).mean(-1, keepdims=True))
    return dx, dgain, dbias


def dropout_fwd(x, p, rng):
    if rng is None or p <= 0.0:
        return x, None
    keep = (rng.random(x.shape, dtype=np.float32) >= p).astype(x.dtype) / x.dtype.type(1.0 - p)
    return x * keep, keep


def dropout_bwd(dy, keep):
    return dy if keep is None else dy * keep


def softmax(s):
    m = s.max(-1, keepdims=True)
    e = np.exp(s - m)
    return e / e.sum(-1, keepdims=True)


def _linear_bwd(dy, x, w):
    """Grad of y = x @ w + b for 2-D ``x`` [N, in] and ``dy`` [N, out]."""
    return dy @ w.T, x.T @ dy, dy.sum(0)


# ---------------------------------------------------------------------------
# Forward / backward
# ---------------------------------------------------------------------------

def _check_batch(input_ids, config):
    if input_ids.ndim != 2:
        raise ValueError(f"input_ids must be 2-D (batch, time), got shape {input_ids.shape}")
    if input_ids.shape[1] > config.max_positions:
        raise ValueError(f"sequence length {input_ids.shape[1]} exceeds max_positions {config.max_positions}")
    if input_ids.size and (input_ids.min() < 0 or input_ids.max() >= config.vocab_size):
        raise ValueError("token id outside the vocabulary")


def _forward(params, config, input_ids, attention_mask=None, train=False, rng=None):
    input_ids = np.asarray(input_ids)
    _check_batch(input_ids, config)
    if attention_mask is None:
        attention_mask = input_ids != PAD_ID
    attention_mask = np.asarray(attention_mask, dtype=bool)
    if attention_mask.shape != input_ids.shape:
        raise ValueError("attention_mask shape does not match input_ids")
    B, T = input_ids.shape
    H, nh = config.hidden, config.n_heads
    dh = H // nh
    N = B * T
    p = config.dropout if train else 0.0
    rng = rng if train else None
    dtype = params["embed.tokens"].dtype
    scale = dtype.type(1.0 / math.sqrt(dh))
    key_bias = np.where(attention_mask, 0.0, -np.inf).astype(dtype)[:, None, None, :]
    eps = config.ln_eps

    # Activations are kept flat as [B*T, H]; attention reshapes to [B, heads, T, dh].
    def heads(t):
        return t.reshape(B, T, nh, dh).transpose(0, 2, 1, 3)

    cache = {"ids": input_ids, "T": T, "layers": []}
    x = (params["embed.tokens"][input_ids] + params["embed.positions"][:T]).reshape(N, H)
    x, cache["embed_ln"] = layer_norm_fwd(x, params["embed.norm.weight"], params["embed.norm.bias"], eps)
    x, cache["embed_drop"] = dropout_fwd(x, p, rng)

    for i in range(config.n_layers):
        pre = f"layers.{i}."
        c = {"x": x}
        q = heads(x @ params[pre + "attn.q.weight"] + params[pre + "attn.q.bias"])
        k = heads(x @ params[pre + "attn.k.weight"] + params[pre + "attn.k.bias"])
        v = heads(x @ params[pre + "attn.v.weight"] + params[pre + "attn.v.bias"])
        a = softmax(q @ k.transpose(0, 1, 3, 2) * scale + key_bias)
        ad, c["attn_drop"] = dropout_fwd(a, p, rng)
        ctx = (ad @ v).transpose(0, 2, 1, 3).reshape(N, H)
        o = ctx @ params[pre + "attn.o.weight"] + params[pre + "attn.o.bias"]
        o, c["out_drop"] = dropout_fwd(o, p, rng)
        h1, c["ln1"] = layer_norm_fwd(x + o, params[pre + "attn_norm.weight"], params[pre + "attn_norm.bias"], eps)
        u = h1 @ params[pre + "ffn.in.weight"] + params[pre + "ffn.in.bias"]
        g, cdf = gelu_fwd(u)
        f = g @ params[pre + "ffn.out.weight"] + params[pre + "ffn.out.bias"]
        f, c["ffn_drop"] = dropout_fwd(f, p, rng)
        x, c["ln2"] = layer_norm_fwd(h1 + f, params[pre + "ffn_norm.weight"], params[pre + "ffn_norm.bias"], eps)
        c.update(q=q, k=k, v=v, a=a, ad=ad, ctx=ctx, h1=h1, u=u, g=g, cdf=cdf)
        cache["layers"].append(c)

    hidden = x
    z = hidden @ params["head.dense.weight"] + params["head.dense.bias"]
    zg, zcdf = gelu_fwd(z)
    zn, cache["head_ln"] = layer_norm_fwd(zg, params["head.norm.weight"], params["head.norm.bias"], eps)
    logits = zn @ params["embed.tokens"].T + params["head.bias"]
    cache.update(hidden=hidden, z=z, zcdf=zcdf, zn=zn, scale=scale, dims=(B, T, H, nh, dh))
    V = logits.shape[-1]
    return logits.reshape(B, T, V), hidden.reshape(B, T, H), cache


def forward(params, config, input_ids, attention_mask=None, train=False, rng=None):
    """Return ``(logits [B,T,V], hidden_states [B,T,H])``.

    Dropout is applied only when ``train`` is true and an RNG is provided.
    """
    logits, hidden, _ = _forward(params, config, input_ids, attention_mask, train, rng)
    return logits, hidden


def attention_probs(params, config, input_ids, attention_mask=None):
    """Per-layer attention matrices [B, heads, T, T] at inference time."""
    _, _, cache = _forward(params, config, input_ids, attention_mask)
    return [c["a"] for c in cache["layers"]]


def mlm_loss(logits, labels):
    """Mean cross-entropy over labeled positions, accumulated in float64.

    Returns ``(loss, dlogits, n_labeled)``; with nothing labeled the loss is 0
    and ``n_labeled`` is 0.
    """
    labels = np.asarray(labels)
    if logits.shape[:-1] != labels.shape:
        raise ValueError(f"logits {logits.shape} and labels {labels.shape} disagree")
    sel = labels != IGNORE
    n = int(sel.sum())
    dlogits = np.zeros_like(logits)
    if n == 0:
        return 0.0, dlogits, 0
    z = logits[sel].astype(np.float64)
    tgt = labels[sel]
    z = z - z.max(-1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(-1, keepdims=True))
    rows = np.arange(n)
    loss = float(-logp[rows, tgt].sum() / n)
    d = np.exp(logp)
    d[rows, tgt] -= 1.0
    dlogits[sel] = (d / n).astype(logits.dtype)
    return loss, dlogits, n


def _backward(params, config, cache, dlogits):
    B, T, H, nh, dh = cache["dims"]
    N = B * T
    scale = cache["scale"]
    grads: Params = OrderedDict((k, np.zeros_like(v)) for k, v in params.items())
    tok = params["embed.tokens"]

    dl = dlogits.reshape(N, -1)
    grads["head.bias"] += dl.sum(0)
    grads["embed.tokens"] += dl.T @ cache["zn"]
    dzg, grads["head.norm.weight"], grads["head.norm.bias"] = layer_norm_bwd(dl @ tok, cache["head_ln"])
    dz = dzg * gelu_grad(cache["z"], cache["zcdf"])
    dx, grads["head.dense.weight"], grads["head.dense.bias"] = _linear_bwd(dz, cache["hidden"], params["head.dense.weight"])

    def merge(t):
        return t.transpose(0, 2, 1, 3).reshape(N, H)

    for i in reversed(range(config.n_layers)):
        pre = f"layers.{i}."
        c = cache["layers"][i]
        dsum2, grads[pre + "ffn_norm.weight"], grads[pre + "ffn_norm.bias"] = layer_norm_bwd(dx, c["ln2"])
        df = dropout_bwd(dsum2, c["ffn_drop"])
        dg, grads[pre + "ffn.out.weight"], grads[pre + "ffn.out.bias"] = _linear_bwd(df, c["g"], params[pre + "ffn.out.weight"])
        du = dg * gelu_grad(c["u"], c["cdf"])
        dh1, grads[pre + "ffn.in.weight"], grads[pre + "ffn.in.bias"] = _linear_bwd(du, c["h1"], params[pre + "ffn.in.weight"])
        dh1 += dsum2
        dsum1, grads[pre + "attn_norm.weight"], grads[pre + "attn_norm.bias"] = layer_norm_bwd(dh1, c["ln1"])
        do = dropout_bwd(dsum1, c["out_drop"])
        dctx, grads[pre + "attn.o.weight"], grads[pre + "attn.o.bias"] = _linear_bwd(do, c["ctx"], params[pre + "attn.o.weight"])
        dctx = dctx.reshape(B, T, nh, dh).transpose(0, 2, 1, 3)
        dad = dctx @ c["v"].transpose(0, 1, 3, 2)
        dv = c["ad"].transpose(0, 1, 3, 2) @ dctx
        da = dropout_bwd(dad, c["attn_drop"])
        a = c["a"]
        ds = a * (da - (da * a).sum(-1, keepdims=True)) * scale
        dq = ds @ c["k"]
        dk = ds.transpose(0, 1, 3, 2) @ c["q"]
        x = c["x"]
        dx = dsum1
        for proj, dt in (("q", dq), ("k", dk), ("v", dv)):
            dxi, grads[pre + f"attn.{proj}.weight"], grads[pre + f"attn.{proj}.bias"] = _linear_bwd(
                merge(dt), x, params[pre + f"attn.{proj}.weight"])
            dx = dx + dxi

    dx = dropout_bwd(dx, cache["embed_drop"])
    dx0, grads["embed.norm.weight"], grads["embed.norm.bias"] = layer_norm_bwd(dx, cache["embed_ln"])
    grads["embed.positions"][:T] += dx0.reshape(B, T, H).sum(0)
    np.add.at(grads["embed.tokens"], cache["ids"].reshape(-1), dx0)
    return grads


def loss_and_grads(params, config, batch, train=False, rng=None):
    """Masked-LM loss and exact gradients for every parameter tensor.

    ``batch`` is a dict with ``input_ids``, ``labels`` and optionally
    ``attention_mask``.  Returns ``(loss, grads, n_labeled)``.
    """
    logits, _, cache = _forward(params, config, batch["input_ids"], batch.get("attention_mask"), train, rng)
    loss, dlogits, n = mlm_loss(logits, batch["labels"])
    if n == 0:
        return 0.0, OrderedDict((k, np.zeros_like(v)) for k, v in params.items()), 0
    return loss, _backward(params, config, cache, dlogits), n


def backward(params, config, batch):
    """Gradients of the masked-LM loss with dropout disabled."""
    return loss_and_grads(params, config, batch, train=False)[1]


def cast_params(params: Params, dtype) -> Params:
    return OrderedDict((k, v.astype(dtype)) for k, v in params.items())
