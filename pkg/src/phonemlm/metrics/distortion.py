"""DTW alignment, mel-cepstral distortion and F0 error between two utterances."""
import math
from dataclasses import asdict, dataclass
from typing import List, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import MetricError
from .cepstrum import MelCepstrogram

MCD_SCALE = 10.0 / math.log(10.0)

# Order matters: on equal cost the earlier step is preferred.
_STEPS = ((1, 1), (1, 0), (0, 1))


def _frames(x):
    return x.frames if isinstance(x, MelCepstrogram) else np.asarray(x, dtype=np.float64)


def cost_matrix(a, b) -> np.ndarray:
    """Euclidean distances between c_1..c_D of every frame pair (c_0 dropped)."""
    return cdist(_frames(a)[:, 1:], _frames(b)[:, 1:])


def dtw_path(cost: np.ndarray) -> Tuple[List[Tuple[int, int]], float]:
    """Minimum-cost monotone path from (0, 0) to (n-1, m-1) and its total cost."""
    n, m = cost.shape
    if n == 0 or m == 0:
        raise MetricError("dtw on an empty sequence")
    acc = np.full((n, m), np.inf)
    move = np.zeros((n, m), dtype=np.int8)
    c = cost.tolist()
    A = acc.tolist()
    M = move.tolist()
    for i in range(n):
        row, ci = A[i], c[i]
        up = A[i - 1] if i else None
        for j in range(m):
            if i == 0 and j == 0:
                row[0] = ci[0]
                continue
            best, arg = math.inf, 0
            if i and j and up[j - 1] < best:
                best, arg = up[j - 1], 0
            if i and up[j] < best:
                best, arg = up[j], 1
            if j and row[j - 1] < best:
                best, arg = row[j - 1], 2
            row[j] = best + ci[j]
            M[i][j] = arg
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while (i, j) != (0, 0):
        di, dj = _STEPS[M[i][j]]
        i, j = i - di, j - dj
        path.append((i, j))
    path.reverse()
    return path, A[n - 1][m - 1]


def dtw_align(a, b) -> List[Tuple[int, int]]:
    if len(_frames(a)) == 0 or len(_frames(b)) == 0:
        raise MetricError("dtw on an empty sequence")
    return dtw_path(cost_matrix(a, b))[0]


def mcd(a: MelCepstrogram, b: MelCepstrogram, path=None) -> float:
    """Mean mel-cepstral distortion in dB along the DTW path, c_0 excluded."""
    if a.params != b.params:
        raise MetricError(f"cepstra extracted with different parameters: {a.params} vs {b.params}")
    if path is None:
        path = dtw_align(a, b)
    i, j = np.asarray(path).T
    diff = a.frames[i, 1:] - b.frames[j, 1:]
    return float(np.mean(MCD_SCALE * np.sqrt(2.0 * (diff * diff).sum(1))))


def rmse_f0(fa, fb, path) -> Tuple[float, int]:
    """Root-mean-square F0 difference in cents over path pairs where both frames are voiced.

    Returns ``(rmse, n_voiced_pairs)``.
    """
    va = np.asarray(getattr(fa, "values", fa), dtype=np.float64)
    vb = np.asarray(getattr(fb, "values", fb), dtype=np.float64)
    i, j = np.asarray(path).T
    if i.max() >= len(va) or j.max() >= len(vb):
        raise MetricError("F0 tracks are shorter than the alignment path")
    x, y = va[i], vb[j]
    both = (x > 0) & (y > 0)
    if not both.any():
        raise MetricError("no frame pairs where both utterances are voiced")
    cents = 1200.0 * np.log2(x[both] / y[both])
    return float(np.sqrt(np.mean(cents * cents))), int(both.sum())


@dataclass(frozen=True)
class MetricReport:
    mcd_db: float
    rmse_f0_cent: float
    n_aligned_frames: int
    n_voiced_pairs: int

    def to_dict(self) -> dict:
        return asdict(self)
