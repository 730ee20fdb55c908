"""Autocorrelation pitch tracking."""
from dataclasses import dataclass

import numpy as np

from ..errors import MetricError
from .audio import AudioBuffer
from .cepstrum import frame_signal

VOICING_THRESHOLD = 0.5
RMS_FLOOR = 1e-4
# A candidate peak this close to the global maximum wins if it has a shorter lag;
# guards against picking a subharmonic (octave errors).
OCTAVE_GUARD = 0.9


@dataclass(frozen=True)
class F0Track:
    values: np.ndarray   # Hz, 0 = unvoiced
    frame_shift: float
    f0_floor: float
    f0_ceil: float

    def __len__(self):
        return len(self.values)

    @property
    def voiced(self) -> np.ndarray:
        return self.values > 0


def normalized_autocorrelation(frame: np.ndarray, lag_min: int, lag_max: int) -> np.ndarray:
    """r[k] = <x[:-k], x[k:]> / (|x[:-k]| |x[k:]|) for k in [lag_min, lag_max]."""
    n = len(frame)
    full = np.correlate(frame, frame, mode="full")[n - 1:]
    sq = np.concatenate([[0.0], np.cumsum(frame * frame)])
    lags = np.arange(lag_min, lag_max + 1)
    head = sq[n - lags]               # energy of frame[:n-k]
    tail = sq[n] - sq[lags]           # energy of frame[k:]
    denom = np.sqrt(head * tail)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(denom > 0, full[lags] / denom, 0.0)
    return r


def _frame_f0(frame, sr, lag_min, lag_max, threshold):
    frame = frame - frame.mean()
    if np.sqrt(np.mean(frame * frame)) <= RMS_FLOOR:
        return 0.0
    r = normalized_autocorrelation(frame, lag_min - 1, lag_max + 1)
    inner = r[1:-1]
    peaks = np.flatnonzero((inner > r[:-2]) & (inner >= r[2:]))
    if len(peaks) == 0:
        return 0.0
    best = inner[peaks].max()
    if best <= threshold:
        return 0.0
    p = int(peaks[np.argmax(inner[peaks] >= OCTAVE_GUARD * best)]) + 1
    a, b, c = r[p - 1], r[p], r[p + 1]
    denom = a - 2 * b + c
    shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    lag = lag_min - 1 + p + shift
    return sr / lag


def extract_f0(audio: AudioBuffer, frame_len: float = 0.04, hop: float = 0.005,
               f0_floor: float = 60.0, f0_ceil: float = 500.0,
               threshold: float = VOICING_THRESHOLD) -> F0Track:
    """Per-frame F0 from the first strong normalized-autocorrelation peak.

    A frame is voiced when that peak exceeds ``threshold`` and the frame RMS
    exceeds 1e-4.  The peak lag is refined by parabolic interpolation.
    """
    sr = audio.sample_rate
    flen = int(round(frame_len * sr))
    fhop = int(round(hop * sr))
    if len(audio.samples) < flen:
        raise MetricError(f"audio shorter than one frame ({len(audio.samples)} < {flen} samples)")
    lag_min = max(2, int(np.floor(sr / f0_ceil)))
    lag_max = min(int(np.ceil(sr / f0_floor)), flen - 2)
    frames = frame_signal(audio.samples, flen, fhop)
    values = np.array([_frame_f0(f, sr, lag_min, lag_max, threshold) for f in frames])
    values[(values < f0_floor) | (values > f0_ceil)] = 0.0
    return F0Track(values, fhop / sr, f0_floor, f0_ceil)
