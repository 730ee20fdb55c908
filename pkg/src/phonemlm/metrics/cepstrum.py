"""Log-mel cepstra (MFCC-style): Hann window, power spectrum, HTK mel bank, log, DCT-II."""
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, rfft
from scipy.signal.windows import hann

from ..errors import MetricError
from .audio import AudioBuffer

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class MelCepstrogram:
    frames: np.ndarray    # [n_frames, order + 1], c_0 .. c_D
    frame_shift: float
    order: int
    params: tuple         # (sample_rate, frame_len, hop, n_mels, order)

    def __len__(self):
        return self.frames.shape[0]


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    return (n_samples - frame_len) // hop + 1


def frame_signal(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    n = frame_count(len(x), frame_len, hop)
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n)[:, None]
    return x[idx]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int, fmin: float = 0.0, fmax=None) -> np.ndarray:
    """Triangular filters evenly spaced on the HTK mel scale, shape [n_mels, n_fft//2 + 1]."""
    fmax = sample_rate / 2.0 if fmax is None else fmax
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    bins = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (bins[None, :] - lo) / (mid - lo)
    down = (hi - bins[None, :]) / (hi - mid)
    return np.maximum(0.0, np.minimum(up, down))


def mel_cepstrum(audio: AudioBuffer, frame_len: float = 0.025, hop: float = 0.005,
                 n_mels: int = 80, order: int = 24) -> MelCepstrogram:
    sr = audio.sample_rate
    flen = int(round(frame_len * sr))
    fhop = int(round(hop * sr))
    if len(audio.samples) < flen:
        raise MetricError(f"audio shorter than one frame ({len(audio.samples)} < {flen} samples)")
    if order + 1 > n_mels:
        raise MetricError("cepstral order must be below n_mels")
    n_fft = 1 << (flen - 1).bit_length()
    frames = frame_signal(audio.samples, flen, fhop) * hann(flen, sym=False)
    power = np.abs(rfft(frames, n_fft, axis=-1)) ** 2
    mel = power @ mel_filterbank(n_mels, n_fft, sr).T
    ceps = dct(np.log(np.maximum(mel, LOG_FLOOR)), type=2, norm="ortho", axis=-1)[:, :order + 1]
    return MelCepstrogram(ceps, fhop / sr, order, (sr, flen, fhop, n_mels, order))
