"""16-bit PCM mono WAV input/output."""
import wave
from dataclasses import dataclass

import numpy as np

from ..errors import FormatError, MissingInputError


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise FormatError("sample_rate must be positive")
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1:
            raise FormatError("audio must be mono")
        if not np.all(np.isfinite(s)):
            raise FormatError("audio contains non-finite samples")
        object.__setattr__(self, "samples", s)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def read_wav(path) -> AudioBuffer:
    try:
        with wave.open(str(path), "rb") as w:
            if w.getnchannels() != 1:
                raise FormatError(f"{path}: expected mono audio, got {w.getnchannels()} channels")
            if w.getsampwidth() != 2:
                raise FormatError(f"{path}: expected 16-bit PCM, got {8 * w.getsampwidth()}-bit")
            if w.getcomptype() != "NONE":
                raise FormatError(f"{path}: compressed WAV not supported")
            rate = w.getframerate()
            data = w.readframes(w.getnframes())
    except FileNotFoundError:
        raise MissingInputError(f"{path}: no such file") from None
    except (wave.Error, EOFError) as e:
        raise FormatError(f"{path}: not a readable WAV file ({e})") from None
    samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    return AudioBuffer(samples, rate)


def write_wav(path, audio: AudioBuffer) -> None:
    pcm = np.clip(np.round(audio.samples * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(audio.sample_rate)
        w.writeframes(pcm.tobytes())


def sine(freq: float, seconds: float, sample_rate: int = 16000, amplitude: float = 0.5) -> AudioBuffer:
    t = np.arange(int(round(seconds * sample_rate))) / sample_rate
    return AudioBuffer(amplitude * np.sin(2 * np.pi * freq * t), sample_rate)
