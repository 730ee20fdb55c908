"""End-to-end objective evaluation of a synthesized utterance against its reference."""
import json
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from ..errors import MetricError
from .audio import AudioBuffer, read_wav
from .cepstrum import mel_cepstrum
from .distortion import MetricReport, dtw_align, mcd, rmse_f0
from .f0 import extract_f0

DEFAULTS = {
    "mcep_frame": 0.025, "hop": 0.005, "n_mels": 80, "order": 24,
    "f0_frame": 0.04, "f0_floor": 60.0, "f0_ceil": 500.0, "voicing_threshold": 0.5,
}


def centered_f0(audio: AudioBuffer, opts: dict):
    """F0 track whose frames share centres with the cepstral frames.

    The pitch window is longer than the cepstral window, so the signal is
    zero-padded by the difference (split across both ends) first.
    """
    sr = audio.sample_rate
    extra = int(round(opts["f0_frame"] * sr)) - int(round(opts["mcep_frame"] * sr))
    left, right = max(extra, 0) // 2, max(extra, 0) - max(extra, 0) // 2
    padded = AudioBuffer(np.pad(audio.samples, (left, right)), sr)
    return extract_f0(padded, opts["f0_frame"], opts["hop"], opts["f0_floor"], opts["f0_ceil"],
                      opts["voicing_threshold"])


def evaluate_audio(ref: AudioBuffer, syn: AudioBuffer, **overrides) -> MetricReport:
    opts = dict(DEFAULTS, **overrides)
    if ref.sample_rate != syn.sample_rate:
        raise MetricError(f"sample rates differ: {ref.sample_rate} vs {syn.sample_rate}")
    ca = mel_cepstrum(ref, opts["mcep_frame"], opts["hop"], opts["n_mels"], opts["order"])
    cb = mel_cepstrum(syn, opts["mcep_frame"], opts["hop"], opts["n_mels"], opts["order"])
    path = dtw_align(ca, cb)
    fa, fb = centered_f0(ref, opts), centered_f0(syn, opts)
    rmse, n_voiced = rmse_f0(fa, fb, path)
    return MetricReport(mcd(ca, cb, path), rmse, len(path), n_voiced)


def evaluate_pair(ref_wav, syn_wav, **overrides) -> MetricReport:
    ref, syn = read_wav(ref_wav), read_wav(syn_wav)
    try:
        return evaluate_audio(ref, syn, **overrides)
    except MetricError as e:
        raise MetricError(f"{ref_wav} vs {syn_wav}: {e}") from None


def summarize(reports: Sequence[MetricReport]) -> dict:
    if not reports:
        return {"n_pairs": 0}
    return {
        "n_pairs": len(reports),
        "mcd_db": float(np.mean([r.mcd_db for r in reports])),
        "rmse_f0_cent": float(np.mean([r.rmse_f0_cent for r in reports])),
    }


def report_json(report: MetricReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True)
