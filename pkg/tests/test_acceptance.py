"""Acceptance criteria; each test records one PASS/FAIL line in the terminal summary."""
import math
import time
import unicodedata

import numpy as np
import pytest

from phonemlm.corpus import Sentence
from phonemlm.dataset import IGNORE, dynamic_mask, pack_blocks
from phonemlm.metrics.audio import sine
from phonemlm.metrics.cepstrum import MelCepstrogram
from phonemlm.metrics.distortion import dtw_path, mcd, rmse_f0
from phonemlm.metrics.evaluate import evaluate_audio
from phonemlm.model.encoder import desk_preset, base_preset, param_count
from phonemlm.model.gradcheck import check_point, gradient_check, tensor_class
from phonemlm.model.train import TrainConfig, evaluate, smoothed, train
from phonemlm.resources import BUNDLED
from phonemlm.segment import DEFAULT_PROFILE, load_profile, segment_word, text2phonemesequence
from phonemlm.synthetic import BigramGrammar
from phonemlm.vocab import MASK_ID, build_vocab, encode

from conftest import record_acceptance
from pipeline import artifacts, run_pipeline
from test_metrics import brute_force

GOLDEN = "ˈe ɪ ▁ ˌm ə ɫ t i ˈɫ ɪ ŋ w ə ɫ ▁ ˈm ɑ d ə ɫ"


def check(name, passed, detail):
    record_acceptance(name, bool(passed), detail)
    assert passed, f"{name}: {detail}"


def test_golden_phonemization(eng_us):
    t = time.perf_counter()
    s = Sentence("d", "eng-us", ("a", "multilingual", "model"))
    out = str(text2phonemesequence(s, eng_us.pron, eng_us.rules, eng_us.profile))
    dt = time.perf_counter() - t
    check("golden phonemization", out == GOLDEN and dt < 1.0, f"{out!r} in {dt:.3f}s")


def test_parameter_count():
    t = time.perf_counter()
    n = param_count(base_preset(1960))
    dt = time.perf_counter() - t
    rel = abs(n - 87.6e6) / 87.6e6
    check("parameter count", rel < 0.01 and dt < 1.0, f"{n:,} params ({rel:.2%} from 87.6M) in {dt:.3f}s")


def test_masking_statistics():
    corp = BigramGrammar(seed=1).corpus(2000, seed=3)
    vocab = build_vocab(corp)
    blocks = pack_blocks([encode(s, vocab) for s in corp], 512)
    n_tok = sel = masked = rand = kept = 0
    for i, b in enumerate(blocks):
        m = dynamic_mask(b, vocab, seed=1, epoch=0, index=i)
        for orig, inp, lab in zip(b.ids, m.input_ids, m.labels):
            n_tok += orig >= 5
            if lab == IGNORE:
                continue
            sel += 1
            if inp == MASK_ID:
                masked += 1
            elif inp == orig:
                kept += 1
            else:
                rand += 1
    fr = [sel / n_tok, masked / sel, rand / sel, kept / sel]
    ok = (n_tok >= 10_000 and abs(fr[0] - 0.15) <= 0.01
          and all(abs(f - t) <= 0.02 for f, t in zip(fr[1:], (0.8, 0.1, 0.1))))
    check("masking statistics", ok,
          f"{n_tok} maskable, labeled {fr[0]:.4f}, mask/random/keep {fr[1]:.4f}/{fr[2]:.4f}/{fr[3]:.4f}")


def test_gradient_check():
    t = time.perf_counter()
    cfg = desk_preset(40)
    params, batch = check_point(cfg, seed=0)
    rows = gradient_check(params, cfg, batch, n_coords=240, step=1e-3)
    dt = time.perf_counter() - t
    worst = max(r["rel_error"] for r in rows)
    classes = {tensor_class(r["name"]) for r in rows}
    ok = len(rows) >= 200 and worst < 1e-4 and len(classes) == 5 and dt < 300
    check("gradient check", ok, f"{len(rows)} coords over {sorted(classes)}, max rel err {worst:.2e}, {dt:.1f}s")


@pytest.mark.slow
def test_synthetic_language_training():
    t = time.perf_counter()
    grammar = BigramGrammar(n_symbols=20, seed=1)
    corp = grammar.corpus(5000, seed=2)
    vocab = build_vocab(corp)
    blocks = pack_blocks([encode(s, vocab) for s in corp], 64)
    held_out = grammar.corpus(500, seed=99)
    held_blocks = pack_blocks([encode(s, vocab) for s in held_out], 64)
    cfg = desk_preset(len(vocab))
    tc = TrainConfig(max_steps=2000, warmup_steps=150, peak_lr=2e-3, batch_size=16, seed=0)
    result = train(blocks, cfg, tc)
    ev = evaluate(result.params, cfg, held_blocks, seed=7)
    final = float(smoothed([l for _, _, l in result.log], 50)[-1])
    dt = time.perf_counter() - t
    bound = 0.5 * math.log(len(vocab))
    ok = ev["accuracy"] > 0.90 and final < bound and tc.max_steps <= 5000 and dt < 1800
    check("synthetic-language training", ok,
          f"acc {ev['accuracy']:.4f} on {ev['n']} held-out masks, smoothed loss {final:.4f} < {bound:.4f}, "
          f"{tc.max_steps} steps, {dt:.0f}s")


def test_metric_oracles():
    rng = np.random.default_rng(0)
    params = (16000, 400, 80, 80, 24)
    frames = rng.normal(0, 10, size=(40, 25))
    a = MelCepstrogram(frames, 0.005, 24, params)
    shifted = frames.copy()
    shifted[:, 1] += 1.0
    b = MelCepstrogram(shifted, 0.005, 24, params)
    self_mcd = mcd(a, a)
    offset = mcd(a, b)
    f0 = rng.uniform(80, 300, 50)
    path = [(i, i) for i in range(50)]
    octave, _ = rmse_f0(f0, 2 * f0, path)
    semitone = evaluate_audio(sine(440, 1.0), sine(440 * 2 ** (1 / 12), 1.0)).rmse_f0_cent
    dtw_ok = 0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 64 // n + 1))
        cost = rng.random((n, m))
        dtw_ok += abs(dtw_path(cost)[1] - brute_force(cost)[0]) < 1e-12
    ok = (self_mcd == 0.0 and abs(offset - 6.1421) <= 1e-3 and abs(octave - 1200.0) <= 1e-6
          and abs(semitone - 100) <= 2 and dtw_ok == 200)
    check("metric oracles", ok, f"mcd(A,A)={self_mcd}, offset {offset:.5f} dB, octave {octave:.6f}, "
                                f"semitone {semitone:.3f} cents, dtw {dtw_ok}/200")


def test_pipeline_determinism(tmp_path):
    a = artifacts(run_pipeline(tmp_path / "run1", seed=1))
    b = artifacts(run_pipeline(tmp_path / "run2", seed=1))
    differing = sorted(k for k in a.keys() | b.keys() if a.get(k) != b.get(k))
    check("pipeline determinism", not differing and a,
          f"{len(a)} artifacts compared, differing: {differing or 'none'}")


def random_entries(rng, n):
    bases = list("abdefhijklmnopstuvwzæðŋɑɒɔəɛɡɪɫɹʃʊʌʒθ") + ["ɐ", "ɨ", "ɯ"]
    marks = ["ː", "ʰ", "ʷ", "ʲ", "̃", "́", "̀", "̉", "̣", "̩"]
    entries = []
    for _ in range(n):
        word = ""
        for _ in range(rng.integers(1, 9)):
            if rng.random() < 0.2:
                word += rng.choice(["ˈ", "ˌ"])
            word += rng.choice(bases)
            if rng.random() < 0.1:
                word += "͡" + rng.choice(bases)
            word += "".join(rng.choice(marks, size=rng.integers(0, 3)))
        entries.append(unicodedata.normalize("NFC", word) if rng.random() < 0.5 else word)
    return entries


def test_segmentation_losslessness():
    rng = np.random.default_rng(0)
    profiles = [DEFAULT_PROFILE, load_profile(BUNDLED / "eng.profile.tsv", "eng"),
                load_profile(BUNDLED / "vie.profile.tsv", "vie")]
    entries = random_entries(rng, 10_000)
    failures = 0
    for k, word in enumerate(entries):
        prof = profiles[k % len(profiles)]
        failures += "".join(segment_word(word, prof)) != unicodedata.normalize("NFD", word)
    check("segmentation losslessness", failures == 0,
          f"{len(entries)} entries over {len(profiles)} profiles, {failures} failures")
