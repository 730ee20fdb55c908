"""Runs every CLI stage on the bundled toy corpus; shared by the CLI and acceptance tests."""
from pathlib import Path

from phonemlm.cli import main
from phonemlm.metrics.audio import sine, write_wav
from phonemlm.resources import BUNDLED

STAGES = [
    ["ingest", "--corpus", "{data}/toy_corpus.jsonl", "--output", "{w}/sentences.jsonl", "--stats", "{w}/ingest_stats.json"],
    ["phonemize", "--input", "{w}/sentences.jsonl", "--output-dir", "{w}/phonemes"],
    ["stats", "--input", "{w}/phonemes", "--output", "{w}/stats.json"],
    ["build-vocab", "--corpus", "{w}/phonemes", "--output", "{w}/vocab.tsv"],
    ["pack", "--corpus", "{w}/phonemes", "--vocab", "{w}/vocab.tsv", "--max-len", "64", "--output", "{w}/dataset.jsonl"],
    ["train", "--dataset", "{w}/dataset.jsonl", "--vocab", "{w}/vocab.tsv", "--output", "{w}/ckpt",
     "--max-steps", "6", "--batch-size", "4", "--warmup-steps", "2", "--lr", "1e-3", "--checkpoint-every", "3"],
    ["extract", "--checkpoint", "{w}/ckpt", "--vocab", "{w}/vocab.tsv", "--input", "{w}/phonemes/eng-us.txt",
     "--output", "{w}/features.npy"],
    ["eval", "--ref", "{w}/ref.wav", "--syn", "{w}/syn.wav", "--output", "{w}/metrics.jsonl"],
]


def run_pipeline(workdir, seed=1):
    w = Path(workdir)
    w.mkdir(parents=True, exist_ok=True)
    write_wav(w / "ref.wav", sine(220, 0.4))
    write_wav(w / "syn.wav", sine(233, 0.35))
    for stage in STAGES:
        argv = [a.format(w=w, data=BUNDLED) for a in stage] + ["--seed", str(seed), "--log-level", "WARNING"]
        code = main(argv)
        if code != 0:
            raise RuntimeError(f"stage {stage[0]} exited with {code}")
    return w


def artifacts(workdir):
    """Relative path -> bytes for every file the pipeline wrote."""
    w = Path(workdir)
    return {str(p.relative_to(w)): p.read_bytes() for p in sorted(w.rglob("*")) if p.is_file()}
