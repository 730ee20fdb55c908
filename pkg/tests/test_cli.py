import json

import numpy as np
import pytest

from phonemlm.cli import EXIT_CODES, build_parser, main, parse_args
from phonemlm.config import PipelineConfig
from phonemlm.errors import ConfigError
from phonemlm.model import checkpoint as ckpt_io

from pipeline import artifacts, run_pipeline

GOLDEN = "ˈe ɪ ▁ ˌm ə ɫ t i ˈɫ ɪ ŋ w ə ɫ ▁ ˈm ɑ d ə ɫ"


def run(argv, capsys):
    code = main(argv + ["--log-level", "WARNING"])
    out, err = capsys.readouterr()
    return code, out, err


def test_phonemize_text(capsys, tmp_path):
    code, out, _ = run(["phonemize", "--lang", "eng-us", "--text", "A multilingual model"], capsys)
    assert code == 0 and out == GOLDEN + "\n"
    from phonemlm.resources import BUNDLED
    code, out, _ = run(["phonemize", "--lang", "eng-us", "--text", "a multilingual model",
                        "--dict", str(BUNDLED / "eng-us.dict.tsv"), "--profile", str(BUNDLED / "eng.profile.tsv")], capsys)
    assert out == GOLDEN + "\n"


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    return run_pipeline(tmp_path_factory.mktemp("pipe"))


def test_pipeline_outputs(pipeline_dir):
    w = pipeline_dir
    stats = json.loads((w / "stats.json").read_text())
    assert set(stats) >= {"eng-uk", "eng-us", "vie-n", "vie-c", "vie-s"}
    ingest = json.loads((w / "ingest_stats.json").read_text())
    assert ingest == stats
    ck = ckpt_io.load(w / "ckpt")
    assert ck.step == 6 and (w / "ckpt" / "checkpoints" / "step_0000003").is_dir()
    lines = (w / "ckpt" / "metrics.csv").read_text().splitlines()
    assert lines[0] == "step,lr,loss" and len(lines) == 7
    feats = np.load(w / "features.npy")
    index = json.loads((w / "features.npy.index.json").read_text())
    assert feats.shape == (index["offsets"][-1], ck.config.hidden)
    report = json.loads((w / "metrics.jsonl").read_text())
    assert set(report) == {"mcd_db", "rmse_f0_cent", "n_aligned_frames", "n_voiced_pairs"}
    assert 80 < report["rmse_f0_cent"] < 120


def test_stats_table(pipeline_dir, capsys):
    code, out, _ = run(["stats", "--input", str(pipeline_dir / "sentences.jsonl"), "--format", "table"], capsys)
    assert code == 0 and "eng-us" in out


def test_resume_via_cli(pipeline_dir, tmp_path):
    w = pipeline_dir
    base = ["train", "--dataset", str(w / "dataset.jsonl"), "--vocab", str(w / "vocab.tsv"), "--max-steps", "6",
            "--batch-size", "4", "--warmup-steps", "2", "--lr", "1e-3", "--log-level", "WARNING"]
    assert main(base + ["--output", str(tmp_path / "half"), "--until", "3"]) == 0
    assert main(base + ["--output", str(tmp_path / "rest"), "--resume", str(tmp_path / "half")]) == 0
    a, b = ckpt_io.load(w / "ckpt"), ckpt_io.load(tmp_path / "rest")
    assert all(np.allclose(a.params[k], b.params[k], atol=1e-6) for k in a.params)


def test_extract_text(pipeline_dir, tmp_path):
    w = pipeline_dir
    out = tmp_path / "f.npy"
    assert main(["extract", "--checkpoint", str(w / "ckpt"), "--vocab", str(w / "vocab.tsv"),
                 "--text", "ˈm ɑ d ə ɫ", "--output", str(out)]) == 0
    assert np.load(out).shape == (7, 128)


@pytest.mark.parametrize("argv,kind", [
    (["ingest"], "config_error"),
    (["ingest", "--corpus", "/nonexistent.jsonl"], "missing_input"),
    (["phonemize", "--lang", "xx-zz", "--text", "hi"], "unknown_language"),
    (["phonemize", "--text", "hi"], "config_error"),
    (["eval", "--ref", "/nope.wav", "--syn", "/nope.wav"], "missing_input"),
])
def test_error_reporting(argv, kind, capsys):
    code, _, err = run(argv, capsys)
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == kind and code == EXIT_CODES[kind]


def test_format_error(tmp_path, capsys):
    (tmp_path / "bad.jsonl").write_text("not json\n")
    code, _, err = run(["ingest", "--corpus", str(tmp_path / "bad.jsonl")], capsys)
    assert code == EXIT_CODES["format_error"]


def test_help_lists_defaults():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    for name, p in sub.items():
        text = p.format_help()
        assert "--seed" in text and "(default: 1)" in text, name
    assert "(default: 0.0001)" in sub["train"].format_help()


def test_config_precedence_and_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\nbatch_size = 8\nlr = 0.0003\n")
    args = parse_args(["train", "--config", str(cfg), "--dataset", "d", "--vocab", "v"], environ={})
    assert (args.batch_size, args.lr) == (8, 0.0003)
    args = parse_args(["train", "--config", str(cfg), "--dataset", "d", "--vocab", "v", "--lr", "0.01"],
                      environ={"PHONEMLM_BATCH_SIZE": "2"})
    assert (args.batch_size, args.lr) == (2, 0.01)
    with pytest.raises(ConfigError):
        parse_args(["train", "--dataset", "d", "--vocab", "v"], environ={"PHONEMLM_BOGUS": "1"})
    original = PipelineConfig({"a": 1, "b": "x y", "c": None, "d": [1, 2], "e": 0.1})
    original.to_file(tmp_path / "rt.cfg")
    assert PipelineConfig.from_file(tmp_path / "rt.cfg") == original


def test_dump_config_reproduces_run(tmp_path):
    dumped = tmp_path / "dump.cfg"
    assert main(["stats", "--input", "/nonexistent", "--dump-config", str(dumped), "--log-level", "WARNING"]) == 3
    assert PipelineConfig.from_file(dumped)["input"] == "/nonexistent"
