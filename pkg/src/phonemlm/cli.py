"""Command-line pipeline: ingest -> phonemize -> build-vocab -> pack -> train -> extract / eval / stats.

Flag values can also come from a flat config file (``--config``) and from
``PHONEMLM_<FLAG>`` environment variables; precedence is flags > environment >
config file > built-in defaults.
"""
import argparse
import json
import os
import logging
import sys
from pathlib import Path

import numpy as np

from . import corpus, locales
from .config import PipelineConfig
from .errors import ConfigError, MissingInputError, PhonemlmError
from .resources import BUNDLED, load_locale
from .segment import PhonemeSentence, read_phoneme_corpus, text2phonemesequence, write_phoneme_corpus

log = logging.getLogger("phonemlm")

EXIT_CODES = {"config_error": 2, "missing_input": 3, "format_error": 4, "unknown_language": 5,
              "segmentation_error": 6, "checkpoint_error": 7, "metric_error": 8}


def _require(*paths):
    for p in paths:
        if p is not None and not Path(p).exists():
            raise MissingInputError(f"input not found: {p}")


def _corpus_files(path):
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.txt"))
        if not files:
            raise MissingInputError(f"no *.txt phoneme corpus files under {path}")
        return files
    return [path]


def _read_text(path):
    return Path(path).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------


def cmd_ingest(args):
    _require(args.corpus)
    norm = None if args.no_normalize else corpus.default_normalize
    sentences = corpus.ingest(corpus.read_documents(args.corpus), args.seed, norm)
    corpus.write_sentences(sentences, args.output)
    log.info("wrote %d sentences to %s", len(sentences), args.output)
    if args.stats:
        Path(args.stats).write_text(corpus.corpus_stats(sentences).to_json() + "\n", encoding="utf-8")


def cmd_phonemize(args):
    if (args.text is None) == (args.input is None):
        raise ConfigError("phonemize needs exactly one of --text or --input")
    _require(args.input, args.dict, args.rules, args.profile, args.resources)
    if args.text is not None:
        if not args.lang:
            raise ConfigError("--text needs --lang")
        res = load_locale(locales.check_code(args.lang), args.resources, args.dict, args.rules, args.profile)
        doc = corpus.RawDocument("text", args.lang, args.text)
        lines = [str(text2phonemesequence(s, res.pron, res.rules, res.profile))
                 for s in corpus.split_sentences(doc, None if args.no_normalize else corpus.default_normalize)]
        out = "".join(line + "\n" for line in lines)
        if args.output:
            Path(args.output).write_text(out, encoding="utf-8")
        else:
            sys.stdout.write(out)
        return
    if not args.output_dir:
        raise ConfigError("--input needs --output-dir")
    by_locale = {}
    for s in corpus.read_sentences(args.input):
        by_locale.setdefault(s.lang, []).append(s)
    if args.lang and set(by_locale) - {args.lang}:
        raise ConfigError(f"--lang {args.lang} given but input contains {sorted(by_locale)}")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for lang in sorted(by_locale):
        res = load_locale(lang, args.resources, args.dict, args.rules, args.profile)
        items, prev_doc = [], None
        for s in by_locale[lang]:
            if prev_doc is not None and s.doc_id != prev_doc:
                items.append(None)
            items.append(text2phonemesequence(s, res.pron, res.rules, res.profile))
            prev_doc = s.doc_id
        write_phoneme_corpus(items, out_dir / f"{lang}.txt")
        log.info("%s: %d sentences", lang, sum(i is not None for i in items))


def cmd_build_vocab(args):
    from .vocab import build_vocab

    _require(args.corpus)
    sentences = [s for f in _corpus_files(args.corpus) for s in read_phoneme_corpus(f)]
    vocab = build_vocab(sentences, args.min_count)
    vocab.save(args.output)
    log.info("vocabulary: %d tokens (%s)", len(vocab), json.dumps(vocab.breakdown(), sort_keys=True))


def cmd_pack(args):
    from .dataset import pack_blocks, write_blocks
    from .vocab import Vocabulary, encode

    _require(args.corpus, args.vocab)
    vocab = Vocabulary.load(args.vocab)
    encoded, docs, doc = [], [], 0
    for f in _corpus_files(args.corpus):
        doc += 1
        for s in read_phoneme_corpus(f):
            if s is None:
                doc += 1
                continue
            encoded.append(encode(s, vocab))
            docs.append(doc)
    blocks = pack_blocks(encoded, args.max_len, docs)
    write_blocks(blocks, args.output)
    log.info("packed %d sentences into %d blocks", len(encoded), len(blocks))


def _train_config(args):
    from .model.train import TrainConfig

    return TrainConfig(batch_size=args.batch_size, epochs=args.epochs, max_steps=args.max_steps,
                       peak_lr=args.lr, warmup_epochs=args.warmup_epochs, warmup_steps=args.warmup_steps,
                       beta1=args.beta1, beta2=args.beta2, eps=args.eps, weight_decay=args.weight_decay,
                       p_select=args.mask_prob, p_mask=args.mask_token_prob, p_random=args.random_token_prob,
                       checkpoint_every=args.checkpoint_every, seed=args.seed)


def cmd_train(args):
    from dataclasses import replace

    from .dataset import read_blocks
    from .model import checkpoint as ckpt_io
    from .model.encoder import PRESETS
    from .model.train import train
    from .vocab import Vocabulary

    _require(args.dataset, args.vocab, args.resume)
    vocab = Vocabulary.load(args.vocab)
    blocks = read_blocks(args.dataset)
    config = PRESETS[args.preset](len(vocab))
    if args.dropout is not None:
        config = replace(config, dropout=args.dropout)
    if args.max_positions is not None:
        config = replace(config, max_positions=args.max_positions)
    resume = None
    if args.resume:
        resume = ckpt_io.load(args.resume)
        if resume.vocab_hash != vocab.digest():
            raise ConfigError("resume checkpoint was trained with a different vocabulary")
    result = train(blocks, config, _train_config(args), vocab.digest(), args.output, resume, args.until)
    if result.log:
        log.info("finished at step %d, last loss %.4f", result.step, result.log[-1][2])


def cmd_extract(args):
    from .model import checkpoint as ckpt_io
    from .model.train import extract_features
    from .vocab import Vocabulary

    if (args.text is None) == (args.input is None):
        raise ConfigError("extract needs exactly one of --text or --input")
    _require(args.checkpoint, args.vocab, args.input)
    ckpt = ckpt_io.load(args.checkpoint, with_optimizer=False)
    vocab = Vocabulary.load(args.vocab)
    if args.text is not None:
        np.save(args.output, extract_features(PhonemeSentence.parse(args.text), vocab, ckpt))
        return
    sentences = [s for s in read_phoneme_corpus(args.input) if s is not None]
    feats = [extract_features(s, vocab, ckpt) for s in sentences]
    offsets = np.cumsum([0] + [len(f) for f in feats]).tolist()
    stacked = np.concatenate(feats) if feats else np.zeros((0, ckpt.config.hidden), np.float32)
    np.save(args.output, stacked)
    Path(str(args.output) + ".index.json").write_text(json.dumps({"offsets": offsets}) + "\n", encoding="utf-8")


def cmd_eval(args):
    from .metrics.evaluate import evaluate_pair, report_json, summarize

    if args.pairs:
        _require(args.pairs)
        pairs = [line.split("\t") for line in _read_text(args.pairs).splitlines() if line.strip()]
        if any(len(p) != 2 for p in pairs):
            raise ConfigError(f"{args.pairs}: each line must be ref<TAB>syn")
    elif args.ref and args.syn:
        pairs = [(args.ref, args.syn)]
    else:
        raise ConfigError("eval needs --ref and --syn, or --pairs")
    opts = {"mcep_frame": args.mcep_frame, "hop": args.hop, "n_mels": args.n_mels, "order": args.order,
            "f0_frame": args.f0_frame, "f0_floor": args.f0_floor, "f0_ceil": args.f0_ceil,
            "voicing_threshold": args.voicing_threshold}
    reports, lines = [], []
    for ref, syn in pairs:
        _require(ref, syn)
        rep = evaluate_pair(ref, syn, **opts)
        reports.append(rep)
        lines.append(report_json(rep))
    if args.pairs:
        lines.append(json.dumps({"summary": summarize(reports)}, sort_keys=True))
    out = "".join(line + "\n" for line in lines)
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)


def cmd_stats(args):
    _require(args.input)
    path = Path(args.input)
    if path.is_dir() or path.suffix == ".txt":
        counts = {f.stem: sum(s is not None for s in read_phoneme_corpus(f)) for f in _corpus_files(path)}
        stats = corpus.CorpusStats(dict(sorted(counts.items())))
    else:
        stats = corpus.corpus_stats(corpus.read_sentences(path))
    text = (stats.table() if args.format == "table" else stats.to_json()) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--seed", type=int, default=1, help="seed for every random choice")
    common.add_argument("--threads", type=int, default=1, help="BLAS threads (1 keeps results bit-exact)")
    common.add_argument("--log-level", default="INFO")
    common.add_argument("--dump-config", help="write the effective settings to this file and continue")

    parser = argparse.ArgumentParser(prog="phonemlm", description=__doc__, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], formatter_class=fmt,
                       help="segment, lowercase, dedup and locale-split raw documents")
    p.add_argument("--corpus", required=False, help="input documents (JSON lines: id, lang, text)")
    p.add_argument("--output", default="sentences.jsonl")
    p.add_argument("--stats", default=None, help="also write per-locale counts here")
    p.add_argument("--no-normalize", action="store_true", help="skip digit verbalization")
    p.set_defaults(func=cmd_ingest, required_flags=("corpus",))

    p = sub.add_parser("phonemize", parents=[common], formatter_class=fmt,
                       help="convert sentences to phoneme-segmented sequences")
    p.add_argument("--input", default=None, help="sentences JSON lines from ingest")
    p.add_argument("--text", default=None, help="phonemize this text instead of --input")
    p.add_argument("--lang", default=None, help="locale code (required with --text)")
    p.add_argument("--resources", default=str(BUNDLED), help="directory of dict/rules/profile files")
    p.add_argument("--dict", default=None, help="pronunciation dictionary TSV (overrides --resources)")
    p.add_argument("--rules", default=None, help="fallback rules TSV (overrides --resources)")
    p.add_argument("--profile", default=None, help="orthography profile (overrides --resources)")
    p.add_argument("--output-dir", default=None, help="write <locale>.txt files here (with --input)")
    p.add_argument("--output", default=None, help="output file for --text (default stdout)")
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=cmd_phonemize)

    p = sub.add_parser("build-vocab", parents=[common], formatter_class=fmt, help="build the phoneme vocabulary")
    p.add_argument("--corpus", help="phoneme corpus directory or file")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--output", default="vocab.tsv")
    p.set_defaults(func=cmd_build_vocab, required_flags=("corpus",))

    p = sub.add_parser("pack", parents=[common], formatter_class=fmt, help="encode and pack into blocks")
    p.add_argument("--corpus", help="phoneme corpus directory or file")
    p.add_argument("--vocab")
    p.add_argument("--max-len", type=int, default=512)
    p.add_argument("--output", default="dataset.jsonl")
    p.set_defaults(func=cmd_pack, required_flags=("corpus", "vocab"))

    p = sub.add_parser("train", parents=[common], formatter_class=fmt, help="pretrain the masked-LM encoder")
    p.add_argument("--dataset")
    p.add_argument("--vocab")
    p.add_argument("--output", default="checkpoint")
    p.add_argument("--preset", choices=("desk", "base"), default="desk")
    p.add_argument("--dropout", type=float, default=None, help="override the preset dropout")
    p.add_argument("--max-positions", type=int, default=None, help="override the preset maximum length")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--max-steps", type=int, default=None, help="overrides --epochs")
    p.add_argument("--until", type=int, default=None, help="stop at this step (schedule unchanged)")
    p.add_argument("--lr", type=float, default=1e-4, help="peak learning rate")
    p.add_argument("--warmup-epochs", type=float, default=2.0)
    p.add_argument("--warmup-steps", type=int, default=None, help="overrides --warmup-epochs")
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.98)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--mask-prob", type=float, default=0.15)
    p.add_argument("--mask-token-prob", type=float, default=0.8)
    p.add_argument("--random-token-prob", type=float, default=0.1)
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--resume", default=None, help="checkpoint directory to continue from")
    p.set_defaults(func=cmd_train, required_flags=("dataset", "vocab"))

    p = sub.add_parser("extract", parents=[common], formatter_class=fmt, help="contextual phoneme features")
    p.add_argument("--checkpoint")
    p.add_argument("--vocab")
    p.add_argument("--text", default=None, help="space-separated phoneme sequence")
    p.add_argument("--input", default=None, help="phoneme corpus file, one sentence per line")
    p.add_argument("--output", default="features.npy")
    p.set_defaults(func=cmd_extract, required_flags=("checkpoint", "vocab"))

    p = sub.add_parser("eval", parents=[common], formatter_class=fmt, help="MCD and F0 RMSE between WAV files")
    p.add_argument("--ref", default=None)
    p.add_argument("--syn", default=None)
    p.add_argument("--pairs", default=None, help="TSV of ref<TAB>syn paths")
    p.add_argument("--output", default=None, help="JSON lines output (default stdout)")
    p.add_argument("--mcep-frame", type=float, default=0.025)
    p.add_argument("--hop", type=float, default=0.005)
    p.add_argument("--n-mels", type=int, default=80)
    p.add_argument("--order", type=int, default=24)
    p.add_argument("--f0-frame", type=float, default=0.04)
    p.add_argument("--f0-floor", type=float, default=60.0)
    p.add_argument("--f0-ceil", type=float, default=500.0)
    p.add_argument("--voicing-threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", parents=[common], formatter_class=fmt, help="per-locale sentence counts")
    p.add_argument("--input", help="sentences JSON lines or phoneme corpus directory")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_stats, required_flags=("input",))
    return parser


def _dests(subparser):
    return {a.dest for a in subparser._actions}


def parse_args(argv=None, environ=None):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    overrides = PipelineConfig.from_file(known.config) if known.config else PipelineConfig()
    overrides.update(PipelineConfig.from_env(os.environ if environ is None else environ))
    if overrides:
        subparsers = parser._subparsers._group_actions[0].choices
        valid = set().union(*(_dests(p) for p in subparsers.values()))
        unknown = set(overrides) - valid
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for p in subparsers.values():
            ok = _dests(p)
            p.set_defaults(**{k: v for k, v in overrides.items() if k in ok})
    args = parser.parse_args(argv)
    missing = [f for f in getattr(args, "required_flags", ()) if getattr(args, f) is None]
    if missing:
        raise ConfigError(f"{args.command}: missing required setting(s): "
                          + ", ".join("--" + m.replace("_", "-") for m in missing))
    return args


def effective_config(args) -> PipelineConfig:
    skip = {"func", "required_flags", "dump_config", "config", "command"}
    return PipelineConfig({k: v for k, v in vars(args).items() if k not in skip})


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        if args.dump_config:
            effective_config(args).to_file(args.dump_config)
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=args.threads):
            args.func(args)
    except PhonemlmError as e:
        print(json.dumps({"error": e.kind, "message": str(e)}, ensure_ascii=False), file=sys.stderr)
        return EXIT_CODES.get(e.kind, 1)
    except FileNotFoundError as e:
        print(json.dumps({"error": "missing_input", "message": str(e)}), file=sys.stderr)
        return EXIT_CODES["missing_input"]
    return 0


if __name__ == "__main__":
    sys.exit(main())
