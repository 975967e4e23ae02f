"""Command-line interface.

Every option can also come from ``--config FILE`` (a flat JSON object whose
keys are option names with underscores); options given on the command line
win over the file, which wins over built-in defaults.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .chunking import ChunkingConfig, ChunkMode, balance, build_chunks, read_chunks, write_chunks
from .corpus import LanguagePair, derive_pair, read_parallel_files, write_derivation
from .errors import ConfigError, DataError, TransdirError
from .experiments import ExperimentSpec, Suite, emit_report, read_results_csv, run
from .features import Featurizer, FunctionWordList, read_dataset, write_dataset
from .learner import Hyperparams, ModelKind, cross_validate, train
from .seeding import derive_seed
from .synth import SynthConfig, generate_corpus
from .text import PerceptronTagger, load_pretagged, read_tsv_corpus, tag_aligned, write_pretagged

log = logging.getLogger("transdir")

GLOBAL_DEFAULTS = {"seed": 0, "jobs": 1, "verbose": False}

DEFAULTS = {
    "derive": {"pairs": None, "root": None, "out": None},
    "train-tagger": {"train": None, "dev": None, "out": None, "epochs": 5},
    "tag": {"model": None, "derived": None, "pair": None, "out": None},
    "chunk": {"input": None, "out": None, "size": 2000, "mode": "homogeneous",
              "keep_partial": False, "dedupe_originals": False, "balance": False},
    "featurize": {"chunks": None, "out": None, "kind": "POS2", "k": 400, "basis": 2000,
                  "normalize_pos": False, "fw_list": None},
    "cv": {"dataset": None, "chunks": None, "kind": "POS2", "k": 400, "basis": 2000,
           "normalize_pos": False, "fw_list": None, "folds": 10, "model": "logistic",
           "l2_lambda": 1e-4, "epochs": 20, "eta0": 0.1, "out": None, "model_out": None},
    "synth": {"out": None, "divergence": 0.4, "docs_per_class": 10, "sentences_per_doc": 20,
              "mean_sentence_length": 25, "pairs": "fr-en", "doc_variation": 0.0,
              "pair_variation": 0.0, "synth_config": None},
    "experiment": {"suite": None, "corpus": None, "out": None, "pairs": None,
                   "exclude_pairs": "zh-en", "chunk_sizes": None, "top_k": 400,
                   "topk_grid": None, "features": None, "model": "logistic", "folds": 10,
                   "l2_lambda": 1e-4, "epochs": 20, "eta0": 0.1, "basis": 2000,
                   "normalize_pos": False, "global_vocab": False, "dedupe_originals": False,
                   "keep_partial": False, "fw_list": None, "formats": "csv,md,dat,png"},
    "report": {"results": None, "out": None, "formats": "md,dat,png"},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def _opt(p, *flags, **kw):
    p.add_argument(*flags, default=argparse.SUPPRESS, **kw)


def _flag(p, *flags, help=None):
    p.add_argument(*flags, action="store_true", default=argparse.SUPPRESS, help=help)


def _learning_opts(p):
    _opt(p, "--folds", type=int, help="cross-validation folds (default 10)")
    _opt(p, "--model", choices=[m.value for m in ModelKind], help="classifier (default logistic)")
    _opt(p, "--l2-lambda", type=float, help="L2 penalty (default 1e-4)")
    _opt(p, "--epochs", type=int, help="SGD epochs (default 20)")
    _opt(p, "--eta0", type=float, help="initial learning rate (default 0.1)")


def _feature_opts(p):
    _opt(p, "--kind", choices=["FW", "POS2", "POS3", "FW_POS2", "FW_POS3"])
    _opt(p, "--k", type=int, help="top-k POS n-grams (default 400)")
    _opt(p, "--basis", type=int, help="function-word normalization basis (default 2000)")
    _flag(p, "--normalize-pos", help="scale POS counts like function words")
    _opt(p, "--fw-list", help="function word list, one per line (default: built-in)")


def build_parser():
    parser = _Parser(prog="transdir", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    _opt(common, "--seed", type=int, help="random seed (default 0)")
    _opt(common, "--jobs", type=int, help="parallel experiment cells (default 1)")
    _opt(common, "--config", help="JSON file with option values")
    _flag(common, "-v", "--verbose")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("derive", parents=[common], help="derive direction-annotated corpora")
    _opt(p, "--root", help="UN-layout corpus root")
    _opt(p, "--pairs", help="comma-separated foreign languages or pairs, e.g. fr,es")
    _opt(p, "--out", help="output directory")

    p = sub.add_parser("train-tagger", parents=[common], help="train the POS tagger")
    _opt(p, "--train", help="token<TAB>tag training file")
    _opt(p, "--dev", help="optional held-out file in the same format")
    _opt(p, "--epochs", type=int, help="training epochs (default 5)")
    _opt(p, "--out", help="model file to write")

    p = sub.add_parser("tag", parents=[common], help="tokenize and tag derived English text")
    _opt(p, "--model", help="tagger model file")
    _opt(p, "--derived", help="directory written by 'derive'")
    _opt(p, "--pair", help="language pair, e.g. fr-en")
    _opt(p, "--out", help="tagged JSON-lines output")

    p = sub.add_parser("chunk", parents=[common], help="build chunks from tagged sentences")
    _opt(p, "--input", help="comma-separated tagged JSON-lines files")
    _opt(p, "--size", type=int, help="tokens per chunk (default 2000)")
    _opt(p, "--mode", choices=[m.value for m in ChunkMode])
    _flag(p, "--keep-partial", help="keep the short final chunk of each partition")
    _flag(p, "--dedupe-originals", help="drop repeated original sentences when pooling")
    _flag(p, "--balance", help="subsample the larger class to the size of the smaller one")
    _opt(p, "--out", help="chunk JSON-lines output")

    p = sub.add_parser("featurize", parents=[common], help="vectorize chunks")
    _opt(p, "--chunks", help="chunk file")
    _feature_opts(p)
    _opt(p, "--out", help="dataset JSON-lines output")

    p = sub.add_parser("cv", parents=[common], help="cross-validate a classifier")
    _opt(p, "--dataset", help="dataset file from 'featurize'")
    _opt(p, "--chunks", help="chunk file; features are refit inside every fold")
    _feature_opts(p)
    _learning_opts(p)
    _opt(p, "--out", help="cv_report.json path")
    _opt(p, "--model-out", help="also train on everything and save the model here")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    _opt(p, "--out", help="output root")
    _opt(p, "--synth-config", help="JSON synth configuration")
    _opt(p, "--divergence", type=float)
    _opt(p, "--docs-per-class", type=int)
    _opt(p, "--sentences-per-doc", type=int)
    _opt(p, "--mean-sentence-length", type=int)
    _opt(p, "--pairs", help="comma-separated pairs (default fr-en)")
    _opt(p, "--doc-variation", type=float)
    _opt(p, "--pair-variation", type=float)

    p = sub.add_parser("experiment", parents=[common], help="run an experiment suite")
    # validated later: a positional's default would otherwise be checked against choices
    p.add_argument("suite", nargs="?", default=None,
                   help="one of " + ", ".join(s.value for s in Suite))
    _opt(p, "--corpus", action="append", help="PAIR=tagged.jsonl, repeatable")
    _opt(p, "--pairs", help="comma-separated pairs to include (default: all given)")
    _opt(p, "--exclude-pairs", help="comma-separated pairs to leave out (default zh-en)")
    _opt(p, "--chunk-sizes", help="comma-separated chunk sizes")
    _opt(p, "--top-k", type=int)
    _opt(p, "--topk-grid", help="comma-separated k values for fig3")
    _opt(p, "--features", help="comma-separated feature kinds")
    _learning_opts(p)
    _opt(p, "--basis", type=int)
    _flag(p, "--normalize-pos")
    _flag(p, "--global-vocab", help="build the n-gram vocabulary on all chunks (leaks test data)")
    _flag(p, "--dedupe-originals")
    _flag(p, "--keep-partial")
    _opt(p, "--fw-list")
    _opt(p, "--formats", help="subset of csv,md,dat,png")
    _opt(p, "--out", help="report directory")

    p = sub.add_parser("report", parents=[common], help="re-render a report from results.csv")
    _opt(p, "--results", help="results.csv")
    _opt(p, "--formats", help="subset of md,dat,png")
    _opt(p, "--out", help="report directory (default: beside results.csv)")
    return parser


def _options(args):
    given = {k: v for k, v in vars(args).items()
             if k not in ("command", "config") and not (k == "suite" and v is None)}
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc.msg})") from None
        if not isinstance(cfg, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    opts = dict(GLOBAL_DEFAULTS)
    opts.update(DEFAULTS[args.command])
    opts.update({k: v for k, v in cfg.items() if k in opts})
    opts.update(given)
    return argparse.Namespace(**opts)


def _require(o, *names):
    for name in names:
        if getattr(o, name) in (None, ""):
            raise ConfigError(f"missing required option --{name.replace('_', '-')}")


def _csv_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [v.strip() for v in str(value).split(",") if v.strip()]


def cmd_derive(o):
    _require(o, "root", "pairs", "out")
    for code in _csv_list(o.pairs):
        result = derive_pair(o.root, LanguagePair.parse(code))
        paths = write_derivation(result, o.out)
        s = result.stats
        print(f"{result.pair}: {s.initial_docs} documents, "
              f"{s.valid_docs_foreign_original}+{s.valid_docs_english_original} valid, "
              f"{s.valid_sentences_total} sentences -> {paths[0].parent}")


def cmd_train_tagger(o):
    _require(o, "train", "out")
    corpus = read_tsv_corpus(o.train)
    dev = read_tsv_corpus(o.dev) if o.dev else None
    model = PerceptronTagger.train(corpus, epochs=o.epochs, seed=o.seed, dev=dev,
                                   corpus_id=Path(o.train).name)
    model.save(o.out)
    msg = f"trained on {len(corpus)} sentences, {len(model.tags)} tags"
    if dev:
        msg += f", dev accuracy {model.metadata['dev_accuracy']:.4f}"
    print(msg)


def cmd_tag(o):
    _require(o, "model", "derived", "pair", "out")
    pair = LanguagePair.parse(o.pair)
    tagger = PerceptronTagger.load(o.model)
    tagged = tag_aligned(read_parallel_files(o.derived, pair), pair, tagger)
    write_pretagged(tagged, o.out)
    print(f"{pair}: tagged {len(tagged)} sentences -> {o.out}")


def cmd_chunk(o):
    _require(o, "input", "out")
    sentences = [s for path in _csv_list(o.input) for s in load_pretagged(path)]
    cfg = ChunkingConfig(o.size, ChunkMode(o.mode), o.seed, not o.keep_partial, o.dedupe_originals)
    chunks = build_chunks(sentences, cfg)
    if o.balance:
        chunks = balance(chunks, derive_seed(o.seed, "balance"))
    write_chunks(chunks, o.out)
    print(f"{len(chunks)} chunks -> {o.out}")


def _featurizer(o):
    fw = FunctionWordList.load(o.fw_list) if o.fw_list else None
    return Featurizer(o.kind, fw, o.k, o.basis, o.normalize_pos)


def cmd_featurize(o):
    _require(o, "chunks", "out")
    chunks = read_chunks(o.chunks)
    if not chunks:
        raise DataError(f"{o.chunks}: no chunks")
    featurizer = _featurizer(o)
    vectors = featurizer.fit_transform(chunks)
    write_dataset(vectors, o.out, featurizer.spec)
    print(f"{len(vectors)} vectors of dimension {featurizer.spec.dimension} -> {o.out}")


def cmd_cv(o):
    if bool(o.dataset) == bool(o.chunks):
        raise ConfigError("give exactly one of --dataset or --chunks")
    hp = Hyperparams(ModelKind(o.model), o.l2_lambda, o.epochs, o.eta0, o.seed)
    spec_hash = ""
    if o.dataset:
        data = read_dataset(o.dataset)
        report = cross_validate(data, o.folds, hp)
    else:
        data = read_chunks(o.chunks)
        featurizer = _featurizer(o)
        report = cross_validate(data, o.folds, hp, pipeline=featurizer)
    out = Path(o.out) if o.out else Path("cv_report.json")
    report.save(out)
    print(f"accuracy {report.mean:.4f} +/- {report.std:.4f} over {report.k} folds -> {out}")
    if o.model_out:
        if o.chunks:
            featurizer = _featurizer(o)
            data = featurizer.fit_transform(data)
            spec_hash = featurizer.spec.digest
        train(data, hp, spec_hash=spec_hash).save(o.model_out)


def cmd_synth(o):
    _require(o, "out")
    if o.synth_config:
        cfg = SynthConfig.load(o.synth_config)
    else:
        cfg = SynthConfig(divergence=o.divergence, docs_per_class=o.docs_per_class,
                          sentences_per_doc=o.sentences_per_doc,
                          mean_sentence_length=o.mean_sentence_length,
                          pairs=tuple(_csv_list(o.pairs)), seed=o.seed,
                          doc_variation=o.doc_variation, pair_variation=o.pair_variation)
    truth = generate_corpus(cfg, o.out)
    print(f"wrote {len(truth.documents)} documents for {', '.join(cfg.pairs)} -> {o.out}")


def _corpus_map(value):
    if isinstance(value, dict):
        return dict(value)
    out = {}
    for item in value or []:
        pair, sep, path = item.partition("=")
        if not sep:
            raise ConfigError(f"--corpus expects PAIR=PATH, got {item!r}")
        out[pair] = path
    return out


def cmd_experiment(o):
    _require(o, "suite", "corpus", "out")
    suites = [s.value for s in Suite]
    if o.suite not in suites:
        raise ConfigError(f"unknown suite {o.suite!r}; choose from {', '.join(suites)}")
    kw = {}
    if o.features:
        kw["features"] = _csv_list(o.features)
    if o.topk_grid:
        kw["topk_grid"] = [int(k) for k in _csv_list(o.topk_grid)]
    spec = ExperimentSpec(
        suite=Suite(o.suite), corpora=_corpus_map(o.corpus), pairs=tuple(_csv_list(o.pairs)),
        exclude_pairs=tuple(_csv_list(o.exclude_pairs)),
        chunk_sizes=tuple(int(s) for s in _csv_list(o.chunk_sizes)), top_k=o.top_k,
        model=ModelKind(o.model), folds=o.folds, seed=o.seed, l2_lambda=o.l2_lambda,
        epochs=o.epochs, eta0=o.eta0, basis=o.basis, normalize_pos=o.normalize_pos,
        global_vocab=o.global_vocab, dedupe_pooled_originals=o.dedupe_originals,
        drop_partial_final=not o.keep_partial, fw_list=o.fw_list, jobs=o.jobs, **kw)
    notes = []
    rows = run(spec, notes=notes)
    for n in notes:
        log.warning(n)
    if not rows:
        raise DataError("every experiment cell was skipped: " + "; ".join(notes))
    written = emit_report(rows, o.out, tuple(_csv_list(o.formats)), notes)
    print(f"{len(rows)} result rows -> {', '.join(str(p) for p in written)}")


def cmd_report(o):
    _require(o, "results")
    rows = read_results_csv(o.results)
    out = o.out or Path(o.results).parent
    written = emit_report(rows, out, tuple(_csv_list(o.formats)))
    print(f"{len(rows)} rows -> {', '.join(str(p) for p in written)}")


COMMANDS = {
    "derive": cmd_derive,
    "train-tagger": cmd_train_tagger,
    "tag": cmd_tag,
    "chunk": cmd_chunk,
    "featurize": cmd_featurize,
    "cv": cmd_cv,
    "synth": cmd_synth,
    "experiment": cmd_experiment,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        o = _options(args)
        logging.basicConfig(level=logging.INFO if o.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](o)
    except TransdirError as exc:
        print(f"transdir: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"transdir: I/O error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
