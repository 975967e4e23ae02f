"""Experiment suites: per-language table, chunk-size sweep, top-k sweep."""

from __future__ import annotations

import csv
import enum
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .chunking import ChunkingConfig, ChunkMode, balance, build_chunks
from .corpus import LanguagePair
from .errors import ConfigError
from .features import FeatureKind, Featurizer, FunctionWordList
from .learner import Hyperparams, ModelKind, cross_validate
from .seeding import derive_seed
from .text import load_pretagged

log = logging.getLogger(__name__)

ALL, POOLED = "all", "pooled"
TABLE2_FEATURES = (FeatureKind.FW, FeatureKind.POS3, FeatureKind.POS2)
SWEEP_SIZES = (2000, 1500, 1000, 750, 700, 600)
TOPK_GRID = (100, 200, 300, 400, 500, 750, 1000)
TOPK_KINDS = (FeatureKind.FW_POS3, FeatureKind.FW_POS2)


class Suite(enum.Enum):
    TABLE2 = "table2"
    FIG2_CHUNK_SWEEP = "fig2"
    FIG3_TOPK_SWEEP = "fig3"
    CUSTOM = "custom"


@dataclass
class ExperimentSpec:
    suite: Suite = Suite.TABLE2
    # pair code -> tagged JSON-lines file
    corpora: dict = field(default_factory=dict)
    pairs: tuple[str, ...] = ()
    exclude_pairs: tuple[str, ...] = ("zh-en",)
    features: tuple[FeatureKind, ...] = TABLE2_FEATURES
    # empty means the suite default: the sweep grid for fig2, 2000 otherwise
    chunk_sizes: tuple[int, ...] = ()
    top_k: int = 400
    topk_grid: tuple[int, ...] = TOPK_GRID
    model: ModelKind = ModelKind.LOGISTIC
    folds: int = 10
    seed: int = 0
    l2_lambda: float = 1e-4
    epochs: int = 20
    eta0: float = 0.1
    basis: int = 2000
    normalize_pos: bool = False
    global_vocab: bool = False
    dedupe_pooled_originals: bool = False
    drop_partial_final: bool = True
    fw_list: str | None = None
    jobs: int = 1

    def __post_init__(self):
        self.suite = Suite(self.suite)
        self.model = ModelKind(self.model)
        self.features = tuple(FeatureKind(f) for f in self.features)
        self.pairs = tuple(str(LanguagePair.parse(p)) for p in self.pairs)
        self.exclude_pairs = tuple(str(LanguagePair.parse(p)) for p in self.exclude_pairs)
        self.corpora = {str(LanguagePair.parse(p)): v for p, v in self.corpora.items()}
        self.chunk_sizes = tuple(int(s) for s in self.chunk_sizes)
        if not self.chunk_sizes:
            self.chunk_sizes = SWEEP_SIZES if self.suite is Suite.FIG2_CHUNK_SWEEP else (2000,)
        if any(s < 1 for s in self.chunk_sizes):
            raise ConfigError("chunk sizes must be positive")
        self.topk_grid = tuple(int(k) for k in self.topk_grid)
        if not self.features or not self.topk_grid:
            raise ConfigError("feature, chunk-size and top-k grids must be non-empty")
        if self.folds < 2:
            raise ConfigError("need at least 2 folds")

    def included_pairs(self, available):
        wanted = self.pairs or tuple(sorted(available))
        return tuple(p for p in wanted if p not in self.exclude_pairs)

    def hyperparams(self, seed):
        return Hyperparams(self.model, self.l2_lambda, self.epochs, self.eta0, seed)

    def fw(self):
        return FunctionWordList.load(self.fw_list) if self.fw_list else FunctionWordList.default()


@dataclass(frozen=True)
class ResultRow:
    suite: str
    languages: str
    feature: str
    chunk_size: int
    top_k: int | None
    model: str
    folds: int
    mean_accuracy: float
    std: float
    n_samples: int
    seed: int

    def sort_key(self):
        return (self.suite, self.languages, self.feature, self.chunk_size, self.top_k or 0)


COLUMNS = [f.name for f in fields(ResultRow)]


def load_corpora(spec, notes=None):
    """Read every configured tagged corpus; a missing file is noted, not fatal."""
    data = {}
    for pair, path in sorted(spec.corpora.items()):
        if not Path(path).is_file():
            if notes is not None:
                notes.append(f"corpus file for {pair} not found: {path}")
            log.warning("corpus file for %s not found: %s", pair, path)
            continue
        data[pair] = load_pretagged(path)
    return data


def _chunks(sentences, size, mode, spec, key):
    cfg = ChunkingConfig(size, mode, derive_seed(spec.seed, "chunks", key),
                         spec.drop_partial_final, spec.dedupe_pooled_originals)
    return build_chunks(sentences, cfg)


def _run_cell(args):
    suite, languages, kind, size, k, chunks, spec = args
    fw = spec.fw() if kind.uses_fw else None
    featurizer = Featurizer(kind, fw, k if kind.ngram_order else None, spec.basis, spec.normalize_pos)
    seed = derive_seed(spec.seed, suite.value, languages, kind.value, size, k or 0)
    hp = spec.hyperparams(seed)
    if spec.global_vocab:
        report = cross_validate(featurizer.fit_transform(chunks), spec.folds, hp)
    else:
        report = cross_validate(chunks, spec.folds, hp, pipeline=featurizer)
    return ResultRow(suite.value, languages, kind.value, size, k if kind.ngram_order else None,
                     spec.model.value, spec.folds, report.mean, report.std, report.n_samples,
                     spec.seed)


def _balanced(chunks, spec, key, notes, label):
    """Balance a chunk set, or record why the cell has to be skipped."""
    try:
        data = balance(chunks, derive_seed(spec.seed, "balance", key))
    except ConfigError as exc:
        notes.append(f"skipped {label}: {exc}")
        return None
    if len(data) // 2 < spec.folds:
        notes.append(f"skipped {label}: {len(data)} balanced chunks cannot fill {spec.folds} folds")
        return None
    return data


def _execute(cells, spec):
    if spec.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    return sorted(rows, key=ResultRow.sort_key)


def run_table2(spec, data=None, notes=None):
    """Per-pair, all-pairs (homogeneous) and pooled rows for FW, POS3 and POS2."""
    notes = [] if notes is None else notes
    data = load_corpora(spec, notes) if data is None else data
    pairs = spec.included_pairs(data)
    present = [p for p in pairs if data.get(p)]
    for p in pairs:
        if p not in present:
            notes.append(f"skipped {p}: no corpus available")
    size = spec.chunk_sizes[0]
    groups = []
    homogeneous = {}
    for p in present:
        homogeneous[p] = _chunks(data[p], size, ChunkMode.HOMOGENEOUS, spec, p)
        groups.append((p, homogeneous[p]))
    if present:
        groups.append((ALL, [c for p in present for c in homogeneous[p]]))
        pooled_input = [s for p in present for s in data[p]]
        groups.append((POOLED, _chunks(pooled_input, size, ChunkMode.POOLED, spec, POOLED)))
    cells = []
    for languages, chunks in groups:
        balanced = _balanced(chunks, spec, (languages, size), notes, f"{languages} at size {size}")
        if balanced is None:
            continue
        for kind in spec.features:
            cells.append((Suite.TABLE2, languages, kind, size, spec.top_k, balanced, spec))
    return _execute(cells, spec)


def _pooled_sentences(spec, data, notes):
    pairs = spec.included_pairs(data)
    for p in pairs:
        if not data.get(p):
            notes.append(f"skipped {p}: no corpus available")
    return [s for p in pairs for s in data.get(p, [])]


def run_chunk_size_sweep(spec, data=None, notes=None, chunk_counts=None):
    """Pooled POS-bigram accuracy for each chunk size.

    ``chunk_counts``, if given, receives size -> number of chunks emitted
    before balancing.
    """
    notes = [] if notes is None else notes
    data = load_corpora(spec, notes) if data is None else data
    sentences = _pooled_sentences(spec, data, notes)
    cells = []
    for size in spec.chunk_sizes:
        # one pool permutation for every size, so sizes differ only in where chunks are cut
        chunks = _chunks(sentences, size, ChunkMode.POOLED, spec, POOLED)
        if chunk_counts is not None:
            chunk_counts[size] = len(chunks)
        balanced = _balanced(chunks, spec, (POOLED, size), notes, f"chunk size {size}")
        if balanced is not None:
            cells.append((Suite.FIG2_CHUNK_SWEEP, POOLED, FeatureKind.POS2, size, spec.top_k,
                          balanced, spec))
    return _execute(cells, spec)


def run_topk_sweep(spec, data=None, notes=None):
    """FW+POS3 and FW+POS2 accuracy for every k in the grid, pooled chunks."""
    notes = [] if notes is None else notes
    data = load_corpora(spec, notes) if data is None else data
    sentences = _pooled_sentences(spec, data, notes)
    size = spec.chunk_sizes[0]
    chunks = _chunks(sentences, size, ChunkMode.POOLED, spec, POOLED)
    balanced = _balanced(chunks, spec, (POOLED, size), notes, f"top-k sweep at size {size}")
    if balanced is None:
        return []
    cells = [(Suite.FIG3_TOPK_SWEEP, POOLED, kind, size, k, balanced, spec)
             for kind in TOPK_KINDS for k in spec.topk_grid]
    return _execute(cells, spec)


def run_custom(spec, data=None, notes=None):
    """Every (feature, chunk size) combination on pooled chunks."""
    notes = [] if notes is None else notes
    data = load_corpora(spec, notes) if data is None else data
    sentences = _pooled_sentences(spec, data, notes)
    cells = []
    for size in spec.chunk_sizes:
        chunks = _chunks(sentences, size, ChunkMode.POOLED, spec, POOLED)
        balanced = _balanced(chunks, spec, (POOLED, size), notes, f"chunk size {size}")
        if balanced is None:
            continue
        cells.extend((Suite.CUSTOM, POOLED, kind, size, spec.top_k, balanced, spec)
                     for kind in spec.features)
    return _execute(cells, spec)


RUNNERS = {
    Suite.TABLE2: run_table2,
    Suite.FIG2_CHUNK_SWEEP: run_chunk_size_sweep,
    Suite.FIG3_TOPK_SWEEP: run_topk_sweep,
    Suite.CUSTOM: run_custom,
}


def run(spec, data=None, notes=None):
    return RUNNERS[spec.suite](spec, data=data, notes=notes)


# ---- reports ---------------------------------------------------------------

def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in sorted(rows, key=ResultRow.sort_key):
        d = asdict(r)
        d["top_k"] = "" if r.top_k is None else r.top_k
        d["mean_accuracy"] = repr(float(r.mean_accuracy))
        d["std"] = repr(float(r.std))
        writer.writerow([d[c] for c in COLUMNS])
    return buf.getvalue()


def read_results_csv(path):
    rows = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != COLUMNS:
            raise ConfigError(f"{path}: unexpected columns {reader.fieldnames}")
        for rec in reader:
            rows.append(ResultRow(
                rec["suite"], rec["languages"], rec["feature"], int(rec["chunk_size"]),
                int(rec["top_k"]) if rec["top_k"] else None, rec["model"], int(rec["folds"]),
                float(rec["mean_accuracy"]), float(rec["std"]), int(rec["n_samples"]),
                int(rec["seed"]),
            ))
    return rows


def _pct(x):
    return f"{100 * x:.2f}%"


def _table2_md(rows):
    by = {(r.languages, r.feature): r for r in rows}
    langs = sorted({r.languages for r in rows}, key=lambda l: (l == POOLED, l != ALL, l))
    feats = [k.value for k in TABLE2_FEATURES if any(r.feature == k.value for r in rows)]
    out = ["## Classification accuracy by language", "",
           "| Chunks | Languages | " + " | ".join(feats) + " | n_samples |",
           "|---|---|" + "---|" * len(feats) + "---|"]
    for lang in langs:
        kind = "shuffled across languages" if lang == POOLED else "one language per chunk"
        cells = [_pct(by[(lang, f)].mean_accuracy) if (lang, f) in by else "-" for f in feats]
        n = next(r.n_samples for r in rows if r.languages == lang)
        out.append(f"| {kind} | {lang} | " + " | ".join(cells) + f" | {n} |")
    out += ["", f"The `{ALL}` row merges the homogeneous per-language chunks of every "
            "included pair into one balanced dataset.", ""]
    return out


def _table3_md(rows):
    out = ["## Samples and accuracy per chunk size", "",
           "| Chunk size | Number of samples | POS-bigram accuracy |", "|---|---|---|"]
    for r in sorted(rows, key=lambda r: -r.chunk_size):
        out.append(f"| {r.chunk_size} | {r.n_samples} | {_pct(r.mean_accuracy)} |")
    return out + [""]


def _topk_md(rows):
    grid = sorted({r.top_k for r in rows})
    feats = [k.value for k in TOPK_KINDS if any(r.feature == k.value for r in rows)]
    by = {(r.feature, r.top_k): r for r in rows}
    out = ["## Function words plus top-k POS n-grams", "",
           "| k | " + " | ".join(feats) + " |", "|---|" + "---|" * len(feats)]
    for k in grid:
        out.append(f"| {k} | " + " | ".join(_pct(by[(f, k)].mean_accuracy) if (f, k) in by else "-"
                                           for f in feats) + " |")
    return out + [""]


def _custom_md(rows):
    out = ["## Custom runs", "", "| Feature | Chunk size | Accuracy | std | n_samples |",
           "|---|---|---|---|---|"]
    for r in sorted(rows, key=ResultRow.sort_key):
        out.append(f"| {r.feature} | {r.chunk_size} | {_pct(r.mean_accuracy)} | {r.std:.4f} | "
                   f"{r.n_samples} |")
    return out + [""]


def summary_markdown(rows, notes=()):
    rows = sorted(rows, key=ResultRow.sort_key)
    seeds = sorted({r.seed for r in rows})
    folds = sorted({r.folds for r in rows})
    models = sorted({r.model for r in rows})
    out = ["# Translationese classification results", "",
           f"- seed: {', '.join(map(str, seeds))}",
           f"- folds: {', '.join(map(str, folds))} (stratified cross-validation)",
           f"- model: {', '.join(models)}",
           "- every dataset is balanced, so chance level is 50%", ""]
    sections = (("table2", _table2_md), ("fig2", _table3_md), ("fig3", _topk_md),
                ("custom", _custom_md))
    for suite, render in sections:
        part = [r for r in rows if r.suite == suite]
        if part:
            out += render(part)
    if notes:
        out += ["## Notes", ""] + [f"- {n}" for n in notes] + [""]
    return "\n".join(out)


def plot_series(rows):
    """Plot-data series keyed by file stem: list of (x, mean_accuracy)."""
    series = {}
    rows = sorted(rows, key=ResultRow.sort_key)
    t2 = [r for r in rows if r.suite == "table2"]
    if t2:
        langs = sorted({r.languages for r in t2}, key=lambda l: (l == POOLED, l != ALL, l))
        series["fig1_languages"] = [
            (lang, sum(r.mean_accuracy for r in t2 if r.languages == lang)
             / sum(1 for r in t2 if r.languages == lang))
            for lang in langs]
    f2 = sorted((r for r in rows if r.suite == "fig2"), key=lambda r: r.chunk_size)
    if f2:
        series["fig2_chunk_size"] = [(r.chunk_size, r.mean_accuracy) for r in f2]
    for stem, kind in (("fig3a_fw_pos3", "FW_POS3"), ("fig3b_fw_pos2", "FW_POS2")):
        part = sorted((r for r in rows if r.suite == "fig3" and r.feature == kind),
                      key=lambda r: r.top_k)
        if part:
            series[stem] = [(r.top_k, r.mean_accuracy) for r in part]
    return series


def emit_report(rows, out_dir, formats=("csv", "md", "dat", "png"), notes=()):
    """Write results.csv, summary.md, one .dat per figure and, optionally, PNGs."""
    if not rows:
        raise ConfigError("no result rows to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        p = out_dir / "results.csv"
        p.write_text(rows_to_csv(rows), encoding="utf-8")
        written.append(p)
    if "md" in formats:
        p = out_dir / "summary.md"
        p.write_text(summary_markdown(rows, notes), encoding="utf-8")
        written.append(p)
    series = plot_series(rows)
    if "dat" in formats:
        for stem, points in series.items():
            p = out_dir / f"{stem}.dat"
            p.write_text("".join(f"{x}\t{y!r}\n" for x, y in points), encoding="utf-8")
            written.append(p)
    if "png" in formats:
        from .plotting import render_figures

        written.extend(render_figures(series, out_dir))
    return written
