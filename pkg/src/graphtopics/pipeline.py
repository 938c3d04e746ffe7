"""Staged, cached, reproducible pipeline from raw corpus to reports.

Stages run in a fixed order (ingest, embed, graph, scan, select, baseline,
evaluate, export), each persisting its artifacts into the output directory.
A stage is skipped when its content-hash key (relevant config plus input
artifact digests) matches the recorded state and its artifacts still exist.
A manifest records config, environment, timings and artifact digests; a
lock file keeps concurrent runs out of the same directory.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import sys
import time
import platform
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import kmeans, ward
from .coherence import (
    aggregate_pmi,
    build_reference_stats,
    external_agreement,
    load_external_labels,
    load_reference_stats,
    save_reference_stats,
)
from .corpus import (
    CORPUS_FORMATS,
    NormalizeConfig,
    build_vocabulary,
    load_corpus,
    normalize_corpus,
    save_corpus,
)
from .export import export_sankey, export_wordclouds
from .features import (
    l2_normalize,
    load_embeddings,
    lsa_reduce,
    save_embeddings,
    tfidf,
)
from .graph import load_graph, mst_knn, save_graph
from .partitions import (
    Partition,
    adjusted_rand_index,
    normalized_mutual_information,
    variation_of_information,
)
from .stability import (
    build_context,
    default_t_grid,
    load_scan,
    save_cross_vi,
    save_scan,
    save_scan_partitions,
    scan,
    select_robust_scales,
)

try:
    from importlib.metadata import version as _dist_version

    _pkg_version = _dist_version("graphtopics")
except Exception:  # not installed; fall back to the source tree version
    _pkg_version = "0.1.0"

STAGES = (
    "ingest",
    "embed",
    "graph",
    "scan",
    "select",
    "baseline",
    "evaluate",
    "export",
)
FEATURE_KINDS = ("tfidf", "tfidf_lsa")


class ConfigError(ValueError):
    """Invalid or missing pipeline configuration."""


class StageError(RuntimeError):
    """A pipeline stage failed; earlier artifacts are left intact."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage!r} failed: {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    """Everything a pipeline run depends on, with pinned defaults."""

    corpus_path: str = ""
    corpus_format: str = "jsonl"
    feature: str = "tfidf_lsa"
    lsa_dim: int = 300
    sublinear_tf: bool = False
    min_df: int = 1
    max_df_ratio: float = 1.0
    min_token_length: int = 2
    min_tokens: int = 30
    k: int = 13
    weight_floor: float = 1e-6
    t_min: float = 1e-2
    t_max: float = 1e2
    n_times: int = 200
    n_runs: int = 50
    variant: str = "linearized"
    n_scales: int = 3
    vi_threshold_factor: float = 0.1
    baseline_ks: list | None = None
    top_words: int = 10
    wordcloud_words: int = 50
    reference_stats_path: str | None = None
    reference_vocabulary_cap: int | None = 10000
    external_labels: dict = field(default_factory=dict)
    seed: int = 0
    n_jobs: int = 1
    out_dir: str = "pipeline_out"

    def validate(self) -> None:
        if not self.corpus_path:
            raise ConfigError("corpus_path is required")
        if self.corpus_format not in CORPUS_FORMATS:
            raise ConfigError(
                f"corpus_format must be one of {CORPUS_FORMATS}, "
                f"got {self.corpus_format!r}"
            )
        kind = self.feature_kind()
        if kind not in FEATURE_KINDS + ("external",):
            raise ConfigError(
                f"feature must be tfidf, tfidf_lsa or external:<path>, "
                f"got {self.feature!r}"
            )
        for name, value in (
            ("lsa_dim", self.lsa_dim),
            ("k", self.k),
            ("n_times", self.n_times),
            ("n_runs", self.n_runs),
            ("n_scales", self.n_scales),
            ("top_words", self.top_words),
            ("wordcloud_words", self.wordcloud_words),
        ):
            if int(value) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not 0 < self.t_min < self.t_max:
            raise ConfigError("need 0 < t_min < t_max")
        if self.variant not in ("linearized", "exponential"):
            raise ConfigError(f"unknown variant {self.variant!r}")

    def feature_kind(self) -> str:
        return "external" if self.feature.startswith("external:") else self.feature

    def external_embeddings_path(self) -> str:
        return self.feature.split(":", 1)[1]

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**raw)


def write_partition_csv(path, doc_ids, labels) -> None:
    """Write `doc_id,cluster` rows in the given document order."""
    if len(doc_ids) != len(labels):
        raise ValueError("doc_ids and labels must have equal length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["doc_id", "cluster"])
        for did, lab in zip(doc_ids, labels):
            writer.writerow([did, int(lab)])


def load_partition_csv(path) -> tuple[list, np.ndarray]:
    """Read a `doc_id,cluster` CSV, returning ids and raw labels."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["doc_id", "cluster"]:
            raise ValueError(f"{path}: expected 'doc_id,cluster' header")
        ids, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected doc_id,cluster")
            ids.append(row[0])
            labels.append(int(row[1]))
    if len(set(ids)) != len(ids):
        raise ValueError(f"{path}: duplicate doc ids")
    return ids, np.array(labels, dtype=np.int64)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _stage_key(config_part: dict, input_paths: list) -> str:
    payload = {
        "version": _pkg_version,
        "config": config_part,
        "inputs": {str(p): _sha256(p) for p in input_paths},
    }
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode("utf-8")
    ).hexdigest()


class _Run:
    """Mutable state of one pipeline invocation over an output directory."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = config.out_dir
        os.makedirs(self.out, exist_ok=True)
        self.state_path = os.path.join(self.out, "stage_state.json")
        self.state = {}
        if os.path.exists(self.state_path):
            with open(self.state_path, encoding="utf-8") as fh:
                self.state = json.load(fh)
        self.timings: dict[str, float] = {}
        self.executed: dict[str, str] = {}

    def path(self, name: str) -> str:
        return os.path.join(self.out, name)

    def require(self, stage: str, *names: str) -> None:
        missing = [n for n in names if not os.path.exists(self.path(n))]
        if missing:
            raise StageError(
                stage,
                f"missing input artifacts {missing}; run earlier stages first",
            )

    def save_state(self) -> None:
        with open(self.state_path, "w", encoding="utf-8") as fh:
            json.dump(self.state, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def run_stage(self, name: str, key: str, artifacts: list, fn, force: bool) -> None:
        prior = self.state.get(name)
        paths = [self.path(a) for a in artifacts]
        if (
            not force
            and prior is not None
            and prior.get("key") == key
            and all(os.path.exists(p) for p in paths)
        ):
            self.executed[name] = "cached"
            return
        started = time.perf_counter()
        try:
            fn()
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, str(exc)) from exc
        for p in paths:
            if not os.path.exists(p):
                raise StageError(name, f"stage did not produce {p}")
        self.timings[name] = time.perf_counter() - started
        self.executed[name] = "ran"
        self.state[name] = {"key": key, "artifacts": artifacts}
        self.save_state()


def _load_normalized(run: _Run):
    return load_corpus(run.path("corpus_normalized.jsonl"), "pre_tokenized_jsonl")


def _stage_ingest(run: _Run):
    cfg = run.config
    corpus = load_corpus(cfg.corpus_path, cfg.corpus_format)
    norm_cfg = NormalizeConfig(
        min_token_length=cfg.min_token_length, min_tokens=cfg.min_tokens
    )
    normalized = normalize_corpus(corpus, norm_cfg)
    save_corpus(normalized, run.path("corpus_normalized.jsonl"))


def _stage_embed(run: _Run):
    cfg = run.config
    corpus = _load_normalized(run)
    kind = cfg.feature_kind()
    if kind == "external":
        emb = load_embeddings(cfg.external_embeddings_path(), corpus)
    else:
        vocab = build_vocabulary(
            corpus, min_df=cfg.min_df, max_df_ratio=cfg.max_df_ratio
        )
        emb = tfidf(corpus, vocab, sublinear=cfg.sublinear_tf)
        if kind == "tfidf_lsa":
            emb = lsa_reduce(emb, target_dim=cfg.lsa_dim, seed=cfg.seed)
    save_embeddings(emb, run.path("embeddings.tsv"))


def _stage_graph(run: _Run):
    cfg = run.config
    corpus = _load_normalized(run)
    emb = load_embeddings(run.path("embeddings.tsv"), corpus)
    graph = mst_knn(emb, k=cfg.k, weight_floor=cfg.weight_floor)
    save_graph(graph, run.path("graph.tsv"))


def _stage_scan(run: _Run):
    cfg = run.config
    graph = load_graph(run.path("graph.tsv"))
    ctx = build_context(graph)
    grid = default_t_grid(cfg.t_min, cfg.t_max, cfg.n_times)
    result = scan(
        ctx,
        grid,
        n_runs=cfg.n_runs,
        seed=cfg.seed,
        variant=cfg.variant,
        n_jobs=cfg.n_jobs,
    )
    save_scan(result, run.path("scan.csv"))
    save_cross_vi(result, run.path("cross_vi.csv"))
    save_scan_partitions(result, run.path("scan_partitions.csv"))


def _scale_artifact_names(scales) -> list:
    names = []
    seen: dict[str, int] = {}
    for s in scales:
        label = s.label
        if label in seen:
            seen[label] += 1
            label = f"{label}{seen[label]}"
        else:
            seen[label] = 0
        names.append((label, f"partition_{label}.csv"))
    return names


def _load_scales(run: _Run):
    with open(run.path("scales.json"), encoding="utf-8") as fh:
        return json.load(fh)


def _stage_select(run: _Run):
    cfg = run.config
    corpus = _load_normalized(run)
    result = load_scan(
        run.path("scan.csv"),
        run.path("cross_vi.csv"),
        run.path("scan_partitions.csv"),
    )
    threshold = cfg.vi_threshold_factor * np.log(result.n_nodes)
    selection = select_robust_scales(
        result, n_scales=cfg.n_scales, vi_threshold=threshold
    )
    names = _scale_artifact_names(selection.scales)
    payload = {
        "vi_threshold": selection.vi_threshold,
        "used_fallback": selection.used_fallback,
        "scales": [],
    }
    for (label, csv_name), s in zip(names, selection.scales):
        write_partition_csv(run.path(csv_name), corpus.doc_ids, s.partition.labels)
        payload["scales"].append(
            {
                "label": label,
                "t": s.t,
                "t_index": s.t_index,
                "n_clusters": s.n_clusters,
                "ensemble_vi": s.ensemble_vi,
                "plateau": list(s.plateau),
                "partition_csv": csv_name,
            }
        )
    with open(run.path("scales.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _baseline_ks(run: _Run) -> list:
    cfg = run.config
    if cfg.baseline_ks:
        return sorted({int(k) for k in cfg.baseline_ks})
    scales = _load_scales(run)["scales"]
    return sorted({int(s["n_clusters"]) for s in scales})


def _stage_baseline(run: _Run):
    cfg = run.config
    corpus = _load_normalized(run)
    emb = load_embeddings(run.path("embeddings.tsv"), corpus)
    emb = l2_normalize(emb)
    for k in _baseline_ks(run):
        km = kmeans(emb, k, seed=cfg.seed)
        write_partition_csv(
            run.path(f"kmeans_k{k}.csv"), corpus.doc_ids, km.partition.labels
        )
        wd = ward(emb, k)
        write_partition_csv(run.path(f"ward_k{k}.csv"), corpus.doc_ids, wd.labels)


def _partition_artifacts(run: _Run) -> dict:
    """Name -> path of every produced partition CSV, scales first."""
    named = {}
    for s in _load_scales(run)["scales"]:
        named[f"ms_{s['label']}"] = run.path(s["partition_csv"])
    for k in _baseline_ks(run):
        for method in ("kmeans", "ward"):
            p = run.path(f"{method}_k{k}.csv")
            if os.path.exists(p):
                named[f"{method}_k{k}"] = p
    return named


def _read_aligned_partition(path, doc_ids) -> Partition:
    ids, labels = load_partition_csv(path)
    if ids != list(doc_ids):
        index = {d: i for i, d in enumerate(ids)}
        missing = [d for d in doc_ids if d not in index]
        if missing:
            raise ValueError(
                f"{path}: missing doc ids: {', '.join(map(str, missing[:5]))}"
            )
        labels = labels[[index[d] for d in doc_ids]]
    return Partition.from_labels(labels)


def _stage_evaluate(run: _Run):
    cfg = run.config
    corpus = _load_normalized(run)
    if cfg.reference_stats_path:
        ref = load_reference_stats(cfg.reference_stats_path)
    else:
        ref = build_reference_stats(
            corpus, vocabulary_cap=cfg.reference_vocabulary_cap
        )
        save_reference_stats(ref, run.path("reference_stats.tsv"))
    report: dict = {"coherence": {}, "external": {}}
    partitions = {
        name: _read_aligned_partition(path, corpus.doc_ids)
        for name, path in _partition_artifacts(run).items()
    }
    for name, part in partitions.items():
        coh = aggregate_pmi(corpus, part, ref, n_words=cfg.top_words)
        report["coherence"][name] = {
            "aggregate_pmi": coh.aggregate_pmi,
            "n_clusters": part.n_clusters,
            "per_cluster_pmi": coh.cluster_pmi,
            "top_words": coh.cluster_words,
        }
    for label_name, label_path in sorted(cfg.external_labels.items()):
        ext = load_external_labels(label_path, corpus)
        report["external"][label_name] = {
            name: external_agreement(part, corpus, ext)
            for name, part in partitions.items()
        }
    with open(run.path("evaluation.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")


def _stage_export(run: _Run):
    cfg = run.config
    corpus = _load_normalized(run)
    scales = _load_scales(run)["scales"]
    ordered = sorted(scales, key=lambda s: s["t"])  # finest (smallest t) first
    named = [
        (
            s["label"],
            _read_aligned_partition(run.path(s["partition_csv"]), corpus.doc_ids),
        )
        for s in ordered
    ]
    export_sankey(named, path=run.path("sankey.json"))
    for label, part in named:
        export_wordclouds(
            corpus,
            part,
            n_words=cfg.wordcloud_words,
            path=run.path(f"wordcloud_{label}.json"),
        )


def _stage_plan(run: _Run) -> dict:
    """Stage name -> (cache key parts, artifact names, function)."""
    cfg = run.config
    c = asdict(cfg)

    def sub(*keys):
        return {k: c[k] for k in keys}

    plans = {}
    plans["ingest"] = (
        sub("corpus_path", "corpus_format", "min_token_length", "min_tokens"),
        [cfg.corpus_path] if os.path.exists(cfg.corpus_path) else [],
        ["corpus_normalized.jsonl"],
        _stage_ingest,
    )
    embed_inputs = [run.path("corpus_normalized.jsonl")]
    if cfg.feature_kind() == "external" and os.path.exists(
        cfg.external_embeddings_path()
    ):
        embed_inputs.append(cfg.external_embeddings_path())
    plans["embed"] = (
        sub("feature", "lsa_dim", "sublinear_tf", "min_df", "max_df_ratio", "seed"),
        embed_inputs,
        ["embeddings.tsv"],
        _stage_embed,
    )
    plans["graph"] = (
        sub("k", "weight_floor"),
        [run.path("embeddings.tsv")],
        ["graph.tsv"],
        _stage_graph,
    )
    plans["scan"] = (
        sub("t_min", "t_max", "n_times", "n_runs", "variant", "seed"),
        [run.path("graph.tsv")],
        ["scan.csv", "cross_vi.csv", "scan_partitions.csv"],
        _stage_scan,
    )
    plans["select"] = (
        sub("n_scales", "vi_threshold_factor"),
        [run.path("scan.csv"), run.path("cross_vi.csv"), run.path("scan_partitions.csv")],
        ["scales.json"],
        _stage_select,
    )
    have_scales = os.path.exists(run.path("scales.json"))
    scale_csvs = []
    baseline_csvs = []
    if have_scales:
        scale_csvs = [s["partition_csv"] for s in _load_scales(run)["scales"]]
        baseline_csvs = [
            f"{method}_k{k}.csv"
            for k in _baseline_ks(run)
            for method in ("kmeans", "ward")
        ]
    plans["baseline"] = (
        sub("baseline_ks", "seed"),
        [run.path("embeddings.tsv"), run.path("scales.json")] if have_scales else [],
        baseline_csvs,
        _stage_baseline,
    )
    partition_inputs = [
        run.path(n)
        for n in scale_csvs + baseline_csvs
        if os.path.exists(run.path(n))
    ]
    eval_inputs = [run.path("corpus_normalized.jsonl")] + partition_inputs
    if cfg.reference_stats_path and os.path.exists(cfg.reference_stats_path):
        eval_inputs.append(cfg.reference_stats_path)
    eval_inputs.extend(
        p for p in sorted(cfg.external_labels.values()) if os.path.exists(p)
    )
    plans["evaluate"] = (
        sub(
            "top_words",
            "reference_stats_path",
            "reference_vocabulary_cap",
            "external_labels",
        ),
        eval_inputs,
        ["evaluation.json"],
        _stage_evaluate,
    )
    plans["export"] = (
        sub("wordcloud_words"),
        [run.path("corpus_normalized.jsonl")]
        + [run.path(n) for n in scale_csvs if os.path.exists(run.path(n))],
        ["sankey.json"],
        _stage_export,
    )
    return plans


_STAGE_INPUT_ARTIFACTS = {
    "embed": ["corpus_normalized.jsonl"],
    "graph": ["corpus_normalized.jsonl", "embeddings.tsv"],
    "scan": ["graph.tsv"],
    "select": ["corpus_normalized.jsonl", "scan.csv", "cross_vi.csv", "scan_partitions.csv"],
    "baseline": ["corpus_normalized.jsonl", "embeddings.tsv", "scales.json"],
    "evaluate": ["corpus_normalized.jsonl", "scales.json"],
    "export": ["corpus_normalized.jsonl", "scales.json"],
}


def _execute(config: PipelineConfig, stages, force: bool) -> _Run:
    run = _Run(config)
    lock_path = run.path(".lock")
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StageError(
            "lock", f"another run holds {lock_path}; remove it if stale"
        )
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        for stage in stages:
            for artifact in _STAGE_INPUT_ARTIFACTS.get(stage, []):
                run.require(stage, artifact)
            # keys depend on upstream artifacts, so recompute after each stage
            plans = _stage_plan(run)
            cfg_part, input_paths, artifacts, fn = plans[stage]
            missing_inputs = [p for p in input_paths if not os.path.exists(p)]
            if missing_inputs:
                raise StageError(stage, f"missing inputs: {missing_inputs}")
            key = _stage_key(cfg_part, input_paths)
            run.run_stage(stage, key, artifacts, lambda: fn(run), force)
        return run
    finally:
        if os.path.exists(lock_path):
            os.remove(lock_path)


def _collect_artifacts(run: _Run) -> dict:
    arts = {}
    for entry in os.listdir(run.out):
        if entry in (".lock", "manifest.json", "stage_state.json"):
            continue
        full = os.path.join(run.out, entry)
        if os.path.isfile(full):
            arts[entry] = {"path": full, "sha256": _sha256(full)}
    return arts


def _write_manifest(run: _Run, started_at: str, status: str, error: str | None):
    import numpy
    import scipy
    import sklearn

    manifest = {
        "package": {"name": "graphtopics", "version": _pkg_version},
        "status": status,
        "error": error,
        "started": started_at,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "dependencies": {
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__,
        },
        "config": asdict(run.config),
        "stages": {
            name: {
                "result": run.executed.get(name, "not run"),
                "seconds": round(run.timings.get(name, 0.0), 4),
            }
            for name in STAGES
        },
        "artifacts": _collect_artifacts(run),
    }
    with open(run.path("manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def run_pipeline(config: PipelineConfig, stages=None, force: bool = False) -> int:
    """Run the requested stages (default: all). Returns a process exit code.

    0 on success, 2 on configuration errors, 3 when a stage fails. The
    manifest is (re)written on success and on stage failure.
    """
    started_at = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    try:
        config.validate()
        if stages is None:
            stages = STAGES
        unknown = [s for s in stages if s not in STAGES]
        if unknown:
            raise ConfigError(f"unknown stages: {unknown}")
        stages = [s for s in STAGES if s in set(stages)]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    run = None
    try:
        run = _execute(config, stages, force)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        if run is None:
            run = _Run(config)
        if exc.stage != "lock":
            _write_manifest(run, started_at, "failed", str(exc))
        return 3
    _write_manifest(run, started_at, "ok", None)
    return 0


def compare_partitions(paths, out_dir=None) -> dict:
    """Pairwise NMI/ARI/VI between partition CSVs over the same doc ids.

    Rows are aligned by doc id (the first file fixes the order); any id
    missing from another file is an error. With ``out_dir``, writes one CSV
    per metric with the file stems as row and column headers.
    """
    paths = list(paths)
    if len(paths) < 2:
        raise ValueError("need at least two partition files to compare")
    base_ids, base_labels = load_partition_csv(paths[0])
    id_index = {d: i for i, d in enumerate(base_ids)}
    parts = [Partition.from_labels(base_labels)]
    for p in paths[1:]:
        ids, labels = load_partition_csv(p)
        if set(ids) != set(base_ids):
            missing = sorted(set(base_ids) ^ set(ids))
            raise ValueError(
                f"{p}: document ids differ from {paths[0]}: "
                f"{', '.join(map(str, missing[:5]))}"
            )
        aligned = np.empty(len(ids), dtype=np.int64)
        for did, lab in zip(ids, labels):
            aligned[id_index[did]] = lab
        parts.append(Partition.from_labels(aligned))
    names = [os.path.splitext(os.path.basename(p))[0] for p in paths]
    n = len(parts)
    out = {
        "names": names,
        "nmi": np.eye(n).tolist(),
        "ari": np.eye(n).tolist(),
        "vi": np.zeros((n, n)).tolist(),
    }
    for a in range(n):
        for b in range(a + 1, n):
            nmi = normalized_mutual_information(parts[a], parts[b])
            ari = adjusted_rand_index(parts[a], parts[b])
            vi = variation_of_information(parts[a], parts[b])
            out["nmi"][a][b] = out["nmi"][b][a] = nmi
            out["ari"][a][b] = out["ari"][b][a] = ari
            out["vi"][a][b] = out["vi"][b][a] = vi
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for metric in ("nmi", "ari", "vi"):
            path = os.path.join(out_dir, f"compare_{metric}.csv")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow([""] + names)
                for name, row in zip(names, out[metric]):
                    writer.writerow([name] + [f"{v:.17g}" for v in row])
    return out
