"""Command-line front end binding the modules into operator commands.

Subcommands map one-to-one onto module operations: `ingest` parses and
profiles a graph, `train`/`eval`/`index` drive the embedding and retrieval
stages separately, `grid-search-hnsw`/`sweep`/`compare` run the benchmark
harnesses, `recommend` executes the full three-stage run, `synth` writes a
planted-community test graph, and `verify` re-proves a finished run's
checksums and evidence.

Configuration is INI-style with one section per module config (run, train,
hnsw, eval, compare, sweep, grid, synth); unknown sections or keys are
rejected, as are unknown keys in `--set section.key=value` overrides.
Exit codes: 0 success, 1 usage/config error, 2 data error (parse failure in
strict mode, missing targets, corrupt artifacts, verification findings).
All randomness derives from the single top-level seed (see the pipeline
module for the fan-out rule). `KGREC_THREADS` caps recommendation workers.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from kgrec import ann_hnsw, kge, pipeline
from kgrec.ann_hnsw import HnswError, HnswParams
from kgrec.kge import KgeError, TrainConfig, TrainingDivergedError
from kgrec.pipeline import PipelineConfig, PipelineError
from kgrec.rdf_store import RDFS_LABEL, StoreError, TripleStore
from kgrec.semantic_filter import FilterError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

log = logging.getLogger("kgrec")

KNOWN_KEYS: dict[str, set[str]] = {
    "run": {
        "input_graph", "output", "targets", "targets_file", "raw_k", "top_n",
        "filter_config", "allowed_classes", "label_property", "checkpoint",
        "index_path", "seed", "strict", "deterministic", "workers",
    },
    "train": {
        "model", "dim", "lr", "batch_size", "epochs",
        "negatives_per_positive", "margin", "optimizer", "l2",
    },
    "hnsw": {"M", "ef_construction", "ef_search"},
    "eval": {"eval_fraction", "mode"},
    "compare": {"models", "epochs"},
    "sweep": {"lrs", "dims"},
    "grid": {"Ms", "ef_constructions", "ef_searches", "k", "n_queries"},
    "synth": {"n_persons", "community_size", "noise_fraction", "graph"},
}

SUBCOMMANDS = (
    "ingest", "train", "eval", "index", "grid-search-hnsw",
    "sweep", "compare", "recommend", "synth", "verify",
)


class CliError(Exception):
    """Fatal command error carrying the process exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        raise CliError(EXIT_USAGE, f"{self.prog}: {message}")


# -- configuration -------------------------------------------------------------


def _new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (e.g. hnsw.M)
    return parser


def load_config(path: str | None, overrides: list[str]) -> configparser.ConfigParser:
    """Read the INI file (if any) and apply --set overrides; validate keys."""
    parser = _new_parser()
    if path is not None:
        cfg_path = Path(path)
        if not cfg_path.exists():
            raise CliError(EXIT_USAGE, f"config file not found: {cfg_path}")
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise CliError(EXIT_USAGE, f"config file {cfg_path}: {exc}") from exc
    for section in parser.sections():
        if section not in KNOWN_KEYS:
            raise CliError(EXIT_USAGE, f"unknown config section [{section}]")
        unknown = set(parser[section]) - KNOWN_KEYS[section]
        if unknown:
            raise CliError(
                EXIT_USAGE,
                f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}",
            )
    for item in overrides:
        target, sep, value = item.partition("=")
        if not sep:
            raise CliError(EXIT_USAGE, f"--set needs section.key=value, got {item!r}")
        section, dot, key = target.partition(".")
        if not dot or not section or not key:
            raise CliError(EXIT_USAGE, f"--set needs section.key=value, got {item!r}")
        if section not in KNOWN_KEYS:
            raise CliError(EXIT_USAGE, f"--set: unknown section {section!r}")
        if key not in KNOWN_KEYS[section]:
            raise CliError(EXIT_USAGE, f"--set: unknown key {key!r} in section {section!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)
    return parser


def _typed(section: str, key: str, raw: str, kind):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return kind(raw)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, f"config {section}.{key}: {exc}") from exc


def get_value(cfg: configparser.ConfigParser, section: str, key: str, kind=str, default=None):
    if cfg.has_section(section) and key in cfg[section]:
        return _typed(section, key, cfg[section][key], kind)
    return default


def require_value(cfg: configparser.ConfigParser, section: str, key: str, kind=str):
    value = get_value(cfg, section, key, kind)
    if value is None:
        raise CliError(EXIT_USAGE, f"missing required config key {section}.{key}")
    return value


def get_list(cfg: configparser.ConfigParser, section: str, key: str, kind=str, default=()):
    raw = get_value(cfg, section, key)
    if raw is None:
        return list(default)
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    return [_typed(section, key, p, kind) for p in parts]


def _resolve_targets(cfg: configparser.ConfigParser) -> list[str]:
    targets = get_list(cfg, "run", "targets")
    targets_file = get_value(cfg, "run", "targets_file")
    if targets_file:
        path = Path(targets_file)
        if not path.exists():
            raise CliError(EXIT_USAGE, f"targets_file not found: {path}")
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                targets.append(line)
    return targets


def _train_config(cfg: configparser.ConfigParser, seed: int = 0) -> TrainConfig:
    try:
        return TrainConfig(
            model=get_value(cfg, "train", "model", str, "complex"),
            dim=get_value(cfg, "train", "dim", int, 200),
            lr=get_value(cfg, "train", "lr", float, 0.01),
            batch_size=get_value(cfg, "train", "batch_size", int, 128),
            epochs=get_value(cfg, "train", "epochs", int, 10),
            negatives_per_positive=get_value(cfg, "train", "negatives_per_positive", int, 16),
            margin=get_value(cfg, "train", "margin", float, 1.0),
            optimizer=get_value(cfg, "train", "optimizer", str, "adagrad"),
            l2=get_value(cfg, "train", "l2", float, 0.0),
            seed=seed,
        )
    except KgeError as exc:
        raise CliError(EXIT_USAGE, f"config [train]: {exc}") from exc


def _hnsw_params(cfg: configparser.ConfigParser, seed: int = 0) -> HnswParams:
    try:
        return HnswParams(
            M=get_value(cfg, "hnsw", "M", int, 16),
            ef_construction=get_value(cfg, "hnsw", "ef_construction", int, 400),
            ef_search=get_value(cfg, "hnsw", "ef_search", int, 50),
            seed=seed,
        )
    except HnswError as exc:
        raise CliError(EXIT_USAGE, f"config [hnsw]: {exc}") from exc


@dataclasses.dataclass
class Settings:
    """Flag-resolved common settings (flags beat config file values)."""

    cfg: configparser.ConfigParser
    seed: int
    output: Path | None
    strict: bool
    deterministic: bool
    workers: int

    @classmethod
    def resolve(cls, cfg: configparser.ConfigParser, args) -> "Settings":
        seed = args.seed if args.seed is not None else get_value(cfg, "run", "seed", int, 0)
        out = args.output_dir or get_value(cfg, "run", "output")
        strict = get_value(cfg, "run", "strict", bool, True)
        if args.strict:
            strict = True
        if args.lenient:
            strict = False
        deterministic = get_value(cfg, "run", "deterministic", bool, True)
        if args.deterministic:
            deterministic = True
        if args.parallel:
            deterministic = False
        workers = get_value(cfg, "run", "workers", int, 1)
        cap = os.environ.get("KGREC_THREADS")
        if cap is not None:
            try:
                cap_n = int(cap)
            except ValueError as exc:
                raise CliError(EXIT_USAGE, f"KGREC_THREADS must be an integer, got {cap!r}") from exc
            if cap_n < 1:
                raise CliError(EXIT_USAGE, "KGREC_THREADS must be >= 1")
            workers = min(workers, cap_n)
        return cls(
            cfg=cfg,
            seed=seed,
            output=Path(out) if out else None,
            strict=strict,
            deterministic=deterministic,
            workers=max(1, workers),
        )

    def out_dir(self) -> Path:
        if self.output is None:
            raise CliError(EXIT_USAGE, "no output directory: set run.output or pass --output-dir")
        self.output.mkdir(parents=True, exist_ok=True)
        return self.output


def _load_graph(settings: Settings) -> TripleStore:
    path = require_value(settings.cfg, "run", "input_graph")
    if not Path(path).exists():
        raise CliError(EXIT_USAGE, f"input graph not found: {path}")
    try:
        store = TripleStore.from_ntriples(path, strict=settings.strict)
    except StoreError as exc:
        raise CliError(EXIT_DATA, f"cannot parse {path}: {exc}") from exc
    log.info("parsed %s", path)
    return store


def _checkpoint_path(settings: Settings) -> Path:
    explicit = get_value(settings.cfg, "run", "checkpoint")
    if explicit:
        return Path(explicit)
    return settings.out_dir() / pipeline.MODEL_NAME


def _load_checkpoint(settings: Settings, store: TripleStore) -> kge.EmbeddingModel:
    path = _checkpoint_path(settings)
    if not path.exists():
        raise CliError(EXIT_USAGE, f"checkpoint not found: {path} (run `train` first)")
    try:
        return kge.load_checkpoint(path, store)
    except KgeError as exc:
        raise CliError(EXIT_DATA, f"corrupt checkpoint {path}: {exc}") from exc


# -- subcommands ----------------------------------------------------------------


def cmd_ingest(settings: Settings) -> int:
    store = _load_graph(settings)
    stats = store.parse_stats
    counts = {
        "triples": sum(1 for _ in store.match()),
        "entities": len(store.entity_ids()),
        "relations": len({p for _, p, _ in store.match()}),
        "lines": stats.lines,
        "statements": stats.statements,
        "skipped": stats.skipped,
    }
    for key, value in counts.items():
        print(f"{key}: {value}")
    if settings.output is not None:
        path = settings.out_dir() / "ingest.json"
        path.write_text(json.dumps(counts, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_train(settings: Settings) -> int:
    store = _load_graph(settings)
    triples = pipeline.graph_triples(store)
    if not triples:
        raise CliError(EXIT_DATA, "graph has no entity-to-entity triples to train on")
    cfg = _train_config(settings.cfg, seed=settings.seed + pipeline.MODEL_SEED_OFFSET)
    entities = store.entity_ids()
    relations = sorted({p for _, p, _ in triples})
    model = kge.init_model(cfg, entities, relations)
    try:
        trace = kge.train(model, triples, cfg)
    except TrainingDivergedError as exc:
        raise CliError(EXIT_DATA, f"training diverged: {exc}") from exc
    out = settings.out_dir()
    checkpoint = _checkpoint_path(settings)
    kge.save_checkpoint(model, checkpoint, store)
    kge.write_loss_trace(trace, out / "loss_trace.csv")
    print(f"model: {cfg.model} dim={cfg.dim} entities={model.n_entities} relations={model.n_relations}")
    print(f"final_loss: {trace[-1].mean_loss!r}" if trace else "final_loss: n/a")
    print(f"checkpoint: {checkpoint}")
    return EXIT_OK


def cmd_eval(settings: Settings) -> int:
    store = _load_graph(settings)
    cfg = _train_config(settings.cfg, seed=settings.seed + pipeline.MODEL_SEED_OFFSET)
    fraction = get_value(settings.cfg, "eval", "eval_fraction", float, 0.1)
    mode = get_value(settings.cfg, "eval", "mode", str, "filtered")
    try:
        report, train_time = pipeline.train_and_evaluate(
            store, cfg, fraction, settings.seed + pipeline.SPLIT_SEED_OFFSET, mode=mode
        )
    except KgeError as exc:
        raise CliError(EXIT_DATA, str(exc)) from exc
    payload = {
        "model": cfg.model,
        "mode": report.mode,
        "mrr": report.mrr,
        "hits1": report.hits1,
        "hits3": report.hits3,
        "hits10": report.hits10,
        "queries": len(report.per_query_ranks),
        "train_time_s": None if settings.deterministic else round(train_time, 6),
    }
    for key in ("model", "mode", "mrr", "hits1", "hits3", "hits10", "queries"):
        print(f"{key}: {payload[key]}")
    if settings.output is not None:
        path = settings.out_dir() / "eval.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_index(settings: Settings) -> int:
    store = _load_graph(settings)
    model = _load_checkpoint(settings, store)
    params = _hnsw_params(settings.cfg, seed=settings.seed + pipeline.INDEX_SEED_OFFSET)
    index = ann_hnsw.build(model.entity_params, model.entity_ids, params)
    explicit = get_value(settings.cfg, "run", "index_path")
    path = Path(explicit) if explicit else settings.out_dir() / pipeline.INDEX_NAME
    ann_hnsw.save(index, path)
    print(f"indexed: {index.n} vectors dim={index.dim} max_level={index.max_level}")
    print(f"index: {path}")
    return EXIT_OK


def cmd_grid_search(settings: Settings) -> int:
    store = _load_graph(settings)
    model = _load_checkpoint(settings, store)
    vectors = model.entity_params
    m_values = get_list(settings.cfg, "grid", "Ms", int, (4, 8, 16))
    efc_values = get_list(settings.cfg, "grid", "ef_constructions", int, (100, 200, 400))
    efs_values = get_list(settings.cfg, "grid", "ef_searches", int, (10, 50))
    k = get_value(settings.cfg, "grid", "k", int, 10)
    n_queries = get_value(settings.cfg, "grid", "n_queries", int, 200)
    rng = np.random.default_rng(settings.seed + pipeline.QUERY_SEED_OFFSET)
    n_queries = min(n_queries, vectors.shape[0])
    queries = vectors[rng.choice(vectors.shape[0], size=n_queries, replace=False)]
    try:
        reports = ann_hnsw.grid_search(
            vectors, queries, m_values, efc_values, efs_values, k=k,
            seed=settings.seed + pipeline.INDEX_SEED_OFFSET,
        )
    except HnswError as exc:
        raise CliError(EXIT_USAGE, f"config [grid]: {exc}") from exc
    path = settings.out_dir() / "hnsw_grid.csv"
    ann_hnsw.write_retrieval_reports(reports, path)
    best = max(reports, key=lambda r: (r.recall_at_k, -r.mean_latency_s))
    print(
        f"best: M={best.params.M} efConstruction={best.params.ef_construction} "
        f"efSearch={best.params.ef_search} recall@{best.k}={best.recall_at_k!r}"
    )
    print(f"grid: {path}")
    return EXIT_OK


def cmd_sweep(settings: Settings) -> int:
    store = _load_graph(settings)
    lrs = get_list(settings.cfg, "sweep", "lrs", float)
    dims = get_list(settings.cfg, "sweep", "dims", int)
    if not lrs or not dims:
        raise CliError(EXIT_USAGE, "config [sweep]: lrs and dims must be non-empty")
    fixed = _train_config(settings.cfg)
    fraction = get_value(settings.cfg, "eval", "eval_fraction", float, 0.1)
    text = pipeline.sweep_hyperparams(
        store, lrs, dims, fixed,
        out_csv=settings.out_dir() / "sweep.csv",
        eval_fraction=fraction,
        seed=settings.seed,
        deterministic=settings.deterministic,
    )
    print(text, end="")
    return EXIT_OK


def cmd_compare(settings: Settings) -> int:
    store = _load_graph(settings)
    names = get_list(settings.cfg, "compare", "models", str, ("complex", "transe"))
    epochs = get_value(settings.cfg, "compare", "epochs", int, 10)
    fixed = _train_config(settings.cfg)
    try:
        models = [dataclasses.replace(fixed, model=name) for name in names]
    except KgeError as exc:
        raise CliError(EXIT_USAGE, f"config [compare]: {exc}") from exc
    text = pipeline.compare_models(
        store, models, epochs,
        out_csv=settings.out_dir() / "compare.csv",
        eval_fraction=get_value(settings.cfg, "eval", "eval_fraction", float, 0.1),
        seed=settings.seed,
        deterministic=settings.deterministic,
    )
    print(text, end="")
    return EXIT_OK


def cmd_recommend(settings: Settings) -> int:
    allowed = get_list(settings.cfg, "run", "allowed_classes") or None
    config = PipelineConfig(
        input_graph=require_value(settings.cfg, "run", "input_graph"),
        output=str(settings.out_dir()),
        targets=tuple(_resolve_targets(settings.cfg)),
        train_config=_train_config(settings.cfg),
        hnsw_params=_hnsw_params(settings.cfg),
        raw_k=get_value(settings.cfg, "run", "raw_k", int, 100),
        top_n=get_value(settings.cfg, "run", "top_n", int, 10),
        filter_config=get_value(settings.cfg, "run", "filter_config"),
        allowed_classes=tuple(allowed) if allowed else None,
        label_property=get_value(settings.cfg, "run", "label_property", str, RDFS_LABEL),
        checkpoint=get_value(settings.cfg, "run", "checkpoint"),
        index_path=get_value(settings.cfg, "run", "index_path"),
        seed=settings.seed,
        strict=settings.strict,
        deterministic=settings.deterministic,
        workers=settings.workers,
    )
    manifest = pipeline.run(config)
    failures = [row for row in manifest.per_target if row["error"] is not None]
    for row in manifest.per_target:
        if row["error"] is None:
            print(
                f"{row['target']}: {row['emitted']} recommendations "
                f"(raw {row['raw_k']}, gated {row['gated']}, connected {row['connected']})"
            )
        else:
            print(f"{row['target']}: ERROR {row['error']}", file=sys.stderr)
    print(f"report: {Path(config.output) / pipeline.RECOMMENDATIONS_NAME}")
    print(f"manifest: {Path(config.output) / pipeline.MANIFEST_NAME}")
    return EXIT_DATA if failures else EXIT_OK


def cmd_synth(settings: Settings) -> int:
    graph = get_value(settings.cfg, "synth", "graph")
    path = Path(graph) if graph else settings.out_dir() / "synthetic.nt"
    path.parent.mkdir(parents=True, exist_ok=True)
    result = pipeline.generate_synthetic_graph(
        path,
        n_persons=get_value(settings.cfg, "synth", "n_persons", int, 1000),
        community_size=get_value(settings.cfg, "synth", "community_size", int, 10),
        noise_fraction=get_value(settings.cfg, "synth", "noise_fraction", float, 0.05),
        seed=settings.seed,
    )
    print(f"graph: {path}")
    print(f"persons: {len(result.person_iris)} communities: {len(result.communities)}")
    print(f"truth: {path}.truth.json")
    return EXIT_OK


def cmd_verify(settings: Settings, manifest_arg: str | None) -> int:
    if manifest_arg:
        manifest_path = Path(manifest_arg)
    elif settings.output is not None:
        manifest_path = settings.output / pipeline.MANIFEST_NAME
    else:
        raise CliError(EXIT_USAGE, "verify needs a manifest path or run.output/--output-dir")
    if not manifest_path.exists():
        raise CliError(EXIT_USAGE, f"manifest not found: {manifest_path}")
    problems = pipeline.verify_run(manifest_path)
    if problems:
        for problem in problems:
            print(problem, file=sys.stderr)
        return EXIT_DATA
    print("ok")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(
        prog="kgrec",
        description=__doc__.splitlines()[0],
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "common flags (every subcommand):\n"
            "  --config PATH            INI config file\n"
            "  --set SECTION.KEY=VALUE  override a config value (repeatable)\n"
            "  --seed N                 top-level random seed\n"
            "  --output-dir DIR         directory for artifacts\n"
            "  --strict | --lenient     parse error handling\n"
            "  --deterministic | --parallel\n"
            "                           byte-stable outputs vs worker threads\n"
            "  -v, -vv                  progress / debug logging\n"
            "environment:\n"
            "  KGREC_THREADS            caps recommendation worker threads"
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI config file")
    common.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override a config value (repeatable; unknown keys are rejected)",
    )
    common.add_argument("--seed", type=int, default=None, help="top-level random seed")
    common.add_argument("--output-dir", metavar="DIR", help="directory for artifacts")
    strictness = common.add_mutually_exclusive_group()
    strictness.add_argument("--strict", action="store_true", help="fail on the first parse error")
    strictness.add_argument("--lenient", action="store_true", help="skip and count bad input lines")
    speed = common.add_mutually_exclusive_group()
    speed.add_argument(
        "--deterministic", action="store_true",
        help="byte-stable outputs; wall times go to sidecar files",
    )
    speed.add_argument("--parallel", action="store_true", help="allow worker threads and inline timings")
    common.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="-v for progress, -vv for debug detail",
    )

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    sub.add_parser("ingest", parents=[common], help="parse a graph and report corpus counts")
    sub.add_parser("train", parents=[common], help="train embeddings and save a checkpoint")
    sub.add_parser("eval", parents=[common], help="train on a held-out split and report ranking metrics")
    sub.add_parser("index", parents=[common], help="build the vector index from a checkpoint")
    sub.add_parser("grid-search-hnsw", parents=[common], help="benchmark index parameter combinations")
    sub.add_parser("sweep", parents=[common], help="learning-rate x dimension hyperparameter sweep")
    sub.add_parser("compare", parents=[common], help="train and rank all configured model kinds")
    sub.add_parser("recommend", parents=[common], help="full three-stage recommendation run")
    sub.add_parser("synth", parents=[common], help="generate a planted-community test graph")
    verify = sub.add_parser("verify", parents=[common], help="re-check a finished run's checksums and evidence")
    verify.add_argument("manifest", nargs="?", default=None, help="manifest file (default: <output>/manifest.json)")
    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "eval": cmd_eval,
    "index": cmd_index,
    "grid-search-hnsw": cmd_grid_search,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "recommend": cmd_recommend,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        level = logging.WARNING - 10 * min(args.verbose, 2)
        logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
        log.setLevel(level)
        cfg = load_config(args.config, args.set)
        settings = Settings.resolve(cfg, args)
        if args.command == "verify":
            return cmd_verify(settings, args.manifest)
        return _COMMANDS[args.command](settings)
    except CliError as exc:
        print(f"kgrec: {exc}", file=sys.stderr)
        return exc.code
    except PipelineError as exc:
        code = EXIT_USAGE if exc.stage == "config" else EXIT_DATA
        print(f"kgrec: {exc}", file=sys.stderr)
        return code
    except (StoreError, KgeError, HnswError, FilterError) as exc:
        print(f"kgrec: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
