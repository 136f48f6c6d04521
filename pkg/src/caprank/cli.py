"""Command-line pipeline driver.

Stages: `split` assigns scaffold-disjoint folds, `battles` fits the joint
models and logs pairwise outcomes plus single-source metrics, `rate` fits
bootstrap Bradley-Terry ratings, and `winrate` / `report` / `correlate`
emit the derived tables.  Every command validates all of its inputs before
creating any output file, and with a fixed config the whole pipeline is
byte-identical across runs and worker-thread counts.

Exit codes: 0 success, 2 validation/usage error, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .arena import (
    AGGREGATE,
    BattleRecord,
    BattleSet,
    NoBattles,
    RatingTable,
    bootstrap_ratings,
    fit_bradley_terry,
    generate_battles,
    merge_battle_sets,
    read_battles_csv,
    read_ratings_csv,
    win_rate_matrix,
    write_battles_csv,
    write_ratings_csv,
    write_winrate_csv,
)
from .chem.split import SplitAssignment, read_split_file, scaffold_split, write_split_file
from .fusion.pairs import single_source_scores
from .fusion.svm import SvmHyperparams
from .metrics import (
    MetricRow,
    ZeroVariance,
    compute_metric_report,
    pearson_r,
    read_metrics_csv,
    spearman_r,
    write_metrics_csv,
)
from .store import ArenaInputs, DatasetManifest, align, load_embeddings, load_manifest

GROUP_KEYS = ("model_family", "prompt_variant", "representation", "size_label")
CORRELATE_MODES = ("rating_vs_metrics", "split_a_vs_split_b")


class ConfigError(ValueError):
    pass


class UnknownGroupKey(ValueError):
    pass


class TooFewPoints(ValueError):
    pass


@dataclass(slots=True)
class DatasetPaths:
    manifest: Path
    molecule_embeddings: Path | None
    caption_embeddings: dict[str, Path]


@dataclass(slots=True)
class RunConfig:
    datasets: list[DatasetPaths]
    ratios: tuple[float, float, float, float]
    folds: int
    seed: int
    svm: SvmHyperparams
    bootstrap_rounds: int
    bootstrap_per_round: int
    out: Path


def _expect_keys(payload: dict, allowed: set[str], where: str) -> None:
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: str, out_override=None, seed_override=None) -> RunConfig:
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config path does not exist: {config_path}")
    try:
        payload = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config root must be a JSON object")
    _expect_keys(
        payload,
        {"datasets", "ratios", "folds", "seed", "svm", "bootstrap", "out"},
        "config",
    )

    raw_datasets = payload.get("datasets")
    if not isinstance(raw_datasets, list) or not raw_datasets:
        raise ConfigError("config needs a non-empty 'datasets' list")
    datasets = []
    for entry in raw_datasets:
        if not isinstance(entry, dict):
            raise ConfigError("each dataset entry must be an object")
        _expect_keys(
            entry, {"manifest", "molecule_embeddings", "caption_embeddings"}, "dataset"
        )
        if "manifest" not in entry:
            raise ConfigError("dataset entry missing 'manifest'")
        caption_paths = {
            str(name): Path(p)
            for name, p in (entry.get("caption_embeddings") or {}).items()
        }
        mol = entry.get("molecule_embeddings")
        datasets.append(
            DatasetPaths(Path(entry["manifest"]), Path(mol) if mol else None, caption_paths)
        )

    ratios = tuple(payload.get("ratios", (0.6, 0.2, 0.1, 0.1)))
    if len(ratios) != 4 or any(not isinstance(r, (int, float)) for r in ratios):
        raise ConfigError("ratios must be four numbers")
    if any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError("ratios must be non-negative and sum to 1")

    folds = payload.get("folds", 5)
    if not isinstance(folds, int) or folds < 1:
        raise ConfigError("folds must be an integer >= 1")

    seed = payload.get("seed", 0) if seed_override is None else seed_override
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")

    svm_payload = payload.get("svm", {})
    if not isinstance(svm_payload, dict):
        raise ConfigError("svm section must be an object")
    _expect_keys(svm_payload, {"C", "epsilon", "tol", "max_epochs"}, "svm")
    svm = SvmHyperparams(
        C=float(svm_payload.get("C", 1.0)),
        epsilon=float(svm_payload.get("epsilon", 0.1)),
        tol=float(svm_payload.get("tol", 1e-4)),
        max_epochs=int(svm_payload.get("max_epochs", 1000)),
    )
    if svm.C <= 0 or svm.epsilon < 0 or svm.tol <= 0 or svm.max_epochs < 1:
        raise ConfigError("svm hyperparameters out of range")

    boot = payload.get("bootstrap", {})
    if not isinstance(boot, dict):
        raise ConfigError("bootstrap section must be an object")
    _expect_keys(boot, {"rounds", "per_round"}, "bootstrap")
    rounds = boot.get("rounds", 10)
    per_round = boot.get("per_round", 250_000)
    if not isinstance(rounds, int) or rounds < 1:
        raise ConfigError("bootstrap rounds must be an integer >= 1")
    if not isinstance(per_round, int) or per_round < 1:
        raise ConfigError("bootstrap per_round must be an integer >= 1")

    out = out_override if out_override is not None else payload.get("out")
    if not out:
        raise ConfigError("output directory missing: set 'out' in config or pass --out")

    return RunConfig(
        datasets, ratios, folds, int(seed), svm, rounds, per_round, Path(out)
    )


def resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ConfigError("threads must be >= 0")
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def _load_manifests(config: RunConfig) -> list[DatasetManifest]:
    manifests = []
    seen: set[str] = set()
    for paths in config.datasets:
        if not paths.manifest.is_file():
            raise ConfigError(f"manifest path does not exist: {paths.manifest}")
        manifest = load_manifest(paths.manifest)
        if manifest.dataset in seen:
            raise ConfigError(f"duplicate dataset name {manifest.dataset!r}")
        seen.add(manifest.dataset)
        manifests.append(manifest)
    return manifests


def _splits_path(config: RunConfig, dataset: str) -> Path:
    return config.out / f"{dataset}.splits.json"


def _battles_path(config: RunConfig, dataset: str) -> Path:
    return config.out / f"{dataset}.battles.csv"


def _load_inputs(config: RunConfig, manifest: DatasetManifest, paths: DatasetPaths) -> ArenaInputs:
    if paths.molecule_embeddings is None:
        raise ConfigError(f"dataset {manifest.dataset!r} has no molecule_embeddings path")
    n = len(manifest.molecules)
    molecule_emb = load_embeddings(paths.molecule_embeddings, expected_rows=n)
    caption_embs = {
        name: load_embeddings(p, expected_rows=n)
        for name, p in paths.caption_embeddings.items()
    }
    return align(manifest, molecule_emb, caption_embs)


def _emit(path: Path) -> None:
    print(f"wrote {path}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_split(args) -> int:
    config = load_config(args.config, args.out, args.seed)
    manifests = _load_manifests(config)
    produced = [
        scaffold_split(m, config.ratios, config.seed, config.folds) for m in manifests
    ]
    config.out.mkdir(parents=True, exist_ok=True)
    for manifest, splits in zip(manifests, produced):
        path = _splits_path(config, manifest.dataset)
        write_split_file(path, splits)
        _emit(path)
    return 0


def cmd_battles(args) -> int:
    config = load_config(args.config, args.out, args.seed)
    threads = resolve_threads(args.threads)
    manifests = _load_manifests(config)

    jobs: list[tuple[DatasetManifest, ArenaInputs, list[SplitAssignment]]] = []
    for manifest, paths in zip(manifests, config.datasets):
        splits_file = _splits_path(config, manifest.dataset)
        if not splits_file.is_file():
            raise ConfigError(
                f"splits file missing for {manifest.dataset!r}: {splits_file} (run split first)"
            )
        splits = read_split_file(splits_file)
        inputs = _load_inputs(config, manifest, paths)
        if len(manifest.captioners) < 2:
            raise ConfigError("need at least two captioners")
        jobs.append((manifest, inputs, splits))

    battle_sets: list[BattleSet] = []
    metric_rows: list[MetricRow] = []
    for manifest, inputs, splits in jobs:
        battle_sets.append(
            generate_battles(inputs, splits, config.svm, config.seed, threads)
        )
        for split in splits:
            for name in manifest.captioner_names():
                scored = single_source_scores(name, inputs, split, config.svm, config.seed)
                values = compute_metric_report(manifest.task, scored.scores, scored.labels)
                metric_rows.append(MetricRow(manifest.dataset, split.fold, name, values))

    config.out.mkdir(parents=True, exist_ok=True)
    for manifest, battles in zip(manifests, battle_sets):
        path = _battles_path(config, manifest.dataset)
        write_battles_csv(battles, path)
        _emit(path)
    metrics_path = config.out / "metrics.csv"
    write_metrics_csv(metric_rows, metrics_path)
    _emit(metrics_path)
    return 0


def _read_all_battles(config: RunConfig, manifests: list[DatasetManifest]) -> BattleSet:
    sets = []
    for manifest in manifests:
        path = _battles_path(config, manifest.dataset)
        if not path.is_file():
            raise ConfigError(
                f"battles file missing for {manifest.dataset!r}: {path} (run battles first)"
            )
        sets.append(read_battles_csv(path))
    return merge_battle_sets(sets)


def cmd_rate(args) -> int:
    config = load_config(args.config, args.out, args.seed)
    manifests = _load_manifests(config)
    battles = _read_all_battles(config, manifests)
    table = bootstrap_ratings(
        battles,
        rounds=config.bootstrap_rounds,
        per_round=config.bootstrap_per_round,
        seed=config.seed,
        stratified=not args.pooled_bootstrap,
    )
    config.out.mkdir(parents=True, exist_ok=True)
    path = config.out / "ratings.csv"
    write_ratings_csv(table, path)
    _emit(path)
    return 0


def cmd_winrate(args) -> int:
    config = load_config(args.config, args.out, args.seed)
    manifests = _load_manifests(config)
    battles = _read_all_battles(config, manifests)
    matrix = win_rate_matrix(battles, args.scope)
    config.out.mkdir(parents=True, exist_ok=True)
    path = config.out / f"winrate.{args.scope}.csv"
    write_winrate_csv(matrix, path)
    _emit(path)
    return 0


def _metric_means(rows: list[MetricRow]) -> dict[tuple[str, str, str], float]:
    """(dataset, captioner, metric) -> mean value over folds."""
    sums: dict[tuple[str, str, str], list[float]] = {}
    for row in rows:
        for metric, value in row.values.items():
            sums.setdefault((row.dataset, row.captioner, metric), []).append(value)
    return {key: sum(vals) / len(vals) for key, vals in sums.items()}


def _write_plain_leaderboard(path: Path, table: RatingTable, rows: list[MetricRow]) -> None:
    means = _metric_means(rows)
    columns = sorted({(dataset, metric) for dataset, _, metric in means})
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["captioner", "rating", "ci_low", "ci_high", "theta"]
            + [f"{dataset}:{metric}" for dataset, metric in columns]
        )
        for e in table.sorted_by_rating():
            cells = [e.captioner, repr(e.rating), repr(e.ci_low), repr(e.ci_high), repr(e.theta)]
            for dataset, metric in columns:
                value = means.get((dataset, e.captioner, metric))
                cells.append("" if value is None else repr(value))
            writer.writerow(cells)


def _group_of_captioners(manifests: list[DatasetManifest], key: str) -> dict[str, str]:
    if key not in GROUP_KEYS:
        raise UnknownGroupKey(f"unknown group key {key!r}; pick one of {GROUP_KEYS}")
    groups: dict[str, str] = {}
    for manifest in manifests:
        for meta in manifest.captioners:
            value = getattr(meta, key)
            group = "" if value is None else str(value)
            if meta.name in groups and groups[meta.name] != group:
                raise ConfigError(
                    f"captioner {meta.name!r} has conflicting {key} values across datasets"
                )
            groups[meta.name] = group
    return groups


def _relabel_battles(battles: BattleSet, groups: dict[str, str]) -> BattleSet:
    records = []
    for r in battles.battles:
        ga = groups.get(r.a)
        gb = groups.get(r.b)
        if ga is None or gb is None:
            raise ConfigError(f"battle names {r.a!r}/{r.b!r} missing captioner metadata")
        if ga == gb:
            continue  # within-group battles carry no between-group signal
        if ga < gb:
            records.append(BattleRecord(r.dataset, r.fold, r.molecule_id, ga, gb, r.outcome))
        else:
            flipped = {"A": "B", "B": "A", "tie": "tie"}[r.outcome]
            records.append(BattleRecord(r.dataset, r.fold, r.molecule_id, gb, ga, flipped))
    if not records:
        raise ConfigError("no cross-group battles")
    return BattleSet(tuple(records), tuple(sorted(set(groups.values()))))


def cmd_report(args) -> int:
    config = load_config(args.config, args.out, args.seed)
    manifests = _load_manifests(config)
    ratings_path = config.out / "ratings.csv"
    metrics_path = config.out / "metrics.csv"
    if not ratings_path.is_file():
        raise ConfigError(f"ratings file missing: {ratings_path} (run rate first)")
    if not metrics_path.is_file():
        raise ConfigError(f"metrics file missing: {metrics_path} (run battles first)")
    table = read_ratings_csv(ratings_path)
    metric_rows = read_metrics_csv(metrics_path)

    if args.group_by is None:
        path = config.out / "leaderboard.csv"
        _write_plain_leaderboard(path, table, metric_rows)
        _emit(path)
        return 0

    groups = _group_of_captioners(manifests, args.group_by)
    battles = _read_all_battles(config, manifests)
    grouped = _relabel_battles(battles, groups)
    group_table = fit_bradley_terry(grouped)
    members: dict[str, list[str]] = {}
    for name, group in groups.items():
        members.setdefault(group, []).append(name)
    path = config.out / f"leaderboard.{args.group_by}.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "rating", "theta", "members"])
        for e in group_table.sorted_by_rating():
            writer.writerow(
                [e.captioner, repr(e.rating), repr(e.theta), ";".join(sorted(members.get(e.captioner, [])))]
            )
    _emit(path)
    return 0


def _correlation_rows_vs_metrics(table: RatingTable, metric_rows: list[MetricRow]):
    ratings = {e.captioner: e.rating for e in table.entries}
    per_metric: dict[str, dict[str, list[float]]] = {}
    for row in metric_rows:
        for metric, value in row.values.items():
            per_metric.setdefault(metric, {}).setdefault(row.captioner, []).append(value)
    shared_any = max(
        (len(set(captioners) & set(ratings)) for captioners in per_metric.values()),
        default=0,
    )
    if shared_any < 3:
        raise TooFewPoints("need at least three captioners shared between ratings and metrics")
    out = []
    for metric in sorted(per_metric):
        shared = sorted(set(per_metric[metric]) & set(ratings))
        if len(shared) < 3:
            continue
        xs = [ratings[name] for name in shared]
        ys = [sum(per_metric[metric][name]) / len(per_metric[metric][name]) for name in shared]
        try:
            out.append((
                "rating", metric, pearson_r(xs, ys), spearman_r(xs, ys), len(shared)
            ))
        except ZeroVariance:
            continue
    return out


def _fit_scoped(battles: BattleSet, datasets: set[str], label: str) -> dict[str, float]:
    records = tuple(r for r in battles.battles if r.dataset in datasets)
    if not records:
        raise NoBattles(f"no battles in dataset group {label}: {sorted(datasets)}")
    names = sorted({name for r in records for name in (r.a, r.b)})
    table = fit_bradley_terry(BattleSet(records, tuple(names)))
    return {e.captioner: e.rating for e in table.entries}


def cmd_correlate(args) -> int:
    config = load_config(args.config, args.out, args.seed)
    path = config.out / f"correlation.{args.mode}.csv"

    if args.mode == "rating_vs_metrics":
        ratings_path = config.out / "ratings.csv"
        metrics_path = config.out / "metrics.csv"
        if not ratings_path.is_file():
            raise ConfigError(f"ratings file missing: {ratings_path} (run rate first)")
        if not metrics_path.is_file():
            raise ConfigError(f"metrics file missing: {metrics_path} (run battles first)")
        rows = _correlation_rows_vs_metrics(
            read_ratings_csv(ratings_path), read_metrics_csv(metrics_path)
        )
    else:
        if not args.group_a or not args.group_b:
            raise ConfigError("split_a_vs_split_b mode needs --group-a and --group-b")
        group_a = set(args.group_a.split(","))
        group_b = set(args.group_b.split(","))
        if group_a & group_b:
            raise ConfigError("dataset groups must be disjoint")
        manifests = _load_manifests(config)
        battles = _read_all_battles(config, manifests)
        ratings_a = _fit_scoped(battles, group_a, "a")
        ratings_b = _fit_scoped(battles, group_b, "b")
        shared = sorted(set(ratings_a) & set(ratings_b))
        if len(shared) < 3:
            raise TooFewPoints(
                f"need at least three captioners shared between groups, got {len(shared)}"
            )
        xs = [ratings_a[name] for name in shared]
        ys = [ratings_b[name] for name in shared]
        rows = [("rating[group_a]", "rating[group_b]", pearson_r(xs, ys), spearman_r(xs, ys), len(shared))]

    config.out.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["column_a", "column_b", "pearson", "spearman", "n"])
        for column_a, column_b, pearson, spearman, n in rows:
            writer.writerow([column_a, column_b, repr(pearson), repr(spearman), n])
    _emit(path)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caprank",
        description="Rank molecule-caption sources by pairwise prediction battles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="seed (overrides config)")
        p.add_argument(
            "--threads", type=int, default=1, help="worker threads; 0 = one per CPU"
        )

    p = sub.add_parser("split", help="write scaffold-disjoint fold assignments")
    common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("battles", help="run all pairwise models and log battles")
    common(p)
    p.set_defaults(func=cmd_battles)

    p = sub.add_parser("rate", help="fit Bradley-Terry ratings with bootstrap CIs")
    common(p)
    p.add_argument(
        "--pooled-bootstrap",
        action="store_true",
        help="sample bootstrap battles from the pooled set instead of per-dataset",
    )
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("winrate", help="write a win-rate matrix")
    common(p)
    p.add_argument("--scope", default=AGGREGATE, help="dataset name or 'aggregate'")
    p.set_defaults(func=cmd_winrate)

    p = sub.add_parser("report", help="write the leaderboard")
    common(p)
    p.add_argument("--group-by", choices=GROUP_KEYS, default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("correlate", help="correlate ratings with metrics or across dataset groups")
    common(p)
    p.add_argument("--mode", choices=CORRELATE_MODES, required=True)
    p.add_argument("--group-a", default=None, help="comma-separated dataset names")
    p.add_argument("--group-b", default=None, help="comma-separated dataset names")
    p.set_defaults(func=cmd_correlate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 -- last-resort boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
