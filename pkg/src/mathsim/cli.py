"""Command line driver.

Subcommands cover the full workflow: ``synth`` generates a corpus,
``ingest`` validates one, ``shuffle`` persists the experiment-wide random
document order, ``run`` executes a single experiment config, ``suite``
ranks several configs, and ``render`` turns a saved similarity matrix into
a PNG. Outputs are deterministic: rerunning the same config reproduces the
same bytes.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import synth
from .bow import dump_bow, build_bow, corpus_third_cutpoints, THIRDS_CORPUS_WIDE
from .config import ConfigError, ExperimentConfig, load_config
from .evaluate import (
    EvalReport,
    cross_validate,
    region_sizes,
    report_to_csv,
    suite_to_csv,
)
from .ingest import (
    ParseStats,
    filter_corpus,
    load_corpus,
    load_msc_spec,
    read_ordering,
    shuffle_once,
    write_ordering,
)
from .models import save_similarity_matrix, load_similarity_matrix
from .viz import emit_pr_tsv, write_matrix_png

log = logging.getLogger(__name__)


def _load_filtered_corpus(corpus_dir: str, metadata: str | None, msc_spec: str | None):
    stats = ParseStats()
    documents = load_corpus(corpus_dir, metadata, stats)
    spec_path = Path(msc_spec) if msc_spec else Path(corpus_dir) / "msc-spec.tsv"
    filtered = filter_corpus(documents, load_msc_spec(spec_path))
    return documents, filtered, stats


def _resolve_paths(config: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "corpus", None):
        config.corpus_dir = args.corpus
    if getattr(args, "metadata", None):
        config.metadata_path = args.metadata
    if getattr(args, "msc_spec", None):
        config.msc_spec_path = args.msc_spec
    if getattr(args, "ordering", None):
        config.ordering_path = args.ordering
    if getattr(args, "seed", None) is not None:
        config.base_seed = args.seed
    if config.corpus_dir is None:
        raise ConfigError(f"{config.config_id}: no corpus directory configured")
    if config.ordering_path is None:
        raise ConfigError(f"{config.config_id}: no ordering file configured")
    return config


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path,
    jobs: int = 1,
    save_matrices: bool = False,
    dump_bows: bool = False,
) -> EvalReport:
    """Execute one experiment config and write its artifacts.

    Writes ``report.csv`` plus per-run ``curve-*.tsv`` and ``matrix-*.png``
    files (and optionally raw ``matrix-*.mat`` exports and per-document
    ``bow-debug-*.tsv`` dumps) into ``out_dir``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _, filtered, _ = _load_filtered_corpus(
        config.corpus_dir, config.metadata_path, config.msc_spec_path
    )
    ordering = read_ordering(config.ordering_path)
    report = cross_validate(filtered, ordering, config, keep_artifacts=True, jobs=jobs)

    for run in report.runs:
        stem = f"{config.config_id}-{run.fold}-{run.rerun}"
        (out_dir / f"curve-{stem}.tsv").write_text(emit_pr_tsv(run.curve), encoding="utf-8")
        write_matrix_png(run.matrix, region_sizes(run.test_codes), out_dir / f"matrix-{stem}.png")
        if save_matrices:
            save_similarity_matrix(run.matrix, out_dir / f"matrix-{stem}.mat")
    if dump_bows:
        cutpoints = None
        if config.representation.thirds_scope == THIRDS_CORPUS_WIDE:
            cutpoints = corpus_third_cutpoints(
                filtered, config.weight_scheme, config.representation.include_operand_runs
            )
        for doc in filtered:
            bow = build_bow(doc, config.representation, config.weight_scheme, cutpoints)
            (out_dir / f"bow-debug-{doc.id}.tsv").write_text(dump_bow(bow), encoding="utf-8")
    (out_dir / "report.csv").write_text(report_to_csv(report), encoding="utf-8")
    return report


def run_suite(
    configs: list[ExperimentConfig], out_dir: str | Path, jobs: int = 1
) -> Path:
    """Run several configs and write the combined ranking.

    Duplicate config ids abort before anything runs; a config that fails
    mid-run is recorded as a failed row and the suite continues.
    """
    seen: set[str] = set()
    for config in configs:
        if config.config_id in seen:
            raise ConfigError(f"duplicate config_id {config.config_id!r} in suite")
        seen.add(config.config_id)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: list[tuple[EvalReport | None, str, str]] = []
    for config in configs:
        try:
            report = run_experiment(config, out_dir / config.config_id, jobs=jobs)
            results.append((report, config.config_id, ""))
        except Exception as exc:  # recorded, not fatal to the suite
            log.error("config %s failed: %s", config.config_id, exc)
            results.append((None, config.config_id, str(exc)))
    suite_path = out_dir / "suite.csv"
    suite_path.write_text(suite_to_csv(results), encoding="utf-8")
    return suite_path


def _cmd_synth(args) -> int:
    spec = synth.SynthSpec(
        num_categories=args.categories,
        docs_per_category=args.docs_per_category,
        vocab_size_per_category=args.vocab_size,
        vocab_overlap=args.vocab_overlap,
        words_per_doc=args.words_per_doc,
        formulae_per_doc=args.formulae_per_doc,
        formula_notation_overlap=args.notation_overlap,
        seed=args.seed,
    )
    paths = synth.generate(spec, args.out)
    print(f"wrote {spec.num_categories * spec.docs_per_category} documents to {paths['corpus']}")
    return 0


def _cmd_ingest(args) -> int:
    documents, filtered, stats = _load_filtered_corpus(args.corpus, args.metadata, args.msc_spec)
    categories = {doc.msc_codes[0][:2] for doc in filtered}
    print(f"parsed {stats.documents} documents, {stats.formulae} formulae")
    print(f"mathml failures: {stats.mathml_failures}, empty formulae dropped: {stats.empty_formulae_dropped}")
    print(f"after reference-class filtering: {len(filtered)} documents in {len(categories)} categories")
    return 0


def _cmd_shuffle(args) -> int:
    _, filtered, _ = _load_filtered_corpus(args.corpus, args.metadata, args.msc_spec)
    ordering = shuffle_once(filtered, args.seed)
    write_ordering(ordering, args.out)
    print(f"wrote ordering of {len(ordering.ordered_ids)} documents to {args.out}")
    return 0


def _cmd_run(args) -> int:
    config = _resolve_paths(load_config(args.config), args)
    report = run_experiment(
        config, args.out, jobs=args.jobs,
        save_matrices=args.save_matrices, dump_bows=args.dump_bows,
    )
    f1_mean, f1_var = report.aggregates["f1"]
    max_mean, _ = report.aggregates["max_f1"]
    print(f"{config.config_id}: break-even F1 {f1_mean:.4f} (var {f1_var:.6f}), max F1 {max_mean:.4f}")
    print(f"report: {Path(args.out) / 'report.csv'}")
    return 0


def _cmd_suite(args) -> int:
    configs = [_resolve_paths(load_config(path), args) for path in args.configs]
    suite_path = run_suite(configs, args.out, jobs=args.jobs)
    print(f"suite ranking: {suite_path}")
    return 0


def _cmd_render(args) -> int:
    matrix = load_similarity_matrix(args.matrix)
    if args.regions:
        regions = [int(part) for part in args.regions.split(",")]
    else:
        regions = [matrix.shape[0]]
    write_matrix_png(matrix, regions, args.out)
    print(f"wrote {args.out}")
    return 0


def _add_corpus_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="corpus directory of .xhtml files")
    parser.add_argument("--metadata", help="metadata TSV (default: <corpus>/metadata.tsv)")
    parser.add_argument("--msc-spec", help="MSC spec TSV (default: <corpus>/msc-spec.tsv)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mathsim",
        description="bag-of-words math representation and similarity benchmarking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--categories", type=int, default=4)
    p.add_argument("--docs-per-category", type=int, default=50)
    p.add_argument("--vocab-size", type=int, default=300)
    p.add_argument("--vocab-overlap", type=float, default=0.0)
    p.add_argument("--words-per-doc", type=int, default=100)
    p.add_argument("--formulae-per-doc", type=int, default=3)
    p.add_argument("--notation-overlap", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="parse and filter a corpus, print statistics")
    _add_corpus_arguments(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("shuffle", help="persist the experiment-wide document order")
    _add_corpus_arguments(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="ordering file to write")
    p.set_defaults(func=_cmd_shuffle)

    p = sub.add_parser("run", help="run one experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--corpus")
    p.add_argument("--metadata")
    p.add_argument("--msc-spec")
    p.add_argument("--ordering")
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--save-matrices", action="store_true")
    p.add_argument("--dump-bows", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("suite", help="run several configs and rank them")
    p.add_argument("--configs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus")
    p.add_argument("--metadata")
    p.add_argument("--msc-spec")
    p.add_argument("--ordering")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_suite)

    p = sub.add_parser("render", help="render a saved similarity matrix to PNG")
    p.add_argument("--matrix", required=True, help="matrix .mat file")
    p.add_argument("--out", required=True, help="PNG path to write")
    p.add_argument("--regions", help="comma-separated region sizes")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
