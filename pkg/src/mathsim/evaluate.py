"""Reference-class evaluation of pairwise document similarity.

Documents sharing a top-level MSC category (the first two code characters)
form the blocks of a perfect reference matrix. A similarity matrix is swept
over every distinct value as a binarization threshold, micro-averaged
precision and recall are accumulated over all matrix cells, and the curve
is summarized by its interpolated precision = recall break-even point and
its maximal F1. Cross-validation trains on one fold and scores the held-out
documents, repeating the split for several model seeds.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bow import THIRDS_CORPUS_WIDE, build_bow, corpus_third_cutpoints
from .config import ExperimentConfig, METHOD_LDA, METHOD_LSI, METHOD_TFIDF_LDA, METHOD_TFIDF_LSI
from .ingest import CorpusOrdering, Document
from .models import (
    build_dictionary,
    build_similarity_index,
    count_vector,
    lda_infer,
    lda_train,
    lsi_project,
    lsi_train,
    pairwise_similarity,
    tfidf_transform,
)

log = logging.getLogger(__name__)

METRIC_NAMES = ("threshold", "precision", "recall", "f1", "max_f1")


def msc_category(code: str) -> str:
    """Top-level MSC category: the first two characters of a code."""
    return code[:2]


def reference_matrix(codes: list[str]) -> np.ndarray:
    """Perfect similarity under the reference classes: cell (i, j) is 1
    exactly when documents i and j share a top-level MSC category.

    With codes grouped (as produced by MSC-sorted orderings) the result is
    block diagonal.
    """
    if not codes:
        raise ValueError("cannot build a reference matrix without codes")
    categories = np.array([msc_category(code) for code in codes])
    return (categories[:, np.newaxis] == categories[np.newaxis, :]).astype(np.float64)


def region_sizes(codes: list[str]) -> list[int]:
    """Run lengths of consecutive equal top-level categories."""
    sizes: list[int] = []
    previous = None
    for code in codes:
        category = msc_category(code)
        if category != previous:
            sizes.append(1)
            previous = category
        else:
            sizes[-1] += 1
    return sizes


def binarize(matrix: np.ndarray, threshold: float) -> np.ndarray:
    """Predicted-similar indicator: 1 where similarity >= threshold."""
    return (np.asarray(matrix) >= threshold).astype(np.float64)


@dataclass
class PRCurve:
    """Micro-averaged curve points at the distinct similarity values,
    thresholds strictly decreasing."""

    thresholds: np.ndarray
    precisions: np.ndarray
    recalls: np.ndarray

    def __len__(self) -> int:
        return len(self.thresholds)

    def f1_scores(self) -> np.ndarray:
        p, r = self.precisions, self.recalls
        denom = p + r
        return np.where(denom > 0, 2 * p * r / np.where(denom > 0, denom, 1.0), 0.0)


def pr_curve(similarities: np.ndarray, reference: np.ndarray) -> PRCurve:
    """Sweep every distinct similarity value as an inclusive threshold.

    Precision and recall are micro-averaged over all cells of the flattened
    pair. An all-zero reference leaves recall undefined and is rejected.
    """
    sims = np.asarray(similarities, dtype=np.float64).ravel()
    ref = np.asarray(reference, dtype=np.float64).ravel()
    if sims.shape != ref.shape:
        raise ValueError("similarity and reference shapes differ")
    if not np.isin(ref, (0.0, 1.0)).all():
        raise ValueError("reference matrix must be binary")
    total_positive = ref.sum()
    if total_positive == 0:
        raise ValueError("reference matrix has no positive cells; recall is undefined")
    order = np.argsort(-sims, kind="stable")
    sorted_sims = sims[order]
    cumulative_tp = np.cumsum(ref[order])
    group_ends = np.append(np.nonzero(np.diff(sorted_sims) != 0.0)[0], len(sorted_sims) - 1)
    tp = cumulative_tp[group_ends]
    predicted = group_ends + 1.0
    return PRCurve(
        thresholds=sorted_sims[group_ends],
        precisions=tp / predicted,
        recalls=tp / total_positive,
    )


def f1_micro(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class BreakEvenPoint:
    threshold: float
    precision: float
    recall: float
    f1: float
    crossed: bool


def break_even(curve: PRCurve) -> BreakEvenPoint:
    """The precision = recall point of a curve.

    Scans curve points in threshold order; an exact tie is returned as is,
    otherwise the first sign change of precision - recall is linearly
    interpolated (threshold included). If the difference never crosses
    zero the point minimizing |precision - recall| is returned, flagged
    with ``crossed=False``.
    """
    t, p, r = curve.thresholds, curve.precisions, curve.recalls
    diff = p - r
    for i in range(len(diff)):
        if diff[i] == 0.0:
            return BreakEvenPoint(float(t[i]), float(p[i]), float(r[i]),
                                  f1_micro(float(p[i]), float(r[i])), True)
        if i + 1 < len(diff) and diff[i] * diff[i + 1] < 0.0:
            fraction = diff[i] / (diff[i] - diff[i + 1])
            bt = float(t[i] + fraction * (t[i + 1] - t[i]))
            bp = float(p[i] + fraction * (p[i + 1] - p[i]))
            br = float(r[i] + fraction * (r[i + 1] - r[i]))
            return BreakEvenPoint(bt, bp, br, f1_micro(bp, br), True)
    i = int(np.argmin(np.abs(diff)))
    log.warning("precision never equals recall on this curve; returning closest point")
    return BreakEvenPoint(float(t[i]), float(p[i]), float(r[i]),
                          f1_micro(float(p[i]), float(r[i])), False)


def max_f1(curve: PRCurve) -> tuple[float, float]:
    """(threshold, F1) maximizing F1 over curve points; ties take the
    highest threshold."""
    scores = curve.f1_scores()
    best = int(np.argmax(scores))  # thresholds are descending, so first max wins ties
    return float(curve.thresholds[best]), float(scores[best])


@dataclass
class RunResult:
    """Metrics (and optional artifacts) of one fold x rerun run."""

    fold: int
    rerun: int
    threshold: float
    precision: float
    recall: float
    f1: float
    max_f1: float
    max_f1_threshold: float
    crossed: bool
    test_codes: list[str] = field(default_factory=list)
    matrix: np.ndarray | None = None
    curve: PRCurve | None = None


@dataclass
class EvalReport:
    config_id: str
    representation: str
    method: str
    num_topics: int
    runs: list[RunResult]
    # metric name -> (mean, population variance) over all runs
    aggregates: dict[str, tuple[float, float]]


def _aggregate(runs: list[RunResult]) -> dict[str, tuple[float, float]]:
    out: dict[str, tuple[float, float]] = {}
    for name in METRIC_NAMES:
        values = np.array([getattr(run, name) for run in runs], dtype=np.float64)
        out[name] = (float(values.mean()), float(values.var()))
    return out


@dataclass
class _RunSpec:
    """Pickled payload of one run for the optional process pool."""

    fold: int
    rerun: int
    seed: int
    method: str
    num_topics: int
    lda_gamma_threshold: float
    lda_iterations: int
    lda_passes: int
    include_diagonal: bool
    train_bows: list
    test_bows: list
    test_codes: list[str]
    keep_artifacts: bool


def _execute_run(spec: _RunSpec) -> RunResult:
    dictionary = build_dictionary(spec.train_bows)
    if spec.method in (METHOD_TFIDF_LSI, METHOD_TFIDF_LDA):
        vectorize = lambda bow: tfidf_transform(bow, dictionary)  # noqa: E731
    else:
        vectorize = lambda bow: count_vector(bow, dictionary)  # noqa: E731
    train_vectors = [vectorize(bow) for bow in spec.train_bows]
    test_vectors = [vectorize(bow) for bow in spec.test_bows]
    if spec.method in (METHOD_LSI, METHOD_TFIDF_LSI):
        model = lsi_train(train_vectors, len(dictionary), spec.num_topics, seed=spec.seed)
        topic_vectors = [lsi_project(model, vec) for vec in test_vectors]
    else:
        model = lda_train(
            train_vectors,
            len(dictionary),
            spec.num_topics,
            gamma_threshold=spec.lda_gamma_threshold,
            iterations=spec.lda_iterations,
            passes=spec.lda_passes,
            seed=spec.seed,
        )
        topic_vectors = [lda_infer(model, vec) for vec in test_vectors]
    matrix = pairwise_similarity(build_similarity_index(topic_vectors))
    reference = reference_matrix(spec.test_codes)
    if spec.include_diagonal:
        sims, ref = matrix.ravel(), reference.ravel()
    else:
        off_diagonal = ~np.eye(len(spec.test_codes), dtype=bool)
        sims, ref = matrix[off_diagonal], reference[off_diagonal]
    curve = pr_curve(sims, ref)
    be = break_even(curve)
    mf_threshold, mf = max_f1(curve)
    return RunResult(
        fold=spec.fold,
        rerun=spec.rerun,
        threshold=be.threshold,
        precision=be.precision,
        recall=be.recall,
        f1=be.f1,
        max_f1=mf,
        max_f1_threshold=mf_threshold,
        crossed=be.crossed,
        test_codes=spec.test_codes if spec.keep_artifacts else [],
        matrix=matrix if spec.keep_artifacts else None,
        curve=curve if spec.keep_artifacts else None,
    )


def cross_validate(
    documents: list[Document],
    ordering: CorpusOrdering,
    config: ExperimentConfig,
    keep_artifacts: bool = False,
    jobs: int = 1,
) -> EvalReport:
    """Run the fold x rerun grid of one experiment and aggregate it.

    The persisted ordering is split into ``folds`` contiguous chunks; each
    run trains dictionary, weighting, and model on exactly one chunk and
    scores the remaining documents, which are ordered by (MSC code, id)
    before the similarity matrix is built. Rerun ``i`` trains with seed
    ``base_seed + i``. Aggregates are means and population variances over
    all ``folds * reruns`` runs.
    """
    by_id = {doc.id: doc for doc in documents}
    if len(by_id) != len(documents):
        raise ValueError("duplicate document ids in corpus")
    if set(by_id) != set(ordering.ordered_ids) or len(ordering.ordered_ids) != len(documents):
        raise ValueError("ordering does not match the corpus document ids")
    for doc in documents:
        if len(doc.msc_codes) != 1:
            raise ValueError(f"document {doc.id} must carry exactly one MSC code; filter first")
    if len(documents) < 2 * config.folds:
        raise ValueError("not enough documents for the requested fold count")

    scheme = config.weight_scheme
    representation = config.representation
    cutpoints = None
    if representation.thirds_scope == THIRDS_CORPUS_WIDE:
        cutpoints = corpus_third_cutpoints(
            documents, scheme, representation.include_operand_runs
        )
    bows = {
        doc.id: build_bow(doc, representation, scheme, cutpoints) for doc in documents
    }

    ordered_docs = [by_id[doc_id] for doc_id in ordering.ordered_ids]
    chunks = np.array_split(np.arange(len(ordered_docs)), config.folds)

    specs: list[_RunSpec] = []
    for rerun in range(config.reruns):
        seed = config.base_seed + rerun
        for fold in range(config.folds):
            train_docs = [ordered_docs[i] for i in chunks[fold]]
            test_docs = [
                ordered_docs[i]
                for other in range(config.folds)
                if other != fold
                for i in chunks[other]
            ]
            test_docs = sorted(test_docs, key=lambda d: (d.msc_codes[0], d.id))
            specs.append(
                _RunSpec(
                    fold=fold,
                    rerun=rerun,
                    seed=seed,
                    method=config.method,
                    num_topics=config.num_topics,
                    lda_gamma_threshold=config.lda_gamma_threshold,
                    lda_iterations=config.lda_iterations,
                    lda_passes=config.lda_passes,
                    include_diagonal=config.include_diagonal,
                    train_bows=[bows[d.id] for d in train_docs],
                    test_bows=[bows[d.id] for d in test_docs],
                    test_codes=[d.msc_codes[0] for d in test_docs],
                    keep_artifacts=keep_artifacts,
                )
            )

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_execute_run, specs))
    else:
        runs = [_execute_run(spec) for spec in specs]

    return EvalReport(
        config_id=config.config_id,
        representation=representation.label(),
        method=config.method,
        num_topics=config.num_topics,
        runs=runs,
        aggregates=_aggregate(runs),
    )


# -- report serialization -----------------------------------------------------

REPORT_COLUMNS = (
    "config_id",
    "representation",
    "method",
    "topics",
    "kind",
    "fold",
    "rerun",
    "threshold",
    "precision",
    "recall",
    "f1",
    "max_f1",
    "threshold_var",
    "precision_var",
    "recall_var",
    "f1_var",
    "max_f1_var",
)

SUITE_COLUMNS = (
    "config_id",
    "representation",
    "method",
    "topics",
    "status",
    "threshold",
    "threshold_var",
    "precision",
    "precision_var",
    "recall",
    "recall_var",
    "f1",
    "f1_var",
    "max_f1",
    "max_f1_var",
)


def _fmt(value: float) -> str:
    return format(value, ".10g")


def report_to_csv(report: EvalReport) -> str:
    """One row per run plus one aggregate row carrying the variances."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    head = [report.config_id, report.representation, report.method, str(report.num_topics)]
    for run in report.runs:
        writer.writerow(
            head
            + ["run", str(run.fold), str(run.rerun)]
            + [_fmt(getattr(run, name)) for name in METRIC_NAMES]
            + ["", "", "", "", ""]
        )
    means = [_fmt(report.aggregates[name][0]) for name in METRIC_NAMES]
    variances = [_fmt(report.aggregates[name][1]) for name in METRIC_NAMES]
    writer.writerow(head + ["aggregate", "", ""] + means + variances)
    return buffer.getvalue()


def suite_to_csv(results: list[tuple[EvalReport | None, str, str]]) -> str:
    """Combined ranking: one aggregate row per config, sorted by descending
    mean break-even F1; failed configs keep a row with empty metrics.

    ``results`` holds (report, config_id, error) triples where exactly one
    of report / error is meaningful.
    """
    succeeded = [r for r in results if r[0] is not None]
    failed = [r for r in results if r[0] is None]
    succeeded.sort(key=lambda r: (-r[0].aggregates["f1"][0], r[0].config_id))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUITE_COLUMNS)
    for report, _, _ in succeeded:
        row = [report.config_id, report.representation, report.method,
               str(report.num_topics), "ok"]
        for name in METRIC_NAMES:
            mean, variance = report.aggregates[name]
            row.extend([_fmt(mean), _fmt(variance)])
        writer.writerow(row)
    for _, config_id, error in sorted(failed, key=lambda r: r[1]):
        writer.writerow([config_id, "", "", "", f"failed: {error}"] + [""] * 10)
    return buffer.getvalue()
