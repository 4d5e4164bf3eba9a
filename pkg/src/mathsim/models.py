"""Vector-space machinery over bags of words.

A dictionary maps tokens to dense indices with document frequencies;
documents become sparse vectors (raw counts or L2-normalized tf-idf); topic
models reduce them to a low-dimensional space, either by truncated SVD or
by variational inference of a latent topic mixture; and a similarity index
turns topic vectors into a clamped pairwise cosine matrix. Training is
deterministic for a fixed seed.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln, psi

log = logging.getLogger(__name__)

LSI = "lsi"
LDA = "lda"

# use exact dense SVD unless both matrix dimensions exceed this
DENSE_SVD_MAX_DIM = 800


@dataclass
class Dictionary:
    """Token to dense-index mapping with per-token document frequencies."""

    token2id: dict[str, int]
    id2token: list[str]
    doc_freq: np.ndarray
    num_docs: int

    def __len__(self) -> int:
        return len(self.id2token)


def build_dictionary(bows: list[Counter]) -> Dictionary:
    """Assign indices 0..V-1 in order of first appearance and count df.

    Tokens are scanned in sorted order within each bag so the mapping does
    not depend on hash order. No frequency filtering is applied.
    """
    if not bows:
        raise ValueError("cannot build a dictionary from an empty corpus")
    token2id: dict[str, int] = {}
    doc_freq: list[int] = []
    for bow in bows:
        for token in sorted(bow):
            idx = token2id.get(token)
            if idx is None:
                token2id[token] = len(doc_freq)
                doc_freq.append(1)
            else:
                doc_freq[idx] += 1
    if not token2id:
        log.warning("all bags are empty; dictionary has no tokens")
    id2token = [""] * len(token2id)
    for token, idx in token2id.items():
        id2token[idx] = token
    return Dictionary(
        token2id=token2id,
        id2token=id2token,
        doc_freq=np.asarray(doc_freq, dtype=np.int64),
        num_docs=len(bows),
    )


@dataclass
class DocVector:
    """Sparse document vector: strictly increasing indices, finite values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.indices.shape != self.values.shape:
            raise ValueError("indices and values must have the same length")
        if len(self.indices) and not (np.diff(self.indices) > 0).all():
            raise ValueError("indices must be strictly increasing")
        if len(self.values) and not np.isfinite(self.values).all():
            raise ValueError("values must be finite")

    def to_dense(self, size: int) -> np.ndarray:
        dense = np.zeros(size)
        dense[self.indices] = self.values
        return dense


def count_vector(bow: Counter, dictionary: Dictionary) -> DocVector:
    """Raw term counts over the dictionary; unseen tokens are skipped."""
    items = sorted(
        (dictionary.token2id[t], float(c)) for t, c in bow.items() if t in dictionary.token2id
    )
    return DocVector(
        indices=np.array([i for i, _ in items], dtype=np.int64),
        values=np.array([v for _, v in items], dtype=np.float64),
    )


def tfidf_transform(bow: Counter, dictionary: Dictionary) -> DocVector:
    """L2-normalized tf-idf weights: ``tf * log2(N / df)``.

    Tokens outside the dictionary are skipped; a token present in every
    training document gets weight zero. A vector with zero norm is kept as
    all zeros.
    """
    n = dictionary.num_docs
    items = sorted(
        (dictionary.token2id[t], float(c)) for t, c in bow.items() if t in dictionary.token2id
    )
    indices = np.array([i for i, _ in items], dtype=np.int64)
    values = np.array(
        [tf * math.log2(n / dictionary.doc_freq[i]) for i, tf in items], dtype=np.float64
    )
    norm = np.linalg.norm(values)
    if norm > 0:
        values = values / norm
    return DocVector(indices=indices, values=values)


@dataclass
class TopicModel:
    """A trained topic space: truncated SVD factors or topic-word weights."""

    kind: str
    num_topics: int
    seed: int
    # truncated SVD factors
    u: np.ndarray | None = None
    s: np.ndarray | None = None
    # variational topic-word parameters and hyperparameters
    topic_word: np.ndarray | None = None
    alpha: float = 0.0
    eta: float = 0.0
    gamma_threshold: float = 0.0
    iterations: int = 0
    bound_history: list[float] = field(default_factory=list)


def _doc_matrix(vectors: list[DocVector], vocab_size: int) -> np.ndarray:
    matrix = np.zeros((vocab_size, len(vectors)))
    for j, vec in enumerate(vectors):
        matrix[vec.indices, j] = vec.values
    return matrix


def _randomized_range_svd(
    matrix: np.ndarray, rank: int, seed: int, oversample: int = 10, power_iters: int = 2
) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    probe = rng.standard_normal((matrix.shape[1], min(rank + oversample, matrix.shape[1])))
    sketch = matrix @ probe
    basis, _ = np.linalg.qr(sketch)
    for _ in range(power_iters):
        basis, _ = np.linalg.qr(matrix.T @ basis)
        basis, _ = np.linalg.qr(matrix @ basis)
    small = basis.T @ matrix
    u_small, s, _ = np.linalg.svd(small, full_matrices=False)
    return (basis @ u_small)[:, :rank], s[:rank]


def lsi_train(
    vectors: list[DocVector], vocab_size: int, num_topics: int, seed: int = 0
) -> TopicModel:
    """Rank-k truncated SVD of the vocab x documents matrix.

    Small problems use exact dense SVD; larger ones a seeded randomized
    range finder with power iterations, so results are reproducible for a
    fixed seed. ``num_topics`` above the matrix rank bound is clamped with
    a warning.
    """
    if not vectors:
        raise ValueError("cannot train on an empty corpus")
    if vocab_size < 1:
        raise ValueError("cannot train with an empty vocabulary")
    if num_topics < 1:
        raise ValueError("num_topics must be at least 1")
    cap = min(vocab_size, len(vectors))
    k = num_topics
    if k > cap:
        log.warning("num_topics %d exceeds matrix bound %d; clamping", k, cap)
        k = cap
    matrix = _doc_matrix(vectors, vocab_size)
    if min(matrix.shape) <= DENSE_SVD_MAX_DIM:
        u, s, _ = np.linalg.svd(matrix, full_matrices=False)
        u, s = u[:, :k], s[:k]
    else:
        u, s = _randomized_range_svd(matrix, k, seed)
    return TopicModel(kind=LSI, num_topics=k, seed=seed, u=u, s=s)


def lsi_project(model: TopicModel, vector: DocVector) -> np.ndarray:
    """Project a document vector into the topic space: ``inv(S) U^T q``.

    Coordinates belonging to (numerically) zero singular values are zero.
    """
    if model.kind != LSI:
        raise ValueError(f"expected an {LSI} model, got {model.kind!r}")
    query = vector.to_dense(model.u.shape[0])
    coords = model.u.T @ query
    cutoff = model.s.max(initial=0.0) * 1e-12
    safe = np.where(model.s > cutoff, model.s, 1.0)
    return np.where(model.s > cutoff, coords / safe, 0.0)


def _dirichlet_expectation(x: np.ndarray) -> np.ndarray:
    if x.ndim == 1:
        return psi(x) - psi(x.sum())
    return psi(x) - psi(x.sum(axis=1))[:, np.newaxis]


def _infer_gamma(
    indices: np.ndarray,
    counts: np.ndarray,
    alpha: float,
    exp_elog_beta: np.ndarray,
    gamma_threshold: float,
    iterations: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-document variational loop; returns gamma and the phi statistics.

    Iterates until the mean absolute change of gamma drops below the
    threshold or the iteration budget runs out.
    """
    num_topics = exp_elog_beta.shape[0]
    total = counts.sum()
    gamma = np.full(num_topics, alpha + total / num_topics)
    exp_elog_theta = np.exp(_dirichlet_expectation(gamma))
    beta_d = exp_elog_beta[:, indices]
    for _ in range(iterations):
        last = gamma
        phi_norm = exp_elog_theta @ beta_d + 1e-100
        gamma = alpha + exp_elog_theta * ((counts / phi_norm) @ beta_d.T)
        exp_elog_theta = np.exp(_dirichlet_expectation(gamma))
        if np.mean(np.abs(gamma - last)) < gamma_threshold:
            break
    phi_norm = exp_elog_theta @ beta_d + 1e-100
    return gamma, np.outer(exp_elog_theta, counts / phi_norm)


def lda_train(
    vectors: list[DocVector],
    vocab_size: int,
    num_topics: int,
    gamma_threshold: float = 1e-3,
    iterations: int = 100,
    passes: int = 10,
    alpha: float | None = None,
    eta: float | None = None,
    seed: int = 0,
) -> TopicModel:
    """Batch variational inference of a latent topic mixture.

    Symmetric priors default to ``1/num_topics``. Each pass runs the
    per-document loop against the current topic-word parameters and then
    updates them in closed form; the variational lower bound is recorded
    after every pass. Training is bit-reproducible for a fixed seed.
    """
    if not vectors:
        raise ValueError("cannot train on an empty corpus")
    if vocab_size < 1:
        raise ValueError("cannot train with an empty vocabulary")
    if num_topics < 1:
        raise ValueError("num_topics must be at least 1")
    alpha = 1.0 / num_topics if alpha is None else float(alpha)
    eta = 1.0 / num_topics if eta is None else float(eta)
    rng = np.random.default_rng(seed)
    lam = rng.gamma(100.0, 0.01, (num_topics, vocab_size))
    gammas = np.zeros((len(vectors), num_topics))
    bounds: list[float] = []
    for _ in range(passes):
        exp_elog_beta = np.exp(_dirichlet_expectation(lam))
        sstats = np.zeros((num_topics, vocab_size))
        for d, vec in enumerate(vectors):
            if len(vec.indices) == 0 or vec.values.sum() == 0:
                gammas[d] = alpha
                continue
            gamma, phi_stats = _infer_gamma(
                vec.indices, vec.values, alpha, exp_elog_beta, gamma_threshold, iterations
            )
            gammas[d] = gamma
            sstats[:, vec.indices] += phi_stats
        lam = eta + sstats * exp_elog_beta
        bounds.append(_variational_bound(vectors, gammas, lam, alpha, eta))
    return TopicModel(
        kind=LDA,
        num_topics=num_topics,
        seed=seed,
        topic_word=lam,
        alpha=alpha,
        eta=eta,
        gamma_threshold=gamma_threshold,
        iterations=iterations,
        bound_history=bounds,
    )


def _variational_bound(
    vectors: list[DocVector],
    gammas: np.ndarray,
    lam: np.ndarray,
    alpha: float,
    eta: float,
) -> float:
    """Evidence lower bound of the corpus under the variational posterior."""
    num_topics, vocab_size = lam.shape
    elog_theta = _dirichlet_expectation(gammas)
    elog_beta = _dirichlet_expectation(lam)
    score = 0.0
    for d, vec in enumerate(vectors):
        if len(vec.indices) == 0:
            continue
        joint = elog_theta[d][:, np.newaxis] + elog_beta[:, vec.indices]
        peak = joint.max(axis=0)
        score += float(vec.values @ (peak + np.log(np.exp(joint - peak).sum(axis=0))))
    # E[log p(theta | alpha)] - E[log q(theta | gamma)]
    score += float(np.sum((alpha - gammas) * elog_theta))
    score += float(np.sum(gammaln(gammas)) - np.sum(gammaln(gammas.sum(axis=1))))
    score += len(vectors) * float(gammaln(num_topics * alpha) - num_topics * gammaln(alpha))
    # E[log p(beta | eta)] - E[log q(beta | lambda)]
    score += float(np.sum((eta - lam) * elog_beta))
    score += float(np.sum(gammaln(lam)) - np.sum(gammaln(lam.sum(axis=1))))
    score += num_topics * float(gammaln(vocab_size * eta) - vocab_size * gammaln(eta))
    return score


def topic_word_distributions(model: TopicModel) -> np.ndarray:
    """Normalized topic-word rows; each row sums to 1."""
    if model.kind != LDA:
        raise ValueError(f"expected an {LDA} model, got {model.kind!r}")
    return model.topic_word / model.topic_word.sum(axis=1, keepdims=True)


def lda_infer(model: TopicModel, vector: DocVector) -> np.ndarray:
    """Infer the normalized topic posterior of one document.

    An empty document gets the uniform distribution with a warning.
    """
    if model.kind != LDA:
        raise ValueError(f"expected an {LDA} model, got {model.kind!r}")
    k = model.num_topics
    if len(vector.indices) == 0 or vector.values.sum() == 0:
        log.warning("empty document vector; topic posterior set to uniform")
        return np.full(k, 1.0 / k)
    exp_elog_beta = np.exp(_dirichlet_expectation(model.topic_word))
    gamma, _ = _infer_gamma(
        vector.indices,
        vector.values,
        model.alpha,
        exp_elog_beta,
        model.gamma_threshold,
        model.iterations,
    )
    return gamma / gamma.sum()


@dataclass
class SimilarityIndex:
    """Unit-normalized topic vectors; zero vectors are kept and flagged."""

    vectors: np.ndarray
    zero_rows: np.ndarray


def build_similarity_index(topic_vectors: list[np.ndarray]) -> SimilarityIndex:
    matrix = np.asarray(topic_vectors, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("topic vectors must share one dimensionality")
    norms = np.linalg.norm(matrix, axis=1)
    zero_rows = norms == 0.0
    if zero_rows.any():
        log.warning("%d zero topic vectors in similarity index", int(zero_rows.sum()))
    unit = matrix.copy()
    unit[~zero_rows] /= norms[~zero_rows, np.newaxis]
    return SimilarityIndex(vectors=unit, zero_rows=zero_rows)


def pairwise_similarity(index: SimilarityIndex) -> np.ndarray:
    """Symmetric matrix of cosine similarities clamped into [0, 1].

    Negative cosines clamp to 0. Diagonal entries are 1 for nonzero
    vectors and 0 for flagged zero vectors.
    """
    matrix = index.vectors @ index.vectors.T
    matrix = (matrix + matrix.T) / 2.0
    np.clip(matrix, 0.0, 1.0, out=matrix)
    matrix[np.diag_indices_from(matrix)] = (~index.zero_rows).astype(np.float64)
    return matrix


# -- persistence -------------------------------------------------------------


def save_similarity_matrix(matrix: np.ndarray, path: str | Path) -> None:
    """Write ``n <N>`` on one text line, then float32 row-major bytes."""
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("similarity matrix must be square")
    with open(path, "wb") as handle:
        handle.write(f"n {matrix.shape[0]}\n".encode("ascii"))
        handle.write(matrix.tobytes(order="C"))


def load_similarity_matrix(path: str | Path) -> np.ndarray:
    with open(path, "rb") as handle:
        header = handle.readline().decode("ascii").strip()
        if not header.startswith("n "):
            raise ValueError(f"{path}: expected 'n <N>' header line")
        n = int(header[2:])
        data = np.frombuffer(handle.read(), dtype="<f4")
    if data.size != n * n:
        raise ValueError(f"{path}: expected {n * n} float32 values, got {data.size}")
    return data.reshape(n, n).astype(np.float64)


def save_model(model: TopicModel, path: str | Path) -> None:
    """Persist a topic model as an npz container (kind, k, seed, matrices)."""
    payload: dict[str, np.ndarray] = {
        "kind": np.array(model.kind),
        "num_topics": np.array(model.num_topics),
        "seed": np.array(model.seed),
    }
    if model.kind == LSI:
        payload["u"] = model.u
        payload["s"] = model.s
    else:
        payload["topic_word"] = model.topic_word
        payload["alpha"] = np.array(model.alpha)
        payload["eta"] = np.array(model.eta)
        payload["gamma_threshold"] = np.array(model.gamma_threshold)
        payload["iterations"] = np.array(model.iterations)
        payload["bound_history"] = np.asarray(model.bound_history, dtype=np.float64)
    np.savez(path, **payload)


def load_model(path: str | Path) -> TopicModel:
    with np.load(path, allow_pickle=False) as data:
        kind = str(data["kind"][()])
        num_topics = int(data["num_topics"][()])
        seed = int(data["seed"][()])
        if kind == LSI:
            return TopicModel(kind=kind, num_topics=num_topics, seed=seed,
                              u=data["u"], s=data["s"])
        if kind == LDA:
            return TopicModel(
                kind=kind,
                num_topics=num_topics,
                seed=seed,
                topic_word=data["topic_word"],
                alpha=float(data["alpha"][()]),
                eta=float(data["eta"][()]),
                gamma_threshold=float(data["gamma_threshold"][()]),
                iterations=int(data["iterations"][()]),
                bound_history=list(data["bound_history"]),
            )
    raise ValueError(f"{path}: unknown model kind {kind!r}")
