"""Flat bag-of-words construction from text, TeX, and weighted math tokens.

Text tokens are lowercased maximal runs of letters and digits. Math tokens
(verbatim TeX strings and serialized MTerms) live in their own namespace:
they are shortened to an MD4 digest when longer than 32 characters and then
wrapped in dollar signs, which no text token can contain. MTerm weights are
either turned into integer repetition counts or used to rank entries into
top/high/mid/low selections.
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass

from .md4 import md4_hex
from .mterms import ORIGIN_TOP, WeightedMTerm, WeightScheme, formula_to_weighted_mterms

log = logging.getLogger(__name__)

# math tokens strictly longer than this are replaced by their MD4 digest
MATH_TOKEN_HASH_THRESHOLD = 32

DEFAULT_MTMOD_SCALE = 390.0

STRATEGY_NONE = "none"
STRATEGY_ALL_WEIGHTED = "all-weighted"
STRATEGY_TOP = "top"
STRATEGY_HIGH = "high"
STRATEGY_MID = "mid"
STRATEGY_LOW = "low"
MTERM_STRATEGIES = (
    STRATEGY_NONE,
    STRATEGY_ALL_WEIGHTED,
    STRATEGY_TOP,
    STRATEGY_HIGH,
    STRATEGY_MID,
    STRATEGY_LOW,
)

THIRDS_PER_FORMULA = "formula"
THIRDS_CORPUS_WIDE = "corpus"

# word characters minus the underscore: unicode letters and digits
_TOKEN_RE = re.compile(r"[^\W_]+")

_DEFAULT_STOPWORDS = frozenset(
    "a an and are as at be by for from has have in is it of on or that the to was were with".split()
)

# ordered longest-first; intentionally naive
_STEM_SUFFIXES = ("ing", "ed", "es", "s")


def _stem(token: str) -> str:
    for suffix in _STEM_SUFFIXES:
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def tokenize_text(
    text: str,
    remove_stopwords: bool = False,
    apply_stemming: bool = False,
    stopwords: frozenset[str] | None = None,
) -> list[str]:
    """Lowercase and split text into maximal letter/digit runs, in order.

    No sentence segmentation is performed. Stopword removal and stemming
    are off by default.
    """
    tokens = [match.group(0).lower() for match in _TOKEN_RE.finditer(text)]
    if remove_stopwords:
        blocked = stopwords if stopwords is not None else _DEFAULT_STOPWORDS
        tokens = [t for t in tokens if t not in blocked]
    if apply_stemming:
        tokens = [_stem(t) for t in tokens]
    return tokens


def hash_long_math_token(token: str) -> str:
    """Replace a math token by its MD4 hex digest when longer than 32 chars.

    Applied before dollar wrapping; a 32-character token is kept verbatim,
    and digests themselves (exactly 32 hex characters) are fixed points.
    """
    if len(token) > MATH_TOKEN_HASH_THRESHOLD:
        return md4_hex(token.encode("utf-8"))
    return token


def wrap_math_token(token: str) -> str:
    """Wrap a math token in dollar signs, separating it from text tokens."""
    if not token:
        raise ValueError("cannot wrap an empty math token")
    return f"${token}$"


def mterm_repeat_count(weight: float, scale: float = DEFAULT_MTMOD_SCALE) -> int:
    """Turn an MTerm weight into an integer repetition count.

    The weight is scaled and truncated toward zero; weights too small to
    reach 1 yield 0 and the caller drops the token.
    """
    if not 0.0 < weight <= 1.0:
        raise ValueError(f"weight must lie in (0, 1], got {weight}")
    return math.ceil(round(math.trunc(scale * weight)))


def _descending(entries: list[WeightedMTerm]) -> list[WeightedMTerm]:
    return sorted(entries, key=lambda e: (-e.mias_weight, e.mterm, e.origin))


def corpus_third_cutpoints(
    documents,
    scheme: WeightScheme | None = None,
    include_operand_runs: bool = True,
) -> tuple[tuple[float, str], tuple[float, str]] | None:
    """Rank every weighted MTerm across a corpus and return the third
    boundaries as (-weight, mterm) sort keys, for corpus-wide high/mid/low
    selection. Returns None when the corpus carries no formulae."""
    keys: list[tuple[float, str]] = []
    for doc in documents:
        for formula in doc.formulae:
            for entry in formula_to_weighted_mterms(formula, scheme, include_operand_runs):
                keys.append((-entry.mias_weight, entry.mterm))
    if not keys:
        return None
    keys.sort()
    n = len(keys)
    return keys[math.ceil(n / 3) - 1], keys[math.ceil(2 * n / 3) - 1]


def select_mterms(
    entries: list[WeightedMTerm],
    strategy: str,
    scale: float = DEFAULT_MTMOD_SCALE,
    cutpoints: tuple[tuple[float, str], tuple[float, str]] | None = None,
) -> list[tuple[str, int]]:
    """Choose which MTerms of one formula enter the bag, with multiplicity.

    ``all-weighted`` emits every entry with its repeat count (zero-count
    entries are dropped); ``top`` emits only the source formula once;
    ``high``/``mid``/``low`` emit one third of the weight-ranked entries
    exactly once each, splitting at ranks ceil(n/3) and ceil(2n/3). When
    ``cutpoints`` is given the thirds are resolved against those corpus-wide
    boundaries instead of the formula's own ranks.
    """
    if strategy not in MTERM_STRATEGIES:
        raise ValueError(f"unknown MTerm strategy {strategy!r}")
    if strategy == STRATEGY_NONE or not entries:
        return []
    ranked = _descending(entries)
    if strategy == STRATEGY_ALL_WEIGHTED:
        selected = []
        for entry in ranked:
            count = mterm_repeat_count(entry.mias_weight, scale)
            if count > 0:
                selected.append((entry.mterm, count))
        return selected
    if strategy == STRATEGY_TOP:
        return [(e.mterm, 1) for e in ranked if e.origin == ORIGIN_TOP]
    if cutpoints is not None:
        high_key, mid_key = cutpoints
        if strategy == STRATEGY_HIGH:
            chosen = [e for e in ranked if (-e.mias_weight, e.mterm) <= high_key]
        elif strategy == STRATEGY_MID:
            chosen = [
                e for e in ranked if high_key < (-e.mias_weight, e.mterm) <= mid_key
            ]
        else:
            chosen = [e for e in ranked if (-e.mias_weight, e.mterm) > mid_key]
        return [(e.mterm, 1) for e in chosen]
    n = len(ranked)
    high_end = math.ceil(n / 3)
    mid_end = math.ceil(2 * n / 3)
    if strategy == STRATEGY_HIGH:
        chosen = ranked[:high_end]
    elif strategy == STRATEGY_MID:
        chosen = ranked[high_end:mid_end]
    else:
        chosen = ranked[mid_end:]
    return [(e.mterm, 1) for e in chosen]


@dataclass(frozen=True)
class RepresentationConfig:
    """Which token streams a document representation is built from."""

    use_text: bool = True
    use_tex: bool = False
    mterm_strategy: str = STRATEGY_NONE
    mtmod_scale: float = DEFAULT_MTMOD_SCALE
    remove_stopwords: bool = False
    apply_stemming: bool = False
    include_operand_runs: bool = True
    thirds_scope: str = THIRDS_PER_FORMULA

    def __post_init__(self) -> None:
        if not (self.use_text or self.use_tex or self.mterm_strategy != STRATEGY_NONE):
            raise ValueError("representation must enable at least one token stream")
        if self.mterm_strategy not in MTERM_STRATEGIES:
            raise ValueError(f"unknown MTerm strategy {self.mterm_strategy!r}")
        if self.thirds_scope not in (THIRDS_PER_FORMULA, THIRDS_CORPUS_WIDE):
            raise ValueError(f"unknown thirds scope {self.thirds_scope!r}")
        if self.mtmod_scale <= 0:
            raise ValueError("mtmod_scale must be positive")

    def label(self) -> str:
        parts = []
        if self.use_text:
            parts.append("text")
        if self.use_tex:
            parts.append("tex")
        if self.mterm_strategy != STRATEGY_NONE:
            parts.append(f"mterms:{self.mterm_strategy}")
        return "+".join(parts)


def build_bow(
    document,
    config: RepresentationConfig,
    scheme: WeightScheme | None = None,
    cutpoints: tuple[tuple[float, str], tuple[float, str]] | None = None,
) -> Counter:
    """Build the count-additive union of the enabled token streams.

    The text stream never looks at formulae and the math streams never look
    at the text, so disabling a stream removes exactly its tokens.
    """
    bow: Counter = Counter()
    if config.use_text:
        # Title and abstract live in the metadata; documents usually repeat
        # the title in the body, which reads as a mild title boost.
        text = " ".join(
            part for part in (document.title, document.abstract, document.body_text) if part
        )
        bow.update(
            tokenize_text(
                text,
                remove_stopwords=config.remove_stopwords,
                apply_stemming=config.apply_stemming,
            )
        )
    if config.use_tex:
        for formula in document.formulae:
            tex = formula.tex.strip()
            if tex:
                bow[wrap_math_token(hash_long_math_token(tex))] += 1
    if config.mterm_strategy != STRATEGY_NONE:
        for formula in document.formulae:
            entries = formula_to_weighted_mterms(
                formula, scheme, config.include_operand_runs
            )
            for mterm, count in select_mterms(
                entries, config.mterm_strategy, config.mtmod_scale, cutpoints
            ):
                bow[wrap_math_token(hash_long_math_token(mterm))] += count
    return bow


def dump_bow(bow: Counter) -> str:
    """Render a bag as ``token<TAB>count`` lines sorted by token."""
    return "".join(f"{token}\t{bow[token]}\n" for token in sorted(bow))
