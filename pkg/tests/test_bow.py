"""Tokenization, token weighting, and bag assembly."""

import math
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from mathsim.bow import (
    DEFAULT_MTMOD_SCALE,
    MATH_TOKEN_HASH_THRESHOLD,
    MTERM_STRATEGIES,
    RepresentationConfig,
    build_bow,
    corpus_third_cutpoints,
    dump_bow,
    hash_long_math_token,
    mterm_repeat_count,
    select_mterms,
    tokenize_text,
    wrap_math_token,
)
from mathsim.ingest import Document, Formula
from mathsim.md4 import md4_hex
from mathsim.mterms import WeightedMTerm, identifier, operator, row

from conftest import mterm_trees


class TestTokenize:
    def test_lowercases_and_splits_punctuation(self):
        assert tokenize_text("Hilbert spaces, Hilbert SPACES.") == [
            "hilbert", "spaces", "hilbert", "spaces",
        ]

    def test_digits_kept_hyphen_splits(self):
        assert tokenize_text("The L2-norm in 2D.") == ["the", "l2", "norm", "in", "2d"]

    def test_underscore_splits(self):
        assert tokenize_text("alpha_beta") == ["alpha", "beta"]

    def test_empty(self):
        assert tokenize_text("") == []
        assert tokenize_text("  ...  ") == []

    def test_unicode_letters_kept(self):
        assert tokenize_text("Schrödinger flow") == ["schrödinger", "flow"]

    def test_stopwords_optional(self):
        assert tokenize_text("the flow of the heat", remove_stopwords=True) == ["flow", "heat"]

    def test_custom_stopwords(self):
        got = tokenize_text("heat flow", remove_stopwords=True, stopwords={"heat"})
        assert got == ["flow"]

    def test_stemming_optional(self):
        got = tokenize_text("operators operating operated", apply_stemming=True)
        assert got == ["operator", "operat", "operat"]

    def test_stemming_keeps_short_words(self):
        assert tokenize_text("is gas", apply_stemming=True) == ["is", "gas"]


class TestMathTokens:
    def test_short_token_unchanged(self):
        token = "x" * MATH_TOKEN_HASH_THRESHOLD
        assert hash_long_math_token(token) == token

    def test_long_token_hashed(self):
        token = "x" * (MATH_TOKEN_HASH_THRESHOLD + 1)
        assert hash_long_math_token(token) == md4_hex(token.encode("utf-8"))

    def test_hash_applies_before_wrapping(self):
        token = "y" * 40
        assert wrap_math_token(hash_long_math_token(token)) == f"${md4_hex(token.encode())}$"

    def test_wrap(self):
        assert wrap_math_token("I(a)") == "$I(a)$"

    def test_wrap_rejects_empty(self):
        with pytest.raises(ValueError):
            wrap_math_token("")


class TestRepeatCount:
    def test_spec_values(self):
        assert mterm_repeat_count(0.125) == 48
        assert mterm_repeat_count(1.0) == 390
        assert mterm_repeat_count(0.001) == 0

    def test_truncation_not_rounding(self):
        # 0.0999 * 390 = 38.961: the fraction is cut, not rounded up.
        assert mterm_repeat_count(0.0999) == 38

    def test_custom_scale(self):
        assert mterm_repeat_count(0.5, scale=100.0) == 50

    def test_rejects_out_of_range(self):
        for bad in [0.0, -0.5, 1.5]:
            with pytest.raises(ValueError):
                mterm_repeat_count(bad)

    @given(st.floats(min_value=1e-6, max_value=1.0))
    def test_never_negative_and_bounded(self, weight):
        count = mterm_repeat_count(weight)
        assert 0 <= count <= int(DEFAULT_MTMOD_SCALE)


def entry(mterm, weight, origin="subformula", depth=1):
    return WeightedMTerm(mterm, weight, origin, depth)


FOUR = [
    entry("R(I(a))", 1.0, "top", 0),
    entry("I(a)", 0.5),
    entry("I(id)", 0.4, "var-generalized"),
    entry("I(id)", 0.32, "var-const-generalized", 2),
]


class TestSelection:
    def test_none(self):
        assert select_mterms(FOUR, "none") == []

    def test_top_takes_only_top_origin_once(self):
        assert select_mterms(FOUR, "top") == [("R(I(a))", 1)]

    def test_all_weighted_repeats(self):
        got = select_mterms(FOUR, "all-weighted")
        assert got == [("R(I(a))", 390), ("I(a)", 195), ("I(id)", 156), ("I(id)", 124)]

    def test_all_weighted_drops_zero_counts(self):
        entries = [entry("I(a)", 1.0, "top", 0), entry("I(b)", 0.001)]
        assert select_mterms(entries, "all-weighted") == [("I(a)", 390)]

    def test_thirds_partition(self):
        # n=4: high gets ceil(4/3)=2, mid gets ceil(8/3)-2=1, low the rest.
        assert select_mterms(FOUR, "high") == [("R(I(a))", 1), ("I(a)", 1)]
        assert select_mterms(FOUR, "mid") == [("I(id)", 1)]
        assert select_mterms(FOUR, "low") == [("I(id)", 1)]

    def test_thirds_single_entry(self):
        one = [entry("I(a)", 1.0, "top", 0)]
        assert select_mterms(one, "high") == [("I(a)", 1)]
        assert select_mterms(one, "mid") == []
        assert select_mterms(one, "low") == []

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            select_mterms(FOUR, "best")

    @given(
        weights=st.lists(
            st.floats(min_value=0.01, max_value=1.0), min_size=1, max_size=12
        )
    )
    def test_thirds_cover_everything_once(self, weights):
        entries = [entry(f"I(x{i})", w) for i, w in enumerate(weights)]
        high = select_mterms(entries, "high")
        mid = select_mterms(entries, "mid")
        low = select_mterms(entries, "low")
        assert all(c == 1 for _, c in high + mid + low)
        assert len(high) + len(mid) + len(low) == len(entries)
        n = len(entries)
        assert len(high) == math.ceil(n / 3)
        assert len(mid) == math.ceil(2 * n / 3) - math.ceil(n / 3)


def doc_with_formulae(*trees, body="", doc_id="d1"):
    return Document(
        id=doc_id,
        msc_codes=["11A05"],
        body_text=body,
        formulae=[Formula(tex=f"tex{i}", tree=t) for i, t in enumerate(trees)],
    )


class TestBuildBow:
    def test_text_only(self):
        doc = doc_with_formulae(body="Heat flow heat")
        bow = build_bow(doc, RepresentationConfig(use_text=True))
        assert bow == Counter({"heat": 2, "flow": 1})

    def test_title_included(self):
        doc = Document(id="d1", msc_codes=["11A05"], title="Heat kernels", body_text="flow")
        bow = build_bow(doc, RepresentationConfig(use_text=True))
        assert bow == Counter({"heat": 1, "kernels": 1, "flow": 1})

    def test_tex_channel(self):
        doc = doc_with_formulae(identifier("a"), body="words")
        config = RepresentationConfig(use_text=False, use_tex=True)
        assert build_bow(doc, config) == Counter({"$tex0$": 1})

    def test_tex_long_formula_hashed(self):
        tex = "x" * 40
        doc = Document(id="d", msc_codes=["11A05"], formulae=[Formula(tex=tex)])
        config = RepresentationConfig(use_text=False, use_tex=True)
        assert build_bow(doc, config) == Counter({f"${md4_hex(tex.encode())}$": 1})

    def test_mterm_channel_top(self):
        doc = doc_with_formulae(row(identifier("a"), operator("+"), identifier("b")))
        config = RepresentationConfig(use_text=False, mterm_strategy="top")
        assert build_bow(doc, config) == Counter({"$R(I(a)O(+)I(b))$": 1})

    def test_channels_combine(self):
        doc = doc_with_formulae(identifier("a"), body="alpha")
        config = RepresentationConfig(use_text=True, use_tex=True, mterm_strategy="top")
        bow = build_bow(doc, config)
        assert bow["alpha"] == 1 and bow["$tex0$"] == 1 and bow["$I(a)$"] == 1

    def test_formula_without_tree_skipped_by_mterm_channel(self):
        doc = Document(
            id="d", msc_codes=["11A05"], formulae=[Formula(tex="only tex", tree=None)]
        )
        config = RepresentationConfig(use_text=False, mterm_strategy="all-weighted")
        assert build_bow(doc, config) == Counter()

    def test_same_formula_twice_doubles_counts(self):
        tree = row(identifier("a"), operator("+"), identifier("b"))
        one = build_bow(
            doc_with_formulae(tree),
            RepresentationConfig(use_text=False, mterm_strategy="all-weighted"),
        )
        two = build_bow(
            doc_with_formulae(tree, tree),
            RepresentationConfig(use_text=False, mterm_strategy="all-weighted"),
        )
        assert two == Counter({t: 2 * c for t, c in one.items()})

    def test_label(self):
        assert RepresentationConfig(use_text=True).label() == "text"
        assert RepresentationConfig(use_text=True, use_tex=True).label() == "text+tex"
        assert (
            RepresentationConfig(use_text=True, mterm_strategy="top").label()
            == "text+mterms:top"
        )
        assert (
            RepresentationConfig(use_text=False, mterm_strategy="all-weighted").label()
            == "mterms:all-weighted"
        )

    def test_config_validates(self):
        with pytest.raises(ValueError):
            RepresentationConfig(use_text=False)  # empty representation
        with pytest.raises(ValueError):
            RepresentationConfig(mterm_strategy="bogus")
        with pytest.raises(ValueError):
            RepresentationConfig(mtmod_scale=0.0)
        with pytest.raises(ValueError):
            RepresentationConfig(thirds_scope="sideways")

    def test_dump_sorted(self):
        text = dump_bow(Counter({"b": 2, "a": 1}))
        assert text == "a\t1\nb\t2\n"


class TestCorpusThirds:
    def test_cutpoints_change_selection(self):
        heavy = doc_with_formulae(
            row(identifier("a"), operator("+"), identifier("b")), doc_id="d1"
        )
        light = doc_with_formulae(identifier("z"), doc_id="d2")
        cutpoints = corpus_third_cutpoints([heavy, light])
        assert cutpoints is not None
        config = RepresentationConfig(
            use_text=False, mterm_strategy="high", thirds_scope="corpus"
        )
        all_tokens = []
        for doc in (heavy, light):
            all_tokens.extend(build_bow(doc, config, cutpoints=cutpoints))
        # corpus-wide: every token above the first cutpoint, from any
        # document, lands in the high band
        assert all_tokens, "corpus-wide high band should not be empty"

    def test_no_formulae_no_cutpoints(self):
        doc = Document(id="d", msc_codes=["11A05"], body_text="words only")
        assert corpus_third_cutpoints([doc]) is None

    def test_band_sizes_respect_corpus_ranks(self):
        docs = [
            doc_with_formulae(mterm, doc_id=f"d{i}")
            for i, mterm in enumerate(
                [identifier("a"), identifier("b"), identifier("c")]
            )
        ]
        cutpoints = corpus_third_cutpoints(docs)
        config_high = RepresentationConfig(
            use_text=False, mterm_strategy="high", thirds_scope="corpus"
        )
        config_low = RepresentationConfig(
            use_text=False, mterm_strategy="low", thirds_scope="corpus"
        )
        high_total = sum(
            sum(build_bow(d, config_high, cutpoints=cutpoints).values()) for d in docs
        )
        low_total = sum(
            sum(build_bow(d, config_low, cutpoints=cutpoints).values()) for d in docs
        )
        # all three docs produce the same three-entry weight profile, so
        # every band receives the same share from each document
        assert high_total == 3
        assert low_total == 3
