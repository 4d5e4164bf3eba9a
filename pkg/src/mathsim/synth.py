"""Deterministic synthetic corpora of XHTML documents with MathML formulae.

Each category owns a word vocabulary and formula symbol pools whose overlap
with the other categories is configurable, so the strength of the text and
math similarity signals can be dialed independently. A fixed seed
reproduces the corpus byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from random import Random
from xml.sax.saxutils import escape

_IDENTIFIERS_PER_CATEGORY = 24
_OPERATORS_PER_CATEGORY = 6
_NUMBERS_PER_CATEGORY = 40

# enough distinct operator glyphs to give every category its own slice
_OPERATOR_GLYPHS = [
    "+", "-", "*", "=", "<", ">", "±", "×", "÷", "∘",
    "⊕", "⊖", "⊗", "⊘", "⊙", "∧", "∨",
    "∪", "∩", "≤", "≥", "≺", "≻", "∼",
    "≃", "≈", "≡", "⊂", "⊃", "⊏", "⊐",
    "⋄", "⋆", "⋈", "⊥", "⊤",
]


@dataclass(frozen=True)
class SynthSpec:
    """Shape and overlap parameters of a generated corpus."""

    num_categories: int = 4
    docs_per_category: int = 50
    vocab_size_per_category: int = 300
    vocab_overlap: float = 0.0
    words_per_doc: int = 100
    formulae_per_doc: int = 3
    formula_notation_overlap: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_categories < 1 or self.num_categories > 80:
            raise ValueError("num_categories must lie in 1..80")
        if min(self.docs_per_category, self.vocab_size_per_category, self.words_per_doc) < 1:
            raise ValueError("corpus dimensions must be positive")
        if self.formulae_per_doc < 0:
            raise ValueError("formulae_per_doc must be nonnegative")
        for name in ("vocab_overlap", "formula_notation_overlap"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def _overlapping_pool(shared: list[str], unique: list[str], overlap: float, size: int) -> list[str]:
    """The first round(overlap * size) entries come from the shared pool
    (the same prefix for every category), the rest are category-unique."""
    n_shared = round(overlap * size)
    return shared[:n_shared] + unique[: size - n_shared]


def _category_vocab(spec: SynthSpec, category: int) -> list[str]:
    size = spec.vocab_size_per_category
    shared = [f"base{i:04d}" for i in range(size)]
    unique = [f"c{category:02d}w{i:04d}" for i in range(size)]
    return _overlapping_pool(shared, unique, spec.vocab_overlap, size)


def _category_symbols(spec: SynthSpec, category: int) -> tuple[list[str], list[str], list[str]]:
    overlap = spec.formula_notation_overlap
    identifiers = _overlapping_pool(
        [f"s{i}" for i in range(_IDENTIFIERS_PER_CATEGORY)],
        [f"c{category:02d}x{i}" for i in range(_IDENTIFIERS_PER_CATEGORY)],
        overlap,
        _IDENTIFIERS_PER_CATEGORY,
    )
    # glyphs split into one shared slice plus five distinct unique slices;
    # categories beyond five reuse slices (identifiers stay unique anyway)
    offset = _OPERATORS_PER_CATEGORY * (1 + category % 5)
    unique_ops = _OPERATOR_GLYPHS[offset:offset + _OPERATORS_PER_CATEGORY]
    operators = _overlapping_pool(
        _OPERATOR_GLYPHS[:_OPERATORS_PER_CATEGORY], unique_ops, overlap, _OPERATORS_PER_CATEGORY
    )
    numbers = _overlapping_pool(
        [str(i) for i in range(_NUMBERS_PER_CATEGORY)],
        [str(100 * (category + 1) + i) for i in range(_NUMBERS_PER_CATEGORY)],
        overlap,
        _NUMBERS_PER_CATEGORY,
    )
    return identifiers, operators, numbers


def _mi(value: str) -> str:
    return f"<mi>{escape(value)}</mi>"


def _mo(value: str) -> str:
    return f"<mo>{escape(value)}</mo>"


def _mn(value: str) -> str:
    return f"<mn>{escape(value)}</mn>"


def _atom(rng: Random, identifiers: list[str], numbers: list[str]) -> tuple[str, str]:
    if rng.random() < 0.7:
        value = rng.choice(identifiers)
        return _mi(value), value
    value = rng.choice(numbers)
    return _mn(value), value


def _make_formula(
    rng: Random, identifiers: list[str], operators: list[str], numbers: list[str]
) -> str:
    """One MathML formula (with TeX annotation) from a small template set.

    Templates cover flat sums, powers with compound exponents, fractions,
    square roots, and subscripts; nesting stays at most three levels deep.
    """
    op = rng.choice(operators)
    a_ml, a_tex = _atom(rng, identifiers, numbers)
    b_ml, b_tex = _atom(rng, identifiers, numbers)
    template = rng.randrange(6)
    if template == 0:
        content = f"<mrow>{a_ml}{_mo(op)}{b_ml}</mrow>"
        tex = f"{a_tex} {op} {b_tex}"
    elif template == 1:
        op2 = rng.choice(operators)
        c_ml, c_tex = _atom(rng, identifiers, numbers)
        d_ml, d_tex = _atom(rng, identifiers, numbers)
        content = (
            f"<mrow>{a_ml}{_mo(op)}"
            f"<msup>{b_ml}<mrow>{c_ml}{_mo(op2)}{d_ml}</mrow></msup></mrow>"
        )
        tex = f"{a_tex} {op} {b_tex}^{{{c_tex} {op2} {d_tex}}}"
    elif template == 2:
        c_ml, c_tex = _atom(rng, identifiers, numbers)
        content = f"<mfrac><mrow>{a_ml}{_mo(op)}{b_ml}</mrow>{c_ml}</mfrac>"
        tex = f"\\frac{{{a_tex} {op} {b_tex}}}{{{c_tex}}}"
    elif template == 3:
        content = f"<msqrt><mrow>{a_ml}{_mo(op)}{b_ml}</mrow></msqrt>"
        tex = f"\\sqrt{{{a_tex} {op} {b_tex}}}"
    elif template == 4:
        c_ml, c_tex = _atom(rng, identifiers, numbers)
        content = f"<mrow><msub>{a_ml}{c_ml}</msub>{_mo(op)}{b_ml}</mrow>"
        tex = f"{a_tex}_{{{c_tex}}} {op} {b_tex}"
    else:
        op2 = rng.choice(operators)
        c_ml, c_tex = _atom(rng, identifiers, numbers)
        content = f"<mrow>{a_ml}{_mo(op)}{b_ml}{_mo(op2)}{c_ml}</mrow>"
        tex = f"{a_tex} {op} {b_tex} {op2} {c_tex}"
    return (
        '<math xmlns="http://www.w3.org/1998/Math/MathML"><semantics>'
        f"{content}"
        f'<annotation encoding="application/x-tex">{escape(tex)}</annotation>'
        "</semantics></math>"
    )


def generate(spec: SynthSpec, out_dir: str | Path) -> dict[str, Path]:
    """Write the corpus into ``out_dir``: one ``<id>.xhtml`` per document
    plus ``metadata.tsv`` and ``msc-spec.tsv``. Returns the sidecar paths.

    Every document carries exactly one synthetic MSC code whose first two
    characters identify its category, so the whole corpus survives
    reference-class filtering.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = Random(spec.seed)
    metadata_lines: list[str] = []
    msc_lines: dict[str, str] = {}

    for category in range(spec.num_categories):
        vocab = _category_vocab(spec, category)
        identifiers, operators, numbers = _category_symbols(spec, category)
        prefix = f"{11 + category:02d}"
        for doc_index in range(spec.docs_per_category):
            doc_id = f"d{category:02d}{doc_index:04d}"
            code = f"{prefix}A{doc_index % 100:02d}"
            msc_lines.setdefault(code, f"Synthetic benchmark area {code}")
            title = f"{rng.choice(vocab)} {rng.choice(vocab)} {doc_id}"
            words = [rng.choice(vocab) for _ in range(spec.words_per_doc)]
            formulae = [
                _make_formula(rng, identifiers, operators, numbers)
                for _ in range(spec.formulae_per_doc)
            ]
            body = _interleave(words, formulae)
            document = (
                '<?xml version="1.0" encoding="UTF-8"?>\n'
                '<html xmlns="http://www.w3.org/1999/xhtml">\n'
                f"<head><title>{escape(title)}</title></head>\n"
                "<body>\n"
                f"<h1>{escape(title)}</h1>\n"
                f"<p>{body}</p>\n"
                "</body>\n"
                "</html>\n"
            )
            (out_dir / f"{doc_id}.xhtml").write_text(document, encoding="utf-8")
            metadata_lines.append(f"{doc_id}\t{code}\t{title}")

    metadata_path = out_dir / "metadata.tsv"
    metadata_path.write_text("\n".join(metadata_lines) + "\n", encoding="utf-8")
    msc_path = out_dir / "msc-spec.tsv"
    msc_path.write_text(
        "".join(f"{code}\t{msc_lines[code]}\n" for code in sorted(msc_lines)),
        encoding="utf-8",
    )
    return {"corpus": out_dir, "metadata": metadata_path, "msc_spec": msc_path}


def _interleave(words: list[str], formulae: list[str]) -> str:
    """Spread the formulae evenly between word runs."""
    if not formulae:
        return escape(" ".join(words))
    chunk = max(1, len(words) // (len(formulae) + 1))
    parts: list[str] = []
    cursor = 0
    for formula in formulae:
        parts.append(escape(" ".join(words[cursor:cursor + chunk])))
        parts.append(formula)
        cursor += chunk
    parts.append(escape(" ".join(words[cursor:])))
    return " ".join(part for part in parts if part)
