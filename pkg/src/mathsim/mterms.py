"""Formula trees and their weighted string encodings.

A presentation-markup formula is parsed into a small immutable tree of
``MathNode`` values. The tree is serialized to a compact parenthesized
string (one capital letter per node kind), normalized so that the order of
commutatively joined operands does not matter, decomposed into subformulae,
and generalized by unifying identifiers and numbers. Every derived string
carries a weight in (0, 1] that shrinks with its derivation distance from
the source formula, so that downstream consumers can turn the weight into a
repetition count or a rank filter.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from xml.etree import ElementTree

log = logging.getLogger(__name__)

# node kinds
ROW = "row"
IDENTIFIER = "identifier"
OPERATOR = "operator"
NUMBER = "number"
SUP = "sup"
SUB = "sub"
SUBSUP = "subsup"
FRAC = "frac"
SQRT = "sqrt"
ROOT = "root"
FENCED = "fenced"
TEXT = "text"
OTHER = "other"

LEAF_KINDS = frozenset({IDENTIFIER, OPERATOR, NUMBER, TEXT})

# Serialization letters. Leaves wrap their value, interior nodes wrap the
# concatenated encodings of their children.
_KIND_LETTER = {
    ROW: "R",
    IDENTIFIER: "I",
    OPERATOR: "O",
    NUMBER: "N",
    SUP: "J",
    SUB: "U",
    SUBSUP: "V",
    FRAC: "F",
    SQRT: "Q",
    ROOT: "W",
    FENCED: "P",
    TEXT: "T",
    OTHER: "X",
}
_LETTER_KIND = {letter: kind for kind, letter in _KIND_LETTER.items()}

# (min, max) child counts; max None means unbounded
_ARITY = {
    ROW: (1, None),
    SUP: (2, 2),
    SUB: (2, 2),
    SUBSUP: (3, 3),
    FRAC: (2, 2),
    SQRT: (1, 1),
    ROOT: (2, 2),
    FENCED: (1, None),
    OTHER: (0, None),
}

# Operators whose operands may be reordered without changing meaning.
# U+2062 is the invisible-times character emitted by MathML generators.
COMMUTATIVE_OPERATORS = frozenset({"+", "*", "=", "⁢"})

# Replacement values used by generalization.
UNIFIED_IDENTIFIER = "id"
UNIFIED_CONSTANT = "const"

# origins of weighted MTerms
ORIGIN_TOP = "top"
ORIGIN_SUBFORMULA = "subformula"
ORIGIN_VAR = "var-generalized"
ORIGIN_VARCONST = "var-const-generalized"


class InvalidTreeError(ValueError):
    """Raised when a MathNode tree violates a structural constraint."""


class MathMLError(ValueError):
    """Raised when presentation markup cannot be converted into a tree."""


@dataclass(frozen=True)
class MathNode:
    """One node of a formula tree.

    Leaves (identifier, operator, number, text) carry a nonempty ``value``
    and no children; interior nodes carry children and an empty ``value``.
    The single exception is ``other``, which keeps the unrecognized source
    tag in ``value`` for diagnostics although it is an interior kind.
    """

    kind: str
    value: str = ""
    children: tuple["MathNode", ...] = ()


def identifier(value: str) -> MathNode:
    return MathNode(IDENTIFIER, value)


def operator(value: str) -> MathNode:
    return MathNode(OPERATOR, value)


def number(value: str) -> MathNode:
    return MathNode(NUMBER, value)


def row(*children: MathNode) -> MathNode:
    return MathNode(ROW, children=tuple(children))


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace("(", "\\(").replace(")", "\\)")


def encode_mterm(tree: MathNode) -> str:
    """Serialize a tree to its parenthesized one-letter-per-kind string.

    The encoding is injective up to the ``other`` tag name: leaf values are
    escaped so that parentheses and backslashes cannot be confused with the
    structure, and ``parse_mterm`` inverts the result.
    """
    letter = _KIND_LETTER.get(tree.kind)
    if letter is None:
        raise InvalidTreeError(f"unknown node kind {tree.kind!r} in {tree!r}")
    if tree.kind in LEAF_KINDS:
        if tree.children:
            raise InvalidTreeError(f"leaf node must not have children: {tree!r}")
        if not tree.value:
            raise InvalidTreeError(f"leaf node must carry a nonempty value: {tree!r}")
        return f"{letter}({_escape(tree.value)})"
    if tree.value and tree.kind != OTHER:
        raise InvalidTreeError(f"interior node must not carry a value: {tree!r}")
    lo, hi = _ARITY[tree.kind]
    if len(tree.children) < lo or (hi is not None and len(tree.children) > hi):
        raise InvalidTreeError(
            f"{tree.kind} node expects {lo}"
            + (f"..{hi}" if hi is not None else "+")
            + f" children, got {len(tree.children)}: {tree!r}"
        )
    return letter + "(" + "".join(encode_mterm(c) for c in tree.children) + ")"


def parse_mterm(text: str) -> MathNode:
    """Parse a string produced by :func:`encode_mterm` back into a tree.

    ``other`` nodes come back with an empty tag since the encoding does not
    record it.
    """
    node, pos = _parse_node(text, 0)
    if pos != len(text):
        raise ValueError(f"trailing characters at offset {pos} in {text!r}")
    return node


def _parse_node(text: str, pos: int) -> tuple[MathNode, int]:
    if pos >= len(text):
        raise ValueError("unexpected end of input")
    kind = _LETTER_KIND.get(text[pos])
    if kind is None:
        raise ValueError(f"unknown kind letter {text[pos]!r} at offset {pos}")
    pos += 1
    if pos >= len(text) or text[pos] != "(":
        raise ValueError(f"expected '(' at offset {pos}")
    pos += 1
    if kind in LEAF_KINDS:
        chars: list[str] = []
        while pos < len(text) and text[pos] != ")":
            ch = text[pos]
            if ch == "\\":
                if pos + 1 >= len(text):
                    raise ValueError("dangling escape at end of input")
                chars.append(text[pos + 1])
                pos += 2
            else:
                chars.append(ch)
                pos += 1
        if pos >= len(text):
            raise ValueError("unterminated leaf value")
        return MathNode(kind, "".join(chars)), pos + 1
    children: list[MathNode] = []
    while pos < len(text) and text[pos] != ")":
        child, pos = _parse_node(text, pos)
        children.append(child)
    if pos >= len(text):
        raise ValueError("unterminated child list")
    return MathNode(kind, children=tuple(children)), pos + 1


def _split_runs(
    children: tuple[MathNode, ...],
) -> tuple[list[list[MathNode]], list[MathNode]]:
    """Split row children into operand runs at commutative operators."""
    runs: list[list[MathNode]] = [[]]
    separators: list[MathNode] = []
    for child in children:
        if child.kind == OPERATOR and child.value in COMMUTATIVE_OPERATORS:
            separators.append(child)
            runs.append([])
        else:
            runs[-1].append(child)
    return runs, separators


def _run_sort_key(run: list[MathNode]) -> tuple[int, str]:
    # identifiers before numbers before anything composite
    if len(run) == 1:
        if run[0].kind == IDENTIFIER:
            rank = 0
        elif run[0].kind == NUMBER:
            rank = 1
        else:
            rank = 2
    else:
        rank = 2
    return rank, "".join(encode_mterm(node) for node in run)


def canonical_order(tree: MathNode) -> MathNode:
    """Sort commutatively joined operands into a canonical order.

    Within every row the maximal operand runs separated by commutative
    operators are sorted by (kind rank, encoded string); runs themselves,
    and rows without commutative separators, keep their internal order. The
    transform is idempotent, and any permutation of the operand runs of a
    row maps to the same result.
    """
    if not tree.children:
        return tree
    children = tuple(canonical_order(child) for child in tree.children)
    if tree.kind == ROW:
        runs, separators = _split_runs(children)
        # A leading or trailing commutative operator (for example a unary
        # plus) produces an empty run; such rows are left untouched.
        if separators and all(runs):
            ordered: list[MathNode] = []
            for i, run in enumerate(sorted(runs, key=_run_sort_key)):
                ordered.extend(run)
                if i < len(separators):
                    ordered.append(separators[i])
            children = tuple(ordered)
    return MathNode(tree.kind, tree.value, children)


def derive_subformulae(
    tree: MathNode, include_operand_runs: bool = True
) -> list[tuple[MathNode, int]]:
    """Enumerate the subformulae of a tree with their derivation depths.

    Every subtree rooted at a non-operator node is a subformula, and with
    ``include_operand_runs`` each multi-node operand run of a row is one as
    well (wrapped in a fresh row). The top formula has depth 0 and every
    extraction step adds 1. Duplicate serialized forms are kept once at
    their minimal depth. The result is sorted by (depth, encoded string).
    """
    found: dict[str, tuple[MathNode, int]] = {}

    def record(node: MathNode, depth: int) -> None:
        key = encode_mterm(node)
        prev = found.get(key)
        if prev is None or depth < prev[1]:
            found[key] = (node, depth)

    def visit(node: MathNode, depth: int) -> None:
        record(node, depth)
        for child in node.children:
            if child.kind != OPERATOR:
                visit(child, depth + 1)
        if node.kind == ROW and include_operand_runs:
            runs, separators = _split_runs(node.children)
            if separators and all(runs):
                for run in runs:
                    # single-node runs equal the child subtree recorded above
                    if len(run) >= 2:
                        record(MathNode(ROW, children=tuple(run)), depth + 1)

    visit(tree, 0)
    return sorted(found.values(), key=lambda entry: (entry[1], encode_mterm(entry[0])))


def _map_leaves(tree: MathNode, transform) -> MathNode:
    if not tree.children:
        return transform(tree)
    return MathNode(
        tree.kind, tree.value, tuple(_map_leaves(c, transform) for c in tree.children)
    )


def generalize(tree: MathNode) -> tuple[MathNode, MathNode]:
    """Return the variable-unified and variable-and-constant-unified trees.

    The first form replaces every identifier value with ``id``; the second
    additionally replaces every number value with ``const``. Trees without
    identifiers (or numbers) come back unchanged for that stage.
    """
    var = _map_leaves(
        tree,
        lambda n: MathNode(IDENTIFIER, UNIFIED_IDENTIFIER) if n.kind == IDENTIFIER else n,
    )
    var_const = _map_leaves(
        var,
        lambda n: MathNode(NUMBER, UNIFIED_CONSTANT) if n.kind == NUMBER else n,
    )
    return var, var_const


@dataclass(frozen=True)
class WeightScheme:
    """Multiplicative weight coefficients, each strictly inside (0, 1).

    ``level_coeff`` discounts one extraction step, ``var_coeff`` discounts
    identifier unification, and ``const_coeff`` further discounts number
    unification.
    """

    level_coeff: float = 0.5
    var_coeff: float = 0.8
    const_coeff: float = 0.8

    def __post_init__(self) -> None:
        for name in ("level_coeff", "var_coeff", "const_coeff"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie strictly between 0 and 1, got {value}")


@dataclass(frozen=True)
class WeightedMTerm:
    """A serialized formula form together with its derivation weight."""

    mterm: str
    mias_weight: float
    origin: str
    depth: int


def assign_weights(
    subformulae: list[tuple[MathNode, int]], scheme: WeightScheme | None = None
) -> list[WeightedMTerm]:
    """Weight the subformula set of one formula and add generalized forms.

    The top formula receives ``2 ** -D`` where ``D`` is the maximal depth in
    the set; each extraction level multiplies by ``level_coeff``; the two
    generalization stages multiply by ``var_coeff`` and ``const_coeff``.
    Entries whose serialized form and origin coincide are merged, keeping
    the highest weight (and smallest depth on ties), so repeated leaves are
    not double counted. The result is sorted by descending weight with ties
    broken by the mterm string.
    """
    if not subformulae:
        raise ValueError("cannot assign weights to an empty subformula set")
    scheme = scheme or WeightScheme()
    max_depth = max(depth for _, depth in subformulae)
    top_weight = 2.0 ** -max_depth

    best: dict[tuple[str, str], WeightedMTerm] = {}

    def put(mterm: str, weight: float, origin: str, depth: int) -> None:
        key = (mterm, origin)
        cur = best.get(key)
        if cur is None or weight > cur.mias_weight or (
            weight == cur.mias_weight and depth < cur.depth
        ):
            best[key] = WeightedMTerm(mterm, weight, origin, depth)

    for node, depth in subformulae:
        weight = top_weight * scheme.level_coeff ** depth
        origin = ORIGIN_TOP if depth == 0 else ORIGIN_SUBFORMULA
        put(encode_mterm(node), weight, origin, depth)
        var, var_const = generalize(node)
        put(encode_mterm(var), weight * scheme.var_coeff, ORIGIN_VAR, depth + 1)
        put(
            encode_mterm(var_const),
            weight * scheme.var_coeff * scheme.const_coeff,
            ORIGIN_VARCONST,
            depth + 2,
        )
    return sorted(best.values(), key=lambda e: (-e.mias_weight, e.mterm, e.origin))


def formula_to_weighted_mterms(
    formula,
    scheme: WeightScheme | None = None,
    include_operand_runs: bool = True,
) -> list[WeightedMTerm]:
    """Run the full pipeline for one formula: order, derive, weight.

    Accepts either a bare :class:`MathNode` or any object with a ``tree``
    attribute (such as an ingested formula). A formula without a parse tree
    yields an empty list with a warning.
    """
    tree = formula if isinstance(formula, MathNode) else getattr(formula, "tree", None)
    if tree is None:
        log.warning("formula has no parse tree; deriving no weighted terms")
        return []
    ordered = canonical_order(tree)
    return assign_weights(derive_subformulae(ordered, include_operand_runs), scheme)


def dump_weighted_mterms(entries: list[WeightedMTerm]) -> str:
    """Render entries one per line as ``weight<TAB>mterm`` for golden files."""
    return "".join(f"{entry.mias_weight!r}\t{entry.mterm}\n" for entry in entries)


# -- presentation markup conversion -----------------------------------------

_TRANSPARENT_TAGS = frozenset({"math", "semantics"})
_SKIPPED_TAGS = frozenset({"annotation", "annotation-xml"})
_GROUP_TAGS = frozenset({"mrow", "mstyle", "mpadded", "mphantom"})
_LEAF_TAGS = {"mi": IDENTIFIER, "mo": OPERATOR, "mn": NUMBER, "mtext": TEXT}
_FIXED_ARITY_TAGS = {"msup": SUP, "msub": SUB, "msubsup": SUBSUP, "mfrac": FRAC, "mroot": ROOT}


def _localname(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def mathml_to_node(element) -> MathNode | None:
    """Convert a presentation-markup element tree into a :class:`MathNode`.

    Accepts a parsed element or a markup string. ``math`` and ``semantics``
    wrappers are unwrapped (annotations are skipped), grouping elements
    become rows, the standard token and layout elements map onto their node
    kinds, and unrecognized elements with children become ``other`` nodes.
    Empty elements are pruned; returns ``None`` when nothing remains. Raises
    :class:`MathMLError` on layout elements with the wrong number of
    surviving children.
    """
    if isinstance(element, str):
        element = ElementTree.fromstring(element)
    tag = _localname(element.tag)
    if tag in _SKIPPED_TAGS:
        return None
    if tag in _TRANSPARENT_TAGS:
        nodes = _convert_children(element)
        if not nodes:
            return None
        if len(nodes) == 1:
            return nodes[0]
        return MathNode(ROW, children=tuple(nodes))
    if tag in _LEAF_TAGS:
        value = (element.text or "").strip()
        return MathNode(_LEAF_TAGS[tag], value) if value else None
    if tag in _GROUP_TAGS:
        nodes = _convert_children(element)
        if not nodes:
            return None
        return MathNode(ROW, children=tuple(nodes))
    if tag in _FIXED_ARITY_TAGS:
        kind = _FIXED_ARITY_TAGS[tag]
        nodes = _convert_children(element)
        lo, hi = _ARITY[kind]
        if len(nodes) != lo:
            raise MathMLError(f"<{tag}> expects {lo} children, got {len(nodes)}")
        return MathNode(kind, children=tuple(nodes))
    if tag == "msqrt":
        nodes = _convert_children(element)
        if not nodes:
            return None
        child = nodes[0] if len(nodes) == 1 else MathNode(ROW, children=tuple(nodes))
        return MathNode(SQRT, children=(child,))
    if tag == "mfenced":
        nodes = _convert_children(element)
        if not nodes:
            return None
        return MathNode(FENCED, children=tuple(nodes))
    # unknown element: keep converted children under an opaque node, or fall
    # back to its text
    nodes = _convert_children(element)
    if nodes:
        return MathNode(OTHER, tag, tuple(nodes))
    value = (element.text or "").strip()
    return MathNode(TEXT, value) if value else None


def _convert_children(element) -> list[MathNode]:
    nodes = []
    for child in element:
        converted = mathml_to_node(child)
        if converted is not None:
            nodes.append(converted)
    return nodes
