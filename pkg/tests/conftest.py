"""Shared fixtures and strategies."""

from __future__ import annotations

import hypothesis.strategies as st

from mathsim import mterms


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One line per acceptance criterion at the end of the run."""
    outcomes: list[tuple[str, str]] = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL")):
        for report in terminalreporter.stats.get(status, ()):
            if getattr(report, "when", None) != "call":
                continue
            name = report.nodeid.rsplit("::", 1)[-1]
            if name.startswith("test_criterion_"):
                outcomes.append((name, label))
    if not outcomes:
        return
    outcomes.sort()
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, label in outcomes:
        parts = name.split("_")
        terminalreporter.write_line(f"criterion {parts[2]} ({' '.join(parts[3:])}): {label}")

# Value alphabets avoid the encoding's escape characters; escaping gets its
# own dedicated tests.
_IDENTIFIER_VALUES = tuple("abcdefgxyz")
_NUMBER_VALUES = ("0", "1", "2", "7", "42", "3.5")
_OPERATOR_VALUES = ("+", "*", "=", "-", "/", "<")
_COMMUTATIVE_VALUES = ("+", "*", "=")


def leaf_nodes() -> st.SearchStrategy[mterms.MathNode]:
    return st.one_of(
        st.builds(mterms.identifier, st.sampled_from(_IDENTIFIER_VALUES)),
        st.builds(mterms.number, st.sampled_from(_NUMBER_VALUES)),
        st.builds(
            lambda v: mterms.MathNode(mterms.TEXT, value=v),
            st.sampled_from(("mod", "iff")),
        ),
    )


@st.composite
def _row_of(draw, children: st.SearchStrategy[mterms.MathNode]) -> mterms.MathNode:
    """A Row of operand runs separated by commutative operators."""
    runs = draw(st.lists(st.lists(children, min_size=1, max_size=2), min_size=1, max_size=3))
    kids: list[mterms.MathNode] = []
    for i, run in enumerate(runs):
        if i:
            kids.append(mterms.operator(draw(st.sampled_from(_COMMUTATIVE_VALUES))))
        kids.extend(run)
    return mterms.row(*kids)


def _interior_of(children: st.SearchStrategy[mterms.MathNode]) -> st.SearchStrategy[mterms.MathNode]:
    pair = st.tuples(children, children)
    return st.one_of(
        _row_of(children),
        pair.map(lambda c: mterms.MathNode(mterms.SUP, children=c)),
        pair.map(lambda c: mterms.MathNode(mterms.SUB, children=c)),
        pair.map(lambda c: mterms.MathNode(mterms.FRAC, children=c)),
        children.map(lambda c: mterms.MathNode(mterms.SQRT, children=(c,))),
        pair.map(lambda c: mterms.MathNode(mterms.ROOT, children=c)),
    )


def mterm_trees(max_leaves: int = 10) -> st.SearchStrategy[mterms.MathNode]:
    """Random well-formed formula trees, small enough to stay shallow."""
    return st.recursive(leaf_nodes(), _interior_of, max_leaves=max_leaves)


def operand_runs() -> st.SearchStrategy[list[mterms.MathNode]]:
    return st.lists(leaf_nodes(), min_size=1, max_size=2)


def build_row(runs: list[list[mterms.MathNode]], op: str = "+") -> mterms.MathNode:
    kids: list[mterms.MathNode] = []
    for i, run in enumerate(runs):
        if i:
            kids.append(mterms.operator(op))
        kids.extend(run)
    return mterms.row(*kids)


MATHML_NS = "http://www.w3.org/1998/Math/MathML"
XHTML_NS = "http://www.w3.org/1999/xhtml"


def math_element(content: str, tex: str | None = None) -> str:
    annotation = (
        f'<annotation encoding="application/x-tex">{tex}</annotation>' if tex is not None else ""
    )
    return (
        f'<math xmlns="{MATHML_NS}"><semantics>{content}{annotation}</semantics></math>'
    )


def xhtml_document(title: str, body: str) -> bytes:
    return (
        f'<html xmlns="{XHTML_NS}"><head><title>{title}</title></head>'
        f"<body><h1>{title}</h1>{body}</body></html>"
    ).encode("utf-8")
