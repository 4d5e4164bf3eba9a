"""Corpus loading, reference-class filtering, and the persisted shuffle.

A corpus is a directory of XHTML documents with embedded presentation
MathML plus two tab-separated sidecars: per-document metadata (id, MSC
codes, title) and the MSC class descriptions. Documents are reduced to an
id, metadata, the plain text outside math elements, and the list of
formulae (verbatim TeX annotation and parsed tree, when available).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from random import Random
from xml.etree import ElementTree
from xml.parsers import expat

from .mterms import MathMLError, MathNode, mathml_to_node

log = logging.getLogger(__name__)

# two digits, one letter-or-dash-or-dot, then two digits or the xx wildcard
MSC_CODE_RE = re.compile(r"^\d{2}[A-Za-z.\-](\d{2}|[Xx]{2})$")


class MarkupError(ValueError):
    """Raised for malformed XHTML; carries the failing byte offset."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


@dataclass
class Formula:
    """One math element: verbatim TeX annotation and/or parsed tree."""

    tex: str = ""
    tree: MathNode | None = None


@dataclass
class Document:
    id: str
    msc_codes: list[str]
    title: str = ""
    authors: list[str] = field(default_factory=list)
    abstract: str = ""
    body_text: str = ""
    formulae: list[Formula] = field(default_factory=list)


@dataclass
class MetadataRecord:
    doc_id: str
    msc_codes: list[str]
    title: str


@dataclass
class ParseStats:
    """Counters accumulated while parsing a corpus."""

    documents: int = 0
    formulae: int = 0
    mathml_failures: int = 0
    empty_formulae_dropped: int = 0


@dataclass
class CorpusOrdering:
    """A seeded permutation of document ids, persisted alongside its seed."""

    seed: int
    ordered_ids: list[str]


def load_metadata(path: str | Path) -> dict[str, MetadataRecord]:
    """Read the ``doc_id<TAB>msc_codes<TAB>title`` sidecar.

    MSC codes are separated by ``;`` within their field and may be empty.
    Malformed codes and duplicate ids are rejected.
    """
    records: dict[str, MetadataRecord] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
        doc_id, codes_field, title = parts
        if not doc_id:
            raise ValueError(f"{path}:{lineno}: empty document id")
        if doc_id in records:
            raise ValueError(f"{path}:{lineno}: duplicate document id {doc_id!r}")
        codes = [c for c in codes_field.split(";") if c]
        for code in codes:
            if not MSC_CODE_RE.match(code):
                raise ValueError(f"{path}:{lineno}: malformed MSC code {code!r}")
        records[doc_id] = MetadataRecord(doc_id, codes, title)
    return records


def load_msc_spec(path: str | Path) -> dict[str, str]:
    """Read the ``CODE<TAB>description`` sidecar into a dict."""
    spec: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        code, sep, description = line.partition("\t")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected CODE<TAB>description")
        if not MSC_CODE_RE.match(code):
            raise ValueError(f"{path}:{lineno}: malformed MSC code {code!r}")
        if code in spec:
            raise ValueError(f"{path}:{lineno}: duplicate MSC code {code!r}")
        spec[code] = description
    return spec


def _failure_byte_offset(data: bytes) -> int:
    parser = expat.ParserCreate()
    try:
        parser.Parse(data, True)
    except expat.ExpatError:
        return parser.ErrorByteIndex
    return -1


def parse_document(
    xhtml: bytes, metadata: MetadataRecord, stats: ParseStats | None = None
) -> Document:
    """Parse one XHTML document into its text and formula parts.

    Every text node outside math elements flows into ``body_text`` (with
    whitespace collapsed). Each math element yields a :class:`Formula`
    carrying the TeX annotation, the converted tree, or both; a math
    element whose markup cannot be converted keeps its TeX with no tree and
    bumps the failure counter, and one offering neither is dropped.
    """
    stats = stats if stats is not None else ParseStats()
    try:
        root = ElementTree.fromstring(xhtml)
    except ElementTree.ParseError as exc:
        raise MarkupError(f"malformed markup in {metadata.doc_id!r}: {exc}",
                          _failure_byte_offset(xhtml)) from exc

    text_parts: list[str] = []
    formulae: list[Formula] = []

    def walk(element) -> None:
        tag = element.tag.rsplit("}", 1)[-1] if isinstance(element.tag, str) else ""
        if tag == "head":
            return
        if tag == "math":
            formula = _parse_formula(element, metadata.doc_id, stats)
            if formula is not None:
                formulae.append(formula)
            return
        if element.text:
            text_parts.append(element.text)
        for child in element:
            walk(child)
            if child.tail:
                text_parts.append(child.tail)

    walk(root)
    stats.documents += 1
    # Fragments are space-joined: element boundaries count as word breaks
    # even when the source has no whitespace between sibling blocks.
    return Document(
        id=metadata.doc_id,
        msc_codes=list(metadata.msc_codes),
        title=metadata.title,
        body_text=" ".join(" ".join(text_parts).split()),
        formulae=formulae,
    )


def _parse_formula(element, doc_id: str, stats: ParseStats) -> Formula | None:
    tex = ""
    for node in element.iter():
        tag = node.tag.rsplit("}", 1)[-1] if isinstance(node.tag, str) else ""
        if tag == "annotation" and "tex" in node.get("encoding", "").lower():
            tex = (node.text or "").strip()
            break
    try:
        tree = mathml_to_node(element)
    except MathMLError as exc:
        log.warning("document %s: unparseable MathML (%s)", doc_id, exc)
        stats.mathml_failures += 1
        tree = None
    if tex == "" and tree is None:
        stats.empty_formulae_dropped += 1
        return None
    stats.formulae += 1
    return Formula(tex=tex, tree=tree)


def load_corpus(
    corpus_dir: str | Path,
    metadata_path: str | Path | None = None,
    stats: ParseStats | None = None,
) -> list[Document]:
    """Parse every ``*.xhtml`` file in a directory, in sorted name order.

    The file stem is the document id and must appear in the metadata
    sidecar (``metadata.tsv`` inside the corpus directory by default).
    """
    corpus_dir = Path(corpus_dir)
    if metadata_path is None:
        metadata_path = corpus_dir / "metadata.tsv"
    records = load_metadata(metadata_path)
    documents = []
    for path in sorted(corpus_dir.glob("*.xhtml")):
        record = records.get(path.stem)
        if record is None:
            raise ValueError(f"{path.name}: no metadata record for document id {path.stem!r}")
        documents.append(parse_document(path.read_bytes(), record, stats))
    return documents


def filter_corpus(documents: list[Document], msc_spec: dict[str, str]) -> list[Document]:
    """Keep only documents usable as unambiguous reference-class members.

    A document survives when it has exactly one MSC code, the third
    character of that code is neither ``-`` nor ``.``, and the code's
    description exists and does not contain "see also" (case-insensitive).
    Documents whose single code is missing from the MSC spec are excluded
    and logged as unverifiable.
    """
    kept = []
    for doc in documents:
        if len(doc.msc_codes) != 1:
            continue
        code = doc.msc_codes[0]
        if code[2] in "-.":
            continue
        description = msc_spec.get(code)
        if description is None:
            log.info("document %s: MSC code %s absent from spec; excluded", doc.id, code)
            continue
        if "see also" in description.lower():
            continue
        kept.append(doc)
    return kept


def shuffle_once(documents, seed: int) -> CorpusOrdering:
    """Produce the experiment-wide random document order.

    Ids are sorted ascending before a Fisher-Yates pass so the permutation
    depends only on the id set and the seed, not the input order.
    """
    ids = sorted(doc.id if isinstance(doc, Document) else str(doc) for doc in documents)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate document ids")
    rng = Random(seed)
    for i in range(len(ids) - 1, 0, -1):
        j = rng.randrange(i + 1)
        ids[i], ids[j] = ids[j], ids[i]
    return CorpusOrdering(seed=seed, ordered_ids=ids)


def write_ordering(ordering: CorpusOrdering, path: str | Path) -> None:
    lines = [f"seed\t{ordering.seed}"] + list(ordering.ordered_ids)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_ordering(path: str | Path) -> CorpusOrdering:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("seed\t"):
        raise ValueError(f"{path}: expected a 'seed<TAB>N' header line")
    seed = int(lines[0].split("\t", 1)[1])
    ids = [line for line in lines[1:] if line]
    if len(set(ids)) != len(ids):
        raise ValueError(f"{path}: duplicate document ids")
    return CorpusOrdering(seed=seed, ordered_ids=ids)
