"""Similarity-matrix images and curve files.

Matrices render to 8-bit grayscale PNGs on a logarithmic brightness ramp,
with a one-pixel white separator row and column between reference regions.
The encoder is written against the PNG spec directly so identical inputs
always produce identical bytes.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .evaluate import PRCurve


def brightness(similarity) -> np.ndarray:
    """Map similarities in [0, 1] to pixel values 0..255 logarithmically:
    ``round(255 * ln(1 + 255 s) / ln(256))``."""
    s = np.asarray(similarity, dtype=np.float64)
    if ((s < 0) | (s > 1)).any():
        raise ValueError("similarities must lie in [0, 1]")
    return np.rint(255.0 * np.log1p(255.0 * s) / np.log(256.0)).astype(np.uint8)


@dataclass
class MatrixImage:
    """A rendered grayscale image: row-major pixel array."""

    pixels: np.ndarray

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def render_matrix(matrix: np.ndarray, regions: list[int]) -> MatrixImage:
    """Render a similarity matrix with white separators between regions.

    ``regions`` holds the consecutive region sizes and must sum to the
    matrix dimension; the image side is ``n + len(regions) - 1``.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("similarity matrix must be square")
    n = matrix.shape[0]
    if not regions or any(size < 1 for size in regions):
        raise ValueError("regions must be nonempty positive sizes")
    if sum(regions) != n:
        raise ValueError(f"region sizes sum to {sum(regions)}, matrix has {n} rows")
    side = n + len(regions) - 1
    pixels = np.full((side, side), 255, dtype=np.uint8)
    # pixel row/column of each document row/column, skipping separators
    placement = np.empty(n, dtype=np.int64)
    position = 0
    index = 0
    for size in regions:
        for _ in range(size):
            placement[index] = position
            index += 1
            position += 1
        position += 1  # separator after the region (unused after the last)
    pixels[np.ix_(placement, placement)] = brightness(matrix)
    return MatrixImage(pixels=pixels)


def encode_png(pixels: np.ndarray) -> bytes:
    """Encode an 8-bit grayscale array as a non-interlaced PNG."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.ndim != 2:
        raise ValueError("expected a 2-D grayscale pixel array")
    height, width = pixels.shape

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
        )

    header = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)
    raw = b"".join(b"\x00" + pixels[row].tobytes() for row in range(height))
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )


def write_matrix_png(matrix: np.ndarray, regions: list[int], path) -> None:
    with open(path, "wb") as handle:
        handle.write(encode_png(render_matrix(matrix, regions).pixels))


def emit_pr_tsv(curve: PRCurve) -> str:
    """Render a curve as ``threshold<TAB>precision<TAB>recall<TAB>f1`` rows,
    thresholds descending, with a header. Floats use shortest round-trip
    notation so parsing the file back reproduces the curve exactly."""
    lines = ["threshold\tprecision\trecall\tf1"]
    for t, p, r, f in zip(
        curve.thresholds, curve.precisions, curve.recalls, curve.f1_scores()
    ):
        lines.append(f"{float(t)!r}\t{float(p)!r}\t{float(r)!r}\t{float(f)!r}")
    return "\n".join(lines) + "\n"


def parse_pr_tsv(text: str) -> PRCurve:
    lines = [line for line in text.splitlines() if line]
    if not lines or lines[0].split("\t")[:3] != ["threshold", "precision", "recall"]:
        raise ValueError("expected a threshold/precision/recall header line")
    rows = [tuple(float(part) for part in line.split("\t")) for line in lines[1:]]
    return PRCurve(
        thresholds=np.array([row[0] for row in rows]),
        precisions=np.array([row[1] for row in rows]),
        recalls=np.array([row[2] for row in rows]),
    )
