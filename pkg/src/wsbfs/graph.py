"""CSR graphs: construction, text ingestion, seeded generators and the serial BFS oracle."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import TextIO

import numba
import numpy as np

from . import rng

# Level value of vertices the traversal never reached.
UNREACHED = np.iinfo(np.int64).max
INDEX_MAX = np.iinfo(np.int64).max


class GraphFormatError(ValueError):
    """Raised for malformed graph input; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class CsrGraph:
    """Immutable compressed-sparse-row adjacency.

    ``offsets`` has ``vertex_count + 1`` entries; the out-neighbours of ``u``
    are ``neighbors[offsets[u]:offsets[u + 1]]``.  Both arrays are read-only.
    """

    offsets: np.ndarray
    neighbors: np.ndarray

    @property
    def vertex_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def edge_count(self) -> int:
        return len(self.neighbors)

    def degree(self, u: int) -> int:
        return int(self.offsets[u + 1] - self.offsets[u])

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def neighbors_of(self, u: int) -> np.ndarray:
        return self.neighbors[self.offsets[u] : self.offsets[u + 1]]


def _as_pairs(edge_list) -> np.ndarray:
    arr = np.asarray(edge_list, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("edge_list must be a sequence of (u, v) pairs")
    return arr


def build_csr(edge_list, vertex_count: int, symmetrize: bool = False) -> CsrGraph:
    """Build a CSR graph from ``(u, v)`` pairs.

    Arcs are grouped by source and keep input order within a source.  With
    ``symmetrize`` every pair ``(u, v)`` with ``u != v`` is followed by its
    reverse ``(v, u)`` before grouping.  Duplicates and self-loops are kept.
    """
    pairs = _as_pairs(edge_list)
    if vertex_count < 0:
        raise ValueError("vertex_count must be non-negative")
    if len(pairs) and vertex_count == 0:
        raise ValueError("vertex_count is 0 but edge_list is not empty")
    bad = (pairs < 0) | (pairs >= vertex_count)
    if bad.any():
        i = int(np.flatnonzero(bad.any(axis=1))[0])
        u, v = (int(x) for x in pairs[i])
        raise ValueError(f"edge {i} ({u}, {v}) has a vertex id outside [0, {vertex_count})")

    if symmetrize and len(pairs):
        both = np.empty((2 * len(pairs), 2), dtype=np.int64)
        both[0::2] = pairs
        both[1::2] = pairs[:, ::-1]
        keep = np.ones(len(both), dtype=bool)
        keep[1::2] = pairs[:, 0] != pairs[:, 1]
        pairs = both[keep]

    src, dst = pairs[:, 0], pairs[:, 1]
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=vertex_count)
    offsets = np.zeros(vertex_count + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    neighbors = np.ascontiguousarray(dst[order], dtype=np.int64)
    offsets.flags.writeable = False
    neighbors.flags.writeable = False
    return CsrGraph(offsets, neighbors)


def _parse_id(token: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise GraphFormatError(f"not an integer vertex id: {token!r}", lineno) from None
    if value < 0:
        raise GraphFormatError(f"negative vertex id {value}", lineno)
    if value > INDEX_MAX:
        raise GraphFormatError(f"vertex id {value} exceeds the 64-bit index width", lineno)
    return value


def load_edge_list(stream: TextIO | Iterable[str]) -> tuple[np.ndarray, int]:
    """Parse whitespace-separated ``u v`` lines; ``#`` and ``%`` start comments.

    Returns the pairs in file order and ``1 + max id`` (0 for no edges).
    """
    tokens: list[str] = []
    linenos: list[int] = []
    for lineno, line in enumerate(stream, 1):
        parts = line.split()
        if not parts or parts[0][0] in "#%":
            continue
        if len(parts) != 2:
            raise GraphFormatError(f"expected 2 fields, got {len(parts)}", lineno)
        for tok in parts:
            if not (tok.isascii() and tok.isdigit()):
                _parse_id(tok, lineno)
        tokens.extend(parts)
        linenos.append(lineno)
    if not tokens:
        return np.empty((0, 2), dtype=np.int64), 0
    try:
        flat = np.array(tokens, dtype=np.int64)
    except OverflowError:
        for k, tok in enumerate(tokens):
            _parse_id(tok, linenos[k // 2])
        raise
    pairs = flat.reshape(-1, 2)
    return pairs, int(pairs.max()) + 1


def load_matrix_market(stream: TextIO | Iterable[str]) -> tuple[np.ndarray, int]:
    """Read a coordinate Matrix Market file as 0-based arcs ``(row, col)``.

    Symmetric/skew/hermitian files are expanded to both directions.
    """
    it = iter(enumerate(stream, 1))
    try:
        _, banner = next(it)
    except StopIteration:
        raise GraphFormatError("empty file, missing %%MatrixMarket banner", 1) from None
    fields = banner.lower().split()
    if len(fields) != 5 or fields[0] != "%%matrixmarket" or fields[1] != "matrix":
        raise GraphFormatError("bad %%MatrixMarket banner", 1)
    if fields[2] != "coordinate":
        raise GraphFormatError(f"unsupported format {fields[2]!r}", 1)
    if fields[3] not in ("pattern", "integer", "real", "complex"):
        raise GraphFormatError(f"unsupported field {fields[3]!r}", 1)
    symmetry = fields[4]
    if symmetry not in ("general", "symmetric", "skew-symmetric", "hermitian"):
        raise GraphFormatError(f"unsupported symmetry {symmetry!r}", 1)

    size = None
    rows: list[tuple[int, int]] = []
    for lineno, line in it:
        parts = line.split()
        if not parts or parts[0].startswith("%"):
            continue
        if size is None:
            if len(parts) != 3:
                raise GraphFormatError("size line needs rows cols entries", lineno)
            size = tuple(_parse_id(p, lineno) for p in parts)
            continue
        if len(parts) < 2:
            raise GraphFormatError("entry needs row and column", lineno)
        i, j = _parse_id(parts[0], lineno), _parse_id(parts[1], lineno)
        if not (1 <= i <= size[0] and 1 <= j <= size[1]):
            raise GraphFormatError(f"entry ({i}, {j}) outside {size[0]}x{size[1]}", lineno)
        rows.append((i - 1, j - 1))
        if symmetry != "general" and i != j:
            rows.append((j - 1, i - 1))
    if size is None:
        raise GraphFormatError("missing size line")
    pairs = np.array(rows, dtype=np.int64).reshape(-1, 2)
    return pairs, max(size[0], size[1])


def write_edge_list(path, edges, header: Sequence[str] = ()) -> None:
    pairs = _as_pairs(edges)
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        if len(pairs):
            np.savetxt(fh, pairs, fmt="%d")


def generate_erdos_renyi(n: int, m: int, seed: int) -> np.ndarray:
    """``m`` uniform pairs over ``[0, n)``; pair ``i`` uses stream words ``2i`` and ``2i+1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if m < 0:
        raise ValueError("m must be >= 0")
    return rng.integers_below(n, seed, 2 * m).reshape(m, 2)


def generate_rmat(
    scale: int,
    edge_factor: int,
    a: float = 0.57,
    b: float = 0.19,
    c: float = 0.19,
    seed: int = 0,
) -> np.ndarray:
    """R-MAT edges over ``2**scale`` vertices by recursive quadrant descent.

    Edge ``e`` at depth ``k`` (most significant bit first) draws stream word
    ``e * scale + k``; below ``a`` picks the top-left quadrant, below ``a+b``
    top-right, below ``a+b+c`` bottom-left, otherwise bottom-right.
    """
    if scale < 0 or edge_factor < 0:
        raise ValueError("scale and edge_factor must be non-negative")
    if min(a, b, c) < 0:
        raise ValueError("quadrant probabilities must be non-negative")
    if a + b + c > 1.0 + 1e-12:
        raise ValueError(f"a + b + c = {a + b + c} exceeds 1")
    count = edge_factor * (1 << scale)
    u = np.zeros(count, dtype=np.int64)
    v = np.zeros(count, dtype=np.int64)
    if scale and count:
        draws = rng.uniform(seed, count * scale).reshape(count, scale)
        for k in range(scale):
            r = draws[:, k]
            row_bit = r >= a + b
            col_bit = ((r >= a) & (r < a + b)) | (r >= a + b + c)
            u = (u << 1) | row_bit
            v = (v << 1) | col_bit
    return np.stack([u, v], axis=1)


@numba.njit(cache=True, nogil=True)
def _serial_bfs_kernel(offsets, neighbors, source, dist):
    n = len(offsets) - 1
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 1
    queue[0] = source
    dist[source] = 0
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for k in range(offsets[u], offsets[u + 1]):
            v = neighbors[k]
            if dist[v] == UNREACHED:
                dist[v] = du
                queue[tail] = v
                tail += 1


def serial_bfs(g: CsrGraph, source: int) -> np.ndarray:
    """FIFO-queue BFS; unreachable vertices hold ``UNREACHED``."""
    if not 0 <= source < g.vertex_count:
        raise ValueError(f"source {source} outside [0, {g.vertex_count})")
    dist = np.full(g.vertex_count, UNREACHED, dtype=np.int64)
    _serial_bfs_kernel(g.offsets, g.neighbors, np.int64(source), dist)
    return dist


def reachable_arc_count(g: CsrGraph, dist: np.ndarray) -> int:
    """Number of arcs leaving vertices that ``dist`` marks reachable."""
    return int(g.degrees()[dist != UNREACHED].sum())
