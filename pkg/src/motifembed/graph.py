"""Immutable undirected simple graphs in compressed sparse adjacency form.

Nodes carry dense zero-based ids internally; the labels seen in the input
edge list are kept in a side table so output can use them again.
"""

from __future__ import annotations

import hashlib
import os
from typing import IO, Iterable, Iterator

import numpy as np


class EdgeListParseError(ValueError):
    """A line of an edge-list input could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class EmptyGraphError(ValueError):
    """The input contains no edges after cleanup."""


class Graph:
    """Undirected simple graph: no self-loops, no duplicate edges.

    Each edge is stored once with ``u < v`` (canonical, lexicographically
    sorted) and mirrored in the adjacency structure. Neighbor lists are
    strictly ascending. Instances are immutable after construction and safe
    to share across workers.
    """

    def __init__(
        self,
        num_nodes: int,
        edge_u: np.ndarray,
        edge_v: np.ndarray,
        labels: np.ndarray | None = None,
    ):
        if num_nodes <= 0:
            raise ValueError("graph must have at least one node")
        edge_u = np.asarray(edge_u, dtype=np.int64)
        edge_v = np.asarray(edge_v, dtype=np.int64)
        if edge_u.shape != edge_v.shape or edge_u.ndim != 1:
            raise ValueError("edge endpoint arrays must be 1-D and equal length")
        if edge_u.size == 0:
            raise EmptyGraphError("graph has no edges (M=0)")
        if edge_u.min() < 0 or max(edge_u.max(), edge_v.max()) >= num_nodes:
            raise ValueError("edge endpoint outside [0, num_nodes)")
        if np.any(edge_u >= edge_v):
            raise ValueError("edges must be canonical with u < v")

        self.num_nodes = int(num_nodes)
        self.num_edges = int(edge_u.size)
        self.edge_u = edge_u
        self.edge_v = edge_v

        if labels is None:
            labels = np.arange(num_nodes, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        if self.labels.shape != (num_nodes,):
            raise ValueError("labels must have one entry per node")

        # CSR adjacency over both edge directions, neighbors sorted per row.
        src = np.concatenate([edge_u, edge_v])
        dst = np.concatenate([edge_v, edge_u])
        eid = np.concatenate([np.arange(self.num_edges)] * 2)
        order = np.lexsort((dst, src))
        self._neighbors = dst[order]
        self._slot_edge = eid[order]
        self._offsets = np.zeros(num_nodes + 1, dtype=np.int64)
        np.add.at(self._offsets, src + 1, 1)
        np.cumsum(self._offsets, out=self._offsets)

        row_of = np.repeat(np.arange(num_nodes), np.diff(self._offsets))
        if np.any((self._neighbors[1:] == self._neighbors[:-1]) & (row_of[1:] == row_of[:-1])):
            raise ValueError("duplicate edge detected")

        for arr in (self.edge_u, self.edge_v, self.labels, self._neighbors, self._slot_edge, self._offsets):
            arr.flags.writeable = False

    @classmethod
    def from_edges(
        cls,
        num_nodes: int,
        edges: Iterable[tuple[int, int]] | np.ndarray,
        labels: np.ndarray | None = None,
    ) -> "Graph":
        """Build a graph from (possibly messy) edge pairs with dense ids.

        Self-loops are dropped, duplicate and reversed-duplicate edges are
        collapsed, and edges are put in canonical sorted order. Node ids must
        already lie in ``[0, num_nodes)``; isolated nodes are retained.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if arr.size == 0:
            raise EmptyGraphError("graph has no edges (M=0)")
        arr = arr.reshape(-1, 2)
        if arr.min() < 0 or arr.max() >= num_nodes:
            raise ValueError("edge endpoint outside [0, num_nodes)")
        u = np.minimum(arr[:, 0], arr[:, 1])
        v = np.maximum(arr[:, 0], arr[:, 1])
        keep = u != v
        u, v = u[keep], v[keep]
        if u.size == 0:
            raise EmptyGraphError("graph has no edges after dropping self-loops (M=0)")
        key = u * np.int64(num_nodes) + v
        # unique keys come back sorted, which is exactly canonical (u, v) order
        _, first = np.unique(key, return_index=True)
        return cls(num_nodes, u[first], v[first], labels=labels)

    # -- queries ----------------------------------------------------------

    def degree(self, u: int) -> int:
        return int(self._offsets[u + 1] - self._offsets[u])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._offsets)

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor ids of ``u`` (a read-only view)."""
        return self._neighbors[self._offsets[u] : self._offsets[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return i < row.size and row[i] == v

    def edge_id(self, u: int, v: int) -> int:
        """Dense id of the undirected edge {u, v}; raises if absent."""
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        if i >= row.size or row[i] != v:
            raise KeyError(f"no edge ({u}, {v})")
        return int(self._slot_edge[self._offsets[u] + i])

    def common_neighbors(self, u: int, v: int) -> np.ndarray:
        """Sorted intersection of the two neighbor lists."""
        if u == v:
            raise ValueError("common_neighbors requires two distinct nodes")
        return np.intersect1d(self.neighbors(u), self.neighbors(v), assume_unique=True)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, v in zip(self.edge_u, self.edge_v):
            yield int(u), int(v)

    def adjacency_sets(self) -> list[set[int]]:
        """Neighbor lists as Python sets, for set-algebra heavy kernels."""
        nb = self._neighbors.tolist()
        off = self._offsets.tolist()
        return [set(nb[off[u] : off[u + 1]]) for u in range(self.num_nodes)]

    def fingerprint(self) -> str:
        """Stable content hash used to bind derived tables to this graph."""
        h = hashlib.sha256()
        h.update(np.int64(self.num_nodes).tobytes())
        h.update(self.edge_u.tobytes())
        h.update(self.edge_v.tobytes())
        h.update(self.labels.tobytes())
        return h.hexdigest()

    # -- serialization ----------------------------------------------------

    def to_edge_list_lines(self) -> list[str]:
        """Canonical edge list using original labels.

        Isolated nodes are written as self-loop lines, which the loader drops
        as edges but keeps as nodes, so load(dump(g)) == g exactly.
        """
        lab = self.labels
        rows = [(int(lab[u]), int(lab[v])) for u, v in zip(self.edge_u, self.edge_v)]
        iso = np.flatnonzero(self.degrees == 0)
        rows.extend((int(lab[u]), int(lab[u])) for u in iso)
        rows.sort()
        return [f"{a} {b}" for a, b in rows]

    def write_edge_list(self, stream: IO[str]) -> None:
        for line in self.to_edge_list_lines():
            stream.write(line + "\n")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and np.array_equal(self.edge_u, other.edge_u)
            and np.array_equal(self.edge_v, other.edge_v)
            and np.array_equal(self.labels, other.labels)
        )

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self) -> str:
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


def load_edge_list(
    source: str | os.PathLike | IO[str] | Iterable[str],
    *,
    one_indexed: bool = False,
    skip_header: bool = False,
) -> Graph:
    """Parse a whitespace edge list into a canonical :class:`Graph`.

    Lines hold at least two integer tokens ``u v``; extra tokens (weights)
    are ignored. Comment lines start with ``%`` or ``#``. With
    ``skip_header`` the first non-comment line (a MatrixMarket size line) is
    skipped. Self-loops are dropped but their node is kept; duplicate and
    reversed edges collapse to one. Node labels are compacted to ``[0, N)``
    with the original labels retained.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_edge_list(fh, one_indexed=one_indexed, skip_header=skip_header)

    raw_u: list[int] = []
    raw_v: list[int] = []
    header_pending = skip_header
    for line_no, line in enumerate(source, start=1):
        text = line.strip()
        if not text or text.startswith("%") or text.startswith("#"):
            continue
        if header_pending:
            header_pending = False
            continue
        tokens = text.split()
        if len(tokens) < 2:
            raise EdgeListParseError(line_no, f"expected at least 2 tokens, got {len(tokens)}")
        try:
            a = int(tokens[0])
            b = int(tokens[1])
        except ValueError as exc:
            raise EdgeListParseError(line_no, f"malformed integer token: {exc}") from None
        if one_indexed and (a < 1 or b < 1):
            raise EdgeListParseError(line_no, f"node id {min(a, b)} invalid in one-indexed input")
        raw_u.append(a)
        raw_v.append(b)

    if not raw_u:
        raise EmptyGraphError("input contains no edges (M=0)")

    ua = np.asarray(raw_u, dtype=np.int64)
    va = np.asarray(raw_v, dtype=np.int64)
    labels = np.unique(np.concatenate([ua, va]))
    num_nodes = labels.size
    cu = np.searchsorted(labels, ua)
    cv = np.searchsorted(labels, va)
    return Graph.from_edges(num_nodes, np.stack([cu, cv], axis=1), labels=labels)
