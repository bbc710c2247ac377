"""Simply-laced Cartan matrices in Bourbaki numbering (0-based in code).

    A_n : 0 - 1 - ... - (n-1)
    D_n : 0 - 1 - ... - (n-3) - (n-2), with (n-3) - (n-1) as the second fork
    E_n : 0 - 2 - 3 - ... - (n-1), with 1 attached to 3
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import networkx as nx
import numpy as np


class CartanError(ValueError):
    pass


@dataclass(frozen=True)
class CartanData:
    type: str
    rank: int
    matrix: tuple

    @property
    def label(self) -> str:
        return f"{self.type}{self.rank}"

    def __getitem__(self, ij):
        i, j = ij
        return self.matrix[i][j]

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=int)

    def nodes(self) -> range:
        return range(self.rank)

    def pairs(self):
        """Ordered node pairs (i, j) with their Cartan entry."""
        for i in self.nodes():
            for j in self.nodes():
                yield i, j, self.matrix[i][j]


def dynkin_edges(type_: str, rank: int) -> list[tuple[int, int]]:
    if type_ == "A" and rank >= 1:
        return [(k, k + 1) for k in range(rank - 1)]
    if type_ == "D" and rank >= 4:
        return [(k, k + 1) for k in range(rank - 2)] + [(rank - 3, rank - 1)]
    if type_ == "E" and rank in (6, 7, 8):
        return [(0, 2), (1, 3)] + [(k, k + 1) for k in range(2, rank - 1)]
    raise CartanError(f"invalid simply-laced type {type_}{rank}")


def cartan_matrix(type_: str, rank: int | None = None) -> CartanData:
    """Standard Cartan matrix; accepts ``cartan_matrix("D", 4)`` or ``cartan_matrix("D4")``."""
    if rank is None:
        type_, rank = parse_label(type_)
    edges = dynkin_edges(type_, rank)
    a = 2 * np.eye(rank, dtype=int)
    for i, j in edges:
        a[i, j] = a[j, i] = -1
    return CartanData(type_, rank, tuple(tuple(int(v) for v in row) for row in a))


def parse_label(label: str) -> tuple[str, int]:
    m = re.fullmatch(r"\s*([ADEade])\s*_?\s*(\d+)\s*", label)
    if not m:
        raise CartanError(f"cannot parse algebra label {label!r}")
    t, r = m.group(1).upper(), int(m.group(2))
    dynkin_edges(t, r)
    return t, r


def validate(cd: CartanData) -> tuple[bool, list[str]]:
    """Check symmetry, diagonal, simply-laced entries and the Dynkin graph."""
    problems = []
    a = np.array(cd.matrix, dtype=int)
    if a.shape != (cd.rank, cd.rank):
        return False, [f"matrix shape {a.shape} does not match rank {cd.rank}"]
    if not (a == a.T).all():
        problems.append("matrix is not symmetric")
    if not (np.diag(a) == 2).all():
        problems.append("diagonal entries must be 2")
    off = a[~np.eye(cd.rank, dtype=bool)]
    if not set(off.tolist()) <= {0, -1}:
        problems.append("off-diagonal entries must lie in {0, -1}")
    g = nx.Graph()
    g.add_nodes_from(range(cd.rank))
    g.add_edges_from((i, j) for i in range(cd.rank) for j in range(i + 1, cd.rank) if a[i, j] != 0)
    if not nx.is_connected(g):
        problems.append("Dynkin graph is disconnected")
    try:
        ref = nx.Graph()
        ref.add_nodes_from(range(cd.rank))
        ref.add_edges_from(dynkin_edges(cd.type, cd.rank))
        if not nx.is_isomorphic(g, ref):
            problems.append(f"graph is not the {cd.label} Dynkin diagram")
    except CartanError as exc:
        problems.append(str(exc))
    return not problems, problems
