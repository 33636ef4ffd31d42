"""Finite undirected graphs stored as packed bitsets over unordered vertex pairs.

Vertices are 1-indexed.  A graph on n vertices is a single Python integer
whose bit k encodes the k-th unordered pair {i, j}, i < j, in row-major
order: (1,2), (1,3), ..., (1,n), (2,3), ...  This makes symmetric-difference
counts a single XOR + popcount and keeps graphs immutable and hashable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

ENUMERATION_CAP = 5
ENUMERATION_HARD_CAP = 6


def num_pairs(n: int) -> int:
    """C(n, 2), with the convention C(1, 2) = 0."""
    return n * (n - 1) // 2


def pair_index(i: int, j: int, n: int) -> int:
    """Bit position of the unordered pair {i, j} (1-indexed, i < j) on n vertices."""
    if not (1 <= i < j <= n):
        raise ValueError(f"pair ({i}, {j}) out of range for n={n}")
    u = i - 1
    return u * n - u * (u + 1) // 2 + (j - i - 1)


@lru_cache(maxsize=64)
def pair_endpoints(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (I, J) of 0-indexed endpoints for every pair index on n vertices."""
    iu = np.triu_indices(n, 1)
    return iu[0].astype(np.int64), iu[1].astype(np.int64)


def _pack(vec: np.ndarray) -> int:
    if vec.size == 0:
        return 0
    packed = np.packbits(vec.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _unpack(bits: int, npairs: int) -> np.ndarray:
    if npairs == 0:
        return np.zeros(0, dtype=bool)
    nbytes = (npairs + 7) // 8
    raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:npairs].astype(bool)


@dataclass(frozen=True)
class AdjacencyGraph:
    """Immutable simple undirected graph (no self-loops) on vertices 1..n."""

    n: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        if self.bits < 0 or self.bits >> num_pairs(self.n):
            raise ValueError("edge bits out of range for vertex count")

    @classmethod
    def empty(cls, n: int) -> "AdjacencyGraph":
        return cls(n, 0)

    @classmethod
    def complete(cls, n: int) -> "AdjacencyGraph":
        return cls(n, (1 << num_pairs(n)) - 1)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "AdjacencyGraph":
        bits = 0
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) not allowed")
            a, b = (i, j) if i < j else (j, i)
            bits |= 1 << pair_index(a, b, n)
        return cls(n, bits)

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "AdjacencyGraph":
        mat = np.asarray(mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("adjacency matrix must be square")
        b = mat.astype(bool)
        if np.any(np.diag(b)):
            raise ValueError("adjacency matrix must have zero diagonal")
        if not np.array_equal(b, b.T):
            raise ValueError("adjacency matrix must be symmetric")
        iu = np.triu_indices(b.shape[0], 1)
        return cls(b.shape[0], _pack(b[iu]))

    @classmethod
    def from_pair_vector(cls, n: int, vec: np.ndarray) -> "AdjacencyGraph":
        if vec.shape != (num_pairs(n),):
            raise ValueError("pair vector has wrong length")
        return cls(n, _pack(vec))

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        a, b = (i, j) if i < j else (j, i)
        return bool((self.bits >> pair_index(a, b, self.n)) & 1)

    @property
    def edge_count(self) -> int:
        return self.bits.bit_count()

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield edges as 1-indexed (i, j) with i < j, in pair-index order."""
        vec = self.to_pair_vector()
        ii, jj = pair_endpoints(self.n)
        for k in np.flatnonzero(vec):
            yield int(ii[k]) + 1, int(jj[k]) + 1

    def to_pair_vector(self) -> np.ndarray:
        return _unpack(self.bits, num_pairs(self.n))

    def to_matrix(self) -> np.ndarray:
        """Dense symmetric boolean adjacency matrix (0-indexed)."""
        mat = np.zeros((self.n, self.n), dtype=bool)
        iu = np.triu_indices(self.n, 1)
        mat[iu] = self.to_pair_vector()
        return mat | mat.T

    def __repr__(self) -> str:
        return f"AdjacencyGraph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class InjectiveMap:
    """Injective vertex map phi: [n] -> [m]; position k of `image` gives phi(k+1)."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.image)) != len(self.image):
            raise ValueError("image entries must be pairwise distinct")
        if any(v < 1 for v in self.image):
            raise ValueError("image entries must be >= 1")

    @property
    def domain_size(self) -> int:
        return len(self.image)

    @classmethod
    def identity(cls, n: int) -> "InjectiveMap":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_permutation(cls, perm: Sequence[int]) -> "InjectiveMap":
        m = cls(tuple(perm))
        if sorted(m.image) != list(range(1, len(m.image) + 1)):
            raise ValueError("not a permutation of [n]")
        return m

    def compose(self, other: "InjectiveMap") -> "InjectiveMap":
        """self after other: (self.compose(other))(k) = self(other(k))."""
        if max(other.image) > self.domain_size:
            raise ValueError("composition out of range")
        return InjectiveMap(tuple(self.image[v - 1] for v in other.image))


def restrict(g: AdjacencyGraph, n: int) -> AdjacencyGraph:
    """Induced subgraph on vertices 1..n."""
    if not (1 <= n <= g.n):
        raise ValueError(f"restriction level {n} out of range for n={g.n}")
    if n == g.n:
        return g
    mat = g.to_matrix()
    iu = np.triu_indices(n, 1)
    return AdjacencyGraph(n, _pack(mat[:n, :n][iu]))


def apply_map(g: AdjacencyGraph, phi: InjectiveMap) -> AdjacencyGraph:
    """Pullback of g along phi: edge {k, l} iff {phi(k), phi(l)} is an edge of g."""
    if max(phi.image) > g.n:
        raise ValueError("map image exceeds vertex count")
    idx = np.asarray(phi.image, dtype=np.int64) - 1
    mat = g.to_matrix()[np.ix_(idx, idx)]
    iu = np.triu_indices(phi.domain_size, 1)
    return AdjacencyGraph(phi.domain_size, _pack(mat[iu]))


@lru_cache(maxsize=128)
def window_mask(n: int, m: int) -> int:
    """Bitmask over pair indices of [n] selecting pairs with both endpoints <= m."""
    if m >= n:
        return (1 << num_pairs(n)) - 1
    _, jj = pair_endpoints(n)
    return _pack(jj < m)


def project(g: AdjacencyGraph, m: int) -> AdjacencyGraph:
    """Zero all edges with an endpoint outside 1..m, keeping the vertex count."""
    if m < 1:
        raise ValueError("projection level must be >= 1")
    if m >= g.n:
        return g
    return AdjacencyGraph(g.n, g.bits & window_mask(g.n, m))


def sym_diff_count(f: AdjacencyGraph, g: AdjacencyGraph) -> int:
    """Number of unordered pairs on which f and g disagree."""
    if f.n != g.n:
        raise ValueError(f"vertex counts differ: {f.n} vs {g.n}")
    return (f.bits ^ g.bits).bit_count()


def enumerate_labeled(n: int, allow_large: bool = False) -> list[AdjacencyGraph]:
    """All 2^C(n,2) labeled graphs on n vertices, ordered by pair bitmask.

    Capped at n = 5 by default; n = 6 (32768 graphs) requires allow_large.
    """
    cap = ENUMERATION_HARD_CAP if allow_large else ENUMERATION_CAP
    if n > cap:
        raise ValueError(
            f"enumerate_labeled(n={n}) exceeds the cap of {cap}: "
            f"2^C(n,2) = 2^{num_pairs(n)} graphs; "
            + ("raise the cap explicitly if you mean it" if allow_large
               else "pass allow_large=True to permit n=6")
        )
    return [AdjacencyGraph(n, b) for b in range(1 << num_pairs(n))]


def er_sample(n: int, p: float, seed) -> AdjacencyGraph:
    """Erdos-Renyi draw: each pair is an edge independently with probability p."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("edge probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    return AdjacencyGraph(n, _pack(rng.random(num_pairs(n)) < p))


def random_permutation_map(n: int, rng: np.random.Generator) -> InjectiveMap:
    return InjectiveMap(tuple(int(v) + 1 for v in rng.permutation(n)))


def write_edge_list(g: AdjacencyGraph, path) -> None:
    """Edge-list text format: first line 'n <N>', then one '<i> <j>' line per edge."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"n {g.n}\n")
        for i, j in g.edges():
            fh.write(f"{i} {j}\n")


def read_edge_list(path) -> AdjacencyGraph:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "n":
            raise ValueError(f"{path}: line 1: expected header 'n <N>'")
        n = int(header[1])
        if n < 1:
            raise ValueError(f"{path}: line 1: vertex count must be positive")
        bits = 0
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}: line {lineno}: expected '<i> <j>'")
            i, j = int(parts[0]), int(parts[1])
            if not (1 <= i < j <= n):
                raise ValueError(f"{path}: line {lineno}: need 1 <= i < j <= {n}")
            bit = 1 << pair_index(i, j, n)
            if bits & bit:
                raise ValueError(f"{path}: line {lineno}: duplicate edge {i} {j}")
            bits |= bit
    return AdjacencyGraph(n, bits)


def seed_list(seed) -> list[int]:
    """Flatten a seed (int or sequence of ints) so streams can be appended.

    default_rng accepts a flat list of ints as an entropy path; composing
    [seed, stream, replicate] with a seed that is itself a list needs this.
    """
    if isinstance(seed, (list, tuple, np.ndarray)):
        return [int(s) for s in seed]
    return [int(seed)]


def density_quantum(n: int) -> float:
    """Smallest positive edit density at truncation n: 2 / (n (n-1))."""
    if n < 2:
        return math.inf
    return 2.0 / (n * (n - 1))
