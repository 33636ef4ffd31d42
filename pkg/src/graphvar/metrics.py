"""Graph distances: edit density, the prefix (first-disagreement) metric,
permutation averaging, and the pair-density statistic with convergence profiles."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graphs import (
    AdjacencyGraph,
    InjectiveMap,
    apply_map,
    num_pairs,
    pair_endpoints,
    restrict,
    seed_list,
    sym_diff_count,
)

EXACT_PERM_LIMIT = 5040  # enumerate all permutations up to 7! = 5040


@dataclass(frozen=True)
class ConvergenceReport:
    """Sequence of estimates across truncation levels plus a convergence flag."""

    levels: tuple[int, ...]
    values: tuple[float, ...]
    tolerance: float
    last_delta: float = field(init=False)
    converged: bool = field(init=False)

    def __post_init__(self) -> None:
        if len(self.values) != len(self.levels):
            raise ValueError("levels and values must have equal length")
        delta = (
            abs(self.values[-1] - self.values[-2])
            if len(self.values) >= 2
            else math.inf
        )
        object.__setattr__(self, "last_delta", delta)
        object.__setattr__(self, "converged", delta <= self.tolerance)

    @property
    def estimate(self) -> float:
        return self.values[-1]

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "values": list(self.values),
            "tolerance": self.tolerance,
            "last_delta": self.last_delta,
            "converged": self.converged,
        }


def edit_density(f: AdjacencyGraph, g: AdjacencyGraph) -> float:
    """Fraction of ordered vertex pairs on which f and g disagree."""
    if f.n != g.n:
        raise ValueError(f"vertex counts differ: {f.n} vs {g.n}")
    if f.n < 2:
        raise ValueError("edit density needs at least 2 vertices")
    return 2.0 * sym_diff_count(f, g) / (f.n * (f.n - 1))


def edit_density_profile(
    f: AdjacencyGraph,
    g: AdjacencyGraph,
    levels: Sequence[int],
    tolerance: float = 1e-2,
) -> ConvergenceReport:
    """Edit density of the restrictions at each truncation level.

    The last value is the working estimate of the limiting density; the
    convergence flag only reports whether the final step moved less than
    the tolerance.
    """
    if len(levels) == 0:
        raise ValueError("levels must be nonempty")
    if list(levels) != sorted(set(levels)):
        raise ValueError("levels must be strictly increasing")
    if levels[-1] > f.n:
        raise ValueError("largest level exceeds vertex count")
    vals = tuple(edit_density(restrict(f, n), restrict(g, n)) for n in levels)
    return ConvergenceReport(tuple(levels), vals, tolerance)


def prefix_agreement(f: AdjacencyGraph, g: AdjacencyGraph) -> int:
    """Largest n with f|_n = g|_n; equals the full vertex count for equal graphs."""
    if f.n != g.n:
        raise ValueError(f"vertex counts differ: {f.n} vs {g.n}")
    diff = f.bits ^ g.bits
    if diff == 0:
        return f.n
    from .graphs import _unpack  # packed-pair helper shared with AdjacencyGraph

    _, jj = pair_endpoints(f.n)
    vec = _unpack(diff, num_pairs(f.n))
    # first disagreeing pair blocks every window containing its larger endpoint
    return int(jj[vec].min())


def prefix_metric(f: AdjacencyGraph, g: AdjacencyGraph) -> float:
    """1 / prefix_agreement, with 0 for graphs equal on the whole truncation."""
    if f.bits == g.bits and f.n == g.n:
        return 0.0
    return 1.0 / prefix_agreement(f, g)


def perm_average(
    h: Callable[[AdjacencyGraph, AdjacencyGraph], float],
    f: AdjacencyGraph,
    g: AdjacencyGraph,
    m: int,
    k: int = 1000,
    seed=0,
) -> tuple[float, float]:
    """Average of h(f^sigma, g^sigma) over permutations sigma of [m].

    Exact enumeration whenever m! <= 5040 (stderr 0); otherwise a Monte Carlo
    estimate from k independent uniform permutations, returned as
    (mean, standard error).
    """
    if not (1 <= m <= min(f.n, g.n)):
        raise ValueError("window m out of range")
    if math.factorial(m) <= EXACT_PERM_LIMIT:
        vals = [
            h(apply_map(f, InjectiveMap(perm)), apply_map(g, InjectiveMap(perm)))
            for perm in itertools.permutations(range(1, m + 1))
        ]
        return float(np.mean(vals)), 0.0
    if k < 1:
        raise ValueError("need at least one Monte Carlo replicate")
    rng = np.random.default_rng(seed)
    vals = np.empty(k)
    for r in range(k):
        perm = tuple(int(v) + 1 for v in rng.permutation(m))
        phi = InjectiveMap(perm)
        vals[r] = h(apply_map(f, phi), apply_map(g, phi))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(k)) if k > 1 else math.inf
    return float(vals.mean()), stderr


def perm_average_profile(
    h: Callable[[AdjacencyGraph, AdjacencyGraph], float],
    f: AdjacencyGraph,
    g: AdjacencyGraph,
    windows: Sequence[int],
    k: int = 1000,
    seed=0,
) -> list[tuple[int, float, float]]:
    """(m, mean, stderr) rows across window sizes; no limit is asserted."""
    return [
        (m, *perm_average(h, f, g, m, k, seed_list(seed) + [m])) for m in windows
    ]


def perm_prefix_power(
    f: AdjacencyGraph,
    g: AdjacencyGraph,
    alpha: float,
    k: int = 10_000,
    seed=0,
    chunk: int = 512,
) -> tuple[float, float]:
    """Relabeling average of prefix_metric(f^sigma, g^sigma) ** alpha.

    Vectorized over batches of relabelings: the prefix distance depends only
    on the smallest relabeled position pair among disagreeing edges, so each
    batch reduces to one gather and a row minimum.  Exhaustive for small
    vertex counts, otherwise Monte Carlo with k draws.
    """
    if f.n != g.n:
        raise ValueError(f"vertex counts differ: {f.n} vs {g.n}")
    n = f.n
    diff = f.bits ^ g.bits
    if diff == 0:
        return 0.0, 0.0
    from .graphs import _unpack

    ii, jj = pair_endpoints(n)
    idx = np.flatnonzero(_unpack(diff, num_pairs(n)))
    a0, b0 = ii[idx], jj[idx]

    def batch_values(inv: np.ndarray) -> np.ndarray:
        mx = np.maximum(inv[:, a0], inv[:, b0])
        mn = mx.min(axis=1)  # smallest blocking window over all diff pairs
        return (1.0 / np.maximum(mn, 1)) ** alpha

    if math.factorial(n) <= EXACT_PERM_LIMIT:
        perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
        return float(batch_values(np.argsort(perms, axis=1)).mean()), 0.0
    if k < 2:
        raise ValueError("need at least two Monte Carlo replicates")
    rng = np.random.default_rng(seed)
    vals = np.empty(k)
    done = 0
    while done < k:
        b = min(chunk, k - done)
        perms = rng.permuted(np.tile(np.arange(n), (b, 1)), axis=1)
        vals[done : done + b] = batch_values(np.argsort(perms, axis=1))
        done += b
    return float(vals.mean()), float(np.std(vals, ddof=1) / math.sqrt(k))


def slln_statistic(
    x: AdjacencyGraph, levels: Sequence[int], tolerance: float = 1e-2
) -> ConvergenceReport:
    """Edge density 2 E_n / (n (n-1)) of the restriction at each level."""
    if len(levels) == 0:
        raise ValueError("levels must be nonempty")
    if list(levels) != sorted(set(levels)):
        raise ValueError("levels must be strictly increasing")
    if levels[-1] > x.n:
        raise ValueError("largest level exceeds vertex count")
    vals = []
    for n in levels:
        if n < 2:
            raise ValueError("statistic needs levels >= 2")
        vals.append(2.0 * restrict(x, n).edge_count / (n * (n - 1)))
    return ConvergenceReport(tuple(levels), tuple(vals), tolerance)


def prefix_power_series(p: float, alpha: float, n_max: int) -> float:
    """sum_{n=1..n_max} n^-alpha (1-p)^C(n,2) (1 - (1-p)^n).

    Expected value of the prefix metric raised to alpha when two graphs
    disagree independently with probability p per pair; C(1,2) = 0.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    n = np.arange(1, n_max + 1, dtype=np.float64)
    q = 1.0 - p
    return float(np.sum(n ** (-alpha) * q ** (n * (n - 1) / 2.0) * (1.0 - q**n)))


def partial_zeta(alpha: float, n_max: int) -> float:
    """sum_{n=1..n_max} n^(1-alpha); the single-step variation constant."""
    n = np.arange(1, n_max + 1, dtype=np.float64)
    return float(np.sum(n ** (1.0 - alpha)))
