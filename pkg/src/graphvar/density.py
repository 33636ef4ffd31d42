"""Labeled pattern densities, weighted limit distance, and its variation bound.

The density t(F; G) of a k-vertex pattern F in a host graph G is the
fraction of injective k-tuples of host vertices whose induced labeled graph
equals F exactly, edges and non-edges alike.  Stacking every pattern up to
a cutoff gives a density vector; a weighted l1 distance between density
vectors is the metric whose movement along a threshold ladder is bounded
here.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .graphs import AdjacencyGraph, num_pairs, pair_index, seed_list, sym_diff_count
from .process import EventLogPath
from .variation import stopping_ladder

DEFAULT_EXACT_BUDGET = 10**7
LEVEL_HARD_CAP = 6  # 2^C(7,2) pattern slots would be 2 million


# ---------------------------------------------------------------------------
# exact and Monte Carlo level counts

def _require_level(k: int, m: int) -> None:
    if k < 1:
        raise ValueError("pattern level must be at least 1")
    if k > m:
        raise ValueError(f"pattern level {k} exceeds host vertex count {m}")
    if k > LEVEL_HARD_CAP:
        raise ValueError(
            f"pattern level {k} has 2^{num_pairs(k)} pattern slots; "
            f"levels above {LEVEL_HARD_CAP} are not supported"
        )


def _exact_level_counts(host: AdjacencyGraph, k: int, budget: int) -> tuple[np.ndarray, int]:
    """Counts of injective ordered k-tuples per pattern bitmask, plus m^(k falling).

    Exhaustive: the outer loop walks ordered (k-2)-prefixes and the two tail
    coordinates are vectorized as an m x m grid.  Refuses when the tuple
    count m^(k falling) exceeds the budget.
    """
    m = host.n
    _require_level(k, m)
    denom = math.perm(m, k)
    if denom > budget:
        raise ValueError(
            f"exact count needs {denom} tuples at level {k} on {m} vertices, "
            f"over the budget of {budget}; use density_mc instead"
        )
    if k == 1:
        return np.array([denom], dtype=np.int64), denom

    a = host.to_matrix().astype(np.int64)
    n_slots = 1 << num_pairs(k)
    counts = np.zeros(n_slots, dtype=np.int64)
    last_bit = 1 << pair_index(k - 1, k, k)
    tail = a * last_bit  # codes[v, w] contribution of the pair of tail coordinates

    base_pairs = [
        (x, y, 1 << pair_index(x + 1, y + 1, k))
        for x in range(k - 2)
        for y in range(x + 1, k - 2)
    ]
    for prefix in itertools.permutations(range(m), k - 2):
        base = 0
        for x, y, bit in base_pairs:
            if a[prefix[x], prefix[y]]:
                base |= bit
        code3 = np.zeros(m, dtype=np.int64)
        code4 = np.zeros(m, dtype=np.int64)
        for x in range(k - 2):
            code3 += a[prefix[x]] << pair_index(x + 1, k - 1, k)
            code4 += a[prefix[x]] << pair_index(x + 1, k, k)
        codes = base + code3[:, None] + code4[None, :] + tail
        valid = ~np.eye(m, dtype=bool)
        for v in prefix:
            valid[v, :] = False
            valid[:, v] = False
        counts += np.bincount(codes[valid], minlength=n_slots)
    return counts, denom


def _mc_codes(host: AdjacencyGraph, k: int, n_samples: int, seed) -> np.ndarray:
    """Pattern bitmask of n_samples uniform injective ordered k-tuples."""
    m = host.n
    _require_level(k, m)
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    rows = np.empty((n_samples, k), dtype=np.int64)
    have = 0
    while have < n_samples:
        want = n_samples - have
        batch = rng.integers(0, m, size=(int(want * 1.4) + 16, k))
        srt = np.sort(batch, axis=1)
        distinct = np.all(srt[:, 1:] != srt[:, :-1], axis=1)
        good = batch[distinct][:want]
        rows[have : have + good.shape[0]] = good
        have += good.shape[0]
    a = host.to_matrix().astype(np.int64)
    codes = np.zeros(n_samples, dtype=np.int64)
    for x in range(k):
        for y in range(x + 1, k):
            codes += a[rows[:, x], rows[:, y]] << pair_index(x + 1, y + 1, k)
    return codes


def density_exact(
    pattern: AdjacencyGraph,
    host: AdjacencyGraph,
    budget: int = DEFAULT_EXACT_BUDGET,
) -> Fraction:
    """Exact pattern density as a rational number."""
    counts, denom = _exact_level_counts(host, pattern.n, budget)
    return Fraction(int(counts[pattern.bits]), denom)


def density_mc(
    pattern: AdjacencyGraph,
    host: AdjacencyGraph,
    n_samples: int = 100_000,
    seed=0,
) -> tuple[float, float]:
    """Monte Carlo pattern density: (estimate, binomial standard error)."""
    codes = _mc_codes(host, pattern.n, n_samples, seed)
    hits = int(np.count_nonzero(codes == pattern.bits))
    est = hits / n_samples
    return est, math.sqrt(est * (1.0 - est) / n_samples)


# ---------------------------------------------------------------------------
# density vectors

@dataclass(frozen=True)
class DensityLevel:
    """All pattern densities at one level, indexed by pattern bitmask."""

    n: int
    mode: str  # "exact" | "mc"
    t: tuple[float, ...]
    stderr: tuple[float, ...] | None
    counts: tuple[int, ...] | None = None
    denominator: int | None = None

    def __post_init__(self) -> None:
        if len(self.t) != 1 << num_pairs(self.n):
            raise ValueError("level vector has wrong number of pattern slots")
        if self.mode not in ("exact", "mc"):
            raise ValueError("level mode must be 'exact' or 'mc'")

    def fraction(self, bits: int) -> Fraction:
        if self.counts is None or self.denominator is None:
            raise ValueError("exact rationals only available for exact levels")
        return Fraction(self.counts[bits], self.denominator)


@dataclass(frozen=True)
class DensityVector:
    n_max: int
    levels: tuple[DensityLevel, ...]

    def __post_init__(self) -> None:
        if [lv.n for lv in self.levels] != list(range(1, self.n_max + 1)):
            raise ValueError("levels must cover 1..n_max in order")

    def level(self, n: int) -> DensityLevel:
        if not (1 <= n <= self.n_max):
            raise ValueError(f"no level {n} in vector with n_max={self.n_max}")
        return self.levels[n - 1]

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "levels": [
                {
                    "n": lv.n,
                    "mode": lv.mode,
                    "t": list(lv.t),
                    "stderr": None if lv.stderr is None else list(lv.stderr),
                }
                for lv in self.levels
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DensityVector":
        levels = tuple(
            DensityLevel(
                n=int(lv["n"]),
                mode=str(lv["mode"]),
                t=tuple(float(v) for v in lv["t"]),
                stderr=None
                if lv.get("stderr") is None
                else tuple(float(v) for v in lv["stderr"]),
            )
            for lv in d["levels"]
        )
        return cls(int(d["n_max"]), levels)


def save_density_vector(vec: DensityVector, file) -> None:
    with open(file, "w", encoding="ascii") as fh:
        json.dump(vec.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def load_density_vector(file) -> DensityVector:
    with open(file, "r", encoding="ascii") as fh:
        try:
            return DensityVector.from_dict(json.load(fh))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{file}: bad density vector: {exc}") from exc


def limit_vector(
    host: AdjacencyGraph,
    n_max: int = 3,
    mode: str = "auto",
    n_samples: int = 100_000,
    budget: int = DEFAULT_EXACT_BUDGET,
    seed=0,
) -> DensityVector:
    """Density vector of all patterns up to n_max.

    mode "exact" insists on exhaustive counts (and raises over budget),
    "mc" always samples, "auto" counts exhaustively exactly when the tuple
    count fits the budget.
    """
    if not (1 <= n_max <= LEVEL_HARD_CAP):
        raise ValueError(f"n_max must lie in [1, {LEVEL_HARD_CAP}]")
    if mode not in ("exact", "mc", "auto"):
        raise ValueError("mode must be 'exact', 'mc', or 'auto'")
    levels = []
    for k in range(1, n_max + 1):
        exact = mode == "exact" or (mode == "auto" and math.perm(host.n, k) <= budget)
        if exact:
            counts, denom = _exact_level_counts(host, k, budget)
            levels.append(
                DensityLevel(
                    n=k,
                    mode="exact",
                    t=tuple((counts / denom).tolist()),
                    stderr=None,
                    counts=tuple(int(c) for c in counts),
                    denominator=denom,
                )
            )
        else:
            codes = _mc_codes(host, k, n_samples, seed_list(seed) + [k])
            freq = np.bincount(codes, minlength=1 << num_pairs(k)) / n_samples
            se = np.sqrt(freq * (1.0 - freq) / n_samples)
            levels.append(
                DensityLevel(
                    n=k,
                    mode="mc",
                    t=tuple(freq.tolist()),
                    stderr=tuple(se.tolist()),
                )
            )
    return DensityVector(n_max, tuple(levels))


# ---------------------------------------------------------------------------
# level weights and the limit metric

@dataclass(frozen=True)
class WeightFunction:
    """Positive weight per pattern level, used to mix levels into one metric."""

    name: str
    fn: Callable[[int], float]

    def __call__(self, n: int) -> float:
        v = float(self.fn(n))
        if not (v > 0.0):
            raise ValueError(f"weight family {self.name!r} gives f({n}) = {v}")
        return v

    @classmethod
    def from_table(cls, table: dict[int, float], name: str = "table") -> "WeightFunction":
        frozen = dict(table)

        def fn(n: int) -> float:
            if n not in frozen:
                raise ValueError(f"weight table has no level {n}")
            return frozen[n]

        return cls(name, fn)


WEIGHT_FAMILIES = {
    "two_pow_neg_n": WeightFunction("two_pow_neg_n", lambda n: 2.0 ** (-n)),
    "two_pow_neg_nsq": WeightFunction("two_pow_neg_nsq", lambda n: 2.0 ** (-(n * n))),
}


def weight_family(name: str) -> WeightFunction:
    try:
        return WEIGHT_FAMILIES[name]
    except KeyError:
        raise ValueError(
            f"unknown weight family {name!r}; expected one of {sorted(WEIGHT_FAMILIES)}"
        ) from None


def limit_metric(a: DensityVector, b: DensityVector, weights: WeightFunction) -> float:
    """Weighted l1 distance: sum_n f(n) sum_F |t_a(F) - t_b(F)|."""
    if a.n_max != b.n_max:
        raise ValueError(f"density vectors disagree on n_max: {a.n_max} vs {b.n_max}")
    total = 0.0
    for la, lb in zip(a.levels, b.levels):
        ta = np.asarray(la.t)
        tb = np.asarray(lb.t)
        total += weights(la.n) * float(np.abs(ta - tb).sum())
    return total


def limit_metric_error_budget(
    a: DensityVector, b: DensityVector, weights: WeightFunction
) -> float:
    """One-sigma worst-case Monte Carlo allowance for limit_metric(a, b)."""
    if a.n_max != b.n_max:
        raise ValueError(f"density vectors disagree on n_max: {a.n_max} vs {b.n_max}")
    total = 0.0
    for la, lb in zip(a.levels, b.levels):
        for lv in (la, lb):
            if lv.stderr is not None:
                total += weights(la.n) * float(np.sum(lv.stderr))
    return total


def bound_constant(weights: WeightFunction, n_max: int) -> float:
    """sum_{n<=n_max} f(n) C(n,2) 2^C(n,2): per-unit-density movement ceiling."""
    return sum(
        weights(n) * num_pairs(n) * (1 << num_pairs(n)) for n in range(1, n_max + 1)
    )


@dataclass(frozen=True)
class WeightReport:
    """Ratio-test classification of the full bound series over all levels."""

    family: str
    probe_levels: tuple[int, ...]
    terms: tuple[float, ...]
    partial_sums: tuple[float, ...]
    ratios: tuple[float, ...]
    classification: str  # "convergent" | "divergent"
    tail_bound: float | None


def weight_admissibility(weights: WeightFunction, probe_max: int = 12) -> WeightReport:
    """Classify sum_n f(n) C(n,2) 2^C(n,2) by the terminal term ratio.

    A weight family is usable for the uniform movement bound exactly when
    this series converges; the report carries the probe terms, their partial
    sums, adjacent ratios, and a geometric tail estimate when convergent.
    """
    if probe_max < 4:
        raise ValueError("need probe_max >= 4 to classify")
    levels = tuple(range(1, probe_max + 1))
    terms = tuple(weights(n) * num_pairs(n) * float(2 ** num_pairs(n)) for n in levels)
    sums = tuple(itertools.accumulate(terms))
    ratios = tuple(
        terms[i + 1] / terms[i] for i in range(1, len(terms) - 1)  # skip the zero n=1 term
    )
    r = ratios[-1]
    if r < 1.0 and ratios[-1] <= ratios[-2]:
        classification = "convergent"
        tail = sums[-1] + terms[-1] * r / (1.0 - r)
    else:
        classification = "divergent"
        tail = None
    return WeightReport(
        family=weights.name,
        probe_levels=levels,
        terms=terms,
        partial_sums=sums,
        ratios=ratios,
        classification=classification,
        tail_bound=tail,
    )


# ---------------------------------------------------------------------------
# movement along a threshold ladder

@dataclass(frozen=True)
class LipschitzReport:
    pattern_n: int
    lhs: float
    rhs: float
    margin: float
    ok: bool
    mode: str
    allowance: float


def lipschitz_check(
    pattern: AdjacencyGraph,
    g: AdjacencyGraph,
    h: AdjacencyGraph,
    mode: str = "exact",
    n_samples: int = 100_000,
    budget: int = DEFAULT_EXACT_BUDGET,
    seed=0,
) -> LipschitzReport:
    """|t(F;g) - t(F;h)| <= C(k,2) * edit_density(g, h).

    Exact mode compares rationals, so the margin is exact and the check has
    zero tolerance; mc mode allows three combined standard errors.
    """
    if g.n != h.n:
        raise ValueError(f"host vertex counts differ: {g.n} vs {h.n}")
    k = pattern.n
    jd = Fraction(2 * sym_diff_count(g, h), g.n * (g.n - 1))
    rhs_exact = num_pairs(k) * jd
    if mode == "exact":
        lhs_exact = abs(density_exact(pattern, g, budget) - density_exact(pattern, h, budget))
        margin = rhs_exact - lhs_exact
        return LipschitzReport(
            pattern_n=k,
            lhs=float(lhs_exact),
            rhs=float(rhs_exact),
            margin=float(margin),
            ok=margin >= 0,
            mode="exact",
            allowance=0.0,
        )
    if mode != "mc":
        raise ValueError("mode must be 'exact' or 'mc'")
    ta, sa = density_mc(pattern, g, n_samples, seed_list(seed) + [0])
    tb, sb = density_mc(pattern, h, n_samples, seed_list(seed) + [1])
    lhs = abs(ta - tb)
    allowance = 3.0 * (sa + sb)
    return LipschitzReport(
        pattern_n=k,
        lhs=lhs,
        rhs=float(rhs_exact),
        margin=float(rhs_exact) - lhs,
        ok=lhs <= float(rhs_exact) + allowance,
        mode="mc",
        allowance=allowance,
    )


@dataclass(frozen=True)
class TotalVariationReport:
    """Realized movement of the density vector along one ladder vs its ceiling."""

    p: float
    n_p: int
    n_max: int
    family: str
    mode: str
    tv: float
    bound: float
    margin: float
    ok: bool
    allowance: float
    type_a_count: int
    per_segment: tuple[float, ...]


def total_variation_check(
    path: EventLogPath,
    p: float,
    n_max: int = 3,
    weights: WeightFunction | None = None,
    mode: str = "auto",
    n_samples: int = 100_000,
    budget: int = DEFAULT_EXACT_BUDGET,
    seed=0,
) -> TotalVariationReport:
    """Sum of limit-metric steps across ladder segments against p * n_p * S.

    S is bound_constant(weights, n_max).  Segments are the threshold
    crossings plus the capped final stretch to the horizon.  Exact density
    mode makes the comparison zero-tolerance; Monte Carlo levels add a
    three-sigma allowance from the accumulated binomial errors.
    """
    if weights is None:
        weights = WEIGHT_FAMILIES["two_pow_neg_nsq"]
    ladder = stopping_ladder(path, p)
    snapshots = list(ladder.anchors) + [ladder.final]
    vectors = [
        limit_vector(g, n_max, mode=_resolve_mode(mode, g.n, n_max, budget),
                     n_samples=n_samples, budget=budget, seed=seed_list(seed) + [idx])
        for idx, g in enumerate(snapshots)
    ]
    steps = []
    allowance = 0.0
    for prev, cur in zip(vectors, vectors[1:]):
        steps.append(limit_metric(prev, cur, weights))
        allowance += 3.0 * limit_metric_error_budget(prev, cur, weights)
    tv = float(sum(steps))
    bound = p * ladder.n_p * bound_constant(weights, n_max)
    return TotalVariationReport(
        p=p,
        n_p=ladder.n_p,
        n_max=n_max,
        family=weights.name,
        mode=vectors[0].levels[-1].mode if vectors else "exact",
        tv=tv,
        bound=bound,
        margin=bound - tv,
        ok=tv <= bound + allowance,
        allowance=allowance,
        type_a_count=ladder.type_a_count,
        per_segment=tuple(steps),
    )


def _resolve_mode(mode: str, m: int, n_max: int, budget: int) -> str:
    if mode == "auto":
        return "exact" if math.perm(m, n_max) <= budget else "mc"
    return mode


@dataclass(frozen=True)
class PatternVariationReport:
    """Movement of a single pattern's density along one ladder."""

    pattern_n: int
    p: float
    n_p: int
    tv: float
    bound: float
    ok: bool
    per_segment: tuple[float, ...]


def finite_dim_variation(
    path: EventLogPath,
    pattern: AdjacencyGraph,
    p: float,
    budget: int = DEFAULT_EXACT_BUDGET,
) -> PatternVariationReport:
    """Exact single-pattern density variation vs p * n_p * C(k,2)."""
    ladder = stopping_ladder(path, p)
    snapshots = list(ladder.anchors) + [ladder.final]
    ts = [density_exact(pattern, g, budget) for g in snapshots]
    steps = [abs(b - a) for a, b in zip(ts, ts[1:])]
    tv = float(sum(steps))
    bound = p * ladder.n_p * num_pairs(pattern.n)
    return PatternVariationReport(
        pattern_n=pattern.n,
        p=p,
        n_p=ladder.n_p,
        tv=tv,
        bound=bound,
        ok=tv <= bound,
        per_segment=tuple(float(s) for s in steps),
    )
