"""Threshold-crossing ladders and permutation-averaged power variation.

For a path and a density threshold p, the ladder records the successive
times at which the edit density since the previous anchor first reaches p.
Everything downstream — crossing-count profiles, the per-edge jump lower
bound, the halving diagnostic, and the alpha-power variation sums — is a
function of the ladder's anchor graphs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import AdjacencyGraph, density_quantum, num_pairs, pair_endpoints, seed_list
from .metrics import EXACT_PERM_LIMIT, partial_zeta
from .process import EventLogPath, jump_counts


@dataclass(frozen=True)
class StoppingLadder:
    """Anchor times and graphs for one density threshold p.

    taus[0] = 0 and taus[k] is the k-th crossing time; the count n_p is
    len(taus), i.e. one more than the number of crossings inside the horizon,
    and the (unobserved) next crossing is treated as infinite.  `final` is
    the path value at the horizon, closing the last, possibly sub-threshold
    segment.
    """

    p: float
    horizon: float
    taus: tuple[float, ...]
    anchors: tuple[AdjacencyGraph, ...]
    final: AdjacencyGraph
    step_densities: tuple[float, ...]
    final_density: float
    type_a: tuple[bool, ...]

    @property
    def n_p(self) -> int:
        return len(self.taus)

    @property
    def next_tau(self) -> float:
        """The first crossing beyond the horizon, by convention infinite."""
        return math.inf

    @property
    def type_a_count(self) -> int:
        return sum(self.type_a)

    def segments(self) -> list[tuple[AdjacencyGraph, AdjacencyGraph]]:
        """(start, end) anchor pairs: the crossings plus the capped tail."""
        out = list(zip(self.anchors, self.anchors[1:]))
        out.append((self.anchors[-1], self.final))
        return out

    def segment_densities(self) -> tuple[float, ...]:
        return self.step_densities + (self.final_density,)


def stopping_ladder(path: EventLogPath, p: float) -> StoppingLadder:
    """Scan the event log once, anchoring whenever the edit density reaches p.

    Simultaneous events are applied as one batch before the density is
    checked, so a rung can overshoot p; the rung is tagged type-A when the
    batch itself was large enough (>= p * C(n,2) events) to cross alone.
    Thresholds below the density quantum 2/(n(n-1)) cannot be resolved and
    are rejected.
    """
    if not (0.0 < p < 1.0):
        raise ValueError("threshold p must lie strictly between 0 and 1")
    n = path.n
    quantum = density_quantum(n)
    if p < quantum:
        raise ValueError(
            f"threshold p={p} is below the density quantum {quantum:.3g} "
            f"at n={n}; crossings are not resolvable"
        )
    npairs = num_pairs(n)
    cross_at = p * npairs  # disagreement count scale: J = diff / C(n,2)

    state = bytearray(path.initial.to_pair_vector().astype(np.uint8).tobytes())
    anchor = bytearray(state)
    diff = 0

    times = path.times.tolist()
    pids = path.pair_ids.tolist()
    vals = path.values.tolist()
    e = len(times)

    taus = [0.0]
    anchors = [path.initial]
    step_densities: list[float] = []
    type_a: list[bool] = []
    batch = 0

    for k in range(e):
        ev = pids[k]
        diff += 1 if state[ev] == anchor[ev] else -1
        state[ev] = vals[k]
        batch += 1
        if k + 1 < e and times[k + 1] == times[k]:
            continue  # same-timestamp batch continues
        if diff >= cross_at:
            taus.append(times[k])
            anchors.append(_graph_from_state(n, state))
            step_densities.append(diff / npairs)
            type_a.append(batch >= cross_at)
            anchor = bytearray(state)
            diff = 0
        batch = 0

    final = _graph_from_state(n, state)
    return StoppingLadder(
        p=p,
        horizon=path.horizon,
        taus=tuple(taus),
        anchors=tuple(anchors),
        final=final,
        step_densities=tuple(step_densities),
        final_density=diff / npairs,
        type_a=tuple(type_a),
    )


def _graph_from_state(n: int, state: bytearray) -> AdjacencyGraph:
    vec = np.frombuffer(bytes(state), dtype=np.uint8).astype(bool)
    return AdjacencyGraph.from_pair_vector(n, vec)


@dataclass(frozen=True)
class LadderRow:
    p: float
    n_p: int
    product: float
    type_a_count: int


@dataclass(frozen=True)
class LadderProfile:
    """Crossing counts across a threshold grid, sub-quantum entries skipped."""

    n: int
    rows: tuple[LadderRow, ...]
    skipped: tuple[float, ...]
    ladders: tuple[StoppingLadder, ...]

    @property
    def sup_product(self) -> float:
        return max((r.product for r in self.rows), default=0.0)


def np_profile(path: EventLogPath, ps: Sequence[float]) -> LadderProfile:
    """Ladder per grid value; p below the density quantum is recorded as skipped."""
    if not ps:
        raise ValueError("threshold grid must be nonempty")
    quantum = density_quantum(path.n)
    rows, ladders, skipped = [], [], []
    for p in ps:
        if p < quantum:
            skipped.append(p)
            continue
        lad = stopping_ladder(path, p)
        ladders.append(lad)
        rows.append(LadderRow(p, lad.n_p, p * lad.n_p, lad.type_a_count))
    return LadderProfile(path.n, tuple(rows), tuple(skipped), tuple(ladders))


@dataclass(frozen=True)
class JumpBoundReport:
    """Observed max per-edge jump count against the ladder lower bound."""

    n: int
    max_jumps: int
    sup_product: float
    lower_bound: float
    quantum: float
    margin: float
    ok: bool
    rows: tuple[LadderRow, ...]
    skipped: tuple[float, ...]


def jump_bound_check(path: EventLogPath, ps: Sequence[float]) -> JumpBoundReport:
    """Check max_e j(e) >= sup_grid p * n_p - 1, up to one density quantum."""
    profile = np_profile(path, ps)
    max_jumps = jump_counts(path).max_jumps
    sup = profile.sup_product
    quantum = density_quantum(path.n)
    margin = max_jumps - (sup - 1.0)
    return JumpBoundReport(
        n=path.n,
        max_jumps=max_jumps,
        sup_product=sup,
        lower_bound=sup - 1.0,
        quantum=quantum,
        margin=margin,
        ok=margin >= -quantum,
        rows=profile.rows,
        skipped=profile.skipped,
    )


@dataclass(frozen=True)
class DyadicDiagnostic:
    """a_k = p_k (n_{p_k} - 1) along the halving grid p_k = p0 / 2^k.

    Exactly increasing in the limit; at one fixed path each halving may lose
    at most one threshold's worth, so a_{k+1} >= a_k - p_{k+1} always, and
    raw decreases should be rare.
    """

    p0: float
    ps: tuple[float, ...]
    a_values: tuple[float, ...]
    slack_ok: tuple[bool, ...]
    raw_increase: tuple[bool, ...]

    @property
    def slack_violations(self) -> int:
        return sum(not v for v in self.slack_ok)

    @property
    def raw_violations(self) -> int:
        return sum(not v for v in self.raw_increase)

    @property
    def limit_estimate(self) -> float:
        return self.a_values[-1]


def dyadic_diagnostic(path: EventLogPath, p0: float, k_max: int) -> DyadicDiagnostic:
    """Halving diagnostic; refuses grids that descend below the density quantum."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    ps = tuple(p0 * 0.5**k for k in range(k_max + 1))
    quantum = density_quantum(path.n)
    if ps[-1] < quantum:
        raise ValueError(
            f"halving grid reaches p={ps[-1]:.3g} below the density quantum "
            f"{quantum:.3g} at n={path.n}; reduce k_max"
        )
    a = []
    for p in ps:
        lad = stopping_ladder(path, p)
        a.append(p * (lad.n_p - 1))
    slack_ok = tuple(a[k + 1] >= a[k] - ps[k + 1] for k in range(k_max))
    raw = tuple(a[k + 1] >= a[k] for k in range(k_max))
    return DyadicDiagnostic(p0, ps, tuple(a), slack_ok, raw)


# ---------------------------------------------------------------------------
# permutation-averaged power variation

def _perm_positions(n: int, k_perm: int, seed) -> tuple[np.ndarray, bool]:
    """Rows of inverse-position vectors: row r maps a vertex (0-indexed) to its
    position under the r-th relabeling.  Exhaustive when n! is small."""
    if math.factorial(n) <= EXACT_PERM_LIMIT:
        perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
        return np.argsort(perms, axis=1), True
    if k_perm < 2:
        raise ValueError("need at least 2 sampled relabelings")
    rng = np.random.default_rng(seed)
    inv = np.empty((k_perm, n), dtype=np.int64)
    for r in range(k_perm):
        inv[r] = np.argsort(rng.permutation(n))
    return inv, False


def _segment_distances(
    ladder: StoppingLadder, n: int, inv: np.ndarray, windows: Sequence[int]
) -> dict[int, np.ndarray]:
    """window -> (segments, relabelings) matrix of prefix distances.

    For a relabeling with inverse positions `inv[r]`, the distance between the
    relabeled segment endpoints, both projected onto the first M vertices, is
    1 / min over disagreeing pairs mapped inside the window of the larger
    mapped position (0-indexed), and 0 when no disagreement lands inside.
    """
    segs = ladder.segments()
    k = inv.shape[0]
    out = {m: np.zeros((len(segs), k)) for m in windows}
    ii, jj = pair_endpoints(n)
    for s, (ga, gb) in enumerate(segs):
        diff_bits = ga.bits ^ gb.bits
        if diff_bits == 0:
            continue
        vec = AdjacencyGraph(n, diff_bits).to_pair_vector()
        idx = np.flatnonzero(vec)
        mx = np.maximum(inv[:, ii[idx]], inv[:, jj[idx]])  # (k, n_diff)
        for m in windows:
            inside = np.where(mx <= m - 1, mx, n)
            mn = inside.min(axis=1)
            out[m][s] = np.where(mn < n, 1.0 / np.maximum(mn, 1), 0.0)
    return out


@dataclass(frozen=True)
class VariationCell:
    p: float
    window: int
    alpha: float
    value: float
    stderr: float
    n_p: int
    exact: bool


@dataclass(frozen=True)
class VariationGrid:
    """Permutation-averaged alpha-power variation across (p, window, alpha)."""

    n: int
    ps: tuple[float, ...]
    windows: tuple[int, ...]
    alphas: tuple[float, ...]
    k_perm: int
    cells: tuple[VariationCell, ...]
    rows: tuple[LadderRow, ...]
    skipped: tuple[float, ...]

    def cell(self, p: float, window: int, alpha: float) -> VariationCell:
        for c in self.cells:
            if c.p == p and c.window == window and c.alpha == alpha:
                return c
        raise KeyError(f"no cell for (p={p}, window={window}, alpha={alpha})")

    def window_profile(self, p: float, alpha: float) -> list[VariationCell]:
        return [c for c in self.cells if c.p == p and c.alpha == alpha]

    def converged_value(
        self, p: float, alpha: float, rel_tol: float = 1e-2
    ) -> tuple[float, bool, float]:
        """Estimate at the largest window plus a last-step relative delta check."""
        prof = self.window_profile(p, alpha)
        if len(prof) < 2:
            return (prof[-1].value if prof else math.nan, False, math.inf)
        last, prev = prof[-1], prof[-2]
        delta = abs(last.value - prev.value) / max(abs(last.value), 1e-300)
        return last.value, delta <= rel_tol, delta


def default_windows(n: int) -> tuple[int, ...]:
    """Quarter, half, and full truncation, clipped to at least 2 vertices."""
    return tuple(sorted({max(2, n // 4), max(2, n // 2), n}))


def variation_grid(
    path: EventLogPath,
    ps: Sequence[float],
    windows: Sequence[int] | None = None,
    alphas: Sequence[float] = (2.5, 3.0),
    k_perm: int = 200,
    seed=0,
) -> VariationGrid:
    """Sum of prefix distances to the alpha over ladder segments, averaged over
    vertex relabelings, for every (threshold, window, alpha) grid cell.

    The sum runs over the crossing segments plus the capped final segment.
    One shared batch of relabelings per threshold serves all windows and
    alphas, so cells within a threshold are statistically coupled but
    consistent.  Relabelings are exhaustive for small vertex counts.
    """
    n = path.n
    if windows is None:
        windows = default_windows(n)
    windows = tuple(windows)
    if not windows or list(windows) != sorted(set(windows)):
        raise ValueError("windows must be nonempty and strictly increasing")
    if windows[0] < 2 or windows[-1] > n:
        raise ValueError("windows must lie in [2, n]")
    alphas = tuple(alphas)
    if not alphas or any(a <= 0 for a in alphas):
        raise ValueError("alpha values must be positive")

    profile = np_profile(path, ps)
    cells: list[VariationCell] = []
    for lad in profile.ladders:
        inv, exact = _perm_positions(n, k_perm, seed_list(seed) + [_seed_token(lad.p)])
        dists = _segment_distances(lad, n, inv, windows)
        kk = inv.shape[0]
        for m in windows:
            d = dists[m]  # (segments, kk)
            for a in alphas:
                per_sigma = (d**a).sum(axis=0)
                value = float(per_sigma.mean())
                stderr = (
                    0.0
                    if exact
                    else float(np.std(per_sigma, ddof=1) / math.sqrt(kk))
                )
                cells.append(
                    VariationCell(lad.p, m, a, value, stderr, lad.n_p, exact)
                )
    return VariationGrid(
        n=n,
        ps=tuple(ps),
        windows=windows,
        alphas=alphas,
        k_perm=k_perm,
        cells=tuple(cells),
        rows=profile.rows,
        skipped=profile.skipped,
    )


def _seed_token(p: float) -> int:
    """Stable nonnegative integer derived from a float grid value."""
    return int.from_bytes(np.float64(p).tobytes(), "little")


def alpha_variation(
    path: EventLogPath,
    p: float,
    alpha: float,
    window: int | None = None,
    k_perm: int = 200,
    seed=0,
) -> VariationCell:
    """Single-cell convenience wrapper around variation_grid."""
    window = path.n if window is None else window
    grid = variation_grid(path, [p], [window], [alpha], k_perm, seed)
    return grid.cell(p, window, alpha)


# ---------------------------------------------------------------------------
# the variation upper bound

@dataclass(frozen=True)
class StepBound:
    p: float
    alpha: float
    step: int
    lhs: float
    stderr: float
    step_density: float
    rhs: float
    ok: bool


@dataclass(frozen=True)
class VariationBound:
    p: float
    alpha: float
    lhs: float
    stderr: float
    constant: float
    sup_product: float
    rhs: float
    ok: bool
    steps: tuple[StepBound, ...]

    @property
    def steps_ok(self) -> bool:
        return all(s.ok for s in self.steps)


@dataclass(frozen=True)
class VariationBoundReport:
    n: int
    k_perm: int
    rows: tuple[VariationBound, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok and r.steps_ok for r in self.rows)


def variation_bound_check(
    path: EventLogPath,
    ps: Sequence[float],
    alphas: Sequence[float] = (2.5, 3.0),
    k_perm: int = 200,
    seed=0,
    grid_for_sup: Sequence[float] | None = None,
) -> VariationBoundReport:
    """Permutation-averaged variation against its closed-form ceiling.

    Per segment: the relabeling average of the full-window prefix distance to
    the alpha is at most the segment's edit density times
    C_n(alpha) = sum_{m=1..n} m^(1-alpha); requires alpha > 2 so the constant
    stays bounded in n.  Aggregate: the variation sum is at most
    C_n(alpha) * sup over the threshold grid of p * n_p.  Monte Carlo rows
    get a 3-standard-error allowance.
    """
    alphas = tuple(alphas)
    if any(a <= 2.0 for a in alphas):
        raise ValueError("the variation bound needs alpha > 2")
    n = path.n
    sup_profile = np_profile(path, list(grid_for_sup) if grid_for_sup else list(ps))
    sup = sup_profile.sup_product

    rows: list[VariationBound] = []
    for p in ps:
        lad = stopping_ladder(path, p)
        inv, exact = _perm_positions(n, k_perm, seed_list(seed) + [_seed_token(p)])
        dists = _segment_distances(lad, n, inv, [n])[n]  # (segments, kk)
        kk = inv.shape[0]
        dens = lad.segment_densities()
        for a in alphas:
            const = partial_zeta(a, n)
            powed = dists**a
            steps = []
            for s in range(powed.shape[0]):
                lhs = float(powed[s].mean())
                se = 0.0 if exact else float(np.std(powed[s], ddof=1) / math.sqrt(kk))
                rhs = dens[s] * const
                steps.append(
                    StepBound(p, a, s + 1, lhs, se, dens[s], rhs, lhs <= rhs + 3 * se)
                )
            per_sigma = powed.sum(axis=0)
            lhs = float(per_sigma.mean())
            se = 0.0 if exact else float(np.std(per_sigma, ddof=1) / math.sqrt(kk))
            rhs = const * sup
            rows.append(
                VariationBound(
                    p=p,
                    alpha=a,
                    lhs=lhs,
                    stderr=se,
                    constant=const,
                    sup_product=sup,
                    rhs=rhs,
                    ok=lhs <= rhs + 3 * se,
                    steps=tuple(steps),
                )
            )
    return VariationBoundReport(n=n, k_perm=k_perm, rows=tuple(rows))
