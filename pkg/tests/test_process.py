import math

import numpy as np
import pytest

from graphvar.graphs import (
    AdjacencyGraph,
    InjectiveMap,
    apply_map,
    num_pairs,
    restrict,
)
from graphvar.process import (
    EdgeEvent,
    EventLogPath,
    PiecewiseRate,
    StepGraphon,
    exchangeability_check,
    jump_counts,
    load_path,
    path_statistic,
    relabel_path,
    restrict_path,
    save_path,
    simulate,
    simulate_edge_flip,
    simulate_graphon_jump,
    snapshot,
)


def replay(path, t):
    """Reference snapshot: walk the event list with a plain edge dict."""
    state = {(i, j): True for i, j in path.initial.edges()}
    for ev in path.events():
        if ev.time > t:
            break
        if ev.new_value:
            state[(ev.i, ev.j)] = True
        else:
            state.pop((ev.i, ev.j), None)
    return AdjacencyGraph.from_edges(path.n, state.keys())


# ---------------------------------------------------------------------------
# rate and graphon plumbing


def test_piecewise_rate_validation():
    with pytest.raises(ValueError):
        PiecewiseRate((0.0, 0.5), (1.0,))
    with pytest.raises(ValueError):
        PiecewiseRate((0.1,), (1.0,))
    with pytest.raises(ValueError):
        PiecewiseRate((0.0, 0.5, 0.5), (1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        PiecewiseRate((0.0,), (-1.0,))


def test_piecewise_rate_pieces_clip_to_horizon():
    r = PiecewiseRate((0.0, 0.5, 2.0), (1.0, 3.0, 9.0))
    assert r.pieces(1.0) == [(0.0, 0.5, 1.0), (0.5, 1.0, 3.0)]
    assert r.pieces(0.25) == [(0.0, 0.25, 1.0)]
    assert PiecewiseRate.constant(2.0).pieces(1.0) == [(0.0, 1.0, 2.0)]


def test_step_graphon_validation():
    with pytest.raises(ValueError):
        StepGraphon(np.array([[0.1, 0.9], [0.2, 0.1]]))  # not symmetric
    with pytest.raises(ValueError):
        StepGraphon(np.array([[1.5]]))
    with pytest.raises(ValueError):
        StepGraphon(np.zeros(3))


def test_step_graphon_cell_lookup():
    g = StepGraphon(np.array([[0.1, 0.7], [0.7, 0.3]]))
    u = np.array([0.2, 0.9, 0.999])  # cells 0, 1, 1
    ii = np.array([0, 0, 1])
    jj = np.array([1, 2, 2])
    assert g.edge_probabilities(u, ii, jj).tolist() == [0.7, 0.7, 0.3]
    # u = 1.0 must clip into the last cell instead of overflowing
    top = StepGraphon.constant(0.4)
    assert top.edge_probabilities(np.array([1.0]), np.array([0]), np.array([0]))[0] == 0.4


# ---------------------------------------------------------------------------
# event-flip generator


def test_simulate_determinism():
    a = simulate_edge_flip(24, 2.0, seed=5)
    b = simulate_edge_flip(24, 2.0, seed=5)
    c = simulate_edge_flip(24, 2.0, seed=6)
    assert a == b
    assert a != c
    a.validate()


def test_event_count_matches_poisson_mean():
    # every pair flips at rate 2 over a unit horizon: total events are
    # Poisson with mean 2 * C(64,2)
    path = simulate_edge_flip(64, 2.0, seed=11)
    mean = 2.0 * num_pairs(64)
    assert abs(path.event_count - mean) <= 4 * math.sqrt(mean)


def test_endpoint_disagreement_rate():
    # a rate-r flip clock disagrees with its start state with probability
    # (1 - exp(-2 r)) / 2 at the horizon
    path = simulate_edge_flip(64, 1.0, seed=12)
    first = snapshot(path, 0.0)
    last = snapshot(path, 1.0)
    q = (1.0 - math.exp(-2.0)) / 2.0
    frac = (first.bits ^ last.bits).bit_count() / num_pairs(64)
    assert abs(frac - q) <= 4 * math.sqrt(q * (1 - q) / num_pairs(64))


def test_piecewise_rate_event_split():
    # rate 2 before t=0.5 and 6 after: a quarter of events land in the
    # first half and the total mean is 4 per pair
    rate = PiecewiseRate((0.0, 0.5), (2.0, 6.0))
    path = simulate_edge_flip(48, rate, seed=13)
    mean = 4.0 * num_pairs(48)
    assert abs(path.event_count - mean) <= 4 * math.sqrt(mean)
    early = float(np.mean(path.times < 0.5))
    assert abs(early - 0.25) <= 4 * math.sqrt(0.25 * 0.75 / path.event_count)


def test_boosted_edge_gets_extra_flips():
    path = simulate_edge_flip(16, 1.0, seed=14, boost_edge=(1, 2), boost_factor=40.0)
    jc = jump_counts(path)
    assert jc.get(1, 2) > 10  # mean 40 flips
    assert jc.get(2, 1) == jc.get(1, 2)
    others = [jc.get(i, j) for i in range(1, 17) for j in range(i + 1, 17)
              if (i, j) != (1, 2)]
    assert max(others) < jc.get(1, 2)
    assert path.model_meta["params"]["boost_edge"] == [1, 2]


def test_snapshot_matches_replay():
    path = simulate_edge_flip(12, 3.0, seed=15)
    for t in (0.0, 0.1, 0.25, 0.5, 0.77, 1.0):
        assert snapshot(path, t) == replay(path, t)
    with pytest.raises(ValueError):
        snapshot(path, 1.5)


def test_snapshot_right_continuous():
    ev = [EdgeEvent(0.5, 1, 2, 1)]
    path = EventLogPath.from_events(3, 1.0, AdjacencyGraph.empty(3), ev)
    assert snapshot(path, 0.5).has_edge(1, 2)
    assert not snapshot(path, np.nextafter(0.5, 0.0)).has_edge(1, 2)


def test_jump_counts_totals():
    path = simulate_edge_flip(20, 2.0, seed=16)
    jc = jump_counts(path)
    assert jc.counts.sum() == path.event_count
    assert jc.max_jumps >= jc.mean_jumps


# ---------------------------------------------------------------------------
# structural validation


def build(n, events, init=None, horizon=1.0):
    return EventLogPath.from_events(n, horizon, init or AdjacencyGraph.empty(n), events)


def test_from_events_sorts():
    path = build(4, [EdgeEvent(0.7, 1, 2, 1), EdgeEvent(0.3, 3, 4, 1)])
    assert path.times.tolist() == [0.3, 0.7]
    assert path.edge_i.tolist() == [3, 1]


def test_validate_rejects_time_outside_horizon():
    with pytest.raises(ValueError, match="horizon|time"):
        build(3, [EdgeEvent(1.5, 1, 2, 1)])
    with pytest.raises(ValueError, match="horizon|time"):
        build(3, [EdgeEvent(0.0, 1, 2, 1)])


def test_validate_rejects_bad_endpoints():
    with pytest.raises(ValueError):
        build(3, [EdgeEvent(0.5, 2, 2, 1)])
    with pytest.raises(ValueError):
        build(3, [EdgeEvent(0.5, 3, 1, 1)])
    with pytest.raises(ValueError):
        build(3, [EdgeEvent(0.5, 1, 4, 1)])


def test_validate_rejects_duplicate_event_key():
    with pytest.raises(ValueError):
        build(3, [EdgeEvent(0.5, 1, 2, 1), EdgeEvent(0.5, 1, 2, 0)])


def test_validate_rejects_non_alternating_edge():
    # edge starts absent; two consecutive "on" writes are not genuine jumps
    with pytest.raises(ValueError, match="alternat|jump"):
        build(3, [EdgeEvent(0.2, 1, 2, 1), EdgeEvent(0.6, 1, 2, 1)])
    # first write must change the initial state
    with pytest.raises(ValueError, match="alternat|jump"):
        build(3, [EdgeEvent(0.2, 1, 2, 0)])
    # and a genuine toggle chain passes
    build(3, [EdgeEvent(0.2, 1, 2, 1), EdgeEvent(0.6, 1, 2, 0), EdgeEvent(0.9, 1, 2, 1)])


def test_validate_rejects_bad_value():
    with pytest.raises(ValueError):
        build(3, [EdgeEvent(0.5, 1, 2, 2)])


# ---------------------------------------------------------------------------
# graphon-jump generator


def test_graphon_jump_batches_share_timestamps():
    path = simulate_graphon_jump(
        24, [StepGraphon.constant(0.5), StepGraphon.constant(0.5)], 4.0, seed=17
    )
    path.validate()
    ticks = np.unique(path.times)
    # plenty of edges move at each tick, all stamped with the tick time
    assert path.event_count > 3 * len(ticks)


def test_graphon_jump_empty_refresh_clears_graph():
    # tick 1 redraws from the all-zero graphon: the graph empties exactly there
    path = simulate_graphon_jump(
        16, [StepGraphon.constant(0.6), StepGraphon.constant(0.0)], 3.0, seed=18
    )
    assert snapshot(path, 0.0).edge_count > 0
    ticks = np.unique(path.times)
    assert len(ticks) >= 1
    assert snapshot(path, float(ticks[0])).edge_count == 0


def test_graphon_jump_block_structure():
    # two-block graphon with empty diagonal blocks: edges only run between
    # low and high latent cells, never inside a cell
    g = StepGraphon(np.array([[0.0, 1.0], [1.0, 0.0]]))
    path = simulate_graphon_jump(30, [g], 0.0, seed=19)
    assert path.event_count == 0
    mat = snapshot(path, 0.0).to_matrix()
    u = np.asarray(path.model_meta["params"]["latents"])
    cells = (u >= 0.5).astype(int)
    same = cells[:, None] == cells[None, :]
    assert not mat[same].any()
    cross = ~same
    np.fill_diagonal(cross, False)
    assert mat[cross].all()


def test_simulate_dispatch():
    a = simulate("edge-flip", 10, 1.0, 3, {"rate": 2.0})
    assert a == simulate_edge_flip(10, 2.0, seed=3)
    b = simulate("edge-flip-planted", 10, 1.0, 3, {"rate": 2.0, "boost_factor": 5.0})
    assert b.model_meta["params"]["boost_factor"] == 5.0
    c = simulate("graphon-jump", 10, 1.0, 3, {"grids": [[[0.4]]], "global_rate": 2.0})
    assert c.model_meta["model"] == "graphon-jump"
    with pytest.raises(ValueError, match="unknown model"):
        simulate("nope", 10, 1.0, 3, {})


# ---------------------------------------------------------------------------
# relabeling and windows


def test_relabel_path_tracks_all_snapshots():
    path = simulate_edge_flip(10, 2.0, seed=20)
    perm = [3, 1, 4, 2, 10, 9, 5, 6, 8, 7]
    moved = relabel_path(path, perm)
    moved.validate()
    phi = InjectiveMap(tuple(perm))
    for t in (0.0, 0.33, 0.8, 1.0):
        assert snapshot(moved, t) == apply_map(snapshot(path, t), phi)
    # the identity relabeling changes nothing but the bookkeeping flag
    same = relabel_path(path, list(range(1, 11)))
    assert same.initial == path.initial
    assert np.array_equal(same.times, path.times)
    assert np.array_equal(same.edge_i, path.edge_i)
    assert np.array_equal(same.edge_j, path.edge_j)
    assert same.model_meta["relabeled"] is True
    with pytest.raises(ValueError):
        relabel_path(path, [1, 1, 3, 4, 5, 6, 7, 8, 9, 10])


def test_relabel_preserves_jump_multiset():
    path = simulate_edge_flip(10, 2.0, seed=21)
    moved = relabel_path(path, [10, 9, 8, 7, 6, 5, 4, 3, 2, 1])
    assert sorted(jump_counts(path).counts) == sorted(jump_counts(moved).counts)
    assert moved.event_count == path.event_count


def test_restrict_path_commutes_with_snapshot():
    path = simulate_edge_flip(12, 2.0, seed=22)
    sub = restrict_path(path, 5)
    sub.validate()
    assert sub.n == 5
    assert int(sub.edge_j.max(initial=0)) <= 5
    for t in (0.0, 0.4, 1.0):
        assert snapshot(sub, t) == restrict(snapshot(path, t), 5)
    with pytest.raises(ValueError):
        restrict_path(path, 0)


# ---------------------------------------------------------------------------
# persistence


def test_save_load_roundtrip(tmp_path):
    path = simulate_edge_flip(14, 2.0, seed=23)
    f = tmp_path / "p.jsonl"
    save_path(path, f)
    again = load_path(f)
    assert again == path
    assert again.model_meta["model"] == "edge-flip"
    # byte-for-byte stable on re-save
    g = tmp_path / "q.jsonl"
    save_path(again, g)
    assert f.read_bytes() == g.read_bytes()


def test_load_path_error_lines(tmp_path):
    f = tmp_path / "bad.jsonl"
    f.write_text("")
    with pytest.raises(ValueError, match="empty path"):
        load_path(f)
    f.write_text('{"type": "header", "n": 3, "horizon": 1.0}\nnot json\n')
    with pytest.raises(ValueError, match="line 2"):
        load_path(f)
    f.write_text(
        '{"type": "header", "n": 3, "horizon": 1.0}\n'
        '{"type": "init", "edges": []}\n'
        '{"type": "ev", "t": 0.5, "i": 3, "j": 1, "v": 1}\n'
    )
    with pytest.raises(ValueError, match="line 3"):
        load_path(f)


# ---------------------------------------------------------------------------
# statistics and the relabeling KS diagnostic


def test_path_statistic_values():
    ev = [EdgeEvent(0.2, 1, 2, 1), EdgeEvent(0.7, 1, 3, 1)]
    path = build(4, ev)
    assert path_statistic(path, "total-jumps") == 2.0
    assert path_statistic(path, "edge-density-at-1") == pytest.approx(2 * 2 / 12)
    assert path_statistic(path, "Np-at-p", p=0.2) >= 1.0
    with pytest.raises(ValueError, match="unknown statistic"):
        path_statistic(path, "nope")


def test_exchangeability_check_needs_enough_seeds():
    with pytest.raises(ValueError, match="seed"):
        exchangeability_check("edge-flip", {"rate": 1.0}, 8, seed_count=5)


def test_exchangeable_model_passes_ks():
    rep = exchangeability_check(
        "edge-flip", {"rate": 2.0}, 16, seed_count=30, statistic="total-jumps",
        seed=24, window=8,
    )
    assert rep.p_value > 0.01
    assert rep.seed_count == 30
    assert 0.0 <= rep.ks_statistic <= 1.0


def test_planted_model_fails_ks():
    rep = exchangeability_check(
        "edge-flip-planted",
        {"rate": 1.0, "boost_edge": (1, 2), "boost_factor": 40.0},
        16,
        seed_count=30,
        statistic="total-jumps",
        seed=25,
        window=8,
    )
    assert rep.p_value < 0.01
