"""End-to-end protocol checks.

Two independent oracles anchor this module: exact enumeration of the
extraction step (every error pattern times every boundary outcome, summed
with their true weights) and exact enumeration of the rebuild indicator over
all per-edge class combinations (the residual error is outcome-independent,
so the indicator is deterministic and the success probability is a finite
sum).  Monte Carlo estimates must land inside their own confidence interval
around those sums.
"""

import itertools

import pytest

from graphpurify.errors import ParameterError
from graphpurify.graphs import Graph, cycle_graph, grid_graph, parse_family, path_graph, star_graph
from graphpurify.pairs import distill_trace, from_z_noise
from graphpurify.pattern import PatternState, measure_z
from graphpurify.protocol import (
    CHUNK_SHOTS,
    ExtractionPlan,
    n_geo_formula,
    plan_extraction,
    rate_report,
    run_drpp,
    threshold_scan,
)
from graphpurify.protocol import _rebuild  # white-box: rebuild indicator
from graphpurify.rng import derive_rng
from graphpurify.thermal import P_STAR


def _closed(g: Graph, u: int, v: int) -> int:
    return (1 << u) | (1 << v) | g.adj[u] | g.adj[v]


def _compatible(g: Graph, e1, e2) -> bool:
    # written from scratch: neither pair may sit inside the other's closed
    # neighborhood, else a boundary measurement would hit a kept qubit
    b1 = (1 << e1[0]) | (1 << e1[1])
    b2 = (1 << e2[0]) | (1 << e2[1])
    return _closed(g, *e1) & b2 == 0 and _closed(g, *e2) & b1 == 0


_PLAN_GRAPHS = [
    path_graph(2),
    path_graph(5),
    path_graph(12),
    cycle_graph(3),
    cycle_graph(7),
    star_graph(6),
    grid_graph([3, 3]),
    parse_family("complete:5"),
    Graph.from_edges(6, [(0, 1), (2, 3), (4, 5)]),
    Graph.from_edges(4, []),
]


class TestPlanExtraction:
    @pytest.mark.parametrize("g", _PLAN_GRAPHS, ids=lambda g: f"n{g.n}e{g.edge_count()}")
    def test_plan_is_valid(self, g):
        plan = plan_extraction(g)
        seen = []
        for i, members in enumerate(plan.rounds):
            assert members, "empty round"
            for a, b in itertools.combinations(members, 2):
                assert _compatible(g, a.edge, b.edge)
            for pe in members:
                u, v = pe.edge
                assert g.has_edge(u, v)
                want = (g.adj[u] | g.adj[v]) & ~((1 << u) | (1 << v))
                assert pe.z_measure_set == tuple(
                    q for q in range(g.n) if want >> q & 1
                )
                assert plan.coverage[pe.edge] == i
                seen.append(pe.edge)
        assert sorted(seen) == sorted(g.edges())
        assert plan.n_geo == len(plan.rounds)

    def test_round_counts_for_known_families(self):
        assert plan_extraction(path_graph(2)).n_geo == 1
        assert plan_extraction(path_graph(3)).n_geo == 2
        for n in (4, 7, 12, 30):
            assert plan_extraction(path_graph(n)).n_geo == 3
        for n in (3, 5, 8, 20):
            assert plan_extraction(star_graph(n)).n_geo == n - 1
        assert plan_extraction(cycle_graph(3)).n_geo == 3
        assert plan_extraction(cycle_graph(7)).n_geo == 4
        assert plan_extraction(grid_graph([3, 3])).n_geo == 9
        assert plan_extraction(grid_graph([2, 3])).n_geo == 6
        # fully connected: every pair blocks every other
        assert plan_extraction(parse_family("complete:5")).n_geo == 10

    def test_edgeless_graph_has_no_rounds(self):
        plan = plan_extraction(Graph.from_edges(3, []))
        assert plan.rounds == ()
        assert plan.n_geo == 0


class TestNGeoFormula:
    def test_known_values(self):
        assert n_geo_formula("path") == 3
        assert n_geo_formula("path:9") == 3
        assert n_geo_formula("cluster:1") == 3
        assert n_geo_formula("cluster:2") == 12
        assert n_geo_formula("cluster:3") == 27
        assert n_geo_formula("star:5") == 4
        assert n_geo_formula("ghz:20") == 19
        assert n_geo_formula("grid:4x4") == 12
        assert n_geo_formula("grid:1x7") == 3
        assert n_geo_formula("grid:2x2x2") == 27

    def test_unknown_or_malformed_gives_none(self):
        assert n_geo_formula("cycle:5") is None
        assert n_geo_formula("cluster:x") is None
        assert n_geo_formula("cluster:0") is None
        assert n_geo_formula("star:1") is None
        assert n_geo_formula("") is None


def _extracted_pair_distribution(g: Graph, edge, p: float):
    """Exact class distribution of one extracted pair, plus the joint
    distribution helper for multi-pair rounds (see below)."""
    u, v = edge
    zset = (g.adj[u] | g.adj[v]) & ~((1 << u) | (1 << v))
    boundary = sorted((q for q in range(g.n) if zset >> q & 1), reverse=True)
    dist = [0.0] * 4
    for e in range(1 << g.n):
        w = 1.0
        for q in range(g.n):
            w *= p if e >> q & 1 else 1.0 - p
        for outs in itertools.product((+1, -1), repeat=len(boundary)):
            st = PatternState(g, e, 0)
            for q, o in zip(boundary, outs):  # descending: labels stay valid
                st = measure_z(st, q, forced_outcome=o).state
            du = u - sum(1 for q in boundary if q < u)
            dv = v - sum(1 for q in boundary if q < v)
            assert st.graph.adj[du] == 1 << dv
            cls = (st.z_errors >> du & 1) | (st.z_errors >> dv & 1) << 1
            dist[cls] += w * 0.5 ** len(boundary)
    return dist


class TestExtractionStatistics:
    @pytest.mark.parametrize(
        "g, edge",
        [
            (path_graph(3), (0, 1)),
            (star_graph(4), (0, 2)),
            (cycle_graph(4), (1, 2)),
            (cycle_graph(5), (0, 4)),
        ],
        ids=["path3", "star4", "cycle4", "cycle5"],
    )
    @pytest.mark.parametrize("p", [0.1, 0.3])
    def test_single_pair_classes_are_product_bernoulli(self, g, edge, p):
        # boundary removal must leave independent flips on the two halves
        dist = _extracted_pair_distribution(g, edge, p)
        want = from_z_noise(p).probs
        for got, expect in zip(dist, want):
            assert got == pytest.approx(expect, abs=1e-12)

    def test_two_pair_round_is_independent(self):
        # path(5) schedules (0,1) and (3,4) together; their joint class
        # distribution must factorize exactly
        g = path_graph(5)
        p = 0.2
        plan = plan_extraction(g)
        round0 = plan.rounds[0]
        assert [pe.edge for pe in round0] == [(0, 1), (3, 4)]
        boundary = sorted(
            {q for pe in round0 for q in pe.z_measure_set}, reverse=True
        )
        joint = {}
        for e in range(1 << g.n):
            w = 1.0
            for q in range(g.n):
                w *= p if e >> q & 1 else 1.0 - p
            for outs in itertools.product((+1, -1), repeat=len(boundary)):
                st = PatternState(g, e, 0)
                for q, o in zip(boundary, outs):
                    st = measure_z(st, q, forced_outcome=o).state
                key = []
                for pe in round0:
                    u, v = pe.edge
                    du = u - sum(1 for q in boundary if q < u)
                    dv = v - sum(1 for q in boundary if q < v)
                    key.append((st.z_errors >> du & 1) | (st.z_errors >> dv & 1) << 1)
                key = tuple(key)
                joint[key] = joint.get(key, 0.0) + w * 0.5 ** len(boundary)
        want = from_z_noise(p).probs
        for c1 in range(4):
            for c2 in range(4):
                assert joint.get((c1, c2), 0.0) == pytest.approx(
                    want[c1] * want[c2], abs=1e-12
                )


def _indicator(g: Graph, classes: dict) -> bool:
    return _rebuild(g, classes, derive_rng(99, "indicator"))


def _analytic_fidelity(g: Graph, probs) -> float:
    edges = sorted(g.edges())
    total = 0.0
    for combo in itertools.product(range(4), repeat=len(edges)):
        w = 1.0
        for c in combo:
            w *= probs[c]
        if w and _indicator(g, dict(zip(edges, combo))):
            total += w
    return total


class TestRebuildIndicator:
    @pytest.mark.parametrize(
        "g", [path_graph(3), cycle_graph(3), star_graph(4), cycle_graph(4)],
        ids=["path3", "cycle3", "star4", "cycle4"],
    )
    def test_outcome_independent(self, g):
        # residual error bits must not depend on which branches the rng takes
        edges = sorted(g.edges())
        combos = list(itertools.product(range(4), repeat=len(edges)))[:40]
        for combo in combos:
            classes = dict(zip(edges, combo))
            votes = {_rebuild(g, classes, derive_rng(s, "vote")) for s in range(5)}
            assert len(votes) == 1

    @pytest.mark.parametrize(
        "g", [path_graph(3), cycle_graph(3), star_graph(4), cycle_graph(4),
              Graph.from_edges(5, [(0, 1), (1, 2), (3, 4)])],
        ids=["path3", "cycle3", "star4", "cycle4", "two-comps"],
    )
    def test_all_identity_succeeds_single_error_fails(self, g):
        edges = sorted(g.edges())
        assert _indicator(g, {e: 0 for e in edges})
        for e in edges:
            for cls in (1, 2, 3):
                classes = {x: 0 for x in edges}
                classes[e] = cls
                assert not _indicator(g, classes), (e, cls)

    def test_isolated_vertices_supported(self):
        g = Graph.from_edges(4, [(1, 2)])
        assert _indicator(g, {(1, 2): 0})
        assert not _indicator(g, {(1, 2): 3})


class TestRunDrpp:
    def test_perfect_input_perfect_output(self):
        res = run_drpp(path_graph(4), 0.0, shots=500, seed=3)
        assert res.converged
        assert res.fidelity == 1.0
        assert res.rounds == 0
        assert res.ideal_shots == 500
        assert res.copies_consumed == pytest.approx(res.n_geo_plan)
        assert res.ci95[0] <= 1.0 <= res.ci95[1] + 1e-12

    @pytest.mark.parametrize(
        "family, analytic_hint",
        [("path:3", None), ("cycle:3", None), ("star:3", None)],
    )
    def test_monte_carlo_matches_exact_enumeration(self, family, analytic_hint):
        g = parse_family(family)
        p = 0.1
        trace = distill_trace(from_z_noise(p), 0.999)
        analytic = _analytic_fidelity(g, trace.final.probs)
        res = run_drpp(g, p, shots=20000, seed=11)
        assert res.converged
        lo, hi = res.ci95
        assert lo <= analytic <= hi
        assert res.achieved_pair_fidelity == trace.final.fidelity
        assert res.rounds == trace.rounds
        assert res.copies_consumed == pytest.approx(
            res.n_geo_plan * trace.expected_pairs
        )

    def test_not_purifiable_reports_failure_without_sampling(self):
        # a huge shot budget returns instantly because no trajectory runs
        res = run_drpp(path_graph(3), 0.35, shots=10**9, seed=0)
        assert not res.converged
        assert res.fidelity is None and res.ci95 is None
        assert res.ideal_shots is None and res.copies_consumed is None
        assert res.r2 == 0.0

    def test_same_seed_same_result(self):
        # a loose pair target keeps failures common so the seeds separate
        a = run_drpp(cycle_graph(4), 0.2, shots=1500, pair_target_fidelity=0.9, seed=42)
        b = run_drpp(cycle_graph(4), 0.2, shots=1500, pair_target_fidelity=0.9, seed=42)
        assert a == b
        c = run_drpp(cycle_graph(4), 0.2, shots=1500, pair_target_fidelity=0.9, seed=43)
        assert c.ideal_shots != a.ideal_shots

    def test_worker_count_does_not_change_results(self):
        shots = CHUNK_SHOTS + 700  # force at least two chunks
        a = run_drpp(path_graph(3), 0.1, shots=shots, seed=7, workers=1)
        b = run_drpp(path_graph(3), 0.1, shots=shots, seed=7, workers=3)
        assert a == b

    def test_graph_record_shape(self):
        res = run_drpp(path_graph(3), 0.05, shots=10, seed=0)
        assert res.graph == {"n": 3, "edges": [[0, 1], [1, 2]]}
        assert res.p == 0.05 and res.shots == 10

    def test_family_hint_flows_to_formula(self):
        res = run_drpp(star_graph(5), 0.05, shots=10, seed=0, family_hint="star:5")
        assert res.n_geo_formula == 4
        assert res.n_geo_plan == 4

    def test_input_validation(self):
        with pytest.raises(ParameterError):
            run_drpp(path_graph(3), 0.1, shots=0)
        with pytest.raises(ParameterError):
            run_drpp(path_graph(3), 0.1, shots=10, workers=0)


class TestRateReport:
    def test_bounds_are_ordered(self):
        for p in (0.0, 0.05, 0.15, 0.25):
            rep = rate_report(star_graph(4), p, family_hint="star:4")
            assert rep.r2 >= rep.r_psi_upper >= rep.r_psi_lower
            assert rep.r_psi_lower == pytest.approx(rep.r2 / rep.n_geo_plan)
            assert rep.n_geo_formula == 3

    def test_rate_endpoints(self):
        assert rate_report(path_graph(4), 0.0).r2 == 1.0
        for p in (P_STAR, 0.35, 0.45):
            rep = rate_report(path_graph(4), p)
            assert rep.r2 == 0.0 and rep.r_psi_lower == 0.0

    def test_edgeless_graph_keeps_bounds_finite(self):
        rep = rate_report(Graph.from_edges(3, []), 0.1)
        assert rep.n_geo_plan == 0
        assert rep.r_psi_lower == rep.r2  # divisor floored at 1

    def test_custom_estimator_hook(self):
        rep = rate_report(path_graph(3), 0.1, r2_estimator=lambda bd: 0.5)
        assert rep.r2 == 0.5
        assert rep.r_psi_lower == 0.25


class TestThresholdScan:
    def test_verdicts_bracket_the_threshold(self):
        rows = threshold_scan(path_graph(3), [0.05, 0.28, 0.30], shots=300, seed=5)
        assert [r.p for r in rows] == [0.05, 0.28, 0.30]
        assert [r.purifiable for r in rows] == [True, True, False]
        assert [r.converged for r in rows] == [True, True, False]
        assert rows[0].fidelity is not None and rows[1].fidelity is not None
        assert rows[2].fidelity is None and rows[2].ci95 is None

    def test_temperature_column(self):
        by_p = {0.1: 2.5, 0.2: 4.0}
        rows = threshold_scan(
            path_graph(3), [0.1, 0.2], shots=50, seed=1, temperature_of=by_p.get
        )
        assert [r.temperature for r in rows] == [2.5, 4.0]
        plain = threshold_scan(path_graph(3), [0.1], shots=50, seed=1)
        assert plain[0].temperature is None

    def test_grid_must_be_sorted(self):
        with pytest.raises(ParameterError):
            threshold_scan(path_graph(3), [0.3, 0.1], shots=10)

    def test_deterministic_rows(self):
        a = threshold_scan(star_graph(3), [0.1, 0.2], shots=400, seed=9)
        b = threshold_scan(star_graph(3), [0.1, 0.2], shots=400, seed=9)
        assert a == b
