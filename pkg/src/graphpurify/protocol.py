"""The end-to-end divide-and-rebuild protocol.

Stages per trajectory: (1) extraction — on fresh thermal copies, Z-measure
the neighborhoods of the scheduled pairs so each pair becomes an isolated
noisy Bell-type edge; (2) purification — the ensemble of extracted pairs is
pushed through the validated Bell-diagonal recurrence channel to a target
fidelity, so each rebuilt edge draws its residual error class from the
channel's output distribution; (3) rebuild — one qubit per target vertex is
fused from pair halves (spanning-forest edges via local merges, remaining
edges via pair-mediated CZ splices).  A trajectory counts as success when no
unknown Z error remains anywhere.

Scheduling constraint: two pairs can be extracted from the same copy exactly
when neither pair touches the other's vertices or their neighbors — that
keeps each pair's measured boundary disjoint from the other pair itself,
while boundaries of different pairs may overlap.

Determinism: shots are processed in fixed-size chunks, each chunk drawing
from its own derived stream, so results are byte-identical for any worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import ParameterError
from .graphs import Graph
from .pairs import composite_r2, distill_trace, from_z_noise
from .pattern import (
    PatternState,
    apply_cz_via_pair,
    is_ideal,
    measure_z,
    merge_local,
    sample_thermal,
)
from .rng import derive_rng, derive_seed
from .thermal import purifiable_at

__all__ = [
    "PairExtraction",
    "ExtractionPlan",
    "RateReport",
    "ProtocolResult",
    "ScanRow",
    "plan_extraction",
    "n_geo_formula",
    "rate_report",
    "run_drpp",
    "threshold_scan",
    "CHUNK_SHOTS",
]

CHUNK_SHOTS = 4096


# ---------------------------------------------------------------------------
# extraction planning


@dataclass(frozen=True)
class PairExtraction:
    edge: tuple[int, int]
    z_measure_set: tuple[int, ...]


@dataclass(frozen=True)
class ExtractionPlan:
    rounds: tuple[tuple[PairExtraction, ...], ...]
    coverage: dict  # edge -> round index

    @property
    def n_geo(self) -> int:
        return len(self.rounds)


def _closed_mask(g: Graph, u: int, v: int) -> int:
    return (1 << u) | (1 << v) | g.adj[u] | g.adj[v]


def plan_extraction(g: Graph) -> ExtractionPlan:
    """Greedy first-fit partition of edges into simultaneous rounds.

    Edges are taken in sorted order; an edge joins the first round where no
    already-placed pair has it inside its closed neighborhood (the test is
    symmetric, so neither pair disturbs the other's extraction).
    """
    rounds: list[list[tuple[int, int]]] = []
    blockers: list[int] = []
    coverage: dict[tuple[int, int], int] = {}
    for u, v in sorted(g.edges()):
        bits = (1 << u) | (1 << v)
        for i, blocked in enumerate(blockers):
            if blocked & bits == 0:
                rounds[i].append((u, v))
                blockers[i] |= _closed_mask(g, u, v)
                coverage[(u, v)] = i
                break
        else:
            rounds.append([(u, v)])
            blockers.append(_closed_mask(g, u, v))
            coverage[(u, v)] = len(rounds) - 1

    built = []
    for members in rounds:
        items = []
        for u, v in members:
            zset = (g.adj[u] | g.adj[v]) & ~((1 << u) | (1 << v))
            items.append(
                PairExtraction(
                    edge=(u, v),
                    z_measure_set=tuple(
                        q for q in range(g.n) if zset >> q & 1
                    ),
                )
            )
        built.append(tuple(items))
        for a in items:
            for b in items:
                if a is not b:
                    au, av = a.edge
                    assert _closed_mask(g, au, av) & (
                        (1 << b.edge[0]) | (1 << b.edge[1])
                    ) == 0, "round contains interfering pairs"
    return ExtractionPlan(rounds=tuple(built), coverage=coverage)


def n_geo_formula(family: str) -> int | None:
    """Analytic round count for known families; None when no formula applies.

    path -> 3; cluster:d -> 3*d*d (grid:...xN counts its nontrivial axes the
    same way); star/ghz:N -> N-1.
    """
    name, _, arg = family.partition(":")
    name = name.strip().lower()
    try:
        if name == "path":
            return 3
        if name == "cluster":
            d = int(arg)
            return 3 * d * d if d >= 1 else None
        if name in ("star", "ghz"):
            size = int(arg)
            return size - 1 if size >= 2 else None
        if name == "grid":
            d = sum(1 for s in arg.lower().split("x") if int(s) >= 2)
            return 3 * d * d if d >= 1 else None
    except ValueError:
        return None
    return None


# ---------------------------------------------------------------------------
# rate accounting


@dataclass(frozen=True)
class RateReport:
    n_geo_plan: int
    n_geo_formula: int | None
    r2: float
    r_psi_lower: float
    r_psi_upper: float


def rate_report(
    g: Graph,
    p: float,
    family_hint: str | None = None,
    r2_estimator=None,
) -> RateReport:
    """Bell-pair rate and the graph-state rate it brackets.

    The output-state rate R is sandwiched as r2/n_geo <= R <= r2, with n_geo
    the planner's round count (at least 1 to keep the bound meaningful for
    edgeless graphs).
    """
    estimator = r2_estimator if r2_estimator is not None else composite_r2
    r2 = estimator(from_z_noise(p))
    plan = plan_extraction(g)
    formula = n_geo_formula(family_hint) if family_hint is not None else None
    return RateReport(
        n_geo_plan=plan.n_geo,
        n_geo_formula=formula,
        r2=r2,
        r_psi_lower=r2 / max(1, plan.n_geo),
        r_psi_upper=r2,
    )


# ---------------------------------------------------------------------------
# trajectory simulation


@dataclass(frozen=True)
class ProtocolResult:
    graph: dict
    p: float
    shots: int
    converged: bool
    pair_target_fidelity: float
    achieved_pair_fidelity: float
    rounds: int  # recurrence rounds per pair
    fidelity: float | None
    ci95: tuple[float, float] | None
    ideal_shots: int | None
    copies_consumed: float | None
    n_geo_plan: int
    n_geo_formula: int | None
    r2: float
    r_psi_bounds: tuple[float, float]


def _graph_record(g: Graph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in sorted(g.edges())]}


def _wilson_ci95(successes: int, trials: int) -> tuple[float, float]:
    z = 1.959963984540054
    ph = successes / trials
    denom = 1.0 + z * z / trials
    center = (ph + z * z / (2 * trials)) / denom
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _extract_round(g: Graph, p: float, items, rng) -> None:
    """One thermal copy: measure out the round's boundaries, check isolation."""
    st = sample_thermal(g, p, rng)
    union = sorted({q for pe in items for q in pe.z_measure_set}, reverse=True)
    for q in union:
        # deleting strictly higher indices first keeps q's label valid
        st = measure_z(st, q, rng).state
    for pe in items:
        u, v = pe.edge
        du = u - sum(1 for q in union if q < u)
        dv = v - sum(1 for q in union if q < v)
        assert st.graph.adj[du] == 1 << dv, "extracted pair is not isolated"


def _draw_class(probs: tuple[float, ...], rng) -> int:
    r = rng.random()
    acc = 0.0
    for c, q in enumerate(probs[:-1]):
        acc += q
        if r < acc:
            return c
    return len(probs) - 1


def _rebuild(g: Graph, classes: dict, rng) -> bool:
    """Fuse purified pairs into the target graph; True iff no residual error.

    One pair per edge; spanning-forest edges are realized by merging each
    vertex's pair halves (BFS order, parents first, so every measured half's
    twin is still pristine and the fused edge lands cleanly), remaining edges
    by pair-mediated CZ between the finished vertex qubits.
    """
    n = g.n
    forest: list[list[tuple[int, int]]] = []
    tree_set: set[frozenset] = set()
    for comp in g.components():
        root = (comp & -comp).bit_length() - 1
        te = g.bfs_tree_edges(root)
        if te:
            forest.append(te)
            tree_set.update(frozenset(e) for e in te)
    nontree = [e for e in sorted(g.edges()) if frozenset(e) not in tree_set]

    edges_built: list[tuple[int, int]] = []
    errors = 0
    nq = 0
    near: dict[tuple[int, int], int] = {}  # oriented edge -> half at its first vertex
    far: dict[tuple[int, int], int] = {}

    def alloc_pair(oriented: tuple[int, int]) -> None:
        nonlocal nq, errors
        hx, hy = nq, nq + 1
        nq += 2
        edges_built.append((hx, hy))
        lo_first = oriented[0] < oriented[1]
        cls = classes[tuple(sorted(oriented))]
        a_half = hx if lo_first else hy  # class labels attach to the low vertex's half
        b_half = hy if lo_first else hx
        if cls in (1, 3):
            errors |= 1 << a_half
        if cls in (2, 3):
            errors |= 1 << b_half
        near[oriented] = hx
        far[oriented] = hy

    for te in forest:
        for e in te:
            alloc_pair(e)
    iso_alloc = {v: None for v in range(n) if g.degree(v) == 0}
    for v in iso_alloc:
        iso_alloc[v] = nq
        nq += 1
    for e in nontree:
        alloc_pair(e)

    state = PatternState(Graph.from_edges(nq, edges_built), errors, 0)
    cur = list(range(nq))  # alloc id -> current index (-1 once measured away)

    def track(vertex_map) -> None:
        inv = {old: new for new, old in enumerate(vertex_map)}
        for a in range(nq):
            if cur[a] >= 0:
                cur[a] = inv.get(cur[a], -1)

    kept: dict[int, int] = dict(iso_alloc)
    for te in forest:
        child_halves: dict[int, list[int]] = {}
        parent_half: dict[int, int] = {}
        for a, b in te:
            child_halves.setdefault(a, []).append(near[(a, b)])
            parent_half[b] = far[(a, b)]
        root = te[0][0]
        for v in [root] + [b for _, b in te]:
            if v == root:
                party = child_halves[v]  # leads with the lowest child edge
            else:
                party = [parent_half[v]] + child_halves.get(v, [])
            kept[v] = party[0]
            if len(party) > 1:
                res = merge_local(state, [cur[a] for a in party], rng)
                state = res.state
                track(res.vertex_map)

    for u, v in nontree:
        res = apply_cz_via_pair(
            state, cur[kept[u]], cur[kept[v]], cur[near[(u, v)]], cur[far[(u, v)]], rng
        )
        state = res.state
        track(res.vertex_map)

    assert state.graph.n == n, "rebuild consumed the wrong number of qubits"
    perm = [cur[kept[v]] for v in range(n)]
    assert sorted(perm) == list(range(n)), "rebuild lost a vertex qubit"
    for u in range(n):
        for v in range(u + 1, n):
            assert state.graph.has_edge(perm[u], perm[v]) == g.has_edge(u, v), (
                "rebuilt graph differs from the target"
            )
    return is_ideal(state)


def _simulate_chunk(args) -> int:
    g, p, plan, probs, seed, chunk_index, count = args
    rng = derive_rng(seed, "drpp", chunk_index)
    edges = sorted(g.edges())
    hits = 0
    for _ in range(count):
        for items in plan.rounds:
            _extract_round(g, p, items, rng)
        classes = {e: _draw_class(probs, rng) for e in edges}
        if _rebuild(g, classes, rng):
            hits += 1
    return hits


def run_drpp(
    g: Graph,
    p: float,
    shots: int,
    pair_target_fidelity: float = 0.999,
    seed: int = 0,
    workers: int = 1,
    family_hint: str | None = None,
    max_rounds: int = 64,
) -> ProtocolResult:
    """Monte Carlo estimate of the protocol's output fidelity.

    Returns a convergence-failure record (fidelity fields None) when the
    recurrence cannot reach the pair target at this noise level.
    """
    if shots < 1:
        raise ParameterError("shots must be >= 1")
    if workers < 1:
        raise ParameterError("workers must be >= 1")
    trace = distill_trace(from_z_noise(p), pair_target_fidelity, max_rounds)
    rates = rate_report(g, p, family_hint)
    plan = plan_extraction(g)
    common = dict(
        graph=_graph_record(g),
        p=p,
        shots=shots,
        pair_target_fidelity=pair_target_fidelity,
        achieved_pair_fidelity=trace.final.fidelity,
        rounds=trace.rounds,
        n_geo_plan=rates.n_geo_plan,
        n_geo_formula=rates.n_geo_formula,
        r2=rates.r2,
        r_psi_bounds=(rates.r_psi_lower, rates.r_psi_upper),
    )
    if not trace.converged:
        return ProtocolResult(
            converged=False,
            fidelity=None,
            ci95=None,
            ideal_shots=None,
            copies_consumed=None,
            **common,
        )

    specs = []
    done = 0
    chunk_index = 0
    while done < shots:
        count = min(CHUNK_SHOTS, shots - done)
        specs.append((g, p, plan, trace.final.probs, seed, chunk_index, count))
        done += count
        chunk_index += 1
    if workers == 1 or len(specs) == 1:
        counts = [_simulate_chunk(s) for s in specs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_simulate_chunk, specs))
    hits = sum(counts)
    return ProtocolResult(
        converged=True,
        fidelity=hits / shots,
        ci95=_wilson_ci95(hits, shots),
        ideal_shots=hits,
        copies_consumed=plan.n_geo * trace.expected_pairs,
        **common,
    )


# ---------------------------------------------------------------------------
# threshold scanning


@dataclass(frozen=True)
class ScanRow:
    p: float
    temperature: float | None  # set when the scan is run against a field scale
    purifiable: bool  # analytic verdict from the pair-fidelity boundary
    converged: bool  # did the recurrence actually reach the target
    fidelity: float | None
    ci95: tuple[float, float] | None
    rounds: int


def threshold_scan(
    g: Graph,
    p_grid,
    shots: int,
    seed: int = 0,
    pair_target_fidelity: float = 0.999,
    workers: int = 1,
    temperature_of=None,
) -> list[ScanRow]:
    """Purifiability verdict and achieved fidelity across a noise grid."""
    grid = list(p_grid)
    if grid != sorted(grid):
        raise ParameterError("p grid must be sorted ascending")
    rows = []
    for i, p in enumerate(grid):
        res = run_drpp(
            g,
            p,
            shots,
            pair_target_fidelity,
            seed=derive_seed(seed, "scan", i),
            workers=workers,
        )
        rows.append(
            ScanRow(
                p=p,
                temperature=temperature_of(p) if temperature_of is not None else None,
                purifiable=purifiable_at(p),
                converged=res.converged,
                fidelity=res.fidelity,
                ci95=res.ci95,
                rounds=res.rounds,
            )
        )
    return rows
