"""
Invariant and acceptance battery behind `cli.py verify`.

Exact checks must never fail; statistical checks report a measured rate
against a threshold and do not affect the exit status.
"""

import logging
import math
import statistics
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .config import SimulatorConfig
from .decompose import cluster, verify_balcut, verify_partition, xi_for_zeta
from .engine import RandomSource, broadcast_time, reversal_violations, run_process
from .errors import GossipSimError, IterationCapExceeded
from .graph import (
    Graph,
    conductance_by_enumeration,
    density_by_enumeration,
    generate,
    hereditary_density,
    set_conductance,
)
from .graph_io import read_edge_list
from .local_algorithms import BfsLabeling, NeighborCollection, SourceFlooding
from .protocols import (
    default_tau,
    direct_exchange,
    greedy_unheard_baseline,
    rumor_by_superstep,
    schedule_lower_bound,
    schedule_replay,
    superstep,
)
from .simulate import (
    run_local,
    simulate_direct_exchange,
    simulate_round_robin,
    simulate_superstep,
    simulate_via_spanner,
)
from .spanner import extract_spanner, message_bound

logger = logging.getLogger(__name__)

EXACT = "exact"
STATISTICAL = "statistical"

# Sample sizes per level.
LEVELS: Dict[str, Dict[str, int]] = {
    "quick": {"reversal": 30, "reversal_n": 24, "superstep_seeds": 5, "density": 20,
              "conductance": 20, "balcut": 20, "equivalence_seeds": 1, "baseline_seeds": 5,
              "broadcast_n": 256, "broadcast_seeds": 20, "direct_graphs": 6},
    "full": {"reversal": 500, "reversal_n": 64, "superstep_seeds": 100, "density": 100,
             "conductance": 100, "balcut": 200, "equivalence_seeds": 5, "baseline_seeds": 30,
             "broadcast_n": 1024, "broadcast_seeds": 100, "direct_graphs": 50},
}


def _check(name: str, kind: str, passed: bool, measured: Any = "", threshold: Any = "",
           detail: str = "") -> Dict[str, Any]:
    return {"name": name, "kind": kind, "passed": bool(passed), "measured": measured,
            "threshold": threshold, "detail": detail}


def superstep_corpus(level: str) -> List[Graph]:
    graphs = [
        generate("path", n=8),
        generate("star", n=8),
        generate("clique", n=6),
        generate("dumbbell", k=4),
        generate("cycle", n=10),
        generate("erdos_renyi", n=24, p=0.2, seed=1),
        generate("figure1", n=16),
    ]
    if level != "full":
        return graphs
    graphs += [generate("path", n=n) for n in (2, 3, 4, 16, 32, 64, 128)]
    graphs += [generate("star", n=n) for n in (3, 4, 16, 32, 64, 128)]
    graphs += [generate("clique", n=n) for n in (3, 4, 5, 8, 12, 16, 24, 32)]
    graphs += [generate("dumbbell", k=k) for k in (3, 5, 6, 8, 12, 16)]
    graphs += [generate("grid", rows=6, cols=6)]
    graphs += [
        generate("erdos_renyi", n=n, p=p, seed=seed)
        for n, p in ((16, 0.3), (32, 0.2), (64, 0.12), (128, 0.05), (256, 0.03), (512, 0.016))
        for seed in (2, 3)
    ]
    graphs += [generate("figure1", n=n) for n in (8, 32, 64, 100, 128)]
    graphs += [generate("figure1", n=n, gadget=3) for n in (16, 100)]
    return graphs


def decomposition_corpus() -> List[Graph]:
    return [
        generate("path", n=6),
        generate("cycle", n=8),
        generate("star", n=7),
        generate("clique", n=5),
        generate("dumbbell", k=3),
        generate("dumbbell", k=5),
        generate("clique_union", k=3, copies=2),
        generate("grid", rows=3, cols=4),
        generate("erdos_renyi", n=12, p=0.35, seed=5),
        generate("tree", n=14, seed=3),
    ]


def _random_graph(rng: np.random.Generator, n_max: int, name_seed: int) -> Graph:
    n = int(rng.integers(2, n_max + 1))
    p = float(rng.uniform(0.15, 0.6))
    return generate("erdos_renyi", n=n, p=p, seed=name_seed)


# --- checks ----------------------------------------------------------------------------

def check_reversal(sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    rng = np.random.default_rng(11)
    violations = 0
    for i in range(sizes["reversal"]):
        g = _random_graph(rng, sizes["reversal_n"], i)
        tau = int(rng.integers(1, 21))
        _, trace = run_process(g, None, tau, RandomSource(i))
        violations += len(reversal_violations(g, trace))
    return [_check("reversal property", EXACT, violations == 0, violations, 0,
                   f"{sizes['reversal']} random (graph, seed, tau) triples")]


def check_superstep(level: str, sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    runs = completed = invariant_failures = fast = 0
    budget_failures = 0
    medians_ok = True
    for g in superstep_corpus(level):
        tau = default_tau(g, config.protocols.c_tau)
        rounds = []
        for seed in range(sizes["superstep_seeds"]):
            runs += 1
            try:
                report = superstep(g, tau, RandomSource(seed), config=config.protocols)
            except IterationCapExceeded as e:
                if e.report is not None and not e.report.invariants_ok:
                    invariant_failures += 1
                continue
            completed += report.completed
            invariant_failures += not report.invariants_ok
            fast += report.iterations <= 2 * math.log2(2 * g.m)
            budget_failures += report.stats.connections > message_bound(g, config.protocols.c_msg)
            rounds.append(report.total_rounds)
        if rounds and statistics.median(rounds) > config.protocols.c_rounds * math.log2(2 * g.m) ** 3:
            medians_ok = False
    return [
        _check("superstep per-iteration invariants", EXACT, invariant_failures == 0, invariant_failures, 0,
               f"{runs} runs"),
        _check("superstep completion rate", STATISTICAL, completed / runs >= 0.99,
               round(completed / runs, 4), 0.99),
        _check("superstep iterations <= 2 log2(2m)", STATISTICAL, fast / runs >= 0.95,
               round(fast / runs, 4), 0.95),
        _check("superstep median rounds <= C log2^3(2m)", STATISTICAL, medians_ok, medians_ok,
               f"C={config.protocols.c_rounds}"),
        _check("message connections <= C_msg n log2^3(2m)", EXACT, budget_failures == 0,
               budget_failures, 0, f"C_msg={config.protocols.c_msg}"),
    ]


def check_rumor(level: str, sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    over = done = 0
    for g in superstep_corpus(level):
        if not g.is_connected():
            continue
        tau = default_tau(g, config.protocols.c_tau)
        for seed in range(min(sizes["superstep_seeds"], 10)):
            try:
                report = rumor_by_superstep(g, tau, RandomSource(seed), config.protocols)
            except IterationCapExceeded:
                continue
            if report.completed:
                done += 1
                over += not report.within_diameter
    return [_check("rumor invocations <= D", EXACT, over == 0, over, 0, f"{done} completed runs")]


def direct_exchange_corpus(count: int) -> List[Graph]:
    graphs: List[Graph] = []
    i = 0
    while len(graphs) < count:
        graphs.append(generate("tree", n=8 + 4 * (i % 8), seed=i))
        graphs.append(generate("clique_union", k=5, copies=1 + i % 4))
        graphs.append(generate("grid", rows=2 + i % 4, cols=3 + i % 3))
        i += 1
    return graphs[:count]


def check_direct_exchange(sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    failures: List[str] = []
    runs = 0
    for g in direct_exchange_corpus(sizes["direct_graphs"]):
        for eps in (0.25, 0.5, 1.0):
            runs += 1
            report = direct_exchange(g, eps, config.protocols)
            if not report.invariants_ok:
                failures.append(f"{g.name} eps={eps}")
            elif schedule_replay(g, report.schedule) < schedule_lower_bound(g):
                failures.append(f"{g.name} eps={eps}: replay below delta")
    return [_check("direct exchange coverage and bounds", EXACT, not failures, len(failures), 0,
                   "; ".join(failures[:3]) or f"{runs} runs")]


def check_graph_oracles(sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    rng = np.random.default_rng(23)
    density_mismatch = 0
    for i in range(sizes["density"]):
        g = _random_graph(rng, 12, 1000 + i)
        density_mismatch += hereditary_density(g) != density_by_enumeration(g)
    conductance_mismatch = 0
    for i in range(sizes["conductance"]):
        g = _random_graph(rng, 10, 2000 + i)
        members = [u for u in range(g.n) if rng.random() < 0.8] or list(range(g.n))
        if len(members) < 2:
            continue
        exact = set_conductance(g, members, mode="exact")
        conductance_mismatch += abs(exact.value - conductance_by_enumeration(g, members)) > 1e-9
    return [
        _check("hereditary density flow = enumeration", EXACT, density_mismatch == 0, density_mismatch, 0),
        _check("exact conductance = brute force", EXACT, conductance_mismatch == 0, conductance_mismatch, 0),
    ]


def check_decomposition(sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    violations: List[str] = []
    fractions = []
    for g in decomposition_corpus():
        for zeta in (1 / 6, 1 / 3):
            p = cluster(g, None, xi_for_zeta(g, zeta), config=config.decompose)
            report = verify_partition(g, p, zeta, config.decompose)
            fractions.append(report["cut_fraction"])
            if not report["success"]:
                violations.append(f"{g.name} zeta={zeta:.3f}: {report['violations'][0]}")
    rng = np.random.default_rng(31)
    balcut_failures = 0
    for i in range(sizes["balcut"]):
        g = _random_graph(rng, 12, 3000 + i)
        xi = (0.1, 0.2, 0.3)[i % 3]
        balcut_failures += not verify_balcut(g, range(g.n), xi, config.decompose)["success"]
    return [
        _check("partition bounds", EXACT, not violations, len(violations), 0,
               "; ".join(violations[:2]) or f"max cut fraction {max(fractions):.3f}"),
        _check("balanced cut bound", EXACT, balcut_failures == 0, balcut_failures, 0),
    ]


def check_spanner(level: str, sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    failures = 0
    runs = 0
    for g in superstep_corpus(level):
        tau = default_tau(g, config.protocols.c_tau)
        for seed in range(min(sizes["superstep_seeds"], 5)):
            try:
                report = superstep(g, tau, RandomSource(seed), config=config.protocols)
            except IterationCapExceeded:
                continue
            if not report.completed:
                continue
            runs += 1
            failures += not extract_spanner(g, report.traces).certify(g)["success"]
    return [_check("spanner neighbor stretch and density <= T", EXACT, failures == 0, failures, 0,
                   f"{runs} completed runs")]


def equivalence_corpus(level: str) -> List[Graph]:
    graphs = [generate("path", n=5), generate("star", n=5), generate("cycle", n=6),
              generate("dumbbell", k=3), generate("tree", n=9, seed=4)]
    if level == "full":
        graphs += [generate("dumbbell", k=6), generate("grid", rows=3, cols=3), generate("clique", n=5)]
        seed = 0
        while len(graphs) < 20:
            g = generate("erdos_renyi", n=10, p=0.35, seed=seed)
            if g.is_connected():
                graphs.append(g)
            seed += 1
    return graphs


def check_equivalence(level: str, sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    mismatches: List[str] = []
    runs = 0
    for g in equivalence_corpus(level):
        algorithms = [SourceFlooding(0, horizon=g.n), BfsLabeling(0, horizon=g.n), NeighborCollection()]
        for alg in algorithms:
            for seed in range(sizes["equivalence_seeds"]):
                extraction = superstep(g, default_tau(g, config.protocols.c_tau),
                                       RandomSource(seed).child("extract"), config=config.protocols)
                spanner = extract_spanner(g, extraction.traces, extraction.completed)
                spanner.certify(g)
                outcomes = {
                    "superstep": lambda: simulate_superstep(g, alg, seed, config=config),
                    "round_robin": lambda: simulate_round_robin(g, alg, seed, config=config),
                    "direct_exchange": lambda: simulate_direct_exchange(g, alg, seed, config=config),
                    "spanner": lambda: simulate_via_spanner(g, alg, seed, spanner, config=config),
                }
                for kind, run in outcomes.items():
                    runs += 1
                    try:
                        outcome = run()
                    except GossipSimError as e:
                        mismatches.append(f"{kind}/{alg.name}/{g.name}: {type(e).__name__}")
                        continue
                    if not outcome.equivalent:
                        mismatches.append(f"{kind}/{alg.name}/{g.name} seed {seed}")
    return [_check("simulator output equivalence", EXACT, not mismatches, len(mismatches), 0,
                   "; ".join(mismatches[:3]) or f"{runs} runs")]


def check_baseline(level: str, sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    """Baseline growth against Superstep on the figure1 family.

    The growth ratio is reported, not enforced: with push-pull exchange and
    indirect hearing the baseline finishes in a near-constant number of
    rounds on this family.
    """
    sizes_n = (100, 200, 400) if level == "full" else (25, 50, 100)
    medians = []
    superstep_over = 0
    for n in sizes_n:
        g = generate("figure1", n=n, gadget=3)
        seeds = range(sizes["baseline_seeds"])
        rounds = [greedy_unheard_baseline(g, RandomSource(seed), config.simulate.local_round_cap).rounds
                  for seed in seeds]
        medians.append(statistics.median(rounds))
        tau = default_tau(g, config.protocols.c_tau)
        superstep_rounds = []
        for seed in seeds:
            try:
                superstep_rounds.append(superstep(g, tau, RandomSource(seed), config=config.protocols).total_rounds)
            except IterationCapExceeded:
                superstep_rounds.append(math.inf)
        superstep_over += statistics.median(superstep_rounds) > config.protocols.c_rounds * math.log2(2 * g.m) ** 3
    ratio = medians[-1] / medians[0] if medians[0] else math.inf
    logger.info(f"Baseline medians {medians} for n={list(sizes_n)}, ratio {ratio:.3f}")
    return [
        _check("baseline rounds ratio on figure1", STATISTICAL, ratio >= 3, round(ratio, 3), 3,
               f"medians {medians} for n={list(sizes_n)}"),
        _check("superstep median rounds <= C log2^3(2m) on figure1", STATISTICAL, superstep_over == 0,
               superstep_over, 0, f"C={config.protocols.c_rounds}"),
    ]


def check_broadcast(sizes: Dict[str, int], config: SimulatorConfig) -> List[Dict[str, Any]]:
    n = sizes["broadcast_n"]
    g = generate("clique", n=n)
    budget = math.ceil(4 * math.log2(n))
    hits = 0
    for seed in range(sizes["broadcast_seeds"]):
        t = broadcast_time(g, 0, RandomSource(seed), budget)
        hits += t is not None and t <= budget
    rate = hits / sizes["broadcast_seeds"]
    return [_check(f"clique broadcast within 4 log2 n (n={n})", STATISTICAL, rate >= 0.95,
                   round(rate, 4), 0.95)]


def check_corpus(corpus_dir: Optional[str]) -> List[Dict[str, Any]]:
    if not corpus_dir:
        return []
    checks = []
    for path in sorted(Path(corpus_dir).glob("*")):
        if not path.is_file():
            continue
        try:
            g = read_edge_list(path)
        except (GossipSimError, OSError, UnicodeDecodeError) as e:
            checks.append(_check(f"load {path.name}", EXACT, False, "load failed", "", str(e)))
            continue
        alg = SourceFlooding(0, horizon=g.n) if g.n else NeighborCollection()
        reference = run_local(g, alg, 0, config=None)
        outcome = simulate_round_robin(g, alg, 0)
        checks.append(_check(f"load {path.name}", EXACT, bool(outcome.equivalent),
                             f"n={g.n} m={g.m}", "", f"T={reference.model_rounds}"))
    return checks


def verify_suite(level: str = "quick", config: Optional[SimulatorConfig] = None,
                 corpus_dir: Optional[str] = None,
                 progress: Optional[Callable[[str], None]] = None) -> Dict[str, Any]:
    """Run the battery; success iff every exact check passed"""
    if level not in LEVELS:
        raise ValueError(f"unknown verification level {level!r}")
    config = config or SimulatorConfig()
    sizes = LEVELS[level]
    stages = [
        ("corpus", lambda: check_corpus(corpus_dir)),
        ("graph oracles", lambda: check_graph_oracles(sizes, config)),
        ("reversal", lambda: check_reversal(sizes, config)),
        ("superstep", lambda: check_superstep(level, sizes, config)),
        ("rumor", lambda: check_rumor(level, sizes, config)),
        ("direct exchange", lambda: check_direct_exchange(sizes, config)),
        ("decomposition", lambda: check_decomposition(sizes, config)),
        ("spanner", lambda: check_spanner(level, sizes, config)),
        ("equivalence", lambda: check_equivalence(level, sizes, config)),
        ("baseline", lambda: check_baseline(level, sizes, config)),
        ("broadcast", lambda: check_broadcast(sizes, config)),
    ]
    checks: List[Dict[str, Any]] = []
    start = time.time()
    for name, stage in stages:
        if progress:
            progress(name)
        try:
            checks.extend(stage())
        except GossipSimError as e:
            logger.error(f"Stage {name} aborted: {e}")
            checks.append(_check(name, EXACT, False, "error", "", f"{type(e).__name__}: {e}"))
    exact_failures = [c for c in checks if c["kind"] == EXACT and not c["passed"]]
    return {
        "success": not exact_failures,
        "level": level,
        "checks": checks,
        "exact_failures": len(exact_failures),
        "elapsed": time.time() - start,
    }
