"""
Experiment runner: executes an ExperimentConfig matrix and writes one CSV row
per (configuration, seed)
"""

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .config import SimulatorConfig
from .engine import RandomSource, dump_traces
from .errors import GossipSimError
from .experiment_config import ExperimentConfig
from .graph import Graph, generate
from .graph_io import read_edge_list
from .local_algorithms import BfsLabeling, LocalAlgorithm, NeighborCollection, RumorFlooding, SourceFlooding
from .protocols import (
    default_tau,
    direct_exchange,
    greedy_unheard_baseline,
    rumor_by_superstep,
    schedule_replay,
    superstep,
    uniform_gossip,
)
from .simulate import (
    run_local,
    simulate_direct_exchange,
    simulate_round_robin,
    simulate_superstep,
    simulate_via_spanner,
    write_equivalence_diff,
)
from .spanner import extract_spanner, message_bound

logger = logging.getLogger(__name__)

CSV_FIELDS = ["protocol", "graph", "n", "m", "seed", "tau", "epsilon", "rounds",
              "iterations", "messages", "completed", "invariants_ok"]


def build_graphs(config: ExperimentConfig) -> List[Graph]:
    """One graph per parameter set of the config (a single one for a file)"""
    if config.graph is not None:
        return [read_edge_list(config.graph)]
    return [generate(config.family, **params) for params in config.graph_params()]


def make_algorithm(name: str, g: Graph, source: int = 0) -> LocalAlgorithm:
    if name == "flooding":
        return SourceFlooding(source, horizon=g.n)
    if name == "bfs":
        return BfsLabeling(source, horizon=g.n)
    if name == "rumor":
        return RumorFlooding(g.n)
    if name == "neighbors":
        return NeighborCollection()
    raise ValueError(f"unknown algorithm {name!r}")


def _row(protocol: str, g: Graph, seed: int, **values) -> Dict[str, Any]:
    row = {"protocol": protocol, "graph": g.name, "n": g.n, "m": g.m, "seed": seed,
           "tau": "", "epsilon": "", "rounds": 0, "iterations": 0, "messages": 0,
           "completed": False, "invariants_ok": True}
    row.update(values)
    return row


def run_single(protocol: str, g: Graph, seed: int, config: ExperimentConfig,
               sim_config: SimulatorConfig) -> Dict[str, Any]:
    """Execute one (protocol, graph, seed) run and return its CSV row"""
    rng = RandomSource(seed)
    tau = config.tau or default_tau(g, config.c_tau)

    if protocol == "uniform_gossip":
        report = uniform_gossip(g, tau, rng)
        rounds = report.completion_round if report.completion_round is not None else tau
        return _row(protocol, g, seed, tau=tau, rounds=rounds,
                    messages=report.stats.connections, completed=report.completed)

    if protocol == "superstep":
        report = superstep(g, tau, rng, config=sim_config.protocols)
        within_budget = report.stats.connections <= message_bound(g, sim_config.protocols.c_msg)
        if config.trace_dir:
            path = Path(config.trace_dir) / f"{_slug(g.name)}_seed{seed}.trace"
            dump_traces(path, report.traces, {"graph": g.name, "seed": seed, "tau": tau,
                                              "total_rounds": report.total_rounds,
                                              "completed": report.completed})
        return _row(protocol, g, seed, tau=tau, rounds=report.total_rounds, iterations=report.iterations,
                    messages=report.stats.connections, completed=report.completed,
                    invariants_ok=report.invariants_ok and within_budget)

    if protocol == "rumor":
        report = rumor_by_superstep(g, tau, rng, sim_config.protocols)
        return _row(protocol, g, seed, tau=tau, rounds=report.rounds, iterations=report.invocations,
                    messages=report.stats.connections, completed=report.completed,
                    invariants_ok=report.invariants_ok)

    if protocol == "direct_exchange":
        report = direct_exchange(g, config.epsilon, sim_config.protocols)
        replay_ok = schedule_replay(g, report.schedule) <= report.rounds
        return _row(protocol, g, seed, epsilon=config.epsilon, rounds=report.rounds,
                    iterations=report.windows, messages=sum(report.initiations),
                    completed=report.completed, invariants_ok=report.invariants_ok and replay_ok)

    if protocol == "baseline":
        report = greedy_unheard_baseline(g, rng, config.round_cap)
        return _row(protocol, g, seed, rounds=report.rounds, messages=report.stats.connections,
                    completed=report.completed)

    alg = make_algorithm(config.algorithm, g, config.source)
    values: Dict[str, Any] = {}
    if protocol == "simulate_superstep":
        outcome = simulate_superstep(g, alg, seed, tau=tau, rng=rng, config=sim_config)
        values["tau"] = tau
    elif protocol == "simulate_round_robin":
        outcome = simulate_round_robin(g, alg, seed, config=sim_config)
    elif protocol == "simulate_direct_exchange":
        outcome = simulate_direct_exchange(g, alg, seed, config.epsilon, config=sim_config)
        values["epsilon"] = config.epsilon
    elif protocol == "simulate_spanner":
        source = superstep(g, tau, rng.child("spanner"), config=sim_config.protocols)
        spanner = extract_spanner(g, source.traces, source.completed)
        spanner.certify(g)
        outcome = simulate_via_spanner(g, alg, seed, spanner, inner=config.inner, config=sim_config)
        values["tau"] = tau
    else:
        raise ValueError(f"unknown protocol {protocol!r}")

    if not outcome.equivalent and config.diff_dir:
        reference = run_local(g, alg, seed, sim_config)
        write_equivalence_diff(Path(config.diff_dir) / f"{protocol}_{_slug(g.name)}_seed{seed}.diff",
                               reference, outcome)
    return _row(protocol, g, seed, rounds=outcome.gossip_rounds, iterations=outcome.model_rounds,
                completed=True, invariants_ok=outcome.invariants_ok, **values)


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name).strip("_")


def _run_task(protocol: str, g: Graph, seed: int, config: ExperimentConfig,
              sim_config: SimulatorConfig) -> Dict[str, Any]:
    """run_single that turns simulator errors into an incomplete row"""
    try:
        return run_single(protocol, g, seed, config, sim_config)
    except GossipSimError as e:
        logger.error(f"{protocol} on {g.name} seed {seed} failed: {type(e).__name__}: {e}")
        return _row(protocol, g, seed, completed=False)


def _setup_run_log(output_dir: Path) -> logging.Handler:
    output_dir.mkdir(parents=True, exist_ok=True)
    log_filename = output_dir / f"experiment_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
    handler = logging.FileHandler(log_filename)
    handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    logging.getLogger("gossip_sim").addHandler(handler)
    return handler


def write_rows(path: Path, rows: List[Dict[str, Any]]) -> None:
    """Single CSV writer for the frozen schema"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _format(row[key]) for key in CSV_FIELDS})


def _format(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def run_experiment(config: ExperimentConfig, sim_config: Optional[SimulatorConfig] = None,
                   progress=None) -> Dict[str, Any]:
    """Run the whole matrix and write the CSV.

    Rows are ordered by (config index, seed) whatever the worker count.
    `progress` is an optional callable invoked once per finished run.
    """
    sim_config = sim_config or SimulatorConfig()
    output = Path(config.output)
    handler = _setup_run_log(output.parent)
    try:
        graphs = build_graphs(config)
        matrix = config.matrix()
        seeds = config.seed_list()
        tasks: List[Tuple[Tuple[int, int], str, Graph, int]] = []
        for index, protocol, _ in matrix:
            g = graphs[index % len(graphs)]
            for seed in seeds:
                tasks.append(((index, seed), protocol, g, seed))
        logger.info(f"Running {len(tasks)} runs ({len(matrix)} configurations x {len(seeds)} seeds)")

        results: Dict[Tuple[int, int], Dict[str, Any]] = {}
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=min(config.workers, os.cpu_count() or 1)) as executor:
                future_to_key = {
                    executor.submit(_run_task, protocol, g, seed, config, sim_config): key
                    for key, protocol, g, seed in tasks
                }
                for future in as_completed(future_to_key):
                    results[future_to_key[future]] = future.result()
                    if progress:
                        progress()
        else:
            for key, protocol, g, seed in tasks:
                results[key] = _run_task(protocol, g, seed, config, sim_config)
                if progress:
                    progress()

        rows = [results[key] for key in sorted(results)]
        write_rows(output, rows)
        failures = sum(1 for row in rows if not row["invariants_ok"])
        logger.info(f"Wrote {len(rows)} rows to {output} ({failures} with failed invariants)")
        return {
            "success": failures == 0,
            "rows": rows,
            "output": str(output),
            "failures": failures,
            "incomplete": sum(1 for row in rows if not row["completed"]),
        }
    finally:
        logging.getLogger("gossip_sim").removeHandler(handler)
        handler.close()
