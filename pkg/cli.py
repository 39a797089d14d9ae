#!/usr/bin/env python3
"""
Command Line Interface for the Gossip Exchange Simulator
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from gossip_sim import ExperimentConfig, SimulatorConfig
from gossip_sim.decompose import cluster, export_partition, verify_partition, xi_for_zeta
from gossip_sim.engine import load_traces
from gossip_sim.errors import GossipSimError, InvalidConfig, InvalidParams
from gossip_sim.experiment import run_experiment
from gossip_sim.graph import generate
from gossip_sim.graph_io import read_edge_list, write_edge_list
from gossip_sim.spanner import export_spanner, extract_spanner
from gossip_sim.verification import verify_suite

console = Console()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

# Experiment keys exposed as flags (flag name = key with '-' for '_').
EXPERIMENT_FLAGS = {
    "graph": str, "family": str, "n": int, "p": float, "k": int, "rows": int, "cols": int,
    "copies": int, "gadget": int, "graph_seed": int, "algorithm": str, "source": int,
    "inner": str, "seed_start": int, "seed_count": int, "c_tau": float, "tau": int,
    "epsilon": float, "round_cap": int, "output": str, "trace_dir": str, "diff_dir": str,
    "workers": int,
}
EXPERIMENT_LIST_FLAGS = {"sizes": int, "protocol": str, "seeds": int}


def main(argv: Optional[list] = None) -> int:
    """Main CLI entry point"""
    parser = argparse.ArgumentParser(
        description="Gossip Exchange Simulator - GOSSIP/LOCAL protocols, simulators and their invariants",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python cli.py run --experiment experiment.yaml              # Run an experiment file
  python cli.py run --family erdos_renyi --n 128 --p 0.05 --protocol superstep --seed-count 30
  python cli.py run --family figure1 --sizes 100 200 400 --protocol baseline superstep
  python cli.py verify --level quick                          # Invariant battery
  python cli.py gen dumbbell --k 4 --output graphs/dumbbell4.txt
  python cli.py spanner --graph g.txt --traces run.trace --output spanner.txt
  python cli.py decompose --graph g.txt --zeta 0.25 --output partition.txt
        """
    )
    parser.add_argument('--config', help='Simulator config file path (default: config.yaml)')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Run command
    run_parser = subparsers.add_parser('run', help='Run an experiment matrix and write CSV rows')
    run_parser.add_argument('--experiment', '-e', help='Experiment YAML file')
    for key, kind in EXPERIMENT_FLAGS.items():
        run_parser.add_argument(f"--{key.replace('_', '-')}", dest=key, type=kind, default=None)
    for key, kind in EXPERIMENT_LIST_FLAGS.items():
        run_parser.add_argument(f"--{key.replace('_', '-')}", dest=key, type=kind, nargs='+', default=None)

    # Verify command
    verify_parser = subparsers.add_parser('verify', help='Run the invariant and acceptance battery')
    verify_parser.add_argument('--level', '-l', choices=['quick', 'full'], default='quick')
    verify_parser.add_argument('--corpus', help='Directory of edge-list files to load and check')

    # Gen command
    gen_parser = subparsers.add_parser('gen', help='Write a generated graph as an edge list')
    gen_parser.add_argument('family', help='Graph family (path, cycle, star, clique, dumbbell, ...)')
    for key in ("n", "k", "rows", "cols", "copies", "gadget", "seed"):
        gen_parser.add_argument(f"--{key}", type=int, default=None)
    gen_parser.add_argument('--p', type=float, default=None)
    gen_parser.add_argument('--output', '-o', required=True, help='Output file')

    # Spanner command
    spanner_parser = subparsers.add_parser('spanner', help='Extract and certify a spanner from a trace dump')
    spanner_parser.add_argument('--graph', '-g', required=True, help='Graph edge-list file')
    spanner_parser.add_argument('--traces', '-t', required=True, help='Trace dump of a Superstep run')
    spanner_parser.add_argument('--output', '-o', required=True, help='Spanner output file')

    # Decompose command
    decompose_parser = subparsers.add_parser('decompose', help='Cluster a graph and check the partition bounds')
    decompose_parser.add_argument('--graph', '-g', required=True, help='Graph edge-list file')
    decompose_parser.add_argument('--zeta', type=float, default=1 / 3, help='Cut budget zeta (default: 1/3)')
    decompose_parser.add_argument('--mode', choices=['auto', 'exact', 'heuristic'], default='auto')
    decompose_parser.add_argument('--output', '-o', required=True, help='Partition report output file')

    args = parser.parse_args(argv)

    try:
        sim_config = load_config(args.config)
    except InvalidConfig as e:
        console.print(f"[red]✗ Invalid configuration: {e}[/red]")
        return EXIT_CONFIG
    setup_logging(sim_config.logging.level)

    if args.command == 'run':
        return handle_run_command(args, sim_config)
    elif args.command == 'verify':
        return handle_verify_command(args, sim_config)
    elif args.command == 'gen':
        return handle_gen_command(args)
    elif args.command == 'spanner':
        return handle_spanner_command(args)
    elif args.command == 'decompose':
        return handle_decompose_command(args, sim_config)
    parser.print_help()
    return EXIT_OK


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )


def load_config(config_path: Optional[str] = None) -> SimulatorConfig:
    """Load the simulator config from a file, or from config.yaml / the environment"""
    if config_path:
        return SimulatorConfig.load_from_file(config_path)
    if Path("config.yaml").exists():
        return SimulatorConfig.load_from_file("config.yaml")
    return SimulatorConfig.load_from_env()


def build_experiment(args) -> ExperimentConfig:
    """Experiment file (if any) with the command-line flags applied on top"""
    overrides = {key: getattr(args, key) for key in (*EXPERIMENT_FLAGS, *EXPERIMENT_LIST_FLAGS)}
    if args.experiment:
        return ExperimentConfig.load_from_file(args.experiment).with_overrides(overrides)
    return ExperimentConfig.from_dict({key: value for key, value in overrides.items() if value is not None})


def handle_run_command(args, sim_config: SimulatorConfig) -> int:
    """Handle the run command"""
    try:
        experiment = build_experiment(args)
    except InvalidConfig as e:
        console.print(f"[red]✗ Invalid experiment: {e}[/red]")
        return EXIT_CONFIG

    total = len(experiment.matrix()) * len(experiment.seed_list())
    console.print(f"[blue]Running {total} runs[/blue]")
    try:
        with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"),
                      BarColumn(), TextColumn("{task.completed}/{task.total}"), console=console) as progress:
            task = progress.add_task("Simulating", total=total)
            summary = run_experiment(experiment, sim_config, progress=lambda: progress.advance(task))
    except (GossipSimError, OSError) as e:
        console.print(f"[red]✗ Experiment failed: {e}[/red]")
        return EXIT_CONFIG if isinstance(e, (InvalidParams, InvalidConfig)) else EXIT_FAILED

    display_run_summary(summary)
    return EXIT_OK if summary["success"] else EXIT_FAILED


def display_run_summary(summary: dict) -> None:
    """Per-protocol summary of an experiment in a table"""
    table = Table(title="Experiment Summary")
    table.add_column("Protocol", style="cyan")
    table.add_column("Graph")
    table.add_column("Runs", justify="right")
    table.add_column("Completed", justify="right", style="green")
    table.add_column("Invariants OK", justify="right")
    table.add_column("Median Rounds", justify="right")

    groups: dict = {}
    for row in summary["rows"]:
        groups.setdefault((row["protocol"], row["graph"]), []).append(row)
    for (protocol, graph), rows in groups.items():
        rounds = sorted(r["rounds"] for r in rows)
        ok = sum(r["invariants_ok"] for r in rows)
        table.add_row(protocol, graph, str(len(rows)), str(sum(r["completed"] for r in rows)),
                      f"[green]{ok}[/green]" if ok == len(rows) else f"[red]{ok}[/red]",
                      str(rounds[len(rounds) // 2]))
    console.print(table)
    console.print(f"[dim]Results written to {summary['output']}[/dim]")
    if summary["failures"]:
        console.print(f"[red]✗ {summary['failures']} runs failed an exact invariant[/red]")


def handle_verify_command(args, sim_config: SimulatorConfig) -> int:
    """Handle the verify command"""
    console.print(f"[blue]Running {args.level} verification suite...[/blue]")
    with console.status("Verifying") as status:
        report = verify_suite(args.level, sim_config, corpus_dir=args.corpus,
                              progress=lambda stage: status.update(f"Verifying: {stage}"))
    display_verify_report(report)
    return EXIT_OK if report["success"] else EXIT_FAILED


def display_verify_report(report: dict) -> None:
    table = Table(title=f"Verification ({report['level']})")
    table.add_column("Check", style="cyan")
    table.add_column("Kind")
    table.add_column("Result")
    table.add_column("Measured", justify="right")
    table.add_column("Threshold", justify="right")
    table.add_column("Detail", style="dim")
    for check in report["checks"]:
        result = "[green]✓ pass[/green]" if check["passed"] else (
            "[red]✗ FAIL[/red]" if check["kind"] == "exact" else "[yellow]⚠ below[/yellow]")
        table.add_row(check["name"], check["kind"], result, str(check["measured"]),
                      str(check["threshold"]), check["detail"])
    console.print(table)
    console.print(f"[dim]Elapsed: {report['elapsed']:.1f} seconds[/dim]")
    if report["success"]:
        console.print("[green]✓ All exact checks passed[/green]")
    else:
        console.print(f"[red]✗ {report['exact_failures']} exact checks failed[/red]")


def handle_gen_command(args) -> int:
    """Handle the gen command"""
    params = {key: getattr(args, key) for key in ("n", "k", "rows", "cols", "copies", "gadget", "seed", "p")
              if getattr(args, key) is not None}
    try:
        graph = generate(args.family, **params)
    except InvalidParams as e:
        console.print(f"[red]✗ {e}[/red]")
        return EXIT_CONFIG
    write_edge_list(graph, args.output, {"graph": graph.name})
    console.print(f"[green]✓ Wrote {graph.name} (n={graph.n}, m={graph.m}) to {args.output}[/green]")
    return EXIT_OK


def handle_spanner_command(args) -> int:
    """Handle the spanner command"""
    try:
        graph = read_edge_list(args.graph)
        header, traces = load_traces(args.traces)
    except (GossipSimError, OSError) as e:
        console.print(f"[red]✗ Could not load inputs: {e}[/red]")
        return EXIT_CONFIG

    try:
        result = extract_spanner(graph, traces, header.get("completed", "True") == "True")
    except GossipSimError as e:
        console.print(f"[red]✗ {e}[/red]")
        return EXIT_FAILED
    check = result.certify(graph)
    export_spanner(args.output, result, graph.name)

    table = Table(title=f"Spanner of {graph.name}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("edges kept", f"{result.subgraph.m}/{graph.m}")
    table.add_row("rounds T", str(result.source_rounds))
    table.add_row("neighbor stretch", str(check["neighbor_stretch"]))
    table.add_row("hereditary density", str(check["density"]))
    table.add_row("certified stretch", str(result.certified_stretch))
    console.print(table)

    if check["success"]:
        console.print(f"[green]✓ Spanner certified and written to {args.output}[/green]")
        return EXIT_OK
    console.print("[red]✗ Spanner does not meet the (T, 0) stretch and density bounds[/red]")
    return EXIT_FAILED


def handle_decompose_command(args, sim_config: SimulatorConfig) -> int:
    """Handle the decompose command"""
    try:
        graph = read_edge_list(args.graph)
    except (GossipSimError, OSError) as e:
        console.print(f"[red]✗ Could not load graph: {e}[/red]")
        return EXIT_CONFIG

    try:
        with console.status(f"Clustering {graph.name}"):
            partition = cluster(graph, None, xi_for_zeta(graph, args.zeta), args.mode, sim_config.decompose)
            report = verify_partition(graph, partition, args.zeta, sim_config.decompose)
    except GossipSimError as e:
        console.print(f"[red]✗ {e}[/red]")
        return EXIT_CONFIG
    export_partition(args.output, report, graph.name)

    table = Table(title=f"Decomposition of {graph.name}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("clusters", str(len(partition.clusters)))
    table.add_row("cut fraction", f"{report['cut_fraction']:.4f}")
    table.add_row("conductance bound", f"{report['conductance_bound']:.6f}")
    table.add_row("recursion depth", str(partition.max_depth))
    table.add_row("certified", str(partition.certified))
    console.print(table)

    if report["success"]:
        console.print(f"[green]✓ Partition meets its bounds, report written to {args.output}[/green]")
        return EXIT_OK
    for violation in report["violations"]:
        console.print(f"[red]✗ {violation}[/red]")
    return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
