#!/usr/bin/env python3
"""
View experiment results: per-(protocol, graph) round statistics and the runs
that failed an invariant or did not complete
"""

import csv
import sys
from pathlib import Path
from typing import Dict, List

import numpy as np
from rich.console import Console
from rich.table import Table

console = Console()


def load_rows(filename: str) -> List[Dict[str, str]]:
    with open(filename, 'r', newline='') as f:
        return list(csv.DictReader(f))


def view_results(filename: str):
    """View experiment results from a CSV file"""
    rows = load_rows(filename)
    console.print(f"\n[bold]Experiment Results[/bold]")
    console.print(f"Results file: {filename} ({len(rows)} runs)\n")

    # Group results by protocol and graph
    groups: Dict[tuple, List[Dict[str, str]]] = {}
    for row in rows:
        groups.setdefault((row['protocol'], row['graph']), []).append(row)

    table = Table(title="Rounds per Protocol")
    table.add_column("Protocol", style="cyan")
    table.add_column("Graph")
    table.add_column("n", justify="right")
    table.add_column("m", justify="right")
    table.add_column("Runs", justify="right")
    table.add_column("Completed", justify="right")
    table.add_column("Rounds (median)", justify="right")
    table.add_column("Rounds (p90)", justify="right")
    table.add_column("Messages (mean)", justify="right")

    for (protocol, graph), group in groups.items():
        rounds = np.array([int(r['rounds']) for r in group])
        messages = np.array([int(r['messages']) for r in group])
        completed = sum(r['completed'] == 'true' for r in group)
        style = "green" if completed == len(group) else "yellow"
        table.add_row(
            protocol, graph, group[0]['n'], group[0]['m'], str(len(group)),
            f"[{style}]{completed}[/{style}]",
            f"{np.median(rounds):.0f}", f"{np.percentile(rounds, 90):.0f}",
            f"{messages.mean():.1f}",
        )
    console.print(table)

    failed = [r for r in rows if r['invariants_ok'] != 'true' or r['completed'] != 'true']
    if failed:
        console.print(f"\n[yellow]Failed/Incomplete Runs ({len(failed)}):[/yellow]")
        for row in failed:
            reason = "invariant violated" if row['invariants_ok'] != 'true' else "incomplete"
            console.print(f"  [red]✗[/red] {row['protocol']} on {row['graph']} seed {row['seed']}: {reason}")
    else:
        console.print("\n[green]✓ All runs completed with invariants intact[/green]")


def main():
    if len(sys.argv) < 2:
        # Find the most recent results file
        results_dir = Path("results")
        csv_files = list(results_dir.glob("*.csv"))

        if not csv_files:
            console.print("[red]No results found in results/ directory[/red]")
            sys.exit(1)

        latest_file = max(csv_files, key=lambda p: p.stat().st_mtime)
        console.print(f"[yellow]No file specified, using most recent: {latest_file}[/yellow]")
        view_results(str(latest_file))
    else:
        view_results(sys.argv[1])


if __name__ == "__main__":
    main()
