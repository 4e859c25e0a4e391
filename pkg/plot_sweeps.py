#!/usr/bin/env python3
"""
Render sweep CSVs written by ``rsma-igs sweep`` as interactive HTML plots.

Usage:
    python plot_sweeps.py results/fig1.csv results/fig2.csv
    python plot_sweeps.py results/fig4.csv --metric kappa --out fig4.html
"""

import argparse
import sys
from pathlib import Path

from rich.console import Console

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.utils.plotting import plot_csv

console = Console()


def main():
    parser = argparse.ArgumentParser(description="Plot sweep CSVs with plotly")
    parser.add_argument("csv", nargs="+", help="Sweep CSV files")
    parser.add_argument("--metric", help="Column to plot (default depends on the experiment)")
    parser.add_argument("--out", help="HTML output path (single CSV only)")
    args = parser.parse_args()

    if args.out and len(args.csv) > 1:
        console.print("[red]Error: --out needs exactly one CSV[/red]")
        sys.exit(2)

    for path in args.csv:
        if not Path(path).exists():
            console.print(f"[red]Error: file does not exist: {path}[/red]")
            sys.exit(2)
        target = plot_csv(path, args.out, args.metric)
        console.print(f"📈 {path} -> [cyan]{target}[/cyan]")


if __name__ == "__main__":
    main()
