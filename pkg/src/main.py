"""Command-line entry point for the RSMA power and impropriety optimizers."""

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from .experiments import ExperimentConfig, SweepRunner, parse_config, run, write_csv
from .experiments.presets import PRESETS
from .utils import ConfigError, RsmaError, get_logger, set_package_verbosity

logger = get_logger(__name__)
console = Console()

SUBCOMMANDS = {
    "eval": "Evaluate all rates at a fixed allocation (solver.kappa/p_c/p1/p2)",
    "private-max": "Maximize the private sum rate (kappa = 1, p_c = tau_sic, best split)",
    "common-max": "Maximize the common rate at fixed private powers (solver.p1/p2)",
    "sum-rate-sac": "Train the soft actor-critic agent and report its greedy allocation",
    "oracle": "Exhaustive grid search of the sum-rate problem",
    "sweep": "Run a full experiment sweep (preset or custom) and write its CSV",
}
TABLE_COLUMNS = ("series", "sweep_value", "kappa", "p_c", "p1", "p2", "r1", "r2", "rc", "r_tot", "feasible", "branch")


class ExperimentApp:
    """Runs one subcommand and reports results on the console."""

    def __init__(self, config: ExperimentConfig, checkpoint_dir: Optional[str] = None, progress: bool = True):
        self.config = config
        self.checkpoint_dir = checkpoint_dir
        self.progress = progress

    def sweep(self, output: Optional[str]) -> Path:
        console.print(f"\n[bold cyan]Experiment {self.config.experiment}[/bold cyan]\n")
        path = run(self.config, output, checkpoint_dir=self.checkpoint_dir, progress=self.progress)
        console.print(f"CSV written: [cyan]{path}[/cyan]")
        return path

    def single(self, solver: str, output: Optional[str]) -> pd.DataFrame:
        runner = SweepRunner(self.config, checkpoint_dir=self.checkpoint_dir, progress=self.progress)
        frame = runner.run_point(solver)
        self.print_rows(frame, title=solver)

        target = output or self.config.output
        if target:
            path = write_csv(frame, target)
            console.print(f"CSV written: [cyan]{path}[/cyan]")
            for index, log in sorted(runner.training_logs.items()):
                log_path = path.with_name(f"{path.stem}_training_{index:04d}.csv")
                log.to_frame().to_csv(log_path, lineterminator="\n")
                console.print(f"Training log: [cyan]{log_path}[/cyan]")
        return frame

    def print_rows(self, frame: pd.DataFrame, title: str) -> None:
        columns = list(TABLE_COLUMNS)
        if self.config.verify:
            columns.append("oracle_value")

        table = Table(title=title, show_header=True)
        for name in columns:
            table.add_column(name, justify="left" if name in ("series", "branch") else "right")

        for _, row in frame.iterrows():
            cells = []
            for name in columns:
                value = row[name]
                if isinstance(value, (bool, np.bool_)):
                    cells.append("[green]yes[/green]" if value else "[red]no[/red]")
                elif isinstance(value, float):
                    cells.append("" if math.isnan(value) else f"{value:.6g}")
                else:
                    cells.append(str(value))
            table.add_row(*cells)

        console.print(table)


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    preset = getattr(args, "preset", None)
    if args.config:
        config = parse_config(args.config)
        if preset and preset != config.experiment:
            raise ConfigError(f"--preset {preset} conflicts with experiment '{config.experiment}'", key="experiment")
    elif preset:
        config = ExperimentConfig(experiment=preset)
    else:
        raise ConfigError("--config is required" + (" (or --preset)" if args.command == "sweep" else ""))

    if args.workers is not None and args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")

    return config.with_overrides(
        seed=args.seed,
        output=args.out,
        verify=True if args.verify else None,
        pgs=True if args.pgs else None,
        workers=args.workers,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsma-igs",
        description="Power and impropriety optimization for two-user RSMA with imperfect SIC",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in SUBCOMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.add_argument("--config", help="Path to the YAML experiment config")
        sub.add_argument("--seed", type=int, help="Override the config seed")
        sub.add_argument("--verify", action="store_true", help="Add grid-oracle values to every row")
        sub.add_argument("--out", help="CSV output path")
        sub.add_argument("--pgs", action="store_true", help="Force proper signaling (kappa = 0)")
        sub.add_argument("--workers", type=int, help="Parallel sweep workers")
        sub.add_argument("--no-progress", action="store_true", help="Hide progress bars")
        if name in ("sum-rate-sac", "sweep"):
            sub.add_argument("--checkpoint-dir", help="Save trained SAC agents to this directory")
        if name == "sweep":
            sub.add_argument("--preset", choices=sorted(PRESETS), help="Run a built-in experiment")
    return parser


def main(argv=None):
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)
    set_package_verbosity(args.verbose)

    try:
        config = _load_config(args)
        app = ExperimentApp(
            config,
            checkpoint_dir=getattr(args, "checkpoint_dir", None),
            progress=not args.no_progress,
        )
        if args.command == "sweep":
            app.sweep(args.out)
        else:
            app.single(args.command, args.out)
        console.print("\n[bold green]✓ Done[/bold green]\n")

    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted by user[/yellow]")
        sys.exit(130)
    except RsmaError as e:
        if e.exit_code == RsmaError.exit_code:
            logger.exception("Run failed")
        console.print(f"\n[red]Error: {e}[/red]")
        sys.exit(e.exit_code)
    except Exception as e:
        logger.exception("Run failed")
        console.print(f"\n[red]Error: {e}[/red]")
        sys.exit(RsmaError.exit_code)


if __name__ == "__main__":
    main()
