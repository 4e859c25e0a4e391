"""Tests for experiment configs, sweeps and the command line."""

import math
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from src.channel import Allocation, Scenario, full_report
from src.experiments import (
    CSV_COLUMNS,
    SCHEMA_VERSION,
    ExperimentConfig,
    SweepRunner,
    build_config,
    parse_config,
    resolve,
    run,
)
from src.main import main
from src.solvers import Branch, monotonicity
from src.utils import ConfigError, InfeasibleError
from src.utils.plotting import plot_csv, sweep_figure

EVAL_POINT = {
    "experiment": "custom",
    "scenario": {"gamma1": 4.0, "gamma2": 1.0, "lam": 0.5, "power_budget": 4.0, "tau_sic": 1.0},
    "solver": {"name": "eval", "kappa": 1.0, "p_c": 2.0, "p1": 1.0, "p2": 1.0},
}

COMMON_SWEEP = {
    "experiment": "custom",
    "scenario": {"gamma1": 4.0, "gamma2": 1.0, "lam": 1.0, "power_budget": 2.45, "tau_sic": 0.3, "r_min": 0.5},
    "sweep": {"variable": "power_budget", "start": 2.2, "stop": 2.45, "points": 2},
    "solver": {"name": "common-max", "p1": 1.0, "p2": 1.0},
}


def _write_yaml(path: Path, data) -> Path:
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
    return path


class TestConfigParsing:
    """Test strict YAML config validation."""

    def test_defaults(self):
        """Test an empty config fills in every default."""
        config = build_config({})
        assert config.experiment == "custom"
        assert config.seed == 0
        assert config.solver.name == "private-max"
        assert config.sweep is None
        assert config.workers == 1
        assert not config.verify and not config.pgs
        assert config.output_path() == Path("results") / "custom.csv"
        assert config.scenario["noise_power"] == 1.0
        assert config.scenario["gamma2"] == 1.0

    def test_minimal_scenario_uses_unit_h2(self):
        """Test a scenario without gamma2 gets the unit weak-user gain."""
        config = build_config({"scenario": {"gamma1": 25, "lam": 0.5, "power_budget": 10, "tau_sic": 1}})
        scenario = config.scenario_at()
        assert scenario.channel.gamma2 == pytest.approx(1.0)
        assert scenario.channel.gamma1 == pytest.approx(25.0)

        halved = build_config({"scenario": {"gamma1": 25, "noise_power": 2.0}})
        assert halved.scenario["gamma2"] == pytest.approx(0.5)

    def test_unknown_top_level_key(self):
        """Test an unknown key is reported by name."""
        with pytest.raises(ConfigError) as exc:
            build_config({"experiment": "custom", "epochs": 3})
        assert exc.value.key == "epochs"

    def test_unknown_nested_key_line(self, tmp_path):
        """Test errors carry the dotted key and its line number."""
        path = tmp_path / "bad.yaml"
        path.write_text("experiment: custom\nscenario:\n  gamma1: 4.0\n  gamma_3: 1.0\n", encoding="utf-8")
        with pytest.raises(ConfigError) as exc:
            parse_config(path)
        assert exc.value.key == "scenario.gamma_3"
        assert exc.value.line == 4
        assert "line 4" in str(exc.value)

    def test_missing_sweep_key(self):
        """Test every sweep needs variable, start, stop and points."""
        with pytest.raises(ConfigError) as exc:
            build_config({"sweep": {"variable": "power_budget", "start": 0, "points": 4}})
        assert exc.value.key == "sweep.stop"

    def test_db_sweep(self):
        """Test a 0..30 dB axis in 7 points is 10^(0..3) in linear units."""
        config = build_config(
            {"sweep": {"variable": "power_budget", "start": 0, "stop": 30, "points": 7, "scale": "db"}}
        )
        np.testing.assert_allclose(config.sweep.values(), 10.0 ** np.linspace(0.0, 3.0, 7))
        np.testing.assert_array_equal(config.sweep.nominal(), np.linspace(0.0, 30.0, 7))
        assert config.sweep.label == "power_budget_db"

    def test_wrong_type(self):
        """Test a string where a number belongs."""
        with pytest.raises(ConfigError) as exc:
            build_config({"scenario": {"gamma1": "strong"}})
        assert exc.value.key == "scenario.gamma1"

    def test_gains_become_cnrs(self):
        """Test h1/h2 are converted with the noise power."""
        config = build_config({"scenario": {"h1": 2.0, "h2": 1.0, "noise_power": 0.5}})
        assert config.scenario["gamma1"] == pytest.approx(8.0)
        assert config.scenario["gamma2"] == pytest.approx(2.0)

    def test_gains_and_cnrs_conflict(self):
        """Test h1 and gamma1 cannot be mixed."""
        with pytest.raises(ConfigError):
            build_config({"scenario": {"h1": 2.0, "gamma1": 4.0}})

    def test_solver_cannot_sweep_its_own_variable(self):
        """Test private-max refuses a kappa sweep."""
        with pytest.raises(ConfigError) as exc:
            build_config({"sweep": {"variable": "kappa", "start": 0, "stop": 1, "points": 3}})
        assert exc.value.key == "sweep.variable"

    def test_unknown_solver(self):
        """Test only known solvers are accepted."""
        with pytest.raises(ConfigError):
            build_config({"solver": {"name": "gradient-descent"}})

    def test_sac_section(self):
        """Test SAC overrides and hidden sizes."""
        config = build_config({"sac": {"episodes": 5, "hidden_sizes": [8, 8], "psi": 5.0}})
        assert config.sac.episodes == 5
        assert config.sac.hidden_sizes == (8, 8)
        assert config.sac.psi == 5.0
        with pytest.raises(ConfigError):
            build_config({"sac": {"learning_rate": 1e-3}})
        with pytest.raises(ConfigError):
            build_config({"sac": {"gamma_discount": 1.0}})

    def test_invalid_yaml(self, tmp_path):
        """Test YAML syntax errors become ConfigError."""
        path = tmp_path / "broken.yaml"
        path.write_text("experiment: [custom\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            parse_config(path)

    def test_missing_file(self, tmp_path):
        """Test a missing config file."""
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "absent.yaml")

    def test_overrides_ignore_none(self):
        """Test CLI overrides leave unset options alone."""
        config = build_config({"seed": 3}).with_overrides(seed=None, workers=4)
        assert config.seed == 3
        assert config.workers == 4


class TestPresets:
    """Test the built-in experiment presets."""

    @pytest.mark.parametrize(
        "name,tasks,starred",
        [("fig1", 8 * 16, 0), ("fig2", 6 * 12, 6), ("fig3", 4 * 7, 0), ("fig4", 8 * 7, 0)],
    )
    def test_task_counts(self, name, tasks, starred):
        """Test each preset expands into one task per series and sweep value."""
        runner = SweepRunner(ExperimentConfig(experiment=name), progress=False)
        expanded = runner.tasks()
        assert len(expanded) == tasks
        assert sum(t.starred for t in expanded) == starred
        assert [t.index for t in expanded] == list(range(tasks))

    def test_config_overrides_preset(self):
        """Test config scenario fields and sweep replace the preset's."""
        config = build_config(
            {
                "experiment": "fig1",
                "scenario": {"tau_sic": 0.5},
                "sweep": {"variable": "power_budget", "start": 0, "stop": 10, "points": 3, "scale": "db"},
            }
        )
        preset = resolve(config)
        assert preset.scenario["tau_sic"] == 0.5
        assert preset.scenario["gamma1"] == 25.0
        assert preset.sweep.points == 3

    def test_custom_needs_sweep(self):
        """Test a custom sweep without an axis is refused."""
        with pytest.raises(ConfigError):
            resolve(build_config(EVAL_POINT))


class TestSweepRunner:
    """Test row computation and CSV output."""

    def test_eval_single_point(self):
        """Test the eval solver reports the rate engine's values."""
        frame = SweepRunner(build_config(EVAL_POINT), progress=False).run_point("eval")
        assert len(frame) == 1
        row = frame.iloc[0]
        scenario = Scenario.create(gamma1=4.0, gamma2=1.0, lam=0.5, power_budget=4.0, tau_sic=1.0)
        report = full_report(scenario, Allocation(p_c=2.0, p1=1.0, p2=1.0, kappa=1.0))
        assert row["r_tot"] == pytest.approx(report.r_tot, abs=1e-12)
        assert row["rc"] == pytest.approx(report.rc, abs=1e-12)
        assert bool(row["feasible"])
        assert row["schema_version"] == SCHEMA_VERSION

    def test_eval_keeps_caller_labels(self):
        """Test swapped users are reported under their original labels."""
        data = {
            "scenario": {"gamma1": 1.0, "gamma2": 4.0, "lam": 0.5, "power_budget": 4.0, "tau_sic": 1.0},
            "solver": {"name": "eval", "kappa": 0.5, "p_c": 1.5, "p1": 2.0, "p2": 0.5},
        }
        row = SweepRunner(build_config(data), progress=False).run_point("eval").iloc[0]
        assert row["p1"] == 2.0
        assert row["p2"] == 0.5

    def test_eval_needs_allocation(self):
        """Test eval without a full allocation is a config error."""
        config = build_config({"scenario": EVAL_POINT["scenario"], "solver": {"name": "eval", "kappa": 1.0}})
        with pytest.raises(ConfigError):
            SweepRunner(config, progress=False).run_point("eval")

    def test_common_max_sweep_rows(self):
        """Test an infeasible point becomes a row instead of an error."""
        frame = SweepRunner(build_config(COMMON_SWEEP), progress=False).run()
        assert list(frame.columns) == list(CSV_COLUMNS)
        infeasible, limited = frame.iloc[0], frame.iloc[1]
        assert not bool(infeasible["feasible"])
        assert infeasible["branch"] == "infeasible"
        assert math.isnan(infeasible["r_tot"])
        assert bool(limited["feasible"])
        assert limited["branch"] == "budget_limited"
        assert limited["p_c"] == pytest.approx(0.45, abs=1e-9)
        assert limited["kappa"] == pytest.approx(math.sqrt(1 - 0.1 / 0.2025), abs=1e-9)

    def test_strict_point_raises(self):
        """Test a single infeasible point raises InfeasibleError."""
        data = dict(COMMON_SWEEP)
        data.pop("sweep")
        data["scenario"] = dict(COMMON_SWEEP["scenario"], power_budget=2.2)
        with pytest.raises(InfeasibleError):
            SweepRunner(build_config(data), progress=False).run_point("common-max")

    def test_starred_rows(self):
        """Test starred closed-form rows report the optimal kappa as sweep value."""
        config = build_config(
            {"experiment": "fig2", "sweep": {"variable": "kappa", "start": 0, "stop": 1, "points": 3}}
        )
        frame = SweepRunner(config, progress=False).run()
        assert len(frame) == 6 * 4
        starred = frame[frame["starred"]]
        assert len(starred) == 6
        for _, row in starred.iterrows():
            if row["feasible"]:
                assert row["sweep_value"] == row["kappa"]
                assert row["solver"] == "common-max"

    def test_fig1_improper_gain_grows_with_lambda(self):
        """Test kappa = 1 never loses to kappa = 0 and its 30 dB gain grows with lambda."""
        frame = SweepRunner(build_config({"experiment": "fig1"}), progress=False).run()
        frame = frame.assign(private=frame["r1"] + frame["r2"])
        gaps = []
        for lam in (0.1, 0.3, 0.5, 1.0):
            proper = frame[frame["series"] == f"lambda={lam:g},kappa=0"].sort_values("sweep_value")
            improper = frame[frame["series"] == f"lambda={lam:g},kappa=1"].sort_values("sweep_value")
            assert len(proper) == len(improper) == 16
            gap = improper["private"].to_numpy() - proper["private"].to_numpy()
            assert np.all(gap >= -1e-6), lam
            gaps.append(gap[-1])
        assert np.all(np.diff(gaps) > 0)
        assert gaps[-1] > 1.0

    def test_fig2_star_tops_each_curve(self):
        """Test every fig2 star reaches its curve's maximum and the curve slope follows M2."""
        frame = SweepRunner(build_config({"experiment": "fig2"}), progress=False).run()
        step = 0.1
        branches = {}

        for label, group in frame.groupby("series", sort=False):
            star = group[group["starred"]].iloc[0]
            curve = group[~group["starred"] & group["feasible"]].sort_values("kappa")
            rc = curve["rc"].to_numpy()
            assert star["feasible"], label
            assert len(rc) >= 2, label
            assert star["rc"] >= rc.max() - 1e-9, label
            assert abs(star["kappa"] - curve["kappa"].to_numpy()[np.argmax(rc)]) <= step + 1e-9, label

            branches[label] = star["branch"]
            if star["branch"] == Branch.UNCONSTRAINED.value:
                assert star["kappa"] == 0.0
                assert np.all(np.diff(rc) < 0), label
                continue
            scenario = Scenario.create(
                gamma1=4.0,
                gamma2=1.0,
                lam=star["lambda"],
                power_budget=20.0,
                tau_sic=2.0,
                r_min=star["r_min"],
            )
            indicator = monotonicity(scenario, 1.7, 1.7, 2)
            assert np.sign(rc[1] - rc[0]) == np.sign(indicator.value), label

        assert branches == {
            "lambda=0.3,r_min=0.2": "unconstrained",
            "lambda=0.3,r_min=0.5": "proper",
            "lambda=0.6,r_min=0.2": "unconstrained",
            "lambda=0.6,r_min=0.5": "max_impropriety",
            "lambda=1,r_min=0.2": "budget_limited",
            "lambda=1,r_min=0.5": "max_impropriety",
        }

    def test_csv_is_deterministic(self, tmp_path):
        """Test identical configs give byte-identical CSVs, whatever the worker count."""
        config = build_config(
            {
                "experiment": "fig1",
                "sweep": {"variable": "power_budget", "start": 0, "stop": 20, "points": 3, "scale": "db"},
            }
        )
        first = run(config, tmp_path / "a.csv", progress=False)
        second = run(config.with_overrides(workers=4), tmp_path / "b.csv", progress=False)
        assert first.read_bytes() == second.read_bytes()

        frame = pd.read_csv(first)
        assert list(frame.columns) == list(CSV_COLUMNS)
        assert len(frame) == 8 * 3
        assert set(frame["sweep_variable"]) == {"power_budget_db"}

    def test_training_is_seeded_per_task(self):
        """Test SAC tasks get distinct seeds derived from the config seed."""
        runner = SweepRunner(ExperimentConfig(experiment="fig3", seed=5), progress=False)
        seeds = [t.seed for t in runner.tasks()]
        assert seeds == list(range(5, 5 + len(seeds)))


class TestPlotting:
    """Test HTML plots of sweep CSVs."""

    def test_starred_series_get_star_traces(self):
        """Test one line per series plus one star trace per starred series."""
        config = build_config(
            {"experiment": "fig2", "sweep": {"variable": "kappa", "start": 0, "stop": 1, "points": 3}}
        )
        frame = SweepRunner(config, progress=False).run()
        fig = sweep_figure(frame)
        assert len(fig.data) == 12
        assert fig.layout.yaxis.title.text == "rc"

    def test_plot_csv_writes_html(self, tmp_path):
        """Test the CSV is rendered next to itself."""
        config = build_config(COMMON_SWEEP)
        csv = run(config, tmp_path / "sweep.csv", progress=False)
        target = plot_csv(csv, metric="rc")
        assert target == tmp_path / "sweep.html"
        assert target.read_text(encoding="utf-8").startswith("<html>")


class TestMain:
    """Test the command-line entry point."""

    def test_missing_config_exit_code(self):
        """Test a missing --config exits with code 2."""
        with pytest.raises(SystemExit) as exc:
            main(["private-max", "--no-progress"])
        assert exc.value.code == 2

    def test_bad_config_exit_code(self, tmp_path):
        """Test an invalid config exits with code 2."""
        path = _write_yaml(tmp_path / "bad.yaml", {"experiment": "fig9"})
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--config", str(path), "--no-progress"])
        assert exc.value.code == 2

    def test_infeasible_exit_code(self, tmp_path):
        """Test an infeasible single point exits with code 3."""
        data = dict(COMMON_SWEEP)
        data.pop("sweep")
        data["scenario"] = dict(COMMON_SWEEP["scenario"], power_budget=2.2)
        path = _write_yaml(tmp_path / "infeasible.yaml", data)
        with pytest.raises(SystemExit) as exc:
            main(["common-max", "--config", str(path), "--no-progress"])
        assert exc.value.code == 3

    def test_eval_writes_csv(self, tmp_path):
        """Test a successful run writes its CSV."""
        path = _write_yaml(tmp_path / "eval.yaml", EVAL_POINT)
        out = tmp_path / "eval.csv"
        main(["eval", "--config", str(path), "--out", str(out), "--no-progress"])
        frame = pd.read_csv(out)
        assert len(frame) == 1
        assert frame.loc[0, "solver"] == "eval"

    def test_workers_must_be_positive(self, tmp_path):
        """Test --workers 0 is a config error."""
        path = _write_yaml(tmp_path / "eval.yaml", EVAL_POINT)
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--config", str(path), "--workers", "0", "--no-progress"])
        assert exc.value.code == 2


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
