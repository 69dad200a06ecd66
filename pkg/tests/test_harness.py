"""Experiment harness: CSV emission, determinism, slope fits, separation."""

import csv
import json

import pytest

from gossipsim.cli import main as cli_main
from gossipsim.harness import (
    CSV_HEADER,
    ExperimentConfig,
    fit_loglog_slope,
    load_trace,
    measure_blocker_separation,
    run_cell,
    run_experiment,
    rows_to_csv_text,
    save_trace,
    summarize_sweep,
    sweep,
)


def flood_config(out=None, n_list=(4,), seeds=(0,)):
    return ExperimentConfig(
        adversary={"name": "static-line"},
        protocol={"name": "flood:0"},
        initial={"kind": "single-source", "tokens": 1},
        n_list=list(n_list),
        seeds=list(seeds),
        max_rounds=50,
        out=out,
    )


class TestRunExperiment:
    def test_single_cell_csv(self, tmp_path):
        out = tmp_path / "one.csv"
        run_experiment(flood_config(out=str(out)))
        rows = list(csv.reader(out.open()))
        assert rows[0] == CSV_HEADER
        assert len(rows) == 2

    def test_grid_is_cartesian_product(self, tmp_path):
        out = tmp_path / "grid.csv"
        run_experiment(flood_config(out=str(out), n_list=(4, 6), seeds=(0, 1, 2)))
        rows = list(csv.reader(out.open()))
        assert len(rows) == 1 + 6

    def test_identical_configs_identical_data_columns(self):
        rows_a = run_experiment(flood_config())
        rows_b = run_experiment(flood_config())

        def strip_wall(rows):
            return [{k: v for k, v in r.items() if k != "wall_time_ms"} for r in rows]

        assert strip_wall(rows_a) == strip_wall(rows_b)

    def test_timeout_is_data(self):
        config = flood_config()
        config.max_rounds = 1
        config.n_list = [6]
        rows = run_experiment(config)
        assert rows[0]["completion_round"] == "TIMEOUT"

    def test_config_hash_emitted(self, tmp_path):
        out = tmp_path / "hashed.csv"
        config = flood_config(out=str(out))
        run_experiment(config)
        meta = json.loads((tmp_path / "hashed.csv.meta.json").read_text())
        assert meta["config_hash"] == config.content_hash()

    def test_unknown_protocol_rejected(self):
        config = flood_config()
        config.protocol = {"name": "mystery"}
        with pytest.raises(KeyError):
            run_experiment(config)


class TestSweep:
    def test_exact_square_power_law(self):
        pairs = [(n, float(n * n)) for n in (8, 16, 32, 64)]
        assert abs(fit_loglog_slope(pairs) - 2.0) <= 0.001

    def test_exact_linear_power_law(self):
        pairs = [(n, float(n)) for n in (8, 16, 32, 64)]
        assert abs(fit_loglog_slope(pairs) - 1.0) <= 0.001

    def test_requires_three_points(self):
        config = flood_config(n_list=(4, 6))
        with pytest.raises(ValueError):
            sweep(config)

    def test_rand_diff_complete_graph_subquadratic(self):
        config = ExperimentConfig(
            adversary={"name": "static-complete"},
            protocol={"name": "rand-diff"},
            initial={"kind": "one-token-per-node"},
            n_list=[16, 32, 64],
            seeds=[0, 1, 2],
            max_rounds=5000,
        )
        rows = run_experiment(config)
        summary = summarize_sweep(rows, config)
        assert summary.slope is not None
        assert summary.slope < 2.0

    def test_sweep_outputs(self, tmp_path):
        out = tmp_path / "sweep.csv"
        config = flood_config(out=str(out), n_list=(4, 6, 8), seeds=(0, 1))
        summary = sweep(config)
        assert summary.slope is not None
        assert (tmp_path / "sweep.csv.summary.csv").exists()
        plot = (tmp_path / "sweep.csv.plot.dat").read_text().strip().splitlines()
        assert len(plot) == 3


class TestSeparationMeasure:
    def meta(self, n=256):
        return {
            "params": {"n": n},
            "segments": [
                {"phase": 1, "segment": 1, "rounds": [1, 1], "inner": [1, 2, 3]}
            ],
        }

    def test_identical_holdings_fraction_one(self):
        arrivals = [{t: 0 for t in range(8)} for _ in range(4)]
        stats = measure_blocker_separation(arrivals, self.meta())
        assert stats["fraction_small"] == 1.0

    def test_disjoint_holdings_fraction_zero(self):
        # pairwise-disjoint 40-token holdings at n=256: difference 40 >= 16/16
        arrivals = [
            {t + 100 * v: 0 for t in range(40)} for v in range(4)
        ]
        stats = measure_blocker_separation(arrivals, self.meta(n=256))
        assert stats["fraction_small"] == 0.0

    def test_counts_only_prior_arrivals(self):
        # arrivals in the measured round itself are not yet held
        arrivals = [dict() for _ in range(4)]
        arrivals[1] = {t: 1 for t in range(64)}
        arrivals[2] = {}
        stats = measure_blocker_separation(arrivals, self.meta())
        assert stats["fraction_small"] == 1.0


class TestSentinelPlumbing:
    def test_blocker_run_reports_sentinel(self):
        config = ExperimentConfig(
            adversary={"name": "blocker-invasive", "seed": 3},
            protocol={"name": "rand-diff"},
            initial={"kind": "single-source"},
            n_list=[64],
            seeds=[1],
            max_rounds=640,
            stop_at_sentinel=True,
        )
        cell = run_cell(config, 64, 1)
        assert cell.sentinel_round is not None
        assert cell.sentinel_round >= 1

    def test_trace_round_trip(self, tmp_path):
        config = flood_config()
        cell = run_cell(config, 4, 0, keep_result=True)
        path = tmp_path / "trace.json"
        save_trace(cell.result.final_state, path)
        arrivals = load_trace(path)
        assert arrivals == cell.result.final_state.arrivals


class TestCli:
    def test_gen_validate_round_trip(self, tmp_path):
        out = tmp_path / "ring.dgs"
        assert (
            cli_main(
                [
                    "gen",
                    "--adversary",
                    "ring-failure",
                    "--n",
                    "6",
                    "--seed",
                    "2",
                    "--horizon",
                    "12",
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        assert out.exists()
        assert (tmp_path / "ring.dgs.meta.json").exists()
        paths_file = tmp_path / "ring.dgs.paths.json"
        assert paths_file.exists()
        assert cli_main(["validate", str(out)]) == 0
        infra_file = tmp_path / "infra.json"
        payload = json.loads(paths_file.read_text())
        infra_file.write_text(json.dumps(payload["infrastructure"]))
        assert (
            cli_main(
                ["validate", str(out), "--infra", str(infra_file), "--paths", str(paths_file)]
            )
            == 0
        )

    def test_run_command(self, tmp_path):
        config_path = tmp_path / "config.json"
        out = tmp_path / "rows.csv"
        config_path.write_text(
            json.dumps(
                {
                    "adversary": {"name": "static-line"},
                    "protocol": {"name": "flood:0"},
                    "initial": {"kind": "single-source", "tokens": 1},
                    "n": [5],
                    "seeds": [0, 1],
                    "max_rounds": 40,
                    "out": str(out),
                }
            )
        )
        assert cli_main(["run", "--config", str(config_path)]) == 0
        assert out.exists()

    def test_separation_command(self, tmp_path):
        config = ExperimentConfig(
            adversary={"name": "blocker-invasive", "seed": 5},
            protocol={"name": "rand-diff"},
            initial={"kind": "single-source"},
            n_list=[64],
            seeds=[0],
            max_rounds=64,
        )
        cell = run_cell(config, 64, 0, keep_result=True)
        trace = tmp_path / "t.json"
        save_trace(cell.result.final_state, trace)
        from gossipsim.harness import build_schedule

        schedule = build_schedule(config.adversary, 64, 0)
        meta = tmp_path / "m.json"
        meta.write_text(json.dumps(schedule.metadata))
        assert cli_main(["separation", "--trace", str(trace), "--meta", str(meta)]) == 0

    def test_csv_text_header_stable(self):
        assert rows_to_csv_text([]).strip() == ",".join(CSV_HEADER)


class TestCentralDispatch:
    def test_central_broadcast_by_name(self):
        config = ExperimentConfig(
            adversary={"name": "random", "extra_edge_prob": 0.2, "horizon": 2000},
            protocol={"name": "central-broadcast"},
            initial={"kind": "single-source"},
            n_list=[10],
            seeds=[3],
            max_rounds=2000,
        )
        rows = run_experiment(config)
        assert rows[0]["completion_round"] != "TIMEOUT"

    def test_central_kgossip_by_name(self):
        config = ExperimentConfig(
            adversary={"name": "ring-failure", "policy": "round-robin", "horizon": 300},
            protocol={"name": "central-kgossip", "mode": "auto"},
            initial={"kind": "one-token-per-node"},
            n_list=[8],
            seeds=[2],
            max_rounds=300,
        )
        rows = run_experiment(config)
        assert rows[0]["completion_round"] != "TIMEOUT"
        assert int(rows[0]["completion_round"]) <= 8 * 8

    def test_central_kgossip_respects_stage_constant_keys(self):
        config = ExperimentConfig(
            adversary={"name": "static-complete"},
            protocol={
                "name": "central-kgossip",
                "mode": "staged",
                "c_phase": 1.0,
                "c_stage": 3.0,
                "c_ex": 1.0,
                "c_cap": 8.0,
                "c_s": 2.0,
            },
            initial={"kind": "single-source"},
            n_list=[9],
            seeds=[1],
            max_rounds=100000,
        )
        rows = run_experiment(config)
        assert rows[0]["completion_round"] != "TIMEOUT"

    def test_central_kgossip_pads_non_multiple_k(self):
        config = ExperimentConfig(
            adversary={"name": "static-complete"},
            protocol={"name": "central-kgossip"},
            initial={"kind": "single-source", "tokens": 12},
            n_list=[8],
            seeds=[1],
            max_rounds=8 * 12,
        )
        rows = run_experiment(config)
        assert rows[0]["completion_round"] != "TIMEOUT"


class TestCrossProcessDeterminism:
    def test_cli_runs_are_byte_identical_modulo_walltime(self, tmp_path):
        import subprocess
        import sys

        config_path = tmp_path / "config.json"
        outputs = []
        for tag in ("a", "b"):
            out = tmp_path / f"rows-{tag}.csv"
            config_path.write_text(
                json.dumps(
                    {
                        "adversary": {"name": "random", "extra_edge_prob": 0.2, "horizon": 400},
                        "protocol": {"name": "rand-diff"},
                        "initial": {"kind": "one-token-per-node"},
                        "n": [9, 12],
                        "seeds": [1, 2],
                        "max_rounds": 400,
                        "out": str(out),
                    }
                )
            )
            subprocess.run(
                [sys.executable, "-m", "gossipsim.cli", "run", "--config", str(config_path)],
                check=True,
                capture_output=True,
            )
            rows = list(csv.DictReader(out.open()))
            outputs.append(
                [{k: v for k, v in r.items() if k != "wall_time_ms"} for r in rows]
            )
        assert outputs[0] == outputs[1]
