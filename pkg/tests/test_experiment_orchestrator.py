import csv
import io
import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from forestends.experiment_orchestrator import (
    AnalysisToggles,
    ConfigError,
    DoorToggles,
    ExperimentConfig,
    ModelConfig,
    OutputConfig,
    SeedConfig,
    StatsRow,
    WindowConfig,
    aggregate,
    bench,
    build_model,
    check_betweenness,
    check_chi_bound,
    check_contour_cycles,
    check_corridor_fixture,
    check_drainage_coalescence,
    check_drainage_two_ended,
    check_trifurcation_decay,
    check_duality,
    chi_box_corner,
    corridor_outline,
    load_config,
    predicted_census,
    replicate_seed,
    reproducibility_csv,
    run_experiment,
    run_replicate,
    scale_windows,
    stats_csv_text,
    trifurcation_densities,
    verify,
    _seeds,
)
from forestends.geometry import Point

HEADER = ("seed_index,seed,model,valid,planarity_violations,forest_ok,lambda_hat,lambda_bound,"
          "chi_5,chi_bound_5,chi_cover_5,n0,n1,n2,n3plus,trifurcation_density,one_ended_trifurcations,"
          "door_count,convex_traces,two_ended_traces")


def drainage_config(tmp_path, name="stats.csv", **extra):
    return ExperimentConfig(
        model=ModelConfig(name="drainage", p="1"),
        seeds=SeedConfig(count=3, master=11),
        analysis=AnalysisToggles(chi_n=[5]),
        output=OutputConfig(stats_path=str(tmp_path / name)),
        **extra,
    )


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.model.name == "ust"
        assert cfg.window.to_window(cfg.model).origin == Point(15, 15)

    def test_corridor_origin(self):
        assert ModelConfig(name="corridor").default_origin() == Point(0, 0)

    @pytest.mark.parametrize("fields", [{"name": "percolation"}, {"p": "abc"}, {"p": 0.5}, {"eps": ["x"]}])
    def test_invalid_model(self, fields):
        with pytest.raises(ValidationError):
            ModelConfig(**fields)

    def test_rationals_normalized(self):
        assert ModelConfig(p="2/4").p == "1/2"
        assert WindowConfig(inner=3, outer="7/1").outer == "7"

    def test_validate_alias(self):
        assert not AnalysisToggles.model_validate({"validate": False}).validate_graph
        assert not AnalysisToggles(validate_graph=False).validate_graph

    def test_load_config(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"model": {"name": "drainage", "p": "1/3"}, "seeds": {"count": 2}}))
        cfg = load_config(path)
        assert cfg.model.p == "1/3" and cfg.seeds.count == 2

    def test_load_config_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text('{"seeds": {"count": 0}}')
        with pytest.raises(ConfigError):
            load_config(bad)


class TestSeeds:
    def test_replicate_seeds(self):
        assert replicate_seed(5, 3) == replicate_seed(5, 3)
        assert len({replicate_seed(5, k) for k in range(20)}) == 20
        assert replicate_seed(5, 0) != replicate_seed(6, 0)


class TestModels:
    @pytest.mark.parametrize("name", ["ust", "ust_dual", "layers", "drainage", "iso", "corridor"])
    def test_build_model(self, name):
        G, layers = build_model(ModelConfig(name=name, width=20, height=20), 3)
        assert G.vertex_count > 0
        assert layers

    def test_layers_model_keeps_named_parts(self):
        model = ModelConfig(name="layers", width=10, height=10, layers=["ust", "dual", "contour"])
        G, layers = build_model(model, 3)
        assert [name for name, _ in layers] == ["primal", "dual", "contour"]
        assert G.vertex_count == sum(part.vertex_count for _, part in layers)
        assert len(G.edges) == sum(len(part.edges) for _, part in layers)

    def test_predicted_census(self):
        model = ModelConfig(name="layers", layers=["ust", "dual", "contour"], eps=["1/4", "1/3"])
        assert tuple(predicted_census(model)) == (0, 2, 2)
        assert tuple(predicted_census(ModelConfig(name="ust_dual"))) == (0, 2, 0)
        assert math.isinf(predicted_census(ModelConfig(name="iso")).n0)
        assert predicted_census(ModelConfig(name="drainage")) is None

    def test_g_phi_with_fixed_schedule(self):
        G, layers = build_model(ModelConfig(name="g_phi", width=10, height=10, phi=[1, 2]), 3)
        assert [name for name, _ in layers] == ["primal", "contour"]
        assert G.edges


class TestStatistics:
    def test_chi_box_corner(self):
        assert chi_box_corner(Point(15, 15), 5) == Point(12, 12)
        assert chi_box_corner(Point(15, 15), 10) == Point(10, 10)

    def test_straight_drainage_rows(self, tmp_path):
        result = run_experiment(drainage_config(tmp_path))
        assert result.exit_code == 0
        for row in result.rows:
            assert row.valid and row.forest_ok
            assert row.lambda_hat == 6.0
            assert row.chi[5] == 30
            assert row.chi_bound[5] == 120.0
            assert row.chi_cover[5] == 120
            assert row.lambda_bound == pytest.approx(math.pi * (math.sqrt(2) + 1) ** 2)
            assert row.one_ended_trifurcations is None
            assert (row.n0, row.n1, row.n2, row.n3plus) == (0, 0, 11, 0)

    def test_csv_layout(self, tmp_path):
        result = run_experiment(drainage_config(tmp_path))
        lines = result.stats_path.read_text().splitlines()
        assert lines[0] == HEADER
        assert [line.split(",")[0] for line in lines[1:]] == ["0", "1", "2", "mean", "stderr"]
        table = list(csv.DictReader(io.StringIO(result.stats_path.read_text())))
        assert table[0]["lambda_hat"] == "6.000000"
        assert table[3]["n2"] == "11.000000"
        assert table[4]["n2"] == "0.000000"

    def test_aggregate_matches_numpy(self):
        rows = [StatsRow(seed_index=k, seed=k, model="m", lambda_hat=v, n2=k)
                for k, v in enumerate([1.0, 2.5, 4.0, 4.5])]
        summary = aggregate(rows)
        assert summary["mean"]["lambda_hat"] == pytest.approx(3.0)
        assert summary["stderr"]["lambda_hat"] == pytest.approx(np.std([1.0, 2.5, 4.0, 4.5], ddof=1) / 2)
        assert summary["mean"]["trifurcation_density"] is None
        assert "seed" not in summary["mean"]

    def test_rows_sorted_by_seed_index(self):
        rows = [StatsRow(seed_index=k, seed=k, model="m") for k in (2, 0, 1)]
        text = stats_csv_text(rows, aggregate(rows))
        assert [line.split(",")[0] for line in text.splitlines()[1:4]] == ["0", "1", "2"]

    def test_failed_replicate_is_invalid(self, tmp_path):
        cfg = drainage_config(tmp_path, window=WindowConfig(inner="6", outer="5"))
        row = run_replicate(cfg, 0)
        assert not row.valid
        assert run_experiment(cfg).exit_code == 1

    def test_reproducible_bytes(self, tmp_path):
        cfg = ExperimentConfig(model=ModelConfig(name="ust", width=12, height=12),
                               window=WindowConfig(inner="2", outer="5"),
                               seeds=SeedConfig(count=2, master=99),
                               analysis=AnalysisToggles(chi_n=[3], trifurcations=True))
        first = run_experiment(cfg.model_copy(update={"output": OutputConfig(stats_path=str(tmp_path / "a.csv"))}))
        second = run_experiment(cfg.model_copy(update={"output": OutputConfig(stats_path=str(tmp_path / "b.csv"))}))
        assert first.stats_path.read_bytes() == second.stats_path.read_bytes()

    def test_workers_do_not_change_output(self, tmp_path):
        serial = run_experiment(drainage_config(tmp_path, "serial.csv"))
        parallel = run_experiment(drainage_config(tmp_path, "parallel.csv", workers=2))
        assert serial.stats_path.read_text() == parallel.stats_path.read_text()


class TestCorridorExperiment:
    def test_fixture_run_with_artifacts(self, tmp_path):
        cfg = ExperimentConfig(
            model=ModelConfig(name="corridor", width=32),
            window=WindowConfig(inner="14", outer="16"),
            seeds=SeedConfig(count=1),
            analysis=AnalysisToggles(chi_n=[5], doors=DoorToggles(k=4, l=6)),
            output=OutputConfig(stats_path=str(tmp_path / "s.csv"), svg_path=str(tmp_path / "f.svg"),
                                report_path=str(tmp_path / "r.json")),
        )
        result = run_experiment(cfg)
        (row,) = result.rows
        assert row.door_count == 3
        assert row.two_ended_traces == 1
        assert row.convex_traces == 1
        assert '<g id="corridor"' in result.svg_path.read_text()
        report = json.loads(result.report_path.read_text())
        assert len(report["doors"]) == 3
        assert report["axioms"]["order_failures"] == 0

    def test_outline_needs_two_doors(self):
        assert corridor_outline(None) is None


class TestAcceptanceChecks:
    def test_contour_cycles(self):
        assert check_contour_cycles([1, 2, 3], size=10).passed

    def test_duality(self):
        assert check_duality([1, 2, 3], size=10).passed

    def test_drainage_two_ended(self):
        assert check_drainage_two_ended([1, 2]).passed

    def test_intensity_bound_reported_with_chi(self):
        results = check_chi_bound([1, 2], size=40, ns=(5,))
        assert [c.name for c in results] == ["drainage_intensity_bound", "chi_bound_5"]
        assert results[0].passed and 0 < results[0].value < 1

    def test_scale_windows_tile_the_grid(self):
        windows = scale_windows(10, 40)
        assert len(windows) == 16
        assert {w.origin.x for w in windows} == {-30, -10, 10, 30}
        assert all(w.inner == 5 and w.outer == 8 for w in windows)
        assert [w.origin for w in scale_windows(40, 40)] == [Point(0, 0)]
        with pytest.raises(ConfigError):
            scale_windows(15, 40)
        with pytest.raises(ConfigError):
            scale_windows(4, 40)

    def test_trifurcation_densities_per_scale(self):
        table = trifurcation_densities([1, 2], scales=(6, 12))
        assert sorted(table) == [6, 12]
        for mean, stderr in table.values():
            assert 0 <= mean <= 1 and stderr >= 0

    @pytest.mark.slow
    def test_trifurcation_decay_with_quick_seeds(self):
        assert check_trifurcation_decay(_seeds(20240601, 4, 8)).passed

    @pytest.mark.slow
    def test_drainage_coalescence_from_a_wide_box(self):
        coalescence, no_trifurcation = check_drainage_coalescence(_seeds(20240601, 6, 3))
        assert coalescence.passed and coalescence.value >= 0.95
        assert no_trifurcation.passed

    def test_betweenness(self):
        assert check_betweenness([1, 2, 3]).passed

    def test_corridor_fixture(self):
        check = check_corridor_fixture()
        assert check.passed
        assert check.value == 3.0

    def test_reproducibility_csv(self):
        assert reproducibility_csv(4) == reproducibility_csv(4)

    def test_bench(self):
        timings = bench("drainage", sizes=[8, 12], seeds=1)
        assert [size for size, _ in timings] == [8, 12]
        assert all(seconds >= 0 for _, seconds in timings)

    @pytest.mark.slow
    def test_quick_verify_passes(self):
        report = verify(20240601, quick=True)
        failed = [c.name for c in report.checks if not c.passed]
        assert not failed
        assert report.csv_text().splitlines()[0] == "check,passed,value"
        assert not any(math.isnan(c.value) for c in report.checks)
