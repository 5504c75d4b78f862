import csv
import json

import pytest

from forestends.cli import EXIT_CONFIG, EXIT_INVALID, EXIT_OK, main


@pytest.fixture
def ust_file(tmp_path):
    path = tmp_path / "ust.json"
    assert main(["generate", "--model", "ust", "--width", "10", "--height", "10", "--seed", "1",
                 "--out", str(path)]) == EXIT_OK
    return path


@pytest.fixture
def corridor_file(tmp_path):
    path = tmp_path / "corridor.json"
    assert main(["generate", "--model", "corridor", "--width", "32", "--out", str(path)]) == EXIT_OK
    return path


def test_generate_writes_document(ust_file):
    doc = json.loads(ust_file.read_text())
    assert doc["version"] == 1
    assert len(doc["vertices"]) == 100
    assert len(doc["edges"]) == 99


def test_analyze_prints_row(ust_file, tmp_path, capsys):
    out = tmp_path / "row.csv"
    code = main(["analyze", str(ust_file), "--inner", "2", "--outer", "4", "--chi", "3",
                 "--trifurcations", "--out", str(out)])
    assert code == EXIT_OK
    row = json.loads(capsys.readouterr().out)
    assert row["valid"] == 1 and row["forest_ok"] == 1
    assert "chi_3" in row
    assert out.read_text().splitlines()[-1].startswith("stderr,")


def test_analyze_reports_invalid_graph(tmp_path):
    path = tmp_path / "cross.json"
    path.write_text('{"version":1,"vertices":[[0,1,0,1],[2,1,2,1],[0,1,2,1],[2,1,0,1]],"edges":[[0,1],[2,3]]}')
    assert main(["analyze", str(path), "--inner", "1", "--outer", "3", "--chi", "1"]) == EXIT_INVALID


def test_corridor_report(corridor_file, capsys):
    code = main(["corridor", str(corridor_file), "--inner", "14", "--outer", "16", "--k", "4", "--l", "6"])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert [door["segment"][0][0] for door in report["doors"]] == ["-15", "-3", "9"]
    assert len(report["traces"]) == 1


def test_render(corridor_file, tmp_path):
    out = tmp_path / "fig" / "corridor.svg"
    code = main(["render", str(corridor_file), "--inner", "14", "--outer", "16", "--k", "4", "--l", "6",
                 "--out", str(out)])
    assert code == EXIT_OK
    svg = out.read_text()
    assert '<g id="doors"' in svg and '<g id="window"' in svg


def test_run(tmp_path):
    out = tmp_path / "stats.csv"
    code = main(["run", "--model", "drainage", "--p", "1", "--seeds", "2", "--seed", "3", "--out", str(out)])
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["seed_index"] for r in rows] == ["0", "1", "mean", "stderr"]
    assert rows[0]["model"] == "drainage"


def test_run_with_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    out = tmp_path / "stats.csv"
    cfg.write_text(json.dumps({"model": {"name": "iso", "width": 6, "height": 6},
                               "window": {"inner": "1", "outer": "2"},
                               "seeds": {"count": 1},
                               "output": {"stats_path": str(out)}}))
    assert main(["run", "--config", str(cfg)]) == EXIT_OK
    assert out.exists()


@pytest.mark.parametrize("argv", [
    ["run", "--config", "/nonexistent/cfg.json"],
    ["run", "--model", "drainage", "--p", "abc"],
    ["analyze", "/nonexistent/graph.json"],
])
def test_configuration_errors(argv):
    assert main(argv) == EXIT_CONFIG


def test_bad_window(ust_file):
    assert main(["analyze", str(ust_file), "--inner", "5", "--outer", "3"]) == EXIT_CONFIG


def test_unknown_model_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["generate", "--model", "forest-fire"])


def svg_layer_ids(svg):
    return [chunk.split('"')[0] for chunk in svg.split('<g id="')[1:]]


def test_render_several_files(ust_file, tmp_path):
    iso = tmp_path / "iso.json"
    assert main(["generate", "--model", "iso", "--width", "10", "--height", "10", "--out", str(iso)]) == EXIT_OK
    out = tmp_path / "both.svg"
    code = main(["render", str(ust_file), str(iso), "--layer", "primal", "--layer", "iso",
                 "--inner", "2", "--outer", "4", "--out", str(out)])
    assert code == EXIT_OK
    assert svg_layer_ids(out.read_text()) == ["window", "iso", "primal"]


def test_render_layered_model(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": {"name": "layers", "width": 8, "height": 8,
                                         "layers": ["ust", "dual", "contour"]}}))
    out = tmp_path / "layers.svg"
    assert main(["render", "--config", str(cfg), "--seed", "2", "--out", str(out)]) == EXIT_OK
    assert svg_layer_ids(out.read_text()) == ["dual", "primal", "contour"]


@pytest.mark.parametrize("extra", [[], ["--layer", "primal", "--layer", "dual"]])
def test_render_layer_count_mismatch(ust_file, tmp_path, extra):
    argv = ["render", "--out", str(tmp_path / "x.svg")] + extra
    if extra:
        argv.insert(1, str(ust_file))
    assert main(argv) == EXIT_CONFIG


def test_run_prints_predicted_census(tmp_path, capsys):
    out = tmp_path / "stats.csv"
    code = main(["run", "--model", "ust_dual", "--width", "8", "--height", "8", "--inner", "1", "--outer", "3",
                 "--seeds", "1", "--out", str(out)])
    assert code == EXIT_OK
    assert "n0=0 n1=2 n2=0" in capsys.readouterr().out
