import json

import numpy as np
import pytest

from approachability.cli import main, provenance_to_argv, read_provenance

SINGLE = {"payoffs": [[1.0]]}
EQUALIZER = {"payoffs": [[3.0, 1.0], [0.0, 2.0]]}
POINT_ONE = {"type": "ball", "center": [1.0], "radius": 0.0}
LE_ONE = {"type": "halfspace", "normal": [1.0], "offset": 1.0}
LE_TWO = {"type": "halfspace", "normal": [1.0], "offset": 2.0}
FULL_MONITORING_2 = {"matrix": [[1.0, 0.0], [0.0, 1.0]]}


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return tmp_path, write


def strip_timestamp(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("# generated")]


def data_lines(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


class TestValue:
    def test_approachable_point_target(self, files, capsys):
        tmp, write = files
        out = tmp / "value.csv"
        code = main(
            [
                "value",
                "--game", write("g.json", SINGLE),
                "--target", write("t.json", POINT_ONE),
                "--s0", "0.02", "--sgrid", "49", "--ggrid", "41",
                "--actions", "2", "--box", "0:2", "--tol", "0.25",
                "--out", str(out),
            ]
        )
        assert code == 0
        rows = dict(
            line.split(",", 1) for line in strip_timestamp(out)[2:]
        )
        assert float(rows["estimate"]) <= 0.02
        assert rows["verdict"] == "weakly approachable"
        assert "weakly approachable" in capsys.readouterr().out

    def test_slices_and_grid_outputs(self, files):
        tmp, write = files
        out, slices, grid = tmp / "v.csv", tmp / "s.csv", tmp / "grid.npz"
        code = main(
            [
                "value",
                "--game", write("g.json", SINGLE),
                "--target", write("t.json", POINT_ONE),
                "--s0", "0.1", "--sgrid", "9", "--ggrid", "11",
                "--actions", "2", "--box", "0:2",
                "--out", str(out),
                "--grid-out", str(grid),
                "--slices-out", str(slices),
            ]
        )
        assert code == 0
        lines = strip_timestamp(slices)
        assert lines[1] == "s,g1,V"
        assert len(lines) == 2 + 10 * 11
        assert grid.exists()


class TestClassify:
    def test_excludable_halfline(self, files, capsys):
        tmp, write = files
        out = tmp / "c.csv"
        code = main(
            [
                "classify",
                "--game", write("g.json", EQUALIZER),
                "--target", write("t.json", LE_ONE),
                "--s0", "0.02", "--sgrid", "49", "--ggrid", "151",
                "--actions", "9", "--tol", "0.25",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert "weakly excludable" in capsys.readouterr().out
        rows = dict(line.split(",", 1) for line in strip_timestamp(out)[2:])
        assert float(rows["estimate"]) == pytest.approx(0.5, abs=0.05)


class TestSynthesize:
    def test_summary_fields(self, files):
        tmp, write = files
        out = tmp / "syn.csv"
        code = main(
            [
                "synthesize",
                "--game", write("g.json", EQUALIZER),
                "--target", write("t.json", LE_TWO),
                "--s0", "0.1", "--sgrid", "9", "--ggrid", "21",
                "--actions", "5", "--N", "10",
                "--out", str(out),
            ]
        )
        assert code == 0
        rows = dict(line.split(",", 1) for line in strip_timestamp(out)[2:])
        assert rows["N"] == "10"
        assert rows["mstar"] == "1"
        assert len(json.loads(rows["x0"].strip('"'))) == 2


class TestSimulateAndScan:
    def test_simulate_columns(self, files):
        tmp, write = files
        out = tmp / "traj.csv"
        code = main(
            [
                "simulate",
                "--game", write("g.json", EQUALIZER),
                "--target", write("t.json", LE_TWO),
                "--s0", "0.1", "--sgrid", "9", "--ggrid", "21",
                "--actions", "5", "--N", "10", "--n", "50",
                "--adversary", "stationary-uniform",
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = data_lines(out)
        assert lines[0] == "m,x1,x2,y1,y2,g1,gbar1,distance"
        assert len(lines) == 51

    def test_scan_columns(self, files):
        tmp, write = files
        out = tmp / "scan.csv"
        code = main(
            [
                "scan",
                "--game", write("g.json", EQUALIZER),
                "--target", write("t.json", LE_TWO),
                "--s0", "0.1", "--sgrid", "9", "--ggrid", "21",
                "--actions", "5", "--N", "10",
                "--horizons", "50,100",
                "--adversaries", "stationary-uniform,random",
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = data_lines(out)
        assert lines[0] == "n,max_final_distance,argmax_adversary"
        assert lines[1].startswith("50,") and lines[2].startswith("100,")


class TestOt:
    def test_identical_measures(self, files, capsys):
        tmp, write = files
        measure = {"points": [[0.0, 0.0], [1.0, 0.0]], "weights": [0.5, 0.5]}
        out = tmp / "ot.csv"
        code = main(
            [
                "ot",
                "--mu", write("mu.json", measure),
                "--nu", write("nu.json", measure),
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = data_lines(out)
        assert lines[0] == "record,i,j,value"
        rows = [line.split(",") for line in lines[1:]]
        by_record = {}
        for record, i, j, value in rows:
            by_record.setdefault(record, []).append(float(value))
        assert by_record["cost"][0] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(by_record["phi"], 0.0)
        assert "W2^2 = 0" in capsys.readouterr().out


class TestPmAndWsim:
    def test_pm_feasible_doc(self, files, capsys):
        tmp, write = files
        out = tmp / "pm.json"
        code = main(
            [
                "pm",
                "--game", write("g.json", EQUALIZER),
                "--target", write("t.json", {"type": "polytope", "normals": [[1.0]], "offsets": [2.0]}),
                "--signals", write("sig.json", FULL_MONITORING_2),
                "--actions", "3",
                "--out", str(out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["feasible"] is True
        assert doc["n_actions"] == 3 and doc["n_signals"] == 2
        assert len(doc["grid_points"]) == 6
        assert "feasible" in capsys.readouterr().out

    def test_wsim_runs(self, files):
        tmp, write = files
        out = tmp / "wsim.csv"
        code = main(
            [
                "wsim",
                "--game", write("g.json", EQUALIZER),
                "--target", write("t.json", {"type": "polytope", "normals": [[1.0]], "offsets": [2.0]}),
                "--signals", write("sig.json", FULL_MONITORING_2),
                "--actions", "3", "--n", "10", "--delta", "0.3",
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = data_lines(out)
        assert lines[0] == "m,W2sq,W2"
        assert len(lines) == 11


class TestExitCodes:
    def test_malformed_game_names_field(self, files, capsys):
        tmp, write = files
        code = main(
            [
                "classify",
                "--game", write("g.json", {"matrix": [[1.0]]}),
                "--target", write("t.json", POINT_ONE),
                "--out", str(tmp / "x.csv"),
            ]
        )
        assert code == 2
        assert "payoffs" in capsys.readouterr().err

    def test_invalid_json_rejected(self, files, capsys):
        tmp, write = files
        bad = tmp / "bad.json"
        bad.write_text("{not json")
        code = main(
            [
                "classify",
                "--game", str(bad),
                "--target", write("t.json", POINT_ONE),
                "--out", str(tmp / "x.csv"),
            ]
        )
        assert code == 2
        assert "JSON" in capsys.readouterr().err

    def test_empty_polytope_target(self, files, capsys):
        tmp, write = files
        empty = {"type": "polytope", "normals": [[1.0], [-1.0]], "offsets": [-2.0, 1.0]}
        code = main(
            [
                "classify",
                "--game", write("g.json", SINGLE),
                "--target", write("t.json", empty),
                "--out", str(tmp / "x.csv"),
            ]
        )
        assert code == 4
        assert "empty" in capsys.readouterr().err

    def test_bad_box_flag(self, files, capsys):
        tmp, write = files
        code = main(
            [
                "classify",
                "--game", write("g.json", SINGLE),
                "--target", write("t.json", POINT_ONE),
                "--box", "nonsense",
                "--out", str(tmp / "x.csv"),
            ]
        )
        assert code == 2
        assert "--box" in capsys.readouterr().err

    def test_mesh_too_fine_for_scheme(self, files, capsys):
        tmp, write = files
        code = main(
            [
                "synthesize",
                "--game", write("g.json", EQUALIZER),
                "--target", write("t.json", LE_TWO),
                "--s0", "0.1", "--sgrid", "9", "--ggrid", "21",
                "--actions", "5", "--N", "500",
                "--out", str(tmp / "x.csv"),
            ]
        )
        assert code == 2
        assert "mesh" in capsys.readouterr().err


class TestProvenance:
    def test_value_rerun_byte_identical(self, files):
        tmp, write = files
        out = tmp / "value.csv"
        argv = [
            "value",
            "--game", write("g.json", SINGLE),
            "--target", write("t.json", POINT_ONE),
            "--s0", "0.1", "--sgrid", "9", "--ggrid", "11",
            "--actions", "2", "--box", "0:2",
            "--out", str(out),
        ]
        assert main(argv) == 0
        first = strip_timestamp(out)
        rebuilt = provenance_to_argv(read_provenance(str(out)))
        assert main(rebuilt) == 0
        assert strip_timestamp(out) == first

    def test_pm_rerun_byte_identical(self, files):
        tmp, write = files
        out = tmp / "pm.json"
        argv = [
            "pm",
            "--game", write("g.json", EQUALIZER),
            "--target", write("t.json", {"type": "polytope", "normals": [[1.0]], "offsets": [2.0]}),
            "--signals", write("sig.json", FULL_MONITORING_2),
            "--out", str(out),
        ]
        assert main(argv) == 0
        first = [
            line for line in out.read_text().splitlines() if '"generated"' not in line
        ]
        rebuilt = provenance_to_argv(read_provenance(str(out)))
        assert main(rebuilt) == 0
        second = [
            line for line in out.read_text().splitlines() if '"generated"' not in line
        ]
        assert second == first
