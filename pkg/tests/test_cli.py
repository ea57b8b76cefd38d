import json
import os

import numpy as np
import pytest

from isoperim import io as iio
from isoperim.cli import main
from isoperim.geometry import validate_polygon

from conftest import SQUARE, RECT21, cone_grid

R9 = float(np.sqrt(0.1 / (4.0 - np.pi)))
P9 = 4.0 - (8.0 - 2.0 * np.pi) * R9


@pytest.fixture()
def square_json(tmp_path):
    path = tmp_path / "square.json"
    path.write_text(json.dumps({"vertices": SQUARE}))
    return str(path)


@pytest.fixture()
def rect_json(tmp_path):
    path = tmp_path / "rect21.json"
    path.write_text(json.dumps({"vertices": RECT21}))
    return str(path)


def test_minimizer_command(square_json, tmp_path, capsys):
    out = str(tmp_path / "out")
    code = main(["minimizer", "--domain", square_json, "--volume", "0.9",
                 "--out", out])
    assert code == 0
    text = capsys.readouterr().out
    assert "case=rounded" in text
    data = json.loads(open(os.path.join(out, "shape.json")).read())
    assert data["type"] == "rounded"
    assert data["perimeter"] == pytest.approx(P9, abs=1e-6)
    assert data["curvature"] == pytest.approx(1 / R9, abs=1e-6)
    svg = open(os.path.join(out, "shape.svg")).read()
    assert svg.startswith("<svg") and " A " in svg


def test_minimizer_stadium(rect_json, tmp_path):
    out = str(tmp_path / "out")
    code = main(["minimizer", "--domain", rect_json, "--volume", "1.2",
                 "--out", out, "--json"])
    assert code == 0
    data = json.loads(open(os.path.join(out, "shape.json")).read())
    assert data["type"] == "stadium"
    assert data["perimeter"] == pytest.approx(np.pi + 2 * (1.2 - np.pi / 4), abs=1e-6)


def test_minimizer_volume_errors(square_json):
    assert main(["minimizer", "--domain", square_json,
                 "--volume-fraction", "1.0"]) == 4
    assert main(["minimizer", "--domain", square_json, "--volume", "1.5"]) == 4
    assert main(["minimizer", "--domain", square_json, "--volume", "-1"]) == 4


def test_minimizer_parse_errors(tmp_path, square_json):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["minimizer", "--domain", str(bad), "--volume", "0.5"]) == 2
    assert main(["minimizer", "--domain", str(tmp_path / "missing.json"),
                 "--volume", "0.5"]) == 2
    assert main(["minimizer", "--domain", square_json]) == 2  # no volume flag


def test_minimizer_geometry_error(tmp_path):
    bad = tmp_path / "collinear.json"
    bad.write_text(json.dumps({"vertices": [[0, 0], [1, 0], [2, 0], [1, 1]]}))
    assert main(["minimizer", "--domain", str(bad), "--volume", "0.5"]) == 3


def test_family_command(rect_json, tmp_path):
    out = str(tmp_path / "out")
    code = main(["family", "--domain", rect_json, "--sweep", "0.2:1.99:60",
                 "--out", out])
    assert code == 0
    rows = open(os.path.join(out, "family.csv")).read().splitlines()
    assert rows[0] == "v,case,r,perimeter,curvature"
    cases = [r.split(",")[1] for r in rows[1:]]
    # trichotomy transitions exactly twice on a sweep across both seams
    changes = sum(1 for a, b in zip(cases, cases[1:]) if a != b)
    assert changes == 2
    assert cases[0] == "disk" and cases[-1] == "rounded"
    ps = np.array([float(r.split(",")[3]) for r in rows[1:]])
    assert np.all(np.diff(ps) >= -1e-9)
    assert os.path.exists(os.path.join(out, "family.svg"))


def test_family_usage_error(rect_json):
    assert main(["family", "--domain", rect_json, "--sweep", "0.5:1.9:1"]) == 2
    assert main(["family", "--domain", rect_json, "--sweep", "junk"]) == 2
    assert main(["family", "--domain", rect_json, "--sweep", "0.5:3.5:10"]) == 4


def test_rearrange_command(square_json, tmp_path):
    square = validate_polygon(SQUARE)
    grid_path = str(tmp_path / "cone.grid")
    iio.write_grid(cone_grid(square, 66), grid_path)
    out = str(tmp_path / "out")
    code = main(["rearrange", "--domain", square_json, "--grid", grid_path,
                 "--levels", "32", "--out", out])
    assert code == 0
    report = json.loads(open(os.path.join(out, "report.json")).read())
    assert report["passed"]
    assert report["bv_ut"]["bv"] < report["bv_u"]["bv"]
    ut = iio.read_grid(os.path.join(out, "u_tilde.grid"), square)
    assert ut.values.shape == (66, 66)
    assert os.path.exists(os.path.join(out, "levels.svg"))
    assert os.path.exists(os.path.join(out, "report.csv"))


def test_rearrange_rejects_negative(square_json, tmp_path):
    square = validate_polygon(SQUARE)
    grid_path = str(tmp_path / "neg.grid")
    u = cone_grid(square, 20)
    iio.write_grid(u, grid_path)
    lines = open(grid_path).read().splitlines()
    parts = lines[10].split()
    parts[10] = "-0.25"
    lines[10] = " ".join(parts)
    open(grid_path, "w").write("\n".join(lines) + "\n")
    assert main(["rearrange", "--domain", square_json, "--grid", grid_path]) == 2


def test_rearrange_domain_mismatch(rect_json, tmp_path):
    square = validate_polygon(SQUARE)
    grid_path = str(tmp_path / "small.grid")
    iio.write_grid(cone_grid(square, 20), grid_path)
    # square grid does not cover the rectangle
    assert main(["rearrange", "--domain", rect_json, "--grid", grid_path]) == 5


def test_verify_command(square_json, tmp_path):
    out = str(tmp_path / "out")
    code = main(["verify", "--domain", square_json, "--volume", "0.9",
                 "--samples", "300", "--seed", "4", "--out", out])
    assert code == 0
    data = json.loads(open(os.path.join(out, "verify.json")).read())
    assert data["ok"] and not data["violations"]
    assert data["min_gap"] > 0


def test_verify_with_anneal_writes_pgm(square_json, tmp_path):
    out = str(tmp_path / "out")
    code = main(["verify", "--domain", square_json, "--volume", "0.9",
                 "--samples", "100", "--seed", "1", "--anneal", "32",
                 "--out", out])
    assert code == 0
    data = json.loads(open(os.path.join(out, "verify.json")).read())
    assert 0.9 <= data["anneal"]["ratio"] <= 1.1
    pgm = open(os.path.join(out, "anneal.pgm")).read().splitlines()
    assert pgm[0] == "P2"
    assert pgm[1].split() == ["32", "32"]


def test_outputs_deterministic(square_json, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert main(["verify", "--domain", square_json, "--volume", "0.9",
                     "--samples", "150", "--seed", "9", "--out", out]) == 0
        outs.append(open(os.path.join(out, "verify.json"), "rb").read())
    assert outs[0] == outs[1]
    shapes = []
    for name in ("c", "d"):
        out = str(tmp_path / name)
        assert main(["minimizer", "--domain", square_json, "--volume", "0.9",
                     "--out", out]) == 0
        shapes.append(open(os.path.join(out, "shape.json"), "rb").read())
        shapes.append(open(os.path.join(out, "shape.svg"), "rb").read())
    assert shapes[0] == shapes[2] and shapes[1] == shapes[3]
