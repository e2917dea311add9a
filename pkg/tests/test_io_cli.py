import json
import subprocess
import sys

import numpy as np
import pytest

from fvineq import io as fio
from fvineq.cli import main, parse_levels, CLIError
from fvineq.ddfv import build_ddfv, sample_ddfv
from fvineq.mesh import build_acute_triangulation, build_structured, refine
from fvineq.space import DiscreteFunction


@pytest.mark.parametrize("mesh", [build_structured(2, 3), build_structured(3, 2),
                                  build_acute_triangulation(1)])
def test_mesh_json_round_trip(mesh, tmp_path):
    path = tmp_path / "m.json"
    fio.save_mesh(mesh, path)
    back = fio.load_mesh(path)
    assert np.array_equal(back.nodes, mesh.nodes)
    assert np.array_equal(back.face_cells, mesh.face_cells)
    assert np.allclose(back.cell_measure, mesh.cell_measure, rtol=0, atol=0)
    assert np.allclose(back.d_sigma, mesh.d_sigma, rtol=1e-15)
    assert set(back.tags) == set(mesh.tags)
    assert fio.dump_json(fio.mesh_to_dict(back)) == path.read_text()


def test_ddfv_json_round_trip(tmp_path):
    m = build_ddfv(refine("perturbed", 2))
    path = tmp_path / "d.json"
    fio.dump_json(fio.ddfv_to_dict(m), path)
    back = fio.load_ddfv(path)
    assert np.array_equal(back.Kstar, m.Kstar) and np.allclose(back.m_D, m.m_D)
    d = json.loads(path.read_text())
    d["diamonds"][0]["K"] += 1
    with pytest.raises(fio.MeshFormatError):
        fio.ddfv_from_dict(d)


def test_ddfv_values_round_trip():
    m = build_ddfv(refine("square", 2))
    u = sample_ddfv(lambda x, y: np.exp(x) * np.cos(3 * y), m)
    back = fio.read_ddfv_values_csv(fio.ddfv_values_csv(u), m)
    assert np.array_equal(back.vector(), u.vector())


def test_values_csv_round_trip(tmp_path):
    mesh = build_structured(2, 2)
    u = DiscreteFunction(mesh, [0.1, 1 / 3, -2e-300, 7.0])
    path = tmp_path / "v.csv"
    path.write_text("cellId,value\n" + fio.values_csv(u))
    assert np.array_equal(fio.read_values_csv(path, mesh).values, u.values)
    path.write_text("0,1\n1,2\n")
    with pytest.raises(fio.MeshFormatError):
        fio.read_values_csv(path, mesh)


@pytest.mark.parametrize("doc", ["{", "[]", '{"dim": 2}', '{"dim": 2, "nodes": [[0,0]], '
                                 '"cells": [{"verts": [0, 5], "center": [0, 0]}], "faces": []}'])
def test_corrupted_mesh_files(doc, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(doc)
    with pytest.raises(fio.MeshFormatError):
        fio.load_mesh(path)
    assert main(["mesh", "check", str(path)]) == 2


def test_missing_file():
    assert main(["mesh", "check", "/nonexistent/mesh.json"]) == 2


def test_fmt():
    assert fio.fmt(0.1) == "0.10000000000000001"
    assert fio.fmt(3) == "3" and fio.fmt(None) == "" and fio.fmt(True) == "true"


def test_parse_levels():
    assert parse_levels("1..5") == [1, 2, 3, 4, 5]
    assert parse_levels("2,4") == [2, 4]
    for bad in ("a", "", "-1"):
        with pytest.raises(CLIError):
            parse_levels(bad)


def test_mesh_gen_and_check(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["mesh", "gen", "--family", "acute-square", "--level", "1", "--out", str(out)]) == 0
    assert main(["mesh", "check", str(out)]) == 0
    assert "violations,0" in capsys.readouterr().out


def test_mesh_check_flags_perturbed(tmp_path):
    out = tmp_path / "p.json"
    assert main(["mesh", "gen", "--family", "perturbed", "--level", "2", "--out", str(out)]) == 0
    assert main(["mesh", "check", str(out)]) == 65


def test_norms_output(capsys):
    assert main(["norms", "--level", "1", "--field", "one", "--gamma0", "all"]) == 0
    rows = {l.split(",")[0]: float(l.split(",")[2]) for l in capsys.readouterr().out.split()}
    assert rows["lp"] == pytest.approx(1.0)
    assert rows["w1p_seminorm"] == 0.0
    assert rows["w1p_seminorm_dirichlet"] == pytest.approx(np.sqrt(4 * 2 * 0.5 / 0.25))
    assert rows["mean"] == pytest.approx(1.0)


def test_verify_config_errors():
    assert main(["verify", "--kind", "gns_general", "--theta", "0.9"]) == 64
    assert main(["verify", "--kind", "nope"]) == 64
    assert main(["verify", "--kind", "sp_dirichlet", "--gamma0", "none"]) == 64
    assert main(["verify", "--kind", "pw", "--family", "perturbed"]) == 64
    assert main(["verify"]) == 64
    assert main(["verify", "--kind", "sp_general", "--q", "9", "--p", "1.5"]) == 64


def test_verify_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["verify", "--kind", "gns_general,pw", "--levels", "1..3", "--samples", "30",
            "--seed", "11"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()
    head = a.read_text().splitlines()[0]
    assert head == ",".join(fio.SWEEP_HEADER)


def test_verify_json(capsys):
    assert main(["verify", "--kind", "nash_general", "--levels", "1,2", "--samples", "5",
                 "--format", "json"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert [r["level"] for r in recs] == [1, 2] and recs[0]["m"] == 2.0


def test_oracle_cli(capsys):
    assert main(["oracle", "--n", "4,8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    n, h, lam, closed = lines[1].split(",")[:4]
    assert float(lam) == pytest.approx(float(closed), rel=1e-9)


def test_ddfv_gen_counts(capsys):
    assert main(["ddfv", "gen", "--family", "square", "--level", "2"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert len(d["diamonds"]) == len(d["faces"]) == 40
    assert len(d["dual_cells"]) == len(d["nodes"]) == 25
    assert len(d["boundary_cells"]) == 16


def test_ddfv_verify_and_solve(capsys):
    assert main(["ddfv", "verify", "--kind", "pw,sp_general", "--levels", "1..2",
                 "--samples", "10", "--family", "perturbed", "--bound-factor", "0"]) == 0
    assert main(["ddfv", "solve", "--levels", "1..3"]) == 0
    assert main(["ddfv", "solve", "--A", "weird"]) == 64
    assert main(["ddfv", "gen", "--family", "cube"]) == 64


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fvineq", "verify", "--kind", "all", "--theta",
                        "0.9"], capture_output=True, text=True)
    assert r.returncode == 64
    assert "2/3" in r.stderr
