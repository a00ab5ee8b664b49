import numpy as np
import pytest

from stokeslet_surfaces import read_mesh, sphere_translation_reference
from stokeslet_surfaces.cli import (
    EXIT_FLOOR,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_args,
)


def test_parse_args_mesh_defaults():
    config = parse_args(["mesh", "--shape", "icosphere", "--f", "8",
                         "--out", "x.mesh"])
    assert config.command == "mesh"
    assert config.f == 8 and config.a == 1.0
    assert config.out == "x.mesh"


def test_unknown_flag_is_usage_error(capsys):
    assert main(["mesh", "--nope", "--out", "x"]) == EXIT_USAGE
    assert main(["bogus-command"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_empty_grid_rejected():
    assert main(["study", "--id", "resistance-drag", "--eps", ","]) == EXIT_USAGE


def test_mesh_roundtrip(tmp_path, capsys):
    out = tmp_path / "sphere.mesh"
    assert main(["mesh", "--shape", "icosphere", "--f", "8",
                 "--out", str(out)]) == EXIT_OK
    assert "faces=1280" in capsys.readouterr().out
    mesh = read_mesh(out)
    assert mesh.num_faces == 1280 and mesh.num_vertices == 642


def test_mesh_write_failure_is_io_error(tmp_path):
    missing = tmp_path / "no" / "such" / "dir" / "m.mesh"
    assert main(["mesh", "--f", "2", "--out", str(missing)]) == EXIT_IO


def test_floor_violation_exit_code(capsys):
    code = main(["study", "--id", "forward-translate", "--eps", "1e-20",
                 "--f", "4"])
    assert code == EXIT_FLOOR
    assert "ulp" in capsys.readouterr().err


def test_eval_matches_reference_far_field(capsys, tmp_path):
    out = tmp_path / "field.csv"
    # the far-field error tracks the surface-area deficit (~h^2); f=20 meets 1e-3
    code = main(["eval", "--shape", "icosphere", "--f", "20",
                 "--traction", "translate", "--point", "10,0,0",
                 "--out", str(out)])
    assert code == EXIT_OK
    row = out.read_text().strip().split("\n")[1].split(",")
    got = np.array([float(t) for t in row[3:]])
    _, expect = sphere_translation_reference([10.0, 0, 0], 1.0, [1.0, 0, 0], 1.0)
    assert np.linalg.norm(got - expect) < 1e-3 * np.linalg.norm(expect)


def test_solve_drag_summary(capsys):
    assert main(["solve", "--problem", "drag", "--f", "5"]) == EXIT_OK
    out = capsys.readouterr().out
    drag_x = float(out.split("(")[1].split(",")[0])
    assert drag_x == pytest.approx(-6 * np.pi, rel=2e-2)


def test_solve_squirmer_summary(capsys):
    assert main(["solve", "--problem", "squirmer", "--f", "4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("squirmer U = ")
    uz = float(out.split("(")[1].split(")")[0].split(",")[2])
    assert uz == pytest.approx(1.0, abs=0.03)


def test_study_writes_report(tmp_path, capsys):
    out = tmp_path / "drag.csv"
    code = main(["study", "--id", "resistance-drag", "--f", "2,3",
                 "--eps", "1e-4", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "experiment,num_faces,dof,h,eps,metric,value"
    drag_rows = [l for l in lines[1:] if "drag_x_rel_error" in l]
    assert len(drag_rows) == 2


def test_study_mesh_file_not_needed_for_eval_from_file(tmp_path):
    mesh_path = tmp_path / "m.mesh"
    assert main(["mesh", "--f", "3", "--out", str(mesh_path)]) == EXIT_OK
    assert main(["eval", "--mesh-file", str(mesh_path), "--point", "5,0,0"]) == EXIT_OK


def test_thread_env_hint(monkeypatch, capsys):
    monkeypatch.setenv("STOKESLET_SURFACES_THREADS", "1")
    assert main(["solve", "--problem", "drag", "--f", "2"]) == EXIT_OK
