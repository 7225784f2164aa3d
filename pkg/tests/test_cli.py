"""Command-line interface: dispatch, formats, determinism, exit codes."""

from __future__ import annotations

import json
import math
import os

import numpy as np
import pytest

from subindex.cli import RunConfig, build_parser, main, run, worker_cap
from subindex.directions import DirectionSet


@pytest.fixture()
def dirs_file(tmp_path):
    ds = DirectionSet.from_vectors(np.array([[1.0, 0, 0], [-1.0, 0, 0]]))
    path = tmp_path / "dirs.json"
    path.write_text(ds.to_json())
    return str(path)


def test_classify_antipodal_pair(dirs_file, capsys):
    code = main(["classify", "--input", dirs_file])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["critical"] is True
    assert out["sub_index"] == 1
    assert out["variant"] == "great_subsphere"
    assert out["schema_version"] == "1"


def test_classify_missing_file_is_usage_error(capsys):
    code = main(["classify", "--input", "/definitely/not/here.json"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_classify_reads_plain_object_file(tmp_path, capsys):
    # hand-written file in the documented format, not produced by to_json()
    path = tmp_path / "plain.json"
    path.write_text('{"dim": 2, "directions": [[0.0, 1.0]]}\n')
    code = main(["classify", "--input", str(path)])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["critical"] is False


def test_classify_malformed_content_is_usage_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json at all")
    code = main(["classify", "--input", str(path)])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_torus_table_dim3_counts(capsys):
    code = main(["torus-table", "--dim", "3"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["counts"] == {"1": 3, "2": 3, "3": 1}
    assert out["total"] == 7


def test_torus_table_csv_format(capsys):
    code = main(["torus-table", "--dim", "2", "--format", "csv"])
    text = capsys.readouterr().out
    assert code == 0
    assert text == "lambda,count\n1,2\n2,1\n"


def test_csv_rejected_where_no_table(dirs_file, capsys):
    code = main(["classify", "--input", dirs_file, "--format", "csv"])
    assert code == 2


def test_torus_classify_edge_center(capsys):
    code = main(["torus-classify", "--dim", "2", "--point", "0.5,0"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["critical"] is True
    assert out["sub_index"] == 1
    assert out["level"] == pytest.approx(0.5)


def test_torus_classify_regular_point(capsys):
    code = main(["torus-classify", "--dim", "2", "--point", "0.3,0.1"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["critical"] is False
    assert out["sub_index"] is None
    assert out["directions"] is None


def test_torus_classify_with_custom_base(capsys):
    code = main(
        ["torus-classify", "--dim", "2", "--point", "0.25,0.25", "--base", "0.75,0.75;0.75,0.25"]
    )
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["level"] == pytest.approx(0.5)


def test_torus_classify_dimension_mismatch(capsys):
    code = main(["torus-classify", "--dim", "3", "--point", "0.5,0"])
    assert code == 2


def test_torus_connectivity_critical_level(capsys):
    code = main(
        ["torus-connectivity", "--dim", "2", "--level", "0.5", "--eps", "0.05", "--grid", "150"]
    )
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["all_outer_meet_inner"] is True


def test_torus_connectivity_eps_guard(capsys):
    code = main(
        ["torus-connectivity", "--dim", "2", "--level", "0.3", "--eps", "0.001", "--grid", "50"]
    )
    assert code == 2


def test_flow_verify_passes_and_reports(capsys):
    code = main(["flow-verify", "--dim", "2", "--radius", "1", "--samples", "500", "--seed", "5"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["passed"] is True
    for name in ("arrive_cos", "arrive_path", "arrive_exit", "omega_identity", "omega_exit"):
        assert out["suites"][name]["violations"] == 0
    assert "cap_bound" in out["angle_certificate"]


def test_flow_verify_skips_angle_suite_in_high_dimension(capsys):
    code = main(["flow-verify", "--dim", "5", "--radius", "1", "--samples", "300"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert "skipped" in out["angle_certificate"]
    assert "omega_angle" not in out["suites"]


def test_flow_verify_reports_are_byte_identical(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    args = ["flow-verify", "--dim", "2", "--radius", "1", "--samples", "400", "--seed", "11"]
    assert main(args + ["--out", a]) == 0
    assert main(args + ["--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_out_files_are_written_atomically(tmp_path):
    out = str(tmp_path / "report.json")
    assert main(["torus-table", "--dim", "2", "--out", out]) == 0
    assert json.loads(open(out).read())["counts"] == {"1": 2, "2": 1}
    leftovers = [f for f in os.listdir(tmp_path) if f != "report.json"]
    assert leftovers == []


def test_emit_trajectories_csv(tmp_path, capsys):
    traj = str(tmp_path / "traj.csv")
    code = main(
        [
            "flow-verify", "--dim", "3", "--radius", "1", "--samples", "200",
            "--emit-trajectories", traj,
        ]
    )
    capsys.readouterr()
    assert code == 0
    lines = open(traj).read().splitlines()
    assert lines[0] == "t,x1,x2,x3"
    assert len(lines) > 10
    first = [float(v) for v in lines[1].split(",")]
    assert len(first) == 4


def test_jacobi_index_csv_is_decreasing(capsys):
    code = main(
        [
            "jacobi-index", "--curvature", "1", "--length", str(math.pi),
            "--eps-min", "0.02", "--eps-max", "0.2", "--format", "csv",
        ]
    )
    text = capsys.readouterr().out
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "eps,index_value"
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert values == sorted(values, reverse=True)
    assert len(values) == 4


def test_jacobi_index_rejects_flat_curvature(capsys):
    code = main(["jacobi-index", "--curvature", "0", "--length", "1"])
    assert code == 2


def test_jacobi_index_rejects_non_conjugate_length(capsys):
    code = main(["jacobi-index", "--curvature", "1", "--length", "1.0"])
    assert code == 2


def test_jacobi_verify_all_checks_pass(capsys):
    code = main(["jacobi-verify"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["passed"] is True
    assert out["schema_version"] == "1"
    names = [c["name"] for c in out["checks"]]
    assert "index_divergence_oracle" in names
    assert "index_form_cross_check" in names
    assert all(c["passed"] for c in out["checks"])


def test_worker_cap_honors_environment(monkeypatch):
    monkeypatch.setenv("SUBINDEX_THREADS", "2")
    assert worker_cap() == 2
    monkeypatch.setenv("SUBINDEX_THREADS", "0")
    assert worker_cap() == 1
    monkeypatch.delenv("SUBINDEX_THREADS")
    assert worker_cap() >= 1


def test_worker_cap_garbage_env_is_usage_error(monkeypatch, capsys):
    monkeypatch.setenv("SUBINDEX_THREADS", "many")
    code = main(["flow-verify", "--dim", "2", "--radius", "1", "--samples", "50"])
    assert code == 2


def test_run_config_dataclass_dispatch(capsys):
    config = RunConfig(command="torus-table", options={"dim": 2, "grid": None})
    assert run(config) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["counts"] == {"1": 2, "2": 1}


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([])
    assert exc.value.code == 2


def test_console_entry_point_installed():
    import shutil
    import subprocess

    exe = shutil.which("subindex")
    assert exe is not None
    proc = subprocess.run(
        [exe, "torus-table", "--dim", "1"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["counts"] == {"1": 1}
