import json
import subprocess
import sys

import pytest

from limitlab.cli import COMMANDS, SCHEMA, main
from limitlab.imaging import BASIN_COLORS, BOUNDED, read_ppm
from limitlab.limits import basilica_graph

# small jobs for every command; output paths are filled in per test
FAST = {
    "render-julia": ["--grid", "64"],
    "render-basin": ["--grid", "64", "--budget", "120"],
    "fibers": ["--depth", "8"],
    "solenoid-demo": ["--samples", "300"],
    "conjugacy-check": ["--levels", "4", "--samples", "40"],
    "torus-diagnostics": ["--samples", "800", "--iterations", "6"],
    "accessible-boundary": ["--depth", "8"],
    "homology": ["--grid", "128", "--samples", "100"],
    "covering-check": ["--depth", "4", "--samples", "20"],
}
OUT_SUFFIX = {"render-julia": ".ppm", "render-basin": ".ppm", "fibers": ".jsonl",
              "conjugacy-check": ".json", "accessible-boundary": ".jsonl"}


def run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def job(cmd, tmp_path, tag="a"):
    argv = [cmd] + FAST[cmd]
    if cmd in OUT_SUFFIX:
        argv += ["--out", str(tmp_path / f"{cmd}-{tag}{OUT_SUFFIX[cmd]}")]
    return argv + ["--json", str(tmp_path / f"{cmd}-{tag}.report.json")]


def test_fast_table_covers_commands():
    assert set(FAST) == set(COMMANDS)


@pytest.mark.parametrize("cmd", COMMANDS)
def test_command_passes_and_report_schema(cmd, tmp_path, capsys):
    code, out, err = run(job(cmd, tmp_path), capsys)
    assert code == 0, err
    assert out == ""
    doc = json.loads((tmp_path / f"{cmd}-a.report.json").read_text())
    assert doc["schema"] == SCHEMA and doc["version"] == 1
    assert doc["command"] == cmd
    assert doc["passed"] is True and doc["failures"] == []
    assert doc["checks"] and all(set(c) == {"name", "pass", "value", "threshold"}
                                 for c in doc["checks"])
    assert doc["config"].startswith(f"command = {cmd}\n")
    for entry in doc["outputs"].values():
        assert (tmp_path / entry["path"]).exists()


@pytest.mark.parametrize("cmd", COMMANDS)
def test_rerun_is_byte_identical(cmd, tmp_path, capsys):
    assert run(job(cmd, tmp_path, "a"), capsys)[0] == 0
    assert run(job(cmd, tmp_path, "b"), capsys)[0] == 0
    for a in sorted(tmp_path.glob(f"{cmd}-a*")):
        b = tmp_path / a.name.replace(f"{cmd}-a", f"{cmd}-b")
        if a.name.endswith(".report.json"):
            strip = lambda t: t.replace(f"{cmd}-a", "X").replace(f"{cmd}-b", "X")
            assert strip(a.read_text()) == strip(b.read_text())
        else:
            assert a.read_bytes() == b.read_bytes(), a.name


def test_report_to_stdout(capsys):
    code, out, _ = run(["fibers", "--depth", "3"], capsys)
    assert code == 0
    assert json.loads(out)["data"]["count"] == 8


def test_fibers_full_depth(tmp_path, capsys):
    path = tmp_path / "f.jsonl"
    code, out, _ = run(["fibers", "--poly", "0,0,1", "--z", "1", "--depth", "10",
                        "--out", str(path)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["data"]["count"] == 1024
    assert doc["data"]["min_separation"] > 1e-9
    lines = path.read_text().splitlines()
    assert len(lines) >= 1024
    json.loads(lines[-1])


def test_fibers_ramified_base(capsys):
    code, out, _ = run(["fibers", "--z", "0", "--depth", "4"], capsys)
    doc = json.loads(out)
    assert doc["data"]["total_multiplicity"] == 16
    assert doc["data"]["ramified"] >= 1


def test_torus_bad_alpha_fails(capsys):
    code, out, _ = run(["torus-diagnostics", "--alpha", "0.9", "--samples", "2000",
                        "--iterations", "6"], capsys)
    assert code == 1
    doc = json.loads(out)
    assert doc["passed"] is False
    assert doc["failures"] == ["nesting", "injectivity", "monotone_clouds"]


def test_tol_flag_tightens_primary_check(capsys):
    code, out, _ = run(["fibers", "--depth", "6", "--tol", "10"], capsys)
    assert code == 1
    assert json.loads(out)["failures"] == ["distinct_histories"]


@pytest.mark.parametrize("argv", [
    ["fibers", "--poly", "x,y"],
    ["fibers", "--depth", "many"],
    ["torus-diagnostics", "--model", "cube"],
    ["render-julia", "--grid", "1,2"],
])
def test_bad_input_exits_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == ""
    doc = json.loads(err)
    assert doc["failures"] == ["config"] and doc["passed"] is False
    assert "error" in doc


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\ncommand = fibers\npoly = 0.1,0,1\ndepth = 3\n")
    code, out, _ = run(["fibers", "--config", str(cfg), "--depth", "5"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["data"]["count"] == 32
    assert doc["config"] == "command = fibers\npoly = 0.1,0,1\ndepth = 5\n"


def test_config_for_other_command_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command = homology\n")
    assert run(["fibers", "--config", str(cfg)], capsys)[0] == 2
    cfg.write_text("colour = blue\n")
    assert run(["fibers", "--config", str(cfg)], capsys)[0] == 2


def test_julia_center_pixel_bounded(tmp_path, capsys):
    path = tmp_path / "j.ppm"
    assert run(["render-julia", "--grid", "65", "--out", str(path)], capsys)[0] == 0
    img = read_ppm(path)
    assert img.shape == (65, 65, 3)
    assert tuple(img[32, 32]) == BOUNDED
    assert tuple(img[0, 0]) != BOUNDED


def test_basin_fixed_point_pixel(tmp_path, capsys):
    path = tmp_path / "b.ppm"
    code, out, _ = run(["render-basin", "--grid=-1,1,-1,1,50,50", "--out", str(path)],
                       capsys)
    assert code == 0
    doc = json.loads(out)
    x = doc["data"]["fixed_point"]
    assert abs(complex(*x) - 0.1059236) < 1e-6
    img = read_ppm(path)
    assert tuple(img[25, int((x[0] + 1) / 0.04)]) == BASIN_COLORS[0]


def test_covering_check_reads_graph_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(basilica_graph(5).to_json())
    code, out, _ = run(["covering-check", "--graph", str(path)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["data"]["verdict"]["verdict"] == "TRIVIAL"


def test_homology_of_jordan_case(capsys):
    code, out, _ = run(["homology", "--poly", "0.1,0,1", "--grid", "128",
                        "--samples", "50"], capsys)
    assert code == 0
    assert json.loads(out)["data"]["h1"]["group"] == "Z[1/2]"


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "limitlab", "solenoid-demo", "--samples", "50"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["command"] == "solenoid-demo"
