import json
import subprocess
import sys

import numpy as np
import pytest

from spherewave.cli import main
from spherewave.grid import Field, load_field, make_grid, save_field


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_bessel_eval_j0(capsys):
    code, out, _ = run(["bessel", "eval", "--a", "0", "--b", "0", "--rho", "0"], capsys)
    assert code == 0 and out == "1,0\n"


def test_unknown_subcommand(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 2 and "usage" in err


def test_missing_required_argument(capsys):
    code, _, err = run(["bessel", "eval", "--a", "0"], capsys)
    assert code == 2 and "--rho" in err


def test_bessel_json(capsys):
    code, out, _ = run(["bessel", "eval", "--a", "1", "--b", "0.5", "--rho", "3", "--json"], capsys)
    d = json.loads(out)
    assert code == 0
    assert d[0]["re"] == pytest.approx(0.41470545632369166, abs=1e-12)


def test_omega_table_file_and_manifest(tmp_path, capsys):
    out = tmp_path / "o.csv"
    code, _, _ = run(["omega", "table", "--alpha", "1", "--dim", "2", "--xi-max", "1", "--samples", "5",
                      "--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "xi,re,im" and len(lines) == 6
    assert float(lines[1].split(",")[1]) == pytest.approx(np.pi, rel=1e-15)
    man = json.loads((tmp_path / "o.csv.manifest.json").read_text())
    assert man["subcommand"] == "omega table"
    assert man["parameters"]["dim"] == 2 and man["seed"] == 0
    assert "wall_time" in man and "version" in man


def test_kernel_tail_regime_exit_1(capsys):
    code, _, err = run(["kernel", "scan", "--mode", "tail", "--j-min", "2", "--j-max", "4", "--r", "0.125"], capsys)
    assert code == 1 and "2^j > 1/r" in err


def test_kernel_scan_deterministic(tmp_path, capsys):
    args = ["kernel", "scan", "--mode", "l1", "--j-min", "3", "--j-max", "4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0].startswith("mode,j,t,measured,predicted,ratio")


def test_kernel_rho_violation(capsys):
    code, _, err = run(["kernel", "scan", "--mode", "l1", "--j-min", "3", "--j-max", "3", "--dim", "3",
                        "--factors", "2,1", "--rho", "0.05,0.4"], capsys)
    assert code == 1 and "rho_1" in err


def test_sweep_deterministic(capsys):
    args = ["sweep", "region", "--alpha", "0,0.5", "--p", "1.5:0.5:2.5", "--family", "random", "--M", "16",
            "--seed", "3"]
    code1, out1, _ = run(args, capsys)
    code2, out2, _ = run(args, capsys)
    assert code1 == code2 == 0 and out1 == out2
    assert len(out1.splitlines()) == 1 + 2 * 3


def test_decomp_caps_check(capsys):
    code, out, _ = run(["decomp", "caps", "--j", "6", "--sphere-dim", "2", "--check", "--samples", "500"], capsys)
    d = json.loads(out)
    assert code == 0 and d["count"] == 67 and d["partition_sum_max_error"] < 1e-12


def test_decomp_region_csv(capsys):
    code, out, _ = run(["decomp", "region", "--r", "0.25", "--dim", "2"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("j,k,center_0,center_1")
    assert int(lines[1].split(",")[0]) == 2


def test_sobolev_norm_from_file(tmp_path, capsys):
    spec = make_grid(2, (1, 1), 16, 2.0)
    x, y = spec.coordinates()
    f = Field.wrap(spec, np.broadcast_to(np.exp(2j * np.pi * 0.5 * x) + 0 * y, spec.shape))
    path = tmp_path / "f.bin"
    save_field(f, path)
    code, out, _ = run(["sobolev", "norm", "--field", str(path), "--s", "0.5,0.1", "--p", "2"], capsys)
    assert code == 0 and float(out) == pytest.approx(4.0 * 1.25 ** 0.25)


def _wave_cfg(tmp_path, **extra):
    cfg = {"dim": 2, "factors": [1, 1], "M": 16, "L": 0.5, "T": 0.5, "steps": 32,
           "g": {"kind": "manufactured", "k": [1, 1], "omega": 3.14159}}
    cfg.update(extra)
    p = tmp_path / "wave.json"
    p.write_text(json.dumps(cfg))
    return str(p)


def test_wave_solve_binary(tmp_path, capsys):
    out = tmp_path / "u.bin"
    assert main(["wave", "solve", "--config", _wave_cfg(tmp_path), "--out", str(out)]) == 0
    u = load_field(out)
    assert u.spec.shape == (16, 16)
    assert (tmp_path / "u.bin.manifest.json").exists()


def test_wave_apriori_csv(tmp_path, capsys):
    cfg = _wave_cfg(tmp_path, dim=3, factors=[2, 1], L=2.0, M=8, s=[0.4, 0.3], p=2.0,
                    g={"kind": "random", "kmax": 1.0})
    code, out, _ = run(["wave", "apriori", "--config", cfg], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,lhs,rhs,ratio" and len(lines) == 34


def test_wave_apriori_outside_window(tmp_path, capsys):
    cfg = _wave_cfg(tmp_path, dim=3, factors=[2, 1], L=2.0, M=8, s=[0.2, 0.05], p=4.0,
                    g={"kind": "random"})
    code, _, err = run(["wave", "apriori", "--config", cfg], capsys)
    assert code == 1 and "1/p" in err


def test_malformed_config(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(["wave", "solve", "--config", str(p)], capsys)
    assert code == 2 and "malformed" in err
    code, _, err = run(["wave", "solve", "--config", _wave_cfg(tmp_path, g={"kind": "nope"})], capsys)
    assert code == 2


def test_missing_file_exit_1(tmp_path, capsys):
    code, _, _ = run(["sobolev", "norm", "--field", str(tmp_path / "nope.bin"), "--s", "0,0"], capsys)
    assert code == 1


def test_symbol_check(tmp_path, capsys):
    p = tmp_path / "sym.json"
    p.write_text(json.dumps({"dim": 2, "factors": [1, 1], "M": 32, "L": 2, "rho": [0.2, 0.2],
                             "symbol": {"kind": "b_s", "s": [-0.2, -0.2]}}))
    code, out, _ = run(["symbol", "check", "--config", str(p)], capsys)
    assert code == 0 and json.loads(out)["passed"] is True


def test_selftest_subset(capsys):
    code, out, _ = run(["selftest", "--criteria", "1,3"], capsys)
    assert code == 0
    assert "[PASS] criterion  1" in out and "2/2 criteria passed" in out


def test_threads_flag(capsys):
    from spherewave import _config

    code, _, _ = run(["bessel", "eval", "--a", "0", "--rho", "1", "--threads", "2"], capsys)
    assert code == 0 and _config.threads() == 2
    _config.set_threads(None)


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "spherewave", "bessel", "eval", "--a", "0", "--rho", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "1,0\n"
