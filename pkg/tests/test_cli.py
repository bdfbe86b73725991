import csv
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from leapfrog.cli import RunConfig, main


@given(
    st.floats(0.5, 3.0),
    st.floats(0.05, 0.34),
    st.floats(0.0, 0.2),
    st.sampled_from(["64x64", "128x32"]),
    st.booleans(),
)
def test_config_round_trip_is_bit_identical(y0, ratio, eps, grid, plot):
    cfg = RunConfig(y0=y0, xi0=ratio * y0, eps=eps, grid=grid, plot_data=plot)
    text = cfg.to_text()
    again = RunConfig.from_text(text)
    assert again == cfg
    assert again.to_text() == text and again.digest() == cfg.digest()


def test_config_rejects_bad_values():
    for bad in (dict(xi0=0.9), dict(grid="100x64"), dict(tau=1.0), dict(xi0_range="0.1:0.9:3")):
        with pytest.raises(ValueError):
            RunConfig(**bad)
    with pytest.raises(ValueError):
        RunConfig.from_text("nonsense = 1\n")


def test_period_table(tmp_path):
    out = tmp_path / "p"
    assert main(["period", "--xi0-range", "0.05:0.65:13", "--y0", "1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "period.csv")))
    assert len(rows) == 13
    for r in rows:
        T, Tq = float(r["T"]), float(r["T_quadrature"])
        assert abs(T - Tq) <= 1e-8 * T
        assert float(r["lower"]) <= T <= float(r["upper"]) and r["bounds_ok"] == "1"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "period" and len(manifest["config_hash"]) == 64


def test_outputs_are_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["qtheta", "--grid", "64x64", "--xi0", "0.3", "--out", str(tmp_path / name)]) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "qtheta.csv").read_bytes() == (b / "qtheta.csv").read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    ma.pop("created"), mb.pop("created")
    ma["config"].pop("out"), mb["config"].pop("out")
    assert ma["results"] == mb["results"] and ma["files"] == mb["files"]


def test_config_file_with_flag_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# experiment\nxi0 = 0.05\neps = 0\n")
    out = tmp_path / "m"
    assert main(["monodromy", "--config", str(conf), "--out", str(out)]) == 0
    res = json.loads((out / "manifest.json").read_text())["results"]
    assert abs(res["det_gap"][0] - 0.121262) < 1e-2
    assert res["structure_ok"]
    assert abs(res["a0_det_closed_form"] - res["a0_det_integrated"]) < 1e-8


def test_validation_error_exit_code(tmp_path, capsys):
    assert main(["orbit", "--xi0", "0.9", "--out", str(tmp_path / "x")]) == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "validation"


def test_numerical_error_exit_code(tmp_path):
    # a refused computation (here injected) must map to exit code 3 with an error record
    from leapfrog import cli

    def boom(cfg, out):
        raise cli.NearSingularError("singular")

    cli.COMMANDS["orbit"] = (boom, "")
    try:
        assert main(["orbit", "--out", str(tmp_path / "y")]) == 3
        assert (tmp_path / "y" / "error.json").exists()
    finally:
        cli.COMMANDS["orbit"] = (cli.cmd_orbit, "integrate the reduced point-vortex orbit over one period")


def test_small_commands_run(tmp_path):
    assert main(["orbit", "--xi0", "0.3", "--out", str(tmp_path / "o")]) == 0
    assert main(["g0", "--grid", "64x32", "--eps", "0.05", "--out", str(tmp_path / "g")]) == 0
    res = json.loads((tmp_path / "g" / "manifest.json").read_text())["results"]
    assert res["sup_diff"] < 1e-10
    assert main(["cantor", "--eps", "0.05", "--jmax", "32", "--out", str(tmp_path / "c")]) == 0
    assert main(["scan-singular", "--xi0-range", "0.14:0.16:3", "--grid", "64x64", "--threads", "1",
                 "--out", str(tmp_path / "s")]) == 0
    roots = list(csv.DictReader(open(tmp_path / "s" / "roots.csv")))
    assert len(roots) == 1


def test_verify_subset(tmp_path):
    assert main(["verify", "--only", "1,2,3", "--out", str(tmp_path / "v")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "v" / "verify.csv")))
    assert [r["status"] for r in rows] == ["PASS"] * 3
