import json
import math
from pathlib import Path

import numpy as np
import pytest

from curveft import oracles
from curveft.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from curveft.outputs import read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "scripts" / "configs"


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _run(tmp_path, command, doc, sub="out"):
    out = tmp_path / sub
    out.mkdir(exist_ok=True)
    code = main([command, "--config", _write(tmp_path, doc), "--out", str(out)])
    return code, out


def _hash_line(path):
    return Path(path).read_text().rstrip("\n").splitlines()[-1]


def test_surface_info_figure1(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    assert main(["surface-info", "--config", str(CONFIGS / "figure1_info.json"), "--out", str(out)]) == EXIT_OK
    info = json.loads((out / "surface_info.json").read_text())
    assert info["passed"]
    assert info["total_mass"] == pytest.approx(oracles.figure1_arc_length(), rel=1e-9)


def test_surface_info_flat_fails_validation(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    assert main(["surface-info", "--config", str(CONFIGS / "flat_info.json"), "--out", str(out)]) == EXIT_FAILED
    info = json.loads((out / "surface_info.json").read_text())
    assert not info["passed"]
    assert "total_mass" not in info


def test_ft_scan_circle(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    assert main(["ft-scan", "--config", str(CONFIGS / "circle_scan.json"), "--out", str(out)]) == EXIT_OK
    text = (out / "ft_scan.csv").read_text().splitlines()
    assert text[0] == "xi_1,xi_2,re,im,abs,nodes,err_est"
    assert text[-1].startswith("# config_sha256=")
    assert len(text) == 102
    _, rows = read_csv(out / "ft_scan.csv")
    np.testing.assert_allclose(rows[:, 2], oracles.circle_ft(rows[:, :2]), atol=1e-8)


def test_ft_scan_rerun_is_byte_identical(tmp_path):
    doc = json.loads((CONFIGS / "circle_scan.json").read_text())
    _, a = _run(tmp_path, "ft-scan", doc, "a")
    _, b = _run(tmp_path, "ft-scan", doc, "b")
    for name in ("ft_scan.csv", "ft_scan.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_hash_changes_with_config(tmp_path):
    doc = {"surface": {"kind": "circle"}, "scan": {"points": [[1.0, 0.0]]}}
    _, a = _run(tmp_path, "ft-scan", doc, "a")
    doc["c_nyq"] = 8.0
    _, b = _run(tmp_path, "ft-scan", doc, "b")
    assert _hash_line(a / "ft_scan.csv") != _hash_line(b / "ft_scan.csv")


def test_ft_scan_grid(tmp_path):
    doc = {"surface": {"kind": "circle"}, "scan": {"grid": [[0.0, 1.0, 2.0], [0.5, 1.5]]}}
    code, out = _run(tmp_path, "ft-scan", doc)
    assert code == EXIT_OK
    _, rows = read_csv(out / "ft_scan.csv")
    np.testing.assert_array_equal(rows[:, :2], [[0, 0.5], [0, 1.5], [1, 0.5], [1, 1.5], [2, 0.5], [2, 1.5]])


def test_ft_scan_records_node_budget_failures(tmp_path):
    doc = {"surface": {"kind": "sphere", "params": {"d": 3}},
           "scan": {"points": [[1.0, 0.0, 0.0], [0.0, 0.0, 900.0]]}}
    code, out = _run(tmp_path, "ft-scan", doc)
    assert code == EXIT_OK
    summary = json.loads((out / "ft_scan.json").read_text())
    assert len(summary["failures"]) == 1
    assert summary["failures"][0]["xi"] == [0.0, 0.0, 900.0]


def test_ft_scan_all_failed_is_exit_2(tmp_path):
    doc = {"surface": {"kind": "sphere", "params": {"d": 3}}, "scan": {"points": [[0.0, 0.0, 900.0]]}}
    code, _ = _run(tmp_path, "ft-scan", doc)
    assert code == EXIT_FAILED


def test_ft_scan_over_max_norm_is_exit_1(tmp_path):
    doc = {"surface": {"kind": "circle"}, "scan": {"points": [[5000.0, 0.0]]}}
    code, _ = _run(tmp_path, "ft-scan", doc)
    assert code == EXIT_USAGE


def test_sp_compare_cap(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    assert main(["sp-compare", "--config", str(CONFIGS / "cap_sp_compare.json"), "--out", str(out)]) == EXIT_OK
    fit = json.loads((out / "sp_compare.json").read_text())
    assert fit["slope"] <= -0.8
    assert fit["failures"] == []
    assert len(read_csv(out / "sp_compare.csv")[1]) == 12


def test_sp_compare_bad_direction(tmp_path):
    doc = {"surface": {"kind": "circle"}, "direction": [1, 0, 0]}
    code, _ = _run(tmp_path, "sp-compare", doc)
    assert code == EXIT_USAGE


def test_hemisphere_command(tmp_path):
    doc = {"d": 3, "xi": {"start": 10.0037, "stop": 40.0037, "num": 121}, "symmetry_samples": 3}
    code, out = _run(tmp_path, "hemisphere", doc)
    assert code == EXIT_OK
    payload = json.loads((out / "hemisphere.json").read_text())
    assert payload["symmetry_max_deviation"] <= 1e-7
    _, rows = read_csv(out / "hemisphere.csv")
    val = rows[:, 1] + 1j * rows[:, 2]
    np.testing.assert_allclose(val, oracles.hemisphere_axis_d3(rows[:, 0]), atol=1e-9)


def test_coverage_cap(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    assert main(["coverage", "--config", str(CONFIGS / "cap_coverage.json"), "--out", str(out)]) == EXIT_OK
    cov = json.loads((out / "coverage.json").read_text())
    assert cov["fraction"] == pytest.approx(1 - math.cos(math.pi / 6), abs=0.01)
    header = (out / "coverage.csv").read_text().splitlines()[0]
    assert header == "e_1,e_2,e_3,member,nearest_angle,weight"


def test_coverage_window_region_needs_window(tmp_path):
    code, _ = _run(tmp_path, "coverage", {"surface": {"kind": "circle"}, "region": "window"})
    assert code == EXIT_USAGE


def test_frame_circle_cone(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    assert main(["frame", "--config", str(CONFIGS / "circle_cone_frame.json"), "--out", str(out)]) == EXIT_OK
    est = json.loads((out / "frame.json").read_text())
    assert est["H_size"] == 8
    assert 0 < est["alpha_min"] <= est["alpha_max"]
    assert len(read_csv(out / "spectrum.csv")[1]) == est["lambda_size"]


def test_frame_refusal_is_exit_2(tmp_path):
    doc = {"surface": {"kind": "circle"}, "spectrum": {"kind": "explicit", "points": [[0, 0]]},
           "H": {"kind": "explicit", "points": [[0, 0], [1e-9, 0]]}}
    code, out = _run(tmp_path, "frame", doc)
    assert code == EXIT_FAILED
    assert json.loads((out / "frame.json").read_text())["cond_G"] > 1e12


def test_frame_partial_sums(tmp_path):
    doc = {"surface": {"kind": "circle"},
           "spectrum": {"kind": "lattice_ball", "spacing": 1, "radius": 20, "exclude_zero": True},
           "H": {"kind": "explicit", "points": [[0, 0]]}, "partial_sum_radii": [5, 10, 20]}
    code, out = _run(tmp_path, "frame", doc)
    assert code == EXIT_OK
    ps = json.loads((out / "frame.json").read_text())["partial_sums"]
    assert set(ps["ratios"]) == {"5.0", "10.0"}


@pytest.mark.parametrize("command,doc", [
    ("ft-scan", {"surface": {"kind": "circle"}, "scan": {"points": [[1, 0]]}, "bogus": 1}),
    ("hemisphere", {"d": 3, "typo": True}),
    ("frame", {"surface": {"kind": "circle"}}),
    ("ft-scan", {"surface": {"kind": "no-such-surface"}, "scan": {"points": [[1, 0]]}}),
    ("coverage", {"surface": {"kind": "circle"}, "region": "elsewhere"}),
])
def test_bad_configs_exit_1(tmp_path, command, doc):
    code, _ = _run(tmp_path, command, doc)
    assert code == EXIT_USAGE


def test_malformed_json_exit_1(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["ft-scan", "--config", str(p), "--out", str(tmp_path)]) == EXIT_USAGE


def test_missing_config_exit_1(tmp_path):
    assert main(["ft-scan", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == EXIT_USAGE


def test_unknown_command_exit_1():
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == EXIT_USAGE


def test_verify_only_subset(tmp_path, capsys):
    assert main(["verify", "--suite", "fast", "--only", "1", "9", "--out", str(tmp_path)]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("[PASS]  1 ")
    assert lines[1].startswith("[PASS]  9 ")
    summary = json.loads((tmp_path / "verify_fast.json").read_text())
    assert [c["number"] for c in summary["criteria"]] == [1, 9]


def test_verify_unknown_suite():
    assert main(["verify", "--suite", "enormous"]) == EXIT_USAGE
