import json
from pathlib import Path

import numpy as np
import pytest

import chainbound as cb
from chainbound import chaining, fixtures
from chainbound.cli import main
from chainbound.reporting import config_hash


def _write(tmp_path, name, payload) -> Path:
    path = tmp_path / name
    if name.endswith(".toml"):
        lines = []
        for key, val in payload.items():
            if isinstance(val, str):
                lines.append(f'{key} = "{val}"')
            elif isinstance(val, bool):
                lines.append(f"{key} = {str(val).lower()}")
            elif isinstance(val, list):
                lines.append(f"{key} = {val}")
            else:
                lines.append(f"{key} = {val}")
        path.write_text("\n".join(lines) + "\n")
    else:
        path.write_text(json.dumps(payload))
    return path


def test_net_build_fixture_run(tmp_path):
    cfg = _write(tmp_path, "net.toml", {
        "command": "net-build", "fixture": "square-cloud", "seed": 0,
        "levels": 6,
    })
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "net.json").exists()
    assert (out / "net_invariants.csv").exists()
    assert (out / "net.png").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["passed"] is True
    assert manifest["command"] == "net-build"
    assert manifest["config_hash"] == config_hash(
        json.loads(json.dumps({"command": "net-build",
                               "fixture": "square-cloud",
                               "seed": 0, "levels": 6}))
    )


def test_malformed_config_usage_error(tmp_path):
    cfg = _write(tmp_path, "bad.json", {"command": "sup-integrals",
                                        "seed": "zero"})
    out = tmp_path / "bad_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists() or not any(out.iterdir())


def test_unknown_command_and_missing_file(tmp_path):
    cfg = _write(tmp_path, "cmd.json", {"command": "divinate"})
    assert main(["--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
    assert main(["--config", str(tmp_path / "absent.toml")]) == 2


def test_sandwich_with_adversarial_net_cache(tmp_path):
    space, dims = fixtures.standard_fixtures()["square-cloud"]
    net = cb.build_net(space, dims, 6)
    blob = chaining.net_to_json(net)
    blob["levels"][3] = blob["levels"][3][:-1]  # delete one net point
    cache = tmp_path / "tampered_net.json"
    cache.write_text(json.dumps(blob))
    cfg = _write(tmp_path, "sandwich.json", {
        "command": "sandwich", "fixture": "square-cloud",
        "net_cache": str(cache), "seed": 0, "figures": False,
        "fields": {"count": 2, "seed": 5},
    })
    out = tmp_path / "sw_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 1
    rows = (out / "net_invariants.csv").read_text().splitlines()
    assert any(",false," in r for r in rows)


def test_sandwich_clean_run_passes(tmp_path):
    cfg = _write(tmp_path, "sandwich_ok.json", {
        "command": "sandwich", "fixture": "two-point", "seed": 0,
        "fields": {"count": 3, "seed": 5}, "figures": False,
        "weights": [{"kind": "power", "alpha": 0.5}],
    })
    out = tmp_path / "sw_ok"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0


def test_determinism_across_worker_counts(tmp_path):
    cfg = _write(tmp_path, "sup.json", {
        "command": "sup-integrals", "n_list": [4, 16], "replicates": 60,
        "seed": 7, "figures": False,
    })
    outs = []
    for workers in ("1", "4"):
        out = tmp_path / f"sup_{workers}"
        assert main(["--config", str(cfg), "--out", str(out),
                     "--workers", workers]) == 0
        outs.append((out / "sup_integrals.csv").read_bytes())
    assert outs[0] == outs[1]


def test_seed_override_changes_output(tmp_path):
    cfg = _write(tmp_path, "sup2.json", {
        "command": "sup-integrals", "n_list": [4], "replicates": 40,
        "seed": 7, "figures": False,
    })
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["--config", str(cfg), "--out", str(out2),
                 "--seed", "8"]) == 0
    assert (out1 / "sup_integrals.csv").read_bytes() != \
        (out2 / "sup_integrals.csv").read_bytes()


def test_blowup_command(tmp_path):
    cfg = _write(tmp_path, "blowup.json", {
        "command": "blowup", "fixture": "two-point", "seed": 0,
        "alpha_star": 0.5, "gamma": 1.0, "beta": 0.4, "alpha_grid": 60,
        "fields": {"count": 2, "seed": 3}, "figures": False,
    })
    out = tmp_path / "blow_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    table = (out / "blowup.csv").read_text().splitlines()
    assert table[0] == "field,lhs,middle,rhs,grid_tol,passed"


def test_seminorm_command_writes_json_rows(tmp_path):
    cloud = tmp_path / "pts.csv"
    cb.metric.save_point_cloud(cloud, np.array([[0.0, 0.0], [1.0, 0.0],
                                                [0.0, 1.0]]))
    cfg = _write(tmp_path, "semi.json", {
        "command": "seminorm", "cloud": str(cloud), "seed": 0,
        "field": {"kind": "sqrt", "seed": 2},
        "weights": [{"kind": "power", "alpha": 0.5},
                    {"kind": "log_damped", "beta": 1, "gamma": 1,
                     "base": {"kind": "power", "alpha": 0.5}}],
        "figures": False,
    })
    out = tmp_path / "semi_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    rows = json.loads((out / "seminorm.json").read_text())
    assert len(rows) == 2
    assert all(row["value"] >= 0.0 for row in rows)


def test_green_constant_command(tmp_path):
    cfg = _write(tmp_path, "green.json", {
        "command": "green-constant", "modes": 16, "grid_n": 4,
        "panels_per_decade": 6, "seed": 0, "figures": False,
    })
    out = tmp_path / "green_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    text = (out / "green_constant.csv").read_text()
    assert "rel_change_on_doubling" in text


def test_pam_solve_eta_zero_contract(tmp_path):
    cfg = _write(tmp_path, "pam.json", {
        "command": "pam-solve", "eta": 0.0, "T": 0.05, "Mx": 32, "Nt": 256,
        "replicates": 2, "seed": 0, "figures": False,
    })
    out = tmp_path / "pam_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    meta = json.loads((out / "pam_ensemble.json").read_text())
    raw = np.fromfile(out / "pam_fields.bin", dtype=meta["dtype"])
    assert raw.size == int(np.prod(meta["shape"]))
    assert json.loads((out / "manifest.json").read_text())["passed"] is True


def test_pam_modulus_refine_contract(tmp_path):
    cfg = _write(tmp_path, "pammod.json", {
        "command": "pam-modulus", "eta": 1.0, "T": 0.1, "Mx": 16, "Nt": 256,
        "replicates": 30, "seed": 0, "refine": True, "store_stride": 8,
        "figures": False,
    })
    out = tmp_path / "pammod_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "pam_modulus.csv").read_text().splitlines()
    assert len(lines) == 3  # header + coarse + refined


def test_levy_command(tmp_path):
    cfg = _write(tmp_path, "levy.json", {
        "command": "levy", "n_steps": 4096, "h_list": [0.0078125],
        "replicates": 4, "seed": 0, "figures": False,
    })
    out = tmp_path / "levy_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "levy_summary.json").read_text())
    assert {"fitted_c", "c_fixed_variation", "c_adapted_variation"} <= set(summary)


def test_toml_config_parses(tmp_path):
    cfg = _write(tmp_path, "ou.toml", {
        "command": "ou-longterm", "a": 1.0, "T_list": [4.0, 16.0],
        "p": 2.0, "replicates": 40, "seed": 3, "figures": False,
    })
    out = tmp_path / "ou_out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "ou_longterm.csv").exists()
