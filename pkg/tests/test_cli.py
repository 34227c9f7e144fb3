import json

import pandas as pd
import pytest
import yaml

from fbpopt.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from fbpopt.data.config import config_from_dict
from fbpopt.orchestrator import RunOrchestrator

from conftest import GENERIC_GAMMA_D, GENERIC_V

SMALL = {"n_interval": 4, "n_square": 8, "kappa": 1.0, "lambda": 0.1, "p": 4}


def _write_config(tmp_path, **entries):
    raw = dict(SMALL)
    raw["out_dir"] = str(tmp_path / "out")
    raw.update(entries)
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return path


def _report(tmp_path, name):
    return json.loads((tmp_path / "out" / name).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------

def test_solve_state_of_zero_data(tmp_path, capsys):
    path = _write_config(tmp_path)
    assert main(["solve-state", "-c", str(path)]) == EXIT_OK
    printed = capsys.readouterr().out.split()
    assert {p.rsplit("/", 1)[-1] for p in printed} == {"state.csv", "state_trace.csv", "state.json"}
    report = _report(tmp_path, "state.json")
    assert report["status"] == "PASS"
    assert report["config"]["lambda"] == 0.1
    assert report["result"]["trace"]["converged"]
    assert report["result"]["slope_max"] == 0.0
    table = pd.read_csv(tmp_path / "out" / "state.csv")
    assert set(table["field"]) == {"u", "gamma", "gamma_d", "y"}
    assert (table["value"] == 0.0).all()


def test_missing_config(tmp_path, capsys):
    assert main(["solve-state", "-c", str(tmp_path / "absent.yaml")]) == EXIT_CONFIG
    assert capsys.readouterr().err.startswith("error:")


def test_invalid_exponent(tmp_path, capsys):
    path = _write_config(tmp_path, p=2)
    assert main(["solve-state", "-c", str(path)]) == EXIT_CONFIG
    assert "p must be > 2" in capsys.readouterr().err


def test_failed_check(tmp_path):
    path = _write_config(
        tmp_path,
        v=GENERIC_V,
        gamma_d=GENERIC_GAMMA_D,
        u0="0.1*sin(pi*x1)",
        checks={"gradient_rtol": 1e-300},
    )
    assert main(["check-gradient", "-c", str(path)]) == EXIT_CHECK
    report = _report(tmp_path, "gradient_check.json")
    assert report["status"] == "FAIL"
    assert report["result"]["rel_error"] > 1e-300


def test_iteration_cap_is_solver_failure(tmp_path, capsys):
    path = _write_config(tmp_path, v=GENERIC_V, max_fp_iter=1)
    assert main(["solve-state", "-c", str(path)]) == EXIT_SOLVER
    assert capsys.readouterr().err.startswith("error:")


def test_out_dir_override(tmp_path):
    path = _write_config(tmp_path)
    target = tmp_path / "elsewhere"
    assert main(["solve-state", "-c", str(path), "-o", str(target)]) == EXIT_OK
    assert (target / "state.json").exists()
    assert not (tmp_path / "out").exists()


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def test_estimate_constants_reports_ledger(tmp_path):
    path = _write_config(tmp_path, v="0.001*x2*sin(pi*x1)", checks={"n_pairs": 2})
    assert main(["estimate-constants", "-c", str(path)]) == EXIT_OK
    report = _report(tmp_path, "constants.json")
    ledger = report["ledger"]
    assert ledger["theta3"] > 0.0
    assert ledger["uad_radius"] == pytest.approx(0.5 * ledger["u_radius"])
    assert report["constant_sources"]["C_A"] == "surrogate"
    assert report["constant_sources"]["beta"] == "estimated"
    assert set(report["result"]["lipschitz"]) == {"G", "Gprime", "Gsecond"}
    assert (tmp_path / "out" / "lipschitz.csv").exists()


def test_overrides_are_labelled(tmp_path):
    path = _write_config(tmp_path, constants={"alpha": 2.0, "C_E": 1.5})
    assert main(["solve-state", "-c", str(path)]) == EXIT_OK
    report = _report(tmp_path, "state.json")
    assert report["ledger"]["alpha"] == 2.0
    assert report["ledger"]["C_E"] == 1.5
    assert report["constant_sources"]["alpha"] == "override"
    assert report["constant_sources"]["C_E"] == "override"


def test_reruns_are_byte_identical(tmp_path):
    path = _write_config(tmp_path, v=GENERIC_V, gamma_d=GENERIC_GAMMA_D)
    out = tmp_path / "out"
    assert main(["solve-adjoint", "-c", str(path)]) == EXIT_OK
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(["solve-adjoint", "-c", str(path)]) == EXIT_OK
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second
    assert {"adjoint.csv", "adjoint_trace.csv", "adjoint.json"} <= set(first)


# ---------------------------------------------------------------------------
# Orchestrator
# ---------------------------------------------------------------------------

def test_radius_defaults_to_ledger(tmp_path):
    orchestrator = RunOrchestrator(config_from_dict({**SMALL, "out_dir": str(tmp_path)}))
    assert orchestrator.radius == orchestrator.ledger.uad_radius
    fixed = RunOrchestrator(config_from_dict({**SMALL, "out_dir": str(tmp_path), "radius": 0.25}))
    assert fixed.radius == 0.25


def test_unknown_command(tmp_path):
    orchestrator = RunOrchestrator(config_from_dict({**SMALL, "out_dir": str(tmp_path)}))
    with pytest.raises(ValueError, match="Unknown command"):
        orchestrator.run("solve-everything")


def test_optimize_writes_control(tmp_path):
    orchestrator = RunOrchestrator(
        config_from_dict({**SMALL, "out_dir": str(tmp_path), "gamma_d": "0.05*sin(pi*x1)", "radius": 1.0})
    )
    result = orchestrator.run("optimize")
    assert result.exit_code == 0
    names = {p.name for p in result.artifacts}
    assert names == {"control.csv", "opt_trace.csv", "optimize.json"}
    payload = result.summary["result"]
    assert payload["radius"] == 1.0
    assert payload["optimizer"].converged
