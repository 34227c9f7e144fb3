import json

import numpy as np
import pytest

from fbpopt.fem.fields import BoundaryCondition, BulkField, ControlProfile
from fbpopt.fem.mesh import IntervalMesh, SquareMesh
from fbpopt.output import (
    CheckStatus,
    ContractionReport,
    GrowthReport,
    OptResult,
    SOCReport,
    field_frame,
    format_report,
    format_table,
)
from fbpopt.utils.parallel import THREADS_ENV, parallel_map, worker_count


def test_report_converts_numpy_and_enums(tmp_path):
    payload = {"x": np.float64(0.5), "n": np.int64(3), "v": np.arange(2), "status": CheckStatus.PASS}
    path = tmp_path / "nested" / "report.json"
    text = format_report(payload, path)
    assert json.loads(text) == {"x": 0.5, "n": 3, "v": [0, 1], "status": "PASS"}
    assert path.read_text(encoding="utf-8") == text


def test_report_is_deterministic():
    payload = {"b": 1.0 / 3.0, "a": [1, 2]}
    assert format_report(payload) == format_report(dict(payload))


def test_report_rejects_unknown_objects():
    with pytest.raises(TypeError):
        format_report({"x": object()})


def test_table_uses_full_precision(tmp_path):
    path = tmp_path / "t.csv"
    text = format_table([{"eps": 0.1, "ok": True}], path)
    assert text == "eps,ok\n0.10000000000000001,True\n"
    assert path.read_text(encoding="utf-8") == text


def test_field_frame_places_curves_on_gamma():
    interval, square = IntervalMesh(2), SquareMesh(2)
    frame = field_frame({
        "u": ControlProfile(interval, np.array([1.0, 2.0, 3.0])),
        "y": BulkField.zeros(square, BoundaryCondition.ZERO_ON_BOUNDARY),
    })
    assert list(frame.columns) == ["field", "node", "x1", "x2", "value"]
    assert len(frame) == 3 + 9
    curve = frame[frame["field"] == "u"]
    assert (curve["x2"] == 1.0).all()
    np.testing.assert_allclose(curve["x1"], [0.0, 0.5, 1.0])


def test_opt_result_rows():
    result = OptResult(control=None, costs=[2.0, 1.0], grad_norms=[1.0, 0.5], vi_residuals=[1.0, 0.1], step_sizes=[0.5])
    rows = result.trace_rows()
    assert [r["step"] for r in rows] == [0.0, 0.5]
    assert result.iterations == 1
    assert result.to_dict()["cost"] == 1.0


def test_check_report_status():
    soc = SOCReport(ratios=[0.2, 0.3], threshold=0.05, at_boundary=False, n_rejected=0, v_norm=0.0, v_soc_bound=None)
    assert soc.to_dict()["status"] == "PASS"
    assert not SOCReport([], 0.05, False, 0, 0.0, None).passed
    contraction = ContractionReport(ratios=[0.1], bound=0.5, n_outside=1)
    assert contraction.contraction_ok and not contraction.passed
    growth = GrowthReport(
        rows=[
            {"scale": 0.1, "h_norm": 0.1, "cost_margin": -1.0, "gradient_margin": 1.0},
            {"scale": 0.05, "h_norm": 0.05, "cost_margin": 1.0, "gradient_margin": 1.0},
        ],
        stationary=True,
        n_directions=1,
    )
    assert growth.largest_radius == 0.05
    assert not growth.passed


def test_parallel_map_preserves_order(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert worker_count() == 3
    assert parallel_map(lambda x: x * x, range(6)) == [0, 1, 4, 9, 16, 25]


def test_worker_count_ignores_garbage(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    assert worker_count() == 1
    monkeypatch.delenv(THREADS_ENV)
    assert worker_count() == 1
