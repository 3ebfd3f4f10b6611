"""Experiment driver tests: config, serialization, metrics files, end to end.

The end-to-end case runs a deliberately tiny sweep (one band limit, order-2
model) so the whole generate/reconstruct/report/verify chain stays in the
seconds range.
"""

import json
import math

import pytest

from fourier_edge import Background2D, Curve, Model2D, TrigBackground
from fourier_edge.cli import (
    ExperimentConfig,
    METRICS_HEADER,
    MetricsRow,
    _append_metrics,
    _build_parser,
    compute_metrics,
    fit_loglog,
    load_config,
    main,
    metrics_columns,
    model_from_json,
    model_to_json,
    read_metrics,
)
from fourier_edge.model2d import CoeffGrid2D


# -- config ------------------------------------------------------------------

def test_config_defaults():
    cfg = ExperimentConfig()
    assert cfg.d == 9 and cfg.d_psi == 9
    assert cfg.sweep_N == (8, 12, 16, 24, 32)
    assert cfg.M_for(12) == 144
    assert cfg.degenerate_sweep_entries() == [8]


def test_config_override_M():
    cfg = ExperimentConfig(override_M=200)
    assert cfg.M_for(12) == 200


@pytest.mark.parametrize(
    "kwargs",
    [
        {"y_count": 4},
        {"precision_digits": 10},
        {"exclusion_radius": 3.5},
        {"exclusion_radius": -0.1},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config keys"):
        ExperimentConfig.from_json({"d": 5, "bogus_knob": 1})


def test_config_json_round_trip():
    cfg = ExperimentConfig(d=5, sweep_N=(7, 9), x_points=(0.25,))
    again = ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json())))
    assert again == cfg


# -- model serialization -----------------------------------------------------

def test_canonical_model_round_trip():
    m = Model2D.canonical(11)
    again = model_from_json(json.loads(json.dumps(model_to_json(m))))
    assert again == m


def test_custom_model_round_trip():
    m = Model2D(
        2,
        (1.0, TrigBackground((0.5, 0.25j)), 0.75),
        Curve("trig", (0.2, 0.15 + 0.1j)),
        Background2D(
            ((TrigBackground((0.1, 0.2j)), TrigBackground((0.3, -0.1))),)
        ),
    )
    again = model_from_json(json.loads(json.dumps(model_to_json(m))))
    assert again == m


# -- metrics files -----------------------------------------------------------

def _row(n, d, base=1e-3):
    deltas = tuple(base * (l + 1) for l in range(d + 1))
    return MetricsRow(n, n * n, base / 7, deltas, base / 3, base * 2, 0.5)


def test_metrics_row_matches_columns():
    cols = metrics_columns(4).split(",")
    assert cols[2] == "delta_xi" and cols[-1] == "seconds"
    assert len(_row(8, 4).csv().split(",")) == len(cols)


def test_metrics_append_and_read_round_trip(tmp_path):
    path = tmp_path / "metrics.csv"
    cfg = ExperimentConfig(d=4)
    _append_metrics(path, cfg, [_row(8, 4)], notes=("first pass",))
    _append_metrics(path, cfg, [_row(16, 4), _row(24, 4)])
    text = path.read_text()
    assert text.count(METRICS_HEADER) == 1
    assert "# first pass" in text
    columns, rows = read_metrics(path)
    assert columns == metrics_columns(4).split(",")
    assert [r["N"] for r in rows] == [8, 16, 24]
    # repr round trip keeps every float bit-exact
    assert rows[1]["delta_A_3"] == 4e-3
    assert rows[2]["delta_T"] == 2e-3


def test_read_metrics_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("N,M\n1,2\n")
    with pytest.raises(ValueError, match="bad header"):
        read_metrics(path)


def test_degenerate_entry_yields_nan_row():
    cfg = ExperimentConfig(d=9)
    grid = CoeffGrid2D(4, 2, tuple(tuple(0 for _ in range(5)) for _ in range(9)))
    row = compute_metrics(Model2D.canonical(2), grid, cfg, 8)
    assert row.N == 8 and row.M == 4
    assert math.isnan(row.delta_xi) and math.isnan(row.delta_F)
    assert len(row.delta_A) == 10 and all(math.isnan(a) for a in row.delta_A)


# -- slope fitting -----------------------------------------------------------

def test_fit_loglog_recovers_pure_power_law():
    pts = [(n, 2.0 * n ** -3.0) for n in (4, 8, 16, 32)]
    slope, intercept, n = fit_loglog(pts)
    assert n == 4
    assert slope == pytest.approx(-3.0, rel=1e-9)
    assert intercept == pytest.approx(math.log(2.0), abs=1e-9)


def test_fit_loglog_refuses_sparse_data():
    with pytest.raises(ValueError, match="refusing slope fit"):
        fit_loglog([(8, 1e-3), (16, float("nan")), (32, 0.0)])


# -- flag handling -----------------------------------------------------------

def test_cli_flags_override_config(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"d": 5, "precision_digits": 40}))
    args = _build_parser().parse_args(
        [
            "--config", str(cfg_path),
            "--precision", "25",
            "--out", str(tmp_path / "elsewhere"),
            "--override-M", "30",
            "--jobs", "2",
            "report",
        ]
    )
    cfg = load_config(args)
    assert cfg.d == 5
    assert cfg.precision_digits == 25
    assert cfg.out_dir == str(tmp_path / "elsewhere")
    assert cfg.override_M == 30 and cfg.M_for(12) == 30
    assert cfg.jobs == 2


# -- end to end --------------------------------------------------------------

@pytest.fixture()
def tiny_config(tmp_path):
    cfg = {
        "model": {"kind": "canonical", "d_model": 2},
        "d_psi": 2,
        "d": 2,
        "sweep_N": [5],
        "x_points": [0.9],
        "y_count": 32,
        "precision_digits": 30,
        "out_dir": str(tmp_path / "out"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path, tmp_path / "out"


def test_full_pipeline_round_trip(tiny_config, tmp_path):
    cfg_path, out = tiny_config
    base = ["--config", str(cfg_path)]

    assert main(base + ["generate"]) == 0
    assert (out / "model2d.json").exists()
    assert (out / "grid_N5.fec").exists()

    assert main(base + ["reconstruct"]) == 0
    per_n = json.loads((out / "metrics_N5.json").read_text())
    # order matches the model exactly, so the only error left is roundoff
    assert per_n["delta_xi"] < 1e-8
    assert per_n["delta_F"] < 1e-8
    assert per_n["delta_T"] > 1e-3  # raw truncation is the honest baseline

    assert main(base + ["report"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["d"] == 2
    # a single sweep point cannot support a slope fit
    assert report["fits"] == {}
    assert all("refusing" in why for why in report["refused"].values())
    tidy = (out / "report_tidy.csv").read_text().splitlines()
    assert tidy[0] == "N,metric,value,ref_full_order,ref_localization"
    assert len(tidy) == 1 + 6  # delta_xi, 3 magnitudes, delta_F, delta_T

    assert main(base + ["verify", "--entries", "2"]) == 0


def test_generate_is_deterministic(tiny_config, tmp_path):
    cfg_path, out = tiny_config
    other = tmp_path / "out2"
    assert main(["--config", str(cfg_path), "generate"]) == 0
    assert main(["--config", str(cfg_path), "--out", str(other), "generate"]) == 0
    assert (out / "grid_N5.fec").read_bytes() == (other / "grid_N5.fec").read_bytes()
