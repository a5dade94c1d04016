import json
import math

import pytest

import sgf

TINY = {
    "grid.n": "33",
    "grid.stokes_modes": "16",
    "galerkin.N": "8",
    "additive.N": "8",
    "galerkin.T": "0.02",
    "galerkin.save_stride": "5",
    "noise.K": "2",
}


def test_version():
    assert sgf.code_version().startswith("sgf ")
    assert sgf.__version__ == "0.1.0"


def test_default_config_round_trips_through_run():
    ini = sgf.default_config()
    assert "[galerkin]" in ini
    r = sgf.run_experiment("simulate", ini, TINY)
    assert r["name"] == "simulate"
    assert r["checks"]["no_blow_up"]["pass"]


def test_simulate_table_shapes():
    r = sgf.run_experiment("simulate", overrides=TINY)
    path = r["tables"]["path"]
    assert path["t"] == pytest.approx([0.0, 0.005, 0.01, 0.015, 0.02])
    assert all(v >= 0 for v in path["normV2"])
    assert json.loads(r["report_json"])["experiment"] == "simulate"
    assert json.loads(r["manifest_json"])["experiment"] == "simulate"


def test_runs_are_deterministic():
    a = sgf.run_experiment("simulate", overrides=TINY)
    b = sgf.run_experiment("simulate", overrides=TINY)
    assert a["tables"] == b["tables"]


def test_stokes_eigenvalues_ascending_and_near_continuum():
    ev = sgf.stokes_eigenvalues(33, 4)
    assert ev == sorted(ev)
    # Lowest clamped-square Stokes eigenvalue is about 52.3.
    assert math.isclose(ev[0], 52.3, rel_tol=0.05)


def test_bad_input_raises():
    with pytest.raises(ValueError):
        sgf.run_experiment("bogus", overrides=TINY)
    with pytest.raises(ValueError):
        sgf.run_experiment("simulate", overrides={"grid.nn": "3"})
