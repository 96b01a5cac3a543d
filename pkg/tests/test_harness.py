"""Experiment orchestration: config parsing, record layout, persistence.

The landscape checks compare against closed forms of the two-parameter
single-qubit circuit RZ(t2) RX(t1) with target V(0,0) = I:

    separable |0>|0>:        L(t1, t2) = sin^2(t1 / 2)
    maximally entangled:     L(t1, t2) = 1 - cos^2(t1 / 2) cos^2(t2 / 2)
"""

import math

import numpy as np
import pytest
from pytest import approx

from entloss.ansatz import AnsatzSpec, build_unitary, expressivity
from entloss.harness import (
    CSV_COLUMNS,
    BoundCheck,
    ExperimentConfig,
    RunRecord,
    config_from_json,
    config_to_json,
    emit,
    expressivity_records,
    landscape_grid,
    records_from_json_text,
    records_to_csv_text,
    records_to_json_text,
    run_experiment,
    verify_bounds_report,
)
from entloss.losses import sample_loss
from entloss.optimize import SweepCurve, SweepPoint
from entloss.samples import make_separable

SMALL_DISTANCE = {
    "experiment": "distance",
    "ansatz": [
        {"family": "no_entanglement", "layers": [1]},
        {"family": "cz_entanglement", "layers": [1]},
    ],
    "qubits": 2,
    "sample_kinds": ["separable", "max_entangled"],
    "radii": [0.4, 0.8],
    "repetitions": 2,
    "master_seed": 11,
}

SMALL_NME = {
    "experiment": "nme_sweep",
    "ansatz": [{"family": "cz_entanglement", "layers": [1]}],
    "qubits": 2,
    "nme_lambdas": [1.0],
    "radii": [0.5, 1.0],
    "repetitions": 2,
    "master_seed": 5,
}


@pytest.fixture(scope="module")
def distance_records():
    return run_experiment(config_from_json(SMALL_DISTANCE))


@pytest.fixture(scope="module")
def nme_records():
    return run_experiment(config_from_json(SMALL_NME))


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def test_config_minimal_defaults():
    cfg = config_from_json({"experiment": "distance"})
    assert cfg.experiment == "distance"
    assert cfg.qubits == 3
    assert cfg.repetitions == 24
    assert cfg.master_seed == 0
    assert cfg.sample_kinds == ("separable", "max_entangled")
    assert len(cfg.radii) == 16
    assert cfg.radii[0] == approx(0.25)
    assert cfg.radii[-1] == approx(4.0)
    families = [g.family for g in cfg.ansatz]
    assert families == [
        "no_entanglement",
        "cz_entanglement",
        "circular_entanglement",
        "crx_entanglement",
    ]
    assert all(g.layers == (1, 4, 8) for g in cfg.ansatz)
    assert cfg.threshold == approx(1e-3)
    assert cfg.format == "csv"


def test_config_rejects_unknown_fields():
    with pytest.raises(ValueError, match="bogus"):
        config_from_json({"experiment": "distance", "bogus": 1})


def test_config_rejects_bad_values():
    bad = [
        {},
        {"experiment": "teleport"},
        {"experiment": "distance", "repetitions": 0},
        {"experiment": "distance", "qubits": 0},
        {"experiment": "distance", "radii": []},
        {"experiment": "distance", "radii": [0.5, 0.5]},
        {"experiment": "distance", "radii": [-0.5, 0.5]},
        {"experiment": "distance", "ansatz": [{"family": "magic", "layers": [1]}]},
        {"experiment": "distance", "ansatz": [{"family": "cz_entanglement", "layers": [0]}]},
        {"experiment": "distance", "ansatz": [{"family": "cz_entanglement"}]},
        {"experiment": "distance", "sample_kinds": ["nme"]},
        {"experiment": "distance", "sample_kinds": []},
        {"experiment": "distance", "repetitions": True},
        {"experiment": "distance", "format": "xml"},
        {"experiment": "nme_sweep", "nme_lambdas": [1.5]},
        {"experiment": "nme_sweep", "nme_lambdas": []},
        {"experiment": "distance", "threshold": 0.0},
        {"experiment": "landscape", "resolution": 1},
        {"experiment": "expressivity", "n_samples": 10, "n_bins": 75},
        {"experiment": "verify_bounds", "dims": [1]},
        {"experiment": "verify_bounds", "trials": 0},
    ]
    for blob in bad:
        with pytest.raises(ValueError):
            config_from_json(blob)


def test_config_json_roundtrip():
    cfg = config_from_json(SMALL_DISTANCE)
    again = config_from_json(config_to_json(cfg))
    assert again == cfg
    assert isinstance(cfg, ExperimentConfig)


def test_config_paper_scale_defaults():
    cfg = config_from_json({"experiment": "distance", "paper_scale": True})
    assert cfg.qubits == 5
    assert all(g.layers == (1, 4, 8, 12, 16) for g in cfg.ansatz)
    # explicit values win over the scale flag
    cfg = config_from_json({"experiment": "distance", "paper_scale": True, "qubits": 4})
    assert cfg.qubits == 4


# ---------------------------------------------------------------------------
# run_experiment
# ---------------------------------------------------------------------------


def test_distance_experiment_cardinality(distance_records):
    # 2 families x 1 layer count x 2 reps -> 4 records per sample kind
    records = distance_records
    assert len(records) == 8
    per_kind = {}
    for r in records:
        per_kind[r.sample_kind] = per_kind.get(r.sample_kind, 0) + 1
    assert per_kind == {"separable": 4, "max_entangled": 4}
    assert [r.run_id for r in records] == list(range(8))
    for r in records:
        assert r.experiment == "distance"
        assert r.error is None
        assert len(r.curve.points) == 2
        assert [p.radius for p in r.curve.points] == approx([0.4, 0.8])


def test_distance_records_respect_sweep_semantics(distance_records):
    radii = [0.4, 0.8]
    for rec in distance_records:
        assert 0.0 <= rec.start_loss <= 1.0
        assert rec.start_loss == approx(rec.curve.start_loss)
        crossed = [p.radius for p in rec.curve.points if p.envelope_min_loss <= 1e-3]
        assert rec.distance_to_min == (crossed[0] if crossed else None)
        assert rec.improvement <= rec.start_loss + 1e-9
        assert max(p.radius for p in rec.curve.points) == approx(max(radii))


def _by_repetition(records):
    groups = {}
    for rec in records:
        groups.setdefault((rec.ansatz, rec.layers, rec.seed), []).append(rec)
    return groups


def test_improvement_is_taken_at_the_separable_radius(distance_records, nme_records):
    for records in (distance_records, nme_records):
        for group in _by_repetition(records).values():
            sep = [r for r in group if r.sample_kind == "separable"]
            assert len(sep) == 1
            r_max = sep[0].distance_to_min
            if r_max is None:
                r_max = max(p.radius for p in sep[0].curve.points)
            for rec in group:
                eligible = [p for p in rec.curve.points if p.radius <= r_max + 1e-12]
                expected = rec.start_loss - eligible[-1].envelope_min_loss
                assert rec.improvement == approx(expected, abs=1e-12)


def test_experiment_is_deterministic(distance_records):
    again = run_experiment(config_from_json(SMALL_DISTANCE))
    assert records_to_csv_text(again) == records_to_csv_text(distance_records)


def test_run_experiment_rejects_non_sweep_experiments():
    cfg = config_from_json({"experiment": "landscape"})
    with pytest.raises(ValueError, match="landscape"):
        run_experiment(cfg)


def test_nme_sweep_is_grouped_by_entropy(nme_records):
    # d = 4, lambda = 1.0: ranks 1..4 with entropies 0, ln2, ln3, ln4
    records = nme_records
    assert len(records) == 8
    assert [r.schmidt_rank for r in records] == [1, 1, 2, 2, 3, 3, 4, 4]
    labels = [r.sample_kind for r in records]
    assert labels[:2] == ["separable"] * 2
    assert labels[2:4] == ["nme_01"] * 2
    assert labels[4:6] == ["nme_02"] * 2
    assert labels[6:] == ["max_entangled"] * 2
    entropies = [r.entanglement_entropy for r in records]
    expected = [0.0, 0.0] + [math.log(k) for k in (2, 2, 3, 3, 4, 4)]
    assert entropies == approx(expected, abs=1e-12)
    assert entropies == sorted(entropies)
    assert [r.run_id for r in records] == list(range(8))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _synthetic_record(run_id=0, distance=None, error=None):
    theta = np.array([0.1, 0.2])
    points = (
        SweepPoint(0.5, 0.4, 0.4, theta, 31),
        SweepPoint(1.0, 0.1234567890123456, 0.1234567890123456, theta, 47),
    )
    curve = SweepCurve(start_loss=0.75, points=points)
    if error is not None:
        return RunRecord(
            run_id=run_id,
            experiment="distance",
            ansatz="cz_entanglement",
            layers=1,
            qubits=2,
            sample_kind="separable",
            schmidt_rank=1,
            entanglement_entropy=0.0,
            seed=7,
            start_loss=None,
            curve=None,
            distance_to_min=None,
            improvement=None,
            error=error,
        )
    return RunRecord(
        run_id=run_id,
        experiment="distance",
        ansatz="cz_entanglement",
        layers=1,
        qubits=2,
        sample_kind="separable",
        schmidt_rank=1,
        entanglement_entropy=0.0,
        seed=7,
        start_loss=0.75,
        curve=curve,
        distance_to_min=distance,
        improvement=0.35,
    )


def test_csv_layout_and_float_rendering():
    text = records_to_csv_text([_synthetic_record(distance=None)])
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "0"
    assert first[1] == "distance"
    assert first[2] == "cz_entanglement"
    assert first[3] == "1"
    assert first[4] == "2"
    assert first[5] == "separable"
    assert first[6] == "1"
    assert first[7] == "0"
    assert first[8] == "7"
    assert first[9] == "0.5"
    assert first[13] == ""  # no crossing radius
    second = lines[2].split(",")
    assert second[0] == "0"
    assert second[10] == "0.123456789012"  # 12 significant digits
    assert second[12] == "0.75"


def test_csv_empty_records_is_header_only():
    assert records_to_csv_text([]) == ",".join(CSV_COLUMNS) + "\n"


def test_csv_rows_share_run_id_per_sweep(distance_records):
    lines = records_to_csv_text(distance_records).strip().split("\n")[1:]
    assert len(lines) == sum(len(r.curve.points) for r in distance_records)
    by_run = {}
    for line in lines:
        run_id = line.split(",")[0]
        by_run[run_id] = by_run.get(run_id, 0) + 1
    assert all(n == 2 for n in by_run.values())


def test_csv_skips_failed_records():
    good = _synthetic_record(run_id=0)
    bad = _synthetic_record(run_id=1, error="solver exploded")
    lines = records_to_csv_text([good, bad]).strip().split("\n")
    assert len(lines) == 3  # header + the two good rows


def test_json_roundtrip_is_field_exact(distance_records):
    text = records_to_json_text(distance_records)
    parsed = records_from_json_text(text)
    assert len(parsed) == len(distance_records)
    for a, b in zip(parsed, distance_records):
        assert a.run_id == b.run_id
        assert a.experiment == b.experiment
        assert a.ansatz == b.ansatz
        assert a.layers == b.layers
        assert a.qubits == b.qubits
        assert a.sample_kind == b.sample_kind
        assert a.schmidt_rank == b.schmidt_rank
        assert a.entanglement_entropy == b.entanglement_entropy
        assert a.seed == b.seed
        assert a.start_loss == b.start_loss
        assert a.distance_to_min == b.distance_to_min
        assert a.improvement == b.improvement
        assert a.error is None and b.error is None
        assert a.curve.start_loss == b.curve.start_loss
        for p, q in zip(a.curve.points, b.curve.points):
            assert p.radius == q.radius
            assert p.raw_min_loss == q.raw_min_loss
            assert p.envelope_min_loss == q.envelope_min_loss
            assert p.evaluations == q.evaluations
            assert np.array_equal(p.best_theta, q.best_theta)


def test_json_keeps_failed_records():
    bad = _synthetic_record(run_id=3, error="solver exploded")
    parsed = records_from_json_text(records_to_json_text([bad]))
    assert len(parsed) == 1
    assert parsed[0].error == "solver exploded"
    assert parsed[0].curve is None
    assert parsed[0].start_loss is None


def test_record_validation():
    import dataclasses

    good = _synthetic_record()
    with pytest.raises(ValueError):
        dataclasses.replace(good, start_loss=1.5)
    with pytest.raises(ValueError):
        dataclasses.replace(good, improvement=good.start_loss + 1e-6)
    with pytest.raises(ValueError):
        dataclasses.replace(good, curve=None)


def test_emit_writes_csv_and_json(tmp_path, distance_records):
    csv_path = emit(distance_records, "csv", tmp_path / "out.csv")
    assert csv_path.read_text() == records_to_csv_text(distance_records)
    json_path = emit(distance_records, "json", tmp_path / "out.json")
    parsed = records_from_json_text(json_path.read_text())
    assert [r.run_id for r in parsed] == [r.run_id for r in distance_records]
    with pytest.raises(ValueError):
        emit(distance_records, "xml", tmp_path / "out.xml")


# ---------------------------------------------------------------------------
# Landscape grids
# ---------------------------------------------------------------------------


def test_landscape_separable_matches_closed_form():
    res = 21
    grid = landscape_grid(res, "separable")
    t = np.linspace(0.0, 2.0 * np.pi, res, endpoint=False)
    expected = np.broadcast_to(np.sin(t / 2.0) ** 2, (res, res)).T
    assert grid.shape == (res, res)
    assert grid == approx(expected, abs=1e-12)
    assert grid[0, 0] == approx(0.0, abs=1e-15)


def test_landscape_maxent_matches_trace_closed_form():
    res = 21
    grid = landscape_grid(res, "max_entangled")
    t = np.linspace(0.0, 2.0 * np.pi, res, endpoint=False)
    expected = 1.0 - np.outer(np.cos(t / 2.0) ** 2, np.cos(t / 2.0) ** 2)
    assert grid == approx(expected, abs=1e-12)
    assert grid[0, 0] == approx(0.0, abs=1e-15)


def test_landscape_wraps_around_at_two_pi():
    res = 9
    grid = landscape_grid(res, "separable")
    t = np.linspace(0.0, 2.0 * np.pi, res, endpoint=False)
    spec = AnsatzSpec("no_entanglement", 1, 1)
    u = np.eye(2, dtype=complex)
    psi = make_separable(
        2, factor_x=np.array([1.0, 0.0]), factor_r=np.array([1.0, 0.0])
    )
    for i, j in [(0, 0), (3, 5), (8, 2)]:
        v = build_unitary(spec, np.array([t[i] + 2.0 * np.pi, t[j] + 2.0 * np.pi]))
        assert sample_loss(u, v, psi).loss == approx(grid[i, j], abs=1e-10)


def test_landscape_validation():
    with pytest.raises(ValueError):
        landscape_grid(1, "separable")
    with pytest.raises(ValueError):
        landscape_grid(11, "nme")


# ---------------------------------------------------------------------------
# Analytical verification and expressivity reports
# ---------------------------------------------------------------------------


def test_verify_bounds_report_checks_pass():
    report = verify_bounds_report(dims=(2, 4), trials=20, master_seed=3)
    names = {c.name for c in report}
    assert names == {
        "separable_tightness",
        "entangled_lower_bound",
        "maxent_trace_identity",
    }
    assert len(report) == 6
    for check in report:
        assert isinstance(check, BoundCheck)
        assert check.trials == 20
        assert check.dim in (2, 4)
        assert check.passed
        assert check.max_error <= check.tolerance


def test_verify_bounds_report_is_deterministic():
    a = verify_bounds_report(dims=(2,), trials=10, master_seed=9)
    b = verify_bounds_report(dims=(2,), trials=10, master_seed=9)
    assert a == b


def test_expressivity_records_match_recorded_seed():
    cfg = config_from_json(
        {
            "experiment": "expressivity",
            "ansatz": [{"family": "no_entanglement", "layers": [1]}],
            "qubits": 2,
            "n_samples": 150,
            "n_bins": 15,
            "master_seed": 2,
        }
    )
    records = expressivity_records(cfg)
    assert len(records) == 1
    rec = records[0]
    assert rec.family == "no_entanglement"
    assert rec.layers == 1
    assert rec.expressivity >= 0.0
    direct = expressivity(
        AnsatzSpec("no_entanglement", 2, 1),
        n_samples=150,
        n_bins=15,
        rng=np.random.default_rng(rec.seed),
    )
    assert rec.expressivity == approx(direct.expressivity, abs=0.0)
    assert expressivity_records(cfg) == records
