"""Experiment orchestration: seeded sweep campaigns, landscape grids,
analytical verification, and CSV/JSON persistence.

Every campaign is a pure function of its ExperimentConfig. Repetition seeds
are spawned from the master seed per (family, layer count, repetition) and
recorded on each run, so a campaign can be re-run, resumed, or sharded
without changing a single number.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .ansatz import (
    FAMILIES,
    FAMILY_NO_ENTANGLEMENT,
    AnsatzSpec,
    SampleLossObjective,
    build_unitary,
    expressivity,
    param_count,
)
from .bounds import (
    construct_min_distance_operator,
    min_distance_entangled_lb,
    min_distance_separable,
)
from .losses import frobenius_phase_distance, maxent_loss_from_trace, sample_loss
from .optimize import (
    OptimizerSettings,
    SweepCurve,
    SweepPoint,
    distance_to_minimum,
    improvement_from_curve,
    radius_sweep,
)
from .samples import (
    KIND_MAX_ENTANGLED,
    KIND_NME,
    KIND_SEPARABLE,
    entanglement_entropy,
    make_max_entangled,
    make_nme,
    make_separable,
    nme_coefficient_families,
    schmidt_rank,
)
from .states import haar_random_unitary

EXPERIMENTS = (
    "verify_bounds",
    "landscape",
    "distance",
    "improvement",
    "nme_sweep",
    "expressivity",
)
SWEEP_EXPERIMENTS = ("distance", "improvement", "nme_sweep")
LANDSCAPE_KINDS = (KIND_SEPARABLE, KIND_MAX_ENTANGLED)

DESK_QUBITS = 3
DESK_LAYERS = (1, 4, 8)
PAPER_QUBITS = 5
PAPER_LAYERS = (1, 4, 8, 12, 16)

CSV_COLUMNS = (
    "run_id",
    "experiment",
    "ansatz",
    "layers",
    "qubits",
    "sample_kind",
    "schmidt_rank",
    "entanglement_entropy",
    "seed",
    "radius",
    "raw_min_loss",
    "envelope_min_loss",
    "start_loss",
    "distance_to_min",
    "improvement",
)

_SWEEP_SETTINGS = OptimizerSettings()


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def _int_field(name: str, value, minimum: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def _float_field(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{name} must be a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class AnsatzGroup:
    """One circuit family swept over a list of layer counts."""

    family: str
    layers: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown ansatz family {self.family!r}")
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("layers list is empty")
        for value in self.layers:
            _int_field("layers", value, 1)


_DEFAULT_ANSATZ = tuple(AnsatzGroup(f, DESK_LAYERS) for f in FAMILIES)
_DEFAULT_RADII = tuple(float(r) for r in np.linspace(0.25, 4.0, 16))


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment run.

    Direct construction uses desk-scale defaults; config_from_json applies
    the paper_scale flag to the qubit and layer defaults before building.
    """

    experiment: str
    ansatz: tuple[AnsatzGroup, ...] = _DEFAULT_ANSATZ
    qubits: int = DESK_QUBITS
    sample_kinds: tuple[str, ...] = (KIND_SEPARABLE, KIND_MAX_ENTANGLED)
    nme_lambdas: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    radii: tuple[float, ...] = _DEFAULT_RADII
    repetitions: int = 24
    master_seed: int = 0
    threshold: float = 1e-3
    resolution: int = 101
    n_samples: int = 5000
    n_bins: int = 75
    dims: tuple[int, ...] = (2, 4, 8)
    trials: int = 100
    paper_scale: bool = False
    output: str | None = None
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}"
            )
        object.__setattr__(self, "ansatz", tuple(self.ansatz))
        if not self.ansatz:
            raise ValueError("ansatz list is empty")
        _int_field("qubits", self.qubits, 1)
        _int_field("repetitions", self.repetitions, 1)
        _int_field("master_seed", self.master_seed, 0)
        _int_field("resolution", self.resolution, 2)
        _int_field("n_bins", self.n_bins, 2)
        _int_field("n_samples", self.n_samples, self.n_bins)
        _int_field("trials", self.trials, 1)

        object.__setattr__(
            self, "sample_kinds", tuple(str(k) for k in self.sample_kinds)
        )
        if not self.sample_kinds:
            raise ValueError("sample_kinds is empty")
        for kind in self.sample_kinds:
            if kind not in (KIND_SEPARABLE, KIND_MAX_ENTANGLED):
                raise ValueError(
                    f"sample_kinds entries must be {KIND_SEPARABLE!r} or "
                    f"{KIND_MAX_ENTANGLED!r}, got {kind!r}"
                )

        lambdas = tuple(_float_field("nme_lambdas", x) for x in self.nme_lambdas)
        object.__setattr__(self, "nme_lambdas", lambdas)
        if not lambdas:
            raise ValueError("nme_lambdas is empty")
        for lam in lambdas:
            if not 0.0 <= lam <= 1.0:
                raise ValueError(f"nme_lambdas entries must lie in [0, 1], got {lam}")

        radii = tuple(_float_field("radii", r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if self.experiment in SWEEP_EXPERIMENTS:
            if not radii:
                raise ValueError("radii must be nonempty for sweep experiments")
            if any(r <= 0.0 for r in radii):
                raise ValueError("radii must be positive")
            if any(b <= a for a, b in zip(radii, radii[1:])):
                raise ValueError("radii must be strictly increasing")

        threshold = _float_field("threshold", self.threshold)
        object.__setattr__(self, "threshold", threshold)
        if threshold <= 0.0:
            raise ValueError(f"threshold must be positive, got {threshold}")

        dims = tuple(self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ValueError("dims is empty")
        for d in dims:
            _int_field("dims", d, 2)

        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if self.output is not None and not isinstance(self.output, str):
            raise ValueError("output must be a path string or null")


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def config_from_json(blob: dict) -> ExperimentConfig:
    """Build a config from a parsed JSON object, rejecting unknown fields."""
    if not isinstance(blob, dict):
        raise ValueError("config must be a JSON object")
    unknown = sorted(set(blob) - _CONFIG_FIELDS)
    if unknown:
        raise ValueError(f"unknown config fields: {unknown}")
    if "experiment" not in blob:
        raise ValueError("config is missing the experiment field")

    kwargs: dict = {"experiment": blob["experiment"]}
    paper = blob.get("paper_scale", False)
    if not isinstance(paper, bool):
        raise ValueError("paper_scale must be a boolean")
    kwargs["paper_scale"] = paper

    if "ansatz" in blob:
        entries = blob["ansatz"]
        if not isinstance(entries, list):
            raise ValueError("ansatz must be a list of {family, layers} objects")
        groups = []
        for entry in entries:
            if not isinstance(entry, dict) or set(entry) != {"family", "layers"}:
                raise ValueError(
                    "each ansatz entry needs exactly the fields family and layers"
                )
            layers = entry["layers"]
            if not isinstance(layers, list):
                raise ValueError("ansatz layers must be a list of integers")
            groups.append(AnsatzGroup(entry["family"], tuple(layers)))
        kwargs["ansatz"] = tuple(groups)
    elif paper:
        kwargs["ansatz"] = tuple(AnsatzGroup(f, PAPER_LAYERS) for f in FAMILIES)

    if "qubits" in blob:
        kwargs["qubits"] = blob["qubits"]
    elif paper:
        kwargs["qubits"] = PAPER_QUBITS

    for name in (
        "sample_kinds",
        "nme_lambdas",
        "radii",
        "dims",
    ):
        if name in blob:
            if not isinstance(blob[name], list):
                raise ValueError(f"{name} must be a list")
            kwargs[name] = tuple(blob[name])
    for name in (
        "repetitions",
        "master_seed",
        "threshold",
        "resolution",
        "n_samples",
        "n_bins",
        "trials",
        "output",
        "format",
    ):
        if name in blob:
            kwargs[name] = blob[name]
    return ExperimentConfig(**kwargs)


def config_to_json(config: ExperimentConfig) -> dict:
    """Canonical JSON form; config_from_json(config_to_json(c)) == c."""
    return {
        "experiment": config.experiment,
        "ansatz": [
            {"family": g.family, "layers": list(g.layers)} for g in config.ansatz
        ],
        "qubits": config.qubits,
        "sample_kinds": list(config.sample_kinds),
        "nme_lambdas": list(config.nme_lambdas),
        "radii": list(config.radii),
        "repetitions": config.repetitions,
        "master_seed": config.master_seed,
        "threshold": config.threshold,
        "resolution": config.resolution,
        "n_samples": config.n_samples,
        "n_bins": config.n_bins,
        "dims": list(config.dims),
        "trials": config.trials,
        "paper_scale": config.paper_scale,
        "output": config.output,
        "format": config.format,
    }


def config_from_file(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        blob = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_json(blob)


# ---------------------------------------------------------------------------
# Run records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    """One radius sweep of one training sample against one target.

    For failed runs, error carries the message and the numeric fields and
    curve are None; successful records always carry their full curve.
    """

    run_id: int
    experiment: str
    ansatz: str
    layers: int
    qubits: int
    sample_kind: str
    schmidt_rank: int
    entanglement_entropy: float
    seed: int
    start_loss: float | None
    curve: SweepCurve | None
    distance_to_min: float | None
    improvement: float | None
    error: str | None = None

    def __post_init__(self) -> None:
        if self.error is not None:
            return
        if self.curve is None:
            raise ValueError("a successful record must carry its sweep curve")
        if self.start_loss is None or not 0.0 <= self.start_loss <= 1.0 + 1e-9:
            raise ValueError(f"start_loss {self.start_loss} outside [0, 1]")
        if self.improvement is None or self.improvement > self.start_loss + 1e-9:
            raise ValueError(
                f"improvement {self.improvement} exceeds start_loss {self.start_loss}"
            )


def _spawn_seed(*path: int) -> int:
    return int(np.random.SeedSequence(list(path)).generate_state(1, np.uint64)[0])


def _sweep_samples(config: ExperimentConfig, d: int, rng: np.random.Generator):
    """(label, sample) pairs in sweep order for one repetition.

    nme_sweep runs the full coefficient-family grid ordered by entanglement
    entropy; the rank-1 member doubles as the separable reference for R_max.
    """
    if config.experiment == "nme_sweep":
        states = [
            make_nme(c, d) for c in nme_coefficient_families(d, config.nme_lambdas)
        ]
        order = sorted(
            range(len(states)), key=lambda i: (entanglement_entropy(states[i]), i)
        )
        out = []
        for pos, i in enumerate(order):
            s = states[i]
            label = s.kind if s.kind != KIND_NME else f"nme_{pos:02d}"
            out.append((label, s))
        return out
    out = []
    for kind in config.sample_kinds:
        if kind == KIND_SEPARABLE:
            out.append((kind, make_separable(d, rng)))
        else:
            out.append((kind, make_max_entangled(d)))
    return out


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    """Run a sweep experiment; one record per (family, layers, rep, sample).

    Per repetition the target is the circuit at a uniform random parameter
    point and the sweep center is a second uniform draw. The improvement
    column is taken at R_max, the smallest radius where that repetition's
    separable envelope reaches the threshold (largest swept radius if it
    never does). Output is ordered by run id; nme_sweep records are grouped
    by entanglement entropy ascending.
    """
    if config.experiment not in SWEEP_EXPERIMENTS:
        raise ValueError(
            f"run_experiment handles {SWEEP_EXPERIMENTS}; "
            f"{config.experiment} has a dedicated entry point"
        )
    rows: list[tuple[tuple, dict]] = []
    for fam_idx, group in enumerate(config.ansatz):
        for layer_idx, layers in enumerate(group.layers):
            spec = AnsatzSpec(group.family, config.qubits, layers)
            p = param_count(spec)
            for rep in range(config.repetitions):
                rep_seed = _spawn_seed(config.master_seed, fam_idx, layer_idx, rep)
                rng = np.random.default_rng(rep_seed)
                theta_target = rng.uniform(0.0, 2.0 * np.pi, p)
                theta0 = rng.uniform(0.0, 2.0 * np.pi, p)
                u = build_unitary(spec, theta_target)
                samples = _sweep_samples(config, spec.dim, rng)

                swept = []
                for kind_idx, (label, sample) in enumerate(samples):
                    try:
                        objective = SampleLossObjective(u, spec, sample)
                        settings = dataclasses.replace(
                            _SWEEP_SETTINGS,
                            master_seed=_spawn_seed(rep_seed, kind_idx),
                        )
                        curve = radius_sweep(
                            objective,
                            theta0,
                            config.radii,
                            settings,
                            jac=objective.gradient,
                        )
                        swept.append((kind_idx, label, sample, curve, None))
                    except Exception as exc:
                        swept.append((kind_idx, label, sample, None, str(exc)))

                r_max = max(config.radii)
                for _, label, _, curve, err in swept:
                    if label == KIND_SEPARABLE and err is None:
                        hit = distance_to_minimum(curve, config.threshold)
                        if hit is not None:
                            r_max = hit
                        break

                for kind_idx, label, sample, curve, err in swept:
                    if err is None:
                        dist = distance_to_minimum(curve, config.threshold)
                        imp = improvement_from_curve(curve, curve.start_loss, r_max)
                        start = curve.start_loss
                    else:
                        dist, imp, start = None, None, None
                    if config.experiment == "nme_sweep":
                        key = (fam_idx, layer_idx, kind_idx, rep)
                    else:
                        key = (fam_idx, layer_idx, rep, kind_idx)
                    rows.append(
                        (
                            key,
                            dict(
                                experiment=config.experiment,
                                ansatz=group.family,
                                layers=layers,
                                qubits=config.qubits,
                                sample_kind=label,
                                schmidt_rank=schmidt_rank(sample),
                                entanglement_entropy=entanglement_entropy(sample),
                                seed=rep_seed,
                                start_loss=start,
                                curve=curve,
                                distance_to_min=dist,
                                improvement=imp,
                                error=err,
                            ),
                        )
                    )
    rows.sort(key=lambda item: item[0])
    return [RunRecord(run_id=i, **fields) for i, (_, fields) in enumerate(rows)]


# ---------------------------------------------------------------------------
# Landscape grids
# ---------------------------------------------------------------------------


def landscape_grid(resolution: int, sample_kind: str) -> np.ndarray:
    """Losses of the two-parameter single-qubit circuit RZ(t2) RX(t1) against
    the target V(0, 0) = I on a uniform grid over [0, 2pi)^2.

    grid[i, j] is the loss at (t1_i, t2_j); the separable sample is |0>|0>.
    """
    _int_field("resolution", resolution, 2)
    if sample_kind not in LANDSCAPE_KINDS:
        raise ValueError(f"sample_kind must be one of {LANDSCAPE_KINDS}")
    spec = AnsatzSpec(FAMILY_NO_ENTANGLEMENT, 1, 1)
    u = np.eye(2, dtype=complex)
    if sample_kind == KIND_SEPARABLE:
        sample = make_separable(
            2, factor_x=np.array([1.0, 0.0]), factor_r=np.array([1.0, 0.0])
        )
    else:
        sample = make_max_entangled(2)
    objective = SampleLossObjective(u, spec, sample)
    thetas = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
    grid = np.empty((resolution, resolution))
    for i, t1 in enumerate(thetas):
        for j, t2 in enumerate(thetas):
            grid[i, j] = objective(np.array([t1, t2]))
    return grid


def landscape_grids(resolution: int) -> dict[str, np.ndarray]:
    return {kind: landscape_grid(resolution, kind) for kind in LANDSCAPE_KINDS}


# ---------------------------------------------------------------------------
# Analytical verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    name: str
    dim: int
    trials: int
    max_error: float
    tolerance: float
    passed: bool


def verify_bounds_report(
    dims: Sequence[int] = (2, 4, 8), trials: int = 100, master_seed: int = 0
) -> list[BoundCheck]:
    """Monte Carlo verification of the distance bounds on random instances.

    Per dimension: the constructed minimal-distance operator hits its target
    fidelity and the separable distance formula exactly; random pairs never
    fall below the entangled lower bound; the maximally entangled loss agrees
    with its trace form.
    """
    _int_field("trials", trials, 1)
    checks: list[BoundCheck] = []
    for dim_idx, d in enumerate(dims):
        d = _int_field("dims", d, 2)

        rng = np.random.default_rng(np.random.SeedSequence([master_seed, 0, dim_idx]))
        worst = 0.0
        for _ in range(trials):
            u = haar_random_unitary(d, rng)
            v = haar_random_unitary(d, rng)
            psi = make_separable(d, rng)
            f_v = sample_loss(u, v, psi).fidelity
            f_w = float(rng.uniform(0.0, 1.0))
            w = construct_min_distance_operator(u, v, psi, f_w)
            worst = max(worst, abs(sample_loss(u, w, psi).fidelity - f_w))
            worst = max(
                worst,
                abs(frobenius_phase_distance(v, w) - min_distance_separable(f_v, f_w)),
            )
        checks.append(
            BoundCheck("separable_tightness", d, trials, float(worst), 1e-9, bool(worst <= 1e-9))
        )

        rng = np.random.default_rng(np.random.SeedSequence([master_seed, 1, dim_idx]))
        worst = 0.0
        for _ in range(trials):
            u = haar_random_unitary(d, rng)
            v = haar_random_unitary(d, rng)
            w = haar_random_unitary(d, rng)
            f_v = maxent_loss_from_trace(u, v).fidelity
            f_w = maxent_loss_from_trace(u, w).fidelity
            bound = min_distance_entangled_lb(f_v, f_w, d)
            worst = max(worst, bound - frobenius_phase_distance(v, w))
        checks.append(
            BoundCheck("entangled_lower_bound", d, trials, float(worst), 1e-8, bool(worst <= 1e-8))
        )

        rng = np.random.default_rng(np.random.SeedSequence([master_seed, 2, dim_idx]))
        psi = make_max_entangled(d)
        worst = 0.0
        for _ in range(trials):
            u = haar_random_unitary(d, rng)
            v = haar_random_unitary(d, rng)
            worst = max(
                worst,
                abs(sample_loss(u, v, psi).loss - maxent_loss_from_trace(u, v).loss),
            )
        checks.append(
            BoundCheck("maxent_trace_identity", d, trials, float(worst), 1e-10, bool(worst <= 1e-10))
        )
    return checks


# ---------------------------------------------------------------------------
# Expressivity campaign
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpressivityRecord:
    family: str
    layers: int
    qubits: int
    n_samples: int
    n_bins: int
    seed: int
    expressivity: float


def expressivity_records(config: ExperimentConfig) -> list[ExpressivityRecord]:
    """KL expressivity per (family, layer count) at the configured size."""
    if config.experiment != "expressivity":
        raise ValueError(f"config describes {config.experiment}, not expressivity")
    out = []
    for fam_idx, group in enumerate(config.ansatz):
        for layer_idx, layers in enumerate(group.layers):
            seed = _spawn_seed(config.master_seed, fam_idx, layer_idx)
            spec = AnsatzSpec(group.family, config.qubits, layers)
            report = expressivity(
                spec, config.n_samples, config.n_bins, rng=np.random.default_rng(seed)
            )
            out.append(
                ExpressivityRecord(
                    family=group.family,
                    layers=layers,
                    qubits=config.qubits,
                    n_samples=config.n_samples,
                    n_bins=config.n_bins,
                    seed=seed,
                    expressivity=report.expressivity,
                )
            )
    return out


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _g(x: float) -> str:
    return format(float(x), ".12g")


def records_to_csv_text(records: Sequence[RunRecord]) -> str:
    """CSV with one row per swept radius; failed records are omitted (the
    JSON form keeps them)."""
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        if rec.error is not None:
            continue
        prefix = [
            str(rec.run_id),
            rec.experiment,
            rec.ansatz,
            str(rec.layers),
            str(rec.qubits),
            rec.sample_kind,
            str(rec.schmidt_rank),
            _g(rec.entanglement_entropy),
            str(rec.seed),
        ]
        suffix = [
            _g(rec.start_loss),
            "" if rec.distance_to_min is None else _g(rec.distance_to_min),
            _g(rec.improvement),
        ]
        for p in rec.curve.points:
            row = prefix + [_g(p.radius), _g(p.raw_min_loss), _g(p.envelope_min_loss)]
            lines.append(",".join(row + suffix))
    return "\n".join(lines) + "\n"


def _record_to_json(rec: RunRecord) -> dict:
    curve = None
    if rec.curve is not None:
        curve = {
            "start_loss": rec.curve.start_loss,
            "points": [
                {
                    "radius": p.radius,
                    "raw_min_loss": p.raw_min_loss,
                    "envelope_min_loss": p.envelope_min_loss,
                    "evaluations": p.evaluations,
                    "best_theta": [float(x) for x in p.best_theta],
                }
                for p in rec.curve.points
            ],
        }
    return {
        "run_id": rec.run_id,
        "experiment": rec.experiment,
        "ansatz": rec.ansatz,
        "layers": rec.layers,
        "qubits": rec.qubits,
        "sample_kind": rec.sample_kind,
        "schmidt_rank": rec.schmidt_rank,
        "entanglement_entropy": rec.entanglement_entropy,
        "seed": rec.seed,
        "start_loss": rec.start_loss,
        "curve": curve,
        "distance_to_min": rec.distance_to_min,
        "improvement": rec.improvement,
        "error": rec.error,
    }


def records_to_json_text(records: Sequence[RunRecord]) -> str:
    blob = {"records": [_record_to_json(r) for r in records]}
    return json.dumps(blob, indent=2) + "\n"


def records_from_json_text(text: str) -> list[RunRecord]:
    blob = json.loads(text)
    out = []
    for entry in blob["records"]:
        curve = None
        if entry["curve"] is not None:
            points = tuple(
                SweepPoint(
                    radius=q["radius"],
                    raw_min_loss=q["raw_min_loss"],
                    envelope_min_loss=q["envelope_min_loss"],
                    best_theta=np.asarray(q["best_theta"], dtype=float),
                    evaluations=q["evaluations"],
                )
                for q in entry["curve"]["points"]
            )
            curve = SweepCurve(start_loss=entry["curve"]["start_loss"], points=points)
        out.append(
            RunRecord(
                run_id=entry["run_id"],
                experiment=entry["experiment"],
                ansatz=entry["ansatz"],
                layers=entry["layers"],
                qubits=entry["qubits"],
                sample_kind=entry["sample_kind"],
                schmidt_rank=entry["schmidt_rank"],
                entanglement_entropy=entry["entanglement_entropy"],
                seed=entry["seed"],
                start_loss=entry["start_loss"],
                curve=curve,
                distance_to_min=entry["distance_to_min"],
                improvement=entry["improvement"],
                error=entry["error"],
            )
        )
    return out


def landscape_to_csv_text(grids: dict[str, np.ndarray]) -> str:
    lines = ["sample_kind,theta1,theta2,loss"]
    for kind, grid in grids.items():
        res = grid.shape[0]
        thetas = np.linspace(0.0, 2.0 * np.pi, res, endpoint=False)
        for i in range(res):
            for j in range(res):
                lines.append(
                    f"{kind},{_g(thetas[i])},{_g(thetas[j])},{_g(grid[i, j])}"
                )
    return "\n".join(lines) + "\n"


def landscape_to_json_text(grids: dict[str, np.ndarray]) -> str:
    resolutions = {g.shape[0] for g in grids.values()}
    if len(resolutions) != 1:
        raise ValueError("landscape grids disagree on resolution")
    res = resolutions.pop()
    thetas = np.linspace(0.0, 2.0 * np.pi, res, endpoint=False)
    blob = {
        "resolution": res,
        "thetas": [float(t) for t in thetas],
        "grids": {kind: grid.tolist() for kind, grid in grids.items()},
    }
    return json.dumps(blob, indent=2) + "\n"


def checks_to_csv_text(checks: Sequence[BoundCheck]) -> str:
    lines = ["name,dim,trials,max_error,tolerance,passed"]
    for c in checks:
        lines.append(
            f"{c.name},{c.dim},{c.trials},{_g(c.max_error)},{_g(c.tolerance)},"
            f"{str(c.passed).lower()}"
        )
    return "\n".join(lines) + "\n"


def checks_to_json_text(checks: Sequence[BoundCheck]) -> str:
    return json.dumps({"checks": [dataclasses.asdict(c) for c in checks]}, indent=2) + "\n"


def expressivity_to_csv_text(records: Sequence[ExpressivityRecord]) -> str:
    lines = ["family,layers,qubits,n_samples,n_bins,seed,expressivity"]
    for r in records:
        lines.append(
            f"{r.family},{r.layers},{r.qubits},{r.n_samples},{r.n_bins},{r.seed},"
            f"{_g(r.expressivity)}"
        )
    return "\n".join(lines) + "\n"


def expressivity_to_json_text(records: Sequence[ExpressivityRecord]) -> str:
    blob = {"expressivity": [dataclasses.asdict(r) for r in records]}
    return json.dumps(blob, indent=2) + "\n"


def payload_text(payload, format: str) -> str:
    """Serialize any experiment output to the requested format."""
    if format not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {format!r}")
    if isinstance(payload, dict):
        if format == "csv":
            return landscape_to_csv_text(payload)
        return landscape_to_json_text(payload)
    items = list(payload)
    if items and isinstance(items[0], BoundCheck):
        return checks_to_csv_text(items) if format == "csv" else checks_to_json_text(items)
    if items and isinstance(items[0], ExpressivityRecord):
        if format == "csv":
            return expressivity_to_csv_text(items)
        return expressivity_to_json_text(items)
    return records_to_csv_text(items) if format == "csv" else records_to_json_text(items)


def emit(payload, format: str, path: str | Path) -> Path:
    """Write experiment output to disk and return the path."""
    path = Path(path)
    path.write_text(payload_text(payload, format))
    return path
