"""Training samples: separable, maximally entangled, and NME states with
prescribed Schmidt spectra, plus their entanglement measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import (
    NORM_TOL,
    RANK_TOL,
    SchmidtData,
    StateVector,
    _haar_vector,
    schmidt_decompose,
)

KIND_SEPARABLE = "separable"
KIND_MAX_ENTANGLED = "max_entangled"
KIND_NME = "nme"

SAMPLE_KINDS = (KIND_SEPARABLE, KIND_MAX_ENTANGLED, KIND_NME)


@dataclass(frozen=True)
class TrainingSample:
    """A bipartite state annotated with its Schmidt data and kind tag."""

    state: StateVector
    schmidt: SchmidtData
    kind: str


def _classify(schmidt: SchmidtData, dim_x: int) -> str:
    if schmidt.rank == 1:
        return KIND_SEPARABLE
    sq = schmidt.coefficients**2
    if schmidt.rank == dim_x and np.all(np.abs(sq - 1.0 / dim_x) <= 1e-10):
        return KIND_MAX_ENTANGLED
    return KIND_NME


def _finish(state: StateVector) -> TrainingSample:
    schmidt = schmidt_decompose(state)
    return TrainingSample(state=state, schmidt=schmidt, kind=_classify(schmidt, state.dim_x))


def _check_unit(v: np.ndarray, name: str) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=complex)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
        raise ValueError(f"{name} is not normalized")
    return v


def _check_orthonormal_columns(b: np.ndarray, dim: int, n_cols: int, name: str) -> np.ndarray:
    b = np.ascontiguousarray(b, dtype=complex)
    if b.ndim != 2 or b.shape[0] != dim or b.shape[1] < n_cols:
        raise ValueError(f"{name} must be {dim} x (>= {n_cols})")
    b = b[:, :n_cols]
    if np.linalg.norm(b.conj().T @ b - np.eye(n_cols)) > 1e-10:
        raise ValueError(f"{name} columns are not orthonormal")
    return b


def make_separable(
    d: int,
    rng: np.random.Generator | None = None,
    factor_x: np.ndarray | None = None,
    factor_r: np.ndarray | None = None,
    dim_r: int | None = None,
) -> TrainingSample:
    """Rank-1 sample, either from explicit factors or Haar-random draws."""
    if (factor_x is None) != (factor_r is None):
        raise ValueError("provide both factors or neither")
    if factor_x is not None:
        fx = _check_unit(factor_x, "factor_x")
        fr = _check_unit(factor_r, "factor_r")
        if fx.shape[0] != d:
            raise ValueError(f"factor_x has dimension {fx.shape[0]}, expected {d}")
    else:
        if rng is None:
            raise ValueError("a generator is required when factors are not given")
        fx = _haar_vector(d, rng)
        fr = _haar_vector(dim_r if dim_r is not None else d, rng)
    state = StateVector(np.kron(fx, fr), dim_x=d, dim_r=fr.shape[0])
    return _finish(state)


def make_max_entangled(
    d: int,
    basis_x: np.ndarray | None = None,
    basis_r: np.ndarray | None = None,
) -> TrainingSample:
    """(1/sqrt(d)) sum_j |x_j>|y_j>; computational Schmidt bases by default."""
    c = np.full(d, 1.0 / d)
    return make_nme(c, d, dim_r=d, basis_x=basis_x, basis_r=basis_r)


def make_nme(
    c: np.ndarray,
    d: int,
    dim_r: int | None = None,
    basis_x: np.ndarray | None = None,
    basis_r: np.ndarray | None = None,
) -> TrainingSample:
    """Sample with squared Schmidt coefficients c; computational bases by default."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.shape[0] < 1:
        raise ValueError("coefficients must form a nonempty vector")
    if np.any(c < -1e-15):
        raise ValueError("coefficients must be nonnegative")
    c = np.clip(c, 0.0, None)
    if abs(np.sum(c) - 1.0) > 1e-10:
        raise ValueError(f"coefficients sum to {np.sum(c)}, expected 1")
    if c.shape[0] > d:
        raise ValueError(f"{c.shape[0]} coefficients exceed dimension {d}")
    r = c.shape[0]
    dim_r = dim_r if dim_r is not None else d
    if r > dim_r:
        raise ValueError(f"{r} coefficients exceed reference dimension {dim_r}")
    bx = (
        np.eye(d, r, dtype=complex)
        if basis_x is None
        else _check_orthonormal_columns(basis_x, d, r, "basis_x")
    )
    br = (
        np.eye(dim_r, r, dtype=complex)
        if basis_r is None
        else _check_orthonormal_columns(basis_r, dim_r, r, "basis_r")
    )
    m = (bx * np.sqrt(c)) @ br.T
    state = StateVector(m.reshape(-1), dim_x=d, dim_r=dim_r)
    return _finish(state)


def entanglement_entropy(sample: TrainingSample) -> float:
    """-sum c_j ln c_j over the squared Schmidt coefficients, in nats."""
    sq = sample.schmidt.coefficients**2
    sq = sq[sq > 1e-300]
    return float(-np.sum(sq * np.log(sq)))


def schmidt_rank(sample: TrainingSample) -> int:
    """Count of Schmidt coefficients above the rank tolerance."""
    return int(np.count_nonzero(sample.schmidt.coefficients > RANK_TOL))


def nme_coefficient_families(
    d: int, lambdas: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
) -> list[np.ndarray]:
    """Interpolation families c(lambda) = lambda*uniform(r) + (1-lambda)*e_1 for
    each rank r in 1..d, deduplicated; spans the rank x entropy grid."""
    out: list[np.ndarray] = []
    seen: set[tuple[float, ...]] = set()
    for r in range(1, d + 1):
        uniform = np.full(r, 1.0 / r)
        e1 = np.zeros(r)
        e1[0] = 1.0
        for lam in lambdas:
            c = lam * uniform + (1.0 - lam) * e1
            key = tuple(np.round(c, 12))
            if key in seen:
                continue
            seen.add(key)
            out.append(c)
    return out


def sample_to_json(sample: TrainingSample) -> dict:
    """JSON-serializable form: kind, dims, Schmidt coefficients, (re, im) pairs."""
    amps = sample.state.amplitudes
    return {
        "kind": sample.kind,
        "dim_x": sample.state.dim_x,
        "dim_r": sample.state.dim_r,
        "coefficients": [float(x) for x in sample.schmidt.coefficients],
        "amplitudes": [[float(a.real), float(a.imag)] for a in amps],
    }


def sample_from_json(blob: dict) -> TrainingSample:
    amps = np.array([complex(re, im) for re, im in blob["amplitudes"]])
    state = StateVector(amps, int(blob["dim_x"]), int(blob["dim_r"]))
    sample = _finish(state)
    if sample.kind != blob["kind"]:
        raise ValueError(
            f"stored kind {blob['kind']!r} disagrees with amplitudes ({sample.kind!r})"
        )
    stored = np.asarray(blob["coefficients"], dtype=float)
    if stored.shape != sample.schmidt.coefficients.shape or np.any(
        np.abs(stored - sample.schmidt.coefficients) > 1e-9
    ):
        raise ValueError("stored Schmidt coefficients disagree with amplitudes")
    return sample
