"""Bipartite pure states, Schmidt decomposition, Haar sampling, subsystem operators.

Conventions: a state on H_X (x) H_R with dimensions (dim_x, dim_r) stores its
amplitudes in row-major order, so reshaping to (dim_x, dim_r) gives the matrix M
with |state> = sum_jk M[j, k] |j>_X |k>_R. All public constructors validate their
invariants and raise ValueError on violation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
RANK_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    """Unit-norm amplitude vector over H_X (x) H_R."""

    amplitudes: np.ndarray
    dim_x: int
    dim_r: int

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.dim_x < 1 or self.dim_r < 1:
            raise ValueError("subsystem dimensions must be positive")
        if amps.shape != (self.dim_x * self.dim_r,):
            raise ValueError(
                f"amplitude length {amps.shape} does not match "
                f"dim_x*dim_r = {self.dim_x * self.dim_r}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 beyond {NORM_TOL}")

    def reshaped(self) -> np.ndarray:
        """Amplitudes as the dim_x x dim_r coefficient matrix."""
        return self.amplitudes.reshape(self.dim_x, self.dim_r)


@dataclass(frozen=True)
class SchmidtData:
    """Schmidt coefficients (the square roots, descending) and both bases.

    coefficients has length min(dim_x, dim_r) including exact-zero tail entries;
    rank counts entries above RANK_TOL. basis_x / basis_y hold the Schmidt vectors
    as columns, phase-fixed so each basis_x column's first significant entry is
    real positive.
    """

    coefficients: np.ndarray
    rank: int
    basis_x: np.ndarray
    basis_y: np.ndarray


def assert_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    """Validate that m is unitary within tol (Frobenius norm); return it as complex."""
    m = np.ascontiguousarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    dev = np.linalg.norm(m.conj().T @ m - np.eye(d))
    if dev > tol:
        raise ValueError(f"matrix deviates from unitarity by {dev}")
    return m


def schmidt_decompose(state: StateVector) -> SchmidtData:
    """Schmidt decomposition via SVD of the reshaped amplitude matrix."""
    m = state.reshaped()
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    basis_x = u.copy()
    basis_y = vh.T.copy()  # column i holds amplitudes of the i-th R-side vector
    for i in range(basis_x.shape[1]):
        col = basis_x[:, i]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size == 0:
            continue
        phase = col[nz[0]] / abs(col[nz[0]])
        basis_x[:, i] = col * np.conj(phase)
        basis_y[:, i] = basis_y[:, i] * phase
    rank = int(np.count_nonzero(s > RANK_TOL))
    sq = float(np.sum(s**2))
    if abs(sq - 1.0) > NORM_TOL:
        raise ValueError(f"squared Schmidt coefficients sum to {sq}, expected 1")
    return SchmidtData(coefficients=s, rank=rank, basis_x=basis_x, basis_y=basis_y)


def reconstruct_state(data: SchmidtData) -> np.ndarray:
    """Amplitudes of sum_j coeff_j |x_j> (x) |y_j>."""
    m = data.basis_x @ np.diag(data.coefficients) @ data.basis_y.T
    return m.reshape(-1)


def haar_random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary: QR of a complex Ginibre matrix with the
    R-diagonal phase correction."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    # zero diagonal entries occur with probability zero; guard the division anyway
    phases = np.where(np.abs(diag) > 0, diag / np.abs(np.where(diag == 0, 1, diag)), 1.0)
    return q * phases


def haar_random_state(d: int, rng: np.random.Generator) -> StateVector:
    """Haar-distributed pure state on a single d-dimensional factor (dim_r = 1)."""
    return StateVector(_haar_vector(d, rng), dim_x=d, dim_r=1)


def _haar_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def apply_to_subsystem(op: np.ndarray, state: StateVector) -> StateVector:
    """Apply (op (x) I_R) to the state; op must act on H_X."""
    op = assert_unitary(op)
    if op.shape[0] != state.dim_x:
        raise ValueError(
            f"operator dimension {op.shape[0]} does not match dim_x = {state.dim_x}"
        )
    out = op @ state.reshaped()
    return StateVector(out.reshape(-1), state.dim_x, state.dim_r)
