"""Loss, fidelity, Bures angle, Frobenius phase distance, Monte Carlo risk, and
the no-free-lunch lower-bound calculator.

Operators are plain complex ndarrays; unitarity is the caller's contract
(constructors in states/ansatz validate it) so the evaluation path stays cheap
enough for optimizer inner loops. Dimension mismatches always raise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .samples import TrainingSample


@dataclass(frozen=True)
class LossValue:
    loss: float
    fidelity: float
    bures_angle: float


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    stderr: float
    n_samples: int


def loss_from_fidelity(fidelity: float) -> LossValue:
    """Bundle a fidelity with its loss and Bures angle on the principal branch."""
    if fidelity < -1e-9 or fidelity > 1.0 + 1e-9:
        raise ValueError(f"fidelity {fidelity} outside [0, 1]")
    f = min(max(fidelity, 0.0), 1.0)
    return LossValue(loss=1.0 - f, fidelity=f, bures_angle=float(np.arccos(np.sqrt(f))))


def _check_square(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def sample_loss(u: np.ndarray, v: np.ndarray, sample: TrainingSample) -> LossValue:
    """Fidelity loss of hypothesis v against target u on one training sample.

    Uses <a|(A (x) I)|a> = Tr(A M M^dag) with M the reshaped amplitudes, so no
    Kronecker product is ever materialized.
    """
    u = _check_square(u, "u")
    v = _check_square(v, "v")
    d = sample.state.dim_x
    if u.shape[0] != d or v.shape[0] != d:
        raise ValueError(
            f"operator dimensions {u.shape[0]}, {v.shape[0]} do not match dim_x={d}"
        )
    m = sample.state.reshaped()
    overlap = np.vdot(u @ m, v @ m)
    return loss_from_fidelity(abs(overlap) ** 2)


def frobenius_phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Frobenius distance minimized over a global phase:
    sqrt(2d) * sqrt(1 - |Tr(U^dag V)| / d), in [0, sqrt(2d)]."""
    u = _check_square(u, "u")
    v = _check_square(v, "v")
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    inner = 1.0 - abs(np.trace(u.conj().T @ v)) / d
    if inner < 0.0:
        if inner < -1e-9:
            raise ValueError(f"|trace| exceeds dimension by {-inner}; inputs not unitary")
        inner = 0.0
    return float(np.sqrt(2 * d) * np.sqrt(inner))


def maxent_loss_from_trace(u: np.ndarray, v: np.ndarray) -> LossValue:
    """Loss on the maximally entangled sample via |Tr(U^dag V)|^2 / d^2."""
    u = _check_square(u, "u")
    v = _check_square(v, "v")
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    return loss_from_fidelity(abs(np.trace(u.conj().T @ v)) ** 2 / d**2)


def risk_estimate(
    u: np.ndarray, v: np.ndarray, n_samples: int, rng: np.random.Generator
) -> RiskEstimate:
    """Monte Carlo mean of the loss over Haar-random separable inputs on H_X."""
    u = _check_square(u, "u")
    v = _check_square(v, "v")
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    d = u.shape[0]
    phis = rng.standard_normal((n_samples, d)) + 1j * rng.standard_normal((n_samples, d))
    phis /= np.linalg.norm(phis, axis=1, keepdims=True)
    a = u.conj().T @ v
    overlaps = np.einsum("nd,de,ne->n", phis.conj(), a, phis)
    losses = 1.0 - np.abs(overlaps) ** 2
    mean = float(np.mean(losses))
    stderr = 0.0 if n_samples == 1 else float(np.std(losses, ddof=1) / np.sqrt(n_samples))
    return RiskEstimate(mean=mean, stderr=stderr, n_samples=n_samples)


def qnfl_lower_bound(d: int, r: int, t: int) -> float:
    """No-free-lunch risk lower bound 1 - (r^2 t^2 + d + 1) / (d (d + 1)).

    Returned unclamped; negative values mark the vacuous regime.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not 1 <= r <= d:
        raise ValueError(f"Schmidt rank {r} outside [1, {d}]")
    if t < 1:
        raise ValueError("sample count must be >= 1")
    return 1.0 - (r**2 * t**2 + d + 1) / (d * (d + 1))
