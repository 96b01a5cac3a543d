"""Closed-form landscape geometry for unitary learning: minimal distances to
fixed-fidelity operators, the constructive extremal operator, ball-maximal
fidelities, improvement values, and the improvement-ratio bound.

All fidelities are squared overlaps in [0, 1]; all angles are on the principal
branch [0, pi/2]; radii are Frobenius phase distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .samples import KIND_SEPARABLE, TrainingSample
from .states import assert_unitary

ARC_TOL = 1e-12


def _checked_arccos(x: float) -> float:
    """arccos that forgives float overshoot below ARC_TOL and rejects more."""
    if x > 1.0:
        if x > 1.0 + ARC_TOL:
            raise ValueError(f"arccos argument {x} exceeds 1 beyond tolerance")
        x = 1.0
    elif x < -1.0:
        if x < -1.0 - ARC_TOL:
            raise ValueError(f"arccos argument {x} below -1 beyond tolerance")
        x = -1.0
    return float(np.arccos(x))


def _checked_fidelity(f: float, name: str) -> float:
    if f < -ARC_TOL or f > 1.0 + ARC_TOL:
        raise ValueError(f"{name} = {f} outside [0, 1]")
    return min(max(f, 0.0), 1.0)


def _gamma(f: float) -> float:
    """Bures angle arccos(sqrt(f)) on the principal branch."""
    return _checked_arccos(np.sqrt(f))


@dataclass(frozen=True)
class BallGeometry:
    """Maximal fidelity reachable inside a phase-distance ball of the given
    radius, with the rotation angle beta and the critical radius."""

    radius: float
    beta: float
    threshold_R: float
    max_fidelity: float
    is_upper_bound: bool


@dataclass(frozen=True)
class ImprovementValue:
    """Loss decrease guaranteed (separable, exact) or allowed at most
    (entangled, upper bound) within a radius-R ball."""

    value: float
    exact: bool


def min_distance_separable(f_v: float, f_w: float) -> float:
    """Minimal phase distance from V to any W with separable-sample fidelity
    f_w, given V's fidelity f_v: sqrt(4 (1 - cos(gamma_v - gamma_w)))."""
    f_v = _checked_fidelity(f_v, "f_v")
    f_w = _checked_fidelity(f_w, "f_w")
    inner = 1.0 - np.sqrt(f_v * f_w) - np.sqrt((1.0 - f_v) * (1.0 - f_w))
    return float(np.sqrt(4.0 * max(inner, 0.0)))


def min_distance_entangled_lb(f_v: float, f_w: float, d: int) -> float:
    """Lower bound on the phase distance from V to any W with maximally
    entangled fidelity f_w: sqrt(2d (1 - cos(gamma_v - gamma_w)))."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    f_v = _checked_fidelity(f_v, "f_v")
    f_w = _checked_fidelity(f_w, "f_w")
    inner = 1.0 - np.sqrt(f_v * f_w) - np.sqrt((1.0 - f_v) * (1.0 - f_w))
    return float(np.sqrt(2.0 * d * max(inner, 0.0)))


def _orthonormal_extension(cols: list[np.ndarray], d: int) -> np.ndarray:
    """Extend the given orthonormal columns to a full basis by Gram-Schmidt
    over the computational vectors, in index order (deterministic)."""
    basis = list(cols)
    for k in range(d):
        if len(basis) == d:
            break
        w = np.zeros(d, dtype=complex)
        w[k] = 1.0
        for _ in range(2):  # re-orthogonalize once for numerical stability
            for b in basis:
                w = w - np.vdot(b, w) * b
        nrm = np.linalg.norm(w)
        if nrm > 1e-7:
            basis.append(w / nrm)
    if len(basis) != d:
        raise RuntimeError("failed to extend orthonormal basis")
    return np.column_stack(basis)


def construct_min_distance_operator(
    u: np.ndarray, v: np.ndarray, psi: TrainingSample, f_w: float
) -> np.ndarray:
    """The extremal operator W = T V realizing the separable minimal distance.

    T rotates by gamma_v - gamma_w inside span{U|psi>, U|gamma>} and acts as
    the identity on the complement; |gamma> is the normalized component of
    U^dag V |psi> orthogonal to |psi>, with a deterministic computational-basis
    fallback when that component vanishes.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if psi.kind != KIND_SEPARABLE:
        raise ValueError("the construction requires a separable sample")
    d = psi.state.dim_x
    if d < 2:
        raise ValueError("dimension must be >= 2 to host the rotation plane")
    if u.shape != (d, d) or v.shape != (d, d):
        raise ValueError("operator dimensions do not match the sample")
    f_w = _checked_fidelity(f_w, "f_w")

    psi_x = psi.schmidt.basis_x[:, 0]
    uv_psi = (u.conj().T @ v) @ psi_x
    z = complex(np.vdot(psi_x, uv_psi))
    perp = uv_psi - z * psi_x
    nrm = np.linalg.norm(perp)
    # arctan2 keeps the angle well conditioned where arccos(sqrt(f)) is not
    # (|z| near 1 or near 0)
    gamma_v = float(np.arctan2(nrm, abs(z)))
    gamma_w = _gamma(f_w)
    if nrm >= 1e-10:
        gvec = perp / nrm
    else:
        gvec = None
        for k in range(d):
            w = np.zeros(d, dtype=complex)
            w[k] = 1.0
            w = w - np.vdot(psi_x, w) * psi_x
            wn = np.linalg.norm(w)
            if wn > 1e-6:
                gvec = w / wn
                break
        if gvec is None:
            raise RuntimeError("no vector orthogonal to |psi> found")

    basis = _orthonormal_extension([u @ psi_x, u @ gvec], d)
    delta = gamma_v - gamma_w
    x, y = np.cos(delta), np.sin(delta)
    theta = float(np.angle(z)) if abs(z) > 1e-12 else 0.0
    block = np.eye(d, dtype=complex)
    block[0, 0] = x
    block[0, 1] = np.exp(1j * theta) * y
    block[1, 0] = -np.exp(-1j * theta) * y
    block[1, 1] = x
    t = basis @ block @ basis.conj().T
    return assert_unitary(t @ v)


def ball_max_fidelity_separable(f_v: float, radius: float) -> BallGeometry:
    """Exact maximal separable-sample fidelity inside a phase-distance ball."""
    f_v = _checked_fidelity(f_v, "f_v")
    if radius < 0.0:
        raise ValueError("radius must be >= 0")
    gamma = _gamma(f_v)
    threshold = 2.0 * np.sqrt(1.0 - np.sqrt(f_v))
    if radius >= threshold:
        return BallGeometry(radius, gamma, threshold, 1.0, False)
    beta = _checked_arccos(1.0 - radius**2 / 4.0)
    max_f = float(np.cos(gamma - beta) ** 2)
    return BallGeometry(radius, beta, threshold, max_f, False)


def ball_max_fidelity_entangled_ub(f_v: float, radius: float, d: int) -> BallGeometry:
    """Upper bound on the maximally-entangled fidelity inside the same ball."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    f_v = _checked_fidelity(f_v, "f_v")
    if radius < 0.0:
        raise ValueError("radius must be >= 0")
    gamma = _gamma(f_v)
    threshold = np.sqrt(2.0 * d) * np.sqrt(1.0 - np.sqrt(f_v))
    if radius >= threshold:
        return BallGeometry(radius, gamma, threshold, 1.0, True)
    beta = _checked_arccos(1.0 - radius**2 / (2.0 * d))
    max_f = float(np.cos(gamma - beta) ** 2)
    return BallGeometry(radius, beta, threshold, max_f, True)


def _improvement(f_v: float, geo: BallGeometry, exact: bool) -> ImprovementValue:
    if geo.max_fidelity == 1.0:
        value = 1.0 - f_v
    else:
        gamma = _gamma(f_v)
        value = float(np.sin(2.0 * gamma - geo.beta) * np.sin(geo.beta))
    return ImprovementValue(value=min(max(value, 0.0), 1.0), exact=exact)


def improvement_separable(f_v: float, radius: float) -> ImprovementValue:
    """Exact loss decrease sin(2 gamma - beta) sin(beta) within the ball."""
    f_v = _checked_fidelity(f_v, "f_v")
    return _improvement(f_v, ball_max_fidelity_separable(f_v, radius), exact=True)


def improvement_entangled_ub(f_v: float, radius: float, d: int) -> ImprovementValue:
    """Upper bound on the loss decrease for the maximally entangled sample."""
    f_v = _checked_fidelity(f_v, "f_v")
    return _improvement(f_v, ball_max_fidelity_entangled_ub(f_v, radius, d), exact=False)


def improvement_ratio_bound(loss: float, radius: float, n: int) -> float:
    """Upper bound 8 / sqrt(2^n) on the entangled-to-separable improvement
    ratio at matched starting loss, valid for radii up to the separable
    critical radius."""
    if not 0.0 < loss <= 1.0:
        raise ValueError(f"loss {loss} outside (0, 1]")
    if n < 1:
        raise ValueError("qubit count must be >= 1")
    r_adm = np.sqrt(4.0 * (1.0 - np.sqrt(1.0 - loss)))
    if not 0.0 < radius <= r_adm + ARC_TOL:
        raise ValueError(f"radius {radius} outside the admissible interval (0, {r_adm}]")
    return float(8.0 * 2.0 ** (-n / 2.0))


def sine_upper_bound(x: np.ndarray) -> np.ndarray:
    """Parabolic envelope (4x/pi)(1 - x/pi) >= sin(x) on [0, pi]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -ARC_TOL) or np.any(x > np.pi + ARC_TOL):
        raise ValueError("domain is [0, pi]")
    return (4.0 * x / np.pi) * (1.0 - x / np.pi)


def sine_lower_bound(x: np.ndarray) -> np.ndarray:
    """Two-piece linear envelope (2/pi) min(x, pi - x) <= sin(x) on [0, pi]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -ARC_TOL) or np.any(x > np.pi + ARC_TOL):
        raise ValueError("domain is [0, pi]")
    return (2.0 / np.pi) * np.minimum(x, np.pi - x)


def _phase_dist_along_flow(lam: np.ndarray, d: int, s: np.ndarray) -> np.ndarray:
    """d_F'(V, V exp(isG)) for eigenphase speeds lam, vectorized over s."""
    traces = np.abs(np.exp(1j * np.outer(s, lam)).sum(axis=1))
    return np.sqrt(2.0 * d * np.clip(1.0 - traces / d, 0.0, None))


def _first_radius_crossing(lam: np.ndarray, d: int, radius: float) -> float:
    """Smallest s with d_F'(V, V exp(isG)) >= radius, by grid scan + bisection."""
    s_hi = 2.0 * np.pi / (lam[-1] - lam[0] + 1e-12)
    for _ in range(12):
        grid = np.linspace(0.0, s_hi, 512)
        vals = _phase_dist_along_flow(lam, d, grid)
        above = np.flatnonzero(vals >= radius)
        if above.size > 0:
            break
        s_hi *= 2.0
    else:
        raise RuntimeError("generator never reaches the requested radius")
    hi = grid[above[0]]
    lo = grid[above[0] - 1] if above[0] > 0 else 0.0
    for _ in range(60):
        mid = (lo + hi) / 2.0
        if _phase_dist_along_flow(lam, d, np.array([mid]))[0] >= radius:
            hi = mid
        else:
            lo = mid
    return hi


def sample_unitaries_in_ball(
    v: np.ndarray, radius: float, n: int, rng: np.random.Generator, block: int = 100
) -> np.ndarray:
    """Draw n unitaries W = V exp(isG) with phase distance d_F'(V, W) <= radius.

    G is Gaussian Hermitian and s is drawn uniformly up to the first radius
    crossing; a fresh generator is used every `block` draws so the samples
    probe many directions through the ball. Returns an (n, d, d) array.
    """
    v = np.asarray(v, dtype=complex)
    d = v.shape[0]
    if radius <= 0.0 or radius > np.sqrt(2.0 * d):
        raise ValueError(f"radius {radius} outside (0, sqrt(2d)]")
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty((n, d, d), dtype=complex)
    made = 0
    while made < n:
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        g = (a + a.conj().T) / 2.0
        lam, q = np.linalg.eigh(g)
        s_star = _first_radius_crossing(lam, d, radius)
        want = min(block, n - made)
        kept: list[float] = []
        for _ in range(50):
            s_try = rng.uniform(0.0, s_star, size=2 * want)
            ok = s_try[_phase_dist_along_flow(lam, d, s_try) <= radius + 1e-12]
            kept.extend(ok.tolist())
            if len(kept) >= want:
                break
        if len(kept) < want:
            raise RuntimeError("rejection sampling failed to stay inside the ball")
        phases = np.exp(1j * np.outer(np.array(kept[:want]), lam))
        flows = np.einsum("ij,bj,kj->bik", q, phases, q.conj())
        out[made : made + want] = np.einsum("ij,bjk->bik", v, flows)
        made += want
    return out


def sample_unitary_in_ball(
    v: np.ndarray, radius: float, rng: np.random.Generator
) -> np.ndarray:
    """Single-draw form of sample_unitaries_in_ball."""
    return sample_unitaries_in_ball(v, radius, 1, rng)[0]
