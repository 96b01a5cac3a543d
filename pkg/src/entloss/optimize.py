"""Ball-constrained loss minimization and radius-sweep drivers.

The optimizer minimizes a scalar objective over the 2-norm ball
||theta - theta0|| <= R using SLSQP with a smooth inequality constraint,
multistart from the ball center plus random feasible perturbations, and
the center itself as a permanent fallback candidate, so the reported
loss never exceeds the loss at the center.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class BallConstraint:
    """Closed 2-norm ball in parameter space."""

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        center = np.ascontiguousarray(self.center, dtype=float)
        if center.ndim != 1 or center.size == 0:
            raise ValueError("center must be a nonempty 1-D vector")
        if not np.all(np.isfinite(center)):
            raise ValueError("center must be finite")
        radius = float(self.radius)
        if not np.isfinite(radius) or radius < 0.0:
            raise ValueError("radius must be finite and nonnegative")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)


@dataclass(frozen=True)
class OptimizerSettings:
    max_iterations: int = 150
    restarts: int = 3
    tolerance: float = 1e-10
    fd_step: float = 1e-8
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.fd_step <= 0.0:
            raise ValueError("fd_step must be positive")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")


@dataclass(frozen=True)
class MinimizeResult:
    theta: np.ndarray
    loss: float
    n_evaluations: int


@dataclass(frozen=True)
class SweepPoint:
    radius: float
    raw_min_loss: float
    envelope_min_loss: float
    best_theta: np.ndarray
    evaluations: int


@dataclass(frozen=True)
class SweepCurve:
    start_loss: float
    points: tuple[SweepPoint, ...]


class _CountedObjective:
    def __init__(self, fn: Callable[[np.ndarray], float]) -> None:
        self.fn = fn
        self.calls = 0

    def __call__(self, theta: np.ndarray) -> float:
        self.calls += 1
        return float(self.fn(np.asarray(theta, dtype=float)))


def minimize_in_ball(
    objective: Callable[[np.ndarray], float],
    constraint: BallConstraint,
    settings: OptimizerSettings = OptimizerSettings(),
    seed: int | Sequence[int] | None = None,
    jac: Callable[[np.ndarray], np.ndarray] | None = None,
) -> MinimizeResult:
    """Minimize the objective over the ball, deterministically per seed.

    The returned point satisfies the constraint within FEASIBILITY_TOL;
    solutions the solver leaves slightly outside are projected back onto
    the sphere and re-evaluated. Without jac the solver falls back to
    forward differences with step settings.fd_step; n_evaluations counts
    objective calls only.
    """
    counted = _CountedObjective(objective)
    theta0 = constraint.center
    r = constraint.radius
    best_theta = theta0.copy()
    best_loss = counted(theta0)
    if r == 0.0:
        return MinimizeResult(best_theta, best_loss, counted.calls)

    rng = np.random.default_rng(
        np.random.SeedSequence(settings.master_seed if seed is None else seed)
    )
    cons = [
        {
            "type": "ineq",
            "fun": lambda th: r**2 - float((th - theta0) @ (th - theta0)),
            "jac": lambda th: -2.0 * (np.asarray(th, dtype=float) - theta0),
        }
    ]
    options = {
        "maxiter": settings.max_iterations,
        "ftol": settings.tolerance,
        "eps": settings.fd_step,
    }
    for restart in range(settings.restarts):
        if restart == 0:
            x0 = theta0
        else:
            direction = rng.standard_normal(theta0.size)
            norm = np.linalg.norm(direction)
            x0 = theta0 + direction * (r * rng.uniform() / max(norm, 1e-300))
        res = _scipy_minimize(
            counted, x0, method="SLSQP", jac=jac, constraints=cons, options=options
        )
        theta = np.asarray(res.x, dtype=float)
        dist = np.linalg.norm(theta - theta0)
        if dist > r + FEASIBILITY_TOL:
            theta = theta0 + (theta - theta0) * (r / dist)
        loss = counted(theta)
        if loss < best_loss:
            best_theta, best_loss = theta, loss
    return MinimizeResult(best_theta, best_loss, counted.calls)


def radius_sweep(
    objective: Callable[[np.ndarray], float],
    theta0: np.ndarray,
    radii: Sequence[float],
    settings: OptimizerSettings = OptimizerSettings(),
    jac: Callable[[np.ndarray], np.ndarray] | None = None,
) -> SweepCurve:
    """One independent constrained minimization per radius.

    Each radius gets its own seed derived from (master_seed, index), so
    concurrent execution of single radii reproduces the sequential curve.
    """
    theta0 = np.ascontiguousarray(theta0, dtype=float)
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("radius grid is empty")
    if any(r <= 0.0 for r in radii):
        raise ValueError("radii must be positive")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")

    start_loss = float(objective(theta0))
    points = []
    envelope = np.inf
    for index, r in enumerate(radii):
        result = minimize_in_ball(
            objective,
            BallConstraint(theta0, r),
            settings,
            seed=(settings.master_seed, index),
            jac=jac,
        )
        envelope = min(envelope, result.loss)
        points.append(
            SweepPoint(
                radius=r,
                raw_min_loss=result.loss,
                envelope_min_loss=envelope,
                best_theta=result.theta,
                evaluations=result.n_evaluations,
            )
        )
    return SweepCurve(start_loss=start_loss, points=tuple(points))


def distance_to_minimum(curve: SweepCurve, threshold: float = 1e-3) -> float | None:
    """Smallest swept radius whose envelope loss reaches the threshold."""
    for point in curve.points:
        if point.envelope_min_loss <= threshold:
            return point.radius
    return None


def improvement_from_curve(curve: SweepCurve, loss_at_center: float, r: float) -> float:
    """Loss drop from the center to the envelope at the largest swept
    radius that does not exceed r."""
    eligible = [p for p in curve.points if p.radius <= r + 1e-12]
    if not eligible:
        raise ValueError(f"radius {r} is below the smallest swept radius")
    return float(loss_at_center - eligible[-1].envelope_min_loss)
