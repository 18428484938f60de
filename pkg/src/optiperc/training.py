"""Optimizers: particle swarm on periodic phase spaces, ridge regression.

The swarm is the production trainer for the phase weights (the loss is a
noisy black box evaluated on fresh acquisitions); ridge is the closed-form
readout trainer for the comparison models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PswConfig:
    """Swarm hyperparameters.

    Defaults are the standard constriction settings (omega = 0.729,
    c1 = c2 = 1.49445); the search space here is only a few dimensions, so
    a small swarm suffices.
    """

    particles: int = 20
    max_iters: int = 300
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    velocity_clamp: float = math.pi
    stop_on_error_free: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.particles < 2:
            raise ValueError("need at least 2 particles")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if min(self.inertia, self.cognitive, self.social) <= 0:
            raise ValueError("inertia/cognitive/social must be positive")
        if not self.velocity_clamp > 0:
            raise ValueError("velocity clamp must be positive")


@dataclass
class SwarmState:
    """Swarm snapshot: positions, velocities, personal and global bests."""

    positions: np.ndarray
    velocities: np.ndarray
    personal_best: np.ndarray
    personal_best_loss: np.ndarray
    global_best: np.ndarray
    global_best_loss: float
    iteration: int


def wrap_phase(x: np.ndarray) -> np.ndarray:
    """Map angles into [0, 2*pi)."""
    return np.mod(x, TWO_PI)


def periodic_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Shortest signed angular displacement from b to a, in (-pi, pi]."""
    return np.mod(a - b + math.pi, TWO_PI) - math.pi


def psw_minimize(loss, dim: int, config: PswConfig = PswConfig()):
    """Particle-swarm minimization over the periodic box [0, 2*pi)^dim.

    Standard update v <- w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x),
    x <- x + v, with attraction displacements taken along the shortest
    angular arc and positions wrapped back into the box.  The loss may be
    stochastic; recorded best losses are the values observed at acceptance
    time.  Stops early when a zero loss is seen (error-free) if configured.

    Returns ``(best_position, best_loss, history)`` where history holds one
    (iteration, global best loss) pair per iteration, iteration 1 being the
    evaluation of the initial swarm.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(config.rng_seed)
    p = config.particles
    positions = rng.uniform(0.0, TWO_PI, (p, dim))
    velocities = rng.uniform(-config.velocity_clamp, config.velocity_clamp, (p, dim)) * 0.5

    def evaluate(x):
        value = float(loss(x))
        if not math.isfinite(value):
            raise RuntimeError(f"loss returned a non-finite value {value} at {x}")
        return value

    losses = np.array([evaluate(positions[i]) for i in range(p)])
    personal_best = positions.copy()
    personal_best_loss = losses.copy()
    g = int(np.argmin(personal_best_loss))
    global_best = personal_best[g].copy()
    global_best_loss = float(personal_best_loss[g])
    history = [(1, global_best_loss)]

    if config.stop_on_error_free and global_best_loss == 0.0:
        return global_best, global_best_loss, history

    for iteration in range(2, config.max_iters + 1):
        r1 = rng.uniform(size=(p, dim))
        r2 = rng.uniform(size=(p, dim))
        pull_personal = periodic_difference(personal_best, positions)
        pull_social = periodic_difference(global_best[None, :], positions)
        velocities = (config.inertia * velocities
                      + config.cognitive * r1 * pull_personal
                      + config.social * r2 * pull_social)
        np.clip(velocities, -config.velocity_clamp, config.velocity_clamp, out=velocities)
        positions = wrap_phase(positions + velocities)
        for i in range(p):
            value = evaluate(positions[i])
            if value < personal_best_loss[i]:
                personal_best[i] = positions[i]
                personal_best_loss[i] = value
                if value < global_best_loss:
                    global_best = positions[i].copy()
                    global_best_loss = value
        history.append((iteration, global_best_loss))
        if config.stop_on_error_free and global_best_loss == 0.0:
            break

    return global_best, global_best_loss, history


def ridge_fit(features: np.ndarray, targets: np.ndarray, lam: float) -> np.ndarray:
    """Ridge regression with an unregularized intercept.

    Minimizes ||X w + b - t||^2 + lam * ||w||^2 via the normal equations of
    the intercept-augmented system, solved with a Cholesky factorization
    (the system matrix is symmetric positive definite whenever lam > 0).
    Returns the F+1 coefficients with the intercept last.
    """
    x = np.asarray(features, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"features must be a non-empty 2-D matrix, got shape {x.shape}")
    if t.shape != (x.shape[0],):
        raise ValueError(f"targets shape {t.shape} does not match {x.shape[0]} rows")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    a = np.hstack([x, np.ones((x.shape[0], 1))])
    m = a.T @ a
    m[np.diag_indices(x.shape[1])] += lam  # intercept stays unregularized
    rhs = a.T @ t
    try:
        c, low = scipy.linalg.cho_factor(m)
        return scipy.linalg.cho_solve((c, low), rhs)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"normal equations are singular at lam={lam}; the feature matrix is "
            f"rank-deficient — use lam > 0"
        ) from exc


def ridge_predict(features: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """Apply ridge coefficients (intercept last) to a feature matrix."""
    x = np.asarray(features, dtype=np.float64)
    coef = np.asarray(coef, dtype=np.float64)
    return x @ coef[:-1] + coef[-1]
