"""Two-matrix means on the SPD cone.

The inductive arithmetic-harmonic iteration converges quadratically to the
Riemannian geometric mean, whose closed form doubles as the oracle for it.
Alongside: the log-Euclidean mean, the quasi-arithmetic power family Q_p,
and the fixed-point power mean M_p with its closed form and a Picard
solver cross-validating it.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .convergence import ConvergenceTrace, TraceRecorder
from .errors import DomainError, NonConvergenceError
from .spd_core import (
    SpdMatrix,
    WeightVector,
    _power_sandwich,
    _symmetrize,
    geodesic,
    matrix_function,
    riemannian_distance,
    spd_inverse,
    weighted_arithmetic,
)

AHM_DEFAULT_TOLERANCE = 1e-12
AHM_DEFAULT_MAX_ITERATIONS = 64

#: Noise floor for order estimation on Riemannian-distance error proxies.
MATRIX_ORDER_FLOOR = 1e-13

#: Below this |p| the Q_p family evaluates its log-Euclidean limit branch.
Q_POWER_P_CUTOFF = 1e-8

PICARD_DEFAULT_TOLERANCE = 1e-12
PICARD_DEFAULT_MAX_ITERATIONS = 200


def ahm_iteration(X: SpdMatrix, Y: SpdMatrix, tol: float = AHM_DEFAULT_TOLERANCE,
                  max_iter: int = AHM_DEFAULT_MAX_ITERATIONS) -> tuple[SpdMatrix, ConvergenceTrace]:
    """Matrix arithmetic-harmonic double sequence.

    A_{t+1} = (A_t + H_t)/2, H_{t+1} = 2 (A_t^{-1} + H_t^{-1})^{-1},
    started at (X, Y); stops when the Riemannian gap rho(A_t, H_t)
    reaches ``tol``.  The common limit is the geometric mean G(X, Y).
    """
    half = WeightVector.uniform(2)
    A, H = X, Y
    recorder = TraceRecorder(order_floor=MATRIX_ORDER_FLOOR)
    gap = riemannian_distance(A, H)
    recorder.record(0, A.array, gap)
    t = 0
    while gap > tol:
        if t >= max_iter:
            raise NonConvergenceError(
                f"matrix AHM failed to reach {tol} within {max_iter} iterations",
                trace=recorder.build(converged=False, iterations_used=t),
            )
        A, H = (
            weighted_arithmetic([A, H], half),
            spd_inverse(weighted_arithmetic([spd_inverse(A), spd_inverse(H)], half)),
        )
        t += 1
        gap = riemannian_distance(A, H)
        recorder.record(t, A.array, gap)
    limit = SpdMatrix._trusted(0.5 * (A.array + H.array))
    return limit, recorder.build(converged=True, iterations_used=t)


def geometric_mean_closed_form(X: SpdMatrix, Y: SpdMatrix) -> SpdMatrix:
    """Riemannian geometric mean X^{1/2} (X^{-1/2} Y X^{-1/2})^{1/2} X^{1/2}.

    Equals the geodesic midpoint, solves the Riccati equation
    G X^{-1} G = Y, is inversion invariant, and has determinant
    sqrt(det X det Y).
    """
    return geodesic(X, Y, 0.5)


def log_euclidean_mean(Ps: Sequence[SpdMatrix], w: WeightVector) -> SpdMatrix:
    """Weighted log-Euclidean mean exp(sum_i w_i log P_i).

    Agrees with the weighted geometric mean on commuting inputs but
    differs from G(X, Y) in general.
    """
    Ps = list(Ps)
    if len(Ps) != len(w):
        raise DomainError(f"{len(Ps)} matrices but {len(w)} weights")
    acc = np.zeros_like(Ps[0].array)
    for wi, P in zip(w, Ps):
        acc = acc + wi * matrix_function(P, np.log)
    lam, vecs = np.linalg.eigh(_symmetrize(acc))
    return SpdMatrix._trusted((vecs * np.exp(lam)) @ vecs.T)


def q_power_mean(X: SpdMatrix, Y: SpdMatrix, p: float) -> SpdMatrix:
    """Quasi-arithmetic matrix power mean Q_p(X, Y) = ((X^p + Y^p)/2)^{1/p}.

    Q_1 is the arithmetic mean, Q_{-1} the harmonic mean, and the p -> 0
    limit is the log-Euclidean mean, used directly when |p| falls below
    ``Q_POWER_P_CUTOFF``.
    """
    if not np.isfinite(p):
        raise DomainError(f"power must be finite, got {p!r}")
    if abs(p) < Q_POWER_P_CUTOFF:
        return log_euclidean_mean([X, Y], WeightVector.uniform(2))
    xp = matrix_function(X, lambda lam: np.power(lam, p))
    yp = matrix_function(Y, lambda lam: np.power(lam, p))
    lam, vecs = np.linalg.eigh(_symmetrize(0.5 * (xp + yp)))
    return SpdMatrix._trusted((vecs * np.power(lam, 1.0 / p)) @ vecs.T)


def lim_palfia_power_mean(X: SpdMatrix, Y: SpdMatrix, p: float) -> SpdMatrix:
    """Matrix power mean M_p(X, Y), p in (0, 1].

    M_p is the unique SPD solution of M = (1/2) M #_p X + (1/2) M #_p Y,
    computed here by the closed form M_p = X #_{1/p} ((X + X #_p Y)/2);
    p = 1 returns the arithmetic mean, which the equation then reads
    directly.
    """
    if not 0.0 < p <= 1.0:
        raise DomainError(f"power mean parameter must lie in (0, 1], got {p!r}")
    if p == 1.0:
        return weighted_arithmetic([X, Y], WeightVector.uniform(2))
    inner = weighted_arithmetic([X, geodesic(X, Y, p)], WeightVector.uniform(2))
    return _power_sandwich(X, inner, 1.0 / p)


def power_mean_fixed_point_residual(M: SpdMatrix, X: SpdMatrix, Y: SpdMatrix, p: float) -> float:
    """Relative Frobenius residual of M - (M #_p X + M #_p Y)/2."""
    rhs = 0.5 * (geodesic(M, X, p).array + geodesic(M, Y, p).array)
    return float(np.linalg.norm(M.array - rhs) / np.linalg.norm(M.array))


def lim_palfia_power_mean_picard(
    X: SpdMatrix, Y: SpdMatrix, p: float,
    tol: float = PICARD_DEFAULT_TOLERANCE,
    max_iter: int = PICARD_DEFAULT_MAX_ITERATIONS,
) -> tuple[SpdMatrix, ConvergenceTrace]:
    """Undamped Picard solver for the power-mean fixed-point equation.

    Starts at the arithmetic mean and iterates
    M <- (M #_p X + M #_p Y)/2 until the relative Frobenius step falls
    below ``tol``.  Serves as an independent check of the closed form;
    the contraction slows as p -> 0, so small p may exhaust the cap.
    """
    if not 0.0 < p <= 1.0:
        raise DomainError(f"power mean parameter must lie in (0, 1], got {p!r}")
    M = weighted_arithmetic([X, Y], WeightVector.uniform(2))
    recorder = TraceRecorder(order_floor=MATRIX_ORDER_FLOOR)
    for t in range(1, max_iter + 1):
        nxt = SpdMatrix._trusted(0.5 * (geodesic(M, X, p).array + geodesic(M, Y, p).array))
        step = float(np.linalg.norm(nxt.array - M.array) / np.linalg.norm(nxt.array))
        recorder.record(t, None, step)
        M = nxt
        if step <= tol:
            return M, recorder.build(converged=True, iterations_used=t)
    raise NonConvergenceError(
        f"Picard iteration for p={p} failed to reach {tol} within {max_iter} steps",
        trace=recorder.build(converged=False, iterations_used=max_iter),
    )


def power_mean_limit_study(X: SpdMatrix, Y: SpdMatrix,
                           p_grid: Sequence[float]) -> list[tuple[float, float]]:
    """Distances rho(M_p(X, Y), G(X, Y)) along a decreasing grid of p.

    The grid must be strictly decreasing within (0, 1]; as p -> 0+ the
    power mean approaches the geometric mean, so the distances shrink
    toward zero.
    """
    grid = [float(p) for p in p_grid]
    if not grid:
        raise DomainError("p_grid must be nonempty")
    if any(not 0.0 < p <= 1.0 for p in grid):
        raise DomainError("p_grid values must lie in (0, 1]")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise DomainError("p_grid must be strictly decreasing")
    G = geometric_mean_closed_form(X, Y)
    return [(p, riemannian_distance(lim_palfia_power_mean(X, Y, p), G)) for p in grid]
