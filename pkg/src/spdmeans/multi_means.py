"""Means, circumcenters, and medians of n SPD matrices by inductive schemes.

The cyclic geodesic-walk approximation of the Karcher mean, a fixed-point
refiner driving the Karcher equation residual to tolerance (the oracle
for everything else here), the farthest-point circumcenter iteration, the
cyclic proximal-point median, and the recursive two-parameter-family
geometric means (ALM and BMP tuples built in).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .convergence import ConvergenceTrace, TraceRecorder
from .errors import DomainError, NonConvergenceError, ShapeError
from .spd_core import (
    SpdMatrix,
    WeightVector,
    _symmetrize,
    geodesic,
    matrix_function,
    riemannian_distance,
    sqrt_pair,
)

KARCHER_REFINE_MAX_ITERATIONS = 500
CIRCUMCENTER_DEFAULT_STEPS = 10_000
MEDIAN_DEFAULT_SWEEPS = 1_000
MEDIAN_DISTANCE_GUARD = 1e-14
RECURSIVE_DEFAULT_MAX_ROUNDS = 100

#: Noise floor for order estimation on spread/objective error proxies.
MATRIX_ORDER_FLOOR = 1e-13


@dataclass(frozen=True)
class MatrixTuple:
    """Nonempty tuple of SPD matrices sharing one dimension."""

    matrices: tuple[SpdMatrix, ...]

    def __post_init__(self):
        if len(self.matrices) < 1:
            raise DomainError("need at least one matrix")
        d = self.matrices[0].dimension
        for i, m in enumerate(self.matrices):
            if m.dimension != d:
                raise ShapeError(
                    f"matrix {i} has dimension {m.dimension}, expected {d}"
                )

    @property
    def dimension(self) -> int:
        return self.matrices[0].dimension

    def __len__(self) -> int:
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i) -> SpdMatrix:
        return self.matrices[i]


def as_matrix_tuple(Ps) -> MatrixTuple:
    if isinstance(Ps, MatrixTuple):
        return Ps
    return MatrixTuple(tuple(Ps))


@dataclass(frozen=True)
class RecursiveMeanParams:
    """(n-1)-tuple of geodesic parameters for the recursive geometric means."""

    s_tuple: tuple[float, ...]

    def __post_init__(self):
        if len(self.s_tuple) < 1:
            raise DomainError("parameter tuple must be nonempty")
        for s in self.s_tuple:
            if not 0.0 < s <= 1.0:
                raise DomainError(f"recursive mean parameters must lie in (0, 1], got {s!r}")

    @classmethod
    def bmp(cls, n: int) -> "RecursiveMeanParams":
        """((n-1)/n, (n-2)/(n-1), ..., 1/2): the cubically convergent tuple."""
        if n < 2:
            raise DomainError("need at least two matrices")
        return cls(tuple((n - k) / (n - k + 1) for k in range(1, n)))

    @classmethod
    def alm(cls, n: int) -> "RecursiveMeanParams":
        """(1, 1, ..., 1, 1/2): the Ando-Li-Mathias tuple (linear convergence)."""
        if n < 2:
            raise DomainError("need at least two matrices")
        return cls(tuple([1.0] * (n - 2) + [0.5]))


# ---------------------------------------------------------------------------
# Karcher mean machinery
# ---------------------------------------------------------------------------

def _weighted_log_sum(G: SpdMatrix, Ps: MatrixTuple, weights: np.ndarray) -> np.ndarray:
    """Weighted sum of the whitened logs log(G^{-1/2} P_i G^{-1/2})."""
    _, risq = sqrt_pair(G)
    acc = np.zeros_like(G.array)
    for w, P in zip(weights, Ps):
        acc = acc + w * matrix_function(SpdMatrix._trusted(risq @ P.array @ risq), np.log)
    return acc


def karcher_residual(G: SpdMatrix, Ps) -> float:
    """Karcher-equation residual || sum_i log(G^{-1/2} P_i G^{-1/2}) ||_F / n.

    Vanishes exactly when G is the Karcher (Riemannian least-squares)
    mean of the tuple.
    """
    Ps = as_matrix_tuple(Ps)
    if G.dimension != Ps.dimension:
        raise ShapeError(f"dimension mismatch: {G.dimension} vs {Ps.dimension}")
    n = len(Ps)
    acc = _weighted_log_sum(G, Ps, np.ones(n))
    return float(np.linalg.norm(acc) / n)


def karcher_refine(G0: SpdMatrix, Ps, w: WeightVector | None = None,
                   tol: float = 1e-10,
                   max_iter: int = KARCHER_REFINE_MAX_ITERATIONS) -> tuple[SpdMatrix, ConvergenceTrace]:
    """Fixed-point sharpening of the weighted Karcher mean.

    Iterates G <- G^{1/2} exp(sum_i w_i log(G^{-1/2} P_i G^{-1/2})) G^{1/2}
    from ``G0`` until the weighted residual (Frobenius norm of the iterated
    tangent average) falls below ``tol``.  With weights (1-t, t) on two
    matrices this lands on the geodesic point X #_t Y.
    """
    Ps = as_matrix_tuple(Ps)
    if G0.dimension != Ps.dimension:
        raise ShapeError(f"dimension mismatch: {G0.dimension} vs {Ps.dimension}")
    if w is None:
        w = WeightVector.uniform(len(Ps))
    if len(w) != len(Ps):
        raise DomainError(f"{len(Ps)} matrices but {len(w)} weights")
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    weights = w.values
    G = G0
    recorder = TraceRecorder(order_floor=MATRIX_ORDER_FLOOR)
    for t in range(1, max_iter + 1):
        tangent = _weighted_log_sum(G, Ps, weights)
        residual = float(np.linalg.norm(tangent))
        recorder.record(t, G.array, residual)
        if residual <= tol:
            return G, recorder.build(converged=True, iterations_used=t - 1)
        rg, _ = sqrt_pair(G)
        lam, vecs = np.linalg.eigh(_symmetrize(tangent))
        step = (vecs * np.exp(lam)) @ vecs.T
        G = SpdMatrix._trusted(rg @ _symmetrize(step) @ rg)
    raise NonConvergenceError(
        f"Karcher refinement failed to reach {tol} within {max_iter} iterations",
        trace=recorder.build(converged=False, iterations_used=max_iter),
    )


def holbrook_inductive_mean(Ps, steps: int) -> tuple[SpdMatrix, ConvergenceTrace]:
    """Cyclic inductive approximation of the n-matrix geometric mean.

    M_1 = P_1 and M_{t+1} = M_t #_{1/(t+1)} P_{cycle(t)}, visiting
    P_2, P_3, ..., P_n, P_1, ... after initialization.  Convergence to
    the Karcher mean is slow (the step sizes decay like 1/t), so the
    trace records the Karcher residual every n steps for monitoring
    rather than a stopping rule.
    """
    Ps = as_matrix_tuple(Ps)
    n = len(Ps)
    if n == 1:
        recorder = TraceRecorder(order_floor=MATRIX_ORDER_FLOOR)
        recorder.record(0, Ps[0].array, 0.0)
        return Ps[0], recorder.build(converged=True, iterations_used=0)
    if steps < n:
        raise DomainError(f"need at least n={n} steps, got {steps}")
    M = Ps[0]
    recorder = TraceRecorder(order_floor=MATRIX_ORDER_FLOOR)
    for t in range(1, steps + 1):
        M = geodesic(M, Ps[t % n], 1.0 / (t + 1))
        if t % n == 0:
            recorder.record(t, None, karcher_residual(M, Ps))
    return M, recorder.build(converged=True, iterations_used=steps)


# ---------------------------------------------------------------------------
# Circumcenter and median
# ---------------------------------------------------------------------------

def riemannian_circumcenter(Ps, steps: int = CIRCUMCENTER_DEFAULT_STEPS) -> tuple[SpdMatrix, ConvergenceTrace]:
    """Minimax center by farthest-point geodesic steps.

    C_1 = P_1 and C_{t+1} = C_t #_{1/(t+1)} P_f where P_f is the matrix
    farthest from C_t (lowest index on ties).  The trace records the
    covering radius max_i rho(C_t, P_i) each step; it is nonincreasing
    in the limit, not per step.
    """
    Ps = as_matrix_tuple(Ps)
    if steps < 1:
        raise DomainError(f"need at least 1 step, got {steps}")
    C = Ps[0]
    recorder = TraceRecorder(order_floor=MATRIX_ORDER_FLOOR)
    if len(Ps) == 1:
        recorder.record(0, C.array, 0.0)
        return C, recorder.build(converged=True, iterations_used=0)
    for t in range(1, steps + 1):
        distances = [riemannian_distance(C, P) for P in Ps]
        far = int(np.argmax(distances))
        recorder.record(t - 1, None, max(distances))
        C = geodesic(C, Ps[far], 1.0 / (t + 1))
    distances = [riemannian_distance(C, P) for P in Ps]
    recorder.record(steps, None, max(distances))
    return C, recorder.build(converged=True, iterations_used=steps)


def _default_lambda_schedule(k: int) -> float:
    return 1.0 / (k + 1)


def bacak_median(Ps, lambda_schedule: Callable[[int], float] | Sequence[float] | None = None,
                 sweeps: int = MEDIAN_DEFAULT_SWEEPS) -> tuple[SpdMatrix, ConvergenceTrace]:
    """Riemannian median by the cyclic proximal-point scheme.

    Sweep k walks once through the inputs, stepping from the current
    iterate toward P_i by t = min(1, lambda_k / (n rho(P_i, X))); steps
    toward a point the iterate already sits on (rho below 1e-14) are
    skipped.  The schedule must satisfy sum lambda_k = inf and
    sum lambda_k^2 < inf (default lambda_k = 1/(k+1)).  The trace records
    the median objective (1/n) sum_i rho(X, P_i) after each sweep.
    """
    Ps = as_matrix_tuple(Ps)
    if sweeps < 1:
        raise DomainError(f"need at least 1 sweep, got {sweeps}")
    if lambda_schedule is None:
        schedule = _default_lambda_schedule
    elif callable(lambda_schedule):
        schedule = lambda_schedule
    else:
        values = [float(v) for v in lambda_schedule]
        if len(values) < sweeps:
            raise DomainError(f"schedule has {len(values)} entries but {sweeps} sweeps requested")
        schedule = lambda k: values[k]
    n = len(Ps)
    X = Ps[0]
    recorder = TraceRecorder(order_floor=MATRIX_ORDER_FLOOR)
    for k in range(sweeps):
        lam = float(schedule(k))
        if lam <= 0:
            raise DomainError(f"lambda schedule must be positive, got {lam} at sweep {k}")
        for P in Ps:
            dist = riemannian_distance(P, X)
            if dist < MEDIAN_DISTANCE_GUARD:
                continue
            X = geodesic(X, P, min(1.0, lam / (n * dist)))
        objective = sum(riemannian_distance(X, P) for P in Ps) / n
        recorder.record(k + 1, None, objective)
    return X, recorder.build(converged=True, iterations_used=sweeps)


# ---------------------------------------------------------------------------
# Recursive geometric means (ALM / BMP family)
# ---------------------------------------------------------------------------

def _max_pairwise_distance(mats: Sequence[SpdMatrix]) -> float:
    worst = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            worst = max(worst, riemannian_distance(mats[i], mats[j]))
    return worst


#: A stagnated recursive-mean iteration is accepted as numerically converged
#: only below this spread; above it, stagnation raises NonConvergenceError.
_STAGNATION_SPREAD_BOUND = 1e-6


def _recursive_mean(mats: tuple[SpdMatrix, ...], s_tuple: tuple[float, ...], tol: float,
                    max_rounds: int, recorder: TraceRecorder | None,
                    accept_stagnation: bool = False) -> tuple[SpdMatrix, int]:
    n = len(mats)
    if n == 1:
        return mats[0], 0
    spread = _max_pairwise_distance(mats)
    if recorder is not None:
        recorder.record(0, None, spread)
    rounds = 0
    stalls = 0
    current = mats
    while spread > tol:
        if rounds >= max_rounds:
            raise NonConvergenceError(
                f"recursive geometric mean failed to reach {tol} within {max_rounds} rounds",
                trace=recorder.build(converged=False, iterations_used=rounds)
                if recorder is not None else None,
            )
        if n == 2:
            current = (
                geodesic(current[0], current[1], s_tuple[0]),
                geodesic(current[1], current[0], s_tuple[0]),
            )
        else:
            # Inner means run at a tighter tolerance so their error does not
            # contaminate the outer spread sequence near its own tolerance.
            inner_tol = max(1e-2 * tol, 1e-14)
            partners = [
                _recursive_mean(current[:i] + current[i + 1:], s_tuple[1:], inner_tol,
                                max_rounds, None, accept_stagnation=True)[0]
                for i in range(n)
            ]
            current = tuple(
                geodesic(current[i], partners[i], s_tuple[0]) for i in range(n)
            )
        rounds += 1
        previous, spread = spread, _max_pairwise_distance(current)
        if recorder is not None:
            recorder.record(rounds, None, spread)
        # Roundoff floors the spread before very tight tolerances are met;
        # detect the stall instead of burning the whole round budget.
        stalls = stalls + 1 if spread >= 0.99 * previous else 0
        if stalls >= 2 and spread > tol:
            if accept_stagnation and spread < _STAGNATION_SPREAD_BOUND:
                break
            raise NonConvergenceError(
                f"recursive geometric mean stagnated at spread {spread:.3e} "
                f"above tolerance {tol}",
                trace=recorder.build(converged=False, iterations_used=rounds)
                if recorder is not None else None,
            )
    return current[0], rounds


def recursive_geometric_mean(Ps, params: RecursiveMeanParams,
                             tol: float = 1e-12,
                             max_rounds: int = RECURSIVE_DEFAULT_MAX_ROUNDS) -> tuple[SpdMatrix, ConvergenceTrace]:
    """Recursive geometric matrix mean parameterized by an (n-1)-tuple.

    Each round replaces P_i by P_i #_{s_1} G_{s_2, ...}(all others),
    stopping when the maximum pairwise distance of the n sequences falls
    below ``tol``; the n = 2 base case is the symmetric two-sequence
    geodesic iteration, which is the midpoint in one round at s_1 = 1/2.
    The BMP tuple converges cubically, the ALM tuple linearly; the trace
    records the spread per round for order estimation.
    """
    Ps = as_matrix_tuple(Ps)
    n = len(Ps)
    if n < 2:
        raise DomainError("recursive geometric mean needs at least two matrices")
    if len(params.s_tuple) != n - 1:
        raise DomainError(
            f"parameter tuple has {len(params.s_tuple)} entries, need {n - 1}"
        )
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    recorder = TraceRecorder(order_floor=MATRIX_ORDER_FLOOR)
    limit, rounds = _recursive_mean(tuple(Ps), params.s_tuple, tol, max_rounds, recorder)
    return limit, recorder.build(converged=True, iterations_used=rounds)
