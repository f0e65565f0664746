"""Validated SPD matrices, spectral calculus, and the trace-metric geometry.

Everything downstream (binary and n-matrix means, sampling experiments)
goes through the :class:`SpdMatrix` type and the handful of operations
here: spectral matrix functions, the affine-invariant Riemannian distance,
the weighted-geometric-mean geodesic, weighted arithmetic/harmonic means,
the Loewner order, and the S-divergence.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DefinitenessError, DomainError, NumericError, ShapeError

#: Default positive-definiteness threshold, relative to the spectral radius.
DEFAULT_PD_TOLERANCE = 1e-12


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


class SpdMatrix:
    """Immutable symmetric positive-definite matrix with a spectral cache.

    The constructor symmetrizes its input ((M + M^T)/2), validates
    positive definiteness (smallest eigenvalue must exceed
    ``pd_tolerance`` times the largest), and freezes the storage.  The
    eigendecomposition is computed lazily on first use and reused by all
    spectral operations; eigenvalues are kept in descending order.
    """

    __slots__ = ("_array", "_eig")

    def __init__(self, values, pd_tolerance: float = DEFAULT_PD_TOLERANCE):
        arr = np.array(values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ShapeError("matrix must have dimension >= 1")
        if not np.all(np.isfinite(arr)):
            raise DefinitenessError("matrix has non-finite entries")
        arr = _symmetrize(arr)
        try:
            eigenvalues = np.linalg.eigvalsh(arr)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"eigensolver failed during validation: {exc}") from exc
        lo, hi = float(eigenvalues[0]), float(eigenvalues[-1])
        if hi <= 0.0 or lo <= pd_tolerance * hi:
            raise DefinitenessError(
                f"matrix is not positive definite: min eigenvalue {lo:.6g}, "
                f"max eigenvalue {hi:.6g}",
                min_eigenvalue=lo,
            )
        arr.flags.writeable = False
        self._array = arr
        self._eig = None

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "SpdMatrix":
        """Wrap a matrix known SPD by construction (congruence, exp, sums
        of SPD terms), skipping the eigenvalue check.  Symmetrizes and
        freezes; internal use only."""
        out = object.__new__(cls)
        sym = _symmetrize(np.asarray(arr, dtype=float))
        sym.flags.writeable = False
        out._array = sym
        out._eig = None
        return out

    @property
    def array(self) -> np.ndarray:
        """Read-only dense storage."""
        return self._array

    @property
    def dimension(self) -> int:
        return self._array.shape[0]

    def eigen(self) -> tuple[np.ndarray, np.ndarray]:
        """Spectral cache: (eigenvalues descending, orthonormal eigenvectors).

        Computed once; redundant concurrent fills produce identical results,
        so no locking is needed.
        """
        if self._eig is None:
            try:
                lam, vecs = np.linalg.eigh(self._array)
            except np.linalg.LinAlgError as exc:
                raise NumericError(f"eigendecomposition failed: {exc}") from exc
            order = np.argsort(lam)[::-1]
            self._eig = (lam[order].copy(), vecs[:, order].copy())
        return self._eig

    def __repr__(self) -> str:
        return f"SpdMatrix(dimension={self.dimension})"

    def __array__(self, dtype=None, copy=None):
        if copy:
            return np.array(self._array, dtype=dtype, copy=True)
        return np.asarray(self._array, dtype=dtype)


class WeightVector:
    """Normalized nonnegative weights for weighted means and barycenters."""

    __slots__ = ("_values",)

    def __init__(self, weights):
        vals = np.asarray(weights, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise DomainError("weights must be a nonempty 1-D sequence")
        if np.any(vals < 0):
            raise DomainError("weights must be nonnegative")
        if abs(vals.sum() - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {vals.sum()!r}")
        vals = vals.copy()
        vals.flags.writeable = False
        self._values = vals

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        if n < 1:
            raise DomainError("need at least one weight")
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def pair(cls, t: float) -> "WeightVector":
        """The (1-t, t) weight pair of a geodesic parameter."""
        return cls([1.0 - t, t])

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size

    def __iter__(self):
        return iter(self._values)

    def __getitem__(self, i):
        return self._values[i]


def _check_same_dimension(*mats: SpdMatrix) -> int:
    d = mats[0].dimension
    for m in mats[1:]:
        if m.dimension != d:
            raise ShapeError(f"dimension mismatch: {d} vs {m.dimension}")
    return d


def matrix_function(P: SpdMatrix, f: Callable) -> np.ndarray:
    """Apply a scalar function to P through its symmetric eigendecomposition.

    Returns the symmetric matrix U diag(f(lambda_i)) U^T.  ``f`` should
    accept an ndarray of eigenvalues (numpy ufuncs do); plain scalar
    callables are applied elementwise as a fallback.  Raises DomainError
    if f is not finite on the spectrum.
    """
    lam, vecs = P.eigen()
    try:
        flam = np.asarray(f(lam), dtype=float)
        if flam.shape != lam.shape:
            raise ValueError
    except (TypeError, ValueError):
        flam = np.array([float(f(x)) for x in lam])
    if not np.all(np.isfinite(flam)):
        raise DomainError("function is not finite on the spectrum")
    return _symmetrize((vecs * flam) @ vecs.T)


def spd_inverse(P: SpdMatrix) -> SpdMatrix:
    return SpdMatrix._trusted(matrix_function(P, lambda x: 1.0 / x))


def sqrt_pair(P: SpdMatrix) -> tuple[np.ndarray, np.ndarray]:
    """(P^{1/2}, P^{-1/2}) from one decomposition of P."""
    lam, vecs = P.eigen()
    s = np.sqrt(lam)
    return _symmetrize((vecs * s) @ vecs.T), _symmetrize((vecs / s) @ vecs.T)


def riemannian_distance(P1: SpdMatrix, P2: SpdMatrix) -> float:
    """Geodesic distance of the trace metric on the SPD cone.

    rho(P1, P2) = || log(P1^{-1/2} P2 P1^{-1/2}) ||_F, evaluated as the
    root-sum-square of the logs of the whitened eigenvalues.
    """
    _check_same_dimension(P1, P2)
    _, risq = sqrt_pair(P1)
    whitened = _symmetrize(risq @ P2.array @ risq)
    lam = np.linalg.eigvalsh(whitened)
    if np.any(lam <= 0):
        raise NumericError("whitened matrix lost positive definiteness")
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def _power_sandwich(X: SpdMatrix, Y: SpdMatrix, t: float) -> SpdMatrix:
    """X^{1/2} (X^{-1/2} Y X^{-1/2})^t X^{1/2} without range checks on t."""
    rx, rxi = sqrt_pair(X)
    inner = _symmetrize(rxi @ Y.array @ rxi)
    lam, vecs = np.linalg.eigh(inner)
    if np.any(lam <= 0):
        raise NumericError("whitened matrix lost positive definiteness")
    powered = (vecs * np.power(lam, t)) @ vecs.T
    return SpdMatrix._trusted(rx @ _symmetrize(powered) @ rx)


def geodesic(X: SpdMatrix, Y: SpdMatrix, t: float) -> SpdMatrix:
    """Point at parameter t on the Riemannian geodesic from X to Y.

    This is the weighted matrix geometric mean with weights (1-t, t);
    t is arc length: rho(geodesic(X, Y, t), X) = t * rho(X, Y).
    Only the segment t in [0, 1] is supported.
    """
    _check_same_dimension(X, Y)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"geodesic parameter must lie in [0, 1], got {t}")
    if t == 0.0:
        return X
    if t == 1.0:
        return Y
    return _power_sandwich(X, Y, t)


def weighted_arithmetic(Ps: Sequence[SpdMatrix], w: WeightVector) -> SpdMatrix:
    """Weighted arithmetic matrix mean, sum of w_i P_i."""
    Ps = list(Ps)
    if len(Ps) != len(w):
        raise ShapeError(f"{len(Ps)} matrices but {len(w)} weights")
    _check_same_dimension(*Ps)
    acc = np.zeros_like(Ps[0].array)
    for wi, P in zip(w, Ps):
        acc = acc + wi * P.array
    return SpdMatrix._trusted(acc)


def weighted_harmonic(Ps: Sequence[SpdMatrix], w: WeightVector) -> SpdMatrix:
    """Weighted harmonic matrix mean, the inverse of the weighted mean of inverses."""
    Ps = list(Ps)
    if len(Ps) != len(w):
        raise ShapeError(f"{len(Ps)} matrices but {len(w)} weights")
    _check_same_dimension(*Ps)
    acc = np.zeros_like(Ps[0].array)
    for wi, P in zip(w, Ps):
        acc = acc + wi * matrix_function(P, lambda x: 1.0 / x)
    return spd_inverse(SpdMatrix._trusted(acc))


def loewner_leq(P: SpdMatrix, Q: SpdMatrix, tolerance: float = DEFAULT_PD_TOLERANCE) -> bool:
    """Loewner order test: P <= Q iff Q - P is positive semi-definite.

    Semi-definiteness is granted a slack of ``tolerance`` times the
    largest entry magnitude of the operands, so P <= P holds despite
    roundoff.
    """
    _check_same_dimension(P, Q)
    diff = Q.array - P.array
    scale = max(np.abs(P.array).max(), np.abs(Q.array).max())
    smallest = float(np.linalg.eigvalsh(_symmetrize(diff))[0])
    return smallest >= -tolerance * scale


def s_divergence(X: SpdMatrix, Y: SpdMatrix) -> float:
    """Symmetrized log-det (Stein) divergence.

    log det((X+Y)/2) - (log det X + log det Y)/2; nonnegative, symmetric,
    zero exactly on the diagonal X = Y.
    """
    _check_same_dimension(X, Y)
    sign, logdet_mid = np.linalg.slogdet(0.5 * (X.array + Y.array))
    if sign <= 0:
        raise NumericError("midpoint matrix lost positive definiteness")
    logdet_x = float(np.sum(np.log(X.eigen()[0])))
    logdet_y = float(np.sum(np.log(Y.eigen()[0])))
    return float(logdet_mid - 0.5 * (logdet_x + logdet_y))
