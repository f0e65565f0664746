"""Shared helpers: seeded random SPD matrices and exact-radius perturbations."""

from __future__ import annotations

import numpy as np
import pytest

from spdmeans import SpdMatrix
from spdmeans.spd_core import _symmetrize, sqrt_pair


def random_spd(rng: np.random.Generator, d: int, spread: float = 1.0) -> SpdMatrix:
    """Random SPD matrix with log-eigenvalues uniform in [-spread, spread]."""
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    lam = np.exp(rng.uniform(-spread, spread, size=d))
    return SpdMatrix((q * lam) @ q.T)


def random_invertible(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random well-conditioned invertible matrix."""
    while True:
        a = rng.normal(size=(d, d)) + 0.5 * np.eye(d)
        if np.linalg.cond(a) < 50:
            return a


def perturb_spd(P: SpdMatrix, radius: float, rng: np.random.Generator) -> SpdMatrix:
    """Point at exact Riemannian distance ``radius`` from P, random direction."""
    d = P.dimension
    s = _symmetrize(rng.normal(size=(d, d)))
    s *= radius / np.linalg.norm(s)
    rm, _ = sqrt_pair(P)
    lam, vecs = np.linalg.eigh(s)
    return SpdMatrix(rm @ ((vecs * np.exp(lam)) @ vecs.T) @ rm)


def psd_decrement(P: SpdMatrix, rng: np.random.Generator, frac: float = 0.3) -> SpdMatrix:
    """A matrix P' with P' <= P in the Loewner order, still comfortably PD."""
    d = P.dimension
    v = rng.normal(size=d)
    v /= np.linalg.norm(v)
    eps = frac * float(np.min(np.linalg.eigvalsh(P.array))) * float(rng.uniform(0.1, 1.0))
    return SpdMatrix(P.array - eps * np.outer(v, v))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


#: One line per acceptance criterion, filled by tests/test_acceptance.py.
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
