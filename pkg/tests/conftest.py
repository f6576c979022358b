"""Shared fixtures and independent brute-force oracles.

The oracles deliberately avoid the package's enumeration kernels: sign
and subset maxima are recomputed with itertools over full {+-1}^m and
powerset ranges, and operator norms come straight from SVD, so kernel
results are checked against an implementation with no shared code.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

import qpmetrics
from qpmetrics import QPM, Channel, InputSpace, finite_space, input_space

# Library class, not a test suite — keep pytest from trying to collect it.
qpmetrics.TestFunction.__test__ = False


def qpm_of(effects, dim=None) -> QPM:
    arr = np.asarray(effects, dtype=np.complex128)
    d = arr.shape[-1] if dim is None else dim
    return QPM(finite_space(arr.shape[0]), d, arr)


def classical(*weights) -> QPM:
    """d=1 measure from a probability vector."""
    arr = np.asarray(weights, dtype=np.complex128).reshape(-1, 1, 1)
    return QPM(finite_space(arr.shape[0]), 1, arr)


@pytest.fixture(scope="session")
def z_pair() -> QPM:
    return qpm_of([[[1, 0], [0, 0]], [[0, 0], [0, 1]]])


@pytest.fixture(scope="session")
def x_pair() -> QPM:
    return qpm_of([[[0.5, 0.5], [0.5, 0.5]], [[0.5, -0.5], [-0.5, 0.5]]])


@pytest.fixture(scope="session")
def trine() -> QPM:
    angles = [0.0, 2 * np.pi / 3, 4 * np.pi / 3]
    effects = [
        (2 / 3) * np.outer([np.cos(t), np.sin(t)], [np.cos(t), np.sin(t)])
        for t in angles
    ]
    return qpm_of(np.asarray(effects, dtype=np.complex128))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    G = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_spectral_qpm(d: int, m: int, seed: int) -> QPM:
    """Projection-valued measure: a seeded unitary's columns grouped
    into m nonempty blocks (requires m <= d)."""
    assert m <= d
    rng = np.random.default_rng(seed)
    U = haar_unitary(d, rng)
    splits = sorted(rng.choice(np.arange(1, d), size=m - 1, replace=False)) if m > 1 else []
    bounds = [0, *splits, d]
    effects = []
    for a in range(m):
        cols = U[:, bounds[a]:bounds[a + 1]]
        effects.append(cols @ cols.conj().T)
    return qpm_of(np.asarray(effects))


def opnorm(M) -> float:
    return float(np.linalg.svd(np.asarray(M, dtype=np.complex128), compute_uv=False)[0])


def brute_force_rho(E: QPM, F: QPM) -> float:
    D = E.effects - F.effects
    best = 0.0
    for signs in itertools.product((1, -1), repeat=E.n_atoms):
        best = max(best, opnorm(sum(s * Da for s, Da in zip(signs, D))))
    return best


def brute_force_delta(E: QPM, F: QPM) -> float:
    D = E.effects - F.effects
    m = E.n_atoms
    best = 0.0
    for r in range(1, m):
        for subset in itertools.combinations(range(m), r):
            M = sum(D[a] for a in subset)
            best = max(best, float(np.max(np.linalg.eigvalsh(M))))
    return best


def channel_from_qpms(qpms) -> Channel:
    head = qpms[0]
    fam = np.stack([E.effects for E in qpms])
    return Channel(input_space(len(qpms)), head.space, head.dim, fam)


@pytest.fixture(scope="session")
def two_point_inputs() -> InputSpace:
    return input_space(2)
