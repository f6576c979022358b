"""Spectral measures, Naimark dilations, and the Bures-type distance.

``naimark_dilate`` realizes a measure ``E`` as ``E(a) = V* F(a) V``
with ``F`` projection-valued on a larger space and ``V`` an isometry;
the minimal variant compresses the environment to the span actually
reached.  ``bures_distance`` brackets the dilation-based distance
between two measures: the lower end is ``rho/2``, the upper end is the
best value of ``sqrt(2 - 2 lambda_min(Herm(sum_a S_a C_a T_a)))`` over
per-atom gauge blocks ``C_a`` (alternating polar maximization with
seeded restarts), where ``S_a, T_a`` are the effect square roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import InvalidArgumentError, InvariantViolationError, ShapeError
from .operators import (
    ISOMETRY_TOL,
    RECONSTRUCTION_TOL,
    dagger,
    hermitize,
    operator_norm,
    sqrt_psd,
)
from .qpm import QPM, _require_same_shape, _require_valid, rho_distance, validate_qpm

_SPECTRAL_TOL = 1e-9
_PIVOT_TOL = 1e-10
_BRACKET_SLACK = 1e-7


# ---------------------------------------------------------------------------
# Spectral measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    ok: bool
    idempotency_residual: float
    orthogonality_residual: float


def is_spectral(E: QPM) -> SpectralReport:
    """Check that every effect is a projection and distinct effects are
    mutually orthogonal."""
    eff = E.effects
    idem = max(operator_norm(P @ P - P) for P in eff)
    ortho = 0.0
    for i in range(len(eff)):
        for j in range(i + 1, len(eff)):
            ortho = max(ortho, operator_norm(eff[i] @ eff[j]))
    ok = idem <= _SPECTRAL_TOL and ortho <= _SPECTRAL_TOL
    return SpectralReport(ok, float(idem), float(ortho))


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """A projection-valued measure; wraps a QPM and enforces the
    projection and orthogonality residual bounds at construction."""

    underlying: QPM

    def __post_init__(self):
        report = is_spectral(self.underlying)
        if not report.ok:
            raise InvariantViolationError(
                "not a spectral measure: idempotency residual "
                f"{report.idempotency_residual:.3e}, orthogonality residual "
                f"{report.orthogonality_residual:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.underlying.dim

    @property
    def effects(self) -> np.ndarray:
        return self.underlying.effects


# ---------------------------------------------------------------------------
# Naimark dilation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DilationTriple:
    """Environment dimension, projection-valued measure on it, and the
    intertwining isometry (shape ``(env_dim, dim)``)."""

    env_dim: int
    spectral: SpectralMeasure
    isometry: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.isometry, dtype=np.complex128)
        if V.shape != (self.env_dim, V.shape[1]) or self.spectral.dim != self.env_dim:
            raise ShapeError("isometry/spectral shapes inconsistent with env_dim")
        res = operator_norm(dagger(V) @ V - np.eye(V.shape[1]))
        if res > ISOMETRY_TOL:
            raise InvariantViolationError(f"V is not an isometry: residual {res:.3e}")
        V.setflags(write=False)
        object.__setattr__(self, "isometry", V)


def _range_basis(R: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column range, columns picked in index
    order with pivot tolerance ``_PIVOT_TOL`` (two-pass Gram-Schmidt)."""
    d = R.shape[0]
    kept: list[np.ndarray] = []
    scale = max(1.0, float(np.linalg.norm(R)))
    for j in range(R.shape[1]):
        v = R[:, j].astype(np.complex128)
        for _ in range(2):
            for u in kept:
                v = v - u * np.vdot(u, v)
        norm = float(np.linalg.norm(v))
        if norm > _PIVOT_TOL * scale:
            kept.append(v / norm)
    if not kept:
        return np.zeros((d, 0), dtype=np.complex128)
    return np.column_stack(kept)


def naimark_dilate(E: QPM, minimal: bool = False) -> DilationTriple:
    """Construct a dilation of a valid measure.

    Non-minimal form: environment ``C^m (x) C^dim``, block-diagonal
    reference projections, ``V`` the stack of effect square roots.
    Minimal form: each block is compressed to the range of its square
    root, so ``env_dim = sum_a rank E(a) <= m * dim`` (and ``= dim``
    with ``V`` unitary when ``E`` is already projection-valued).
    """
    _require_valid(E, "cannot dilate an invalid measure")
    m, d = E.n_atoms, E.dim
    roots = [sqrt_psd(Ea) for Ea in E.effects]
    if not minimal:
        K = m * d
        blocks = [(a * d, d) for a in range(m)]
        V = np.concatenate(roots, axis=0)
    else:
        # Rank detection runs on the effects, not their roots: a root
        # turns an eps-size spurious eigenvalue into a sqrt(eps)-size
        # column, while range(E(a)) = range(root) holds exactly.
        bases = [_range_basis(Ea) for Ea in E.effects]
        ranks = [B.shape[1] for B in bases]
        K = int(sum(ranks))
        offs = np.concatenate([[0], np.cumsum(ranks)]).astype(int)
        blocks = [(int(offs[a]), ranks[a]) for a in range(m)]
        V = np.concatenate([dagger(bases[a]) @ roots[a] for a in range(m)], axis=0)
    F = np.zeros((m, K, K), dtype=np.complex128)
    for a, (off, size) in enumerate(blocks):
        F[a, off:off + size, off:off + size] = np.eye(size)
    spectral = SpectralMeasure(QPM(E.space, K, F))
    triple = DilationTriple(K, spectral, V)
    res = dilation_residual(E, spectral, triple.isometry)
    if res > RECONSTRUCTION_TOL:
        raise InvariantViolationError(f"dilation reconstruction residual {res:.3e}")
    return triple


def dilation_residual(E: QPM, F: SpectralMeasure | QPM, V) -> float:
    """Membership test for the dilation relation:
    ``max_a ||V* F(a) V - E(a)||`` (zero certifies that V intertwines)."""
    Fq = F.underlying if isinstance(F, SpectralMeasure) else F
    if Fq.space != E.space:
        raise ShapeError("dilation candidate lives on a different outcome space")
    V = np.asarray(V, dtype=np.complex128)
    if V.shape != (Fq.dim, E.dim):
        raise ShapeError(f"isometry must be {(Fq.dim, E.dim)}, got {V.shape}")
    Vd = dagger(V)
    return max(operator_norm(Vd @ Fa @ V - Ea) for Fa, Ea in zip(Fq.effects, E.effects))


# ---------------------------------------------------------------------------
# Bures-type distance
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BuresResult:
    """Bracket for the dilation-based distance.

    ``lower = rho/2``; ``upper`` is attained by the reported gauges, so
    ``lower <= upper`` always (enforced with 1e-7 slack).  The
    complementary bound ``upper <= sqrt(rho)`` is asserted by
    :func:`naimark_continuity_check` and the test suite.
    """

    lower: float
    upper: float
    gauges: tuple[np.ndarray, ...]
    restarts_used: int
    converged: bool

    def __post_init__(self):
        if self.lower > self.upper + _BRACKET_SLACK:
            raise InvariantViolationError(
                f"bracket inverted: lower {self.lower:.9g} > upper {self.upper:.9g}"
            )


def _polar_unitary(X: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition X = U P."""
    W, _, Vh = np.linalg.svd(X)
    return W @ Vh


def _haar_unitary(rng: np.random.Generator, k: int) -> np.ndarray:
    Z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R).copy()
    diag[diag == 0] = 1.0
    return Q * (diag / np.abs(diag))


def _closed_form_upper(E1: QPM, E2: QPM) -> float:
    p = np.clip(np.real(E1.effects[:, 0, 0]), 0.0, None)
    q = np.clip(np.real(E2.effects[:, 0, 0]), 0.0, None)
    return sqrt(max(0.0, 2.0 - 2.0 * float(np.sum(np.sqrt(p * q)))))


def bures_distance(
    E1: QPM,
    E2: QPM,
    restarts: int = 64,
    max_iterations: int = 500,
    env_multiplicity: int = 1,
    seed: int = 0,
    improvement_tol: float = 1e-9,
    use_closed_form: bool = True,
    initial_gauges: tuple[np.ndarray, ...] | None = None,
) -> BuresResult:
    """Bracket the dilation-based distance between two valid measures.

    Alternating maximization of ``lambda_min(Herm(sum_a S_a C_a T_a))``
    over per-atom gauge blocks: the weight state sigma follows a
    softmin of the current spectrum (annealed), and each gauge is the
    polar unitary of ``S_a sigma T_a``.  Restarts: identity, a
    polar-aligned start, then seeded Haar pairs (each random draw and
    its adjoint), which makes the procedure symmetric under swapping
    the operands.  For ``dim == 1`` a closed form (Bhattacharyya
    overlap through scalar phase gauges) is used unless disabled.
    ``initial_gauges`` adds one extra deterministic restart from the
    supplied unitaries (on ``C^(r*dim)``).
    """
    _require_same_shape(E1, E2)
    if restarts < 1:
        raise InvalidArgumentError(f"restarts must be >= 1, got {restarts}")
    if max_iterations < 1:
        raise InvalidArgumentError(f"max_iterations must be >= 1, got {max_iterations}")
    if env_multiplicity < 1:
        raise InvalidArgumentError(f"env_multiplicity must be >= 1, got {env_multiplicity}")
    m, d, r = E1.n_atoms, E1.dim, env_multiplicity
    rho = rho_distance(E1, E2).value
    lower = rho / 2.0

    if d == 1 and use_closed_form:
        gauges = tuple(np.eye(r, dtype=np.complex128) for _ in range(m))
        return BuresResult(lower, _closed_form_upper(E1, E2), gauges, 0, True)

    S = np.stack([sqrt_psd(A) for A in E1.effects])
    T = np.stack([sqrt_psd(A) for A in E2.effects])
    rd = r * d

    def lam_min(Cs: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        M = np.einsum("aij,ajk,akl->il", S, Cs, T)
        w, P = np.linalg.eigh(hermitize(M))
        return float(w[0]), w, P

    def full_gauges(blocks: np.ndarray) -> tuple[np.ndarray, ...]:
        out = []
        for C in blocks:
            U = np.eye(rd, dtype=np.complex128)
            U[:d, :d] = C
            out.append(U)
        return tuple(out)

    # --- restart initial gauge lists -------------------------------------
    inits: list[tuple[np.ndarray, tuple[np.ndarray, ...] | None]] = []
    eyeC = np.stack([np.eye(d, dtype=np.complex128)] * m)
    inits.append((eyeC, None))
    if len(inits) < restarts:
        aligned = np.stack([_polar_unitary(Sa @ Ta) for Sa, Ta in zip(S, T)])
        inits.append((aligned, None))
    if initial_gauges is not None:
        Us = tuple(np.asarray(U, dtype=np.complex128) for U in initial_gauges)
        if len(Us) != m or any(U.shape != (rd, rd) for U in Us):
            raise ShapeError(f"initial_gauges must be {m} unitaries of shape {(rd, rd)}")
        inits.append((np.stack([U[:d, :d] for U in Us]), Us))
    pair = 0
    while len(inits) < restarts:
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(pair,)))
        )
        draws = tuple(_haar_unitary(rng, rd) for _ in range(m))
        inits.append((np.stack([U[:d, :d] for U in draws]), draws))
        if len(inits) < restarts:
            adj = tuple(dagger(U) for U in draws)
            inits.append((np.stack([U[:d, :d] for U in adj]), adj))
        pair += 1

    best_lam = -np.inf
    best_gauges: tuple[np.ndarray, ...] = full_gauges(eyeC)
    best_converged = False
    patience = 5
    for Cs0, lifted in inits:
        Cs = Cs0.copy()
        lam, w, P = lam_min(Cs)
        restart_best = lam
        restart_gauges = tuple(lifted) if lifted is not None else full_gauges(Cs)
        stall = 0
        converged = False
        for t in range(max_iterations):
            tau = max(1e-9, 0.05 * (0.85 ** t))
            z = np.exp(-(w - w[0]) / tau)
            z = z / z.sum()
            sigma = (P * z) @ dagger(P)
            Cs = np.stack([_polar_unitary(Sa @ sigma @ Ta) for Sa, Ta in zip(S, T)])
            lam, w, P = lam_min(Cs)
            if lam > restart_best + improvement_tol:
                restart_best = lam
                restart_gauges = full_gauges(Cs)
                stall = 0
            else:
                stall += 1
                if lam > restart_best:
                    restart_best = lam
                    restart_gauges = full_gauges(Cs)
                if stall >= patience:
                    converged = True
                    break
        if restart_best > best_lam:
            best_lam = restart_best
            best_gauges = restart_gauges
            best_converged = converged
    upper = sqrt(max(0.0, 2.0 - 2.0 * best_lam))
    return BuresResult(lower, upper, best_gauges, len(inits), best_converged)


def naimark_continuity_check(E1: QPM, E2: QPM, b: BuresResult) -> bool:
    """Two-sided continuity bracket: with both measures of unit total
    variation, require ``rho/2 <= upper``, ``lower <= sqrt(rho)`` and
    ``lower <= upper`` (each with 1e-7 slack)."""
    rho = rho_distance(E1, E2).value
    root = sqrt(max(0.0, rho))
    return (
        rho / 2.0 - _BRACKET_SLACK <= b.upper
        and b.lower <= root + _BRACKET_SLACK
        and b.lower <= b.upper + _BRACKET_SLACK
    )
