"""Finite-outcome quantum probability measures and their metrics.

A measure assigns one PSD effect operator per outcome atom, with the
effects summing to the identity.  This module provides the domain
types, validation, scalar compressions, the unital completely positive
map ``f -> sum_a f(a) E(a)``, and the distance functionals:

* ``rho_distance``   — max over quotiented sign vectors of
  ``||sum_a eps_a (E(a)-F(a))||`` (the total-variation distance).
* ``delta_distance`` — max over nonempty proper atom subsets of
  ``lambda_max(sum_{a in S} (E(a)-F(a)))``; equals rho/2.
* ``total_variation`` — same sign enumeration applied to one measure's
  effects; equals 1 for every valid measure.
* ``sw_gap`` / ``bw_gap`` — weak-* style gaps against trace-class test
  operators (and test functions for the latter).

Enumerations run exactly up to ``EXACT_CAP`` atoms; beyond that,
rho/delta switch to a seeded greedy sign/subset local search and return
a certified bracket with ``exact=False``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import (
    EmptyInputError,
    InvalidArgumentError,
    InvariantViolationError,
    ShapeError,
)
from .operators import (
    HERMITICITY_TOL,
    PSD_TOL,
    hermitize,
    hermiticity_residual,
    operator_norm,
)

EXACT_CAP = 16          # max atom count for exhaustive sign/subset enumeration
SUM_TOL = 1e-9          # ||sum of effects - I|| tolerance for validity
_LOCAL_SEARCH_SEED = 0x5EED0  # fixed seed: heuristic mode stays deterministic
_LOCAL_SEARCH_RESTARTS = 8


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellGeometry:
    """Cell decomposition of [0,1] (interval) or the unit circle (arc
    fractions of a full turn), with exact rational endpoints."""

    kind: str
    cells: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        if self.kind not in ("interval", "circle"):
            raise InvalidArgumentError(f"unknown geometry kind {self.kind!r}")
        cells = tuple((Fraction(a), Fraction(b)) for a, b in self.cells)
        object.__setattr__(self, "cells", cells)
        ordered = sorted(cells)
        if not ordered:
            raise EmptyInputError("geometry needs at least one cell")
        if ordered[0][0] != 0 or ordered[-1][1] != 1:
            raise InvariantViolationError("cells must cover [0, 1]")
        for (a0, b0), (a1, _) in zip(ordered, ordered[1:]):
            if b0 != a1:
                raise InvariantViolationError(
                    f"cells must partition [0, 1]: gap or overlap at {b0}"
                )
        for a, b in ordered:
            if not a < b:
                raise InvariantViolationError(f"degenerate cell [{a}, {b})")


@dataclass(frozen=True)
class OutcomeSpace:
    """Ordered finite list of outcome atoms, optionally carrying the
    cell geometry it discretizes."""

    atoms: tuple[str, ...]
    geometry: CellGeometry | None = None

    def __post_init__(self):
        atoms = tuple(str(a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise EmptyInputError("outcome space needs at least one atom")
        if len(set(atoms)) != len(atoms):
            raise InvariantViolationError("atom labels must be distinct")
        if self.geometry is not None and len(self.geometry.cells) != len(atoms):
            raise ShapeError(
                f"geometry has {len(self.geometry.cells)} cells for {len(atoms)} atoms"
            )

    def __len__(self) -> int:
        return len(self.atoms)

    def index(self, atom: str) -> int:
        return self.atoms.index(atom)


def finite_space(m: int, prefix: str = "a") -> OutcomeSpace:
    """Outcome space with atoms ``a0 … a{m-1}`` and no geometry."""
    if m < 1:
        raise InvalidArgumentError(f"atom count must be >= 1, got {m}")
    return OutcomeSpace(tuple(f"{prefix}{i}" for i in range(m)))


def _ingest_effect_stack(raw, m: int, dim: int, what: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=np.complex128)
    if arr.shape != (m, dim, dim):
        raise ShapeError(f"{what} must have shape {(m, dim, dim)}, got {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise InvariantViolationError(f"{what} contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(arr)))) if arr.size else 1.0
    worst = max(hermiticity_residual(a) for a in arr)
    if worst > HERMITICITY_TOL * scale:
        raise InvariantViolationError(
            f"{what} must be Hermitian: residual {worst:.3e} exceeds tolerance"
        )
    out = hermitize(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class QPM:
    """Finite-outcome quantum probability measure: one Hermitian effect
    per atom, shape ``(m, dim, dim)``.

    Construction enforces shape and hermiticity only; positivity and
    the sum-to-identity condition are checked by :func:`validate_qpm`,
    so structurally broken candidates can still be represented and
    diagnosed.
    """

    space: OutcomeSpace
    dim: int
    effects: np.ndarray

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InvalidArgumentError(f"dim must be >= 1, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        stack = _ingest_effect_stack(self.effects, len(self.space), self.dim, "effects")
        object.__setattr__(self, "effects", stack)

    @property
    def n_atoms(self) -> int:
        return len(self.space)

    def effect(self, atom: str) -> np.ndarray:
        return self.effects[self.space.index(atom)]


@dataclass(frozen=True, eq=False)
class ScalarMeasure:
    """Complex weight per atom — the compression of a measure by a
    vector pair."""

    space: OutcomeSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.complex128)
        if w.shape != (len(self.space),):
            raise ShapeError(f"weights must have shape ({len(self.space)},), got {w.shape}")
        if not np.all(np.isfinite(w.view(np.float64))):
            raise InvariantViolationError("weights contain non-finite entries")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Complex step function on the outcome atoms."""

    space: OutcomeSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (len(self.space),):
            raise ShapeError(f"values must have shape ({len(self.space)},), got {v.shape}")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise InvariantViolationError("values contain non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def indicator(space: OutcomeSpace, atom: int | str) -> TestFunction:
    """Indicator test function of a single atom (by label or index)."""
    i = space.index(atom) if isinstance(atom, str) else int(atom)
    v = np.zeros(len(space), dtype=np.complex128)
    v[i] = 1.0
    return TestFunction(space, v)


# ---------------------------------------------------------------------------
# Validation and basic maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_qpm`: per-effect eigenvalue bounds,
    the identity-sum residual, and human-readable violations."""

    ok: bool
    sum_residual: float
    effect_bounds: tuple[tuple[float, float], ...]  # (lambda_min, lambda_max) per atom
    violations: tuple[str, ...] = field(default_factory=tuple)


def validate_qpm(E: QPM) -> ValidationReport:
    """Check positivity (two-sided: 0 <= effect <= I) and the
    sum-to-identity condition; never raises."""
    w = np.linalg.eigvalsh(E.effects)
    bounds = tuple((float(lo), float(hi)) for lo, hi in zip(w[:, 0], w[:, -1]))
    violations: list[str] = []
    for atom, (lo, hi) in zip(E.space.atoms, bounds):
        if lo < -PSD_TOL:
            violations.append(f"effect {atom!r}: lambda_min={lo:.6g} < -{PSD_TOL:g}")
        if hi > 1.0 + PSD_TOL:
            violations.append(f"effect {atom!r}: lambda_max={hi:.6g} > 1+{PSD_TOL:g}")
    total = E.effects.sum(axis=0)
    sum_residual = operator_norm(total - np.eye(E.dim))
    if sum_residual > SUM_TOL:
        violations.append(f"effect sum differs from identity: residual {sum_residual:.6g}")
    return ValidationReport(not violations, float(sum_residual), bounds, tuple(violations))


def _require_valid(E: QPM, what: str) -> None:
    report = validate_qpm(E)
    if not report.ok:
        raise InvariantViolationError(f"{what}: " + "; ".join(report.violations))


def _require_same_shape(E: QPM, F: QPM) -> None:
    if E.space != F.space:
        raise ShapeError("operands live on different outcome spaces")
    if E.dim != F.dim:
        raise ShapeError(f"operands have different dims: {E.dim} vs {F.dim}")


def scalar_measure(E: QPM, xi, eta) -> ScalarMeasure:
    """Compression ``a -> <E(a) xi, eta>`` (inner product linear in xi,
    conjugate-linear in eta)."""
    xi = np.asarray(xi, dtype=np.complex128)
    eta = np.asarray(eta, dtype=np.complex128)
    if xi.shape != (E.dim,) or eta.shape != (E.dim,):
        raise ShapeError(f"vectors must have shape ({E.dim},), got {xi.shape} and {eta.shape}")
    weights = np.array([np.vdot(eta, Ea @ xi) for Ea in E.effects])
    return ScalarMeasure(E.space, weights)


def tv_norm(mu: ScalarMeasure) -> float:
    """Total variation of a scalar measure: sum of atom-weight moduli."""
    return float(np.sum(np.abs(mu.weights)))


def apply_ucp(E: QPM, f: TestFunction) -> np.ndarray:
    """The unital completely positive map ``f -> sum_a f(a) E(a)``."""
    if f.space != E.space:
        raise ShapeError("test function lives on a different outcome space")
    return np.einsum("a,aij->ij", f.values, E.effects)


def total_variation(E: QPM) -> float:
    """Total variation norm of the measure itself.

    Computed as the max over quotiented sign vectors of
    ``||sum_a eps_a E(a)||``; equals 1 (within 1e-9) for every valid
    measure.
    """
    _require_valid(E, "total_variation input is not a valid measure")
    if E.n_atoms == 1:
        return operator_norm(E.effects[0])
    if E.n_atoms <= EXACT_CAP:
        value, _ = kernels.max_signed_opnorm(E.effects)
        return float(value)
    value, _ = _local_search_signed(E.effects)
    return float(value)


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistanceResult:
    """Value plus optimizer certificate.

    ``certificate`` is the optimal sign vector (tuple of +-1 per atom,
    first entry +1) for rho, or the optimal atom-index subset (sorted
    tuple) for delta.  In exact mode ``upper == value``; in heuristic
    mode ``value`` is the best lower bound found and ``upper`` the
    bracket ``sum_a ||D_a||``.
    """

    value: float
    certificate: tuple
    exact: bool
    upper: float


def _sign_mask_to_tuple(mask: int, m: int) -> tuple[int, ...]:
    return (1,) + tuple(-1 if (mask >> j) & 1 else 1 for j in range(m - 1))


def _subset_mask_to_tuple(mask: int, m: int) -> tuple[int, ...]:
    return tuple(a for a in range(m) if (mask >> a) & 1)


def _batched_extremes(stacks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = np.linalg.eigvalsh(stacks)
    return w[:, 0], w[:, -1]


def _local_search_signed(diffs: np.ndarray) -> tuple[float, int]:
    """Greedy best-improvement sign-flip ascent from deterministic and
    seeded starts; used beyond the exact enumeration cap."""
    m = diffs.shape[0]
    flat = diffs.reshape(m, -1)
    d = diffs.shape[1]

    def value_of(eps: np.ndarray) -> float:
        acc = (eps @ flat).reshape(d, d)
        w = np.linalg.eigvalsh(acc)
        return float(max(-w[0], w[-1]))

    rng = np.random.Generator(np.random.Philox(_LOCAL_SEARCH_SEED))
    guide = np.linalg.eigh(np.einsum("aij,ajk->ik", diffs, diffs))[1][:, -1]
    guided = np.sign(np.real(np.einsum("i,aij,j->a", np.conj(guide), diffs, guide)))
    guided[guided == 0] = 1.0
    if guided[0] < 0:
        guided = -guided
    starts = [np.ones(m), guided]
    for _ in range(_LOCAL_SEARCH_RESTARTS):
        eps = rng.choice([-1.0, 1.0], size=m)
        eps[0] = 1.0
        starts.append(eps)
    best_val, best_eps = -np.inf, None
    for eps in starts:
        eps = eps.copy()
        current = value_of(eps)
        for _ in range(200):
            acc = (eps @ flat).reshape(d, d)
            cand = acc[None, :, :] - 2.0 * (eps[1:, None, None] * diffs[1:])
            lo, hi = _batched_extremes(cand)
            vals = np.maximum(-lo, hi)
            j = int(np.argmax(vals))
            if vals[j] <= current:
                break
            current = float(vals[j])
            eps[j + 1] = -eps[j + 1]
        if current > best_val:
            best_val, best_eps = current, eps.copy()
    mask = 0
    for j in range(1, m):
        if best_eps[j] < 0:
            mask |= 1 << (j - 1)
    return best_val, mask


def _local_search_subset(diffs: np.ndarray) -> tuple[float, int]:
    """Greedy atom-toggle ascent on lambda_max over nonempty proper
    subsets; heuristic twin of the exact subset enumeration."""
    m, d, _ = diffs.shape
    flat = diffs.reshape(m, -1)

    def lam_max(member: np.ndarray) -> float:
        acc = (member @ flat).reshape(d, d)
        return float(np.linalg.eigvalsh(acc)[-1])

    per_atom_top = np.linalg.eigvalsh(diffs)[:, -1]
    seed_atom = int(np.argmax(per_atom_top))
    guide = np.linalg.eigh(np.einsum("aij,ajk->ik", diffs, diffs))[1][:, -1]
    scores = np.real(np.einsum("i,aij,j->a", np.conj(guide), diffs, guide))
    guided = (scores > 0).astype(float)
    rng = np.random.Generator(np.random.Philox(_LOCAL_SEARCH_SEED + 1))
    starts = [np.eye(m)[seed_atom], 1.0 - np.eye(m)[seed_atom], guided]
    for _ in range(_LOCAL_SEARCH_RESTARTS):
        starts.append((rng.random(m) < 0.5).astype(float))
    best_val, best_member = -np.inf, None
    for member in starts:
        member = member.copy()
        if member.sum() == 0:
            member[seed_atom] = 1.0
        if member.sum() == m:
            member[seed_atom] = 0.0
        current = lam_max(member)
        for _ in range(200):
            acc = (member @ flat).reshape(d, d)
            delta = np.where(member[:, None, None] > 0, -diffs, diffs)
            cand = acc[None, :, :] + delta
            vals = np.linalg.eigvalsh(cand)[:, -1]
            # keep the subset nonempty and proper
            size = member.sum()
            for a in range(m):
                new_size = size + (1 if member[a] == 0 else -1)
                if new_size == 0 or new_size == m:
                    vals[a] = -np.inf
            j = int(np.argmax(vals))
            if vals[j] <= current:
                break
            current = float(vals[j])
            member[j] = 1.0 - member[j]
        if current > best_val:
            best_val, best_member = current, member.copy()
    mask = sum(1 << a for a in range(m) if best_member[a] > 0)
    return best_val, mask


def rho_distance(E: QPM, F: QPM, exact_cap: int = EXACT_CAP) -> DistanceResult:
    """Total-variation distance between two measures.

    Exact mode (m <= ``exact_cap``) maximizes ``||sum_a eps_a D_a||``
    over the 2^(m-1) quotiented sign vectors and certifies the optimal
    vector.  Heuristic mode returns the bracket
    ``[best found, sum_a ||D_a||]`` with ``exact=False``.
    """
    _require_same_shape(E, F)
    diffs = E.effects - F.effects
    m = E.n_atoms
    if m == 1:
        val = operator_norm(diffs[0])
        return DistanceResult(val, (1,), True, val)
    if m <= exact_cap:
        value, mask = kernels.max_signed_opnorm(diffs)
        return DistanceResult(float(value), _sign_mask_to_tuple(mask, m), True, float(value))
    value, mask = _local_search_signed(diffs)
    upper = float(sum(operator_norm(Da) for Da in diffs))
    return DistanceResult(float(value), _sign_mask_to_tuple(mask, m), False, upper)


def delta_distance(E: QPM, F: QPM, exact_cap: int = EXACT_CAP) -> DistanceResult:
    """Max over nonempty proper atom subsets S of
    ``lambda_max(sum_{a in S} (E(a)-F(a)))``; equals rho/2."""
    _require_same_shape(E, F)
    diffs = E.effects - F.effects
    m = E.n_atoms
    if m == 1:
        return DistanceResult(0.0, (), True, 0.0)
    if m <= exact_cap:
        value, mask = kernels.max_subset_extreme(diffs)
        return DistanceResult(float(value), _subset_mask_to_tuple(mask, m), True, float(value))
    value, mask = _local_search_subset(diffs)
    upper = float(sum(operator_norm(Da) for Da in diffs))
    return DistanceResult(float(value), _subset_mask_to_tuple(mask, m), False, upper)


def rho_phase_grid(E: QPM, F: QPM, k: int = 16, combo_limit: int = 1 << 20) -> float:
    """Cross-check for rho with complex phase vectors.

    Maximizes, over k-th root-of-unity phase vectors (first phase
    fixed), the best diagonal compression ``max_xi |<A xi, xi>|`` of
    the phase combination ``A = sum_a eps_a D_a`` — the norm of its
    self-adjoint part.  The grid contains the real sign vectors, and
    every self-adjoint part is a coordinatewise-shrunk sign
    combination, so the result is pinched to equal rho; complex phases
    never beat real signs on diagonal compressions.
    """
    _require_same_shape(E, F)
    if k < 2 or k % 2 != 0:
        raise InvalidArgumentError(f"phase grid order must be even and >= 2, got {k}")
    m = E.n_atoms
    if m == 1:
        return operator_norm(E.effects[0] - F.effects[0])
    if k ** (m - 1) > combo_limit:
        raise InvalidArgumentError(
            f"phase grid too large: {k}^{m - 1} exceeds limit {combo_limit}"
        )
    return float(kernels.phase_grid_max_opnorm(E.effects - F.effects, k))


# ---------------------------------------------------------------------------
# Weak-* style gaps
# ---------------------------------------------------------------------------

def _ingest_functionals(functionals, dim: int) -> list[np.ndarray]:
    mats = [np.asarray(T, dtype=np.complex128) for T in functionals]
    if not mats:
        raise InvalidArgumentError("functional list must be nonempty")
    for T in mats:
        if T.shape != (dim, dim):
            raise ShapeError(f"functionals must be {dim}x{dim}, got {T.shape}")
    return mats


def sw_gap(E: QPM, F: QPM, functionals, exact_cap: int = EXACT_CAP) -> float:
    """Set-weak gap: max over supplied trace-class test operators T and
    atom subsets S of ``|Tr((E(S) - F(S)) T)|``."""
    _require_same_shape(E, F)
    mats = _ingest_functionals(functionals, E.dim)
    m = E.n_atoms
    if m > exact_cap:
        raise InvalidArgumentError(
            f"sw_gap enumerates subsets exactly; m={m} exceeds cap {exact_cap}"
        )
    diffs = E.effects - F.effects
    best = 0.0
    for T in mats:
        traces = np.einsum("aij,ji->a", diffs, T)
        sums = np.zeros(1, dtype=np.complex128)
        for t in traces:
            sums = np.concatenate([sums, sums + t])
        best = max(best, float(np.max(np.abs(sums))))
    return best


def bw_gap(E: QPM, F: QPM, functionals, fns) -> float:
    """Bounded-weak gap: max over test operators T and test functions f
    of ``|Tr((phi_E(f) - phi_F(f)) T)|``."""
    _require_same_shape(E, F)
    mats = _ingest_functionals(functionals, E.dim)
    fns = list(fns)
    if not fns:
        raise InvalidArgumentError("test function list must be nonempty")
    best = 0.0
    for f in fns:
        Dphi = apply_ucp(E, f) - apply_ucp(F, f)
        for T in mats:
            best = max(best, float(abs(np.einsum("ij,ji->", Dphi, T))))
    return best
