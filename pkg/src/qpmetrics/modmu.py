"""Channels up to almost-everywhere equality under an input measure.

A probability weighting ``mu`` on the input alphabet declares some
inputs negligible.  This module provides the equivalence test (direct
and through the lifted UCP maps), a canonical quotient representative,
the bilinear weak pairing and its separating gap, and a dilation that
uses one fixed isometry for every input point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Channel, InputSpace, validate_channel
from .errors import InvalidArgumentError, InvariantViolationError, ShapeError
from .operators import complete_to_unitary, dagger, hermitize, sqrt_psd
from .qpm import QPM, TestFunction, indicator

_MASS_TOL = 1e-12
_DILATION_TOL = 1e-8
_SIGN_FAMILY_CAP = 12
_SIGN_FAMILY_SAMPLES = 64
_SIGN_FAMILY_SEED = 0x51F7


@dataclass(frozen=True)
class InputMeasure:
    """Probability weights on an input space; total mass 1."""

    inputs: InputSpace
    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.inputs),):
            raise ShapeError(
                f"weights must have shape {(len(self.inputs),)}, got {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise InvalidArgumentError("weights must be finite")
        if np.any(w < 0):
            raise InvalidArgumentError("weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > _MASS_TOL:
            raise InvariantViolationError(
                f"weights must sum to 1 within {_MASS_TOL}, got {float(np.sum(w))!r}"
            )
        if not np.any(w > 0):
            raise InvariantViolationError("support must be nonempty")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))

    def weight(self, x: int | str) -> float:
        i = self.inputs.index(x) if isinstance(x, str) else int(x)
        return self.weights[i]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.weights) if v > 0)

    @property
    def null_points(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.weights) if v == 0)


def uniform_measure(inputs: InputSpace) -> InputMeasure:
    n = len(inputs)
    return InputMeasure(inputs, tuple(1.0 / n for _ in range(n)))


@dataclass(frozen=True)
class WeightFunction:
    """Complex weight per input point (finitely supported integrand)."""

    inputs: InputSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if v.shape != (len(self.inputs),):
            raise ShapeError(
                f"values must have shape {(len(self.inputs),)}, got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def input_indicator(inputs: InputSpace, point: int | str) -> WeightFunction:
    i = inputs.index(point) if isinstance(point, str) else int(point)
    v = np.zeros(len(inputs), dtype=np.complex128)
    v[i] = 1.0
    return WeightFunction(inputs, v)


@dataclass(frozen=True, eq=False)
class ModMuChannel:
    """A channel together with the measure it is considered under.

    With ``canonical=True`` the representative is pinned: at every
    weight-zero input the measure must be the uniform one (all effects
    equal to I/m).
    """

    rep: Channel
    mu: InputMeasure
    canonical: bool = False

    def __post_init__(self):
        if self.rep.inputs != self.mu.inputs:
            raise ShapeError("channel and measure live on different input spaces")
        if self.canonical:
            m, d = len(self.rep.space), self.rep.dim
            ref = np.eye(d, dtype=np.complex128) / m
            for x in self.mu.null_points:
                if any(
                    float(np.max(np.abs(self.rep.family[x, a] - ref))) > _MASS_TOL
                    for a in range(m)
                ):
                    raise InvariantViolationError(
                        "canonical form must carry the uniform measure at "
                        f"null input {self.rep.inputs.points[x]!r}"
                    )

    @property
    def inputs(self) -> InputSpace:
        return self.rep.inputs

    @property
    def space(self):
        return self.rep.space

    @property
    def dim(self) -> int:
        return self.rep.dim


def _require_pairable(E: Channel, F: Channel, mu: InputMeasure) -> None:
    if E.inputs != F.inputs or E.space != F.space or E.dim != F.dim:
        raise ShapeError("channels must share inputs, outcome space and dim")
    if mu.inputs != E.inputs:
        raise ShapeError("measure lives on a different input space")


def equiv_mod_mu(
    E: Channel, F: Channel, mu: InputMeasure, tol: float = 1e-9
) -> tuple[bool, tuple[str, str] | None]:
    """Atomwise equality on the support of ``mu``.

    Returns ``(True, None)`` or ``(False, (atom_label, input_label))``
    for the first failure, scanning atoms in outcome order and support
    points in input order.
    """
    _require_pairable(E, F, mu)
    support = mu.support
    for a, atom in enumerate(E.space.atoms):
        for x in support:
            diff = E.family[x, a] - F.family[x, a]
            if float(np.linalg.norm(diff, 2)) > tol:
                return False, (atom, E.inputs.points[x])
    return True, None


def _sign_family(m: int) -> np.ndarray:
    """Deterministic family of +/-1 test vectors (eps_0 fixed to +1)."""
    if m == 1:
        return np.ones((1, 1))
    if m <= _SIGN_FAMILY_CAP:
        idx = np.arange(1 << (m - 1), dtype=np.int64)
        signs = np.empty((idx.size, m))
        signs[:, 0] = 1.0
        signs[:, 1:] = 1.0 - 2.0 * ((idx[:, None] >> np.arange(m - 1)) & 1)
        return signs
    gen = np.random.Generator(np.random.Philox(_SIGN_FAMILY_SEED))
    signs = 1.0 - 2.0 * gen.integers(0, 2, size=(_SIGN_FAMILY_SAMPLES, m)).astype(float)
    signs[:, 0] = 1.0
    return signs


def ucp_equiv_mod_mu(
    E: Channel, F: Channel, mu: InputMeasure, tol: float = 1e-9
) -> bool:
    """Equivalence probed through the lifted maps instead of the effects.

    Checks ``||Phi_E(f)(x) - Phi_F(f)(x)|| <= tol * sum|f|`` for every
    support point and every probe ``f`` in a fixed basis family (atom
    indicators plus sign vectors), giving an independent code path that
    must agree with :func:`equiv_mod_mu` at the same tolerance.
    """
    _require_pairable(E, F, mu)
    m = len(E.space)
    probes = np.concatenate([np.eye(m), _sign_family(m)], axis=0)
    support = list(mu.support)
    diff = E.family[support] - F.family[support]  # (s, m, d, d)
    for f in probes:
        phi = np.einsum("a,xaij->xij", f.astype(np.complex128), diff)
        worst = float(np.max(np.abs(np.linalg.eigvalsh(hermitize(phi)))))
        if worst > tol * float(np.sum(np.abs(f))):
            return False
    return True


def canonicalize_mod_mu(E: Channel, mu: InputMeasure) -> ModMuChannel:
    """Canonical quotient representative: copy on support, uniform
    measure I/m at null inputs."""
    if mu.inputs != E.inputs:
        raise ShapeError("measure lives on a different input space")
    m, d = len(E.space), E.dim
    fam = np.array(E.family)
    ref = np.eye(d, dtype=np.complex128) / m
    for x in mu.null_points:
        fam[x] = ref
    return ModMuChannel(Channel(E.inputs, E.space, d, fam), mu, canonical=True)


def bw_pairing(
    Edot: ModMuChannel,
    f: TestFunction,
    omega: WeightFunction,
    xi: np.ndarray,
    eta: np.ndarray,
) -> complex:
    """Bilinear weak pairing ``sum_x mu(x) omega(x) <Phi(f)(x) xi, eta>``
    (inner product linear in the first slot, conjugate-linear in eta)."""
    E = Edot.rep
    if f.space != E.space:
        raise ShapeError("test function lives on a different outcome space")
    if omega.inputs != E.inputs:
        raise ShapeError("weight function lives on a different input space")
    xi = np.asarray(xi, dtype=np.complex128).reshape(-1)
    eta = np.asarray(eta, dtype=np.complex128).reshape(-1)
    if xi.shape != (E.dim,) or eta.shape != (E.dim,):
        raise ShapeError(f"vectors must have length {E.dim}")
    mu_w = np.asarray(Edot.mu.weights, dtype=np.complex128)
    phi = np.einsum("a,xaij->xij", f.values, E.family)
    vals = np.einsum("i,xij,j->x", np.conj(eta), phi, xi)
    return complex(np.sum(mu_w * omega.values * vals))


def canonical_family(space, inputs: InputSpace, dim: int):
    """Separating probe family: atom indicators x input indicators x
    standard basis vector pairs."""
    basis = np.eye(dim, dtype=np.complex128)
    family = []
    for a in range(len(space)):
        f = indicator(space, a)
        for x in range(len(inputs)):
            om = input_indicator(inputs, x)
            for i in range(dim):
                for j in range(dim):
                    family.append((f, om, basis[i], basis[j]))
    return family


def bw_gap_mod_mu(Edot: ModMuChannel, Fdot: ModMuChannel, family=None) -> float:
    """Max pairing discrepancy over a probe family (canonical default)."""
    if Edot.inputs != Fdot.inputs or Edot.space != Fdot.space or Edot.dim != Fdot.dim:
        raise ShapeError("channels must share inputs, outcome space and dim")
    if max(abs(a - b) for a, b in zip(Edot.mu.weights, Fdot.mu.weights)) > _MASS_TOL:
        raise InvalidArgumentError("channels are weighted by different measures")
    if family is None:
        family = canonical_family(Edot.space, Edot.inputs, Edot.dim)
    family = list(family)
    if not family:
        raise InvalidArgumentError("probe family must be nonempty")
    gap = 0.0
    for f, om, xi, eta in family:
        gap = max(
            gap,
            abs(bw_pairing(Edot, f, om, xi, eta) - bw_pairing(Fdot, f, om, xi, eta)),
        )
    return float(gap)


@dataclass(frozen=True, eq=False)
class ModMuDilationResult:
    """Fixed-isometry dilation: one ``(m*d, d)`` isometry ``V`` serving
    every input, a projection-valued channel ``F`` on the enlarged
    space, and the worst reconstruction residual over support."""

    isometry: np.ndarray
    channel: Channel
    residual: float


def naimark_mod_mu(Edot: ModMuChannel) -> ModMuDilationResult:
    """Dilate every per-input measure through one shared isometry.

    For support point x the per-input isometry stacks the effect square
    roots; completing it to a unitary and composing with the inverse of
    the reference completion gives a rotation ``W_x`` with
    ``W_x V = V_x``, so ``F(a|x) = W_x^* (P_a (x) I) W_x`` reconstructs
    the original effects through the single ``V``.  Null inputs carry
    the reference projective family unchanged.
    """
    E = Edot.rep
    report = validate_channel(E)
    if not report.ok:
        raise InvariantViolationError(
            f"cannot dilate an invalid channel; failing inputs: {report.failing_inputs}"
        )
    m, d, n = len(E.space), E.dim, E.n_inputs
    K = m * d

    def stacked_isometry(x: int) -> np.ndarray:
        return np.concatenate([sqrt_psd(E.family[x, a]) for a in range(m)], axis=0)

    support = Edot.mu.support
    x0 = support[0]
    V = stacked_isometry(x0)
    ref_completion = complete_to_unitary(V)

    blocks = np.zeros((m, K, K), dtype=np.complex128)
    for a in range(m):
        blocks[a, a * d:(a + 1) * d, a * d:(a + 1) * d] = np.eye(d)

    family = np.empty((n, m, K, K), dtype=np.complex128)
    residual = 0.0
    support_set = set(support)
    for x in range(n):
        if x in support_set:
            Wx = complete_to_unitary(stacked_isometry(x)) @ dagger(ref_completion)
            for a in range(m):
                family[x, a] = hermitize(dagger(Wx) @ blocks[a] @ Wx)
                rec = dagger(V) @ family[x, a] @ V
                residual = max(
                    residual, float(np.linalg.norm(rec - E.family[x, a], 2))
                )
        else:
            family[x] = blocks
    if residual > _DILATION_TOL:
        raise InvariantViolationError(
            f"dilation residual {residual:.3e} exceeds {_DILATION_TOL}"
        )
    F = Channel(E.inputs, E.space, K, family)
    return ModMuDilationResult(V, F, residual)
