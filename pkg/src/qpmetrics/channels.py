"""Operator-valued channels: input-indexed families of measures.

Provides the sup-over-inputs distance ``rho_tilde`` (with the dual
code path ``channel_opnorm_gap`` that recomputes it through the lifted
UCP map), pointwise weak-* gaps, and a constructive Bolzano-Weierstrass
step: greedy epsilon-net clustering that extracts a subsequence whose
terms are pairwise close, together with a concrete limit candidate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInputError,
    InvalidArgumentError,
    InvariantViolationError,
    ShapeError,
)
from .operators import dagger, hermitize
from .qpm import (
    EXACT_CAP,
    QPM,
    OutcomeSpace,
    TestFunction,
    ValidationReport,
    _ingest_effect_stack,
    apply_ucp,
    rho_distance,
    sw_gap,
    validate_qpm,
)


@dataclass(frozen=True)
class InputSpace:
    """Ordered finite input alphabet."""

    points: tuple[str, ...]

    def __post_init__(self):
        points = tuple(str(p) for p in self.points)
        object.__setattr__(self, "points", points)
        if not points:
            raise ShapeError("input space needs at least one point")
        if len(set(points)) != len(points):
            raise InvariantViolationError("input labels must be distinct")

    def __len__(self) -> int:
        return len(self.points)

    def index(self, point: str) -> int:
        return self.points.index(point)


def input_space(n: int, prefix: str = "x") -> InputSpace:
    if n < 1:
        raise InvalidArgumentError(f"input count must be >= 1, got {n}")
    return InputSpace(tuple(f"{prefix}{i}" for i in range(n)))


@dataclass(frozen=True, eq=False)
class Channel:
    """One measure per input point, all sharing the outcome space and
    Hilbert dimension; ``family`` has shape ``(n, m, dim, dim)``."""

    inputs: InputSpace
    space: OutcomeSpace
    dim: int
    family: np.ndarray

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InvalidArgumentError(f"dim must be >= 1, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        n, m = len(self.inputs), len(self.space)
        arr = np.asarray(self.family, dtype=np.complex128)
        if arr.shape != (n, m, self.dim, self.dim):
            raise ShapeError(
                f"family must have shape {(n, m, self.dim, self.dim)}, got {arr.shape}"
            )
        stack = _ingest_effect_stack(
            arr.reshape(n * m, self.dim, self.dim), n * m, self.dim, "channel family"
        ).reshape(n, m, self.dim, self.dim)
        stack.setflags(write=False)
        object.__setattr__(self, "family", stack)

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    def qpm_at(self, x: int | str) -> QPM:
        i = self.inputs.index(x) if isinstance(x, str) else int(x)
        return QPM(self.space, self.dim, self.family[i])


def constant_channel(E: QPM, inputs: InputSpace) -> Channel:
    """Channel sending every input to the same measure."""
    fam = np.broadcast_to(E.effects, (len(inputs),) + E.effects.shape)
    return Channel(inputs, E.space, E.dim, np.array(fam))


@dataclass(frozen=True, eq=False)
class ChannelSequence:
    """Nonempty list of shape-compatible channels."""

    terms: tuple[Channel, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise EmptyInputError("channel sequence must be nonempty")
        head = terms[0]
        for t in terms[1:]:
            if t.inputs != head.inputs or t.space != head.space or t.dim != head.dim:
                raise ShapeError("all sequence terms must share inputs, space and dim")

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class ChannelValidationReport:
    ok: bool
    per_input: tuple[ValidationReport, ...]
    failing_inputs: tuple[str, ...]


def validate_channel(E: Channel) -> ChannelValidationReport:
    """Aggregate per-input measure validation, naming failing inputs."""
    reports = tuple(validate_qpm(E.qpm_at(i)) for i in range(E.n_inputs))
    failing = tuple(
        label for label, rep in zip(E.inputs.points, reports) if not rep.ok
    )
    return ChannelValidationReport(not failing, reports, failing)


def _require_compatible(E: Channel, F: Channel) -> None:
    if E.inputs != F.inputs:
        raise ShapeError("channels live on different input spaces")
    if E.space != F.space:
        raise ShapeError("channels live on different outcome spaces")
    if E.dim != F.dim:
        raise ShapeError(f"channels have different dims: {E.dim} vs {F.dim}")


# ---------------------------------------------------------------------------
# Distances and gaps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelDistanceResult:
    """Sup-over-inputs distance with the first maximizing input point."""

    value: float
    argmax_point: str
    exact: bool


def rho_tilde(E: Channel, F: Channel, exact_cap: int = EXACT_CAP) -> ChannelDistanceResult:
    """``max_x rho(E_x, F_x)``; certificate is the first input point (in
    input order) attaining the maximum."""
    _require_compatible(E, F)
    best, arg, exact = -1.0, E.inputs.points[0], True
    for i, label in enumerate(E.inputs.points):
        r = rho_distance(E.qpm_at(i), F.qpm_at(i), exact_cap=exact_cap)
        exact = exact and r.exact
        if r.value > best:
            best, arg = r.value, label
    return ChannelDistanceResult(float(best), arg, exact)


def apply_channel_ucp(E: Channel, f: TestFunction) -> np.ndarray:
    """Pointwise lifted UCP map: ``x -> sum_a f(a) E(a|x)``, returned as
    an ``(n, dim, dim)`` stack."""
    if f.space != E.space:
        raise ShapeError("test function lives on a different outcome space")
    return np.einsum("a,xaij->xij", f.values, E.family)


def channel_opnorm_gap(E: Channel, F: Channel, exact_cap: int = EXACT_CAP) -> float:
    """Sup over sign-vector test functions and inputs of
    ``||Phi_E(f)(x) - Phi_F(f)(x)||``.

    Deliberately routed through the lifted-map evaluation (not the
    difference-stack kernel) so it can serve as an independent check
    that it reproduces :func:`rho_tilde`.
    """
    _require_compatible(E, F)
    m, d = len(E.space), E.dim
    if m > exact_cap:
        raise InvalidArgumentError(
            f"channel_opnorm_gap enumerates sign vectors exactly; m={m} exceeds cap {exact_cap}"
        )
    count = 1 << (m - 1)
    idx = np.arange(count, dtype=np.int64)
    signs = np.empty((count, m))
    signs[:, 0] = 1.0
    if m > 1:
        signs[:, 1:] = 1.0 - 2.0 * ((idx[:, None] >> np.arange(m - 1)) & 1)
    best = 0.0
    for i in range(E.n_inputs):
        phiE = (signs @ E.family[i].reshape(m, d * d)).reshape(count, d, d)
        phiF = (signs @ F.family[i].reshape(m, d * d)).reshape(count, d, d)
        w = np.linalg.eigvalsh(phiE - phiF)
        best = max(best, float(np.max(np.abs(w))))
    return best


def psw_gap(E: Channel, F: Channel, functionals, exact_cap: int = EXACT_CAP) -> float:
    """Pointwise set-weak gap: ``max_x sw_gap(E_x, F_x, functionals)``."""
    _require_compatible(E, F)
    return max(
        sw_gap(E.qpm_at(i), F.qpm_at(i), functionals, exact_cap=exact_cap)
        for i in range(E.n_inputs)
    )


def max_effect_distance(E: Channel, F: Channel) -> float:
    """``max_{x,a} ||E(a|x) - F(a|x)||`` — the entrywise product metric
    used by subsequence extraction."""
    _require_compatible(E, F)
    return _stack_distance(E.family, F.family)


def _stack_distance(A: np.ndarray, B: np.ndarray) -> float:
    diff = (A - B).reshape(-1, A.shape[-1], A.shape[-1])
    if A.shape[-1] == 1:
        return float(np.max(np.abs(diff)))
    w = np.linalg.eigvalsh(diff)
    return float(np.max(np.abs(w)))


def _batch_distances(diffs: np.ndarray) -> np.ndarray:
    """Max effect operator norm per leading index of a stack of family
    differences with shape ``(L, n, m, d, d)``."""
    L, d = diffs.shape[0], diffs.shape[-1]
    if L == 0:
        return np.zeros(0)
    flat = diffs.reshape(L, -1, d, d)
    if d == 1:
        return np.max(np.abs(flat), axis=(1, 2, 3))
    w = np.linalg.eigvalsh(flat)
    return np.max(np.abs(w), axis=(1, 2))


# ---------------------------------------------------------------------------
# Constructive sequential compactness
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExtractionResult:
    """Subsequence extraction output.

    ``indices`` are strictly increasing positions into the original
    sequence; ``limit`` is the reprojected coordinatewise mean of the
    selected cluster.  ``gap_trace`` holds the successive distances
    between consecutive selected terms, ``limit_gaps`` each selected
    term's distance to the limit, and ``pairwise_max`` the cluster
    diameter.  ``psw_trace`` is filled when probe functionals are given.
    """

    indices: tuple[int, ...]
    limit: Channel
    gap_trace: tuple[float, ...]
    limit_gaps: tuple[float, ...]
    pairwise_max: float
    psw_trace: tuple[float, ...] | None = None

    def __iter__(self):
        return iter((self.indices, self.limit))


def _reproject_family(mean: np.ndarray) -> np.ndarray:
    """Clamp each averaged effect to PSD and renormalize the per-input
    sums back to the identity via S^(-1/2) E S^(-1/2)."""
    n, m, d, _ = mean.shape
    out = np.empty_like(mean)
    for x in range(n):
        clamped = []
        for a in range(m):
            w, U = np.linalg.eigh(hermitize(mean[x, a]))
            clamped.append((U * np.clip(w, 0.0, None)) @ dagger(U))
        Sx = np.sum(clamped, axis=0)
        w, U = np.linalg.eigh(hermitize(Sx))
        inv_root = (U / np.sqrt(np.clip(w, 1e-12, None))) @ dagger(U)
        for a in range(m):
            out[x, a] = hermitize(inv_root @ clamped[a] @ inv_root)
    return out


def extract_convergent_subsequence(
    seq: ChannelSequence, tol: float, probe=None
) -> ExtractionResult:
    """Greedy epsilon-net clustering on the entrywise effect metric.

    Terms are scanned in order; each joins the first existing cluster
    whose center (its first member) is within ``tol/2``, else it opens
    a new cluster.  The largest cluster wins; among equally large ones
    the cluster containing the last term is preferred, then the
    earliest.  Members are pairwise within ``tol``, and re-running the
    extraction on the selected subsequence returns it unchanged.
    """
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise InvalidArgumentError(f"tol must be a positive real, got {tol!r}")
    terms = seq.terms
    clusters: list[list[int]] = []
    centers: list[np.ndarray] = []
    for t, term in enumerate(terms):
        placed = False
        for c, center in enumerate(centers):
            if _stack_distance(term.family, center) <= tol / 2.0:
                clusters[c].append(t)
                placed = True
                break
        if not placed:
            clusters.append([t])
            centers.append(term.family)
    sizes = [len(c) for c in clusters]
    biggest = max(sizes)
    winners = [c for c, s in zip(clusters, sizes) if s == biggest]
    last = len(terms) - 1
    chosen = next((c for c in winners if c[-1] == last), winners[0])

    indices = tuple(chosen)
    selected = np.stack([terms[i].family for i in indices])
    mean = np.mean(selected, axis=0)
    head = terms[0]
    limit = Channel(head.inputs, head.space, head.dim, _reproject_family(mean))
    gap_trace = tuple(float(v) for v in _batch_distances(selected[1:] - selected[:-1]))
    limit_gaps = tuple(
        float(v) for v in _batch_distances(selected - limit.family[None])
    )
    pairwise = 0.0
    for pos in range(len(indices) - 1):
        vals = _batch_distances(selected[pos + 1:] - selected[pos])
        pairwise = max(pairwise, float(np.max(vals)))
    psw_trace = None
    if probe is not None:
        psw_trace = tuple(psw_gap(terms[i], limit, probe) for i in indices)
    return ExtractionResult(indices, limit, gap_trace, limit_gaps, pairwise, psw_trace)
