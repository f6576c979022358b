"""Cell schemes for interval/circle outcome spaces, scalar-density
discretization, and partition coarsening.

All cell endpoints and integrals are exact rationals; floats appear
only in the final effect weights, so aligned discretize/coarsen paths
agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidArgumentError, ShapeError
from .qpm import QPM, CellGeometry, OutcomeSpace, finite_space


@dataclass(frozen=True)
class SpaceSpec:
    """Outcome-space recipe: a bare finite set, a dyadic subdivision of
    [0,1], or equal arcs of the circle."""

    kind: str
    cells: int

    def __post_init__(self):
        if self.kind not in ("finite", "interval", "circle"):
            raise InvalidArgumentError(f"unknown space kind {self.kind!r}")
        cells = int(self.cells)
        object.__setattr__(self, "cells", cells)
        if cells < 1:
            raise InvalidArgumentError(f"cell count must be >= 1, got {cells}")
        if self.kind == "interval" and cells & (cells - 1):
            raise InvalidArgumentError(
                f"interval subdivisions are dyadic; {cells} is not a power of two"
            )


def make_space(spec: SpaceSpec) -> OutcomeSpace:
    """Concrete outcome space for a recipe; geometric kinds get labels
    ``cell0 … cell{k-1}`` plus exact endpoints."""
    if spec.kind == "finite":
        return finite_space(spec.cells)
    k = spec.cells
    cells = tuple(
        (Fraction(i, k), Fraction(i + 1, k)) for i in range(k)
    )
    geometry = CellGeometry(spec.kind, cells)
    return OutcomeSpace(tuple(f"cell{i}" for i in range(k)), geometry)


def _as_pieces(density) -> list[tuple[Fraction, Fraction, Fraction]]:
    if isinstance(density, str):
        if density != "uniform":
            raise InvalidArgumentError(f"unknown density spec {density!r}")
        return [(Fraction(0), Fraction(1), Fraction(1))]
    pieces = []
    for entry in density:
        try:
            start, end, value = entry
        except (TypeError, ValueError) as exc:
            raise InvalidArgumentError(
                f"density pieces must be (start, end, value) triples, got {entry!r}"
            ) from exc
        start, end, value = Fraction(start), Fraction(end), Fraction(value)
        if not (0 <= start < end <= 1):
            raise InvalidArgumentError(f"piece [{start}, {end}) not inside [0, 1]")
        if value < 0:
            raise InvalidArgumentError(f"density value {value} is negative")
        pieces.append((start, end, value))
    if not pieces:
        raise InvalidArgumentError("density table must be nonempty")
    return pieces


def discretize_scalar_density(density, spec: SpaceSpec) -> QPM:
    """Scalar (d=1) measure whose cell weights are exact integrals of a
    uniform or piecewise-constant density over the cells.

    ``density`` is ``"uniform"`` or an iterable of ``(start, end,
    value)`` triples with rational-convertible entries; it must
    integrate to 1 over [0,1] within 1e-9.
    """
    if spec.kind == "finite":
        raise InvalidArgumentError("discretization needs an interval or circle spec")
    pieces = _as_pieces(density)
    total = sum((end - start) * value for start, end, value in pieces)
    if abs(float(total) - 1.0) > 1e-9:
        raise InvalidArgumentError(
            f"density must integrate to 1, got {float(total)!r}"
        )
    space = make_space(spec)
    weights = []
    for lo, hi in space.geometry.cells:
        w = Fraction(0)
        for start, end, value in pieces:
            overlap = min(hi, end) - max(lo, start)
            if overlap > 0:
                w += overlap * value
        weights.append(float(w))
    effects = np.asarray(weights, dtype=np.complex128).reshape(len(weights), 1, 1)
    return QPM(space, 1, effects)


def coarsen(E: QPM, mapping, coarse_labels=None) -> QPM:
    """Merge atoms: coarse effect k is the sum of the refined effects
    mapped to k.

    ``mapping[i]`` gives the coarse index of refined atom i; it must
    cover every refined atom and hit every coarse index 0..K-1.  Cell
    geometry survives when each coarse fiber is a contiguous run of
    refined cells; otherwise the coarse space is bare.
    """
    mapping = list(mapping)
    m = len(E.space)
    if len(mapping) != m:
        raise InvalidArgumentError(
            f"mapping must assign all {m} atoms, got {len(mapping)} entries"
        )
    try:
        mapping = [int(t) for t in mapping]
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError("mapping entries must be integers") from exc
    K = max(mapping) + 1 if mapping else 0
    if min(mapping) < 0:
        raise InvalidArgumentError("mapping entries must be nonnegative")
    hit = set(mapping)
    if hit != set(range(K)):
        missing = sorted(set(range(K)) - hit)
        raise InvalidArgumentError(f"mapping must be surjective; missing {missing}")

    effects = np.zeros((K, E.dim, E.dim), dtype=np.complex128)
    for i, k in enumerate(mapping):
        effects[k] += E.effects[i]

    geometry = None
    if E.space.geometry is not None:
        fibers = [[i for i, k in enumerate(mapping) if k == kk] for kk in range(K)]
        contiguous = all(f == list(range(f[0], f[-1] + 1)) for f in fibers)
        if contiguous:
            cells = tuple(
                (E.space.geometry.cells[f[0]][0], E.space.geometry.cells[f[-1]][1])
                for f in fibers
            )
            try:
                geometry = CellGeometry(E.space.geometry.kind, cells)
            except Exception:
                geometry = None
    if geometry is not None:
        labels = tuple(f"cell{k}" for k in range(K))
    elif coarse_labels is not None:
        labels = tuple(str(t) for t in coarse_labels)
        if len(labels) != K:
            raise ShapeError(f"need {K} coarse labels, got {len(labels)}")
    else:
        labels = tuple(f"c{k}" for k in range(K))
    return QPM(OutcomeSpace(labels, geometry), E.dim, effects)
