"""Seeded instance generators.

Streams are counter-based and splittable: every draw site derives its
generator from ``(seed, path)`` where ``path`` is a fixed tuple of
role/index counters, so per-input and per-term draws are independent,
platform-stable, and reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np

from .channels import Channel, ChannelSequence, InputSpace, input_space
from .errors import InvalidArgumentError, InvariantViolationError
from .operators import dagger, hermitize, operator_norm
from .qpm import QPM, OutcomeSpace, finite_space, validate_qpm

_MAX_ATTEMPTS = 8
_SINGULAR_RTOL = 1e-12
_GEN_SUM_TOL = 1e-12
_SHRINK_AMP_CAP = 0.05
_SHRINK_MARGIN_FRACTION = 0.8


def _generator(seed: int, path: tuple[int, ...]) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def _ginibre(gen: np.random.Generator, shape) -> np.ndarray:
    re = gen.standard_normal(shape)
    im = gen.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def _normalized_effects(d: int, m: int, seed: int, path_prefix: tuple[int, ...]) -> np.ndarray:
    """Draw m Wishart blocks and conjugate by the inverse square root of
    their sum; retries with a bumped attempt counter if the sum is
    numerically singular."""
    for attempt in range(_MAX_ATTEMPTS + 1):
        gen = _generator(seed, path_prefix + (attempt,))
        G = _ginibre(gen, (m, d, d))
        P = np.einsum("aij,akj->aik", G, np.conj(G))
        S = hermitize(np.sum(P, axis=0))
        w, U = np.linalg.eigh(S)
        if w[0] <= _SINGULAR_RTOL * max(w[-1], 1.0):
            continue
        inv_root = (U / np.sqrt(w)) @ dagger(U)
        effects = hermitize(np.einsum("ij,ajk,kl->ail", inv_root, P, inv_root))
        residual = operator_norm(np.sum(effects, axis=0) - np.eye(d))
        if residual > _GEN_SUM_TOL:
            continue
        return effects
    raise InvariantViolationError(
        f"could not draw a well-conditioned measure after {_MAX_ATTEMPTS + 1} attempts"
    )


def _check_counts(**counts: int) -> None:
    for name, value in counts.items():
        if int(value) < 1:
            raise InvalidArgumentError(f"{name} must be >= 1, got {value}")


def random_qpm(d: int, m: int, seed: int, space: OutcomeSpace | None = None) -> QPM:
    """Seeded random measure: normalized Wishart blocks; always valid
    with sum residual <= 1e-12."""
    _check_counts(d=d, m=m)
    if space is None:
        space = finite_space(m)
    elif len(space) != m:
        raise InvalidArgumentError(f"space has {len(space)} atoms, expected {m}")
    E = QPM(space, d, _normalized_effects(d, m, seed, (0,)))
    if not validate_qpm(E).ok:
        raise InvariantViolationError("generator produced an invalid measure")
    return E


def _random_family(
    d: int, m: int, n: int, seed: int, path_prefix: tuple[int, ...]
) -> np.ndarray:
    return np.stack(
        [_normalized_effects(d, m, seed, path_prefix + (x,)) for x in range(n)]
    )


def random_channel(d: int, m: int, n: int, seed: int) -> Channel:
    """Seeded random channel: independent per-input measures."""
    _check_counts(d=d, m=m, n=n)
    family = _random_family(d, m, n, seed, (1,))
    return Channel(input_space(n), finite_space(m), d, family)


def _shrink_direction(d: int, m: int, n: int, seed: int) -> np.ndarray:
    """Zero-sum Hermitian perturbation direction with max effect norm 1."""
    gen = _generator(seed, (3, 1))
    H = hermitize(_ginibre(gen, (n, m, d, d)))
    H -= np.mean(H, axis=1, keepdims=True)
    scale = max(
        operator_norm(H[x, a]) for x in range(n) for a in range(m)
    )
    if scale <= 0:
        raise InvariantViolationError("degenerate perturbation direction")
    return H / scale


def random_sequence(
    d: int, m: int, n: int, length: int, seed: int, drift: str = "none"
) -> ChannelSequence:
    """Seeded channel sequence.

    ``drift="none"`` draws terms independently.  ``drift="shrink"``
    perturbs one base channel along a fixed zero-sum direction with
    alternating sign and magnitude ``amp / (2*ceil(t/2))`` at term t
    (1-based), so every term is an exact channel, term-to-base distance
    is bounded by ``amp/t``, and successive gaps strictly decrease.
    """
    _check_counts(d=d, m=m, n=n, length=length)
    inputs, space = input_space(n), finite_space(m)
    if drift == "none":
        terms = [
            Channel(inputs, space, d, _random_family(d, m, n, seed, (2, t)))
            for t in range(length)
        ]
        return ChannelSequence(tuple(terms))
    if drift != "shrink":
        raise InvalidArgumentError(f"unknown drift mode {drift!r}")

    base = _random_family(d, m, n, seed, (3, 0))
    direction = _shrink_direction(d, m, n, seed)
    w = np.linalg.eigvalsh(base.reshape(n * m, d, d))
    margin = float(min(np.min(w[:, 0]), np.min(1.0 - w[:, -1])))
    amp = min(_SHRINK_MARGIN_FRACTION * max(margin, 0.0), _SHRINK_AMP_CAP)
    terms = []
    for t in range(1, length + 1):
        mag = amp / (2.0 * ((t + 1) // 2))
        sign = 1.0 if t % 2 == 1 else -1.0
        terms.append(Channel(inputs, space, d, base + (sign * mag) * direction))
    return ChannelSequence(tuple(terms))
