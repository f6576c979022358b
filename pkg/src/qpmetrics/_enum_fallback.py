"""Pure-NumPy enumeration kernels (fallback backend).

Same contracts as the compiled twin in ``_enum_kernels.pyx``:

* ``max_signed_opnorm``  — maximize ``||sum_a eps_a D_a||`` over sign
  vectors ``eps`` in {+1,-1}^m with ``eps_0 = +1`` fixed (global-sign
  quotient).  Returns ``(value, mask)`` where bit ``j-1`` of ``mask``
  set means ``eps_j = -1``.
* ``max_subset_extreme`` — maximize ``lambda_max(sum_{a in S} D_a)``
  over nonempty proper subsets S.  Only subsets containing atom 0 are
  enumerated; each complement is scored as ``-lambda_min`` of the same
  accumulated matrix.  Returns ``(value, mask)`` with bit ``a`` of
  ``mask`` set iff atom ``a`` is in the winning subset.
* ``phase_grid_max_opnorm`` — maximize over k-th root-of-unity phase
  vectors with the first phase fixed to 1, scoring each combination by
  the norm of its self-adjoint part (its best diagonal compression).

Exact float ties are broken toward the smaller mask, so results are
independent of enumeration order and chunking.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 4096


def _reduce(best: tuple[float, int], vals: np.ndarray, masks: np.ndarray) -> tuple[float, int]:
    """Fold (vals, masks) candidates into the running (value, mask) best."""
    if vals.size == 0:
        return best
    mx = float(vals.max())
    if mx > best[0]:
        return mx, int(masks[vals == mx].min())
    if mx == best[0]:
        return mx, min(best[1], int(masks[vals == mx].min()))
    return best


def max_signed_opnorm(diffs: np.ndarray) -> tuple[float, int]:
    D = np.ascontiguousarray(diffs, dtype=np.complex128)
    m, d, _ = D.shape
    flat = D.reshape(m, d * d)
    total = 1 << (m - 1)
    best = (-np.inf, 0)
    bit_cols = np.arange(m - 1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        bits = (idx[:, None] >> bit_cols) & 1          # (chunk, m-1)
        eps = np.empty((idx.size, m))
        eps[:, 0] = 1.0
        eps[:, 1:] = 1.0 - 2.0 * bits
        acc = (eps @ flat).reshape(idx.size, d, d)
        w = np.linalg.eigvalsh(acc)
        vals = np.maximum(np.abs(w[:, 0]), np.abs(w[:, -1]))
        best = _reduce(best, vals, idx)
    return best


def max_subset_extreme(diffs: np.ndarray) -> tuple[float, int]:
    D = np.ascontiguousarray(diffs, dtype=np.complex128)
    m, d, _ = D.shape
    flat = D.reshape(m, d * d)
    total = 1 << (m - 1)
    full = (1 << m) - 1
    best = (-np.inf, full + 1)
    bit_cols = np.arange(m - 1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        member = np.empty((idx.size, m))
        member[:, 0] = 1.0
        member[:, 1:] = (idx[:, None] >> bit_cols) & 1
        acc = (member @ flat).reshape(idx.size, d, d)
        w = np.linalg.eigvalsh(acc)
        masks_s = (idx << 1) | 1
        proper = masks_s != full            # S = full set is not a proper subset
        best = _reduce(best, w[:, -1][proper], masks_s[proper])
        # complements (never contain atom 0, hence never empty except at S = full)
        best = _reduce(best, -w[:, 0][proper], (full ^ masks_s)[proper])
    return best


def phase_grid_max_opnorm(diffs: np.ndarray, k: int) -> float:
    D = np.ascontiguousarray(diffs, dtype=np.complex128)
    m, d, _ = D.shape
    flat = D.reshape(m, d * d)
    total = k ** (m - 1)
    roots = np.exp(2j * np.pi * np.arange(k) / k)
    digit_div = k ** np.arange(m - 1, dtype=np.int64)
    best = 0.0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // digit_div) % k       # (chunk, m-1)
        eps = np.empty((idx.size, m), dtype=np.complex128)
        eps[:, 0] = 1.0
        eps[:, 1:] = roots[digits]
        acc = (eps @ flat).reshape(idx.size, d, d)
        # Score the self-adjoint part: |<A xi, xi>| sees only Herm(A),
        # and Herm(sum_a eps_a D_a) = sum_a Re(eps_a) D_a lies in the
        # convex hull of the sign combinations, so this maximum is
        # pinched against the sign-vector maximum from both sides.
        herm = 0.5 * (acc + np.conj(np.transpose(acc, (0, 2, 1))))
        w = np.linalg.eigvalsh(herm)
        best = max(best, float(np.maximum(np.abs(w[:, 0]), np.abs(w[:, -1])).max()))
    return best
