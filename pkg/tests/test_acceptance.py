"""End-to-end acceptance checks.

Each check prints a single PASS/FAIL line so the test log doubles as a
release checklist.  Tolerances and corpus sizes are pinned here on
purpose; loosening them is a behavior change, not a test fix.
"""

import json
import time

import numpy as np
import pytest

from qpmetrics import (
    Channel,
    InputMeasure,
    ModMuChannel,
    ParseError,
    QPM,
    SpaceSpec,
    bures_distance,
    bw_pairing,
    canonicalize_mod_mu,
    channel_opnorm_gap,
    delta_distance,
    dilation_residual,
    discretize_scalar_density,
    equiv_mod_mu,
    extract_convergent_subsequence,
    indicator,
    input_space,
    is_spectral,
    naimark_dilate,
    naimark_mod_mu,
    parse_instance,
    random_channel,
    random_qpm,
    random_sequence,
    rho_distance,
    rho_phase_grid,
    rho_tilde,
    serialize_instance,
    total_variation,
    ucp_equiv_mod_mu,
    uniform_measure,
    WeightFunction,
)

from conftest import classical, opnorm, random_spectral_qpm

DIMS = (1, 2, 3, 4, 5, 6)
COUNTS = (2, 3, 4, 5, 6, 7, 8)
N_PAIRS = 500


def _report(criterion: int, label: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {criterion:2d}: {label} — {detail}")
    assert ok, f"criterion {criterion}: {label} ({detail})"


@pytest.fixture(scope="module")
def corpus():
    """Seeded random measure pairs covering d <= 6, m <= 8."""
    pairs = []
    for i in range(N_PAIRS):
        d, m = DIMS[i % len(DIMS)], COUNTS[i % len(COUNTS)]
        E = random_qpm(d, m, seed=2 * i)
        F = random_qpm(d, m, seed=2 * i + 1)
        pairs.append((E, F))
    return pairs


def test_criterion_01_rho_equals_twice_delta(corpus):
    start = time.perf_counter()
    worst = 0.0
    for E, F in corpus:
        r = rho_distance(E, F)
        d = delta_distance(E, F)
        assert r.exact and d.exact
        worst = max(worst, abs(r.value - 2.0 * d.value))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed <= 60.0
    _report(
        1,
        "rho == 2*delta in exact mode",
        ok,
        f"max |rho-2delta| = {worst:.3e} over {len(corpus)} pairs in {elapsed:.1f}s",
    )


def test_criterion_02_sign_enumeration_matches_phase_grid():
    worst, count = 0.0, 0
    for i in range(200):
        d, m = (2, 3)[i % 2], (2, 3, 4)[i % 3]
        E = random_qpm(d, m, seed=20_000 + 2 * i)
        F = random_qpm(d, m, seed=20_001 + 2 * i)
        rho = rho_distance(E, F).value
        grid = rho_phase_grid(E, F, k=16)
        worst = max(worst, abs(rho - grid))
        count += 1
    ok = worst <= 1e-6
    _report(
        2,
        "sign enumeration matches 16-point phase grid",
        ok,
        f"max deviation = {worst:.3e} over {count} pairs",
    )


def test_criterion_03_total_variation_is_one(corpus):
    worst = 0.0
    for E, F in corpus:
        worst = max(worst, abs(total_variation(E) - 1.0), abs(total_variation(F) - 1.0))
    ok = worst <= 1e-9
    _report(
        3,
        "every measure has unit total variation",
        ok,
        f"max |tv-1| = {worst:.3e} over {2 * len(corpus)} measures",
    )


def test_criterion_04_triangle_inequalities(corpus):
    worst_rho = worst_delta = 0.0
    for i in range(200):
        E, F = corpus[i]
        d, m = DIMS[i % len(DIMS)], COUNTS[i % len(COUNTS)]
        G = random_qpm(d, m, seed=40_000 + i)
        worst_rho = max(
            worst_rho,
            rho_distance(E, G).value
            - rho_distance(E, F).value
            - rho_distance(F, G).value,
        )
        worst_delta = max(
            worst_delta,
            delta_distance(E, G).value
            - delta_distance(E, F).value
            - delta_distance(F, G).value,
        )
    worst_chan = 0.0
    for i in range(200):
        d, m, n = (1, 2, 3)[i % 3], (2, 3)[i % 2], (2, 3)[i % 2]
        A = random_channel(d, m, n, seed=41_000 + 3 * i)
        B = random_channel(d, m, n, seed=41_001 + 3 * i)
        C = random_channel(d, m, n, seed=41_002 + 3 * i)
        worst_chan = max(
            worst_chan,
            rho_tilde(A, C).value - rho_tilde(A, B).value - rho_tilde(B, C).value,
        )
    worst = max(worst_rho, worst_delta, worst_chan)
    ok = worst <= 1e-9
    _report(
        4,
        "triangle inequality for rho, delta and the channel distance",
        ok,
        f"max violation = {worst:.3e} over 3x200 triples",
    )


def test_criterion_05_projection_valued_dilations(corpus):
    worst = 0.0
    env_ok = True
    for E, _ in corpus:
        triple = naimark_dilate(E, minimal=True)
        assert is_spectral(triple.spectral.underlying).ok
        worst = max(worst, dilation_residual(E, triple.spectral, triple.isometry))
        env_ok = env_ok and triple.env_dim <= len(E.space) * E.dim
    spectral_env_ok = True
    for i, (d, m) in enumerate(((2, 2), (3, 2), (3, 3), (4, 3), (5, 4), (6, 5), (6, 6))):
        for s in range(3):
            P = random_spectral_qpm(d, m, seed=50_000 + 10 * i + s)
            t = naimark_dilate(P, minimal=True)
            spectral_env_ok = spectral_env_ok and t.env_dim == d
            worst = max(worst, dilation_residual(P, t.spectral, t.isometry))
    ok = worst <= 1e-9 and env_ok and spectral_env_ok
    _report(
        5,
        "dilations are projection-valued with faithful reconstruction",
        ok,
        f"max residual = {worst:.3e}; env bounds hold; projection-valued inputs keep env_dim = d",
    )


def test_criterion_06_dilation_distance_bracket(corpus):
    bracket_ok = True
    detail_worst = 0.0
    for i in range(200):
        E, F = corpus[i]
        res = bures_distance(E, F, restarts=16, seed=i)
        rho = rho_distance(E, F).value
        low_ok = rho / 2.0 - 1e-7 <= res.upper
        high_ok = res.upper <= np.sqrt(rho) + 1e-6
        bracket_ok = bracket_ok and low_ok and high_ok
        detail_worst = max(detail_worst, res.upper - np.sqrt(rho))

    tight_worst = 0.0
    for p, q in (
        ((1.0, 0.0), (0.0, 1.0)),
        ((1.0, 0.0, 0.0), (0.0, 0.5, 0.5)),
        ((0.5, 0.5, 0.0, 0.0), (0.0, 0.0, 0.5, 0.5)),
    ):
        E, F = classical(*p), classical(*q)
        upper = bures_distance(E, F).upper
        root_rho = np.sqrt(rho_distance(E, F).value)
        tight_worst = max(tight_worst, abs(upper - root_rho))

    closed_worst = 0.0
    for i in range(100):
        m = (2, 3, 4, 5)[i % 4]
        E = random_qpm(1, m, seed=60_000 + 2 * i)
        F = random_qpm(1, m, seed=60_001 + 2 * i)
        p = E.effects[:, 0, 0].real
        q = F.effects[:, 0, 0].real
        closed = np.sqrt(max(2.0 - 2.0 * float(np.sum(np.sqrt(p * q))), 0.0))
        numeric = bures_distance(E, F, use_closed_form=False, restarts=8, seed=i).upper
        closed_worst = max(closed_worst, abs(numeric - closed))

    ok = bracket_ok and tight_worst <= 1e-6 and closed_worst <= 1e-6
    _report(
        6,
        "dilation distance sits in [rho/2, sqrt(rho)] with tight disjoint and scalar cases",
        ok,
        f"max upper-sqrt(rho) = {detail_worst:.3e}; disjoint tightness {tight_worst:.3e}; "
        f"scalar closed-form deviation {closed_worst:.3e}",
    )


def test_criterion_07_channel_distance_dual_paths():
    worst = 0.0
    for i in range(200):
        d, m, n = (1, 2, 3)[i % 3], (2, 3, 4)[i % 3], (2, 3)[i % 2]
        A = random_channel(d, m, n, seed=70_000 + 2 * i)
        B = random_channel(d, m, n, seed=70_001 + 2 * i)
        worst = max(worst, abs(rho_tilde(A, B).value - channel_opnorm_gap(A, B)))
    ok = worst <= 1e-9
    _report(
        7,
        "per-input supremum equals the map-level norm gap",
        ok,
        f"max |difference| = {worst:.3e} over 200 channel pairs",
    )


def test_criterion_08_sequential_compactness():
    min_len = None
    pairwise_ok = True
    for seed in range(50):
        seq = random_sequence(1, 2, 1, length=200, seed=80_000 + seed)
        res = extract_convergent_subsequence(seq, tol=0.15)
        n = len(res.indices)
        min_len = n if min_len is None else min(min_len, n)
        pairwise_ok = pairwise_ok and res.pairwise_max <= 0.15

    shrink_ok = True
    for seed in range(50):
        seq = random_sequence(2, 2, 2, length=200, seed=81_000 + seed, drift="shrink")
        res = extract_convergent_subsequence(seq, tol=0.15)
        shrink_ok = shrink_ok and res.indices == tuple(range(200))
        gaps = np.asarray(res.gap_trace)
        smoothed = np.convolve(gaps, np.ones(5) / 5.0, mode="valid")
        shrink_ok = shrink_ok and bool(np.all(np.diff(smoothed) <= 1e-12))

    ok = min_len is not None and min_len >= 15 and pairwise_ok and shrink_ok
    _report(
        8,
        "bounded sequences yield pointwise-clustered subsequences",
        ok,
        f"min subsequence length = {min_len} (>= 15), pairwise <= 0.15; "
        f"shrink drift keeps the whole sequence with a settling gap trace",
    )


def test_criterion_09_almost_everywhere_equivalence_iff():
    agreements = 0
    truth_ok = True
    for i in range(100):
        E = random_channel(2, 2, 3, seed=90_000 + 3 * i)
        fam = np.array(E.family)
        fam[2] = random_qpm(2, 2, seed=90_001 + 3 * i).effects
        F = Channel(E.inputs, E.space, 2, fam)
        mu = InputMeasure(E.inputs, (0.5, 0.5, 0.0))
        direct, _ = equiv_mod_mu(E, F, mu)
        probe = ucp_equiv_mod_mu(E, F, mu)
        agreements += direct == probe
        truth_ok = truth_ok and direct is True
    for i in range(100):
        E = random_channel(2, 2, 3, seed=91_000 + 3 * i)
        fam = np.array(E.family)
        fam[0] = random_qpm(2, 2, seed=91_001 + 3 * i).effects
        F = Channel(E.inputs, E.space, 2, fam)
        mu = InputMeasure(E.inputs, (0.5, 0.5, 0.0))
        direct, witness = equiv_mod_mu(E, F, mu)
        probe = ucp_equiv_mod_mu(E, F, mu)
        agreements += direct == probe
        truth_ok = truth_ok and direct is False and witness is not None
    ok = agreements == 200 and truth_ok
    _report(
        9,
        "effectwise and map-level almost-everywhere equivalence coincide",
        ok,
        f"{agreements}/200 constructed pairs agree (half equal on support, half not)",
    )


def test_criterion_10_pairing_specializes_to_weighted_sums():
    worst = 0.0
    for i in range(200):
        d, m, n = 2, (2, 3)[i % 2], (2, 3)[i % 2]
        E = random_channel(d, m, n, seed=100_000 + i)
        gen = np.random.default_rng(i)
        mu = InputMeasure(E.inputs, tuple(gen.dirichlet(np.ones(n))))
        dot = ModMuChannel(E, mu)
        a = int(gen.integers(m))
        subset = gen.integers(2, size=n).astype(float)
        omega = WeightFunction(E.inputs, subset)
        xi = gen.standard_normal(d) + 1j * gen.standard_normal(d)
        eta = gen.standard_normal(d) + 1j * gen.standard_normal(d)
        val = bw_pairing(dot, indicator(E.space, a), omega, xi, eta)
        direct = sum(
            mu.weights[x] * np.vdot(eta, E.family[x, a] @ xi)
            for x in range(n)
            if subset[x]
        )
        worst = max(worst, abs(val - direct))
    ok = worst <= 1e-12
    _report(
        10,
        "indicator pairings equal their weighted effect sums",
        ok,
        f"max |difference| = {worst:.3e} over 200 configurations",
    )


def test_criterion_11_mod_mu_dilation():
    worst = 0.0
    spectral_ok = True
    for i in range(100):
        m, n = (2, 3)[i % 2], (2, 3)[i % 2]
        E = random_channel(2, m, n, seed=110_000 + i)
        weights = np.full(n, 1.0 / n)
        if i % 2:
            weights = np.zeros(n)
            weights[: n - 1] = 1.0 / (n - 1)
        mu = InputMeasure(E.inputs, tuple(weights))
        res = naimark_mod_mu(ModMuChannel(E, mu))
        worst = max(worst, res.residual)
        V = res.isometry
        for x in mu.support:
            spectral_ok = spectral_ok and is_spectral(res.channel.qpm_at(x)).ok
            for a in range(m):
                rec = np.conj(V.T) @ res.channel.family[x, a] @ V
                worst = max(worst, opnorm(rec - E.family[x, a]))
    ok = worst <= 1e-8 and spectral_ok
    _report(
        11,
        "one isometry dilates a weighted channel on its support",
        ok,
        f"max reconstruction residual = {worst:.3e} over 100 channels",
    )


def test_criterion_12_serialization_round_trip():
    ch = random_channel(2, 2, 2, seed=120_001)
    fixtures = [
        random_qpm(2, 3, seed=120_000),
        discretize_scalar_density("uniform", SpaceSpec("interval", 4)),
        discretize_scalar_density("uniform", SpaceSpec("circle", 3)),
        ch,
        ModMuChannel(ch, uniform_measure(ch.inputs)),
        canonicalize_mod_mu(ch, InputMeasure(ch.inputs, (1.0, 0.0))),
        random_sequence(1, 2, 2, length=3, seed=120_002),
        InputMeasure(input_space(3), (0.5, 0.25, 0.25)),
        naimark_dilate(random_qpm(2, 2, seed=120_003)).spectral,
    ]
    round_trip_ok = True
    for obj in fixtures:
        text = serialize_instance(obj, provenance={"seed": 1})
        again = serialize_instance(parse_instance(text))
        round_trip_ok = round_trip_ok and text == again

    base = json.loads(serialize_instance(random_qpm(1, 2, seed=120_004)))

    def mutated(**changes):
        doc = {k: v for k, v in base.items()}
        for key, value in changes.items():
            if value is None:
                doc.pop(key, None)
            else:
                doc[key] = value
        return json.dumps(doc)

    malformed = [
        '{"kind": ',
        "[1, 2]",
        mutated(schema=None),
        mutated(schema="qpm-instance/99"),
        mutated(kind="blob"),
        mutated(surprise=1),
        mutated(effects=None),
        mutated(dim="two"),
        mutated(space={"atoms": ["a0", "a1"], "mood": "tense"}),
        mutated(effects=[[[[0.5, 0.0, 0.0]]], [[[0.5, 0.0]]]]),
        mutated(effects=[[[[0.5, 0.0]]]]),
        mutated(provenance={"author": "x"}),
        serialize_instance(random_qpm(1, 2, seed=120_005)).replace("0.", "NaN, 0.", 1).replace("[NaN, 0.", "[NaN, ", 1),
        mutated(provenance={"seed": 1e999}),
    ]
    rejected = 0
    for text in malformed:
        try:
            parse_instance(text)
        except ParseError:
            rejected += 1
    ok = round_trip_ok and rejected == len(malformed)
    _report(
        12,
        "instance files round-trip byte-for-byte and malformed inputs are rejected",
        ok,
        f"{len(fixtures)} fixtures stable; {rejected}/{len(malformed)} malformed rejected",
    )
