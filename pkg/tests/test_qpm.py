import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpmetrics import (
    EXACT_CAP,
    QPM,
    InvalidArgumentError,
    InvariantViolationError,
    ScalarMeasure,
    ShapeError,
    TestFunction,
    apply_ucp,
    bw_gap,
    delta_distance,
    finite_space,
    indicator,
    operator_norm,
    random_qpm,
    rho_distance,
    rho_phase_grid,
    scalar_measure,
    sw_gap,
    total_variation,
    tv_norm,
    validate_qpm,
)

from conftest import brute_force_delta, brute_force_rho, classical, qpm_of

RT2 = np.sqrt(2.0)
KET0 = np.array([[1, 0], [0, 0]], dtype=complex)


class TestValidation:
    def test_projective_pair_ok(self, z_pair):
        report = validate_qpm(z_pair)
        assert report.ok and not report.violations
        assert report.sum_residual <= 1e-12

    def test_sum_deficit_reported(self):
        E = qpm_of([np.diag([1.0, 0.0]), np.diag([0.0, 0.9])])
        report = validate_qpm(E)
        assert not report.ok
        assert report.sum_residual == pytest.approx(0.1, abs=1e-12)
        assert any("sum" in v for v in report.violations)

    def test_out_of_range_effects_flagged_on_both_sides(self):
        E = qpm_of([np.diag([1.2, 0.0]), np.diag([-0.2, 1.0])])
        report = validate_qpm(E)
        assert not report.ok
        assert len(report.violations) == 2  # one per bad effect
        assert report.effect_bounds[0][1] == pytest.approx(1.2)
        assert report.effect_bounds[1][0] == pytest.approx(-0.2)

    def test_non_hermitian_effects_rejected_at_construction(self):
        with pytest.raises(InvariantViolationError):
            qpm_of([np.array([[0.5, 1.0], [0.0, 0.5]]), np.eye(2) * 0.5])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            QPM(finite_space(2), 2, np.zeros((3, 2, 2)))


class TestScalarCompression:
    def test_basis_vector_picks_diagonal(self, z_pair):
        mu = scalar_measure(z_pair, np.array([1, 0]), np.array([1, 0]))
        assert np.allclose(mu.weights, [1.0, 0.0])

    def test_balanced_vector_splits_mass(self, z_pair):
        xi = np.array([1, 1]) / RT2
        mu = scalar_measure(z_pair, xi, xi)
        assert np.allclose(mu.weights, [0.5, 0.5])

    def test_zero_second_vector_gives_zero_measure(self, x_pair):
        mu = scalar_measure(x_pair, np.array([1, 0]), np.zeros(2))
        assert np.allclose(mu.weights, 0.0)

    def test_unit_diagonal_compression_is_probability(self):
        E = random_qpm(3, 4, seed=2)
        rng = np.random.default_rng(0)
        xi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        xi = xi / np.linalg.norm(xi)
        mu = scalar_measure(E, xi, xi)
        assert np.all(mu.weights.real >= -1e-12)
        assert np.max(np.abs(mu.weights.imag)) <= 1e-12
        assert float(np.sum(mu.weights.real)) == pytest.approx(1.0, abs=1e-9)

    def test_dimension_mismatch_rejected(self, z_pair):
        with pytest.raises(ShapeError):
            scalar_measure(z_pair, np.array([1, 0, 0]), np.array([1, 0]))

    def test_tv_norm_sums_moduli(self, z_pair):
        mu = scalar_measure(z_pair, np.array([1, 0]), np.array([1, 0]))
        assert tv_norm(mu) == pytest.approx(1.0)
        tri = ScalarMeasure(finite_space(3), np.array([0.3, -0.2, 0.5j]))
        assert tv_norm(tri) == pytest.approx(1.0, abs=1e-12)
        assert tv_norm(ScalarMeasure(finite_space(2), np.zeros(2))) == 0.0


class TestUcpMap:
    def test_unitality(self):
        E = random_qpm(3, 5, seed=9)
        ones = TestFunction(E.space, np.ones(5))
        assert operator_norm(apply_ucp(E, ones) - np.eye(3)) <= 1e-12

    def test_indicator_extracts_effect(self, x_pair):
        for a in range(2):
            assert np.allclose(apply_ucp(x_pair, indicator(x_pair.space, a)), x_pair.effects[a])

    def test_signed_combination(self, z_pair):
        f = TestFunction(z_pair.space, np.array([1.0, -1.0]))
        assert np.allclose(apply_ucp(z_pair, f), np.diag([1.0, -1.0]))

    def test_space_mismatch_rejected(self, z_pair):
        f = TestFunction(finite_space(3), np.ones(3))
        with pytest.raises(ShapeError):
            apply_ucp(z_pair, f)


class TestTotalVariation:
    def test_projective(self, z_pair):
        assert total_variation(z_pair) == pytest.approx(1.0, abs=1e-9)

    def test_classical(self):
        assert total_variation(classical(0.2, 0.8)) == pytest.approx(1.0, abs=1e-12)

    def test_every_random_measure_has_unit_mass(self):
        for seed in range(20):
            E = random_qpm(2 + seed % 3, 2 + seed % 5, seed=seed)
            assert total_variation(E) == pytest.approx(1.0, abs=1e-9)

    def test_invalid_measure_rejected(self):
        E = qpm_of([np.diag([1.0, 0.0]), np.diag([0.0, 0.9])])
        with pytest.raises(InvariantViolationError):
            total_variation(E)


class TestRhoDistance:
    def test_self_distance_zero(self, x_pair):
        assert rho_distance(x_pair, x_pair).value == 0.0

    def test_classical_pair(self):
        res = rho_distance(classical(0.5, 0.5), classical(1.0, 0.0))
        assert res.value == pytest.approx(1.0, abs=1e-12)
        assert res.exact

    def test_conjugate_projective_pair(self, z_pair, x_pair):
        res = rho_distance(z_pair, x_pair)
        assert res.value == pytest.approx(RT2, abs=1e-12)
        assert res.certificate == (1, -1)

    def test_agrees_with_brute_force(self):
        for seed, m in ((0, 2), (1, 3), (2, 5)):
            E, F = random_qpm(2, m, seed=seed), random_qpm(2, m, seed=seed + 100)
            assert rho_distance(E, F).value == pytest.approx(
                brute_force_rho(E, F), abs=1e-11
            )

    def test_range_bounds(self):
        for seed in range(8):
            E, F = random_qpm(2, 4, seed=seed), random_qpm(2, 4, seed=seed + 50)
            assert 0.0 <= rho_distance(E, F).value <= 2.0 + 1e-12

    def test_shape_mismatch_rejected(self, z_pair):
        with pytest.raises(ShapeError):
            rho_distance(z_pair, classical(0.5, 0.5))


class TestDeltaDistance:
    def test_self_distance_zero(self, z_pair):
        assert delta_distance(z_pair, z_pair).value == 0.0

    def test_classical_pair(self):
        res = delta_distance(classical(0.5, 0.5), classical(1.0, 0.0))
        assert res.value == pytest.approx(0.5, abs=1e-12)

    def test_conjugate_projective_pair(self, z_pair, x_pair):
        res = delta_distance(z_pair, x_pair)
        assert res.value == pytest.approx(1 / RT2, abs=1e-12)
        assert res.certificate == (0,)

    def test_agrees_with_brute_force(self):
        for seed, m in ((3, 2), (4, 3), (5, 5)):
            E, F = random_qpm(2, m, seed=seed), random_qpm(2, m, seed=seed + 100)
            assert delta_distance(E, F).value == pytest.approx(
                brute_force_delta(E, F), abs=1e-11
            )

    def test_range_bounds(self):
        for seed in range(8):
            E, F = random_qpm(3, 4, seed=seed), random_qpm(3, 4, seed=seed + 50)
            assert 0.0 <= delta_distance(E, F).value <= 1.0 + 1e-12


class TestMetricStructure:
    def test_doubling_identity(self):
        for seed in range(10):
            E, F = random_qpm(2, 4, seed=seed), random_qpm(2, 4, seed=seed + 30)
            assert rho_distance(E, F).value == pytest.approx(
                2.0 * delta_distance(E, F).value, abs=1e-9
            )

    def test_symmetry_and_triangle(self):
        for seed in range(6):
            E = random_qpm(2, 3, seed=seed)
            F = random_qpm(2, 3, seed=seed + 10)
            R = random_qpm(2, 3, seed=seed + 20)
            for dist in (rho_distance, delta_distance):
                assert dist(E, F).value == pytest.approx(dist(F, E).value, abs=1e-12)
                assert dist(E, F).value <= dist(E, R).value + dist(R, F).value + 1e-9

    def test_identity_of_indiscernibles(self):
        E = random_qpm(2, 3, seed=77)
        assert rho_distance(E, E).value <= 1e-12
        F = random_qpm(2, 3, seed=78)
        if operator_norm(E.effects[0] - F.effects[0]) > 1e-6:
            assert rho_distance(E, F).value > 1e-6


class TestPhaseGridCrossCheck:
    def test_matches_sign_enumeration(self, z_pair, x_pair):
        assert rho_phase_grid(z_pair, x_pair) == pytest.approx(RT2, abs=1e-6)
        for seed in range(4):
            E, F = random_qpm(2, 3, seed=seed), random_qpm(2, 3, seed=seed + 9)
            rho = rho_distance(E, F).value
            grid = rho_phase_grid(E, F, k=16)
            assert grid == pytest.approx(rho, abs=1e-6)
            assert grid >= rho - 1e-12

    def test_combination_budget_enforced(self):
        E, F = random_qpm(2, 8, seed=0), random_qpm(2, 8, seed=1)
        with pytest.raises(InvalidArgumentError):
            rho_phase_grid(E, F, k=16, combo_limit=100)


def test_diagonal_ascent_never_beats_enumeration():
    rng = np.random.default_rng(123)
    for seed in range(5):
        E, F = random_qpm(2, 4, seed=seed), random_qpm(2, 4, seed=seed + 60)
        rho = rho_distance(E, F).value
        D = E.effects - F.effects
        for _ in range(20):
            xi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            xi = xi / np.linalg.norm(xi)
            ascent = float(sum(abs(np.vdot(xi, Da @ xi)) for Da in D))
            assert ascent <= rho + 1e-9


class TestWeakGaps:
    def test_sw_zero_on_equal(self, z_pair):
        assert sw_gap(z_pair, z_pair, [KET0]) == 0.0

    def test_sw_projector_probe(self, z_pair, x_pair):
        assert sw_gap(z_pair, x_pair, [KET0]) == pytest.approx(0.5, abs=1e-12)

    def test_sw_zero_functional(self, z_pair, x_pair):
        assert sw_gap(z_pair, x_pair, [np.zeros((2, 2))]) == 0.0

    def test_sw_empty_probe_list_rejected(self, z_pair, x_pair):
        with pytest.raises(InvalidArgumentError):
            sw_gap(z_pair, x_pair, [])

    def test_sw_needs_exact_mode(self):
        E, F = random_qpm(2, 5, seed=0), random_qpm(2, 5, seed=1)
        with pytest.raises(InvalidArgumentError):
            sw_gap(E, F, [KET0], exact_cap=3)

    def test_bw_zero_on_equal(self, x_pair):
        f = TestFunction(x_pair.space, np.array([1.0, -1.0]))
        assert bw_gap(x_pair, x_pair, [KET0], [f]) == 0.0

    def test_bw_signed_probe(self, z_pair, x_pair):
        f = TestFunction(z_pair.space, np.array([1.0, -1.0]))
        assert bw_gap(z_pair, x_pair, [KET0], [f]) == pytest.approx(1.0, abs=1e-12)

    def test_bw_with_indicators_equals_singleton_sw_bitwise(self):
        E, F = random_qpm(3, 4, seed=21), random_qpm(3, 4, seed=22)
        rng = np.random.default_rng(4)
        Ts = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3)]
        fns = [indicator(E.space, a) for a in range(4)]
        bw = bw_gap(E, F, Ts, fns)
        singles = max(
            float(abs(np.einsum("ij,ji->", E.effects[a] - F.effects[a], T)))
            for a in range(4)
            for T in Ts
        )
        assert bw == singles  # exact float equality, same arithmetic path
        assert bw <= sw_gap(E, F, Ts) + 1e-15


class TestHeuristicBracket:
    def test_bracket_contains_exact_value(self):
        E, F = random_qpm(2, 6, seed=31), random_qpm(2, 6, seed=32)
        exact = rho_distance(E, F)
        heur = rho_distance(E, F, exact_cap=4)
        assert not heur.exact and exact.exact
        assert heur.value <= exact.value + 1e-9
        assert exact.value <= heur.upper + 1e-12
        norm_sum = float(sum(operator_norm(D) for D in E.effects - F.effects))
        assert heur.upper == pytest.approx(norm_sum, abs=1e-12)

    def test_delta_heuristic_bracket(self):
        E, F = random_qpm(2, 6, seed=41), random_qpm(2, 6, seed=42)
        exact = delta_distance(E, F)
        heur = delta_distance(E, F, exact_cap=4)
        assert not heur.exact
        assert heur.value <= exact.value + 1e-9 <= heur.upper + 1e-9

    def test_default_cap(self):
        assert EXACT_CAP == 16


@st.composite
def probability_pairs(draw):
    m = draw(st.integers(min_value=1, max_value=6))
    raw = draw(
        st.lists(
            st.floats(min_value=1e-3, max_value=1.0), min_size=2 * m, max_size=2 * m
        )
    )
    p = np.array(raw[:m]) / np.sum(raw[:m])
    q = np.array(raw[m:]) / np.sum(raw[m:])
    return p, q


@given(probability_pairs())
@settings(max_examples=40, deadline=None)
def test_scalar_distances_reduce_to_l1(pq):
    """For d=1 the sign enumeration is the l1 distance and the subset
    maximum is half of it."""
    p, q = pq
    E, F = classical(*p), classical(*q)
    l1 = float(np.sum(np.abs(p - q)))
    assert rho_distance(E, F).value == pytest.approx(l1, abs=1e-10)
    assert delta_distance(E, F).value == pytest.approx(l1 / 2.0, abs=1e-10)
