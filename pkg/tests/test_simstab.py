import numpy as np
import pytest

from limas.control import SystemPair, ackermann_basis
from limas.errors import DimensionMismatch, OrderTooLarge, SingularControllability
from limas.simstab import (
    build_full_lp,
    dump_reduced_lp,
    reduce_lp,
    sign_matrix,
    simultaneous_gain,
    solve_feasibility,
    verify_gain,
)


def random_controllable(rng, m, scale=1.0):
    while True:
        a = scale * rng.standard_normal((m, m))
        b = rng.standard_normal(m)
        try:
            return SystemPair(a, b)
        except SingularControllability:
            continue


def scalar_pair(a, b=1.0):
    return SystemPair(np.array([[float(a)]]), np.array([float(b)]))


def scalar_stable_interval(pair):
    """Open interval of gains k with |a + b k| < 1, endpoints sorted."""
    a = pair.a_mat[0, 0]
    b = pair.b_vec[0]
    lo, hi = (-1.0 - a) / b, (1.0 - a) / b
    return (min(lo, hi), max(lo, hi))


def scalar_oracle_margin(pairs, grid_iters=80):
    """Max over k of min_l (1 - |a_l + b_l k|) via ternary search (concave)."""
    intervals = [scalar_stable_interval(p) for p in pairs]
    lo = max(iv[0] for iv in intervals)
    hi = min(iv[1] for iv in intervals)
    if lo >= hi:
        return -np.inf

    def margin(k):
        return min(1.0 - abs(p.a_mat[0, 0] + p.b_vec[0] * k) for p in pairs)

    for _ in range(grid_iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if margin(m1) < margin(m2):
            lo = m1
        else:
            hi = m2
    return margin(0.5 * (lo + hi))


class TestSignMatrix:
    def test_m1(self):
        assert np.array_equal(sign_matrix(1).rows, [[-1.0], [1.0]])

    def test_m2_all_patterns(self):
        rows = {tuple(r) for r in sign_matrix(2).rows}
        assert rows == {(-1, -1), (-1, 1), (1, -1), (1, 1)}

    def test_deterministic_order(self):
        assert np.array_equal(sign_matrix(2).rows, sign_matrix(2).rows)
        assert tuple(sign_matrix(2).rows[0]) == (-1.0, -1.0)

    def test_encodes_absolute_sum(self):
        gamma = sign_matrix(2).rows
        assert np.all(gamma @ np.array([0.4, -0.3]) <= 1.0)
        assert np.any(gamma @ np.array([0.8, 0.5]) > 1.0)

    def test_order_cap(self):
        with pytest.raises(OrderTooLarge):
            sign_matrix(17)
        with pytest.raises(OrderTooLarge):
            sign_matrix(0)


class TestBuildFullLp:
    def test_identical_pairs_zero_offset(self):
        pairs = [scalar_pair(0.5) for _ in range(4)]
        full = build_full_lp(pairs)
        assert np.allclose(full.v_vec, 0.0)
        assert np.all(full.h_vec == 1.0)

    def test_two_scalar_pairs(self):
        full = build_full_lp([scalar_pair(0.2), scalar_pair(0.9)])
        # V_l = [-1/b] = [-1]; v_l = [-a_l]; V = [V_1^T, -V_2^T], v = v_2 - v_1.
        assert np.allclose(full.v_mat, [[-1.0, 1.0]])
        assert np.allclose(full.v_vec, [0.2 - 0.9])

    def test_h_is_kron_identity_gamma(self):
        pairs = [scalar_pair(0.1), scalar_pair(0.2), scalar_pair(0.3)]
        full = build_full_lp(pairs)
        assert np.array_equal(full.h_mat, np.kron(np.eye(3), sign_matrix(1).rows))

    def test_full_row_rank(self):
        rng = np.random.default_rng(8)
        pairs = [random_controllable(rng, 2) for _ in range(3)]
        full = build_full_lp(pairs)
        assert full.v_mat.shape == (4, 6)
        assert np.linalg.matrix_rank(full.v_mat) == 4

    def test_rejects_single_pair(self):
        with pytest.raises(DimensionMismatch):
            build_full_lp([scalar_pair(0.5)])

    def test_rejects_mixed_orders(self):
        rng = np.random.default_rng(9)
        with pytest.raises(DimensionMismatch):
            build_full_lp([scalar_pair(0.5), random_controllable(rng, 2)])


class TestReduceLp:
    def test_identities(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            m = int(rng.integers(1, 4))
            pairs = [random_controllable(rng, m) for _ in range(int(rng.integers(2, 6)))]
            full = build_full_lp(pairs)
            reduced = reduce_lp(full, pairs)
            n_eq = full.v_mat.shape[0]
            assert np.abs(full.v_mat @ reduced.v_dagger - np.eye(n_eq)).max() <= 1e-8
            assert np.abs(full.v_mat @ reduced.psi).max() <= 1e-8
            assert np.linalg.matrix_rank(reduced.psi) == m

    def test_identical_pairs_unit_rhs(self):
        pairs = [scalar_pair(0.5) for _ in range(3)]
        full = build_full_lp(pairs)
        reduced = reduce_lp(full, pairs)
        assert np.allclose(reduced.b_ineq, 1.0)

    def test_two_scalar_pairs_psi(self):
        pairs = [scalar_pair(0.2), scalar_pair(0.9)]
        reduced = reduce_lp(build_full_lp(pairs), pairs)
        assert np.allclose(reduced.psi, [[-1.0], [-1.0]])


class TestSolveFeasibility:
    def test_identical_pairs_feasible_with_expected_gain(self):
        pairs = [scalar_pair(0.5) for _ in range(3)]
        verdict = solve_feasibility(reduce_lp(build_full_lp(pairs), pairs))
        assert verdict.feasible
        # Deadbeat-like optimum: closed-loop pole at 0 for every pair.
        assert verdict.gain == pytest.approx([-0.5], abs=1e-9)
        assert verify_gain(pairs, verdict.gain)

    def test_disjoint_scalar_intervals_infeasible(self):
        verdict = simultaneous_gain([scalar_pair(0.5), scalar_pair(5.0)])
        assert not verdict.feasible
        assert verdict.gain is None

    def test_two_unstable_scalars_feasible(self):
        pairs = [scalar_pair(1.2), scalar_pair(1.5)]
        verdict = simultaneous_gain(pairs)
        assert verdict.feasible
        for pair in pairs:
            assert abs(pair.a_mat[0, 0] + verdict.gain[0]) < 1.0

    def test_soundness_random(self):
        rng = np.random.default_rng(11)
        feasible_seen = 0
        for _ in range(200):
            m = int(rng.integers(1, 4))
            pairs = [
                random_controllable(rng, m, scale=rng.uniform(0.3, 1.2))
                for _ in range(int(rng.integers(2, 7)))
            ]
            verdict = simultaneous_gain(pairs)
            if verdict.feasible:
                feasible_seen += 1
                assert verify_gain(pairs, verdict.gain, 1e-9)
        assert feasible_seen > 10  # sanity: the sample exercises both branches

    def test_identical_pair_completeness(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            m = int(rng.integers(1, 4))
            pair = random_controllable(rng, m, scale=2.0)
            pairs = [pair] * int(rng.integers(2, 6))
            assert simultaneous_gain(pairs).feasible

    def test_scalar_oracle_agreement(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            pairs = [
                scalar_pair(rng.uniform(-2.5, 2.5), rng.uniform(0.2, 3.0) * rng.choice([-1, 1]))
                for _ in range(int(rng.integers(2, 7)))
            ]
            verdict = simultaneous_gain(pairs)
            assert verdict.feasible == (scalar_oracle_margin(pairs) > 1e-9)

    def test_never_feasible_without_true_common_gain(self):
        # Brute-force grid refutation: wherever the LP says feasible for m = 1,
        # the grid must find a stabilizing gain too (soundness direction).
        rng = np.random.default_rng(14)
        for _ in range(50):
            pairs = [scalar_pair(rng.uniform(-2, 2)) for _ in range(3)]
            verdict = simultaneous_gain(pairs)
            lo = min(scalar_stable_interval(p)[0] for p in pairs)
            hi = max(scalar_stable_interval(p)[1] for p in pairs)
            grid = np.linspace(lo, hi, 4001)
            stable = [
                k for k in grid if all(abs(p.a_mat[0, 0] + p.b_vec[0] * k) < 1 for p in pairs)
            ]
            if verdict.feasible:
                assert stable


class TestVerifyGain:
    def test_rejects_wrong_length(self):
        with pytest.raises(DimensionMismatch):
            verify_gain([scalar_pair(0.5)], np.array([0.1, 0.2]))

    def test_zero_gain_on_unstable_pair(self):
        assert not verify_gain([scalar_pair(1.5)], np.array([0.0]))


def test_dump_reduced_lp(tmp_path):
    pairs = [scalar_pair(0.2), scalar_pair(0.4), scalar_pair(0.6)]
    reduced = reduce_lp(build_full_lp(pairs), pairs)
    path = tmp_path / "reduced.csv"
    dump_reduced_lp(reduced, path)
    table = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.allclose(table[:, :-1], reduced.a_ineq)
    assert np.allclose(table[:, -1], reduced.b_ineq)
