"""End-to-end acceptance checks for the toolkit.

Each test covers one acceptance criterion and emits a single PASS/FAIL line
with the decisive numbers, so the suite output doubles as a results table.
"""

import time

import numpy as np
import pytest

from limas import consensus, sim
from limas.cases import dcmg_case, supercap_case, supercap_x0, dcmg_x0
from limas.consensus import (
    CONSENSUSABLE_SUFFICIENT,
    LimasModel,
    check_assumptions,
    lp_sufficient_test,
    necessary_test,
    scalar_model_test,
)
from limas.control import SystemPair, ackermann_gain, solve_mare
from limas.errors import SigmaTooSmall, SingularControllability
from limas.graph import (
    WeightedGraph,
    complete_graph,
    laplacian,
    modal_decomposition,
)
from limas.simstab import (
    build_full_lp,
    reduce_lp,
    simultaneous_gain,
    solve_feasibility,
    verify_gain,
)

from test_simstab import (
    random_controllable,
    scalar_oracle_margin,
    scalar_pair,
)


def report(num, ok, detail):
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def spectral_radius(mat):
    return float(np.max(np.abs(np.linalg.eigvals(mat))))


def test_criterion_01_supercap_scalar_conditions():
    t0 = time.perf_counter()
    case = supercap_case(seed=42)
    result = scalar_model_test(case.model)
    elapsed = time.perf_counter() - t0
    kp_hi = result.details["intervals"]["k_plus"][1]
    km_lo = result.details["intervals"]["k_minus"][0]
    ok = (
        result.details["s1"]
        and result.details["s2"]
        and 1e-5 <= kp_hi < 1e-3
        and -1e6 < km_lo <= -1e4
        and elapsed < 1.0
    )
    report(
        1,
        ok,
        f"S1={result.details['s1']} S2={result.details['s2']} "
        f"K+ upper={kp_hi:.4e} K- lower={km_lo:.4e} runtime={elapsed:.3f}s",
    )


def test_criterion_02_scalar_interval_vs_brute_force():
    case = supercap_case(seed=42)
    model = case.model
    a = model.a_mat[0, 0]
    lap_p, lap_c = model.lap_p(), model.lap_c()
    intervals = scalar_model_test(model).details["intervals"]
    kp_hi = intervals["k_plus"][1]
    km_lo = intervals["k_minus"][0]

    def stable(k):
        return spectral_radius(a * np.eye(9) - lap_p + k * lap_c) < 1.0 - 1e-9

    # 2000 log-spaced gains inside the admissible sets [0, K+hi) and (K-lo, 0).
    grid = np.concatenate(
        [
            np.geomspace(1e-12, kp_hi * (1.0 - 1e-9), 1000),
            -np.geomspace(1e-12, -km_lo * (1.0 - 1e-9), 1000),
        ]
    )
    inside_ok = all(stable(k) for k in grid)
    # Strict containment: a stable gain well outside the returned intervals.
    outside_stable = stable(1.5 * kp_hi)
    ok = inside_ok and outside_stable
    report(
        2,
        ok,
        f"all {grid.size} interval gains stable={inside_ok}, "
        f"k={1.5 * kp_hi:.3e} outside K+ still stable={outside_stable}",
    )


def test_criterion_03_supercap_simulation():
    case = supercap_case(seed=42)
    x0 = supercap_x0(seed=42)
    t0 = time.perf_counter()
    field = sim.supercap_field(case.params, case.g_p, case.g_c, [-200.0])
    trace = sim.simulate_continuous(field, x0, t_end=5.0, dt=1e-5, order=1)
    elapsed = time.perf_counter() - t0
    final_err = trace.consensus_error[-1]
    ok = final_err < 1e-3 and elapsed < 10.0
    report(3, ok, f"final consensus error={final_err:.3e} V runtime={elapsed:.2f}s")


def test_criterion_04_microgrid_design_and_simulation():
    t0 = time.perf_counter()
    case = dcmg_case(seed=42)
    assumptions = check_assumptions(case.model)
    result = lp_sufficient_test(case.model)
    feasible = result.verdict == CONSENSUSABLE_SUFFICIENT
    pairs = consensus.modal_pairs(case.model)
    gain_ok = feasible and verify_gain(pairs.pairs, result.gain, 1e-9)
    field = sim.dcmg_field(case.params, case.g_p, case.g_c, result.gain)
    trace = sim.simulate_continuous(field, dcmg_x0(seed=42), t_end=2.0, dt=1e-5, order=3)
    elapsed = time.perf_counter() - t0
    err_drop = trace.consensus_error[0] / trace.consensus_error[-1]
    v_bar = trace.average[:, 0]
    regulating = abs(v_bar[-1] - 48.0) < abs(v_bar[0] - 48.0)
    ok = (
        assumptions.a1_commuting
        and assumptions.a2_controllable
        and gain_ok
        and err_drop >= 1e3
        and regulating
        and elapsed < 30.0
    )
    report(
        4,
        ok,
        f"A1={assumptions.a1_commuting} A2={assumptions.a2_controllable} "
        f"LP feasible={feasible} gain verified={gain_ok} error drop={err_drop:.2e}x "
        f"mean V {v_bar[0]:.3f}->{v_bar[-1]:.3f} runtime={elapsed:.1f}s",
    )


def _xi_feasible(xi):
    return (
        lp_sufficient_test(dcmg_case(seed=42, xi=xi).model).verdict
        == CONSENSUSABLE_SUFFICIENT
    )


def test_criterion_05_microgrid_xi_sweep():
    # The nominal sweep grid plus one decade below it, so the transition is
    # visible for this resistance draw as well.
    values = [1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01]
    verdicts = [_xi_feasible(xi) for xi in values]
    transition = verdicts[0] and not verdicts[-1]
    lo, hi = 0.01, 0.5
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        if _xi_feasible(mid):
            hi = mid
        else:
            lo = mid
    threshold = 0.5 * (lo + hi)
    ok = transition and 0.01 < threshold < 0.5
    report(
        5,
        ok,
        f"verdicts over {values}: {verdicts}; bisected threshold={threshold:.4f}",
    )


def test_criterion_06_microgrid_topology_study():
    outcomes = {}
    for topology in ("complete", "circle", "star"):
        outcomes[topology] = [
            lp_sufficient_test(
                dcmg_case(seed=seed, gc_topology=topology).model
            ).details["lp_feasible"]
            for seed in range(10)
        ]
    ok = (
        all(outcomes["complete"])
        and not any(outcomes["circle"])
        and not any(outcomes["star"])
    )
    split = {
        name: f"{sum(votes)}/10 feasible" for name, votes in outcomes.items()
    }
    report(6, ok, f"unanimous over 10 seeds: {split}")


def test_criterion_07_necessary_condition_on_benchmarks():
    flags = {}
    for name, case in (("supercap", supercap_case(42)), ("dcmg", dcmg_case(42))):
        flags[name] = necessary_test(case.model).details["n_flags"]["n1"]
    ok = flags["supercap"] and flags["dcmg"]
    report(7, ok, f"determinant contraction condition N1: {flags}")


def test_criterion_08_full_reduced_lp_equivalence():
    from scipy.optimize import linprog

    from limas.control import ackermann_basis

    def solve_full(full):
        n = full.v_mat.shape[1]
        cost = np.zeros(n + 1)
        cost[-1] = -1.0
        a_ub = np.hstack([full.h_mat, np.ones((full.h_mat.shape[0], 1))])
        a_eq = np.hstack([full.v_mat, np.zeros((full.v_mat.shape[0], 1))])
        res = linprog(
            cost, A_ub=a_ub, b_ub=full.h_vec, A_eq=a_eq, b_eq=full.v_vec,
            bounds=[(None, None)] * (n + 1), method="highs",
        )
        assert res.success, res.message
        return float(-res.fun)

    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    agree = feasible_count = 0
    worst_gain_gap = 0.0
    trials = 500
    for _ in range(trials):
        m = int(rng.integers(1, 4))
        n_sys = int(rng.integers(2, 7))
        pairs = [
            random_controllable(rng, m, scale=rng.uniform(0.3, 1.3))
            for _ in range(n_sys)
        ]
        full = build_full_lp(pairs)
        reduced = reduce_lp(full, pairs)
        verdict = solve_feasibility(reduced)
        full_margin = solve_full(full)
        if (full_margin > 1e-9) == verdict.feasible:
            agree += 1
        if verdict.feasible:
            feasible_count += 1
            # Map the reduced witness to full coordinates; the per-system gains
            # must coincide with the extracted common gain.
            c = reduced.v_dagger @ full.v_vec + reduced.psi @ verdict.witness
            for l, pair in enumerate(pairs):
                basis = ackermann_basis(pair)
                gain_l = c[l * m:(l + 1) * m] @ basis.v_mat + basis.v_row
                worst_gain_gap = max(
                    worst_gain_gap, float(np.abs(gain_l - verdict.gain).max())
                )
    elapsed = time.perf_counter() - t0
    ok = agree == trials and worst_gain_gap < 1e-6 and elapsed < 60.0
    report(
        8,
        ok,
        f"verdicts agree {agree}/{trials} ({feasible_count} feasible), "
        f"max gain gap={worst_gain_gap:.2e}, runtime={elapsed:.1f}s",
    )


def test_criterion_09_scalar_lp_exactness():
    rng = np.random.default_rng(77)
    matches = 0
    trials = 1000
    for _ in range(trials):
        pairs = [
            scalar_pair(
                rng.uniform(-2.5, 2.5),
                rng.uniform(0.2, 3.0) * rng.choice([-1.0, 1.0]),
            )
            for _ in range(int(rng.integers(2, 7)))
        ]
        lp_feasible = simultaneous_gain(pairs).feasible
        oracle_feasible = scalar_oracle_margin(pairs) > 1e-9
        matches += lp_feasible == oracle_feasible
    ok = matches == trials
    report(9, ok, f"LP verdict equals interval-intersection oracle {matches}/{trials}")


def test_criterion_10_ackermann_placement():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(1, 6))
        pair = random_controllable(rng, m)
        roots = rng.uniform(-0.9, 0.9, size=m)
        coeffs = np.poly(roots)[::-1][:-1]
        gain = ackermann_gain(pair, coeffs)
        closed = np.linalg.eigvals(pair.a_mat + np.outer(pair.b_vec, gain))
        gap = np.max(np.abs(np.sort_complex(closed) - np.sort(roots)))
        worst = max(worst, float(gap))
    ok = worst < 1e-6
    report(10, ok, f"200 placements, worst eigenvalue error={worst:.2e}")


def test_criterion_11_mare_scalar_oracle():
    solution = solve_mare(np.array([[2.0]]), np.array([1.0]), 0.8)
    # Scalar fixed point p = (1 - sigma) * 4 p + eps, eps = 1e-6 * 4.
    expected = 4e-6 / (1.0 - 0.2 * 4.0)
    gap = abs(solution.p_mat[0, 0] - expected)
    with pytest.raises(SigmaTooSmall):
        solve_mare(np.array([[2.0]]), np.array([1.0]), 0.7)
    ok = solution.residual < 0.0 and gap < 1e-8
    report(
        11,
        ok,
        f"residual={solution.residual:.2e} |P - closed form|={gap:.2e}, "
        f"sigma below critical raises",
    )


def test_criterion_12_modal_equivalence():
    rng = np.random.default_rng(9)
    worst = 0.0
    accepted = 0
    while accepted < 50:
        n = int(rng.integers(1, 3))
        n_agents = int(rng.integers(3, 7))
        # Complete-uniform cyber graph commutes with any physical Laplacian.
        g_c = complete_graph(n_agents, rng.uniform(0.2, 1.5))
        edges = []
        for i in range(1, n_agents + 1):
            for j in range(i + 1, n_agents + 1):
                if rng.random() < 0.6:
                    edges.append((i, j, rng.uniform(0.1, 1.0)))
        if not edges:
            edges.append((1, 2, 1.0))
        g_p = WeightedGraph(n_agents, tuple(edges))
        a = 0.8 * rng.standard_normal((n, n)) / np.sqrt(n)
        a_p = 0.1 * rng.standard_normal((n, n))
        b = rng.standard_normal(n)
        try:
            model = LimasModel(a, a_p, b, g_p, g_c)
            SystemPair(a, b)
        except SingularControllability:
            continue
        gain = 0.1 * rng.standard_normal(n)
        # Skip closed loops that would overflow the 100-step horizon.
        if spectral_radius(sim.closed_loop_matrix(model, gain)) > 1.05:
            continue
        accepted += 1
        x0 = rng.standard_normal(n_agents * n)
        direct = sim.simulate_discrete(model, gain, x0, 100)
        dec = modal_decomposition(laplacian(g_p), laplacian(g_c))
        blocks = [a] + [
            a - lp * a_p + lc * np.outer(b, gain) for lp, lc in dec.pairs
        ]
        x_tilde = (np.kron(dec.phi.T, np.eye(n)) @ x0).reshape(n_agents, n)
        states = [x_tilde.reshape(-1)]
        for _ in range(100):
            x_tilde = np.stack(
                [blk @ comp for blk, comp in zip(blocks, x_tilde)]
            )
            states.append(x_tilde.reshape(-1))
        modal_states = np.array(states) @ np.kron(dec.phi.T, np.eye(n))
        worst = max(worst, float(np.abs(modal_states - direct.states).max()))
    ok = worst <= 1e-8
    report(12, ok, f"direct vs modal trajectory gap over 50 instances={worst:.2e}")
