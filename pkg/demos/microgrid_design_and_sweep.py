"""Walk-through: current sharing in a 9-unit DC microgrid.

Each distributed generation unit (DGU) has a third-order model (terminal
voltage, converter current, integral of the voltage error) with a
primary voltage controller already in the loop. The units are coupled by
power-line resistances; a secondary consensus layer on the converter
currents is designed here via the linear-programming sufficient test,
which also returns a common static gain.

The second half sweeps the cyber coupling strength and topology to show
when the design stops being feasible.

Run:  python demos/microgrid_design_and_sweep.py
"""

import numpy as np

from limas import (
    CONSENSUSABLE_SUFFICIENT,
    check_assumptions,
    dcmg_case,
    dcmg_field,
    dcmg_x0,
    lp_sufficient_test,
    modal_pairs,
    simulate_continuous,
    verify_gain,
)

case = dcmg_case(seed=42)
model, params = case.model, case.params

print("== Plant ==")
print(f"agents: {model.n_agents}, state order: {model.order}")
print(f"line resistances (ohm): {np.round(case.resistances, 3)}")

print("\n== Assumptions ==")
assumptions = check_assumptions(model)
print(f"commuting Laplacians: {assumptions.a1_commuting}")
print(f"modal pairs controllable: {assumptions.a2_controllable}")

print("\n== LP sufficient test and gain synthesis ==")
result = lp_sufficient_test(model)
print(f"verdict: {result.verdict}")
print(f"LP margin: {result.details['lp_margin']:.4f}")
gain = result.gain
print(f"common gain K = {np.round(gain, 4)}")
pairs = modal_pairs(model)
print(f"gain re-verified on all modal pairs: {verify_gain(pairs.pairs, gain, 1e-9)}")

print("\n== Closed-loop simulation (2 s) ==")
field = dcmg_field(params, case.g_p, case.g_c, gain)
trace = simulate_continuous(field, dcmg_x0(seed=42), t_end=2.0, dt=1e-4, order=3)
for frac in (0, 0.1, 0.5, 1.0):
    idx = int(frac * (len(trace.times) - 1))
    print(
        f"t = {trace.times[idx]:5.2f} s   current disagreement = "
        f"{trace.consensus_error[idx]:.3e}   mean V = {trace.average[idx, 0]:.4f}"
    )

print("\n== Sweep: cyber coupling strength xi ==")
for xi in (1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01):
    verdict = lp_sufficient_test(dcmg_case(seed=42, xi=xi).model).verdict
    mark = "feasible" if verdict == CONSENSUSABLE_SUFFICIENT else "infeasible"
    print(f"xi = {xi:5.2f}  ->  {mark}")

print("\n== Sweep: cyber topology (10 resistance draws each) ==")
for topology in ("complete", "circle", "star"):
    feasible = sum(
        lp_sufficient_test(
            dcmg_case(seed=seed, gc_topology=topology).model
        ).verdict == CONSENSUSABLE_SUFFICIENT
        for seed in range(10)
    )
    print(f"{topology:9s}: {feasible}/10 feasible")
print("\nSparse rings and stars raise the cyber eigenratio past what the")
print("sufficient condition tolerates; the dense network stays designable.")
