"""Bundled benchmark networks: a 9-cell supercapacitor bank and a 9-DGU microgrid.

Both cases fix the interconnection topologies and draw line resistances from a
seeded uniform distribution, so every quantity downstream of the seed is
reproducible. Seed material is split with SeedSequence children: child 0
drives resistance draws, child 1 initial conditions.
"""

from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph, complete_graph, TOPOLOGY_BUILDERS
from .sim import (
    DcmgParams,
    SupercapParams,
    build_dcmg,
    build_supercap,
    draw_resistances,
    line_resistance_graph,
)

N_AGENTS = 9

# Supercapacitor bank: three physical clusters {1,2,3}, {4,5,6,7}, {8,9} and a
# connected communication overlay spanning all of them.
SUPERCAP_PHYSICAL_EDGES = ((1, 3), (2, 3), (4, 7), (5, 6), (6, 7), (8, 9))
SUPERCAP_CYBER_EDGES = (
    (1, 2), (1, 3), (2, 4), (4, 6), (6, 7), (7, 5), (5, 4), (3, 8), (9, 6), (8, 9),
)
SUPERCAP_R_RANGE = (10.0, 50.0)
SUPERCAP_X0_RANGE = (4.0, 6.0)

# Microgrid: tree-shaped power-line topology; the communication layer defaults
# to complete with uniform weight 1/9 (projector Laplacian I - (1/9) 1 1^T).
DCMG_PHYSICAL_EDGES = ((1, 2), (2, 3), (2, 4), (4, 5), (4, 6), (6, 7), (6, 8), (8, 9))
DCMG_R_RANGE = (4.0, 8.0)
DCMG_V_RANGE = (46.0, 50.0)
DCMG_I_RANGE = (0.0, 2.0)


@dataclass(frozen=True)
class CaseStudy:
    """A fully instantiated benchmark: model plus raw parameters and graphs."""

    model: object  # LimasModel
    params: object
    g_p: WeightedGraph  # conductance-weighted physical graph (unscaled)
    g_c: WeightedGraph  # cyber graph (unscaled)
    resistances: np.ndarray


def _rngs(seed):
    children = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(children[0]), np.random.default_rng(children[1])


def _unit_graph(edges, n=N_AGENTS):
    return WeightedGraph(n, tuple((i, j, 1.0) for i, j in edges))


def supercap_case(seed=42, params=None):
    """Supercapacitor benchmark with seeded line-resistance draw."""
    params = params or SupercapParams()
    rng_r, _ = _rngs(seed)
    g_p_unit = _unit_graph(SUPERCAP_PHYSICAL_EDGES)
    resistances = draw_resistances(g_p_unit, *SUPERCAP_R_RANGE, rng_r)
    g_p = line_resistance_graph(g_p_unit, resistances)
    g_c = _unit_graph(SUPERCAP_CYBER_EDGES)
    model = build_supercap(params, g_p, g_c)
    return CaseStudy(model, params, g_p, g_c, resistances)


def supercap_x0(seed=42, n=N_AGENTS):
    """Seeded initial cell voltages, uniform in the benchmark range."""
    _, rng_x = _rngs(seed)
    return rng_x.uniform(*SUPERCAP_X0_RANGE, size=n)


def dcmg_case(seed=42, xi=1.0, gc_topology="complete", gc_weight=None, params=None):
    """Microgrid benchmark; `xi` scales the line resistances down to stiffen coupling.

    `gc_topology` picks any named builder; the default complete graph uses
    weight 1/N so the cyber Laplacian is the centering projector.
    """
    params = params or DcmgParams()
    if not 0.0 < xi <= 1.0:
        raise ValueError(f"resistance scale xi must be in (0, 1], got {xi}")
    rng_r, _ = _rngs(seed)
    g_p_unit = _unit_graph(DCMG_PHYSICAL_EDGES)
    resistances = draw_resistances(g_p_unit, *DCMG_R_RANGE, rng_r) * xi
    g_p = line_resistance_graph(g_p_unit, resistances)
    if gc_weight is None:
        gc_weight = 1.0 / N_AGENTS if gc_topology == "complete" else 1.0
    g_c = TOPOLOGY_BUILDERS[gc_topology](N_AGENTS, gc_weight)
    model = build_dcmg(params, g_p, g_c)
    return CaseStudy(model, params, g_p, g_c, resistances)


def dcmg_x0(seed=42, n=N_AGENTS):
    """Seeded DGU initial states: voltage near nominal, small current, zero integrator."""
    _, rng_x = _rngs(seed)
    x0 = np.zeros((n, 3))
    x0[:, 0] = rng_x.uniform(*DCMG_V_RANGE, size=n)
    x0[:, 1] = rng_x.uniform(*DCMG_I_RANGE, size=n)
    return x0.reshape(-1)
