"""JSON run configurations for the command-line frontend.

A config names either a bundled benchmark builder with its parameter block or
an inline model (matrices as nested arrays, graphs as 1-based edge lists or
named topologies). The two forms are mutually exclusive. Every random
quantity downstream flows from the single `seed` field.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import cases
from .consensus import LimasModel
from .errors import ConfigError
from .graph import TOPOLOGY_BUILDERS, WeightedGraph

KNOWN_TESTS = ("necessary", "scalar", "lp", "analytic", "design")
BUILDERS = ("supercap", "dcmg")

_DEFAULT_SIM = {"t_end": 1.0, "dt": 1e-5, "x0": "random"}


@dataclass(frozen=True)
class RunConfig:
    """Parsed, validated run configuration."""

    model_spec: dict
    tests: tuple
    seed: int
    sim: dict
    output_dir: str
    raw: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        out = {
            "model": self.model_spec,
            "tests": list(self.tests),
            "seed": self.seed,
            "sim": self.sim,
            "output_dir": self.output_dir,
        }
        return out

    @property
    def builder(self):
        return self.model_spec.get("builder")

    def build(self, seed=None, xi=None, gc_topology=None):
        """Instantiate the model; sweep overrides may replace seed/xi/topology."""
        seed = self.seed if seed is None else seed
        spec = self.model_spec
        if spec.get("builder") == "supercap":
            params = _supercap_params(spec.get("params", {}))
            return cases.supercap_case(seed=seed, params=params)
        if spec.get("builder") == "dcmg":
            params = _dcmg_params(spec.get("params", {}))
            return cases.dcmg_case(
                seed=seed,
                xi=xi if xi is not None else spec.get("xi", 1.0),
                gc_topology=gc_topology if gc_topology is not None else spec.get("g_c", "complete"),
                gc_weight=spec.get("gc_weight"),
                params=params,
            )
        model = LimasModel(
            np.array(spec["a"], dtype=float),
            np.array(spec["a_p"], dtype=float),
            np.array(spec["b"], dtype=float),
            parse_graph(spec["g_p"]),
            parse_graph(spec["g_c"]),
        )
        return cases.CaseStudy(model, None, model.g_p, model.g_c, np.array([]))


def parse_graph(spec):
    """Graph from `{"n":..,"edges":[[i,j,w],..]}` or `{"topology":..,"n":..,"weight":..}`."""
    if not isinstance(spec, dict):
        raise ConfigError(f"graph spec must be an object, got {type(spec).__name__}")
    if "topology" in spec:
        if "edges" in spec:
            raise ConfigError("graph spec cannot mix a named topology with an edge list")
        name = spec["topology"]
        if name not in TOPOLOGY_BUILDERS:
            raise ConfigError(f"unknown topology {name!r}; known: {sorted(TOPOLOGY_BUILDERS)}")
        return TOPOLOGY_BUILDERS[name](int(spec["n"]), float(spec.get("weight", 1.0)))
    try:
        edges = tuple(
            (int(e[0]), int(e[1]), float(e[2]) if len(e) > 2 else 1.0) for e in spec["edges"]
        )
        return WeightedGraph(int(spec["n"]), edges)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad graph spec: {exc}") from exc


def _supercap_params(block):
    try:
        return cases.SupercapParams(
            capacitance=float(block.get("C", 10.0)),
            leak_resistance=float(block.get("R", 5e3)),
            sample_time=float(block.get("T_s", 1e-4)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad supercap parameters: {exc}") from exc


def _dcmg_params(block):
    try:
        return cases.DcmgParams(
            r_t=float(block.get("R_t", 0.2)),
            c_t=float(block.get("C_t", 2.2e-3)),
            l_t=float(block.get("L_t", 1.8e-3)),
            r_load=float(block.get("R_L", 9.0)),
            k_pr=tuple(block.get("K_pr", (-2.13, -0.16, 13.55))),
            v_ref=float(block.get("V_ref", 48.0)),
            sample_time=float(block.get("T_s", 1e-4)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad dcmg parameters: {exc}") from exc


def parse_config(source):
    """Parse and validate a config from a path, JSON string, or dict."""
    if isinstance(source, dict):
        data = source
    else:
        try:
            text = open(source).read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "model" not in data:
        raise ConfigError("config must be an object with a 'model' block")
    spec = data["model"]
    if not isinstance(spec, dict):
        raise ConfigError("'model' must be an object")

    inline_keys = {"a", "a_p", "b", "g_p", "g_c"} & set(spec)
    if "builder" in spec:
        if spec["builder"] not in BUILDERS:
            raise ConfigError(f"unknown builder {spec['builder']!r}; known: {BUILDERS}")
        # Named builders own their matrices; g_c stays allowed as a topology name.
        forbidden = inline_keys - {"g_c"}
        if forbidden or isinstance(spec.get("g_c"), dict):
            raise ConfigError("named builders do not accept inline matrices or graphs")
        if "g_c" in spec and spec["g_c"] not in TOPOLOGY_BUILDERS:
            raise ConfigError(f"unknown cyber topology {spec['g_c']!r}")
    else:
        missing = {"a", "a_p", "b", "g_p", "g_c"} - set(spec)
        if missing:
            raise ConfigError(f"inline model missing fields: {sorted(missing)}")

    tests = tuple(data.get("tests", ("design",)))
    unknown = set(tests) - set(KNOWN_TESTS)
    if unknown:
        raise ConfigError(f"unknown tests {sorted(unknown)}; known: {KNOWN_TESTS}")
    try:
        seed = int(data.get("seed", 42))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an integer: {exc}") from exc
    sim = dict(_DEFAULT_SIM, **data.get("sim", {}))
    config = RunConfig(
        model_spec=spec,
        tests=tests,
        seed=seed,
        sim=sim,
        output_dir=str(data.get("output_dir", ".")),
        raw=data,
    )
    # Fail fast on inline inconsistencies (dimension checks live in the model).
    if "builder" not in spec:
        config.build()
    return config


def example_config(name):
    """Ready-to-run config dict for a bundled benchmark."""
    if name == "supercap":
        return {
            "model": {"builder": "supercap", "params": {"C": 10.0, "R": 5000.0, "T_s": 1e-4}},
            "tests": ["design"],
            "seed": 42,
            "sim": {"t_end": 5.0, "dt": 1e-5, "x0": "random", "gain": [-200.0]},
            "output_dir": ".",
        }
    if name == "dcmg":
        return {
            "model": {"builder": "dcmg", "g_c": "complete"},
            "tests": ["design"],
            "seed": 42,
            "sim": {"t_end": 0.5, "dt": 1e-5, "x0": "random"},
            "output_dir": ".",
        }
    raise ConfigError(f"unknown example {name!r}; known: supercap, dcmg")
