"""
Experiment configuration: flat YAML keys, mirrored one to one by CLI flags
"""

import itertools
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .errors import InvalidConfig
from .graph import GraphFamily

PROTOCOLS = (
    "uniform_gossip",
    "superstep",
    "rumor",
    "direct_exchange",
    "baseline",
    "simulate_superstep",
    "simulate_round_robin",
    "simulate_direct_exchange",
    "simulate_spanner",
)
ALGORITHMS = ("flooding", "bfs", "rumor", "neighbors")
INNER_SIMULATORS = ("direct_exchange", "round_robin", "superstep")


class ExperimentConfig(BaseModel):
    """One experiment matrix: protocols x graph sizes x seeds"""
    model_config = ConfigDict(extra="forbid")

    # graph: either a file or a generator family with its parameters
    graph: Optional[str] = None
    family: Optional[str] = None
    n: Optional[int] = None
    sizes: Optional[List[int]] = None
    p: Optional[float] = None
    k: Optional[int] = None
    rows: Optional[int] = None
    cols: Optional[int] = None
    copies: Optional[int] = None
    gadget: int = 0
    graph_seed: int = 0

    protocol: Union[str, List[str]] = "superstep"
    algorithm: str = "flooding"
    source: int = 0
    inner: str = "direct_exchange"

    seeds: Optional[List[int]] = None
    seed_start: int = 0
    seed_count: int = 1

    c_tau: float = 2.0
    tau: Optional[int] = None
    epsilon: float = 0.5
    round_cap: int = 10_000

    output: str = "results/results.csv"
    trace_dir: Optional[str] = None
    diff_dir: Optional[str] = None
    workers: int = 1

    @field_validator("protocol")
    @classmethod
    def _known_protocols(cls, value):
        names = [value] if isinstance(value, str) else value
        if not names:
            raise ValueError("at least one protocol is required")
        unknown = [name for name in names if name not in PROTOCOLS]
        if unknown:
            raise ValueError(f"unknown protocol {unknown[0]!r}, expected one of {', '.join(PROTOCOLS)}")
        return value

    @field_validator("family")
    @classmethod
    def _known_family(cls, value):
        if value is not None and value not in {f.value for f in GraphFamily}:
            raise ValueError(f"unknown graph family {value!r}")
        return value

    @field_validator("algorithm")
    @classmethod
    def _known_algorithm(cls, value):
        if value not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {value!r}, expected one of {', '.join(ALGORITHMS)}")
        return value

    @field_validator("inner")
    @classmethod
    def _known_inner(cls, value):
        if value not in INNER_SIMULATORS:
            raise ValueError(f"unknown inner simulator {value!r}")
        return value

    @field_validator("c_tau", "epsilon")
    @classmethod
    def _positive(cls, value):
        if value <= 0:
            raise ValueError("must be positive")
        return value

    @field_validator("round_cap", "workers", "seed_count")
    @classmethod
    def _at_least_one(cls, value):
        if value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator("tau")
    @classmethod
    def _tau_positive(cls, value):
        if value is not None and value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator("seeds")
    @classmethod
    def _seeds_non_negative(cls, value):
        if value is not None and any(s < 0 for s in value):
            raise ValueError("seeds must be non-negative")
        return value

    @model_validator(mode="after")
    def _one_graph_source(self):
        if (self.graph is None) == (self.family is None):
            raise ValueError("exactly one of 'graph' and 'family' must be given")
        return self

    # --- derived ---------------------------------------------------------------

    def protocols(self) -> List[str]:
        return [self.protocol] if isinstance(self.protocol, str) else list(self.protocol)

    def seed_list(self) -> List[int]:
        if self.seeds is not None:
            return sorted(set(self.seeds))
        return list(range(self.seed_start, self.seed_start + self.seed_count))

    def graph_params(self) -> List[Dict[str, Any]]:
        """Generator parameter sets, one per entry of `sizes` (or just `n`)"""
        base = {key: getattr(self, key) for key in ("p", "k", "rows", "cols", "copies")
                if getattr(self, key) is not None}
        if self.family in {"erdos_renyi", "tree"}:
            base["seed"] = self.graph_seed
        if self.family == "figure1" and self.gadget:
            base["gadget"] = self.gadget
        sizes = self.sizes if self.sizes else ([self.n] if self.n is not None else [None])
        return [{**base, **({"n": n} if n is not None else {})} for n in sizes]

    def matrix(self) -> List[tuple]:
        """(config index, protocol, graph params) in a fixed order"""
        combos = itertools.product(self.protocols(), self.graph_params())
        return [(i, protocol, params) for i, (protocol, params) in enumerate(combos)]

    # --- loading ---------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        try:
            return cls(**(data or {}))
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
            )
            raise InvalidConfig(problems) from e

    @classmethod
    def load_from_file(cls, config_path: str) -> "ExperimentConfig":
        """Load an experiment from YAML; syntax errors carry line and column"""
        try:
            with open(config_path, 'r') as f:
                data = yaml.safe_load(f)
        except FileNotFoundError as e:
            raise InvalidConfig(f"experiment file {config_path} not found") from e
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f":{mark.line + 1}:{mark.column + 1}" if mark is not None else ""
            raise InvalidConfig(f"{config_path}{where}: {getattr(e, 'problem', None) or e}") from e
        if data is not None and not isinstance(data, dict):
            raise InvalidConfig(f"{config_path}: expected a mapping of keys to values")
        return cls.from_dict(data)

    def with_overrides(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        """Apply non-None overrides (CLI flags) and re-validate"""
        data = self.model_dump()
        data.update({key: value for key, value in overrides.items() if value is not None})
        return ExperimentConfig.from_dict(data)

    def save_to_file(self, config_path: str) -> None:
        with open(config_path, 'w') as f:
            yaml.dump(self.model_dump(exclude_none=True), f, default_flow_style=False, sort_keys=False)
