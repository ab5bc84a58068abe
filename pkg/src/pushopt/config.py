"""Experiment configuration: TOML/JSON files, bundled presets, canonical form.

A config names the problem preset, the communication graphs, the feasible
set, the algorithm settings, and the run block (horizon, trials, seed).
`load` accepts a filesystem path or a bundled preset name ("quartic",
"tracking", "sparse"). Parsed configs round-trip through `to_dict` /
`from_dict` unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .exceptions import ConfigError

PROBLEM_KINDS = ("quartic", "tracking", "sparse")
ALGORITHM_KINDS = ("zo", "subgradient")
SET_KINDS = ("box", "ball")
GRAPH_GENERATORS = ("ring", "complete", "random")
PRESET_NAMES = ("quartic", "tracking", "sparse")


@dataclass
class ExperimentConfig:
    problem_kind: str
    problem_params: dict = field(default_factory=dict)
    graph_nodes: int = 0
    graph_b_window: int = 1
    graph_policy: str = "cyclic"
    graph_generator: str | None = None
    graph_list: list = field(default_factory=list)
    set_kind: str = "ball"
    set_params: dict = field(default_factory=dict)
    algorithm: str = "zo"
    step_scale: float | None = None
    mu: float | None = None
    xi: float | None = None
    horizon: int = 100
    trials: int = 1
    seed: int = 0
    workers: int = 1
    start: list | None = None
    emit_trajectory: bool = False

    def __post_init__(self):
        if self.problem_kind not in PROBLEM_KINDS:
            raise ConfigError(f"unknown problem kind {self.problem_kind!r}")
        if self.algorithm not in ALGORITHM_KINDS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.set_kind not in SET_KINDS:
            raise ConfigError(f"unknown set kind {self.set_kind!r}")
        if self.graph_policy not in ("cyclic", "list"):
            raise ConfigError(f"unknown schedule policy {self.graph_policy!r}")
        if self.graph_generator is not None and self.graph_generator not in GRAPH_GENERATORS:
            raise ConfigError(f"unknown graph generator {self.graph_generator!r}")
        if bool(self.graph_generator) == bool(self.graph_list):
            raise ConfigError("graph block needs either a generator or a graph list")
        if self.graph_nodes < 1:
            raise ConfigError("graph block needs a positive node count")
        if self.horizon < 0:
            raise ConfigError("horizon must be nonnegative")
        if self.trials < 1:
            raise ConfigError("at least one trial required")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.mu is not None and not self.mu > 0:
            raise ConfigError("mu must be positive")
        if self.xi is not None and not 0 < self.xi < 1:
            raise ConfigError("xi must lie in (0, 1)")
        if self.step_scale is not None and not self.step_scale > 0:
            raise ConfigError("step scale must be positive")

    # -- canonical form ---------------------------------------------------

    def to_dict(self):
        graph = {
            "nodes": self.graph_nodes,
            "b_window": self.graph_b_window,
            "policy": self.graph_policy,
        }
        if self.graph_generator:
            graph["generator"] = self.graph_generator
        if self.graph_list:
            graph["graphs"] = [dict(g) for g in self.graph_list]
        algorithm = {"kind": self.algorithm}
        for key in ("step_scale", "mu", "xi"):
            val = getattr(self, key)
            if val is not None:
                algorithm[key] = val
        run = {
            "horizon": self.horizon,
            "trials": self.trials,
            "seed": self.seed,
            "workers": self.workers,
            "emit_trajectory": self.emit_trajectory,
        }
        if self.start is not None:
            run["start"] = list(self.start)
        return {
            "problem": {"kind": self.problem_kind, **self.problem_params},
            "graph": graph,
            "set": {"kind": self.set_kind, **self.set_params},
            "algorithm": algorithm,
            "run": run,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            problem = dict(data["problem"])
            graph = dict(data["graph"])
            set_block = dict(data["set"])
            algorithm = dict(data.get("algorithm", {}))
            run = dict(data.get("run", {}))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"missing config block: {exc}") from exc
        kind = problem.pop("kind", None)
        if kind is None:
            raise ConfigError("problem block needs a 'kind'")
        graphs = graph.pop("graphs", [])
        graph_list = []
        for entry in graphs:
            entry = dict(entry)
            if "edges" not in entry and "matrix" not in entry:
                raise ConfigError("each graph needs an edge list or a matrix")
            graph_list.append(entry)
        return cls(
            problem_kind=kind,
            problem_params=problem,
            graph_nodes=int(graph.pop("nodes", 0)),
            graph_b_window=int(graph.pop("b_window", 1)),
            graph_policy=graph.pop("policy", "cyclic"),
            graph_generator=graph.pop("generator", None),
            graph_list=graph_list,
            set_kind=set_block.pop("kind", "ball"),
            set_params=set_block,
            algorithm=algorithm.pop("kind", "zo"),
            step_scale=algorithm.pop("step_scale", None),
            mu=algorithm.pop("mu", None),
            xi=algorithm.pop("xi", None),
            horizon=int(run.pop("horizon", 100)),
            trials=int(run.pop("trials", 1)),
            seed=int(run.pop("seed", 0)),
            workers=int(run.pop("workers", 1)),
            start=run.pop("start", None),
            emit_trajectory=bool(run.pop("emit_trajectory", False)),
        )

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def override(self, **kwargs):
        """A copy with the given fields replaced (None values ignored)."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates)


def preset_path(name):
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    return resources.files("pushopt").joinpath(f"presets/{name}.toml")


def load(path_or_preset):
    """Load a config from a .toml/.json path or a bundled preset name."""
    name = str(path_or_preset)
    if name in PRESET_NAMES and not Path(name).exists():
        raw = preset_path(name).read_bytes()
        return ExperimentConfig.from_dict(tomllib.loads(raw.decode("utf-8")))
    path = Path(name)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    else:
        try:
            data = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)
