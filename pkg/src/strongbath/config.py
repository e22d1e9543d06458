"""Run configurations: a JSON document describing one scenario.

Layout::

    {
      "scenario": "dynamics",
      "system": {"deltas": [1.0, 0.9]},
      "bath": {"gamma": 0.05, "Omega": 8.0, "lambda": 1.0, "Lambda": 1000.0},
      "temperature": 1.0,
      "method": ["rc", "eff"],
      "M": 25,
      "initial_state": ["up", "down"],
      "t_max": 100.0,
      "n_points": 2048,
      "observables": ["sz1", "sz2"],
      "output": {"csv": "run.csv", "svg": "run.svg"},
      "plot": {"x": "t", "panels": [["rc_sz1", "eff_sz1"], ["rc_sz2", "eff_sz2"]],
               "period_markers": true}
    }

``lambda`` and ``temperature`` take a number or a list.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigInvalid

SCENARIOS = ("spectrum", "steady-sweep", "dynamics", "sweep-dynamics")
METHODS = ("rc", "eff", "weak")
STATE_TOKENS = ("up", "down", "plus", "minus")

DEFAULTS = {
    "gamma": 0.05,
    "Omega": 8.0,
    "Lambda": 1000.0,
    "temperature": 1.0,
    "n_points": 2048,
    "settle_fraction": 0.1,
}


def _as_list(x, name) -> list[float]:
    vals = x if isinstance(x, (list, tuple)) else [x]
    try:
        return [float(v) for v in vals]
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{name} must be a number or a list of numbers, got {x!r}") from exc


@dataclass
class RunConfig:
    scenario: str
    deltas: list[float]
    lambdas: list[float]
    gamma: float = DEFAULTS["gamma"]
    Omega: float = DEFAULTS["Omega"]
    Lambda: float = DEFAULTS["Lambda"]
    temperatures: list[float] = field(default_factory=lambda: [DEFAULTS["temperature"]])
    methods: list[str] = field(default_factory=lambda: ["eff"])
    M: Optional[int] = None
    initial_state: list[str] = field(default_factory=list)
    t_max: float = 0.0
    n_points: int = DEFAULTS["n_points"]
    observables: list[str] = field(default_factory=list)
    output_csv: Optional[str] = None
    output_svg: Optional[str] = None
    plot: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    # -- validation -----------------------------------------------------------------

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigInvalid(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if not 1 <= len(self.deltas) <= 3 or any(d <= 0 for d in self.deltas):
            raise ConfigInvalid(f"system.deltas must hold 1..3 positive splittings, got {self.deltas}")
        if not self.lambdas:
            raise ConfigInvalid("bath.lambda grid is empty")
        if any(l < 0 for l in self.lambdas):
            raise ConfigInvalid("bath.lambda values must be non-negative")
        if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise ConfigInvalid(f"bath.lambda grid must be strictly increasing, got {self.lambdas}")
        if self.gamma <= 0 or self.Omega <= 0 or self.Lambda <= 0:
            raise ConfigInvalid("bath.gamma, bath.Omega and bath.Lambda must be positive")
        if not self.temperatures or any(T <= 0 for T in self.temperatures):
            raise ConfigInvalid(f"temperature values must be positive, got {self.temperatures}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigInvalid(f"method must be a non-empty subset of {METHODS}, got {self.methods}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigInvalid(f"duplicate methods in {self.methods}")
        if "rc" in self.methods and self.scenario != "spectrum":
            if self.M is None:
                raise ConfigInvalid("M (RC levels) is required when method includes rc")
            if self.M < 2:
                raise ConfigInvalid(f"M must be at least 2, got {self.M}")
        if self.scenario == "steady-sweep" and "weak" in self.methods:
            raise ConfigInvalid("steady-sweep supports methods rc and eff only")
        if self.scenario in ("dynamics", "sweep-dynamics"):
            if len(self.initial_state) != len(self.deltas):
                raise ConfigInvalid(
                    f"initial_state needs one token per spin ({len(self.deltas)}), got {self.initial_state}"
                )
            bad = [s for s in self.initial_state if s not in STATE_TOKENS]
            if bad:
                raise ConfigInvalid(f"initial_state tokens must be in {STATE_TOKENS}, got {bad}")
            if self.t_max < 0:
                raise ConfigInvalid("t_max must be non-negative")
            if self.n_points < 1:
                raise ConfigInvalid("n_points must be positive")

    @property
    def N(self) -> int:
        return len(self.deltas)

    # -- (de)serialization ----------------------------------------------------------

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigInvalid("configuration must be a JSON object")
        d = copy.deepcopy(d)
        try:
            system = d.pop("system")
            bath = d.pop("bath")
            scenario = d.pop("scenario")
        except KeyError as exc:
            raise ConfigInvalid(f"missing required section {exc.args[0]!r}") from exc
        known_bath = {"gamma", "Omega", "lambda", "Lambda"}
        if set(bath) - known_bath:
            raise ConfigInvalid(f"unknown bath keys {sorted(set(bath) - known_bath)}")
        if "lambda" not in bath:
            raise ConfigInvalid("bath.lambda is required")
        output = d.pop("output", {}) or {}
        methods = d.pop("method", ["eff"])
        if isinstance(methods, str):
            methods = [methods]
        kwargs: dict[str, Any] = dict(
            scenario=scenario,
            deltas=_as_list(system.get("deltas"), "system.deltas"),
            lambdas=_as_list(bath["lambda"], "bath.lambda"),
            gamma=float(bath.get("gamma", DEFAULTS["gamma"])),
            Omega=float(bath.get("Omega", DEFAULTS["Omega"])),
            Lambda=float(bath.get("Lambda", DEFAULTS["Lambda"])),
            temperatures=_as_list(d.pop("temperature", DEFAULTS["temperature"]), "temperature"),
            methods=list(methods),
            M=None if d.get("M") is None else int(d.pop("M")),
            initial_state=list(d.pop("initial_state", [])),
            t_max=float(d.pop("t_max", 0.0)),
            n_points=int(d.pop("n_points", DEFAULTS["n_points"])),
            observables=list(d.pop("observables", [])),
            output_csv=output.get("csv"),
            output_svg=output.get("svg"),
            plot=dict(d.pop("plot", {}) or {}),
        )
        d.pop("M", None)
        d.pop("description", None)
        if d:
            raise ConfigInvalid(f"unknown configuration keys {sorted(d)}")
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "scenario": self.scenario,
            "system": {"deltas": list(self.deltas)},
            "bath": {
                "gamma": self.gamma,
                "Omega": self.Omega,
                "lambda": list(self.lambdas),
                "Lambda": self.Lambda,
            },
            "temperature": list(self.temperatures),
            "method": list(self.methods),
            "M": self.M,
            "initial_state": list(self.initial_state),
            "t_max": self.t_max,
            "n_points": self.n_points,
            "observables": list(self.observables),
            "output": {"csv": self.output_csv, "svg": self.output_svg},
        }
        if self.plot:
            out["plot"] = copy.deepcopy(self.plot)
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        """Short SHA-256 of the canonical JSON echo."""
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def with_overrides(self, **changes) -> "RunConfig":
        d = copy.deepcopy(self.__dict__)
        d.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig(**d)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(data)
