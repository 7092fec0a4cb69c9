"""Experiment configuration stored as JSON."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .system import LinearSystem, case_study_preset

__all__ = ["ExperimentConfig", "ConfigError", "load_config", "BACKENDS", "MECHANISM_NAMES"]

BACKENDS = ("interval", "ccg")
MECHANISM_NAMES = ("optimal", "quantizer", "gaussian")


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


@dataclass
class ExperimentConfig:
    """Settings shared by every experiment driver.

    ``system`` is ``"preset"`` for the production-inventory model or a path to
    a JSON system file.  ``mechanism`` selects the release mechanism for the
    time-series and audit drivers; the trade-off sweep always runs all three.
    """

    system: str = "preset"
    horizon: int = 60
    runs: int = 20
    seed: int = 0
    mechanism: str = "optimal"
    eps_x: list = field(default_factory=lambda: [0.01, 0.05, 0.1, 0.25, 0.5])
    backend: str = "interval"
    ccg_cap: int = 8
    output_dir: str = "results"

    def problems(self) -> list[str]:
        out = []
        if not isinstance(self.horizon, int) or self.horizon < 1:
            out.append(f"horizon: must be an integer >= 1, got {self.horizon!r}")
        if not isinstance(self.runs, int) or self.runs < 1:
            out.append(f"runs: must be an integer >= 1, got {self.runs!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            out.append(f"seed: must be a non-negative integer, got {self.seed!r}")
        if self.mechanism not in MECHANISM_NAMES:
            out.append(f"mechanism: must be one of {list(MECHANISM_NAMES)}, got {self.mechanism!r}")
        if self.backend not in BACKENDS:
            out.append(f"backend: must be one of {list(BACKENDS)}, got {self.backend!r}")
        if not isinstance(self.ccg_cap, int) or self.ccg_cap < 1:
            out.append(f"ccg_cap: must be an integer >= 1, got {self.ccg_cap!r}")
        eps = self.eps_x
        if not isinstance(eps, (list, tuple)) or not eps:
            out.append("eps_x: must be a non-empty list")
        else:
            bad = [e for e in eps if not isinstance(e, (int, float)) or isinstance(e, bool) or not e > 0]
            if bad:
                out.append(f"eps_x: entries must be positive numbers, got {bad}")
        if self.system != "preset" and not Path(self.system).is_file():
            out.append(f"system: {self.system!r} is neither 'preset' nor an existing file")
        return out

    def validate(self) -> "ExperimentConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    def load_system(self) -> LinearSystem:
        if self.system == "preset":
            return case_study_preset()
        return LinearSystem.load(self.system)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError([f"unknown key {k!r}" for k in unknown])
        cfg = cls(**d)
        cfg.eps_x = list(cfg.eps_x) if isinstance(cfg.eps_x, (list, tuple)) else cfg.eps_x
        return cfg


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc})"]) from None
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be an object"])
    return ExperimentConfig.from_dict(data).validate()
