"""Scenario configuration: defaults, ``key = value`` files and flag overrides."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import DomainError

__all__ = [
    "PhaseMode",
    "ScenarioConfig",
    "default_ns_grid",
    "parse_config_text",
    "load_config_file",
    "parse_phase_mode",
    "parse_float_list",
    "parse_int_list",
    "parse_targets",
    "build_config",
    "thread_cap",
]


def default_ns_grid() -> tuple[float, ...]:
    return tuple(float(x) for x in np.logspace(-2, 1, 25))


@dataclass(frozen=True)
class PhaseMode:
    """``fixed`` at a known phase, or ``dephased`` (phase uniformly unknown)."""

    kind: str = "fixed"
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fixed", "dephased"):
            raise DomainError(f"phase mode must be fixed or dephased, got {self.kind!r}")
        if not math.isfinite(self.phi):
            raise DomainError("phase must be finite")

    @property
    def dephased(self) -> bool:
        return self.kind == "dephased"

    def __str__(self) -> str:
        return "dephased" if self.dephased else f"fixed:{self.phi:g}"


@dataclass(frozen=True)
class ScenarioConfig:
    nbar: float = 1.0
    ns_grid: tuple = field(default_factory=default_ns_grid)
    phase_mode: PhaseMode = field(default_factory=PhaseMode)
    cutoff: int = 30
    epsilon: float = 0.01
    rule_reference_ns: float = 1.0
    seed: int = 20240101
    trials: int | None = None
    cutoffs: tuple = (5, 10, 15, 20, 25, 30)
    study_ns: float = 1.0
    k_phases: int = 128
    slots: int = 20
    targets: dict = field(default_factory=lambda: {5: 3.0, 15: 1.0})

    def __post_init__(self):
        if not math.isfinite(self.nbar) or self.nbar < 0:
            raise DomainError(f"nbar must be >= 0, got {self.nbar!r}")
        grid = tuple(float(x) for x in self.ns_grid)
        if not grid or any(not math.isfinite(x) or x < 0 for x in grid):
            raise DomainError("ns_grid must be non-empty with values >= 0")
        object.__setattr__(self, "ns_grid", grid)
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise DomainError(f"cutoff must be an integer >= 1, got {self.cutoff!r}")
        if self.rule_reference_ns < 0 or self.study_ns < 0:
            raise DomainError("reference intensities must be >= 0")
        if self.trials is not None and (int(self.trials) != self.trials or self.trials < 1):
            raise DomainError(f"trials must be an integer >= 1, got {self.trials!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError(f"seed must be in [0, 2**64), got {self.seed!r}")
        cutoffs = tuple(int(c) for c in self.cutoffs)
        if not cutoffs or any(c < 1 for c in cutoffs) or list(cutoffs) != sorted(cutoffs):
            raise DomainError("cutoffs must be ascending integers >= 1")
        object.__setattr__(self, "cutoffs", cutoffs)
        if int(self.k_phases) != self.k_phases or self.k_phases < 1:
            raise DomainError("k_phases must be an integer >= 1")

    def trials_or(self, default: int) -> int:
        return default if self.trials is None else int(self.trials)

    def header_items(self) -> dict:
        return {
            "nbar": self.nbar,
            "phase_mode": str(self.phase_mode),
            "cutoff": self.cutoff,
            "epsilon": self.epsilon,
            "rule_reference_ns": self.rule_reference_ns,
            "seed": self.seed,
        }


def parse_phase_mode(text: str) -> PhaseMode:
    text = text.strip()
    if text == "dephased":
        return PhaseMode("dephased")
    if text == "fixed":
        return PhaseMode("fixed", 0.0)
    if text.startswith("fixed:"):
        try:
            return PhaseMode("fixed", float(text[6:]))
        except ValueError:
            pass
    raise DomainError(f"phase mode must be 'dephased' or 'fixed:<phi>', got {text!r}")


def parse_float_list(text: str) -> tuple[float, ...]:
    """Comma-separated floats, or ``log:<lo>:<hi>:<count>`` / ``lin:<lo>:<hi>:<count>``."""
    text = text.strip()
    try:
        if text.startswith(("log:", "lin:")):
            kind, lo, hi, count = text.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
            if kind == "log":
                return tuple(float(x) for x in np.logspace(math.log10(lo), math.log10(hi), count))
            return tuple(float(x) for x in np.linspace(lo, hi, count))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise DomainError(f"cannot parse number list {text!r}: {exc}") from None


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise DomainError(f"cannot parse integer list {text!r}: {exc}") from None


def parse_targets(text: str) -> dict:
    """``"5:3,15:1"`` -> ``{5: 3.0, 15: 1.0}``; the empty string means no targets."""
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            slot, mean = item.split(":")
            out[int(slot)] = float(mean)
        except ValueError:
            raise DomainError(f"target entries look like slot:mean, got {item!r}") from None
    return out


_CONVERTERS = {
    "nbar": float,
    "ns_grid": parse_float_list,
    "phase_mode": parse_phase_mode,
    "cutoff": int,
    "epsilon": float,
    "rule_reference_ns": float,
    "seed": int,
    "trials": int,
    "cutoffs": parse_int_list,
    "study_ns": float,
    "k_phases": int,
    "slots": int,
    "targets": parse_targets,
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Returns converted values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{source}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise DomainError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value)
        except DomainError:
            raise
        except ValueError as exc:
            raise DomainError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    return values


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read(), str(path))
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from None


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> ScenarioConfig:
    merged = {}
    merged.update(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(merged) - known
    if unknown:
        raise DomainError(f"unknown configuration keys: {sorted(unknown)}")
    try:
        return replace(ScenarioConfig(), **merged)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(str(exc)) from None


def thread_cap() -> int:
    """Worker count from ``RANGEKIT_THREADS`` (default: 1)."""
    raw = os.environ.get("RANGEKIT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"RANGEKIT_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)
