"""Seeded Monte Carlo estimates of single-shot error rates and the ranging demo.

Randomness comes from a counter-based SplitMix64 construction, so every
uniform is a pure function of ``(seed, stream, trial, lane)``:

    key  = mix(seed + mix((stream + 1) * G))
    word = mix(key + (trial * 4 + lane + 1) * G)
    u    = (word >> 11) * 2**-53

with ``G = 0x9E3779B97F4A7C15`` and ``mix`` the SplitMix64 finalizer, all
arithmetic modulo 2**64. Results therefore do not depend on evaluation order
or on how work is split across threads. Known-answer vectors live in
``tests/test_prng.py``.

Deterministic rules carry their own overflow decision; stochastic tests
always declare the overflow outcome ABSENT.

Lane assignment: symmetric trials use lane 0 for the hypothesis, lane 1 for
the count and lane 2 for the randomized decision. Type-I trials use lanes 0/1,
Type-II trials lanes 2/3. Ranging trials use lane 0 for the count and lane 1
for the decision, one stream per slot.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bounds import BinaryTest, ErrorReport, classical_beta
from .errors import DomainError
from .fock import (
    PhotonDistribution,
    as_cutoff,
    dephased_signal_state,
    diagonal_distribution,
    thermal_state,
)
from .receiver import DecisionRule

SEED_MAX = (1 << 64) - 1

__all__ = [
    "CounterRNG",
    "SimConfig",
    "RangingConfig",
    "RangingResult",
    "sample_count",
    "sample_counts",
    "estimate_symmetric_error",
    "estimate_type_errors",
    "run_ranging_demo",
]


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= SEED_MAX:
        raise DomainError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


class CounterRNG:
    """One stream of the counter-based generator, with a cursor for scalar draws."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = _check_seed(seed)
        self.stream = _check_seed(stream)
        self.position = 0

    def block(self, start: int, count: int, lane: int) -> np.ndarray:
        if not 0 <= lane < 4:
            raise DomainError(f"lane must be in 0..3, got {lane}")
        return kernels.uniforms(self.seed, self.stream, start, count, lane)

    def random(self) -> float:
        u = float(self.block(self.position, 1, 0)[0])
        self.position += 1
        return u


@dataclass(frozen=True)
class SimConfig:
    trials: int = 100_000
    seed: int = 0
    stream: int = 0
    scenario: object | None = field(default=None, compare=False)

    def __post_init__(self):
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be an integer >= 1, got {self.trials!r}")
        _check_seed(self.seed)
        _check_seed(self.stream)


def _cdf(dist: PhotonDistribution) -> np.ndarray:
    return np.cumsum(dist.probs)


def sample_counts(dist: PhotonDistribution, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF samples; ``dist.d_max + 1`` marks the overflow outcome."""
    return kernels.sample_counts(_cdf(dist), np.asarray(u, dtype=np.float64))


def sample_count(dist: PhotonDistribution, rng: CounterRNG) -> int:
    return int(sample_counts(dist, np.array([rng.random()]))[0])


def _absent_vector(rule) -> np.ndarray:
    if isinstance(rule, DecisionRule):
        return rule.absent_with_overflow()
    if isinstance(rule, BinaryTest):
        if rule.kind != "classical-stochastic":
            raise DomainError("quantum-operator tests cannot be sampled from count statistics")
        return np.append(rule.omega, 1.0)
    raise DomainError(f"unsupported rule type {type(rule).__name__}")


def _rate(hits: np.ndarray, trials: int, kind: str) -> ErrorReport:
    v = float(np.count_nonzero(hits)) / trials
    return ErrorReport(v, math.sqrt(v * (1.0 - v) / trials), kind)


def estimate_symmetric_error(rule, p_s: PhotonDistribution, p_th: PhotonDistribution, cfg: SimConfig) -> ErrorReport:
    """Fraction of equal-prior trials on which ``rule`` guesses wrong."""
    if not (len(p_s) == len(p_th) == len(rule)):
        raise DomainError("rule and distributions must have equal lengths")
    omega = _absent_vector(rule)
    rng = CounterRNG(cfg.seed, cfg.stream)
    present = rng.block(0, cfg.trials, 0) < 0.5
    u_count = rng.block(0, cfg.trials, 1)
    counts = np.where(present, sample_counts(p_s, u_count), sample_counts(p_th, u_count))
    absent = rng.block(0, cfg.trials, 2) < omega[counts]
    return _rate(present == absent, cfg.trials, "symmetric")


def estimate_type_errors(test, p_s: PhotonDistribution, p_th: PhotonDistribution, cfg: SimConfig):
    """(false-alarm, missed-detection) estimates for a stochastic test."""
    if not (len(p_s) == len(p_th) == len(test)):
        raise DomainError("test and distributions must have equal lengths")
    omega = _absent_vector(test)
    rng = CounterRNG(cfg.seed, cfg.stream)
    n_th = sample_counts(p_th, rng.block(0, cfg.trials, 0))
    false_alarm = rng.block(0, cfg.trials, 1) >= omega[n_th]
    n_s = sample_counts(p_s, rng.block(0, cfg.trials, 2))
    missed = rng.block(0, cfg.trials, 3) < omega[n_s]
    return _rate(false_alarm, cfg.trials, "type1"), _rate(missed, cfg.trials, "type2")


@dataclass(frozen=True)
class RangingConfig:
    slots: int = 20
    targets: dict = field(default_factory=lambda: {5: 3.0, 15: 1.0})
    background_nbar: float = 1.0
    epsilon: float = 0.01
    trials: int = 10_000
    seed: int = 0
    cutoff: int = 30
    rule_reference_ns: float = 1.0

    def __post_init__(self):
        if int(self.slots) != self.slots or self.slots < 1:
            raise DomainError(f"slots must be an integer >= 1, got {self.slots!r}")
        for slot, mean in self.targets.items():
            if not 1 <= int(slot) <= self.slots:
                raise DomainError(f"target slot {slot} outside 1..{self.slots}")
            if mean < 0:
                raise DomainError(f"target mean photon number must be >= 0, got {mean!r}")
        if self.background_nbar < 0:
            raise DomainError("background_nbar must be >= 0")
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be an integer >= 1, got {self.trials!r}")
        _check_seed(self.seed)
        as_cutoff(self.cutoff)
        object.__setattr__(self, "targets", {int(k): float(v) for k, v in self.targets.items()})


@dataclass(frozen=True, eq=False)
class RangingResult:
    slots: np.ndarray
    detection_rate: np.ndarray
    stderr: np.ndarray
    mean_intensity: np.ndarray
    intensity_stderr: np.ndarray
    signal_mean: np.ndarray
    trials: int
    omega: np.ndarray

    def empty_mask(self) -> np.ndarray:
        return self.signal_mean == 0

    def pooled_empty_rate(self) -> tuple[float, float]:
        """Detection rate pooled over all slots without a target, and its stderr."""
        mask = self.empty_mask()
        if not mask.any():
            return float("nan"), float("nan")
        r = float(self.detection_rate[mask].mean())
        return r, math.sqrt(r * (1 - r) / (self.trials * int(mask.sum())))

    def contrasts(self) -> dict:
        """Target-slot detection and intensity relative to the empty-slot pool."""
        mask = self.empty_mask()
        if not mask.any():
            return {}
        rate0, _ = self.pooled_empty_rate()
        inten0 = float(self.mean_intensity[mask].mean())
        out = {}
        for i in np.flatnonzero(~mask):
            slot = int(self.slots[i])
            out[slot] = {
                "detection_contrast": float(self.detection_rate[i] / rate0) if rate0 > 0 else float("inf"),
                "intensity_contrast": float(self.mean_intensity[i] / inten0) if inten0 > 0 else float("inf"),
            }
        return out

    def rows(self):
        for i in range(self.slots.size):
            yield {
                "slot": int(self.slots[i]),
                "detection_rate": float(self.detection_rate[i]),
                "stderr": float(self.stderr[i]),
                "mean_intensity": float(self.mean_intensity[i]),
            }

    def to_dict(self) -> dict:
        rate0, se0 = self.pooled_empty_rate()
        rows = list(self.rows())
        for row, se, ns in zip(rows, self.intensity_stderr, self.signal_mean):
            row["intensity_stderr"] = float(se)
            row["signal_mean"] = float(ns)
        return {
            "type": "RangingResult",
            "schema": 1,
            "trials": self.trials,
            "slots": rows,
            "pooled_empty_rate": rate0,
            "pooled_empty_stderr": se0,
            "contrasts": {str(k): v for k, v in self.contrasts().items()},
            "omega": [float(w) for w in self.omega],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _slot_distribution(nbar: float, mean: float, cutoff) -> PhotonDistribution:
    if mean == 0:
        return diagonal_distribution(thermal_state(nbar, cutoff))
    return diagonal_distribution(dephased_signal_state(nbar, math.sqrt(mean), cutoff))


def run_ranging_demo(cfg: RangingConfig | None = None) -> RangingResult:
    """Time-of-flight ranging with one fixed randomized threshold test for every slot."""
    cfg = cfg or RangingConfig()
    cutoff = as_cutoff(cfg.cutoff)
    p_th = _slot_distribution(cfg.background_nbar, 0.0, cutoff)
    p_ref = _slot_distribution(cfg.background_nbar, cfg.rule_reference_ns, cutoff)
    test = classical_beta(p_ref, p_th, cfg.epsilon).test
    omega = np.append(test.omega, 1.0)
    overflow_count = cutoff.dim

    n = cfg.slots
    rate, se, inten, inten_se, sig = (np.zeros(n) for _ in range(5))
    for i in range(n):
        slot = i + 1
        mean = cfg.targets.get(slot, 0.0)
        dist = _slot_distribution(cfg.background_nbar, mean, cutoff)
        rng = CounterRNG(cfg.seed, slot)
        counts = sample_counts(dist, rng.block(0, cfg.trials, 0))
        detected = rng.block(0, cfg.trials, 1) >= omega[counts]
        counts = np.minimum(counts, overflow_count)
        r = np.count_nonzero(detected) / cfg.trials
        rate[i] = r
        se[i] = math.sqrt(r * (1 - r) / cfg.trials)
        inten[i] = counts.mean()
        inten_se[i] = counts.std(ddof=1) / math.sqrt(cfg.trials) if cfg.trials > 1 else 0.0
        sig[i] = mean
    return RangingResult(np.arange(1, n + 1), rate, se, inten, inten_se, sig, cfg.trials, test.omega)
