"""Generalized Kennedy receiver: displacement, then photon counting.

The displacement is optimized once for a reference signal and then held
fixed, because the receiver does not know the return intensity. Decision
rules follow the Neyman-Pearson comparison of count distributions, with
ties declaring PRESENT. Counts above the cutoff form one extra "overflow"
outcome (detector saturation); deterministic rules decide it by the same
comparison applied to the two deficits, stochastic rules declare it ABSENT.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .bounds import ErrorReport, measured_helstrom_error, mismatched_symmetric_error
from .errors import DomainError, NumericalError
from .fock import (
    DensityMatrix,
    FockCutoff,
    PhotonDistribution,
    SignalParams,
    as_cutoff,
    as_nbar,
    diagonal_distribution,
    displaced_thermal_state,
    displacement_matrix,
    thermal_state,
)

GRID_POINTS = 41
GOLDEN_TOL = 1e-5
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

__all__ = [
    "ReceiverConfig",
    "DecisionRule",
    "DisplacementResult",
    "beta_max",
    "receiver_distribution",
    "optimize_displacement",
    "kennedy_objective",
    "np_rule",
    "rule_error",
    "phase_averaged_error",
]


def beta_max(cutoff) -> float:
    """Largest receiver displacement magnitude searched at this cutoff."""
    return math.sqrt(as_cutoff(cutoff).d_max) / 2.0


@dataclass(frozen=True)
class ReceiverConfig:
    displacement: complex
    cutoff: FockCutoff

    def __post_init__(self):
        cutoff = as_cutoff(self.cutoff)
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "displacement", complex(self.displacement))
        if abs(self.displacement) > beta_max(cutoff) * (1 + 1e-12):
            raise DomainError(
                f"|displacement| = {abs(self.displacement):.4f} exceeds the search bound "
                f"{beta_max(cutoff):.4f} for cutoff {cutoff.d_max}"
            )


@dataclass(frozen=True, eq=False)
class DecisionRule:
    """Either a deterministic accept-present mask or a stochastic Omega vector.

    ``omega[n]`` is the probability of declaring ABSENT on ``n`` counts.
    ``overflow_present`` is the decision on the overflow outcome; it must be
    False for stochastic rules.
    """

    present: np.ndarray | None = None
    omega: np.ndarray | None = None
    overflow_present: bool = False

    def __post_init__(self):
        if (self.present is None) == (self.omega is None):
            raise DomainError("give exactly one of present or omega")
        if self.present is not None:
            object.__setattr__(self, "present", np.asarray(self.present, dtype=bool))
        else:
            om = np.asarray(self.omega, dtype=np.float64)
            if np.any(om < 0) or np.any(om > 1):
                raise DomainError("omega entries must lie in [0, 1]")
            object.__setattr__(self, "omega", om)
            if self.overflow_present:
                raise DomainError("stochastic rules declare the overflow outcome ABSENT")
        object.__setattr__(self, "overflow_present", bool(self.overflow_present))

    @property
    def deterministic(self) -> bool:
        return self.present is not None

    def __len__(self) -> int:
        return (self.present if self.deterministic else self.omega).size

    def absent_probabilities(self) -> np.ndarray:
        if self.deterministic:
            return (~self.present).astype(np.float64)
        return self.omega

    def absent_with_overflow(self) -> np.ndarray:
        """Absent probabilities with the overflow outcome appended."""
        return np.append(self.absent_probabilities(), 0.0 if self.overflow_present else 1.0)

    @property
    def accept_present(self) -> frozenset[int]:
        if not self.deterministic:
            raise DomainError("stochastic rules have no accept set")
        return frozenset(int(n) for n in np.flatnonzero(self.present))

    def threshold(self) -> int | None:
        """``n*`` if the accept set is exactly ``{n >= n*}``, else None."""
        if not self.deterministic:
            return None
        idx = np.flatnonzero(self.present)
        if idx.size == 0:
            return len(self)
        if np.all(self.present[idx[0] :]):
            return int(idx[0])
        return None

    def to_dict(self) -> dict:
        if self.deterministic:
            return {
                "type": "DecisionRule",
                "schema": 1,
                "kind": "deterministic",
                "accept_present": sorted(self.accept_present),
                "outcomes": len(self),
                "overflow": "present" if self.overflow_present else "absent",
            }
        return {
            "type": "DecisionRule",
            "schema": 1,
            "kind": "stochastic",
            "omega": [float(w) for w in self.omega],
            "overflow": "absent",
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionRule":
        if data.get("type") != "DecisionRule":
            raise DomainError("not a DecisionRule record")
        if data["kind"] == "deterministic":
            present = np.zeros(int(data["outcomes"]), dtype=bool)
            present[list(data["accept_present"])] = True
            return cls(present=present, overflow_present=data.get("overflow") == "present")
        return cls(omega=np.asarray(data["omega"], dtype=np.float64))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class DisplacementResult:
    displacement: complex
    objective: float
    at_boundary: bool
    bound: float


def receiver_distribution(state: DensityMatrix, config: ReceiverConfig) -> PhotonDistribution:
    """Count statistics after displacing ``state`` by ``config.displacement``."""
    if state.dim != config.cutoff.dim:
        raise DomainError(f"state has dimension {state.dim}, receiver expects {config.cutoff.dim}")
    if config.displacement == 0:
        return diagonal_distribution(state)
    d = displacement_matrix(config.displacement, config.cutoff)
    probs = np.einsum("nk,nk->n", d @ state.entries, d.conj()).real
    if probs.min() < -1e-10:
        raise NumericalError(f"displaced count probability {probs.min():.3e} is negative")
    probs = np.clip(probs, 0.0, None)
    return PhotonDistribution(probs, max(0.0, 1.0 - float(probs.sum())))


def _signal(signal) -> SignalParams:
    return signal if isinstance(signal, SignalParams) else SignalParams.from_intensity(float(signal))


def kennedy_objective(rho_s: DensityMatrix, rho_th: DensityMatrix, displacement: complex, cutoff) -> float:
    cfg = ReceiverConfig(displacement, cutoff)
    return measured_helstrom_error(receiver_distribution(rho_s, cfg), receiver_distribution(rho_th, cfg)).value


def optimize_displacement(nbar, reference_signal=None, cutoff=30) -> DisplacementResult:
    """Best fixed displacement ``b e^{i phi_ref}`` for the reference signal.

    A 41-point grid over ``[-beta_max, beta_max]`` is refined by golden-section
    search around the best grid point. When the objective is flat the grid
    point with the smallest ``|b|`` wins.
    """
    cutoff = as_cutoff(cutoff)
    nbar = as_nbar(nbar)
    ref = _signal(1.0 if reference_signal is None else reference_signal)
    rho_s = displaced_thermal_state(nbar, ref, cutoff)
    rho_th = thermal_state(nbar, cutoff)
    bound = beta_max(cutoff)
    axis = complex(math.cos(ref.phase), math.sin(ref.phase))

    def f(b):
        return kennedy_objective(rho_s, rho_th, b * axis, cutoff)

    grid = np.linspace(-bound, bound, GRID_POINTS)
    grid[GRID_POINTS // 2] = 0.0  # linspace leaves rounding noise at the midpoint
    values = np.array([f(b) for b in grid])
    best = values.min()
    ties = np.flatnonzero(values <= best + 1e-15)
    i = int(ties[np.argmin(np.abs(grid[ties]))])
    b_best, f_best = float(grid[i]), float(values[i])

    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, GRID_POINTS - 1)]
    c, d = hi - _INVPHI * (hi - lo), lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > GOLDEN_TOL:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    b_gs = 0.5 * (lo + hi)
    f_gs = f(b_gs)
    if f_gs < f_best - 1e-15:
        b_best, f_best = b_gs, f_gs

    at_boundary = abs(abs(b_best) - bound) <= 2 * GOLDEN_TOL
    return DisplacementResult(b_best * axis, f_best, at_boundary, bound)


def np_rule(p_s: PhotonDistribution, p_th: PhotonDistribution) -> DecisionRule:
    """Declare PRESENT on every outcome, overflow included, where ``p_s >= p_th``."""
    if len(p_s) != len(p_th):
        raise DomainError(f"length mismatch: {len(p_s)} vs {len(p_th)}")
    return DecisionRule(present=p_s.probs - p_th.probs >= 0, overflow_present=p_s.deficit >= p_th.deficit)


def rule_error(rule: DecisionRule, p_s: PhotonDistribution, p_th: PhotonDistribution) -> ErrorReport:
    """Exact equal-prior error of ``rule``, overflow outcome included."""
    if not (len(rule) == len(p_s) == len(p_th)):
        raise DomainError("rule and distributions must have equal lengths")
    absent = rule.absent_with_overflow()
    false_alarm = float((1.0 - absent) @ p_th.with_overflow())
    miss = float(absent @ p_s.with_overflow())
    return ErrorReport(0.5 * (false_alarm + miss))


def phase_averaged_error(
    nbar,
    amplitude: float,
    fixed_config: ReceiverConfig,
    rule_reference,
    k_phases: int = 128,
) -> ErrorReport:
    """Fixed displacement and fixed rule, averaged over ``k_phases`` signal phases.

    Phases are ``phi_ref + 2 pi k / K``; ``K = 1`` evaluates the reference phase only.
    """
    if int(k_phases) != k_phases or k_phases < 1:
        raise DomainError(f"k_phases must be an integer >= 1, got {k_phases!r}")
    nbar = as_nbar(nbar)
    ref = _signal(rule_reference)
    cutoff = fixed_config.cutoff
    p_th = receiver_distribution(thermal_state(nbar, cutoff), fixed_config)
    p_rule = receiver_distribution(displaced_thermal_state(nbar, ref, cutoff), fixed_config)
    total = 0.0
    for k in range(int(k_phases)):
        sig = SignalParams(amplitude, ref.phase + 2 * math.pi * k / k_phases)
        p_act = receiver_distribution(displaced_thermal_state(nbar, sig, cutoff), fixed_config)
        total += mismatched_symmetric_error(p_act, p_th, p_rule).value
    return ErrorReport(total / k_phases)
