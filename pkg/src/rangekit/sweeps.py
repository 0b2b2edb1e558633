"""Table generators behind the CLI subcommands.

Each function returns a :class:`Table`: an ordered column list, row dicts in
grid order, and metadata written into the CSV schema line. Rows are computed
independently (a row's Monte Carlo stream is its grid index), so a thread pool
can evaluate them in any order without changing the output.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .bounds import (
    classical_beta,
    helstrom_error,
    measured_helstrom_error,
    mismatched_symmetric_error,
    quantum_beta,
)
from .config import ScenarioConfig, thread_cap
from .fock import (
    SignalParams,
    dephased_signal_state,
    diagonal_distribution,
    displaced_thermal_state,
    thermal_state,
)
from .montecarlo import RangingConfig, SimConfig, estimate_symmetric_error, estimate_type_errors, run_ranging_demo
from .receiver import (
    ReceiverConfig,
    np_rule,
    optimize_displacement,
    phase_averaged_error,
    receiver_distribution,
    rule_error,
)

SWEEP_TRIALS = 100_000
RANGING_TRIALS = 10_000

# column lists are the CSV schema; bump SCHEMA_VERSION when any changes
SCHEMA_VERSION = 1
COLUMNS = {
    "sweep-symmetric": [
        "ns", "helstrom", "kennedy_limit", "matched_theory", "mismatched_theory",
        "mc_matched", "mc_matched_stderr", "mc_mismatched", "mc_mismatched_stderr",
        "displacement_abs",
    ],
    "sweep-asymmetric": [
        "ns", "quantum_beta", "quantum_duality_gap", "measured_beta", "fixed_test_type2",
        "mc_type2", "mc_type2_stderr", "fixed_test_type1", "achieved_type1", "achieved_type1_stderr",
    ],
    "cutoff-study": [
        "cutoff", "displacement_abs", "at_boundary", "kennedy_limit", "helstrom_at_cutoff",
        "helstrom_reference",
    ],
    "phase-study": [
        "ns", "phase_averaged_error", "fixed_phase_error", "dephased_optimal_error", "helstrom",
    ],
    "acceptance-profile": ["n", "omega_fixed", "omega_dephased", "p_th_fixed", "p_th_dephased"],
    "ranging-demo": ["slot", "detection_rate", "stderr", "mean_intensity"],
}
# columns that must lie in [0, 1]
NON_PROBABILITY = {"ns", "displacement_abs", "cutoff", "n", "slot", "mean_intensity", "at_boundary"}

__all__ = [
    "Table",
    "COLUMNS",
    "SCHEMA_VERSION",
    "sweep_symmetric",
    "sweep_asymmetric",
    "cutoff_study",
    "phase_study",
    "acceptance_profile",
    "ranging_demo",
    "COMMANDS",
]


@dataclass
class Table:
    command: str
    rows: list
    meta: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def columns(self) -> list:
        return COLUMNS[self.command]


def _map_rows(fn, items):
    workers = thread_cap()
    if workers <= 1 or len(items) <= 1:
        return [fn(i, x) for i, x in enumerate(items)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(items)), items))


class _Scenario:
    """States and the fixed receiver shared by every row of a sweep."""

    def __init__(self, cfg: ScenarioConfig, cutoff: int | None = None):
        self.cfg = cfg
        self.cutoff = cutoff or cfg.cutoff
        self.dephased = cfg.phase_mode.dephased
        self.phi = cfg.phase_mode.phi
        self.rho_th = thermal_state(cfg.nbar, self.cutoff)
        if self.dephased:
            self.receiver = ReceiverConfig(0.0, self.cutoff)
            self.displacement = None
        else:
            self.displacement = optimize_displacement(
                cfg.nbar, SignalParams.from_intensity(cfg.rule_reference_ns, self.phi), self.cutoff
            )
            self.receiver = ReceiverConfig(self.displacement.displacement, self.cutoff)
        self.p_th = receiver_distribution(self.rho_th, self.receiver)
        self.p_rule = receiver_distribution(self.signal_state(cfg.rule_reference_ns), self.receiver)

    def signal_state(self, ns: float):
        if self.dephased:
            return dephased_signal_state(self.cfg.nbar, math.sqrt(ns), self.cutoff)
        return displaced_thermal_state(self.cfg.nbar, SignalParams.from_intensity(ns, self.phi), self.cutoff)


def sweep_symmetric(cfg: ScenarioConfig) -> Table:
    sc = _Scenario(cfg)
    trials = cfg.trials_or(SWEEP_TRIALS)
    mismatched_rule = np_rule(sc.p_rule, sc.p_th)
    disp = 0.0 if sc.displacement is None else abs(sc.displacement.displacement)

    def row(i, ns):
        rho_s = sc.signal_state(ns)
        p_s = receiver_distribution(rho_s, sc.receiver)
        matched = np_rule(p_s, sc.p_th)
        mc_m = estimate_symmetric_error(matched, p_s, sc.p_th, SimConfig(trials, cfg.seed, 2 * i))
        mc_x = estimate_symmetric_error(mismatched_rule, p_s, sc.p_th, SimConfig(trials, cfg.seed, 2 * i + 1))
        return {
            "ns": ns,
            "helstrom": helstrom_error(rho_s, sc.rho_th).value,
            "kennedy_limit": measured_helstrom_error(p_s, sc.p_th).value,
            "matched_theory": rule_error(matched, p_s, sc.p_th).value,
            "mismatched_theory": mismatched_symmetric_error(p_s, sc.p_th, sc.p_rule).value,
            "mc_matched": mc_m.value,
            "mc_matched_stderr": mc_m.stderr,
            "mc_mismatched": mc_x.value,
            "mc_mismatched_stderr": mc_x.stderr,
            "displacement_abs": disp,
        }

    meta = {**cfg.header_items(), "trials": trials}
    return Table("sweep-symmetric", _map_rows(row, list(cfg.ns_grid)), meta)


def sweep_asymmetric(cfg: ScenarioConfig) -> Table:
    sc = _Scenario(cfg)
    trials = cfg.trials_or(SWEEP_TRIALS)
    # one test for every intensity; only the background fixes its false-alarm rate
    fixed = classical_beta(sc.p_rule, sc.p_th, cfg.epsilon)

    def row(i, ns):
        rho_s = sc.signal_state(ns)
        p_s = receiver_distribution(rho_s, sc.receiver)
        q = quantum_beta(rho_s, sc.rho_th, cfg.epsilon)
        m = classical_beta(p_s, sc.p_th, cfg.epsilon)
        t1, t2 = estimate_type_errors(fixed.test, p_s, sc.p_th, SimConfig(trials, cfg.seed, i))
        return {
            "ns": ns,
            "quantum_beta": q.beta,
            "quantum_duality_gap": q.duality_gap,
            "measured_beta": m.beta,
            "fixed_test_type2": fixed.test.absent_probability(p_s),
            "mc_type2": t2.value,
            "mc_type2_stderr": t2.stderr,
            "fixed_test_type1": 1.0 - fixed.test.absent_probability(sc.p_th),
            "achieved_type1": t1.value,
            "achieved_type1_stderr": t1.stderr,
        }

    meta = {**cfg.header_items(), "trials": trials}
    return Table("sweep-asymmetric", _map_rows(row, list(cfg.ns_grid)), meta, {"fixed_test": fixed.to_dict()})


def cutoff_study(cfg: ScenarioConfig) -> Table:
    """Kennedy limit and optimal displacement versus cutoff, at ``study_ns``."""
    phi = cfg.phase_mode.phi
    sig = SignalParams.from_intensity(cfg.study_ns, phi)
    top = max(cfg.cutoffs)
    reference = helstrom_error(displaced_thermal_state(cfg.nbar, sig, top), thermal_state(cfg.nbar, top)).value

    def row(i, d):
        opt = optimize_displacement(cfg.nbar, sig, d)
        h = helstrom_error(displaced_thermal_state(cfg.nbar, sig, d), thermal_state(cfg.nbar, d)).value
        return {
            "cutoff": d,
            "displacement_abs": abs(opt.displacement),
            "at_boundary": int(opt.at_boundary),
            "kennedy_limit": opt.objective,
            "helstrom_at_cutoff": h,
            "helstrom_reference": reference,
        }

    meta = {**cfg.header_items(), "study_ns": cfg.study_ns}
    meta.pop("cutoff")
    return Table("cutoff-study", _map_rows(row, list(cfg.cutoffs)), meta)


def phase_study(cfg: ScenarioConfig) -> Table:
    """Phase-sensitive receiver averaged over an unknown phase, against the dephased optimum."""
    phi = cfg.phase_mode.phi
    ref = SignalParams.from_intensity(cfg.rule_reference_ns, phi)
    opt = optimize_displacement(cfg.nbar, ref, cfg.cutoff)
    receiver = ReceiverConfig(opt.displacement, cfg.cutoff)
    rho_th = thermal_state(cfg.nbar, cfg.cutoff)
    p_th = receiver_distribution(rho_th, receiver)
    p_rule = receiver_distribution(displaced_thermal_state(cfg.nbar, ref, cfg.cutoff), receiver)
    q_th = diagonal_distribution(rho_th)

    def row(i, ns):
        amp = math.sqrt(ns)
        rho_s = displaced_thermal_state(cfg.nbar, SignalParams(amp, phi), cfg.cutoff)
        p_s = receiver_distribution(rho_s, receiver)
        deph = diagonal_distribution(dephased_signal_state(cfg.nbar, amp, cfg.cutoff))
        return {
            "ns": ns,
            "phase_averaged_error": phase_averaged_error(cfg.nbar, amp, receiver, ref, cfg.k_phases).value,
            "fixed_phase_error": mismatched_symmetric_error(p_s, p_th, p_rule).value,
            "dephased_optimal_error": measured_helstrom_error(deph, q_th).value,
            "helstrom": helstrom_error(rho_s, rho_th).value,
        }

    meta = {**cfg.header_items(), "k_phases": cfg.k_phases}
    return Table("phase-study", _map_rows(row, list(cfg.ns_grid)), meta)


def acceptance_profile(cfg: ScenarioConfig, epsilon: float | None = None) -> Table:
    """Omega(n) of the randomized test, after the fixed displacement and for the dephased case."""
    eps = cfg.epsilon if epsilon is None else epsilon
    ns = cfg.rule_reference_ns
    phi = cfg.phase_mode.phi
    opt = optimize_displacement(cfg.nbar, SignalParams.from_intensity(ns, phi), cfg.cutoff)
    receiver = ReceiverConfig(opt.displacement, cfg.cutoff)
    rho_th = thermal_state(cfg.nbar, cfg.cutoff)
    pf_th = receiver_distribution(rho_th, receiver)
    pf_s = receiver_distribution(displaced_thermal_state(cfg.nbar, SignalParams.from_intensity(ns, phi), cfg.cutoff), receiver)
    pd_th = diagonal_distribution(rho_th)
    pd_s = diagonal_distribution(dephased_signal_state(cfg.nbar, math.sqrt(ns), cfg.cutoff))
    fixed = classical_beta(pf_s, pf_th, eps)
    deph = classical_beta(pd_s, pd_th, eps)
    rows = [
        {
            "n": n,
            "omega_fixed": float(fixed.test.omega[n]),
            "omega_dephased": float(deph.test.omega[n]),
            "p_th_fixed": float(pf_th.probs[n]),
            "p_th_dephased": float(pd_th.probs[n]),
        }
        for n in range(cfg.cutoff + 1)
    ]
    meta = {**cfg.header_items(), "epsilon": eps}
    extra = {"fixed": fixed.to_dict(), "dephased": deph.to_dict(), "displacement": [opt.displacement.real, opt.displacement.imag]}
    return Table("acceptance-profile", rows, meta, extra)


def ranging_demo(cfg: ScenarioConfig) -> Table:
    rcfg = RangingConfig(
        slots=cfg.slots,
        targets=dict(cfg.targets),
        background_nbar=cfg.nbar,
        epsilon=cfg.epsilon,
        trials=cfg.trials_or(RANGING_TRIALS),
        seed=cfg.seed,
        cutoff=cfg.cutoff,
        rule_reference_ns=cfg.rule_reference_ns,
    )
    result = run_ranging_demo(rcfg)
    meta = {
        "nbar": cfg.nbar,
        "epsilon": cfg.epsilon,
        "cutoff": cfg.cutoff,
        "seed": cfg.seed,
        "trials": rcfg.trials,
        "targets": ";".join(f"{k}:{v:g}" for k, v in sorted(rcfg.targets.items())),
    }
    return Table("ranging-demo", list(result.rows()), meta, {"result": result.to_dict()})


COMMANDS = {
    "sweep-symmetric": sweep_symmetric,
    "sweep-asymmetric": sweep_asymmetric,
    "cutoff-study": cutoff_study,
    "phase-study": phase_study,
    "acceptance-profile": acceptance_profile,
    "ranging-demo": ranging_demo,
}
