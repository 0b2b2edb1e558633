"""Symmetric and asymmetric error bounds for thermal-vs-signal discrimination.

Lost truncation mass is treated as one extra outcome ("overflow") that is
orthogonal to everything in the retained block. Symmetric distances include
it as another term in the l1/trace norm; asymmetric tests always declare
ABSENT on it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateError, DomainError, NumericalError
from .fock import DensityMatrix, PhotonDistribution

CERTIFICATE_TOL = 1e-6
OPERATOR_CLIP_TOL = 1e-9
BISECTION_MAX_ITER = 200
BISECTION_WIDTH = 1e-12

__all__ = [
    "BinaryTest",
    "AsymmetricResult",
    "ErrorReport",
    "trace_norm_distance",
    "helstrom_error",
    "measured_helstrom_error",
    "quantum_beta",
    "classical_beta",
    "mismatched_symmetric_error",
    "CERTIFICATE_TOL",
]


@dataclass(frozen=True)
class ErrorReport:
    value: float
    stderr: float = 0.0
    kind: str = "symmetric"

    def __post_init__(self):
        if self.kind not in ("symmetric", "type1", "type2"):
            raise DomainError(f"unknown error kind {self.kind!r}")
        if not (-1e-12 <= self.value <= 1 + 1e-12) or self.stderr < 0:
            raise NumericalError(f"invalid error report value={self.value!r} stderr={self.stderr!r}")
        object.__setattr__(self, "value", min(max(float(self.value), 0.0), 1.0))
        object.__setattr__(self, "stderr", float(self.stderr))

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "kind": self.kind}


@dataclass(frozen=True, eq=False)
class BinaryTest:
    """A test whose outcome probability is "declare target ABSENT".

    ``kind`` is ``"quantum-operator"`` (``operator`` holds Lambda) or
    ``"classical-stochastic"`` (``omega`` holds Omega(n) for n = 0 .. d_max).
    The overflow outcome is always declared ABSENT.
    """

    kind: str
    operator: np.ndarray | None = field(default=None, repr=False)
    omega: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "quantum-operator":
            if self.operator is None:
                raise DomainError("quantum-operator test needs an operator")
            op = np.asarray(self.operator, dtype=np.complex128)
            op = 0.5 * (op + op.conj().T)
            evals, evecs = np.linalg.eigh(op)
            if evals.min() < -OPERATOR_CLIP_TOL or evals.max() > 1 + OPERATOR_CLIP_TOL:
                raise DomainError(
                    f"test operator eigenvalues [{evals.min():.3e}, {evals.max():.3e}] outside [0, 1]"
                )
            if evals.min() < 0 or evals.max() > 1:
                op = (evecs * np.clip(evals, 0.0, 1.0)) @ evecs.conj().T
            object.__setattr__(self, "operator", op)
        elif self.kind == "classical-stochastic":
            if self.omega is None:
                raise DomainError("classical-stochastic test needs an omega vector")
            om = np.asarray(self.omega, dtype=np.float64)
            if om.ndim != 1 or np.any(om < 0) or np.any(om > 1):
                raise DomainError("omega must be a vector with entries in [0, 1]")
            object.__setattr__(self, "omega", om)
        else:
            raise DomainError(f"unknown test kind {self.kind!r}")

    def __len__(self) -> int:
        return self.omega.size if self.kind == "classical-stochastic" else self.operator.shape[0]

    def absent_probability(self, dist: PhotonDistribution) -> float:
        """P(declare absent) for a classical test applied to ``dist``."""
        if self.kind != "classical-stochastic":
            raise DomainError("absent_probability needs a classical-stochastic test")
        if len(dist) != self.omega.size:
            raise DomainError(f"test has {self.omega.size} outcomes, distribution has {len(dist)}")
        return float(self.omega @ dist.probs + dist.deficit)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "overflow": "absent"}
        if self.kind == "classical-stochastic":
            out["omega"] = [float(w) for w in self.omega]
        else:
            flat = self.operator.reshape(-1)
            out["dim"] = self.operator.shape[0]
            out["operator"] = [[float(z.real), float(z.imag)] for z in flat]
        return out


@dataclass(frozen=True, eq=False)
class AsymmetricResult:
    """Minimized missed-detection probability under a false-alarm budget."""

    beta: float
    test: BinaryTest
    type1: float
    duality_gap: float
    epsilon: float
    multiplier: float = 0.0

    def to_dict(self) -> dict:
        return {
            "type": "AsymmetricResult",
            "schema": 1,
            "epsilon": self.epsilon,
            "beta": self.beta,
            "type1": self.type1,
            "duality_gap": self.duality_gap,
            "multiplier": self.multiplier,
            "test": self.test.to_dict(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _matrix(x) -> np.ndarray:
    return x.entries if isinstance(x, DensityMatrix) else np.asarray(x, dtype=np.complex128)


def _check_pair(a, b):
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")


def trace_norm_distance(a, b) -> float:
    """Sum of absolute eigenvalues of the Hermitian difference ``a - b``."""
    ma, mb = _matrix(a), _matrix(b)
    _check_pair(ma, mb)
    diff = ma - mb
    diff = 0.5 * (diff + diff.conj().T)
    return float(np.abs(np.linalg.eigvalsh(diff)).sum())


def helstrom_error(rho_s: DensityMatrix, rho_th: DensityMatrix) -> ErrorReport:
    """Minimum equal-prior error over all measurements.

    The overflow masses enter the trace norm as one extra orthogonal
    dimension, so the result is directly comparable with
    :func:`measured_helstrom_error` on the same truncated states.
    """
    dist = trace_norm_distance(rho_s, rho_th) + abs(rho_s.trace_deficit - rho_th.trace_deficit)
    return ErrorReport(min(0.5, max(0.0, 0.5 * (1.0 - 0.5 * dist))))


def _pair(p: PhotonDistribution, q: PhotonDistribution):
    if len(p) != len(q):
        raise DomainError(f"length mismatch: {len(p)} vs {len(q)}")
    return p.with_overflow(), q.with_overflow()


def measured_helstrom_error(p: PhotonDistribution, q: PhotonDistribution) -> ErrorReport:
    pv, qv = _pair(p, q)
    dist = float(np.abs(pv - qv).sum())
    return ErrorReport(min(0.5, max(0.0, 0.5 * (1.0 - 0.5 * dist))))


def _check_epsilon(epsilon, closed: bool):
    ok = 0.0 <= epsilon <= 1.0 if closed else 0.0 < epsilon < 1.0
    if not (isinstance(epsilon, (int, float)) and math.isfinite(epsilon) and ok):
        interval = "[0, 1]" if closed else "(0, 1)"
        raise DomainError(f"epsilon must lie in {interval}, got {epsilon!r}")


def _negative_mass(rs: np.ndarray, rt: np.ndarray, t: float) -> float:
    evals, evecs = np.linalg.eigh(rs - t * rt)
    neg = evecs[:, evals < 0]
    return float(np.einsum("ij,ik,kj->", neg.conj(), rt, neg).real)


def _dual_value(rs, rt, t, target, def_s) -> float:
    pos = np.linalg.eigvalsh(t * rt - rs)
    return def_s + t * target - float(pos[pos > 0].sum())


def quantum_beta(rho_s: DensityMatrix, rho_th: DensityMatrix, epsilon: float) -> AsymmetricResult:
    """Optimal missed-detection probability with false alarms capped at ``epsilon``.

    Solves ``min Tr(L rho_s)`` over ``0 <= L <= I`` with
    ``Tr(L rho_th) >= 1 - epsilon`` by bisecting on the Lagrange multiplier
    ``t``: for each ``t`` the minimizer is the projector onto the negative
    eigenspace of ``rho_s - t rho_th``. The constraint is met with equality
    by a fractional weight on the marginal eigenspace. Weak duality gives the
    certificate reported as ``duality_gap``.
    """
    _check_epsilon(epsilon, closed=False)
    rs = 0.5 * (_matrix(rho_s) + _matrix(rho_s).conj().T)
    rt = 0.5 * (_matrix(rho_th) + _matrix(rho_th).conj().T)
    _check_pair(rs, rt)
    def_s, def_t = rho_s.trace_deficit, rho_th.trace_deficit
    target = 1.0 - epsilon - def_t
    dim = rs.shape[0]

    if target <= 0.0:
        lam = np.zeros((dim, dim), dtype=np.complex128)
        test = BinaryTest("quantum-operator", operator=lam)
        return AsymmetricResult(def_s, test, 1.0 - def_t, 0.0, epsilon, 0.0)

    t_lo, t_hi = 0.0, 1.0
    for _ in range(BISECTION_MAX_ITER):
        if _negative_mass(rs, rt, t_hi) >= target:
            break
        t_lo, t_hi = t_hi, 2.0 * t_hi
    else:
        raise NumericalError("could not bracket the Lagrange multiplier; constraint infeasible")
    for _ in range(BISECTION_MAX_ITER):
        if t_hi - t_lo < BISECTION_WIDTH * max(1.0, t_hi):
            break
        mid = 0.5 * (t_lo + t_hi)
        if _negative_mass(rs, rt, mid) >= target:
            t_hi = mid
        else:
            t_lo = mid

    t = t_hi
    evals, evecs = np.linalg.eigh(rs - t * rt)
    weights_th = np.einsum("ij,ik,kj->j", evecs.conj(), rt, evecs).real
    scale = max(1.0, float(np.abs(evals).max()))
    degenerate = 1e-12 * scale
    w = np.zeros(dim)
    filled = 0.0
    i = 0
    while i < dim and filled < target:
        j = i
        while j + 1 < dim and evals[j + 1] - evals[i] <= degenerate:
            j += 1
        mass = float(weights_th[i : j + 1].sum())
        if filled + mass <= target:
            w[i : j + 1] = 1.0
            filled += mass
        else:
            # equal weight across the degenerate marginal eigenspace
            w[i : j + 1] = (target - filled) / mass
            filled = target
        i = j + 1

    lam = (evecs * w) @ evecs.conj().T
    test = BinaryTest("quantum-operator", operator=lam)
    absent_th = float(np.trace(test.operator @ rt).real) + def_t
    beta = float(np.trace(test.operator @ rs).real) + def_s
    dual = max(_dual_value(rs, rt, t, target, def_s), _dual_value(rs, rt, t_lo, target, def_s))
    gap = beta - dual
    if gap > CERTIFICATE_TOL:
        raise CertificateError(
            f"duality gap {gap:.3e} exceeds {CERTIFICATE_TOL:g}",
            gap=gap,
            diagnostics={"t": t, "t_lo": t_lo, "beta": beta, "dual": dual, "epsilon": epsilon},
        )
    beta = min(1.0, max(0.0, beta))
    return AsymmetricResult(beta, test, max(0.0, 1.0 - absent_th), max(gap, 0.0), epsilon, t)


def classical_beta(p_s: PhotonDistribution, p_th: PhotonDistribution, epsilon: float) -> AsymmetricResult:
    """Randomized Neyman-Pearson test on photon-count distributions.

    Outcomes are filled with Omega = 1 (declare absent) in ascending order of
    the likelihood ratio ``p_s / p_th`` until the background acceptance
    reaches ``1 - epsilon``; the marginal outcome takes a fractional weight.
    Outcomes impossible under both hypotheses get Omega = 0.
    """
    _check_epsilon(epsilon, closed=True)
    if len(p_s) != len(p_th):
        raise DomainError(f"length mismatch: {len(p_s)} vs {len(p_th)}")
    ps, pt = p_s.probs, p_th.probs
    def_s, def_t = p_s.deficit, p_th.deficit
    target = 1.0 - epsilon - def_t
    omega = np.zeros(ps.size)
    multiplier = 0.0
    if target > 0.0:
        if pt.sum() < target - 1e-12:
            raise NumericalError(
                f"background mass {pt.sum() + def_t:.12f} cannot reach acceptance {1 - epsilon:.12f}"
            )
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(pt > 0, ps / pt, np.inf)
        relevant = (pt > 0) | (ps > 0)
        order = [n for n in np.argsort(ratio, kind="stable") if relevant[n] and pt[n] > 0]
        filled = 0.0
        for n in order:
            if filled + pt[n] <= target:
                omega[n] = 1.0
                filled += pt[n]
                multiplier = ratio[n]
                if filled >= target:
                    break
            else:
                omega[n] = (target - filled) / pt[n]
                filled = target
                multiplier = ratio[n]
                break

    test = BinaryTest("classical-stochastic", omega=omega)
    beta = float(omega @ ps) + def_s
    type1 = 1.0 - (float(omega @ pt) + def_t)
    if target > 0.0 and math.isfinite(multiplier):
        dual = def_s + multiplier * target - float(np.clip(multiplier * pt - ps, 0.0, None).sum())
        gap = max(0.0, beta - dual)
    else:
        gap = 0.0
    return AsymmetricResult(min(1.0, max(0.0, beta)), test, max(0.0, type1), gap, epsilon, float(multiplier))


def mismatched_symmetric_error(
    p_actual_s: PhotonDistribution,
    p_th: PhotonDistribution,
    p_rule_s: PhotonDistribution,
) -> ErrorReport:
    """Equal-prior error when the decision rule was built for ``p_rule_s``.

    Outcomes in ``{n : p_rule_s(n) >= p_th(n)}`` declare PRESENT, the
    overflow outcome included (compared through the deficits); all others
    declare ABSENT.
    """
    if not (len(p_actual_s) == len(p_th) == len(p_rule_s)):
        raise DomainError("length mismatch among distributions")
    q = p_th.with_overflow()
    present = p_rule_s.with_overflow() - q >= 0
    false_alarm = float(q[present].sum())
    miss = float(p_actual_s.with_overflow()[~present].sum())
    return ErrorReport(0.5 * (false_alarm + miss))
