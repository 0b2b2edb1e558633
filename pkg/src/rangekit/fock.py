"""Truncated Fock-space states for a single bosonic mode.

All matrices are indexed by photon number ``0 .. d_max`` inclusive, so a
cutoff of 30 gives 31x31 matrices. States are never renormalized after
truncation: the probability mass that falls outside the retained block is
carried alongside as ``trace_deficit``.

Displacement convention: ``D(alpha) = exp(alpha a^dag - alpha^* a)`` with
``<n|D(alpha)|0> = exp(-|alpha|^2/2) alpha^n / sqrt(n!)``. This is the
operator-exponential convention. Writing the Laguerre formula with
``exp(i phi (m - n))`` and ``(-|alpha|)^(n-m)`` instead amounts to the
relabeling ``alpha -> -alpha^*``. No error probability computed here depends
on that choice, since it is a phase rotation, and rotations commute with the
thermal state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, NumericalError

HERMITIAN_TOL = 1e-12
PSD_CLIP_TOL = 1e-10
MIN_TRACE = 0.9
NORM_TOL = 1e-9

__all__ = [
    "FockCutoff",
    "ThermalParams",
    "SignalParams",
    "DensityMatrix",
    "PhotonDistribution",
    "DetectorResponse",
    "laguerre",
    "displacement_matrix",
    "phase_rotation",
    "thermal_state",
    "displaced_thermal_state",
    "dephased_signal_state",
    "diagonal_distribution",
    "apply_detector_response",
    "as_cutoff",
    "as_nbar",
]


@dataclass(frozen=True)
class FockCutoff:
    """Largest retained photon number. Matrices have dimension ``d_max + 1``."""

    d_max: int = 30

    def __post_init__(self):
        if isinstance(self.d_max, bool) or int(self.d_max) != self.d_max or self.d_max < 1:
            raise DomainError(f"cutoff must be an integer >= 1, got {self.d_max!r}")
        object.__setattr__(self, "d_max", int(self.d_max))

    @property
    def dim(self) -> int:
        return self.d_max + 1


@dataclass(frozen=True)
class ThermalParams:
    nbar: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.nbar) or self.nbar < 0:
            raise DomainError(f"nbar must be finite and >= 0, got {self.nbar!r}")
        object.__setattr__(self, "nbar", float(self.nbar))


@dataclass(frozen=True)
class SignalParams:
    """Coherent return amplitude ``|alpha|`` and accumulated phase.

    The phase is wrapped into ``[0, 2 pi)``. ``intensity`` is ``|alpha|^2``.
    """

    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.amplitude) or self.amplitude < 0:
            raise DomainError(f"amplitude must be finite and >= 0, got {self.amplitude!r}")
        if not math.isfinite(self.phase):
            raise DomainError(f"phase must be finite, got {self.phase!r}")
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "phase", float(self.phase) % (2 * math.pi))

    @classmethod
    def from_intensity(cls, ns: float, phase: float = 0.0) -> "SignalParams":
        if ns < 0:
            raise DomainError(f"signal intensity must be >= 0, got {ns!r}")
        return cls(math.sqrt(ns), phase)

    @property
    def intensity(self) -> float:
        return self.amplitude**2

    @property
    def alpha(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))


def as_cutoff(cutoff) -> FockCutoff:
    return cutoff if isinstance(cutoff, FockCutoff) else FockCutoff(cutoff)


def as_nbar(nbar) -> float:
    return nbar.nbar if isinstance(nbar, ThermalParams) else ThermalParams(nbar).nbar


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian matrix in the truncated number basis plus lost probability."""

    entries: np.ndarray
    trace_deficit: float = 0.0

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def d_max(self) -> int:
        return self.dim - 1

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def to_dict(self) -> dict:
        flat = self.entries.reshape(-1)
        return {
            "type": "DensityMatrix",
            "schema": 1,
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
            "trace_deficit": float(self.trace_deficit),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DensityMatrix":
        if data.get("type") != "DensityMatrix":
            raise DomainError("not a DensityMatrix record")
        dim = int(data["dim"])
        pairs = np.asarray(data["entries"], dtype=np.float64)
        if pairs.shape != (dim * dim, 2):
            raise DomainError(f"expected {dim * dim} complex pairs, got shape {pairs.shape}")
        entries = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim)
        return cls(entries, float(data["trace_deficit"]))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    """Probabilities of 0 .. d_max photons; ``deficit`` is the overflow mass."""

    probs: np.ndarray
    deficit: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise DomainError("probs must be a non-empty 1-D array")
        deficit = float(self.deficit)
        if np.any(probs < 0) or deficit < 0:
            raise DomainError("probabilities and deficit must be >= 0")
        if abs(probs.sum() + deficit - 1.0) > NORM_TOL:
            raise DomainError(f"probabilities plus deficit sum to {probs.sum() + deficit!r}, expected 1")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "deficit", deficit)

    def __len__(self) -> int:
        return self.probs.size

    @property
    def d_max(self) -> int:
        return self.probs.size - 1

    def with_overflow(self) -> np.ndarray:
        """Probabilities with the overflow outcome appended as the last entry."""
        return np.append(self.probs, max(self.deficit, 0.0))

    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def to_dict(self) -> dict:
        return {
            "type": "PhotonDistribution",
            "schema": 1,
            "probs": [float(p) for p in self.probs],
            "deficit": float(self.deficit),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhotonDistribution":
        if data.get("type") != "PhotonDistribution":
            raise DomainError("not a PhotonDistribution record")
        return cls(np.asarray(data["probs"], dtype=np.float64), float(data["deficit"]))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True, eq=False)
class DetectorResponse:
    """Column-stochastic matrix ``response[m, n] = P(report m | true n)``."""

    response: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.response, dtype=np.float64)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise DomainError(f"response must be square, got shape {r.shape}")
        if np.any(r < 0) or np.any(r > 1):
            raise DomainError("response entries must lie in [0, 1]")
        if np.max(np.abs(r.sum(axis=0) - 1.0)) > 1e-12:
            raise DomainError("response columns must each sum to 1")
        object.__setattr__(self, "response", r)

    @classmethod
    def identity(cls, cutoff) -> "DetectorResponse":
        return cls(np.eye(as_cutoff(cutoff).dim))

    @classmethod
    def binomial_loss(cls, efficiency: float, cutoff) -> "DetectorResponse":
        """Each photon is registered independently with probability ``efficiency``."""
        if not 0.0 <= efficiency <= 1.0:
            raise DomainError(f"efficiency must be in [0, 1], got {efficiency!r}")
        dim = as_cutoff(cutoff).dim
        r = np.zeros((dim, dim))
        for n in range(dim):
            for m in range(n + 1):
                r[m, n] = math.comb(n, m) * efficiency**m * (1 - efficiency) ** (n - m)
        # column sums drift by rounding alone
        r /= r.sum(axis=0, keepdims=True)
        return cls(r)


def laguerre(n: int, k: int, x: float) -> float:
    """Generalized Laguerre polynomial ``L_n^{(k)}(x)`` by upward recurrence."""
    if int(n) != n or int(k) != k or n < 0 or k < 0:
        raise DomainError(f"laguerre needs integers n, k >= 0, got n={n!r}, k={k!r}")
    if not math.isfinite(x):
        raise DomainError(f"laguerre argument must be finite, got {x!r}")
    return float(kernels.laguerre_table(int(n), float(k), float(x))[int(n)])


def phase_rotation(phi: float, cutoff) -> np.ndarray:
    """Diagonal ``exp(i phi n)`` as a vector of length ``d_max + 1``."""
    n = np.arange(as_cutoff(cutoff).dim)
    return np.exp(1j * phi * n)


def displacement_matrix(alpha: complex, cutoff) -> np.ndarray:
    """Truncated ``<n|D(alpha)|m>`` for ``0 <= n, m <= d_max``."""
    cutoff = as_cutoff(cutoff)
    alpha = complex(alpha)
    r = abs(alpha)
    base = kernels.displacement_real(r, cutoff.dim).astype(np.complex128)
    if r == 0.0:
        return base
    rot = phase_rotation(math.atan2(alpha.imag, alpha.real), cutoff)
    return rot[:, None] * base * rot.conj()[None, :]


def _thermal_weights(nbar: float, dim: int) -> tuple[np.ndarray, float]:
    if nbar == 0.0:
        w = np.zeros(dim)
        w[0] = 1.0
        return w, 0.0
    q = nbar / (1.0 + nbar)
    w = q ** np.arange(dim) / (1.0 + nbar)
    return w, q**dim


def thermal_state(nbar, cutoff) -> DensityMatrix:
    cutoff = as_cutoff(cutoff)
    w, deficit = _thermal_weights(as_nbar(nbar), cutoff.dim)
    return DensityMatrix(np.diag(w).astype(np.complex128), deficit)


def _repair_psd(m: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(m)
    lo = evals.min()
    if lo < -PSD_CLIP_TOL:
        raise NumericalError(f"state has eigenvalue {lo:.3e} below -{PSD_CLIP_TOL:g}")
    if lo >= 0:
        return m
    evals = np.clip(evals, 0.0, None)
    out = (evecs * evals) @ evecs.conj().T
    return 0.5 * (out + out.conj().T)


def _checked_state(m: np.ndarray) -> DensityMatrix:
    m = 0.5 * (m + m.conj().T)
    m = _repair_psd(m)
    tr = float(np.trace(m).real)
    if tr < MIN_TRACE:
        raise NumericalError(
            f"truncated state keeps only {tr:.4f} of its probability; raise the cutoff"
        )
    return DensityMatrix(m, max(0.0, 1.0 - tr))


def displaced_thermal_state(nbar, signal: SignalParams, cutoff) -> DensityMatrix:
    """``D(alpha) rho_th D(alpha)^dag`` with the thermal sum cut at ``d_max``."""
    cutoff = as_cutoff(cutoff)
    nbar = as_nbar(nbar)
    if signal.amplitude == 0.0:
        return thermal_state(nbar, cutoff)
    w, _ = _thermal_weights(nbar, cutoff.dim)
    d = displacement_matrix(signal.alpha, cutoff)
    return _checked_state((d * w[None, :]) @ d.conj().T)


def _dephased_series(nbar: float, ns: float, dim: int) -> np.ndarray:
    # positive-term expansion of the Laguerre form; avoids overflow for tiny nbar > 0
    logq = math.log(nbar / (1.0 + nbar))
    logs = math.log(ns / (1.0 + nbar) ** 2)
    out = np.empty(dim)
    for n in range(dim):
        j = np.arange(n + 1)
        logc = np.array([math.lgamma(n + 1) - math.lgamma(n - i + 1) - 2 * math.lgamma(i + 1) for i in j])
        out[n] = np.exp(logc + (n - j) * logq + j * logs).sum()
    return out * math.exp(-ns / (1.0 + nbar)) / (1.0 + nbar)


def dephased_signal_state(nbar, amplitude: float, cutoff) -> DensityMatrix:
    """Phase average of the displaced thermal state; diagonal in the number basis."""
    cutoff = as_cutoff(cutoff)
    nbar = as_nbar(nbar)
    if not math.isfinite(amplitude) or amplitude < 0:
        raise DomainError(f"amplitude must be finite and >= 0, got {amplitude!r}")
    ns = float(amplitude) ** 2
    dim = cutoff.dim
    n = np.arange(dim)
    if ns == 0.0:
        return thermal_state(nbar, cutoff)
    if nbar == 0.0:
        logp = -ns + n * math.log(ns) - np.array([math.lgamma(k + 1) for k in n])
        diag = np.exp(logp)
    else:
        x = -ns / ((1.0 + nbar) * nbar)
        lag = kernels.laguerre_table(dim - 1, 0.0, x)
        with np.errstate(over="ignore", invalid="ignore"):
            diag = (nbar / (1.0 + nbar)) ** n / (1.0 + nbar) * math.exp(-ns / (1.0 + nbar)) * lag
        if not np.all(np.isfinite(diag)):
            diag = _dephased_series(nbar, ns, dim)
    tr = float(diag.sum())
    if tr < MIN_TRACE:
        raise NumericalError(
            f"truncated state keeps only {tr:.4f} of its probability; raise the cutoff"
        )
    return DensityMatrix(np.diag(diag).astype(np.complex128), max(0.0, 1.0 - tr))


def diagonal_distribution(state: DensityMatrix) -> PhotonDistribution:
    diag = np.real(np.diag(state.entries)).copy()
    lo = diag.min()
    if lo < -PSD_CLIP_TOL:
        raise NumericalError(f"diagonal entry {lo:.3e} is below -{PSD_CLIP_TOL:g}")
    np.clip(diag, 0.0, None, out=diag)
    return PhotonDistribution(diag, state.trace_deficit)


def apply_detector_response(dist: PhotonDistribution, resp: DetectorResponse) -> PhotonDistribution:
    """Push a photon-number distribution through a detector model."""
    if resp.response.shape[1] != len(dist):
        raise DomainError(
            f"response acts on {resp.response.shape[1]} outcomes, distribution has {len(dist)}"
        )
    return PhotonDistribution(resp.response @ dist.probs, dist.deficit)
