"""Pure-Python (numpy) implementations of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
The two must agree bit-for-bit on the PRNG and sampling kernels and to
rounding on the floating-point kernels; ``tests/test_kernels.py`` checks both.
"""

from math import exp, lgamma

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
LANES = 4

_GAMMA_U = np.uint64(GAMMA)
_MIX1_U = np.uint64(MIX1)
_MIX2_U = np.uint64(MIX2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (reference, scalar)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    return mix64((seed + mix64(((stream + 1) * GAMMA) & MASK64)) & MASK64)


def _mix64_array(z):
    z = (z ^ (z >> _S30)) * _MIX1_U
    z = (z ^ (z >> _S27)) * _MIX2_U
    return z ^ (z >> _S31)


def random_words(seed: int, stream: int, start: int, count: int, lane: int):
    """Raw 64-bit words for trials ``start .. start+count-1`` on one lane."""
    key = np.uint64(stream_key(seed, stream))
    trial = np.arange(start, start + count, dtype=np.uint64)
    ctr = trial * np.uint64(LANES) + np.uint64(lane + 1)
    with np.errstate(over="ignore"):
        return _mix64_array(key + ctr * _GAMMA_U)


def uniforms(seed: int, stream: int, start: int, count: int, lane: int):
    words = random_words(seed, stream, start, count, lane)
    return (words >> _S11).astype(np.float64) * (1.0 / 9007199254740992.0)


def sample_counts(cdf, u):
    """Inverse-CDF lookup; returns ``len(cdf)`` where ``u`` lands past the end."""
    return np.searchsorted(np.asarray(cdf, dtype=np.float64), u, side="right").astype(np.int64)


def laguerre_table(nmax: int, k: float, x: float):
    """L_0^{(k)}(x) .. L_nmax^{(k)}(x) by upward three-term recurrence."""
    out = np.empty(nmax + 1, dtype=np.float64)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 1.0 + k - x
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + k + 1 - x) * out[n] - (n + k) * out[n - 1]) / (n + 1)
    return out


def displacement_real(r: float, dim: int):
    """Truncated matrix of D(r) for real r >= 0, standard convention.

    ``<n|D(r)|m> = e^{-r^2/2} sqrt(m!/n!) r^{n-m} L_m^{(n-m)}(r^2)`` for n >= m,
    and ``(-1)^{m-n}`` times the transposed expression above the diagonal.
    """
    out = np.zeros((dim, dim), dtype=np.float64)
    if r == 0.0:
        np.fill_diagonal(out, 1.0)
        return out
    x = r * r
    g = exp(-0.5 * x)
    lr = np.log(r)
    for k in range(dim):
        lag = laguerre_table(dim - 1 - k, float(k), x)
        for m in range(dim - k):
            n = m + k
            val = g * exp(0.5 * (lgamma(m + 1) - lgamma(n + 1)) + k * lr) * lag[m]
            out[n, m] = val
            if k:
                out[m, n] = -val if k & 1 else val
    return out
