"""Special functions and exact combinatorics shared by the other modules."""

from __future__ import annotations

import math

import numpy as np


def binomial_exact(n: int, k: int) -> int:
    """Exact binomial coefficient as a Python integer.

    Follows the Gamma-function convention: the result is 0 whenever
    ``k < 0`` or ``k > n``.

    Raises
    ------
    ValueError
        If ``n`` is negative.
    """
    n, k = int(n), int(k)
    if n < 0:
        raise ValueError(f"binomial_exact requires n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def laguerre_assoc(n: int, k: float, x):
    """Associated Laguerre polynomial L_n^k(x) by forward three-term recurrence.

    ``x`` may be a scalar or an array; ``k`` may be any real >= 0 (or an array
    broadcasting against ``x``).
    """
    if n < 0:
        raise ValueError("laguerre_assoc requires n >= 0")
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    prev = np.ones(np.broadcast(x, k).shape)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + k - x
    for m in range(1, n):
        prev, cur = cur, ((2 * m + 1 + k - x) * cur - (m + k) * prev) / (m + 1)
    cur = np.asarray(cur)
    return cur if cur.ndim else float(cur)


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Normalised oscillator eigenfunctions psi_0..psi_{n_max-1} evaluated at ``x``.

    Uses the normalised recurrence
    psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1},
    which stays finite well beyond n = 200.  Returns an array of shape
    ``(n_max,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max,) + x.shape)
    if n_max == 0:
        return out
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_function(n: int, x):
    """psi_n(x) = pi^{-1/4} (2^n n!)^{-1/2} H_n(x) exp(-x^2/2)."""
    if n < 0:
        raise ValueError("hermite_function requires n >= 0")
    val = hermite_functions(n + 1, x)[n]
    return val if val.ndim else float(val)


def _laguerre_table(n_max: int, x: float) -> np.ndarray:
    """table[n, k] = L_n^k(x) for 0 <= n, k < n_max."""
    k = np.arange(n_max, dtype=float)
    table = np.empty((n_max, n_max))
    table[0] = 1.0
    if n_max > 1:
        table[1] = 1.0 + k - x
    for n in range(1, n_max - 1):
        table[n + 1] = ((2 * n + 1 + k - x) * table[n] - (n + k) * table[n - 1]) / (n + 1)
    return table


def _lower_elements(m: np.ndarray, n: np.ndarray, alpha: complex, table: np.ndarray) -> np.ndarray:
    # <m|D(alpha)|n> for m >= n, in log form to avoid overflow of n!/m! and alpha^k
    x = abs(alpha) ** 2
    k = m - n
    lag = table[n, k]
    if alpha == 0:
        return np.where(k == 0, lag, 0.0).astype(complex)
    logmag = 0.5 * (_LGAMMA(n + 1) - _LGAMMA(m + 1)) + k * math.log(abs(alpha)) - 0.5 * x
    return np.exp(logmag + 1j * k * np.angle(alpha)) * lag


_LGAMMA = np.vectorize(math.lgamma, otypes=[float])


def displacement_matrix_element(m: int, n: int, alpha: complex) -> complex:
    """<m|D(alpha)|n> for D(alpha) = exp(alpha a^dag - alpha^* a).

    For m >= n this is sqrt(n!/m!) alpha^{m-n} exp(-|alpha|^2/2) L_n^{m-n}(|alpha|^2);
    the m < n case follows from <m|D(alpha)|n> = conj(<n|D(-alpha)|m>).
    """
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    alpha = complex(alpha)
    hi, lo = max(m, n), min(m, n)
    table = _laguerre_table(hi + 1, abs(alpha) ** 2)
    if m >= n:
        return complex(_lower_elements(np.array(m), np.array(n), alpha, table))
    return complex(np.conj(_lower_elements(np.array(hi), np.array(lo), -alpha, table)))


def displacement_matrix(alpha: complex, n_max: int) -> np.ndarray:
    """Truncated matrix [<m|D(alpha)|n>]_{m,n < n_max} built from exact elements.

    No truncation enters the individual elements; only the basis is cut off.
    """
    alpha = complex(alpha)
    table = _laguerre_table(n_max, abs(alpha) ** 2)
    m, n = np.meshgrid(np.arange(n_max), np.arange(n_max), indexing="ij")
    lower = _lower_elements(np.maximum(m, n), np.minimum(m, n), alpha, table)
    upper = np.conj(_lower_elements(np.maximum(m, n), np.minimum(m, n), -alpha, table))
    return np.where(m >= n, lower, upper)


def thermal_weight(n: int, nbar: float) -> float:
    """Occupation probability nbar^n / (1 + nbar)^(n+1) of a thermal state."""
    if nbar < 0:
        raise ValueError(f"mean occupation must be non-negative, got {nbar}")
    if n < 0:
        return 0.0
    if nbar == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(nbar) - (n + 1) * math.log1p(nbar))


def thermal_weights(nbar: float, n_max: int) -> np.ndarray:
    """Vector of ``thermal_weight(n, nbar)`` for n < n_max."""
    return np.array([thermal_weight(n, nbar) for n in range(n_max)])
