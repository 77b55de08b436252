"""The matter-wave resource state: amplitudes, coherence control, bursts, normaliser."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .qmath import binomial_exact


class Mode(str, enum.Enum):
    COHERENT = "coherent"
    INCOHERENT = "incoherent"


@dataclass(frozen=True)
class BeamState:
    """N particles split over the two interferometer arms.

    ``fluctuation_mean`` (m-bar) is the mean size of thermal fluctuations of
    the total particle number around ``n_particles``; ``None`` means a sharp N.
    """

    n_particles: int
    mode: Mode = Mode.COHERENT
    fluctuation_mean: Optional[float] = None

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 0:
            raise ValueError(f"n_particles must be a non-negative integer, got {self.n_particles}")
        object.__setattr__(self, "n_particles", int(self.n_particles))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.fluctuation_mean is not None and self.fluctuation_mean < 0:
            raise ValueError("fluctuation_mean must be non-negative")

    @property
    def coherent(self) -> bool:
        return self.mode is Mode.COHERENT

    def with_n(self, n: int) -> "BeamState":
        return BeamState(n, self.mode, None)


def amplitude(N: int, r: int) -> float:
    """binom(N, r) / sqrt(binom(2N, N)): amplitude of |N-r, r> in the particle state."""
    if not 0 <= r <= N:
        raise ValueError(f"r must lie in [0, {N}], got {r}")
    # exact ratio first; the square root is the only rounding step
    return math.sqrt(binomial_exact(N, r) ** 2 / binomial_exact(2 * N, N))


def coherence_factor(r: int, mode) -> float:
    """Phi(r): 1 for a coherent superposition, Kronecker delta_{r,0} for the mixture."""
    if Mode(mode) is Mode.COHERENT:
        return 1.0
    return 1.0 if r == 0 else 0.0


def compose_bursts(N1: int, N2: int) -> list[int]:
    """Coefficients of |N-r, r> after two bursts of N1 and N2 particles.

    Computed from the explicit double sum over (r1, r2), collected by the
    total r = r1 + r2.  The result equals ``[binom(N1+N2, r)]`` exactly.
    """
    if N1 < 0 or N2 < 0:
        raise ValueError("burst sizes must be non-negative")
    coeffs = [0] * (N1 + N2 + 1)
    for r1 in range(N1 + 1):
        c1 = binomial_exact(N1, r1)
        for r2 in range(N2 + 1):
            coeffs[r1 + r2] += c1 * binomial_exact(N2, r2)
    return coeffs


def normalization_q(N: int, gamma: float, nbar: float, mode) -> float:
    """Q = sum_{r=-N}^{N} binom(2N, N+r) Phi(r) exp(-(2 nbar + 1) gamma^2 r^2).

    For the incoherent mixture only r = 0 survives and Q = binom(2N, N).
    """
    if gamma < 0 or nbar < 0:
        raise ValueError("gamma and nbar must be non-negative")
    damp = (2 * nbar + 1) * gamma * gamma
    total = 0.0
    for r in range(-N, N + 1):
        phi = coherence_factor(r, mode)
        if phi:
            total += binomial_exact(2 * N, N + r) * math.exp(-damp * r * r)
    return total


def fluctuation_weights(N: int, mbar: float, n_max: Optional[int] = None,
                        tail: float = 1e-12) -> list[tuple[int, float]]:
    """Distribution of the actual particle number N' around the nominal N.

    The deviation size k = |N' - N| follows a geometric (thermal) law of mean
    ``mbar``; for k > 0 the sign is equiprobable whenever both N +/- k are
    physical, otherwise the whole weight goes to N + k.  The support is cut at
    N' <= ``n_max`` (default: where the geometric tail drops below ``tail``)
    and the weights are renormalised to sum to one.
    """
    if mbar < 0:
        raise ValueError("mbar must be non-negative")
    if mbar == 0:
        return [(N, 1.0)]
    ratio = mbar / (1.0 + mbar)
    if n_max is None:
        k_max = max(1, math.ceil(math.log(tail) / math.log(ratio)))
        n_max = N + k_max
    if n_max < N:
        raise ValueError("n_max must be at least the nominal particle number")
    weights: dict[int, float] = {N: 1.0 / (1.0 + mbar)}
    for k in range(1, n_max - N + 1):
        pk = ratio ** k / (1.0 + mbar)
        if N - k >= 0:
            weights[N + k] = weights.get(N + k, 0.0) + 0.5 * pk
            weights[N - k] = weights.get(N - k, 0.0) + 0.5 * pk
        else:
            weights[N + k] = weights.get(N + k, 0.0) + pk
    total = sum(weights.values())
    return [(n, w / total) for n, w in sorted(weights.items())]
