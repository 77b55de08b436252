"""Joint homodyne statistics of the two mirrors after a balanced beamsplitter.

Quadratures follow x = (a + a^dag)/sqrt2, <x|0> = pi^{-1/4} exp(-x^2/2), and
x_theta = x cos(theta) + p sin(theta).  ``joint_probability`` is the squared
matrix element |<x_theta, y_phi| B rho B^dag |x_theta, y_phi>|^2, i.e. the
square of the Born density, not the density itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .beamstate import BeamState, Mode, coherence_factor, normalization_q
from .qmath import binomial_exact

THETA0 = -math.pi / 4


@dataclass(frozen=True)
class HomodyneSetting:
    theta: float
    phi: float
    x: float
    y: float

    def swapped(self) -> "HomodyneSetting":
        return HomodyneSetting(self.phi, self.theta, self.y, self.x)


@dataclass(frozen=True)
class PeakScanResult:
    values: tuple
    heights: tuple
    locations: tuple
    mode: Mode
    label: str = "N"


def xbar_ybar(theta: float, phi: float, r1: int, r2: int, gamma: float, nbar: float,
              N: int) -> tuple[complex, complex]:
    """Complex Gaussian centres of the (r1, r2) term in each output quadrature."""
    t, d = r1 + r2, r1 - r2
    k = 2 * nbar + 1
    xb = 0.5 * gamma * complex((2 * N - t) * math.sin(theta) - t * math.cos(theta),
                               -k * d * (math.cos(theta) - math.sin(theta)))
    yb = 0.5 * gamma * complex(t * math.sin(phi) - (2 * N - t) * math.cos(phi),
                               k * d * (math.cos(phi) - math.sin(phi)))
    return xb, yb


def born_density(setting: HomodyneSetting, beam: BeamState, gamma: float, nbar: float,
                 x=None, y=None):
    """<x_theta, y_phi| B rho B^dag |x_theta, y_phi> from the closed form.

    ``x``/``y`` override the setting's outcomes and may be arrays.
    """
    N = beam.n_particles
    k = 2 * nbar + 1
    x = np.asarray(setting.x if x is None else x, dtype=float)
    y = np.asarray(setting.y if y is None else y, dtype=float)
    Q = normalization_q(N, gamma, nbar, beam.mode)
    total = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for r1 in range(N + 1):
        for r2 in range(N + 1):
            phi_c = coherence_factor(r1 - r2, beam.mode)
            if not phi_c:
                continue
            xb, yb = xbar_ybar(setting.theta, setting.phi, r1, r2, gamma, nbar, N)
            c = binomial_exact(N, r1) * binomial_exact(N, r2) * phi_c
            total += c * np.exp(-((x - xb) ** 2 + (y - yb) ** 2) / k - k * gamma ** 2 * (r1 - r2) ** 2)
    return total / (math.pi * k * Q)


def joint_probability(setting: HomodyneSetting, beam: BeamState, gamma: float, nbar: float,
                      x=None, y=None):
    """P(x_theta, y_phi) = |<x_theta, y_phi| B rho B^dag |x_theta, y_phi>|^2."""
    val = np.abs(born_density(setting, beam, gamma, nbar, x, y)) ** 2
    return val if val.ndim else float(val)


def _peak_sum(N: int, gamma: float, nbar: float) -> float:
    # sum_{r=-N}^{N} binom(2N, N+r) exp(-(2 nbar + 1) gamma^2 r^2)
    return normalization_q(N, gamma, nbar, Mode.COHERENT)


def resonance_peak(beam: BeamState, gamma: float, nbar: float) -> float:
    """Height of the resonance peak at theta = -pi/4, phi = -theta - pi/2, x = y.

    Incoherent: 1/[pi^2 (2 nbar + 1)^2], whatever N and gamma.
    Coherent: 2^{4N}/[pi^2 (2 nbar + 1)^2] * [sum_r binom(2N, N+r) e^{-(2nbar+1) gamma^2 r^2}]^{-2}.
    """
    base = 1.0 / (math.pi * (2 * nbar + 1)) ** 2
    if beam.mode is Mode.INCOHERENT:
        return base
    N = beam.n_particles
    ratio = 4 ** N / _peak_sum(N, gamma, nbar)
    return base * ratio * ratio


def peak_location(N: int, gamma: float, theta0: float = THETA0) -> float:
    """x = y at which the resonance peak sits: -gamma N / sqrt2 (a function of gamma N only)."""
    if not math.isclose(theta0, THETA0):
        raise ValueError("only the theta0 = -pi/4 branch is supported")
    return -gamma * N / math.sqrt(2)


def resonance_setting(N: int, gamma: float, nu: float = 0.0) -> HomodyneSetting:
    """theta = theta0 + nu, phi = -theta0 - pi/2 + nu, outcomes at the nu = 0 peak."""
    loc = peak_location(N, gamma)
    return HomodyneSetting(THETA0 + nu, -THETA0 - math.pi / 2 + nu, loc, loc)


def diagonal_peak(beam: BeamState, gamma: float, nbar: float, nu: float = 0.0,
                  width: float = 3.0, xtol: float = 1e-10) -> tuple[float, float]:
    """Maximise the exact P along x = y by golden-section search.

    The bracket is centred on -gamma N / sqrt2; returns (location, height).
    """
    s = resonance_setting(beam.n_particles, gamma, nu)
    seed = s.x

    def neg(z):
        return -joint_probability(s, beam, gamma, nbar, z, z)

    res = optimize.minimize_scalar(neg, bracket=(seed - width, seed, seed + width),
                                   method="golden", tol=xtol)
    return float(res.x), float(-res.fun)


def n_scan(n_values: Sequence[int], gamma: float, nbar: float, mode) -> PeakScanResult:
    """Resonance-peak height for each particle number."""
    if not len(n_values):
        raise ValueError("n_values must be non-empty")
    mode = Mode(mode)
    heights = tuple(resonance_peak(BeamState(n, mode), gamma, nbar) for n in n_values)
    locs = tuple(peak_location(n, gamma) for n in n_values)
    return PeakScanResult(tuple(int(n) for n in n_values), heights, locs, mode, "N")


def nu_peak_lowest_order(nu: float, N: int, gamma: float, nbar: float, mode,
                         reading: str = "inverse") -> float:
    """Peak height to lowest order in the angle offset nu.

    Coherent: |sum_{r1,r2} binom binom e^{-2i gamma^2 (N - r1 - r2)(r1 - r2) nu}|^2
    times S^{-2} (``reading="inverse"``) or S^{+2} (``reading="literal"``),
    S = sum_r binom(2N, N+r) e^{-(2nbar+1) gamma^2 r^2}, all over pi^2 (2nbar+1)^2.
    Only the "inverse" reading reduces to ``resonance_peak`` at nu = 0.
    """
    base = 1.0 / (math.pi * (2 * nbar + 1)) ** 2
    if Mode(mode) is Mode.INCOHERENT:
        return base
    r = np.arange(N + 1)
    b = np.array([binomial_exact(N, k) for k in r], dtype=float)
    r1, r2 = np.meshgrid(r, r, indexing="ij")
    phase = np.exp(-2j * gamma ** 2 * (N - r1 - r2) * (r1 - r2) * nu)
    amp = abs(np.sum(np.outer(b, b) * phase)) ** 2
    S = _peak_sum(N, gamma, nbar)
    if reading == "inverse":
        return base * amp / S ** 2
    if reading == "literal":
        return base * amp * S ** 2
    raise ValueError(f"unknown reading {reading!r}")


def nu_scan(nu_values: Sequence[float], N: int, gamma: float, nbar: float, mode,
            method: str = "lowest-order", reading: str = "inverse") -> PeakScanResult:
    """Peak height versus homodyne-angle offset nu.

    ``method="lowest-order"`` uses the small-nu closed form; ``method="exact"``
    evaluates the full P at the nu = 0 peak position with both angles offset.
    """
    if not len(nu_values):
        raise ValueError("nu_values must be non-empty")
    mode = Mode(mode)
    beam = BeamState(N, mode)
    loc = peak_location(N, gamma)
    heights = []
    for nu in nu_values:
        if method == "lowest-order":
            heights.append(nu_peak_lowest_order(nu, N, gamma, nbar, mode, reading))
        elif method == "exact":
            heights.append(joint_probability(resonance_setting(N, gamma, nu), beam, gamma, nbar))
        else:
            raise ValueError(f"unknown method {method!r}")
    return PeakScanResult(tuple(float(v) for v in nu_values), tuple(heights),
                          tuple(loc for _ in nu_values), mode, "nu")
