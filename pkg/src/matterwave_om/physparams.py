"""Laboratory numbers: de Broglie wavelength, mirror zero-point extent, coupling,
cavity frequency shift and linewidth."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from scipy import constants as C


@dataclass(frozen=True)
class LabParams:
    mirror_mass: float = 1.4e-13              # kg
    mech_freq: float = 2 * math.pi * 150e3    # rad/s
    particle_mass: float = 6.6e-27            # kg, helium ion
    particle_charge: float = C.e              # C
    accel_voltage: float = 1e4                # V
    cavity_wavelength: float = 1064e-9        # m
    cavity_length_multiplier: float = 400.0   # L_c / lambda_c
    finesse: float = 7000.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")

    @property
    def cavity_length(self) -> float:
        return self.cavity_length_multiplier * self.cavity_wavelength

    @property
    def cavity_frequency(self) -> float:
        return 2 * math.pi * C.c / self.cavity_wavelength


def _positive(*values):
    if not all(v > 0 for v in values):
        raise ValueError("inputs must be strictly positive")


def particle_momentum(m: float, q: float, V: float) -> float:
    """p = sqrt(2 m q V) after acceleration through V."""
    _positive(m, q, V)
    return math.sqrt(2 * m * q * V)


def de_broglie_wavelength(m: float, q: float, V: float) -> float:
    return C.h / particle_momentum(m, q, V)


def zero_point_extent(M: float, omega_m: float) -> float:
    """sqrt(hbar / (M omega_m))."""
    _positive(M, omega_m)
    return math.sqrt(C.hbar / (M * omega_m))


def momentum_kick(params: LabParams) -> float:
    """Dimensionless kick G = p / sqrt(hbar M omega_m)."""
    p = particle_momentum(params.particle_mass, params.particle_charge, params.accel_voltage)
    return p / math.sqrt(C.hbar * params.mirror_mass * params.mech_freq)


def coupling_gamma(params: LabParams) -> float:
    """gamma = sqrt2 pi x_zpt / lambda_dB."""
    lam = de_broglie_wavelength(params.particle_mass, params.particle_charge, params.accel_voltage)
    return math.sqrt(2) * math.pi * zero_point_extent(params.mirror_mass, params.mech_freq) / lam


def coupling_gamma_from_kick(params: LabParams) -> float:
    """Same quantity as G / sqrt2."""
    return momentum_kick(params) / math.sqrt(2)


def frequency_shift(params: LabParams) -> float:
    """Maximum cavity frequency modulation 2 pi omega_c x_zpt^2 / (L_c lambda_dB), rad/s."""
    x = zero_point_extent(params.mirror_mass, params.mech_freq)
    lam = de_broglie_wavelength(params.particle_mass, params.particle_charge, params.accel_voltage)
    return 2 * math.pi * params.cavity_frequency * x * x / (params.cavity_length * lam)


def frequency_shift_from_momentum(params: LabParams) -> float:
    """omega_c p / (L_c omega_m M); algebraically equal to ``frequency_shift``."""
    p = particle_momentum(params.particle_mass, params.particle_charge, params.accel_voltage)
    return params.cavity_frequency * p / (params.cavity_length * params.mech_freq * params.mirror_mass)


def cavity_linewidth(params: LabParams, convention: str = "half") -> float:
    """Cavity decay rate in rad/s.

    ``"half"`` gives pi c / (2 L_c F); ``"full"`` gives FSR / F = pi c / (L_c F).
    """
    full = math.pi * C.c / (params.cavity_length * params.finesse)
    if convention == "full":
        return full
    if convention == "half":
        return full / 2
    raise ValueError(f"unknown convention {convention!r}")


def report(params: LabParams | None = None) -> list[tuple[str, float, str]]:
    """(quantity, value, unit) rows; angular rates are also given divided by 2 pi."""
    params = params or LabParams()
    lam = de_broglie_wavelength(params.particle_mass, params.particle_charge, params.accel_voltage)
    dw = frequency_shift(params)
    kappa = cavity_linewidth(params)
    return [
        ("x_zpt", zero_point_extent(params.mirror_mass, params.mech_freq), "m"),
        ("lambda_dB", lam, "m"),
        ("gamma", coupling_gamma(params), "1"),
        ("G", momentum_kick(params), "1"),
        ("delta_omega", dw, "rad/s"),
        ("delta_omega_over_2pi", dw / (2 * math.pi), "Hz"),
        ("kappa_c", kappa, "rad/s"),
        ("kappa_c_over_2pi", kappa / (2 * math.pi), "Hz"),
    ]
