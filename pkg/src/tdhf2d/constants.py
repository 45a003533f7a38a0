"""Physical constants and unit conversions.

Internal calculations use Hartree atomic units throughout:
``hbar = m0 = e = 4*pi*eps0 = 1``.  Laboratory units (nm, fs, eV, V/m)
appear only at configuration boundaries; conversions are single
multiplications by the exact factors below, so every round trip
``to_au -> from_au`` is an exact floating-point identity up to one
rounding of the product.
"""

from __future__ import annotations

from dataclasses import dataclass

# CODATA 2018 values.
BOHR_RADIUS_NM = 0.052917721090380
HARTREE_EV = 27.211386245988
ATOMIC_TIME_FS = 0.024188843265857
SPEED_OF_LIGHT_AU = 137.035999084
ATOMIC_FIELD_V_PER_M = 5.14220674763e11

# hc in eV*nm, for photon-energy <-> wavelength conversions.
HC_EV_NM = 1239.8419843320026


@dataclass(frozen=True)
class PhysicalConstants:
    """Atomic-unit values of the constants the simulation relies on.

    All entries are 1.0 by construction except the speed of light; they are
    spelled out so that formulas can reference them by name instead of
    baking silent unit assumptions into the arithmetic.
    """

    hbar: float = 1.0
    electron_mass: float = 1.0
    elementary_charge: float = 1.0
    coulomb_constant: float = 1.0  # e^2 / (4 pi eps0) in Hartree * Bohr
    speed_of_light: float = SPEED_OF_LIGHT_AU

    @property
    def two_pi_eps0(self) -> float:
        # 4*pi*eps0 = 1  =>  2*pi*eps0 = 1/2
        return 0.5


CONSTANTS = PhysicalConstants()


def nm_to_au(value_nm: float) -> float:
    return value_nm / BOHR_RADIUS_NM


def au_to_nm(value_au: float) -> float:
    return value_au * BOHR_RADIUS_NM


def ev_to_au(value_ev: float) -> float:
    return value_ev / HARTREE_EV


def au_to_ev(value_au: float) -> float:
    return value_au * HARTREE_EV


def fs_to_au(value_fs: float) -> float:
    return value_fs / ATOMIC_TIME_FS


def au_to_fs(value_au: float) -> float:
    return value_au * ATOMIC_TIME_FS


def field_v_per_m_to_au(value: float) -> float:
    return value / ATOMIC_FIELD_V_PER_M


def field_au_to_v_per_m(value: float) -> float:
    return value * ATOMIC_FIELD_V_PER_M


def wavelength_nm_to_omega_au(wavelength_nm: float) -> float:
    """Angular frequency (a.u.) of a photon with the given vacuum wavelength."""
    return ev_to_au(HC_EV_NM / wavelength_nm)


def kinetic_energy_to_wavenumber(energy_au: float) -> float:
    """Carrier wavenumber k = sqrt(2 m E) / hbar for a free electron."""
    if energy_au < 0.0:
        raise ValueError(f"kinetic energy must be non-negative, got {energy_au}")
    return (2.0 * energy_au) ** 0.5
