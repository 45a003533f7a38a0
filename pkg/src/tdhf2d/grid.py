"""Uniform periodic 2D grid, spectral derivatives, and carrier/envelope wavepackets.

A wavepacket is stored as a slowly varying complex envelope ``psi_t`` plus a
carrier plane wave ``exp(i k_c . r)``; the full orbital is
``psi(r) = psi_t(r) * exp(i k_c . r - i omega_c t)`` with
``omega_c = |k_c|^2 / 2`` (atomic units).  Arrays are shaped ``(ny, nx)``,
C-order, so x is the fastest-varying index; ``X[iy, ix] == x[ix]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .constants import kinetic_energy_to_wavenumber

_TWO_SQRT_2LN2 = 2.0 * np.sqrt(2.0 * np.log(2.0))


def sigma_from_fwhm(fwhm: float) -> float:
    """Standard deviation of a Gaussian intensity profile with the given FWHM."""
    return fwhm / _TWO_SQRT_2LN2


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic rectangular grid (atomic units).

    Parameters
    ----------
    nx, ny : int
        Number of samples along x and y.  Must be even and at least 8.
    dx, dy : float
        Grid spacings.
    x0, y0 : float
        Coordinates of the sample with index (iy=0, ix=0).
    """

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self) -> None:
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if n < 8 or n % 2 != 0:
                raise ValueError(f"{name} must be an even integer >= 8, got {n}")
        if not (self.dx > 0.0 and self.dy > 0.0):
            raise ValueError(f"grid spacings must be positive, got dx={self.dx}, dy={self.dy}")

    @property
    def lx(self) -> float:
        return self.nx * self.dx

    @property
    def ly(self) -> float:
        return self.ny * self.dy

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def x(self) -> np.ndarray:
        return _axes(self)[0]

    @property
    def y(self) -> np.ndarray:
        return _axes(self)[1]

    @property
    def kx(self) -> np.ndarray:
        """Envelope momenta along x in FFT order."""
        return _axes(self)[2]

    @property
    def ky(self) -> np.ndarray:
        return _axes(self)[3]

    @property
    def xy_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return _meshes(self)[0:2]

    @property
    def k_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return _meshes(self)[2:4]

    @property
    def k_squared_mesh(self) -> np.ndarray:
        return _meshes(self)[4]

    @property
    def k_max(self) -> float:
        """Largest resolvable wavenumber magnitude, sqrt((pi/dx)^2 + (pi/dy)^2)."""
        return float(np.hypot(np.pi / self.dx, np.pi / self.dy))


@lru_cache(maxsize=32)
def _axes(grid: GridSpec) -> tuple[np.ndarray, ...]:
    x = grid.x0 + grid.dx * np.arange(grid.nx)
    y = grid.y0 + grid.dy * np.arange(grid.ny)
    kx = 2.0 * np.pi * np.fft.fftfreq(grid.nx, d=grid.dx)
    ky = 2.0 * np.pi * np.fft.fftfreq(grid.ny, d=grid.dy)
    for a in (x, y, kx, ky):
        a.setflags(write=False)
    return x, y, kx, ky


@lru_cache(maxsize=32)
def _meshes(grid: GridSpec) -> tuple[np.ndarray, ...]:
    x, y, kx, ky = _axes(grid)
    X, Y = np.meshgrid(x, y)
    KX, KY = np.meshgrid(kx, ky)
    K2 = KX * KX + KY * KY
    for a in (X, Y, KX, KY, K2):
        a.setflags(write=False)
    return X, Y, KX, KY, K2


@dataclass
class Wavepacket:
    """Carrier/envelope representation of one orbital on a grid.

    Attributes
    ----------
    grid : GridSpec
    envelope : complex ndarray, shape (ny, nx)
    carrier : ndarray, shape (2,)
        Carrier wavevector (kx, ky) in atomic units.
    spin : int
        +1 or -1 spin label; interactions compare labels only.
    """

    grid: GridSpec
    envelope: np.ndarray
    carrier: np.ndarray
    spin: int = 1

    def __post_init__(self) -> None:
        self.envelope = np.asarray(self.envelope, dtype=np.complex128)
        if self.envelope.shape != (self.grid.ny, self.grid.nx):
            raise ValueError(
                f"envelope shape {self.envelope.shape} does not match grid "
                f"({self.grid.ny}, {self.grid.nx})"
            )
        self.carrier = np.asarray(self.carrier, dtype=np.float64).reshape(2)
        if self.spin not in (-1, 1):
            raise ValueError(f"spin must be +1 or -1, got {self.spin}")

    @property
    def carrier_energy(self) -> float:
        """Kinetic energy |k_c|^2 / 2 of the carrier plane wave."""
        return 0.5 * float(self.carrier @ self.carrier)

    @property
    def carrier_speed(self) -> float:
        return float(np.hypot(*self.carrier))

    def with_envelope(self, envelope: np.ndarray) -> "Wavepacket":
        return replace(self, envelope=envelope)


@dataclass(frozen=True)
class MomentumDistribution:
    """Full-momentum amplitudes of a wavepacket (carrier shift applied).

    ``amplitude[iy, ix]`` is the continuum-normalized transform
    ``(1/2pi) integral psi(r) exp(-i k . r) d2r`` sampled at
    ``k = (kx[ix], ky[iy])`` with both axes strictly increasing;
    ``sum |amplitude|^2 * dkx * dky`` equals the real-space norm squared.
    """

    kx: np.ndarray
    ky: np.ndarray
    amplitude: np.ndarray
    dkx: float
    dky: float

    @property
    def weights(self) -> np.ndarray:
        """Probability mass per momentum cell, |amplitude|^2 dkx dky."""
        return (self.amplitude.real**2 + self.amplitude.imag**2) * (self.dkx * self.dky)


def gaussian_wavepacket(
    grid: GridSpec,
    center: tuple[float, float],
    fwhm_long: float,
    fwhm_trans: float,
    kinetic_energy: float,
    direction: tuple[float, float] = (1.0, 0.0),
    spin: int = 1,
) -> Wavepacket:
    """Normalized Gaussian envelope with a free-electron carrier.

    ``fwhm_long``/``fwhm_trans`` are full widths at half maximum of the
    *density* |psi|^2 along/perpendicular to ``direction``.  The carrier is
    ``sqrt(2 * kinetic_energy)`` along ``direction``; normalization is the
    discrete one, ``sum |psi|^2 dA = 1``.
    """
    d = np.asarray(direction, dtype=np.float64)
    d_norm = np.hypot(*d)
    if d_norm == 0.0:
        raise ValueError("direction must be a nonzero vector")
    d = d / d_norm
    sigma_l = sigma_from_fwhm(fwhm_long)
    sigma_t = sigma_from_fwhm(fwhm_trans)
    if sigma_l <= 0.0 or sigma_t <= 0.0:
        raise ValueError("FWHM values must be positive")

    X, Y = grid.xy_mesh
    u = d[0] * (X - center[0]) + d[1] * (Y - center[1])
    w = -d[1] * (X - center[0]) + d[0] * (Y - center[1])
    envelope = np.exp(-(u**2) / (4.0 * sigma_l**2) - (w**2) / (4.0 * sigma_t**2))
    envelope = envelope.astype(np.complex128)
    envelope /= np.sqrt(np.sum(np.abs(envelope) ** 2) * grid.cell_area)

    k_c = kinetic_energy_to_wavenumber(kinetic_energy) * d
    return Wavepacket(grid=grid, envelope=envelope, carrier=k_c, spin=spin)


def spectral_gradient(grid: GridSpec, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) of a periodic field via the Fourier multiplier i*k."""
    KX, KY = grid.k_mesh
    spectrum = np.fft.fft2(values)
    gx = np.fft.ifft2(1j * KX * spectrum)
    gy = np.fft.ifft2(1j * KY * spectrum)
    return gx, gy


def spectral_laplacian(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """Laplacian of a periodic field via the Fourier multiplier -k^2."""
    return np.fft.ifft2(-grid.k_squared_mesh * np.fft.fft2(values))


def carrier_phase(grid: GridSpec, delta_k: np.ndarray) -> np.ndarray:
    """Plane-wave factor exp(i delta_k . r) on the grid."""
    X, Y = grid.xy_mesh
    return np.exp(1j * (delta_k[0] * X + delta_k[1] * Y))


def inner_product(a: Wavepacket, b: Wavepacket, include_carrier: bool = True) -> complex:
    """<a|b> on the grid.

    With ``include_carrier`` (default) the integral is over the full
    orbitals and picks up the carrier mismatch factor exp(i(k_b - k_a).r);
    without it, only the envelopes overlap.
    """
    if a.grid != b.grid:
        raise ValueError("wavepackets live on different grids")
    integrand = np.conj(a.envelope) * b.envelope
    if include_carrier:
        dk = b.carrier - a.carrier
        if dk[0] != 0.0 or dk[1] != 0.0:
            integrand = integrand * carrier_phase(a.grid, dk)
    return complex(np.sum(integrand) * a.grid.cell_area)


def norm(w: Wavepacket) -> float:
    return float(np.sqrt(np.sum(np.abs(w.envelope) ** 2) * w.grid.cell_area))


def normalized(w: Wavepacket) -> Wavepacket:
    n = norm(w)
    if n == 0.0:
        raise ValueError("cannot normalize a zero wavepacket")
    return w.with_envelope(w.envelope / n)


def gram_schmidt(a: Wavepacket, b: Wavepacket) -> tuple[Wavepacket, Wavepacket]:
    """Orthogonalize b against a: |b'> = (|b> - <a|b>|a>) / sqrt(1 - |<a|b>|^2).

    The projection uses the full-orbital inner product, so with unequal
    carriers the subtracted component carries the compensating phase
    exp(i(k_a - k_b).r) in b's envelope frame.  Inputs must be normalized.
    """
    s = inner_product(a, b)
    overlap_sq = abs(s) ** 2
    if overlap_sq >= 1.0 - 1e-12:
        raise ValueError(f"orbitals are (nearly) linearly dependent: |<a|b>| = {abs(s):.6f}")
    projected = a.envelope * carrier_phase(a.grid, a.carrier - b.carrier)
    new_env = (b.envelope - s * projected) / np.sqrt(1.0 - overlap_sq)
    return a, b.with_envelope(new_env)


def to_momentum_space(w: Wavepacket) -> MomentumDistribution:
    """Continuum-normalized momentum amplitudes on the carrier-shifted grid.

    Applies the absolute-position phase exp(-i k_env . r0) so amplitudes are
    faithful to the grid's coordinate origin, shifts envelope momenta by the
    carrier, and returns monotone momentum axes (fftshift order).
    """
    g = w.grid
    spectrum = np.fft.fft2(w.envelope) * (g.cell_area / (2.0 * np.pi))
    kx_env = g.kx
    ky_env = g.ky
    phase = np.exp(-1j * (np.add.outer(ky_env * g.y0, kx_env * g.x0)))
    spectrum = spectrum * phase
    amplitude = np.fft.fftshift(spectrum)
    kx_full = np.fft.fftshift(kx_env) + w.carrier[0]
    ky_full = np.fft.fftshift(ky_env) + w.carrier[1]
    return MomentumDistribution(
        kx=kx_full,
        ky=ky_full,
        amplitude=amplitude,
        dkx=2.0 * np.pi / g.lx,
        dky=2.0 * np.pi / g.ly,
    )


def mean_kinetic_energy(w: Wavepacket) -> float:
    """<p^2/2m> over the full orbital, evaluated spectrally (exact on the grid)."""
    dist = to_momentum_space(w)
    KX, KY = np.meshgrid(dist.kx, dist.ky)
    return float(np.sum(0.5 * (KX**2 + KY**2) * dist.weights))


def mean_momentum(w: Wavepacket) -> np.ndarray:
    """<p> over the full orbital (carrier included)."""
    dist = to_momentum_space(w)
    KX, KY = np.meshgrid(dist.kx, dist.ky)
    weights = dist.weights
    return np.array([float(np.sum(KX * weights)), float(np.sum(KY * weights))])
