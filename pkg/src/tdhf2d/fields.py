"""Electromagnetic drive for the simulation.

Four sources live here:

* a spatially uniform laser pulse, defined vector-potential-first so the
  pulse has exactly zero area and its electric field peaks exactly at the
  configured amplitude;
* the driven-dipole near-field of a metallic cylinder (Drude permittivity,
  quasistatic dipole response), synthesized in the frequency domain so the
  dipole moment at any query time is exact to quadrature precision;
* externally computed field series loaded from a run container and
  interpolated linearly in time;
* two derived quantities — the phase-matched coupling strength of a moving
  electron to the near field, and the phase a free electron accumulates in
  the uniform vector potential.

Everything is in Hartree atomic units; lab-unit constructors are provided
on the data types.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special

from .constants import (
    CONSTANTS,
    ev_to_au,
    field_v_per_m_to_au,
    fs_to_au,
    nm_to_au,
)
from .container import Container, ContainerError, ContainerWriter
from .grid import GridSpec

# Field-envelope standard deviation from an intensity FWHM: intensity goes
# as the squared envelope, so exp(-t^2/sigma^2) must hit 1/2 at FWHM/2.
_TWO_SQRT_LN2 = 2.0 * np.sqrt(np.log(2.0))


@dataclass(frozen=True)
class LaserPulse:
    """Uniform Gaussian-envelope laser pulse (atomic units).

    ``fwhm_duration`` is the full width at half maximum of the *intensity*
    envelope.  The pulse is defined through its vector potential,
    ``A(t) = -(E0/omega) f(t) sin(omega (t - t_center)) * polarization``
    with ``f`` the Gaussian field envelope, so ``A(+-inf) = 0`` exactly and
    the electric field peaks at exactly ``peak_field`` at ``t_center``.
    """

    wavelength: float
    fwhm_duration: float
    peak_field: float
    polarization: tuple[float, float] = (1.0, 0.0)
    t_center: float = 0.0

    def __post_init__(self) -> None:
        if not (self.wavelength > 0.0 and self.fwhm_duration > 0.0):
            raise ValueError("wavelength and fwhm_duration must be positive")
        if self.peak_field < 0.0:
            raise ValueError("peak_field must be non-negative")
        p = np.asarray(self.polarization, dtype=np.float64).reshape(2)
        scale = float(np.hypot(*p))
        if scale == 0.0:
            raise ValueError("polarization must be a nonzero vector")
        object.__setattr__(self, "polarization", (float(p[0] / scale), float(p[1] / scale)))

    @classmethod
    def from_lab(
        cls,
        wavelength_nm: float = 800.0,
        fwhm_fs: float = 30.0,
        peak_field_v_per_m: float = 5e9,
        polarization: tuple[float, float] = (1.0, 0.0),
        t_center_fs: float = 0.0,
    ) -> "LaserPulse":
        return cls(
            wavelength=nm_to_au(wavelength_nm),
            fwhm_duration=fs_to_au(fwhm_fs),
            peak_field=field_v_per_m_to_au(peak_field_v_per_m),
            polarization=polarization,
            t_center=fs_to_au(t_center_fs),
        )

    @property
    def omega(self) -> float:
        """Carrier angular frequency, 2 pi c / wavelength."""
        return 2.0 * np.pi * CONSTANTS.speed_of_light / self.wavelength

    @property
    def photon_wavenumber(self) -> float:
        return self.omega / CONSTANTS.speed_of_light

    @property
    def envelope_sigma(self) -> float:
        """Standard deviation of the field envelope."""
        return self.fwhm_duration / _TWO_SQRT_LN2

    def envelope(self, t):
        tau = np.asarray(t, dtype=np.float64) - self.t_center
        return np.exp(-0.5 * (tau / self.envelope_sigma) ** 2)


def incident_vector_potential(pulse: LaserPulse, t) -> np.ndarray:
    """A(t) of the incident pulse; shape ``(2,) + shape(t)``."""
    tau = np.asarray(t, dtype=np.float64) - pulse.t_center
    amplitude = -(pulse.peak_field / pulse.omega) * pulse.envelope(t) * np.sin(pulse.omega * tau)
    px, py = pulse.polarization
    return np.stack([amplitude * px, amplitude * py])


def incident_electric_field(pulse: LaserPulse, t) -> np.ndarray:
    """E(t) = -dA/dt of the incident pulse, evaluated analytically."""
    tau = np.asarray(t, dtype=np.float64) - pulse.t_center
    sigma = pulse.envelope_sigma
    omega = pulse.omega
    carrier = np.cos(omega * tau) - tau / (sigma * sigma * omega) * np.sin(omega * tau)
    amplitude = pulse.peak_field * pulse.envelope(t) * carrier
    px, py = pulse.polarization
    return np.stack([amplitude * px, amplitude * py])


def _envelope_carrier_integral(sigma: float, omega: float, u: float) -> float:
    """int_{-inf}^{u} exp(-s^2/(2 sigma^2)) sin(omega s) ds, evaluated stably.

    Uses the scaled complementary error function (Faddeeva w) so the result
    stays accurate even when ``sigma * omega`` is large enough that the
    naive complex-erf closed form overflows.
    """
    if u > 0.0:
        # the integrand is odd, so the cumulative integral is an even function
        return _envelope_carrier_integral(sigma, omega, -u)
    zeta = -sigma * omega / np.sqrt(2.0) - 1j * u / (sigma * np.sqrt(2.0))
    h = (
        sigma
        * np.sqrt(np.pi / 2.0)
        * np.exp(-0.5 * (u / sigma) ** 2)
        * np.exp(1j * omega * u)
        * special.wofz(zeta)
    )
    return float(h.imag)


def volkov_phase(pulse: LaserPulse, k, t0: float, t1: float) -> float:
    """Phase ``int_{t0}^{t1} k . A(tau) dtau`` accumulated by a free electron.

    Implemented as the difference of an anchored antiderivative, so the
    phase is additive over adjacent intervals by construction.
    """
    if t1 < t0:
        raise ValueError(f"t1 must be >= t0, got t0={t0}, t1={t1}")
    k = np.asarray(k, dtype=np.float64).reshape(2)
    projection = k[0] * pulse.polarization[0] + k[1] * pulse.polarization[1]
    if projection == 0.0 or t1 == t0:
        return 0.0
    sigma, omega, tc = pulse.envelope_sigma, pulse.omega, pulse.t_center
    prefactor = -(pulse.peak_field / omega) * projection
    g1 = _envelope_carrier_integral(sigma, omega, t1 - tc)
    g0 = _envelope_carrier_integral(sigma, omega, t0 - tc)
    return prefactor * (g1 - g0)


@dataclass(frozen=True)
class DrudeMetal:
    """Drude permittivity parameters (atomic units)."""

    eps_inf: float = 9.0
    omega_p: float = ev_to_au(9.0)
    gamma: float = ev_to_au(0.07)

    def __post_init__(self) -> None:
        if self.omega_p <= 0.0:
            raise ValueError("omega_p must be positive")
        if self.gamma < 0.0:
            raise ValueError("gamma must be non-negative")
        if self.eps_inf < 1.0:
            raise ValueError("eps_inf must be at least 1")

    @classmethod
    def from_lab(cls, eps_inf: float = 9.0, omega_p_ev: float = 9.0, gamma_ev: float = 0.07) -> "DrudeMetal":
        return cls(eps_inf=eps_inf, omega_p=ev_to_au(omega_p_ev), gamma=ev_to_au(gamma_ev))


@dataclass(frozen=True)
class NanorodGeometry:
    """Cylindrical rod cross-section: radius and center (atomic units)."""

    radius: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        c = np.asarray(self.center, dtype=np.float64).reshape(2)
        object.__setattr__(self, "center", (float(c[0]), float(c[1])))

    @classmethod
    def from_lab(cls, radius_nm: float = 15.0, center_nm: tuple[float, float] = (0.0, 0.0)) -> "NanorodGeometry":
        return cls(radius=nm_to_au(radius_nm), center=(nm_to_au(center_nm[0]), nm_to_au(center_nm[1])))


def drude_permittivity(metal: DrudeMetal, omega):
    """Complex permittivity eps_inf - omega_p^2 / (omega^2 + i gamma omega).

    ``omega = 0`` is not representable (the metallic response diverges);
    use :func:`surface_response`, whose zero-frequency limit is finite.
    """
    w = np.asarray(omega, dtype=np.complex128)
    if np.any(w == 0.0):
        raise ValueError("permittivity diverges at omega = 0; query surface_response instead")
    return metal.eps_inf - metal.omega_p**2 / (w * w + 1j * metal.gamma * w)


def surface_response(metal: DrudeMetal, omega):
    """(eps - 1)/(eps + 1) with the finite omega -> 0 (perfect-conductor) limit 1."""
    w = np.asarray(omega, dtype=np.float64)
    out = np.ones_like(w, dtype=np.complex128)
    nonzero = w != 0.0
    if np.any(nonzero):
        eps = drude_permittivity(metal, w[nonzero])
        out[nonzero] = (eps - 1.0) / (eps + 1.0)
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return complex(out.reshape(())[()])
    return out


def polarizability(metal: DrudeMetal, geometry: NanorodGeometry, omega):
    """Line-dipole polarizability per unit length, 2 pi eps0 R^2 (eps-1)/(eps+1)."""
    return CONSTANTS.two_pi_eps0 * geometry.radius**2 * surface_response(metal, omega)


def resonance_frequency(metal: DrudeMetal) -> float:
    """Frequency where Re(eps) = -1, the surface-dipole resonance of a cylinder."""
    value = metal.omega_p**2 / (metal.eps_inf + 1.0) - metal.gamma**2
    if value <= 0.0:
        raise ValueError("no dipole resonance: gamma exceeds the resonant frequency scale")
    return float(np.sqrt(value))


def dipole_potential(grid: GridSpec, geometry: NanorodGeometry, moment) -> np.ndarray:
    """Quasistatic potential of a line dipole at the rod center.

    ``phi = p . r_hat / (2 pi eps0 r)`` outside the rod; inside, the value
    is clamped to the boundary value along the same direction (continuous
    at the surface, zero at the exact center).
    """
    p = np.asarray(moment, dtype=np.float64).reshape(2)
    X, Y = grid.xy_mesh
    dx_ = X - geometry.center[0]
    dy_ = Y - geometry.center[1]
    rho = np.hypot(dx_, dy_)
    projection = p[0] * dx_ + p[1] * dy_
    # 1/(2 pi eps0) = 2 in Hartree atomic units
    with np.errstate(divide="ignore", invalid="ignore"):
        outside = 2.0 * projection / (rho * rho)
        clamped = 2.0 * projection / (rho * geometry.radius)
    result = np.where(rho >= geometry.radius, outside, clamped)
    return np.where(rho == 0.0, 0.0, result)


@dataclass(frozen=True)
class FieldSample:
    """A(r), phi(r) at one time; arrays are (ny, nx) float64."""

    ax: np.ndarray
    ay: np.ndarray
    phi: np.ndarray
    time: float


class FieldProvider(ABC):
    """Deterministic source of field samples over a validity window."""

    grid: GridSpec | None = None

    @property
    @abstractmethod
    def validity(self) -> tuple[float, float]: ...

    @abstractmethod
    def sample(self, t: float, grid: GridSpec | None = None) -> FieldSample: ...

    def _resolve_grid(self, grid: GridSpec | None) -> GridSpec:
        resolved = grid if grid is not None else self.grid
        if resolved is None:
            raise ValueError("this provider needs an explicit grid to sample on")
        return resolved

    def _check_time(self, t: float) -> None:
        lo, hi = self.validity
        if not (lo <= t <= hi):
            raise ValueError(f"time {t} outside provider validity window [{lo}, {hi}]")


class AnalyticPlasmon(FieldProvider):
    """Uniform incident pulse plus the driven-dipole near-field of the rod.

    The dipole moment is synthesized in the frequency domain:
    ``p(t) = (1/pi) Re int alpha(w) Ehat(w) exp(-i w t) dw`` over the
    pulse band, evaluated by fixed Gauss-Legendre quadrature whose nodes
    and response weights are precomputed once.  ``Ehat`` is the analytic
    spectrum of the incident field, so every query is exact to quadrature
    precision (~1e-13 relative) — no stored time grid, no interpolation.
    Beyond 12 envelope sigmas from the pulse center the moment is below
    double precision and is returned as exactly zero.
    """

    def __init__(
        self,
        pulse: LaserPulse,
        metal: DrudeMetal,
        geometry: NanorodGeometry,
        grid: GridSpec | None = None,
        quadrature_nodes: int = 1024,
    ) -> None:
        self.pulse = pulse
        self.metal = metal
        self.geometry = geometry
        self.grid = grid
        sigma, omega0 = pulse.envelope_sigma, pulse.omega
        half_band = 14.0 / sigma
        lo, hi = max(0.0, omega0 - half_band), omega0 + half_band
        nodes, weights = np.polynomial.legendre.leggauss(quadrature_nodes)
        w = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        scale = 0.5 * (hi - lo) * weights
        e_hat = (
            -(pulse.peak_field / (2.0 * omega0))
            * np.sqrt(2.0 * np.pi)
            * sigma
            * w
            * np.exp(1j * w * pulse.t_center)
            * (
                np.exp(-0.5 * (sigma * (w + omega0)) ** 2)
                - np.exp(-0.5 * (sigma * (w - omega0)) ** 2)
            )
        )
        self._band_omega = w
        self._band_coeff = scale * polarizability(metal, geometry, w) * e_hat / np.pi

    @property
    def validity(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def dipole_moment(self, t: float) -> float:
        """Dipole amplitude along the pulse polarization at time t."""
        if abs(t - self.pulse.t_center) > 12.0 * self.pulse.envelope_sigma:
            return 0.0
        return float(np.real(np.sum(self._band_coeff * np.exp(-1j * self._band_omega * t))))

    def scalar_potential(self, grid: GridSpec, t: float) -> np.ndarray:
        p = self.dipole_moment(t)
        px, py = self.pulse.polarization
        return dipole_potential(grid, self.geometry, (p * px, p * py))

    def sample(self, t: float, grid: GridSpec | None = None) -> FieldSample:
        grid = self._resolve_grid(grid)
        a = incident_vector_potential(self.pulse, t)
        shape = (grid.ny, grid.nx)
        return FieldSample(
            ax=np.full(shape, float(a[0])),
            ay=np.full(shape, float(a[1])),
            phi=self.scalar_potential(grid, t),
            time=float(t),
        )


def plasmon_scalar_potential(
    pulse: LaserPulse, metal: DrudeMetal, geometry: NanorodGeometry, grid: GridSpec, t: float
) -> np.ndarray:
    """One-shot near-field potential; builds a provider and samples it."""
    return AnalyticPlasmon(pulse, metal, geometry).scalar_potential(grid, t)


class IncidentLaser(FieldProvider):
    """Bare laser drive: spatially uniform vector potential, no scalar potential."""

    def __init__(self, pulse: LaserPulse, grid: GridSpec | None = None) -> None:
        self.pulse = pulse
        self.grid = grid

    @property
    def validity(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def sample(self, t: float, grid: GridSpec | None = None) -> FieldSample:
        grid = self._resolve_grid(grid)
        a = incident_vector_potential(self.pulse, t)
        shape = (grid.ny, grid.nx)
        return FieldSample(
            ax=np.full(shape, float(a[0])),
            ay=np.full(shape, float(a[1])),
            phi=np.zeros(shape),
            time=float(t),
        )


_SERIES_KEYS = ("A_x", "A_y", "phi")


class FileSeries(FieldProvider):
    """Field series from a run container, linear-in-time interpolation.

    Exact (bit-identical) at stored sample times; between samples, the two
    neighbors are combined linearly.  A one-sample series is constant in
    time with an unbounded validity window.  Decoded frames are cached
    under a lock, so sampling stays deterministic and thread-safe.
    """

    def __init__(self, container: Container) -> None:
        grid = container.grid
        if grid is None:
            raise ContainerError("field series container lacks grid metadata")
        self.grid = grid
        self._container = container
        snapshots = container.snapshots
        if not snapshots:
            raise ContainerError("field series container holds no snapshots")
        for snap in snapshots:
            missing = [key for key in _SERIES_KEYS if key not in snap["datasets"]]
            if missing:
                raise ContainerError(
                    f"field series snapshot at t={snap['time']} lacks datasets {missing}"
                )
        self._times = np.array([snap["time"] for snap in snapshots], dtype=np.float64)
        self._names = [snap["datasets"] for snap in snapshots]
        self._cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._lock = threading.Lock()

    @property
    def times(self) -> np.ndarray:
        return self._times.copy()

    @property
    def validity(self) -> tuple[float, float]:
        if len(self._times) == 1:
            return (-np.inf, np.inf)
        return (float(self._times[0]), float(self._times[-1]))

    def _frame(self, index: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with self._lock:
            if index not in self._cache:
                names = self._names[index]
                self._cache[index] = tuple(
                    self._container.read(names[key]) for key in _SERIES_KEYS
                )
            return self._cache[index]

    def sample(self, t: float, grid: GridSpec | None = None) -> FieldSample:
        if grid is not None and grid != self.grid:
            raise ValueError(
                f"grid mismatch: series stored on {self.grid}, sampling requested on {grid}"
            )
        self._check_time(t)
        times = self._times
        if len(times) == 1:
            ax, ay, phi = self._frame(0)
            return FieldSample(ax=ax.copy(), ay=ay.copy(), phi=phi.copy(), time=float(t))
        right = int(np.searchsorted(times, t, side="left"))
        if right < len(times) and times[right] == t:
            ax, ay, phi = self._frame(right)
            return FieldSample(ax=ax.copy(), ay=ay.copy(), phi=phi.copy(), time=float(t))
        right = max(1, min(right, len(times) - 1))
        left = right - 1
        weight = (t - times[left]) / (times[right] - times[left])
        frames = [self._frame(left), self._frame(right)]
        blended = [
            (1.0 - weight) * lo + weight * hi for lo, hi in zip(frames[0], frames[1])
        ]
        return FieldSample(ax=blended[0], ay=blended[1], phi=blended[2], time=float(t))


def load_field_series(path: str | Path) -> FileSeries:
    """Open a stored field series as a provider (see FileSeries for semantics)."""
    return FileSeries(Container.open(path))


def write_field_series(
    path: str | Path,
    grid: GridSpec,
    times: Sequence[float],
    samples: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
    code_version: str = "",
) -> Path:
    """Store (A_x, A_y, phi) arrays per time into a run container directory."""
    if len(times) != len(samples):
        raise ValueError("times and samples must have equal length")
    writer = ContainerWriter(path, grid=grid, code_version=code_version)
    shape = (grid.ny, grid.nx)
    for t, (ax, ay, phi) in zip(times, samples):
        arrays = {}
        for key, values in zip(_SERIES_KEYS, (ax, ay, phi)):
            arr = np.asarray(values, dtype=np.float64)
            if arr.ndim == 0:
                arr = np.full(shape, float(arr))
            if arr.shape != shape:
                raise ValueError(f"{key} at t={t}: shape {arr.shape} does not match grid {shape}")
            arrays[key] = arr
        writer.add_snapshot(t, arrays)
    return writer.finalize()


def uniform_vector_potential(sample: FieldSample, rtol: float = 1e-10) -> np.ndarray:
    """Collapse a spatially uniform A sample to a 2-vector; error if it varies."""
    result = np.empty(2)
    for index, values in enumerate((sample.ax, sample.ay)):
        lo, hi = float(np.min(values)), float(np.max(values))
        scale = max(abs(lo), abs(hi), 1e-300)
        if hi - lo > rtol * scale:
            raise ValueError("vector potential varies in space; cannot reduce to a 2-vector")
        result[index] = 0.5 * (lo + hi)
    return result


def _fourth_order_ddx(values: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order centered x-derivative with periodic wrap (axis 1)."""
    return (
        -np.roll(values, -2, axis=1)
        + 8.0 * np.roll(values, -1, axis=1)
        - 8.0 * np.roll(values, 1, axis=1)
        + np.roll(values, 2, axis=1)
    ) / (12.0 * dx)


def _time_nodes(provider: FieldProvider, window, num_samples: int) -> np.ndarray:
    if isinstance(provider, FileSeries) and window is None:
        times = provider.times
        if len(times) < 2:
            raise ValueError("a one-sample series needs an explicit integration window")
        return times
    if window is None:
        if isinstance(provider, AnalyticPlasmon):
            tc = provider.pulse.t_center
            half = 12.0 * provider.pulse.envelope_sigma
            window = (tc - half, tc + half)
        else:
            lo, hi = provider.validity
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError("provider validity is unbounded; pass an explicit window")
            window = (lo, hi)
    return np.linspace(window[0], window[1], num_samples)


def g_factor(
    provider: FieldProvider,
    v: float,
    omega_ph: float,
    *,
    grid: GridSpec | None = None,
    y_offset: float = 0.0,
    window: tuple[float, float] | None = None,
    num_samples: int = 4096,
) -> complex:
    """Phase-matched coupling strength of an electron moving along x.

    Forms the time spectrum ``Etilde_x(r; omega_ph)`` of the x electric
    field over the integration window (trapezoid in time; the vector-
    potential part enters by parts, so no numerical time derivative is
    taken), transforms it spatially, evaluates the transform at
    ``k_x = omega_ph / v`` (linear interpolation between momentum bins,
    exact when k_x is a bin), and sums over ``k_y`` with an optional
    transverse offset ``y_offset`` selecting the line the electron travels
    along.  Returns ``(1 / 2 omega_ph) * int dk_y Etilde_x(k_x, k_y)``.
    """
    if v <= 0.0:
        raise ValueError("speed v must be positive")
    if omega_ph <= 0.0:
        raise ValueError("omega_ph must be positive")
    grid = provider._resolve_grid(grid)
    k_x = omega_ph / v
    kx_axis = np.fft.fftshift(grid.kx)
    if k_x > float(kx_axis[-1]):
        raise ValueError(
            f"k_x = omega/v = {k_x:.6g} lies outside the grid momentum range "
            f"(max {float(kx_axis[-1]):.6g})"
        )

    times = _time_nodes(provider, window, num_samples)
    weights = np.empty_like(times)
    weights[0] = 0.5 * (times[1] - times[0])
    weights[-1] = 0.5 * (times[-1] - times[-2])
    if len(times) > 2:
        weights[1:-1] = 0.5 * (times[2:] - times[:-2])

    shape = (grid.ny, grid.nx)
    a_tilde = np.zeros(shape, dtype=np.complex128)
    phi_tilde = np.zeros(shape, dtype=np.complex128)
    first = last = None
    for t, w in zip(times, weights):
        sample = provider.sample(float(t), grid)
        phase = np.exp(1j * omega_ph * t)
        a_tilde += (w * phase) * sample.ax
        phi_tilde += (w * phase) * sample.phi
        if first is None:
            first = phase * sample.ax
        last = phase * sample.ax
    # E_x = -dA_x/dt - d(phi)/dx; the A part is integrated by parts.
    e_tilde = 1j * omega_ph * a_tilde - (last - first) - _fourth_order_ddx(phi_tilde, grid.dx)

    spectrum = np.fft.fft2(e_tilde) * grid.cell_area
    KX, KY = grid.k_mesh
    spectrum = spectrum * np.exp(-1j * (KX * grid.x0 + KY * grid.y0))
    spectrum = np.fft.fftshift(spectrum, axes=1)

    rows = np.empty(grid.ny, dtype=np.complex128)
    for iy in range(grid.ny):
        rows[iy] = np.interp(k_x, kx_axis, spectrum[iy].real) + 1j * np.interp(
            k_x, kx_axis, spectrum[iy].imag
        )
    ky = grid.ky
    dky = 2.0 * np.pi / grid.ly
    total = np.sum(rows * np.exp(1j * ky * y_offset)) * dky
    return complex(total / (2.0 * omega_ph))
