"""Derived quantities: densities, two-particle structure, energy spectra.

Everything here is a pure function of a :class:`~tdhf2d.engine.SystemState`
or of individual wavepackets; nothing mutates its inputs.

Two-particle quantities are built for the antisymmetrized two-electron
state.  For a spin-polarized pair (both spins equal) the spatial pair
density is the Slater-determinant one and carries an exchange interference
term; for an unpolarized pair (opposite spins) the spatial pair density is
the product form without the interference term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks, savgol_filter

from .constants import au_to_ev
from .engine import SystemState
from .grid import (
    MomentumDistribution,
    Wavepacket,
    carrier_phase,
    to_momentum_space,
)

__all__ = [
    "PairDensitySlice",
    "PinemSpectrum",
    "mutual_correlation",
    "density_difference",
    "one_particle_density",
    "pair_density_diagonal",
    "pair_density_slice",
    "pinem_spectrum",
    "pinem_total",
    "fringe_visibility",
    "comb_spacing",
]


# ---------------------------------------------------------------------------
# one-particle fields


def _check_same_grid(w1: Wavepacket, w2: Wavepacket) -> None:
    if w1.grid != w2.grid:
        raise ValueError("wavepackets live on different grids")


def mutual_correlation(
    w1: Wavepacket, w2: Wavepacket, include_carrier: bool = False
) -> np.ndarray:
    """Pointwise correlation field C(r) = psi1*(r) psi2(r).

    By default only the envelopes enter; with ``include_carrier`` the
    carrier mismatch factor exp(i (k2 - k1) . r) is attached, making C the
    correlation of the full orbitals.
    """
    _check_same_grid(w1, w2)
    c = np.conj(w1.envelope) * w2.envelope
    if include_carrier:
        dk = w2.carrier - w1.carrier
        if dk[0] != 0.0 or dk[1] != 0.0:
            c = c * carrier_phase(w1.grid, dk)
    return c


def density_difference(w1: Wavepacket, w2: Wavepacket) -> np.ndarray:
    """Pointwise density imbalance |psi1|^2 - |psi2|^2."""
    _check_same_grid(w1, w2)
    return np.abs(w1.envelope) ** 2 - np.abs(w2.envelope) ** 2


def one_particle_density(state: SystemState) -> np.ndarray:
    """Total density sum_n |psi_n|^2; integrates to the particle number."""
    rho = np.zeros((state.grid.ny, state.grid.nx))
    for w in state.orbitals:
        rho += np.abs(w.envelope) ** 2
    return rho


# ---------------------------------------------------------------------------
# two-particle structure


def _require_pair(state: SystemState) -> tuple[Wavepacket, Wavepacket]:
    if len(state.orbitals) != 2:
        raise ValueError("pair density requires exactly two orbitals")
    return state.orbitals[0], state.orbitals[1]


def pair_density_diagonal(state: SystemState) -> np.ndarray:
    """Same-point pair density rho12(r, r).

    Assembled from the uncorrelated product and the exchange term so the
    spin-polarized case exhibits the exact same-point cancellation (Pauli
    exclusion) rather than having it imposed by construction.
    """
    w1, w2 = _require_pair(state)
    rho1 = np.abs(w1.envelope) ** 2
    rho2 = np.abs(w2.envelope) ** 2
    rho = rho1 + rho2
    diagonal = rho * rho - rho1 * rho1 - rho2 * rho2
    if state.spin_mode == "polarized":
        # interference part of the exchange term at coincident points
        cross = np.abs(mutual_correlation(w1, w2, include_carrier=True)) ** 2
        diagonal = diagonal - 2.0 * cross
    return diagonal


@dataclass(frozen=True)
class PairDensitySlice:
    """Pair density on a line cut, transverse coordinates integrated out.

    ``total`` is the physical two-particle density rho12(x1, x2) (or its
    momentum-space analogue), ``uncorrelated`` the product rho(x1) rho(x2)
    of one-particle densities, ``exchange_phase`` the interference part of
    the exchange term (zero for an unpolarized pair).  ``step`` is the
    sample spacing of ``coordinate``; matrices integrate with step**2.
    """

    axis: str
    coordinate: np.ndarray
    step: float
    total: np.ndarray
    uncorrelated: np.ndarray
    exchange_phase: np.ndarray


def _momentum_fields(
    state: SystemState,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, float]:
    """Common-axis momentum amplitudes of both orbitals.

    Each envelope is folded by its carrier offset from the mean carrier so
    both amplitudes live on one physical momentum grid centered at the mean
    carrier.  The offsets must be resolvable on the grid.
    """
    w1, w2 = state.orbitals
    grid = state.grid
    k_ref = 0.5 * (w1.carrier + w2.carrier)
    nyquist = np.array([np.pi / grid.dx, np.pi / grid.dy])
    for w in (w1, w2):
        offset = np.abs(w.carrier - k_ref)
        if offset[0] >= nyquist[0] or offset[1] >= nyquist[1]:
            raise ValueError(
                "carrier difference is unresolvable on the momentum grid: "
                f"offset {tuple(offset)} exceeds the Nyquist range {tuple(nyquist)}"
            )
    amps = []
    for w in (w1, w2):
        folded = w.envelope * carrier_phase(grid, w.carrier - k_ref)
        dist = to_momentum_space(
            Wavepacket(grid=grid, envelope=folded, carrier=k_ref, spin=w.spin)
        )
        amps.append(dist.amplitude)
    return amps[0], amps[1], dist.kx, dist.dkx, dist.dky


def pair_density_slice(state: SystemState, space: str = "real") -> PairDensitySlice:
    """Pair density on the longitudinal axis, transverse direction traced out.

    ``space`` selects the representation: ``"real"`` gives rho12(x1, x2)
    with y1, y2 integrated; ``"momentum"`` gives the same construction from
    the momentum amplitudes on a common physical axis, with ky traced.
    """
    w1, w2 = _require_pair(state)
    grid = state.grid
    if space == "real":
        psi1 = w1.envelope * carrier_phase(grid, w1.carrier)
        psi2 = w2.envelope * carrier_phase(grid, w2.carrier)
        axis, coordinate = "x", grid.x
        step, trans_step = grid.dx, grid.dy
    elif space == "momentum":
        psi1, psi2, coordinate, step, trans_step = _momentum_fields(state)
        axis = "kx"
    else:
        raise ValueError(f"space must be 'real' or 'momentum', got {space!r}")

    pa = np.sum(np.abs(psi1) ** 2, axis=0) * trans_step
    pb = np.sum(np.abs(psi2) ** 2, axis=0) * trans_step
    line_density = pa + pb
    uncorrelated = np.outer(line_density, line_density)
    if state.spin_mode == "polarized":
        c = np.sum(np.conj(psi1) * psi2, axis=0) * trans_step
        exchange_phase = -2.0 * np.real(np.outer(c, np.conj(c)))
    else:
        exchange_phase = np.zeros_like(uncorrelated)
    total = np.outer(pa, pb) + np.outer(pb, pa) + exchange_phase
    return PairDensitySlice(
        axis=axis,
        coordinate=coordinate,
        step=float(step),
        total=total,
        uncorrelated=uncorrelated,
        exchange_phase=exchange_phase,
    )


# ---------------------------------------------------------------------------
# angle-resolved energy spectra


@dataclass(frozen=True)
class PinemSpectrum:
    """Electron energy spectrum resolved in propagation angle.

    ``sigma`` is the double-differential density sigma(E, phi) = E |psi(E,
    phi)|^2 (atomic units) on the bin grid; ``Sigma`` integrates sigma over
    the angular acceptance window.  ``energies`` are bin centers in hartree;
    ``energies_ev`` the same axis in eV relative to the reference energy the
    spectrum was built with.  Integrating Sigma against ``de`` recovers the
    mean kinetic energy captured by the window.
    """

    energies: np.ndarray
    energies_ev: np.ndarray
    angles: np.ndarray
    sigma: np.ndarray
    Sigma: np.ndarray
    acceptance_angle: float
    de: float
    dphi: float


def _resolve_edges(bins, lo: float, hi: float, what: str) -> np.ndarray:
    if np.isscalar(bins):
        n = int(bins)
        if n < 1:
            raise ValueError(f"{what} bins must be a positive count or an edge array")
        return np.linspace(lo, hi, n + 1)
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError(f"{what} bins edge array needs at least two edges")
    widths = np.diff(edges)
    if np.any(widths <= 0.0):
        raise ValueError(f"{what} bins edges must increase strictly")
    if np.max(widths) - np.min(widths) > 1e-9 * np.max(widths):
        raise ValueError(f"{what} bins must be uniform")
    return edges


def _fold_angle(kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
    """Angle from the propagation axis, folded so +x and -x beams coincide."""
    sign = np.where(kx >= 0.0, 1.0, -1.0)
    return np.arctan2(ky * sign, np.abs(kx))


def _spectrum_core(
    dist: MomentumDistribution,
    e_edges: np.ndarray,
    a_edges: np.ndarray,
) -> np.ndarray:
    """Histogram of E |psi|^2 dkx dky over (energy, angle) cells."""
    KX, KY = np.meshgrid(dist.kx, dist.ky)
    energy = 0.5 * (KX**2 + KY**2)
    angle = _fold_angle(KX, KY)
    weight = energy * np.abs(dist.amplitude) ** 2 * dist.dkx * dist.dky

    n_e = e_edges.size - 1
    n_a = a_edges.size - 1
    de = (e_edges[-1] - e_edges[0]) / n_e
    dphi = (a_edges[-1] - a_edges[0]) / n_a
    i_e = np.floor((energy - e_edges[0]) / de).astype(np.int64)
    i_a = np.floor((angle - a_edges[0]) / dphi).astype(np.int64)
    # top-edge values belong to the last bin
    i_e = np.where(energy == e_edges[-1], n_e - 1, i_e)
    i_a = np.minimum(i_a, n_a - 1)
    inside = (i_e >= 0) & (i_e < n_e) & (i_a >= 0) & (i_a < n_a)
    acc = np.zeros((n_e, n_a))
    np.add.at(acc, (i_e[inside], i_a[inside]), weight[inside])
    return acc


def _spectrum_from_acc(
    acc: np.ndarray,
    e_edges: np.ndarray,
    a_edges: np.ndarray,
    acceptance_angle: float,
    reference_energy: float,
) -> PinemSpectrum:
    de = float((e_edges[-1] - e_edges[0]) / (e_edges.size - 1))
    dphi = float((a_edges[-1] - a_edges[0]) / (a_edges.size - 1))
    energies = 0.5 * (e_edges[:-1] + e_edges[1:])
    angles = 0.5 * (a_edges[:-1] + a_edges[1:])
    sigma = acc / (de * dphi)
    accepted = np.abs(angles) <= acceptance_angle + 1e-12
    Sigma = sigma[:, accepted].sum(axis=1) * dphi
    return PinemSpectrum(
        energies=energies,
        energies_ev=au_to_ev(energies - reference_energy),
        angles=angles,
        sigma=sigma,
        Sigma=Sigma,
        acceptance_angle=float(acceptance_angle),
        de=de,
        dphi=dphi,
    )


def _grid_energy_max(dist: MomentumDistribution) -> float:
    KX, KY = np.meshgrid(dist.kx, dist.ky)
    return float(np.max(0.5 * (KX**2 + KY**2)))


def pinem_spectrum(
    w: Wavepacket,
    acceptance_angle: float,
    energy_bins,
    angle_bins,
    reference_energy: float = 0.0,
) -> PinemSpectrum:
    """Angle-resolved kinetic-energy spectrum of one wavepacket.

    ``energy_bins``/``angle_bins`` are either positive bin counts (the
    energy axis then spans the full grid range, the angle axis spans
    [-pi/2, pi/2]) or explicit uniform edge arrays (hartree / radians).
    ``acceptance_angle`` (radians) bounds |phi| for the angle-integrated
    ``Sigma``; angles are measured from the propagation axis with forward
    and backward beams folded onto each other.
    """
    dist = to_momentum_space(w)
    e_max = _grid_energy_max(dist)
    e_edges = _resolve_edges(energy_bins, 0.0, e_max * (1.0 + 1e-12), "energy")
    a_edges = _resolve_edges(angle_bins, -np.pi / 2, np.pi / 2, "angle")
    acc = _spectrum_core(dist, e_edges, a_edges)
    return _spectrum_from_acc(acc, e_edges, a_edges, acceptance_angle, reference_energy)


def pinem_total(
    state: SystemState,
    acceptance_angle: float,
    energy_bins,
    angle_bins,
    reference_energy: float = 0.0,
) -> PinemSpectrum:
    """Sum of the per-orbital spectra on one shared bin grid.

    With integer ``energy_bins`` the shared axis spans the widest
    per-orbital grid range, so spectra of orbitals with different carriers
    remain additive on identical bins.
    """
    dists = [to_momentum_space(w) for w in state.orbitals]
    e_max = max(_grid_energy_max(d) for d in dists)
    e_edges = _resolve_edges(energy_bins, 0.0, e_max * (1.0 + 1e-12), "energy")
    a_edges = _resolve_edges(angle_bins, -np.pi / 2, np.pi / 2, "angle")
    spectra = [
        _spectrum_from_acc(
            _spectrum_core(d, e_edges, a_edges),
            e_edges,
            a_edges,
            acceptance_angle,
            reference_energy,
        )
        for d in dists
    ]
    sigma = spectra[0].sigma
    Sigma = spectra[0].Sigma
    for s in spectra[1:]:
        sigma = sigma + s.sigma
        Sigma = Sigma + s.Sigma
    first = spectra[0]
    return PinemSpectrum(
        energies=first.energies,
        energies_ev=first.energies_ev,
        angles=first.angles,
        sigma=sigma,
        Sigma=Sigma,
        acceptance_angle=first.acceptance_angle,
        de=first.de,
        dphi=first.dphi,
    )


# ---------------------------------------------------------------------------
# comb analysis


def _band_values(spec: PinemSpectrum, band) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = float(band[0]), float(band[1])
    if not hi > lo:
        raise ValueError("band must be an increasing (low, high) energy pair")
    mask = (spec.energies >= lo) & (spec.energies <= hi)
    if np.count_nonzero(mask) < 4:
        raise ValueError("band contains fewer than four spectrum samples")
    return spec.energies[mask], spec.Sigma[mask]


def _estimate_period(energies: np.ndarray, values: np.ndarray, de: float) -> float:
    signal = values - np.mean(values)
    power = np.abs(np.fft.rfft(signal))
    if power.size < 2:
        raise ValueError("band is too short to estimate the comb period")
    k = int(np.argmax(power[1:])) + 1
    return energies.size * de / k


def _comb_extrema(
    values: np.ndarray, period: float, de: float
) -> tuple[np.ndarray, np.ndarray]:
    window = int(np.floor(0.5 * period / de))
    if window % 2 == 0:
        window -= 1
    if window >= 5:
        smooth = savgol_filter(values, window, 2)
    else:
        smooth = values
    # extrema must be more than half a period apart, so a bump midway
    # between two comb teeth cannot register; the prominence floor only
    # rejects floating-point ripple, never a physically resolvable peak
    min_sep = max(2, int(round(0.5 * period / de)) + 1)
    floor = 1e-6 * float(np.max(values) - np.min(values))
    peaks, _ = find_peaks(smooth, distance=min_sep, prominence=floor)
    troughs, _ = find_peaks(-smooth, distance=min_sep, prominence=floor)
    return peaks, troughs


def _comb_analysis(spec: PinemSpectrum, band, comb_period):
    energies, values = _band_values(spec, band)
    vmax = float(np.max(values))
    spread = vmax - float(np.min(values))
    if vmax <= 0.0 or spread < 1e-12 * abs(vmax):
        return energies, values, None, None  # flat within tolerance
    period = float(comb_period) if comb_period is not None else _estimate_period(
        energies, values, spec.de
    )
    if energies[-1] - energies[0] < 2.0 * period:
        raise ValueError("band spans fewer than two comb periods")
    peaks, troughs = _comb_extrema(values, period, spec.de)
    return energies, values, peaks, troughs


def fringe_visibility(spec: PinemSpectrum, band, comb_period: float | None = None) -> float:
    """Mean comb contrast (peak - trough) / (peak + trough) inside ``band``.

    Extrema are located on a lightly smoothed copy of the spectrum (window
    below half the comb period) but amplitudes are read from the raw
    spectrum at the detected positions.  A spectrum that is flat over the
    band has visibility 0.  Without ``comb_period`` the period is estimated
    from the dominant Fourier component of the band.
    """
    energies, values, peaks, troughs = _comb_analysis(spec, band, comb_period)
    if peaks is None:
        return 0.0
    if peaks.size == 0 or troughs.size == 0:
        raise ValueError("no comb extrema detected in the band")
    peak_level = float(np.mean(values[peaks]))
    trough_level = float(np.mean(values[troughs]))
    return (peak_level - trough_level) / (peak_level + trough_level)


def comb_spacing(spec: PinemSpectrum, band, comb_period: float | None = None) -> float:
    """Mean energy spacing of consecutive comb peaks inside ``band``."""
    energies, _, peaks, _ = _comb_analysis(spec, band, comb_period)
    if peaks is None or peaks.size < 2:
        raise ValueError("fewer than two comb peaks detected in the band")
    return float(np.mean(np.diff(energies[peaks])))
