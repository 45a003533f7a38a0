"""Independent slow-path oracles used by the test suite.

Everything here is computed by direct quadrature / direct summation in real
space, deliberately avoiding the FFT code paths under test.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy import integrate

from tdhf2d.coulomb import real_space_interaction
from tdhf2d.grid import GridSpec, sigma_from_fwhm


def kernel_value_by_quadrature(k: float, transverse_width: float) -> float:
    """2D Fourier coefficient of the confinement-averaged Coulomb interaction.

    Direct double quadrature over both particles' out-of-plane coordinates of
    rho(z) rho(z') exp(-k |z - z'|), times the bare-2D factor 2 pi / k (the
    textbook transform of 1/sqrt(r^2 + a^2) at in-plane wavenumber k).
    """
    sigma = sigma_from_fwhm(transverse_width)
    lim = 10.0 * sigma

    def integrand(zp: float, z: float) -> float:
        rho = np.exp(-(z**2) / (2 * sigma**2)) / np.sqrt(2 * np.pi * sigma**2)
        rho_p = np.exp(-(zp**2) / (2 * sigma**2)) / np.sqrt(2 * np.pi * sigma**2)
        return rho * rho_p * np.exp(-k * abs(z - zp))

    value, _ = integrate.dblquad(integrand, -lim, lim, -lim, lim, epsabs=1e-12, epsrel=1e-10)
    return (2.0 * np.pi / k) * value


def interaction_by_quadrature(r: float, transverse_width: float) -> float:
    """V_eff(r) by quadrature over the relative out-of-plane coordinate."""
    sigma = sigma_from_fwhm(transverse_width)
    s = np.sqrt(2.0) * sigma  # std of z - z'
    lim = 12.0 * s

    def integrand(u: float) -> float:
        return (
            np.exp(-(u**2) / (2 * s**2))
            / np.sqrt(2 * np.pi * s**2)
            / np.sqrt(r**2 + u**2)
        )

    value, _ = integrate.quad(integrand, -lim, lim, epsabs=1e-13, epsrel=1e-11, limit=200)
    return value


def singular_patch_interaction(transverse_width: float, ax: float, ay: float) -> float:
    """Integral of V_eff over an ax-by-ay patch centered on the source point."""

    def integrand(y: float, x: float) -> float:
        return float(real_space_interaction(transverse_width, np.hypot(x, y)))

    quarter, _ = integrate.dblquad(
        integrand, 0.0, ax / 2.0, 0.0, ay / 2.0, epsabs=1e-12, epsrel=1e-10
    )
    return 4.0 * quarter


def self_cell_interaction(grid: GridSpec, transverse_width: float) -> float:
    """Integral of V_eff over one dx-by-dy grid cell centered on the source."""
    return singular_patch_interaction(transverse_width, grid.dx, grid.dy)


def _free_space_convolution(
    grid: GridSpec,
    transverse_width: float,
    weight: np.ndarray,
    sample_points: list[tuple[int, int]],
    weight_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None,
    refine_radius: float,
    refine_factor: int,
) -> np.ndarray:
    """(V_eff * weight)(r_s) by direct free-space midpoint summation.

    With ``weight_fn`` (the continuum function the grid array samples) and a
    positive ``refine_radius``, every cell within that radius of the sample
    point is subdivided into refine_factor^2 midpoint subcells, and the
    singular subcell is handled by an exact patch integral; this removes the
    O(dx^2) midpoint error concentrated around the kernel's r = 0 kink.
    """
    X, Y = grid.xy_mesh
    weight = np.asarray(weight)
    w_scale = float(np.max(np.abs(weight))) if weight.size else 0.0
    out = np.zeros(len(sample_points), dtype=np.complex128)
    if w_scale == 0.0:
        return out

    # The far-field sum only needs cells where the weight is non-negligible.
    support = np.abs(weight) > 1e-300
    xs_all, ys_all = X[support], Y[support]
    ws_all = weight[support]
    sup_iy, sup_ix = np.nonzero(support)

    refine = weight_fn is not None and refine_radius > 0.0
    if refine:
        s = refine_factor
        if s < 3 or s % 2 == 0:
            raise ValueError("refine_factor must be an odd integer >= 3")
        frac = (np.arange(s) - (s - 1) / 2.0) / s
        sub_ox, sub_oy = np.meshgrid(frac * grid.dx, frac * grid.dy)
        sub_area = grid.cell_area / s**2
        sub_patch = singular_patch_interaction(transverse_width, grid.dx / s, grid.dy / s)
    cell_patch = singular_patch_interaction(transverse_width, grid.dx, grid.dy)

    for n, (iy, ix) in enumerate(sample_points):
        x_s, y_s = grid.x[ix], grid.y[iy]
        dist = np.hypot(xs_all - x_s, ys_all - y_s)
        if not refine:
            at_sample = (sup_iy == iy) & (sup_ix == ix)
            safe = np.where(at_sample, 1.0, dist)
            v = real_space_interaction(transverse_width, safe)
            contrib = np.where(at_sample, 0.0, v * ws_all)
            out[n] = np.sum(contrib) * grid.cell_area + weight[iy, ix] * cell_patch
            continue

        far = dist > refine_radius
        v_far = real_space_interaction(transverse_width, np.where(far, dist, 1.0))
        total = complex(np.sum(np.where(far, v_far * ws_all, 0.0)) * grid.cell_area)

        # Near cells: every grid cell within the radius, plus the self cell.
        near_sel = ~far
        near_cells = {(int(a), int(b)) for a, b in zip(sup_iy[near_sel], sup_ix[near_sel])}
        near_cells.add((iy, ix))
        c = (refine_factor - 1) // 2
        for jy, jx in sorted(near_cells):
            cx = grid.x[jx] + sub_ox
            cy = grid.y[jy] + sub_oy
            rr = np.hypot(cx - x_s, cy - y_s)
            w_sub = weight_fn(cx, cy)
            if jy == iy and jx == ix:
                v = real_space_interaction(transverse_width, np.where(rr > 0.0, rr, 1.0))
                contrib = v * w_sub * sub_area
                total += complex(np.sum(contrib) - contrib[c, c])
                total += complex(w_sub[c, c] * sub_patch)
            else:
                v = real_space_interaction(transverse_width, rr)
                total += complex(np.sum(v * w_sub) * sub_area)
        out[n] = total
    return out


def brute_force_potential(
    grid: GridSpec,
    transverse_width: float,
    density: np.ndarray,
    sample_points: list[tuple[int, int]],
    density_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    refine_radius: float = 0.0,
    refine_factor: int = 9,
) -> np.ndarray:
    """Free-space convolution V_eff * density at selected grid points.

    Direct summation per sample; the singular self term is the exact cell
    integral of V_eff times the local density.  See _free_space_convolution
    for the optional local refinement.
    """
    result = _free_space_convolution(
        grid, transverse_width, density, sample_points, density_fn, refine_radius, refine_factor
    )
    return result.real


def brute_force_dressed_convolution(
    grid: GridSpec,
    transverse_width: float,
    field: np.ndarray,
    delta_k: np.ndarray,
    sample_points: list[tuple[int, int]],
    field_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    refine_radius: float = 0.0,
    refine_factor: int = 9,
) -> np.ndarray:
    """Free-space exp(i dk.r) V_eff * (field exp(-i dk.r')) at selected points."""
    X, Y = grid.xy_mesh
    dkx, dky = float(delta_k[0]), float(delta_k[1])
    src = field * np.exp(-1j * (dkx * X + dky * Y))
    src_fn = None
    if field_fn is not None:

        def src_fn(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return field_fn(x, y) * np.exp(-1j * (dkx * x + dky * y))

    raw = _free_space_convolution(
        grid, transverse_width, src, sample_points, src_fn, refine_radius, refine_factor
    )
    out = np.empty(len(sample_points), dtype=np.complex128)
    for n, (iy, ix) in enumerate(sample_points):
        out[n] = raw[n] * np.exp(1j * (dkx * grid.x[ix] + dky * grid.y[iy]))
    return out
