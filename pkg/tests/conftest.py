"""Shared fixtures: small grids and wavepackets sized for fast unit tests."""

from __future__ import annotations

import numpy as np
import pytest

from tdhf2d.grid import GridSpec, gaussian_wavepacket


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture
def grid_small() -> GridSpec:
    """64x64 grid, 40x40 Bohr, centered on the origin."""
    n = 64
    length = 40.0
    d = length / n
    return GridSpec(nx=n, ny=n, dx=d, dy=d, x0=-length / 2, y0=-length / 2)


@pytest.fixture
def grid_rect() -> GridSpec:
    """128x64 anisotropic grid, 120x50 Bohr, centered on the origin."""
    nx, ny = 128, 64
    lx, ly = 120.0, 50.0
    return GridSpec(nx=nx, ny=ny, dx=lx / nx, dy=ly / ny, x0=-lx / 2, y0=-ly / 2)


@pytest.fixture
def packet_centered(grid_small):
    """Broad resolved Gaussian at rest at the origin."""
    return gaussian_wavepacket(
        grid_small,
        center=(0.0, 0.0),
        fwhm_long=10.0,
        fwhm_trans=8.0,
        kinetic_energy=0.0,
    )
