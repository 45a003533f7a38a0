"""Shared fixture: a hand-built container in the documented on-disk format.

Built with plain ``json`` and raw little-endian byte writes — deliberately
independent of any writer implementation — so the reader and renderer are
tested against the format itself.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

EV_PER_AU = 27.211386245988

NX, NY = 48, 24
PAIR_N = 48
PHOTON_EV = 1.55
REFERENCE_EV = 1436.0


def _write_dataset(directory: Path, table: dict, name: str, values: np.ndarray) -> str:
    values = np.asarray(values)
    if np.iscomplexobj(values):
        tag, dtype = "complex128", np.dtype("<c16")
    else:
        tag, dtype = "float64", np.dtype("<f8")
    data = np.ascontiguousarray(values, dtype=dtype)
    (directory / f"{name}.bin").write_bytes(data.tobytes())
    table[name] = {"file": f"{name}.bin", "shape": list(data.shape), "dtype": tag}
    return name


def build_box(
    directory: Path,
    n_snapshots: int = 2,
    comb_period_au: float | None = PHOTON_EV / EV_PER_AU,
    zero_exchange: bool = False,
) -> Path:
    """Write a small, fully valid container; returns the directory."""
    directory.mkdir(parents=True, exist_ok=True)
    datasets: dict[str, dict] = {}

    x = np.linspace(-150.0, 150.0, NX)
    y = np.linspace(-30.0, 30.0, NY)
    _write_dataset(directory, datasets, "axis_x_nm", x)
    _write_dataset(directory, datasets, "axis_y_nm", y)

    pair_axis = np.linspace(-150.0, 150.0, PAIR_N)
    _write_dataset(directory, datasets, "pair_real_axis_nm", pair_axis)

    # sideband comb: Gaussian teeth at multiples of the photon energy
    energies_ev = np.linspace(-8.0, 8.0, 207)
    signal = np.full_like(energies_ev, 1e-6)
    for m in range(-4, 5):
        amplitude = 2.0 * 0.5 ** abs(m)
        signal += amplitude * np.exp(-((energies_ev - m * PHOTON_EV) ** 2) / (2 * 0.08**2))
    _write_dataset(directory, datasets, "pinem_energies_ev", energies_ev)
    _write_dataset(
        directory, datasets, "pinem_energies_au", (energies_ev + REFERENCE_EV) / EV_PER_AU
    )
    _write_dataset(directory, datasets, "pinem_Sigma", signal)

    X, Y = np.meshgrid(x, y)
    P1, P2 = np.meshgrid(pair_axis, pair_axis)
    snapshots = []
    for index in range(n_snapshots):
        shift = 12.0 * index
        names = {}
        for orb, (cx, cy) in enumerate(((-40.0 + shift, 8.0), (-40.0 + shift, -8.0)), 1):
            blob = np.exp(-((X - cx) ** 2) / 400.0 - ((Y - cy) ** 2) / 50.0)
            names[f"orbital{orb}_density"] = _write_dataset(
                directory, datasets, f"orbital{orb}_density_{index:06d}", blob
            )
        hump = np.exp(-((P1 + 40.0 - shift) ** 2 + (P2 + 40.0 - shift) ** 2) / 800.0)
        total = hump + hump.T  # symmetric about the diagonal by construction
        names["pair_real_total"] = _write_dataset(
            directory, datasets, f"pair_real_total_{index:06d}", total
        )
        if zero_exchange:
            exchange = np.zeros_like(total)
        else:
            exchange = -0.3 * (hump + hump.T) * np.cos((P1 - P2) / 15.0)
        names["pair_real_exchange"] = _write_dataset(
            directory, datasets, f"pair_real_exchange_{index:06d}", exchange
        )
        snapshots.append({"time": 100.0 * index, "datasets": names})

    manifest = {
        "format": "pseudospectral-run",
        "format_version": 1,
        "created": "2026-08-22T00:00:00+00:00",
        "code_version": "fixture",
        "datasets": datasets,
        "snapshots": snapshots,
        "summary": {
            "spin_mode": "polarized",
            "comb_period_au": comb_period_au,
            "reference_energy_ev": REFERENCE_EV,
            "visibility": 0.42,
        },
        "timing": {"wall_seconds": 1.0},
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return directory


@pytest.fixture()
def box_dir(tmp_path) -> Path:
    return build_box(tmp_path / "box")
