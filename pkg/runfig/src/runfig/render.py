"""Deterministic PNG panels from run containers.

Four panel kinds cover the standard figure set:

* ``orbital`` -- per-orbital densities of one snapshot over the x/y plane;
* ``pair_density`` -- the two-particle density heatmap of one snapshot;
* ``exchange`` -- the exchange interference heatmap of one snapshot, always
  drawn on a symmetric diverging scale centered at zero;
* ``pinem`` -- the angle-integrated electron energy spectrum, with major
  ticks at the sideband comb period recorded in the container.

Rendering is read-only and reproducible: fixed figure geometry, fixed DPI,
no timestamps in the PNG metadata, values taken from the container without
normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import colors as mcolors
from matplotlib import pyplot as plt
from matplotlib import ticker as mticker

from .reader import EV_PER_AU, FS_PER_AU, BoxError, RunBox, select_snapshot

PANELS = ("orbital", "pair_density", "exchange", "pinem")
SCALES = ("linear", "log")

DPI = 150
_SAVE_KWARGS = {"dpi": DPI, "metadata": {"Software": None}}


@dataclass(frozen=True)
class FigureRequest:
    """One panel to draw from one container.

    ``time_fs`` picks the snapshot nearest that time; ``index`` picks it
    directly; with neither, the latest snapshot is used.  ``scale`` is
    ``linear`` or ``log`` (``None`` leaves each panel's default: log for the
    spectrum, linear elsewhere).  ``symmetric`` applies to the exchange
    panel, which centers its color scale at zero.  ``space`` selects the
    real- or momentum-space pair slice for the pair panels.
    """

    manifest_path: str | Path
    panel: str
    out_path: str | Path
    time_fs: float | None = None
    index: int | None = None
    scale: str | None = None
    symmetric: bool = True
    space: str = "real"

    def __post_init__(self) -> None:
        if self.panel not in PANELS:
            raise ValueError(f"unknown panel {self.panel!r}; expected one of {PANELS}")
        if self.scale is not None and self.scale not in SCALES:
            raise ValueError(f"unknown scale {self.scale!r}; expected one of {SCALES}")
        if self.space not in ("real", "momentum"):
            raise ValueError(f"unknown space {self.space!r}; expected real or momentum")
        if self.time_fs is not None and self.index is not None:
            raise ValueError("give either a snapshot time or an index, not both")


def exchange_limits(data: np.ndarray) -> tuple[float, float]:
    """Symmetric color limits centered at zero; (-1, 1) for all-zero data."""
    magnitude = float(np.max(np.abs(data))) if data.size else 0.0
    if magnitude <= 0.0 or not np.isfinite(magnitude):
        magnitude = 1.0
    return -magnitude, magnitude


def pinem_tick_spacing_ev(box: RunBox) -> float | None:
    """Major-tick spacing (eV) for the spectrum axis: the recorded comb period."""
    period = box.summary.get("comb_period_au")
    if isinstance(period, (int, float)) and period > 0.0:
        return float(period) * EV_PER_AU
    return None


def _real_values(box: RunBox, name: str) -> np.ndarray:
    values = box.read(name)
    return np.real(values) if np.iscomplexobj(values) else values


def _role_values(box: RunBox, snapshot: Mapping[str, Any], role: str) -> np.ndarray:
    values = box.read_role(snapshot, role)
    return np.real(values) if np.iscomplexobj(values) else values


def _heatmap_norm(data: np.ndarray, scale: str) -> mcolors.Normalize | None:
    if scale != "log":
        return None
    top = float(np.max(data)) if data.size else 0.0
    if top <= 0.0:
        return None  # nothing positive to span; linear shows the flat field
    return mcolors.LogNorm(vmin=top * 1e-6, vmax=top)


def _orbital_panel(box: RunBox, snapshot: Mapping[str, Any], scale: str, ax_list) -> None:
    x = box.read("axis_x_nm")
    y = box.read("axis_y_nm")
    extent = (float(x[0]), float(x[-1]), float(y[0]), float(y[-1]))
    roles = sorted(r for r in snapshot.get("datasets", {}) if r.endswith("_density"))
    if not roles:
        raise BoxError(
            f"snapshot at t={snapshot.get('time')!r} has no orbital density datasets"
        )
    for ax, role in zip(ax_list, roles):
        data = _role_values(box, snapshot, role)
        image = ax.imshow(
            data,
            origin="lower",
            extent=extent,
            aspect="auto",
            cmap="magma",
            norm=_heatmap_norm(data, scale),
        )
        ax.set_xlabel("x (nm)")
        ax.set_ylabel("y (nm)")
        ax.set_title(role.replace("_", " "))
        ax.figure.colorbar(image, ax=ax, shrink=0.85)


def _pair_axis(box: RunBox, space: str) -> tuple[np.ndarray, str]:
    for name, unit in ((f"pair_{space}_axis_nm", "nm"), (f"pair_{space}_axis_au", "a.u.")):
        if box.has_dataset(name):
            return box.read(name), unit
    raise BoxError(f"container has no pair-{space} axis dataset")


def _pair_heatmap(
    box: RunBox,
    data: np.ndarray,
    space: str,
    ax,
    *,
    cmap: str,
    norm: mcolors.Normalize | None = None,
    vmin: float | None = None,
    vmax: float | None = None,
) -> None:
    axis, unit = _pair_axis(box, space)
    extent = (float(axis[0]), float(axis[-1]), float(axis[0]), float(axis[-1]))
    image = ax.imshow(
        data,
        origin="lower",
        extent=extent,
        aspect="equal",
        cmap=cmap,
        norm=norm,
        vmin=vmin,
        vmax=vmax,
    )
    symbol = "x" if space == "real" else "k"
    ax.set_xlabel(f"{symbol}$_1$ ({unit})")
    ax.set_ylabel(f"{symbol}$_2$ ({unit})")
    ax.figure.colorbar(image, ax=ax, shrink=0.85)


def _pinem_axes(box: RunBox, ax, scale: str) -> None:
    energies = box.read("pinem_energies_ev")
    signal = box.read("pinem_Sigma")
    ax.plot(energies, signal, lw=1.0, color="#1f4e8c")
    ax.set_xlabel("energy relative to the carrier (eV)")
    ax.set_ylabel("spectral density (1/Ha)")
    if scale == "log":
        positive = signal[signal > 0]
        if positive.size:
            ax.set_yscale("log")
            ax.set_ylim(bottom=float(positive.min()) * 0.5)
    spacing = pinem_tick_spacing_ev(box)
    if spacing is not None:
        span = float(energies[-1] - energies[0])
        if 0 < span / spacing <= 80:
            ax.xaxis.set_major_locator(mticker.MultipleLocator(spacing))
            ax.tick_params(axis="x", labelsize=7, labelrotation=90)
    ax.margins(x=0)


def render(request: FigureRequest) -> Path:
    """Draw one panel to ``request.out_path``; returns the written path."""
    box = RunBox.open(request.manifest_path)
    out = Path(request.out_path)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)

    if request.panel == "pinem":
        scale = request.scale or "log"
        fig, ax = plt.subplots(figsize=(8.0, 4.0), layout="constrained")
        try:
            _pinem_axes(box, ax, scale)
            fig.savefig(out, **_SAVE_KWARGS)
        finally:
            plt.close(fig)
        return out

    index, snapshot = select_snapshot(box, request.time_fs, request.index)
    time_fs = float(snapshot["time"]) * FS_PER_AU
    title = f"t = {time_fs:.3f} fs (snapshot {index})"
    scale = request.scale or "linear"

    if request.panel == "orbital":
        roles = sorted(
            r for r in snapshot.get("datasets", {}) if r.endswith("_density")
        )
        count = max(len(roles), 1)
        fig, axes = plt.subplots(
            1, count, figsize=(5.0 * count, 3.2), layout="constrained", squeeze=False
        )
        try:
            _orbital_panel(box, snapshot, scale, list(axes[0]))
            fig.suptitle(title)
            fig.savefig(out, **_SAVE_KWARGS)
        finally:
            plt.close(fig)
        return out

    fig, ax = plt.subplots(figsize=(5.4, 4.6), layout="constrained")
    try:
        if request.panel == "pair_density":
            data = _role_values(box, snapshot, f"pair_{request.space}_total")
            _pair_heatmap(
                box,
                data,
                request.space,
                ax,
                cmap="viridis",
                norm=_heatmap_norm(data, scale),
            )
            ax.set_title(f"pair density, {request.space} space\n{title}")
        else:  # exchange
            data = _role_values(box, snapshot, f"pair_{request.space}_exchange")
            if request.symmetric:
                vmin, vmax = exchange_limits(data)
            else:
                vmin = vmax = None
            _pair_heatmap(
                box,
                data,
                request.space,
                ax,
                cmap="RdBu_r",
                vmin=vmin,
                vmax=vmax,
            )
            ax.set_title(f"exchange interference, {request.space} space\n{title}")
        fig.savefig(out, **_SAVE_KWARGS)
    finally:
        plt.close(fig)
    return out


def figure_set(manifest_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Render the standard panel set for every snapshot in the container.

    For each snapshot: orbital densities, pair density, exchange heatmap,
    and the spectrum panel -- four images per snapshot, named
    ``<panel>_<index>.png``.  An empty snapshot list yields an empty result.
    """
    box = RunBox.open(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for index in range(len(box.snapshots)):
        for panel in PANELS:
            request = FigureRequest(
                manifest_path=manifest_path,
                panel=panel,
                index=index,
                out_path=out_dir / f"{panel}_{index:06d}.png",
            )
            written.append(render(request))
    return written
