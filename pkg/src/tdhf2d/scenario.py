"""Configured runs archived as containers, and reports read back from them.

``run_scenario`` turns a validated :class:`~tdhf2d.config.RunConfig` into a
finalized run container: it builds the grid, interaction kernel, field
provider, and initial pair, propagates with snapshot capture, and stores
per-snapshot observables (orbital densities, pair-density slices), the
final angle-resolved energy spectra, and a summary of scalar results.  A
propagation that dies numerically still finalizes the container with an
``incomplete`` flag before the error propagates.

``describe`` re-reads every dataset of an archived run (verifying
integrity), recomputes the fringe visibility from the stored spectrum, and
returns a text report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import __version__
from .config import RunConfig, STABILITY_POTENTIAL_ALLOWANCE
from .constants import au_to_ev, au_to_fs, au_to_nm, ev_to_au, fs_to_au, nm_to_au
from .container import Container, ContainerWriter
from .coulomb import build_kernel
from .engine import PropagatorConfig, SystemState, auto_timestep, run
from .fields import AnalyticPlasmon, IncidentLaser, g_factor
from .grid import gram_schmidt, mean_kinetic_energy
from .observables import (
    PinemSpectrum,
    comb_spacing,
    fringe_visibility,
    one_particle_density,
    pair_density_slice,
    pinem_total,
)

__all__ = ["ScenarioError", "ScenarioResult", "describe", "run_scenario"]

# Full-range spectrum resolution used for the energy-conservation record.
WIDE_ENERGY_BINS = 9000

# The comb analysis band: gain side, half a period past the elastic line up
# to five and a half periods out.
COMB_BAND_PERIODS = (0.5, 5.5)


class ScenarioError(RuntimeError):
    """An archived run is internally inconsistent."""


@dataclass(frozen=True)
class ScenarioResult:
    """Where a run was archived and what its summary recorded."""

    directory: Path
    summary: dict
    wall_seconds: float


def _field_provider(cfg: RunConfig, grid):
    if cfg.field == "plasmon":
        return AnalyticPlasmon(cfg.pulse(), cfg.metal(), cfg.geometry(), grid=grid)
    if cfg.field == "laser":
        return IncidentLaser(cfg.pulse(), grid=grid)
    return None


def _propagator_config(cfg: RunConfig, state: SystemState) -> PropagatorConfig:
    p = cfg.propagation
    a_max = 0.0
    if cfg.field != "none":
        pulse = cfg.pulse()
        a_max = pulse.peak_field / pulse.omega if pulse.omega > 0 else 0.0
    dt = p.dt_au
    if dt is None:
        dt = auto_timestep(state, a_max, STABILITY_POTENTIAL_ALLOWANCE)
    return PropagatorConfig(
        dt=dt,
        t_end=fs_to_au(p.t_end_fs),
        cap_width=None if p.cap_width_nm is None else nm_to_au(p.cap_width_nm),
        cap_strength=p.cap_strength,
        snapshot_stride=p.snapshot_stride,
        interaction_scale=cfg.interaction_scale,
    )


def _energy_edges(cfg: RunConfig) -> tuple[np.ndarray, float]:
    """Uniform bins whose centers sit at reference + m * bin width."""
    obs = cfg.observables
    reference = ev_to_au(cfg.electrons[0].kinetic_energy_ev)
    de = ev_to_au(obs.energy_bin_ev)
    half_bins = max(1, round(obs.energy_window_ev / obs.energy_bin_ev))
    offsets = np.arange(-half_bins, half_bins + 2, dtype=np.float64) - 0.5
    return reference + de * offsets, reference


def _snapshot_arrays(cfg: RunConfig, state: SystemState) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    density = [np.abs(w.envelope) ** 2 for w in state.orbitals]
    arrays["orbital1_density"] = density[0]
    arrays["orbital2_density"] = density[1]
    for space in cfg.observables.slices:
        cut = pair_density_slice(state, space=space)
        arrays[f"pair_{space}_total"] = cut.total
        arrays[f"pair_{space}_uncorrelated"] = cut.uncorrelated
        arrays[f"pair_{space}_exchange"] = cut.exchange_phase
    return arrays


def run_scenario(cfg: RunConfig, output_dir: str | Path) -> ScenarioResult:
    """Propagate the configured scenario and archive it under ``output_dir``."""
    grid = cfg.grid_spec()
    state = cfg.initial_state()
    if cfg.orthogonalize:
        state = SystemState(gram_schmidt(*state.orbitals), state.time, state.spin_mode)
    kernel = build_kernel(grid, transverse_width=nm_to_au(cfg.coulomb.transverse_width_nm))
    provider = _field_provider(cfg, grid)
    prop = _propagator_config(cfg, state)
    edges, reference = _energy_edges(cfg)
    acceptance = math.radians(cfg.observables.acceptance_deg)

    writer = ContainerWriter(
        output_dir, grid=grid, config=dict(cfg.raw), code_version=__version__
    )
    writer.add_array("axis_x_nm", au_to_nm(grid.x))
    writer.add_array("axis_y_nm", au_to_nm(grid.y))

    def sink(snapshot: SystemState, index: int) -> None:
        writer.add_snapshot(snapshot.time, _snapshot_arrays(cfg, snapshot))

    try:
        outcome = run(state, provider, kernel, prop, sink=sink)
        final = outcome.final_state

        if "real" in cfg.observables.slices:
            writer.add_array(
                "pair_real_axis_nm", au_to_nm(pair_density_slice(final, "real").coordinate)
            )
        if "momentum" in cfg.observables.slices:
            writer.add_array(
                "pair_momentum_axis_au", pair_density_slice(final, "momentum").coordinate
            )

        spec = pinem_total(final, acceptance, edges, cfg.observables.angle_bins, reference)
        writer.add_array("pinem_energies_au", spec.energies)
        writer.add_array("pinem_energies_ev", spec.energies_ev)
        writer.add_array("pinem_angles", spec.angles)
        writer.add_array("pinem_sigma", spec.sigma)
        writer.add_array("pinem_Sigma", spec.Sigma)

        wide = pinem_total(
            final, 0.5 * math.pi, WIDE_ENERGY_BINS, cfg.observables.angle_bins, reference
        )
        writer.add_array("pinem_wide_energies_au", wide.energies)
        writer.add_array("pinem_wide_Sigma", wide.Sigma)

        summary = _summarize(cfg, prop, outcome, final, spec)
        writer.set_summary(**summary)
        writer.set_timing(
            wall_seconds=outcome.wall_seconds,
            steps_per_second=(
                outcome.steps / outcome.wall_seconds if outcome.wall_seconds > 0 else None
            ),
        )
        writer.finalize()
        return ScenarioResult(
            directory=Path(output_dir), summary=summary, wall_seconds=outcome.wall_seconds
        )
    except (FloatingPointError, ValueError, ArithmeticError) as exc:
        # archive what exists so the failure can be inspected, then re-raise
        writer.set_summary(incomplete=True, error=str(exc))
        writer.finalize()
        raise


def _summarize(
    cfg: RunConfig,
    prop: PropagatorConfig,
    outcome,
    final: SystemState,
    spec: PinemSpectrum,
) -> dict:
    norms = [float(n) for n in outcome.norms[-1]]
    kinetic = [mean_kinetic_energy(w) for w in final.orbitals]
    reference = ev_to_au(cfg.electrons[0].kinetic_energy_ev)

    comb_period = None
    band = None
    visibility = None
    spacing_ev = None
    if cfg.field != "none":
        comb_period = cfg.pulse().omega
        band = (
            reference + COMB_BAND_PERIODS[0] * comb_period,
            reference + COMB_BAND_PERIODS[1] * comb_period,
        )
        try:
            visibility = fringe_visibility(spec, band, comb_period)
            spacing_ev = au_to_ev(comb_spacing(spec, band, comb_period))
        except ValueError:
            visibility = None
            spacing_ev = None

    g_abs = None
    if cfg.field == "plasmon":
        provider = _field_provider(cfg, cfg.grid_spec())
        g_abs = [
            abs(
                g_factor(
                    provider,
                    e.speed_au,
                    comb_period,
                    grid=cfg.grid_spec(),
                    y_offset=nm_to_au(e.y_nm),
                )
            )
            for e in cfg.electrons
        ]

    return {
        "spin_mode": cfg.spin_mode,
        "field": cfg.field,
        "dt_au": prop.dt,
        "steps": outcome.steps,
        "snapshots": int(outcome.times.shape[0]),
        "final_time_au": float(final.time),
        "final_time_fs": au_to_fs(final.time),
        "final_norms": norms,
        "norm_loss": max(1.0 - n for n in norms),
        "mean_kinetic_au": kinetic,
        "mean_kinetic_ev": [au_to_ev(k) for k in kinetic],
        "reference_energy_au": reference,
        "reference_energy_ev": au_to_ev(reference),
        "acceptance_rad": spec.acceptance_angle,
        "spectrum_span_ev": [
            au_to_ev(float(spec.energies[0])),
            au_to_ev(float(spec.energies[-1])),
        ],
        "comb_period_au": comb_period,
        "comb_band_au": None if band is None else [band[0], band[1]],
        "visibility": visibility,
        "comb_spacing_ev": spacing_ev,
        "g_factors_abs": g_abs,
    }


# ---------------------------------------------------------------------------
# reading runs back


VISIBILITY_RECOMPUTE_TOLERANCE = 1e-12


def _verify_visibility(box: Container, summary: Mapping[str, Any]) -> None:
    stored = summary.get("visibility")
    band = summary.get("comb_band_au")
    period = summary.get("comb_period_au")
    if stored is None or band is None or period is None:
        return
    energies = box.read("pinem_energies_au")
    angles = box.read("pinem_angles")
    reference = float(summary.get("reference_energy_au", 0.0))
    spec = PinemSpectrum(
        energies=energies,
        energies_ev=au_to_ev(energies - reference),
        angles=angles,
        sigma=box.read("pinem_sigma"),
        Sigma=box.read("pinem_Sigma"),
        acceptance_angle=float(summary.get("acceptance_rad", 0.5 * math.pi)),
        de=float(energies[1] - energies[0]),
        dphi=float(angles[1] - angles[0]) if angles.size > 1 else float(np.pi),
    )
    recomputed = fringe_visibility(spec, (band[0], band[1]), period)
    if abs(recomputed - stored) > VISIBILITY_RECOMPUTE_TOLERANCE:
        raise ScenarioError(
            f"stored visibility {stored!r} disagrees with the value recomputed "
            f"from the archived spectrum ({recomputed!r})"
        )


def describe(directory: str | Path) -> str:
    """Integrity-check an archived run and return a text report."""
    box = Container.open(directory)
    manifest = box.manifest
    # read every dataset: byte-size and shape mismatches surface here
    for name in box.dataset_names:
        box.read(name)

    summary = manifest.get("summary", {})
    _verify_visibility(box, summary)

    config = manifest.get("config") or {}
    lines = []
    title = config.get("title") or "(untitled run)"
    lines.append(f"run: {title}")
    lines.append(f"created: {manifest.get('created', '?')}  code: {manifest.get('code_version', '?')}")
    grid = manifest.get("grid")
    if grid:
        lines.append(
            f"grid: {grid['nx']} x {grid['ny']} cells, "
            f"{au_to_nm(grid['nx'] * grid['dx']):.1f} x {au_to_nm(grid['ny'] * grid['dy']):.1f} nm"
        )
    if summary.get("incomplete"):
        lines.append(f"INCOMPLETE RUN: {summary.get('error', 'unknown failure')}")
    if "field" in summary:
        lines.append(f"field: {summary['field']}  spin mode: {summary.get('spin_mode', '?')}")
    if "snapshots" in summary:
        lines.append(
            f"snapshots: {summary['snapshots']}  steps: {summary.get('steps', '?')}"
            f"  dt: {summary.get('dt_au', float('nan')):.4g} au"
        )
    elif box.snapshots:
        lines.append(f"snapshots: {len(box.snapshots)}")
    if "final_time_fs" in summary:
        lines.append(f"final time: {summary['final_time_fs']:.4f} fs")
    if "final_norms" in summary:
        norms = ", ".join(f"{n:.9f}" for n in summary["final_norms"])
        lines.append(f"final norms: {norms}  (max norm loss {summary.get('norm_loss', 0.0):.3g})")
    if "mean_kinetic_ev" in summary:
        kin = ", ".join(f"{k:.3f}" for k in summary["mean_kinetic_ev"])
        lines.append(f"mean kinetic energies: {kin} eV")
    if "spectrum_span_ev" in summary:
        lo, hi = summary["spectrum_span_ev"]
        lines.append(f"spectrum window: {lo:.2f} to {hi:.2f} eV")
    if summary.get("visibility") is not None:
        lines.append(
            f"fringe visibility: {summary['visibility']:.4f}"
            f"  comb spacing: {summary.get('comb_spacing_ev') or float('nan'):.4f} eV"
        )
    if summary.get("g_factors_abs"):
        gs = ", ".join(f"{g:.3g}" for g in summary["g_factors_abs"])
        lines.append(f"|g| coupling factors: {gs}")
    timing = manifest.get("timing") or {}
    if timing.get("wall_seconds") is not None:
        lines.append(f"wall time: {timing['wall_seconds']:.1f} s")
    lines.append(f"datasets: {len(box.dataset_names)} verified")
    return "\n".join(lines)
