"""Run configuration: a versioned JSON schema in lab units (nm / fs / eV).

``parse_config`` checks the document in two passes — schema (exact key
sets, types, ranges; every problem reported with its ``section.key`` path)
and physics (absorber clearance, time-step stability, momentum-grid
coverage of the phase-matched comb wavenumber).  All problems are
collected and raised together in one :class:`ConfigError`.

Shipped presets live as JSON files next to this module; they are ordinary
configuration documents and go through the same validation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping

from .constants import (
    ev_to_au,
    field_v_per_m_to_au,
    fs_to_au,
    nm_to_au,
    wavelength_nm_to_omega_au,
)
from .engine import RK4_IMAGINARY_LIMIT, SystemState, spectral_radius_bound
from .fields import DrudeMetal, LaserPulse, NanorodGeometry
from .grid import GridSpec, Wavepacket, gaussian_wavepacket, sigma_from_fwhm

__all__ = [
    "CAP_CLEARANCE_SIGMAS",
    "ConfigError",
    "CoulombConfig",
    "ElectronConfig",
    "GridConfig",
    "LaserConfig",
    "ObservablesConfig",
    "PropagationConfig",
    "RodConfig",
    "RunConfig",
    "SCHEMA_VERSION",
    "apply_overrides",
    "load_config",
    "load_preset",
    "parse_config",
    "preset_dict",
    "preset_names",
]

SCHEMA_VERSION = 1

# Each packet center must clear every absorbing band by this many amplitude
# sigmas, both at t=0 and (along x) at the ballistic final position; a
# violated clearance silently drains norm into the absorber.
CAP_CLEARANCE_SIGMAS = 4.5

# Fixed allowance for the potential terms (near field plus electron pair)
# in the time-step stability estimate; generous next to the clamped
# surface value of every shipped scenario.
STABILITY_POTENTIAL_ALLOWANCE = 0.5

_SPIN_MODES = ("polarized", "unpolarized")
_FIELD_KINDS = ("plasmon", "laser", "none")
_SLICE_SPACES = ("real", "momentum")


class ConfigError(ValueError):
    """Invalid configuration; the message lists every problem found."""


# ---------------------------------------------------------------------------
# typed views


@dataclass(frozen=True)
class GridConfig:
    nx: int
    ny: int
    lx_nm: float
    ly_nm: float
    x0_nm: float
    y0_nm: float


@dataclass(frozen=True)
class ElectronConfig:
    start_x_nm: float
    y_nm: float
    impact_parameter_nm: float | None
    fwhm_long_nm: float
    fwhm_trans_nm: float
    kinetic_energy_ev: float
    spin: int

    @property
    def speed_au(self) -> float:
        return math.sqrt(2.0 * ev_to_au(self.kinetic_energy_ev))


@dataclass(frozen=True)
class LaserConfig:
    wavelength_nm: float
    fwhm_fs: float
    peak_field_v_per_m: float
    polarization: tuple[float, float]
    t_center_fs: float


@dataclass(frozen=True)
class RodConfig:
    radius_nm: float
    center_nm: tuple[float, float]
    eps_inf: float
    omega_p_ev: float
    gamma_ev: float


@dataclass(frozen=True)
class CoulombConfig:
    transverse_width_nm: float


@dataclass(frozen=True)
class PropagationConfig:
    dt_au: float | None
    t_end_fs: float
    cap_width_nm: float | None
    cap_strength: float
    snapshot_stride: int


@dataclass(frozen=True)
class ObservablesConfig:
    acceptance_deg: float
    energy_bin_ev: float
    angle_bins: int
    energy_window_ev: float
    slices: tuple[str, ...]


@dataclass(frozen=True)
class RunConfig:
    """Validated run description plus builders for the atomic-unit objects."""

    raw: Mapping[str, Any]
    schema_version: int
    title: str
    units: str
    grid: GridConfig
    spin_mode: str
    electrons: tuple[ElectronConfig, ...]
    field: str
    laser: LaserConfig | None
    rod: RodConfig | None
    coulomb: CoulombConfig
    interaction_scale: float
    orthogonalize: bool
    propagation: PropagationConfig
    observables: ObservablesConfig
    output_dir: str | None

    def grid_spec(self) -> GridSpec:
        g = self.grid
        return GridSpec(
            nx=g.nx,
            ny=g.ny,
            dx=nm_to_au(g.lx_nm) / g.nx,
            dy=nm_to_au(g.ly_nm) / g.ny,
            x0=nm_to_au(g.x0_nm),
            y0=nm_to_au(g.y0_nm),
        )

    def pulse(self) -> LaserPulse | None:
        if self.laser is None:
            return None
        l = self.laser
        return LaserPulse.from_lab(
            wavelength_nm=l.wavelength_nm,
            fwhm_fs=l.fwhm_fs,
            peak_field_v_per_m=l.peak_field_v_per_m,
            polarization=l.polarization,
            t_center_fs=l.t_center_fs,
        )

    def metal(self) -> DrudeMetal | None:
        if self.rod is None:
            return None
        r = self.rod
        return DrudeMetal(
            eps_inf=r.eps_inf,
            omega_p=ev_to_au(r.omega_p_ev),
            gamma=ev_to_au(r.gamma_ev),
        )

    def geometry(self) -> NanorodGeometry | None:
        if self.rod is None:
            return None
        r = self.rod
        return NanorodGeometry(
            radius=nm_to_au(r.radius_nm),
            center=(nm_to_au(r.center_nm[0]), nm_to_au(r.center_nm[1])),
        )

    def wavepackets(self) -> tuple[Wavepacket, ...]:
        grid = self.grid_spec()
        return tuple(
            gaussian_wavepacket(
                grid,
                center=(nm_to_au(e.start_x_nm), nm_to_au(e.y_nm)),
                fwhm_long=nm_to_au(e.fwhm_long_nm),
                fwhm_trans=nm_to_au(e.fwhm_trans_nm),
                kinetic_energy=ev_to_au(e.kinetic_energy_ev),
                direction=(1.0, 0.0),
                spin=e.spin,
            )
            for e in self.electrons
        )

    def initial_state(self) -> SystemState:
        return SystemState(self.wavepackets(), 0.0, self.spin_mode)

    def cap_widths_au(self) -> tuple[float, float]:
        """Absorbing-band widths (x, y); zeros when absorption is off."""
        grid = self.grid_spec()
        cap = self.propagation.cap_width_nm
        if self.propagation.cap_strength == 0.0 or (cap is not None and cap == 0.0):
            return (0.0, 0.0)
        if cap is None:
            return (0.1 * grid.lx, 0.1 * grid.ly)
        return (nm_to_au(cap), nm_to_au(cap))


# ---------------------------------------------------------------------------
# schema pass


class _Problems:
    def __init__(self) -> None:
        self.items: list[str] = []

    def add(self, path: str, message: str) -> None:
        self.items.append(f"{path}: {message}")

    def raise_if_any(self) -> None:
        if self.items:
            raise ConfigError("; ".join(self.items))


def _require_mapping(data: Any, path: str, problems: _Problems) -> dict | None:
    if not isinstance(data, Mapping):
        problems.add(path, f"expected an object, got {type(data).__name__}")
        return None
    return dict(data)


def _check_keys(data: dict, path: str, required: set, optional: set, problems: _Problems) -> bool:
    ok = True
    for key in sorted(required - data.keys()):
        problems.add(f"{path}.{key}" if path else key, "missing required key")
        ok = False
    for key in sorted(data.keys() - required - optional):
        problems.add(f"{path}.{key}" if path else key, "unknown key")
        ok = False
    return ok


def _number(
    data: dict,
    path: str,
    key: str,
    problems: _Problems,
    *,
    positive: bool = False,
    nonnegative: bool = False,
    integer: bool = False,
    even: bool = False,
    minimum: float | None = None,
    maximum: float | None = None,
    allow_none: bool = False,
    default: Any = ...,
) -> Any:
    where = f"{path}.{key}" if path else key
    if key not in data:
        if default is not ...:
            return default
        return None  # missing-key problem already recorded by _check_keys
    value = data[key]
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.add(where, f"expected a number, got {value!r}")
        return None
    if integer and not float(value).is_integer():
        problems.add(where, f"expected an integer, got {value!r}")
        return None
    value = int(value) if integer else float(value)
    if not math.isfinite(value):
        problems.add(where, "must be finite")
        return None
    if positive and not value > 0:
        problems.add(where, f"must be > 0, got {value}")
        return None
    if nonnegative and value < 0:
        problems.add(where, f"must be >= 0, got {value}")
        return None
    if even and value % 2 != 0:
        problems.add(where, f"must be even, got {value}")
        return None
    if minimum is not None and value < minimum:
        problems.add(where, f"must be >= {minimum}, got {value}")
        return None
    if maximum is not None and value > maximum:
        problems.add(where, f"must be <= {maximum}, got {value}")
        return None
    return value


def _pair(data: dict, path: str, key: str, problems: _Problems) -> tuple[float, float] | None:
    where = f"{path}.{key}" if path else key
    value = data.get(key)
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        problems.add(where, f"expected a pair of numbers, got {value!r}")
        return None
    return (float(value[0]), float(value[1]))


def _parse_grid(data: Any, problems: _Problems) -> GridConfig | None:
    section = _require_mapping(data, "grid", problems)
    if section is None:
        return None
    _check_keys(section, "grid", {"nx", "ny", "lx_nm", "ly_nm", "x0_nm", "y0_nm"}, set(), problems)
    nx = _number(section, "grid", "nx", problems, integer=True, even=True, minimum=8)
    ny = _number(section, "grid", "ny", problems, integer=True, even=True, minimum=8)
    lx = _number(section, "grid", "lx_nm", problems, positive=True)
    ly = _number(section, "grid", "ly_nm", problems, positive=True)
    x0 = _number(section, "grid", "x0_nm", problems)
    y0 = _number(section, "grid", "y0_nm", problems)
    if None in (nx, ny, lx, ly, x0, y0):
        return None
    return GridConfig(nx=nx, ny=ny, lx_nm=lx, ly_nm=ly, x0_nm=x0, y0_nm=y0)


def _parse_electron(
    data: Any, index: int, rod: RodConfig | None, problems: _Problems
) -> ElectronConfig | None:
    path = f"electrons[{index}]"
    section = _require_mapping(data, path, problems)
    if section is None:
        return None
    _check_keys(
        section,
        path,
        {"start_x_nm", "fwhm_long_nm", "fwhm_trans_nm", "kinetic_energy_ev", "spin"},
        {"y_nm", "impact_parameter_nm"},
        problems,
    )
    start_x = _number(section, path, "start_x_nm", problems)
    fwhm_long = _number(section, path, "fwhm_long_nm", problems, positive=True)
    fwhm_trans = _number(section, path, "fwhm_trans_nm", problems, positive=True)
    energy = _number(section, path, "kinetic_energy_ev", problems, positive=True)
    spin = _number(section, path, "spin", problems, integer=True)
    if spin is not None and spin not in (1, -1):
        problems.add(f"{path}.spin", f"must be +1 or -1, got {spin}")
        spin = None

    # an explicit null counts as "not given" so overrides can switch between
    # the two transverse-position representations
    has_y = section.get("y_nm") is not None
    has_d = section.get("impact_parameter_nm") is not None
    y_nm: float | None = None
    impact: float | None = None
    if has_y == has_d:
        problems.add(path, "give exactly one of y_nm or impact_parameter_nm")
    elif has_y:
        y_nm = _number(section, path, "y_nm", problems)
    else:
        impact = _number(section, path, "impact_parameter_nm", problems, positive=True)
        if impact is not None:
            if rod is None:
                problems.add(
                    f"{path}.impact_parameter_nm",
                    "needs a rod to measure the surface distance from",
                )
            else:
                y_nm = rod.center_nm[1] + rod.radius_nm + impact

    if None in (start_x, fwhm_long, fwhm_trans, energy, spin) or y_nm is None:
        return None
    return ElectronConfig(
        start_x_nm=start_x,
        y_nm=y_nm,
        impact_parameter_nm=impact,
        fwhm_long_nm=fwhm_long,
        fwhm_trans_nm=fwhm_trans,
        kinetic_energy_ev=energy,
        spin=spin,
    )


def _parse_laser(data: Any, problems: _Problems) -> LaserConfig | None:
    if data is None:
        return None
    section = _require_mapping(data, "laser", problems)
    if section is None:
        return None
    _check_keys(
        section,
        "laser",
        {"wavelength_nm", "fwhm_fs", "peak_field_v_per_m", "polarization", "t_center_fs"},
        set(),
        problems,
    )
    wavelength = _number(section, "laser", "wavelength_nm", problems, positive=True)
    fwhm = _number(section, "laser", "fwhm_fs", problems, positive=True)
    peak = _number(section, "laser", "peak_field_v_per_m", problems, nonnegative=True)
    pol = _pair(section, "laser", "polarization", problems)
    t_center = _number(section, "laser", "t_center_fs", problems)
    if None in (wavelength, fwhm, peak, pol, t_center):
        return None
    if math.hypot(*pol) == 0.0:
        problems.add("laser.polarization", "must not be the zero vector")
        return None
    return LaserConfig(
        wavelength_nm=wavelength,
        fwhm_fs=fwhm,
        peak_field_v_per_m=peak,
        polarization=pol,
        t_center_fs=t_center,
    )


def _parse_rod(data: Any, problems: _Problems) -> RodConfig | None:
    if data is None:
        return None
    section = _require_mapping(data, "rod", problems)
    if section is None:
        return None
    _check_keys(
        section,
        "rod",
        {"radius_nm", "center_nm", "eps_inf", "omega_p_ev", "gamma_ev"},
        set(),
        problems,
    )
    radius = _number(section, "rod", "radius_nm", problems, positive=True)
    center = _pair(section, "rod", "center_nm", problems)
    eps_inf = _number(section, "rod", "eps_inf", problems, positive=True)
    omega_p = _number(section, "rod", "omega_p_ev", problems, positive=True)
    gamma = _number(section, "rod", "gamma_ev", problems, nonnegative=True)
    if None in (radius, center, eps_inf, omega_p, gamma):
        return None
    return RodConfig(
        radius_nm=radius, center_nm=center, eps_inf=eps_inf, omega_p_ev=omega_p, gamma_ev=gamma
    )


def _parse_propagation(data: Any, problems: _Problems) -> PropagationConfig | None:
    section = _require_mapping(data, "propagation", problems)
    if section is None:
        return None
    _check_keys(
        section,
        "propagation",
        {"dt_au", "t_end_fs", "cap_width_nm", "cap_strength", "snapshot_stride"},
        set(),
        problems,
    )
    dt = _number(section, "propagation", "dt_au", problems, positive=True, allow_none=True)
    t_end = _number(section, "propagation", "t_end_fs", problems, positive=True)
    cap_width = _number(
        section, "propagation", "cap_width_nm", problems, nonnegative=True, allow_none=True
    )
    cap_strength = _number(section, "propagation", "cap_strength", problems, nonnegative=True)
    stride = _number(section, "propagation", "snapshot_stride", problems, integer=True, minimum=1)
    if t_end is None or cap_strength is None or stride is None:
        return None
    return PropagationConfig(
        dt_au=dt,
        t_end_fs=t_end,
        cap_width_nm=cap_width,
        cap_strength=cap_strength,
        snapshot_stride=stride,
    )


def _parse_observables(data: Any, problems: _Problems) -> ObservablesConfig | None:
    section = _require_mapping(data, "observables", problems)
    if section is None:
        return None
    _check_keys(
        section,
        "observables",
        {"acceptance_deg", "energy_bin_ev", "angle_bins", "energy_window_ev", "slices"},
        set(),
        problems,
    )
    acceptance = _number(
        section, "observables", "acceptance_deg", problems, positive=True, maximum=90.0
    )
    bin_ev = _number(section, "observables", "energy_bin_ev", problems, positive=True)
    angle_bins = _number(section, "observables", "angle_bins", problems, integer=True, minimum=2)
    window = _number(section, "observables", "energy_window_ev", problems, positive=True)
    slices = section.get("slices")
    spaces: tuple[str, ...] | None
    if not isinstance(slices, (list, tuple)) or any(s not in _SLICE_SPACES for s in slices):
        problems.add(
            "observables.slices",
            f"expected a list drawn from {list(_SLICE_SPACES)}, got {slices!r}",
        )
        spaces = None
    else:
        spaces = tuple(dict.fromkeys(slices))
    if None in (acceptance, bin_ev, angle_bins, window) or spaces is None:
        return None
    return ObservablesConfig(
        acceptance_deg=acceptance,
        energy_bin_ev=bin_ev,
        angle_bins=angle_bins,
        energy_window_ev=window,
        slices=spaces,
    )


# ---------------------------------------------------------------------------
# physics pass


def _validate_physics(cfg: RunConfig, problems: _Problems) -> None:
    grid = cfg.grid_spec()
    cap_x, cap_y = cfg.cap_widths_au()

    for i, e in enumerate(cfg.electrons):
        path = f"electrons[{i}]"
        sigma_ax = math.sqrt(2.0) * sigma_from_fwhm(nm_to_au(e.fwhm_long_nm))
        sigma_ay = math.sqrt(2.0) * sigma_from_fwhm(nm_to_au(e.fwhm_trans_nm))
        clear_x = CAP_CLEARANCE_SIGMAS * sigma_ax
        clear_y = CAP_CLEARANCE_SIGMAS * sigma_ay
        x = nm_to_au(e.start_x_nm)
        y = nm_to_au(e.y_nm)
        if cap_x > 0.0:
            lo = grid.x0 + cap_x + clear_x
            hi = grid.x0 + grid.lx - cap_x - clear_x
            if not lo <= x <= hi:
                problems.add(
                    path,
                    f"start_x_nm = {e.start_x_nm} is within {CAP_CLEARANCE_SIGMAS} amplitude "
                    "sigmas of an absorbing band",
                )
            x_final = x + e.speed_au * fs_to_au(cfg.propagation.t_end_fs)
            if x_final > hi:
                problems.add(
                    path,
                    "the packet would reach the right absorbing band before t_end "
                    f"(ballistic final x = {x_final / nm_to_au(1.0):.1f} nm)",
                )
        if cap_y > 0.0:
            lo = grid.y0 + cap_y + clear_y
            hi = grid.y0 + grid.ly - cap_y - clear_y
            if not lo <= y <= hi:
                problems.add(
                    path,
                    f"y_nm = {e.y_nm} is within {CAP_CLEARANCE_SIGMAS} amplitude sigmas "
                    "of an absorbing band",
                )

    if cfg.field != "none":
        omega = wavelength_nm_to_omega_au(cfg.laser.wavelength_nm)
        kx_max = math.pi / grid.dx
        for i, e in enumerate(cfg.electrons):
            k_mod = omega / e.speed_au
            if k_mod > kx_max:
                problems.add(
                    f"electrons[{i}]",
                    f"phase-matched wavenumber omega/v = {k_mod:.4g} a.u. exceeds the "
                    f"grid's x momentum range (max {kx_max:.4g})",
                )

    if "momentum" in cfg.observables.slices:
        # the momentum pair slice folds both carriers onto a common grid;
        # each may sit at most half the momentum range from their mean
        half_offset = 0.5 * abs(cfg.electrons[0].speed_au - cfg.electrons[1].speed_au)
        kx_max = math.pi / grid.dx
        if half_offset >= kx_max:
            problems.add(
                "observables.slices",
                "the momentum pair slice cannot fold the carrier detuning "
                f"(half offset {half_offset:.4g} a.u.) onto the grid's x momentum "
                f"range (max {kx_max:.4g}); refine dx or drop the slice",
            )

    try:
        state = cfg.initial_state()
    except ValueError as exc:
        problems.add("electrons", str(exc))
        return

    if cfg.propagation.dt_au is not None:
        a_max = 0.0
        if cfg.field != "none":
            pulse = cfg.pulse()
            a_max = pulse.peak_field / pulse.omega if pulse.omega > 0 else 0.0
        bound = spectral_radius_bound(state, a_max, STABILITY_POTENTIAL_ALLOWANCE)
        dt_max = RK4_IMAGINARY_LIMIT / bound
        if cfg.propagation.dt_au > dt_max:
            problems.add(
                "propagation.dt_au",
                f"{cfg.propagation.dt_au} violates the RK4 stability bound "
                f"(limit {dt_max:.4g} a.u. for this grid and field)",
            )


# ---------------------------------------------------------------------------
# entry points


def parse_config(data: Mapping[str, Any], name: str = "config") -> RunConfig:
    """Validate a configuration document and return its typed view."""
    problems = _Problems()
    document = _require_mapping(data, name, problems)
    problems.raise_if_any()

    _check_keys(
        document,
        "",
        {
            "schema_version",
            "units",
            "grid",
            "spin_mode",
            "electrons",
            "field",
            "coulomb",
            "propagation",
            "observables",
        },
        {"title", "laser", "rod", "interaction_scale", "orthogonalize", "output_dir"},
        problems,
    )

    version = _number(document, "", "schema_version", problems, integer=True)
    if version is not None and version != SCHEMA_VERSION:
        problems.add("schema_version", f"unsupported version {version}, expected {SCHEMA_VERSION}")

    units = document.get("units")
    if "units" in document and units != "lab":
        problems.add("units", f"unknown unit system {units!r}, expected 'lab' (nm / fs / eV)")

    title = document.get("title", "")
    if not isinstance(title, str):
        problems.add("title", f"expected a string, got {title!r}")
        title = ""

    spin_mode = document.get("spin_mode")
    if "spin_mode" in document and spin_mode not in _SPIN_MODES:
        problems.add("spin_mode", f"expected one of {list(_SPIN_MODES)}, got {spin_mode!r}")
        spin_mode = None

    field_kind = document.get("field")
    if "field" in document and field_kind not in _FIELD_KINDS:
        problems.add("field", f"expected one of {list(_FIELD_KINDS)}, got {field_kind!r}")
        field_kind = None

    grid = _parse_grid(document.get("grid"), problems) if "grid" in document else None
    laser = _parse_laser(document.get("laser"), problems)
    rod = _parse_rod(document.get("rod"), problems)

    electrons: tuple[ElectronConfig, ...] = ()
    if "electrons" in document:
        entries = document["electrons"]
        if not isinstance(entries, (list, tuple)) or len(entries) != 2:
            problems.add("electrons", "expected exactly 2 entries")
        else:
            parsed = [_parse_electron(e, i, rod, problems) for i, e in enumerate(entries)]
            if all(p is not None for p in parsed):
                electrons = tuple(parsed)

    if field_kind == "plasmon":
        if laser is None:
            problems.add("laser", "required when field is 'plasmon'")
        if rod is None:
            problems.add("rod", "required when field is 'plasmon'")
    elif field_kind == "laser" and laser is None:
        problems.add("laser", "required when field is 'laser'")

    if spin_mode == "unpolarized" and electrons:
        if sorted(e.spin for e in electrons) != [-1, 1]:
            problems.add("spin_mode", "an unpolarized pair must carry opposite spins")
    if spin_mode == "polarized" and electrons:
        if len({e.spin for e in electrons}) != 1:
            problems.add("spin_mode", "a polarized pair must carry equal spins")

    coulomb: CoulombConfig | None = None
    if "coulomb" in document:
        section = _require_mapping(document["coulomb"], "coulomb", problems)
        if section is not None:
            _check_keys(section, "coulomb", {"transverse_width_nm"}, set(), problems)
            width = _number(section, "coulomb", "transverse_width_nm", problems, nonnegative=True)
            if width is not None:
                coulomb = CoulombConfig(transverse_width_nm=width)

    scale = _number(document, "", "interaction_scale", problems, nonnegative=True, default=1.0)

    orthogonalize = document.get("orthogonalize", False)
    if not isinstance(orthogonalize, bool):
        problems.add("orthogonalize", f"expected true or false, got {orthogonalize!r}")
        orthogonalize = False

    output_dir = document.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        problems.add("output_dir", f"expected a string or null, got {output_dir!r}")
        output_dir = None

    propagation = (
        _parse_propagation(document.get("propagation"), problems)
        if "propagation" in document
        else None
    )
    observables = (
        _parse_observables(document.get("observables"), problems)
        if "observables" in document
        else None
    )

    problems.raise_if_any()
    assert grid and electrons and propagation and observables and coulomb and scale is not None

    cfg = RunConfig(
        raw=dict(data),
        schema_version=version,
        title=title,
        units="lab",
        grid=grid,
        spin_mode=spin_mode,
        electrons=electrons,
        field=field_kind,
        laser=laser,
        rod=rod,
        coulomb=coulomb,
        interaction_scale=scale,
        orthogonalize=orthogonalize,
        propagation=propagation,
        observables=observables,
        output_dir=output_dir,
    )
    _validate_physics(cfg, problems)
    problems.raise_if_any()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(data, name=str(path))


def apply_overrides(data: Mapping[str, Any], overrides: Iterable[str]) -> dict:
    """Apply ``dotted.path=json_value`` overrides to a copy of ``data``."""
    out = json.loads(json.dumps(dict(data)))
    for text in overrides:
        key_path, sep, raw_value = str(text).partition("=")
        key_path = key_path.strip()
        if not sep or not key_path:
            raise ConfigError(f"override {text!r}: expected key.path=value")
        try:
            value = json.loads(raw_value)
        except ValueError:
            value = raw_value  # bare strings stay strings
        keys = key_path.split(".")
        node: Any = out
        for depth, key in enumerate(keys):
            last = depth == len(keys) - 1
            if isinstance(node, list):
                try:
                    index = int(key)
                    node[index]
                except (ValueError, IndexError):
                    raise ConfigError(
                        f"override {text!r}: {'.'.join(keys[: depth + 1])} is not a valid "
                        "list index"
                    ) from None
                if last:
                    node[index] = value
                else:
                    node = node[index]
            elif isinstance(node, dict):
                if last:
                    # adding a final key is allowed; schema validation still
                    # rejects keys the configuration does not know
                    node[key] = value
                elif key not in node:
                    raise ConfigError(
                        f"override {text!r}: unknown key {'.'.join(keys[: depth + 1])!r}"
                    )
                else:
                    node = node[key]
            else:
                raise ConfigError(
                    f"override {text!r}: {'.'.join(keys[:depth])!r} is not a container"
                )
    return out


# ---------------------------------------------------------------------------
# presets


def _preset_root():
    return resources.files("tdhf2d").joinpath("presets")


def preset_names() -> tuple[str, ...]:
    """Names of the shipped scenario presets."""
    return tuple(
        sorted(
            entry.name[: -len(".json")]
            for entry in _preset_root().iterdir()
            if entry.name.endswith(".json")
        )
    )


def preset_dict(name: str) -> dict:
    """The raw configuration document of one preset (a fresh copy)."""
    entry = _preset_root().joinpath(f"{name}.json")
    if not entry.is_file():
        known = ", ".join(preset_names())
        raise ConfigError(f"unknown preset {name!r}; available: {known}")
    return json.loads(entry.read_text(encoding="utf-8"))


def load_preset(name: str) -> RunConfig:
    """Parse and validate one shipped preset."""
    return parse_config(preset_dict(name), name=f"preset {name}")
