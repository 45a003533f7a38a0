"""Two interacting free-electron wavepackets in two dimensions.

A pseudospectral mean-field simulator for a pair of fast electron
wavepackets that interact with each other (direct and exchange terms) and
with laser-driven near fields around a metallic nanorod, producing
orbital densities, pair-density slices, and angle-resolved energy
spectra archived in plain-file run containers.
"""

__version__ = "0.1.0"

from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    load_config,
    load_preset,
    parse_config,
    preset_dict,
    preset_names,
)
from .container import Container, ContainerError, ContainerWriter, container_fingerprint
from .coulomb import build_kernel
from .engine import PropagatorConfig, SystemState, run
from .fields import AnalyticPlasmon, DrudeMetal, IncidentLaser, LaserPulse, NanorodGeometry
from .grid import GridSpec, Wavepacket, gaussian_wavepacket
from .observables import (
    PairDensitySlice,
    PinemSpectrum,
    comb_spacing,
    fringe_visibility,
    pair_density_slice,
    pinem_spectrum,
    pinem_total,
)
from .scenario import ScenarioError, ScenarioResult, describe, run_scenario

__all__ = [
    "__version__",
    "AnalyticPlasmon",
    "ConfigError",
    "Container",
    "ContainerError",
    "ContainerWriter",
    "DrudeMetal",
    "GridSpec",
    "IncidentLaser",
    "LaserPulse",
    "NanorodGeometry",
    "PairDensitySlice",
    "PinemSpectrum",
    "PropagatorConfig",
    "RunConfig",
    "ScenarioError",
    "ScenarioResult",
    "SystemState",
    "Wavepacket",
    "apply_overrides",
    "build_kernel",
    "comb_spacing",
    "container_fingerprint",
    "describe",
    "fringe_visibility",
    "gaussian_wavepacket",
    "load_config",
    "load_preset",
    "pair_density_slice",
    "parse_config",
    "pinem_spectrum",
    "pinem_total",
    "preset_dict",
    "preset_names",
    "run",
    "run_scenario",
]
