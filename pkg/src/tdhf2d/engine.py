"""Propagation of coupled envelope orbitals on the spectral grid.

Each orbital evolves in its own carrier frame.  The right-hand side of the
envelope equation of motion combines, in atomic units,

    d(psi_n)/dt = -i [ (|k|^2/2 + k_n . k) psi_n            (kinetic, in k-space)
                       + A . (k + k_n) psi_n                 (gauge coupling)
                       + (sum_{m != n} v_H[m] - phi) psi_n   (local potentials)
                       + sum_{m != n, s_m = s_n} v_x[n,m] psi_m ]  (exchange)

where v_H is the screened mean-field potential of the partner density and
v_x the nonlocal exchange factor with the carrier-offset phase attached.
Time stepping is classical fourth-order Runge-Kutta with the drive sampled
at the stage times, followed by a multiplicative absorbing mask near the
domain edges (negative-imaginary quartic-ramp potential, integrated
exactly over the step).
"""

from __future__ import annotations

import time as _walltime
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .coulomb import ScreenedKernel, hartree_potential, pair_exchange_energy, pair_hartree_energy, phase_dressed_convolve
from .fields import FieldProvider, FieldSample
from .grid import GridSpec, Wavepacket, inner_product, mean_kinetic_energy, mean_momentum, norm

SPIN_POLARIZED = "polarized"
SPIN_UNPOLARIZED = "unpolarized"

# RK4 remains stable for purely imaginary eigenvalues up to |lambda dt| = 2 sqrt(2)
RK4_IMAGINARY_LIMIT = 2.0 * np.sqrt(2.0)
# two orbitals whose normalized overlap exceeds this are rejected as one state
PARALLEL_OVERLAP_LIMIT = 1.0 - 1e-9


@dataclass(frozen=True)
class SystemState:
    """Orbitals sharing one grid, a simulation clock, and the spin mode."""

    orbitals: tuple[Wavepacket, ...]
    time: float
    spin_mode: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "orbitals", tuple(self.orbitals))
        if not self.orbitals:
            raise ValueError("state needs at least one orbital")
        grid = self.orbitals[0].grid
        if any(w.grid != grid for w in self.orbitals):
            raise ValueError("orbitals live on different grids")
        if self.spin_mode not in (SPIN_POLARIZED, SPIN_UNPOLARIZED):
            raise ValueError(
                f"spin_mode must be '{SPIN_POLARIZED}' or '{SPIN_UNPOLARIZED}', got {self.spin_mode!r}"
            )
        spins = [w.spin for w in self.orbitals]
        if self.spin_mode == SPIN_POLARIZED:
            if len(set(spins)) != 1:
                raise ValueError("polarized mode requires all spins equal")
            self._reject_parallel_pairs()
        else:
            if len(self.orbitals) != 2:
                raise ValueError("unpolarized mode is defined for exactly two orbitals")
            if spins[0] == spins[1]:
                raise ValueError("unpolarized mode requires opposite spins")

    def _reject_parallel_pairs(self) -> None:
        # same-spin orbitals must stay linearly independent (antisymmetry
        # leaves no two-electron state otherwise)
        for i in range(len(self.orbitals)):
            for j in range(i + 1, len(self.orbitals)):
                a, b = self.orbitals[i], self.orbitals[j]
                na, nb = norm(a), norm(b)
                if na == 0.0 or nb == 0.0:
                    continue
                overlap = abs(inner_product(a, b)) / (na * nb)
                if overlap > PARALLEL_OVERLAP_LIMIT:
                    raise ValueError(
                        f"same-spin orbitals {i} and {j} are (nearly) identical: "
                        f"normalized overlap {overlap:.12f}"
                    )

    @property
    def grid(self) -> GridSpec:
        return self.orbitals[0].grid

    def with_envelopes(self, envelopes: Sequence[np.ndarray], time: float | None = None) -> "SystemState":
        if len(envelopes) != len(self.orbitals):
            raise ValueError("envelope count does not match orbital count")
        new_orbitals = tuple(w.with_envelope(e) for w, e in zip(self.orbitals, envelopes))
        return replace(self, orbitals=new_orbitals, time=self.time if time is None else time)


@dataclass(frozen=True)
class PropagatorConfig:
    """Time stepping, absorbing boundary, and test-hook switches.

    ``cap_width`` of None means 10% of the domain length per side on each
    axis; 0 disables absorption.  The last three flags exist for test
    harnesses only: they disable the kinetic terms, scale the
    electron-electron interaction, or delete the exchange code path.
    """

    dt: float
    t_end: float
    cap_width: float | None = None
    cap_strength: float = 0.1
    snapshot_stride: int = 1
    convergence_dt_factor: float = 2.0
    kinetic_enabled: bool = True
    exchange_enabled: bool = True
    interaction_scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.cap_width is not None and self.cap_width < 0.0:
            raise ValueError(f"cap_width must be >= 0, got {self.cap_width}")
        if self.cap_strength < 0.0:
            raise ValueError(f"cap_strength must be >= 0, got {self.cap_strength}")
        if self.snapshot_stride < 1:
            raise ValueError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")
        if not self.convergence_dt_factor > 1.0:
            raise ValueError("convergence_dt_factor must be > 1")
        if not (0.0 <= self.interaction_scale):
            raise ValueError("interaction_scale must be >= 0")


def spectral_radius_bound(
    state: SystemState, a_max: float = 0.0, potential_scale: float = 0.0
) -> float:
    """Upper bound on |lambda| over the spectral modes of the linearized flow."""
    grid = state.grid
    k_max = grid.k_max
    carrier_max = max(w.carrier_speed for w in state.orbitals)
    return (
        0.5 * k_max**2
        + carrier_max * k_max
        + a_max * (carrier_max + k_max)
        + potential_scale
    )


def auto_timestep(
    state: SystemState,
    a_max: float = 0.0,
    potential_scale: float = 0.0,
    safety: float = 0.5,
) -> float:
    """Largest time step keeping RK4 inside its imaginary-axis stability region."""
    if not 0.0 < safety <= 1.0:
        raise ValueError("safety must lie in (0, 1]")
    return safety * RK4_IMAGINARY_LIMIT / spectral_radius_bound(state, a_max, potential_scale)


@lru_cache(maxsize=16)
def _cap_profile(grid: GridSpec, width_x: float, width_y: float) -> np.ndarray:
    """Quartic absorption ramp, 0 in the interior, 1 at each domain edge."""
    x = grid.x
    y = grid.y
    profile_x = np.zeros_like(x)
    if width_x > 0.0:
        left = np.clip(1.0 - (x - grid.x0) / width_x, 0.0, 1.0)
        right = np.clip(1.0 - (grid.x0 + grid.lx - x) / width_x, 0.0, 1.0)
        profile_x = left**4 + right**4
    profile_y = np.zeros_like(y)
    if width_y > 0.0:
        bottom = np.clip(1.0 - (y - grid.y0) / width_y, 0.0, 1.0)
        top = np.clip(1.0 - (grid.y0 + grid.ly - y) / width_y, 0.0, 1.0)
        profile_y = bottom**4 + top**4
    profile = profile_y[:, None] + profile_x[None, :]
    profile.setflags(write=False)
    return profile


def absorbing_mask(grid: GridSpec, config: PropagatorConfig, dt: float) -> np.ndarray | None:
    """exp(-dt W(r)) for the quartic-ramp absorber; None when absorption is off."""
    if config.cap_strength == 0.0 or config.cap_width == 0.0:
        return None
    if config.cap_width is None:
        width_x, width_y = 0.1 * grid.lx, 0.1 * grid.ly
    else:
        width_x = width_y = float(config.cap_width)
    profile = _cap_profile(grid, width_x, width_y)
    return np.exp(-dt * config.cap_strength * profile)


def _uniform_components(sample: FieldSample | None) -> tuple[float, float] | None:
    """(Ax, Ay) when the vector potential is spatially uniform, else None."""
    if sample is None:
        return (0.0, 0.0)
    ax, ay = sample.ax, sample.ay
    if np.ptp(ax) == 0.0 and np.ptp(ay) == 0.0:
        return (float(ax.flat[0]), float(ay.flat[0]))
    return None


def _rhs_envelopes(
    envelopes: Sequence[np.ndarray],
    carriers: Sequence[np.ndarray],
    spins: Sequence[int],
    grid: GridSpec,
    sample: FieldSample | None,
    kernel: ScreenedKernel | None,
    config: PropagatorConfig,
) -> list[np.ndarray]:
    kx, ky = grid.k_mesh
    k2 = grid.k_squared_mesh
    count = len(envelopes)
    uniform_a = _uniform_components(sample)

    interacting = kernel is not None and config.interaction_scale != 0.0 and count > 1
    hartree_of = []
    if interacting:
        hartree_of = [
            config.interaction_scale * hartree_potential(kernel, np.abs(env) ** 2)
            for env in envelopes
        ]

    out: list[np.ndarray] = []
    for n in range(count):
        env = envelopes[n]
        knx, kny = float(carriers[n][0]), float(carriers[n][1])
        spectrum = np.fft.fft2(env)

        multiplier = None
        if config.kinetic_enabled:
            multiplier = 0.5 * k2 + knx * kx + kny * ky
        if uniform_a is not None and (uniform_a[0] != 0.0 or uniform_a[1] != 0.0):
            gauge = uniform_a[0] * (kx + knx) + uniform_a[1] * (ky + kny)
            multiplier = gauge if multiplier is None else multiplier + gauge

        ham = (
            np.fft.ifft2(multiplier * spectrum)
            if multiplier is not None
            else np.zeros_like(env)
        )
        if uniform_a is None:
            # spatially varying vector potential: A . (grad + i k_n) psi
            grad_x = np.fft.ifft2(1j * kx * spectrum)
            grad_y = np.fft.ifft2(1j * ky * spectrum)
            ham = ham + sample.ax * (grad_x + 1j * knx * env)
            ham = ham + sample.ay * (grad_y + 1j * kny * env)

        local = None
        if interacting:
            for m in range(count):
                if m != n:
                    local = hartree_of[m] if local is None else local + hartree_of[m]
        if sample is not None and sample.phi is not None:
            local = -sample.phi if local is None else local - sample.phi
        if local is not None:
            ham = ham + local * env

        if interacting and config.exchange_enabled:
            for m in range(count):
                if m == n or spins[m] != spins[n]:
                    continue
                delta_k = carriers[m] - carriers[n]
                overlap = np.conj(envelopes[m]) * env
                v_x = -phase_dressed_convolve(kernel, overlap, delta_k)
                ham = ham + (config.interaction_scale * v_x) * envelopes[m]

        out.append(-1j * ham)
    return out


def rhs(
    state: SystemState,
    sample: FieldSample | None,
    kernel: ScreenedKernel | None,
    config: PropagatorConfig | None = None,
) -> list[np.ndarray]:
    """Time derivative of every orbital envelope at the sampled drive."""
    if config is None:
        config = PropagatorConfig(dt=1.0, t_end=1.0)
    if kernel is not None and kernel.grid != state.grid:
        raise ValueError("kernel grid does not match the state grid")
    return _rhs_envelopes(
        [w.envelope for w in state.orbitals],
        [w.carrier for w in state.orbitals],
        [w.spin for w in state.orbitals],
        state.grid,
        sample,
        kernel,
        config,
    )


def _check_stability(state: SystemState, dt: float) -> None:
    bound = RK4_IMAGINARY_LIMIT / spectral_radius_bound(state)
    if dt > bound:
        raise ValueError(
            f"stability bound violated: dt = {dt:.6g} exceeds the spectral-mode "
            f"limit {bound:.6g} for this grid and carrier"
        )


def _advance(
    state: SystemState,
    provider: FieldProvider | None,
    kernel: ScreenedKernel | None,
    config: PropagatorConfig,
    dt: float,
    mask: np.ndarray | None,
) -> SystemState:
    grid = state.grid
    t = state.time
    if provider is not None:
        s0 = provider.sample(t, grid)
        s_mid = provider.sample(t + 0.5 * dt, grid)
        s1 = provider.sample(t + dt, grid)
    else:
        s0 = s_mid = s1 = None

    carriers = [w.carrier for w in state.orbitals]
    spins = [w.spin for w in state.orbitals]
    y0 = [w.envelope for w in state.orbitals]

    def f(envelopes: list[np.ndarray], sample: FieldSample | None) -> list[np.ndarray]:
        return _rhs_envelopes(envelopes, carriers, spins, grid, sample, kernel, config)

    k1 = f(y0, s0)
    k2 = f([y + 0.5 * dt * k for y, k in zip(y0, k1)], s_mid)
    k3 = f([y + 0.5 * dt * k for y, k in zip(y0, k2)], s_mid)
    k4 = f([y + dt * k for y, k in zip(y0, k3)], s1)

    new_envelopes = []
    for y, a, b, c, d in zip(y0, k1, k2, k3, k4):
        env = y + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        if mask is not None:
            env = env * mask
        if not np.all(np.isfinite(env)):
            raise FloatingPointError(
                "non-finite orbital envelope after a step (instability)"
            )
        new_envelopes.append(env)
    return state.with_envelopes(new_envelopes, time=t + dt)


def step(
    state: SystemState,
    provider: FieldProvider | None,
    kernel: ScreenedKernel | None,
    config: PropagatorConfig,
    mask: np.ndarray | None = None,
) -> SystemState:
    """One RK4 step of length config.dt followed by edge absorption."""
    _check_stability(state, config.dt)
    if mask is None:
        mask = absorbing_mask(state.grid, config, config.dt)
    return _advance(state, provider, kernel, config, config.dt, mask)


@dataclass(frozen=True)
class RunSummary:
    """Propagation record: final state, per-snapshot norms, and timings."""

    final_state: SystemState
    times: np.ndarray
    norms: np.ndarray  # shape (snapshots, orbitals)
    steps: int
    wall_seconds: float


def run(
    initial: SystemState,
    provider: FieldProvider | None,
    kernel: ScreenedKernel | None,
    config: PropagatorConfig,
    sink: Callable[[SystemState, int], None] | None = None,
) -> RunSummary:
    """Advance to config.t_end, emitting snapshots every snapshot_stride steps.

    The initial state is always emitted as snapshot 0 and the final state is
    always emitted last; the final step is shortened when the remaining time
    is less than dt.
    """
    if config.t_end < initial.time:
        raise ValueError(
            f"t_end = {config.t_end} lies before the initial time {initial.time}"
        )
    _check_stability(initial, config.dt)
    started = _walltime.perf_counter()
    grid = initial.grid

    times = [initial.time]
    norms = [[norm(w) for w in initial.orbitals]]
    emitted = 0
    if sink is not None:
        sink(initial, emitted)
    emitted += 1

    state = initial
    mask = absorbing_mask(grid, config, config.dt)
    mask_dt = config.dt
    steps = 0
    time_scale = max(1.0, abs(config.t_end))
    while config.t_end - state.time > 1e-12 * time_scale:
        dt = min(config.dt, config.t_end - state.time)
        if dt != mask_dt:
            mask = absorbing_mask(grid, config, dt)
            mask_dt = dt
        state = _advance(state, provider, kernel, config, dt, mask)
        steps += 1
        at_end = config.t_end - state.time <= 1e-12 * time_scale
        if steps % config.snapshot_stride == 0 or at_end:
            times.append(state.time)
            norms.append([norm(w) for w in state.orbitals])
            if sink is not None:
                sink(state, emitted)
            emitted += 1

    return RunSummary(
        final_state=state,
        times=np.asarray(times),
        norms=np.asarray(norms),
        steps=steps,
        wall_seconds=_walltime.perf_counter() - started,
    )


def hartree_fock_energy(state: SystemState, kernel: ScreenedKernel | None) -> float:
    """Total mean-field energy: kinetic + pair Hartree - same-spin pair exchange."""
    total = sum(mean_kinetic_energy(w) for w in state.orbitals)
    if kernel is None:
        return float(total)
    count = len(state.orbitals)
    for i in range(count):
        for j in range(i + 1, count):
            a, b = state.orbitals[i], state.orbitals[j]
            total += pair_hartree_energy(
                kernel, np.abs(a.envelope) ** 2, np.abs(b.envelope) ** 2
            )
            if a.spin == b.spin:
                total -= pair_exchange_energy(kernel, a, b)
    return float(total)


def total_momentum(state: SystemState) -> np.ndarray:
    """Sum of per-orbital momentum expectations (carriers included)."""
    return np.sum([mean_momentum(w) for w in state.orbitals], axis=0)
