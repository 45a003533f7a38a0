"""Contract tests for the scenario layer: configured runs to archived containers."""

import copy
import json
import math
import shutil

import numpy as np
import pytest

from tdhf2d.config import parse_config
from tdhf2d.constants import (
    au_to_ev,
    au_to_nm,
    ev_to_au,
    fs_to_au,
    nm_to_au,
    wavelength_nm_to_omega_au,
)
from tdhf2d.container import (
    Container,
    ContainerError,
    ContainerWriter,
    container_fingerprint,
)
from tdhf2d.observables import PinemSpectrum, fringe_visibility
from tdhf2d.scenario import ScenarioError, describe, run_scenario


def tiny_config() -> dict:
    """A fast, valid scenario: two detuned beams on a 64x16 grid, no field."""
    return {
        "schema_version": 1,
        "title": "tiny scenario",
        "units": "lab",
        "grid": {
            "nx": 64,
            "ny": 16,
            "lx_nm": 300.0,
            "ly_nm": 60.0,
            "x0_nm": -150.0,
            "y0_nm": -30.0,
        },
        "spin_mode": "polarized",
        "electrons": [
            {
                "start_x_nm": -20.0,
                "y_nm": 8.0,
                "fwhm_long_nm": 30.0,
                "fwhm_trans_nm": 5.0,
                "kinetic_energy_ev": 100.0,
                "spin": 1,
            },
            {
                "start_x_nm": -20.0,
                "y_nm": -8.0,
                "fwhm_long_nm": 30.0,
                "fwhm_trans_nm": 5.0,
                "kinetic_energy_ev": 99.0,
                "spin": 1,
            },
        ],
        "field": "none",
        "laser": None,
        "rod": None,
        "coulomb": {"transverse_width_nm": 3.3},
        "interaction_scale": 1.0,
        "orthogonalize": False,
        "propagation": {
            "dt_au": 0.5,
            "t_end_fs": 0.5,
            "cap_width_nm": None,
            "cap_strength": 0.1,
            "snapshot_stride": 20,
        },
        "observables": {
            "acceptance_deg": 10.0,
            "energy_bin_ev": 0.5,
            "angle_bins": 16,
            "energy_window_ev": 5.0,
            "slices": ["real", "momentum"],
        },
        "output_dir": None,
    }


def with_laser(data: dict, peak: float = 5e9, kind: str = "laser") -> dict:
    data = copy.deepcopy(data)
    data["field"] = kind
    data["laser"] = {
        "wavelength_nm": 800.0,
        "fwhm_fs": 0.2,
        "peak_field_v_per_m": peak,
        "polarization": [1.0, 0.0],
        "t_center_fs": 0.25,
    }
    if kind == "plasmon":
        data["rod"] = {
            "radius_nm": 15.0,
            "center_nm": [0.0, 0.0],
            "eps_inf": 9.0,
            "omega_p_ev": 9.0,
            "gamma_ev": 0.07,
        }
        data["propagation"]["dt_au"] = 0.2
    return data


SNAPSHOT_KEYS = (
    "orbital1_density",
    "orbital2_density",
    "pair_real_total",
    "pair_real_uncorrelated",
    "pair_real_exchange",
    "pair_momentum_total",
    "pair_momentum_uncorrelated",
    "pair_momentum_exchange",
)


@pytest.fixture(scope="module")
def base_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "base"
    cfg = parse_config(tiny_config())
    result = run_scenario(cfg, out)
    return cfg, result


class TestRunContainer:
    def test_result_points_at_finalized_container(self, base_run):
        cfg, result = base_run
        box = Container.open(result.directory)
        assert box.manifest["format"] == "pseudospectral-run"
        assert box.manifest["config"] == cfg.raw

    def test_snapshot_times_follow_stride(self, base_run):
        _, result = base_run
        box = Container.open(result.directory)
        times = [s["time"] for s in box.snapshots]
        # dt=0.5 au over 0.5 fs with stride 20: snapshots at steps 0, 20, 40
        # and the shortened final step
        t_end = fs_to_au(0.5)
        assert len(times) == 4
        assert times[0] == 0.0
        assert times[1] == pytest.approx(10.0, abs=1e-9)
        assert times[2] == pytest.approx(20.0, abs=1e-9)
        assert times[-1] == pytest.approx(t_end, abs=1e-9)

    def test_every_snapshot_carries_all_observables(self, base_run):
        _, result = base_run
        box = Container.open(result.directory)
        for index, snap in enumerate(box.snapshots):
            expected = {f"{key}_{index:06d}" for key in SNAPSHOT_KEYS}
            assert expected == set(snap["datasets"].values())
        d1 = box.read(f"orbital1_density_{0:06d}")
        assert d1.shape == (16, 64)
        pr = box.read(f"pair_real_total_{0:06d}")
        assert pr.shape == (64, 64)

    def test_axes_and_spectra_datasets(self, base_run):
        _, result = base_run
        box = Container.open(result.directory)
        x = box.read("axis_x_nm")
        y = box.read("axis_y_nm")
        assert x.shape == (64,) and y.shape == (16,)
        assert x[0] == pytest.approx(-150.0) and y[0] == pytest.approx(-30.0)
        assert np.all(np.diff(x) > 0)
        # windowed spectrum: 21 bins of 0.5 eV centered on the lead beam
        energies = box.read("pinem_energies_au")
        assert energies.shape == (21,)
        assert energies[10] == pytest.approx(ev_to_au(100.0), rel=1e-12)
        assert box.read("pinem_energies_ev")[10] == pytest.approx(0.0, abs=1e-9)
        assert box.read("pinem_angles").shape == (16,)
        assert box.read("pinem_sigma").shape == (21, 16)
        assert box.read("pinem_Sigma").shape == (21,)
        wide_e = box.read("pinem_wide_energies_au")
        assert wide_e.shape == box.read("pinem_wide_Sigma").shape
        assert box.read("pair_real_axis_nm").shape == (64,)
        assert box.read("pair_momentum_axis_au").shape == (64,)

    def test_initial_densities_are_normalized(self, base_run):
        cfg, result = base_run
        box = Container.open(result.directory)
        grid = box.grid
        for name in ("orbital1_density_000000", "orbital2_density_000000"):
            rho = box.read(name)
            assert float(np.sum(rho) * grid.cell_area) == pytest.approx(1.0, abs=1e-9)

    def test_pair_slices_integrate_to_pair_counts(self, base_run):
        _, result = base_run
        box = Container.open(result.directory)
        step = box.grid.dx
        total = box.read("pair_real_total_000000")
        uncorr = box.read("pair_real_uncorrelated_000000")
        # two electrons: the pair density integrates to 2 (up to the tiny
        # same-spin overlap of well-separated beams), the uncorrelated
        # product of unit-per-particle line densities to 4
        assert float(np.sum(total) * step * step) == pytest.approx(2.0, abs=1e-4)
        assert float(np.sum(uncorr) * step * step) == pytest.approx(4.0, abs=1e-6)

    def test_summary_entries(self, base_run):
        _, result = base_run
        box = Container.open(result.directory)
        summary = box.manifest["summary"]
        for key in (
            "spin_mode",
            "field",
            "dt_au",
            "steps",
            "snapshots",
            "final_time_au",
            "final_norms",
            "norm_loss",
            "mean_kinetic_au",
            "mean_kinetic_ev",
            "reference_energy_au",
            "acceptance_rad",
            "spectrum_span_ev",
            "comb_period_au",
            "visibility",
            "comb_spacing_ev",
        ):
            assert key in summary, key
        assert summary["spin_mode"] == "polarized"
        assert summary["field"] == "none"
        assert summary["comb_period_au"] is None  # no field, no comb
        assert summary["snapshots"] == 4
        assert len(summary["final_norms"]) == 2
        assert summary["norm_loss"] < 1e-6
        assert summary["mean_kinetic_ev"][0] == pytest.approx(100.0, rel=1e-3)
        assert result.summary == summary
        assert box.manifest["timing"]["wall_seconds"] > 0.0

    def test_describe_reports_the_run(self, base_run):
        _, result = base_run
        report = describe(result.directory)
        assert "tiny scenario" in report
        assert "64 x 16" in report
        assert "snapshots" in report
        assert "norm" in report
        assert report == describe(result.directory)  # pure read

    def test_occupied_output_refused(self, base_run):
        cfg, result = base_run
        with pytest.raises(ContainerError):
            run_scenario(cfg, result.directory)


class TestPhysicsThroughTheStack:
    def test_free_packet_moves_ballistically(self, tmp_path):
        data = tiny_config()
        data["interaction_scale"] = 0.0
        cfg = parse_config(data)
        result = run_scenario(cfg, tmp_path / "free")
        box = Container.open(result.directory)
        x_nm = box.read("axis_x_nm")
        last = len(box.snapshots) - 1
        centroids = []
        for index in (0, last):
            rho = box.read(f"orbital1_density_{index:06d}")
            line = rho.sum(axis=0)
            centroids.append(float(np.sum(x_nm * line) / np.sum(line)))
        t_end = fs_to_au(0.5)
        v = math.sqrt(2.0 * ev_to_au(100.0))
        expected = au_to_nm(v * t_end)
        assert centroids[1] - centroids[0] == pytest.approx(expected, abs=1e-6)
        assert box.manifest["summary"]["norm_loss"] < 1e-9

    def test_rerun_is_bit_identical(self, tmp_path):
        cfg = parse_config(tiny_config())
        a = run_scenario(cfg, tmp_path / "a")
        b = run_scenario(cfg, tmp_path / "b")
        assert container_fingerprint(a.directory) == container_fingerprint(b.directory)

    def test_wide_spectrum_integrates_to_kinetic_energy(self, tmp_path):
        cfg = parse_config(with_laser(tiny_config()))
        result = run_scenario(cfg, tmp_path / "laser")
        box = Container.open(result.directory)
        energies = box.read("pinem_wide_energies_au")
        Sigma = box.read("pinem_wide_Sigma")
        de = float(energies[1] - energies[0])
        integral = float(np.sum(Sigma) * de)
        kinetic = sum(box.manifest["summary"]["mean_kinetic_au"])
        assert integral == pytest.approx(kinetic, rel=1e-10)
        assert box.manifest["summary"]["norm_loss"] < 1e-6
        assert box.manifest["summary"]["comb_period_au"] == pytest.approx(
            wavelength_nm_to_omega_au(800.0), rel=1e-12
        )

    def test_plasmon_run_records_coupling_diagnostics(self, tmp_path):
        cfg = parse_config(with_laser(tiny_config(), kind="plasmon"))
        result = run_scenario(cfg, tmp_path / "plasmon")
        summary = Container.open(result.directory).manifest["summary"]
        g = summary["g_factors_abs"]
        assert len(g) == 2
        assert all(math.isfinite(v) and v > 0 for v in g)
        assert summary["comb_band_au"][0] == pytest.approx(
            ev_to_au(100.0) + 0.5 * wavelength_nm_to_omega_au(800.0), rel=1e-12
        )

    def test_unpolarized_pair_has_zero_exchange_slice(self, tmp_path):
        data = tiny_config()
        data["spin_mode"] = "unpolarized"
        data["electrons"][1]["spin"] = -1
        data["propagation"]["t_end_fs"] = 0.1
        cfg = parse_config(data)
        result = run_scenario(cfg, tmp_path / "unp")
        box = Container.open(result.directory)
        assert np.all(box.read("pair_real_exchange_000000") == 0.0)
        assert box.manifest["summary"]["spin_mode"] == "unpolarized"

    def test_orthogonalize_reshapes_second_orbital(self, tmp_path):
        data = tiny_config()
        for e in data["electrons"]:
            e["y_nm"] = 0.0
            e["kinetic_energy_ev"] = 100.0
        data["electrons"][1]["start_x_nm"] = -5.0
        data["propagation"]["t_end_fs"] = 0.1
        raw = run_scenario(parse_config(data), tmp_path / "raw")
        data2 = copy.deepcopy(data)
        data2["orthogonalize"] = True
        ortho = run_scenario(parse_config(data2), tmp_path / "ortho")
        d_raw = Container.open(raw.directory).read("orbital2_density_000000")
        d_ortho = Container.open(ortho.directory).read("orbital2_density_000000")
        # the projection removes an O(1) overlap, so the density must change
        # by a sizable fraction of its own peak
        assert np.max(np.abs(d_raw - d_ortho)) > 0.1 * np.max(d_raw)
        first_raw = Container.open(raw.directory).read("orbital1_density_000000")
        first_ortho = Container.open(ortho.directory).read("orbital1_density_000000")
        np.testing.assert_allclose(first_ortho, first_raw, atol=1e-15)

    def test_auto_time_step(self, tmp_path):
        data = tiny_config()
        data["propagation"]["dt_au"] = None
        data["propagation"]["t_end_fs"] = 0.1
        cfg = parse_config(data)
        result = run_scenario(cfg, tmp_path / "auto")
        summary = Container.open(result.directory).manifest["summary"]
        assert 0.0 < summary["dt_au"] < 3.0
        assert summary["steps"] * summary["dt_au"] >= fs_to_au(0.1) - 1e-9


class TestFailurePaths:
    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_archives_incomplete_container(self, tmp_path):
        # a validated configuration whose near field exceeds the heuristic
        # stability allowance: the step check must catch the blowup and the
        # partial container must still be finalized and flagged
        data = with_laser(tiny_config(), peak=5e10, kind="plasmon")
        data["propagation"]["dt_au"] = 0.4
        cfg = parse_config(data)
        out = tmp_path / "blowup"
        with pytest.raises(FloatingPointError):
            run_scenario(cfg, out)
        box = Container.open(out)
        assert box.manifest["summary"]["incomplete"] is True
        assert box.manifest["summary"]["error"]

    def test_describe_flags_corrupt_dataset(self, base_run, tmp_path):
        _, result = base_run
        target = tmp_path / "corrupt"
        shutil.copytree(result.directory, target)
        victim = target / "orbital1_density_000000.bin"
        payload = victim.read_bytes()
        victim.write_bytes(payload[: len(payload) // 2])
        with pytest.raises(ContainerError, match="orbital1_density_000000"):
            describe(target)


class TestDescribeRecompute:
    def _spectrum(self):
        omega = wavelength_nm_to_omega_au(800.0)
        ref = ev_to_au(100.0)
        de = ev_to_au(0.155)
        energies = ref + de * np.arange(-65, 66)
        edges_a = np.linspace(-np.pi / 2, np.pi / 2, 17)
        angles = 0.5 * (edges_a[:-1] + edges_a[1:])
        Sigma = np.full(energies.size, 0.02)
        for m, amp in zip(range(-5, 6), (0.1, 0.15, 0.25, 0.45, 0.7, 2.0, 1.0, 0.6, 0.36, 0.2, 0.12)):
            Sigma = Sigma + amp * np.exp(-0.5 * ((energies - ref - m * omega) / (1.5 * de)) ** 2)
        sigma = np.outer(Sigma, np.ones(angles.size) / np.pi)
        spec = PinemSpectrum(
            energies=energies,
            energies_ev=au_to_ev(energies - ref),
            angles=angles,
            sigma=sigma,
            Sigma=Sigma,
            acceptance_angle=math.radians(10.0),
            de=de,
            dphi=float(angles[1] - angles[0]),
        )
        band = (ref + 0.5 * omega, ref + 5.5 * omega)
        return spec, band, omega, ref

    def _write(self, directory, visibility):
        spec, band, omega, ref = self._spectrum()
        writer = ContainerWriter(directory)
        writer.add_array("pinem_energies_au", spec.energies)
        writer.add_array("pinem_energies_ev", spec.energies_ev)
        writer.add_array("pinem_angles", spec.angles)
        writer.add_array("pinem_sigma", spec.sigma)
        writer.add_array("pinem_Sigma", spec.Sigma)
        writer.set_summary(
            visibility=visibility,
            comb_band_au=[band[0], band[1]],
            comb_period_au=omega,
            reference_energy_au=ref,
            acceptance_rad=spec.acceptance_angle,
        )
        writer.finalize()

    def test_consistent_summary_passes(self, tmp_path):
        spec, band, omega, _ = self._spectrum()
        self._write(tmp_path / "ok", fringe_visibility(spec, band, omega))
        report = describe(tmp_path / "ok")
        assert "visibility" in report

    def test_tampered_summary_rejected(self, tmp_path):
        spec, band, omega, _ = self._spectrum()
        self._write(tmp_path / "bad", fringe_visibility(spec, band, omega) + 0.05)
        with pytest.raises(ScenarioError, match="visibility"):
            describe(tmp_path / "bad")
