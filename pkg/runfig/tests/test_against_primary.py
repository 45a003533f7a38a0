"""End-to-end check against a real simulator-produced container.

Runs the ``tdhf2d`` command-line tool as an external program (skipped when it
is not installed), then reads the archive it wrote with this package's own
reader and renders the full figure set.  Nothing here imports the simulator:
the only contract exercised is the documented container layout and CLI.
"""

from __future__ import annotations

import shutil
import subprocess

import numpy as np
import pytest

from runfig.reader import RunBox
from runfig.render import PANELS, figure_set, pinem_tick_spacing_ev

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
EV_PER_AU = 27.211386245988

pytestmark = pytest.mark.skipif(
    shutil.which("tdhf2d") is None, reason="simulator CLI not on PATH"
)


@pytest.fixture(scope="module")
def simulator_box(tmp_path_factory):
    """A short, coarse two-beam run archived by the simulator CLI."""
    out_dir = tmp_path_factory.mktemp("sim") / "run"
    overrides = [
        "grid.nx=128",
        "grid.ny=32",
        'observables.slices=["real"]',
        "propagation.t_end_fs=1.0",
        "propagation.snapshot_stride=50",
        "electrons.0.fwhm_trans_nm=4.0",
        "electrons.1.fwhm_trans_nm=4.0",
        "laser.peak_field_v_per_m=1e8",
    ]
    command = ["tdhf2d", "run", "--preset", "polarized_pair_desk", "--output", str(out_dir)]
    for item in overrides:
        command += ["--override", item]
    proc = subprocess.run(command, capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return out_dir


def test_full_figure_set_renders_from_a_real_run(simulator_box, tmp_path):
    box = RunBox.open(simulator_box)
    count = len(box.snapshots)
    assert count >= 2
    written = figure_set(simulator_box, tmp_path / "figs")
    assert len(written) == len(PANELS) * count
    for path in written:
        assert path.read_bytes()[:8] == PNG_MAGIC


def test_pair_panel_data_is_symmetric_about_the_diagonal(simulator_box):
    box = RunBox.open(simulator_box)
    data = box.read_role(box.snapshots[-1], "pair_real_total")
    assert data.shape[0] == data.shape[1]
    scale = float(np.max(np.abs(data)))
    np.testing.assert_allclose(data, data.T, atol=1e-10 * scale)


def test_spectrum_tick_spacing_matches_the_archived_comb(simulator_box):
    box = RunBox.open(simulator_box)
    spacing = pinem_tick_spacing_ev(box)
    assert spacing is not None
    energies = box.read("pinem_energies_ev")
    bin_width = float(energies[1] - energies[0])
    recorded = box.summary.get("comb_spacing_ev")
    if isinstance(recorded, (int, float)) and recorded > 0:
        assert abs(spacing - recorded) <= bin_width
    period_au = box.summary["comb_period_au"]
    assert spacing == pytest.approx(period_au * EV_PER_AU, rel=1e-12)
