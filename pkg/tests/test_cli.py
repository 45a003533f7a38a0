"""Contract tests for the command-line interface and its exit codes."""

import json
import subprocess
import sys

import pytest

from tdhf2d.cli import main
from tdhf2d.container import Container

from test_scenario import tiny_config, with_laser


def write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


class TestInformationVerbs:
    def test_presets_lists_all_six(self, capsys):
        assert main(["presets"]) == 0
        out = capsys.readouterr().out
        for name in (
            "polarized_pair_desk",
            "polarized_pair_full",
            "unpolarized_pair_desk",
            "unpolarized_pair_full",
            "close_pair_desk",
            "close_pair_full",
        ):
            assert name in out

    def test_validate_preset_ok(self, capsys):
        assert main(["validate", "--preset", "polarized_pair_desk"]) == 0
        assert "OK" in capsys.readouterr().out

    def test_validate_config_file_ok(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config())
        assert main(["validate", "--config", str(path)]) == 0
        assert "OK" in capsys.readouterr().out

    def test_validate_reports_schema_problems(self, tmp_path, capsys):
        path = write_config(tmp_path, {"schema_version": 1})
        assert main(["validate", "--config", str(path)]) == 2
        assert "grid" in capsys.readouterr().err

    def test_validate_applies_overrides(self, capsys):
        code = main(
            [
                "validate",
                "--preset",
                "polarized_pair_desk",
                "--override",
                "propagation.dt_au=5.0",
            ]
        )
        assert code == 2
        assert "stab" in capsys.readouterr().err

    def test_unknown_preset(self, capsys):
        assert main(["validate", "--preset", "nope"]) == 2
        assert "nope" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["validate", "--config", str(tmp_path / "absent.json")]) == 2

    def test_usage_error(self, capsys):
        assert main(["frobnicate"]) == 2


class TestRunVerb:
    def test_run_then_describe(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config())
        out_dir = tmp_path / "out"
        assert main(["run", "--config", str(path), "--output", str(out_dir)]) == 0
        stdout = capsys.readouterr().out
        assert str(out_dir) in stdout
        box = Container.open(out_dir)
        assert box.manifest["summary"]["snapshots"] >= 2

        assert main(["describe", str(out_dir)]) == 0
        assert "snapshots" in capsys.readouterr().out

    def test_run_with_overrides(self, tmp_path):
        path = write_config(tmp_path, tiny_config())
        out_dir = tmp_path / "out"
        code = main(
            [
                "run",
                "--config",
                str(path),
                "--output",
                str(out_dir),
                "--override",
                "propagation.t_end_fs=0.1",
                "--override",
                "observables.slices=[\"real\"]",
            ]
        )
        assert code == 0
        box = Container.open(out_dir)
        names = box.dataset_names
        assert any(n.startswith("pair_real_total") for n in names)
        assert not any(n.startswith("pair_momentum") for n in names)

    def test_run_needs_an_output_directory(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config())  # output_dir is null
        assert main(["run", "--config", str(path)]) == 2
        assert "output" in capsys.readouterr().err

    def test_run_occupied_output(self, tmp_path):
        path = write_config(tmp_path, tiny_config())
        out_dir = tmp_path / "out"
        assert main(["run", "--config", str(path), "--output", str(out_dir)]) == 0
        assert main(["run", "--config", str(path), "--output", str(out_dir)]) == 4

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_numerical_failure_exit_code(self, tmp_path, capsys):
        data = with_laser(tiny_config(), peak=5e10, kind="plasmon")
        data["propagation"]["dt_au"] = 0.4
        path = write_config(tmp_path, data)
        out_dir = tmp_path / "blow"
        assert main(["run", "--config", str(path), "--output", str(out_dir)]) == 3
        box = Container.open(out_dir)
        assert box.manifest["summary"]["incomplete"] is True

    def test_describe_missing_directory(self, tmp_path, capsys):
        assert main(["describe", str(tmp_path / "nothing")]) == 4


class TestInstalledEntryPoint:
    def test_console_script_runs(self):
        proc = subprocess.run(
            [sys.executable, "-m", "tdhf2d.cli", "presets"],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        assert "polarized_pair_desk" in proc.stdout
