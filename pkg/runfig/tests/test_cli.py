"""Command-line entry point tests: argument handling and exit codes."""

from __future__ import annotations

import subprocess
import sys

import pytest

from runfig.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, main

from conftest import build_box

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def render_args(box_dir, out, *extra):
    return [
        "render",
        "--manifest",
        str(box_dir / "manifest.json"),
        "--out",
        str(out),
        *extra,
    ]


class TestRender:
    @pytest.mark.parametrize("panel", ["orbital", "pair_density", "exchange", "pinem"])
    def test_each_panel_exits_zero_and_writes_png(self, box_dir, tmp_path, panel):
        out = tmp_path / f"{panel}.png"
        code = main(render_args(box_dir, out, "--panel", panel))
        assert code == EXIT_OK
        assert out.read_bytes()[:8] == PNG_MAGIC

    def test_time_selects_a_snapshot(self, box_dir, tmp_path):
        out = tmp_path / "timed.png"
        code = main(render_args(box_dir, out, "--panel", "orbital", "--time", "0.0"))
        assert code == EXIT_OK
        assert out.is_file()

    def test_panel_all_renders_the_full_set(self, box_dir, tmp_path, capsys):
        out_dir = tmp_path / "figs"
        code = main(render_args(box_dir, out_dir, "--panel", "all"))
        assert code == EXIT_OK
        assert len(list(out_dir.glob("*.png"))) == 8
        assert "8" in capsys.readouterr().out

    def test_scale_and_space_flags_parse(self, box_dir, tmp_path):
        out = tmp_path / "scaled.png"
        code = main(
            render_args(
                box_dir,
                out,
                "--panel",
                "pair_density",
                "--scale",
                "log",
                "--space",
                "real",
            )
        )
        assert code == EXIT_OK


class TestFailureModes:
    def test_unknown_panel_is_a_usage_error(self, box_dir, tmp_path):
        code = main(render_args(box_dir, tmp_path / "x.png", "--panel", "holograms"))
        assert code == EXIT_USAGE

    def test_missing_required_flag_is_a_usage_error(self, box_dir, tmp_path):
        code = main(["render", "--manifest", str(box_dir / "manifest.json")])
        assert code == EXIT_USAGE

    def test_missing_manifest_is_an_io_error(self, tmp_path, capsys):
        code = main(
            [
                "render",
                "--manifest",
                str(tmp_path / "nowhere" / "manifest.json"),
                "--panel",
                "pinem",
                "--out",
                str(tmp_path / "x.png"),
            ]
        )
        assert code == EXIT_IO
        assert "manifest" in capsys.readouterr().err.lower()

    def test_corrupt_dataset_is_an_io_error(self, box_dir, tmp_path, capsys):
        blob = box_dir / "pinem_Sigma.bin"
        blob.write_bytes(blob.read_bytes()[:-8])
        code = main(render_args(box_dir, tmp_path / "x.png", "--panel", "pinem"))
        assert code == EXIT_IO
        assert "pinem_Sigma" in capsys.readouterr().err

    def test_conflicting_time_and_index_is_a_usage_error(self, box_dir, tmp_path):
        code = main(
            render_args(
                box_dir,
                tmp_path / "x.png",
                "--panel",
                "orbital",
                "--time",
                "0.0",
                "--index",
                "1",
            )
        )
        assert code == EXIT_USAGE


class TestModuleInvocation:
    def test_python_dash_m_runs_the_cli(self, tmp_path):
        build_box(tmp_path / "box")
        out = tmp_path / "cli.png"
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "runfig.cli",
                "render",
                "--manifest",
                str(tmp_path / "box"),
                "--panel",
                "pinem",
                "--out",
                str(out),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.read_bytes()[:8] == PNG_MAGIC
        assert str(out) in proc.stdout
