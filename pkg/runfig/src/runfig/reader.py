"""Self-contained read-only access to pseudospectral-run containers.

The container layout this module understands:

* a directory holding ``manifest.json`` and one ``<name>.bin`` per dataset;
* arrays stored uncompressed, little-endian, row-major: IEEE-754 float64,
  complex values as interleaved re,im float64 pairs;
* the manifest declares each dataset's file, shape, and dtype, lists the
  snapshots as ``{"time": <atomic units>, "datasets": {role: name}}``, and
  carries free-form ``summary`` / ``config`` / ``grid`` sections.

Everything here opens files for reading only; nothing in this package ever
writes into a container.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

MANIFEST_NAME = "manifest.json"
FORMAT_NAME = "pseudospectral-run"
FORMAT_VERSION = 1

_DTYPES = {"float64": np.dtype("<f8"), "complex128": np.dtype("<c16")}

# physical conversions (CODATA); times in manifests are atomic units
FS_PER_AU = 2.4188843265857e-2
EV_PER_AU = 27.211386245988


class BoxError(RuntimeError):
    """Missing, malformed, or inconsistent container content."""


@dataclass(frozen=True)
class RunBox:
    """Read-only view of one finished run container."""

    directory: Path
    manifest: Mapping[str, Any] = field(repr=False)

    @classmethod
    def open(cls, path: str | Path) -> "RunBox":
        """Open a container directory (or its manifest.json directly)."""
        path = Path(path)
        if path.name == MANIFEST_NAME:
            path = path.parent
        manifest_path = path / MANIFEST_NAME
        if not manifest_path.is_file():
            raise BoxError(f"no {MANIFEST_NAME} in {path}")
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise BoxError(f"unreadable manifest {manifest_path}: {exc}") from exc
        if not isinstance(manifest, dict) or manifest.get("format") != FORMAT_NAME:
            raise BoxError(f"{manifest_path} is not a {FORMAT_NAME} manifest")
        if manifest.get("format_version") != FORMAT_VERSION:
            raise BoxError(
                f"unsupported format_version {manifest.get('format_version')!r} "
                f"in {manifest_path}"
            )
        datasets = manifest.get("datasets")
        if not isinstance(datasets, dict):
            raise BoxError(f"{manifest_path} has no 'datasets' table")
        for name, meta in datasets.items():
            if not isinstance(meta, dict) or not {"file", "shape", "dtype"} <= set(meta):
                raise BoxError(f"dataset {name!r}: incomplete metadata")
            if meta["dtype"] not in _DTYPES:
                raise BoxError(f"dataset {name!r}: unknown dtype {meta['dtype']!r}")
        return cls(directory=path, manifest=manifest)

    # -- manifest sections -------------------------------------------------

    @property
    def dataset_names(self) -> list[str]:
        return sorted(self.manifest["datasets"])

    @property
    def snapshots(self) -> list[dict[str, Any]]:
        return list(self.manifest.get("snapshots", []))

    @property
    def summary(self) -> dict[str, Any]:
        value = self.manifest.get("summary")
        return dict(value) if isinstance(value, dict) else {}

    def has_dataset(self, name: str) -> bool:
        return name in self.manifest["datasets"]

    # -- array access ------------------------------------------------------

    def read(self, name: str) -> np.ndarray:
        """Load one dataset, validating its size against the metadata."""
        datasets = self.manifest["datasets"]
        if name not in datasets:
            raise BoxError(f"no dataset {name!r} in {self.directory}")
        meta = datasets[name]
        dtype = _DTYPES[meta["dtype"]]
        shape = tuple(int(n) for n in meta["shape"])
        path = self.directory / meta["file"]
        expected = dtype.itemsize * int(np.prod(shape)) if shape else dtype.itemsize
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise BoxError(f"dataset {name!r}: cannot read {path}: {exc}") from exc
        if len(raw) != expected:
            raise BoxError(
                f"dataset {name!r}: file {path.name} holds {len(raw)} bytes, "
                f"expected {expected} for shape {shape} {meta['dtype']}"
            )
        return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()

    def read_role(self, snapshot: Mapping[str, Any], role: str) -> np.ndarray:
        """Load the dataset filling ``role`` in one snapshot entry."""
        names = snapshot.get("datasets", {})
        if role not in names:
            time = snapshot.get("time")
            raise BoxError(
                f"snapshot at t={time!r} has no {role!r} dataset "
                f"(available roles: {sorted(names)})"
            )
        return self.read(names[role])


def select_snapshot(
    box: RunBox, time_fs: float | None = None, index: int | None = None
) -> tuple[int, dict[str, Any]]:
    """Pick a snapshot by index, by nearest time (fs), or the latest one.

    Giving both ``time_fs`` and ``index`` is rejected; an empty snapshot
    list raises.
    """
    snapshots = box.snapshots
    if not snapshots:
        raise BoxError(f"container {box.directory} has no snapshots")
    if time_fs is not None and index is not None:
        raise ValueError("give either a snapshot time or an index, not both")
    if index is not None:
        if not -len(snapshots) <= index < len(snapshots):
            raise BoxError(
                f"snapshot index {index} out of range for {len(snapshots)} snapshots"
            )
        index = index % len(snapshots)
        return index, snapshots[index]
    if time_fs is not None:
        times_fs = [float(s["time"]) * FS_PER_AU for s in snapshots]
        index = int(np.argmin([abs(t - time_fs) for t in times_fs]))
        return index, snapshots[index]
    return len(snapshots) - 1, snapshots[-1]
