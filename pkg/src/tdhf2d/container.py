"""Bit-exact run containers: raw little-endian arrays plus a JSON manifest.

A container is a directory holding ``manifest.json`` and one ``<name>.bin``
file per dataset.  Arrays are stored uncompressed as IEEE-754 float64
(complex values as interleaved re,im float64 pairs), little-endian,
row-major, with shapes and dtypes declared in the manifest.  Files are
written first and the manifest last, so a finished manifest is the commit
point of a run.  Everything except the creation timestamp and the
``timing`` section is deterministic; :func:`container_fingerprint` hashes
exactly that deterministic content.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .grid import GridSpec

MANIFEST_NAME = "manifest.json"
FORMAT_NAME = "pseudospectral-run"
FORMAT_VERSION = 1

# On-disk dtypes are pinned to explicit little-endian codes; native-order
# arrays are byte-swapped on foreign-endian hosts rather than silently
# stored big-endian.
_DTYPES = {"float64": np.dtype("<f8"), "complex128": np.dtype("<c16")}

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


class ContainerError(RuntimeError):
    """Malformed, incomplete, or inconsistent container content."""


def _dataset_path(directory: Path, name: str) -> Path:
    return directory / f"{name}.bin"


def _check_name(name: str) -> None:
    if not _NAME_RE.match(name):
        raise ContainerError(
            f"invalid dataset name {name!r}: use letters, digits, '_', '-', '.'"
        )


def _storage_dtype(values: np.ndarray) -> str:
    if np.iscomplexobj(values):
        return "complex128"
    return "float64"


class ContainerWriter:
    """Accumulates datasets on disk; ``finalize`` writes the manifest.

    Dataset files land immediately on :meth:`add_array`, so a crashed run
    leaves data files but no manifest — readers treat that as "no container
    here" rather than a corrupt one.
    """

    def __init__(
        self,
        directory: str | Path,
        grid: GridSpec | None = None,
        config: Mapping[str, Any] | None = None,
        code_version: str = "",
    ) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        existing = self.directory / MANIFEST_NAME
        if existing.exists():
            raise ContainerError(f"refusing to overwrite finished container at {existing}")
        self._grid = grid
        self._config = dict(config) if config is not None else None
        self._code_version = code_version
        self._datasets: dict[str, dict[str, Any]] = {}
        self._snapshots: list[dict[str, Any]] = []
        self._summary: dict[str, Any] = {}
        self._timing: dict[str, Any] = {}
        self._finalized = False

    def add_array(self, name: str, values: np.ndarray) -> str:
        """Write one dataset file and record its metadata; returns the name."""
        if self._finalized:
            raise ContainerError("container already finalized")
        _check_name(name)
        if name in self._datasets:
            raise ContainerError(f"duplicate dataset name {name!r}")
        arr = np.asarray(values)
        tag = _storage_dtype(arr)
        arr = np.asarray(arr, dtype=_DTYPES[tag], order="C")
        path = _dataset_path(self.directory, name)
        try:
            path.write_bytes(arr.tobytes())
        except OSError as exc:  # pragma: no cover - filesystem failure path
            raise ContainerError(f"cannot write dataset {name!r}: {exc}") from exc
        self._datasets[name] = {
            "file": path.name,
            "shape": list(arr.shape),
            "dtype": tag,
        }
        return name

    def add_snapshot(self, time: float, arrays: Mapping[str, np.ndarray]) -> dict[str, str]:
        """Store one time point's arrays under auto-numbered dataset names."""
        time = float(time)
        if self._snapshots and time <= self._snapshots[-1]["time"]:
            raise ContainerError(
                f"snapshot times must be strictly increasing: {time} after "
                f"{self._snapshots[-1]['time']}"
            )
        index = len(self._snapshots)
        names: dict[str, str] = {}
        for key in sorted(arrays):
            names[key] = self.add_array(f"{key}_{index:06d}", arrays[key])
        self._snapshots.append({"time": time, "datasets": names})
        return names

    def set_summary(self, **entries: Any) -> None:
        self._summary.update(entries)

    def set_timing(self, **entries: Any) -> None:
        self._timing.update(entries)

    def finalize(self) -> Path:
        """Write the manifest (the commit point) and return its path."""
        if self._finalized:
            raise ContainerError("container already finalized")
        manifest: dict[str, Any] = {
            "format": FORMAT_NAME,
            "format_version": FORMAT_VERSION,
            "created": datetime.now(timezone.utc).isoformat(),
            "code_version": self._code_version,
            "datasets": self._datasets,
            "snapshots": self._snapshots,
            "summary": self._summary,
            "timing": self._timing,
        }
        if self._grid is not None:
            manifest["grid"] = asdict(self._grid)
        if self._config is not None:
            manifest["config"] = self._config
        path = self.directory / MANIFEST_NAME
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(_canonical_json(manifest) + "\n", encoding="utf-8")
        tmp.replace(path)
        self._finalized = True
        return path


def _canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


class Container:
    """Read-only view of a finished container directory."""

    def __init__(self, directory: str | Path, manifest: Mapping[str, Any]) -> None:
        self.directory = Path(directory)
        self.manifest = dict(manifest)

    @classmethod
    def open(cls, directory: str | Path) -> "Container":
        directory = Path(directory)
        path = directory / MANIFEST_NAME
        if not path.is_file():
            raise ContainerError(f"no {MANIFEST_NAME} in {directory}")
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except (ValueError, OSError) as exc:
            raise ContainerError(f"unreadable manifest {path}: {exc}") from exc
        if not isinstance(manifest, dict) or manifest.get("format") != FORMAT_NAME:
            raise ContainerError(f"{path} is not a {FORMAT_NAME} manifest")
        if manifest.get("format_version") != FORMAT_VERSION:
            raise ContainerError(
                f"unsupported format_version {manifest.get('format_version')!r} in {path}"
            )
        container = cls(directory, manifest)
        container._validate()
        return container

    def _validate(self) -> None:
        datasets = self.manifest.get("datasets")
        if not isinstance(datasets, dict):
            raise ContainerError("manifest has no 'datasets' table")
        for name, meta in datasets.items():
            for key in ("file", "shape", "dtype"):
                if not isinstance(meta, dict) or key not in meta:
                    raise ContainerError(f"dataset {name!r}: missing metadata key {key!r}")
            if meta["dtype"] not in _DTYPES:
                raise ContainerError(f"dataset {name!r}: unknown dtype {meta['dtype']!r}")
        previous = None
        for snap in self.manifest.get("snapshots", []):
            if previous is not None and snap["time"] <= previous:
                raise ContainerError(
                    f"snapshot times must be strictly increasing, got {snap['time']} "
                    f"after {previous}"
                )
            previous = snap["time"]
            for key, name in snap["datasets"].items():
                if name not in datasets:
                    raise ContainerError(
                        f"snapshot at t={snap['time']} references missing dataset "
                        f"{name!r} (role {key!r})"
                    )

    @property
    def dataset_names(self) -> list[str]:
        return sorted(self.manifest["datasets"])

    @property
    def snapshots(self) -> list[dict[str, Any]]:
        return list(self.manifest.get("snapshots", []))

    @property
    def grid(self) -> GridSpec | None:
        meta = self.manifest.get("grid")
        if meta is None:
            return None
        return GridSpec(**meta)

    def read(self, name: str) -> np.ndarray:
        datasets = self.manifest["datasets"]
        if name not in datasets:
            raise ContainerError(f"no dataset {name!r} in {self.directory}")
        meta = datasets[name]
        dtype = _DTYPES[meta["dtype"]]
        shape = tuple(int(n) for n in meta["shape"])
        path = self.directory / meta["file"]
        expected = dtype.itemsize * int(np.prod(shape)) if shape else dtype.itemsize
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ContainerError(f"dataset {name!r}: cannot read {path}: {exc}") from exc
        if len(raw) != expected:
            raise ContainerError(
                f"dataset {name!r}: file {path.name} holds {len(raw)} bytes, "
                f"expected {expected} for shape {shape} {meta['dtype']}"
            )
        return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()


def container_fingerprint(directory: str | Path) -> str:
    """SHA-256 over the deterministic content of a container.

    Covers the manifest minus its ``created`` and ``timing`` entries, plus
    every dataset file's bytes in name order; two runs of the same
    configuration must produce equal fingerprints.
    """
    container = Container.open(directory)
    manifest = dict(container.manifest)
    manifest.pop("created", None)
    manifest.pop("timing", None)
    digest = hashlib.sha256()
    digest.update(_canonical_json(manifest).encode("utf-8"))
    for name in container.dataset_names:
        meta = container.manifest["datasets"][name]
        digest.update(name.encode("utf-8"))
        digest.update((container.directory / meta["file"]).read_bytes())
    return digest.hexdigest()
