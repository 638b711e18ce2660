"""Snapshot CSV, label file and manifest formats.

Snapshot: UTF-8 CSV with header ``dim_0,...,dim_{d-1}[,label]`` and one row
per point. Reals are written with ``repr`` so they round-trip exactly.

Manifest: JSON object ::

    {"schema": 1, "run_id": "...",
     "epochs": [{"epoch": 0, "path": "epoch_000.csv"}, ...],
     "label_path": "labels.csv",          # optional
     "metadata": {"key": "value"}}

Paths are relative to the manifest's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import SnapshotFormatError, ShapeMismatchError
from ..geometry import PointCloud

MANIFEST_SCHEMA = 1


def write_snapshot(path, pc: PointCloud, with_labels: bool = True) -> None:
    path = Path(path)
    header = [f"dim_{j}" for j in range(pc.d)]
    labeled = with_labels and pc.labels is not None
    if labeled:
        header.append("label")
    lines = [",".join(header)]
    for i in range(pc.n):
        row = [repr(float(x)) for x in pc.points[i]]
        if labeled:
            row.append(str(int(pc.labels[i])))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_float(text: str, path, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SnapshotFormatError(f"not a number: {text!r}", path, line) from None
    if not np.isfinite(value):
        raise SnapshotFormatError(f"non-finite coordinate {text!r}", path, line)
    return value


def _parse_label(text: str, path, line: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise SnapshotFormatError(f"label is not an integer: {text!r}", path, line) from None
    if value < 0:
        raise SnapshotFormatError(f"negative label {value}", path, line)
    return value


def read_snapshot(path) -> PointCloud:
    """Parse a snapshot CSV, reporting the first malformed line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise SnapshotFormatError("file not found", path) from None
    except UnicodeDecodeError:
        raise SnapshotFormatError("not valid UTF-8", path) from None
    lines = text.splitlines()
    if not lines:
        raise SnapshotFormatError("empty file", path, 1)
    header = [h.strip() for h in lines[0].split(",")]
    labeled = header[-1] == "label"
    dims = header[:-1] if labeled else header
    if not dims or dims != [f"dim_{j}" for j in range(len(dims))]:
        raise SnapshotFormatError("header must be dim_0,...,dim_{d-1}[,label]", path, 1)
    width = len(header)

    points, labels = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split(",")
        if len(cells) != width:
            raise SnapshotFormatError(
                f"expected {width} fields, found {len(cells)}", path, lineno
            )
        points.append([_parse_float(c, path, lineno) for c in cells[: len(dims)]])
        if labeled:
            labels.append(_parse_label(cells[-1].strip(), path, lineno))
    if not points:
        raise SnapshotFormatError("no data rows", path, 2)
    return PointCloud(np.array(points), np.array(labels) if labeled else None)


def write_labels(path, labels) -> None:
    Path(path).write_text(
        "label\n" + "".join(f"{int(v)}\n" for v in labels), encoding="utf-8"
    )


def read_labels(path) -> np.ndarray:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise SnapshotFormatError("file not found", path) from None
    if not lines or lines[0].strip() != "label":
        raise SnapshotFormatError("label file header must be 'label'", path, 1)
    return np.array(
        [_parse_label(s.strip(), path, i) for i, s in enumerate(lines[1:], start=2) if s.strip()],
        dtype=np.int64,
    )


def attach_labels(pc: PointCloud, labels: Optional[np.ndarray], source="labels") -> PointCloud:
    if labels is None:
        return pc
    if labels.shape[0] != pc.n:
        raise ShapeMismatchError(f"{source}: {labels.shape[0]} labels for {pc.n} points")
    return PointCloud(pc.points, labels)


@dataclass
class SnapshotManifest:
    run_id: str
    epochs: list  # [(epoch, relative path), ...]
    label_path: Optional[str] = None
    metadata: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def to_dict(self) -> dict:
        out = {
            "schema": MANIFEST_SCHEMA,
            "run_id": self.run_id,
            "epochs": [{"epoch": e, "path": p} for e, p in self.epochs],
        }
        if self.label_path is not None:
            out["label_path"] = self.label_path
        out["metadata"] = {str(k): str(v) for k, v in self.metadata.items()}
        return out

    def resolve(self, rel: str) -> Path:
        return self.base_dir / rel


def write_manifest(path, manifest: SnapshotManifest) -> None:
    Path(path).write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_manifest(path) -> SnapshotManifest:
    """Read and validate a manifest; epochs must already be strictly increasing."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SnapshotFormatError("file not found", path) from None
    except json.JSONDecodeError as exc:
        raise SnapshotFormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(data, dict) or not isinstance(data.get("epochs"), list):
        raise SnapshotFormatError("manifest needs an 'epochs' list", path)
    if data.get("schema", MANIFEST_SCHEMA) != MANIFEST_SCHEMA:
        raise SnapshotFormatError(f"unsupported manifest schema {data.get('schema')}", path)

    epochs = []
    for k, entry in enumerate(data["epochs"]):
        try:
            epoch, rel = int(entry["epoch"]), str(entry["path"])
        except (KeyError, TypeError, ValueError):
            raise SnapshotFormatError(f"epochs[{k}] needs integer 'epoch' and 'path'", path) from None
        if epochs and epoch <= epochs[-1][0]:
            raise SnapshotFormatError(
                f"epochs must be strictly increasing ({epochs[-1][0]} then {epoch})", path
            )
        epochs.append((epoch, rel))
    if not epochs:
        raise SnapshotFormatError("manifest lists no epochs", path)

    manifest = SnapshotManifest(
        run_id=str(data.get("run_id", path.parent.name)),
        epochs=epochs,
        label_path=data.get("label_path"),
        metadata=dict(data.get("metadata", {})),
        base_dir=path.parent,
    )
    for _, rel in epochs:
        if not manifest.resolve(rel).is_file():
            raise SnapshotFormatError(f"snapshot {rel!r} does not exist", path)
    if manifest.label_path is not None and not manifest.resolve(manifest.label_path).is_file():
        raise SnapshotFormatError(f"label file {manifest.label_path!r} does not exist", path)
    return manifest


def load_snapshots(manifest: SnapshotManifest) -> list:
    """All snapshots of a run, labels attached; they must share N and d."""
    labels = None
    if manifest.label_path is not None:
        labels = read_labels(manifest.resolve(manifest.label_path))
    clouds = []
    for epoch, rel in manifest.epochs:
        pc = read_snapshot(manifest.resolve(rel))
        if clouds and (pc.n, pc.d) != (clouds[0].n, clouds[0].d):
            raise ShapeMismatchError(
                f"epoch {epoch} snapshot is {pc.n}x{pc.d}, "
                f"expected {clouds[0].n}x{clouds[0].d}"
            )
        clouds.append(attach_labels(pc, labels, manifest.label_path) if pc.labels is None else pc)
    return clouds
