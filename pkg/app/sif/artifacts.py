# sif/artifacts.py
"""
Output files of the command line: CSV tables with `# key=value` preambles,
signal CSVs, JSON reports, and the JSON run manifest. Every write goes through a temporary
file in the target directory followed by a rename.
"""

import hashlib
import os
import platform
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from sif import __version__ as TOOL_VERSION
from sif.grid import make_grid
from sif.operator import SphericalSignal
from sif.utils.errors import UsageError
from sif.utils.logger import get_logger

logger = get_logger(__name__)

CSV_FORMAT_VERSION = 1
MANIFEST_FORMAT_VERSION = 1
FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


def atomic_write(path: PathLike, data: Union[bytes, str]) -> Path:
    """
    Writes `data` to `path` through a temporary sibling file and `os.replace`.

    Raises:
        FileNotFoundError: If the parent directory does not exist.
    """
    path = Path(path)
    if not path.parent.is_dir():
        raise FileNotFoundError(f"Output directory does not exist: {path.parent}")
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path


def sha256_file(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _preamble(meta: Optional[Mapping[str, Any]]) -> str:
    lines = [f"# format_version={CSV_FORMAT_VERSION}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value}")
    return "\n".join(lines) + "\n"


def write_table(frame: pd.DataFrame, path: PathLike, meta: Optional[Mapping[str, Any]] = None) -> Path:
    """CSV with comment preamble, header row, '\\n' line ends and round-trip float precision."""
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    written = atomic_write(path, _preamble(meta) + body)
    logger.debug(f"Wrote {len(frame)} rows to {written}")
    return written


def read_meta(path: PathLike) -> Dict[str, str]:
    """The `# key=value` preamble of a CSV written by `write_table`."""
    meta = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
    return meta


def read_table(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def signal_frame(g: SphericalSignal) -> pd.DataFrame:
    N = g.gridspec.N
    i, j = np.meshgrid(np.arange(1, N + 1), np.arange(1, N + 1), indexing="ij")
    return pd.DataFrame({"i": i.ravel(), "j": j.ravel(), "value": g.values.ravel()})


def write_signal_csv(g: SphericalSignal, path: PathLike, **meta) -> Path:
    return write_table(signal_frame(g), path, {"N": g.gridspec.N, "units": "value=signal", **meta})


def read_signal_csv(path: PathLike) -> SphericalSignal:
    """
    Reads a signal written by `write_signal_csv` (any row order).

    Raises:
        UsageError: Missing N, wrong columns, or cells missing or repeated.
    """
    meta = read_meta(path)
    if "N" not in meta:
        raise UsageError(f"{path}: signal CSV needs a '# N=<N>' line")
    gridspec = make_grid(int(meta["N"]))
    frame = read_table(path)
    if list(frame.columns) != ["i", "j", "value"]:
        raise UsageError(f"{path}: expected columns i,j,value, found {','.join(frame.columns)}")
    N = gridspec.N
    if len(frame) != N * N or frame[["i", "j"]].duplicated().any():
        raise UsageError(f"{path}: expected exactly one row per cell ({N * N} rows)")
    i = frame["i"].to_numpy()
    j = frame["j"].to_numpy()
    if i.min() < 1 or i.max() > N or j.min() < 1 or j.max() > N:
        raise UsageError(f"{path}: cell index out of 1..{N}")
    values = np.empty((N, N))
    values[i - 1, j - 1] = frame["value"].to_numpy(dtype=float)
    return SphericalSignal(gridspec, values)


class OutputRecord(BaseModel):
    path: str
    sha256: str
    size_bytes: int


class RunManifest(BaseModel):
    """One per CLI run, written next to its outputs."""

    command: str
    parameters: Dict[str, Any]
    format_versions: Dict[str, int] = Field(
        default_factory=lambda: {"csv": CSV_FORMAT_VERSION, "manifest": MANIFEST_FORMAT_VERSION}
    )
    tool_version: str = TOOL_VERSION
    python_version: str = Field(default_factory=platform.python_version)
    started_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    timings: Dict[str, float] = Field(default_factory=dict, description="Wall-clock seconds per stage.")
    results: Dict[str, Any] = Field(
        default_factory=dict, description="Scalar outcomes worth checking without opening the tables."
    )
    outputs: List[OutputRecord] = Field(default_factory=list)

    def add_output(self, path: PathLike, relative_to: Optional[Path] = None) -> None:
        path = Path(path)
        name = str(path.relative_to(relative_to)) if relative_to is not None else path.name
        self.outputs.append(OutputRecord(path=name, sha256=sha256_file(path), size_bytes=path.stat().st_size))


class DecompositionReport(BaseModel):
    """Contents of `diagnostics.json`: why the outer loop stopped and one record per IMF."""

    finish_reason: Optional[str] = None
    imfs: List[Dict[str, Any]] = Field(default_factory=list)


def write_json(model: BaseModel, path: PathLike) -> Path:
    return atomic_write(path, model.model_dump_json(indent=2) + "\n")


def write_manifest(manifest: RunManifest, path: PathLike) -> Path:
    written = write_json(manifest, path)
    logger.info(f"Manifest with {len(manifest.outputs)} outputs written to {written}")
    return written


def verify_manifest(path: PathLike) -> List[str]:
    """Names of outputs whose current checksum differs from the manifest (empty when all match)."""
    path = Path(path)
    manifest = RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
    mismatched = []
    for record in manifest.outputs:
        target = path.parent / record.path
        if not target.exists() or sha256_file(target) != record.sha256:
            mismatched.append(record.path)
    return mismatched
