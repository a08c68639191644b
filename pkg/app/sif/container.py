# sif/container.py
"""
Binary container for assembled operators.

Layout (little endian):
    b"SIFOPER\\0"                    magic
    uint32 + bytes                  JSON header (OperatorHeader)
    uint32                          record count
    records                         (t:int32, s:int32, values:float64[N]) per stored band
    32 bytes                        SHA-256 of everything above
"""

import hashlib
import struct
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from sif.artifacts import atomic_write
from sif.conic_filter import FilterSpec
from sif.grid import make_grid
from sif.operator import SiftOperator
from sif.utils.errors import ChecksumError, ContainerFormatError, FormatVersionError
from sif.utils.logger import get_logger

logger = get_logger(__name__)

MAGIC = b"SIFOPER\x00"
FORMAT_VERSION = 1
DIGEST_SIZE = 32


class OperatorHeader(BaseModel):
    version: int = Field(default=FORMAT_VERSION)
    N: int
    R: float
    m: Optional[float] = None
    kind: Literal["exact", "approx"]
    quad_level: Optional[int] = None
    s_max: int
    renormalized: bool = False


def _record_dtype(N: int) -> np.dtype:
    return np.dtype([("t", "<i4"), ("s", "<i4"), ("values", "<f8", (N,))])


def to_bytes(op: SiftOperator, version: int = FORMAT_VERSION) -> bytes:
    N = op.gridspec.N
    header = OperatorHeader(
        version=version,
        N=N,
        R=op.filter.R,
        m=op.filter.m,
        kind=op.kind,
        quad_level=op.quad_level,
        s_max=op.s_max,
        renormalized=op.renormalized,
    ).model_dump_json().encode("utf-8")
    bands = op.bands
    records = np.zeros(len(bands), dtype=_record_dtype(N))
    for row, ((t, s), values) in enumerate(sorted(bands.items(), key=lambda item: (item[0][1], item[0][0]))):
        records[row] = (t, s, values)
    body = b"".join(
        [MAGIC, struct.pack("<I", len(header)), header, struct.pack("<I", len(records)), records.tobytes()]
    )
    return body + hashlib.sha256(body).digest()


def from_bytes(blob: bytes) -> SiftOperator:
    if len(blob) < len(MAGIC) + 8 + DIGEST_SIZE:
        raise ChecksumError("operator container is truncated")
    body, digest = blob[:-DIGEST_SIZE], blob[-DIGEST_SIZE:]
    if not body.startswith(MAGIC):
        raise ContainerFormatError("not an operator container (bad magic)")
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumError("operator container checksum mismatch")

    offset = len(MAGIC)
    (header_len,) = struct.unpack_from("<I", body, offset)
    offset += 4
    try:
        header = OperatorHeader.model_validate_json(body[offset:offset + header_len])
    except ValidationError as exc:
        raise ContainerFormatError(f"malformed operator header: {exc}") from exc
    if header.version != FORMAT_VERSION:
        raise FormatVersionError(
            f"container format version {header.version}, this build reads {FORMAT_VERSION}"
        )
    offset += header_len
    (count,) = struct.unpack_from("<I", body, offset)
    offset += 4
    dtype = _record_dtype(header.N)
    if len(body) - offset != count * dtype.itemsize:
        raise ContainerFormatError("record section length does not match the header")
    records = np.frombuffer(body, dtype=dtype, count=count, offset=offset)

    gridspec = make_grid(header.N)
    kernel = np.zeros((2 * header.s_max + 1, header.N, header.N))
    kernel[records["s"] + header.s_max, records["t"], :] = records["values"]
    filter = FilterSpec(R=header.R, m=header.m)
    return SiftOperator(gridspec, filter, header.kind, kernel, header.quad_level, header.renormalized)


def serialize(op: SiftOperator, path: Union[str, Path]) -> Path:
    """Write `op` atomically (temporary file in the target directory, then rename)."""
    blob = to_bytes(op)
    path = atomic_write(path, blob)
    logger.info(f"Wrote {op!r} to {path} ({len(blob)} bytes).")
    return path


def deserialize(path: Union[str, Path]) -> SiftOperator:
    return from_bytes(Path(path).read_bytes())
