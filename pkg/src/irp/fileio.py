"""Flat-file formats: binary embedding files, CSV, label/index sidecars, manifests.

Binary embedding file (all little-endian)::

    offset  size  field
    0       4     magic b"IRP1"
    4       2     version (u16, currently 1)
    6       4     n rows (u32)
    10      4     d columns (u32)
    14      2     flags (u16; bit 0 = a label sidecar was written alongside)
    16      4*n*d float32 payload, row-major

Values are stored as float32 and widened to float64 on read. CSV input is
rounded through float32 as well, so both formats feed identical numbers
into the pipeline.
"""

from __future__ import annotations

import csv
import hashlib
import os
import struct

import numpy as np

from .errors import FileFormatError

MAGIC = b"IRP1"
VERSION = 1
HEADER = struct.Struct("<4sHIIH")
FLAG_LABELS = 1


def write_embeddings(path, M, flags=0):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise FileFormatError(f"{path}: can only store 2-d matrices, got shape {M.shape}")
    n, d = M.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, n, d, flags))
        fh.write(np.ascontiguousarray(M, dtype="<f4").tobytes())


def read_header(path):
    with open(path, "rb") as fh:
        raw = fh.read(HEADER.size)
    if len(raw) < HEADER.size:
        raise FileFormatError(f"{path}: file too short for an IRP1 header")
    magic, version, n, d, flags = HEADER.unpack(raw)
    if magic != MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    return n, d, flags


def read_embeddings(path) -> np.ndarray:
    """Read a binary embedding file, or a CSV file when the name ends in ``.csv``."""
    if str(path).lower().endswith(".csv"):
        return read_csv(path)
    n, d, _ = read_header(path)
    expected = 4 * n * d
    with open(path, "rb") as fh:
        fh.seek(HEADER.size)
        payload = fh.read()
    if len(payload) != expected:
        raise FileFormatError(
            f"{path}: header declares {n}x{d} ({expected} bytes) but payload has {len(payload)} bytes"
        )
    return np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(n, d)


def write_csv(path, M):
    M = np.asarray(M, dtype=np.float32)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"c{j}" for j in range(M.shape[1])])
        for row in M:
            writer.writerow([repr(float(v)) for v in row])


def read_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FileFormatError(f"{path}: empty CSV file") from None
        expected = [f"c{j}" for j in range(len(header))]
        if [h.strip() for h in header] != expected:
            raise FileFormatError(f"{path}: header must be c0..c{len(header) - 1}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FileFormatError(f"{path}:{lineno}: expected {len(header)} values, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float32).astype(np.float64)


def write_ints(path, values):
    with open(path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in values)


def read_ints(path) -> np.ndarray:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise FileFormatError(f"{path}:{lineno}: not an integer: {line!r}") from None
    return np.asarray(values, dtype=np.int64)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def write_manifest(path, entries):
    """Write ``key = value`` lines; keys keep insertion order."""
    with open(path, "w") as fh:
        fh.write("# irp run manifest v1\n")
        for key, value in entries.items():
            fh.write(f"{key} = {_fmt(value)}\n")


def read_manifest(path) -> dict:
    entries = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition(" = ")
            if not sep:
                raise FileFormatError(f"{path}: malformed manifest line {line!r}")
            entries[key] = value
    return entries


def default_manifest_path(output):
    root, _ = os.path.splitext(str(output))
    return root + ".manifest.txt"
