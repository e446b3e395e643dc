"""Binary matrix container for externally supplied Hamiltonians and observables.

Layout (little-endian)::

    0   5  magic b"QRXM1"
    5   1  kind: 0 dense, 1 coordinate
    6   1  flags: bit 0 set when the matrix is declared symmetric
    7   1  reserved, must be 0
    8   8  uint64 dimension N
    16  8  uint64 number of stored values
    24  .. payload

Dense payload is N*N float64 in row-major order. Coordinate payload is a
sequence of 24-byte records (uint64 i, uint64 j, float64 value); a
symmetric coordinate file holds only entries with i <= j.
"""

from __future__ import annotations

import logging
import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import constants as C
from .core import HermitianOperator, IngestionError

log = logging.getLogger(__name__)

MAGIC = b"QRXM1"
HEADER = np.dtype([("magic", "S5"), ("kind", "u1"), ("flags", "u1"), ("reserved", "u1"), ("dim", "<u8"), ("nnz", "<u8")])
RECORD = np.dtype([("i", "<u8"), ("j", "<u8"), ("v", "<f8")])
DENSE, COORDINATE = 0, 1
FLAG_SYMMETRIC = 1


@dataclass(frozen=True)
class MatrixHeader:
    kind: int
    symmetric: bool
    dim: int
    nnz: int


def atomic_write_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_matrix(matrix, kind: str = "dense", symmetric=None) -> bytes:
    """Serialize a square matrix; ``symmetric=None`` detects exact symmetry."""
    is_sp = sparse.issparse(matrix)
    m = matrix.tocoo() if is_sp else np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    n = m.shape[0]
    if symmetric is None:
        if is_sp:
            symmetric = (matrix != matrix.T).nnz == 0
        else:
            symmetric = bool(np.array_equal(m, m.T))
    head = np.zeros(1, dtype=HEADER)
    head["magic"] = MAGIC
    head["flags"] = FLAG_SYMMETRIC if symmetric else 0
    head["dim"] = n
    if kind == "dense":
        dense = m.toarray() if is_sp else m
        payload = np.ascontiguousarray(dense, dtype="<f8").tobytes()
        head["kind"] = DENSE
        head["nnz"] = n * n
    elif kind == "coordinate":
        if is_sp:
            i, j, v = m.row.astype(np.uint64), m.col.astype(np.uint64), m.data.astype(float)
        else:
            i, j = np.nonzero(m)
            v = m[i, j]
        if symmetric:
            keep = i <= j
            i, j, v = i[keep], j[keep], v[keep]
        order = np.lexsort((j, i))
        rec = np.zeros(len(order), dtype=RECORD)
        rec["i"], rec["j"], rec["v"] = i[order], j[order], v[order]
        payload = rec.tobytes()
        head["kind"] = COORDINATE
        head["nnz"] = len(rec)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return head.tobytes() + payload


def write_matrix(path, matrix, kind: str = "dense", symmetric=None) -> None:
    atomic_write_bytes(path, encode_matrix(matrix, kind, symmetric))


def read_header(buf: bytes, max_dim: int = C.MAX_MATRIX_DIM) -> MatrixHeader:
    if len(buf) < HEADER.itemsize:
        raise IngestionError(f"file too short for header ({len(buf)} bytes)")
    h = np.frombuffer(buf, dtype=HEADER, count=1)[0]
    if bytes(h["magic"]) != MAGIC:
        raise IngestionError(f"bad magic {bytes(h['magic'])!r}, expected {MAGIC!r}")
    kind, flags = int(h["kind"]), int(h["flags"])
    if kind not in (DENSE, COORDINATE):
        raise IngestionError(f"unknown matrix kind {kind}")
    if flags & ~FLAG_SYMMETRIC or int(h["reserved"]) != 0:
        raise IngestionError("unknown flag bits or non-zero reserved byte")
    dim, nnz = int(h["dim"]), int(h["nnz"])
    if dim < 1:
        raise IngestionError("dimension must be >= 1")
    if dim > max_dim:
        raise IngestionError(f"dimension {dim} exceeds limit {max_dim}")
    payload = len(buf) - HEADER.itemsize
    if kind == DENSE:
        if nnz != dim * dim or payload != 8 * dim * dim:
            raise IngestionError(f"dense payload has {payload} bytes, expected {8 * dim * dim}")
    elif payload != nnz * RECORD.itemsize:
        raise IngestionError(f"coordinate payload has {payload} bytes, expected {nnz * RECORD.itemsize}")
    return MatrixHeader(kind, bool(flags & FLAG_SYMMETRIC), dim, nnz)


def decode_matrix(buf: bytes, max_dim: int = C.MAX_MATRIX_DIM):
    """Raw (unsymmetrized) matrix and its header; coordinate files give CSR."""
    h = read_header(buf, max_dim)
    off = HEADER.itemsize
    if h.kind == DENSE:
        m = np.frombuffer(buf, dtype="<f8", offset=off).reshape(h.dim, h.dim).astype(float)
        if not np.all(np.isfinite(m)):
            raise IngestionError("matrix contains non-finite entries")
        if h.symmetric and not np.array_equal(m, m.T):
            raise IngestionError("dense file flagged symmetric but entries differ from transpose")
        return m, h
    rec = np.frombuffer(buf, dtype=RECORD, offset=off)
    i, j, v = rec["i"], rec["j"], rec["v"]
    if rec.size and (i.max() >= h.dim or j.max() >= h.dim):
        raise IngestionError("coordinate index outside declared dimension")
    if not np.all(np.isfinite(v)):
        raise IngestionError("matrix contains non-finite entries")
    if h.symmetric and np.any(i > j):
        raise IngestionError("symmetric coordinate file holds entries below the diagonal")
    if np.unique(i * np.uint64(h.dim) + j).size != rec.size:
        raise IngestionError("duplicate coordinate entries")
    i, j = i.astype(np.int64), j.astype(np.int64)
    if h.symmetric:
        off_diag = i != j
        i, j, v = np.concatenate([i, j[off_diag]]), np.concatenate([j, i[off_diag]]), np.concatenate([v, v[off_diag]])
    m = sparse.coo_matrix((v, (i, j)), shape=(h.dim, h.dim)).tocsr()
    return m, h


def read_matrix(path, max_dim: int = C.MAX_MATRIX_DIM):
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    return decode_matrix(buf, max_dim)


def ingest_matrix(path, name: str = "", tol=None, max_dim: int = C.MAX_MATRIX_DIM) -> HermitianOperator:
    """Read a matrix file into a symmetric operator.

    Small asymmetries (above ``ingest_asymmetry_rtol``) are averaged away
    with a warning; anything above ``ingest_reject_rtol`` is refused.
    """
    tol = C.resolve_tolerances(tol)
    m, _ = read_matrix(path, max_dim)
    op = HermitianOperator(m, name=name or os.path.basename(os.fspath(path)))
    asym = op.max_asymmetry()
    if asym > tol["ingest_reject_rtol"]:
        raise IngestionError(f"{op.name}: not symmetric (relative asymmetry {asym:.3e})")
    if asym > 0:
        if asym > tol["ingest_asymmetry_rtol"]:
            log.warning("%s: relative asymmetry %.3e, symmetrizing", op.name, asym)
        sym = (m + m.T) * 0.5
        op = HermitianOperator(sym.tocsr() if sparse.issparse(sym) else sym, name=op.name)
    return op
