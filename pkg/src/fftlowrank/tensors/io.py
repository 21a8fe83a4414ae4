"""Self-describing binary container for tensors.

Layout (all integers little-endian)::

    b"LRT1" | format u8 | complex u8 | d u32 | shape u64*d
    | nranks u32 | ranks u64*nranks | npayload u32
    | per payload: ndim u32, dims u64*ndim, data (<f8, complex interleaved)
"""
from __future__ import annotations

import struct

import numpy as np

from .cp import CpTensor
from .full import FullTensor
from .tt import TtTensor
from .tucker import TuckerTensor

MAGIC = b"LRT1"
_TAGS = {"full": 0, "cp": 1, "tucker": 2, "tt": 3}
_NAMES = {v: k for k, v in _TAGS.items()}


def _payloads(v):
    if v.format == "full":
        return [v.data]
    if v.format == "cp":
        return [v.weights] + v.factors
    if v.format == "tucker":
        return [v.core] + v.factors
    return list(v.carriages)


def dumps(v):
    arrays = _payloads(v)
    is_complex = any(np.iscomplexobj(a) for a in arrays)
    out = [MAGIC, struct.pack("<BBI", _TAGS[v.format], int(is_complex), v.ndim)]
    out.append(struct.pack(f"<{v.ndim}Q", *v.shape))
    out.append(struct.pack("<I", len(v.ranks)) + struct.pack(f"<{len(v.ranks)}Q", *v.ranks))
    out.append(struct.pack("<I", len(arrays)))
    for a in arrays:
        a = np.asarray(a, dtype=complex if is_complex else float)
        out.append(struct.pack("<I", a.ndim) + struct.pack(f"<{a.ndim}Q", *a.shape))
        raw = a.view(float) if is_complex else a
        out.append(np.ascontiguousarray(raw, dtype="<f8").tobytes())
    return b"".join(out)


def loads(buf):
    if buf[:4] != MAGIC:
        raise ValueError("not a tensor container (bad magic)")
    pos = 4
    tag, is_complex, d = struct.unpack_from("<BBI", buf, pos)
    pos += 6
    shape = struct.unpack_from(f"<{d}Q", buf, pos)
    pos += 8 * d
    (nr,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    ranks = struct.unpack_from(f"<{nr}Q", buf, pos)
    pos += 8 * nr
    (npay,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    arrays = []
    for _ in range(npay):
        (nd,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        dims = struct.unpack_from(f"<{nd}Q", buf, pos)
        pos += 8 * nd
        count = int(np.prod(dims, dtype=np.int64)) * (2 if is_complex else 1)
        raw = np.frombuffer(buf, dtype="<f8", count=count, offset=pos).astype(float)
        pos += 8 * count
        a = raw.view(complex) if is_complex else raw
        arrays.append(a.reshape(dims))
    fmt = _NAMES[tag]
    if fmt == "full":
        v = FullTensor(arrays[0])
    elif fmt == "cp":
        v = CpTensor(arrays[0].real, arrays[1:])
    elif fmt == "tucker":
        v = TuckerTensor(arrays[0], arrays[1:])
    else:
        v = TtTensor(arrays)
    if tuple(v.shape) != tuple(shape) or tuple(v.ranks) != tuple(ranks):
        raise ValueError("container header does not match its payload")
    return v


def save(v, path):
    with open(path, "wb") as fh:
        fh.write(dumps(v))


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
