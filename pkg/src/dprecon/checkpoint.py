"""Binary checkpoint container for named float64 arrays.

Layout (all integers little-endian)::

    magic      8 bytes   b"DPRCKPT\\0"
    version    uint32    currently 1
    count      uint32    number of entries
    entries, sorted by name, each:
        name_len   uint32
        name       name_len bytes, UTF-8
        ndim       uint32
        shape      ndim x uint64
        data       prod(shape) x float64 (IEEE-754, little-endian, row-major)

Entries are written in sorted name order, so equal parameter sets always
serialise to identical bytes.
"""

import struct

import numpy as np

MAGIC = b"DPRCKPT\0"
VERSION = 1


class CheckpointError(ValueError):
    pass


def dumps(params):
    parts = [MAGIC, struct.pack("<II", VERSION, len(params))]
    for name in sorted(params):
        arr = np.ascontiguousarray(params[name], dtype="<f8")
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<I", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(arr.tobytes())
    return b"".join(parts)


def loads(blob):
    if blob[:8] != MAGIC:
        raise CheckpointError("not a checkpoint (bad magic)")
    version, count = struct.unpack_from("<II", blob, 8)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    pos = 16
    params = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        name = blob[pos:pos + nlen].decode("utf-8")
        pos += nlen
        (ndim,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}Q", blob, pos)
        pos += 8 * ndim
        size = int(np.prod(shape, dtype=np.int64))
        arr = np.frombuffer(blob, dtype="<f8", count=size, offset=pos).astype(np.float64).reshape(shape)
        pos += 8 * size
        params[name] = arr
    if pos != len(blob):
        raise CheckpointError("trailing bytes after last entry")
    return params


def save(path, params):
    with open(path, "wb") as fh:
        fh.write(dumps(params))


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
