"""Writer for the WLT tensor interchange format.

Layout (little-endian): magic "WLT1", dtype code u8 (1 = f32, 2 = u8,
3 = u16), ndim u8, two reserved zero bytes, ndim u64 dims, row-major payload.
"""
import struct

import numpy as np

MAGIC = b"WLT1"
_CODES = {np.dtype("<f4"): 1, np.dtype("<u1"): 2, np.dtype("<u2"): 3}


def write_wlt(arr, path):
    arr = np.ascontiguousarray(arr)
    code = _CODES.get(arr.dtype)
    if code is None:
        raise ValueError(f"unsupported dtype {arr.dtype}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BBH", code, arr.ndim, 0))
        for dim in arr.shape:
            fh.write(struct.pack("<Q", dim))
        fh.write(arr.tobytes())
