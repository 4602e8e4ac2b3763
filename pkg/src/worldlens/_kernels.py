"""Hot inner loops: morphology, labeling, voxel ray marching.

Each kernel has a numba ``@njit`` implementation and a numpy/scipy fallback.
The active path is chosen once at import time via ``WORLDLENS_NO_NUMBA``
(see :mod:`worldlens._accel`).
"""
import numpy as np

from ._accel import NUMBA_ENABLED, njit


# --- binary erosion (Chebyshev ball, pixels outside the image are unset) ---

@njit(cache=True)
def _erode_jit(mask, radius):
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for i in range(h):
        for j in range(w):
            if mask[i, j] == 0:
                continue
            keep = True
            if i < radius or j < radius or i + radius >= h or j + radius >= w:
                keep = False
            else:
                for di in range(-radius, radius + 1):
                    for dj in range(-radius, radius + 1):
                        if mask[i + di, j + dj] == 0:
                            keep = False
                            break
                    if not keep:
                        break
            if keep:
                out[i, j] = 1
    return out


def _erode_numpy(mask, radius):
    h, w = mask.shape
    padded = np.zeros((h + 2 * radius, w + 2 * radius), dtype=np.uint8)
    padded[radius:radius + h, radius:radius + w] = mask
    out = np.ones((h, w), dtype=np.uint8)
    for di in range(2 * radius + 1):
        for dj in range(2 * radius + 1):
            out &= padded[di:di + h, dj:dj + w]
    return out


def erode(mask, radius):
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if radius == 0:
        return mask.copy()
    if NUMBA_ENABLED:
        return _erode_jit(mask, radius)
    return _erode_numpy(mask, radius)


# --- 4-connected component labeling ----------------------------------------

@njit(cache=True)
def _label_jit(binary):
    h, w = binary.shape
    labels = np.zeros((h, w), dtype=np.int32)
    stack = np.empty((h * w, 2), dtype=np.int32)
    current = 0
    for si in range(h):
        for sj in range(w):
            if binary[si, sj] == 0 or labels[si, sj] != 0:
                continue
            current += 1
            top = 0
            stack[top, 0] = si
            stack[top, 1] = sj
            top += 1
            labels[si, sj] = current
            while top > 0:
                top -= 1
                i = stack[top, 0]
                j = stack[top, 1]
                if i > 0 and binary[i - 1, j] != 0 and labels[i - 1, j] == 0:
                    labels[i - 1, j] = current
                    stack[top, 0] = i - 1
                    stack[top, 1] = j
                    top += 1
                if i + 1 < h and binary[i + 1, j] != 0 and labels[i + 1, j] == 0:
                    labels[i + 1, j] = current
                    stack[top, 0] = i + 1
                    stack[top, 1] = j
                    top += 1
                if j > 0 and binary[i, j - 1] != 0 and labels[i, j - 1] == 0:
                    labels[i, j - 1] = current
                    stack[top, 0] = i
                    stack[top, 1] = j - 1
                    top += 1
                if j + 1 < w and binary[i, j + 1] != 0 and labels[i, j + 1] == 0:
                    labels[i, j + 1] = current
                    stack[top, 0] = i
                    stack[top, 1] = j + 1
                    top += 1
    return labels, current


def _label_scipy(binary):
    from scipy import ndimage

    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)
    labels, count = ndimage.label(binary, structure=structure)
    return labels.astype(np.int32), count


def label_components(binary):
    binary = np.ascontiguousarray(binary, dtype=np.uint8)
    if NUMBA_ENABLED:
        return _label_jit(binary)
    return _label_scipy(binary)


# --- voxel-grid DDA ray marching ---------------------------------------------

@njit(cache=True)
def _ray_march_jit(labels, origin, direction, grid_origin, voxel_size, max_range):
    """March one ray; return (hit_flag, ix, iy, iz).

    Ties at voxel boundaries step the lowest axis first (x, then y, then z).
    """
    nx, ny, nz = labels.shape

    # slab intersection with the grid bounding box, in world units along the ray
    t0 = 0.0
    t1 = max_range
    for a in range(3):
        lo = grid_origin[a]
        hi = grid_origin[a] + voxel_size * labels.shape[a]
        d = direction[a]
        o = origin[a]
        if abs(d) < 1e-300:
            if o < lo or o >= hi:
                return False, -1, -1, -1
        else:
            ta = (lo - o) / d
            tb = (hi - o) / d
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
    if t0 > t1:
        return False, -1, -1, -1

    eps = 1e-9 * voxel_size
    t = t0 + eps
    ix = int(np.floor((origin[0] + t * direction[0] - grid_origin[0]) / voxel_size))
    iy = int(np.floor((origin[1] + t * direction[1] - grid_origin[1]) / voxel_size))
    iz = int(np.floor((origin[2] + t * direction[2] - grid_origin[2]) / voxel_size))
    if ix < 0:
        ix = 0
    if iy < 0:
        iy = 0
    if iz < 0:
        iz = 0
    if ix >= nx:
        ix = nx - 1
    if iy >= ny:
        iy = ny - 1
    if iz >= nz:
        iz = nz - 1

    step_x = 1 if direction[0] > 0 else -1
    step_y = 1 if direction[1] > 0 else -1
    step_z = 1 if direction[2] > 0 else -1

    big = 1e300
    if direction[0] != 0.0:
        nxt = grid_origin[0] + (ix + (1 if step_x > 0 else 0)) * voxel_size
        tmax_x = (nxt - origin[0]) / direction[0]
        tdel_x = voxel_size / abs(direction[0])
    else:
        tmax_x = big
        tdel_x = big
    if direction[1] != 0.0:
        nxt = grid_origin[1] + (iy + (1 if step_y > 0 else 0)) * voxel_size
        tmax_y = (nxt - origin[1]) / direction[1]
        tdel_y = voxel_size / abs(direction[1])
    else:
        tmax_y = big
        tdel_y = big
    if direction[2] != 0.0:
        nxt = grid_origin[2] + (iz + (1 if step_z > 0 else 0)) * voxel_size
        tmax_z = (nxt - origin[2]) / direction[2]
        tdel_z = voxel_size / abs(direction[2])
    else:
        tmax_z = big
        tdel_z = big

    t_cur = t0
    while True:
        if t_cur > max_range:
            return False, -1, -1, -1
        if labels[ix, iy, iz] != 0:
            return True, ix, iy, iz
        if tmax_x <= tmax_y and tmax_x <= tmax_z:
            t_cur = tmax_x
            tmax_x += tdel_x
            ix += step_x
            if ix < 0 or ix >= nx:
                return False, -1, -1, -1
        elif tmax_y <= tmax_z:
            t_cur = tmax_y
            tmax_y += tdel_y
            iy += step_y
            if iy < 0 or iy >= ny:
                return False, -1, -1, -1
        else:
            t_cur = tmax_z
            tmax_z += tdel_z
            iz += step_z
            if iz < 0 or iz >= nz:
                return False, -1, -1, -1


_ray_march_py = _ray_march_jit.py_func if NUMBA_ENABLED else _ray_march_jit


def ray_march(labels, origin, direction, grid_origin, voxel_size, max_range):
    labels = np.ascontiguousarray(labels, dtype=np.uint16)
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    grid_origin = np.asarray(grid_origin, dtype=np.float64)
    if NUMBA_ENABLED:
        return _ray_march_jit(labels, origin, direction, grid_origin,
                              float(voxel_size), float(max_range))
    return _ray_march_py(labels, origin, direction, grid_origin,
                         float(voxel_size), float(max_range))


def voxel_entry_distance(origin, direction, grid_origin, voxel_size, idx):
    """World-space ray parameter at which the ray enters voxel ``idx``.

    Slab method; clamped at 0 for rays starting inside the voxel.
    """
    t_enter = -np.inf
    for a in range(3):
        lo = grid_origin[a] + idx[a] * voxel_size
        hi = lo + voxel_size
        d = direction[a]
        if abs(d) < 1e-300:
            continue
        ta = (lo - origin[a]) / d
        tb = (hi - origin[a]) / d
        if ta > tb:
            ta, tb = tb, ta
        if ta > t_enter:
            t_enter = ta
    if t_enter == -np.inf or t_enter < 0.0:
        return 0.0
    return float(t_enter)
