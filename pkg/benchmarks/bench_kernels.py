"""Compare the compiled kernel path against the numpy/scipy fallback.

Run twice to benchmark both paths in one go:

    python3 benchmarks/bench_kernels.py
"""
import os
import subprocess
import sys
import time

import numpy as np


def _bench():
    from worldlens._accel import NUMBA_ENABLED
    from worldlens._kernels import erode, label_components, ray_march

    rng = np.random.default_rng(7)
    path = "numba" if NUMBA_ENABLED else "fallback"

    mask = (rng.random((512, 512)) > 0.35).astype(np.uint8)
    erode(mask, 2)  # warm any JIT compile before timing
    t0 = time.perf_counter()
    for _ in range(20):
        erode(mask, 2)
    t_erode = (time.perf_counter() - t0) / 20

    binary = (rng.random((512, 512)) > 0.5).astype(np.uint8)
    label_components(binary)
    t0 = time.perf_counter()
    for _ in range(20):
        label_components(binary)
    t_label = (time.perf_counter() - t0) / 20

    grid = rng.integers(0, 3, size=(64, 64, 64)).astype(np.uint16)
    origins = rng.random((256, 3)) * 64
    dirs = rng.normal(size=(256, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    ray_march(grid, origins[0], dirs[0], np.zeros(3), 1.0, 200.0)
    t0 = time.perf_counter()
    for o, d in zip(origins, dirs):
        ray_march(grid, o, d, np.zeros(3), 1.0, 200.0)
    t_ray = (time.perf_counter() - t0) / 256

    print(f"{path:>8}  erode 512x512 r=2: {t_erode * 1e3:8.3f} ms  "
          f"label 512x512: {t_label * 1e3:8.3f} ms  "
          f"ray march 64^3: {t_ray * 1e6:8.1f} us")


if __name__ == "__main__":
    if os.environ.get("_BENCH_CHILD"):
        _bench()
    else:
        for flag in ("0", "1"):
            env = dict(os.environ, _BENCH_CHILD="1", WORLDLENS_NO_NUMBA=flag)
            subprocess.run([sys.executable, __file__], env=env, check=True)
