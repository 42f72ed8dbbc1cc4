"""Backend-independent pieces built on the selected kernel backend."""
import numpy as np

from . import impl


def dp_joint_trim(x, y, kx, ky=None):
    """Exact hard-trim minimum of the mean squared monotone matching cost.

    Drops exactly kx atoms from x and ky from y (ky defaults to kx; the
    retained counts must agree). Returns (sum of squared differences,
    retained x indices, retained y indices).
    """
    x = np.ascontiguousarray(x, float)
    y = np.ascontiguousarray(y, float)
    if ky is None:
        ky = kx
    if x.size - kx != y.size - ky:
        raise ValueError("retained counts must match")
    if kx < 0 or ky < 0 or kx >= x.size or ky >= y.size:
        raise ValueError("trim counts out of range")
    r = x.size - kx
    cost, code = impl.dp_cost_table(x, y, kx, ky)
    keep_x = np.empty(r, dtype=np.int64)
    keep_y = np.empty(r, dtype=np.int64)
    t, dx, dy = r, kx, ky
    while t > 0:
        while code[t, dx, dy] & 2:
            dy -= 1
        while code[t, dx, dy] & 1:
            dx -= 1
        keep_x[t - 1] = t - 1 + dx
        keep_y[t - 1] = t - 1 + dy
        t -= 1
    return cost, keep_x, keep_y
