"""Pure-Python versions of the compiled kernels in :mod:`kerrspt._ext`."""
import numpy as np


def rk4_affine(M, b, y0, dt, nsteps, bound, stride=1):
    """Same contract as :func:`kerrspt._ext.rk4.rk4_affine`."""
    M = np.ascontiguousarray(M, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    y = np.array(y0, dtype=float)
    n = y.shape[0]
    out = np.empty((nsteps // stride + 1, n))
    out[0] = y
    r = 0
    half, sixth = 0.5 * dt, dt / 6.0
    npair = n // 2
    for step in range(nsteps):
        k1 = M @ y + b
        k2 = M @ (y + half * k1) + b
        k3 = M @ (y + half * k2) + b
        k4 = M @ (y + dt * k3) + b
        ynew = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        pairs = ynew[: 2 * npair].reshape(npair, 2)
        if not np.all(np.isfinite(ynew)) or np.any(np.hypot(pairs[:, 0], pairs[:, 1]) > bound):
            return out[: r + 1], step, y
        y = ynew
        if (step + 1) % stride == 0:
            r += 1
            out[r] = y
    return out[: r + 1], nsteps, y
