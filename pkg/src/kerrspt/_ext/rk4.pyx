# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fixed-step RK4 for ``y' = M y + b`` with a blow-up guard."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, isfinite

cnp.import_array()


cdef inline void _affine(const double[:, ::1] M, const double[::1] b, const double* y,
                         double* out, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = b[i]
        for j in range(n):
            acc += M[i, j] * y[j]
        out[i] = acc


def rk4_affine(const double[:, ::1] M, const double[::1] b, const double[::1] y0, double dt,
               Py_ssize_t nsteps, double bound, Py_ssize_t stride=1):
    """Integrate and record every `stride`-th step (plus the initial state).

    Returns ``(samples, n_done, y_last)``.  ``n_done < nsteps`` means step
    ``n_done + 1`` produced a non-finite value or a (re, im) pair whose
    modulus exceeds `bound`; ``y_last`` is then the last finite state.
    """
    cdef Py_ssize_t n = y0.shape[0]
    cdef Py_ssize_t nrec = nsteps // stride + 1
    out = np.empty((nrec, n), dtype=np.float64)
    cdef double[:, ::1] rec = out
    y_arr = np.array(y0, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef double[::1] k1 = np.empty(n), k2 = np.empty(n), k3 = np.empty(n), k4 = np.empty(n)
    cdef double[::1] tmp = np.empty(n), ynew = np.empty(n)
    cdef Py_ssize_t step, i, r = 0, done = nsteps
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    cdef bint bad = False

    for i in range(n):
        rec[0, i] = y[i]
    with nogil:
        for step in range(nsteps):
            _affine(M, b, &y[0], &k1[0], n)
            for i in range(n):
                tmp[i] = y[i] + half * k1[i]
            _affine(M, b, &tmp[0], &k2[0], n)
            for i in range(n):
                tmp[i] = y[i] + half * k2[i]
            _affine(M, b, &tmp[0], &k3[0], n)
            for i in range(n):
                tmp[i] = y[i] + dt * k3[i]
            _affine(M, b, &tmp[0], &k4[0], n)
            for i in range(n):
                ynew[i] = y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(ynew[i]):
                    bad = True
            i = 0
            while i + 1 < n:
                if sqrt(ynew[i] * ynew[i] + ynew[i + 1] * ynew[i + 1]) > bound:
                    bad = True
                i += 2
            if bad:
                done = step
                break
            for i in range(n):
                y[i] = ynew[i]
            if (step + 1) % stride == 0:
                r += 1
                for i in range(n):
                    rec[r, i] = y[i]
    return out[: r + 1], done, y_arr
