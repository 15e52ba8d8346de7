# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coupling sweep: TLS rotations for a run of consecutive steps."""

from libc.math cimport cos, sin


cdef inline long _floordiv(long a, long b) noexcept nogil:
    # b > 0
    cdef long q = a / b
    if a % b != 0 and a < 0:
        q -= 1
    return q


def couple_steps(double complex[:, :, ::1] psi, const double[::1] cos_t, const double[::1] sin_t,
                 long base, long r, long n_start, long n_stop, double phase0, double omega_dt):
    """Apply coupling steps ``n_start <= n < n_stop`` to ``psi`` in place.

    Grid point ``i`` at step ``n`` uses table entry ``j = r i + n + base``;
    entries outside ``[0, len(cos_t))`` have zero coupling. The TLS phase at
    the step midpoint is ``phase0 + (n + 1/2) omega_dt``.
    """
    cdef long n_comp = psi.shape[0]
    cdef long npts = psi.shape[2]
    cdef long j_max = cos_t.shape[0] - 1
    cdef long n, i, i_lo, i_hi, j, c
    cdef double alpha, ct, st, sa, ca, ar, ai, br, bi
    # psi viewed as interleaved doubles; level 1 then level 2 for each component
    cdef double *p = <double *> &psi[0, 0, 0]
    cdef double *pa
    cdef double *pb
    cdef const double *ctab = &cos_t[0]
    cdef const double *stab = &sin_t[0]
    with nogil:
        for n in range(n_start, n_stop):
            alpha = phase0 + (n + 0.5) * omega_dt
            sa = sin(alpha)
            ca = cos(alpha)
            i_lo = -_floordiv(n + base, r)
            i_hi = _floordiv(j_max - n - base, r)
            if i_lo < 0:
                i_lo = 0
            if i_hi > npts - 1:
                i_hi = npts - 1
            for c in range(n_comp):
                pa = p + 4 * c * npts
                pb = pa + 2 * npts
                j = r * i_lo + n + base
                for i in range(i_lo, i_hi + 1):
                    ct = ctab[j]
                    st = stab[j]
                    j += r
                    ar = pa[2 * i]
                    ai = pa[2 * i + 1]
                    br = pb[2 * i]
                    bi = pb[2 * i + 1]
                    # a' = ct a - i st exp(-i alpha) b,  b' = ct b - i st exp(+i alpha) a
                    pa[2 * i] = ct * ar + st * (ca * bi - sa * br)
                    pa[2 * i + 1] = ct * ai - st * (sa * bi + ca * br)
                    pb[2 * i] = ct * br + st * (sa * ar + ca * ai)
                    pb[2 * i + 1] = ct * bi + st * (sa * ai - ca * ar)
