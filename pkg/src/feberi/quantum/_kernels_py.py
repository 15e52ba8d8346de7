"""Pure-numpy coupling sweep, same contract as the compiled kernel."""

import math


def couple_steps(psi, cos_t, sin_t, base, r, n_start, n_stop, phase0, omega_dt):
    """Apply coupling steps ``n_start <= n < n_stop`` to ``psi`` in place."""
    npts = psi.shape[2]
    j_max = cos_t.shape[0] - 1
    for n in range(n_start, n_stop):
        alpha = phase0 + (n + 0.5) * omega_dt
        up = math.sin(alpha) - 1j * math.cos(alpha)
        down = -math.sin(alpha) - 1j * math.cos(alpha)
        i_lo = max(0, -((n + base) // r))
        i_hi = min(npts - 1, (j_max - n - base) // r)
        if i_hi < i_lo:
            continue
        j0 = r * i_lo + n + base
        sl = slice(j0, j0 + r * (i_hi - i_lo) + 1, r)
        ct = cos_t[sl]
        st = sin_t[sl]
        a = psi[:, 0, i_lo:i_hi + 1]
        b = psi[:, 1, i_lo:i_hi + 1]
        a_new = ct * a + (st * down) * b
        b *= ct
        b += (st * up) * a
        a[...] = a_new
