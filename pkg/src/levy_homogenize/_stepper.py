"""Numba inner loop for the microscopic jump-diffusion.

The macroscopic process is recovered by scaling: X_t = eps * Y_{t/eps^2},
where Y carries unit-order drift and diffusion.  All environment fields
enter through periodic lookup tables indexed by the absolute profile
position (phase + Y) mod L; jumps arrive on exact exponential clocks
interleaved with the Euler grid.
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_STEP_REJECT = 2

FAMILY_LINEAR = 0
FAMILY_TAIL = 1


@njit(cache=True, nogil=True, inline="always")
def _interp_periodic(tab, u):
    # u = position / dx, already reduced mod table length
    n = tab.shape[0]
    i0 = int(u)
    f = u - i0
    i1 = i0 + 1
    if i1 == n:
        i1 = 0
    return tab[i0] * (1.0 - f) + tab[i1] * f


@njit(cache=True, nogil=True, inline="always")
def _invert_loglog(lt, xp, fp, alpha):
    # xp ascending log-tail values, fp matching log-gamma values;
    # outside the table the tail is exactly a power law of slope -1/alpha.
    n = xp.shape[0]
    if lt <= xp[0]:
        return fp[0] - (lt - xp[0]) / alpha
    if lt >= xp[n - 1]:
        return fp[n - 1] - (lt - xp[n - 1]) / alpha
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if xp[mid] <= lt:
            lo = mid
        else:
            hi = mid
    w = (lt - xp[lo]) / (xp[lo + 1] - xp[lo])
    return fp[lo] * (1.0 - w) + fp[lo + 1] * w


@njit(cache=True, nogil=True)
def integrate_path(y0, phase, L, h, out_s, drift_tab, sqrtvar_tab, f_tabs,
                   family, alpha, g_tab, s_tab, ltp, lgp, ltn, lgn,
                   jump_s, marks, normals,
                   y_out, f_out, jump_amp):
    """March Y through Euler steps and jump events.

    Returns (status, time_of_failure, normals_used).
    """
    n_tab = drift_tab.shape[0]
    inv_dx = n_tab / L
    n_out = out_s.shape[0]
    n_jump = jump_s.shape[0]
    n_func = f_tabs.shape[0]
    max_drift_move = 0.1 * L

    y = y0
    s = 0.0
    i_norm = 0
    i_jump = 0
    i_out = 0
    facc = np.zeros(n_func)

    while i_out < n_out:
        t_out = out_s[i_out]
        if i_jump < n_jump:
            t_jump = jump_s[i_jump]
        else:
            t_jump = 1e300
        s_next = s + h
        if t_out < s_next:
            s_next = t_out
        if t_jump < s_next:
            s_next = t_jump
        dt = s_next - s
        if dt > 0.0:
            p = (phase + y) % L
            u = p * inv_dx
            if u >= n_tab:
                u = 0.0
            drift = _interp_periodic(drift_tab, u)
            sd = _interp_periodic(sqrtvar_tab, u)
            if abs(drift) * dt > max_drift_move:
                return STATUS_STEP_REJECT, s, i_norm
            y_new = y + drift * dt + sd * np.sqrt(dt) * normals[i_norm]
            i_norm += 1
            if not np.isfinite(y_new):
                return STATUS_NONFINITE, s, i_norm
            if n_func > 0:
                # trapezoid in micro time; the end point uses the pre-jump state
                u2 = ((phase + y_new) % L) * inv_dx
                if u2 >= n_tab:
                    u2 = 0.0
                for q in range(n_func):
                    facc[q] += 0.5 * (_interp_periodic(f_tabs[q], u)
                                      + _interp_periodic(f_tabs[q], u2)) * dt
            y = y_new
        s = s_next
        if s == t_jump:
            p = (phase + y) % L
            u = p * inv_dx
            if u >= n_tab:
                u = 0.0
            mark = marks[i_jump]
            if family == FAMILY_LINEAR:
                amp = _interp_periodic(g_tab, u) * mark
            else:
                sv = _interp_periodic(s_tab, u)
                lt = -alpha * np.log(abs(mark)) - np.log(alpha * sv)
                if mark > 0.0:
                    amp = np.exp(_invert_loglog(lt, ltp, lgp, alpha))
                else:
                    amp = -np.exp(_invert_loglog(lt, ltn, lgn, alpha))
            jump_amp[i_jump] = amp
            y = y + amp
            if not np.isfinite(y):
                return STATUS_NONFINITE, s, i_norm
            i_jump += 1
        if s == t_out:
            y_out[i_out] = y
            for q in range(n_func):
                f_out[q, i_out] = facc[q]
            i_out += 1
    return STATUS_OK, s, i_norm
