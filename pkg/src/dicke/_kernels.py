"""Optional numba-accelerated kernels with pure-numpy fallbacks.

Two hot paths live here: the fused Hamiltonian matvec (one pass over the
coefficient matrix instead of a chain of numpy temporaries) and the
Benettin two-trajectory loop with an embedded Dormand-Prince 5(4)
stepper.  Everything is compiled without fastmath so results match the
numpy fallbacks to rounding order and stay deterministic.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in supported envs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco


@njit(cache=True)
def _matvec_jit(c, out, m_coup, sxp_half, delta_n, sqrt_n):
    nr, nc = c.shape
    for i in range(nr):
        mi = m_coup[i]
        for n in range(nc):
            v = delta_n[n] * c[i, n]
            if n + 1 < nc:
                v = v + mi * sqrt_n[n + 1] * c[i, n + 1]
            if n > 0:
                v = v + mi * sqrt_n[n] * c[i, n - 1]
            if i > 0:
                v = v + sxp_half[i - 1] * c[i - 1, n]
            if i + 1 < nr:
                v = v + sxp_half[i] * c[i + 1, n]
            out[i, n] = v
    return out


def matvec(c, out, m_coup, sxp_half, delta_n, sqrt_n):
    """H @ c into out; single fused pass when numba is available."""
    if HAVE_NUMBA:
        return _matvec_jit(c, out, m_coup, sxp_half, delta_n, sqrt_n)
    np.multiply(delta_n, c, out=out)
    tmp = sqrt_n[1:] * c[:, 1:]
    tmp *= m_coup[:, None]
    out[:, :-1] += tmp
    tmp = sqrt_n[1:] * c[:, :-1]
    tmp *= m_coup[:, None]
    out[:, 1:] += tmp
    out[1:, :] += sxp_half[:, None] * c[:-1, :]
    out[:-1, :] += sxp_half[:, None] * c[1:, :]
    return out


# Dormand-Prince 5(4) tableau (the classic RK45 pair with FSAL).
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    ]
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array(
    [
        71 / 57600,
        0.0,
        -71 / 16695,
        71 / 1920,
        -17253 / 339200,
        22 / 525,
        -1 / 40,
    ]
)


@njit(cache=True)
def _single_rhs(y, k, omega, delta, out):
    sy = y[1]
    br = y[3]
    f = k * br
    out[0] = -f * sy
    out[1] = f * y[0] - omega * y[2]
    out[2] = omega * sy
    out[3] = delta * y[4]
    out[4] = -delta * (br + y[2])
    return out


@njit(cache=True)
def _dp54_sample_jit(y0, t_final, n_samples, rtol, atol, k, omega, delta,
                     a, b, e):
    """Integrate the 5-dim mean-field system, sampling on a uniform grid.

    Returns (ok, samples[(n_samples+1), 5], nfev); steps are clipped to the
    sample times so no interpolant is needed.
    """
    n = 5
    y = y0.copy()
    ks = np.empty((7, n))
    ytmp = np.empty(n)
    ynew = np.empty(n)
    samples = np.empty((n_samples + 1, n))
    samples[0] = y
    t = 0.0
    h = min(1e-3, t_final / max(n_samples, 1))
    _single_rhs(y, k, omega, delta, ks[0])
    nfev = 1
    n_reject = 0
    for idx in range(1, n_samples + 1):
        t_target = t_final * idx / n_samples
        while t < t_target - 1e-14 * max(abs(t_target), 1.0):
            if h > t_target - t:
                h = t_target - t
            for s in range(1, 7):
                for i in range(n):
                    acc = 0.0
                    for j in range(s):
                        if s < 6:
                            acc += a[s, j] * ks[j, i]
                        else:
                            acc += b[j] * ks[j, i]
                    ytmp[i] = y[i] + h * acc
                if s < 6:
                    _single_rhs(ytmp, k, omega, delta, ks[s])
                else:
                    for i in range(n):
                        ynew[i] = ytmp[i]
                    _single_rhs(ynew, k, omega, delta, ks[6])
            nfev += 6
            err = 0.0
            for i in range(n):
                ei = 0.0
                for j in range(7):
                    ei += e[j] * ks[j, i]
                ei *= h
                yi = abs(y[i])
                yn = abs(ynew[i])
                scale = atol + rtol * (yi if yi > yn else yn)
                ei /= scale
                err += ei * ei
            err = np.sqrt(err / n)
            if err <= 1.0:
                t += h
                for i in range(n):
                    y[i] = ynew[i]
                    ks[0, i] = ks[6, i]
                factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2))
                if n_reject > 0:
                    factor = min(factor, 1.0)
                h *= factor
                n_reject = 0
            else:
                h *= max(0.2, 0.9 * err**-0.2)
                n_reject += 1
                if n_reject > 60 or h < 1e-14 * max(abs(t), 1.0):
                    return False, samples, nfev
        samples[idx] = y
        t = t_target
    return True, samples, nfev


def dp54_sample(y0, t_final, n_samples, rtol, atol, k, omega, delta):
    return _dp54_sample_jit(
        np.asarray(y0, dtype=float), t_final, n_samples, rtol, atol,
        k, omega, delta, _DP_A, _DP_B, _DP_E,
    )


@njit(cache=True)
def _pair_rhs(y, k, omega, delta, out):
    for o in (0, 5):
        sy = y[o + 1]
        br = y[o + 3]
        f = k * br
        out[o] = -f * sy
        out[o + 1] = f * y[o] - omega * y[o + 2]
        out[o + 2] = omega * sy
        out[o + 3] = delta * y[o + 4]
        out[o + 4] = -delta * (br + y[o + 2])
    return out


@njit(cache=True)
def _dp54_span(y, t0, t1, rtol, atol, k, omega, delta, h0, a, b, e, c):
    """Advance y (in place) from t0 to t1; returns (ok, h_last)."""
    n = y.size
    ks = np.empty((7, n))
    ytmp = np.empty(n)
    ynew = np.empty(n)
    t = t0
    h = h0 if 0.0 < h0 <= (t1 - t0) else (t1 - t0) * 1e-3
    _pair_rhs(y, k, omega, delta, ks[0])
    n_reject = 0
    while t < t1 - 1e-14 * max(abs(t1), 1.0):
        if h > t1 - t:
            h = t1 - t
        for s in range(1, 7):
            for i in range(n):
                acc = 0.0
                for j in range(s):
                    if s < 6:
                        acc += a[s, j] * ks[j, i]
                    else:
                        acc += b[j] * ks[j, i]
                ytmp[i] = y[i] + h * acc
            if s < 6:
                _pair_rhs(ytmp, k, omega, delta, ks[s])
            else:
                for i in range(n):
                    ynew[i] = ytmp[i]
                _pair_rhs(ynew, k, omega, delta, ks[6])
        err = 0.0
        for i in range(n):
            ei = 0.0
            for j in range(7):
                ei += e[j] * ks[j, i]
            ei *= h
            yi = abs(y[i])
            yn = abs(ynew[i])
            scale = atol + rtol * (yi if yi > yn else yn)
            ei /= scale
            err += ei * ei
        err = np.sqrt(err / n)
        if err <= 1.0:
            t += h
            for i in range(n):
                y[i] = ynew[i]
            for i in range(n):
                ks[0, i] = ks[6, i]
            factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2))
            if n_reject > 0:
                factor = min(factor, 1.0)
            h *= factor
            n_reject = 0
        else:
            h *= max(0.2, 0.9 * err**-0.2)
            n_reject += 1
            if n_reject > 60 or h < 1e-14 * max(abs(t), 1.0):
                return False, h
    return True, h


@njit(cache=True)
def _benettin_jit(
    y, d0, t_total, t_transient, renorm_dt, rtol, atol, k, omega, delta, a, b, e, c
):
    """Benettin loop on the 10-dim (reference, clone) system.

    Returns (acc, t_acc, n_renorms, fail_time); fail_time >= 0 flags an
    integration failure at that time.
    """
    acc = 0.0
    t_acc = 0.0
    n_renorms = 0
    t = 0.0
    h = 0.0
    d_start = 0.0
    for i in range(5):
        d_start += (y[5 + i] - y[i]) ** 2
    d_start = np.sqrt(d_start)
    while t < t_total - 1e-9:
        t_next = t + renorm_dt
        if t_next > t_total:
            t_next = t_total
        ok, h = _dp54_span(y, t, t_next, rtol, atol, k, omega, delta, h, a, b, e, c)
        if not ok:
            return acc, t_acc, n_renorms, t
        d_end = 0.0
        for i in range(5):
            d_end += (y[5 + i] - y[i]) ** 2
        d_end = np.sqrt(d_end)
        if d_end == 0.0 or not np.isfinite(d_end):
            return acc, t_acc, n_renorms, t
        if t >= t_transient:
            acc += np.log(d_end / d_start)
            t_acc += t_next - t
            n_renorms += 1
        scale = d0 / d_end
        for i in range(5):
            y[5 + i] = y[i] + scale * (y[5 + i] - y[i])
        # project BOTH spins back onto the sphere: correcting only the
        # clone would inject the reference's norm drift into the
        # separation and bias the exponent upward
        for o in (0, 5):
            snorm = np.sqrt(y[o] ** 2 + y[o + 1] ** 2 + y[o + 2] ** 2)
            y[o] /= snorm
            y[o + 1] /= snorm
            y[o + 2] /= snorm
        d_start = 0.0
        for i in range(5):
            d_start += (y[5 + i] - y[i]) ** 2
        d_start = np.sqrt(d_start)
        t = t_next
    return acc, t_acc, n_renorms, -1.0


def benettin_accumulate(y, d0, t_total, t_transient, renorm_dt, rtol, atol,
                        k, omega, delta):
    """Run the jitted Benettin loop; y is modified in place."""
    return _benettin_jit(
        y, d0, t_total, t_transient, renorm_dt, rtol, atol, k, omega, delta,
        _DP_A, _DP_B, _DP_E, _DP_C,
    )
