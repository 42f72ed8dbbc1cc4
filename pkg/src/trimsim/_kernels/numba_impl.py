"""Numba-jitted kernel implementations (default fast path)."""
import numpy as np
from numba import njit

BACKEND = "numba"

_CD_PASSES = 60


@njit(cache=True)
def _w2sq_merge(xv, xcw, yv, ycw):
    n = xv.size
    m = yv.size
    i = 0
    j = 0
    prev = 0.0
    s = 0.0
    while i < n and j < m:
        ci = xcw[i]
        cj = ycw[j]
        hi = ci if ci < cj else cj
        if hi > prev:
            d = xv[i] - yv[j]
            s += d * d * (hi - prev)
            prev = hi
        if ci <= hi:
            i += 1
        if cj <= hi:
            j += 1
    return s


@njit(cache=True)
def w2sq_steps(xv, xcw, yv, ycw):
    return _w2sq_merge(xv, xcw, yv, ycw)


@njit(cache=True)
def project_capped_simplex(v, caps):
    n = v.size
    lo = v[0]
    hi = v[0]
    for i in range(n):
        if v[i] < lo:
            lo = v[i]
        if v[i] > hi:
            hi = v[i]
    lo -= 1.0
    for _ in range(64):
        tau = 0.5 * (lo + hi)
        s = 0.0
        for i in range(n):
            t = v[i] - tau
            if t < 0.0:
                t = 0.0
            elif t > caps[i]:
                t = caps[i]
            s += t
        if s > 1.0:
            lo = tau
        else:
            hi = tau
    tau = 0.5 * (lo + hi)
    w = np.empty(n)
    s = 0.0
    for i in range(n):
        t = v[i] - tau
        if t < 0.0:
            t = 0.0
        elif t > caps[i]:
            t = caps[i]
        w[i] = t
        s += t
    if s > 0.0:
        for i in range(n):
            w[i] = w[i] / s
            if w[i] > caps[i]:
                w[i] = caps[i]
    return w


@njit(cache=True)
def _step_quantile(tv, tcw, t):
    j = np.searchsorted(tcw, t, side="left")
    if j >= tv.size:
        j = tv.size - 1
    return tv[j]


@njit(cache=True)
def _grad_from_c(x, c, tv, tcw, grad):
    n = x.size
    acc = 0.0
    grad[n - 1] = 0.0
    # reverse cumulative sum of per-level derivatives
    for i in range(n - 2, -1, -1):
        g = _step_quantile(tv, tcw, c[i])
        d = (x[i] - g) ** 2 - (x[i + 1] - g) ** 2
        acc += d
        grad[i] = acc
    # forward order: grad[i] = sum_{j >= i} d_j  -> recompute properly
    return grad


@njit(cache=True)
def _obj_step(x, c, tv, tcw):
    n = x.size
    m = tv.size
    i = 0
    j = 0
    prev = 0.0
    s = 0.0
    while i < n and j < m:
        ci = c[i]
        cj = tcw[j]
        hi = ci if ci < cj else cj
        if hi > prev:
            d = x[i] - tv[j]
            s += d * d * (hi - prev)
            prev = hi
        if ci <= hi:
            i += 1
        if cj <= hi:
            j += 1
    return s


@njit(cache=True)
def _cd_pass_step(x, c, caps, tv, tcw):
    n = x.size
    for i in range(n - 1):
        prev = c[i - 1] if i > 0 else 0.0
        lo = c[i + 1] - caps[i + 1]
        if prev > lo:
            lo = prev
        hi = prev + caps[i]
        if c[i + 1] < hi:
            hi = c[i + 1]
        mid = 0.5 * (x[i] + x[i + 1])
        jm = np.searchsorted(tv, mid, side="right")
        cstar = tcw[jm - 1] if jm > 0 else 0.0
        if cstar < lo:
            cstar = lo
        elif cstar > hi:
            cstar = hi
        c[i] = cstar


@njit(cache=True)
def solve_trim_step(x, caps, tv, tcw, w0, max_iter=2000, tol=1e-9):
    n = x.size
    w = project_capped_simplex(w0, caps)
    c = np.cumsum(w)
    c[n - 1] = 1.0
    f = _obj_step(x, c, tv, tcw)
    span = max(x[n - 1], tv[tv.size - 1]) - min(x[0], tv[0])
    eta = 1.0 / (n * max(span * span, 1e-30))
    grad = np.empty(n)
    iters = 0
    for _round in range(3):
        stall = 0
        for _ in range(max_iter):
            iters += 1
            c = np.cumsum(w)
            c[n - 1] = 1.0
            _grad_from_c(x, c, tv, tcw, grad)
            accepted = False
            f_new = f
            w_new = w
            for _bt in range(40):
                w_new = project_capped_simplex(w - eta * grad, caps)
                c_new = np.cumsum(w_new)
                c_new[n - 1] = 1.0
                f_new = _obj_step(x, c_new, tv, tcw)
                if f_new < f:
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                break
            improve = f - f_new
            w = w_new
            f = f_new
            eta *= 1.3
            if improve <= tol * max(f, 1e-30):
                stall += 1
            else:
                stall = 0
            if stall >= 8:
                break
        c = np.cumsum(w)
        c[n - 1] = 1.0
        for _p in range(_CD_PASSES):
            f0 = f
            _cd_pass_step(x, c, caps, tv, tcw)
            f = _obj_step(x, c, tv, tcw)
            if f0 - f <= tol * max(f, 1e-30):
                break
        prev = 0.0
        for i in range(n):
            wi = c[i] - prev
            prev = c[i]
            if wi < 0.0:
                wi = 0.0
            elif wi > caps[i]:
                wi = caps[i]
            w[i] = wi
    return w, f, iters


@njit(cache=True)
def _obj_cont(x, w, c, tg, I1):
    n = x.size
    s = 0.0
    prev_i1 = np.interp(0.0, tg, I1)
    for i in range(n):
        i1 = np.interp(c[i], tg, I1)
        s += x[i] * x[i] * w[i] - 2.0 * x[i] * (i1 - prev_i1)
        prev_i1 = i1
    return s


@njit(cache=True)
def _grad_cont(x, c, tg, qv, grad):
    n = x.size
    acc = 0.0
    grad[n - 1] = 0.0
    for i in range(n - 2, -1, -1):
        g = np.interp(c[i], tg, qv)
        d = (x[i] - g) ** 2 - (x[i + 1] - g) ** 2
        acc += d
        grad[i] = acc
    return grad


@njit(cache=True)
def _cd_pass_cont(x, c, caps, tg, qv):
    n = x.size
    for i in range(n - 1):
        prev = c[i - 1] if i > 0 else 0.0
        lo = c[i + 1] - caps[i + 1]
        if prev > lo:
            lo = prev
        hi = prev + caps[i]
        if c[i + 1] < hi:
            hi = c[i + 1]
        mid = 0.5 * (x[i] + x[i + 1])
        cstar = np.interp(mid, qv, tg)
        if cstar < lo:
            cstar = lo
        elif cstar > hi:
            cstar = hi
        c[i] = cstar


@njit(cache=True)
def solve_trim_cont(x, caps, tg, qv, I1, I2, w0, max_iter=2000, tol=1e-9):
    n = x.size
    const = I2[I2.size - 1] - I2[0]
    w = project_capped_simplex(w0, caps)
    c = np.cumsum(w)
    c[n - 1] = 1.0
    f = _obj_cont(x, w, c, tg, I1)
    span = max(x[n - 1], qv[qv.size - 1]) - min(x[0], qv[0])
    eta = 1.0 / (n * max(span * span, 1e-30))
    grad = np.empty(n)
    iters = 0
    for _round in range(3):
        stall = 0
        for _ in range(max_iter):
            iters += 1
            c = np.cumsum(w)
            c[n - 1] = 1.0
            _grad_cont(x, c, tg, qv, grad)
            accepted = False
            f_new = f
            w_new = w
            for _bt in range(40):
                w_new = project_capped_simplex(w - eta * grad, caps)
                c_new = np.cumsum(w_new)
                c_new[n - 1] = 1.0
                f_new = _obj_cont(x, w_new, c_new, tg, I1)
                if f_new < f:
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                break
            improve = f - f_new
            w = w_new
            f = f_new
            eta *= 1.3
            if improve <= tol * max(abs(f) + const, 1e-30):
                stall += 1
            else:
                stall = 0
            if stall >= 8:
                break
        c = np.cumsum(w)
        c[n - 1] = 1.0
        for _p in range(_CD_PASSES):
            f0 = f
            _cd_pass_cont(x, c, caps, tg, qv)
            prev = 0.0
            for i in range(n):
                wi = c[i] - prev
                prev = c[i]
                if wi < 0.0:
                    wi = 0.0
                elif wi > caps[i]:
                    wi = caps[i]
                w[i] = wi
            f = _obj_cont(x, w, c, tg, I1)
            if f0 - f <= tol * max(abs(f) + const, 1e-30):
                break
    total = f + const
    if total < 0.0:
        total = 0.0
    return w, total, iters


@njit(cache=True)
def dp_cost_table(x, y, kx, ky):
    n = x.size
    r = n - kx
    code = np.zeros((r + 1, kx + 1, ky + 1), dtype=np.uint8)
    fprev = np.zeros((kx + 1, ky + 1))
    fcur = np.empty((kx + 1, ky + 1))
    for t in range(1, r + 1):
        # match values, then running min along dx, then along dy
        for dx in range(kx + 1):
            xv = x[t - 1 + dx]
            for dy in range(ky + 1):
                d = xv - y[t - 1 + dy]
                fcur[dx, dy] = fprev[dx, dy] + d * d
        for dy in range(ky + 1):
            best = fcur[0, dy]
            for dx in range(1, kx + 1):
                if best < fcur[dx, dy]:
                    code[t, dx, dy] |= 1
                    fcur[dx, dy] = best
                else:
                    best = fcur[dx, dy]
        for dx in range(kx + 1):
            best = fcur[dx, 0]
            for dy in range(1, ky + 1):
                if best < fcur[dx, dy]:
                    code[t, dx, dy] |= 2
                    fcur[dx, dy] = best
                else:
                    best = fcur[dx, dy]
        fprev, fcur = fcur, fprev
    return fprev[kx, ky], code
