"""Pure-numpy kernel implementations (fallback path)."""
import numpy as np

BACKEND = "numpy"

_CD_PASSES = 60


def w2sq_steps(xv, xcw, yv, ycw):
    """Exact squared W2 between two weighted point sets.

    xcw / ycw are cumulative weights ending at 1; integration merges the
    cumulative-weight breakpoints of both step quantile functions.
    """
    inner = np.concatenate([xcw[:-1], ycw[:-1]])
    inner = np.sort(inner[(inner > 0.0) & (inner < 1.0)])
    edges = np.concatenate([[0.0], inner, [1.0]])
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    xi = xv[np.minimum(np.searchsorted(xcw, mids, side="left"), xv.size - 1)]
    yi = yv[np.minimum(np.searchsorted(ycw, mids, side="left"), yv.size - 1)]
    return float(np.sum(widths * (xi - yi) ** 2))


def project_capped_simplex(v, caps):
    """Euclidean projection onto {0 <= w <= caps, sum w = 1} (water filling)."""
    v = np.asarray(v, float)
    lo = np.min(v) - 1.0
    hi = np.max(v)
    for _ in range(64):
        tau = 0.5 * (lo + hi)
        s = np.sum(np.clip(v - tau, 0.0, caps))
        if s > 1.0:
            lo = tau
        else:
            hi = tau
    w = np.clip(v - 0.5 * (lo + hi), 0.0, caps)
    s = w.sum()
    if s > 0:
        w = w / s
    return np.minimum(w, caps)


# -- one-sided trimming solvers ---------------------------------------
#
# Objective in cumulative coordinates c_i = sum_{j<=i} w_j:
#   W2^2 = sum_i \int_{c_{i-1}}^{c_i} (x_i - Ginv(t))^2 dt,
# convex and separable in the c_i, with dW2^2/dc_i =
#   (x_i - Ginv(c_i))^2 - (x_{i+1} - Ginv(c_i))^2.
# Projected gradient in w (box-simplex projection) handles joint moves;
# exact per-coordinate descent in c polishes kinks of step targets.


def _cum(w):
    c = np.cumsum(w)
    c[-1] = 1.0
    return c


def _obj_step(x, c, tv, tcw):
    cfull = np.concatenate([[0.0], c])
    return _w2sq_between(x, cfull, tv, tcw)


def _w2sq_between(xv, xedges, yv, ycw):
    inner = np.concatenate([xedges[1:-1], ycw[:-1]])
    inner = np.sort(inner[(inner > 0.0) & (inner < 1.0)])
    edges = np.concatenate([[0.0], inner, [1.0]])
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    xi = xv[np.minimum(np.searchsorted(xedges[1:], mids, side="left"), xv.size - 1)]
    yi = yv[np.minimum(np.searchsorted(ycw, mids, side="left"), yv.size - 1)]
    return float(np.sum(widths * (xi - yi) ** 2))


def _grad_step(x, c, tv, tcw):
    g = tv[np.minimum(np.searchsorted(tcw, c[:-1], side="left"), tv.size - 1)]
    d = (x[:-1] - g) ** 2 - (x[1:] - g) ** 2
    grad = np.empty(x.size)
    grad[:-1] = np.cumsum(d[::-1])[::-1]
    grad[-1] = 0.0
    return grad


def _cd_pass_step(x, c, caps, tv, tcw):
    n = x.size
    for i in range(n - 1):
        prev = c[i - 1] if i > 0 else 0.0
        lo = max(prev, c[i + 1] - caps[i + 1])
        hi = min(c[i + 1], prev + caps[i])
        mid = 0.5 * (x[i] + x[i + 1])
        jm = np.searchsorted(tv, mid, side="right")
        cstar = tcw[jm - 1] if jm > 0 else 0.0
        c[i] = min(max(cstar, lo), hi)


def solve_trim_step(x, caps, tv, tcw, w0, max_iter=2000, tol=1e-9):
    """Minimize W2^2 over retained weights w (<= caps) against a step target."""
    w = project_capped_simplex(w0, caps)
    f = _obj_step(x, _cum(w), tv, tcw)
    span = max(x[-1], tv[-1]) - min(x[0], tv[0])
    eta = 1.0 / (x.size * max(span * span, 1e-30))
    iters = 0
    for _round in range(3):
        stall = 0
        for _ in range(max_iter):
            iters += 1
            c = np.cumsum(w)
            c[-1] = 1.0
            g = _grad_step(x, c, tv, tcw)
            accepted = False
            for _bt in range(40):
                w_new = project_capped_simplex(w - eta * g, caps)
                f_new = _obj_step(x, _cum(w_new), tv, tcw)
                if f_new < f:
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                break
            improve = f - f_new
            w, f = w_new, f_new
            eta *= 1.3
            stall = stall + 1 if improve <= tol * max(f, 1e-30) else 0
            if stall >= 8:
                break
        c = np.cumsum(w)
        c[-1] = 1.0
        for _p in range(_CD_PASSES):
            f0 = f
            _cd_pass_step(x, c, caps, tv, tcw)
            f = _obj_step(x, c, tv, tcw)
            if f0 - f <= tol * max(f, 1e-30):
                break
        w = np.clip(np.diff(np.concatenate([[0.0], c])), 0.0, caps)
    return w, f, iters


def _obj_cont(x, w, c, tg, I1):
    cfull = np.concatenate([[0.0], c])
    I1c = np.interp(cfull, tg, I1)
    return float(np.sum(x * x * w) - 2.0 * np.sum(x * np.diff(I1c)))


def _grad_cont(x, c, tg, qv):
    g = np.interp(c[:-1], tg, qv)
    d = (x[:-1] - g) ** 2 - (x[1:] - g) ** 2
    grad = np.empty(x.size)
    grad[:-1] = np.cumsum(d[::-1])[::-1]
    grad[-1] = 0.0
    return grad


def _cd_pass_cont(x, c, caps, tg, qv):
    n = x.size
    for i in range(n - 1):
        prev = c[i - 1] if i > 0 else 0.0
        lo = max(prev, c[i + 1] - caps[i + 1])
        hi = min(c[i + 1], prev + caps[i])
        mid = 0.5 * (x[i] + x[i + 1])
        cstar = np.interp(mid, qv, tg)
        c[i] = min(max(cstar, lo), hi)


def solve_trim_cont(x, caps, tg, qv, I1, I2, w0, max_iter=2000, tol=1e-9):
    """One-sided solver against a continuous target tabulated on grid tg.

    qv is the target quantile on tg; I1/I2 are cumulative integrals of the
    quantile and its square. Returns (weights, W2^2, iterations); the
    I2-total term is constant in w and added for the true value.
    """
    const = float(I2[-1] - I2[0])
    w = project_capped_simplex(w0, caps)
    c = np.cumsum(w)
    c[-1] = 1.0
    f = _obj_cont(x, w, c, tg, I1)
    span = max(x[-1], qv[-1]) - min(x[0], qv[0])
    eta = 1.0 / (x.size * max(span * span, 1e-30))
    iters = 0
    for _round in range(3):
        stall = 0
        for _ in range(max_iter):
            iters += 1
            c = np.cumsum(w)
            c[-1] = 1.0
            g = _grad_cont(x, c, tg, qv)
            accepted = False
            for _bt in range(40):
                w_new = project_capped_simplex(w - eta * g, caps)
                c_new = np.cumsum(w_new)
                c_new[-1] = 1.0
                f_new = _obj_cont(x, w_new, c_new, tg, I1)
                if f_new < f:
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                break
            improve = f - f_new
            w, f = w_new, f_new
            eta *= 1.3
            stall = stall + 1 if improve <= tol * max(abs(f) + const, 1e-30) else 0
            if stall >= 8:
                break
        c = np.cumsum(w)
        c[-1] = 1.0
        for _p in range(_CD_PASSES):
            f0 = f
            _cd_pass_cont(x, c, caps, tg, qv)
            w = np.clip(np.diff(np.concatenate([[0.0], c])), 0.0, caps)
            f = _obj_cont(x, w, c, tg, I1)
            if f0 - f <= tol * max(abs(f) + const, 1e-30):
                break
    return w, max(f + const, 0.0), iters


def dp_cost_table(x, y, kx, ky):
    """Choice table for the exact hard-trim DP (monotone matching).

    State (t, dx, dy): t pairs matched, dx/dy atoms dropped so far.
    code bit 1 = value inherited from dx-1, bit 2 = inherited from dy-1.
    Returns (total squared cost, uint8 choice table).
    """
    n = x.size
    r = n - kx
    code = np.zeros((r + 1, kx + 1, ky + 1), dtype=np.uint8)
    fprev = np.zeros((kx + 1, ky + 1))
    for t in range(1, r + 1):
        xs = x[t - 1 : t + kx]
        ys = y[t - 1 : t + ky]
        m = fprev + (xs[:, None] - ys[None, :]) ** 2
        a = np.minimum.accumulate(m, axis=0)
        cx = a < m
        b = np.minimum.accumulate(a, axis=1)
        cy = b < a
        code[t] = cx.astype(np.uint8) | (cy.astype(np.uint8) << 1)
        fprev = b
    return float(fprev[kx, ky]), code
