"""Central finite differences, kept independent of the analytic code paths."""

import numpy as np

STEP = 1e-5


def numeric_grad(f, arrays, step=STEP):
    """d f / d arrays[i] by perturbing each entry in place (restored afterwards)."""
    out = []
    for arr in arrays:
        g = np.zeros_like(arr, dtype=np.float64)
        flat, gflat = arr.reshape(-1), g.reshape(-1)
        for j in range(flat.size):
            old = flat[j]
            flat[j] = old + step
            hi = f()
            flat[j] = old - step
            lo = f()
            flat[j] = old
            gflat[j] = (hi - lo) / (2 * step)
        out.append(g)
    return out


def max_rel_error(analytic, numeric, floor=1e-6):
    """Largest elementwise |a - n| / max(|a|, |n|); entries where both are below
    ``floor`` are compared absolutely against ``floor * 1e-4`` instead."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        a, n = np.asarray(a, float).ravel(), np.asarray(n, float).ravel()
        scale = np.maximum(np.abs(a), np.abs(n))
        big = scale > floor
        if big.any():
            worst = max(worst, float(np.max(np.abs(a - n)[big] / scale[big])))
        if (~big).any():
            worst = max(worst, float(np.max(np.abs(a - n)[~big])) / floor)
    return worst
