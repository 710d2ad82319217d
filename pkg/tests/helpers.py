"""Independent oracles shared across test modules."""
import numpy as np


def iou(a, b):
    a, b = np.asarray(a, bool), np.asarray(b, bool)
    return (a & b).sum() / (a | b).sum()


def brute_blur(m):
    """Direct 5x5 convolution with the outer-product binomial kernel, replicated edges."""
    k1 = np.array([1, 4, 6, 4, 1], float) / 16
    k2 = np.outer(k1, k1)
    h, w = m.shape
    out = np.zeros_like(m, dtype=float)
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for di in range(-2, 3):
                for dj in range(-2, 3):
                    ii = min(max(i + di, 0), h - 1)
                    jj = min(max(j + dj, 0), w - 1)
                    acc += k2[di + 2, dj + 2] * m[ii, jj]
            out[i, j] = acc
    return out


ACCEPTANCE_LINES = []


def verdict(number, title, ok, detail, elapsed=None, budget=None):
    """Record and print one acceptance line; the caller asserts `ok`."""
    if budget is not None:
        ok = ok and elapsed < budget
    timing = "" if elapsed is None else f" [{elapsed:.2f}s" + ("" if budget is None else f" / {budget:g}s") + "]"
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}: {detail}{timing}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
