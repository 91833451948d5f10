"""Independent reference computations used only by the tests.

Nothing here imports driftcast; each routine is the plainest textbook form.
"""

import math


def ols_normal_equations(xs):
    """Slope and intercept of y = m t + b over t = 0..N-1 from raw sums."""
    n = len(xs)
    st = sum(range(n))
    stt = sum(t * t for t in range(n))
    sx = sum(xs)
    stx = sum(t * x for t, x in enumerate(xs))
    m = (n * stx - st * sx) / (n * stt - st * st)
    b = (sx - m * st) / n
    return m, b


def pseudo_targets_by_hand(xs, h):
    m, b = ols_normal_equations(xs)
    m_c = m if m < 0 else 0.0
    n = len(xs)
    return [m_c * (n - 1 + j) + b for j in range(1, h + 1)]


def scalar_adam(p, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        mhat = m / (1 - beta1**t)
        vhat = v / (1 - beta2**t)
        p = p - lr * mhat / (math.sqrt(vhat) + eps)
        out.append(p)
    return out


def naive_rmse(pred, actual):
    total = 0.0
    for p, a in zip(pred, actual):
        total += (p - a) ** 2
    return math.sqrt(total / len(pred))


def naive_mae(pred, actual):
    total = 0.0
    for p, a in zip(pred, actual):
        total += abs(p - a)
    return total / len(pred)


def central_difference(f, arr, idx, step=1e-5):
    """d f / d arr[idx] by central differences; restores arr afterwards."""
    orig = arr[idx]
    arr[idx] = orig + step
    up = f()
    arr[idx] = orig - step
    down = f()
    arr[idx] = orig
    return (up - down) / (2 * step)
