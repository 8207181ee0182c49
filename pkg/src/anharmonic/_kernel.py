"""Compiled double-precision version of the Laurent recursion.

Same arithmetic as `series.extend_laurent` / `series.energy_coefficient`
but restricted to float64 and indexed by ``t = i // stride`` so that the
identically-zero odd columns of even potentials are skipped.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def laurent_double(f, n, K, max_index, m, omega0, w2, s):
    L = max_index // s + 1
    R = np.zeros((K + 1, L))
    E = np.zeros(K)
    c0 = R[0]
    c0[0] = -m * omega0
    for t in range(1, L):
        acc = 0.0
        for p in range(1, t):
            acc += c0[p] * c0[t - p]
        c0[t] = (acc - 2.0 * m * f[s * t]) / (2.0 * m * omega0)
    inv = 1.0 / (2.0 * c0[0])
    for k in range(1, K + 1):
        row = R[k]
        prev = R[k - 1]
        tq = (2 * k - 2) // s
        tw = -1
        if (2 * k) % s == 0:
            tw = 2 * k // s
        half = k // 2
        for t in range(L):
            b = (3 - 2 * k + s * t) * prev[t]
            # sum over j = 1..k-1 of C^j * C^{k-j}, folded by symmetry
            for j in range(1, (k + 1) // 2):
                a = R[j]
                c = R[k - j]
                acc = 0.0
                for p in range(t + 1):
                    acc += a[p] * c[t - p]
                b += 2.0 * acc
            if k % 2 == 0 and half >= 1:
                a = R[half]
                acc = 0.0
                for p in range(t + 1):
                    acc += a[p] * a[t - p]
                b += acc
            if t == tw:
                b -= m * m * w2[k]
            acc = 0.0
            for p in range(1, t + 1):
                acc += c0[p] * row[t - p]
            if t == tq:
                row[t] = n if k == 1 else 0.0
                E[k - 1] = -(b + 2.0 * (acc + c0[0] * row[t])) / (2.0 * m)
            else:
                row[t] = -(b + 2.0 * acc) * inv
    return R, E
