"""Independent brute-force reference implementations used only by tests.

Everything here is written as plain loops over the defining formulas, kept
deliberately separate from the library's vectorised code paths.
"""

import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammainc


def gauss(x, y, sigma):
    return math.exp(-sum((a - b) ** 2 for a, b in zip(x, y)) / sigma**2)


def mmd2_u_loops(x, y, sigma):
    """Double-loop evaluation of the unbiased squared-MMD estimator."""
    m, n = len(x), len(y)
    s_xx = sum(gauss(x[i], x[j], sigma) for i in range(m) for j in range(m) if j != i)
    s_yy = sum(gauss(y[i], y[j], sigma) for i in range(n) for j in range(n) if j != i)
    s_xy = sum(gauss(x[i], y[j], sigma) for i in range(m) for j in range(n))
    return s_xx / (m * (m - 1)) + s_yy / (n * (n - 1)) - 2.0 * s_xy / (m * n)


def hsic_u_loops(k, l):
    """Elementwise-loop evaluation of the unbiased HSIC estimator."""
    m = k.shape[0]
    kt = k - np.diag(np.diag(k))
    lt = l - np.diag(np.diag(l))
    t1 = sum(kt[i, j] * lt[j, i] for i in range(m) for j in range(m))
    sk = sum(kt[i, j] for i in range(m) for j in range(m))
    sl = sum(lt[i, j] for i in range(m) for j in range(m))
    t3 = sum(
        kt[i, q] * lt[q, j] for i in range(m) for q in range(m) for j in range(m)
    )
    return (t1 + sk * sl / ((m - 1) * (m - 2)) - 2.0 * t3 / (m - 2)) / (m * (m - 3))


def hsic_u_panels_loops(x, y, sigma_x, sigma_y):
    m = len(x)
    k = np.array([[gauss(x[i], x[j], sigma_x) for j in range(m)] for i in range(m)])
    l = np.array([[gauss(y[i], y[j], sigma_y) for j in range(m)] for i in range(m)])
    return hsic_u_loops(k, l)


def gamma_quantile_root(shape, scale, q):
    """Gamma quantile via root-finding on the regularised incomplete gamma."""
    hi = scale * shape
    while gammainc(shape, hi / scale) < q:
        hi *= 2.0
    return brentq(lambda x: gammainc(shape, x / scale) - q, 0.0, hi, xtol=1e-12)


def pearson_loops(a, b):
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    cov = sum((a[i] - ma) * (b[i] - mb) for i in range(n))
    va = sum((v - ma) ** 2 for v in a)
    vb = sum((v - mb) ** 2 for v in b)
    return cov / math.sqrt(va * vb)
