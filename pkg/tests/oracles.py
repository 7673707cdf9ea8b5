"""Independent reference computations used only by the tests.

None of these share code with the package: the levels come from a sinc-DVR
solve of the Schrodinger equation in x, the matrix elements from mpmath
quadrature of mpmath-evaluated eigenfunctions.
"""

import math

import mpmath as mp
import numpy as np
from scipy.linalg import eigh


def dvr_levels(m, V0, alpha, hbar=1.0, count=None, dx_factor=1.0):
    """Colbert-Miller sinc-DVR eigenvalues of -hbar^2/2m d2/dx2 + V0(e^{-2ax} - 2e^{-ax}).

    The box reaches the decay length of the shallowest bound state and the
    step resolves the largest local wavenumber of the well.
    """
    nu = math.sqrt(8 * m * V0) / (alpha * hbar)
    s_min = (nu - 1) / 2 - math.floor((nu - 1) / 2)
    s_min = s_min if s_min > 1e-9 else 1.0
    x_lo = -math.log(2.0 + 40.0 / nu) / alpha - 2.0 / alpha
    x_hi = (math.log(nu) + 20.0 / s_min) / alpha
    k_max = math.sqrt(2 * m * V0 * 9.0) / hbar
    dx = dx_factor * 0.5 * math.pi / k_max
    x = np.arange(x_lo, x_hi, dx)
    points = len(x)
    i = np.arange(points)
    diff = i[:, None] - i[None, :]
    safe = np.where(diff == 0, 1, diff)
    t = np.where(diff == 0, math.pi ** 2 / 3.0, 2.0 / safe ** 2)
    t = t * np.where(diff % 2 == 0, 1.0, -1.0)
    t *= hbar ** 2 / (2 * m * dx ** 2)
    v = V0 * (np.exp(-2 * alpha * x) - 2 * np.exp(-alpha * x))
    vals = eigh(t + np.diag(v), eigvals_only=True)
    bound = vals[vals < 0]
    return bound if count is None else bound[:count]


def _psi_unnormalized(nu, n, y):
    s = (nu - 1) / 2 - n
    return y ** s * mp.exp(-y / 2) * mp.hyp1f1(-n, 2 * s + 1, y)


def mp_matrix_element(nu, alpha, n, n2, weight, dps=30):
    """<n|weight(y)|n2> under dy/(alpha y), eigenfunctions normalized by mpmath quad."""
    with mp.workdps(dps):
        nu = mp.mpf(nu)

        def norm(k):
            return mp.sqrt(mp.quad(lambda y: _psi_unnormalized(nu, k, y) ** 2 / (alpha * y),
                                   [0, 1, nu, 4 * nu, mp.inf]))

        val = mp.quad(lambda y: _psi_unnormalized(nu, n, y) * _psi_unnormalized(nu, n2, y)
                      * weight(y) / (alpha * y), [0, 1, nu, 4 * nu, mp.inf])
        return float(val / (norm(n) * norm(n2)))


def scan_sign_changes(f, y_grid):
    vals = f(y_grid)
    vals = vals[np.abs(vals) > 1e-12 * np.max(np.abs(vals))]
    return int(np.count_nonzero(np.diff(np.sign(vals))))
