"""Shared fixtures: reference matrices and brute-force oracles."""

import warnings
from pathlib import Path

import numpy as np
import pytest

from matnear.errors import NearDefectiveWarning

DATA = Path(__file__).parent / "data"

# 8x8 test matrix used throughout; its shift by -4I is Hurwitz with
# distance to instability ~1.9859.
EXAMPLE8 = np.array(
    [
        [0.91, 1.17, -0.80, 0.34, 0.52, 0.00, -1.39, -0.28],
        [-0.05, 0.54, 1.91, 1.68, 1.67, 1.38, 1.62, 2.50],
        [1.03, -1.35, -1.29, 0.55, -1.37, -0.26, 0.33, -0.89],
        [-0.27, -1.05, -0.87, 0.99, -1.23, 0.04, -0.11, -0.62],
        [-0.68, 0.65, 1.01, 0.65, 0.78, 0.80, -0.18, -0.24],
        [-0.16, -0.52, 0.26, -0.61, -0.10, -0.04, 0.22, 0.37],
        [-0.67, 0.17, -0.69, 2.23, -0.23, 0.94, 0.19, -0.22],
        [-1.43, 0.13, -0.89, 0.06, 1.26, 0.28, 0.05, 0.03],
    ]
)

HAMILTONIAN4 = np.array(
    [
        [1.0, 1.6, 1.2, 0.4],
        [2.2, -0.6, 0.4, -4.4],
        [-4.0, -7.4, -1.0, -2.2],
        [-7.4, 6.0, -1.6, 0.6],
    ]
)

RANGE_B = np.array(
    [
        [-2, -1, 1, -4, 0, -2, 2, -2, 0, -2],
        [-1, -1, 0, -1, 2, 1, 4, -1, 2, -4],
    ],
    dtype=float,
).T

CORANGE_C = np.array(
    [
        [1, 1, -1, 1, 2, 2, 1, 1, -1, -2],
        [-1, 0, 2, -2, -1, 6, -1, 4, 2, -1],
        [0, 0, 1, 3, -3, 4, 2, -1, 0, 1],
    ],
    dtype=float,
)

SYLVESTER_A = np.array([1.0, 2.0, 2.0, 2.0])
SYLVESTER_B = np.array([2.0, 0.0, 1.0, -2.0])


def pentadiagonal_toeplitz(n=12, d=-0.3, s1=-0.1, s2=-0.3, t1=2.0, t2=0.5):
    T = np.zeros((n, n))
    for i in range(n):
        T[i, i] = d
    for i in range(n - 1):
        T[i + 1, i] = s1
        T[i, i + 1] = t1
    for i in range(n - 2):
        T[i + 2, i] = s2
        T[i, i + 2] = t2
    return T


@pytest.fixture(autouse=True)
def _quiet_near_defective():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearDefectiveWarning)
        yield


@pytest.fixture
def example8():
    return EXAMPLE8.copy()


@pytest.fixture
def example8_shifted():
    return EXAMPLE8 - 4.0 * np.eye(8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240)


def sigma_min(A, z):
    n = A.shape[0]
    return float(np.linalg.svd(A - z * np.eye(n), compute_uv=False)[-1])


def grid_abscissa_oracle(A, eps, alpha_hint, im_range=4.0, resolution=1e-3):
    """Level-set grid oracle for the pseudospectral abscissa.

    Scans real-axis grid lines downward from above the hint and returns
    the largest grid abscissa whose vertical line meets the sublevel set
    (the line minimum of sigma_min over a fine imaginary grid, locally
    refined, is at most eps).
    """
    from scipy.optimize import minimize_scalar

    def line_min(a):
        ws = np.linspace(-im_range, im_range, 1601)
        vals = [sigma_min(A, a + 1j * w) for w in ws]
        i = int(np.argmin(vals))
        lo = ws[max(i - 1, 0)]
        hi = ws[min(i + 1, len(ws) - 1)]
        res = minimize_scalar(
            lambda w: sigma_min(A, a + 1j * w), bounds=(lo, hi), method="bounded"
        )
        return min(res.fun, vals[i])

    a = alpha_hint + 50 * resolution
    for _ in range(200):
        if line_min(a) <= eps:
            return a
        a -= resolution
    raise AssertionError("grid oracle found no member line")


def min_norm_common_zero_perturbation(a, b, z):
    """Least-norm real coefficient perturbations making z a common zero."""
    out = []
    for c in (a, b):
        w = np.array([z ** k for k in range(len(c) - 1, -1, -1)])
        M = np.vstack([w.real, w.imag])
        rhs = -np.array([np.polyval(c, z).real, np.polyval(c, z).imag])
        dc, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        out.append(dc)
    return out


def coprimality_oracle(a, b):
    """Brute-force coprimality radius: scan candidate common zeros and
    refine the least-norm coefficient distance."""
    from scipy.optimize import minimize

    def dist2(z):
        da, db = min_norm_common_zero_perturbation(a, b, z)
        return float(da @ da + db @ db)

    best = None
    for re in np.linspace(-2.5, 2.5, 101):
        for im in np.linspace(0.01, 2.5, 50):
            z = re + 1j * im
            d = dist2(z)
            if best is None or d < best[0]:
                best = (d, z)
    res = minimize(
        lambda p: dist2(p[0] + 1j * p[1]),
        [best[1].real, best[1].imag],
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-18},
    )
    z = res.x[0] + 1j * res.x[1]
    return float(np.sqrt(res.fun)), z
