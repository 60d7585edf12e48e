"""Intrinsic geometry of the angular chart: connection and Gauss curvature.

All derivatives are spectral on the periodic chart, so smooth data converge
faster than any fixed power of the grid spacing.
"""

import numpy as np

from .fields import check_positive_definite, sym2_inverse
from .grids import AngularGrid
from .stencils import spectral_deriv


class CurvatureConsistencyError(RuntimeError):
    """The two diagonal fibers of the curvature identity disagree: grid too coarse."""


def _dtheta(chart: AngularGrid, f: np.ndarray, axis: int) -> np.ndarray:
    period = chart.L1 if axis == 0 else chart.L2
    return spectral_deriv(f, period, axis=axis)


def metric_derivatives(chart: AngularGrid, gamma: np.ndarray) -> np.ndarray:
    """d gamma_{ab} / d theta^c, indexed [..., c, a, b]."""
    out = np.empty(chart.shape + (2, 2, 2))
    for c in range(2):
        out[..., c, :, :] = _dtheta(chart, gamma, axis=c)
    return out


def christoffel(gamma: np.ndarray, chart: AngularGrid) -> np.ndarray:
    """Connection coefficients of gamma, indexed [..., c, a, b] = Gamma^c_{ab}.

    Gamma^c_{ab} = (1/2) gamma^{cd} (d_a gamma_{bd} + d_b gamma_{ad} - d_d gamma_{ab})
    """
    check_positive_definite(gamma)
    ginv = sym2_inverse(gamma)
    dg = metric_derivatives(chart, gamma)
    # lower-index symbol: [..., d, a, b] = (d_a g_{bd} + d_b g_{ad} - d_d g_{ab}) / 2
    low = 0.5 * (np.swapaxes(dg, -3, -2) + np.swapaxes(dg, -3, -1) - dg)
    return np.einsum("...cd,...dab->...cab", ginv, low)


def gauss_curvature(
    gamma: np.ndarray,
    chart: AngularGrid,
    rtol: float = 1e-6,
    check: bool = True,
) -> np.ndarray:
    """Gauss curvature K of gamma.

    K is read off the curvature identity
        gamma_{bc} K = d_a Gamma^a_{bc} - d_c Gamma^a_{ba}
                       + Gamma^a_{ad} Gamma^d_{bc} - Gamma^a_{cd} Gamma^d_{ba}
    through its trace; the two diagonal fibers (b=c=1 and b=c=2) are
    cross-checked and a mismatch beyond ``rtol`` raises
    CurvatureConsistencyError (the discretization is too coarse).
    """
    gam = christoffel(gamma, chart)
    dgam = np.empty(chart.shape + (2, 2, 2, 2))  # [..., e, c, a, b] = d_e Gamma^c_{ab}
    for e in range(2):
        dgam[..., e, :, :, :] = _dtheta(chart, gam, axis=e)

    term1 = np.einsum("...aabc->...bc", dgam)  # d_a Gamma^a_{bc}
    term2 = np.einsum("...caba->...bc", dgam)  # d_c Gamma^a_{ba}
    term3 = np.einsum("...aad,...dbc->...bc", gam, gam)
    term4 = np.einsum("...acd,...dba->...bc", gam, gam)
    ric = term1 - term2 + term3 - term4  # = gamma_{bc} K

    ginv = sym2_inverse(gamma)
    k = 0.5 * np.einsum("...bc,...bc->...", ginv, ric)

    if check:
        k1 = ric[..., 0, 0] / gamma[..., 0, 0]
        k2 = ric[..., 1, 1] / gamma[..., 1, 1]
        scale = np.max(np.abs(k)) + 1.0
        mismatch = np.max(np.abs(k1 - k2)) / scale
        if mismatch > rtol:
            raise CurvatureConsistencyError(
                f"diagonal curvature fibers disagree (relative mismatch {mismatch:.3e} > {rtol:.1e})"
            )
    return k


def area_element(gamma: np.ndarray) -> np.ndarray:
    """sqrt(det gamma): density of the metric area form in chart coordinates."""
    det = gamma[..., 0, 0] * gamma[..., 1, 1] - gamma[..., 0, 1] * gamma[..., 1, 0]
    return np.sqrt(det)


def total_curvature(gamma: np.ndarray, chart: AngularGrid) -> float:
    """integral of K dA_gamma over the chart (zero on the torus for any metric)."""
    k = gauss_curvature(gamma, chart, check=False)
    return float(np.sum(k * area_element(gamma)) * chart.cell_area)
