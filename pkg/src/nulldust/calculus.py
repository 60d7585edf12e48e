"""Angular tensor calculus: covariant derivatives, div/curl/grad, contractions.

Conventions (slots trail the grid axes):
    one-form phi:           (n1, n2, 2)
    symmetric 2-tensor T:   (n1, n2, 2, 2)
    volume form eps_{ab} = sqrt(det gamma) * [[0, 1], [-1, 0]]_{ab}
"""

import numpy as np

from .fields import sym2_inverse
from .geometry import area_element, christoffel
from .grids import AngularGrid
from .stencils import spectral_deriv


class RankError(ValueError):
    pass


def _dtheta(chart: AngularGrid, f: np.ndarray, axis: int) -> np.ndarray:
    period = chart.L1 if axis == 0 else chart.L2
    return spectral_deriv(f, period, axis=axis)


def partial(chart: AngularGrid, f: np.ndarray) -> np.ndarray:
    """d_c f, new leading slot c after the grid axes: shape (n1, n2, 2, ...)."""
    out = np.empty(chart.shape + (2,) + f.shape[2:])
    out[:, :, 0] = _dtheta(chart, f, 0)
    out[:, :, 1] = _dtheta(chart, f, 1)
    return out


def grad(chart: AngularGrid, f: np.ndarray) -> np.ndarray:
    """Gradient one-form of a scalar."""
    if f.ndim != 2:
        raise RankError("grad expects a scalar field")
    return partial(chart, f)


def covariant_deriv(chart: AngularGrid, gamma: np.ndarray, phi: np.ndarray,
                    gam: np.ndarray | None = None) -> np.ndarray:
    """nabla_c phi_{a...} for a covariant tensor of rank 0, 1 or 2.

    Returns shape (n1, n2, 2, *slots) with the derivative slot leading.
    """
    rank = phi.ndim - 2
    if rank not in (0, 1, 2):
        raise RankError(f"rank-{rank} covariant derivative not supported")
    if gam is None:
        gam = christoffel(gamma, chart)
    d = partial(chart, phi)
    if rank == 0:
        return d
    if rank == 1:
        return d - np.einsum("...eca,...e->...ca", gam, phi)
    corr_a = np.einsum("...eca,...eb->...cab", gam, phi)
    corr_b = np.einsum("...ecb,...ae->...cab", gam, phi)
    return d - corr_a - corr_b


def div_oneform(chart, gamma, phi, gam=None) -> np.ndarray:
    """div phi = gamma^{ab} nabla_a phi_b."""
    if phi.ndim != 3:
        raise RankError("div_oneform expects a one-form")
    nab = covariant_deriv(chart, gamma, phi, gam)
    return np.einsum("...ab,...ab->...", sym2_inverse(gamma), nab)


def div_sym2(chart, gamma, T, gam=None) -> np.ndarray:
    """(div T)_a = gamma^{bc} nabla_b T_{ca} for totally symmetric T."""
    if T.ndim != 4:
        raise RankError("div_sym2 expects a 2-tensor")
    nab = covariant_deriv(chart, gamma, T, gam)  # [..., c, a, b] = nabla_c T_{ab}
    return np.einsum("...bc,...bca->...a", sym2_inverse(gamma), nab)


def volume_form(gamma: np.ndarray) -> np.ndarray:
    """eps_{ab} with eps_{12} = sqrt(det gamma)."""
    s = area_element(gamma)
    eps = np.zeros(gamma.shape)
    eps[..., 0, 1] = s
    eps[..., 1, 0] = -s
    return eps


def volume_form_upper(gamma: np.ndarray) -> np.ndarray:
    """eps^{ab} = gamma^{ac} gamma^{bd} eps_{cd} = eps_{ab} / det gamma."""
    s = area_element(gamma)
    eps = np.zeros(gamma.shape)
    eps[..., 0, 1] = 1.0 / s
    eps[..., 1, 0] = -1.0 / s
    return eps


def curl_oneform(chart, gamma, phi, gam=None) -> np.ndarray:
    """curl phi = eps^{ab} nabla_a phi_b."""
    if phi.ndim != 3:
        raise RankError("curl_oneform expects a one-form")
    nab = covariant_deriv(chart, gamma, phi, gam)
    return np.einsum("...ab,...ab->...", volume_form_upper(gamma), nab)


def nabla_otimes(chart, gamma, phi, gam=None) -> np.ndarray:
    """Trace-free symmetrized derivative of a one-form:

    (nabla (x) phi)_{ab} = nabla_a phi_b + nabla_b phi_a - gamma_{ab} div phi
    """
    if phi.ndim != 3:
        raise RankError("nabla_otimes expects a one-form")
    nab = covariant_deriv(chart, gamma, phi, gam)
    dv = np.einsum("...ab,...ab->...", sym2_inverse(gamma), nab)
    return nab + np.swapaxes(nab, -1, -2) - gamma * dv[..., None, None]


def trace(gamma: np.ndarray, T: np.ndarray) -> np.ndarray:
    """gamma^{ab} T_{ab}."""
    return np.einsum("...ab,...ab->...", sym2_inverse(gamma), T)


def trace_free(gamma: np.ndarray, T: np.ndarray) -> np.ndarray:
    """T - (tr T / 2) gamma: the gamma-traceless part of a 2-tensor."""
    return T - 0.5 * trace(gamma, T)[..., None, None] * gamma


def dot11(gamma, phi, psi) -> np.ndarray:
    """gamma^{ab} phi_a psi_b for one-forms."""
    return np.einsum("...ab,...a,...b->...", sym2_inverse(gamma), phi, psi)


def dot22(gamma, T, S) -> np.ndarray:
    """gamma^{ac} gamma^{bd} T_{ab} S_{cd} for symmetric 2-tensors."""
    ginv = sym2_inverse(gamma)
    return np.einsum("...ac,...bd,...ab,...cd->...", ginv, ginv, T, S)


def dot21(gamma, T, phi) -> np.ndarray:
    """(T . phi)_a = gamma^{bc} T_{ab} phi_c."""
    return np.einsum("...bc,...ab,...c->...a", sym2_inverse(gamma), T, phi)


def hat_otimes(gamma, phi, psi) -> np.ndarray:
    """(phi (x)^ psi)_{ab} = phi_a psi_b + phi_b psi_a - gamma_{ab} (phi . psi)."""
    outer = phi[..., :, None] * psi[..., None, :]
    return outer + np.swapaxes(outer, -1, -2) - gamma * dot11(gamma, phi, psi)[..., None, None]


def wedge22(gamma, T, S) -> np.ndarray:
    """eps^{ab} gamma^{cd} T_{ac} S_{bd} for symmetric 2-tensors."""
    return np.einsum("...ab,...cd,...ac,...bd->...",
                     volume_form_upper(gamma), sym2_inverse(gamma), T, S)


def star_oneform(gamma, phi) -> np.ndarray:
    """(*phi)_a = gamma_{ac} eps^{cb} phi_b (Hodge dual)."""
    return np.einsum("...ac,...cb,...b->...a", gamma, volume_form_upper(gamma), phi)


def star_sym2(gamma, T) -> np.ndarray:
    """(*T)_{ab} = gamma_{bd} eps^{dc} T_{ac}."""
    return np.einsum("...bd,...dc,...ac->...ab", gamma, volume_form_upper(gamma), T)


def raise_index(gamma, phi) -> np.ndarray:
    """phi^a = gamma^{ab} phi_b."""
    return np.einsum("...ab,...b->...a", sym2_inverse(gamma), phi)


def lower_index(gamma, X) -> np.ndarray:
    """X_a = gamma_{ab} X^b."""
    return np.einsum("...ab,...b->...a", gamma, X)


def mixed_from_cov(gamma, T) -> np.ndarray:
    """T^a_b = gamma^{ac} T_{cb}."""
    return np.einsum("...ac,...cb->...ab", sym2_inverse(gamma), T)


def norm2_oneform(gamma, phi) -> np.ndarray:
    return dot11(gamma, phi, phi)


def norm2_sym2(gamma, T) -> np.ndarray:
    return dot22(gamma, T, T)


__all__ = [n for n in dir() if not n.startswith("_")]
