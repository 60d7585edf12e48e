"""Finite-difference and spectral derivative kernels.

Null-direction (1D, non-periodic) derivatives use 4th-order central stencils
with 4th-order one-sided closures at the interval ends.  Angular derivatives
on the periodic chart are spectral (FFT).
"""

import numpy as np

# 4th-order one-sided first-derivative closures (rows: node 0 and node 1 from the edge)
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def deriv1_fd4(y: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """First derivative, 4th order, non-periodic axis with one-sided closures."""
    y = np.asarray(y, dtype=float)
    if y.shape[axis] < 5:
        raise ValueError("need at least 5 nodes for the 4th-order stencil")
    y = np.moveaxis(y, axis, 0)
    out = np.empty_like(y)
    out[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    head = np.tensordot(_EDGE0, y[:5], axes=(0, 0))
    head1 = np.tensordot(_EDGE1, y[:5], axes=(0, 0))
    tail1 = -np.tensordot(_EDGE1, y[-5:][::-1], axes=(0, 0))
    tail = -np.tensordot(_EDGE0, y[-5:][::-1], axes=(0, 0))
    out[0], out[1], out[-2], out[-1] = head / h, head1 / h, tail1 / h, tail / h
    return np.moveaxis(out, 0, axis)


def deriv1_fd4_periodic(y: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """First derivative, 4th order, periodic axis (pure central via wrap-around)."""
    y = np.asarray(y, dtype=float)
    return (
        np.roll(y, 2, axis=axis)
        - 8.0 * np.roll(y, 1, axis=axis)
        + 8.0 * np.roll(y, -1, axis=axis)
        - np.roll(y, -2, axis=axis)
    ) / (12.0 * h)


def spectral_deriv(f: np.ndarray, period: float, axis: int = 0, order: int = 1) -> np.ndarray:
    """Spectral derivative along a periodic axis.

    The Nyquist mode is zeroed for odd-order derivatives (its sampled
    derivative is not representable on the grid).
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=period / n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    return np.real(np.fft.ifft(np.fft.fft(f, axis=axis) * mult.reshape(shape), axis=axis))
