"""Fixed-step RK4 integrators and dense solution output.

The hypersurface constraint is a second-order ODE per angular point; the
classical RK4 step needs coefficient values at half-steps, so coefficient
providers are evaluated on the half-step lattice.  Inner loops are compiled
with numba when available (bit-identical arithmetic either way).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grids import Grid1D

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    _HAVE_NUMBA = True
except Exception:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


class FocusingError(RuntimeError):
    """The conformal factor crossed zero: the metric degenerates."""

    def __init__(self, message, location):
        super().__init__(message)
        self.location = location


@njit(cache=True)
def _rk4_chunk(phi, psi, gl, cc, ff, h, out_phi, out_psi):
    """March phi'' = 2*gl*phi' - cc*phi - 0.5*ff/phi over one chunk.

    gl, cc, ff: (2*nc+1, M) at half-steps; phi, psi: (M,) state, updated in
    place; out_phi/out_psi: (nc+1, M) node storage including the entry state.
    Returns the flat index of the first nonpositive phi or -1.
    """
    nc = out_phi.shape[0] - 1
    M = phi.shape[0]
    for j in range(M):
        out_phi[0, j] = phi[j]
        out_psi[0, j] = psi[j]
    for i in range(nc):
        i0 = 2 * i
        for j in range(M):
            p, q = phi[j], psi[j]
            k1p = q
            k1q = 2.0 * gl[i0, j] * q - cc[i0, j] * p - 0.5 * ff[i0, j] / p
            p1 = p + 0.5 * h * k1p
            q1 = q + 0.5 * h * k1q
            k2p = q1
            k2q = 2.0 * gl[i0 + 1, j] * q1 - cc[i0 + 1, j] * p1 - 0.5 * ff[i0 + 1, j] / p1
            p2 = p + 0.5 * h * k2p
            q2 = q + 0.5 * h * k2q
            k3p = q2
            k3q = 2.0 * gl[i0 + 1, j] * q2 - cc[i0 + 1, j] * p2 - 0.5 * ff[i0 + 1, j] / p2
            p3 = p + h * k3p
            q3 = q + h * k3q
            k4p = q3
            k4q = 2.0 * gl[i0 + 2, j] * q3 - cc[i0 + 2, j] * p3 - 0.5 * ff[i0 + 2, j] / p3
            pn = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            qn = q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
            phi[j] = pn
            psi[j] = qn
            out_phi[i + 1, j] = pn
            out_psi[i + 1, j] = qn
            if pn <= 0.0:
                return i * M + j
    return -1


_H0 = np.array([1.0, 0.0, 0.0, -10.0, 15.0, -6.0])
_H1 = np.array([0.0, 1.0, 0.0, -6.0, 8.0, -3.0])
_H2 = np.array([0.0, 0.0, 0.5, -1.5, 1.5, -0.5])
_H3 = np.array([0.0, 0.0, 0.0, 10.0, -15.0, 6.0])
_H4 = np.array([0.0, 0.0, 0.0, -4.0, 7.0, -3.0])
_H5 = np.array([0.0, 0.0, 0.0, 0.5, -1.0, 0.5])


def _poly(coeffs, t):
    r = np.zeros_like(t)
    for c in coeffs[::-1]:
        r = r * t + c
    return r


def _dpoly(coeffs, t):
    r = np.zeros_like(t)
    for k in range(len(coeffs) - 1, 0, -1):
        r = r * t + k * coeffs[k]
    return r


@dataclass
class DenseSolution:
    """Node values plus quintic two-point Hermite dense output.

    Arrays are (n_nodes, *field_shape); the second derivative comes from the
    ODE right-hand side, making the interpolant O(h^6)-accurate for smooth
    coefficients.
    """

    grid: Grid1D
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray

    def _locate(self, ub):
        ub = np.asarray(ub, dtype=float)
        h = self.grid.h
        idx = np.clip(((ub - self.grid.a) / h).astype(int), 0, self.grid.n - 2)
        t = (ub - (self.grid.a + idx * h)) / h
        return idx, t, h

    def _eval(self, ub, basis_fn):
        idx, t, h = self._locate(ub)
        extra = (None,) * (self.phi.ndim - 1)
        tt = t[(...,) + extra] if self.phi.ndim > 1 else t
        f0, f1 = self.phi[idx], self.phi[idx + 1]
        d0, d1 = self.dphi[idx], self.dphi[idx + 1]
        s0, s1 = self.ddphi[idx], self.ddphi[idx + 1]
        return (
            f0 * basis_fn(_H0, tt)
            + h * d0 * basis_fn(_H1, tt)
            + h * h * s0 * basis_fn(_H2, tt)
            + f1 * basis_fn(_H3, tt)
            + h * d1 * basis_fn(_H4, tt)
            + h * h * s1 * basis_fn(_H5, tt)
        )

    def __call__(self, ub):
        return self._eval(ub, _poly)

    def deriv(self, ub):
        return self._eval(ub, _dpoly) / self.grid.h


def rk4_second_order(
    rhs: Callable[[float, np.ndarray, np.ndarray], np.ndarray],
    y0,
    dy0,
    grid: Grid1D,
):
    """Generic RK4 for y'' = rhs(x, y, y'); returns node arrays (y, y', y'')."""
    y = np.array(y0, dtype=float)
    v = np.array(dy0, dtype=float)
    h = grid.h
    xs = grid.points()
    ys = np.empty((grid.n,) + y.shape)
    vs = np.empty_like(ys)
    accs = np.empty_like(ys)
    ys[0], vs[0] = y, v
    accs[0] = rhs(xs[0], y, v)
    for i in range(grid.n - 1):
        x = xs[i]
        k1y, k1v = v, rhs(x, y, v)
        k2y = v + 0.5 * h * k1v
        k2v = rhs(x + 0.5 * h, y + 0.5 * h * k1y, k2y)
        k3y = v + 0.5 * h * k2v
        k3v = rhs(x + 0.5 * h, y + 0.5 * h * k2y, k3y)
        k4y = v + h * k3v
        k4v = rhs(x + h, y + h * k3y, k4y)
        y = y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        ys[i + 1], vs[i + 1] = y, v
        accs[i + 1] = rhs(xs[i + 1], y, v)
    return ys, vs, accs


def solve_linear_second_order(
    grid: Grid1D,
    glog_fn: Callable[[np.ndarray], np.ndarray],
    coeff_fn: Callable[[np.ndarray], np.ndarray],
    source_fn,
    phi0: np.ndarray,
    dphi0: np.ndarray,
    chunk: int = 4096,
) -> DenseSolution:
    """March phi'' = 2*glog*phi' - coeff*phi - source/(2 phi) on grid nodes.

    glog_fn/coeff_fn/source_fn map a batch of ub values (K,) to (K, *shape)
    coefficient arrays (source_fn may be None for the homogeneous equation).
    Raises FocusingError if phi crosses zero.
    """
    shape = np.shape(phi0)
    M = int(np.prod(shape)) if shape else 1
    phi = np.array(phi0, dtype=float).reshape(M).copy()
    psi = np.array(dphi0, dtype=float).reshape(M).copy()
    n = grid.n
    h = grid.h
    out_phi = np.empty((n, M))
    out_psi = np.empty((n, M))
    out_phi[0], out_psi[0] = phi, psi
    pos = 0
    while pos < n - 1:
        nc = min(chunk, n - 1 - pos)
        ub = grid.a + (pos + 0.5 * np.arange(2 * nc + 1)) * h
        gl = _broadcast_coeff(glog_fn, ub, M)
        cc = _broadcast_coeff(coeff_fn, ub, M)
        ff = _broadcast_coeff(source_fn, ub, M) if source_fn is not None else np.zeros((2 * nc + 1, M))
        o_phi = np.empty((nc + 1, M))
        o_psi = np.empty((nc + 1, M))
        bad = _rk4_chunk(phi, psi, gl, cc, ff, h, o_phi, o_psi)
        if bad >= 0:
            step, j = divmod(int(bad), M)
            loc = grid.a + (pos + step + 1) * h
            raise FocusingError(
                f"conformal factor reached zero near ub={loc:.6g} (angular flat index {j})",
                location=(loc, j),
            )
        out_phi[pos + 1 : pos + nc + 1] = o_phi[1:]
        out_psi[pos + 1 : pos + nc + 1] = o_psi[1:]
        pos += nc
    nodes = grid.points()
    gln = _broadcast_coeff(glog_fn, nodes, M)
    ccn = _broadcast_coeff(coeff_fn, nodes, M)
    ffn = _broadcast_coeff(source_fn, nodes, M) if source_fn is not None else np.zeros((n, M))
    acc = 2.0 * gln * out_psi - ccn * out_phi - 0.5 * ffn / out_phi
    final_shape = (n,) + (shape if shape else ())
    return DenseSolution(
        grid,
        out_phi.reshape(final_shape),
        out_psi.reshape(final_shape),
        acc.reshape(final_shape),
    )


def _broadcast_coeff(fn, ub, M):
    vals = np.asarray(fn(ub), dtype=float)
    if vals.ndim == 1:
        vals = np.repeat(vals[:, None], M, axis=1)
    else:
        vals = vals.reshape(len(ub), M)
    return np.ascontiguousarray(vals)


@dataclass
class PiecewiseSolution:
    """Solutions on consecutive segments; continuous value, derivative may jump."""

    pieces: list  # list[DenseSolution]
    breakpoints: np.ndarray  # segment boundaries including interval ends

    def _piece(self, ub):
        return np.clip(
            np.searchsorted(self.breakpoints, ub, side="right") - 1, 0, len(self.pieces) - 1
        )

    def _apply(self, ub, method):
        ub = np.atleast_1d(np.asarray(ub, float))
        idx = self._piece(ub)
        out = np.empty((len(ub),) + self.pieces[0].phi.shape[1:])
        for p in np.unique(idx):
            sel = idx == p
            out[sel] = method(self.pieces[p], ub[sel])
        return out

    def __call__(self, ub):
        return self._apply(ub, lambda piece, x: piece(x))

    def deriv(self, ub):
        return self._apply(ub, lambda piece, x: piece.deriv(x))

    def deriv_jumps(self):
        """(location, jump of the derivative) at each interior breakpoint."""
        out = []
        for i in range(len(self.pieces) - 1):
            left = self.pieces[i].dphi[-1]
            right = self.pieces[i + 1].dphi[0]
            out.append((self.breakpoints[i + 1], right - left))
        return out


def solve_linear_segmented(
    breakpoints,
    steps,
    glog_fn,
    coeff_fn,
    source_fn,
    phi0,
    dphi0,
    jumps=None,
) -> PiecewiseSolution:
    """Segment-by-segment march with per-segment step sizes.

    breakpoints: increasing segment edges; steps: target step per segment;
    jumps: optional derivative increments applied at interior breakpoints,
    each a callable (phi_values -> dphi_increment) or None.
    """
    breakpoints = np.asarray(breakpoints, dtype=float)
    phi = np.array(phi0, dtype=float)
    dphi = np.array(dphi0, dtype=float)
    pieces = []
    for j, (a, b) in enumerate(zip(breakpoints[:-1], breakpoints[1:])):
        n = max(9, int(np.ceil((b - a) / steps[j])) + 1)
        sol = solve_linear_second_order(
            Grid1D(a, b, n), glog_fn, coeff_fn, source_fn, phi, dphi
        )
        pieces.append(sol)
        phi = sol.phi[-1].copy()
        dphi = sol.dphi[-1].copy()
        if jumps is not None and j < len(breakpoints) - 2 and jumps[j] is not None:
            dphi = dphi + jumps[j](phi)
    return PiecewiseSolution(pieces, breakpoints)
