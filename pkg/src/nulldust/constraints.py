"""Characteristic constraint on an initial null hypersurface.

Free data on the hypersurface is (Omega, gamma_hat) with gamma_hat normalized
against a reference metric (det gamma_hat / det gamma_ring = 1); the conformal
factor Phi solves, per angular point,

    Phi'' = 2 (log Omega)' Phi' - (1/8) |d gamma_hat|^2 Phi        (vacuum)
    Phi'' = ... - (1/2) f / Phi                                     (smooth dust)

and measure-valued dust is handled by gluing vacuum pieces with derivative
jumps at the atoms.  The weak form of the constraint is

    -int (d phi) W dA dub + (1/8) int phi Omega^-2 |dgam|^2 Phi dA dub
        + (1/2) int phi Phi^-1 dnu  =  0,     W := Omega^-2 dPhi,

paired against test functions compactly supported in the open interval, with
dnu = sum_i m_i(theta) delta(ub - ub_i) dA_ring + Omega^-2 f dA_ring dub.
"""

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .fields import sym2_det, sym2_inverse
from .geometry import area_element
from .grids import AngularGrid, Grid1D
from .odesolve import (
    DenseSolution,
    PiecewiseSolution,
    solve_linear_second_order,
    solve_linear_segmented,
)
from .quadrature import gauss_legendre_nodes


class MeasureSupportError(ValueError):
    pass


@dataclass
class NullDustMeasure:
    """Atoms plus an absolutely continuous density.

    atoms: list of (location, mass field (n1, n2)), masses >= 0, locations
        strictly inside the coordinate interval.
    density: batch map ub(K,) -> f(K, n1, n2) >= 0, in the convention that
        the absolutely continuous part of the measure is Omega^-2 f dA_ring dub.
    """

    atoms: list = dc_field(default_factory=list)
    density: Callable | None = None

    def validate(self, grid: Grid1D):
        for loc, mass in self.atoms:
            if not (grid.a < loc < grid.b):
                raise MeasureSupportError(f"atom at ub={loc} not strictly inside ({grid.a}, {grid.b})")
            if np.any(np.asarray(mass) < 0):
                raise ValueError("atom masses must be nonnegative")

    @property
    def is_empty(self):
        return not self.atoms and self.density is None


@dataclass
class ReducedCharData:
    """Reduced data on one null hypersurface over a periodic angular chart.

    omega/dlog_omega/dgamma_normsq are batch maps ub(K,) -> (K, n1, n2);
    gamma_hat/dgamma_hat are per-slice maps ub -> (n1, n2, 2, 2).
    """

    grid: Grid1D
    chart: AngularGrid
    gamma_ring: np.ndarray
    omega: Callable
    dlog_omega: Callable
    gamma_hat: Callable
    dgamma_hat: Callable
    dgamma_normsq: Callable | None = None
    dust: NullDustMeasure | None = None
    dub_b0: np.ndarray | None = None
    det_rtol: float = 1e-12

    def __post_init__(self):
        if self.dgamma_normsq is None:
            self.dgamma_normsq = self._generic_normsq
        if self.dust is not None:
            self.dust.validate(self.grid)
        ring_det = sym2_det(self.gamma_ring)
        for ub in np.linspace(self.grid.a, self.grid.b, 5):
            ratio = sym2_det(self.gamma_hat(ub)) / ring_det
            if np.abs(ratio - 1.0).max() > self.det_rtol:
                raise ValueError(
                    f"det gamma_hat / det gamma_ring deviates from 1 by "
                    f"{np.abs(ratio - 1.0).max():.2e} at ub={ub:g}"
                )

    def _generic_normsq(self, ub_batch):
        out = np.empty((len(ub_batch),) + self.chart.shape)
        for i, ub in enumerate(np.asarray(ub_batch, float)):
            out[i] = dgamma_norm_sq(self.gamma_hat(ub), self.dgamma_hat(ub))
        return out

    def area_weights(self) -> np.ndarray:
        """Quadrature weights of dA_ring on the chart nodes."""
        return area_element(self.gamma_ring) * self.chart.cell_area


def dgamma_norm_sq(gamma_hat: np.ndarray, dgamma_hat: np.ndarray) -> np.ndarray:
    """|M|^2 with both indices raised by gamma_hat: trace of (gamma_hat^-1 M)^2."""
    inv = sym2_inverse(gamma_hat)
    n = np.einsum("...ab,...bc->...ac", inv, dgamma_hat)
    out = np.einsum("...ab,...ba->...", n, n)
    if np.any(out < -1e-10):
        raise ValueError("norm-square came out negative: degenerate conformal metric")
    return np.maximum(out, 0.0)


def solve_vacuum_constraint(data: ReducedCharData, phi0, dphi0, grid: Grid1D | None = None) -> DenseSolution:
    """Integrate the vacuum constraint per angular point; returns Phi and its derivative."""
    grid = grid or data.grid
    shape = data.chart.shape
    phi0 = np.broadcast_to(np.asarray(phi0, float), shape)
    dphi0 = np.broadcast_to(np.asarray(dphi0, float), shape)
    return solve_linear_second_order(
        grid,
        data.dlog_omega,
        lambda ub: 0.125 * data.dgamma_normsq(ub),
        None,
        phi0,
        dphi0,
    )


def solve_dust_constraint(data: ReducedCharData, phi0, dphi0, grid: Grid1D | None = None,
                          density: Callable | None = None) -> DenseSolution:
    """Same ODE with the smooth-dust source -(1/2) f / Phi."""
    grid = grid or data.grid
    if density is None:
        if data.dust is None or data.dust.density is None:
            raise ValueError("no smooth dust density on this data")
        if data.dust.atoms:
            raise ValueError("data carries atoms: use solve_glued_shell")
        density = data.dust.density
    shape = data.chart.shape
    phi0 = np.broadcast_to(np.asarray(phi0, float), shape)
    dphi0 = np.broadcast_to(np.asarray(dphi0, float), shape)
    return solve_linear_second_order(
        grid,
        data.dlog_omega,
        lambda ub: 0.125 * data.dgamma_normsq(ub),
        density,
        phi0,
        dphi0,
    )


def solve_glued_shell(data: ReducedCharData, phi0, dphi0, step: float | None = None) -> PiecewiseSolution:
    """BV solution with measure dust: vacuum/dust pieces glued with the atom
    jump [Phi'] = -(1/2) Omega^2 m / Phi."""
    if data.dust is None or not data.dust.atoms:
        raise ValueError("no atoms to glue across")
    atoms = sorted(data.dust.atoms, key=lambda am: am[0])
    step = step or data.grid.h
    cuts = [data.grid.a] + [a[0] for a in atoms] + [data.grid.b]
    shape = data.chart.shape

    def jump_for(loc, mass):
        om2 = np.asarray(data.omega(np.array([loc])))[0] ** 2

        def jump(phi_at_atom):
            return -0.5 * om2 * np.asarray(mass) / phi_at_atom

        return jump

    return solve_linear_segmented(
        np.array(cuts),
        [step] * (len(cuts) - 1),
        data.dlog_omega,
        lambda ub: 0.125 * data.dgamma_normsq(ub),
        data.dust.density,
        np.broadcast_to(np.asarray(phi0, float), shape).copy(),
        np.broadcast_to(np.asarray(dphi0, float), shape).copy(),
        jumps=[jump_for(loc, mass) for loc, mass in atoms],
    )


def measure_pairing(data: ReducedCharData, phi_test: Callable, weight: Callable | None = None,
                    panels: int = 64, gl: int = 16) -> float:
    """Pairing of the dust measure with phi_test (times an optional weight field).

    phi_test maps ub(K,) -> (K, n1, n2) (or broadcastable); weight likewise.
    """
    if data.dust is None:
        return 0.0
    w = data.area_weights()
    total = 0.0
    for loc, mass in data.dust.atoms:
        ub = np.array([loc])
        vals = np.broadcast_to(np.asarray(phi_test(ub)), (1,) + data.chart.shape)[0]
        if weight is not None:
            vals = vals * np.broadcast_to(np.asarray(weight(ub)), (1,) + data.chart.shape)[0]
        total += float(np.sum(vals * np.asarray(mass) * w))
    if data.dust.density is not None:
        xs, ws = _panel_nodes(data.grid.a, data.grid.b, panels, gl)
        f = np.asarray(data.dust.density(xs))
        om = np.asarray(data.omega(xs))
        vals = np.broadcast_to(np.asarray(phi_test(xs)), f.shape).copy()
        if weight is not None:
            vals *= np.broadcast_to(np.asarray(weight(xs)), f.shape)
        total += float(np.einsum("k,kij,ij->", ws, vals * f / om**2, w))
    return total


def _panel_nodes(a, b, panels, gl):
    xs, ws = [], []
    edges = np.linspace(a, b, panels + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre_nodes(lo, hi, gl)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def weak_constraint_residual(
    data: ReducedCharData,
    solution,
    phi_test: Callable,
    dphi_test: Callable,
    support: tuple[float, float] | None = None,
    panels: int = 128,
    gl: int = 16,
) -> float:
    """LHS - RHS of the weak constraint identity for the given solution.

    solution provides __call__(ub) and deriv(ub); phi_test/dphi_test map
    ub(K,) -> (K, n1, n2) (or broadcastable scalars).
    """
    if support is not None:
        if support[0] <= data.grid.a or support[1] >= data.grid.b:
            raise MeasureSupportError("test function support touches the interval boundary")
    w = data.area_weights()
    cuts = [data.grid.a, data.grid.b]
    if isinstance(solution, PiecewiseSolution):
        cuts = list(solution.breakpoints)
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        x, wq = _panel_nodes(lo, hi, panels, gl)
        xs.append(x)
        ws.append(wq)
    xs = np.concatenate(xs)
    wq = np.concatenate(ws)

    om2 = np.asarray(data.omega(xs)) ** 2
    dphi_sol = solution.deriv(xs)
    phi_sol = solution(xs)
    normsq = np.asarray(data.dgamma_normsq(xs))
    shp = (len(xs),) + data.chart.shape
    tv = np.broadcast_to(np.asarray(phi_test(xs)), shp)
    dtv = np.broadcast_to(np.asarray(dphi_test(xs)), shp)

    term_transport = -np.einsum("k,kij,ij->", wq, dtv * dphi_sol / om2, w)
    term_shear = 0.125 * np.einsum("k,kij,ij->", wq, tv * normsq * phi_sol / om2, w)
    term_measure = 0.0
    if data.dust is not None:
        inv_phi = _inverse_phi_weight(solution)
        term_measure = 0.5 * measure_pairing(data, phi_test, weight=inv_phi, panels=panels, gl=gl)
    return float(term_transport + term_shear + term_measure)


def _inverse_phi_weight(solution):
    def weight(ub):
        return 1.0 / solution(ub)

    return weight


def chi_from_data(data: ReducedCharData, solution, ub: float, identity_tol: float = 1e-10):
    """Outgoing expansion and shear on the slice at ub.

    chi = (2 Omega)^-1 d/dub (Phi^2 gamma_hat); returns (trchi, chihat, chi).
    The normalization det gamma_hat = det gamma_ring forces
    trchi = 2 dPhi / (Omega Phi), asserted against the trace.
    """
    ub_arr = np.array([float(ub)])
    om = np.asarray(data.omega(ub_arr))[0]
    phi = np.asarray(solution(ub_arr))[0]
    dphi = np.asarray(solution.deriv(ub_arr))[0]
    gh = data.gamma_hat(float(ub))
    dgh = data.dgamma_hat(float(ub))
    gamma = phi[..., None, None] ** 2 * gh
    chi = (2.0 * phi * dphi / (2.0 * om))[..., None, None] * gh + (phi**2 / (2.0 * om))[
        ..., None, None
    ] * dgh
    ginv = sym2_inverse(gamma)
    trchi = np.einsum("...ab,...ab->...", ginv, chi)
    forced = 2.0 * dphi / (om * phi)
    gap = np.abs(trchi - forced).max()
    if gap > identity_tol * (1.0 + np.abs(forced).max()):
        raise AssertionError(f"trace identity violated by {gap:.3e}")
    chihat = chi - 0.5 * trchi[..., None, None] * gamma
    return trchi, chihat, chi


def shear_norm_sq(data: ReducedCharData, ub_batch) -> np.ndarray:
    """|chihat|^2_gamma = (1/4) Omega^-2 |d gamma_hat|^2_gamma_hat, batched over ub."""
    om = np.asarray(data.omega(ub_batch))
    return 0.25 * np.asarray(data.dgamma_normsq(ub_batch)) / om**2


def christodoulou_mass(data: ReducedCharData, delta: float, panels: int = 256, gl: int = 16):
    """Per-direction integral of |chihat|^2_gamma over [a, a + delta] and its infimum.

    This is the concentration functional whose uniform lower bound drives
    trapped-surface formation.
    """
    if delta <= 0 or data.grid.a + delta > data.grid.b + 1e-12:
        raise ValueError("integration window outside the grid")
    xs, ws = _panel_nodes(data.grid.a, data.grid.a + delta, panels, gl)
    vals = shear_norm_sq(data, xs)
    per_theta = np.einsum("k,kij->ij", ws, vals)
    return per_theta, float(per_theta.min())
