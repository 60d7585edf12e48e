"""Composed approximation: measure-valued dust -> mollified smooth dust ->
determinant-preserving vacuum oscillations, with the weak-convergence check

    (1/4) int phi Omega^-2 |dgam_vac|^2 dA_vac dub
        - (1/4) int phi Omega^-2 |dgam|^2 dA dub   ->   int phi dnu

along the dyadic index m, where the oscillation index n(m) is the smallest
power of two with n >= n0 * 2^m so every O(1/n) defect sits below 2^-m.
"""

from dataclasses import dataclass

import numpy as np

from .constraints import ReducedCharData, measure_pairing
from .hfapprox import (
    DustBackground,
    OscillatoryFamily,
    entries_from_data,
    select_k_uniform,
    solve_phi_n_segmented,
)
from .mollify import MollifiedDensity, mollify_measure, solve_phi_m_dust
from .odesolve import PiecewiseSolution
from .quadrature import gauss_legendre_nodes


@dataclass
class PipelineMember:
    m: int
    n: int
    k: float
    fm: MollifiedDensity
    phi_dust: PiecewiseSolution
    family: OscillatoryFamily
    phi_vac: PiecewiseSolution


@dataclass
class MeasurePipeline:
    """Driver holding the measure data, its BV solution, and the frozen k.

    The oscillation index grows like n(m) ~ 2^{5m/2}: the mollified density's
    envelope steepens like eps^{-3/2} = 2^{3m}, and the envelope-derivative
    defect terms integrate down only once the oscillation outruns it, which
    is the composed version of choosing n large enough that every O(1/n)
    error sits below 2^-m.
    """

    data: ReducedCharData
    phi_bv: PiecewiseSolution
    n0: int = 4
    k: float | None = None

    def n_of(self, m: int) -> int:
        n = 1
        target = self.n0 * 2.0 ** (2.5 * m)
        while n < target:
            n *= 2
        return n

    def background(self, m: int):
        fm = mollify_measure(
            self.data.dust, self.data.omega, m, self.data.grid, dlog_omega=self.data.dlog_omega
        )
        phi_dust = solve_phi_m_dust(
            fm,
            self.data,
            self.phi_bv(np.array([self.data.grid.a]))[0],
            self.phi_bv.deriv(np.array([self.data.grid.a]))[0],
        )
        ent = entries_from_data(self.data)
        bg = DustBackground(
            self.data.chart,
            self.data.grid,
            ent["a"],
            ent["b"],
            ent["d"],
            ent["da"],
            ent["db"],
            ent["dd"],
            fm,
            fm.deriv,
            lambda ub: phi_dust(ub),
            lambda ub: phi_dust.deriv(ub),
            self.data.omega,
            self.data.dlog_omega,
        )
        return fm, phi_dust, bg

    def _probe(self, fm) -> np.ndarray:
        """Window-refined probe points resolving the mollifier envelope."""
        pts = [np.linspace(self.data.grid.a, self.data.grid.b, 513)]
        for lo, hi in fm.windows(pad=2.5):
            pts.append(np.linspace(lo, hi, 512))
        return np.unique(np.concatenate(pts))

    def freeze_k(self, m_values) -> float:
        if self.k is None:
            pairs, probes = [], []
            min_eig = None
            for m in m_values:
                fm, _, bg = self.background(m)
                pairs.append((bg, self.n_of(m)))
                probes.append(self._probe(fm))
                ub = probes[-1]
                a, b, d = bg.entries(ub)
                tr, det = a + d, a * d - b * b
                eig = float((0.5 * (tr - np.sqrt(np.maximum(tr * tr - 4 * det, 0)))).min())
                min_eig = eig if min_eig is None else min(min_eig, eig)
            self.k = select_k_uniform(pairs, min_eig, probes)
        return self.k

    def member(self, m: int) -> PipelineMember:
        if self.k is None:
            raise RuntimeError("freeze_k must run before building members")
        fm, phi_dust, bg = self.background(m)
        n = self.n_of(m)
        fam = OscillatoryFamily(bg, self.k, n)
        phi_vac = solve_phi_n_segmented(
            fam,
            fm.windows(pad=2.5),
            self.phi_bv(np.array([self.data.grid.a]))[0],
            self.phi_bv.deriv(np.array([self.data.grid.a]))[0],
            fine_scale=fm.eps,
        )
        return PipelineMember(m, n, self.k, fm, phi_dust, fam, phi_vac)


def shear_energy_pairing(member: PipelineMember, data: ReducedCharData, phi_test,
                         outer_panels: int = 48, gl: int = 12) -> float:
    """(1/4) int int phi Omega^-2 |dgam_vac|^2 (Phi_vac)^2 dA_ring dub."""
    fam, sol = member.family, member.phi_vac
    w = data.area_weights()
    wavelength = 2.0 * np.pi / (fam.k * fam.n)
    edges = {data.grid.a, data.grid.b}
    windows = member.fm.windows(pad=2.5)
    for lo, hi in windows:
        edges.add(max(data.grid.a, lo))
        edges.add(min(data.grid.b, hi))
    total = 0.0
    for lo, hi in zip(sorted(edges)[:-1], sorted(edges)[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        inside = any(wl - 1e-15 <= mid <= wh + 1e-15 for wl, wh in windows)
        panels = max(outer_panels, int(np.ceil((hi - lo) / wavelength)) * 2) if inside else outer_panels
        sub = np.linspace(lo, hi, panels + 1)
        for p_lo, p_hi in zip(sub[:-1], sub[1:]):
            xs, ws = gauss_legendre_nodes(p_lo, p_hi, gl)
            om2 = np.asarray(data.omega(xs)) ** 2
            normsq = fam.dgamma_normsq(xs)
            phiv = sol(xs) ** 2
            tv = np.broadcast_to(np.asarray(phi_test(xs)), normsq.shape)
            total += float(np.einsum("k,kij,ij->", ws, tv * normsq * phiv / om2, w))
    return 0.25 * total


def background_shear_pairing(data: ReducedCharData, phi_bv, phi_test,
                             panels: int = 96, gl: int = 12) -> float:
    """(1/4) int int phi Omega^-2 |dgam|^2 Phi^2 dA_ring dub for the BV data."""
    w = data.area_weights()
    breaks = list(getattr(phi_bv, "breakpoints", [data.grid.a, data.grid.b]))
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        sub = np.linspace(lo, hi, panels + 1)
        for p_lo, p_hi in zip(sub[:-1], sub[1:]):
            xs, ws = gauss_legendre_nodes(p_lo, p_hi, gl)
            om2 = np.asarray(data.omega(xs)) ** 2
            normsq = np.asarray(data.dgamma_normsq(xs))
            phiv = phi_bv(xs) ** 2
            tv = np.broadcast_to(np.asarray(phi_test(xs)), normsq.shape)
            total += float(np.einsum("k,kij,ij->", ws, tv * normsq * phiv / om2, w))
    return 0.25 * total


def pipeline_weak_check(pipeline: MeasurePipeline, members, phi_tests) -> list:
    """Convergence table of the weak identity, one row per (member, test)."""
    rows = []
    for tf in phi_tests:
        target = measure_pairing(pipeline.data, tf)
        bg_term = background_shear_pairing(pipeline.data, pipeline.phi_bv, tf)
        for member in members:
            vac_term = shear_energy_pairing(member, pipeline.data, tf)
            rows.append(
                {
                    "test": getattr(tf, "name", "phi"),
                    "m": member.m,
                    "n": member.n,
                    "vac_pairing": vac_term,
                    "background_pairing": bg_term,
                    "difference": vac_term - bg_term,
                    "measure_pairing": target,
                    "gap": abs(vac_term - bg_term - target),
                }
            )
    return rows
