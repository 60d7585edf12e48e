"""Composed measure -> vacuum approximation pipeline."""

import numpy as np
import pytest

from nulldust import constraints as C
from nulldust import measurepipe as MP
from nulldust.grids import AngularGrid, Grid1D
from nulldust.quadrature import gauss_legendre_nodes
from nulldust.rates import fit_rate
from nulldust.testfunctions import bump_dictionary, plateau


@pytest.fixture(scope="module")
def setting():
    chart = AngularGrid(8, 4)
    grid = Grid1D(0.0, 1.0, 257)
    ring = np.zeros(chart.shape + (2, 2))
    ring[..., 0, 0] = ring[..., 1, 1] = 1.0
    one = lambda ub: np.ones((len(np.atleast_1d(ub)),) + chart.shape)
    zero = lambda ub: np.zeros((len(np.atleast_1d(ub)),) + chart.shape)
    t1, _ = chart.mesh()
    strip = plateau((t1 - 3.6) / 0.5) * plateau((5.9 - t1) / 0.5)
    m_theta = (1.0 + 0.5 * np.cos(2.0 * np.pi * t1 / chart.L1)) * (1.0 - strip)
    dust = C.NullDustMeasure(atoms=[(0.45, m_theta)])
    data = C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)),
                             dust=dust)
    bv = C.solve_glued_shell(data, 1.0, 0.15)
    pipe = MP.MeasurePipeline(data, bv)
    pipe.freeze_k([1, 5])
    members = {m: pipe.member(m) for m in range(1, 6)}
    return chart, grid, data, bv, pipe, members


def test_index_coupling_outruns_envelope():
    pipe = MP.MeasurePipeline.__new__(MP.MeasurePipeline)
    pipe.n0 = 4
    assert pipe.n_of(2) >= 4 * 2**5
    assert pipe.n_of(4) / pipe.n_of(2) >= 2**5


def test_uniform_estimates(setting):
    chart, grid, data, bv, pipe, members = setting
    ub = np.linspace(0, 1, 1001)
    for mem in members.values():
        assert mem.phi_vac(ub).min() > 0.5
        assert np.abs(mem.family.det_defect(ub)).max() < 1e-12
        assert np.abs(mem.phi_vac.deriv(ub)).max() < 2.0


def test_uniform_convergence_of_members(setting):
    chart, grid, data, bv, pipe, members = setting
    ub = np.linspace(0, 1, 2001)
    gaps = [float(np.abs(members[m].phi_vac(ub) - bv(ub)).max()) for m in sorted(members)]
    assert gaps[-1] < gaps[0]
    assert gaps[-1] < 5e-3


def test_weak_identity_convergence(setting):
    chart, grid, data, bv, pipe, members = setting
    tf = bump_dictionary(grid, chart)[1]
    rows = MP.pipeline_weak_check(pipe, list(members.values()), [tf])
    gaps = [r["gap"] for r in rows]
    slope = fit_rate([2.0 ** -r["m"] for r in rows], gaps).slope
    assert slope >= 0.9
    assert gaps[-1] < 0.1 * abs(rows[-1]["measure_pairing"])


def test_mass_functional_matches_pairing_limit(setting):
    # concentration functional with the shear-energy identity equals the
    # windowed pairing: cross-module consistency of the two dust readings
    chart, grid, data, bv, pipe, members = setting
    mem = members[max(members)]
    t1, _ = chart.mesh()
    m_theta = data.dust.atoms[0][1]
    eps = mem.fm.eps
    window = (0.45 - 4 * eps, 0.45 + 4 * eps)
    xs, ws = gauss_legendre_nodes(*window, 64)
    # refine: sum over wavelength panels inside the window
    total = np.zeros(chart.shape)
    edges = np.linspace(*window, max(64, mem.n // 1024) + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs, ws = gauss_legendre_nodes(lo, hi, 16)
        normsq = mem.family.dgamma_normsq(xs)
        phiv = mem.phi_vac(xs) ** 2
        total += 0.25 * np.einsum("k,kij->ij", ws, normsq * phiv)
    mask = m_theta > 0.1
    rel = np.abs(total - m_theta)[mask] / m_theta[mask]
    assert rel.max() < 0.05


def test_empty_measure_gives_constant_family():
    chart = AngularGrid(4, 4)
    grid = Grid1D(0.0, 1.0, 129)
    ring = np.zeros(chart.shape + (2, 2))
    ring[..., 0, 0] = ring[..., 1, 1] = 1.0
    one = lambda ub: np.ones((len(np.atleast_1d(ub)),) + chart.shape)
    zero = lambda ub: np.zeros((len(np.atleast_1d(ub)),) + chart.shape)
    dust = C.NullDustMeasure(atoms=[], density=zero)
    data = C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)),
                             dust=dust)
    bv = C.solve_vacuum_constraint(data, 1.0, 0.2)
    pipe = MP.MeasurePipeline(data, bv, k=8.0)
    ub = np.linspace(0, 1, 501)
    vals = []
    for m in (1, 3):
        mem = pipe.member(m)
        ea, eb, ed = mem.family.entries(ub)
        vals.append((ea.copy(), mem.phi_vac(ub)))
    assert np.array_equal(vals[0][0], vals[1][0])
    assert np.abs(vals[0][1] - vals[1][1]).max() < 1e-12


def test_linearity_in_atom_mass(setting):
    chart, grid, data, bv, pipe, members = setting
    t1, _ = chart.mesh()
    mass2 = 2.0 * data.dust.atoms[0][1]
    dust2 = C.NullDustMeasure(atoms=[(0.45, mass2)])
    data2 = C.ReducedCharData(grid, chart, data.gamma_ring, data.omega, data.dlog_omega,
                              data.gamma_hat, data.dgamma_hat, dust=dust2)
    bv2 = C.solve_glued_shell(data2, 1.0, 0.15)
    pipe2 = MP.MeasurePipeline(data2, bv2)
    pipe2.freeze_k([1, 4])
    mem2 = pipe2.member(4)
    tf = bump_dictionary(grid, chart)[1]
    row1 = MP.pipeline_weak_check(pipe, [members[4]], [tf])[0]
    row2 = MP.pipeline_weak_check(pipe2, [mem2], [tf])[0]
    assert abs(row2["difference"] / row1["difference"] - 2.0) < 0.05
