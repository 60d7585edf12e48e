"""Hypersurface constraint: strong solves, glued shells, weak residuals."""

import numpy as np
import pytest

from nulldust import constraints as C
from nulldust.grids import AngularGrid, Grid1D
from nulldust.odesolve import FocusingError
from nulldust.rates import fit_rate
from nulldust.testfunctions import bump_dictionary


@pytest.fixture
def chart():
    return AngularGrid(8, 4)


@pytest.fixture
def ring(chart):
    g = np.zeros(chart.shape + (2, 2))
    g[..., 0, 0] = g[..., 1, 1] = 1.0
    return g


def const_maps(chart):
    one = lambda ub: np.ones((len(np.atleast_1d(ub)),) + chart.shape)
    zero = lambda ub: np.zeros((len(np.atleast_1d(ub)),) + chart.shape)
    return one, zero


def diag_exp_metric(chart, rate=2.0):
    def gh(ub):
        g = np.zeros(chart.shape + (2, 2))
        g[..., 0, 0] = np.exp(rate * ub)
        g[..., 1, 1] = np.exp(-rate * ub)
        return g

    def dgh(ub):
        g = np.zeros(chart.shape + (2, 2))
        g[..., 0, 0] = rate * np.exp(rate * ub)
        g[..., 1, 1] = -rate * np.exp(-rate * ub)
        return g

    return gh, dgh


def test_norm_square_constant_metric(chart, ring):
    assert np.abs(C.dgamma_norm_sq(ring, np.zeros(chart.shape + (2, 2)))).max() == 0.0


def test_norm_square_diagonal_oracle(chart):
    # gamma = diag(e^s, e^-s) gives 2 s'^2
    gh, dgh = diag_exp_metric(chart, rate=1.3)
    val = C.dgamma_norm_sq(gh(0.4), dgh(0.4))
    assert np.abs(val - 2.0 * 1.3**2).max() < 1e-12


def test_norm_square_rotation_invariant(chart):
    rng = np.random.default_rng(2)
    g = np.zeros(chart.shape + (2, 2))
    g[..., 0, 0], g[..., 1, 1] = 1.4, 0.9
    g[..., 0, 1] = g[..., 1, 0] = 0.2
    M = rng.standard_normal(chart.shape + (2, 2))
    M = M + np.swapaxes(M, -1, -2)
    c, s = np.cos(0.6), np.sin(0.6)
    R = np.array([[c, -s], [s, c]])
    gr = np.einsum("ca,db,...cd->...ab", R, R, g)
    Mr = np.einsum("ca,db,...cd->...ab", R, R, M)
    assert np.abs(C.dgamma_norm_sq(gr, Mr) - C.dgamma_norm_sq(g, M)).max() < 1e-12


def test_vacuum_cosine_oracle(chart, ring):
    gh, dgh = diag_exp_metric(chart)  # |dgam|^2 = 8 -> Phi'' = -Phi
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 401)
    data = C.ReducedCharData(grid, chart, ring, one, zero, gh, dgh)
    sol = C.solve_vacuum_constraint(data, 1.0, 0.0)
    assert np.abs(sol.phi[:, 0, 0] - np.cos(grid.points())).max() < 1e-11


def test_vacuum_affine_for_constant_metric(chart, ring):
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 101)
    data = C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)))
    sol = C.solve_vacuum_constraint(data, 1.0, 0.3)
    assert np.abs(sol.phi[:, 0, 0] - (1.0 + 0.3 * grid.points())).max() < 1e-13


def test_rk4_order_against_cosine(chart, ring):
    gh, dgh = diag_exp_metric(chart)
    one, zero = const_maps(chart)
    errs, hs = [], []
    for n in (51, 101, 201, 401):
        grid = Grid1D(0.0, 1.0, n)
        data = C.ReducedCharData(grid, chart, ring, one, zero, gh, dgh)
        sol = C.solve_vacuum_constraint(data, 1.0, 0.0)
        errs.append(np.abs(sol.phi[:, 0, 0] - np.cos(grid.points())).max())
        hs.append(grid.h)
    assert fit_rate(hs, errs).slope >= 3.9


def test_point_locality_bitwise(chart, ring):
    # solving on an angular sub-grid equals the restriction of the full solve
    gh, dgh = diag_exp_metric(chart)
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 101)
    data = C.ReducedCharData(grid, chart, ring, one, zero, gh, dgh)
    t1, _ = chart.mesh()
    phi0 = 1.0 + 0.1 * np.cos(t1)
    full = C.solve_vacuum_constraint(data, phi0, 0.0)
    sub_chart = AngularGrid(4, 4)
    sub_ring = np.zeros(sub_chart.shape + (2, 2))
    sub_ring[..., 0, 0] = sub_ring[..., 1, 1] = 1.0
    one_s, zero_s = const_maps(sub_chart)
    gh_s, dgh_s = diag_exp_metric(sub_chart)
    data_s = C.ReducedCharData(grid, sub_chart, sub_ring, one_s, zero_s, gh_s, dgh_s)
    sub = C.solve_vacuum_constraint(data_s, phi0[::2], 0.0)
    assert np.array_equal(sub.phi, full.phi[:, ::2])


def test_dust_zero_density_matches_vacuum(chart, ring):
    gh, dgh = diag_exp_metric(chart)
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 201)
    data = C.ReducedCharData(grid, chart, ring, one, zero, gh, dgh)
    vac = C.solve_vacuum_constraint(data, 1.0, 0.0)
    dust = C.solve_dust_constraint(data, 1.0, 0.0, density=lambda ub: np.zeros((len(ub),) + chart.shape))
    assert np.array_equal(vac.phi, dust.phi)


def test_dust_first_integral(chart, ring):
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 2001)
    cval = 0.8
    data = C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)))
    sol = C.solve_dust_constraint(data, 1.0, 0.0,
                                  density=lambda ub: np.full((len(ub),) + chart.shape, cval))
    energy = 0.5 * sol.dphi[:, 0, 0] ** 2 + 0.5 * cval * np.log(sol.phi[:, 0, 0])
    assert np.abs(energy - energy[0]).max() < 1e-8


def test_dust_comparison_monotone(chart, ring):
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 401)
    data = C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)))
    lo = C.solve_dust_constraint(data, 1.0, 0.0, density=lambda ub: np.full((len(ub),) + chart.shape, 0.4))
    hi = C.solve_dust_constraint(data, 1.0, 0.0, density=lambda ub: np.full((len(ub),) + chart.shape, 0.9))
    assert np.all(hi.phi <= lo.phi + 1e-14)


def test_focusing_error_location(chart, ring):
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 4.0, 801)
    gh, dgh = diag_exp_metric(chart)  # Phi = cos(ub): zero at pi/2
    data = C.ReducedCharData(grid, chart, ring, one, zero, gh, dgh)
    with pytest.raises(FocusingError) as err:
        C.solve_vacuum_constraint(data, 1.0, 0.0)
    assert abs(err.value.location[0] - np.pi / 2) < 0.05


def shell_data(chart, ring, grid, mass_scale=1.0):
    one, zero = const_maps(chart)
    t1, _ = chart.mesh()
    m_theta = mass_scale * (1.0 + 0.5 * np.cos(2.0 * np.pi * t1 / chart.L1))
    dust = C.NullDustMeasure(atoms=[(0.45, m_theta)])
    return C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)),
                             dust=dust), m_theta


def test_glued_shell_jump_value(chart, ring):
    grid = Grid1D(0.0, 1.0, 513)
    data, m_theta = shell_data(chart, ring, grid)
    sol = C.solve_glued_shell(data, 1.0, 0.1)
    loc, jump = sol.deriv_jumps()[0]
    assert loc == 0.45
    phi_at = sol(np.array([0.45]))[0]
    assert np.abs(jump + 0.5 * m_theta / phi_at).max() < 1e-12


def test_weak_residual_vacuum_strong_solution(chart, ring):
    gh, dgh = diag_exp_metric(chart, rate=1.1)
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 513)
    data = C.ReducedCharData(grid, chart, ring, one, zero, gh, dgh)
    sol = C.solve_vacuum_constraint(data, 1.0, 0.0)
    for tf in bump_dictionary(grid, chart)[:4]:
        assert abs(C.weak_constraint_residual(data, sol, tf, tf.deriv, support=tf.support)) < 1e-9


def test_weak_residual_smooth_dust_consistency(chart, ring):
    # strong smooth-dust solution pairs to zero against the dictionary
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 513)
    density = lambda ub: (1.0 + np.sin(np.pi * np.asarray(ub, float)))[:, None, None] * np.ones(chart.shape)
    dust = C.NullDustMeasure(atoms=[], density=density)
    data = C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)),
                             dust=dust)
    sol = C.solve_dust_constraint(data, 1.0, 0.0)
    for tf in bump_dictionary(grid, chart)[:4]:
        assert abs(C.weak_constraint_residual(data, sol, tf, tf.deriv, support=tf.support)) < 1e-8


def test_weak_residual_glued_shell_and_negative_control(chart, ring):
    grid = Grid1D(0.0, 1.0, 1025)
    data, m_theta = shell_data(chart, ring, grid)
    sol = C.solve_glued_shell(data, 1.0, 0.1)
    tf = bump_dictionary(grid, chart)[1]
    res = C.weak_constraint_residual(data, sol, tf, tf.deriv, support=tf.support)
    assert abs(res) < 1e-6
    # dropping the measure: residual becomes the (scaled) dust pairing
    no_dust = C.ReducedCharData(grid, chart, ring, data.omega, data.dlog_omega,
                                data.gamma_hat, data.dgamma_hat)
    res_control = C.weak_constraint_residual(no_dust, sol, tf, tf.deriv)
    pairing = C.measure_pairing(data, tf, weight=lambda ub: 1.0 / sol(ub))
    assert abs(res_control) > 0.4 * pairing


def test_weak_residual_linearity_in_mass(chart, ring):
    grid = Grid1D(0.0, 1.0, 513)
    tf = bump_dictionary(grid, chart)[1]
    for scale in (1.0, 2.0):
        data, _ = shell_data(chart, ring, grid, mass_scale=scale)
        sol = C.solve_glued_shell(data, 1.0, 0.1)
        assert abs(C.weak_constraint_residual(data, sol, tf, tf.deriv, support=tf.support)) < 1e-6


def test_boundary_touching_test_function_rejected(chart, ring):
    grid = Grid1D(0.0, 1.0, 101)
    data, _ = shell_data(chart, ring, grid)
    sol = C.solve_glued_shell(data, 1.0, 0.1)
    tf = bump_dictionary(grid, chart)[0]
    with pytest.raises(C.MeasureSupportError):
        C.weak_constraint_residual(data, sol, tf, tf.deriv, support=(0.0, 0.5))


def test_atom_outside_interval_rejected(chart, ring):
    grid = Grid1D(0.0, 1.0, 101)
    dust = C.NullDustMeasure(atoms=[(1.5, np.ones(chart.shape))])
    one, zero = const_maps(chart)
    with pytest.raises(C.MeasureSupportError):
        C.ReducedCharData(grid, chart, ring, one, zero,
                          lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)),
                          dust=dust)


def test_det_ratio_enforced(chart, ring):
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 101)

    def bad(ub):
        g = ring.copy()
        g[..., 0, 0] = 1.0 + 0.1 * ub  # det drifts away from det gamma_ring
        return g

    with pytest.raises(ValueError, match="det"):
        C.ReducedCharData(grid, chart, ring, one, zero, bad, lambda ub: np.zeros(chart.shape + (2, 2)))


def test_chi_identities(chart, ring):
    # conformal-only deformation: shear vanishes, trace matches 2 dPhi/(Omega Phi)
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 201)
    data = C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)))
    sol = C.solve_vacuum_constraint(data, 1.0, 1.0)  # Phi = 1 + ub
    trchi, chihat, chi = C.chi_from_data(data, sol, 0.5)
    assert np.abs(trchi - 2.0 / 1.5).max() < 1e-12
    assert np.abs(chihat).max() < 1e-13


def test_shear_norm_identity_random_data(chart, ring):
    # |chihat|^2_gamma = (1/4) Omega^-2 |dgamma_hat|^2 for any data
    gh, dgh = diag_exp_metric(chart, rate=0.7)
    om = lambda ub: np.exp(0.2 * np.sin(np.asarray(ub, float)))[:, None, None] * np.ones(chart.shape)
    dlom = lambda ub: 0.2 * np.cos(np.asarray(ub, float))[:, None, None] * np.ones(chart.shape)
    grid = Grid1D(0.0, 1.0, 201)
    data = C.ReducedCharData(grid, chart, ring, om, dlom, gh, dgh)
    sol = C.solve_vacuum_constraint(data, 1.0, 0.0)
    from nulldust.calculus import dot22

    ub = 0.37
    trchi, chihat, chi = C.chi_from_data(data, sol, ub)
    phi = sol(np.array([ub]))[0]
    gamma = phi[..., None, None] ** 2 * gh(ub)
    lhs = dot22(gamma, chihat, chihat)
    rhs = C.shear_norm_sq(data, np.array([ub]))[0]
    assert np.abs(lhs - rhs).max() < 1e-12


def test_mass_functional(chart, ring):
    one, zero = const_maps(chart)
    grid = Grid1D(0.0, 1.0, 201)
    # conformal-only data: the shear functional vanishes identically
    data = C.ReducedCharData(grid, chart, ring, one, zero,
                             lambda ub: ring.copy(), lambda ub: np.zeros(chart.shape + (2, 2)))
    per_theta, inf_val = C.christodoulou_mass(data, 0.5)
    assert np.abs(per_theta).max() < 1e-14
    # additivity over disjoint windows for shear-carrying data
    gh, dgh = diag_exp_metric(chart, rate=1.0)
    data2 = C.ReducedCharData(grid, chart, ring, one, zero, gh, dgh)
    full, _ = C.christodoulou_mass(data2, 0.8)
    left, _ = C.christodoulou_mass(data2, 0.4)
    data2b = C.ReducedCharData(Grid1D(0.4, 1.0, 121), chart, ring, one, zero, gh, dgh)
    right, _ = C.christodoulou_mass(data2b, 0.4)
    assert np.abs(full - left - right).max() < 1e-10


def test_dust_concavity_sign(chart, ring):
    # with constant lapse, nonnegative dust keeps the factor concave
    grid = Grid1D(0.0, 1.0, 513)
    data, _ = shell_data(chart, ring, grid)
    sol = C.solve_glued_shell(data, 1.0, 0.1)
    for piece in sol.pieces:
        assert np.all(piece.ddphi <= 1e-14)
