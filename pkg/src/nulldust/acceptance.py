"""Acceptance suite: every headline check of the library at its stated
tolerance, each returning a structured verdict.

Shared by tests/test_acceptance.py (assertions) and the `verify-all` CLI
subcommand (summary.json + exit code).
"""

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import charpipe as P
from . import compcompact as CC
from . import constraints as C
from . import gowdy
from . import hfapprox as H
from . import measurepipe as MP
from . import mollify as M
from . import planewave as pw
from . import shellmod as S
from .grids import AngularGrid, Grid1D
from .odesolve import rk4_second_order
from .quadrature import gauss_legendre_integrate, gauss_legendre_nodes
from .rates import fit_rate
from .stencils import deriv1_fd4
from .testfunctions import bump_dictionary, plateau

# Tolerances, pinned once (the CLI documents them):
TOL = {
    "ode_step": 1e-10,          # per-step integration tolerance class
    "quadrature": 1e-9,
    "fft_identity": 1e-12,
    "rate_slope": 0.9,          # acceptance fraction of a first-order rate
    "det_preservation": 1e-12,
    "weak_residual": 1e-6,
    "ricci_limit": 1e-6,
    "einstein_limit": 1e-5,
    "cone_reproduction": 1e-8,
    "jump": 1e-3,
    "pairing": 1e-3,
    "first_integral": 1e-8,
    "sin_sq_control": 1e-6,
}


@dataclass
class Verdict:
    name: str
    passed: bool
    seconds: float
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def _verdict(name, checks, t0, **details):
    """checks: dict label -> bool; fails listed in details."""
    passed = all(checks.values())
    details = dict(details)
    details["checks"] = {k: bool(v) for k, v in checks.items()}
    return Verdict(name, passed, time.time() - t0, details)


# ---------------------------------------------------------------------------
# 1. oscillation limit of the plane-wave family
# ---------------------------------------------------------------------------

def criterion_burnett() -> Verdict:
    t0 = time.time()
    seed = pw.SEEDS["cosine"]
    lam_seq = [2.0**-j for j in range(2, 11)]
    interval = Grid1D(0.0, 0.5, 4097)

    def family(lam):
        n = max(4097, int(np.ceil(64 * 0.5 / lam)) + 1)
        return pw.make_burnett_G(lam, seed, Grid1D(0.0, 0.5, n))

    phis = [
        lambda u: np.ones_like(u),
        lambda u: np.sin(2 * np.pi * u) + 1.2,
        lambda u: np.exp(-8.0 * (u - 0.25) ** 2),
        lambda u: u * (0.5 - u),
        lambda u: np.cos(4 * np.pi * u) + 1.5,
    ]
    slopes, gaps_last = [], []
    for phi in phis:
        pairings = pw.weak_limit_pairings(family, phi, lam_seq)
        # oscillation energy averages to half the squared envelope
        target = gauss_legendre_integrate(lambda u: 0.5 * seed.k(u) ** 2 * phi(u), 0.0, 0.5, 192)
        gaps = np.abs(pairings - target)
        slopes.append(fit_rate(lam_seq, gaps).slope)
        gaps_last.append(float(gaps[-1]))

    # limit member: averaged coefficient ODE, curvature from an independent stencil
    grid = Grid1D(0.0, 0.5, 4097)
    ys, vs, _ = rk4_second_order(
        lambda u, y, v: -(seed.k(u) ** 2 / 8.0) * y, np.array(1.0), np.array(0.0), grid
    )
    h0 = ys.ravel()
    d2 = deriv1_fd4(deriv1_fd4(h0, grid.h), grid.h)
    ric_limit = -2.0 * d2 / h0
    ric_target = 0.25 * seed.k(grid.points()) ** 2
    ric_err = float(np.abs(ric_limit - ric_target)[4:-4].max())

    # C1 convergence of the wave factor to the averaged solution
    c1_gaps = []
    for lam in lam_seq:
        prof = family(lam)
        fac = pw.solve_H(prof, richardson=False)
        pts = prof.grid.points()
        href = np.interp(pts, grid.points(), h0)
        vref = np.interp(pts, grid.points(), vs.ravel())
        c1_gaps.append(float(np.abs(fac.h - href).max() + np.abs(fac.dh - vref).max()))
    c1_slope = fit_rate(lam_seq, c1_gaps).slope

    checks = {
        "pairing_slopes_ge_0.9": all(s >= TOL["rate_slope"] for s in slopes),
        "limit_ricci_quarter_ksq": ric_err <= TOL["ricci_limit"],
        "wave_factor_C1_slope": c1_slope >= TOL["rate_slope"],
    }
    return _verdict(
        "burnett_limit",
        checks,
        t0,
        pairing_slopes=slopes,
        final_gaps=gaps_last,
        ricci_error=ric_err,
        c1_slope=c1_slope,
        note="pairings converge to the averaged energy (1/2) int k^2 phi",
    )


# ---------------------------------------------------------------------------
# 2. concentration limit of the plane-wave family
# ---------------------------------------------------------------------------

def criterion_shell_limit() -> Verdict:
    t0 = time.time()
    seed = pw.SEEDS["bump"]
    lam = 2.0**-10
    grid = Grid1D(-0.5, 0.5, 2**17 + 1)
    prof = pw.make_shell_G(lam, seed, grid)
    fac = pw.solve_H(prof, richardson=False)
    loc, jump = pw.jump_detect(fac, window=4 * lam)
    jump_err = abs(jump - (-0.25))

    phis = [
        lambda u: np.ones_like(u),
        lambda u: np.cos(u) + 0.5,
        lambda u: np.exp(-4.0 * u**2),
    ]
    pair_errs = []
    for phi in phis:
        ub = grid.points()
        pairing = float(np.trapezoid(prof.dg(ub) ** 2 * phi(ub), ub))
        pair_errs.append(abs(pairing - phi(np.zeros(1))[0]))

    # derivative energy is parameter independent
    energies = []
    for lam_j in (2.0**-6, 2.0**-8, 2.0**-10):
        p = pw.make_shell_G(lam_j, seed, grid)
        ub = grid.points()
        energies.append(float(np.trapezoid(p.dg(ub) ** 2, ub)))

    checks = {
        "jump_minus_quarter": jump_err <= TOL["jump"],
        "pairing_to_point_value": max(pair_errs) <= TOL["pairing"],
        "energy_identity": max(abs(e - 1.0) for e in energies) <= 1e-6,
    }
    return _verdict(
        "shell_limit",
        checks,
        t0,
        jump=jump,
        jump_location=loc,
        jump_error=jump_err,
        pairing_errors=pair_errs,
        energies=energies,
    )


# ---------------------------------------------------------------------------
# 3. Bessel-profile family and its two-beam limit
# ---------------------------------------------------------------------------

def criterion_gowdy() -> Verdict:
    t0 = time.time()
    # coarsest grid keeps 16 nodes per oscillation of the n = 8 member
    scan = gowdy.vacuum_residual_scan(8, 1.0, [128, 176, 240, 320])
    n_values = [100, 316, 1000, 3162, 10000, 31623, 100000]
    gaps = gowdy.alpha_limit_gap(n_values, 1.0, 0.0)
    monotone = bool(np.all(np.diff(gaps) < 0))
    # tau = 0 pins the common value, tau = 0.5 separates the two targets
    err_tt = err_thth = off = 0.0
    for tau in (0.0, 0.5):
        lim = gowdy.limit_einstein(1.0, tau)
        err_tt = max(err_tt, abs(lim["G_tautau"] - lim["target_tautau"]))
        err_thth = max(err_thth, abs(lim["G_thetatheta"] - lim["target_thetatheta"]))
        off = max(off, lim["max_off_component"])
    guu, gubub = gowdy.null_frame_dust_components(lim["G_tautau"], lim["G_thetatheta"], 0.5)

    checks = {
        "fd_order_ge_3.5": scan.observed_order >= 3.5,
        "alpha_gap_monotone": monotone,
        "einstein_tautau": err_tt <= TOL["einstein_limit"],
        "einstein_thetatheta": err_thth <= TOL["einstein_limit"],
        "off_components_vanish": off <= TOL["einstein_limit"],
        "two_beam_symmetry": abs(guu - gubub) < 1e-15,
    }
    return _verdict(
        "gowdy_family",
        checks,
        t0,
        observed_order=scan.observed_order,
        residuals=scan.residuals,
        alpha_gaps=list(map(float, gaps)),
        einstein=lim,
        alpha_rate_recorded=float(fit_rate(n_values, gaps).slope),
    )


# ---------------------------------------------------------------------------
# 4. hypersurface constraint solver
# ---------------------------------------------------------------------------

def _flat_ring(chart):
    ring = np.zeros(chart.shape + (2, 2))
    ring[..., 0, 0] = 1.0
    ring[..., 1, 1] = 1.0
    return ring


def _const_maps(chart):
    one = lambda ub: np.ones((len(np.atleast_1d(ub)),) + chart.shape)
    zero = lambda ub: np.zeros((len(np.atleast_1d(ub)),) + chart.shape)
    return one, zero


def criterion_constraints() -> Verdict:
    t0 = time.time()
    chart = AngularGrid(8, 4)
    ring = _flat_ring(chart)
    one, zero = _const_maps(chart)

    # RK4 order against the closed-form cosine: |dgam|^2 = 8 makes Phi'' = -Phi
    def gh(ub):
        g = np.zeros(chart.shape + (2, 2))
        g[..., 0, 0] = np.exp(2.0 * ub)
        g[..., 1, 1] = np.exp(-2.0 * ub)
        return g

    def dgh(ub):
        g = np.zeros(chart.shape + (2, 2))
        g[..., 0, 0] = 2.0 * np.exp(2.0 * ub)
        g[..., 1, 1] = -2.0 * np.exp(-2.0 * ub)
        return g

    errs, hs = [], []
    for n in (51, 101, 201, 401):
        grid = Grid1D(0.0, 1.0, n)
        data = C.ReducedCharData(grid, chart, ring, one, zero, gh, dgh)
        sol = C.solve_vacuum_constraint(data, 1.0, 0.0)
        errs.append(float(np.abs(sol.phi[:, 0, 0] - np.cos(grid.points())).max()))
        hs.append(grid.h)
    order = fit_rate(hs, errs).slope

    # first integral of the autonomous dust equation
    grid = Grid1D(0.0, 1.0, 2001)
    cval = 0.8
    data = C.ReducedCharData(
        grid, chart, ring, one, zero, lambda ub: ring.copy(),
        lambda ub: np.zeros(chart.shape + (2, 2)),
    )
    sol = C.solve_dust_constraint(data, 1.0, 0.0, density=lambda ub: np.full((len(ub),) + chart.shape, cval))
    energy = 0.5 * sol.dphi[:, 0, 0] ** 2 + 0.5 * cval * np.log(sol.phi[:, 0, 0])
    drift = float(np.abs(energy - energy[0]).max())

    # glued shell weak residual over the dictionary
    t1, _ = chart.mesh()
    m_theta = 1.0 + 0.5 * np.cos(2.0 * np.pi * t1 / chart.L1)
    dust = C.NullDustMeasure(atoms=[(0.45, m_theta)])
    data_shell = C.ReducedCharData(
        grid, chart, ring, one, zero, lambda ub: ring.copy(),
        lambda ub: np.zeros(chart.shape + (2, 2)), dust=dust,
    )
    glued = C.solve_glued_shell(data_shell, 1.0, 0.1)
    residuals = []
    for tf in bump_dictionary(grid, chart):
        residuals.append(
            abs(C.weak_constraint_residual(data_shell, glued, tf, tf.deriv, support=tf.support))
        )

    # comparison property: larger density cannot increase the factor downstream
    sol_hi = C.solve_dust_constraint(data, 1.0, 0.0, density=lambda ub: np.full((len(ub),) + chart.shape, 2 * cval))
    monotone = bool(np.all(sol_hi.phi <= sol.phi + 1e-14))

    checks = {
        "rk4_order_ge_3.9": order >= 3.9,
        "first_integral_drift": drift <= TOL["first_integral"],
        "weak_residuals_below_1e-6": max(residuals) <= TOL["weak_residual"],
        "dust_comparison_monotone": monotone,
    }
    return _verdict(
        "constraint_solver",
        checks,
        t0,
        rk4_order=order,
        drift=drift,
        max_weak_residual=max(residuals),
        n_test_functions=len(residuals),
    )


# ---------------------------------------------------------------------------
# 5. dust-absorbing oscillations
# ---------------------------------------------------------------------------

def criterion_absorber() -> Verdict:
    t0 = time.time()
    chart = AngularGrid(8, 4)
    grid = Grid1D(0.0, 1.0, 257)
    t1, t2 = chart.mesh()

    strip = plateau((t1 - 3.4) / 0.6) * plateau((6.1 - t1) / 0.6)
    w_theta = np.clip(1.0 - strip, 0.0, None)

    # diagonal conformal entries with unit determinant; the oscillation
    # absorbs exactly 4f only with vanishing off-diagonal entry (with b != 0
    # the absorbed mean is 4f (ad - b^2)/(ad); see the unit tests)
    prof = 0.2 * np.cos(2 * np.pi * t1 / chart.L1) * np.cos(2 * np.pi * t2 / chart.L2)
    sfun = lambda ub: prof[None] * np.sin(2 * np.pi * np.asarray(ub, float))[:, None, None]
    dsfun = lambda ub: prof[None] * 2 * np.pi * np.cos(2 * np.pi * np.asarray(ub, float))[:, None, None]
    b_fn = lambda ub: np.zeros((len(np.atleast_1d(ub)),) + chart.shape)
    db_fn = b_fn
    a_fn = lambda ub: np.exp(sfun(ub))
    da_fn = lambda ub: dsfun(ub) * np.exp(sfun(ub))
    d_fn = lambda ub: 1.0 / a_fn(ub)
    dd_fn = lambda ub: -dsfun(ub) / a_fn(ub)

    f_fn = lambda ub: 1.2 * w_theta[None] * np.exp(np.sin(2 * np.pi * np.asarray(ub, float)))[:, None, None]
    df_fn = lambda ub: 1.2 * w_theta[None] * (
        2 * np.pi * np.cos(2 * np.pi * np.asarray(ub, float))
        * np.exp(np.sin(2 * np.pi * np.asarray(ub, float)))
    )[:, None, None]

    omega = lambda ub: np.exp(0.1 * np.sin(np.pi * np.asarray(ub, float)))[:, None, None] * np.ones(chart.shape)[None]
    dlog_omega = lambda ub: 0.1 * np.pi * np.cos(np.pi * np.asarray(ub, float))[:, None, None] * np.ones(chart.shape)[None]

    # dust factor solved numerically, then handed over as a dense callable
    ring = _flat_ring(chart)
    gh = lambda ub: _gamma_from_entries(a_fn, b_fn, d_fn, chart, ub)
    dgh = lambda ub: _gamma_from_entries(da_fn, db_fn, dd_fn, chart, ub)
    data = C.ReducedCharData(grid, chart, ring, omega, dlog_omega, gh, dgh)
    phi_dust = C.solve_dust_constraint(data, 1.0, 0.0, density=f_fn)

    bg = H.DustBackground(
        chart, grid, a_fn, b_fn, d_fn, da_fn, db_fn, dd_fn, f_fn, df_fn,
        lambda ub: phi_dust(ub), lambda ub: phi_dust.deriv(ub), omega, dlog_omega,
    )
    rows = H.family_convergence(bg, [4, 8, 16, 32, 64, 128])
    ns = np.array([r["n"] for r in rows], float)
    inv_n = 1.0 / ns
    slope_gamma = fit_rate(inv_n, [r["gamma_gap"] for r in rows]).slope
    slope_phi = fit_rate(inv_n, [r["phi_gap"] + r["dphi_gap"] for r in rows]).slope
    slope_defect = fit_rate(inv_n, [r["weak_defect"] for r in rows]).slope
    slope_control = fit_rate(inv_n, [r["defect_no_corrector"] for r in rows]).slope
    det_worst = max(r["det_defect"] for r in rows)
    corrector_sups = [r["corrector_sup"] for r in rows]

    checks = {
        "det_preserved_1e-12": det_worst <= TOL["det_preservation"],
        "gamma_slope": slope_gamma >= TOL["rate_slope"],
        "phi_slope": slope_phi >= TOL["rate_slope"],
        "defect_slope": slope_defect >= TOL["rate_slope"],
        "control_slope_le_0.2": slope_control <= 0.2,
        "corrector_bounded": max(corrector_sups) <= 2.0 * min(corrector_sups) + 1e-12,
    }
    return _verdict(
        "oscillation_absorber",
        checks,
        t0,
        slopes={
            "gamma": slope_gamma,
            "phi": slope_phi,
            "defect": slope_defect,
            "control": slope_control,
        },
        det_worst=det_worst,
        rows=[{k: (float(v) if isinstance(v, (int, float)) else v) for k, v in r.items()} for r in rows],
    )


def _gamma_from_entries(a_fn, b_fn, d_fn, chart, ub):
    ub_arr = np.array([float(ub)])
    g = np.empty(chart.shape + (2, 2))
    g[..., 0, 0] = a_fn(ub_arr)[0]
    g[..., 0, 1] = g[..., 1, 0] = b_fn(ub_arr)[0]
    g[..., 1, 1] = d_fn(ub_arr)[0]
    return g


# ---------------------------------------------------------------------------
# 6. mollification of measure dust
# ---------------------------------------------------------------------------

def criterion_mollification() -> Verdict:
    t0 = time.time()
    chart = AngularGrid(8, 4)
    grid = Grid1D(0.0, 1.0, 257)
    ring = _flat_ring(chart)
    one, zero = _const_maps(chart)
    t1, _ = chart.mesh()
    m_theta = 1.0 + 0.5 * np.cos(2.0 * np.pi * t1 / chart.L1)
    dust = C.NullDustMeasure(atoms=[(0.45, m_theta)])
    data = C.ReducedCharData(
        grid, chart, ring, one, zero, lambda ub: ring.copy(),
        lambda ub: np.zeros(chart.shape + (2, 2)), dust=dust,
    )
    tfs = bump_dictionary(grid, chart)[:3]

    ratios, l1_norms = [], []
    for m in range(1, 11):
        fm = M.mollify_measure(dust, one, m, grid)
        worst = 0.0
        for tf in tfs:
            r = M.pairing_gap(fm, data, tf, tf.deriv)
            worst = max(worst, r["ratio"])
        ratios.append(worst)
        l1_norms.append(M.l1_w_uniform_norm(fm, data))

    glued = C.solve_glued_shell(data, 1.0, 0.1)
    jump = float(np.abs(glued.deriv_jumps()[0][1]).max())
    ms = list(range(1, 8))
    sup_l2, dsup = [], []
    for m in ms:
        fm = M.mollify_measure(dust, one, m, grid)
        sol = M.solve_phi_m_dust(fm, data, 1.0, 0.1)
        stats = _phi_gap_stats(sol, glued, fm, grid)
        sup_l2.append(stats["sup"] + stats["dl2"])
        dsup.append(stats["dsup"])
    slope = fit_rate([2.0**-m for m in ms], sup_l2).slope

    checks = {
        "pairing_bound_ratios_bounded": max(ratios) <= 1.0,
        "pairing_ratio_stable": max(ratios[3:]) <= ratios[0] + 1e-12,
        "density_l1_uniform": max(l1_norms) <= 2.0 * min(l1_norms),
        "phi_slope_ge_0.9": slope >= TOL["rate_slope"],
        # derivative sup-gap tends to half the jump (from below): no L-infinity convergence
        "dsup_stays_at_half_jump": min(dsup) >= 0.49 * jump,
    }
    return _verdict(
        "mollification",
        checks,
        t0,
        ratios=ratios,
        l1_norms=l1_norms,
        sup_plus_l2=sup_l2,
        dsup=dsup,
        half_jump=0.5 * jump,
        phi_slope=slope,
    )


def _phi_gap_stats(sol, glued, fm, grid, atom=0.45):
    xs_out = np.linspace(grid.a, grid.b, 2001)
    sup = float(np.abs(sol(xs_out) - glued(xs_out)).max())
    eps = fm.eps
    cuts = [grid.a, max(grid.a, atom - 3 * eps), min(grid.b, atom + 3 * eps), grid.b]
    acc = 0.0
    dsup = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        inside = lo >= atom - 3.5 * eps and hi <= atom + 3.5 * eps
        n_pan = 200 if inside else 40
        edges = np.linspace(lo, hi, n_pan + 1)
        for p_lo, p_hi in zip(edges[:-1], edges[1:]):
            xs, ws = gauss_legendre_nodes(p_lo, p_hi, 8)
            dgap = sol.deriv(xs) - glued.deriv(xs)
            acc = acc + np.einsum("k,kij->ij", ws, dgap**2)
            dsup = max(dsup, float(np.abs(dgap).max()))
    return {"sup": sup, "dl2": float(np.sqrt(acc).max()), "dsup": dsup}


# ---------------------------------------------------------------------------
# 7. measure -> vacuum pipeline
# ---------------------------------------------------------------------------

def criterion_pipeline() -> Verdict:
    t0 = time.time()
    chart = AngularGrid(8, 4)
    grid = Grid1D(0.0, 1.0, 257)
    ring = _flat_ring(chart)
    one, zero = _const_maps(chart)
    t1, _ = chart.mesh()
    strip = plateau((t1 - 3.6) / 0.5) * plateau((5.9 - t1) / 0.5)
    m_theta = (1.0 + 0.5 * np.cos(2.0 * np.pi * t1 / chart.L1)) * (1.0 - strip)

    def run(mass):
        dust = C.NullDustMeasure(atoms=[(0.45, mass)])
        data = C.ReducedCharData(
            grid, chart, ring, one, zero, lambda ub: ring.copy(),
            lambda ub: np.zeros(chart.shape + (2, 2)), dust=dust,
        )
        bv = C.solve_glued_shell(data, 1.0, 0.15)
        pipe = MP.MeasurePipeline(data, bv)
        pipe.freeze_k([1, 8])
        members = [pipe.member(m) for m in range(1, 9)]
        tf = bump_dictionary(grid, chart)[1]
        rows = MP.pipeline_weak_check(pipe, members, [tf])
        return pipe, members, rows

    _, members, rows = run(m_theta)
    gaps = [r["gap"] for r in rows]
    slope = fit_rate([2.0 ** -r["m"] for r in rows], gaps).slope

    # linearity of the limiting pairing in the atom mass
    _, _, rows2 = run(2.0 * m_theta)
    lim1 = rows[-1]["difference"]
    lim2 = rows2[-1]["difference"]
    linearity = abs(lim2 / lim1 - 2.0) / 2.0

    ub = np.linspace(grid.a, grid.b, 1001)
    min_phi = min(float(mem.phi_vac(ub).min()) for mem in members)
    det_worst = max(float(np.abs(mem.family.det_defect(ub)).max()) for mem in members)

    checks = {
        "weak_identity_slope": slope >= TOL["rate_slope"],
        "linearity_within_1pc": linearity <= 0.01,
        "uniform_lower_bound": min_phi > 0.0,
        "det_preserved": det_worst <= TOL["det_preservation"],
    }
    return _verdict(
        "measure_pipeline",
        checks,
        t0,
        gaps=gaps,
        slope=slope,
        linearity_deviation=linearity,
        min_phi=min_phi,
        n_of_m=[mem.n for mem in members],
    )


# ---------------------------------------------------------------------------
# 8. trapped-surface criterion and shell weak forms
# ---------------------------------------------------------------------------

def criterion_trapped() -> Verdict:
    t0 = time.time()
    chart = AngularGrid(16, 8)
    t1, t2 = chart.mesh()
    rng = np.random.default_rng(20260810)

    disagreements = 0
    for _ in range(1000):
        base = rng.uniform(0.05, 3.0)
        amp = rng.uniform(0.0, base)
        mass = base + amp * np.cos(t1 + rng.uniform(0, 2 * np.pi)) * np.cos(
            t2 + rng.uniform(0, 2 * np.pi)
        )
        mass = np.clip(mass, 0.0, None)
        u_star = rng.uniform(0.05, 0.95)
        shell = S.ShellSpacetime(chart, mass, u_star)
        _, overall, margin = S.is_trapped(shell)
        analytic = mass.min() > 2.0 * (1.0 - u_star)
        if overall != analytic:
            disagreements += 1

    # marginal case: exactly at threshold is not trapped
    u_star = 0.5
    marginal = S.ShellSpacetime(chart, np.full(chart.shape, 2.0 * (1.0 - u_star)), u_star)
    _, marginal_trapped, _ = S.is_trapped(marginal)

    mass = 1.0 + 0.5 * np.cos(t1)
    shell = S.ShellSpacetime(chart, mass, 0.4, ub0=0.2)
    phi = lambda u, ub: (1.0 + 0.3 * np.sin(t1)) * np.exp(-2.0 * (ub - 0.2) ** 2) * (1.0 + 0.1 * u)
    res_weak = abs(S.weak_trch_residual(shell, phi, 0.4, 0.05, 0.35))
    res_control = abs(S.weak_trch_residual(shell, phi, 0.4, 0.05, 0.35, include_measure=False))
    pairing = S.shell_pairing(shell, phi, 0.4)
    res_prop = abs(S.dust_propagation_residual(shell, phi, 0.1, 0.35))

    checks = {
        "criterion_matches_analytic_1000": disagreements == 0,
        "marginal_not_trapped": not marginal_trapped,
        "weak_residual": res_weak <= TOL["weak_residual"],
        "propagation_residual": res_prop <= TOL["weak_residual"],
        "negative_control": res_control >= 0.5 * pairing,
    }
    return _verdict(
        "trapped_surfaces",
        checks,
        t0,
        disagreements=disagreements,
        weak_residual=res_weak,
        propagation_residual=res_prop,
        control=res_control,
        pairing=pairing,
    )


# ---------------------------------------------------------------------------
# 9. directional frequency splitting
# ---------------------------------------------------------------------------

def criterion_compensated() -> Verdict:
    t0 = time.time()
    box = CC.PeriodicBox((256, 256))
    rng = np.random.default_rng(7)

    f = rng.standard_normal(box.shape)
    d = CC.decompose(f, box, 8.0, "x1")
    partition = CC.partition_defect(d, f)

    violations = 0
    min_radii = []
    for _ in range(100):
        d1, d2 = CC.random_masked_decompositions(box, 4.0, rng)
        ok, min_radius = CC.support_check(d1, d2)
        if not ok:
            violations += 1
        min_radii.append(min_radius)

    boxp = CC.PeriodicBox((1024, 1024))
    u, ub = boxp.mesh()
    psi = 1.0 + 0.5 * np.cos(u) * np.cos(ub)
    n_values = [4, 8, 16, 32, 64, 128, 256]
    res_t = CC.weak_product_test(CC.transverse_pair(boxp), psi, n_values)
    gap_final = res_t["gaps"][-1]

    pair_r = CC.resonant_pair(boxp)
    mean_sin_sq = boxp.integrate(pair_r.f(64) * pair_r.h(64)) / (2 * np.pi) ** 2
    sin_sq_err = abs(mean_sin_sq - 0.5)

    res_sw = CC.weak_product_test(CC.strong_weak_pair(boxp), psi, n_values)

    checks = {
        "partition_exact_1e-12": partition <= TOL["fft_identity"],
        "support_check_100_trials": violations == 0,
        "transverse_gap_at_256": gap_final <= TOL["pairing"],
        "sin_sq_half": sin_sq_err <= TOL["sin_sq_control"],
        "strong_weak_converges": res_sw["product_converges"],
        "resonant_defect_persists": not CC.weak_product_test(pair_r, psi, n_values)["product_converges"],
    }
    return _verdict(
        "compensated_compactness",
        checks,
        t0,
        partition_defect=partition,
        violations=violations,
        min_support_radius=float(np.min(min_radii)),
        transverse_final_gap=gap_final,
        sin_sq_error=sin_sq_err,
    )


# ---------------------------------------------------------------------------
# 10. characteristic transport pipeline
# ---------------------------------------------------------------------------

def _cone_data(chart, grid):
    t1, _ = chart.mesh()
    # conformally flat reference whose curvature is exactly 1 on the grid
    # fiber theta1 = L1/2: K = (a omega^2 / 2) e^{...} there with a = 2/omega^2
    om = 2.0 * np.pi / chart.L1
    a = 2.0 / om**2
    c = 2.0 * a
    gfun = c + a * np.cos(om * t1)
    ring = np.zeros(chart.shape + (2, 2))
    ring[..., 0, 0] = 1.0 / gfun
    ring[..., 1, 1] = 1.0 / gfun
    one, zero = _const_maps(chart)
    return C.ReducedCharData(
        grid, chart, ring, one, zero, lambda ub: ring.copy(),
        lambda ub: np.zeros(chart.shape + (2, 2)),
    )


def criterion_char_pipeline() -> Verdict:
    t0 = time.time()
    chart = AngularGrid(64, 4)
    grid = Grid1D(0.0, 0.5, 513)
    data = _cone_data(chart, grid)
    sol = C.solve_vacuum_constraint(data, 1.0, 1.0)  # Phi = 1 + ub
    corner = P.CornerData.zeros(chart)
    result = P.solve_transport_system(data, sol, corner)

    i_fiber = chart.n1 // 2
    ub = grid.points()
    trchb_err = float(np.abs(result.trchb[:, i_fiber, :] + 2.0 / (1.0 + ub)[:, None]).max())
    trchi_err = 0.0
    for i in (0, grid.n // 2, grid.n - 1):
        sl = result.slices[i]
        trchi_err = max(trchi_err, float(np.abs(sl.trchi - 2.0 / (1.0 + ub[i])).max()))
    gap = P.constraint_reconstruction_gap(result)

    orders = {}
    sizes = [65, 97, 129, 193]
    tables = {}
    for n in sizes:
        sub = Grid1D(0.0, 0.5, n)
        d2 = _cone_data(AngularGrid(32, 4), sub)
        s2 = C.solve_vacuum_constraint(d2, 1.0, 1.0)
        r2 = P.solve_transport_system(d2, s2, P.CornerData.zeros(AngularGrid(32, 4)))
        res = P.structure_residuals(r2)
        for key, val in res.items():
            tables.setdefault(key, []).append(val)
    hs = [0.5 / (n - 1) for n in sizes]
    floor = 1e-12
    for key, vals in tables.items():
        if max(vals) <= floor:  # identically satisfied: no order to fit
            orders[key] = np.inf
        else:
            orders[key] = fit_rate(hs, np.maximum(vals, floor)).slope

    fitted = [v for v in orders.values() if np.isfinite(v)]
    checks = {
        "cone_trchi_1e-8": trchi_err <= TOL["cone_reproduction"],
        "cone_trchb_1e-8": trchb_err <= TOL["cone_reproduction"],
        "residual_order_ge_3": all(v >= 3.0 for v in fitted),
        "constraint_reconstruction_1e-12": gap <= 1e-12,
    }
    return _verdict(
        "characteristic_pipeline",
        checks,
        t0,
        trchi_error=trchi_err,
        trchb_error=trchb_err,
        residual_orders={k: (None if not np.isfinite(v) else v) for k, v in orders.items()},
        residual_tables=tables,
        reconstruction_gap=gap,
    )


ALL_CRITERIA = [
    criterion_burnett,
    criterion_shell_limit,
    criterion_gowdy,
    criterion_constraints,
    criterion_absorber,
    criterion_mollification,
    criterion_pipeline,
    criterion_trapped,
    criterion_compensated,
    criterion_char_pipeline,
]


def run_all(printer=None) -> list:
    out = []
    for fn in ALL_CRITERIA:
        v = fn()
        out.append(v)
        if printer:
            printer(f"[{'PASS' if v.passed else 'FAIL'}] {v.name} ({v.seconds:.1f}s)")
    return out
