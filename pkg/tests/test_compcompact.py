"""Directional frequency splitting and weak product limits."""

import numpy as np
import pytest

from nulldust import compcompact as CC


@pytest.fixture
def box():
    return CC.PeriodicBox((128, 128))


def test_cutoff_plateau_properties():
    t = np.linspace(-3, 3, 601)
    chi = CC.cutoff_chi(t)
    assert np.all(chi[np.abs(t) <= 1.0] == 1.0)
    assert np.all(chi[np.abs(t) >= 2.0] == 0.0)
    assert np.all((chi >= 0) & (chi <= 1))


def test_partition_exact(box):
    rng = np.random.default_rng(1)
    f = rng.standard_normal(box.shape)
    for mode in ("x1", "x2"):
        d = CC.decompose(f, box, 6.0, mode)
        assert CC.partition_defect(d, f) < 1e-12


def test_constant_goes_low(box):
    d = CC.decompose(np.full(box.shape, 2.5), box, 4.0, "x1")
    assert np.abs(d.low - 2.5).max() < 1e-13
    assert np.abs(d.h1).max() + np.abs(d.h2).max() < 1e-13


def test_single_fast_mode_lands_in_dominant_part(box):
    u, ub = box.mesh()
    g = np.sin(40 * ub)  # pure x2 frequency far above the threshold
    d = CC.decompose(g, box, 2.0, "x1")
    assert np.abs(d.h2 - g).max() < 1e-12
    assert np.abs(d.h1).max() < 1e-13
    d2 = CC.decompose(np.sin(40 * u), box, 2.0, "x2")
    assert np.abs(d2.h1 - np.sin(40 * u)).max() < 1e-12


def test_parseval_and_reconstruction(box):
    rng = np.random.default_rng(3)
    f = rng.standard_normal(box.shape)
    spec = np.fft.fftn(f)
    assert abs(np.sum(f * f) - np.sum(np.abs(spec) ** 2) / f.size) < 1e-9 * np.sum(f * f)
    d = CC.decompose(f, box, 4.0, "x1")
    assert np.abs(f - (d.low + d.h1 + d.h2)).max() < 1e-12


def test_strict_mask_supports_disjoint(box):
    _, pass1, _ = CC._masks(box, 3.0, "x1")
    _, pass2, _ = CC._masks(box, 3.0, "x2")
    assert np.abs(pass1 * pass2).max() == 0.0


def test_threshold_below_nyquist_enforced(box):
    with pytest.raises(ValueError, match="Nyquist"):
        CC.decompose(np.zeros(box.shape), box, 20.0, "x1")
    with pytest.raises(ValueError):
        CC.decompose(np.zeros(box.shape), box, 0.5, "x1")


def test_support_check_explicit_masses():
    box = CC.PeriodicBox((256, 256))
    c1 = 2.0
    kx = int(60 * c1)
    spec1 = np.zeros(box.shape, complex)
    spec2 = np.zeros(box.shape, complex)
    spec1[kx, 1] = spec1[-kx, -1] = 1.0
    spec2[1, kx] = spec2[-1, -kx] = 1.0
    f1 = np.fft.ifftn(spec1).real * box.shape[0] ** 2
    f2 = np.fft.ifftn(spec2).real * box.shape[0] ** 2
    d1 = CC.decompose(f1, box, c1, "x1")
    d2 = CC.decompose(f2, box, c1, "x2")
    ok, min_radius = CC.support_check(d1, d2)
    assert ok and min_radius >= c1


def test_support_check_zero_product_trivially_true(box):
    d1 = CC.decompose(np.zeros(box.shape), box, 4.0, "x1")
    d2 = CC.decompose(np.zeros(box.shape), box, 4.0, "x2")
    ok, min_radius = CC.support_check(d1, d2)
    assert ok and np.isinf(min_radius)


def test_support_check_requires_mode_pair(box):
    d1 = CC.decompose(np.ones(box.shape), box, 4.0, "x1")
    with pytest.raises(ValueError):
        CC.support_check(d1, d1)


def test_randomized_support_property(box):
    rng = np.random.default_rng(42)
    for _ in range(25):
        d1, d2 = CC.random_masked_decompositions(box, 4.0, rng)
        ok, _ = CC.support_check(d1, d2)
        assert ok


def test_margin_invariant_under_common_translation():
    # a common phase on both spectra is a common translation in real space
    box = CC.PeriodicBox((128, 128))
    rng = np.random.default_rng(8)
    d1, d2 = CC.random_masked_decompositions(box, 4.0, rng)
    _, m0 = CC.support_check(d1, d2)
    shift = (5, 11)
    d1s = CC.FrequencyDecomposition(box, 4.0, "x1", np.roll(d1.low, shift, (0, 1)),
                                    np.roll(d1.h1, shift, (0, 1)), np.roll(d1.h2, shift, (0, 1)), d1.masks)
    d2s = CC.FrequencyDecomposition(box, 4.0, "x2", np.roll(d2.low, shift, (0, 1)),
                                    np.roll(d2.h1, shift, (0, 1)), np.roll(d2.h2, shift, (0, 1)), d2.masks)
    _, m1 = CC.support_check(d1s, d2s)
    assert abs(m0 - m1) < 1e-12


def test_4d_partition_and_support():
    box = CC.PeriodicBox((16, 16, 8, 8))
    rng = np.random.default_rng(5)
    f = rng.standard_normal(box.shape)
    d = CC.decompose(f, box, 2.0, "x1")
    assert CC.partition_defect(d, f) < 1e-12
    d1, d2 = CC.random_masked_decompositions(box, 2.0, rng)
    ok, _ = CC.support_check(d1, d2)
    assert ok


def test_weak_product_transverse_and_controls():
    box = CC.PeriodicBox((512, 512))
    u, ub = box.mesh()
    psi = 1.0 + 0.5 * np.cos(u) * np.cos(ub)
    ns = [4, 8, 16, 32, 64]
    res = CC.weak_product_test(CC.transverse_pair(box), psi, ns)
    assert res["product_converges"]
    res_r = CC.weak_product_test(CC.resonant_pair(box), psi, ns)
    assert not res_r["product_converges"]
    assert res_r["expects_defect"]
    res_sw = CC.weak_product_test(CC.strong_weak_pair(box), psi, ns)
    assert res_sw["product_converges"]
    assert abs(res_sw["target"] - box.integrate(CC.strong_weak_pair(box).f_inf
                                                * CC.strong_weak_pair(box).h_inf * psi)) < 1e-12


def test_sin_squared_mean():
    box = CC.PeriodicBox((512, 512))
    pair = CC.resonant_pair(box)
    mean = box.integrate(pair.f(37) * pair.h(37)) / (2 * np.pi) ** 2
    assert abs(mean - 0.5) < 1e-6


def test_declared_bounds_spot_check():
    box = CC.PeriodicBox((256, 256))
    bounds = CC.transverse_pair(box).spot_check_bounds()
    assert bounds["f"] < 10.0  # uniform along the declared regular axis
    assert bounds["h"] < 10.0
