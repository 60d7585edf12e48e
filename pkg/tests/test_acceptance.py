"""Acceptance gate: every headline criterion at its stated tolerance.

Each test prints one PASS/FAIL line; the detailed numbers live in the
verdict objects (and in runs/verify-all/summary.json via the CLI).
"""

from nulldust import acceptance as A


def _report(v):
    print(f"[{'PASS' if v.passed else 'FAIL'}] {v.name} ({v.seconds:.1f}s)")
    if not v.passed:
        print("  checks:", v.details["checks"])


def test_criterion_1_oscillation_limit():
    v = A.criterion_burnett()
    _report(v)
    assert v.passed, v.details["checks"]
    assert min(v.details["pairing_slopes"]) >= 0.9
    assert v.details["ricci_error"] <= 1e-6


def test_criterion_2_concentration_limit():
    v = A.criterion_shell_limit()
    _report(v)
    assert v.passed, v.details["checks"]
    assert v.details["jump_error"] <= 1e-3
    assert max(v.details["pairing_errors"]) <= 1e-3


def test_criterion_3_bessel_family():
    v = A.criterion_gowdy()
    _report(v)
    assert v.passed, v.details["checks"]
    assert v.details["observed_order"] >= 3.5
    e = v.details["einstein"]
    assert abs(e["G_tautau"] - e["target_tautau"]) <= 1e-5
    assert abs(e["G_thetatheta"] - e["target_thetatheta"]) <= 1e-5


def test_criterion_4_constraint_solver():
    v = A.criterion_constraints()
    _report(v)
    assert v.passed, v.details["checks"]
    assert v.details["rk4_order"] >= 3.9
    assert v.details["drift"] <= 1e-8
    assert v.details["max_weak_residual"] <= 1e-6


def test_criterion_5_oscillation_absorber():
    v = A.criterion_absorber()
    _report(v)
    assert v.passed, v.details["checks"]
    s = v.details["slopes"]
    assert min(s["gamma"], s["phi"], s["defect"]) >= 0.9
    assert s["control"] <= 0.2
    assert v.details["det_worst"] <= 1e-12


def test_criterion_6_mollification():
    v = A.criterion_mollification()
    _report(v)
    assert v.passed, v.details["checks"]
    assert v.details["phi_slope"] >= 0.9
    assert min(v.details["dsup"]) >= 0.98 * v.details["half_jump"]


def test_criterion_7_measure_pipeline():
    v = A.criterion_pipeline()
    _report(v)
    assert v.passed, v.details["checks"]
    assert v.details["slope"] >= 0.9
    assert v.details["linearity_deviation"] <= 0.01


def test_criterion_8_trapped_surfaces():
    v = A.criterion_trapped()
    _report(v)
    assert v.passed, v.details["checks"]
    assert v.details["disagreements"] == 0
    assert v.details["weak_residual"] <= 1e-6
    assert v.details["control"] >= 0.5 * v.details["pairing"]


def test_criterion_9_frequency_splitting():
    v = A.criterion_compensated()
    _report(v)
    assert v.passed, v.details["checks"]
    assert v.details["partition_defect"] <= 1e-12
    assert v.details["violations"] == 0
    assert v.details["transverse_final_gap"] <= 1e-3
    assert v.details["sin_sq_error"] <= 1e-6


def test_criterion_10_characteristic_pipeline():
    v = A.criterion_char_pipeline()
    _report(v)
    assert v.passed, v.details["checks"]
    assert v.details["trchi_error"] <= 1e-8
    assert v.details["trchb_error"] <= 1e-8
    assert v.details["reconstruction_gap"] <= 1e-12
