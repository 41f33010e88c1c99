"""End-to-end acceptance criteria.  Each test prints one ``ACCEPTANCE k PASS/FAIL`` line."""

import time

import numpy as np
import pytest

from vortexfloquet.bifurcation import counterexample_suite
from vortexfloquet.checks import derivative_checks, dynamics_checks, spectrum_checks, whole_plane_checks
from vortexfloquet.continuation import multiplier_curve, reduced_expansion_report, trace_curve
from vortexfloquet.core import ScaledHamiltonian
from vortexfloquet.domains import SyntheticQuadratic, UnitDisc, WholePlane
from vortexfloquet.dynamics import variational_flow
from vortexfloquet.equilibria import (make_equilateral_triangle, make_gamma_zero_rotor, make_rhombus,
                                      make_vortex_pair, predicted_multipliers)
from vortexfloquet.floquet import (equilibrium_monodromy, equilibrium_spectrum, expansion_report,
                                   pair_closed_form_monodromy, trivial_basis, trivial_images)


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {k:2d} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def _max_match(ev, targets):
    return max(float(np.min(np.abs(ev - t))) for t in targets)


def test_01_pair_monodromy(report):
    t0 = time.perf_counter()
    eq = make_vortex_pair(1.0, 1.0)
    X = equilibrium_monodromy(eq)
    W = trivial_basis(eq)
    err_basis = float(np.max(np.abs(X @ W - trivial_images(eq, eq.period))))
    err_full = float(np.max(np.abs(X - pair_closed_form_monodromy(eq))))
    elapsed = time.perf_counter() - t0
    ok = err_basis < 1e-8 and err_full < 1e-8 and elapsed < 1.0
    report(1, ok, f"pair X_0(2pi) on trivial basis err {err_basis:.2e}, full err {err_full:.2e}, {elapsed:.2f}s")


def test_02_triangle_multipliers(report):
    spec = equilibrium_spectrum(make_equilateral_triangle(1, 2, 3))
    target = np.exp(np.array([1j, -1j]) * np.pi * np.sqrt(11 / 3))
    err = _max_match(spec.eigenvalues, target)
    bad = equilibrium_spectrum(make_equilateral_triangle(1, 1, -0.6))
    off = [z for z in bad.eigenvalues if abs(z.imag) < 1e-8 and abs(abs(z) - 1) > 1e-3]
    ok = err < 1e-6 and len(off) == 2 and bad.has("spectrally_unstable")
    report(2, ok, f"(1,2,3) err {err:.2e}; (1,1,-0.6) real pair off circle {np.round(np.real(off), 6).tolist()}, "
                  f"labels {sorted(bad.labels)}")


def test_03_rhombus_multipliers(report):
    eq = make_rhombus(1.1)
    spec = equilibrium_spectrum(eq)
    pred = predicted_multipliers(eq)
    err = _max_match(spec.eigenvalues, pred)
    err_rev = _max_match(spec.nontrivial(4), pred)
    unit = equilibrium_spectrum(make_rhombus(1.0)).unit_multiplicity
    ok = err < 1e-6 and err_rev < 1e-6 and unit >= 6
    report(3, ok, f"y=1.1 closed-form err {err:.2e}; y=1 unit cluster {unit}")


def test_04_degeneracy_detection(report):
    counts = {}
    for name, eq in (("L=0 triangle", make_equilateral_triangle(1, 1, -0.5)), ("Gamma=0 rotor", make_gamma_zero_rotor())):
        counts[name] = equilibrium_spectrum(eq, degeneracy_tol=1e-4).extra["unit_multiplicity_deflated"]
    report(4, all(c >= 6 for c in counts.values()), f"unit multiplicity at tol 1e-4: {counts}")


def test_05_extremum_case(report, disc_family, pair):
    curve = multiplier_curve(UnitDisc(), pair, disc_family.r_grid, family=disc_family)
    im = curve.smallest_r_ratio.imag
    stable = all("L_stable" in lab for lab in curve.labels)
    ok = abs(im - 4) / 4 < 0.05 and stable and 1.8 <= curve.exponent <= 2.2
    report(5, ok, f"Im(lambda+)/r^2 = {im:.5f} at r={curve.r.min()}, all L_stable={stable}, p={curve.exponent:.4f}")


def test_06_saddle_case(report, saddle_family, pair):
    curve = multiplier_curve(SyntheticQuadratic(), pair, saddle_family.r_grid, family=saddle_family)
    ratio = curve.smallest_r_ratio
    rel = abs(ratio - 8 * np.pi) / (8 * np.pi)
    unstable = all("spectrally_unstable" in lab for lab in curve.labels)
    report(6, rel < 0.05 and unstable,
           f"(lambda+ - 1)/r^2 = {ratio.real:.4f}{ratio.imag:+.1e}i vs 8pi, rel dev {rel:.4f}, all unstable={unstable}")


def test_07_trace_formula(report, disc_family, pair):
    tc = trace_curve(UnitDisc(), pair, disc_family.r_grid, family=disc_family)
    rel = abs(tc.fitted - 16.0) / 16.0
    report(7, rel < 0.1 and 3.7 <= tc.exponent <= 4.3,
           f"c^2 fitted {tc.fitted:.4f} (target 16, rel {rel:.4f}), exponent {tc.exponent:.4f}")


def _expansion_ok(rep):
    dev = rep.deviations
    order = np.argsort(rep.r)
    tail = dev[order[:3]][::-1]  # three smallest r, from largest to smallest
    mono = bool(np.all(np.diff(tail, axis=0) < 0))
    small = bool(np.all(rep.relative[order[0]] < 0.05))
    return mono and small, rep.relative[order[0]]


def test_08_translation_expansion(report, disc_family, saddle_family):
    details, ok = [], True
    for name, dom, fam in (("disc", UnitDisc(), disc_family), ("saddle", SyntheticQuadratic(), saddle_family)):
        full = expansion_report(fam.r, [p.monodromy for p in fam.points], fam.equilibrium.vorticities, dom)
        red = reduced_expansion_report(dom, fam)
        for route, rep in (("full", full), ("reduced", red)):
            good, rel = _expansion_ok(rep)
            ok &= good
            details.append(f"{name}/{route} rel {np.round(rel, 4).tolist()}")
    report(8, ok, "; ".join(details))


def test_09_bifurcation_suite(report):
    rep = counterexample_suite()
    failed = [i.name for i in rep.items if not i.passed]
    report(9, rep.passed, f"{len(rep.items)} items, failed: {failed or 'none'}")


def test_10_property_suites(report):
    checks = derivative_checks() + whole_plane_checks() + dynamics_checks() + spectrum_checks()
    tri = make_equilateral_triangle(1, 2, 3).normalized()
    var = variational_flow(ScaledHamiltonian(WholePlane(), tri.vorticities, 0.0), tri.z0, 2 * np.pi)
    failed = [c.name for c in checks if not c.passed]
    ok = not failed and var.symplectic_defect < 1e-8
    report(10, ok, f"{len(checks) + 1} checks, triangle symplectic defect {var.symplectic_defect:.1e}, "
                   f"failed: {failed or 'none'}")
