import math

import numpy as np
import pytest

from twowell.microstructure import (
    assemble_branched,
    best_construction,
    branching_schedule,
    k1_boundary_cell,
    k1_cell,
    k2_boundary_cell,
    k2_cell,
    laminate,
    quintic_gamma,
    sawtooth,
    vertical_branched_k1,
)
from twowell.piecewise import Rect, coverage_check
from twowell.wells import CASE_K1, CASE_K2, WellSpec, dist_to_wells


def test_sawtooth_identities():
    assert float(sawtooth(1.0, 0.0)) == 0.0
    assert float(sawtooth(1.0, 0.25)) == 0.25
    assert float(sawtooth(1.0, 0.5)) == 0.0
    ts = np.linspace(-3.0, 3.0, 601)
    for h in (0.5, 1.0, 2.0):
        z = sawtooth(h, ts)
        assert np.all(np.abs(z) <= h / 4.0 + 1e-15)
        np.testing.assert_allclose(sawtooth(h, ts + h), z, atol=1e-12)
        # |slope| = 1 away from the kinks
        step = 1e-7
        sl = (sawtooth(h, ts + step) - sawtooth(h, ts - step)) / (2.0 * step)
        kink = np.minimum(np.abs(z - h / 4.0), np.abs(z + h / 4.0)) < 2 * step
        assert np.allclose(np.abs(sl[~kink]), 1.0, atol=1e-6)


def test_quintic_gamma_values():
    g, d1, d2 = quintic_gamma(np.array([0.0, 1.0, 0.5]))
    np.testing.assert_allclose(g, [0.0, 1.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(d1[:2], 0.0, atol=1e-15)
    np.testing.assert_allclose(d2[:2], 0.0, atol=1e-15)


def test_cell_preconditions():
    with pytest.raises(ValueError):
        k2_cell((0.0, 0.0), 0.5, 0.6, 0.1)  # h > ell
    with pytest.raises(ValueError):
        k1_boundary_cell((0.0, 0.0), 1.0, 2.0, 0.1)


def test_k1_cell_exact_wells_and_trace():
    a = 0.25
    d = k1_cell((0.0, 0.0), 1.0, 0.25, a)
    B1 = np.array([[1.0, a], [0.0, 1.0]])
    for p in ([0.4, 0.005], [0.5, 0.124], [0.6, 0.245]):
        _, du = d.evaluate(np.array(p))
        np.testing.assert_array_equal(du, B1)
    ys = np.linspace(0.0, 0.25, 65)
    u, _ = d.evaluate(np.column_stack([np.ones_like(ys), ys]))
    expect = np.column_stack([1.0 + a * sawtooth(0.25, ys), ys])
    assert np.abs(u - expect).max() < 1e-14


def test_k1_boundary_cell_well_regions():
    a = 0.25
    h = 0.25
    d = k1_boundary_cell((0.0, 0.0), 1.0, h, a)
    A1 = np.array([[1.0, -a], [0.0, 1.0]])
    B1 = np.array([[1.0, a], [0.0, 1.0]])
    spec = WellSpec(CASE_K1, a)
    # deep in B', A and B'' the gradient sits exactly in a well
    _, du = d.evaluate(np.array([0.9, 0.01]))
    np.testing.assert_array_equal(du, B1)
    _, du = d.evaluate(np.array([0.9, h / 2.0]))
    np.testing.assert_array_equal(du, A1)
    _, du = d.evaluate(np.array([0.9, h - 0.01]))
    np.testing.assert_array_equal(du, B1)
    assert dist_to_wells(du, spec).distance == pytest.approx(0.0, abs=1e-12)


def test_all_cells_pass_coverage():
    for d in (k2_cell((0.0, 0.0), 1.0, 0.25, 0.3),
              k2_boundary_cell((0.0, 0.0), 1.0, 0.25, 0.3),
              k1_cell((0.0, 0.0), 1.0, 0.25, 0.3),
              k1_cell((0.0, 0.0), 1.0, 0.25, 0.3, gamma_kind="linear"),
              k1_boundary_cell((0.0, 0.0), 1.0, 0.25, 0.3)):
        rep = coverage_check(d, boundary_tol=None)
        assert rep.ok
        assert rep.continuity_max < 1e-12


def test_gradient_deviation_from_identity_bounded():
    # every construction stays within c alpha of the identity gradient
    rng = np.random.default_rng(31)
    for a in (0.1, 0.3):
        worst = 0.0
        for d in (k2_cell((0.0, 0.0), 1.0, 0.25, a),
                  k2_boundary_cell((0.0, 0.0), 1.0, 0.25, a),
                  k1_cell((0.0, 0.0), 1.0, 0.25, a),
                  k1_boundary_cell((0.0, 0.0), 1.0, 0.25, a)):
            pts = np.column_stack([rng.uniform(0, 1, 500), rng.uniform(0, 0.25, 500)])
            _, du = d.evaluate(pts)
            dev = np.linalg.norm(du - np.eye(2), axis=(1, 2)).max()
            worst = max(worst, dev / a)
        assert worst <= 2.0


def test_laminate_requires_alignment():
    with pytest.raises(ValueError):
        laminate(Rect(0.0, 0.0, 1.0, 1.0), 0.3, 0.1, CASE_K2)


def test_schedule_frozen_examples():
    s = branching_schedule(CASE_K2, 0.1, 1e-6, 1.0, 1.0)
    assert s.N == 14  # ceil(10 + 4)
    assert s.theta == pytest.approx(2.0 ** -1.25)
    s1 = branching_schedule(CASE_K1, 0.1, 1e-6, 1.0, 1.0)
    assert s1.N == math.ceil(0.1 ** (1 / 3) * 1e2 + 4.0) == 51
    assert s1.theta == pytest.approx(1.0 / 3.0)


def test_schedule_invariants():
    for case, a, eps, L, H in ((CASE_K2, 0.1, 1e-6, 1.0, 1.0),
                               (CASE_K1, 0.2, 1e-5, 2.0, 0.5),
                               (CASE_K2, 0.05, 1e-7, 0.5, 2.0)):
        s = branching_schedule(case, a, eps, L, H)
        assert len(s.x) == len(s.h) == len(s.ell) == s.tau + 1
        assert s.H / s.N <= (1.0 - s.theta) * s.L / 2.0 + 1e-12
        for i in range(s.tau + 1):
            assert s.h[i] <= s.ell[i] + 1e-15
        if s.tau >= 1:
            assert s.h[s.tau] <= s.ell[s.tau] <= 2.0 * s.h[s.tau] + 1e-15
        # the next refinement would violate h <= ell
        h_next = s.H / (2 ** (s.tau + 1) * s.N)
        ell_next = s.theta ** (s.tau + 1) * (1 - s.theta) * s.L / 2.0
        assert h_next > ell_next


def test_degenerate_schedule_assembles_boundary_layer_only():
    s = branching_schedule(CASE_K2, 0.1, 1e-6, 1.0, 1.0, N=3)
    assert s.degenerate and s.tau == -1
    d = assemble_branched(WellSpec(CASE_K2, 0.1), s, Rect(0.0, 0.0, 1.0, 1.0))
    assert d.meta["degenerate_schedule"]
    rep = coverage_check(d)
    assert rep.ok


def test_assembly_boundary_trace_and_stripe_lines():
    for case in (CASE_K2, CASE_K1):
        spec = WellSpec(case, 0.1)
        s = branching_schedule(case, 0.1, 1e-4, 1.0, 1.0)
        d = assemble_branched(spec, s, Rect(0.0, 0.0, 1.0, 1.0))
        rep = coverage_check(d)
        assert rep.ok
        assert rep.boundary_max < 1e-12
        ys = np.linspace(0.0, 1.0, 257)
        for i in (0, s.tau):
            pts = np.column_stack([np.full_like(ys, s.x[i]), ys])
            u, _ = d.evaluate(pts)
            saw = 0.1 * sawtooth(s.h[i], ys)
            expect = (np.column_stack([pts[:, 0], ys + saw]) if case == CASE_K2
                      else np.column_stack([pts[:, 0] + saw, ys]))
            assert np.abs(u - expect).max() < 1e-13


def test_assembly_cell_count_formula():
    s = branching_schedule(CASE_K2, 0.1, 1e-5, 1.0, 1.0)
    d = assemble_branched(WellSpec(CASE_K2, 0.1), s, Rect(0.0, 0.0, 1.0, 1.0))
    expect = 2 * (sum(s.N * 2 ** i for i in range(s.tau)) + s.N * 2 ** s.tau)
    assert d.meta["lemma_cells"] == expect
    # every lemma cell contributes five analytic pieces
    assert d.cell_count() == 5 * expect


def test_vertical_construction_orientation_and_preference():
    spec = WellSpec(CASE_K1, 0.1)
    dom = Rect(0.0, 0.0, 0.05, 1.0)
    dv = vertical_branched_k1(spec, 1e-6, dom)
    assert dv.domain == dom
    rep = coverage_check(dv)
    assert rep.ok and rep.boundary_max < 1e-12
    with pytest.raises(ValueError):
        vertical_branched_k1(WellSpec(CASE_K2, 0.1), 1e-6, dom)


def test_best_construction_selection():
    spec2 = WellSpec(CASE_K2, 0.1)
    _, _, label = best_construction(spec2, 0.5, 1.0, 1.0)
    assert label == "identity"
    spec1 = WellSpec(CASE_K1, 0.1)
    _, _, label = best_construction(spec1, 1e-6, 1.0, 1.0)
    assert label == "branched-horizontal"
    _, _, label = best_construction(spec1, 1e-6, 0.05, 1.0)
    assert label == "branched-vertical"
