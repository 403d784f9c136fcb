"""Acceptance suite: one test per headline criterion, tolerances pinned.

Each test prints a single PASS line (visible with -s) and enforces its
runtime budget.
"""

import math
import time

import numpy as np
import pytest

import thermoform as tf
from thermoform import sequences as sq

LOG2 = math.log(2.0)
LOG3 = math.log(3.0)
LOG4 = math.log(4.0)


class Budget:
    def __init__(self, name, seconds):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, *rest):
        elapsed = time.monotonic() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, (
                f"{self.name} exceeded its {self.seconds}s budget ({elapsed:.1f}s)")
            print(f"[acceptance] {self.name}: PASS ({elapsed:.2f}s)")
        return False


def geometric_model(c, grid=False):
    s = lambda n: -c * np.asarray(n, dtype=float)
    env = tf.TailEnvelope(-c, 0.0, 0.0, 0.0, 1)
    if grid:
        return tf.RenewalModel(s, env, LOG2, -LOG2, LOG2, 0.0, "grid-geom")
    return tf.RenewalModel(s, env, 0.0, 0.0, 0.0, 0.0, "geom")


def test_criterion_01_rpf_exactness():
    with Budget("criterion 1 (RPF exactness)", 1.0):
        shift = tf.full_shift(2)
        zero = tf.LocallyConstantPotential.constant(shift, 0.0)
        sol = tf.solve_rpf(tf.build_transfer_matrix(shift, zero))
        assert abs(sol.pressure - LOG2) <= 1e-12
        for p in (0.3, 0.5, 0.9):
            pot = tf.LocallyConstantPotential.from_symbol_values(
                shift, [math.log(p), math.log(1 - p)])
            s = tf.solve_rpf(tf.build_transfer_matrix(shift, pot))
            assert abs(s.pressure) <= 1e-10
            for word in [(0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1),
                         (0, 1, 0), (1, 1, 1)]:
                expected = math.prod(p if sym == 0 else 1 - p for sym in word)
                assert abs(tf.cylinder_weight(s, word) - expected) <= 1e-10


def test_criterion_02_nonmixing_component_rule():
    with Budget("criterion 2 (non-mixing decomposition)", 1.0):
        both = tf.disjoint_union(tf.full_shift(2), tf.full_shift(2))
        psi = tf.LocallyConstantPotential.from_symbol_values(both, [-1, -1, -2, -2])
        ts = np.linspace(-2.0, 2.0, 11)
        for t in ts:
            dec = tf.decompose_components(both, psi, t=float(t))
            expected = max(-t, -2 * t) + LOG2
            assert abs(dec.pressure - expected) <= 1e-10
            assert len(dec.maximizers) == (2 if t == 0.0 else 1)


def test_criterion_03_geometric_renewal_oracles():
    with Budget("criterion 3 (closed-form renewal oracles)", 5.0):
        c = 1.0
        plain = geometric_model(c)
        grid = geometric_model(c, grid=True)
        for t in np.linspace(-1.0, 3.0, 101):
            p1 = tf.solve_pressure(plain, float(t)).pressure
            assert abs(p1 - max(0.0, LOG2 - t * c)) <= 1e-9
            p2 = tf.solve_pressure(grid, float(t)).pressure
            assert abs(p2 - max(LOG2, LOG3 - t * c)) <= 1e-9
        flat_plain = tf.locate_flat_interval(plain, (0.05, 3.0), tol=1e-7)
        assert abs(flat_plain.t_start - LOG2 / c) <= 1e-6
        flat_grid = tf.locate_flat_interval(grid, (0.05, 3.0), tol=1e-7)
        assert abs(flat_grid.t_start - (LOG3 - LOG2) / c) <= 1e-6


def hofbauer_rows():
    head = [-LOG2]
    return [
        ("sum>1 summable", sq.RealizedSequence((-0.2,) * 3, None, 3),
         tf.POSITIVE_RECURRENT),
        ("sum>1 divergent", sq.normalize(sq.build_tail(1.2, 1), 1.7),
         tf.POSITIVE_RECURRENT),
        ("sum=1 finite mean", sq.normalize(sq.build_tail(3.0, 1).with_head(head), 1.0),
         tf.POSITIVE_RECURRENT),
        ("sum=1 infinite mean", sq.normalize(sq.build_tail(1.5, 1).with_head(head), 1.0),
         tf.NULL_RECURRENT),
        ("sum<1", sq.with_leading_shift(
            sq.normalize(sq.build_tail(3.0, 1).with_head(head), 1.0), -LOG2),
         tf.TRANSIENT),
    ]


def test_criterion_04_figure_rows():
    with Budget("criterion 4 (first-return table rows)", 10.0):
        for name, seq, expected in hofbauer_rows():
            model = sq.realize_model(seq, sq.HOFBAUER)
            cls = tf.classify(model, 1.0)
            assert cls.kind == expected, name
            total = tf.certified_G(model, 1.0, 0.0)  # sum e^{s_n} enclosure
            assert total.width <= 1e-9 or total.divergent
            if expected == tf.TRANSIENT:
                assert total.upper < 1.0
            elif name.startswith("sum=1"):
                assert total.contains(1.0)
                # row split by finiteness of sum (n+1) e^{s_n}
                h = tf.certified_series(model, 1.0, 0.0, n_weight=1)
                if expected == tf.POSITIVE_RECURRENT:
                    assert not h.divergent
                else:
                    assert h.divergent
            else:
                assert total.divergent or total.lower > 1.0


def dfu_model(gamma, delta=0.2):
    return sq.realize_model(sq.dfu_perturb(
        sq.normalize(sq.build_tail(gamma, 1), 2.0), delta), sq.GRID)


def test_criterion_05_main_grid_cases():
    with Budget("criterion 5 (grid DFU cases)", 60.0):
        m3 = dfu_model(3.0)
        flat = tf.locate_flat_interval(m3, (0.3, 6.0), tol=1e-8)
        assert flat is not None
        assert abs(flat.t_start - 1.0) <= 1e-6
        assert flat.t_end > 1.0 + 1e-3 and not flat.unbounded
        d = tf.pressure_derivative(m3, 1.0 - 1e-3)
        assert d.value <= -0.01
        t1 = flat.t_end
        expected = [tf.POSITIVE_RECURRENT, tf.TRANSIENT, tf.POSITIVE_RECURRENT]
        for t, kind in zip([0.5, 0.5 * (1 + t1), t1 + 0.5], expected):
            assert tf.classify(m3, float(t)).kind == kind
        v3_start = tf.smoothness_at_transition(m3, flat.t_start)
        v3_end = tf.smoothness_at_transition(m3, flat.t_end)
        assert v3_start.kind == tf.FIRST_ORDER
        assert v3_end.kind == v3_start.kind  # endpoint verdicts agree

        m15 = dfu_model(1.5)
        assert tf.classify(m15, 1.0).kind == tf.NULL_RECURRENT
        mags = []
        for h in (1e-1, 1e-2, 1e-3, 1e-4):
            mags.append(abs(tf.pressure_derivative(m15, 1.0 - h).value))
        assert all(a > b for a, b in zip(mags, mags[1:]))
        assert mags[-1] < 5e-3  # heading to zero: the C1 side
        flat15 = tf.locate_flat_interval(m15, (0.3, 6.0), tol=1e-8)
        v15_start = tf.smoothness_at_transition(m15, flat15.t_start)
        v15_end = tf.smoothness_at_transition(m15, flat15.t_end)
        assert v15_start.kind == tf.C1
        # finite mean return at the onset forces the same at the end
        # (the provable direction of the endpoint-smoothness equivalence)
        for a, b in ((v3_start, v3_end), (v15_start, v15_end)):
            if a.kind == tf.FIRST_ORDER:
                assert b.kind == tf.FIRST_ORDER


def test_criterion_06_dissipativity_witness():
    with Budget("criterion 6 (dissipative atom)", 5.0):
        seq = sq.with_leading_shift(
            sq.normalize(sq.build_tail(3.0, 1).with_head([-LOG2]), 1.0), -LOG2)
        model = sq.realize_model(seq, sq.HOFBAUER)
        total = tf.certified_G(model, 1.0, 0.0)
        assert abs(total.midpoint - 0.5) <= 1e-8 and total.width <= 1e-8
        rep = tf.conformal_atom_masses(model, 1.0)
        assert rep.verdict == "dissipative"
        assert abs(rep.atom_clamped[0] - 0.5) <= 1e-8
        assert abs(rep.atom_clamped[1] - 0.5) <= 1e-8
        a0 = seq.a(0)
        assert rep.preimage_mass[0] == pytest.approx(0.5 * math.exp(a0), abs=1e-8)


def test_criterion_07_cyr_sarig_witness():
    with Budget("criterion 7 (pressure-bonus witness)", 10.0):
        cases = []
        plain = geometric_model(1.0)
        grid = geometric_model(1.0, grid=True)
        cases += [(plain, t) for t in (0.3, 0.69, 0.8, 1.5)]
        cases += [(grid, t) for t in (0.2, 0.6, 1.2)]
        rows = hofbauer_rows()
        cases.append((sq.realize_model(rows[4][1], sq.HOFBAUER), 1.0))
        m3 = dfu_model(3.0)
        cases += [(m3, 1.5), (m3, 2.5), (m3, 0.7)]
        for model, t in cases:
            cls = tf.classify(model, t)
            wit = tf.cyr_sarig_witness(model, t)
            assert wit.transient == (cls.kind == tf.TRANSIENT), (model.label, t)
            if wit.transient:
                assert wit.u0 > 0
                assert abs(wit.delta_half) <= 1e-8
                assert wit.delta_double >= 1e-6
            else:
                assert wit.u0 == 0.0


def test_criterion_08_chebyshev_estimates():
    with Budget("criterion 8 (Chebyshev periodic-orbit estimates)", 60.0):
        model = tf.chebyshev_model()
        for t in (-2.0, 0.5, 2.0):
            est = tf.gurevich_estimate(model, t, 14)
            exact = tf.chebyshev_pressure_exact(t)
            assert abs(est.raw[-1] - exact) <= 0.2
            assert abs(est.extrapolated - exact) <= 0.05
        ts = [-3.0, -2.5, -2.0, 0.5, 1.0, 1.5]
        ps = [tf.gurevich_estimate(model, t, 14).extrapolated for t in ts]
        t_star, _, _ = tf.two_slope_kink(ts, ps)
        assert abs(t_star + 1.0) <= 0.05


def test_criterion_09_mp_property_suite():
    with Budget("criterion 9 (Manneville-Pomeau properties)", 120.0):
        model = tf.mp_induced_model(0.5, 200)
        assert abs(tf.solve_pressure(model, 1.0).pressure) <= 0.05
        ps = [tf.solve_pressure(model, float(t)).pressure
              for t in np.linspace(0.0, 1.5, 16)]
        assert all(a >= b - 1e-12 for a, b in zip(ps, ps[1:]))
        for t in (1.2, 1.5):
            assert abs(tf.solve_pressure(model, t).pressure) <= 0.02


def test_criterion_10_base_set_pathology():
    with Budget("criterion 10 (base-set pathology)", 30.0):
        seq = sq.RealizedSequence((-LOG4,) * 30, 3.0, 30)
        interval = tf.doubling_grid_model(seq)
        assert tf.classify(tf.hofbauer_doubling_model(seq), 1.0).kind == tf.TRANSIENT
        zs = []
        for n in range(1, 21):
            z_bad = tf.zn_sum(interval, 1.0, n, (0.0, 0.5))
            assert z_bad.value >= 1.0
            zs.append(tf.zn_sum(interval, 1.0, n, (0.5, 1.0)).value)
        rate = np.polyfit(np.arange(1, 21), np.log(zs), 1)[0]
        assert rate <= -0.01


def test_criterion_11_cross_route_consistency():
    with Budget("criterion 11 (finite truncation cross-route)", 60.0):
        model = geometric_model(1.0)
        t = 0.3
        target = tf.solve_pressure(model, t, tol=1e-13).pressure
        prev = -math.inf
        for n_max in (50, 100, 200, 400):
            shift, pot = tf.finite_truncation(model, t, n_max)
            sol = tf.solve_rpf(tf.build_transfer_matrix(shift, pot), tol=1e-13)
            assert sol.pressure >= prev - 1e-13  # monotone in depth
            prev = sol.pressure
        assert abs(prev - target) <= 1e-4
