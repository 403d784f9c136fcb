import math

import numpy as np
import pytest

from thermoform import (FiniteShift, LocallyConstantPotential, NotMixingError,
                        birkhoff_sum, build_transfer_matrix, cycle_shift,
                        component_pressure_curve, cylinder_weight,
                        decompose_components, disjoint_union,
                        enumerate_periodic_words, full_shift,
                        gibbs_constant_check, golden_mean_shift,
                        pressure_curve_finite, renewal_shift, solve_rpf)

GOLDEN = (1 + math.sqrt(5)) / 2


def bernoulli_setup(p):
    shift = full_shift(2)
    pot = LocallyConstantPotential.from_symbol_values(
        shift, [math.log(p), math.log(1 - p)])
    return shift, pot


def test_build_matrix_full_shift_zero():
    shift = full_shift(2)
    tm = build_transfer_matrix(shift, LocallyConstantPotential.constant(shift, 0.0))
    assert np.allclose(tm.matrix.toarray(), np.ones((2, 2)))


def test_build_matrix_bernoulli_columns():
    shift, pot = bernoulli_setup(0.3)
    tm = build_transfer_matrix(shift, pot)
    dense = tm.matrix.toarray()
    # column = source state, scaled by exp(potential at the source)
    assert np.allclose(dense[:, 0], 0.3)
    assert np.allclose(dense[:, 1], 0.7)


def test_build_matrix_renewal_pattern():
    shift = renewal_shift(6)
    tm = build_transfer_matrix(shift, LocallyConstantPotential.constant(shift, 0.0))
    assert np.allclose(tm.matrix.toarray(), shift.dense().T)


def test_trace_equals_periodic_sum():
    rng = np.random.default_rng(5)
    shift = golden_mean_shift()
    for depth in (1, 2):
        if depth == 2:
            words = [(x, y) for x in range(2) for y in range(2) if (x, y) != (1, 1)]
        else:
            words = [(0,), (1,)]
        pot = LocallyConstantPotential(depth, {w: float(rng.normal(scale=0.4))
                                               for w in words}, shift)
        tm = build_transfer_matrix(shift, pot)
        for n in range(1, 9):
            direct = sum(math.exp(birkhoff_sum(pot, w))
                         for w in enumerate_periodic_words(shift, n))
            assert tm.trace_power(n) == pytest.approx(direct, rel=1e-12)


def test_rpf_full_shift_log2():
    shift = full_shift(2)
    sol = solve_rpf(build_transfer_matrix(shift, LocallyConstantPotential.constant(shift, 0.0)))
    assert abs(sol.pressure - math.log(2)) <= 1e-12
    assert np.allclose(sol.h, sol.h[0])
    assert np.allclose(sol.m, 0.5)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.9])
def test_rpf_bernoulli(p):
    shift, pot = bernoulli_setup(p)
    sol = solve_rpf(build_transfer_matrix(shift, pot))
    assert abs(sol.pressure) <= 1e-10
    assert sol.mu == pytest.approx([p, 1 - p], abs=1e-10)
    # deeper cylinder masses are products
    for word in [(0, 0), (0, 1), (1, 0), (1, 1), (0, 1, 1)]:
        expected = math.prod(p if s == 0 else 1 - p for s in word)
        assert cylinder_weight(sol, word) == pytest.approx(expected, abs=1e-10)


def test_rpf_golden_mean():
    shift = golden_mean_shift()
    sol = solve_rpf(build_transfer_matrix(shift, LocallyConstantPotential.constant(shift, 0.0)))
    assert sol.pressure == pytest.approx(math.log(GOLDEN), abs=1e-12)


def test_rpf_duality_residuals():
    shift, pot = bernoulli_setup(0.25)
    tol = 1e-12
    sol = solve_rpf(build_transfer_matrix(shift, pot), tol=tol)
    tm = sol.matrix.matrix
    lam = math.exp(sol.pressure)
    assert np.max(np.abs(tm @ sol.h - lam * sol.h)) <= tol * max(lam, 1) * 2
    assert np.max(np.abs(sol.m @ tm - lam * sol.m)) <= tol * max(lam, 1) * 2


def test_rpf_rejects_nonmixing():
    both = disjoint_union(full_shift(2), full_shift(2))
    with pytest.raises(NotMixingError):
        solve_rpf(build_transfer_matrix(both, LocallyConstantPotential.constant(both, 0.0)))
    cyc = cycle_shift(3)
    with pytest.raises(NotMixingError):
        solve_rpf(build_transfer_matrix(cyc, LocallyConstantPotential.constant(cyc, 0.0)))


def chain_entropy(sol):
    """Entropy of the equilibrium chain plus potential average (oracle)."""
    tm = sol.matrix.matrix.toarray()
    lam = math.exp(sol.pressure)
    size = tm.shape[0]
    ent = 0.0
    for src in range(size):
        for dst in range(size):
            if tm[dst, src] > 0:
                prob = tm[dst, src] * sol.m[dst] / (lam * sol.m[src])
                ent -= sol.mu[src] * prob * math.log(prob)
    return ent


def test_variational_identity():
    rng = np.random.default_rng(17)
    for shift in (full_shift(2), golden_mean_shift(), full_shift(3)):
        vals = [float(rng.normal(scale=0.6)) for _ in range(shift.alphabet_size)]
        pot = LocallyConstantPotential.from_symbol_values(shift, vals)
        sol = solve_rpf(build_transfer_matrix(shift, pot))
        phi_avg = float(sol.mu @ np.array([pot(w) for w in sol.matrix.states]))
        assert chain_entropy(sol) + phi_avg == pytest.approx(sol.pressure, abs=1e-8)


def test_gibbs_constant_bernoulli_is_one():
    shift, pot = bernoulli_setup(0.3)
    sol = solve_rpf(build_transfer_matrix(shift, pot))
    assert gibbs_constant_check(sol, shift, pot, 6) == pytest.approx(1.0, abs=1e-9)


def test_gibbs_constant_golden_mean_stable():
    shift = golden_mean_shift()
    pot = LocallyConstantPotential.constant(shift, 0.0)
    sol = solve_rpf(build_transfer_matrix(shift, pot))
    k6 = gibbs_constant_check(sol, shift, pot, 6)
    k8 = gibbs_constant_check(sol, shift, pot, 8)
    assert k6 < math.inf and k8 <= k6 * (1 + 1e-9)


def test_pressure_curve_finite_convex_and_exact():
    shift = full_shift(2)
    zero = LocallyConstantPotential.constant(shift, 0.0)
    ts, ps, _ = pressure_curve_finite(shift, zero, np.linspace(-2, 2, 9))
    assert np.allclose(ps, math.log(2), atol=1e-12)

    shift, pot = bernoulli_setup(0.4)
    ts, ps, ds = pressure_curve_finite(shift, pot, [1.0])
    assert ps[0] == pytest.approx(0.0, abs=1e-10)

    gm = golden_mean_shift()
    gpot = LocallyConstantPotential.from_symbol_values(gm, [0.0, -1.0])
    ts, ps, _ = pressure_curve_finite(gm, gpot, [0.0, 1.0])
    assert ps[0] == pytest.approx(math.log(GOLDEN), abs=1e-12)
    # Perron root of [[1, e^-1], [1, 0]] by the quadratic formula
    root = 0.5 * (1 + math.sqrt(1 + 4 * math.exp(-1)))
    assert ps[1] == pytest.approx(math.log(root), abs=1e-12)


def nonmixing_setup():
    both = disjoint_union(full_shift(2), full_shift(2))
    psi = LocallyConstantPotential.from_symbol_values(both, [-1, -1, -2, -2])
    return both, psi


def test_decompose_nonmixing_formula():
    both, psi = nonmixing_setup()
    ts = np.linspace(-2, 2, 11)
    ts_out, ps, counts = component_pressure_curve(both, psi, ts)
    expected = np.maximum(-ts, -2 * ts) + math.log(2)
    assert np.allclose(ps, expected, atol=1e-10)
    assert counts[ts == 0.0] == 2
    assert all(counts[ts != 0.0] == 1)


def test_decompose_single_component_matches_solver():
    shift, pot = bernoulli_setup(0.35)
    dec = decompose_components(shift, pot, t=1.0)
    direct = solve_rpf(build_transfer_matrix(shift, pot))
    assert len(dec.components) == 1
    assert dec.pressure == pytest.approx(direct.pressure, abs=1e-12)


def test_decompose_handles_periodic_component():
    cyc = cycle_shift(2)
    dec = decompose_components(cyc, LocallyConstantPotential.constant(cyc, 0.0))
    assert dec.pressure == pytest.approx(0.0, abs=1e-10)
