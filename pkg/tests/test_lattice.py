import numpy as np
import pytest

from dplhom import (CoefficientField, CustomNonlinearity, LatticeSeq, LogPower,
                    ProblemSpec, Window, cerami_metric, energy,
                    energy_parts, forward_diff, lp_norm, phi_p, phi_p_prime,
                    residual, residual_many, sup_norm, tail_mass, weighted_norm)
from conftest import make_constant_problem, random_problem
from oracles import direct_weighted_norm, fd_gradient


# ---- phi_p ---------------------------------------------------------------

def test_phi_p_identity_at_p2():
    assert phi_p(2.0, 3.0) == 3.0


def test_phi_p_cubic_negative():
    assert phi_p(3.0, -2.0) == -4.0


def test_phi_p_origin_subquadratic():
    assert phi_p(1.5, 0.0) == 0.0


def test_phi_p_rejects_p_not_above_one():
    with pytest.raises(ValueError):
        phi_p(1.0, 2.0)
    with pytest.raises(ValueError):
        phi_p(0.5, 2.0)


def test_phi_p_prime_clamps_near_zero():
    assert phi_p_prime(1.5, 0.0, cap=1e8) == 1e8
    assert phi_p_prime(2.0, 0.0) == 1.0
    assert phi_p_prime(3.0, 0.0) == 0.0


# ---- window / sequence types ---------------------------------------------

def test_window_validation():
    with pytest.raises(ValueError):
        Window(0)
    w = Window(3)
    assert w.size == 7
    assert list(w.indices) == [-3, -2, -1, 0, 1, 2, 3]


def test_lattice_seq_checks_length_and_finiteness():
    w = Window(2)
    with pytest.raises(ValueError):
        LatticeSeq(w, np.zeros(4))
    with pytest.raises(ValueError):
        LatticeSeq(w, np.array([0.0, np.inf, 0, 0, 0]))


def test_lattice_seq_values_are_immutable():
    u = LatticeSeq.spike(Window(2), 0, 1.0)
    with pytest.raises(ValueError):
        u.values[0] = 5.0


def test_coefficient_floor_enforced():
    w = Window(2)
    with pytest.raises(ValueError):
        CoefficientField(w, np.ones(w.size + 1), np.full(w.size, 0.5), b0=1.0)
    with pytest.raises(ValueError):
        CoefficientField(w, -np.ones(w.size + 1), np.ones(w.size), b0=1.0)


def test_table_coefficients_refuse_rewindow():
    w = Window(2)
    field = CoefficientField.from_arrays(w, np.ones(w.size + 1), np.ones(w.size))
    with pytest.raises(ValueError):
        field.with_window(Window(4))


def test_problem_spec_validation():
    w = Window(2)
    c = CoefficientField.constant(w)
    with pytest.raises(ValueError):
        ProblemSpec(1.0, 1.0, c, CustomNonlinearity.zero(1.5))
    with pytest.raises(ValueError):
        ProblemSpec(2.0, 0.0, c, CustomNonlinearity.zero(2.0))
    with pytest.raises(ValueError):
        ProblemSpec(2.0, 1.0, c, CustomNonlinearity.zero(3.0))  # p mismatch


# ---- forward differences ---------------------------------------------------

def test_forward_diff_zero():
    u = LatticeSeq.zeros(Window(3))
    assert np.all(forward_diff(u) == 0.0)


def test_forward_diff_spike():
    u = LatticeSeq.spike(Window(2), 0, 1.0)
    d = forward_diff(u)
    # entries correspond to k = -2 .. 3; delta at k=0 and k=1
    assert list(d) == [0.0, 0.0, 1.0, -1.0, 0.0, 0.0]


def test_forward_diff_random_elementwise(rng):
    u_vals = rng.standard_normal(5)
    u = LatticeSeq(Window(2), u_vals)
    d = forward_diff(u)
    ext = np.concatenate([[0.0], u_vals, [0.0]])
    expected = [ext[j + 1] - ext[j] for j in range(6)]
    assert np.allclose(d, expected, rtol=0, atol=0)


# ---- norms -----------------------------------------------------------------

def test_weighted_norm_zero():
    prob = make_constant_problem()
    u = LatticeSeq.zeros(prob.window)
    assert weighted_norm(u, prob.coeffs, prob.p) == 0.0


def test_weighted_norm_spike_sqrt3():
    prob = make_constant_problem(K=2)
    u = LatticeSeq.spike(prob.window, 0, 1.0)
    assert weighted_norm(u, prob.coeffs, 2.0) == pytest.approx(np.sqrt(3.0), rel=1e-15)


def test_weighted_norm_matches_direct_summation(rng):
    for _ in range(20):
        prob = random_problem(rng)
        v = rng.standard_normal(prob.window.size)
        got = weighted_norm(LatticeSeq(prob.window, v), prob.coeffs, prob.p)
        want = direct_weighted_norm(v, prob.coeffs.a, prob.coeffs.b, prob.p)
        assert got == pytest.approx(want, rel=1e-13)


def test_weighted_norm_homogeneity(rng):
    prob = random_problem(rng)
    v = rng.standard_normal(prob.window.size)
    u = LatticeSeq(prob.window, v)
    cu = LatticeSeq(prob.window, -2.5 * v)
    assert weighted_norm(cu, prob.coeffs, prob.p) == pytest.approx(
        2.5 * weighted_norm(u, prob.coeffs, prob.p), rel=1e-12)


def test_lp_norms_spike():
    u = LatticeSeq.spike(Window(3), 1, 1.0)
    for q in (1.5, 2.0, 4.0):
        assert lp_norm(u, q) == 1.0
    assert sup_norm(u) == 1.0


def test_lp_norm_two_sites():
    u = LatticeSeq(Window(1), np.array([1.0, 1.0, 0.0]))
    assert lp_norm(u, 2.0) == pytest.approx(np.sqrt(2.0), rel=1e-15)


def test_sup_norm_below_lp_norm(rng):
    for _ in range(50):
        prob = random_problem(rng)
        u = LatticeSeq(prob.window, rng.standard_normal(prob.window.size))
        assert sup_norm(u) <= lp_norm(u, prob.p) + 1e-15


def test_embedding_inequality_chain(rng):
    # sup norm <= lp norm <= b0^(-1/p) * weighted norm
    for _ in range(200):
        prob = random_problem(rng)
        u = LatticeSeq(prob.window, rng.standard_normal(prob.window.size))
        lo = sup_norm(u)
        mid = lp_norm(u, prob.p)
        hi = prob.coeffs.b0 ** (-1.0 / prob.p) * weighted_norm(u, prob.coeffs, prob.p)
        assert lo <= mid * (1 + 1e-14)
        assert mid <= hi * (1 + 1e-14)


# ---- energy ----------------------------------------------------------------

def test_energy_zero_configuration():
    prob = make_constant_problem(nl=LogPower(2.0, 2.0, 2.0))
    assert energy(LatticeSeq.zeros(prob.window), prob) == 0.0


def test_energy_spike_no_drive():
    prob = make_constant_problem(K=2, p=2.0)
    u = LatticeSeq.spike(prob.window, 0, 1.0)
    assert energy(u, prob) == pytest.approx(1.5, rel=1e-15)


def test_energy_parts_identity(rng):
    prob = random_problem(rng)
    u = LatticeSeq(prob.window, rng.standard_normal(prob.window.size))
    parts = energy_parts(u, prob)
    norm = weighted_norm(u, prob.coeffs, prob.p)
    assert parts.norm_part == pytest.approx(norm ** prob.p / prob.p, rel=1e-12)
    assert parts.total == pytest.approx(parts.norm_part - prob.lam * parts.source_part,
                                        rel=1e-12)


def test_energy_even_under_odd_drive(rng):
    prob = make_constant_problem(K=4, nl=LogPower(2.0, 2.0, 2.0))
    v = rng.standard_normal(prob.window.size)
    u, mu = LatticeSeq(prob.window, v), LatticeSeq(prob.window, -v)
    eu, emu = energy(u, prob), energy(mu, prob)
    assert emu == pytest.approx(eu, rel=1e-12)
    assert np.allclose(residual(mu, prob).values, -residual(u, prob).values,
                       rtol=1e-12, atol=1e-14)


def test_phi_homogeneity(rng):
    for _ in range(20):
        prob = random_problem(rng)
        v = rng.standard_normal(prob.window.size)
        c = float(rng.uniform(0.3, 4.0)) * float(rng.choice([-1.0, 1.0]))
        base = energy_parts(LatticeSeq(prob.window, v), prob).norm_part
        scaled = energy_parts(LatticeSeq(prob.window, c * v), prob).norm_part
        assert scaled == pytest.approx(abs(c) ** prob.p * base, rel=1e-12)


# ---- residual ---------------------------------------------------------------

def test_zero_is_critical_when_drive_vanishes_at_zero():
    prob = make_constant_problem(nl=LogPower(2.0, 2.0, 2.0))
    r = residual(LatticeSeq.zeros(prob.window), prob)
    assert np.all(r.values == 0.0)


def test_residual_hand_values_cubic_spike():
    prob = make_constant_problem(K=2, p=3.0, nl=CustomNonlinearity.zero(3.0))
    u = LatticeSeq.spike(prob.window, 0, 1.0)
    r = residual(u, prob)
    assert list(r.values) == [0.0, -1.0, 3.0, -1.0, 0.0]


def test_residual_is_energy_gradient(rng):
    checked = 0
    for _ in range(25):
        prob = random_problem(rng)
        v = rng.standard_normal(prob.window.size) * 1.5
        d = np.diff(v, prepend=0.0, append=0.0)
        keep = (np.abs(d[:-1]) > 1e-3) & (np.abs(d[1:]) > 1e-3) & (np.abs(v) > 1e-3)
        if not np.any(keep):
            continue
        grad = fd_gradient(v, prob)
        r = residual_many(v, prob)
        scale = max(1e-3, float(np.max(np.abs(r))) * 1e-3)
        rel = np.abs(grad - r) / np.maximum(np.abs(r), scale)
        assert np.max(rel[keep]) < 1e-6
        checked += 1
    assert checked >= 15


# ---- tail mass / cerami -----------------------------------------------------

def test_tail_mass_spike():
    u = LatticeSeq.spike(Window(3), 0, 1.0)
    assert tail_mass(u, 1, 2.0) == 0.0
    assert tail_mass(u, 0, 2.0) == 0.0  # |k| > 0 excludes the support


def test_tail_mass_full_support():
    u = LatticeSeq.spike(Window(3), 2, 2.0)
    assert tail_mass(u, 1, 2.0) == pytest.approx(2.0, rel=1e-15)


def test_tail_mass_partition_identity(rng):
    for _ in range(20):
        prob = random_problem(rng)
        v = rng.standard_normal(prob.window.size)
        u = LatticeSeq(prob.window, v)
        p = prob.p
        total = tail_mass(u, 0, p) ** p + abs(u.value_at(0)) ** p
        assert total == pytest.approx(lp_norm(u, p) ** p, rel=1e-12)


def test_tail_mass_monotone_and_vanishing(rng):
    prob = random_problem(rng, K=5)
    u = LatticeSeq(prob.window, rng.standard_normal(prob.window.size))
    vals = [tail_mass(u, h, prob.p) for h in range(7)]
    assert all(vals[i] >= vals[i + 1] - 1e-15 for i in range(len(vals) - 1))
    assert vals[5] == 0.0 and vals[6] == 0.0


def test_cerami_metric_zero_at_trivial_critical_point():
    prob = make_constant_problem(nl=LogPower(2.0, 2.0, 2.0))
    assert cerami_metric(LatticeSeq.zeros(prob.window), prob) == 0.0
