import numpy as np
import pytest

from monodromy_lab.jets import RationalFn
from monodromy_lab.matrizant import (CoefficientCapError, coefficient_count,
                                     compute_series, graded_lex_indices,
                                     pair_kernel)
from monodromy_lab.path_ode import CoefficientField, Loop, Path


def test_graded_lex_indices_order_and_count():
    idx = graded_lex_indices(2, 2)
    assert idx == [(0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert coefficient_count(2, 2) == len(idx)
    assert coefficient_count(1, 4) == 4


def test_kernel_nilpotency_and_trace():
    rng = np.random.default_rng(0)
    for _ in range(200):
        v, u = rng.normal(size=2) + 1j * rng.normal(size=2)
        K = pair_kernel(v, u)
        assert abs(np.trace(K)) < 1e-12 * max(1.0, np.linalg.norm(K))
        assert np.linalg.norm(K @ K) < 1e-12 * np.linalg.norm(K) ** 2


def test_first_coefficient_hand_values():
    # r = 0, q = 1 on 0 -> tau: v = t, u = 1 and
    # B_1 = [[-tau^2/2, tau^3/3], [-tau, tau^2/2]]
    tau = 0.8 + 0.3j
    field = CoefficientField(RationalFn([0.0], [1.0]), [RationalFn([1.0], [1.0])])
    s = compute_series(field, Path.line(0.0, tau), 1, tol=1e-12)
    expect = np.array([[-tau ** 2 / 2, tau ** 3 / 3], [-tau, tau ** 2 / 2]])
    assert np.linalg.norm(s.coeffs[(1,)] - expect) < 1e-10
    assert abs(s.endpoint_pair.v - tau) < 1e-10
    assert abs(s.endpoint_pair.u - 1.0) < 1e-10


def test_series_matches_sin_cos_expansion():
    # d = 1, r = 0, q = 1, tau = 1: the perturbed pair is
    # v = sin(sqrt(h))/sqrt(h), u = cos(sqrt(h))
    field = CoefficientField(RationalFn([0.0], [1.0]), [RationalFn([1.0], [1.0])])
    s = compute_series(field, Path.line(0.0, 1.0), 4, tol=1e-13)
    p = s.endpoint_pair
    fact = [1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880]
    for n in range(1, 5):
        B = s.coeffs[(n,)]
        v_n = B[0, 0] * p.v + B[0, 1] * p.u
        u_n = B[1, 0] * p.v + B[1, 1] * p.u
        assert abs(v_n - (-1) ** n / fact[2 * n + 1]) < 1e-10
        assert abs(u_n - (-1) ** n / fact[2 * n]) < 1e-10


def test_omega_has_unit_det_to_series_order():
    rng = np.random.default_rng(1)
    field = CoefficientField(
        RationalFn([0.5], [-0.1 - 0.1j, 1.0]),
        [RationalFn([1.0], [-0.2j, 1.0])])
    s = compute_series(field, Loop.circle(0, 1.0), 3, tol=1e-12)
    for h in (1e-2, 1e-3):
        omega = s.evaluate_omega(np.array([h]))
        assert abs(np.linalg.det(omega) - 1.0) < 10 * h ** 4


def test_multiparameter_diagonal_collapse():
    # q1 = q2 = q: the d = 2 series on the diagonal h = (x, x) must agree
    # with the d = 1 series at 2x
    q = RationalFn([1.0, 0.5], [1.0])
    r = RationalFn([0.3, 0.0, 1.0], [1.0])
    path = Path.line(0.0, 0.7 + 0.4j)
    s2 = compute_series(CoefficientField(r, [q, q]), path, 3, tol=1e-12)
    s1 = compute_series(CoefficientField(r, [q]), path, 3, tol=1e-12)
    for x in (0.05, 0.02 + 0.01j):
        o2 = s2.evaluate_omega(np.array([x, x]))
        o1 = s1.evaluate_omega(np.array([2 * x]))
        assert np.linalg.norm(o2 - o1) / np.linalg.norm(o1) < 1e-10


def test_zero_directions_give_zero_coefficients():
    field = CoefficientField(RationalFn([1.0], [1.0]), [RationalFn([0.0], [1.0])])
    s = compute_series(field, Path.line(0.0, 1.0), 2, tol=1e-12)
    for k, mat in s.coeffs.items():
        assert np.linalg.norm(mat) < 1e-12


def test_coefficient_cap_enforced():
    field = CoefficientField(RationalFn([0.0], [1.0]),
                             [RationalFn([1.0], [1.0])] * 6)
    with pytest.raises(CoefficientCapError):
        compute_series(field, Path.line(0.0, 1.0), 12, tol=1e-10, cap=100)


def test_perturbed_pair_matches_direct_integration():
    from monodromy_lab.path_ode import integrate_pair
    field = CoefficientField(RationalFn([0.2], [1.0]), [RationalFn([1.0], [1.0])])
    path = Path.line(0.0, 1.0)
    s = compute_series(field, path, 3, tol=1e-12)
    h = 1e-2
    v_s, u_s = s.perturbed_pair(np.array([h]))
    direct = integrate_pair(field, np.array([h]), path, 1e-12)
    assert abs(v_s - direct.v) < 10 * h ** 4
    assert abs(u_s - direct.u) < 10 * h ** 4


def test_series_dict_is_graded_lex():
    field = CoefficientField(RationalFn([0.0], [1.0]),
                             [RationalFn([1.0], [1.0]), RationalFn([0.5], [1.0])])
    s = compute_series(field, Path.line(0.0, 0.5), 2, tol=1e-10)
    d = s.to_dict()
    assert [tuple(e["k"]) for e in d["coeffs"]] == graded_lex_indices(2, 2)
