"""Acceptance gate: one test per criterion, each printing a PASS line with
its headline numbers once its assertions hold (a FAIL surfaces as an
ordinary pytest failure)."""

import time

import numpy as np
import pytest

import monodromy_lab as ml
from monodromy_lab.jets import Jet, RationalFn, mobius_jet, schwarzian
from monodromy_lab.matrizant import pair_kernel
from monodromy_lab.mobius import MobiusMap
from monodromy_lab.fuchsian import octagon_vertex_angle, xi_factor
from monodromy_lab.variation import direct_monodromy


def report(num, text):
    print(f"[PASS] criterion {num:2d}: {text}")


def random_pole_field(rng, spread=0.15, scale=1.0):
    p1, p2 = spread * (rng.normal(size=2) + 1j * rng.normal(size=2))
    c = rng.normal() + 1j * rng.normal()
    return ml.CoefficientField(RationalFn([0.3 * c], [-p1, 1.0]),
                               [RationalFn([scale], [-p2, 1.0])])


def test_criterion_01_transfer_determinant_conservation():
    start = time.time()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        num = rng.normal(size=3) + 1j * rng.normal(size=3)
        pole = 2.0 + rng.normal() + 1j * rng.normal()  # outside the path box
        field = ml.CoefficientField(RationalFn(num, [-pole, 1.0]))
        pts = rng.normal(size=3) * 0.4 + 1j * rng.normal(size=3) * 0.4
        path = ml.Path.polyline(pts)
        T = ml.transfer_matrix(field, None, path, 1e-12)
        worst = max(worst, abs(T.det() - 1.0))
    elapsed = time.time() - start
    assert worst <= 1e-10
    assert elapsed < 10.0
    report(1, f"100 random transfer dets: max |det-1| = {worst:.2e}, "
              f"{elapsed:.1f}s")


def test_criterion_02_constant_field_oracles():
    rng = np.random.default_rng(102)
    taus = 0.999 * np.sqrt(rng.uniform(0, 1, 25)) * np.exp(
        2j * np.pi * rng.uniform(0, 1, 25))
    worst = 0.0
    plus = ml.CoefficientField(lambda t: 1.0 + 0j)
    minus = ml.CoefficientField(lambda t: -1.0 + 0j)
    for tau in taus:
        p = ml.integrate_pair(plus, None, ml.Path.line(0.0, tau), 1e-12)
        worst = max(worst, abs(p.u - np.cos(tau)), abs(p.v - np.sin(tau)))
        m = ml.integrate_pair(minus, None, ml.Path.line(0.0, tau), 1e-12)
        worst = max(worst, abs(m.u - np.cosh(tau)), abs(m.v - np.sinh(tau)))
    assert worst <= 1e-9
    report(2, f"cos/sin and cosh/sinh on |tau| <= 1: max err = {worst:.2e}")


def euler_field():
    return ml.CoefficientField(RationalFn([3.0 / 16.0], [0.0, 0.0, 1.0]),
                               [RationalFn([1.0], [0.0, 0.0, 1.0])])


def exact_euler_trace(h):
    disc = np.sqrt(1.0 - 4.0 * (3.0 / 16.0 + h) + 0j)
    return np.exp(1j * np.pi * (1 + disc)) + np.exp(1j * np.pi * (1 - disc))


def test_criterion_03_euler_monodromy_and_perturbed_trace():
    loop = ml.Loop.circle(0, 1.0)
    fam = ml.monodromy_family(euler_field(), loop, 3, tol=1e-12)
    eigs = np.linalg.eigvals(fam.base.mat)
    eig_err = max(min(abs(e - 1j), abs(e + 1j)) for e in eigs)
    assert eig_err <= 1e-8

    # Taylor coefficients of the closed-form trace by Cauchy integrals: an
    # oracle independent of the series machinery
    m = 64
    radius = 0.02
    hs = radius * np.exp(2j * np.pi * np.arange(m) / m)
    vals = np.array([exact_euler_trace(h) for h in hs])
    taylor = [np.mean(vals * hs ** -n) for n in range(4)]

    worst_cubic = 0.0
    worst_full = 0.0
    for phase in (1.0, -1.0, 1j, 0.6 + 0.8j):
        h = 1e-3 * phase
        cubic = sum(c * h ** n for n, c in enumerate(taylor))
        worst_cubic = max(worst_cubic,
                          abs(fam(np.array([h])).trace() - cubic))
        h = 9.5e-4 * phase
        worst_full = max(worst_full,
                         abs(fam(np.array([h])).trace() - exact_euler_trace(h)))
    assert worst_cubic <= 1e-10
    assert worst_full <= 1e-10
    report(3, f"Euler eigenvalue err = {eig_err:.2e}; N=3 trace err: "
              f"{worst_cubic:.2e} (vs cubic Taylor at |h|=1e-3), "
              f"{worst_full:.2e} (vs closed form at |h|=9.5e-4)")


def test_criterion_04_matrizant_order_of_accuracy():
    start = time.time()
    rng = np.random.default_rng(104)
    loop = ml.Loop.circle(0, 1.0)
    hs = [1e-1, 10 ** -1.5, 1e-2, 10 ** -2.5, 1e-3]
    worst_dev = 0.0
    for _ in range(5):
        field = random_pole_field(rng)
        for N in (1, 2, 3):
            fam = ml.monodromy_family(field, loop, N, tol=1e-12)
            errs = [np.linalg.norm(
                fam(np.array([h])).mat
                - direct_monodromy(field, np.array([h]), loop, 1e-12).mat)
                for h in hs]
            slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
            assert abs(slope - (N + 1)) <= 0.3
            worst_dev = max(worst_dev, abs(slope - (N + 1)))
    elapsed = time.time() - start
    assert elapsed < 60.0
    report(4, f"5 fields, N=1..3: max |slope-(N+1)| = {worst_dev:.3f}, "
              f"{elapsed:.1f}s")


def test_criterion_05_closed_form_series_coefficients():
    field = ml.CoefficientField(RationalFn([0.0], [1.0]),
                                [RationalFn([1.0], [1.0])])
    s = ml.compute_series(field, ml.Path.line(0.0, 1.0), 4, tol=1e-13)
    p = s.endpoint_pair
    fact = [1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880]
    worst = 0.0
    for n in range(1, 5):
        B = s.coeffs[(n,)]
        v_n = B[0, 0] * p.v + B[0, 1] * p.u
        u_n = B[1, 0] * p.v + B[1, 1] * p.u
        worst = max(worst, abs(v_n - (-1) ** n / fact[2 * n + 1]),
                    abs(u_n - (-1) ** n / fact[2 * n]))
    assert worst <= 1e-10
    report(5, f"sin/cos Taylor through order 4: max coeff err = {worst:.2e}")


def test_criterion_06_first_variation():
    tau = 1.0
    field = ml.CoefficientField(RationalFn([0.0], [1.0]),
                                [RationalFn([1.0], [1.0])])
    c = ml.first_variation_z(field, ml.Path.line(0.0, tau), 1e-12)[0]
    closed_err = abs(c - tau ** 3 / 3.0)
    assert closed_err <= 1e-10

    rng = np.random.default_rng(106)
    worst_dev = 0.0
    for _ in range(3):
        f = random_pole_field(rng)
        path = ml.Path.line(0.5, 1.2 + 0.4j)
        c1 = ml.first_variation_z(f, path, 1e-13)[0]
        z0 = ml.integrate_pair(f, None, path, 1e-13).z()
        hs = np.array([1e-2, 1e-3, 1e-4, 1e-5])
        rem = [abs(ml.integrate_pair(f, np.array([h]), path, 1e-13).z()
                   - z0 - h * c1) for h in hs]
        slope = np.polyfit(np.log(hs), np.log(rem), 1)[0]
        assert abs(slope - 2.0) <= 0.1
        worst_dev = max(worst_dev, abs(slope - 2.0))
    report(6, f"c1 = tau^3/3 err = {closed_err:.2e}; "
              f"FD remainder slope dev <= {worst_dev:.3f}")


def test_criterion_07_kernel_nilpotency():
    rng = np.random.default_rng(107)
    worst = 0.0
    for _ in range(1000):
        v, u = rng.normal(size=2) * 3 + 1j * rng.normal(size=2) * 3
        K = pair_kernel(v, u)
        n = np.linalg.norm(K)
        if n > 0:
            worst = max(worst, np.linalg.norm(K @ K) / n ** 2)
    assert worst <= 1e-12
    report(7, f"1000 kernels: max ||K^2||/||K||^2 = {worst:.2e}")


def random_jet(rng, t0, order=6):
    c = rng.normal(size=order + 1) + 1j * rng.normal(size=order + 1)
    c[1] += 2.0  # keep the point noncritical
    return Jet(t0, c)


def test_criterion_08_schwarzian_cocycle_and_mobius_invariance():
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(100):
        t0 = 0.3 * (rng.normal() + 1j * rng.normal())
        g = random_jet(rng, t0)
        f = random_jet(rng, g.coeffs[0])
        comp = f.compose(g)
        lhs = schwarzian(comp)
        rhs = schwarzian(f) * g.coeffs[1] ** 2 + schwarzian(g)
        worst = max(worst, abs(lhs - rhs))
        # Mobius post-composition leaves the Schwarzian unchanged
        a, b, c = rng.normal(size=3) + 1j * rng.normal(size=3)
        m = MobiusMap.from_entries(a, b, c, (1.0 + b * c) / a)
        mj = mobius_jet(m, f.coeffs[0], comp.order)
        worst = max(worst, abs(schwarzian(mj.compose(f)) - schwarzian(f)))
    assert worst <= 1e-9
    report(8, f"100 composites: max cocycle/invariance residual = {worst:.2e}")


def test_criterion_09_diagonal_consistency():
    q = RationalFn([1.0, 0.5], [1.0])
    r = RationalFn([0.3, 0.0, 1.0], [1.0])
    path = ml.Path.line(0.0, 0.7 + 0.4j)
    s2 = ml.compute_series(ml.CoefficientField(r, [q, q]), path, 3, tol=1e-12)
    s1 = ml.compute_series(ml.CoefficientField(r, [q]), path, 3, tol=1e-12)
    worst = 0.0
    for x in (0.05, 0.02 + 0.01j, -0.03j):
        o2 = s2.evaluate_omega(np.array([x, x]))
        o1 = s1.evaluate_omega(np.array([2 * x]))
        worst = max(worst, np.linalg.norm(o2 - o1) / np.linalg.norm(o1))
    assert worst <= 1e-10
    report(9, f"d=2 diagonal vs collapsed d=1: max rel err = {worst:.2e}")


@pytest.fixture(scope="module")
def octagon():
    return ml.build_octagon_group()


def test_criterion_10_octagon_group(octagon):
    angle_err = abs(octagon_vertex_angle(octagon.circumradius) - np.pi / 4)
    rel = octagon.relation_residual()
    assert angle_err <= 1e-10
    assert rel <= 1e-8

    rng = np.random.default_rng(110)
    words = ["a", "b", "c", "d", "A", "ab", "cD", "Bc", "da"]
    worst = 0.0
    for _ in range(50):
        w1, w2 = rng.choice(words, 2)
        t = 0.4 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        K = octagon.lift_of_word(w2)
        lhs = xi_factor(octagon.lift_of_word(w1 + w2), t)
        rhs = xi_factor(octagon.lift_of_word(w1), MobiusMap(K)(t)) \
            * xi_factor(K, t)
        worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-9
    report(10, f"vertex angle err = {angle_err:.2e}, relation residual = "
               f"{rel:.2e}, xi-cocycle residual = {worst:.2e}")


def test_criterion_11_behavioral_fuchsian_run(octagon):
    start = time.time()
    seed = [0.0, 0.0, 1.0]

    # (a) theta automorphy residual decreasing for N = 2..5
    thetas = {n: ml.theta_series(octagon, seed, n) for n in (2, 3, 4, 5)}
    auto = [ml.automorphy_residual(thetas[n]) for n in (2, 3, 4, 5)]
    assert all(b < 1.1 * a for a, b in zip(auto, auto[1:]))

    # (b) homomorphism residual at N = 5 over basepoint-reachable pairs
    pairs = {"ab": 0.15 + 0.6j, "ba": -0.15 + 0.6j,
             "cd": -0.15 - 0.6j, "dc": 0.15 - 0.6j}
    th5 = thetas[5]
    hom_worst = 0.0
    for word, t0 in pairs.items():
        rho = {w: ml.developing_monodromy(octagon, th5, w, t0=t0,
                                          tol=1e-9)[0]
               for w in (word[0], word[1], word)}
        hom_worst = max(hom_worst,
                        rho[word].dist(rho[word[0]] @ rho[word[1]]))
    assert hom_worst <= 1e-2

    # (c) conjugation/Prym identity residual decreasing in N
    t0 = -0.54 + 0.36j
    path = ml.Path.line(t0, t0 + 0.15)
    L = MobiusMap(octagon.lift_of_word("a"))
    conj = []
    for n in (2, 3, 4, 5):
        th = thetas[n]
        field = ml.CoefficientField(th, [th])
        M = ml.developing_monodromy(octagon, th, "a", t0=t0, tol=1e-9)[1]
        conj.append(ml.conjugation_identity_residual(
            field, L, path, tol=1e-9, automorphy=M.rep))
    assert conj[-1] < conj[0]
    assert all(b < 1.1 * a for a, b in zip(conj, conj[1:]))

    elapsed = time.time() - start
    assert elapsed < 300.0
    report(11, f"automorphy {auto[0]:.1e}->{auto[-1]:.1e}, homomorphism "
               f"residual {hom_worst:.1e}, conjugation "
               f"{conj[0]:.1e}->{conj[-1]:.1e}, {elapsed:.0f}s")
