"""Genus-2 Fuchsian laboratory: the regular hyperbolic octagon group,
truncated Poincare-series quadratic differentials on the unit disc, and the
monodromy homomorphism of developing maps.

All group elements carry an explicit SL(2,C) lift (a product of the fixed
generator lifts), so the automorphy factor xi_L(t) = 1/(c t + d) satisfies
the cocycle xi_{LK}(t) = xi_L(K t) xi_K(t) exactly.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .mobius import (GroupPresentation, MobiusMap, SL2Matrix, classify,
                     relation_residual)
from .path_ode import CoefficientField, Path, integrate_pair

DISC_CLIP = 0.95
ENUMERATION_CAP = 6
SEED_DEGREE_CAP = 10


class FitError(RuntimeError):
    """Degenerate three-point configuration in the Mobius fit."""


def _disc_to_zero(p):
    """SU(1,1) automorphism of the unit disc sending p to 0."""
    s = 1.0 / np.sqrt(1.0 - abs(p) ** 2)
    return np.array([[1.0, -p], [-np.conj(p), 1.0]], dtype=complex) * s


def _mobius_apply(m, z):
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def _pair_map(p, q, p2, q2):
    """Disc automorphism with p -> p2, q -> q2 (equal hyperbolic distances).

    Built by moving both geodesic segments to standard position (first point
    at 0, second on the positive real axis) and composing.
    """
    def to_standard(a, b):
        h = _disc_to_zero(a)
        ang = cmath.phase(_mobius_apply(h, b))
        rot = np.array([[np.exp(-1j * ang / 2), 0.0],
                        [0.0, np.exp(1j * ang / 2)]], dtype=complex)
        return rot @ h

    m1 = to_standard(p, q)
    m2 = to_standard(p2, q2)
    inv2 = np.array([[m2[1, 1], -m2[0, 1]], [-m2[1, 0], m2[0, 0]]])
    return inv2 @ m1


def octagon_vertex_angle(rho):
    """Interior angle of the regular hyperbolic octagon with Euclidean
    circumradius rho (vertex on the positive real axis)."""
    v0 = rho
    v1 = rho * np.exp(1j * np.pi / 4)
    v2 = rho * np.exp(1j * np.pi / 2)
    h = _disc_to_zero(v1)
    a0 = cmath.phase(_mobius_apply(h, v0))
    a2 = cmath.phase(_mobius_apply(h, v2))
    return abs((a0 - a2 + np.pi) % (2.0 * np.pi) - np.pi)


@dataclass(frozen=True)
class OctagonGroup:
    """Marked genus-2 Fuchsian group from the regular octagon, sides paired
    in the pattern a1 b1 a1' b1' a2 b2 a2' b2' with relation
    [A1, B1][A2, B2] = 1."""

    generators: tuple  # (A1, B1, A2, B2) as MobiusMap
    lifts: tuple  # fixed SL2Matrix lifts of the generators
    vertices: tuple
    circumradius: float

    GENERATOR_LABELS = ("A1", "B1", "A2", "B2")

    def presentation(self):
        word = ((0, 1), (1, 1), (0, -1), (1, -1),
                (2, 1), (3, 1), (2, -1), (3, -1))
        return GroupPresentation(self.generators, (word,),
                                 labels=self.GENERATOR_LABELS)

    def relation_residual(self):
        return relation_residual(self.presentation())

    def lift_of_word(self, word) -> SL2Matrix:
        """SL2 lift of a word: product of the fixed generator lifts.

        `word` is a string over a, b, c, d (generators A1, B1, A2, B2) and
        A, B, C, D (their inverses), left to right.
        """
        m = SL2Matrix.identity()
        for letter in word:
            m = _mul(m, _LETTER(self, letter))
        return m


_LETTERS = "aAbBcCdD"


def _mul(m1: SL2Matrix, m2: SL2Matrix) -> SL2Matrix:
    """Product renormalized to det 1: long words of hyperbolic elements have
    large entries, and the raw determinant drifts at the roundoff scale of
    the squared entry size."""
    raw = m1.mat @ m2.mat
    return SL2Matrix.from_array(raw, require_unit_det=False).normalize()


def _LETTER(group: OctagonGroup, letter) -> SL2Matrix:
    try:
        pos = _LETTERS.index(letter)
    except ValueError:
        raise ValueError(f"unknown generator letter {letter!r}") from None
    lift = group.lifts[pos // 2]
    return lift if pos % 2 == 0 else lift.inv()


def build_octagon_group() -> OctagonGroup:
    """Regular octagon with vertex angle pi/4 (angle sum 2 pi), centered at
    0 with a vertex on the positive real axis.  The circumradius is found by
    root-finding; the four generators pair side k with side k + 2."""
    rho = brentq(lambda r: octagon_vertex_angle(r) - np.pi / 4,
                 0.5, 0.99, xtol=1e-15)
    v = [rho * np.exp(1j * np.pi * k / 4) for k in range(8)]
    # Sides are glued per the boundary word a1 b1 a1' b1' a2 b2 a2' b2'
    # (side k paired with side k+2, orientation reversed); the endpoint
    # correspondences below make [A1, B1][A2, B2] = 1 hold to ~1e-13,
    # which is verified at build time.
    raw = (
        _pair_map(v[3], v[2], v[0], v[1]),
        _pair_map(v[1], v[2], v[4], v[3]),
        _pair_map(v[7], v[6], v[4], v[5]),
        _pair_map(v[5], v[6], v[0], v[7]),
    )
    lifts = tuple(SL2Matrix.from_array(m).normalize() for m in raw)
    gens = tuple(MobiusMap(m) for m in lifts)
    group = OctagonGroup(generators=gens, lifts=lifts,
                         vertices=tuple(v), circumradius=rho)
    if group.relation_residual() > 1e-8:
        raise RuntimeError("octagon side pairing failed the relation check")
    for g in gens:
        if classify(g) != "loxodromic":
            raise RuntimeError("octagon generators must be hyperbolic")
    return group


@dataclass(frozen=True)
class GroupEnumeration:
    """Deduplicated elements representable by words of bounded length."""

    max_len: int
    words: tuple  # words as strings over a..D, identity = ""
    matrices: tuple  # SL2Matrix lifts, aligned with words

    def __len__(self):
        return len(self.words)


def enumerate_group(group: OctagonGroup, N, cap=ENUMERATION_CAP,
                    include_identity=True) -> GroupEnumeration:
    """Breadth-first enumeration over generator letters in the fixed order
    a, A, b, B, c, C, d, D, deduplicated up to PSL2 distance 1e-9."""
    if N > cap:
        raise ValueError(
            f"word length {N} exceeds the cap {cap} "
            f"(roughly {9 * 7 ** max(N - 1, 0)} words)")

    words = [""]
    mats = [SL2Matrix.identity()]
    # dedup buckets keyed by quantized tr^2 (sign-invariant); check the 3x3
    # neighborhood so nearly-equal traces on a cell boundary still collide
    scale = 1e6
    buckets = {}

    def key_of(m):
        tr2 = m.trace() ** 2
        return (round(tr2.real * scale), round(tr2.imag * scale))

    def seen(m):
        kx, ky = key_of(m)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for idx in buckets.get((kx + dx, ky + dy), ()):
                    other = mats[idx].mat
                    if min(np.linalg.norm(m.mat - other),
                           np.linalg.norm(m.mat + other)) <= 1e-9:
                        return True
        return False

    def insert(word, m):
        buckets.setdefault(key_of(m), []).append(len(words))
        words.append(word)
        mats.append(m)

    insert_identity_key = key_of(mats[0])
    buckets[insert_identity_key] = [0]

    frontier = [("", SL2Matrix.identity())]
    inverse_letter = {a: b for a, b in zip(_LETTERS, "AaBbCcDd")}
    for _ in range(N):
        new_frontier = []
        for word, m in frontier:
            for letter in _LETTERS:
                if word and inverse_letter[word[-1]] == letter:
                    continue  # free reduction
                m2 = _mul(m, _LETTER(group, letter))
                if seen(m2):
                    continue
                w2 = word + letter
                insert(w2, m2)
                new_frontier.append((w2, m2))
        frontier = new_frontier

    if not include_identity:
        words, mats = words[1:], mats[1:]
    return GroupEnumeration(max_len=N, words=tuple(words), matrices=tuple(mats))


class ThetaDifferential:
    """Truncated Poincare series of a polynomial seed:

        Theta_N(t) = sum over words |w| <= N of p(L_w t) L_w'(t)^2.

    Approximates a weight-4 automorphic form (quadratic differential); the
    truncation diverges near the unit circle, so evaluation is restricted to
    |t| <= DISC_CLIP.
    """

    def __init__(self, group: OctagonGroup, seed_coeffs, N, cap=ENUMERATION_CAP):
        seed_coeffs = np.atleast_1d(np.asarray(seed_coeffs, dtype=complex))
        if len(seed_coeffs) - 1 > SEED_DEGREE_CAP:
            raise ValueError(f"seed degree exceeds {SEED_DEGREE_CAP}")
        self.group = group
        self.seed = seed_coeffs
        self.N = N
        enum = enumerate_group(group, N, cap=cap)
        entries = np.array([m.mat for m in enum.matrices])  # (n, 2, 2)
        self._a = entries[:, 0, 0]
        self._b = entries[:, 0, 1]
        self._c = entries[:, 1, 0]
        self._d = entries[:, 1, 1]
        self.n_terms = len(enum)

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        if np.any(np.abs(t) > DISC_CLIP + 1e-12):
            raise ValueError(f"theta evaluation restricted to |t| <= {DISC_CLIP}")
        flat = t.reshape(-1)  # (m,)
        den = self._c[:, None] * flat[None, :] + self._d[:, None]  # (n, m)
        image = (self._a[:, None] * flat[None, :] + self._b[:, None]) / den
        deriv2 = 1.0 / den ** 4  # L'(t)^2 with det-1 lifts
        vals = P.polyval(image, self.seed) * deriv2
        return vals.sum(axis=0).reshape(t.shape)

    def sup_norm_estimate(self, n_radial=12, n_angular=48, rmax=DISC_CLIP):
        """Weighted sup-norm estimate sup (1 - |t|^2)^2 |Theta(t)| on a
        polar sample grid."""
        r = np.linspace(0.05, rmax, n_radial)
        ang = np.linspace(0.0, 2.0 * np.pi, n_angular, endpoint=False)
        t = (r[:, None] * np.exp(1j * ang[None, :])).reshape(-1)
        w = (1.0 - np.abs(t) ** 2) ** 2
        return float(np.max(w * np.abs(self(t))))


def theta_series(group: OctagonGroup, seed_coeffs, N, cap=ENUMERATION_CAP):
    return ThetaDifferential(group, seed_coeffs, N, cap=cap)


def automorphy_residual(theta: ThetaDifferential, grid_radius=0.5, n_grid=100,
                        rng=None):
    """max over the generators L and grid points t of
    |Theta(L t) L'(t)^2 - Theta(t)|; decreases with the truncation order."""
    rng = np.random.default_rng(0) if rng is None else rng
    t = (np.sqrt(rng.uniform(0.0, 1.0, n_grid)) * grid_radius
         * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n_grid)))
    worst = 0.0
    base = theta(t)
    for lift in theta.group.lifts:
        a, b, c, d = lift.a, lift.b, lift.c, lift.d
        image = (a * t + b) / (c * t + d)
        deriv2 = 1.0 / (c * t + d) ** 4
        # image points escaping the clipped disc are not evaluable; skip them
        keep = np.abs(image) <= DISC_CLIP
        if not np.any(keep):
            continue
        diff = theta(image[keep]) * deriv2[keep] - base[keep]
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def holomorphy_residual(theta: ThetaDifferential, centers=(0.1 + 0.05j, -0.2j, 0.3),
                        radius=0.05, n=64):
    """Circle-mean test: for holomorphic Theta the average over a small
    circle equals the center value."""
    worst = 0.0
    ang = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    for c in centers:
        circle = c + radius * np.exp(1j * ang)
        worst = max(worst, abs(np.mean(theta(circle)) - theta(np.array(c)).item()))
    return worst


def xi_factor(lift: SL2Matrix, t):
    """Automorphy factor xi_L(t) = 1/(c t + d) = sqrt(L'(t)) for the fixed
    SL2 lift; multiplicative in the lift, so the cocycle is exact."""
    return 1.0 / (lift.c * t + lift.d)


def three_point_mobius(p, q) -> MobiusMap:
    """Mobius map sending p[i] -> q[i] for three points, by the classical
    determinant formulas."""
    p1, p2, p3 = p
    q1, q2, q3 = q
    a = np.linalg.det(np.array([[p1 * q1, q1, 1], [p2 * q2, q2, 1],
                                [p3 * q3, q3, 1]]))
    b = np.linalg.det(np.array([[p1 * q1, p1, q1], [p2 * q2, p2, q2],
                                [p3 * q3, p3, q3]]))
    c = np.linalg.det(np.array([[p1, q1, 1], [p2, q2, 1], [p3, q3, 1]]))
    d = np.linalg.det(np.array([[p1 * q1, p1, 1], [p2 * q2, p2, 1],
                                [p3 * q3, p3, 1]]))
    det = a * d - b * c
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if scale == 0 or abs(det) < 1e-12 * scale ** 2:
        raise FitError("three-point configuration is degenerate")
    return MobiusMap.from_entries(a, b, c, d)


def developing_monodromy(group: OctagonGroup, theta, word, t0=0.1 + 0.05j,
                         tol=1e-10, offset=0.05):
    """Monodromy image rho(L) of the developing map z of {z, t} = 2 Theta,
    normalized at t0, for the group element L given by `word`.

    Primary route: solve u'' + Theta u = 0 from t0 to three nearby points
    t_i and to their images L t_i, and fit the Mobius map from
    z(L t_i) = rho(L)(z(t_i)).  Cross-check route: continue the pair to
    L t0 and read the matrix of the pair automorphy with the SL2-lift
    factor xi_L.  Returns (rho_fit, rho_matrix).
    """
    lift = group.lift_of_word(word)
    L = MobiusMap(lift)
    field = CoefficientField(theta, basis=())
    Lt0 = L(t0)
    if abs(Lt0) > DISC_CLIP:
        raise ValueError("image basepoint leaves the clipped disc")

    samples = [t0 + offset, t0 + offset * 1j, t0 - offset * (0.6 + 0.8j)]
    zs, zLs = [], []
    for ti in samples:
        pi = integrate_pair(field, None, Path.line(t0, ti), tol)
        if abs(pi.u) < 1e-12:
            raise FitError("developing map has a pole at a sample point")
        zs.append(pi.z())
        Lti = L(ti)
        if abs(Lti) > DISC_CLIP:
            raise ValueError("image sample point leaves the clipped disc")
        path = Path.polyline([t0, Lt0, Lti])
        pL = integrate_pair(field, None, path, tol)
        if abs(pL.u) < 1e-12:
            raise FitError("developing map has a pole at an image point")
        zLs.append(pL.z())
    rho_fit = three_point_mobius(zs, zLs)

    # matrix route from the pair automorphy at t0
    pe = integrate_pair(field, None, Path.line(t0, Lt0), tol)
    xi = xi_factor(lift, t0)
    xi_prime = -lift.c / (lift.c * t0 + lift.d) ** 2
    Lp = 1.0 / (lift.c * t0 + lift.d) ** 2
    beta = pe.v / xi
    delta = pe.u / xi
    alpha = (pe.vp * Lp - xi_prime * beta) / xi
    gamma = (pe.up * Lp - xi_prime * delta) / xi
    rho_matrix = MobiusMap.from_entries(alpha, beta, gamma, delta)
    return rho_fit, rho_matrix
