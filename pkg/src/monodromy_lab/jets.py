"""Truncated Taylor (jet) arithmetic, the Schwarzian derivative, and the
dictionary between a locally injective analytic map z and its normalized
solution pair (v, u) with z = v/u, v = z/sqrt(z'), u = 1/sqrt(z').

Convention: the coefficient of the second-order equation is q with
{z, t} = 2 q(t), i.e. q is half the Schwarzian of the developing map.
"""

from __future__ import annotations

import cmath

import numpy as np
from numpy.polynomial import polynomial as P


class SingularJetError(ZeroDivisionError):
    pass


class BranchAmbiguityError(ValueError):
    pass


class CriticalPointError(ValueError):
    pass


class Jet:
    """Truncated Taylor expansion sum c_n (t - basepoint)^n, n = 0..K."""

    __slots__ = ("basepoint", "coeffs")

    def __init__(self, basepoint, coeffs):
        self.basepoint = complex(basepoint)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if self.coeffs.ndim != 1 or len(self.coeffs) == 0:
            raise ValueError("jet needs a nonempty 1-d coefficient array")

    @property
    def order(self):
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, value, basepoint=0.0, order=0):
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(basepoint, c)

    @classmethod
    def variable(cls, basepoint, order):
        """Jet of the identity map t at the basepoint."""
        c = np.zeros(order + 1, dtype=complex)
        c[0] = basepoint
        if order >= 1:
            c[1] = 1.0
        return cls(basepoint, c)

    def _check_base(self, other):
        if abs(self.basepoint - other.basepoint) > 1e-12:
            raise ValueError("jets have different basepoints")

    def _trunc(self, other):
        k = min(self.order, other.order)
        return self.coeffs[:k + 1], other.coeffs[:k + 1], k

    def __add__(self, other):
        if not isinstance(other, Jet):
            c = self.coeffs.copy()
            c[0] += other
            return Jet(self.basepoint, c)
        self._check_base(other)
        a, b, _ = self._trunc(other)
        return Jet(self.basepoint, a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.basepoint, -self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.basepoint, self.coeffs * other)
        self._check_base(other)
        a, b, k = self._trunc(other)
        return Jet(self.basepoint, P.polymul(a, b)[:k + 1])

    __rmul__ = __mul__

    def inverse(self):
        """Reciprocal jet 1/f; requires f(basepoint) != 0."""
        if self.coeffs[0] == 0:
            raise SingularJetError("reciprocal of a jet with zero constant term")
        k = self.order
        out = np.zeros(k + 1, dtype=complex)
        out[0] = 1.0 / self.coeffs[0]
        for n in range(1, k + 1):
            out[n] = -np.dot(self.coeffs[1:n + 1], out[n - 1::-1]) / self.coeffs[0]
        return Jet(self.basepoint, out)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.basepoint, self.coeffs / other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def sqrt(self, seed=None):
        """Square root jet.  `seed` picks the branch: of the two roots of the
        constant term, the one closer to `seed` is used, so a path follower
        can pass the previous endpoint value to keep the branch continuous.
        Without a seed the principal root is used, but only when the constant
        term is away from the branch cut."""
        c0 = self.coeffs[0]
        if c0 == 0:
            raise SingularJetError("sqrt of a jet with zero constant term")
        root = cmath.sqrt(c0)
        if seed is None:
            if c0.real <= 0 and abs(c0.imag) < 1e-12 * abs(c0):
                raise BranchAmbiguityError(
                    "constant term on the branch cut; pass an explicit seed")
            seed = root
        else:
            if abs(seed - root) == abs(seed + root):
                raise BranchAmbiguityError("seed is equidistant from both roots")
            seed = root if abs(seed - root) < abs(seed + root) else -root
        k = self.order
        out = np.zeros(k + 1, dtype=complex)
        out[0] = seed
        for n in range(1, k + 1):
            acc = np.dot(out[1:n], out[n - 1:0:-1]) if n >= 2 else 0.0
            out[n] = (self.coeffs[n] - acc) / (2.0 * seed)
        return Jet(self.basepoint, out)

    def derive(self):
        """Derivative jet (one order lower)."""
        if self.order == 0:
            return Jet(self.basepoint, [0.0])
        k = np.arange(1, self.order + 1)
        return Jet(self.basepoint, self.coeffs[1:] * k)

    def compose(self, inner):
        """Jet of self o inner at inner's basepoint.

        Requires inner(basepoint) to coincide with self's basepoint.
        """
        if abs(inner.coeffs[0] - self.basepoint) > 1e-9:
            raise ValueError("inner jet value does not match outer basepoint")
        k = min(self.order, inner.order)
        shifted = inner.coeffs[:k + 1].copy()
        shifted[0] = 0.0
        # Horner evaluation of sum c_n * shifted^n, truncated at order k
        out = np.zeros(k + 1, dtype=complex)
        out[0] = self.coeffs[k]
        for n in range(k - 1, -1, -1):
            out = P.polymul(out, shifted)[:k + 1]
            if len(out) < k + 1:
                out = np.pad(out, (0, k + 1 - len(out)))
            out[0] += self.coeffs[n]
        return Jet(inner.basepoint, out)

    def __call__(self, t):
        return P.polyval(np.asarray(t) - self.basepoint, self.coeffs)

    def __repr__(self):
        return f"Jet(basepoint={self.basepoint}, coeffs={list(self.coeffs)})"


def mobius_jet(m, basepoint, order):
    """Jet of a MobiusMap at a regular point."""
    t = Jet.variable(basepoint, order)
    num = m.rep.a * t + m.rep.b
    den = m.rep.c * t + m.rep.d
    if abs(den.coeffs[0]) == 0:
        raise SingularJetError("basepoint is the pole of the Mobius map")
    return num / den


def schwarzian(f: Jet) -> complex:
    """Schwarzian derivative {f, t} = (f''/f')' - (f''/f')^2 / 2 at the
    basepoint; requires order >= 3 and f'(basepoint) != 0."""
    if f.order < 3:
        raise ValueError("schwarzian needs a jet of order >= 3")
    d1 = f.coeffs[1]
    if d1 == 0:
        raise CriticalPointError("f'(basepoint) = 0")
    d2 = 2.0 * f.coeffs[2]
    d3 = 6.0 * f.coeffs[3]
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def pair_from_z(z: Jet, branch_seed=None):
    """Split z into (v, u) with v = z / sqrt(z'), u = 1 / sqrt(z').

    `branch_seed` picks the square root of z'(basepoint); along a path the
    caller should seed each step with the previous endpoint value so the
    branch stays continuous.
    """
    zp = z.derive()
    if zp.coeffs[0] == 0:
        raise CriticalPointError("z'(basepoint) = 0")
    s = zp.sqrt(branch_seed)
    u = s.inverse()
    return z * u, u


def z_from_pair(v: Jet, u: Jet) -> Jet:
    return v / u


def normalization_check_eq5(z: Jet) -> float:
    """Residual |c0| + |c1 - 1| + |c2| of the normalization
    z = (t - t0) + O((t - t0)^3); zero iff normalized."""
    if z.order < 2:
        raise ValueError("need a jet of order >= 2")
    c = z.coeffs
    return abs(c[0]) + abs(c[1] - 1.0) + abs(c[2])


class RationalFn:
    """Rational function given by ascending numerator/denominator coefficients.

    Poles (denominator roots) are cached for contour-clearance checks.
    """

    __slots__ = ("num", "den", "poles")

    def __init__(self, num, den=(1.0,)):
        self.num = np.atleast_1d(np.asarray(num, dtype=complex))
        self.den = np.atleast_1d(np.asarray(den, dtype=complex))
        if not np.any(self.den):
            raise ZeroDivisionError("denominator is identically zero")
        if len(self.den) > 1:
            self.poles = tuple(P.polyroots(self.den))
        else:
            self.poles = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        return P.polyval(t, self.num) / P.polyval(t, self.den)

    def to_dict(self):
        return {
            "num": [[c.real, c.imag] for c in self.num],
            "den": [[c.real, c.imag] for c in self.den],
        }

    @classmethod
    def from_dict(cls, d):
        num = [complex(re, im) for re, im in d["num"]]
        den = [complex(re, im) for re, im in d.get("den", [[1.0, 0.0]])]
        return cls(num, den)

    def __repr__(self):
        return f"RationalFn(num={list(self.num)}, den={list(self.den)})"
