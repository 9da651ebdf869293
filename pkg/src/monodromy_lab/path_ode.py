"""Paths in the complex plane and adaptive integration of u'' + Q(t, h) u = 0.

The normalized fundamental pair (v, u) satisfies u(t0) = 1, u'(t0) = 0,
v(t0) = 0, v'(t0) = 1, so its Wronskian u v' - v u' is identically 1.  All
matrix frames downstream act on the column (v, u), v on top.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .mobius import SL2Matrix

DEFAULT_TOL = 1e-10
CONTIGUITY_TOL = 1e-12
CLEARANCE_FACTOR = 1e-3


class ContourError(ValueError):
    """Path runs too close to a pole of the coefficient."""


class StiffnessError(RuntimeError):
    """Adaptive step size underflowed."""


@dataclass(frozen=True)
class LineSegment:
    start: complex
    end: complex

    def point(self, s):
        return self.start + (self.end - self.start) * s

    def velocity(self, s):
        return self.end - self.start

    def length(self):
        return abs(self.end - self.start)

    def to_dict(self):
        return {"line": [[self.start.real, self.start.imag],
                         [self.end.real, self.end.imag]]}


@dataclass(frozen=True)
class ArcSegment:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, s):
        theta = self.theta0 + (self.theta1 - self.theta0) * s
        return self.center + self.radius * np.exp(1j * theta)

    def velocity(self, s):
        dtheta = self.theta1 - self.theta0
        theta = self.theta0 + dtheta * s
        return 1j * dtheta * self.radius * np.exp(1j * theta)

    def length(self):
        return self.radius * abs(self.theta1 - self.theta0)

    def to_dict(self):
        return {"arc": {"center": [self.center.real, self.center.imag],
                        "radius": self.radius,
                        "theta0": self.theta0, "theta1": self.theta1}}

    @property
    def start(self):
        return self.point(0.0)

    @property
    def end(self):
        return self.point(1.0)


def _segment_from_dict(d):
    if "line" in d:
        (x0, y0), (x1, y1) = d["line"]
        return LineSegment(complex(x0, y0), complex(x1, y1))
    if "arc" in d:
        a = d["arc"]
        return ArcSegment(complex(*a["center"]), float(a["radius"]),
                          float(a["theta0"]), float(a["theta1"]))
    raise ValueError(f"unknown segment kind: {sorted(d)}")


class Path:
    """Piecewise path (lines and circular arcs) from a basepoint t0."""

    def __init__(self, t0, segments):
        self.t0 = complex(t0)
        self.segments = tuple(segments)
        if not self.segments:
            raise ValueError("path needs at least one segment")
        if abs(complex(self.segments[0].start) - self.t0) > CONTIGUITY_TOL:
            raise ValueError("first segment does not start at t0")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(complex(a.end) - complex(b.start)) > CONTIGUITY_TOL:
                raise ValueError("segments are not contiguous")

    @classmethod
    def line(cls, t0, t1):
        return cls(t0, [LineSegment(complex(t0), complex(t1))])

    @classmethod
    def polyline(cls, points):
        pts = [complex(p) for p in points]
        return cls(pts[0], [LineSegment(a, b) for a, b in zip(pts, pts[1:])])

    @property
    def endpoint(self):
        return complex(self.segments[-1].end)

    def length(self):
        return sum(seg.length() for seg in self.segments)

    def reversed(self):
        segs = []
        for seg in reversed(self.segments):
            if isinstance(seg, LineSegment):
                segs.append(LineSegment(seg.end, seg.start))
            else:
                segs.append(ArcSegment(seg.center, seg.radius,
                                       seg.theta1, seg.theta0))
        return Path(self.endpoint, segs)

    def concat(self, other):
        if abs(self.endpoint - other.t0) > CONTIGUITY_TOL:
            raise ValueError("paths do not join")
        return Path(self.t0, self.segments + other.segments)

    def sample(self, per_segment=64):
        s = np.linspace(0.0, 1.0, per_segment)
        return np.concatenate([np.asarray(seg.point(s)) for seg in self.segments])

    def min_distance_to(self, points):
        if not points:
            return np.inf
        samples = self.sample()
        pts = np.asarray(points, dtype=complex)
        return np.min(np.abs(samples[:, None] - pts[None, :]))

    def is_closed(self):
        return abs(self.endpoint - self.t0) <= CONTIGUITY_TOL

    def to_dict(self):
        d = {"t0": [self.t0.real, self.t0.imag],
             "segments": [seg.to_dict() for seg in self.segments]}
        if self.is_closed():
            d["closed"] = True
        return d

    @classmethod
    def from_dict(cls, d):
        t0 = complex(*d["t0"])
        segments = [_segment_from_dict(s) for s in d["segments"]]
        path = cls(t0, segments)
        if d.get("closed"):
            return Loop(t0, segments)
        return path


class Loop(Path):
    """Closed path: final point returns to t0."""

    def __init__(self, t0, segments):
        super().__init__(t0, segments)
        if not self.is_closed():
            raise ValueError("loop does not close up")

    @classmethod
    def circle(cls, center, radius, t0_angle=0.0, turns=1):
        center = complex(center)
        arcs = []
        per_turn = 4  # quarter arcs keep the parametrization mild
        n = per_turn * abs(turns)
        sign = 1.0 if turns > 0 else -1.0
        step = sign * 2.0 * np.pi / per_turn
        for k in range(n):
            arcs.append(ArcSegment(center, radius,
                                   t0_angle + k * step, t0_angle + (k + 1) * step))
        return cls(center + radius * np.exp(1j * t0_angle), arcs)


class CoefficientField:
    """Q(t, h) = r(t) + sum_j h_j q_j(t) with callable components.

    Components may be RationalFn (poles known) or arbitrary analytic
    evaluators (no pole data).
    """

    def __init__(self, r, basis=()):
        self.r = r
        self.basis = tuple(basis)

    @property
    def d(self):
        return len(self.basis)

    def poles(self):
        out = []
        for comp in (self.r, *self.basis):
            out.extend(getattr(comp, "poles", ()))
        return out

    def evaluate(self, t, h=None):
        val = complex(self.r(t))
        if h is not None:
            for hj, qj in zip(h, self.basis):
                if hj != 0:
                    val += hj * complex(qj(t))
        return val

    def at(self, h):
        """Freeze the parameters: scalar evaluator t -> Q(t, h)."""
        return lambda t: self.evaluate(t, h)


@dataclass(frozen=True)
class FundamentalPair:
    """Values of the normalized pair and their derivatives at a path point."""

    t: complex
    v: complex
    vp: complex
    u: complex
    up: complex

    def wronskian(self):
        return self.u * self.vp - self.v * self.up

    def z(self):
        return self.v / self.u


def check_clearance(field: CoefficientField, path: Path):
    poles = field.poles()
    clearance = CLEARANCE_FACTOR * path.length()
    dist = path.min_distance_to(poles)
    if dist < clearance:
        raise ContourError(
            f"path comes within {dist:.3e} of a coefficient pole "
            f"(clearance {clearance:.3e})")


def integrate_system(Q, path, tol, extra_rhs=None, n_extra=0, record_mesh=False,
                     init=None):
    """Integrate the first-order system for (v, v', u, u') along the path,
    optionally coupled with extra complex states.

    Q: scalar evaluator t -> coefficient of the equation u'' + Q u = 0.
    extra_rhs(t, y4, extra) -> d(extra)/dt, where y4 = (v, v', u, u').
    init: Cauchy data (v, v', u, u') at the path start; defaults to the
    normalized pair (0, 1, 1, 0).
    Returns (y_final, mesh) with mesh a list of (t, state) at accepted steps
    when record_mesh is set, else None.
    """
    y = np.zeros(4 + n_extra, dtype=complex)
    y[:4] = (0.0, 1.0, 1.0, 0.0) if init is None else init
    mesh = [(path.t0, y.copy())] if record_mesh else None

    for seg in path.segments:
        def rhs(s, y, _seg=seg):
            t = _seg.point(s)
            dt = _seg.velocity(s)
            q = Q(t)
            out = np.empty_like(y)
            out[0] = y[1]
            out[1] = -q * y[0]
            out[2] = y[3]
            out[3] = -q * y[2]
            if extra_rhs is not None:
                out[4:] = extra_rhs(t, y[:4], y[4:])
            return out * dt

        sol = solve_ivp(rhs, (0.0, 1.0), y, method="DOP853",
                        rtol=tol, atol=tol, dense_output=False)
        if not sol.success:
            raise StiffnessError(f"integration failed on segment {seg}: {sol.message}")
        y = sol.y[:, -1]
        if record_mesh:
            for k, s in enumerate(sol.t[1:], start=1):
                mesh.append((complex(seg.point(s)), sol.y[:, k].copy()))
    return y, mesh


def integrate_pair(field: CoefficientField, h, path: Path, tol=DEFAULT_TOL,
                   record_mesh=False):
    """Normalized fundamental pair at the path endpoint.

    Raises ContourError if the path violates the pole clearance and
    StiffnessError on step-size underflow.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    check_clearance(field, path)
    y, mesh = integrate_system(field.at(h), path, tol, record_mesh=record_mesh)
    pair = FundamentalPair(path.endpoint, y[0], y[1], y[2], y[3])
    if record_mesh:
        pairs = [FundamentalPair(t, *state[:4]) for t, state in mesh]
        return pair, pairs
    return pair


def transfer_matrix(field: CoefficientField, h, path: Path, tol=DEFAULT_TOL) -> SL2Matrix:
    """Propagator in (value, derivative) coordinates: maps (y, y') at the
    start of the path to (y, y') at the end.  Columns are the endpoint data
    of (u, u') and (v, v'); det = 1 up to integration error (Abel)."""
    p = integrate_pair(field, h, path, tol)
    return SL2Matrix(p.u, p.v, p.up, p.vp, require_unit_det=False)


def monodromy(field: CoefficientField, h, loop: Loop, tol=DEFAULT_TOL) -> SL2Matrix:
    """Monodromy matrix M acting on the column (v, u): the continuation of
    (v, u) around the loop equals M (v, u)."""
    if not isinstance(loop, Loop) and not loop.is_closed():
        raise ValueError("monodromy needs a closed loop")
    p = integrate_pair(field, h, loop, tol)
    # continued v has Cauchy data (p.v, p.vp) at t0, i.e. equals p.vp*v + p.v*u
    return SL2Matrix(p.vp, p.v, p.up, p.u, require_unit_det=False)
