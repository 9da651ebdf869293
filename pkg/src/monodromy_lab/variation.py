"""Variational formulas: exact perturbation series for monodromy matrices,
the first variation of the developing map z = v/u, and the conjugation
(Prym) identity for the iterated-integral kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrizant import MatrizantSeries, compute_series
from .mobius import MobiusMap, SL2Matrix
from .path_ode import (DEFAULT_TOL, CoefficientField, FundamentalPair, Loop,
                       Path, StiffnessError, check_clearance, integrate_system)

ROUNDOFF_FLOOR_FACTOR = 1e2


class MissingAutomorphyError(RuntimeError):
    """Conjugation-identity check needs the automorphy matrix of the pair
    under the group element, and none was supplied."""


class DevelopingPoleError(ZeroDivisionError):
    """z = v/u has a pole at the evaluation point; the first variation is
    undefined in this chart."""


def _frame_init(frame):
    """Cauchy data of the frame-changed pair: for C = [[a, b], [c, d]] the
    new pair is (a v + b u, c v + d u), with data (b, a, d, c)."""
    if frame is None:
        return None
    return (frame.b, frame.a, frame.d, frame.c)


def _monodromy_from_data(pair: FundamentalPair, frame) -> SL2Matrix:
    """Monodromy acting on the (v, u) column, from endpoint Cauchy data of
    a loop integration started with the given frame."""
    D = SL2Matrix(pair.vp, pair.v, pair.up, pair.u, require_unit_det=False)
    if frame is None:
        return D
    Dinv = frame.inv()
    raw = D.mat @ Dinv.mat
    return SL2Matrix.from_array(raw, require_unit_det=False)


@dataclass(frozen=True)
class MonodromyFamily:
    """Monodromy of u'' + Q(t, h) u = 0 around a fixed loop, as an exact
    polynomial family M(h) = Omega(h) M(0) through total degree N."""

    base: SL2Matrix
    series: MatrizantSeries
    frame: SL2Matrix | None  # None = normalized (v, u) frame

    @property
    def d(self):
        return self.series.d

    @property
    def N(self):
        return self.series.N

    def __call__(self, h) -> SL2Matrix:
        omega = self.series.evaluate_omega(np.atleast_1d(h))
        return SL2Matrix.from_array(omega @ self.base.mat,
                                    require_unit_det=False)


def monodromy_family(field: CoefficientField, loop: Loop, N, tol=DEFAULT_TOL,
                     frame: SL2Matrix | None = None) -> MonodromyFamily:
    """One coupled integration of the unperturbed pair and all coefficients
    through total degree N around the loop."""
    if not isinstance(loop, Loop) and not loop.is_closed():
        raise ValueError("monodromy family needs a closed loop")
    series = compute_series(field, loop, N, tol, init=_frame_init(frame))
    base = _monodromy_from_data(series.endpoint_pair, frame)
    return MonodromyFamily(base=base, series=series, frame=frame)


def direct_monodromy(field: CoefficientField, h, loop: Loop, tol=DEFAULT_TOL,
                     frame: SL2Matrix | None = None) -> SL2Matrix:
    """Monodromy at a concrete parameter value by fresh integration (the
    oracle side of the series audits; never uses the series)."""
    check_clearance(field, loop)
    y, _ = integrate_system(field.at(np.atleast_1d(h)), loop, tol,
                            init=_frame_init(frame))
    pair = FundamentalPair(loop.endpoint, y[0], y[1], y[2], y[3])
    return _monodromy_from_data(pair, frame)


@dataclass(frozen=True)
class ConvergenceReport:
    """Series-vs-direct errors over an h grid with a fitted order."""

    N: int
    rows: tuple  # (h tuple, |h|, error) per successfully integrated sample
    fitted_order: float
    flags: tuple

    def passed(self):
        if "degenerate" in self.flags:
            return True
        return bool(np.isfinite(self.fitted_order)
                    and self.fitted_order >= self.N + 0.7)

    def table(self, sep="\t"):
        lines = [sep.join(("h", "error", "fitted_order"))]
        for h, hnorm, err in self.rows:
            hs = ";".join(f"{x.real:.6g}{x.imag:+.6g}j" for x in h)
            lines.append(sep.join((hs, f"{err:.6e}", f"{self.fitted_order:.3f}")))
        return "\n".join(lines)

    def to_dict(self):
        return {
            "N": self.N,
            "rows": [{"h": [[x.real, x.imag] for x in h],
                      "h_norm": hnorm, "error": err}
                     for h, hnorm, err in self.rows],
            "fitted_order": self.fitted_order,
            "flags": list(self.flags),
            "passed": self.passed(),
        }


def verify_monodromy_family(field: CoefficientField, loop: Loop, N, h_samples,
                            tol=DEFAULT_TOL, frame: SL2Matrix | None = None
                            ) -> ConvergenceReport:
    """Audit the degree-N family against direct re-integration on an h grid.

    Each sample is a scalar (spread evenly over all parameters) or a full
    d-vector.  The fitted order is the log-log slope of error against |h|;
    the family passes when it reaches N + 0.7.  Samples where direct
    integration fails are dropped and flagged.
    """
    family = monodromy_family(field, loop, N, tol, frame=frame)
    rows, flags = [], []
    for sample in h_samples:
        h = np.atleast_1d(np.asarray(sample, dtype=complex))
        if h.shape == (1,) and field.d > 1:
            h = np.full(field.d, h[0])
        try:
            direct = direct_monodromy(field, h, loop, tol, frame=frame)
        except StiffnessError as exc:
            flags.append(f"direct integration failed at |h|={np.max(np.abs(h)):.3g}: {exc}")
            continue
        err = float(np.linalg.norm(family(h).mat - direct.mat))
        rows.append((tuple(h), float(np.max(np.abs(h))), err))

    floor = ROUNDOFF_FLOOR_FACTOR * tol
    if rows and all(err <= floor for _, _, err in rows):
        flags.append("degenerate")
        fitted = float("nan")
    elif len(rows) >= 2:
        hn = np.log([r[1] for r in rows])
        en = np.log([max(r[2], 1e-300) for r in rows])
        fitted = float(np.polyfit(hn, en, 1)[0])
    else:
        flags.append("too few successful samples to fit an order")
        fitted = float("nan")
    return ConvergenceReport(N=N, rows=tuple(rows), fitted_order=fitted,
                             flags=tuple(flags))


def first_variation_z(field: CoefficientField, path: Path, tol=DEFAULT_TOL):
    """Coefficients c_i of z(t, h) = z(t, 0) + sum_i h_i c_i + o(|h|):

        c_i = integral of q_i(s) (v(s) - z(t,0) u(s))^2 ds along the path.

    Read off the degree-1 series coefficients A = integral of q_i K: with
    z = v/u at the endpoint, c_i = A[0,1] - 2 z A[1,1] - z^2 A[1,0].
    """
    series = compute_series(field, path, 1, tol)
    pair = series.endpoint_pair
    if abs(pair.u) < 1e-12 * max(1.0, abs(pair.v)):
        raise DevelopingPoleError(
            "u vanishes at the endpoint; z = v/u has a pole there")
    z = pair.z()
    out = []
    for j in range(field.d):
        ej = tuple(1 if i == j else 0 for i in range(field.d))
        A = series.coeffs[ej]
        out.append(A[0, 1] - 2.0 * z * A[1, 1] - z * z * A[1, 0])
    return out


def plane_automorphy(L: MobiusMap, t0) -> SL2Matrix:
    """Automorphy matrix of the normalized pair for the trivial equation
    u'' = 0 (v = t - t0, u = 1) under the Mobius change of variable L:
    (v, u)(L t) = xi(t) M (v, u)(t) with xi = 1/(c t + d)."""
    a, b, c, d = L.rep.a, L.rep.b, L.rep.c, L.rep.d
    alpha = a - t0 * c
    return SL2Matrix(alpha, b - t0 * d + alpha * t0, c, d + c * t0)


def _image_polyline(L: MobiusMap, path: Path, samples_per_segment=24) -> Path:
    """Polyline through the L-images of sample points of the path.  A valid
    stand-in for the true image path whenever the integrand is holomorphic
    between the two (path-independence within the homotopy class)."""
    pts = [L(path.t0)]
    for seg in path.segments:
        for s in np.linspace(0.0, 1.0, samples_per_segment + 1)[1:]:
            pts.append(L(seg.point(s)))
    return Path.polyline(pts)


def conjugation_identity_residual(field: CoefficientField, L: MobiusMap,
                                  path: Path, tol=DEFAULT_TOL,
                                  automorphy: SL2Matrix | None = None,
                                  image_path: Path | None = None,
                                  samples_per_segment=24):
    """Residual of the conjugation law for the degree-1 kernel integrals:

        [A0(L t) - A0(L t0)] = M_L A0(t) M_L^{-1},

    A0(t) = integral from t0 to t of q(s) [[-uv, v^2], [-u^2, uv]] ds, and
    M_L the pair-automorphy matrix.  The left side integrates the continued
    pair along the chord t0 -> L t0 followed by the image path (default: a
    polyline homotopic to L . path, starting at L t0).  Returns the max
    residual over the d parameter directions; small iff q transforms as a
    quadratic differential under L.
    """
    if automorphy is None:
        if L.dist(MobiusMap.identity()) <= 1e-14:
            automorphy = SL2Matrix.identity()
        else:
            raise MissingAutomorphyError(
                "supply the automorphy matrix of the pair under L "
                "(e.g. from the developing-monodromy matrix route)")
    if field.d == 0:
        raise ValueError("field has no perturbation directions to test")

    base = compute_series(field, path, 1, tol)
    if image_path is None:
        image_path = _image_polyline(L, path, samples_per_segment)
    prefix = Path.line(path.t0, L(path.t0))
    at_image_start = compute_series(field, prefix, 1, tol)
    full = compute_series(field, prefix.concat(image_path), 1, tol)

    M = automorphy.mat
    Minv = automorphy.inv().mat
    worst = 0.0
    for j in range(field.d):
        ej = tuple(1 if i == j else 0 for i in range(field.d))
        lhs = full.coeffs[ej] - at_image_start.coeffs[ej]
        rhs = M @ base.coeffs[ej] @ Minv
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst
