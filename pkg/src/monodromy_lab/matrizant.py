"""Iterated-integral (matrizant) series for the perturbed equation
u'' + [r(t) + sum_j h_j q_j(t)] u = 0.

The kernel of the series is the rank-one nilpotent matrix

    M_j(s) = q_j(s) [[-u v, v^2], [-u^2, u v]](s)

built from the unperturbed normalized pair.  The coefficient attached to a
multi-index k with |k| = n is

    B_k(t) = integral over t0..t of sum_{j: k_j != 0} B_{k - e_j}(s) M_j(s) ds,

with B_empty = I, so the matrizant is Omega(h) = I + sum_k B_k(endpoint) h^k
and (v, u)(t, h) = Omega(h) (v, u)(t) to all orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .path_ode import (CoefficientField, FundamentalPair, Path, check_clearance,
                       integrate_system)

COEFF_CAP = 20000


class CoefficientCapError(ValueError):
    """Requested multi-index family is too large."""


def multi_indices(d, n):
    """All multi-indices k >= 0 of length d with |k| = n, lexicographic."""
    if d == 0:
        return [()] if n == 0 else []
    if d == 1:
        return [(n,)]
    out = []
    for first in range(n + 1):
        for rest in multi_indices(d - 1, n - first):
            out.append((first,) + rest)
    return out


def graded_lex_indices(d, N):
    """Multi-indices with 1 <= |k| <= N in graded lexicographic order."""
    out = []
    for n in range(1, N + 1):
        out.extend(multi_indices(d, n))
    return out


def coefficient_count(d, N):
    return sum(comb(n + d - 1, d - 1) for n in range(1, N + 1))


def pair_kernel(v, u):
    """The matrix [[-u v, v^2], [-u^2, u v]]; trace 0 and square 0."""
    return np.array([[-u * v, v * v], [-u * u, u * v]], dtype=complex)


def kernel(field: CoefficientField, j, s, pair: FundamentalPair):
    """Kernel matrix M_j(s) for basis direction j at the point s, given the
    unperturbed pair values there."""
    return complex(field.basis[j](s)) * pair_kernel(pair.v, pair.u)


@dataclass(frozen=True)
class MatrizantSeries:
    """Coefficients B_k(endpoint) for all 1 <= |k| <= N, graded-lex order."""

    d: int
    N: int
    path: Path
    coeffs: dict  # multi-index tuple -> 2x2 complex ndarray
    endpoint_pair: FundamentalPair

    def evaluate_omega(self, h):
        """Omega(h) = I + sum_k coeffs[k] h^k."""
        h = np.asarray(h, dtype=complex)
        if h.shape != (self.d,):
            raise ValueError(f"h must have {self.d} components")
        omega = np.eye(2, dtype=complex)
        for k, mat in self.coeffs.items():
            hk = np.prod([hj ** kj for hj, kj in zip(h, k) if kj])
            omega = omega + mat * hk
        return omega

    def perturbed_pair(self, h, pair: FundamentalPair | None = None):
        """Order-N approximation of (v, u)(endpoint, h): Omega(h) (v, u)."""
        if pair is None:
            pair = self.endpoint_pair
        omega = self.evaluate_omega(h)
        v, u = omega @ np.array([pair.v, pair.u])
        return v, u

    def degree_norms(self):
        """Max Frobenius norm of the coefficients at each degree 1..N."""
        norms = np.zeros(self.N)
        for k, mat in self.coeffs.items():
            n = sum(k)
            norms[n - 1] = max(norms[n - 1], np.linalg.norm(mat))
        return norms

    def radius_estimate(self):
        """Empirical convergence-radius estimate from coefficient growth:
        1 / max_n ||A_n||^(1/n).  Heuristic only."""
        norms = self.degree_norms()
        rates = [norms[n - 1] ** (1.0 / n) for n in range(1, self.N + 1)
                 if norms[n - 1] > 0]
        if not rates:
            return np.inf
        return 1.0 / max(rates)

    def to_dict(self):
        entries = []
        for k in graded_lex_indices(self.d, self.N):
            m = self.coeffs[k]
            entries.append({
                "k": list(k),
                "m": [[[x.real, x.imag] for x in row] for row in m],
            })
        return {"d": self.d, "N": self.N, "coeffs": entries}


def compute_series(field: CoefficientField, path: Path, N, tol=1e-10,
                   cap=COEFF_CAP, init=None) -> MatrizantSeries:
    """Integrate all series coefficients jointly with the unperturbed pair
    as one coupled first-order system along the path (h = 0).

    init optionally replaces the normalized-pair Cauchy data (0, 1, 1, 0);
    the kernel then uses the alternate pair, so the coefficients come out
    conjugated by the corresponding frame change.
    """
    d = field.d
    if N < 0:
        raise ValueError("N must be >= 0")
    count = coefficient_count(d, N) if N > 0 else 0
    if count > cap:
        raise CoefficientCapError(
            f"{count} coefficients exceed the cap {cap}; lower N or d")
    check_clearance(field, path)

    idxs = graded_lex_indices(d, N)
    position = {k: p for p, k in enumerate(idxs)}
    # per coefficient: list of (j, predecessor position or None for |k| = 1)
    recursion = []
    for k in idxs:
        preds = []
        for j in range(d):
            if k[j] > 0:
                prev = tuple(k[i] - (1 if i == j else 0) for i in range(d))
                preds.append((j, position[prev] if sum(prev) > 0 else None))
        recursion.append(preds)

    def extra_rhs(t, y4, extra):
        v, u = y4[0], y4[2]
        K = pair_kernel(v, u)
        q = np.array([complex(qj(t)) for qj in field.basis])
        B = extra.reshape(count, 2, 2)
        out = np.empty_like(B)
        eye = np.eye(2, dtype=complex)
        for p, preds in enumerate(recursion):
            S = np.zeros((2, 2), dtype=complex)
            for j, prev in preds:
                S += q[j] * (eye if prev is None else B[prev])
            out[p] = S @ K
        return out.reshape(-1)

    y, _ = integrate_system(field.at(None), path, tol,
                            extra_rhs=extra_rhs if count else None,
                            n_extra=4 * count, init=init)
    endpoint_pair = FundamentalPair(path.endpoint, y[0], y[1], y[2], y[3])
    blocks = y[4:].reshape(count, 2, 2)
    coeffs = {k: blocks[p].copy() for p, k in enumerate(idxs)}
    return MatrizantSeries(d=d, N=N, path=path, coeffs=coeffs,
                           endpoint_pair=endpoint_pair)
