"""SL(2,C) / PSL(2,C) algebra, Mobius maps, group presentations and signatures.

Matrices are kept as plain 2x2 complex numpy arrays wrapped in light value
classes.  Everything here is pure and immutable after construction.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass, field

import numpy as np

DET_TOL = 1e-10
CLASSIFY_TOL = 1e-9

INF = complex("inf")


class MobiusError(ValueError):
    pass


def _as_matrix(a, b, c, d):
    m = np.array([[a, b], [c, d]], dtype=complex)
    if not np.all(np.isfinite(m.view(float))):
        raise MobiusError("non-finite matrix entries")
    return m


class SL2Matrix:
    """2x2 complex matrix with determinant 1 (up to DET_TOL after normalize)."""

    __slots__ = ("mat",)

    def __init__(self, a, b, c, d, require_unit_det=True):
        m = _as_matrix(a, b, c, d)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det == 0:
            raise MobiusError("singular matrix")
        # the computed determinant carries roundoff at the scale of the
        # squared entry size, so the unit-det check is relative to it
        scale = max(1.0, float(np.max(np.abs(m))) ** 2)
        if require_unit_det and abs(det - 1.0) > DET_TOL * scale:
            raise MobiusError(f"determinant {det} not within {DET_TOL * scale} of 1")
        self.mat = m
        self.mat.setflags(write=False)

    @classmethod
    def from_array(cls, m, require_unit_det=True):
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1],
                   require_unit_det=require_unit_det)

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    def normalize(self):
        """Rescale to determinant 1 (principal square root of det)."""
        det = np.linalg.det(self.mat)
        return SL2Matrix.from_array(self.mat / cmath.sqrt(det))

    @property
    def a(self):
        return self.mat[0, 0]

    @property
    def b(self):
        return self.mat[0, 1]

    @property
    def c(self):
        return self.mat[1, 0]

    @property
    def d(self):
        return self.mat[1, 1]

    def det(self):
        return self.mat[0, 0] * self.mat[1, 1] - self.mat[0, 1] * self.mat[1, 0]

    def trace(self):
        return self.mat[0, 0] + self.mat[1, 1]

    def inv(self):
        # adjugate; exact inverse for det 1
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other):
        return SL2Matrix.from_array(self.mat @ other.mat)

    def __neg__(self):
        return SL2Matrix.from_array(-self.mat)

    def __repr__(self):
        return f"SL2Matrix([[{self.a}, {self.b}], [{self.c}, {self.d}]])"


def compose(m1: SL2Matrix, m2: SL2Matrix) -> SL2Matrix:
    """Matrix product m1 @ m2."""
    return SL2Matrix.from_array(m1.mat @ m2.mat, require_unit_det=False)


def canonical_sign(m: np.ndarray) -> np.ndarray:
    """Pick the representative of {+m, -m} whose first nonzero entry in the
    scan (a, b, c) has argument in (-pi/2, pi/2].  Deterministic and
    idempotent."""
    for x in (m[0, 0], m[0, 1], m[1, 0]):
        if abs(x) > 0.0:
            theta = cmath.phase(x)
            if not (-np.pi / 2 < theta <= np.pi / 2):
                return -m
            return m
    return m


class MobiusMap:
    """Projective class of an SL2Matrix, with a canonical sign."""

    __slots__ = ("rep",)

    def __init__(self, rep: SL2Matrix):
        self.rep = SL2Matrix.from_array(canonical_sign(rep.mat))

    @classmethod
    def from_entries(cls, a, b, c, d):
        """Build from any invertible matrix; rescales to det 1."""
        raw = SL2Matrix(a, b, c, d, require_unit_det=False)
        return cls(raw.normalize())

    @classmethod
    def identity(cls):
        return cls(SL2Matrix.identity())

    def __matmul__(self, other):
        return MobiusMap(self.rep @ other.rep)

    def inv(self):
        return MobiusMap(self.rep.inv())

    def __call__(self, z):
        return apply(self, z)

    def derivative(self, z):
        """L'(z) = 1 / (c z + d)^2 for the det-1 representative."""
        den = self.rep.c * z + self.rep.d
        return 1.0 / (den * den)

    def dist(self, other) -> float:
        """PSL2 distance: min over signs of the Frobenius norm difference."""
        d1 = np.linalg.norm(self.rep.mat - other.rep.mat)
        d2 = np.linalg.norm(self.rep.mat + other.rep.mat)
        return min(d1, d2)

    def __repr__(self):
        return f"MobiusMap({self.rep!r})"


def apply(m: MobiusMap, z) -> complex:
    """Evaluate (az+b)/(cz+d) on the Riemann sphere.

    Conventions: apply(m, inf) = a/c (or inf if c = 0); the pole -d/c maps
    to inf.
    """
    a, b, c, d = m.rep.a, m.rep.b, m.rep.c, m.rep.d
    if z == INF or (isinstance(z, complex) and cmath.isinf(z)):
        return a / c if c != 0 else INF
    num = a * z + b
    den = c * z + d
    if den == 0:
        return INF
    return num / den


def classify(m: MobiusMap) -> str:
    """Classify a det-1 Mobius map by tr^2.

    Returns one of "identity", "parabolic", "elliptic", "loxodromic".
    """
    if abs(m.rep.det() - 1.0) > DET_TOL:
        raise MobiusError("classify requires det = 1")
    eye = np.eye(2)
    if min(np.linalg.norm(m.rep.mat - eye), np.linalg.norm(m.rep.mat + eye)) <= CLASSIFY_TOL:
        return "identity"
    tr2 = m.rep.trace() ** 2
    if abs(tr2 - 4.0) <= CLASSIFY_TOL:
        return "parabolic"
    if abs(tr2.imag) <= CLASSIFY_TOL and -CLASSIFY_TOL <= tr2.real < 4.0:
        return "elliptic"
    return "loxodromic"


@dataclass(frozen=True)
class Signature:
    """Signature (h, s; i_1, ..., i_m) of a Koebe-type group presentation."""

    h: int
    s: int
    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(int(i) for i in self.parts))
        if self.h < 0 or self.s < 0 or any(i < 0 for i in self.parts):
            raise ValueError("signature components must be nonnegative")

    def genus(self) -> int:
        return self.h + self.s + sum(self.parts)


def validate_signature(sigma: Signature, g: int):
    """Check |sigma| = g, every part != 1, and sigma != (0, 2; 0, ..., 0).

    Returns (ok, diagnostics) where diagnostics names each violated rule.
    """
    diagnostics = []
    if sigma.genus() != g:
        diagnostics.append(f"|sigma| = {sigma.genus()} does not equal g = {g}")
    bad = [i for i in sigma.parts if i == 1]
    if bad:
        diagnostics.append("signature parts equal to 1 are not allowed")
    if sigma.h == 0 and sigma.s == 2 and all(i == 0 for i in sigma.parts):
        diagnostics.append("the signature (0, 2; 0, ..., 0) is excluded")
    return (not diagnostics, diagnostics)


# A relator word is a tuple of (generator_index, exponent) with exponent +-1.

def _commutator_word(i, j):
    return ((i, 1), (j, 1), (i, -1), (j, -1))


def generator_labels(sigma: Signature):
    """Labels T1..Th, U1..U_{g-h}, V1..V_{g-h} in index order."""
    g = sigma.genus()
    n = g - sigma.h
    return ([f"T{k + 1}" for k in range(sigma.h)]
            + [f"U{k + 1}" for k in range(n)]
            + [f"V{k + 1}" for k in range(n)])


def koebe_relators(sigma: Signature):
    """Relator words of the standard presentation encoded by a signature.

    Generators are indexed T1..Th (0..h-1), U1..U_{g-h} (h..g-1),
    V1..V_{g-h} (g..2g-h-1).  Relators: one commutator [U_j, V_j] for each
    j <= s, then one product of i_l consecutive commutators for each part
    i_l, consuming the remaining (U, V) pairs in order.
    """
    g = sigma.genus()
    ok, diagnostics = validate_signature(sigma, g)
    if not ok:
        raise ValueError("invalid signature: " + "; ".join(diagnostics))
    n = g - sigma.h
    u0 = sigma.h  # index of U1
    v0 = sigma.h + n  # index of V1
    relators = []
    for j in range(sigma.s):
        relators.append(_commutator_word(u0 + j, v0 + j))
    pos = sigma.s
    for part in sigma.parts:
        word = ()
        for j in range(part):
            word += _commutator_word(u0 + pos + j, v0 + pos + j)
        if word:
            relators.append(word)
        pos += part
    return relators


@dataclass(frozen=True)
class GroupPresentation:
    """Ordered labeled generators plus relator words over their indices."""

    generators: tuple  # of MobiusMap
    relators: tuple = ()  # of words: tuples of (index, +-1)
    labels: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relators", tuple(tuple(w) for w in self.relators))
        if not self.labels:
            object.__setattr__(
                self, "labels",
                tuple(f"g{k}" for k in range(len(self.generators))))
        for word in self.relators:
            for idx, exp in word:
                if not 0 <= idx < len(self.generators):
                    raise ValueError(f"relator references generator {idx}")
                if exp not in (1, -1):
                    raise ValueError("relator exponents must be +-1")

    def evaluate_word(self, word) -> SL2Matrix:
        m = SL2Matrix.identity()
        for idx, exp in word:
            rep = self.generators[idx].rep
            m = m @ (rep if exp == 1 else rep.inv())
        return m


def relation_residual(p: GroupPresentation) -> float:
    """Max over relators of min(||W - I||_F, ||W + I||_F).

    Relators in PSL2 hold only up to sign, hence the min over +-I.  An empty
    relator list returns 0 with a warning.
    """
    if not p.relators:
        warnings.warn("presentation has no relators; residual is trivially 0")
        return 0.0
    eye = np.eye(2)
    worst = 0.0
    for word in p.relators:
        w = p.evaluate_word(word).mat
        res = min(np.linalg.norm(w - eye), np.linalg.norm(w + eye))
        worst = max(worst, res)
    return worst
