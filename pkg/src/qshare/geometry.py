"""Geometry of the inhabitable region of Y vectors inside the unit hypercube.

Each sharing constraint ``Y_j <= sum_{k != j} Y_k`` cuts a corner simplex of
volume ``1/N!`` out of ``[0, 1]**N``; the constraints never overlap for
``N >= 3`` so the inhabitable volume is ``1 - 1/(N-1)!``.  Cross-sections at
fixed total ``Y_T`` (hyperplanes normal to the main diagonal) measure how
freely a given total can be distributed.  For three parties the region is the
polyhedron OABCE with

    O = (0,0,0)  A = (1,1,0)  B = (1,0,1)  C = (0,1,1)  E = (1,1,1)

where A, B, C are where the equality planes meet the cube.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, floor, sqrt
from typing import Optional

import numpy as np

from .constants import MAX_EXACT_PARTIES, TOL
from .errors import DegenerateSlice, OutOfRange, Overflow, QShareError

VERTICES = {
    "O": (0, 0, 0),
    "A": (1, 1, 0),
    "B": (1, 0, 1),
    "C": (0, 1, 1),
    "E": (1, 1, 1),
}
# OAB/OBC/OCA lie on equality planes, ABE/BCE/CAE on cube faces Y_1/Y_3/Y_2 = 1.
FACES = (("O", "A", "B"), ("O", "B", "C"), ("O", "C", "A"),
         ("A", "B", "E"), ("B", "C", "E"), ("C", "A", "E"))

# face label keyed by the party whose margin vanishes there
_FACE_OF_PARTY = {0: "face_OAB", 1: "face_OCA", 2: "face_OBC"}

# rejection acceptance below this aborts a slice estimate
MIN_SLICE_ACCEPTANCE = 1e-4


@dataclass(frozen=True)
class CrossSection:
    n_parties: int
    y_total: float
    hyperarea: float
    method: str
    sample_count: Optional[int] = None
    standard_error: Optional[float] = None


def inequality_margins(y):
    """``m_j = sum_{k != j} Y_k - Y_j``; inhabitable iff every margin is >= 0."""
    if isinstance(y, np.ndarray):
        return y.sum(axis=-1, keepdims=True) - 2 * y
    total = sum(y)
    return [total - 2 * v for v in y]


def is_inhabitable(y, tol=TOL.membership):
    margins = inequality_margins(y)
    return bool(min(margins) >= -tol)


def _check_exact_n(n, lo):
    if n > MAX_EXACT_PARTIES:
        raise Overflow(f"exact arithmetic supported up to N = {MAX_EXACT_PARTIES}, got {n}")
    if n < lo:
        raise OutOfRange(f"N must be >= {lo}, got {n}")


def excluded_simplex_volume(n) -> Fraction:
    """Volume ``1/N!`` of the corner removed by one sharing constraint."""
    _check_exact_n(n, 1)
    return Fraction(1, factorial(n))


def inhabitable_volume(n) -> Fraction:
    """Exact inhabitable fraction ``1 - 1/(N-1)!`` of the unit hypercube."""
    _check_exact_n(n, 2)
    return 1 - n * excluded_simplex_volume(n)


def _mc_blocks(samples, block=1 << 16):
    full, rest = divmod(samples, block)
    return [block] * full + ([rest] if rest else [])


def polytope_volume_mc(n, samples, rng):
    """Hit-or-miss estimate of the inhabitable volume.

    Returns ``(estimate, standard_error)``.  Membership is strict (zero
    tolerance): the boundary has measure zero, and for ``N = 2`` the whole
    region is the diagonal.
    """
    if n < 2:
        raise OutOfRange(f"N must be >= 2, got {n}")
    if samples < 1000:
        raise OutOfRange(f"need at least 1000 samples, got {samples}")
    hits = 0
    for size in _mc_blocks(samples):
        y = rng.random((size, n))
        hits += int(np.count_nonzero(np.min(inequality_margins(y), axis=-1) >= 0))
    p = hits / samples
    return p, sqrt(p * (1 - p) / samples)


def additivity_n3(y_total) -> float:
    """Closed-form cross-section area for three qubits.

    ``(sqrt(3)/2) * Y_T**2 / 4`` up to ``Y_T = 2`` and
    ``(sqrt(3)/2) * (3 - Y_T)**2`` beyond; peak ``sqrt(3)/2`` at ``Y_T = 2``.
    """
    if not 0 <= y_total <= 3:
        raise OutOfRange(f"Y_T must lie in [0, 3], got {y_total}")
    if y_total <= 2:
        return sqrt(3) / 2 * y_total**2 / 4
    return sqrt(3) / 2 * (3 - y_total) ** 2


def cube_slice_hyperarea(n, y_total) -> float:
    """(N-1)-volume of ``{Y in [0,1]**N : sum(Y) = Y_T}``.

    The alternating sum is evaluated in exact rational arithmetic (floats are
    converted exactly), so ``f(N, t) == f(N, N - t)`` holds bit for bit
    whenever ``N - t`` is itself exact.
    """
    _check_exact_n(n, 2)
    if not 0 <= y_total <= n:
        raise OutOfRange(f"Y_T must lie in [0, {n}], got {y_total}")
    t = Fraction(y_total)
    acc = sum((-1) ** k * comb(n, k) * (t - k) ** (n - 1) for k in range(floor(t) + 1))
    return sqrt(n) * float(Fraction(acc, factorial(n - 1)))


def sample_cube_slice(n, y_total, count, rng):
    """Uniform points on the cube slice at ``Y_T``, by simplex rejection.

    Slices above ``N/2`` are sampled at ``N - Y_T`` and reflected through
    ``Y -> 1 - Y``, which maps one slice onto the other and keeps acceptance
    high near the far corner.  Returns ``(points, drawn)``.
    """
    reflect = y_total > n / 2
    t = n - y_total if reflect else y_total
    accepted, drawn, have = [], 0, 0
    batch = max(1024, count)
    while have < count:
        w = rng.standard_exponential((batch, n))
        pts = t * w / w.sum(axis=-1, keepdims=True)
        ok = pts[np.max(pts, axis=-1) <= 1.0]
        drawn += batch
        if drawn >= 1024 and (have + len(ok)) / drawn < MIN_SLICE_ACCEPTANCE:
            raise DegenerateSlice(
                f"slice acceptance {(have + len(ok)) / drawn:.2e} below {MIN_SLICE_ACCEPTANCE:g} "
                f"at N={n}, Y_T={y_total}")
        accepted.append(ok)
        have += len(ok)
    pts = np.concatenate(accepted)[:count]
    return (1.0 - pts if reflect else pts), drawn


def additivity_mc(n, y_total, samples, rng) -> CrossSection:
    """Monte Carlo hyperarea of the inhabitable cross-section at ``Y_T``."""
    if n < 3:
        raise OutOfRange(f"N must be >= 3 for Monte Carlo cross-sections, got {n}")
    if not 0 < y_total < n:
        raise OutOfRange(f"Y_T must lie strictly inside (0, {n}), got {y_total}")
    if samples < 1000:
        raise OutOfRange(f"need at least 1000 samples, got {samples}")
    pts, _ = sample_cube_slice(n, y_total, samples, rng)
    frac = np.count_nonzero(np.min(inequality_margins(pts), axis=-1) >= 0) / samples
    area = cube_slice_hyperarea(n, y_total)
    return CrossSection(n, float(y_total), area * frac, "monte_carlo", samples,
                        area * sqrt(frac * (1 - frac) / samples))


def additivity_exact(y_total) -> CrossSection:
    return CrossSection(3, float(y_total), additivity_n3(y_total), "exact")


def ghz_locus(theta):
    """Y vector of the three-party GHZ family: ``1 - |cos 2 theta|`` on every axis."""
    v = 1.0 - abs(np.cos(2 * theta))
    return np.array([v, v, v])


def classify_face(y, tol=TOL.boundary):
    """Locate a three-party Y vector on the polyhedron OABCE.

    Vertices are checked first, then exterior, then the shared base ABC
    (``Y_T = 2``), then the three O-faces.  Points on an O-edge report the
    face of the lowest-index vanishing margin.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (3,):
        raise QShareError(f"face classification needs a 3-vector, got shape {y.shape}")
    for coords in VERTICES.values():
        if np.max(np.abs(y - coords)) <= tol:
            return "vertex"
    margins = inequality_margins(y)
    if np.any(margins < -tol) or np.any(y < -tol) or np.any(y > 1 + tol):
        return "exterior"
    if abs(y.sum() - 2) <= tol:
        return "triangle_ABC"
    for j in range(3):
        if abs(margins[j]) <= tol:
            return _FACE_OF_PARTY[j]
    return "interior"


def vertex_name(y, tol=TOL.boundary):
    for name, coords in VERTICES.items():
        if np.max(np.abs(np.asarray(y, dtype=float) - coords)) <= tol:
            return name
    return None


def polytope_mesh():
    """Vertex/face document for the polyhedron OABCE."""
    return {
        "name": "OABCE",
        "vertices": {name: list(coords) for name, coords in VERTICES.items()},
        "faces": [list(face) for face in FACES],
    }
