from fractions import Fraction
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from qshare import geometry
from qshare.errors import DegenerateSlice, OutOfRange, Overflow
from qshare.geometry import (
    FACES,
    VERTICES,
    additivity_exact,
    additivity_mc,
    additivity_n3,
    classify_face,
    cube_slice_hyperarea,
    excluded_simplex_volume,
    ghz_locus,
    inequality_margins,
    inhabitable_volume,
    is_inhabitable,
    polytope_mesh,
    polytope_volume_mc,
    sample_cube_slice,
    vertex_name,
)
from qshare.monotones import entanglement_profile
from qshare.states import ghz, w_state


# -- independent oracles --------------------------------------------------------

def _plane_basis():
    """Orthonormal in-plane basis for planes normal to (1, 1, 1)."""
    e1 = np.array([1.0, -1.0, 0.0]) / sqrt(2)
    e2 = np.array([1.0, 1.0, -2.0]) / sqrt(6)
    return e1, e2


def _clip(poly, a, b):
    """Sutherland-Hodgman clip of a 2D polygon by the half-plane a . x <= b."""
    out = []
    for i, p in enumerate(poly):
        q = poly[(i + 1) % len(poly)]
        fp, fq = a @ p - b, a @ q - b
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            out.append(p + fp / (fp - fq) * (q - p))
    return out


def _shoelace(poly):
    if len(poly) < 3:
        return 0.0
    x = np.array([p[0] for p in poly])
    y = np.array([p[1] for p in poly])
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def slice_area_oracle(t, inhabitable=True):
    """Area of the t-slice of the unit cube (optionally also cut by the sharing
    inequalities) by polygon clipping in the plane."""
    e1, e2 = _plane_basis()
    centre = np.full(3, t / 3)
    big = 10.0
    poly = [np.array(v) for v in ((-big, -big), (big, -big), (big, big), (-big, big))]
    proj = np.stack([e1, e2])  # y = centre + proj.T @ x

    def cut(normal, rhs):
        # normal . y <= rhs in 3D
        nonlocal poly
        poly = _clip(poly, proj @ normal, rhs - normal @ centre)

    for j in range(3):
        unit = np.eye(3)[j]
        cut(unit, 1.0)
        cut(-unit, 0.0)
        if inhabitable:
            cut(2 * unit - 1, 0.0)  # Y_j - sum_{k != j} Y_k <= 0
    return _shoelace(poly)


def irwin_hall_density(n, t, steps=4000):
    """Density of a sum of n uniforms by discrete convolution."""
    h = 1.0 / steps
    box = np.full(steps, 1.0)
    dens = box.copy()
    for _ in range(n - 1):
        dens = np.convolve(dens, box) * h
    grid = (np.arange(dens.size) + 0.5 * n) * h
    return float(np.interp(t, grid, dens))


# -- margins and volumes ----------------------------------------------------------

def test_margins_examples():
    assert inequality_margins([1.0, 1.0, 1.0]) == [1.0, 1.0, 1.0]
    assert inequality_margins([1.0, 0.0, 0.0]) == [-1.0, 1.0, 1.0]
    np.testing.assert_array_equal(inequality_margins(np.array([[0.5, 0.5]])), [[0.0, 0.0]])
    assert is_inhabitable([2 / 3] * 3)
    assert not is_inhabitable([1.0, 0.2, 0.2])


def test_exact_volumes():
    assert inhabitable_volume(2) == 0
    assert inhabitable_volume(3) == Fraction(1, 2)
    assert inhabitable_volume(4) == Fraction(5, 6)
    assert inhabitable_volume(5) == Fraction(23, 24)
    assert excluded_simplex_volume(3) == Fraction(1, 6)
    with pytest.raises(Overflow):
        inhabitable_volume(21)
    with pytest.raises(OutOfRange):
        inhabitable_volume(1)


def test_volume_against_hull_oracle():
    # the N = 3 region is the convex polyhedron OABCE
    hull = ConvexHull(np.array(list(VERTICES.values()), dtype=float))
    assert hull.volume == pytest.approx(float(inhabitable_volume(3)), abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_volume_mc_within_five_se(n, rng):
    p, se = polytope_volume_mc(n, 200_000, rng)
    assert abs(p - float(inhabitable_volume(n))) <= 5 * se


def test_volume_mc_n2_is_empty(rng):
    assert polytope_volume_mc(2, 5000, rng) == (0.0, 0.0)


# -- cross-sections ---------------------------------------------------------------

def test_additivity_n3_examples():
    assert additivity_n3(2) == pytest.approx(sqrt(3) / 2, abs=1e-12)
    assert additivity_n3(0) == 0 and additivity_n3(3) == 0
    assert additivity_n3(1) == pytest.approx(sqrt(3) / 8, abs=1e-12)
    with pytest.raises(OutOfRange):
        additivity_n3(3.5)
    assert additivity_exact(1.5).method == "exact"


@pytest.mark.parametrize("t", np.linspace(0.05, 2.95, 30))
def test_additivity_n3_matches_clipping_oracle(t):
    assert additivity_n3(t) == pytest.approx(slice_area_oracle(t), abs=1e-12)


@pytest.mark.parametrize("t", [0.3, 1.0, 1.5, 2.2, 2.9])
def test_cube_slice_n3_matches_clipping_oracle(t):
    assert cube_slice_hyperarea(3, t) == pytest.approx(
        slice_area_oracle(t, inhabitable=False), abs=1e-12)


def test_cube_slice_n2_segment():
    for t in (0.0, 0.4, 1.0, 1.7, 2.0):
        assert cube_slice_hyperarea(2, t) == pytest.approx(sqrt(2) * min(t, 2 - t), abs=1e-12)


@pytest.mark.parametrize("n,t", [(4, 1.3), (5, 2.5), (6, 1.1), (7, 4.2)])
def test_cube_slice_matches_irwin_hall(n, t):
    assert cube_slice_hyperarea(n, t) == pytest.approx(
        sqrt(n) * irwin_hall_density(n, t), rel=1e-5)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 12), num=st.integers(0, 10_000))
def test_cube_slice_reflection_symmetry(n, num):
    t = n * num / 10_000
    # n - t is generally inexact here, so compare to relative rounding
    assert cube_slice_hyperarea(n, t) == pytest.approx(cube_slice_hyperarea(n, n - t), rel=1e-12)


def test_cube_slice_symmetry_bitwise_on_dyadics():
    for n in range(2, 10):
        for t in np.arange(0, n + 1e-12, 0.125):
            assert cube_slice_hyperarea(n, float(t)) == cube_slice_hyperarea(n, float(n - t))


def test_sample_cube_slice_lies_on_slice(rng):
    for n, t in ((3, 0.7), (4, 3.1), (5, 2.5)):
        pts, drawn = sample_cube_slice(n, t, 500, rng)
        assert pts.shape == (500, n) and drawn >= 500
        np.testing.assert_allclose(pts.sum(axis=-1), t, atol=1e-12)
        assert pts.min() >= 0 and pts.max() <= 1


def test_sample_cube_slice_degenerate(rng):
    with pytest.raises(DegenerateSlice):
        sample_cube_slice(40, 20.0, 100, rng)


@pytest.mark.parametrize("t", [0.4, 1.0, 2.0, 2.5])
def test_additivity_mc_within_three_sigma(t, rng):
    cs = additivity_mc(3, t, 100_000, rng)
    assert cs.method == "monte_carlo" and cs.sample_count == 100_000
    assert abs(cs.hyperarea - additivity_n3(t)) <= 3 * cs.standard_error + 1e-12


def test_additivity_mc_n4_profile(rng):
    grid = np.linspace(0.2, 3.8, 19)
    areas = np.array([additivity_mc(4, t, 20_000, rng).hyperarea for t in grid])
    # inhabitable slice is the full cube slice above Y_T = 2 (max share <= 1 <= rest)
    for t, a in zip(grid, areas):
        if t >= 2:
            assert a == pytest.approx(cube_slice_hyperarea(4, t), abs=1e-12)
    assert np.argmax(areas) == np.argmin(np.abs(grid - 2))


def test_additivity_mc_rejects_bad_args(rng):
    with pytest.raises(OutOfRange):
        additivity_mc(2, 1.0, 5000, rng)
    with pytest.raises(OutOfRange):
        additivity_mc(3, 0.0, 5000, rng)
    with pytest.raises(OutOfRange):
        additivity_mc(3, 1.0, 10, rng)


# -- polyhedron ------------------------------------------------------------------

def test_ghz_locus_matches_state():
    for theta in np.linspace(0, np.pi, 13):
        np.testing.assert_allclose(ghz_locus(theta), entanglement_profile(ghz(theta)).y,
                                   atol=1e-12)


def test_classify_face_examples():
    assert classify_face([1, 1, 1]) == "vertex"
    assert classify_face([0, 0, 0]) == "vertex"
    assert classify_face([2 / 3] * 3) == "triangle_ABC"
    assert classify_face([0.5, 0.5, 0.5]) == "interior"
    assert classify_face([1.0, 0.1, 0.1]) == "exterior"
    assert classify_face([0.5, 0.3, 0.2]) == "face_OAB"
    assert classify_face([0.2, 0.5, 0.3]) == "face_OCA"
    assert classify_face([0.3, 0.2, 0.5]) == "face_OBC"
    assert vertex_name([1, 0, 1]) == "B" and vertex_name([0.5] * 3) is None


def test_unbalanced_w_lands_on_o_face():
    gamma = sqrt(1 - 0.81 - 0.09)
    y = entanglement_profile(w_state(0.9, 0.3, gamma)).y
    assert classify_face(y) == "face_OAB"


@settings(max_examples=80, deadline=None)
@given(st.tuples(*(st.floats(0.05, 1.0) for _ in range(3))),
       st.tuples(*(st.floats(0, 2 * np.pi) for _ in range(3))))
def test_w_states_lie_on_surface(mags, phases):
    coeffs = np.array(mags) * np.exp(1j * np.array(phases))
    coeffs /= np.linalg.norm(coeffs)
    y = entanglement_profile(w_state(*coeffs)).y
    assert classify_face(y) not in ("interior", "exterior")
    if np.max(np.abs(coeffs) ** 2) <= 0.5 - 1e-9:
        assert abs(y.sum() - 2) <= 1e-9


def test_mesh_against_hull():
    mesh = polytope_mesh()
    assert mesh["name"] == "OABCE" and len(mesh["vertices"]) == 5
    names = list(mesh["vertices"])
    pts = np.array([mesh["vertices"][k] for k in names], dtype=float)
    hull = ConvexHull(pts)
    # coplanar facets may be split by qhull; compare merged planes instead
    planes = {tuple(np.round(eq, 9)) for eq in hull.equations}
    assert len(planes) == 6 == len(mesh["faces"])
    hull_faces = set()
    for plane in planes:
        normal, off = np.array(plane[:3]), plane[3]
        on = frozenset(n for n, p in zip(names, pts) if abs(normal @ p + off) < 1e-9)
        hull_faces.add(on)
    assert hull_faces == {frozenset(f) for f in mesh["faces"]}
    assert [list(f) for f in FACES] == mesh["faces"]


def test_mesh_vertices_inhabitable_and_abc_centroid():
    for coords in VERTICES.values():
        assert is_inhabitable(coords, tol=1e-12)
    centroid = [sum(Fraction(VERTICES[v][i]) for v in "ABC") / 3 for i in range(3)]
    assert centroid == [Fraction(2, 3)] * 3
    assert classify_face([float(c) for c in centroid]) == "triangle_ABC"
    assert geometry.vertex_name([1, 1, 0]) == "A"
