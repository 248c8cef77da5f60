import io
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbminorant.errors import (
    HorizonMismatch,
    MismatchedLengths,
    NonFiniteInput,
    NonPositiveLength,
    OutOfDomain,
)
from sbminorant.pwl_convex import (
    Face,
    PwlConvex,
    PwlPath,
    build_convex_from_faces,
    evaluate,
    face_offsets,
    lower_convex_minorant_of_path,
    merge_equal_slopes,
    read_faces_csv,
    read_path_csv,
    reordered_overlay,
    sup_distance,
    write_faces_csv,
    write_path_csv,
)

lengths_st = st.floats(0.01, 10.0)
heights_st = st.floats(-10.0, 10.0)


@st.composite
def faces_st(draw, max_size=20):
    n = draw(st.integers(1, max_size))
    ls = draw(st.lists(lengths_st, min_size=n, max_size=n))
    hs = draw(st.lists(heights_st, min_size=n, max_size=n))
    return ls, hs


def sandwich_bound(h, h2):
    d = np.asarray(h) - np.asarray(h2)
    return max(np.maximum(d, 0).sum(), np.maximum(-d, 0).sum())


class TestBuild:
    def test_single_face(self):
        f = build_convex_from_faces([2.0], [3.0])
        assert f.horizon == 2.0
        assert evaluate(f, 1.0) == pytest.approx(1.5)
        assert f.slopes == (1.5,)

    def test_reorders_by_slope(self):
        f = build_convex_from_faces([1, 1], [1, -1])
        assert f.slopes == (-1, 1)
        assert evaluate(f, 1) == -1
        assert evaluate(f, 2) == 0

    def test_equal_slopes_keep_index_order(self):
        assert face_offsets([1, 1], [2, 2]) == [0, 1]
        f = build_convex_from_faces([1, 1], [2, 2])
        assert len(f.faces) == 2  # not merged
        assert evaluate(f, 0.5) == 1.0 and evaluate(f, 2) == 4

    @pytest.mark.parametrize(
        "lengths, heights, exc",
        [
            ([1, 2], [1], MismatchedLengths),
            ([], [], MismatchedLengths),
            ([0.0], [1.0], NonPositiveLength),
            ([-1.0], [1.0], NonPositiveLength),
            ([1.0], [float("nan")], NonFiniteInput),
            ([float("inf")], [1.0], NonFiniteInput),
        ],
    )
    def test_rejects_bad_input(self, lengths, heights, exc):
        with pytest.raises(exc):
            build_convex_from_faces(lengths, heights)

    def test_face_rejects_zero_length(self):
        with pytest.raises(NonPositiveLength):
            Face(0.0, 1.0)

    def test_horizon_mismatch(self):
        with pytest.raises(HorizonMismatch):
            build_convex_from_faces([1.0, 1.0], [0.0, 0.0], horizon=3.0)

    def test_unsorted_faces_rejected(self):
        with pytest.raises(ValueError):
            PwlConvex([Face(1, 1), Face(1, -1)])

    def test_exact_in_fractions(self):
        f = build_convex_from_faces([Fraction(1, 3), Fraction(2, 3)], [Fraction(1), Fraction(-1, 7)])
        assert f.horizon == 1
        assert f.values[-1] == Fraction(6, 7)
        assert evaluate(f, Fraction(2, 3)) == Fraction(-1, 7)

    @given(faces_st())
    def test_offsets_agree_with_sort(self, fh):
        ls, hs = fh
        f = build_convex_from_faces(ls, hs)
        offs = face_offsets(ls, hs)
        # face i of the input starts at offs[i]; check against the sorted layout
        order = sorted(range(len(ls)), key=lambda i: hs[i] / ls[i])
        starts = dict(zip(order, f.times[:-1]))
        for i in range(len(ls)):
            assert offs[i] == pytest.approx(starts[i], abs=1e-9)

    @given(faces_st())
    def test_slopes_non_decreasing_and_totals(self, fh):
        ls, hs = fh
        f = build_convex_from_faces(ls, hs)
        assert all(a <= b for a, b in zip(f.slopes, f.slopes[1:]))
        assert evaluate(f, 0) == 0
        assert f.values[-1] == pytest.approx(sum(hs), abs=1e-9)
        assert f.horizon == pytest.approx(sum(ls), rel=1e-12)

    @given(faces_st(), st.randoms(use_true_random=False))
    def test_permutation_invariance(self, fh, rnd):
        ls, hs = fh
        idx = list(range(len(ls)))
        rnd.shuffle(idx)
        f = build_convex_from_faces(ls, hs)
        g = build_convex_from_faces([ls[i] for i in idx], [hs[i] for i in idx], horizon=f.horizon)
        assert sup_distance(f, g) < 1e-12 * max(1.0, sum(abs(h) for h in hs))


class TestEvaluate:
    f = build_convex_from_faces([1, 1], [1, -1])

    @pytest.mark.parametrize("t, expected", [(0, 0), (1, -1), (1.5, -0.5), (2, 0)])
    def test_values(self, t, expected):
        assert evaluate(self.f, t) == pytest.approx(expected)

    @pytest.mark.parametrize("t", [-0.1, 2.1])
    def test_out_of_domain(self, t):
        with pytest.raises(OutOfDomain):
            evaluate(self.f, t)

    def test_clamps_rounding_at_ends(self):
        assert evaluate(self.f, 2.0 + 1e-15) == 0

    def test_path_call(self):
        p = PwlPath([0, 1, 2], [0, 1, -1])
        assert p(1.5) == 0


class TestMinorantOfPath:
    @pytest.mark.parametrize(
        "points, faces",
        [
            ([(0, 0), (1, 5), (2, 0)], [(2, 0)]),
            ([(0, 0), (1, -1), (2, 0)], [(1, -1), (1, 1)]),
            ([(0, 0), (1, -1), (2, -1), (3, 1)], [(1, -1), (1, 0), (1, 2)]),
            ([(0, 0), (1, 1), (2, 2)], [(2, 2)]),  # collinear points collapse
        ],
    )
    def test_examples(self, points, faces):
        p = PwlPath(*zip(*points))
        c = lower_convex_minorant_of_path(p)
        assert [(f.length, f.height) for f in c.faces] == faces

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=30))
    def test_below_path_and_touching(self, incs):
        n = len(incs)
        times = [k / n for k in range(n + 1)]
        vals = list(itertools.accumulate([0.0] + incs))
        p = PwlPath(times, vals)
        c = lower_convex_minorant_of_path(p)
        for t, v in zip(times, vals):
            assert evaluate(c, t) <= v + 1e-9
        # every vertex of the minorant is a point of the path
        for t, v in zip(c.times, c.values):
            assert v == pytest.approx(evaluate(p, t), abs=1e-9)
        assert all(a < b for a, b in zip(c.slopes, c.slopes[1:]))


class TestSupDistance:
    def test_identity(self):
        f = build_convex_from_faces([1, 1], [1, -1])
        assert sup_distance(f, f) == 0

    def test_endpoint(self):
        assert sup_distance(PwlPath([0, 1], [0, 1]), PwlPath([0, 1], [0, 0])) == 1

    def test_breakpoint_scan(self):
        f = build_convex_from_faces([1, 1], [-1, 1])
        g = build_convex_from_faces([2], [0])
        assert sup_distance(f, g) == 1

    def test_horizon_mismatch(self):
        with pytest.raises(HorizonMismatch):
            sup_distance(PwlPath([0, 1], [0, 1]), PwlPath([0, 2], [0, 1]))


class TestOverlay:
    def test_equal_heights_gives_minorant(self):
        ls, hs = [0.5, 1.0, 2.0], [1.0, -2.0, 0.3]
        f = build_convex_from_faces(ls, hs)
        assert sup_distance(reordered_overlay(ls, hs, hs), f) == 0

    def test_hand_example(self):
        g = reordered_overlay([1, 1], [1, -1], [-1, 1])
        assert g.times == (0, 1, 2)
        assert g.values == (0, 1, 0)

    def test_mismatched(self):
        with pytest.raises(MismatchedLengths):
            reordered_overlay([1, 1], [1, 1], [1])

    @settings(max_examples=200)
    @given(st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_sandwich(self, n, seed):
        g = np.random.default_rng(seed)
        ls = list(g.uniform(0.01, 2, n))
        h, h2 = list(g.normal(size=n)), list(g.normal(size=n))
        bound = sandwich_bound(h, h2) + 1e-12
        f, f2 = build_convex_from_faces(ls, h), build_convex_from_faces(ls, h2)
        g = reordered_overlay(ls, h, h2)
        assert sup_distance(f, f2) <= bound
        assert sup_distance(f2, g) <= bound


def test_finite_face_continuity():
    rng = np.random.default_rng(11)
    ls = rng.uniform(0.1, 1, 12)
    ls = ls / ls.sum()
    hs = rng.normal(size=12)
    base = build_convex_from_faces(ls, hs)
    dists = []
    for delta in (1e-2, 1e-4, 1e-6):
        l2 = ls * (1 + delta * rng.uniform(-1, 1, 12))
        l2 = l2 / l2.sum()
        h2 = hs + delta * rng.uniform(-1, 1, 12)
        dists.append(sup_distance(base, build_convex_from_faces(l2, h2, horizon=base.horizon)))
    assert dists[0] > dists[1] > dists[2]
    assert dists[2] < 1e-5


def test_merge_equal_slopes():
    faces = [Face(1, 1), Face(2, 2), Face(1, -1)]
    assert merge_equal_slopes(faces) == ((1, -1), (3, 3))


def test_csv_round_trip():
    f = build_convex_from_faces([0.5, 0.25, 0.25], [0.1, -0.3, 0.7])
    buf = io.StringIO()
    write_faces_csv(f, buf)
    assert buf.getvalue().splitlines()[0] == "length,height"
    g = read_faces_csv(io.StringIO(buf.getvalue()))
    assert sup_distance(f, g) == 0
    p = PwlPath([0, 0.5, 1], [0, 1, -2])
    buf = io.StringIO()
    write_path_csv(p, buf)
    assert read_path_csv(io.StringIO(buf.getvalue())) == p


@pytest.mark.parametrize(
    "times, values",
    [([0, 1], [1, 2]), ([0.1, 1], [0, 1]), ([0, 1, 1], [0, 1, 2]), ([0], [0])],
)
def test_path_validation(times, values):
    with pytest.raises(ValueError):
        PwlPath(times, values)
