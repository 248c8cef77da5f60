import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from sbminorant.errors import BadCutPoints, NotInvertible, TieDetected, TooLarge
from sbminorant.pwl_convex import PwlPath, evaluate, lower_convex_minorant_of_path
from sbminorant.rng import RngStream
from sbminorant.rw_3214 import (
    Walk,
    canonical_faces,
    cyclic_shift_above_chord,
    enumerate_minorant_distribution,
    enumerate_sb_distribution,
    face_containing,
    has_subset_mean_ties,
    invert_3214,
    prop_3214_laws,
    qualifying_rotations,
    sample_discrete_sb_faces,
    total_variation,
    transform_3214,
    walk_path,
)

FIG = json.loads((Path(__file__).parent / "data" / "fig_3214.json").read_text())
F = Fraction


def fig_path(key):
    pts = FIG[key]
    return PwlPath([F(t) for t, _ in pts], [F(v) for _, v in pts])


def no_tie_vector(n, seed):
    g = np.random.default_rng(seed)
    while True:
        x = [int(v) for v in g.integers(-50, 51, n)]
        if not has_subset_mean_ties(x):
            return x


def exact_walk(x, T=1):
    n = len(x)
    times = [F(T) * k / n for k in range(n + 1)]
    vals = [F(0)]
    for v in x:
        vals.append(vals[-1] + v)
    return PwlPath(times, vals)


class TestWalkPath:
    def test_single(self):
        p = walk_path(Walk([1]))
        assert p.times == (0, 1) and p.values == (0, 1)

    def test_two_steps(self):
        p = walk_path(Walk([1, -2], horizon=2))
        assert list(zip(p.times, p.values)) == [(0, 0), (1, 1), (2, -1)]

    def test_permutation(self):
        p = walk_path(Walk([1, -2, 5], perm=(3, 1, 2)))
        assert p.values == (0, 5, 6, 4)

    @pytest.mark.parametrize("perm", [(1, 2, 3), (2, 3, 1), (3, 2, 1)])
    def test_endpoint_invariant(self, perm):
        assert walk_path(Walk([F(1, 3), 2, -7], perm=perm)).values[-1] == F(1, 3) - 5

    @pytest.mark.parametrize("kwargs", [dict(increments=[]), dict(increments=[1], horizon=0),
                                        dict(increments=[1, 2], perm=(1, 1))])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Walk(**kwargs)


class TestTransform:
    def test_identity_cuts(self):
        f = exact_walk([3, -1, 2])
        assert transform_3214(f, 0, 0, 0) == f

    def test_linear_fixed(self):
        f = exact_walk([2, 2, 2, 2, 2])
        assert transform_3214(f, F(1, 5), F(2, 5), F(4, 5)).values == f.values

    def test_bad_cuts(self):
        with pytest.raises(BadCutPoints):
            transform_3214(exact_walk([1, 2]), F(1, 2), F(0), F(1))

    def test_preserves_increments_and_endpoints(self):
        x = no_tie_vector(6, 3)
        f = exact_walk(x)
        g, u, d = F(1, 6), F(1, 2), F(5, 6)
        tf = transform_3214(f, g, u, d)
        assert sorted(tf.increments()) == sorted(f.increments())
        assert tf.values[-1] == f.values[-1]
        assert evaluate(tf, d) == evaluate(f, d)

    def test_worked_example_guide_values(self):
        # guide values of a worked example path
        f = fig_path("path")
        g, u, d = F(FIG["g"]), F(FIG["u"]), F(FIG["d"])
        tf = transform_3214(f, g, u, d)
        assert float(evaluate(tf, d - u)) == pytest.approx(-0.181, abs=1e-3)
        assert float(evaluate(tf, d - g)) == pytest.approx(0.555, abs=1e-3)

    def test_worked_example_transformed(self):
        f = fig_path("path")
        tf = transform_3214(f, F(FIG["g"]), F(FIG["u"]), F(FIG["d"]))
        ref = fig_path("transformed")
        assert tf.times == ref.times
        assert max(abs(float(a - b)) for a, b in zip(tf.values, ref.values)) <= 1.5e-3

    def test_worked_example_minorant(self):
        # the left panel's dashed curve is the minorant of the path
        c = lower_convex_minorant_of_path(fig_path("path"))
        ref = fig_path("minorant")
        assert [float(t) for t in c.times] == pytest.approx([float(t) for t in ref.times])
        assert [float(v) for v in c.values] == pytest.approx([float(v) for v in ref.values], abs=1e-3)


class TestCyclicShift:
    @pytest.mark.parametrize("x, k", [((-1, 2), 1), ((2, -1), 2), ((-1, -1, 5), 2)])
    def test_examples(self, x, k):
        assert cyclic_shift_above_chord(x) == k
        assert qualifying_rotations(x) == [k]

    def test_tie(self):
        with pytest.raises(TieDetected):
            cyclic_shift_above_chord([1, -1, 1, -1])

    def test_uniqueness_many(self):
        g = np.random.default_rng(0)
        checked = 0
        while checked < 1000:
            n = int(g.integers(1, 11))
            x = list(g.normal(size=n))
            if has_subset_mean_ties(x):
                continue
            assert qualifying_rotations(x) == [cyclic_shift_above_chord(x)]
            checked += 1

    def test_subset_ties(self):
        assert has_subset_mean_ties([1, 2, 3])  # {2} and {1, 3}
        assert not has_subset_mean_ties([1, 2, 4])
        with pytest.raises(TooLarge):
            has_subset_mean_ties(range(21))


class TestInverse:
    def test_identity(self):
        f = exact_walk([1, -3, 2])
        assert invert_3214(f, 0) == (0, 0, 0, f)

    def test_worked_example(self):
        f = fig_path("path")
        g, u, d = F(FIG["g"]), F(FIG["u"]), F(FIG["d"])
        tf = transform_3214(f, g, u, d)
        gg, uu, dd, ff = invert_3214(tf, d - g)
        assert (gg, uu, dd) == (g, u, d)
        assert ff.values == f.values

    @pytest.mark.parametrize("seed", range(100))
    def test_round_trip_n6(self, seed):
        x = no_tie_vector(6, 1000 + seed)
        f = exact_walk(x)
        rs = np.random.default_rng(seed)
        U = F(int(rs.integers(1, 7)), 6)
        G, D = face_containing(f, U)
        tf = transform_3214(f, G, U, D)
        g, u, d, back = invert_3214(tf, D - G)
        assert (g, u, d) == (G, U, D) and back.values == f.values

    def test_float_round_trip(self):
        x = list(np.random.default_rng(5).normal(size=8))
        f = PwlPath([k / 8 for k in range(9)], list(np.concatenate([[0.0], np.cumsum(x)])))
        G, D = face_containing(f, 0.5)
        tf = transform_3214(f, G, 0.5, D)
        g, u, d, back = invert_3214(tf, D - G)
        assert (g, u, d) == pytest.approx((G, 0.5, D))
        np.testing.assert_allclose(back.values, f.values, atol=1e-12)

    def test_not_on_mesh(self):
        with pytest.raises(NotInvertible):
            invert_3214(exact_walk([1, 2, -4]), F(1, 2))


class TestDiscreteSB:
    def test_single(self):
        for s in range(5):
            assert sample_discrete_sb_faces([F(3)], RngStream(s)) == [(1, 3)]

    def test_two_point_law(self):
        counts = {}
        for s in range(4000):
            key = canonical_faces(sample_discrete_sb_faces([1, -2], RngStream(s), T=2))
            counts[key] = counts.get(key, 0) + 1
        assert set(counts) == {((2, -1),), ((1, -2), (1, 1))}
        assert abs(counts[((2, -1),)] / 4000 - 0.5) < 3 * math.sqrt(0.25 / 4000)

    @pytest.mark.parametrize("seed", range(10))
    def test_telescoping(self, seed):
        x = [F(7, 10), F(-13, 10), F(21, 10), F(-4, 10)]
        faces = sample_discrete_sb_faces(x, RngStream(seed))
        assert sum(h for _, h in faces) == sum(x)
        assert sum(ln for ln, _ in faces) == 1


class TestEnumeration:
    def test_minorant_two(self):
        d = enumerate_minorant_distribution([1, -2], T=2)
        assert d == {((2, -1),): F(1, 2), ((1, -2), (1, 1)): F(1, 2)}

    def test_monotone_merged(self):
        assert enumerate_minorant_distribution([1, 1], T=2) == {((2, 2),): 1}

    def test_sums_to_one(self):
        d = enumerate_minorant_distribution([0.7, -1.3, 2.1, -0.4])
        assert d.total() == 1

    def test_sb_singleton(self):
        assert enumerate_sb_distribution([F(5, 2)], T=3) == {((3, F(5, 2)),): 1}

    def test_sb_equals_minorant_example(self):
        x = [0.7, -1.3, 2.1, -0.4]
        sb, mn = enumerate_sb_distribution(x), enumerate_minorant_distribution(x)
        assert sb.total() == 1 and total_variation(sb, mn) == 0

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("seed", range(5))
    def test_sb_equals_minorant_random(self, n, seed):
        x = no_tie_vector(n, 10 * n + seed)
        assert enumerate_sb_distribution(x, T=F(3, 2)) == enumerate_minorant_distribution(x, T=F(3, 2))

    def test_guards(self):
        with pytest.raises(TooLarge):
            enumerate_sb_distribution(range(7))
        with pytest.raises(TooLarge):
            enumerate_minorant_distribution(range(9))

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_prop_laws(self, n):
        lhs, rhs = prop_3214_laws(no_tie_vector(n, 7 * n))
        assert lhs == rhs and sum(lhs.values()) == 1

    def test_prop_laws_need_no_ties(self):
        # {2} and {1, 3} share a mean, and the two laws then differ
        lhs, rhs = prop_3214_laws([2, -7, 1, 3])
        assert lhs != rhs
