from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cifs import (
    CompositionWord,
    ContractionError,
    DimensionError,
    IFSError,
    MapDescriptor,
    compose,
    fixed_point,
    power_compose,
)
from cifs.oracles import banach_fixed_point

from conftest import maps

F = Fraction


class TestFixedPoint:
    def test_constant_map(self):
        assert fixed_point(MapDescriptor.on_line(0, 3)) == (3,)

    def test_first_map_of_ex1(self):
        assert fixed_point(MapDescriptor.on_line(F(1, 2), F(1, 4))) == (F(1, 2),)

    def test_decreasing_map(self):
        G = MapDescriptor.on_line(F(-1, 2), F(1, 2))
        assert fixed_point(G) == (F(1, 3),)
        assert banach_fixed_point(-0.5, [0.5])[0] == pytest.approx(1 / 3, abs=1e-13)

    @pytest.mark.parametrize("r", [1, -1, F(3, 2), 1.0, -1.0000001])
    def test_rejects_non_contractions(self, r):
        with pytest.raises(ContractionError):
            MapDescriptor.on_line(r, 0)

    def test_rejects_empty_translation(self):
        with pytest.raises(DimensionError):
            MapDescriptor(F(1, 2), ())

    @given(st.floats(-0.999, 0.999), st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=4))
    def test_float_residual(self, r, b):
        G = MapDescriptor(r, tuple(b))
        x = np.array(fixed_point(G))
        r_, b_ = G.as_float()
        assert np.linalg.norm(r_ * x + b_ - x) <= 1e-12 * (1 + np.linalg.norm(x)) * max(1.0, 1 / (1 - abs(r)))

    @given(maps(2))
    def test_exact_fixed_point(self, G):
        x = fixed_point(G)
        assert G(x) == x


class TestCompose:
    def test_halving_maps(self):
        H = compose(MapDescriptor.on_line(F(1, 2), 0), MapDescriptor.on_line(F(1, 2), F(1, 2)))
        assert (H.ratio, H.translation) == (F(1, 4), (F(1, 4),))
        assert fixed_point(H) == (F(1, 3),)
        assert banach_fixed_point(0.25, [0.25])[0] == pytest.approx(1 / 3, abs=1e-13)

    def test_example_two_cross_composition(self):
        F1 = MapDescriptor.on_line(F(-1, 2), 3)
        G1 = MapDescriptor.on_line(F(-1, 2), F(1, 2))
        H = compose(G1, F1)
        assert (H.ratio, H.translation) == (F(1, 4), (F(-1),))
        assert fixed_point(H) == (F(-4, 3),)

    def test_word_of_length_one_is_the_map(self):
        G = MapDescriptor.on_line(F(1, 3), F(2, 7))
        assert CompositionWord((1,)).map(lambda i: G) == G

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            compose(MapDescriptor(F(1, 2), (0,)), MapDescriptor(F(1, 2), (0, 0)))

    @given(maps(2), maps(2), st.lists(st.fractions(max_denominator=20), min_size=2, max_size=2))
    def test_composition_acts_as_composition(self, A, B, x):
        assert compose(A, B)(tuple(x)) == A(B(tuple(x)))

    @given(maps(1), maps(1), maps(1))
    def test_associative(self, A, B, C):
        assert compose(A, compose(B, C)) == compose(compose(A, B), C)

    @given(maps(3), st.lists(st.fractions(max_denominator=30), min_size=3, max_size=3),
           st.lists(st.fractions(max_denominator=30), min_size=3, max_size=3))
    def test_similarity(self, A, x, y):
        fx, fy = A(tuple(x)), A(tuple(y))
        lhs = sum((a - b) ** 2 for a, b in zip(fx, fy))
        rhs = A.ratio**2 * sum((a - b) ** 2 for a, b in zip(x, y))
        assert lhs == rhs

    @settings(max_examples=50)
    @given(maps(1), maps(1))
    def test_fixed_point_matches_banach_from_random_seeds(self, A, B):
        H = compose(A, B)
        r, b = H.as_float()
        x_star = float(fixed_point(H)[0])
        rng = np.random.default_rng(0)
        for x0 in rng.uniform(-100, 100, 10):
            x = x0
            for _ in range(10**6):
                nxt = r * x + b[0]
                if abs(nxt - x) < 1e-14:
                    x = nxt
                    break
                x = nxt
            assert x == pytest.approx(x_star, abs=1e-10)


class TestPower:
    def test_cube_of_half(self):
        P = power_compose(MapDescriptor.on_line(F(1, 2), 0), 3)
        assert (P.ratio, P.translation) == (F(1, 8), (0,))

    def test_square(self):
        P = power_compose(MapDescriptor.on_line(F(1, 2), F(1, 2)), 2)
        assert (P.ratio, P.translation) == (F(1, 4), (F(3, 4),))

    @given(maps(2))
    def test_shared_fixed_point(self, G):
        for k in range(1, 11):
            assert fixed_point(power_compose(G, k)) == fixed_point(G)

    @given(maps(1), st.integers(1, 20))
    def test_matches_repeated_compose(self, G, k):
        H = G
        for _ in range(k - 1):
            H = compose(H, G)
        assert power_compose(G, k) == H

    @pytest.mark.parametrize("k", [0, -1, 1.5, True])
    def test_rejects_bad_powers(self, k):
        with pytest.raises(IFSError):
            power_compose(MapDescriptor.on_line(F(1, 2), 0), k)


class TestWord:
    @pytest.mark.parametrize("bad", [(), (0,), (1, -2), (1.0,)])
    def test_validation(self, bad):
        with pytest.raises(IFSError):
            CompositionWord(bad)

    def test_leftmost_is_outermost(self):
        lookup = {1: MapDescriptor.on_line(F(1, 2), 0), 2: MapDescriptor.on_line(F(1, 2), F(1, 2))}.__getitem__
        assert CompositionWord((1, 2)).fixed_point(lookup) == (F(1, 3),)
        assert CompositionWord((2, 1)).fixed_point(lookup) == (F(2, 3),)
