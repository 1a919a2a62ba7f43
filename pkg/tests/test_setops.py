import io
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cifs import (
    BudgetError,
    IFSError,
    PointCloud,
    PreconditionError,
    attractor_approx,
    builtin,
    check_invariance,
    enumerate_P,
    family_from_dict,
    hausdorff,
    hutchinson_step,
)
from cifs import _kernels
from cifs.contraction import CompositionWord, fixed_point
from cifs.oracles import brute_directed, brute_hausdorff
from cifs.setops import (
    directed_hausdorff,
    enlargement,
    read_csv,
    verify_enlargement_invariance,
    verify_enlargement_lemma,
    verify_nondecreasing_interval,
    witness_unbounded_P,
)
from cifs.setops.cloud import dedup

F = Fraction
BACKENDS = [None, _kernels.python]


def single(r, b):
    return family_from_dict({"dimension": 1, "truncation": 1, "finite": True,
                             "branches": [{"ratio": r, "translation": [b]}]})


def pts(*xs):
    return np.array(xs, dtype=float).reshape(len(xs), -1)


class TestHausdorff:
    @pytest.mark.parametrize("backend", BACKENDS)
    def test_examples(self, backend):
        assert hausdorff(pts(0), pts(1), backend) == 1
        a = np.random.default_rng(0).random((50, 2))
        assert hausdorff(a, a, backend) == 0
        assert hausdorff(pts(0, 1), pts(0), backend) == 1

    def test_empty_and_mismatch(self):
        with pytest.raises(IFSError):
            hausdorff(np.empty((0, 1)), pts(1))
        with pytest.raises(IFSError):
            hausdorff(pts(0), np.zeros((1, 2)))

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_two_hundred_random_pairs_exact(self, backend):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            d = int(rng.integers(1, 4))
            a = rng.standard_normal((int(rng.integers(1, 200)), d)) * 10.0 ** rng.uniform(-4, 4)
            b = rng.standard_normal((int(rng.integers(1, 200)), d)) * 10.0 ** rng.uniform(-4, 4)
            assert hausdorff(a, b, backend) == brute_hausdorff(a, b)

    @pytest.mark.parametrize("backend", BACKENDS)
    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_pathological_layouts(self, backend):
        cases = [
            (pts(0, 1e-300, 1e300), pts(5, -1e300)),
            (np.r_[np.zeros((500, 1)), pts(1e6)], pts(3)),
            (np.random.default_rng(1).random((300, 3)) * 1e-9, np.array([[1e9, -1e9, 0.0]])),
            (np.linspace(0, 1, 1000)[:, None], np.linspace(0.0005, 1.0005, 999)[:, None]),
        ]
        for a, b in cases:
            assert hausdorff(a, b, backend) == brute_hausdorff(a, b)
            assert directed_hausdorff(a, b, backend) == brute_directed(a, b)

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)), elements=st.floats(-1e3, 1e3)),
           arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)), elements=st.floats(-1e3, 1e3)))
    def test_matches_brute_force(self, a, b):
        ref = brute_hausdorff(a, b)
        for backend in BACKENDS:
            assert hausdorff(a, b, backend) == ref

    @settings(max_examples=60, deadline=None)
    @given(*[arrays(np.float64, st.tuples(st.integers(1, 25), st.just(2)), elements=st.floats(-100, 100))] * 3)
    def test_metric(self, a, b, c):
        assert hausdorff(a, b) == hausdorff(b, a)
        assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12
        assert hausdorff(a, a) == 0


class TestCloud:
    def test_dedup_order_independent(self):
        rng = np.random.default_rng(3)
        x = rng.random((1000, 2)).round(3)
        assert np.array_equal(dedup(x), dedup(rng.permutation(x)))
        y = rng.random(500).round(2)[:, None]
        assert np.array_equal(dedup(y), dedup(y[::-1].copy(), in_place=True))

    def test_dedup_tolerance(self):
        assert len(PointCloud(pts(0.1, 0.1 + 1e-14, 0.2))) == 2

    def test_csv_roundtrip_17_digits(self):
        c = PointCloud(np.array([[1 / 3, -2 / 7], [np.pi, 1e-300]]))
        text = c.to_csv()
        assert "0.33333333333333331" in text
        assert np.array_equal(read_csv(io.StringIO(text)).points, c.points)

    def test_grid_resolution(self):
        g = PointCloud.grid([0.0], [0.5], 1001)
        assert len(g) == 1001 and g.resolution == pytest.approx(5e-4)


class TestHutchinson:
    def test_examples(self, dyadic, ex1):
        assert hutchinson_step(PointCloud(pts(0)), dyadic).points[:, 0].tolist() == [0, 0.5]
        assert hutchinson_step(PointCloud(pts(0, 1)), dyadic).points[:, 0].tolist() == [0, 0.5, 1]
        assert hutchinson_step(PointCloud(pts(0)), ex1, 1).points[:, 0].tolist() == [0.25]

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 64), min_size=1, max_size=20), st.lists(st.integers(0, 64), max_size=20))
    def test_monotone(self, a, extra):
        fam = builtin("EX2", truncation=3)
        A = PointCloud(np.array(a, dtype=float)[:, None] / 8)
        B = PointCloud(np.array(a + extra, dtype=float)[:, None] / 8)
        sa, sb = hutchinson_step(A, fam), hutchinson_step(B, fam)
        # equal up to the dedup tolerance
        assert directed_hausdorff(sa, sb) <= 1e-12


class TestEnumerateP:
    def test_single_map(self):
        assert len(enumerate_P(single("1/3", "1"), None, 5)) == 1

    def test_dyadic_k2(self, dyadic):
        words = [w for L in (1, 2) for w in itertools.product((1, 2), repeat=L)]
        brute = sorted({CompositionWord(w).fixed_point(dyadic.map)[0] for w in words})
        assert brute == [0, F(1, 3), F(2, 3), 1]
        assert enumerate_P(dyadic, None, 2).points[:, 0].tolist() == [float(v) for v in brute]

    @pytest.mark.parametrize("i", [1, 2, 5, 10])
    def test_ex2_contains_y(self, i):
        P = enumerate_P(builtin("EX2", truncation=i), None, 2).points[:, 0]
        y = -2 * i * (i + 1) / (2 * i + 1)
        assert np.min(np.abs(P - y)) <= 1e-12 * (1 + abs(y))

    def test_matches_word_brute_force(self):
        fam = builtin("EX2", truncation=2)
        M = fam.alphabet_size()
        ref = {float(CompositionWord(w).fixed_point(fam.map)[0])
               for L in range(1, 4) for w in itertools.product(range(1, M + 1), repeat=L)}
        got = enumerate_P(fam, None, 3).points[:, 0]
        assert brute_hausdorff(np.array(sorted(ref))[:, None], got[:, None]) <= 1e-12
        assert len(got) <= len(ref)

    def test_budget(self, ex1):
        with pytest.raises(BudgetError, match="reduce N or k"):
            enumerate_P(ex1, 100, 4)
        with pytest.raises(IFSError):
            enumerate_P(ex1, 3, 0)

    def test_resolution_covers_attractor(self, dyadic):
        att = attractor_approx(dyadic, tol=1e-5).cloud
        for k in (4, 8):
            P = enumerate_P(dyadic, None, k)
            assert directed_hausdorff(att, P) <= P.resolution + 1e-5

    @pytest.mark.parametrize("name,N,k,lo,hi", [("EX1", 6, 4, 0.0, 0.5), ("DYADIC", 2, 12, 0.0, 1.0)])
    def test_contained_in_closed_invariant_interval(self, name, N, k, lo, hi):
        P = enumerate_P(builtin(name), N, k).points
        assert P.min() >= lo - 1e-9 and P.max() <= hi + 1e-9

    def test_minimality_dyadic(self, dyadic):
        att = attractor_approx(dyadic, tol=1e-4).cloud
        dists = [hausdorff(enumerate_P(dyadic, None, k), att) for k in (2, 4, 8, 12)]
        assert all(a > b for a, b in zip(dists, dists[1:]))
        assert dists[-1] <= 2.0**-10


class TestAttractor:
    def test_dyadic_near_unit_interval(self, dyadic):
        res = attractor_approx(dyadic, tol=1e-3)
        assert res.converged and res.reason == "tolerance"
        assert hausdorff(res.cloud, np.linspace(0, 1, 100001)[:, None]) <= 1e-3

    def test_single_map(self):
        res = attractor_approx(single("1/2", "0"))
        assert res.cloud.points.tolist() == [[0.0]]

    def test_ex1_two_maps_inside_half(self):
        res = attractor_approx(builtin("EX1"), 2, tol=1e-4)
        assert res.cloud.points.min() >= 0 and res.cloud.points.max() <= 0.5

    def test_refuses_ratio_near_one(self):
        with pytest.raises(PreconditionError):
            attractor_approx(single("1-1/10^10", "0"))

    def test_partial_result(self, dyadic):
        res = attractor_approx(dyadic, tol=1e-9, max_iters=3)
        assert not res.converged and res.reason == "max_iters" and res.iterations == 3

    def test_invariance_residuals(self, dyadic):
        res = attractor_approx(dyadic, tol=1e-3)
        inv = check_invariance(res.cloud, dyadic)
        assert inv.outer <= 2e-3 and inv.inner <= 2e-3

    def test_invariance_examples(self, dyadic):
        inv = check_invariance(PointCloud(pts(0)), single("1/2", "0"))
        assert (inv.outer, inv.inner) == (0, 0)
        assert check_invariance(PointCloud(pts(0)), dyadic).outer == 0.5


class TestEnlargement:
    def test_point(self):
        E = enlargement(PointCloud(pts(0)), 1)
        assert E.contains(np.array([[0.5], [1.5]])).tolist() == [True, False]

    def test_merged_intervals(self):
        E = enlargement(PointCloud(pts(0, 1)), 0.6)
        assert E.intervals == [(-0.6, 1.6)]

    def test_lemma_for_invariant_cloud(self, dyadic):
        A = attractor_approx(dyadic, tol=1e-4).cloud
        for eps in (0.01, 0.2):
            assert verify_enlargement_lemma(dyadic, None, A, eps).passed

    @pytest.mark.parametrize("N", [10, 100, 1000])
    def test_ex1_exact_inner_residual(self, N):
        fam = builtin("EX1", truncation=N)
        A = PointCloud.grid([0.0], [0.5], 1001)
        r = verify_enlargement_invariance(fam, N, A, [0.1]).results[0]
        u = F(1, N + 1)
        # the top gap under the last map is the largest: (1/2 + eps - u) u
        expected = (F(1, 2) + F(0.1) - u) * u
        assert r.outer_residual == 0 and r.outer_is_zero
        assert r.inner_residual == float(expected)
        assert r.inner_residual_half_N > r.inner_residual

    def test_ex1_acceptance_bound(self):
        N = 1000
        fam = builtin("EX1", truncation=N)
        A = PointCloud.grid([0.0], [0.5], 1001)
        r = verify_enlargement_invariance(fam, N, A, [0.1]).results[0]
        assert r.inner_residual <= 1 / (2 * (N + 1)) + A.resolution

    def test_dyadic_contrast(self, dyadic):
        A = PointCloud.grid([0.0], [1.0], 257)
        for eps in (0.05, 0.1, 0.3):
            r = verify_enlargement_invariance(dyadic, None, A, [eps]).results[0]
            assert r.inner_residual >= eps / 2 - 1e-12

    def test_eps_zero_is_check_invariance(self, dyadic):
        A = attractor_approx(dyadic, tol=1e-3).cloud
        r = verify_enlargement_invariance(dyadic, None, A, [0.0]).results[0]
        inv = check_invariance(A, dyadic)
        assert (r.outer_residual, r.inner_residual) == (inv.outer, inv.inner)

    def test_rectangle_bound(self):
        fam = family_from_dict({"dimension": 2, "truncation": 100, "declared_sup_ratio": 1,
                                "branches": [{"ratio": "i/(i+1)", "translation": ["1/(i+1)^2", "1/(i+1)^3"]}]})
        A = PointCloud.grid([0.0, 0.0], [0.5, 0.25], 11)
        r = verify_enlargement_invariance(fam, 100, A, [0.1], samples_per_axis=61).results[0]
        assert r.outer_is_zero
        assert r.inner_residual <= np.hypot(0.7, 0.45) / 101


class TestNondecreasing:
    def test_ex1(self):
        rep = verify_nondecreasing_interval(builtin("EX1", truncation=1000))
        assert rep.passed and rep.alpha == F(1, 1001) and rep.beta == F(1, 2)
        assert len(rep.checks) == 1000

    def test_dyadic(self, dyadic):
        rep = verify_nondecreasing_interval(dyadic)
        assert rep.passed and (rep.alpha, rep.beta) == (0, 1)

    def test_ex2_refused(self):
        with pytest.raises(PreconditionError, match="i=1"):
            verify_nondecreasing_interval(builtin("EX2"))

    def test_detects_escape(self):
        fam = family_from_dict({"dimension": 1, "truncation": 2, "declared_sup_ratio": None,
                                "branches": [{"ratio": "1/2", "translation": ["i"]}]})
        # fixed points 2 and 4; F_1(4) = 3 inside, F_2(2) = 3 inside: passes
        assert verify_nondecreasing_interval(fam).passed


class TestWitness:
    def test_closed_forms(self):
        w = witness_unbounded_P(builtin("EX2"), 100)
        assert w.y[0] == F(-4, 3) and w.z[0] == F(11, 3)
        assert w.closed_form_match and w.monotone_y and w.monotone_z
        assert float(w.max_abs_y) == pytest.approx(2 * 100 * 101 / 201)
        assert w.first_i_abs_y_over_100 == 100

    def test_cross_check_with_compose(self):
        fam = builtin("EX2")
        from cifs import compose
        for i in (1, 7, 50):
            assert fixed_point(compose(fam.materialize(1, i), fam.materialize(0, i)))[0] == F(-2 * i * (i + 1), 2 * i + 1)

    def test_needs_two_branches(self, ex1):
        with pytest.raises(PreconditionError):
            witness_unbounded_P(ex1, 5)
