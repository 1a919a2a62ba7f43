from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cifs import (
    EmpiricalMeasure,
    IFSError,
    PreconditionError,
    ProbabilitySequence,
    builtin,
    chaos_game,
    enumerate_P,
    family_from_dict,
    hausdorff,
    kravchenko_sum,
    markov_residual,
    support_estimate,
)
from cifs import _kernels
from cifs.measure import wasserstein1_weighted
from cifs.oracles import PrefixSampler
from cifs.setops import directed_hausdorff

F = Fraction
HALF = ProbabilitySequence.geometric(F(1, 2))
UNIFORM2 = ProbabilitySequence.uniform(2)


def single(r="1/2", b="0"):
    return family_from_dict({"dimension": 1, "truncation": 1, "finite": True,
                             "branches": [{"ratio": r, "translation": [b]}]})


@pytest.fixture(scope="module")
def dyadic_measure():
    return chaos_game(builtin("DYADIC"), None, UNIFORM2, 10**6, rng_seed=42)


class TestSequence:
    def test_examples(self):
        assert HALF.sample_index(0.4) == 1
        assert HALF.sample_index(0.6) == 2
        assert ProbabilitySequence.finite([F(1, 3), F(2, 3)]).sample_index(0.5) == 2

    def test_boundaries_use_greater_or_equal(self):
        assert HALF.sample_index(0.5) == 1
        assert HALF.sample_index(0.75) == 2
        assert HALF.sample_index(1 - 2.0**-30) == 30

    def test_validation(self):
        with pytest.raises(IFSError):
            ProbabilitySequence.finite([0.5, 0.4])
        with pytest.raises(IFSError):
            ProbabilitySequence.finite([1.5, -0.5])
        with pytest.raises(IFSError):
            ProbabilitySequence.geometric(1)
        with pytest.raises(IFSError):
            ProbabilitySequence.finite([])

    def test_parse_and_describe(self):
        for text in ["geometric:1/3", "1/4,3/4"]:
            assert ProbabilitySequence.parse(text).describe() == text
        assert ProbabilitySequence.parse("uniform:4").weights == (F(1, 4),) * 4

    @pytest.mark.parametrize("q", [F(1, 2), F(1, 3), F(9, 10), F(99, 100)])
    def test_geometric_matches_prefix_walk(self, q):
        seq = ProbabilitySequence.geometric(q)
        walk = PrefixSampler(seq.weight)
        rng = np.random.default_rng(int(q.denominator))
        u = np.r_[rng.random(2000), [float(1 - q**k) for k in range(1, 40)],
                  [np.nextafter(float(1 - q**k), 2) for k in range(1, 40)]]
        u = u[u < 1.0]
        assert seq.sample_indices(u).tolist() == [walk(x) for x in u]
        with pytest.raises(IFSError):
            seq.sample_index(1.0)

    @settings(max_examples=50)
    @given(st.lists(st.integers(1, 20), min_size=1, max_size=8), st.floats(0, 1))
    def test_finite_matches_prefix_walk(self, raw, u):
        total = sum(raw)
        seq = ProbabilitySequence.finite([F(r, total) for r in raw])
        walk = PrefixSampler(seq.weight)
        assert seq.sample_index(u) == walk(u)
        edge = float(sum(F(r, total) for r in raw[:1]))
        assert seq.sample_index(edge) == walk(edge)

    def test_geometric_frequencies(self):
        rng = np.random.default_rng(5)
        n = 10**6
        idx = HALF.sample_indices(rng.random(n))
        for i in range(1, 11):
            p = 0.5**i
            assert abs(np.mean(idx == i) - p) <= 4 * np.sqrt(p * (1 - p) / n)

    def test_mass(self):
        assert HALF.mass(3) == F(7, 8)
        assert np.isclose(HALF.truncated_weights(3).sum(), 1.0)


class TestChaosGame:
    def test_single_map_converges_to_zero(self):
        m = chaos_game(single(), None, ProbabilitySequence.uniform(1), 1000, burn_in=60)
        assert np.abs(m.samples).max() <= 2.0**-60
        assert support_estimate(m, 0.1).points.tolist() == [[0.0]]

    def test_dyadic_uniform_cdf(self, dyadic_measure):
        x = np.sort(dyadic_measure.samples[:, 0])
        n = len(x)
        k = np.arange(1, n + 1)
        assert max(np.max(k / n - x), np.max(x - (k - 1) / n)) <= 1e-2

    def test_dyadic_biased_mean(self):
        m = chaos_game(builtin("DYADIC"), None, ProbabilitySequence.finite([F(1, 3), F(2, 3)]), 10**6)
        # m = rho_1 m/2 + rho_2 (m/2 + 1/2)  =>  m = 2/3
        assert abs(m.samples.mean() - 2 / 3) <= 3e-3

    def test_reproducible(self):
        a = chaos_game(builtin("EX1", truncation=20), 20, HALF, 5000, rng_seed=7)
        b = chaos_game(builtin("EX1", truncation=20), 20, HALF, 5000, rng_seed=7)
        c = chaos_game(builtin("EX1", truncation=20), 20, HALF, 5000, rng_seed=8)
        assert np.array_equal(a.samples, b.samples) and not np.array_equal(a.samples, c.samples)

    @pytest.mark.parametrize("fam,N", [("EX1", 20), ("EX2", 5), ("DYADIC", None)])
    def test_backends_bit_identical(self, fam, N):
        f = builtin(fam, truncation=20)
        seq = UNIFORM2 if fam == "DYADIC" else HALF
        a = chaos_game(f, N, seq, 20000, backend=_kernels.python)
        b = chaos_game(f, N, seq, 20000)
        assert np.array_equal(a.samples, b.samples)

    def test_two_dimensional_backends(self):
        f = family_from_dict({"dimension": 2, "truncation": 3, "declared_sup_ratio": None,
                              "branches": [{"ratio": "1/3", "translation": ["i", "1/i"]}]})
        seq = ProbabilitySequence.uniform(3)
        a = chaos_game(f, None, seq, 5000, backend=_kernels.python)
        assert np.array_equal(a.samples, chaos_game(f, None, seq, 5000).samples)

    def test_truncation_resamples_reported(self):
        m = chaos_game(builtin("EX1", truncation=3), 3, HALF, 10**4)
        assert m.meta["truncation_resamples"] > 0
        assert m.meta["alphabet"] == 3

    def test_refusal(self):
        with pytest.raises(PreconditionError):
            chaos_game(single("1-1/10^10"), None, ProbabilitySequence.uniform(1), 10)

    def test_merge(self):
        a = EmpiricalMeasure(np.zeros((3, 1)))
        b = EmpiricalMeasure(np.ones((2, 1)))
        m = a.merge(b)
        assert m.n == 5 and m.samples.mean() == pytest.approx(0.4)


class TestResidual:
    def test_fixed_point_measure(self):
        m = EmpiricalMeasure(np.zeros((10, 1)))
        assert markov_residual(m, single(), None, ProbabilitySequence.uniform(1)).residual == 0

    def test_dyadic(self, dyadic_measure):
        assert markov_residual(dyadic_measure, builtin("DYADIC"), None, UNIFORM2).residual <= 5e-3

    def test_wrong_measure(self):
        # uniform on [0, 2] against its image, uniform on [0, 3/2]: W1 = 1/4
        m = EmpiricalMeasure(np.linspace(0, 2, 200001)[:, None])
        r = markov_residual(m, builtin("DYADIC"), None, UNIFORM2).residual
        assert r >= 0.2 and r == pytest.approx(0.25, abs=1e-4)

    def test_w1_against_sorted_quantiles(self):
        rng = np.random.default_rng(0)
        x, y = rng.random(500), rng.random(500) * 2
        w = np.full(500, 1 / 500)
        assert wasserstein1_weighted(x, w, y, w) == pytest.approx(np.abs(np.sort(x) - np.sort(y)).mean(), rel=1e-12)

    def test_decreases_with_n(self):
        res = [markov_residual(chaos_game(builtin("DYADIC"), None, UNIFORM2, n), builtin("DYADIC"), None,
                               UNIFORM2).residual for n in (10**4, 10**5, 10**6)]
        assert res[1] <= 2 * res[0] and res[2] <= 2 * res[1] and res[2] < res[0]

    def test_two_dimensional_histogram(self):
        f = family_from_dict({"dimension": 2, "truncation": 4, "declared_sup_ratio": None,
                              "branches": [{"ratio": "1/2", "translation": ["(i-1)/4", "0"]}]})
        seq = ProbabilitySequence.uniform(4)
        m = chaos_game(f, None, seq, 10**5)
        r = markov_residual(m, f, None, seq, h=1 / 32)
        assert r.method == "histogram_l1" and r.residual < 0.1 and r.support_hausdorff <= 1 / 16
        with pytest.raises(IFSError):
            markov_residual(m, f, None, seq)


class TestSupport:
    def test_point_mass(self):
        assert support_estimate(EmpiricalMeasure(np.zeros((4, 1))), 0.1).points.tolist() == [[0.0]]

    def test_dyadic_all_cells(self, dyadic_measure):
        h = 1 / 128
        s = support_estimate(dyadic_measure, h, origin=0.0)
        assert len(s) == 128
        assert np.allclose(s.points[:, 0], (np.arange(128) + 0.5) * h)

    def test_dyadic_contains_D(self, dyadic_measure):
        s = support_estimate(dyadic_measure, 1 / 128)
        assert directed_hausdorff(np.array([[0.0], [1.0]]), s) <= 2 / 128

    def test_dyadic_matches_P(self, dyadic_measure):
        h = 1 / 128
        P = enumerate_P(builtin("DYADIC"), None, 12)
        assert hausdorff(support_estimate(dyadic_measure, h), P) <= 2 * h + P.resolution

    def test_min_count(self, dyadic_measure):
        counts = dyadic_measure.histogram(1 / 128)[1]
        assert len(support_estimate(dyadic_measure, 1 / 128, min_count=2)) == int(np.sum(counts >= 2))

    def test_bad_cell(self, dyadic_measure):
        with pytest.raises(IFSError):
            support_estimate(dyadic_measure, 0)


class TestKravchenko:
    def test_ex1(self):
        rep = kravchenko_sum(builtin("EX1", truncation=1000), None, HALF)
        assert rep.exact
        assert rep.partial_sum <= F(1, 4)
        assert rep.partial_sum <= rep.diameter_bound
        assert rep.diameter == F(1, 2) - F(1, 1001)

    def test_ex1_partial_sums_closed_form(self):
        # d(x_1, x_i) = 1/2 - 1/(i+1); compare with a direct Fraction sum
        rep = kravchenko_sum(builtin("EX1", truncation=50), None, HALF)
        ref = sum(F(1, 2**i) * (F(1, 2) - F(1, i + 1)) for i in range(1, 51))
        assert rep.partial_sum == ref

    def test_single_map(self):
        assert kravchenko_sum(single(), None, ProbabilitySequence.uniform(1)).partial_sum == 0

    def test_dyadic(self):
        assert kravchenko_sum(builtin("DYADIC"), None, UNIFORM2).partial_sum == F(1, 2)

    def test_float_path(self):
        f = family_from_dict({"dimension": 2, "truncation": 3, "declared_sup_ratio": None,
                              "branches": [{"ratio": "0", "translation": ["i", "0"]}]})
        rep = kravchenko_sum(f, None, ProbabilitySequence.uniform(3))
        assert not rep.exact and rep.partial_sum == pytest.approx((1 + 2) / 3)
        assert rep.diameter == pytest.approx(2)
