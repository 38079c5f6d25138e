import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pattern_entropy import oracles
from pattern_entropy.distributions import (
    AnalysisConfig,
    Distribution,
    empirical_counts,
    empirical_distribution,
    iid_entropy,
    load_distribution,
    make_family,
    packed_entropy_0_1,
    packed_entropy_01,
    parse_family_spec,
    to_json,
)
from strategies import configs, distributions, wide_distributions


class TestConstruction:
    def test_rejects_unsorted_and_accepts_sorted(self):
        with pytest.raises(ValueError, match="ascending"):
            Distribution([0.7, 0.1, 0.2])
        assert Distribution([0.1, 0.2, 0.7]).k == 3

    def test_drops_zeros(self):
        d = Distribution([0.0, 0.0, 0.5, 0.5])
        assert d.k == 2

    def test_small_drift_renormalised(self):
        d = Distribution([0.25, 0.75 + 5e-7])
        assert math.fsum(d.theta) == pytest.approx(1.0, abs=1e-15)

    def test_large_drift_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            Distribution([0.2, 0.7])

    @pytest.mark.parametrize("bad", [[], [0.0], [-0.1, 1.1], [float("nan"), 1.0], [0.5, float("inf")]])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            Distribution(bad)

    def test_theta_is_read_only(self):
        d = Distribution([0.5, 0.5])
        with pytest.raises(ValueError):
            d.theta[0] = 1.0

    def test_hash_and_equality(self):
        a, b = Distribution([0.25, 0.75]), Distribution.from_weights([3, 1], normalize=True)
        assert a == b and hash(a) == hash(b)
        assert a != Distribution([0.5, 0.5])

    def test_from_weights_requires_normalise_flag_for_raw_weights(self):
        with pytest.raises(ValueError):
            Distribution.from_weights([3, 1])

    def test_uniform_detection(self):
        assert make_family("uniform", k=7).is_uniform()
        assert not Distribution([0.25, 0.75]).is_uniform()


@pytest.mark.parametrize(
    "theta, want",
    [([0.5, 0.5], 1.0), ([1.0], 0.0), ([0.25, 0.75], 0.8112781244591328)],
)
def test_iid_entropy_examples(theta, want):
    assert iid_entropy(Distribution(theta)) == pytest.approx(want, abs=1e-15)


@given(distributions(max_k=30))
def test_iid_entropy_matches_high_precision(d):
    assert iid_entropy(d) == pytest.approx(oracles.iid_entropy(d.theta), rel=1e-12, abs=1e-15)


class TestPackedEntropy:
    def test_large_letters_only(self):
        d = Distribution([0.5, 0.5])
        cfg = AnalysisConfig(100)
        assert packed_entropy_01(d, cfg) == 1.0
        assert packed_entropy_0_1(d, cfg) == 1.0

    def test_thousand_tiny_letters(self):
        tiny = np.full(1000, 1e-9)
        d = Distribution(np.concatenate([tiny, [1 - 1e-6]]))
        cfg = AnalysisConfig(1000, 0.1)
        phi = 1e-6
        big = float(d.theta[-1])
        want = -phi * math.log2(phi) - big * math.log2(big)
        assert packed_entropy_01(d, cfg) == pytest.approx(want, rel=1e-9)

    def test_bin0_empty_makes_both_packings_equal(self):
        # n = 10, eps = 0.5: bin 0 is (0, 10^-1.5], bin 1 up to 10^-0.5
        d = Distribution.from_weights([0.1, 0.15, 0.75], normalize=True)
        cfg = AnalysisConfig(10, 0.5)
        from pattern_entropy.grids import bin_stats

        st_ = bin_stats(d, cfg)
        assert st_.k_0 == 0 and st_.k_1 > 0
        assert packed_entropy_0_1(d, cfg) == packed_entropy_01(d, cfg)

    @given(wide_distributions(), configs)
    def test_merging_never_increases_entropy(self, d, cfg):
        a, b, h = packed_entropy_01(d, cfg), packed_entropy_0_1(d, cfg), iid_entropy(d)
        assert a <= b + 1e-12
        assert b <= h + 1e-12


class TestFamilies:
    def test_uniform(self):
        assert make_family("uniform", k=4).theta.tolist() == [0.25] * 4

    def test_power_alpha(self):
        d = make_family("power_alpha", n=100, alpha=1.0)
        assert d.k == 100 and np.allclose(d.theta, 0.01)

    def test_zipf(self):
        np.testing.assert_allclose(make_family("zipf", k=3, s=1).theta, [2 / 11, 3 / 11, 6 / 11], rtol=1e-15)

    def test_geometric_ratio(self):
        d = make_family("geometric", k=5, p=0.5)
        np.testing.assert_allclose(d.theta[1:] / d.theta[:-1], 2.0)

    def test_two_level(self):
        d = make_family("two_level", k_small=3, k_large=2, mass_small=0.3)
        np.testing.assert_allclose(d.theta, [0.1, 0.1, 0.1, 0.35, 0.35])

    @pytest.mark.parametrize(
        "kind, params",
        [("uniform", {}), ("zipf", {"k": 3, "s": -1}), ("geometric", {"k": 3, "p": 1.5}), ("nope", {}),
         ("uniform", {"k": 3, "s": 1}), ("uniform", {"k": 2.5})],
    )
    def test_bad_parameters(self, kind, params):
        with pytest.raises(ValueError):
            make_family(kind, **params)

    @given(st.integers(1, 300), st.floats(0.1, 3.0), st.floats(0.01, 0.99))
    def test_deterministic_and_sorted(self, k, s, p):
        for kind, params in (("zipf", {"k": k, "s": s}), ("geometric", {"k": k, "p": p})):
            a, b = make_family(kind, **params), make_family(kind, **params)
            assert a == b
            assert np.all(np.diff(a.theta) >= 0)
            assert math.fsum(a.theta) == pytest.approx(1.0, abs=1e-12)

    def test_family_spec(self):
        assert parse_family_spec("family:zipf,k=3,s=1") == make_family("zipf", k=3, s=1)
        with pytest.raises(ValueError):
            parse_family_spec("zipf,k=3")
        with pytest.raises(ValueError):
            parse_family_spec("family:zipf,k")


class TestEmpirical:
    @pytest.mark.parametrize(
        "text, want",
        [("aab", [1 / 3, 2 / 3]), ("abc", [1 / 3] * 3), ("lossless", [1 / 8, 1 / 8, 2 / 8, 4 / 8])],
    )
    def test_examples(self, text, want):
        np.testing.assert_allclose(empirical_distribution(list(text)).theta, want, rtol=1e-15)

    def test_letter_map_follows_ascending_frequency(self):
        d, letter = empirical_counts(list("lossless"))
        # e and o are tied at one occurrence: first occurrence (o) comes first
        assert letter == {"o": 1, "e": 2, "l": 3, "s": 4}
        for t, i in letter.items():
            assert d.theta[i - 1] == "lossless".count(t) / 8

    def test_empty(self):
        with pytest.raises(ValueError):
            empirical_counts([])


def test_load_distribution_forms():
    assert load_distribution("[0.75, 0.25]") == Distribution([0.25, 0.75])
    assert load_distribution("family:uniform,k=2") == Distribution([0.5, 0.5])
    with pytest.raises(ValueError):
        load_distribution('{"a": 1}')


@given(st.lists(st.integers(0, 40), min_size=1, max_size=400))
def test_json_round_trip_is_bit_exact(tokens):
    d = empirical_distribution(tokens)
    again = load_distribution(to_json(d))
    assert again == d
    assert json.loads(to_json(again)) == json.loads(to_json(d))


@given(distributions(max_k=40))
def test_constructed_distributions_satisfy_invariants(d):
    t = d.theta
    assert np.all(t > 0)
    assert np.all(np.diff(t) >= 0)
    assert abs(math.fsum(t) - 1.0) <= 1e-12


class TestAnalysisConfig:
    @pytest.mark.parametrize("n, eps", [(1, 0.1), (2.5, 0.1), (True, 0.1), (10, 0.0), (10, 1.0), (10, -0.2)])
    def test_rejects(self, n, eps):
        with pytest.raises(ValueError):
            AnalysisConfig(n, eps)

    def test_default_epsilon(self):
        assert AnalysisConfig(10).epsilon == 0.1
