import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pattern_entropy import oracles
from pattern_entropy.distributions import Distribution, make_family
from pattern_entropy.errors import InfeasibleError
from pattern_entropy.patterns import enumerate_patterns, extract_pattern
from pattern_entropy.probability import (
    SAMPLER,
    log2_pattern_prob,
    log2_pattern_prob_uniform,
    log2_profile_prob,
    pattern_prob_bruteforce,
    pattern_prob_exact,
    pattern_prob_uniform,
    sample_sequence,
    sequence_prob,
)
from strategies import distributions, patterns

D235 = Distribution([0.2, 0.3, 0.5])


class TestSequenceProb:
    def test_examples(self):
        assert sequence_prob(Distribution([0.5, 0.5]), [1, 2]) == pytest.approx(0.25, rel=1e-15)
        assert sequence_prob(D235, []) == 1.0
        assert sequence_prob(D235, [3, 3, 1]) == pytest.approx(0.05, rel=1e-14)

    def test_letter_out_of_range(self):
        with pytest.raises(ValueError):
            sequence_prob(D235, [4])


def _sum_over_sequences(d, p):
    """Probability of pattern p by summing every length-n sequence that induces it."""
    import itertools

    total = 0.0
    for x in itertools.product(range(1, d.k + 1), repeat=len(p)):
        if extract_pattern(x) == tuple(p):
            total += sequence_prob(d, x)
    return total


class TestPatternProb:
    @pytest.mark.parametrize(
        "d, p, want",
        [
            (D235, (1, 2), 0.62),
            (D235, (1,), 1.0),
            (D235, (1, 1), 0.38),
            (Distribution([0.5, 0.5]), (1, 2, 3), 0.0),
            (Distribution([0.5, 0.5]), (1, 2), 0.5),
            (Distribution([1.0]), (1, 1), 1.0),
        ],
    )
    def test_examples(self, d, p, want):
        assert pattern_prob_exact(d, p) == pytest.approx(want, rel=1e-14, abs=1e-300)

    def test_examples_match_sequence_enumeration(self):
        assert _sum_over_sequences(D235, (1, 2)) == pytest.approx(0.62, rel=1e-14)
        assert _sum_over_sequences(D235, (1, 1)) == pytest.approx(0.38, rel=1e-14)

    def test_invalid_pattern(self):
        with pytest.raises(ValueError):
            pattern_prob_exact(D235, (2, 1))

    def test_cap(self):
        d = make_family("uniform", k=80)
        with pytest.raises(InfeasibleError, match="m=70"):
            log2_profile_prob(d, [1] * 70)

    def test_warning_above_practical_threshold(self):
        d = make_family("zipf", k=30, s=1.0)
        # escalate so the 2^25-state DP never actually runs
        with warnings.catch_warnings():
            warnings.simplefilter("error", RuntimeWarning)
            with pytest.raises(RuntimeWarning, match="2\\^25"):
                log2_profile_prob(d, [1] * 25, max_m=25)

    def test_log_domain_for_tiny_probabilities(self):
        # a long pattern under a skewed source underflows the linear range
        d = Distribution.from_weights([1e-6, 1e-3, 1.0], normalize=True)
        p = (1, 2, 3) + (1,) * 400
        lp = log2_pattern_prob(d, p)
        want = math.log2(oracles.pattern_prob(d.theta, p)) if oracles.pattern_prob(d.theta, p) > 0 else None
        assert want is not None
        assert lp == pytest.approx(want, abs=1e-9)
        assert np.isfinite(lp)

    def test_matches_mpmath(self):
        d = Distribution.from_weights([0.05, 0.15, 0.3, 0.5], normalize=True)
        for p in [(1, 2, 1, 3, 3, 4), (1, 1, 2, 2, 2), (1, 2, 3, 1, 2, 3, 1)]:
            assert pattern_prob_exact(d, p) == pytest.approx(oracles.pattern_prob(d.theta, p), rel=1e-13)

    @given(distributions(max_k=6), patterns(min_size=1, max_size=9, max_m=5))
    def test_dp_matches_bruteforce(self, d, p):
        a, b = pattern_prob_exact(d, p), pattern_prob_bruteforce(d, p)
        assert a == pytest.approx(b, rel=1e-12, abs=0.0)

    @given(st.integers(1, 4), st.integers(1, 7), st.integers(0, 2**32 - 1))
    def test_normalisation(self, k, n, seed):
        rng = np.random.default_rng(seed)
        d = Distribution.from_weights(rng.uniform(0.01, 1, size=k), normalize=True)
        total = math.fsum(pattern_prob_exact(d, p) for p in enumerate_patterns(n))
        assert total == pytest.approx(1.0, abs=1e-9)

    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6), st.randoms(), patterns(min_size=1, max_size=8))
    def test_depends_only_on_the_multiset(self, w, rnd, p):
        shuffled = list(w)
        rnd.shuffle(shuffled)
        a = pattern_prob_exact(Distribution.from_weights(w, normalize=True), p)
        b = pattern_prob_exact(Distribution.from_weights(shuffled, normalize=True), p)
        assert a == b

    @given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=5), patterns(min_size=1, max_size=8))
    def test_zero_letters_change_nothing(self, w, p):
        a = pattern_prob_exact(Distribution.from_weights(w, normalize=True), p)
        b = pattern_prob_exact(Distribution.from_weights(w + [0.0, 0.0], normalize=True), p)
        assert a == b


class TestUniform:
    @pytest.mark.parametrize("k, p, want", [(2, (1, 2), 0.5), (3, (1, 1), 1 / 3), (1, (1, 1, 1), 1.0), (2, (1, 2, 3), 0.0)])
    def test_examples(self, k, p, want):
        assert pattern_prob_uniform(k, p) == pytest.approx(want, rel=1e-15)

    @given(st.integers(1, 8), patterns(min_size=1, max_size=8))
    def test_agrees_with_dp(self, k, p):
        a = pattern_prob_uniform(k, p)
        b = pattern_prob_exact(make_family("uniform", k=k), p)
        assert a == pytest.approx(b, rel=1e-12, abs=0.0)

    def test_large_alphabet_in_log_space(self):
        p = tuple(range(1, 5001)) + (1,) * 5000
        lp = log2_pattern_prob_uniform(10**6, p)
        want = (math.lgamma(10**6 + 1) - math.lgamma(10**6 - 5000 + 1)) / math.log(2) - 10**4 * math.log2(10**6)
        assert lp == pytest.approx(want, rel=1e-12)


class TestSampling:
    def test_sampler_tag(self):
        assert SAMPLER == "numpy-pcg64/inverse-cdf/v1"

    def test_single_letter(self):
        assert sample_sequence(Distribution([1.0]), 3, seed=5).tolist() == [1, 1, 1]

    def test_deterministic(self):
        d = make_family("zipf", k=50, s=1.1)
        assert np.array_equal(sample_sequence(d, 1000, 9), sample_sequence(d, 1000, 9))
        assert not np.array_equal(sample_sequence(d, 1000, 9), sample_sequence(d, 1000, 10))

    def test_law_of_large_numbers(self):
        x = sample_sequence(Distribution([0.5, 0.5]), 10**5, seed=1)
        assert abs(np.mean(x == 1) - 0.5) <= 0.01

    def test_frequencies(self):
        d = Distribution([0.1, 0.2, 0.7])
        x = sample_sequence(d, 200_000, seed=3)
        freq = np.bincount(x, minlength=4)[1:] / x.size
        np.testing.assert_allclose(freq, d.theta, atol=0.005)

    def test_negative_length(self):
        with pytest.raises(ValueError):
            sample_sequence(Distribution([1.0]), -1, 0)
