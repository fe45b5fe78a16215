import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burstymac.core import (
    AntennaConfig,
    AsymmetricConfigError,
    DomainError,
    EnumerationCapError,
    ValidationError,
    dist_from_json,
    dist_to_json,
    load_distribution,
    make_custom,
    make_dependent,
    make_independent,
    marginal_activity_prob,
    marginalize,
    mix,
    save_distribution,
)

from conftest import independent_law


def test_config_validation():
    assert AntennaConfig(3, 2, 4, 1).M == (2, 2, 2)
    assert AntennaConfig(2, [1, 3], 2, 0).is_symmetric is False
    with pytest.raises(ValidationError):
        AntennaConfig(0, 1, 1, 1)
    with pytest.raises(ValidationError):
        AntennaConfig(2, [1, 0], 1, 1)
    with pytest.raises(ValidationError):
        AntennaConfig(2, 1, 0, 1)
    with pytest.raises(ValidationError):
        AntennaConfig(2, 1, 1, -1)
    with pytest.raises(ValidationError):
        AntennaConfig(2, [1, 2, 3], 1, 1)
    with pytest.raises(AsymmetricConfigError):
        AntennaConfig(2, [1, 2], 1, 1).m


def test_independent_degenerate_and_uniform():
    d = make_independent(0.0, 3)
    assert d.prob([]) == 1.0
    assert d.mass.sum() == 1.0
    u = make_independent(0.5, 2)
    assert np.all(u.mass == 0.25)


def test_independent_pair_mass_matches_binomial():
    d = make_independent(0.25, 4)
    pairs = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    for pair in pairs:
        assert d.prob(pair) == pytest.approx(0.03515625, abs=1e-15)
    assert sum(d.prob(pair) for pair in pairs) == pytest.approx(math.comb(4, 2) * 0.25**2 * 0.75**2, abs=1e-15)


def test_independent_matches_product_enumeration():
    law = independent_law(0.3, 5)
    d = make_independent(0.3, 5)
    for pattern, prob in law.items():
        assert d.prob(pattern) == pytest.approx(prob, abs=1e-15)


@pytest.mark.parametrize("p", [-0.1, 1.1, float("nan")])
def test_bad_probability(p):
    with pytest.raises(DomainError):
        make_independent(p, 2)
    with pytest.raises(DomainError):
        make_dependent(p, 2)


def test_dependent():
    d = make_dependent(0.3, 4)
    assert d.prob([1, 2, 3, 4]) == 0.3
    assert d.prob([]) == 0.7
    assert sum(1 for _ in d.items()) == 2
    assert make_dependent(1.0, 2).prob([1, 2]) == 1.0
    for k in range(1, 5):
        assert marginal_activity_prob(d, k) == pytest.approx(0.3, abs=1e-15)


def test_custom_valid_and_invalid():
    d = make_custom([([], 0.5), ([1], 0.25), ([2], 0.25)])
    assert d.K == 2
    assert d.prob([1, 2]) == 0.0
    assert d.warning is None
    with pytest.raises(ValidationError):
        make_custom([([], 0.5), ([1], 0.6)])
    with pytest.raises(ValidationError):
        make_custom([([], 0.5), ([1], 0.25), ([1], 0.25)])
    with pytest.raises(ValidationError):
        make_custom([([], 1.5), ([1], -0.5)])


def test_custom_warns_on_unequal_marginals():
    d = make_custom([([], 0.5), ([1], 0.5)], K=2)
    assert d.warning is not None


def test_exchangeable_mixture_marginals():
    d = mix([make_independent(0.4, 3), make_dependent(0.4, 3)], [0.5, 0.5])
    for k in (1, 2, 3):
        assert marginal_activity_prob(d, k) == pytest.approx(0.4, abs=1e-12)
    # mixture arithmetic: full set 0.5*0.064 + 0.5*0.4
    assert d.prob([1, 2, 3]) == pytest.approx(0.232, abs=1e-15)


def test_marginalize_examples():
    assert marginalize(make_independent(0.3, 4), [1, 2]).allclose(make_independent(0.3, 2))
    dep = marginalize(make_dependent(0.3, 4), [2, 3])
    assert dep.prob([1, 2]) == pytest.approx(0.3) and dep.prob([]) == pytest.approx(0.7)
    assert dep.prob([1]) == 0.0
    law = make_custom([([], 0.2), ([1], 0.1), ([1, 2], 0.3), ([1, 3], 0.15), ([2, 3], 0.25)])
    user1 = marginalize(law, [1])
    # pooling: user 1 active in {1}, {1,2}, {1,3}
    assert user1.prob([1]) == pytest.approx(0.55, abs=1e-15)
    assert user1.prob([]) == pytest.approx(0.45, abs=1e-15)
    with pytest.raises(DomainError):
        marginalize(law, [])
    with pytest.raises(DomainError):
        marginalize(law, [4])


def test_marginal_activity_prob_examples():
    assert marginal_activity_prob(make_independent(0.25, 4), 3) == pytest.approx(0.25)
    assert marginal_activity_prob(make_dependent(0.7, 2), 1) == pytest.approx(0.7)
    with pytest.raises(DomainError):
        marginal_activity_prob(make_dependent(0.7, 2), 3)


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        make_independent(0.5, 21)
    assert make_dependent(0.5, 21, allow_large=True).K == 21


def test_json_round_trip(tmp_path):
    d = mix([make_independent(0.4, 3), make_dependent(0.4, 3)], [0.5, 0.5])
    path = tmp_path / "law.json"
    save_distribution(d, path)
    assert load_distribution(path).allclose(d, atol=0)
    doc = {"K": 2, "mass": [{"pattern": [], "p": 0.5}, {"pattern": [1, 2], "p": 0.5}]}
    assert dist_from_json(doc).prob([1, 2]) == 0.5
    assert dist_to_json(dist_from_json(doc)) == doc
    with pytest.raises(ValidationError):
        dist_from_json({"K": 2})


probs = st.floats(0, 1, allow_nan=False)
sizes = st.integers(1, 7)


@given(p=probs, K=sizes)
def test_constructors_normalized(p, K):
    for d in (make_independent(p, K), make_dependent(p, K)):
        assert abs(d.mass.sum() - 1) < 1e-12
        assert np.all(d.mass >= 0)


@given(p=probs, K=sizes)
def test_identical_marginals(p, K):
    ind, dep = make_independent(p, K), make_dependent(p, K)
    for k in range(1, K + 1):
        assert marginal_activity_prob(ind, k) == pytest.approx(p, abs=1e-12)
        assert marginal_activity_prob(dep, k) == pytest.approx(p, abs=1e-12)


@settings(max_examples=50)
@given(
    weights=st.lists(st.floats(0.01, 1), min_size=8, max_size=8),
    data=st.data(),
)
def test_marginalize_idempotent_and_nested(weights, data):
    w = np.array(weights) / sum(weights)
    law = make_custom([([i + 1 for i in range(3) if m >> i & 1], w[m]) for m in range(8)], K=3)
    subset = sorted(data.draw(st.sets(st.integers(1, 3), min_size=1)))
    once = marginalize(law, subset)
    assert marginalize(once, range(1, len(subset) + 1)).allclose(once)
    # nested: marginalize to S, then to the first element of S
    inner = marginalize(once, [1])
    assert inner.allclose(marginalize(law, [subset[0]]))
