import numpy as np
import pytest

from coopmac.channel import (
    CsitQuantizer,
    CustomCsit,
    FadingChannelSpec,
    FadingDistribution,
    NoCsit,
    ThresholdCsit,
    apply_csit,
    db_to_linear,
    rayleigh_density,
    sample_state,
)
from coopmac.errors import ValidationError


def test_db_to_linear():
    assert db_to_linear(20.0) == pytest.approx(100.0)
    assert np.allclose(db_to_linear([0.0, 10.0]), [1.0, 10.0])


def test_spec_validation():
    with pytest.raises(ValidationError):
        FadingChannelSpec(2, 1, [1.0], [1.0])  # wrong power length
    with pytest.raises(ValidationError):
        FadingChannelSpec(2, 1, [0.0], [1.0, 1.0])
    with pytest.raises(ValidationError):
        FadingChannelSpec(2, 1, [1.0], [-1.0, 1.0])
    with pytest.raises(ValidationError):
        FadingChannelSpec(2, 1, [1.0], [1.0, 1.0], FadingDistribution.deterministic([[1.0]]))
    with pytest.raises(ValidationError):
        FadingDistribution.deterministic([[-1.0, 1.0]])


def test_spec_is_immutable():
    spec = FadingChannelSpec.two_user(1.0, 2.0)
    with pytest.raises(ValueError):
        spec.power_budget[0] = 5.0
    assert spec.with_powers([3.0, 4.0]).power_budget.tolist() == [3.0, 4.0]


def test_sample_shape_and_seed():
    spec = FadingChannelSpec(3, 2, [1.0, 1.0], [1.0, 1.0, 1.0])
    a = sample_state(spec, 3, 10)
    assert a.shape == (10, 2, 3)
    assert np.array_equal(a, sample_state(spec, 3, 10))
    assert not np.array_equal(a, sample_state(spec, 4, 10))
    assert np.all(a >= 0)


def test_deterministic_samples():
    spec = FadingChannelSpec.two_user(1, 1, fading=FadingDistribution.deterministic([[0.5, 2.0]]))
    s = sample_state(spec, 0, 4)
    assert np.array_equal(s, np.tile([[0.5, 2.0]], (4, 1, 1)))


def test_custom_sampler_checked():
    good = FadingDistribution.custom(lambda rng, n, shape: np.ones((n,) + shape))
    spec = FadingChannelSpec.two_user(1, 1, fading=good)
    assert np.all(sample_state(spec, 0, 3) == 1.0)
    bad = FadingDistribution.custom(lambda rng, n, shape: -np.ones((n,) + shape))
    with pytest.raises(ValidationError):
        sample_state(FadingChannelSpec.two_user(1, 1, fading=bad), 0, 3)


def test_rayleigh_density_oracles():
    # frozen closed forms: f(1) = 2/e, mode at 1/sqrt(2)
    assert rayleigh_density(1.0) == pytest.approx(2 / np.e, rel=1e-15)
    grid = np.linspace(0, 3, 30001)
    assert grid[np.argmax(rayleigh_density(grid))] == pytest.approx(1 / np.sqrt(2), abs=1e-4)
    with pytest.raises(ValueError):
        rayleigh_density(-0.1)


def test_rayleigh_empirical_cdf():
    spec = FadingChannelSpec.two_user(1, 1)
    s = sample_state(spec, 0, 200_000)[:, 0, 0]
    for t in (0.5, 1.0, 1.5):
        assert np.mean(s <= t) == pytest.approx(1 - np.exp(-t * t), abs=5e-3)


def test_threshold_csit_symbols():
    q = ThresholdCsit((0, 1), [1.0, 2.0])
    states = np.array([[[0.0, 0.5]], [[0.0, 1.0]], [[0.0, 2.5]]])
    assert q(states).tolist() == [0, 1, 2]
    assert q.size == 3


def test_quantizer_and_apply():
    quant = CsitQuantizer([NoCsit(), ThresholdCsit((0, 0), [1.0])])
    assert quant.sizes == (1, 2)
    state = np.array([[1.5, 0.2]])
    assert apply_csit(quant, state).tolist() == [0, 1]
    assert apply_csit(quant, np.stack([state, state * 0.1])).shape == (2, 2)
    with pytest.raises(ValidationError):
        apply_csit(quant, np.ones((1, 3)))


def test_custom_csit_range_checked():
    q = CustomCsit(lambda s: np.full(s.shape[0], 3), 2)
    with pytest.raises(ValidationError):
        q(np.ones((2, 1, 2)))
