import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from coopmac.channel import FadingChannelSpec
from coopmac.errors import CapabilityError, NumericalError
from coopmac.expectation import Quadrature
from coopmac.equivalence import (
    LiuUlukusPolicy,
    LiuUlukusValues,
    equivalence_suite,
    from_liu_ulukus,
    liu_ulukus_from_policy,
    policy_from_liu_ulukus,
    region_eq43,
    region_eq43_arguments,
    region_eq45,
    region_eq45_arguments,
    to_liu_ulukus,
)
from coopmac.fading import TransmitPolicy

N = 8
pos = arrays(float, N, elements=st.floats(0.05, 5.0))
unit = arrays(float, N, elements=st.floats(0.0, 1.0))


def table_policy(phi, rho):
    """Perfect-CSIT policy returning fixed per-state values."""
    return TransmitPolicy((lambda s: phi[:, 0], lambda s: phi[:, 1]),
                          (lambda s: rho[:, 0], lambda s: rho[:, 1]))


@settings(max_examples=100, deadline=None)
@given(pos, pos, arrays(float, N, elements=st.floats(0, 20)),
       arrays(float, N, elements=st.floats(0, 20)), unit, unit)
def test_forward_preserves_arguments(s1, s2, f1, f2, r1, r2):
    states = np.stack([s1, s2], axis=1)[:, None, :]
    pol = table_policy(np.stack([f1, f2], 1), np.stack([r1, r2], 1))
    a = region_eq43_arguments(pol, states)
    b = region_eq45_arguments(to_liu_ulukus(pol, states))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(pos, pos, arrays(float, N, elements=st.floats(0, 20)),
       arrays(float, N, elements=st.floats(0, 20)),
       arrays(float, N, elements=st.floats(0, 20)), unit)
def test_backward_round_trip(s1, s2, p0, p1, p2, vr):
    states = np.stack([s1, s2], axis=1)[:, None, :]
    v = LiuUlukusValues(p0, p1, p2, vr)
    phi, rho = from_liu_ulukus(v, states)
    assert np.all((rho >= 0) & (rho <= 1))
    back = to_liu_ulukus(table_policy(phi, rho), states)
    assert np.allclose(back.stack()[:, :3], v.stack()[:, :3], rtol=1e-10, atol=1e-10)
    ok = p0 > 1e-9
    assert np.allclose(back.varrho[ok], vr[ok], atol=1e-8)


def test_zero_gain_singular():
    states = np.array([[[0.0, 1.0]]])
    v = LiuUlukusValues(np.array([1.0]), np.array([0.0]), np.array([0.0]), np.array([0.5]))
    with pytest.raises(NumericalError):
        from_liu_ulukus(v, states)
    # no power on the dead link is fine
    v = LiuUlukusValues(np.array([1.0]), np.array([0.0]), np.array([0.0]), np.array([0.0]))
    phi, rho = from_liu_ulukus(v, states)
    assert phi[0, 0] == 0.0 and rho[0, 0] == 0.0


def test_wrong_shape():
    with pytest.raises(CapabilityError):
        to_liu_ulukus(TransmitPolicy.constant([1, 1, 1], [0, 0, 0]), np.ones((2, 1, 3)))


def test_regions_coincide():
    spec = FadingChannelSpec.two_user(10.0, 5.0)
    grid = Quadrature(16).draw(spec)
    pol = TransmitPolicy((lambda s: 10.0 * np.ones(len(s)), lambda s: 5.0 * np.ones(len(s))),
                         (lambda s: 0.3 + 0.4 * (s[:, 0, 0] > 1), lambda s: 0.5 * np.ones(len(s))))
    a = region_eq43(pol, spec, grid)
    b = region_eq45(liu_ulukus_from_policy(pol), spec, grid)
    assert np.allclose(a.subset_bounds, b.subset_bounds, atol=1e-12)
    assert np.allclose(a.total_bounds, b.total_bounds, atol=1e-12)
    lu = LiuUlukusPolicy(lambda h: h[:, 0] * h[:, 1], lambda h: 0.5 * h[:, 0],
                         lambda h: 0.5 * h[:, 1], lambda h: 0.5 + 0 * h[:, 0])
    c = region_eq45(lu, spec, grid)
    d = region_eq43(policy_from_liu_ulukus(lu), spec, grid)
    assert np.allclose(c.subset_bounds, d.subset_bounds, atol=1e-12)
    assert np.allclose(c.total_bounds, d.total_bounds, atol=1e-12)


def test_suite_small():
    res = equivalence_suite(policies=20, nodes=8, seed=1)
    assert res["passed"]
    assert res["states"] == 64
    assert res["max_argument_error"] <= 1e-12
