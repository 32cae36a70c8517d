import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from coopmac.errors import CapabilityError, ValidationError
from coopmac.expectation import capacity_fn
from coopmac.region import (
    RateConstraintSet,
    RatePoint,
    check_monotone,
    check_submodular,
    effective_bounds,
    mask_subset,
    membership,
    pareto_filter,
    subset_mask,
    support_value,
    vertices,
)


def gaussian_set(gains, extra=0.0, has_common=True):
    """Bounds C(sum of gains in L): concave of modular, hence a polymatroid."""
    p = len(gains)
    a = np.array([[capacity_fn(sum(gains[k] for k in mask_subset(m, p))) for m in range(1 << p)]])
    return RateConstraintSet(a, [a[0, -1] + extra], has_common)


gains_st = st.lists(st.floats(0.0, 50.0), min_size=1, max_size=3)


def lp_support(cs, w):
    """Independent oracle: solve the weighted-sum LP with every constraint written out."""
    p, off = cs.num_tx, int(cs.has_common)
    rows, rhs = [], []
    for j in range(cs.num_rx):
        for m in range(1, 1 << p):
            row = np.zeros(cs.dim)
            for k in mask_subset(m, p):
                row[off + k] = 1
            rows.append(row)
            rhs.append(cs.subset_bounds[j, m])
        rows.append(np.ones(cs.dim))
        rhs.append(cs.total_bounds[j])
    res = linprog(-np.asarray(w), A_ub=rows, b_ub=rhs, bounds=(0, None), method="highs")
    return -res.fun


def pentagon():
    return RateConstraintSet.from_bounds({(0,): 0.5, (1,): 0.5, (0, 1): capacity_fn(2.0)},
                                         has_common=False)


def test_pentagon_vertices():
    pts = [tuple(np.round(v.as_array(), 6)) for v in vertices(pentagon())]
    assert pts == [(0.0, 0.0), (0.0, 0.5), (0.292481, 0.5), (0.5, 0.0), (0.5, 0.292481)]


def test_from_bounds_fills_missing_subsets():
    cs = RateConstraintSet.from_bounds({(0, 1): 2.0, (0,): 1.0})
    assert cs.bound((1,)) == 2.0 and cs.total_bounds[0] == 2.0


def test_validation():
    with pytest.raises(ValidationError):
        RateConstraintSet(np.zeros((1, 3)), [0.0])
    with pytest.raises(ValidationError):
        RateConstraintSet([[0, 2.0, 1.0, 1.5]], [3.0])  # not monotone
    with pytest.raises(ValidationError):
        RateConstraintSet([[0, 1.0, 1.0, 2.0]], [1.0])  # full subset above total
    with pytest.raises(ValidationError):
        RatePoint((-1.0,))


def test_membership_reports_violation():
    cs = pentagon()
    assert membership(RatePoint((0.2, 0.2)), cs).ok
    res = membership(RatePoint((0.45, 0.45)), cs)
    assert not res.ok and res.violation.subset == (0, 1)
    res = membership(RatePoint((0.6, 0.0)), cs)
    assert res.violation.subset == (0,)
    with pytest.raises(ValidationError):
        membership(RatePoint((0.1, 0.1), 0.1), cs)


def test_total_violation_with_common():
    cs = RateConstraintSet.from_bounds({(0,): 1, (1,): 1, (0, 1): 1.5}, total=2.0)
    res = membership(RatePoint((0.5, 0.5), 1.1), cs)
    assert not res.ok and res.violation.subset is None


def test_multi_receiver_effective_bounds():
    a = [[0, 1, 2, 2.5], [0, 2, 1, 2.5]]
    cs = RateConstraintSet(a, [3.0, 2.8], has_common=True)
    eff = effective_bounds(cs)
    assert eff.subset_bounds.tolist() == [[0, 1, 1, 2.5]] and eff.total_bounds.tolist() == [2.8]
    assert support_value(cs, [1, 0, 0])[0] == pytest.approx(2.8)


def test_support_ties_prefer_larger_sum():
    value, pt = support_value(pentagon(), [1.0, 0.0])
    assert value == pytest.approx(0.5)
    assert pt.private_rates == pytest.approx((0.5, 0.292481), abs=1e-6)


def test_support_weight_checks():
    with pytest.raises(ValidationError):
        support_value(pentagon(), [1.0])
    with pytest.raises(ValidationError):
        support_value(pentagon(), [0.0, 0.0])


def test_vertex_limit_and_linprog_path():
    cs = gaussian_set([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(CapabilityError):
        vertices(cs)
    w = [0.1, 0.2, 0.3, 0.4, 0.5]
    assert support_value(cs, w)[0] == pytest.approx(lp_support(cs, w), abs=1e-8)


def test_check_submodular_detects_violation():
    cs = RateConstraintSet([[0, 1.0, 1.0, 3.0]], [3.0], has_common=False)
    ok, witness = check_submodular(cs)
    assert not ok and witness == (0, (0,), (1,))


def test_to_dict_is_one_based():
    d = pentagon().to_dict()
    assert [s["subset"] for s in d["receivers"][0]["subsets"]] == [[1], [2], [1, 2]]


def test_pareto_filter():
    pts = np.array([[1, 0], [0, 1], [0.5, 0.5], [0.4, 0.4], [1, 0]])
    assert pareto_filter(pts).tolist() == [0, 1, 2]


@settings(max_examples=60, deadline=None)
@given(gains_st, st.floats(0, 2), st.booleans())
def test_polymatroid_invariants(gains, extra, has_common):
    cs = gaussian_set(gains, extra, has_common)
    assert check_monotone(cs)[0]
    assert check_submodular(cs)[0]
    for v in vertices(cs):
        assert membership(v, cs, tol=1e-8).ok


@settings(max_examples=60, deadline=None)
@given(gains_st, st.floats(0, 2), st.booleans(), st.data())
def test_support_matches_lp_oracle(gains, extra, has_common, data):
    cs = gaussian_set(gains, extra, has_common)
    w = data.draw(st.lists(st.floats(0.0, 1.0), min_size=cs.dim, max_size=cs.dim)
                  .filter(lambda v: max(v) > 0.01))
    value, pt = support_value(cs, w)
    assert value == pytest.approx(lp_support(cs, w), abs=1e-7)
    assert membership(pt, cs, tol=1e-8).ok


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 20.0), min_size=2, max_size=3))
def test_private_vertices_are_chain_points(gains):
    # vertices of a polymatroid on the private rates are the successive-decoding points
    cs = gaussian_set(gains, 0.0, has_common=False)
    p = len(gains)
    got = {tuple(np.round(v.as_array(), 8)) for v in vertices(cs)}
    for order in itertools.permutations(range(p)):
        r = np.zeros(p)
        prev = 0.0
        for i, k in enumerate(order):
            val = cs.subset_bounds[0, subset_mask(order[: i + 1])]
            r[k] = val - prev
            prev = val
        assert tuple(np.round(r, 8)) in got
