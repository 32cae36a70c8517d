"""Rate polytopes with subset-sum constraints.

A :class:`RateConstraintSet` stores, for every receiver ``j`` and every
nonempty subset ``L`` of transmitters, a bound on ``sum(R[k] for k in L)``
plus one total bound on ``R0 + sum(R)``.  Subsets are encoded as bit masks
(bit ``k`` set means transmitter ``k`` is in the subset); column 0 of
``subset_bounds`` belongs to the empty set and is always zero.

Regions without a common message (``has_common=False``) reinterpret the
total bound as a second constraint on ``sum(R)``; this is how the two sum
constraints of the conferencing regions are stored.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import CapabilityError, ValidationError

__all__ = [
    "TOL",
    "RatePoint",
    "RateConstraintSet",
    "Violation",
    "Membership",
    "membership",
    "effective_bounds",
    "vertices",
    "support_value",
    "check_submodular",
    "check_monotone",
    "subset_mask",
    "mask_subset",
    "pareto_filter",
]

TOL = 1e-9
MAX_VERTEX_TX = 3
MAX_SUBMODULAR_TX = 4


def subset_mask(subset: Sequence[int]) -> int:
    mask = 0
    for k in subset:
        mask |= 1 << int(k)
    return mask


def mask_subset(mask: int, num_tx: int) -> Tuple[int, ...]:
    return tuple(k for k in range(num_tx) if mask >> k & 1)


@dataclass(frozen=True)
class RatePoint:
    """Private rates ``R1..Rp`` and an optional common rate ``R0``."""

    private_rates: Tuple[float, ...]
    common_rate: Optional[float] = None

    def __post_init__(self):
        rates = tuple(float(r) for r in self.private_rates)
        object.__setattr__(self, "private_rates", rates)
        if self.common_rate is not None:
            object.__setattr__(self, "common_rate", float(self.common_rate))
        if any(r < -TOL for r in self.as_array()):
            raise ValidationError("rates must be nonnegative")

    @classmethod
    def from_array(cls, values, has_common: bool) -> "RatePoint":
        values = [float(v) for v in values]
        if has_common:
            return cls(tuple(values[1:]), values[0])
        return cls(tuple(values))

    def as_array(self) -> np.ndarray:
        head = [] if self.common_rate is None else [self.common_rate]
        return np.array(head + list(self.private_rates))

    @property
    def num_tx(self) -> int:
        return len(self.private_rates)


@dataclass(frozen=True)
class RateConstraintSet:
    subset_bounds: np.ndarray
    total_bounds: np.ndarray
    has_common: bool = True
    links: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        a = np.array(self.subset_bounds, dtype=float, ndmin=2)
        b = np.array(self.total_bounds, dtype=float, ndmin=1)
        q, cols = a.shape
        p = cols.bit_length() - 1
        if p < 1 or cols != 1 << p:
            raise ValidationError("subset_bounds must have 2**p columns")
        if b.shape != (q,):
            raise ValidationError("one total bound per receiver is required")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("bounds must be finite")
        if np.any(a < -TOL) or np.any(b < -TOL):
            raise ValidationError("bounds must be nonnegative")
        a = np.maximum(a, 0.0)
        a[:, 0] = 0.0
        b = np.maximum(b, 0.0)
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "subset_bounds", a)
        object.__setattr__(self, "total_bounds", b)
        ok, witness = check_monotone(self)
        if not ok:
            raise ValidationError(f"subset bounds are not monotone: {witness}")
        if self.links is None and np.any(a[:, -1] > b + TOL):
            raise ValidationError("full-subset bound exceeds the total bound")

    @classmethod
    def from_bounds(cls, bounds: Mapping[Tuple[int, ...], float] | Sequence[Mapping],
                    total=None, has_common: bool = True,
                    links: Optional[Tuple[float, float]] = None) -> "RateConstraintSet":
        """Build from ``{subset_tuple: bound}`` dicts, one per receiver.

        Missing subsets are filled with the smallest bound of any superset
        (the tightest value implied by monotonicity).  When ``total`` is
        omitted it defaults to the full-subset bound.
        """
        per_rx = [bounds] if isinstance(bounds, Mapping) else list(bounds)
        p = 1 + max(max(s) for d in per_rx for s in d if len(s))
        rows = []
        for d in per_rx:
            row = np.full(1 << p, np.nan)
            row[0] = 0.0
            for s, v in d.items():
                row[subset_mask(s)] = float(v)
            for m in range((1 << p) - 1, 0, -1):
                if np.isnan(row[m]):
                    sup = [row[m | (1 << k)] for k in range(p) if not m >> k & 1]
                    sup = [v for v in sup if not np.isnan(v)]
                    if not sup:
                        raise ValidationError(f"no bound for subset {mask_subset(m, p)}")
                    row[m] = min(sup)
            rows.append(row)
        a = np.array(rows)
        if total is None:
            b = a[:, -1].copy()
        else:
            b = np.array(total, dtype=float, ndmin=1)
        return cls(a, b, has_common, links)

    @property
    def num_tx(self) -> int:
        return self.subset_bounds.shape[1].bit_length() - 1

    @property
    def num_rx(self) -> int:
        return self.subset_bounds.shape[0]

    @property
    def dim(self) -> int:
        return self.num_tx + int(self.has_common)

    def bound(self, subset: Sequence[int], receiver: int = 0) -> float:
        return float(self.subset_bounds[receiver, subset_mask(subset)])

    def rhs(self) -> np.ndarray:
        """Right-hand sides of the effective single-receiver constraint rows.

        Order matches :func:`_constraint_rows`: masks ``1..2**p-1``, the
        total bound, then ``p (+1)`` nonnegativity rows with zero bound.
        """
        eff = effective_bounds(self)
        return np.concatenate([eff.subset_bounds[0, 1:], eff.total_bounds, np.zeros(self.dim)])

    def to_dict(self) -> dict:
        p = self.num_tx
        return {
            "num_tx": p,
            "num_rx": self.num_rx,
            "has_common": self.has_common,
            "links": None if self.links is None else list(self.links),
            "receivers": [
                {
                    "subsets": [{"subset": [k + 1 for k in mask_subset(m, p)],
                                 "bound": float(self.subset_bounds[j, m])}
                                for m in range(1, 1 << p)],
                    "total": float(self.total_bounds[j]),
                }
                for j in range(self.num_rx)
            ],
        }


class Violation(NamedTuple):
    receiver: int
    subset: Optional[Tuple[int, ...]]  # None for the total constraint
    lhs: float
    bound: float


class Membership(NamedTuple):
    ok: bool
    violation: Optional[Violation]

    def __bool__(self):
        return self.ok


def _check_dims(point: RatePoint, cs: RateConstraintSet):
    if point.num_tx != cs.num_tx:
        raise ValidationError(f"point has {point.num_tx} private rates, region has {cs.num_tx}")
    if (point.common_rate is not None) != cs.has_common:
        raise ValidationError("common-rate presence differs between point and region")


def membership(point: RatePoint, cs: RateConstraintSet, tol: float = TOL) -> Membership:
    """Test every receiver's constraints; report the first violated one."""
    _check_dims(point, cs)
    r = np.array(point.private_rates)
    p = cs.num_tx
    if np.any(r < -tol) or (point.common_rate is not None and point.common_rate < -tol):
        return Membership(False, None)
    sums = np.array([r[list(mask_subset(m, p))].sum() for m in range(1 << p)])
    total = sums[-1] + (point.common_rate or 0.0)
    for j in range(cs.num_rx):
        for m in range(1, 1 << p):
            if sums[m] > cs.subset_bounds[j, m] + tol:
                return Membership(False, Violation(j, mask_subset(m, p), float(sums[m]),
                                                   float(cs.subset_bounds[j, m])))
        if total > cs.total_bounds[j] + tol:
            return Membership(False, Violation(j, None, float(total), float(cs.total_bounds[j])))
    return Membership(True, None)


def effective_bounds(cs: RateConstraintSet) -> RateConstraintSet:
    """Single-receiver set whose bounds are the minimum over receivers."""
    if cs.num_rx == 1:
        return cs
    return RateConstraintSet(cs.subset_bounds.min(axis=0, keepdims=True),
                             cs.total_bounds.min(keepdims=True), cs.has_common, cs.links)


@lru_cache(maxsize=None)
def _constraint_rows(p: int, has_common: bool) -> np.ndarray:
    d = p + int(has_common)
    off = int(has_common)
    rows = []
    for m in range(1, 1 << p):
        row = np.zeros(d)
        for k in mask_subset(m, p):
            row[off + k] = 1.0
        rows.append(row)
    rows.append(np.ones(d))
    rows.extend(-np.eye(d))
    return np.array(rows)


@lru_cache(maxsize=None)
def _vertex_candidates(p: int, has_common: bool):
    """Row index sets with nonsingular systems, and their inverse matrices."""
    rows = _constraint_rows(p, has_common)
    d = rows.shape[1]
    idx, invs = [], []
    for combo in itertools.combinations(range(rows.shape[0]), d):
        sub = rows[list(combo)]
        if abs(np.linalg.det(sub)) > 1e-9:
            idx.append(combo)
            invs.append(np.linalg.inv(sub))
    return np.array(idx), np.array(invs)


def batch_vertex_candidates(rhs: np.ndarray, p: int, has_common: bool):
    """Candidate vertices for a batch of constraint right-hand sides.

    Parameters
    ----------
    rhs : np.ndarray
        ``(B, m)`` right-hand sides in :func:`_constraint_rows` order.

    Returns
    -------
    points : np.ndarray
        ``(B, K, d)`` basic solutions.
    feasible : np.ndarray
        ``(B, K)`` boolean mask of solutions satisfying every constraint.
    """
    rows = _constraint_rows(p, has_common)
    idx, invs = _vertex_candidates(p, has_common)
    rhs = np.atleast_2d(rhs)
    sel = rhs[:, idx]  # (B, K, d)
    pts = np.einsum("kij,bkj->bki", invs, sel)
    slack = np.einsum("md,bkd->bkm", rows, pts) - rhs[:, None, :]
    return pts, np.all(slack <= TOL, axis=2)


def _dedupe(points: np.ndarray) -> np.ndarray:
    keep: List[np.ndarray] = []
    for x in points:
        if not any(np.max(np.abs(x - y)) <= TOL for y in keep):
            keep.append(x)
    keep.sort(key=tuple)
    return np.array(keep)


def _vertex_array(cs: RateConstraintSet) -> np.ndarray:
    if cs.num_tx > MAX_VERTEX_TX:
        raise CapabilityError(
            f"vertex enumeration supports up to {MAX_VERTEX_TX} transmitters; "
            "use support_value for larger regions")
    pts, ok = batch_vertex_candidates(cs.rhs()[None], cs.num_tx, cs.has_common)
    pts = np.where(np.abs(pts) < TOL, 0.0, pts)
    return _dedupe(pts[0][ok[0]])


def vertices(cs: RateConstraintSet) -> List[RatePoint]:
    """All extreme points of the region (``p <= 3``), sorted lexicographically."""
    return [RatePoint.from_array(x, cs.has_common) for x in _vertex_array(cs)]


def _best_index(values: np.ndarray, points: np.ndarray) -> int:
    """Argmax with ties broken toward the largest coordinate sum, then lexicographically."""
    top = values.max()
    tied = np.flatnonzero(values >= top - TOL * max(1.0, abs(top)))
    if tied.size == 1:
        return int(tied[0])
    return int(max(tied, key=lambda i: (points[i].sum(), tuple(points[i]))))


def support_value(cs: RateConstraintSet, weights) -> Tuple[float, RatePoint]:
    """Maximize ``weights . R`` over the region.

    ``weights`` has ``p + 1`` entries (``mu0..mup``) for common-message
    regions and ``p`` entries otherwise.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (cs.dim,):
        raise ValidationError(f"weight vector must have {cs.dim} entries")
    if np.any(w < 0) or not np.any(w > 0):
        raise ValidationError("weights must be nonnegative with at least one positive entry")
    if cs.num_tx <= MAX_VERTEX_TX:
        pts = _vertex_array(cs)
        vals = pts @ w
        i = _best_index(vals, pts)
        return float(vals[i]), RatePoint.from_array(pts[i], cs.has_common)
    from scipy.optimize import linprog

    rows = _constraint_rows(cs.num_tx, cs.has_common)
    res = linprog(-w, A_ub=rows, b_ub=cs.rhs(), bounds=(0, None), method="highs")
    if not res.success:
        raise CapabilityError(f"linear program failed: {res.message}")
    x = np.maximum(res.x, 0.0)
    return float(w @ x), RatePoint.from_array(x, cs.has_common)


def check_submodular(cs: RateConstraintSet):
    """Exhaustive pairwise submodularity test of each receiver's bound function.

    Returns ``(True, None)`` or ``(False, (receiver, subset_a, subset_b))``.
    """
    p = cs.num_tx
    if p > MAX_SUBMODULAR_TX:
        raise CapabilityError(f"submodularity check supports up to {MAX_SUBMODULAR_TX} transmitters")
    a = cs.subset_bounds
    for j in range(cs.num_rx):
        for m1 in range(1, 1 << p):
            for m2 in range(m1 + 1, 1 << p):
                if a[j, m1] + a[j, m2] < a[j, m1 | m2] + a[j, m1 & m2] - TOL:
                    return False, (j, mask_subset(m1, p), mask_subset(m2, p))
    return True, None


def check_monotone(cs: RateConstraintSet):
    """``(True, None)`` if every bound is at most the bound of each superset."""
    a = np.asarray(cs.subset_bounds)
    p = a.shape[1].bit_length() - 1
    for j in range(a.shape[0]):
        for m in range(1, 1 << p):
            for k in range(p):
                sup = m | (1 << k)
                if sup != m and a[j, m] > a[j, sup] + TOL:
                    return False, (j, mask_subset(m, p), mask_subset(sup, p))
    return True, None


def pareto_filter(points: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Indices of rows not dominated by any other row (duplicates keep the first)."""
    points = np.asarray(points, dtype=float)
    keep = []
    for i, x in enumerate(points):
        ge = np.all(points >= x - tol, axis=1)
        gt = np.any(points > x + tol, axis=1)
        dominated = np.any(ge & gt)
        dup = any(np.all(np.abs(points[k] - x) <= tol) for k in keep)
        if not dominated and not dup:
            keep.append(i)
    return np.array(keep, dtype=int)
