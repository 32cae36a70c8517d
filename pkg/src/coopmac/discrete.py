"""Exact rate regions of small discrete memoryless MACs with common information.

A channel is a transition tensor ``W[x1, ..., xp, y1, ..., yq]``.  An input
law is ``P_U`` together with one conditional table ``P_{Xi|U}`` per
transmitter.  For each receiver ``j`` the region of a law has

* ``a[j, L] = I(X_L; Y_j | X_{not L}, U)`` for every nonempty subset ``L``;
* ``b[j] = I(X_1..X_p; Y_j)`` bounding ``R0 + sum(R)``.

All information quantities are in bits and are computed by exact
summation over the joint law, vectorized over batches of laws so that
grids of laws can be searched quickly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import entr

from .errors import BudgetError, CapabilityError, ValidationError
from .fading import ConferencingSpec, add_conferencing
from .region import (
    TOL,
    RateConstraintSet,
    RatePoint,
    _best_index,
    batch_vertex_candidates,
    mask_subset,
)

__all__ = [
    "DiscreteChannelSpec",
    "InputLaw",
    "DiscreteFrontier",
    "cardinality_bound",
    "region_for_law",
    "region_bounds_batch",
    "brute_force_region",
    "willems_region",
    "simplex_grid",
    "default_weights",
]

LN2 = np.log(2.0)
SUM_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteChannelSpec:
    """Transition tensor of shape ``(|X1|, ..., |Xp|, |Y1|, ..., |Yq|)``."""

    transition: np.ndarray
    num_tx: int

    def __post_init__(self):
        w = np.array(self.transition, dtype=float)
        p = int(self.num_tx)
        if p < 1 or w.ndim <= p:
            raise ValidationError("transition needs p input axes and at least one output axis")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("transition probabilities must be finite and >= 0")
        sums = w.reshape(int(np.prod(w.shape[:p])), -1).sum(axis=1)
        if np.any(np.abs(sums - 1.0) > SUM_TOL):
            raise ValidationError("each conditional slice must sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "transition", w)

    @property
    def input_sizes(self) -> Tuple[int, ...]:
        return self.transition.shape[: self.num_tx]

    @property
    def output_sizes(self) -> Tuple[int, ...]:
        return self.transition.shape[self.num_tx:]

    @property
    def num_rx(self) -> int:
        return len(self.output_sizes)

    def receiver_marginal(self, j: int) -> np.ndarray:
        """``P(y_j | x1..xp)`` with shape ``(|X1|, ..., |Xp|, |Yj|)``."""
        p = self.num_tx
        other = tuple(p + k for k in range(self.num_rx) if k != j)
        return self.transition.sum(axis=other) if other else self.transition

    @classmethod
    def from_nested(cls, nested, num_tx: int) -> "DiscreteChannelSpec":
        """Build from nested lists indexed outputs first, then inputs.

        ``nested[y1]...[yq][x1]...[xp]`` is ``P(y | x)``; this is the layout
        used in configuration files.
        """
        arr = np.array(nested, dtype=float)
        q = arr.ndim - num_tx
        if q < 1:
            raise ValidationError("nested transition has too few axes")
        order = tuple(range(q, arr.ndim)) + tuple(range(q))
        return cls(np.transpose(arr, order), num_tx)

    def to_nested(self) -> list:
        p = self.num_tx
        order = tuple(range(p, self.transition.ndim)) + tuple(range(p))
        return np.transpose(self.transition, order).tolist()

    # a few standard channels
    @classmethod
    def binary_adder(cls) -> "DiscreteChannelSpec":
        """``Y = X1 + X2`` over the integers, binary inputs."""
        w = np.zeros((2, 2, 3))
        for x1, x2 in itertools.product(range(2), repeat=2):
            w[x1, x2, x1 + x2] = 1.0
        return cls(w, 2)

    @classmethod
    def binary_symmetric(cls, crossover: float) -> "DiscreteChannelSpec":
        e = float(crossover)
        return cls(np.array([[1 - e, e], [e, 1 - e]]), 1)

    @classmethod
    def identity(cls, size: int = 2) -> "DiscreteChannelSpec":
        return cls(np.eye(size), 1)


@dataclass(frozen=True)
class InputLaw:
    """``P_U`` of shape ``(|U|,)`` and conditionals ``P_{Xi|U}`` of shape ``(|U|, |Xi|)``."""

    pu: np.ndarray
    px: Tuple[np.ndarray, ...]

    def __post_init__(self):
        pu = np.array(self.pu, dtype=float, ndmin=1)
        px = tuple(np.array(t, dtype=float, ndmin=2) for t in self.px)
        if pu.ndim != 1 or np.any(pu < 0) or abs(pu.sum() - 1) > SUM_TOL:
            raise ValidationError("P_U must be a probability vector")
        for i, t in enumerate(px):
            if t.shape[0] != pu.size:
                raise ValidationError(f"P_X{i + 1}|U needs {pu.size} rows")
            if np.any(t < 0) or np.any(np.abs(t.sum(axis=1) - 1) > SUM_TOL):
                raise ValidationError(f"rows of P_X{i + 1}|U must be probability vectors")
        object.__setattr__(self, "pu", pu)
        object.__setattr__(self, "px", px)

    @classmethod
    def independent(cls, *marginals) -> "InputLaw":
        """Law with a trivial auxiliary (``|U| = 1``)."""
        return cls(np.ones(1), tuple(np.array(m, dtype=float)[None, :] for m in marginals))

    @property
    def u_size(self) -> int:
        return self.pu.size

    def joint(self) -> np.ndarray:
        """``P(u, x1, ..., xp)``."""
        out = self.pu
        for t in self.px:
            out = out[..., None] * t.reshape((t.shape[0],) + (1,) * (out.ndim - 1) + (t.shape[1],))
        return out

    def describe(self) -> dict:
        return {"pu": self.pu.tolist(), "px": [t.tolist() for t in self.px]}


def cardinality_bound(channel: DiscreteChannelSpec) -> int:
    """Largest auxiliary alphabet needed: ``prod |Xi| + q 2**p - 1``."""
    return int(np.prod(channel.input_sizes)) + channel.num_rx * 2 ** channel.num_tx - 1


def _entropy(p: np.ndarray) -> np.ndarray:
    """Entropy in bits over all axes but the first (0 log 0 = 0)."""
    return entr(p).reshape(p.shape[0], -1).sum(axis=1) / LN2


def region_bounds_batch(channel: DiscreteChannelSpec, pu: np.ndarray, px: Sequence[np.ndarray]):
    """Bounds for a batch of laws.

    Parameters
    ----------
    pu : np.ndarray
        ``(B, |U|)`` auxiliary laws.
    px : sequence of np.ndarray
        Per transmitter, ``(B, |U|, |Xi|)`` conditional tables.

    Returns
    -------
    a : np.ndarray
        ``(B, q, 2**p)`` subset bounds (column 0 is zero).
    b : np.ndarray
        ``(B, q)`` total bounds.
    """
    p = channel.num_tx
    B, nu = pu.shape
    joint = pu
    for i, t in enumerate(px):
        shape = (B, nu) + (1,) * i + (t.shape[2],)
        joint = joint[..., None] * t.reshape(shape)
    # joint: (B, U, X1..Xp)
    px_marg = joint.sum(axis=1)
    a = np.zeros((B, channel.num_rx, 1 << p))
    b = np.zeros((B, channel.num_rx))
    for j in range(channel.num_rx):
        w = channel.receiver_marginal(j)
        h_y_given_x = entr(w).sum(axis=-1) / LN2  # (X1..Xp)
        cond = (px_marg * h_y_given_x).reshape(B, -1).sum(axis=1)
        full = joint[..., None] * w[None, None]  # (B, U, X1..Xp, Y)
        y_marg = full.sum(axis=tuple(range(1, p + 2)))
        b[:, j] = _entropy(y_marg) - cond
        for m in range(1, 1 << p):
            drop = tuple(2 + k for k in mask_subset(m, p))
            with_y = full.sum(axis=drop)
            without_y = with_y.sum(axis=-1)
            a[:, j, m] = _entropy(with_y) - _entropy(without_y) - cond
    a = np.where(np.abs(a) < 1e-12, 0.0, a)
    b = np.where(np.abs(b) < 1e-12, 0.0, b)
    return a, b


def region_for_law(channel: DiscreteChannelSpec, law: InputLaw) -> RateConstraintSet:
    """Exact common-message region of one input law."""
    if len(law.px) != channel.num_tx:
        raise ValidationError("law and channel disagree on the number of transmitters")
    for i, (t, n) in enumerate(zip(law.px, channel.input_sizes)):
        if t.shape[1] != n:
            raise ValidationError(f"P_X{i + 1}|U has {t.shape[1]} columns, alphabet has {n}")
    if law.u_size > cardinality_bound(channel):
        raise ValidationError(f"|U| = {law.u_size} exceeds the bound {cardinality_bound(channel)}")
    a, b = region_bounds_batch(channel, law.pu[None], [t[None] for t in law.px])
    return RateConstraintSet(a[0], b[0], has_common=True)


def willems_region(channel: DiscreteChannelSpec, law: InputLaw,
                   conf: ConferencingSpec) -> RateConstraintSet:
    """Two-user conferencing region of one law: credited subset bounds plus ``I(X1, X2; Y)``."""
    if channel.num_tx != 2 or channel.num_rx != 1:
        raise CapabilityError("the conferencing region is defined for two transmitters, one receiver")
    return add_conferencing(region_for_law(channel, law), conf)


def simplex_grid(size: int, step: float) -> np.ndarray:
    """Probability vectors on a grid of the given step, plus the uniform law.

    The grid always contains the deterministic corner laws.
    """
    k = int(round(1.0 / step))
    if k < 1 or abs(k * step - 1.0) > 1e-9:
        raise ValidationError("grid_step must be 1/k for a positive integer k")
    pts = [np.bincount(c, minlength=size) / k
           for c in itertools.combinations_with_replacement(range(size), k)]
    uniform = np.full(size, 1.0 / size)
    if not any(np.allclose(x, uniform) for x in pts):
        pts.append(uniform)
    return np.array(pts)


def default_weights(dim: int, step: float = 0.25) -> np.ndarray:
    """Nonzero weight vectors on a simplex grid."""
    return simplex_grid(dim, step)


@dataclass(frozen=True)
class DiscreteFrontier:
    """Non-dominated rate tuples from a law-grid search.

    ``best_values[k]`` is the largest weighted sum found for ``weights[k]``;
    ``points[i]`` is achieved by ``laws[i]`` inside ``regions[i]``.
    """

    weights: np.ndarray
    best_values: np.ndarray
    points: List[RatePoint]
    laws: List[InputLaw]
    regions: List[RateConstraintSet]
    laws_searched: int


def _law_count(channel, u_size: int, n_pu: int, step: float) -> int:
    k = int(round(1.0 / step))
    total = n_pu
    for n in channel.input_sizes:
        rows = comb(n + k - 1, k) + (0 if n <= 1 or k % n == 0 else 1)
        total *= rows ** u_size
    return total


def _pu_grid(u_size: int, step: float) -> np.ndarray:
    grid = simplex_grid(u_size, step)
    if u_size > 1:
        grid = grid[np.all(grid > 0, axis=1)]  # zero entries repeat a smaller |U|
    return grid


def brute_force_region(channel: DiscreteChannelSpec, grid_step: float = 1 / 8,
                       u_size_cap: int = 4, weights=None,
                       max_laws: int = 500_000, batch: int = 20_000) -> DiscreteFrontier:
    """Search input laws on a grid and keep the best points per weight vector.

    Every ``|U|`` from 1 to ``min(u_size_cap, cardinality_bound(channel))``
    is enumerated.  The result is an inner approximation of the capacity
    region that tightens as ``grid_step`` shrinks.

    Raises
    ------
    BudgetError
        If the number of laws exceeds ``max_laws`` (checked before any work).
    """
    p = channel.num_tx
    if p > 3:
        raise CapabilityError("brute-force search supports up to 3 transmitters")
    top = min(int(u_size_cap), cardinality_bound(channel))
    counts = {u: _law_count(channel, u, len(_pu_grid(u, grid_step)), grid_step)
              for u in range(1, top + 1)}
    total = sum(counts.values())
    if total > max_laws:
        raise BudgetError(f"law grid has {total} laws > budget {max_laws}", total)

    dim = p + 1
    W = default_weights(dim) if weights is None else np.atleast_2d(np.asarray(weights, float))
    if W.shape[1] != dim:
        raise ValidationError(f"weights must have {dim} entries")
    best_val = np.full(len(W), -np.inf)
    best_pt = [None] * len(W)
    best_law = [None] * len(W)
    row_grids = [simplex_grid(n, grid_step) for n in channel.input_sizes]

    for u in range(1, top + 1):
        pu_grid = _pu_grid(u, grid_step)
        axes = [range(len(pu_grid))] + [range(len(g)) for g in row_grids for _ in range(u)]
        combos = itertools.product(*axes)
        while True:
            idx = np.array(list(itertools.islice(combos, batch)), dtype=np.intp)
            if idx.size == 0:
                break
            pu = pu_grid[idx[:, 0]]
            px = []
            col = 1
            for g in row_grids:
                px.append(np.stack([g[idx[:, col + r]] for r in range(u)], axis=1))
                col += u
            a, b = region_bounds_batch(channel, pu, px)
            rhs = np.concatenate([a.min(axis=1)[:, 1:], b.min(axis=1)[:, None],
                                  np.zeros((len(idx), dim))], axis=1)
            pts, ok = batch_vertex_candidates(rhs, p, True)
            pts = np.where(np.abs(pts) < TOL, 0.0, pts)
            flat = pts.reshape(-1, dim)
            for k, w in enumerate(W):
                vals = np.where(ok, pts @ w, -np.inf).ravel()
                i = _best_index(vals, flat)
                if vals[i] > best_val[k] + TOL:
                    n_law = i // pts.shape[1]
                    best_val[k] = vals[i]
                    best_pt[k] = flat[i].copy()
                    best_law[k] = InputLaw(pu[n_law], tuple(t[n_law] for t in px))

    arr = np.array(best_pt)
    keep = []
    for i, x in enumerate(arr):
        dominated = np.any(np.all(arr >= x - TOL, axis=1) & np.any(arr > x + TOL, axis=1))
        if not dominated and not any(np.allclose(arr[k], x, atol=TOL) for k in keep):
            keep.append(i)
    return DiscreteFrontier(
        weights=W,
        best_values=best_val,
        points=[RatePoint.from_array(arr[i], True) for i in keep],
        laws=[best_law[i] for i in keep],
        regions=[region_for_law(channel, best_law[i]) for i in keep],
        laws_searched=total,
    )
