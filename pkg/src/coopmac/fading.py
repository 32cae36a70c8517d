"""Rate regions of the Gaussian fading MAC with common information.

Builders turn a transmit policy (power allocation and correlation tables
indexed by CSIT symbols) into a :class:`~coopmac.region.RateConstraintSet`:

* :func:`region_cm` - p transmitters, q receivers, common message;
* :func:`region_conf` - two transmitters with conferencing links;
* :func:`region_no_csit` - the constant-policy specialization.

:func:`frontier` approximates the union over policies by a weighted-sum
search over a finite policy grid, which yields an inner bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel import CsitQuantizer, FadingChannelSpec, sample_state
from .errors import CapabilityError, NumericalError, ValidationError
from .expectation import ExpectationEstimate, StateGrid, capacity_fn
from .region import (
    TOL,
    RateConstraintSet,
    RatePoint,
    _best_index,
    batch_vertex_candidates,
    mask_subset,
    support_value,
)

__all__ = [
    "TransmitPolicy",
    "ConferencingSpec",
    "GaussianSignals",
    "PolicyGrid",
    "FrontierPoint",
    "policy_values",
    "region_cm",
    "region_conf",
    "add_conferencing",
    "correlation_coefficient",
    "gaussian_signal_samples",
    "conferencing_reduction_check",
    "region_no_csit",
    "max_common_rate",
    "compensation_capacity",
    "axis_cutoff_gap",
    "frontier",
    "frontier_from_regions",
    "best_support",
    "policy_regions",
    "direction_weights",
]

POWER_RTOL = 1e-6
Entry = Union[np.ndarray, Callable]


def _as_grid(engine, spec: FadingChannelSpec) -> StateGrid:
    return engine if isinstance(engine, StateGrid) else engine.draw(spec)


@dataclass(frozen=True)
class TransmitPolicy:
    """Per-transmitter power allocation and correlation policies.

    Each entry of ``power`` and ``corr`` is either a 1-D table indexed by
    that transmitter's CSIT symbol or a vectorized callable mapping a
    ``(N, q, p)`` batch of states to ``N`` values.  Callables cover perfect
    CSIT, where the CSIT alphabet is the continuous state space.
    """

    power: Tuple[Entry, ...]
    corr: Tuple[Entry, ...]

    def __post_init__(self):
        if len(self.power) != len(self.corr):
            raise ValidationError("power and corr need one entry per transmitter")
        fix = lambda e: e if callable(e) else np.array(e, dtype=float, ndmin=1)
        object.__setattr__(self, "power", tuple(fix(e) for e in self.power))
        object.__setattr__(self, "corr", tuple(fix(e) for e in self.corr))
        for e in self.corr:
            if not callable(e) and (np.any(e < 0) or np.any(e > 1)):
                raise ValidationError("correlation values must lie in [0, 1]")
        for e in self.power:
            if not callable(e) and np.any(e < 0):
                raise ValidationError("power values must be nonnegative")

    @classmethod
    def constant(cls, powers: Sequence[float], corrs: Sequence[float]) -> "TransmitPolicy":
        return cls(tuple([p] for p in powers), tuple([r] for r in corrs))

    @property
    def num_tx(self) -> int:
        return len(self.power)

    def evaluate(self, states: np.ndarray, symbols: np.ndarray):
        """Return ``(phi, rho)``, each of shape ``(N, p)``."""
        n = states.shape[0]

        def column(entry, i):
            if callable(entry):
                out = np.broadcast_to(np.asarray(entry(states), dtype=float), (n,))
            elif entry.size == 1:
                out = np.full(n, entry[0])
            else:
                out = entry[symbols[:, i]]
            return out

        phi = np.stack([column(e, i) for i, e in enumerate(self.power)], axis=1)
        rho = np.stack([column(e, i) for i, e in enumerate(self.corr)], axis=1)
        return phi, rho

    def describe(self) -> dict:
        show = lambda e: "callback" if callable(e) else [float(v) for v in e]
        return {"power": [show(e) for e in self.power], "corr": [show(e) for e in self.corr]}


def policy_values(policy: TransmitPolicy, spec: FadingChannelSpec,
                  quantizer: Optional[CsitQuantizer], grid: StateGrid):
    """Evaluate and validate a policy on a state grid.

    Checks table sizes against the quantizer, ``0 <= rho <= 1``,
    ``phi >= 0`` and the average power constraint ``E[phi_i] <= P_i``.
    """
    if policy.num_tx != spec.num_tx:
        raise ValidationError(f"policy has {policy.num_tx} transmitters, channel has {spec.num_tx}")
    if quantizer is None:
        quantizer = CsitQuantizer.none(spec.num_tx)
    if quantizer.num_tx != spec.num_tx:
        raise ValidationError("quantizer arity differs from the channel")
    for i, (pw, cr) in enumerate(zip(policy.power, policy.corr)):
        for e in (pw, cr):
            if not callable(e) and e.size not in (1, quantizer.sizes[i]):
                raise ValidationError(
                    f"transmitter {i} table has {e.size} entries, CSIT alphabet has "
                    f"{quantizer.sizes[i]}")
    symbols = quantizer(grid.states)
    phi, rho = policy.evaluate(grid.states, symbols)
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(rho))):
        raise ValidationError("policy produced non-finite values")
    if np.any(phi < 0):
        raise ValidationError("power policy produced negative values")
    if np.any(rho < 0) or np.any(rho > 1):
        raise ValidationError("correlation policy left [0, 1]")
    avg = grid.mean_columns(phi)
    limit = spec.power_budget * (1 + POWER_RTOL) + 1e-12
    if np.any(avg > limit):
        i = int(np.argmax(avg - limit))
        raise ValidationError(
            f"average power of transmitter {i} is {avg[i]:.6g} > budget {spec.power_budget[i]:.6g}")
    return symbols, phi, rho


def _subset_matrix(p: int) -> np.ndarray:
    m = np.zeros((p, 1 << p))
    for mask in range(1 << p):
        for k in mask_subset(mask, p):
            m[k, mask] = 1.0
    return m


def _bound_arguments(states, phi, rho, noise_var):
    """SNR arguments of every bound: ``(N, q, 2**p)`` subset args and ``(N, q)`` totals."""
    p = phi.shape[1]
    gain = states ** 2 * phi[:, None, :]
    private = gain * (1.0 - rho ** 2)[:, None, :]
    subset_args = private @ _subset_matrix(p) / noise_var[None, :, None]
    amp = states * (rho * np.sqrt(phi))[:, None, :]
    cross = np.zeros(gain.shape[:2])
    for k, i in itertools.combinations(range(p), 2):
        cross += amp[:, :, k] * amp[:, :, i]
    total_args = (gain.sum(axis=2) + 2.0 * cross) / noise_var[None, :]
    return subset_args, total_args


def _region_from_values(grid: StateGrid, spec: FadingChannelSpec, phi, rho) -> RateConstraintSet:
    subset_args, total_args = _bound_arguments(grid.states, phi, rho, spec.noise_var)
    q, cols = subset_args.shape[1:]
    flat = np.concatenate([subset_args[:, :, 1:].reshape(grid.size, -1), total_args], axis=1)
    means = grid.mean_columns(capacity_fn(flat))
    a = np.zeros((q, cols))
    a[:, 1:] = means[: q * (cols - 1)].reshape(q, cols - 1)
    b = means[q * (cols - 1):]
    return RateConstraintSet(a, b, has_common=True)


def region_cm(spec: FadingChannelSpec, quantizer: Optional[CsitQuantizer],
              policy: TransmitPolicy, engine) -> RateConstraintSet:
    """Common-message region of one policy.

    For receiver ``j`` and subset ``L`` the bound is
    ``E[C(sum_{k in L} S_jk^2 phi_k (1 - rho_k^2) / sigma_j^2)]``; the total
    bound adds the coherent cross terms ``2 S_jk S_ji rho_k rho_i sqrt(phi_k phi_i)``
    to the full received power.

    ``engine`` is a :class:`~coopmac.expectation.MonteCarlo` or
    :class:`~coopmac.expectation.Quadrature` instance, or an already drawn
    :class:`~coopmac.expectation.StateGrid`.
    """
    grid = _as_grid(engine, spec)
    _, phi, rho = policy_values(policy, spec, quantizer, grid)
    return _region_from_values(grid, spec, phi, rho)


@dataclass(frozen=True)
class ConferencingSpec:
    c12: float = 0.0
    c21: float = 0.0

    def __post_init__(self):
        for v in (self.c12, self.c21):
            if not np.isfinite(v) or v < 0:
                raise ValidationError("link capacities must be finite and >= 0")


def _require_two_user(spec: FadingChannelSpec):
    if spec.num_tx != 2 or spec.num_rx != 1:
        raise CapabilityError("this routine is defined for two transmitters and one receiver")


def add_conferencing(cs: RateConstraintSet, conf: ConferencingSpec) -> RateConstraintSet:
    """Credit the link capacities to a two-user set and drop the common rate.

    The result keeps both sum constraints: the credited one in the subset
    bounds and the uncredited total bound.
    """
    if cs.num_tx != 2:
        raise CapabilityError("conferencing is defined for two transmitters")
    a = np.array(cs.subset_bounds)
    a[:, 1] += conf.c12
    a[:, 2] += conf.c21
    a[:, 3] += conf.c12 + conf.c21
    return RateConstraintSet(a, cs.total_bounds, has_common=False, links=(conf.c12, conf.c21))


def region_conf(spec: FadingChannelSpec, quantizer: Optional[CsitQuantizer],
                policy: TransmitPolicy, conf: ConferencingSpec, engine) -> RateConstraintSet:
    """Two-user region with conferencing encoders for one policy."""
    _require_two_user(spec)
    return add_conferencing(region_cm(spec, quantizer, policy, engine), conf)


def conferencing_reduction_check(rates: Sequence[float], conf: ConferencingSpec,
                                 bounds: RateConstraintSet, tol: float = TOL) -> bool:
    """Rate-splitting test of achievability with conferencing.

    Splits ``R1`` into a part of size ``min(R1, C12)`` shared over the link
    (and likewise for ``R2``), then checks the split rates against the
    common-message bounds ``bounds`` of the same policy.  Equivalent to
    membership in :func:`add_conferencing` applied to ``bounds``.
    """
    if bounds.num_tx != 2 or bounds.num_rx != 1:
        raise CapabilityError("reduction check needs a two-user, one-receiver set")
    r1, r2 = (float(r) for r in rates)
    if r1 < -tol or r2 < -tol:
        return False
    a = bounds.subset_bounds[0]
    b = bounds.total_bounds[0]
    r12 = min(r1, conf.c12)
    r21 = min(r2, conf.c21)
    return (
        -tol <= r1 - r12 <= a[1] + tol
        and -tol <= r2 - r21 <= a[2] + tol
        and r1 + r2 - (r12 + r21) <= a[3] + tol
        and r1 + r2 <= b + tol
    )


def correlation_coefficient(policy: TransmitPolicy, i: int, j: int, spec: FadingChannelSpec,
                            quantizer: Optional[CsitQuantizer], engine) -> float:
    """Correlation of the transmitted signals of transmitters ``i`` and ``j``.

    ``E[sqrt(phi_i phi_j) rho_i rho_j] / sqrt(E[phi_i] E[phi_j])``
    """
    if i == j:
        raise ValueError("i and j must differ")
    grid = _as_grid(engine, spec)
    _, phi, rho = policy_values(policy, spec, quantizer, grid)
    num = grid.mean(np.sqrt(phi[:, i] * phi[:, j]) * rho[:, i] * rho[:, j])
    pi, pj = grid.mean_columns(phi[:, [i, j]])
    if pi <= 0 or pj <= 0:
        raise NumericalError(f"correlation undefined: zero average power at transmitter "
                             f"{i if pi <= 0 else j}")
    # Cauchy-Schwarz bounds the exact value by 1; clip summation round-off.
    return float(min(1.0, num / np.sqrt(pi * pj)))


@dataclass(frozen=True)
class GaussianSignals:
    """Realizations of the superposition signaling ``X = sqrt(phi)(rho U + sqrt(1 - rho^2) V)``."""

    states: np.ndarray  # (N, q, p)
    symbols: np.ndarray  # (N, p)
    u: np.ndarray  # (N,)
    v: np.ndarray  # (N, p)
    x: np.ndarray  # (N, p)
    phi: np.ndarray
    rho: np.ndarray


def gaussian_signal_samples(policy: TransmitPolicy, spec: FadingChannelSpec,
                            quantizer: Optional[CsitQuantizer], count: int,
                            seed: int) -> GaussianSignals:
    if count < 2:
        raise ValueError("count must be >= 2")
    states = sample_state(spec, seed, count)
    grid = StateGrid(states, None, "monte_carlo", seed)
    symbols, phi, rho = policy_values(policy, spec, quantizer, grid)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    u = rng.standard_normal(count)
    v = rng.standard_normal((count, spec.num_tx))
    x = np.sqrt(phi) * (rho * u[:, None] + np.sqrt(1.0 - rho ** 2) * v)
    return GaussianSignals(states, symbols, u, v, x, phi, rho)


def region_no_csit(spec: FadingChannelSpec, rho1: float, rho2: float, engine,
                   conf: Optional[ConferencingSpec] = None) -> RateConstraintSet:
    """Two-user region without CSIT: full constant power, constant correlations."""
    _require_two_user(spec)
    policy = TransmitPolicy.constant(spec.power_budget, [rho1, rho2])
    quantizer = CsitQuantizer.none(2)
    if conf is None:
        return region_cm(spec, quantizer, policy, engine)
    return region_conf(spec, quantizer, policy, conf, engine)


def _result(est: ExpectationEstimate, full: bool):
    return est if full else est.value


def max_common_rate(spec: FadingChannelSpec, engine, full: bool = False):
    """Largest common rate without CSIT: both transmitters fully coherent.

    ``E[C((S1^2 P1 + S2^2 P2 + 2 S1 S2 sqrt(P1 P2)) / sigma^2)]``.  Pass
    ``full=True`` for the :class:`~coopmac.expectation.ExpectationEstimate`.
    """
    _require_two_user(spec)
    grid = _as_grid(engine, spec)
    s1, s2 = grid.states[:, 0, 0], grid.states[:, 0, 1]
    p1, p2 = spec.power_budget
    snr = (s1 ** 2 * p1 + s2 ** 2 * p2 + 2 * s1 * s2 * np.sqrt(p1 * p2)) / spec.noise_var[0]
    return _result(grid.average(capacity_fn(snr)), full)


def compensation_capacity(alpha: float, spec: FadingChannelSpec, engine, full: bool = False):
    """Link capacity quoted as compensating a power ratio ``P2 = alpha P1``.

    Evaluates ``E[C(S1^2 alpha P1 / (sigma^2 + S2^2 alpha P2))]`` exactly as
    displayed, with ``P1, P2`` taken from ``spec``.  See
    :func:`axis_cutoff_gap` for the quantity that equalizes the two axis
    cut-offs.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    _require_two_user(spec)
    grid = _as_grid(engine, spec)
    s1, s2 = grid.states[:, 0, 0], grid.states[:, 0, 1]
    p1, p2 = spec.power_budget
    snr = s1 ** 2 * alpha * p1 / (spec.noise_var[0] + s2 ** 2 * alpha * p2)
    return _result(grid.average(capacity_fn(snr)), full)


def axis_cutoff_gap(spec: FadingChannelSpec, engine, full: bool = False):
    """``E[C(S1^2 P1/sigma^2)] - E[C(S2^2 P2/sigma^2)]``.

    The smallest ``C21`` for which the ``R2`` cut-off of the no-CSIT
    conferencing region reaches the ``R1`` cut-off.
    """
    _require_two_user(spec)
    grid = _as_grid(engine, spec)
    s1, s2 = grid.states[:, 0, 0], grid.states[:, 0, 1]
    p1, p2 = spec.power_budget
    sig = spec.noise_var[0]
    return _result(grid.average(capacity_fn(s1 ** 2 * p1 / sig) - capacity_fn(s2 ** 2 * p2 / sig)),
                   full)


# -- frontier search ---------------------------------------------------------

@dataclass(frozen=True)
class PolicyGrid:
    """Finite policy family searched by :func:`frontier`.

    Correlation tables take every combination of ``rho_points`` uniform
    values in ``[0, 1]`` per CSIT symbol.  Power tables for a transmitter
    with ``m > 1`` symbols split the budget over symbols in fractions on a
    simplex grid of step ``power_step``, ``phi(e) = P * t_e / Pr[E = e]``,
    so that ``E[phi] = P``.  Single-symbol transmitters use full power.
    """

    rho_points: int = 21
    power_step: float = 0.25
    max_policies: int = 50_000

    def rho_values(self) -> np.ndarray:
        if self.rho_points < 1:
            raise ValidationError("rho_points must be >= 1")
        if self.rho_points == 1:
            return np.zeros(1)
        return np.linspace(0.0, 1.0, self.rho_points)


def _simplex_grid(m: int, step: float) -> List[np.ndarray]:
    k = int(round(1.0 / step))
    if k < 1 or abs(k * step - 1.0) > 1e-9:
        raise ValidationError("power_step must be 1/k for a positive integer k")
    out = []
    for combo in itertools.combinations_with_replacement(range(m), k):
        out.append(np.bincount(combo, minlength=m) / k)
    return out


def enumerate_policies(spec: FadingChannelSpec, quantizer: CsitQuantizer, grid: StateGrid,
                       pgrid: PolicyGrid) -> List[TransmitPolicy]:
    symbols = quantizer(grid.states)
    rhos = pgrid.rho_values()
    per_tx = []
    for i, m in enumerate(quantizer.sizes):
        onehot = (symbols[:, i][:, None] == np.arange(m)[None, :]).astype(float)
        probs = grid.mean_columns(onehot)
        P = spec.power_budget[i]
        tables = []
        if m == 1:
            tables.append(np.array([P]))
        else:
            for t in _simplex_grid(m, pgrid.power_step):
                if np.any((t > 0) & (probs <= 0)):
                    continue
                tables.append(np.where(probs > 0, P * t / np.where(probs > 0, probs, 1.0), 0.0))
        corr_tables = [np.array(c) for c in itertools.product(rhos, repeat=m)]
        per_tx.append([(pw, cr) for pw in tables for cr in corr_tables])
    count = int(np.prod([len(x) for x in per_tx]))
    if count == 0:
        raise ValidationError("empty policy grid")
    if count > pgrid.max_policies:
        from .errors import BudgetError

        raise BudgetError(f"policy grid has {count} policies > budget {pgrid.max_policies}", count)
    return [TransmitPolicy(tuple(c[0] for c in combo), tuple(c[1] for c in combo))
            for combo in itertools.product(*per_tx)]


@dataclass(frozen=True)
class FrontierPoint:
    weights: Tuple[float, ...]
    value: float
    point: RatePoint
    policy: TransmitPolicy
    region: RateConstraintSet


def direction_weights(count: int) -> np.ndarray:
    """``count`` unit directions ``(cos t, sin t)`` spanning the first quadrant."""
    t = np.linspace(0.0, np.pi / 2, count)
    w = np.stack([np.cos(t), np.sin(t)], axis=1)
    w[np.abs(w) < 1e-15] = 0.0
    return w


def policy_regions(spec: FadingChannelSpec, quantizer: Optional[CsitQuantizer],
                   pgrid: PolicyGrid, engine):
    """All grid policies and their common-message regions on one shared state grid."""
    if quantizer is None:
        quantizer = CsitQuantizer.none(spec.num_tx)
    grid = _as_grid(engine, spec)
    policies = enumerate_policies(spec, quantizer, grid, pgrid)
    regions = []
    for pol in policies:
        _, phi, rho = policy_values(pol, spec, quantizer, grid)
        regions.append(_region_from_values(grid, spec, phi, rho))
    return policies, regions


def best_support(regions: Sequence[RateConstraintSet], weights):
    """Largest support value over ``regions`` for every weight vector.

    Returns
    -------
    values : np.ndarray
        ``(K,)`` best weighted sums.
    points : np.ndarray
        ``(K, dim)`` maximizing rate vectors.
    index : np.ndarray
        ``(K,)`` index of the maximizing region.
    """
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    dim = regions[0].dim
    if W.shape[1] != dim:
        raise ValidationError(f"weights must have {dim} entries")
    if np.any(W < 0) or np.any(~np.any(W > 0, axis=1)):
        raise ValidationError("weights must be nonnegative and not all zero")
    p = regions[0].num_tx
    values = np.empty(len(W))
    points = np.empty((len(W), dim))
    index = np.empty(len(W), dtype=int)
    if p <= 3:
        rhs = np.stack([cs.rhs() for cs in regions])
        pts, ok = batch_vertex_candidates(rhs, p, regions[0].has_common)
        pts = np.where(np.abs(pts) < TOL, 0.0, pts)
        flat_pts = pts.reshape(-1, dim)
        for k, w in enumerate(W):
            vals = np.where(ok, pts @ w, -np.inf).ravel()
            idx = _best_index(vals, flat_pts)
            values[k], points[k] = vals[idx], flat_pts[idx]
            index[k] = idx // pts.shape[1]
    else:
        for k, w in enumerate(W):
            vals = [support_value(cs, w) for cs in regions]
            b = int(np.argmax([v for v, _ in vals]))
            values[k], points[k], index[k] = vals[b][0], vals[b][1].as_array(), b
    return values, points, index


def frontier_from_regions(policies: Sequence[TransmitPolicy], regions: Sequence[RateConstraintSet],
                          weights) -> List[FrontierPoint]:
    """Best support value per weight over precomputed regions, non-dominated entries only."""
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    values, arr, index = best_support(regions, W)
    has_common = regions[0].has_common
    out = []
    for k, w in enumerate(W):
        x = arr[k]
        dominated = np.any(np.all(arr >= x - TOL, axis=1) & np.any(arr > x + TOL, axis=1))
        if not dominated:
            b = int(index[k])
            out.append(FrontierPoint(tuple(float(v) for v in w), float(values[k]),
                                     RatePoint.from_array(x, has_common), policies[b], regions[b]))
    return out


def frontier(spec: FadingChannelSpec, quantizer: Optional[CsitQuantizer], weights,
             pgrid: PolicyGrid, engine,
             conf: Optional[ConferencingSpec] = None) -> List[FrontierPoint]:
    """Weighted-sum inner approximation of the capacity region boundary.

    For every weight vector the best support value over all grid policies
    is kept, together with the maximizing point and policy.  Entries whose
    point is dominated by another entry's point are dropped.

    Weights have ``p + 1`` entries (``mu0`` first) for the common-message
    region and ``p`` entries when ``conf`` is given.
    """
    if conf is not None:
        _require_two_user(spec)
    policies, regions = policy_regions(spec, quantizer, pgrid, engine)
    if conf is not None:
        regions = [add_conferencing(cs, conf) for cs in regions]
    return frontier_from_regions(policies, regions, weights)
