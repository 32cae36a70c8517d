"""Two parameterizations of the two-user perfect-CSIT common-message region.

The direct form uses per-state power and correlation policies
``(phi1, phi2, rho1, rho2)``.  The alternative form uses received powers
``p1, p2`` for the private signals, a coherent common power ``p0`` and the
share ``varrho`` of the common amplitude contributed by transmitter 1, all
as functions of ``H = (S1**2, S2**2)``.  The maps below convert between the
two pointwise; each of the four capacity arguments is preserved exactly.

Inputs are batches of states of shape ``(N, 1, 2)``.  Powers are in the
channel's absolute units; division by the noise variance happens inside
:func:`region_eq45`, which is the same as normalizing to unit noise first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import FadingChannelSpec
from .errors import CapabilityError, NumericalError, ValidationError
from .expectation import StateGrid, capacity_fn
from .fading import POWER_RTOL, TransmitPolicy
from .region import RateConstraintSet

__all__ = [
    "LiuUlukusValues",
    "LiuUlukusPolicy",
    "to_liu_ulukus",
    "from_liu_ulukus",
    "liu_ulukus_from_policy",
    "policy_from_liu_ulukus",
    "region_eq45",
    "region_eq43",
    "region_eq43_arguments",
    "region_eq45_arguments",
    "lu_power_usage",
    "equivalence_suite",
]


@dataclass(frozen=True)
class LiuUlukusValues:
    """Pointwise values ``p0, p1, p2, varrho``, each of shape ``(N,)``."""

    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    varrho: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([self.p0, self.p1, self.p2, self.varrho], axis=1)


@dataclass(frozen=True)
class LiuUlukusPolicy:
    """Callables of ``H`` (an ``(N, 2)`` array of squared gains) returning ``(N,)`` arrays."""

    p0: Callable
    p1: Callable
    p2: Callable
    varrho: Callable

    def evaluate(self, states: np.ndarray) -> LiuUlukusValues:
        h = _gains(states) ** 2
        n = h.shape[0]
        vals = [np.broadcast_to(np.asarray(f(h), dtype=float), (n,)).copy()
                for f in (self.p0, self.p1, self.p2, self.varrho)]
        out = LiuUlukusValues(*vals)
        if np.any(out.stack()[:, :3] < 0) or np.any(out.varrho < 0) or np.any(out.varrho > 1):
            raise ValidationError("Liu-Ulukus powers must be >= 0 and varrho in [0, 1]")
        return out


def _gains(states: np.ndarray) -> np.ndarray:
    states = np.asarray(states, dtype=float)
    if states.ndim == 2:
        states = states[None]
    if states.shape[1:] != (1, 2):
        raise CapabilityError("equivalence maps are defined for two transmitters, one receiver")
    return states[:, 0, :]


def _two_user_values(policy: TransmitPolicy, states: np.ndarray):
    s = _gains(states)
    phi, rho = policy.evaluate(np.asarray(states).reshape(-1, 1, 2),
                               np.zeros((s.shape[0], 2), dtype=np.intp))
    return s, phi, rho


def to_liu_ulukus(policy: TransmitPolicy, states: np.ndarray) -> LiuUlukusValues:
    """Map a perfect-CSIT policy to ``(p0, p1, p2, varrho)`` at the given states.

    ``varrho`` is set to 0 where both coherent amplitudes vanish; it then
    multiplies ``p0 = 0`` everywhere, so the choice does not affect regions.
    """
    s, phi, rho = _two_user_values(policy, states)
    c1 = s[:, 0] * rho[:, 0] * np.sqrt(phi[:, 0])
    c2 = s[:, 1] * rho[:, 1] * np.sqrt(phi[:, 1])
    den = c1 + c2
    p0 = den ** 2
    p1 = s[:, 0] ** 2 * phi[:, 0] * (1 - rho[:, 0] ** 2)
    p2 = s[:, 1] ** 2 * phi[:, 1] * (1 - rho[:, 1] ** 2)
    varrho = np.divide(c1, den, out=np.zeros_like(den), where=den > 0)
    return LiuUlukusValues(p0, p1, p2, varrho)


def from_liu_ulukus(lu, states: np.ndarray):
    """Map ``(p0, p1, p2, varrho)`` back to ``(phi, rho)``, arrays of shape ``(N, 2)``.

    ``lu`` is a :class:`LiuUlukusPolicy` or precomputed :class:`LiuUlukusValues`.
    Where a transmitter's total received power ``p_i + share**2 p0`` is 0
    its correlation is set to 0.  A zero gain with positive power is
    singular and raises :class:`~coopmac.errors.NumericalError`.
    """
    s = _gains(states)
    v = lu.evaluate(np.asarray(states).reshape(-1, 1, 2)) if isinstance(lu, LiuUlukusPolicy) else lu
    share = np.stack([v.varrho, 1.0 - v.varrho], axis=1)
    priv = np.stack([v.p1, v.p2], axis=1)
    received = priv + share ** 2 * v.p0[:, None]
    sq = s ** 2
    singular = (sq == 0) & (received > 0)
    if np.any(singular):
        n, i = np.argwhere(singular)[0]
        raise NumericalError(f"state {n}: gain of transmitter {i} is zero but its power is positive")
    phi = np.divide(received, sq, out=np.zeros_like(received), where=sq > 0)
    coh = share * np.sqrt(v.p0)[:, None]
    rho = np.divide(coh, np.sqrt(received), out=np.zeros_like(received), where=received > 0)
    return phi, np.clip(rho, 0.0, 1.0)


def liu_ulukus_from_policy(policy: TransmitPolicy) -> LiuUlukusPolicy:
    """Wrap :func:`to_liu_ulukus` as a policy of ``H``."""

    def at(h, field):
        states = np.sqrt(h).reshape(-1, 1, 2)
        return getattr(to_liu_ulukus(policy, states), field)

    return LiuUlukusPolicy(*(lambda h, f=f: at(h, f) for f in ("p0", "p1", "p2", "varrho")))


def policy_from_liu_ulukus(lu: LiuUlukusPolicy) -> TransmitPolicy:
    """Wrap :func:`from_liu_ulukus` as a perfect-CSIT transmit policy."""

    def phi(i):
        return lambda states: from_liu_ulukus(lu, states)[0][:, i]

    def rho(i):
        return lambda states: from_liu_ulukus(lu, states)[1][:, i]

    return TransmitPolicy((phi(0), phi(1)), (rho(0), rho(1)))


def region_eq43_arguments(policy: TransmitPolicy, states: np.ndarray) -> np.ndarray:
    """The four capacity arguments of the direct form (unit noise), shape ``(N, 4)``.

    Columns: ``R1``, ``R2``, ``R1 + R2`` and ``R0 + R1 + R2`` bounds.
    """
    s, phi, rho = _two_user_values(policy, states)
    a1 = s[:, 0] ** 2 * phi[:, 0] * (1 - rho[:, 0] ** 2)
    a2 = s[:, 1] ** 2 * phi[:, 1] * (1 - rho[:, 1] ** 2)
    tot = (s[:, 0] ** 2 * phi[:, 0] + s[:, 1] ** 2 * phi[:, 1]
           + 2 * s[:, 0] * s[:, 1] * rho[:, 0] * rho[:, 1] * np.sqrt(phi[:, 0] * phi[:, 1]))
    return np.stack([a1, a2, a1 + a2, tot], axis=1)


def region_eq45_arguments(v: LiuUlukusValues) -> np.ndarray:
    """The four capacity arguments of the alternative form, shape ``(N, 4)``."""
    return np.stack([v.p1, v.p2, v.p1 + v.p2, v.p1 + v.p2 + v.p0], axis=1)


def lu_power_usage(v: LiuUlukusValues, states: np.ndarray) -> np.ndarray:
    """Per-state transmit powers implied by ``v``, shape ``(N, 2)``.

    Their averages are the left-hand sides of the feasibility constraints.
    """
    s = _gains(states)
    share = np.stack([v.varrho, 1.0 - v.varrho], axis=1)
    received = np.stack([v.p1, v.p2], axis=1) + share ** 2 * v.p0[:, None]
    sq = s ** 2
    if np.any((sq == 0) & (received > 0)):
        raise NumericalError("zero gain with positive received power")
    return np.divide(received, sq, out=np.zeros_like(received), where=sq > 0)


def region_eq45(lu: LiuUlukusPolicy, spec: FadingChannelSpec, engine) -> RateConstraintSet:
    """Common-message region of a Liu-Ulukus policy.

    Bounds are ``E[C(p1)]``, ``E[C(p2)]``, ``E[C(p1 + p2)]`` and
    ``E[C(p0 + p1 + p2)]`` with all powers divided by the noise variance.
    Raises :class:`~coopmac.errors.ValidationError` if the average transmit
    powers exceed the budgets.
    """
    if spec.num_tx != 2 or spec.num_rx != 1:
        raise CapabilityError("region_eq45 is defined for two transmitters, one receiver")
    grid = engine if isinstance(engine, StateGrid) else engine.draw(spec)
    v = lu.evaluate(grid.states)
    usage = grid.mean_columns(lu_power_usage(v, grid.states))
    limit = spec.power_budget * (1 + POWER_RTOL) + 1e-12
    if np.any(usage > limit):
        raise ValidationError(f"Liu-Ulukus policy uses powers {usage} > budgets {spec.power_budget}")
    args = region_eq45_arguments(v) / spec.noise_var[0]
    m = grid.mean_columns(capacity_fn(args))
    return RateConstraintSet([[0.0, m[0], m[1], m[2]]], [m[3]], has_common=True)


def region_eq43(policy: TransmitPolicy, spec: FadingChannelSpec, engine) -> RateConstraintSet:
    """Direct-form region of a perfect-CSIT policy (validated like :func:`~coopmac.fading.region_cm`)."""
    from .fading import region_cm

    return region_cm(spec, None, policy, engine)


def _random_direct_policy(rng: np.random.Generator, grid: StateGrid, budget) -> TransmitPolicy:
    """Smooth random perfect-CSIT policy meeting the power budgets with equality."""
    c = rng.normal(scale=0.5, size=(2, 2))
    e = rng.normal(scale=2.0, size=(2, 3))

    def shape(states, i):
        g = states[:, 0, :]
        return np.exp(c[i, 0] * g[:, i] ** 2 / (1 + g[:, i] ** 2) + c[i, 1] * g[:, 1 - i])

    norms = [grid.mean(shape(grid.states, i)) for i in range(2)]

    def phi(i):
        return lambda states: budget[i] * shape(states, i) / norms[i]

    def rho(i):
        return lambda states: 1.0 / (1.0 + np.exp(-(e[i, 0] + e[i, 1] * states[:, 0, 0]
                                                    - e[i, 2] * states[:, 0, 1])))

    return TransmitPolicy((phi(0), phi(1)), (rho(0), rho(1)))


def _random_lu_policy(rng: np.random.Generator, grid: StateGrid, budget) -> LiuUlukusPolicy:
    """Random ``(p0, p1, p2, varrho)`` policy scaled to be feasible."""
    k = rng.uniform(0.1, 2.0, size=3)
    m = rng.normal(size=(3, 2))
    e = rng.normal(scale=2.0, size=3)

    def raw(h, j):
        return k[j] * h[:, 0] ** max(0.0, 1 + 0.3 * m[j, 0]) * h[:, 1] ** max(0.0, 1 + 0.3 * m[j, 1])

    def vr(h):
        return 1.0 / (1.0 + np.exp(-(e[0] + e[1] * h[:, 0] - e[2] * h[:, 1])))

    base = LiuUlukusPolicy(lambda h: raw(h, 0), lambda h: raw(h, 1), lambda h: raw(h, 2), vr)
    usage = grid.mean_columns(lu_power_usage(base.evaluate(grid.states), grid.states))
    scale = float(np.min(np.asarray(budget) / usage)) * rng.uniform(0.5, 1.0)
    return LiuUlukusPolicy(lambda h: scale * raw(h, 0), lambda h: scale * raw(h, 1),
                           lambda h: scale * raw(h, 2), vr)


def equivalence_suite(policies: int = 1000, nodes: int = 16, seed: int = 0,
                      powers=(10.0, 5.0)) -> dict:
    """Randomized check that both parameterizations describe the same regions.

    Draws ``policies`` random direct policies and as many random
    alternative-form policies on a shared ``nodes x nodes`` quadrature grid
    of Rayleigh states and measures

    * the largest relative mismatch of the four capacity arguments;
    * feasibility transport in both directions (power budgets, 1e-6 relative);
    * the largest round-trip reconstruction error at nondegenerate states.

    Returns a summary dictionary with a ``passed`` flag.
    """
    from .expectation import Quadrature

    spec = FadingChannelSpec.two_user(*powers)
    grid = Quadrature(nodes).draw(spec)
    states = grid.states
    budget = spec.power_budget
    limit = budget * (1 + POWER_RTOL) + 1e-12
    rng = np.random.default_rng(seed)
    arg_err = trip_err = 0.0
    feas_fail = [0, 0]
    for _ in range(policies):
        pol = _random_direct_policy(rng, grid, budget)
        v = to_liu_ulukus(pol, states)
        a43 = region_eq43_arguments(pol, states)
        a45 = region_eq45_arguments(v)
        arg_err = max(arg_err, float(np.max(np.abs(a43 - a45) / np.maximum(1.0, np.abs(a43)))))
        if np.any(grid.mean_columns(lu_power_usage(v, states)) > limit):
            feas_fail[0] += 1
        phi, rho = from_liu_ulukus(v, states)
        _, phi0, rho0 = _two_user_values(pol, states)
        trip_err = max(trip_err, float(np.max(np.abs(phi - phi0) / np.maximum(1.0, phi0))),
                       float(np.max(np.abs(rho - rho0))))
    for _ in range(policies):
        lu = _random_lu_policy(rng, grid, budget)
        v = lu.evaluate(states)
        phi, rho = from_liu_ulukus(v, states)
        if np.any(grid.mean_columns(phi) > limit):
            feas_fail[1] += 1
        back = to_liu_ulukus(TransmitPolicy((lambda s, f=phi[:, 0]: f, lambda s, f=phi[:, 1]: f),
                                            (lambda s, r=rho[:, 0]: r, lambda s, r=rho[:, 1]: r)),
                             states)
        ok = v.p0 > 0
        scale = np.maximum(1.0, np.abs(v.stack()[:, :3]))
        trip_err = max(trip_err,
                       float(np.max(np.abs(back.stack()[:, :3] - v.stack()[:, :3]) / scale)),
                       float(np.max(np.abs(back.varrho - v.varrho)[ok], initial=0.0)))
    passed = arg_err <= 1e-12 and trip_err <= 1e-10 and feas_fail == [0, 0]
    return {
        "policies_per_direction": policies,
        "states": int(states.shape[0]),
        "seed": seed,
        "max_argument_error": arg_err,
        "max_round_trip_error": trip_err,
        "infeasible_direct_to_alternative": feas_fail[0],
        "infeasible_alternative_to_direct": feas_fail[1],
        "passed": bool(passed),
    }
