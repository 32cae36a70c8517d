"""Expectations over the fading state.

Two engines produce a weighted set of state matrices, a :class:`StateGrid`:

* :class:`MonteCarlo` draws i.i.d. states with equal weights;
* :class:`Quadrature` builds a tensor-product Gauss-Laguerre rule for
  i.i.d. Rayleigh fading.  With ``u = s**2`` the Rayleigh density becomes
  ``exp(-u) du``, which is exactly the Laguerre weight.

Every rate bound computed on one grid shares the same states, so bounds
are consistent functions of the same realizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .channel import FadingChannelSpec, sample_state
from .errors import CapabilityError, NumericalError

__all__ = [
    "capacity_fn",
    "ExpectationEstimate",
    "StateGrid",
    "MonteCarlo",
    "Quadrature",
    "mc_expect",
    "quad_expect",
    "stable_sum",
    "DEFAULT_MC_SAMPLES",
    "ACCEPTANCE_MC_SAMPLES",
    "DEFAULT_QUAD_NODES",
]

DEFAULT_MC_SAMPLES = 200_000
SUM_CHUNK = 4096
ACCEPTANCE_MC_SAMPLES = 1_000_000
DEFAULT_QUAD_NODES = 64
MAX_QUAD_DIM = 3


def capacity_fn(x):
    """Gaussian capacity ``0.5 * log2(1 + x)`` in bits.

    Accepts scalars or arrays; arguments ``x <= -1`` raise ``ValueError``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= -1.0):
        raise ValueError("capacity_fn is undefined for x <= -1")
    out = 0.5 * np.log1p(x) / np.log(2.0)
    return float(out) if out.ndim == 0 else out


def stable_sum(values: np.ndarray) -> np.ndarray:
    """Column sums of a ``(n, ...)`` array in a fixed, error-corrected order.

    Pairwise sums over fixed-size chunks are merged with ``math.fsum``, so the
    result depends only on the values and the chunk size.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    pad = (-n) % SUM_CHUNK
    if pad:
        values = np.concatenate([values, np.zeros((pad,) + values.shape[1:])])
    partial = values.reshape((-1, SUM_CHUNK) + values.shape[1:]).sum(axis=1)
    flat = partial.reshape(partial.shape[0], -1)
    out = np.array([math.fsum(col) for col in flat.T])
    return out.reshape(values.shape[1:]) if values.ndim > 1 else out[0]


@dataclass(frozen=True)
class ExpectationEstimate:
    value: float
    std_error: float
    method: str  # "monte_carlo" or "quadrature"
    size: int  # samples, or total quadrature nodes
    seed: Optional[int] = None

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class StateGrid:
    """Weighted states; ``weights is None`` means equal Monte Carlo weights."""

    states: np.ndarray
    weights: Optional[np.ndarray]
    method: str
    seed: Optional[int] = None

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def average(self, values) -> ExpectationEstimate:
        """Weighted mean of per-state ``values`` (chunked, error-corrected summation)."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.size,):
            raise ValueError(f"expected {self.size} values, got shape {values.shape}")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NumericalError(
                f"integrand is non-finite at sample {bad[0]} (value {values[bad[0]]!r})")
        if self.weights is None:
            n = values.size
            mean = float(stable_sum(values)) / n
            if n > 1:
                var = float(stable_sum((values - mean) ** 2)) / (n - 1)
                se = math.sqrt(var / n)
            else:
                se = 0.0
            return ExpectationEstimate(mean, se, self.method, n, self.seed)
        return ExpectationEstimate(float(stable_sum(self.weights * values)), 0.0,
                                   self.method, self.size, self.seed)

    def mean(self, values) -> float:
        return self.average(values).value

    def mean_columns(self, values: np.ndarray) -> np.ndarray:
        """Weighted mean of each column of a ``(size, k)`` array (no std errors)."""
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            row = np.flatnonzero(~np.all(np.isfinite(values), axis=1))[0]
            raise NumericalError(f"integrand is non-finite at sample {row}")
        if self.weights is None:
            return stable_sum(values) / self.size
        return stable_sum(self.weights[:, None] * values)


@dataclass(frozen=True)
class MonteCarlo:
    samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("Monte Carlo needs at least 2 samples")

    def draw(self, spec: FadingChannelSpec) -> StateGrid:
        states = sample_state(spec, self.seed, self.samples)
        return StateGrid(states, None, "monte_carlo", self.seed)

    def describe(self) -> dict:
        return {"kind": "mc", "samples": self.samples, "seed": self.seed}


@dataclass(frozen=True)
class Quadrature:
    nodes: int = DEFAULT_QUAD_NODES

    def __post_init__(self):
        if self.nodes < 1:
            raise ValueError("nodes must be >= 1")

    def draw(self, spec: FadingChannelSpec) -> StateGrid:
        kind = spec.fading.kind
        if kind == "deterministic":
            return StateGrid(spec.fading.matrix[None].copy(), np.ones(1), "quadrature")
        if kind != "iid_rayleigh":
            raise CapabilityError(f"quadrature supports iid_rayleigh fading, not {kind!r}")
        dim = spec.num_rx * spec.num_tx
        if dim > MAX_QUAD_DIM:
            raise CapabilityError(
                f"tensor quadrature limited to {MAX_QUAD_DIM} fading entries, got {dim}")
        x, w = np.polynomial.laguerre.laggauss(self.nodes)
        grids = np.meshgrid(*([x] * dim), indexing="ij")
        wgrids = np.meshgrid(*([w] * dim), indexing="ij")
        u = np.stack([g.ravel() for g in grids], axis=1)
        weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
        states = np.sqrt(u).reshape((-1,) + spec.shape)
        return StateGrid(states, weights, "quadrature")

    def describe(self) -> dict:
        return {"kind": "quad", "nodes": self.nodes}


def mc_expect(f: Callable, spec: FadingChannelSpec, samples: int = DEFAULT_MC_SAMPLES,
              seed: int = 0) -> ExpectationEstimate:
    """Monte Carlo estimate of ``E[f(S)]``.

    ``f`` is vectorized: it maps a ``(samples, q, p)`` batch of states to
    ``samples`` real values.
    """
    grid = MonteCarlo(samples, seed).draw(spec)
    return grid.average(f(grid.states))


def quad_expect(f: Callable, spec: FadingChannelSpec,
                nodes_per_dim: int = DEFAULT_QUAD_NODES) -> ExpectationEstimate:
    """Gauss-Laguerre estimate of ``E[f(S)]`` for i.i.d. Rayleigh fading."""
    grid = Quadrature(nodes_per_dim).draw(spec)
    return grid.average(f(grid.states))
