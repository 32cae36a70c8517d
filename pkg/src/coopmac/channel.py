"""Fading channel specifications, state sampling and CSIT quantizers.

A state sample is a ``(q, p)`` array of nonnegative fading amplitudes
``S[j, k]`` (receiver ``j``, transmitter ``k``).  Batches of states are
``(count, q, p)`` arrays; every function here is vectorized over the
leading axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CapabilityError, ValidationError

__all__ = [
    "FadingDistribution",
    "FadingChannelSpec",
    "sample_state",
    "rayleigh_density",
    "db_to_linear",
    "NoCsit",
    "ThresholdCsit",
    "CustomCsit",
    "CsitQuantizer",
    "apply_csit",
]


def db_to_linear(value_db):
    """Convert a power ratio from dB to linear scale (``10**(dB/10)``)."""
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


@dataclass(frozen=True)
class FadingDistribution:
    """Law of the fading matrix.

    Use one of the constructors :meth:`deterministic`, :meth:`iid_rayleigh`
    or :meth:`custom` rather than instantiating directly.
    """

    kind: str
    matrix: Optional[np.ndarray] = None
    sampler: Optional[Callable] = None
    density: Optional[Callable] = None

    @classmethod
    def deterministic(cls, matrix) -> "FadingDistribution":
        m = np.array(matrix, dtype=float, ndmin=2)
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValidationError("deterministic fading matrix must be finite and >= 0")
        m.setflags(write=False)
        return cls("deterministic", matrix=m)

    @classmethod
    def iid_rayleigh(cls) -> "FadingDistribution":
        return cls("iid_rayleigh")

    @classmethod
    def custom(cls, sampler: Callable, density: Optional[Callable] = None) -> "FadingDistribution":
        """Arbitrary (possibly dependent) fading law.

        ``sampler(rng, count, shape)`` must return a ``(count, *shape)``
        array of nonnegative entries.  ``density`` is an optional marginal
        density, kept for documentation and plotting only.
        """
        return cls("custom", sampler=sampler, density=density)


@dataclass(frozen=True)
class FadingChannelSpec:
    """Gaussian fading GMAC with ``num_tx`` transmitters and ``num_rx`` receivers.

    Powers and noise variances are linear scale.
    """

    num_tx: int
    num_rx: int
    noise_var: np.ndarray
    power_budget: np.ndarray
    fading: FadingDistribution = field(default_factory=FadingDistribution.iid_rayleigh)

    def __post_init__(self):
        if int(self.num_tx) < 1 or int(self.num_rx) < 1:
            raise ValidationError("num_tx and num_rx must be >= 1")
        noise = np.array(self.noise_var, dtype=float, ndmin=1)
        power = np.array(self.power_budget, dtype=float, ndmin=1)
        if noise.shape != (self.num_rx,):
            raise ValidationError(f"noise_var must have {self.num_rx} entries")
        if power.shape != (self.num_tx,):
            raise ValidationError(f"power_budget must have {self.num_tx} entries")
        if np.any(noise <= 0) or not np.all(np.isfinite(noise)):
            raise ValidationError("noise variances must be finite and > 0")
        if np.any(power < 0) or not np.all(np.isfinite(power)):
            raise ValidationError("power budgets must be finite and >= 0")
        if self.fading.kind == "deterministic" and self.fading.matrix.shape != self.shape:
            raise ValidationError(
                f"deterministic fading matrix has shape {self.fading.matrix.shape}, "
                f"expected {self.shape}")
        noise.setflags(write=False)
        power.setflags(write=False)
        object.__setattr__(self, "noise_var", noise)
        object.__setattr__(self, "power_budget", power)

    @property
    def shape(self) -> tuple:
        return (self.num_rx, self.num_tx)

    @classmethod
    def two_user(cls, p1: float, p2: float, noise_var: float = 1.0,
                 fading: Optional[FadingDistribution] = None) -> "FadingChannelSpec":
        """Shortcut for the two-transmitter, one-receiver channel."""
        return cls(2, 1, [noise_var], [p1, p2],
                   fading if fading is not None else FadingDistribution.iid_rayleigh())

    def with_powers(self, powers) -> "FadingChannelSpec":
        return FadingChannelSpec(self.num_tx, self.num_rx, self.noise_var, powers, self.fading)


def sample_state(spec: FadingChannelSpec, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. state matrices.

    Rayleigh entries use the inverse CDF ``s = sqrt(-ln u)`` with ``u``
    uniform on ``(0, 1]``, which gives the density ``2 s exp(-s**2)``.

    Returns
    -------
    np.ndarray
        Array of shape ``(count, num_rx, num_tx)``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    shape = spec.shape
    kind = spec.fading.kind
    if kind == "deterministic":
        return np.broadcast_to(spec.fading.matrix, (count,) + shape).copy()
    rng = np.random.default_rng(seed)
    if kind == "iid_rayleigh":
        u = 1.0 - rng.random((count,) + shape)
        return np.sqrt(-np.log(u))
    if kind == "custom":
        out = np.asarray(spec.fading.sampler(rng, count, shape), dtype=float)
        if out.shape != (count,) + shape:
            raise ValidationError(
                f"custom sampler returned shape {out.shape}, expected {(count,) + shape}")
        if np.any(out < 0) or not np.all(np.isfinite(out)):
            raise ValidationError("custom sampler returned a negative or non-finite entry")
        return out
    raise CapabilityError(f"unknown fading kind {kind!r}")


def rayleigh_density(s):
    """Rayleigh density ``2 s exp(-s**2)`` for ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("Rayleigh density is defined for s >= 0 only")
    out = 2.0 * s * np.exp(-s * s)
    return float(out) if out.ndim == 0 else out


# -- CSIT ------------------------------------------------------------------

class NoCsit:
    """Transmitter without channel knowledge: a single-symbol alphabet."""

    size = 1

    def __call__(self, states: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(states)[0], dtype=np.intp)

    def __repr__(self):
        return "NoCsit()"


class ThresholdCsit:
    """Quantize one entry ``S[j, k]`` of the state against sorted cut points.

    The symbol is the number of cut points ``<= S[j, k]``, so ``m`` cuts
    give an alphabet of size ``m + 1``.
    """

    def __init__(self, entry: Sequence[int], cuts: Sequence[float]):
        self.entry = (int(entry[0]), int(entry[1]))
        self.cuts = np.sort(np.asarray(cuts, dtype=float).ravel())
        self.size = self.cuts.size + 1

    def __call__(self, states: np.ndarray) -> np.ndarray:
        j, k = self.entry
        vals = np.asarray(states)[:, j, k]
        return np.searchsorted(self.cuts, vals, side="right").astype(np.intp)

    def __repr__(self):
        return f"ThresholdCsit(entry={self.entry}, cuts={self.cuts.tolist()})"


class CustomCsit:
    """Wrap a vectorized callable ``fn(states) -> symbols`` with a known alphabet size."""

    def __init__(self, fn: Callable, size: int):
        self.fn = fn
        self.size = int(size)

    def __call__(self, states: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(states))
        if out.shape != (np.shape(states)[0],):
            raise ValidationError("custom CSIT map returned the wrong shape")
        if np.any(out < 0) or np.any(out >= self.size):
            raise ValidationError(f"custom CSIT symbol outside [0, {self.size})")
        return out.astype(np.intp)


class CsitQuantizer:
    """Per-transmitter CSIT maps."""

    def __init__(self, maps: Sequence):
        self.maps = tuple(maps)

    @classmethod
    def none(cls, num_tx: int) -> "CsitQuantizer":
        return cls([NoCsit() for _ in range(num_tx)])

    @property
    def num_tx(self) -> int:
        return len(self.maps)

    @property
    def sizes(self) -> tuple:
        return tuple(m.size for m in self.maps)

    def __call__(self, states: np.ndarray) -> np.ndarray:
        """Symbols for a batch of states, shape ``(count, num_tx)``."""
        states = np.asarray(states, dtype=float)
        return np.stack([m(states) for m in self.maps], axis=1)

    def __repr__(self):
        return f"CsitQuantizer({list(self.maps)!r})"


def apply_csit(quantizer: CsitQuantizer, state: np.ndarray) -> np.ndarray:
    """Evaluate every transmitter's CSIT map on one state or a batch of states."""
    state = np.asarray(state, dtype=float)
    single = state.ndim == 2
    batch = state[None] if single else state
    if batch.shape[2] != quantizer.num_tx:
        raise ValidationError(
            f"quantizer has {quantizer.num_tx} maps but state has {batch.shape[2]} transmitters")
    out = quantizer(batch)
    return out[0] if single else out
