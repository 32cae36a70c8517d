"""Random superposition codes with joint-typicality decoding on discrete MACs.

A code of blocklength ``n`` has ``M0`` cloud centers ``u(w0)`` drawn i.i.d.
from ``P_U`` and, for every cloud and transmitter ``i``, ``Mi`` satellites
``x_i(w0, wi)`` drawn symbol by symbol from ``P_{Xi|U}(. | u_t(w0))``.
Each receiver looks for the unique message tuple whose codewords are
strongly typical with its channel output: every joint symbol frequency is
within ``eps`` of the design law and no zero-probability symbol occurs.

Decoding prunes the search before counting frequencies.  Cloud centers and
satellites that put a zero-probability symbol next to the received output
are discarded with packed bit masks, so only support-consistent tuples are
ever enumerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binomtest

from .discrete import DiscreteChannelSpec, InputLaw
from .errors import BudgetError, ValidationError

__all__ = [
    "CodebookSpec",
    "Codebook",
    "build_codebook",
    "transmit_and_decode",
    "channel_output",
    "decode",
    "typical",
    "ErrorPoint",
    "error_curve",
    "wilson_interval",
    "DEFAULT_EPS",
    "DEFAULT_SYMBOL_BUDGET",
]

DEFAULT_EPS = 0.2
DEFAULT_SYMBOL_BUDGET = 50_000_000
FIRST_CHUNK = 1024
MAX_CHUNK = 65_536


@dataclass(frozen=True)
class CodebookSpec:
    """Code parameters.

    ``rates`` is ``(R0, R1, ..., Rp)`` in bits per symbol.  ``symbol_budget``
    caps the number of stored codeword symbols.
    """

    n: int
    rates: Tuple[float, ...]
    law: InputLaw
    channel: DiscreteChannelSpec
    eps: float = DEFAULT_EPS
    seed: int = 0
    symbol_budget: int = DEFAULT_SYMBOL_BUDGET

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        object.__setattr__(self, "rates", rates)
        if int(self.n) < 1:
            raise ValidationError("blocklength n must be >= 1")
        if self.eps <= 0:
            raise ValidationError("typicality slack eps must be > 0")
        if len(rates) != self.channel.num_tx + 1:
            raise ValidationError(f"rates needs {self.channel.num_tx + 1} entries (R0 first)")
        if any(r < 0 or not math.isfinite(r) for r in rates):
            raise ValidationError("rates must be finite and >= 0")
        if len(self.law.px) != self.channel.num_tx:
            raise ValidationError("law and channel disagree on the number of transmitters")
        for t, size in zip(self.law.px, self.channel.input_sizes):
            if t.shape[1] != size:
                raise ValidationError("law alphabet sizes do not match the channel")

    @property
    def message_counts(self) -> Tuple[int, ...]:
        """``ceil(2**(n R))`` per message, at least 1."""
        return tuple(max(1, math.ceil(2.0 ** (self.n * r) - 1e-9)) for r in self.rates)

    @property
    def realized_rates(self) -> Tuple[float, ...]:
        return tuple(math.log2(m) / self.n for m in self.message_counts)

    def with_n(self, n: int) -> "CodebookSpec":
        return CodebookSpec(n, self.rates, self.law, self.channel, self.eps, self.seed,
                            self.symbol_budget)


@dataclass(frozen=True)
class Codebook:
    """``u`` is ``(M0, n)``; ``x[i]`` is ``(M0, Mi, n)``."""

    spec: CodebookSpec
    u: np.ndarray
    x: Tuple[np.ndarray, ...]
    _cache: Dict = field(default_factory=dict, compare=False, repr=False)


def _draw(rng: np.random.Generator, probs: np.ndarray, shape) -> np.ndarray:
    """Symbols with law ``probs[..., :]`` broadcast against ``shape``."""
    cdf = np.cumsum(probs, axis=-1)
    r = rng.random(shape)
    out = (r[..., None] >= cdf).sum(axis=-1)
    return np.minimum(out, probs.shape[-1] - 1).astype(np.int8)


def build_codebook(spec: CodebookSpec) -> Codebook:
    """Draw the superposition codebook; deterministic given ``spec.seed``."""
    counts = spec.message_counts
    n = spec.n
    stored = counts[0] * n * (1 + sum(counts[1:]))
    if stored > spec.symbol_budget:
        raise BudgetError(f"codebook needs {stored} symbols > budget {spec.symbol_budget}", stored)
    rng = np.random.default_rng(spec.seed)
    u = _draw(rng, spec.law.pu, (counts[0], n))
    xs = []
    for i, table in enumerate(spec.law.px):
        probs = table[u][:, None, :, :]  # (M0, 1, n, Xi)
        xs.append(_draw(rng, probs, (counts[0], counts[i + 1], n)))
    return Codebook(spec, u, tuple(xs))


class _Receiver:
    """Precomputed support and frequency tables for one receiver."""

    def __init__(self, spec: CodebookSpec, j: int):
        law, channel = spec.law, spec.channel
        w = channel.receiver_marginal(j)
        joint = law.joint()[..., None] * w[None]  # (U, X1..Xp, Y)
        self.shape = joint.shape
        self.law = joint.ravel()
        self.support = joint > 0
        p = channel.num_tx
        axes = tuple(range(1, p + 1))
        self.u_ok = self.support.any(axis=axes)  # (U, Y)
        self.x_ok = []
        for i in range(p):
            other = tuple(k for k in axes if k != i + 1)
            self.x_ok.append(self.support.any(axis=other))  # (U, Xi, Y)
        self.strides = np.array([int(np.prod(self.shape[k + 1:])) for k in range(len(self.shape))])
        self.support_flat = self.support.ravel()
        self._limits = {}

    def typical_counts(self, counts: np.ndarray, n: int, eps: float) -> np.ndarray:
        """Same test as :func:`typical` on integer counts, via precomputed count limits."""
        key = (n, eps)
        if key not in self._limits:
            lo = np.ceil(n * (self.law - eps) - 1e-9)
            hi = np.floor(n * (self.law + eps) + 1e-9)
            hi = np.where(self.law > 0, hi, 0)
            self._limits[key] = (lo, hi)
        lo, hi = self._limits[key]
        return np.all((counts >= lo) & (counts <= hi), axis=1)


def typical(counts: np.ndarray, law: np.ndarray, n: int, eps: float) -> np.ndarray:
    """Strong typicality of rows of joint-symbol ``counts`` against ``law``."""
    freq = counts / n
    ok = np.all(np.abs(freq - law) <= eps + 1e-12, axis=-1)
    return ok & np.all((counts == 0) | (law > 0), axis=-1)


def _satellite_rows(codebook: Codebook, rx: _Receiver, j: int, w0: int, i: int):
    """Packed masks ``rows[t, y]`` of satellites consistent with output ``y`` at time ``t``."""
    key = (j, w0, i)
    if key not in codebook._cache:
        u = codebook.u[w0].astype(np.intp)
        x = codebook.x[i][w0].astype(np.intp)  # (Mi, n)
        ok = rx.x_ok[i][u[None, :], x, :]  # (Mi, n, Y)
        codebook._cache[key] = np.packbits(np.transpose(ok, (1, 2, 0)), axis=-1)
    return codebook._cache[key]


def _decode_at(codebook: Codebook, rx: _Receiver, j: int, y: np.ndarray):
    spec = codebook.spec
    n = spec.n
    counts = spec.message_counts
    t = np.arange(n)
    u_cand = np.flatnonzero(np.all(rx.u_ok[codebook.u.astype(np.intp), y[None, :]], axis=1))
    found = None
    for w0 in u_cand:
        lists = []
        for i in range(len(codebook.x)):
            rows = _satellite_rows(codebook, rx, j, int(w0), i)
            mask = np.bitwise_and.reduce(rows[t, y], axis=0)
            cand = np.flatnonzero(np.unpackbits(mask, count=counts[i + 1]))
            if cand.size == 0:
                break
            lists.append(cand)
        else:
            hits = _typical_tuples(codebook, rx, int(w0), lists, y)
            if len(hits) > 1 or (hits and found is not None):
                return None
            if hits:
                found = hits[0]
    return found


def _typical_tuples(codebook: Codebook, rx: _Receiver, w0: int, lists, y: np.ndarray):
    """Typical tuples within cloud ``w0``; stops once two are found.

    Prefixes over the first ``p - 1`` candidate lists are enumerated in
    growing chunks.  For each prefix, the satellites of the last
    transmitter that keep every joint symbol in the support are read off a
    packed bit mask, so only support-consistent tuples are histogrammed.
    """
    spec = codebook.spec
    n = spec.n
    t = np.arange(n)
    p = len(lists)
    last = p - 1
    sup = rx.support.reshape(rx.shape[0], -1, rx.shape[p], rx.shape[-1])  # (U, P, X_last, Y)
    u = codebook.u[w0].astype(np.intp)
    x_last = codebook.x[last][w0][lists[last]].astype(np.intp)  # (c, n)
    ok = sup[u[:, None, None], np.arange(sup.shape[1])[None, :, None],
             x_last.T[:, None, :], y[:, None, None]]  # (n, P, c)
    packed = np.packbits(ok, axis=-1)
    pre_strides = [int(np.prod(rx.shape[i + 2:p])) for i in range(last)]
    base = rx.strides[0] * u + rx.strides[-1] * y
    sizes = [len(c) for c in lists[:last]]
    total = int(np.prod(sizes)) if sizes else 1
    out = []
    start, chunk = 0, FIRST_CHUNK
    while start < total:
        flat = np.arange(start, min(total, start + chunk))
        start += flat.size
        chunk = min(2 * chunk, MAX_CHUNK)
        chosen = ([c[k] for c, k in zip(lists[:last], np.unravel_index(flat, sizes))]
                  if sizes else [])
        code = np.zeros((flat.size, n), dtype=np.intp)
        sym = np.broadcast_to(base, (flat.size, n)).copy()
        for i, w in enumerate(chosen):
            xi = codebook.x[i][w0][w]
            code += pre_strides[i] * xi
            sym += rx.strides[i + 1] * xi
        mask = np.bitwise_and.reduce(packed[t[None, :], code, :], axis=1)
        m_idx, k_idx = np.nonzero(np.unpackbits(mask, axis=1, count=len(lists[last])))
        if m_idx.size == 0:
            continue
        full = sym[m_idx] + rx.strides[p] * x_last[k_idx]
        rows = np.repeat(np.arange(m_idx.size), n) * rx.law.size + full.ravel()
        hist = np.bincount(rows, minlength=m_idx.size * rx.law.size)
        for h in np.flatnonzero(rx.typical_counts(hist.reshape(m_idx.size, -1), n, spec.eps)):
            m = m_idx[h]
            out.append((w0,) + tuple(int(w[m]) for w in chosen) + (int(lists[last][k_idx[h]]),))
            if len(out) > 1:
                return out
    return out


def _receivers(codebook: Codebook) -> List[_Receiver]:
    if "rx" not in codebook._cache:
        codebook._cache["rx"] = [_Receiver(codebook.spec, j)
                                 for j in range(codebook.spec.channel.num_rx)]
    return codebook._cache["rx"]


def channel_output(codebook: Codebook, messages: Sequence[int], seed: int) -> Tuple[np.ndarray, ...]:
    """Send ``(w0, w1, ..., wp)`` once; one length-``n`` output sequence per receiver."""
    spec = codebook.spec
    counts = spec.message_counts
    messages = tuple(int(m) for m in messages)
    if len(messages) != len(counts) or any(not 0 <= m < c for m, c in zip(messages, counts)):
        raise ValidationError(f"messages must lie in ranges {counts}")
    w0 = messages[0]
    xs = [codebook.x[i][w0, wi].astype(np.intp) for i, wi in enumerate(messages[1:])]
    probs = spec.channel.transition[tuple(xs)].reshape(spec.n, -1)  # (n, prod |Y|)
    rng = np.random.default_rng(seed)
    flat_y = _draw(rng, probs, (spec.n,)).astype(np.intp)
    return tuple(np.unravel_index(flat_y, spec.channel.output_sizes))


def decode(codebook: Codebook, outputs: Sequence[np.ndarray]) -> List[Optional[Tuple[int, ...]]]:
    """Typicality decoding at every receiver.

    Returns one entry per receiver: the unique typical tuple, or ``None``
    when no tuple or more than one tuple is typical.  A code with a single
    message tuple is decoded without a typicality test.
    """
    rxs = _receivers(codebook)
    if len(outputs) != len(rxs):
        raise ValidationError(f"expected {len(rxs)} output sequences")
    counts = codebook.spec.message_counts
    if all(c == 1 for c in counts):
        # a single message tuple carries no information: nothing to decode
        return [(0,) * len(counts) for _ in rxs]
    return [_decode_at(codebook, rx, j, np.asarray(outputs[j], dtype=np.intp))
            for j, rx in enumerate(rxs)]


def transmit_and_decode(codebook: Codebook, messages: Sequence[int],
                        seed: int) -> List[Optional[Tuple[int, ...]]]:
    """:func:`channel_output` followed by :func:`decode`."""
    return decode(codebook, channel_output(codebook, messages, seed))


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    ci = binomtest(int(errors), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class ErrorPoint:
    n: int
    nominal_rates: Tuple[float, ...]
    realized_rates: Tuple[float, ...]
    trials: int
    errors: int
    ci_low: float
    ci_high: float

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials


def error_curve(spec: CodebookSpec, rates: Optional[Sequence[float]], n_list: Sequence[int],
                trials: int, seed: int = 0) -> List[ErrorPoint]:
    """Empirical block error rate for each blocklength.

    One codebook is drawn per ``n`` (seeded from ``seed`` and ``n``); each
    trial draws uniform messages and fresh channel noise from its own seed.
    An error is counted when any receiver fails or decodes a wrong tuple.
    ``rates=None`` keeps the rates of ``spec``.
    """
    if trials < 100:
        raise ValidationError("error_curve needs at least 100 trials")
    if rates is not None:
        spec = CodebookSpec(spec.n, tuple(rates), spec.law, spec.channel, spec.eps, spec.seed,
                            spec.symbol_budget)
    out = []
    for n in n_list:
        ss = np.random.SeedSequence([int(seed), int(n)])
        code_seed, msg_seed, noise_seed = ss.generate_state(3)
        sp = CodebookSpec(int(n), spec.rates, spec.law, spec.channel, spec.eps, int(code_seed),
                          spec.symbol_budget)
        book = build_codebook(sp)
        counts = sp.message_counts
        rng = np.random.default_rng(msg_seed)
        msgs = np.stack([rng.integers(0, c, size=trials) for c in counts], axis=1)
        noise = np.random.SeedSequence(int(noise_seed)).generate_state(trials, dtype=np.uint64)
        errors = 0
        for k in range(trials):
            sent = tuple(int(m) for m in msgs[k])
            decoded = transmit_and_decode(book, sent, int(noise[k]))
            errors += any(d != sent for d in decoded)
        lo, hi = wilson_interval(errors, trials)
        out.append(ErrorPoint(int(n), sp.rates, sp.realized_rates, trials, errors, lo, hi))
    return out
