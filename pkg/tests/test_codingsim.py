import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopmac.codingsim import (
    CodebookSpec,
    build_codebook,
    channel_output,
    decode,
    error_curve,
    transmit_and_decode,
    typical,
    wilson_interval,
)
from coopmac.discrete import DiscreteChannelSpec, InputLaw
from coopmac.errors import BudgetError, ValidationError


def oracle_decode(book, ys):
    """Exhaustive typicality decoder written from the definition."""
    spec = book.spec
    n = spec.n
    law = spec.law.joint()
    out = []
    for j, y in enumerate(ys):
        pj = law[..., None] * spec.channel.receiver_marginal(j)[None]
        hits = []
        for tup in itertools.product(*(range(m) for m in spec.message_counts)):
            w0 = tup[0]
            seqs = [book.u[w0]] + [book.x[i][w0, w] for i, w in enumerate(tup[1:])] + [y]
            counts = np.zeros(pj.shape)
            for t in range(n):
                counts[tuple(int(s[t]) for s in seqs)] += 1
            freq = counts / n
            ok = np.all(np.abs(freq - pj) <= spec.eps + 1e-12) and not np.any((counts > 0) & (pj == 0))
            if ok:
                hits.append(tup)
        out.append(hits[0] if len(hits) == 1 else None)
    return out


def random_channel(rng, sizes, outputs, sparsity=0.4):
    w = rng.random((int(np.prod(sizes)), int(np.prod(outputs))))
    w[rng.random(w.shape) < sparsity] = 0
    w[:, 0] += 1e-3
    w /= w.sum(axis=1, keepdims=True)
    return DiscreteChannelSpec(w.reshape(tuple(sizes) + tuple(outputs)), len(sizes))


def test_adder_small_code_decodes():
    ch = DiscreteChannelSpec.binary_adder()
    law = InputLaw.independent([0.5, 0.5], [0.5, 0.5])
    spec = CodebookSpec(24, (0, 0.25, 0.25), law, ch)
    book = build_codebook(spec)
    assert book.u.shape == (1, 24) and book.x[0].shape == (1, 64, 24)
    decoded = transmit_and_decode(book, (0, 5, 9), seed=1)
    assert decoded == [(0, 5, 9)] or decoded == [None]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 2), st.sampled_from([(1,), (2,), (1, 2)]))
def test_fast_decoder_matches_oracle(seed, u_size, outputs):
    rng = np.random.default_rng(seed)
    sizes = (2, 2)
    ch = random_channel(rng, sizes, outputs)
    pu = rng.dirichlet(np.ones(u_size))
    law = InputLaw(pu, tuple(rng.dirichlet(np.ones(2), size=u_size) for _ in sizes))
    spec = CodebookSpec(6, (0.2 * (u_size - 1), 0.4, 0.3), law, ch, eps=0.3, seed=seed % 1000)
    book = build_codebook(spec)
    for trial in range(4):
        msgs = tuple(int(rng.integers(m)) for m in spec.message_counts)
        ys = channel_output(book, msgs, seed=trial)
        assert decode(book, ys) == oracle_decode(book, ys)


def test_three_user_matches_oracle():
    rng = np.random.default_rng(7)
    ch = random_channel(rng, (2, 2, 2), (3,), sparsity=0.2)
    law = InputLaw.independent([0.5, 0.5], [0.6, 0.4], [0.3, 0.7])
    spec = CodebookSpec(5, (0, 0.4, 0.4, 0.4), law, ch, eps=0.35, seed=2)
    book = build_codebook(spec)
    for trial in range(5):
        msgs = tuple(int(rng.integers(m)) for m in spec.message_counts)
        ys = channel_output(book, msgs, seed=trial)
        assert decode(book, ys) == oracle_decode(book, ys)


def test_codebook_deterministic_and_law():
    ch = DiscreteChannelSpec.binary_adder()
    law = InputLaw([0.3, 0.7], ([[0.9, 0.1], [0.2, 0.8]], [[0.5, 0.5], [0.1, 0.9]]))
    spec = CodebookSpec(200, (0.03, 0.02, 0.02), law, ch, seed=3)
    a, b = build_codebook(spec), build_codebook(spec)
    assert np.array_equal(a.u, b.u) and all(np.array_equal(x, y) for x, y in zip(a.x, b.x))
    assert a.u.mean() == pytest.approx(0.7, abs=0.05)
    ones = a.x[0][a.u[:, None, :].repeat(a.x[0].shape[1], 1) == 1]
    assert ones.mean() == pytest.approx(0.8, abs=0.05)


def test_message_counts_and_realized_rates():
    law = InputLaw.independent([0.5, 0.5], [0.5, 0.5])
    spec = CodebookSpec(8, (0, 0.4, 0.9), law, DiscreteChannelSpec.binary_adder())
    assert spec.message_counts == (1, 10, 148)
    assert spec.realized_rates[1] == pytest.approx(np.log2(10) / 8)
    assert CodebookSpec(10, (0, 0.5, 0.5), law, DiscreteChannelSpec.binary_adder()).message_counts == (1, 32, 32)


def test_validation_and_budget():
    law = InputLaw.independent([0.5, 0.5], [0.5, 0.5])
    ch = DiscreteChannelSpec.binary_adder()
    with pytest.raises(ValidationError):
        CodebookSpec(8, (0.4, 0.4), law, ch)
    with pytest.raises(ValidationError):
        CodebookSpec(8, (0, -0.1, 0.4), law, ch)
    with pytest.raises(BudgetError):
        build_codebook(CodebookSpec(40, (0, 0.9, 0.9), law, ch, symbol_budget=10**6))
    book = build_codebook(CodebookSpec(8, (0, 0.25, 0.25), law, ch))
    with pytest.raises(ValidationError):
        transmit_and_decode(book, (0, 4, 0), seed=0)
    with pytest.raises(ValidationError):
        error_curve(book.spec, None, [8], trials=10)


def test_typical_helper():
    law = np.array([0.5, 0.5, 0.0])
    assert typical(np.array([[5, 5, 0]]), law, 10, 0.1).tolist() == [True]
    assert typical(np.array([[4, 5, 1]]), law, 10, 0.2).tolist() == [False]
    assert typical(np.array([[7, 3, 0]]), law, 10, 0.1).tolist() == [False]


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-12) and hi == pytest.approx(0.0370, abs=1e-4)
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and hi - 0.5 == pytest.approx(0.5 - lo)


def test_error_curve_reproducible():
    law = InputLaw.independent([0.5, 0.5], [0.5, 0.5])
    spec = CodebookSpec(8, (0, 0.4, 0.4), law, DiscreteChannelSpec.binary_adder())
    a = error_curve(spec, None, [8], trials=200, seed=4)
    b = error_curve(spec, None, [8], trials=200, seed=4)
    assert a == b
    assert a[0].ci_low <= a[0].error_rate <= a[0].ci_high
