import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import boxplus_reference, brute_force_ml, first_order_words
from rmdecode.channel import ChannelConfig, RngStream, decoder_keys, simulate_words
from rmdecode.complexity import count_fht_bound
from rmdecode.decoders import (
    DecoderConfig,
    aggregate,
    boxplus,
    decode,
    decode_batch,
    fht_decode_order1,
    fwht,
    is_converged,
    num_projections,
    pool_size,
    project,
    reed_decode,
    reed_decode_batch,
    sdss_select,
    select_random,
    shortlist,
    subspace_distances,
)
from rmdecode.rm_core import ParameterError, binary_projection, codebook, encode, enumerate_subspaces, make_code


def naive_projection(a, b):
    return math.log(math.exp(a + b) + 1) - math.log(math.exp(a) + math.exp(b))


# -- projection -------------------------------------------------------------


def test_projection_examples():
    assert boxplus(2.0, 3.0) == pytest.approx(naive_projection(2.0, 3.0), abs=1e-12)
    assert boxplus(2.0, 3.0) == pytest.approx(1.69345, abs=1e-5)
    exact = 2 * math.atanh(math.tanh(2.0) * math.tanh(-2.0))
    assert boxplus(4.0, -4.0) == pytest.approx(exact, abs=1e-12)
    assert boxplus(4.0, -4.0) == pytest.approx(-3.30707, abs=2e-4)
    for a in (-7.0, 0.0, 0.3, 39.0):
        assert boxplus(a, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_project_uses_coset_order():
    llr = np.array([2.0, 3.0, -1.0, 0.5])
    out = project(llr, 1)
    assert out == pytest.approx([naive_projection(2.0, 3.0), naive_projection(-1.0, 0.5)])
    out = project(llr, 3)
    assert out == pytest.approx([naive_projection(2.0, 0.5), naive_projection(3.0, -1.0)])


def test_project_stable_at_cap():
    out = project(np.array([40.0, 40.0, -40.0, 40.0]), 1)
    assert np.all(np.isfinite(out))
    assert out[0] > 39 and out[1] < -39


@settings(max_examples=300, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_boxplus_tanh_identity(a, b):
    assert abs(boxplus(a, b) - boxplus_reference(a, b)) < 1e-9


@pytest.mark.parametrize("m, r", [(3, 1), (3, 2), (4, 2), (4, 3)])
def test_projection_commutes_with_encoding(m, r):
    words = codebook(make_code(m, r))
    for s in enumerate_subspaces(m):
        soft = project(20.0 * (1.0 - 2.0 * words), s)
        hard = binary_projection(words, s, m)
        assert np.array_equal(soft < 0, hard == 1)


# -- first-order ML ---------------------------------------------------------


def test_fht_examples():
    bits, metric = fht_decode_order1([5, 5, 5, 5])
    assert bits.tolist() == [0, 0, 0, 0] and metric == 20
    bits, metric = fht_decode_order1([-5, -5, -5, -5])
    assert bits.tolist() == [1, 1, 1, 1] and metric == 20
    bits, metric = fht_decode_order1([5, -5, 5, -5])
    assert bits.tolist() == [0, 1, 0, 1] and metric == 20


def test_fwht_matches_definition(rng):
    x = rng.normal(size=32)
    z = np.arange(32)
    ref = [sum(x[k] * (-1) ** bin(j & k).count("1") for k in z) for j in z]
    assert fwht(x) == pytest.approx(ref)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_fht_equals_exhaustive_correlation(m, rng):
    words = first_order_words(m)
    bipolar = 1.0 - 2.0 * words
    for _ in range(200):
        llr = rng.normal(0, 2, size=2**m)
        corr = bipolar @ llr
        best = np.argsort(corr)[-2:]
        if corr[best[1]] - corr[best[0]] < 1e-9:
            continue
        bits, metric = fht_decode_order1(llr)
        assert np.array_equal(bits, words[best[1]])
        assert metric == pytest.approx(corr[best[1]])


# -- aggregation ------------------------------------------------------------


def test_aggregate_examples():
    assert aggregate(np.full(4, 4.0), [(1, [0, 0])]).tolist() == [4, 4, 4, 4]
    assert aggregate(np.array([4.0, -4.0, 4.0, 4.0]), [(1, [1, 0])]).tolist() == [4, -4, 4, 4]
    with pytest.raises(ParameterError):
        aggregate(np.zeros(4), [])


@pytest.mark.parametrize("m, r", [(3, 2), (4, 2), (5, 3)])
def test_aggregate_fixed_point_for_codewords(m, r, rng):
    code = make_code(m, r)
    c = encode(code, rng.integers(0, 2, code.k))
    llr = 7.5 * (1.0 - 2.0 * c)
    subs = enumerate_subspaces(m)
    chosen = rng.choice(subs, size=5, replace=False)
    sel = [(int(s), binary_projection(c, int(s), m)) for s in chosen]
    assert np.array_equal(aggregate(llr, sel), llr)


# -- convergence and distances ---------------------------------------------


def test_is_converged_examples():
    a = np.array([1.0, 1.0])
    assert is_converged(a, a, 0.0)
    assert is_converged(a, np.array([1.04, 0.96]), 0.05)
    assert not is_converged(a, np.array([1.04, 0.96]), 0.01)


def test_distance_examples():
    llr = np.array([1.0, -2.0, 3.0, -4.0])
    raw = subspace_distances(llr, "raw")
    weighted = subspace_distances(llr, "weighted")
    assert raw[0] == pytest.approx(2.0)
    assert weighted[0] == pytest.approx(abs(math.exp(-1) - math.exp(-2)) + abs(math.exp(-3) - math.exp(-4)))
    assert weighted[0] == pytest.approx(0.264015, abs=1e-6)
    flat = np.array([3.0, -3.0, 3.0, 3.0, -3.0, 3.0, -3.0, -3.0])
    assert not subspace_distances(flat, "raw").any()
    assert not subspace_distances(flat, "weighted").any()


def test_distances_against_loop(rng):
    llr = rng.normal(0, 3, size=16)
    from rmdecode.rm_core import cosets_of

    for metric, f in (("raw", abs), ("weighted", lambda v: math.exp(-abs(v)))):
        ref = [sum(abs(f(llr[a]) - f(llr[b])) for a, b in (c.elements for c in cosets_of(s, 4))) for s in range(1, 16)]
        assert subspace_distances(llr, metric) == pytest.approx(ref)


# -- selection --------------------------------------------------------------


def test_pool_sizes():
    assert num_projections(Fraction(1, 32), 7) == 4
    assert pool_size(Fraction(1, 32), Fraction(17, 20), 7) == 23
    assert pool_size(Fraction(1, 8), 0, 7) == 127
    assert pool_size(Fraction(1, 8), 1, 7) == num_projections(Fraction(1, 8), 7)


def test_shortlist_example():
    assert shortlist([0.5, 0.2, 0.9], 2).tolist() == [[2, 1]]
    assert shortlist([0.3, 0.3, 0.1], 2).tolist() == [[3, 1]]


def test_select_random_full_pool():
    sel = select_random([1, 2, 3], 3, RngStream(1, 1))
    assert sel.chosen == (1, 2, 3)
    with pytest.raises(ParameterError):
        select_random([1, 2, 3], 4, RngStream(1, 1))


def test_select_random_uniform():
    counts = np.zeros(3)
    for t in range(100_000):
        sel = select_random([1, 2, 3], 1, RngStream(6, t))
        counts[sel.chosen[0] - 1] += 1
    freq = counts / counts.sum()
    assert np.all(np.abs(freq - 1 / 3) < 0.02 / 3)


def test_select_random_replay():
    a = select_random(range(1, 128), 10, RngStream(4, 8))
    assert a == select_random(range(1, 128), 10, RngStream(4, 8))


def test_sdss_deterministic_limit(rng):
    llr = rng.normal(1, 2, size=128)
    d = subspace_distances(llr)
    sel = sdss_select(llr, 7, Fraction(1, 16), 1, RngStream(0, 3))
    p = num_projections(Fraction(1, 16), 7)
    assert sel.candidate_pool_size == p
    expected = sorted(int(i) + 1 for i in np.argsort(d, kind="stable")[:p])
    assert list(sel.chosen) == expected


def test_sdss_pool_contains_choice(rng):
    llr = rng.normal(1, 2, size=128)
    sel = sdss_select(llr, 7, Fraction(1, 32), Fraction(17, 20), RngStream(0, 3))
    assert sel.candidate_pool_size == 23 and len(sel.chosen) == 4
    pool = set(shortlist(subspace_distances(llr), 23)[0].tolist())
    assert set(sel.chosen) <= pool


def test_sdss_rq_zero_is_srpa():
    code = make_code(6, 2)
    ch = ChannelConfig("awgn", 1.0, rate=code.rate)
    _, _, llrs = simulate_words(code, ch, 3, range(50))
    keys = decoder_keys(3, range(50))
    a = decode_batch(llrs, code, DecoderConfig("srpa", r_p=Fraction(1, 8)), keys)
    b = decode_batch(llrs, code, DecoderConfig("sdss", r_p=Fraction(1, 8), r_q=0, schedule="full"), keys)
    assert np.array_equal(a.final_llr, b.final_llr)


# -- Reed's decoder ---------------------------------------------------------


def test_reed_fixed_points(small_code, rng):
    msgs = rng.integers(0, 2, (20, small_code.k))
    words = encode(small_code, msgs)
    out, back = reed_decode_batch(words, small_code)
    assert np.array_equal(out, words) and np.array_equal(back, msgs)


def test_reed_single_flips_rm31():
    code = make_code(3, 1)
    for pos in range(8):
        e = np.zeros(8, dtype=np.uint8)
        e[pos] = 1
        assert not reed_decode(e, code).any()


def test_reed_single_flips_rm42(rng):
    code = make_code(4, 2)
    for _ in range(50):
        c = encode(code, rng.integers(0, 2, code.k))
        for pos in range(16):
            y = c.copy()
            y[pos] ^= 1
            assert np.array_equal(reed_decode(y, code), c)


@pytest.mark.parametrize("m, r", [(5, 1), (5, 2), (6, 2)])
def test_reed_corrects_up_to_radius(m, r, rng):
    code = make_code(m, r)
    t = 2 ** (m - r - 1) - 1
    for _ in range(40):
        c = encode(code, rng.integers(0, 2, code.k))
        y = c.copy()
        y[rng.choice(code.n, size=t, replace=False)] ^= 1
        assert np.array_equal(reed_decode(y, code), c)


def test_reed_output_in_codebook(rng):
    code = make_code(4, 2)
    book = {w.tobytes() for w in codebook(code)}
    ys = rng.integers(0, 2, (300, 16)).astype(np.uint8)
    for keys in (None, np.arange(300, dtype=np.uint64)):
        out, _ = reed_decode_batch(ys, code, keys)
        assert all(w.tobytes() in book for w in out)


# -- full decoder -----------------------------------------------------------

VARIANTS = [
    DecoderConfig("rpa"),
    DecoderConfig("srpa", r_p=Fraction(1, 4)),
    DecoderConfig("sdss", r_p=Fraction(1, 4), r_q=Fraction(17, 20)),
    DecoderConfig("sdss", r_p=Fraction(1, 2), r_q=1, schedule="full"),
]


@pytest.mark.parametrize("cfg", VARIANTS, ids=lambda c: f"{c.variant}-{c.r_p}-{c.schedule}")
@pytest.mark.parametrize("m, r", [(3, 2), (4, 2), (5, 3), (6, 2)])
def test_noiseless_decodes_in_one_iteration(cfg, m, r, rng):
    code = make_code(m, r)
    c = encode(code, rng.integers(0, 2, code.k))
    out = decode(40.0 * (1.0 - 2.0 * c), code, cfg, RngStream(1, 2))
    assert np.array_equal(out.codeword, c)
    assert out.iterations == 1 and out.converged


def test_decode_rejects_bad_input():
    cfg = DecoderConfig("rpa")
    with pytest.raises(ParameterError):
        decode(np.zeros(8), make_code(4, 2), cfg)
    with pytest.raises(ParameterError):
        decode(np.zeros(16), make_code(4, 0), cfg)


def test_first_order_code_goes_straight_to_fht():
    out = decode([5.0, 5.0, 5.0, 5.0], make_code(2, 1), DecoderConfig("rpa"))
    assert out.codeword.tolist() == [0, 0, 0, 0] and out.fht_count == 1


def test_config_defaults():
    assert DecoderConfig("sdss").schedule == "top-only"
    assert DecoderConfig("srpa").schedule == "full"
    assert DecoderConfig("rpa", r_p=Fraction(1, 8)).r_p == 1
    assert DecoderConfig("srpa", r_p="1/32").r_p == Fraction(1, 32)
    assert DecoderConfig("sdss", r_q=0.85).r_q == Fraction(17, 20)
    for bad in (dict(variant="x"), dict(variant="srpa", r_p=0), dict(r_q=2), dict(theta=-1), dict(schedule="x")):
        with pytest.raises(ParameterError):
            DecoderConfig(**bad)


def test_fht_count_within_bound_rm73_sdss():
    code = make_code(7, 3)
    cfg = DecoderConfig("sdss", r_p=Fraction(1, 16), r_q=Fraction(17, 20))
    ch = ChannelConfig("awgn", 1.5, rate=code.rate)
    _, _, llrs = simulate_words(code, ch, 8, range(60))
    out = decode_batch(llrs, code, cfg, decoder_keys(8, range(60)))
    assert count_fht_bound(code, cfg) == 128
    assert out.fht_count.max() <= 128


@pytest.mark.parametrize(
    "cfg",
    [
        DecoderConfig("rpa"),
        DecoderConfig("srpa", r_p=Fraction(1, 4)),
        DecoderConfig("srpa", r_p=Fraction(1, 8), fixed_subset=True),
        DecoderConfig("sdss", r_p=Fraction(1, 4), r_q=Fraction(1, 2)),
        DecoderConfig("sdss", r_p=Fraction(1, 4), r_q=Fraction(1, 2), schedule="full"),
    ],
    ids=lambda c: f"{c.variant}-{c.r_p}-{c.schedule}-{c.fixed_subset}",
)
@pytest.mark.parametrize("m, r", [(5, 2), (5, 3), (6, 3)])
def test_fht_count_never_exceeds_bound(cfg, m, r):
    code = make_code(m, r)
    ch = ChannelConfig("awgn", 0.5, rate=code.rate)
    _, _, llrs = simulate_words(code, ch, 21, range(100))
    out = decode_batch(llrs, code, cfg, decoder_keys(21, range(100)))
    bound = count_fht_bound(code, cfg)
    assert out.fht_count.max() <= bound
    assert out.fht_count.min() > 0


@pytest.mark.parametrize("cfg", VARIANTS[:3], ids=lambda c: c.variant)
def test_output_always_a_codeword(cfg):
    code = make_code(4, 2)
    book = {w.tobytes() for w in codebook(code)}
    ch = ChannelConfig("awgn", -1.0, rate=code.rate)
    _, _, llrs = simulate_words(code, ch, 5, range(300))
    out = decode_batch(llrs, code, cfg, decoder_keys(5, range(300)))
    assert all(w.tobytes() in book for w in out.codewords)
    assert np.array_equal(out.codewords, encode(code, out.messages))


def test_decode_replay_and_batch_invariance():
    code = make_code(6, 3)
    cfg = DecoderConfig("sdss", r_p=Fraction(1, 4), r_q=Fraction(1, 2))
    ch = ChannelConfig("awgn", 1.0, rate=code.rate)
    _, _, llrs = simulate_words(code, ch, 13, range(40))
    keys = decoder_keys(13, range(40))
    full = decode_batch(llrs, code, cfg, keys)
    again = decode_batch(llrs, code, cfg, keys)
    assert np.array_equal(full.final_llr, again.final_llr)
    single = decode(llrs[17], code, cfg, RngStream(13, 17))
    assert np.array_equal(single.final_llr, full.final_llr[17])
    assert single.fht_count == full.fht_count[17]
    part = decode_batch(llrs[5:9], code, cfg, keys[5:9])
    assert np.array_equal(part.codewords, full.codewords[5:9])


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 32, elements=st.floats(-12, 12)), st.integers(0, 2**32))
def test_decode_output_is_codeword_property(llr, seed):
    code = make_code(5, 2)
    out = decode(llr, code, DecoderConfig("sdss", r_p=Fraction(1, 8), r_q=Fraction(1, 2)), RngStream(seed, 0))
    assert np.array_equal(out.codeword, encode(code, out.message))


def test_rpa_close_to_ml():
    code = make_code(4, 2)
    ch = ChannelConfig("awgn", 3.0, rate=code.rate)
    ids = range(1000)
    _, words, llrs = simulate_words(code, ch, 77, ids)
    ml = brute_force_ml(llrs, code)
    rpa = decode_batch(llrs, code, DecoderConfig("rpa"), decoder_keys(77, ids)).codewords
    wer_ml = np.mean(np.any(ml != words, axis=1))
    wer_rpa = np.mean(np.any(rpa != words, axis=1))
    assert wer_ml > 0
    assert wer_rpa <= 1.5 * wer_ml


def test_fixed_subset_reuses_choice_across_iterations():
    from rmdecode.decoders import _select

    cfg = DecoderConfig("srpa", r_p=Fraction(1, 8), fixed_subset=True)
    L = np.random.default_rng(0).normal(size=(5, 64))
    keys = np.arange(5, dtype=np.uint64)
    a = _select(L, 6, cfg, 8, 63, keys, 0, None)
    b = _select(L + 1, 6, cfg, 8, 63, keys, 2, None)
    assert np.array_equal(a, b)
    redraw = DecoderConfig("srpa", r_p=Fraction(1, 8))
    assert not np.array_equal(_select(L, 6, redraw, 8, 63, keys, 0, None), _select(L, 6, redraw, 8, 63, keys, 1, None))
