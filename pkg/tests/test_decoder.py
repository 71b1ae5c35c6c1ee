import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genldpc.codes import ParityCheckMatrix, random_regular
from genldpc.decoder import DecoderConfig, decode, decode_batch, syndrome
from oracles import bitwise_map, hamming74, repetition, single_parity

CFG = DecoderConfig(max_iterations=50)


@pytest.mark.parametrize("n", [2, 3, 5, 9])
@pytest.mark.parametrize("family", [repetition, single_parity])
@pytest.mark.parametrize("early_stop", [True, False])
def test_map_on_trees(family, n, early_stop):
    H = family(n)
    L = np.random.default_rng(n).normal(0.5, 2.0, size=(2000, n))
    bits, _, _ = decode_batch(H, L, DecoderConfig(max_iterations=50, early_stop=early_stop))
    assert np.array_equal(bits, bitwise_map(H, L))


def test_syndrome_check_before_first_iteration():
    H = hamming74()
    out = decode(H, np.full(7, 3.0), CFG)
    assert out.iterations_used == 0 and out.syndrome_ok and out.converged_at == 0
    assert not out.hard_bits.any()


def test_single_error_corrected():
    H = hamming74()
    L = np.full(7, 4.0)
    L[2] = -1.0
    out = decode(H, L, CFG)
    assert not out.hard_bits.any() and out.iterations_used >= 1


def test_no_early_stop_runs_all_iterations():
    H = hamming74()
    _, iters, conv = decode_batch(H, np.full((2, 7), 3.0), DecoderConfig(max_iterations=7, early_stop=False))
    assert iters.tolist() == [7, 7]
    assert conv.tolist() == [0, 0]


def test_failure_reports_max_iterations():
    H = random_regular(64, 3, 6, seed=0)
    L = np.random.default_rng(0).normal(-0.2, 0.3, size=(5, 64))
    bits, iters, conv = decode_batch(H, L, DecoderConfig(max_iterations=5))
    for b, it, c in zip(bits, iters, conv):
        if c < 0:
            assert it == 5 and syndrome(H, b).any()


def test_ties_decode_to_zero():
    out = decode(single_parity(4), np.zeros(4), CFG)
    assert not out.hard_bits.any()


def test_huge_llrs_are_clamped():
    H = hamming74()
    out = decode(H, np.array([1e300, -1e300, 1e300, 1e300, 1e300, 1e300, 1e300]), CFG)
    assert np.all(np.isfinite(out.hard_bits))
    with pytest.raises(ValueError):
        decode(H, np.array([np.nan] + [1.0] * 6), CFG)
    with pytest.raises(ValueError):
        decode(H, np.ones(6), CFG)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_column_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    H = random_regular(24, 3, 6, seed=seed % 97)
    perm = rng.permutation(24)
    Hp = ParityCheckMatrix.from_dense(H.dense[:, perm])
    L = rng.normal(1.0, 1.5, size=(20, 24))
    a, ia, _ = decode_batch(H, L, DecoderConfig(max_iterations=30))
    b, ib, _ = decode_batch(Hp, L[:, perm], DecoderConfig(max_iterations=30))
    assert np.array_equal(a[:, perm], b)
    assert np.array_equal(ia, ib)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_row_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    H = random_regular(24, 3, 6, seed=seed % 89)
    Hp = ParityCheckMatrix.from_dense(H.dense[rng.permutation(H.m)])
    L = rng.normal(1.0, 1.5, size=(20, 24))
    cfg = DecoderConfig(max_iterations=30)
    assert np.array_equal(decode_batch(H, L, cfg)[0], decode_batch(Hp, L, cfg)[0])


def test_converged_output_is_codeword():
    H = random_regular(64, 3, 6, seed=1)
    L = np.random.default_rng(1).normal(2.0, 2.0, size=(200, 64))
    bits, _, conv = decode_batch(H, L, DecoderConfig(max_iterations=30))
    for b, c in zip(bits, conv):
        if c >= 0:
            assert not syndrome(H, b).any()


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        DecoderConfig(max_iterations=0)
    cfg = DecoderConfig(max_iterations=12, early_stop=False)
    assert DecoderConfig.from_dict(cfg.to_dict()) == cfg


def test_repetition_map_example():
    H = ParityCheckMatrix.from_dense([[1, 1, 0], [0, 1, 1]])
    assert decode(H, np.array([4.0, -1.0, 4.0]), CFG).hard_bits.tolist() == [0, 0, 0]


def test_erased_bit_recovered_in_one_iteration():
    out = decode(single_parity(4), np.array([8.0, -8.0, 0.0, 8.0]), CFG)
    assert out.hard_bits.tolist() == [0, 1, 1, 0]
    assert out.iterations_used == 1 and out.syndrome_ok


@pytest.mark.parametrize("family,n", [(repetition, 4), (single_parity, 4), (repetition, 5), (single_parity, 5)])
def test_map_on_all_quantized_sign_patterns(family, n):
    H = family(n)
    mags = np.array([0.5, 1.5, 3.0])
    frames = []
    for signs in np.ndindex(*(2,) * n):
        for m in np.ndindex(*(3,) * n):
            frames.append(np.where(np.array(signs) == 1, -1.0, 1.0) * mags[list(m)])
    L = np.array(frames)
    bits, _, _ = decode_batch(H, L, CFG)
    from oracles import codewords

    cw = codewords(H).astype(float)
    w = np.exp(-(L @ cw.T) + (L @ cw.T).min(axis=1, keepdims=True))
    p1 = (w @ cw) / w.sum(axis=1, keepdims=True)
    clear = np.abs(p1 - 0.5) > 1e-9  # exact MAP ties are excluded
    assert np.array_equal(bits[clear], (p1 > 0.5)[clear])


def test_adversarial_magnitudes():
    H = random_regular(32, 3, 6, seed=0)
    rng = np.random.default_rng(0)
    L = rng.choice([-1e6, 1e6], size=(50, 32))
    bits, iters, _ = decode_batch(H, L, DecoderConfig(max_iterations=10))
    assert bits.shape == (50, 32) and np.all(iters <= 10)
    # hard decisions of a saturated frame still favour the channel when consistent
    b, _, _ = decode_batch(H, np.full((1, 32), 1e6), CFG)
    assert not b.any()


def test_early_stop_never_changes_decisions():
    H = random_regular(64, 3, 6, seed=4)
    L = np.random.default_rng(4).normal(1.2, 1.6, size=(400, 64))
    a, ia, ca = decode_batch(H, L, DecoderConfig(max_iterations=30, early_stop=True))
    b, _, cb = decode_batch(H, L, DecoderConfig(max_iterations=30, early_stop=False))
    fired = ca >= 0
    assert fired.any()
    assert np.array_equal(a[fired], b[fired])
    assert np.array_equal(ca, cb)
    assert np.array_equal(ia[fired], ca[fired])


def test_syndrome_examples():
    H = random_regular(24, 3, 6, seed=2)
    assert not syndrome(H, np.zeros(24)).any()
    for w in (4, 5):
        # a row used as the bit vector: parity equals its weight mod 2
        assert syndrome(single_parity(w), np.ones(w)).tolist() == [w % 2]
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.integers(0, 2, 24)
        naive = [int(np.bitwise_xor.reduce(x[H.dense[r] == 1])) for r in range(H.m)]
        assert syndrome(H, x).tolist() == naive
    with pytest.raises(ValueError):
        syndrome(H, np.zeros(5))
