import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import codebook, transform
from unrolled_polar.catalog import benchmark_codes
from unrolled_polar.codespec import construct
from unrolled_polar.encoder import (
    encode_nonsystematic,
    encode_systematic,
    from_hex,
    from_text,
    is_codeword,
    polar_transform,
    to_hex,
    to_text,
)


def test_transform_examples():
    assert not polar_transform(np.zeros(8)).any()
    u = np.zeros(8, np.uint8)
    u[7] = 1
    assert polar_transform(u).all()
    with pytest.raises(ValueError):
        polar_transform(np.zeros(6))


@given(st.integers(0, 6).flatmap(lambda m: st.lists(st.integers(0, 1), min_size=1 << m, max_size=1 << m)))
def test_transform_involution_and_matches_generator(u):
    u = np.array(u, np.uint8)
    np.testing.assert_array_equal(polar_transform(polar_transform(u)), u)
    np.testing.assert_array_equal(polar_transform(u), transform(u))


def test_batched_transform(rng):
    u = rng.integers(0, 2, size=(5, 3, 16), dtype=np.uint8)
    out = polar_transform(u)
    for idx in itertools.product(range(5), range(3)):
        np.testing.assert_array_equal(out[idx], transform(u[idx]))


def test_nonsystematic_examples(code16, code8):
    assert not encode_nonsystematic(code16, np.zeros(12)).any()
    assert encode_nonsystematic(code8, [0, 0, 0, 1]).all()
    info = np.array([1, 0, 1, 1], np.uint8)
    np.testing.assert_array_equal(encode_nonsystematic(code8, info), encode_nonsystematic(code8, info))


def test_systematic_16_12(code16, rng):
    info = rng.integers(0, 2, size=(1000, 12), dtype=np.uint8)
    x = encode_systematic(code16, info)
    np.testing.assert_array_equal(x[:, code16.info_indices], info)
    assert is_codeword(code16, x).all()
    assert not encode_systematic(code16, np.zeros(12)).any()


def test_systematic_8_4_all_ones(code8):
    x = encode_systematic(code8, [1, 1, 1, 1])
    assert x[[3, 5, 6, 7]].tolist() == [1, 1, 1, 1]
    assert not transform(x)[[0, 1, 2, 4]].any()


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_same_codebook(n):
    for k in range(n + 1):
        spec = construct(n, k, 1.0)
        infos = np.array(list(itertools.product((0, 1), repeat=k)), np.uint8).reshape(2**k, k)
        sys_words = {tuple(w) for w in encode_systematic(spec, infos)}
        non_words = {tuple(w) for w in encode_nonsystematic(spec, infos)}
        assert sys_words == non_words == {tuple(w) for w in codebook(spec.frozen)}


@pytest.mark.parametrize("label", list(benchmark_codes()))
def test_systematic_on_benchmark_codes(label, rng):
    spec = benchmark_codes()[label]
    info = rng.integers(0, 2, size=(20, spec.k), dtype=np.uint8)
    x = encode_systematic(spec, info)
    np.testing.assert_array_equal(x[:, spec.info_indices], info)
    assert is_codeword(spec, x).all()


def test_length_checks(code8):
    with pytest.raises(ValueError):
        encode_systematic(code8, [1, 0])
    with pytest.raises(ValueError):
        encode_nonsystematic(code8, [1, 0, 1, 0, 1])


def test_serialization(rng):
    bits = rng.integers(0, 2, 37, dtype=np.uint8)
    np.testing.assert_array_equal(from_text(to_text(bits)), bits)
    np.testing.assert_array_equal(from_hex(to_hex(bits), 37), bits)
    with pytest.raises(ValueError):
        from_text("0102")
