import csv
import io

import numpy as np
import pytest

from unrolled_polar.codespec import construct
from unrolled_polar.fastssc import NodeConstraints
from unrolled_polar.harness import (
    CSV_FIELDS, ChannelConfig, DecoderOptions, ResultRow, batch_rng, channel_llr, equivalence_run,
    make_decoder, montecarlo, transmit, write_csv,
)
from unrolled_polar.quant import QuantSpec

Q540 = QuantSpec(5, 4, 0)


def test_sigma2():
    assert ChannelConfig(0.0, 0.5).sigma2 == pytest.approx(1.0)
    assert ChannelConfig(10.0, 1.0).sigma2 == pytest.approx(0.05)
    with pytest.raises(ValueError):
        ChannelConfig(1.0, 0.0)


def test_llr_formula():
    assert channel_llr(1.0, 1.0) == 2.0
    np.testing.assert_allclose(channel_llr([-0.5, 0.25], 0.5), [-2.0, 1.0])


def test_transmit_signs_and_determinism():
    x = np.array([0, 1, 1, 0] * 64, np.uint8)
    cfg = ChannelConfig(40.0, 0.5, seed=7)
    llr = transmit(x, cfg)
    assert np.all((llr < 0) == (x == 1))
    np.testing.assert_array_equal(transmit(x, cfg), llr)
    assert not np.array_equal(transmit(x, ChannelConfig(40.0, 0.5, seed=8)), llr)
    assert np.all(transmit(x, cfg, sigma2=0.0) * (1 - 2.0 * x) > 0)


def test_noise_statistics():
    cfg = ChannelConfig(2.0, 0.5)
    llr = transmit(np.zeros(200_000, np.uint8), cfg, np.random.default_rng(3))
    y = llr * cfg.sigma2 / 2
    assert abs(y.mean() - 1.0) < 0.01
    assert abs(y.var() / cfg.sigma2 - 1.0) < 0.02


def test_batch_rng_streams():
    a = batch_rng(1, 0, 0).integers(0, 1 << 30, 4)
    np.testing.assert_array_equal(a, batch_rng(1, 0, 0).integers(0, 1 << 30, 4))
    assert not np.array_equal(a, batch_rng(1, 0, 1).integers(0, 1 << 30, 4))
    assert not np.array_equal(a, batch_rng(1, 1, 0).integers(0, 1 << 30, 4))


def test_make_decoder_errors(code16):
    with pytest.raises(ValueError):
        make_decoder(code16, "bp", None)
    with pytest.raises(ValueError):
        make_decoder(code16, "sc-fixed", None)


def test_decoders_agree(code16, rng):
    llr = transmit(np.zeros((300, 16), np.uint8), ChannelConfig(1.0, 0.75), rng)
    outs = [make_decoder(code16, nm, Q540, DecoderOptions(interval=3))(llr)
            for nm in ("sc-fixed", "fastssc-fixed", "pipesim")]
    np.testing.assert_array_equal(outs[0], outs[1])
    np.testing.assert_array_equal(outs[0], outs[2])


def test_zero_noise():
    spec = construct(64, 32, 2.0)
    rows = montecarlo(spec, ["sc-float", "fastssc-fixed"], Q540, [0.0], seed=1, max_frames=500,
                      batch_size=200, zero_noise=True)
    assert [r.frame_errors for r in rows] == [0, 0] and rows[0].frames == 500


def test_accounting_and_stop_rule():
    spec = construct(64, 32, 2.0)
    rows = montecarlo(spec, ["sc-float"], None, [0.0, 1.0], seed=5, min_frame_errors=30,
                      max_frames=20_000, batch_size=100)
    for r in rows:
        assert r.frame_errors >= 30 and r.frames % 100 == 0
        assert r.fer == r.frame_errors / r.frames
        assert r.ber == r.bit_errors / (r.frames * 32)
        assert r.frame_errors <= r.bit_errors <= 32 * r.frame_errors
    capped = montecarlo(spec, "sc-float", None, [6.0], seed=5, max_frames=250, batch_size=100)
    assert capped[0].frames == 250


def test_seed_and_worker_determinism():
    spec = construct(32, 16, 2.0)
    kw = dict(min_frame_errors=20, max_frames=3000, batch_size=100)
    one = montecarlo(spec, ["sc-fixed", "fastssc-fixed"], Q540, [1.0, 2.0], seed=11, **kw)
    again = montecarlo(spec, ["sc-fixed", "fastssc-fixed"], Q540, [1.0, 2.0], seed=11, **kw)
    two = montecarlo(spec, ["sc-fixed", "fastssc-fixed"], Q540, [1.0, 2.0], seed=11, workers=2, **kw)
    assert one == again == two
    other = montecarlo(spec, ["sc-fixed"], Q540, [1.0], seed=12, **kw)
    assert other[0] != one[0]


def test_segments():
    spec = construct(64, 32, 2.0)
    rows = montecarlo(spec, ["sc-float"], None, [1.0], seed=2, max_frames=2000, min_frame_errors=10**9,
                      batch_size=500, segments=[(0, 32), (32, 32)])
    seg = rows[0].segment_frame_errors
    assert len(seg) == 2
    assert max(seg) <= rows[0].frame_errors <= sum(seg)


def test_csv():
    spec = construct(16, 8, 2.0)
    rows = montecarlo(spec, ["sc-float"], None, [3.0], seed=0, max_frames=100, batch_size=100)
    buf = io.StringIO()
    write_csv(rows, buf)
    buf.seek(0)
    parsed = list(csv.DictReader(buf))
    assert tuple(parsed[0]) == CSV_FIELDS
    assert parsed[0]["frames"] == "100" and parsed[0]["code"] == "(16,8)" and parsed[0]["quant"] == "float"
    assert isinstance(rows[0], ResultRow)


def test_equivalence_run(code16):
    rep = equivalence_run(code16, Q540, 3000, seed=4, ebn0_db=1.0)
    assert rep.mismatches == 0 and rep.trials == 3000 and rep.first_mismatch is None
    empty = equivalence_run(code16, Q540, 0)
    assert (empty.trials, empty.mismatches) == (0, 0)
    spec = construct(256, 128, 2.0)
    for c in (NodeConstraints(2, 2), NodeConstraints(16, 8, True)):
        assert equivalence_run(spec, QuantSpec(6, 5, 1), 2000, seed=1, constraints=c).mismatches == 0
