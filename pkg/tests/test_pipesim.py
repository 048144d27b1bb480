import io

import numpy as np
import pytest

from unrolled_polar import catalog
from unrolled_polar.codespec import construct
from unrolled_polar.fastssc import NodeConstraints, build_tree, fastssc_decode
from unrolled_polar.pipesim import build_pipeline, throughput_report
from unrolled_polar.quant import QuantSpec
from unrolled_polar.unroll import apply_interval, compute_imax, sram_convert, unroll

Q540 = QuantSpec(5, 4, 0)


def plan_for(spec, interval, constraints=NodeConstraints()):
    return apply_interval(unroll(build_tree(spec, constraints)), interval, Q540)


def random_frames(rng, count, n):
    return rng.integers(-7, 8, size=(count, n)).astype(np.int16)


def test_mode_table_16_12(code16):
    # master, the (8,4) half, and its REP and SPC leaves
    pipe = build_pipeline(plan_for(code16, 1), [(0, 8), (0, 4), (4, 4)])
    got = [(m.span, m.entry_stage, m.exit_stage, m.latency, m.i_start) for m in pipe.modes]
    assert got == [((0, 16), 0, 8, 10, 0), ((0, 8), 1, 6, 7, 1), ((0, 4), 2, 3, 3, 2), ((4, 4), 4, 5, 3, 4)]
    assert pipe.modes.latency_lut() == {0: 10, 1: 7, 2: 3, 3: 3}
    assert pipe.modes.istart_lut(2) == {0: 0, 1: 1, 2: 0, 3: 0}
    assert [m.code for m in pipe.modes] == ["(16,12)", "(8,4)", "(4,1)", "(4,3)"]
    assert pipe.modes.lookup("0:8").index == 1 and pipe.modes.lookup((4, 4)).index == 3


def test_master_only(code16):
    pipe = build_pipeline(plan_for(code16, 1))
    assert len(pipe.modes) == 1 and pipe.modes[0].entry_stage == 0


@pytest.mark.parametrize("interval", [1, 2, 3])
def test_8_4_streams(code8, rng, interval):
    pipe = build_pipeline(plan_for(code8, interval))
    frames = random_frames(rng, 40, 8)
    res = pipe.run_stream(frames)
    np.testing.assert_array_equal(res.estimates, fastssc_decode(build_tree(code8), frames, Q540))
    assert np.all(np.diff(res.injected) == interval) and np.all(np.diff(res.emitted) == interval)
    assert all(e - i == pipe.modes[0].latency - 1 for i, e in zip(res.injected, res.emitted))


def test_enable_phases_8_4(code8, rng):
    # at I=2 the channel register latches on phase 0 and the F output on phase 1
    pipe = build_pipeline(plan_for(code8, 2))
    frame = random_frames(rng, 1, 8)[0]
    seen = []
    for cycle in range(4):
        before = {vid: pipe.storage[vid].read(1)[1] for vid in (0, 1)}
        phase = pipe.phase
        pipe.step(frame if cycle == 0 else None, 0 if cycle == 0 else -1)
        after = {vid: pipe.storage[vid].read(1)[1] for vid in (0, 1)}
        seen.append((phase, [vid for vid in (0, 1) if before[vid] != after[vid]]))
    assert seen[:2] == [(0, [0]), (1, [1])]
    # the next phase-0 edge shifts the empty slot into the channel register
    assert seen[2] == (0, [0]) and seen[3] == (1, [1])


def test_every_register_latches_at_interval_one(code16, rng):
    pipe = build_pipeline(plan_for(code16, 1))
    pipe.step(random_frames(rng, 1, 16)[0], 0)
    # the channel frame moves one register down the chain per cycle
    for tap in range(1, 8):
        assert [pipe.storage[0].read(t)[1] for t in range(1, 8)] == [0 if t == tap else -1 for t in range(1, 8)]
        pipe.step()


def test_drained_pipeline_zero_input(code16):
    pipe = build_pipeline(plan_for(code16, 2))
    for _ in range(30):
        assert pipe.step() == (None, -1)
    res = pipe.run_stream(np.zeros((5, 16), np.int16))
    assert not res.estimates.any()


def test_single_frame_latency(code16, rng):
    for interval in range(1, 8):
        pipe = build_pipeline(plan_for(code16, interval))
        res = pipe.run_stream(random_frames(rng, 1, 16))
        assert res.emitted[0] - res.injected[0] == 9


@pytest.mark.parametrize("sram", [False, True])
def test_1024_512_streaming(rng, sram):
    spec = construct(1024, 512, 2.5)
    tree = build_tree(spec)
    imax = compute_imax(unroll(tree))
    for interval in (1, 2, imax):
        plan = plan_for(spec, interval)
        if sram:
            plan = sram_convert(plan, 2)
        pipe = build_pipeline(plan)
        frames = random_frames(rng, plan.schedule.depth + 10, 1024)
        np.testing.assert_array_equal(pipe.run_stream(frames).estimates, fastssc_decode(tree, frames, Q540))


def test_lanes_and_float(code16, rng):
    pipe = build_pipeline(plan_for(code16, 2), quant=None)
    frames = rng.normal(size=(12, 3, 16))
    np.testing.assert_array_equal(pipe.run_stream(frames).estimates, fastssc_decode(build_tree(code16), frames))


@pytest.mark.parametrize("interval", [1, 2, 7])
def test_constituent_modes_match_standalone(code16, code8, rng, interval):
    pipe = build_pipeline(plan_for(code16, interval), [(0, 8), (0, 4), (4, 4), (8, 8)])
    for mode in pipe.modes[1:]:
        sub = code16.subcode(*mode.span)
        frames = random_frames(rng, 30, mode.n)
        got = pipe.run_stream(frames, mode=mode.index)
        alone = build_pipeline(apply_interval(unroll(build_tree(sub)), interval, Q540, strict=False))
        np.testing.assert_array_equal(got.estimates, alone.run_stream(frames).estimates)
        assert np.all(np.diff(got.emitted) == interval)
        assert all(e - i == mode.latency - 1 for i, e in zip(got.injected, got.emitted))


def test_trace(code8, rng):
    pipe = build_pipeline(plan_for(code8, 2))
    buf = io.StringIO()
    pipe.run_stream(random_frames(rng, 3, 8), trace=buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "cycle,phase,injected_frame,emitted_frame"
    assert lines[1] == "0,0,0,-1"
    assert sum(1 for line in lines[1:] if not line.endswith(",-1")) == 3


def test_errors(code16, rng):
    plan = plan_for(code16, 2)
    with pytest.raises(ValueError):
        build_pipeline(plan, [(2, 4)])
    big = plan_for(catalog.code_1024_853(), 1)
    frozen = next(leaf.span for leaf in big.schedule.tree.leaves() if leaf.kind == "RATE0")
    with pytest.raises(ValueError):
        build_pipeline(big, [frozen])
    pipe = build_pipeline(plan)
    with pytest.raises(ValueError):
        pipe.run_stream(random_frames(rng, 2, 8))
    pipe.reset()
    pipe.step()
    with pytest.raises(RuntimeError):
        pipe.step(random_frames(rng, 1, 16)[0], 0)
    with pytest.raises(KeyError):
        pipe.modes.lookup("(2,1)")


def test_throughput_report_examples():
    pipe1024 = catalog.config_pipeline(catalog.nmax_1024())
    r = throughput_report(pipe1024, (512, 512), 500e6)
    assert r.info_tp_bps == pytest.approx(12.25e9)
    pipe2048 = catalog.config_pipeline(catalog.nmax_2048())
    r = throughput_report(pipe2048, 0, 250e6)
    assert r.info_tp_bps == pytest.approx(17.0625e9)
    half = throughput_report(pipe2048, (0, 1024), 250e6)
    assert half.coded_tp_bps == r.coded_tp_bps / 2
