import io

import pytest

from pcmsim import (ConfigError, GenSpec, TraceEvent, TraceFormatError,
                    emit_trace, generate, parse_trace, preset_spec)
from pcmsim.metrics import mfv_coverage, top_k_coverage


def test_parse_write_of_zeros():
    line = "W 0000 " + "00" * 64
    events = parse_trace([line])
    assert events == [TraceEvent("W", 0, bytes(64))]


def test_parse_read():
    assert parse_trace(["R 002a"]) == [TraceEvent("R", 0x2A)]


def test_comments_and_blanks_ignored():
    text = "# header\n\nR 1  # trailing comment\n"
    assert parse_trace(io.StringIO(text)) == [TraceEvent("R", 1)]


def test_short_payload_rejected_with_expected_length():
    with pytest.raises(TraceFormatError, match="line 1.*expected 64"):
        parse_trace(["W 0 abcd"])


def test_malformed_line_reports_line_number():
    good = "R 1"
    with pytest.raises(TraceFormatError, match="line 2"):
        parse_trace([good, "X 12 34"])
    with pytest.raises(TraceFormatError, match="line 1"):
        parse_trace(["R zz"])


def test_emit_parse_round_trip():
    spec = preset_spec("balanced", events=300, seed=5)
    events = generate(spec, num_blocks=32)
    buf = io.StringIO()
    emit_trace(events, buf)
    assert parse_trace(io.StringIO(buf.getvalue())) == events


def test_same_seed_is_byte_identical():
    spec = preset_spec("write-heavy", events=500, seed=77)
    a, b = io.StringIO(), io.StringIO()
    emit_trace(generate(spec, num_blocks=64), a)
    emit_trace(generate(spec, num_blocks=64), b)
    assert a.getvalue() == b.getvalue()


def test_read_fraction_within_binomial_bound():
    spec = GenSpec(events=30_000, read_fraction=2 / 3, seed=9)
    events = generate(spec, num_blocks=128)
    reads = sum(1 for ev in events if ev.op == "R")
    assert 19_400 <= reads <= 20_600


def test_value_model_coverage_near_target():
    spec = GenSpec(events=2_000, read_fraction=0.0, values={0x0: 0.8}, seed=1)
    events = generate(spec, num_blocks=16)
    rows = mfv_coverage([ev.payload for ev in events], 4)
    assert abs(top_k_coverage(rows, 1) - 0.8) < 0.02


def test_preset_top5_coverage_is_at_least_80_percent():
    spec = preset_spec("balanced", events=5_000, seed=3)
    events = generate(spec, num_blocks=64)
    rows = mfv_coverage([ev.payload for ev in events if ev.op == "W"], 4)
    assert top_k_coverage(rows, 5) >= 0.8


def test_zipf_addresses_favor_low_blocks():
    spec = GenSpec(events=5_000, read_fraction=0.0, address_model="zipf",
                   address_zipf_s=1.2, seed=13)
    events = generate(spec, num_blocks=64)
    first = sum(1 for ev in events if ev.addr == 0)
    last = sum(1 for ev in events if ev.addr == 63)
    assert first > last


def test_bad_specs_rejected():
    with pytest.raises(ConfigError):
        generate(GenSpec(events=10, address_model="zipf", address_zipf_s=0.0),
                 num_blocks=4)
    with pytest.raises(ConfigError):
        generate(GenSpec(events=10, value_zipf_s=-1.0), num_blocks=4)
    with pytest.raises(ConfigError):
        generate(GenSpec(events=10, values={0: 0.9, 1: 0.2}), num_blocks=4)
    with pytest.raises(ConfigError):
        generate(GenSpec(events=0), num_blocks=4)
    with pytest.raises(ConfigError):
        generate(GenSpec(events=10, read_fraction=1.5), num_blocks=4)
    with pytest.raises(ConfigError):
        generate(GenSpec(events=10, values={16: 0.5}), num_blocks=4)


def test_generated_traces_parse_cleanly():
    spec = preset_spec("read-heavy", events=200, seed=2)
    events = generate(spec, num_blocks=8)
    buf = io.StringIO()
    emit_trace(events, buf)
    parsed = parse_trace(io.StringIO(buf.getvalue()), block_bytes=64)
    assert len(parsed) == 200
