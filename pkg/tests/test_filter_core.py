import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aptvdf.errors import (
    CoefficientParseError,
    DomainError,
    NonFiniteInputError,
    SpecError,
    StructureError,
)
from aptvdf.filter_core import (
    FilterMode,
    FrequencySpec,
    PrototypeFilter,
    allpass_response,
    build_filter,
    compute_alpha,
    design_prototype,
    frequency_response,
    load_coefficients,
    measure_spec,
    process_block,
    save_coefficients,
    warp_frequency,
)
from oracles import direct_dft, warped_response_direct

ALPHA_DOWN = 0.335094882155859221  # mpmath, 30 digits
ALPHA_UP = -0.340464206069026101


# -- design ---------------------------------------------------------------------

def test_paper_design_order_and_spec(paper_proto):
    assert 20 <= paper_proto.order <= 24
    assert paper_proto.order % 2 == 0
    ripple, atten = measure_spec(paper_proto.coefficients, paper_proto.spec, n_grid=8192)
    assert ripple <= 0.8
    assert atten >= 40


def test_paper_design_is_symmetric_unity_dc(paper_proto):
    h = paper_proto.coefficients
    assert np.array_equal(h, h[::-1])
    assert abs(h.sum() - 1) < 1e-12


def test_wide_spec_low_order():
    spec = FrequencySpec(0.5, 0.4, 3, 20)
    p = design_prototype(spec)
    assert p.order <= 8
    # independent check on a dense grid with the term-by-term DFT
    grid = np.linspace(0, 1, 2049)
    mag = np.array([abs(direct_dft(p.coefficients, w)) for w in grid])
    db = 20 * np.log10(mag)
    pb = db[grid <= 0.5]
    assert pb.max() - pb.min() <= 3
    assert -db[grid >= 0.9].max() >= 20


@pytest.mark.parametrize("args", [(0.6, 0.4, 1, 40), (0.0, 0.1, 1, 40), (0.1, 0.1, 0, 40),
                                  (0.1, 0.1, 1, -3), (1.2, 0.1, 1, 40)])
def test_invalid_spec(args):
    with pytest.raises(SpecError):
        FrequencySpec(*args)


def test_design_failure_reports():
    from aptvdf.errors import DesignError
    with pytest.raises(DesignError):
        design_prototype(FrequencySpec(0.3, 0.01, 0.01, 90), max_order=10)


# -- coefficient files ----------------------------------------------------------

def test_load_two_taps(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("0.5\n0.5")
    p = load_coefficients(f)
    assert p.coefficients.tolist() == [0.5, 0.5]
    assert p.order == 1


def test_load_crlf_and_comments(tmp_path):
    f = tmp_path / "c.txt"
    f.write_bytes(b"# exported\r\n0.1\r\n\r\n-0.25\r\n# tail\r\n0.1\r\n")
    assert load_coefficients(f).coefficients.tolist() == [0.1, -0.25, 0.1]


def test_load_22_values_is_order_21(tmp_path, paper_proto):
    f = tmp_path / "c.txt"
    vals = np.hanning(24)[1:-1]
    f.write_text("\n".join(repr(float(v)) for v in vals))
    assert load_coefficients(f).order == 21


def test_load_bad_line(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("abc\n0.5\n")
    with pytest.raises(CoefficientParseError) as info:
        load_coefficients(f)
    assert info.value.line == 1


def test_load_empty(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("# nothing\n")
    with pytest.raises(CoefficientParseError):
        load_coefficients(f)


def test_save_load_round_trip_bit_identical(tmp_path, paper_proto):
    f = tmp_path / "p.txt"
    save_coefficients(paper_proto, f)
    assert np.array_equal(load_coefficients(f).coefficients, paper_proto.coefficients)


# -- alpha and warping ----------------------------------------------------------

def test_compute_alpha_examples():
    assert compute_alpha(0.08, 0.08) == 0
    assert compute_alpha(0.08, 0.04) == pytest.approx(ALPHA_DOWN, abs=1e-15)
    assert compute_alpha(0.08, 0.04) == pytest.approx(0.335095, abs=1e-6)
    assert compute_alpha(0.08, 0.16) == pytest.approx(ALPHA_UP, abs=1e-15)


@given(st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_compute_alpha_sign_and_range(fco, fc):
    a = compute_alpha(fco, fc)
    assert abs(a) < 1
    assert np.sign(a) == np.sign(round(fco - fc, 15)) or a == 0


def test_compute_alpha_domain():
    with pytest.raises(SpecError):
        compute_alpha(0, 0.5)
    with pytest.raises(DomainError):
        build_filter(PrototypeFilter([1, 1]), 1.0)


def test_warp_examples():
    assert warp_frequency(0.0, 0.3) == pytest.approx(0.3, abs=1e-15)
    for a in (-0.9, -0.3, 0.4, 0.95):
        assert warp_frequency(a, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert warp_frequency(a, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert warp_frequency(compute_alpha(0.08, 0.04), 0.04) == pytest.approx(0.08, abs=1e-9)
    # six-digit alpha from the worked example: only good to the rounding of alpha
    assert warp_frequency(0.335095, 0.04) == pytest.approx(0.08, abs=1e-7)


def test_warp_matches_allpass_phase():
    grid = np.linspace(0, 0.999, 500)
    for a in (-0.7, 0.3, 0.7):
        phase = -np.unwrap(np.angle(allpass_response(a, grid))) / np.pi
        assert np.allclose(warp_frequency(a, grid), phase, atol=1e-12)


@pytest.mark.parametrize("alpha", np.linspace(-0.99, 0.99, 23))
def test_warp_monotone(alpha):
    w = warp_frequency(alpha, np.linspace(0, 1, 20001))
    assert np.all(np.diff(w) > 0)


@given(st.floats(-0.98, 0.98), st.floats(0.01, 0.99))
def test_warp_inverse_is_negated_alpha(alpha, w):
    # the all-pass map with -alpha undoes the one with alpha
    assert warp_frequency(-alpha, warp_frequency(alpha, w)) == pytest.approx(w, abs=1e-10)


# -- build / modes ----------------------------------------------------------------

def test_odd_order_rejected_for_complement():
    p = PrototypeFilter([0.2, 0.3, 0.3, 0.2])
    build_filter(p, 0.1, FilterMode.LOWPASS)
    build_filter(p, 0.1, FilterMode.BANDPASS)
    for mode in (FilterMode.HIGHPASS, FilterMode.BANDSTOP):
        with pytest.raises(StructureError):
            build_filter(p, 0.1, mode)


def test_mode_table():
    assert FilterMode.from_bits(0, 0) is FilterMode.LOWPASS
    assert FilterMode.from_bits(1, 0) is FilterMode.BANDPASS
    assert FilterMode.from_bits(0, 1) is FilterMode.HIGHPASS
    assert FilterMode.from_bits(1, 1) is FilterMode.BANDSTOP
    assert FilterMode.parse("01") is FilterMode.HIGHPASS
    assert FilterMode.parse("Bandstop") is FilterMode.BANDSTOP
    with pytest.raises(SpecError):
        FilterMode.from_bits(2, 0)


def test_stage_count(paper_proto):
    n = paper_proto.order
    assert build_filter(paper_proto, 0.2, "00").n_stages == n
    assert build_filter(paper_proto, 0.2, "10").n_stages == 2 * n


def _db(filt, w):
    return 20 * math.log10(abs(filt.response_at(np.array([w]))[0]))


def test_highpass_levels(paper_proto):
    f = build_filter(paper_proto, 0.0, FilterMode.HIGHPASS)
    assert _db(f, 0.0) <= -40
    assert abs(_db(f, 1.0)) <= 0.8


def test_bandstop_levels(paper_proto):
    f = build_filter(paper_proto, 0.0, FilterMode.BANDSTOP)
    assert abs(_db(f, 0.0)) <= 0.8
    assert abs(_db(f, 1.0)) <= 0.8
    assert _db(f, 0.5) <= -40


def test_bandpass_levels(paper_proto):
    f = build_filter(paper_proto, 0.0, FilterMode.BANDPASS)
    assert _db(f, 0.0) <= -40 and _db(f, 1.0) <= -40
    assert abs(_db(f, 0.5)) <= 0.8


# -- frequency response -------------------------------------------------------------

def test_identity_response(paper_proto):
    f = build_filter(paper_proto, 0.0)
    r = frequency_response(f, 1024)
    ref = np.array([direct_dft(paper_proto.coefficients, w) for w in r.grid])
    assert np.max(np.abs(r.values - ref)) < 1e-12


@pytest.mark.parametrize("mode", list(FilterMode))
@pytest.mark.parametrize("alpha", [-0.6, 0.25])
def test_response_matches_pointwise_oracle(paper_proto, mode, alpha):
    f = build_filter(paper_proto, alpha, mode)
    r = frequency_response(f, 257)
    ref = np.array([warped_response_direct(paper_proto.coefficients, alpha, w, *mode.value)
                    for w in r.grid])
    assert np.max(np.abs(r.values - ref)) < 1e-12


def test_warped_magnitude_at_shifted_cutoff(paper_proto):
    a = compute_alpha(0.08, 0.04)
    f = build_filter(paper_proto, a)
    got = abs(f.response_at(np.array([0.04]))[0])
    want = abs(paper_proto.response(0.08))
    assert got == pytest.approx(want, abs=1e-9)


def test_allpass_unit_magnitude():
    grid = np.linspace(0, 1, 1024)
    for a in (-0.95, -0.3, 0, 0.5, 0.99):
        assert np.max(np.abs(np.abs(allpass_response(a, grid)) - 1)) < 1e-12


def test_response_grid_and_csv(tmp_path, paper_proto):
    r = frequency_response(build_filter(paper_proto, 0.1), 16)
    assert np.all(np.diff(r.grid) > 0) and r.grid[0] == 0 and r.grid[-1] == 1
    out = tmp_path / "r.csv"
    r.to_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "freq_norm,mag_db,phase_rad"
    assert len(lines) == 17
    with pytest.raises(SpecError):
        frequency_response(build_filter(paper_proto, 0.1), 1)


# -- time domain --------------------------------------------------------------------

def test_impulse_identity(paper_proto):
    f = build_filter(paper_proto, 0.0)
    x = np.zeros(paper_proto.order + 1)
    x[0] = 1
    assert np.array_equal(process_block(f, x), paper_proto.coefficients)


def test_zero_input_after_reset(paper_proto):
    f = build_filter(paper_proto, 0.4, FilterMode.BANDSTOP)
    process_block(f, np.ones(50))
    f.reset()
    assert np.all(f.state == 0)
    assert np.all(process_block(f, np.zeros(100)) == 0)


def test_streaming_matches_single_block(paper_proto):
    x = np.random.default_rng(1).normal(size=1000)
    whole = process_block(build_filter(paper_proto, -0.3, "11"), x)
    f = build_filter(paper_proto, -0.3, "11")
    parts = np.concatenate([process_block(f, x[:137]), process_block(f, x[137:600]),
                            process_block(f, x[600:])])
    assert np.array_equal(whole, parts)


def test_non_finite_input(paper_proto):
    f = build_filter(paper_proto, 0.1)
    with pytest.raises(NonFiniteInputError) as info:
        process_block(f, [0.0, 1.0, np.nan, 2.0])
    assert info.value.index == 2


@pytest.mark.parametrize("mode", list(FilterMode))
@pytest.mark.parametrize("alpha", [0.0, 0.335, -0.5])
def test_sine_gain_matches_response(paper_proto, mode, alpha):
    f = build_filter(paper_proto, alpha, mode)
    fr = 0.3
    horizon = f.settling_horizon()
    n = np.arange(horizon + 4000)
    y = process_block(f, np.sin(np.pi * fr * n))
    tail_n, tail = n[horizon:], y[horizon:]
    # least-squares amplitude of the steady state
    basis = np.column_stack([np.sin(np.pi * fr * tail_n), np.cos(np.pi * fr * tail_n)])
    coef, *_ = np.linalg.lstsq(basis, tail, rcond=None)
    assert math.hypot(*coef) == pytest.approx(abs(f.response_at(np.array([fr]))[0]), abs=1e-6)


@pytest.mark.parametrize("mode", list(FilterMode))
def test_impulse_response_decays(paper_proto, mode):
    f = build_filter(paper_proto, 0.7, mode)
    h = f.settling_horizon()
    x = np.zeros(h + 200)
    x[0] = 1
    y = process_block(f, x)
    assert np.max(np.abs(y[h:])) < 1e-9


def test_impulse_response_spectrum_matches(paper_proto):
    # time-domain route vs frequency-domain route
    f = build_filter(paper_proto, 0.5, FilterMode.BANDPASS)
    n = 4096
    x = np.zeros(n)
    x[0] = 1
    h = process_block(f, x)
    spec = np.fft.rfft(h)
    grid = np.arange(spec.size) / (n / 2)
    assert np.max(np.abs(spec - f.response_at(grid))) < 1e-9


@pytest.mark.parametrize("c", [-1.0, 2.0])
def test_linearity(paper_proto, c):
    x = np.random.default_rng(5).uniform(-1, 1, 500)
    y1 = process_block(build_filter(paper_proto, 0.45, "01"), c * x)
    y2 = process_block(build_filter(paper_proto, 0.45, "01"), x)
    assert np.max(np.abs(y1 - c * y2)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.95, 0.95), st.sampled_from(list(FilterMode)))
def test_section_poles_inside_unit_circle(alpha, mode):
    p = PrototypeFilter([0.25, 0.5, 0.25])
    f = build_filter(p, alpha, mode)
    assert abs(f.alpha) < 1
    x = np.zeros(f.settling_horizon() + 10)
    x[0] = 1
    y = process_block(f, x)
    assert np.all(np.isfinite(y))
    assert np.max(np.abs(y[-10:])) < 1e-9
