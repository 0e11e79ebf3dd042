import pytest
from hypothesis import given, strategies as st

from layoutret.units import (
    EMU_PER_CM, cm_to_emu, cm_to_twip, convert_length, emu_to_cm, quantize, render, twip_to_cm,
)


def test_emu_constant():
    assert convert_length(360000, "emu") == 1.0
    assert convert_length(914400, "emu") == pytest.approx(2.54, abs=1e-12)


def test_a4_width_in_twips():
    assert convert_length(11906, "twip") == pytest.approx(11906 * 2.54 / 1440, abs=1e-12)
    # 11906 * 2.54 / 1440 = 21.000861...
    assert quantize(convert_length(11906, "twip")) == 21.0009


def test_half_points_and_hundredths():
    assert convert_length(24, "half_point") == 12
    assert convert_length(1800, "hundredth_point") == 18
    assert convert_length(7, "point") == 7.0


def test_negative_and_unknown_rejected():
    with pytest.raises(ValueError):
        convert_length(-1, "emu")
    with pytest.raises(ValueError):
        convert_length(1, "furlong")


def test_render_two_decimals():
    assert render(convert_length(11906, "twip")) == "21.00"


@given(st.integers(min_value=0, max_value=10**9))
def test_emu_round_trip(raw):
    assert cm_to_emu(emu_to_cm(raw)) == raw


@given(st.floats(min_value=0, max_value=200, allow_nan=False))
def test_twip_round_trip_within_half_twip(cm):
    assert abs(twip_to_cm(cm_to_twip(cm)) - cm) <= 2.54 / 1440 / 2 + 1e-12


@given(st.floats(min_value=0, max_value=1e4, allow_nan=False))
def test_quantize_idempotent(value):
    assert quantize(quantize(value)) == quantize(value)
    assert abs(quantize(value) - value) <= 0.5e-4 + 1e-12


def test_emu_per_cm():
    assert EMU_PER_CM == 360_000
