"""Length conversions between raw OOXML storage units and centimeters/points.

DrawingML stores lengths in EMU (English Metric Units), WordprocessingML
page geometry in twips (1/20 pt), and run font sizes in half-points
(WordprocessingML) or hundredths of a point (DrawingML).
"""

from __future__ import annotations

EMU_PER_CM = 360_000
EMU_PER_INCH = 914_400
TWIPS_PER_INCH = 1440
CM_PER_INCH = 2.54

# Canonical precision for stored lengths (cm) and for exact matching.
LENGTH_DECIMALS = 4

_TO_CM = {
    "emu": lambda raw: raw / EMU_PER_CM,
    "twip": lambda raw: raw * CM_PER_INCH / TWIPS_PER_INCH,
}
_TO_PT = {
    "half_point": lambda raw: raw / 2,
    "hundredth_point": lambda raw: raw / 100,
    "point": lambda raw: float(raw),
}

SOURCE_UNITS = tuple(_TO_CM) + tuple(_TO_PT)


def convert_length(raw: int | float, source_unit: str) -> float:
    """Convert a raw stored length to centimeters (emu, twip) or points.

    Results keep full float precision; callers quantize with :func:`quantize`
    before storing.
    """
    if raw < 0:
        raise ValueError(f"negative length {raw!r}")
    if source_unit in _TO_CM:
        return _TO_CM[source_unit](raw)
    if source_unit in _TO_PT:
        return _TO_PT[source_unit](raw)
    raise ValueError(f"unknown source unit {source_unit!r}")


def emu_to_cm(raw: int | float) -> float:
    return raw / EMU_PER_CM


def twip_to_cm(raw: int | float) -> float:
    return raw * CM_PER_INCH / TWIPS_PER_INCH


def inch_to_cm(value: float) -> float:
    return value * CM_PER_INCH


def cm_to_emu(value: float) -> int:
    return round(value * EMU_PER_CM)


def cm_to_twip(value: float) -> int:
    return round(value * TWIPS_PER_INCH / CM_PER_INCH)


def quantize(value: float) -> float:
    """Round a length to the canonical stored precision."""
    return round(value, LENGTH_DECIMALS)


def render(value: float) -> str:
    """Two-decimal display form."""
    return f"{value:.2f}"
