"""Namespaces, theme parsing and color resolution shared by the extractors."""

from __future__ import annotations

import colorsys
import re
from dataclasses import dataclass, field
from xml.etree import ElementTree as ET

NS = {
    "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
    "p": "http://schemas.openxmlformats.org/presentationml/2006/main",
    "r": "http://schemas.openxmlformats.org/officeDocument/2006/relationships",
    "w": "http://schemas.openxmlformats.org/wordprocessingml/2006/main",
    "wp": "http://schemas.openxmlformats.org/drawingml/2006/wordprocessingDrawing",
    "pic": "http://schemas.openxmlformats.org/drawingml/2006/picture",
    "s": "http://schemas.openxmlformats.org/spreadsheetml/2006/main",
    "xdr": "http://schemas.openxmlformats.org/drawingml/2006/spreadsheetDrawing",
    "c": "http://schemas.openxmlformats.org/drawingml/2006/chart",
}

R_ID = f"{{{NS['r']}}}id"
R_EMBED = f"{{{NS['r']}}}embed"

_HEX6 = re.compile(r"^[0-9A-Fa-f]{6}$")
_HEX8 = re.compile(r"^[0-9A-Fa-f]{8}$")

SCHEME_SLOTS = (
    "dk1", "lt1", "dk2", "lt2",
    "accent1", "accent2", "accent3", "accent4", "accent5", "accent6",
    "hlink", "folHlink",
)

DEFAULT_CLR_MAP = {
    "bg1": "lt1", "tx1": "dk1", "bg2": "lt2", "tx2": "dk2",
    "accent1": "accent1", "accent2": "accent2", "accent3": "accent3",
    "accent4": "accent4", "accent5": "accent5", "accent6": "accent6",
    "hlink": "hlink", "folHlink": "folHlink",
}

# DrawingML preset colors most often seen in real files.
PRESET_COLORS = {
    "black": "000000", "white": "FFFFFF", "red": "FF0000", "green": "008000",
    "blue": "0000FF", "yellow": "FFFF00", "cyan": "00FFFF", "magenta": "FF00FF",
    "gray": "808080", "grey": "808080", "orange": "FFA500", "purple": "800080",
    "darkBlue": "00008B", "darkRed": "8B0000", "darkGreen": "006400",
    "lightGray": "D3D3D3", "silver": "C0C0C0", "navy": "000080",
}


def q(prefix: str, local: str) -> str:
    return f"{{{NS[prefix]}}}{local}"


def local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def normalize_hex(value: str | None) -> str | None:
    """Uppercase six-digit RGB; ARGB input drops its alpha byte."""
    if value is None:
        return None
    value = value.strip().lstrip("#")
    if _HEX8.match(value):
        value = value[2:]
    if not _HEX6.match(value):
        return None
    return value.upper()


@dataclass
class Theme:
    colors: dict[str, str] = field(default_factory=dict)
    major_font: str | None = None
    minor_font: str | None = None

    def resolve_font(self, typeface: str | None) -> str | None:
        if not typeface:
            return None
        if typeface.startswith("+mj"):
            return self.major_font
        if typeface.startswith("+mn"):
            return self.minor_font
        return typeface


def parse_theme(root: ET.Element | None) -> Theme:
    theme = Theme()
    if root is None:
        return theme
    scheme = root.find("a:themeElements/a:clrScheme", NS)
    if scheme is not None:
        for slot in scheme:
            name = local_name(slot.tag)
            for child in slot:
                tag = local_name(child.tag)
                if tag == "srgbClr":
                    hexval = normalize_hex(child.get("val"))
                elif tag == "sysClr":
                    hexval = normalize_hex(child.get("lastClr"))
                else:
                    hexval = None
                if hexval:
                    theme.colors[name] = hexval
    fonts = root.find("a:themeElements/a:fontScheme", NS)
    if fonts is not None:
        major = fonts.find("a:majorFont/a:latin", NS)
        minor = fonts.find("a:minorFont/a:latin", NS)
        theme.major_font = major.get("typeface") if major is not None else None
        theme.minor_font = minor.get("typeface") if minor is not None else None
    return theme


def _hex_to_rgb(hexval: str) -> tuple[float, float, float]:
    return tuple(int(hexval[i:i + 2], 16) / 255 for i in (0, 2, 4))  # type: ignore[return-value]


def _rgb_to_hex(rgb: tuple[float, float, float]) -> str:
    return "".join(f"{max(0, min(255, round(c * 255))):02X}" for c in rgb)


def apply_modifiers(hexval: str, mods: ET.Element) -> str:
    """Apply lumMod/lumOff/tint/shade children of a DrawingML color element."""
    r, g, b = _hex_to_rgb(hexval)
    for mod in mods:
        tag = local_name(mod.tag)
        try:
            val = int(mod.get("val", "100000")) / 100000
        except ValueError:
            continue
        if tag in ("lumMod", "lumOff"):
            h, l, s = colorsys.rgb_to_hls(r, g, b)
            l = l * val if tag == "lumMod" else l + val
            r, g, b = colorsys.hls_to_rgb(h, min(max(l, 0.0), 1.0), s)
        elif tag == "shade":
            r, g, b = r * val, g * val, b * val
        elif tag == "tint":
            r, g, b = (1 - (1 - c) * val for c in (r, g, b))
    return _rgb_to_hex((r, g, b))


def drawing_color(fill: ET.Element | None, theme: Theme, clr_map: dict[str, str]) -> str | None:
    """Concrete RGB for a DrawingML fill/color container, or None if unresolvable."""
    if fill is None:
        return None
    for el in fill:
        tag = local_name(el.tag)
        base: str | None = None
        if tag == "srgbClr":
            base = normalize_hex(el.get("val"))
        elif tag == "schemeClr":
            name = el.get("val", "")
            slot = clr_map.get(name, name)
            base = theme.colors.get(slot)
        elif tag == "sysClr":
            base = normalize_hex(el.get("lastClr"))
        elif tag == "prstClr":
            base = PRESET_COLORS.get(el.get("val", ""))
        elif tag == "scrgbClr":
            try:
                base = _rgb_to_hex(tuple(int(el.get(k, "0")) / 100000 for k in "rgb"))  # type: ignore[arg-type]
            except ValueError:
                base = None
        else:
            continue
        if base is None:
            return None
        return apply_modifiers(base, el)
    return None


# Word theme color names -> theme slots
WORD_THEME_SLOTS = {
    "dark1": "dk1", "light1": "lt1", "dark2": "dk2", "light2": "lt2",
    "text1": "dk1", "background1": "lt1", "text2": "dk2", "background2": "lt2",
    "accent1": "accent1", "accent2": "accent2", "accent3": "accent3",
    "accent4": "accent4", "accent5": "accent5", "accent6": "accent6",
    "hyperlink": "hlink", "followedHyperlink": "folHlink",
}

# SpreadsheetML theme="N" indexes (note lt/dk order differs from the scheme).
SHEET_THEME_SLOTS = ("lt1", "dk1", "lt2", "dk2", "accent1", "accent2", "accent3",
                     "accent4", "accent5", "accent6", "hlink", "folHlink")

# Legacy 64-entry indexed palette used by SpreadsheetML `indexed` colors.
INDEXED_COLORS = (
    "000000", "FFFFFF", "FF0000", "00FF00", "0000FF", "FFFF00", "FF00FF", "00FFFF",
    "000000", "FFFFFF", "FF0000", "00FF00", "0000FF", "FFFF00", "FF00FF", "00FFFF",
    "800000", "008000", "000080", "808000", "800080", "008080", "C0C0C0", "808080",
    "9999FF", "993366", "FFFFCC", "CCFFFF", "660066", "FF8080", "0066CC", "CCCCFF",
    "000080", "FF00FF", "FFFF00", "00FFFF", "800080", "800000", "008080", "0000FF",
    "00CCFF", "CCFFFF", "CCFFCC", "FFFF99", "99CCFF", "FF99CC", "CC99FF", "FFCC99",
    "3366FF", "33CCCC", "99CC00", "FFCC00", "FF9900", "FF6600", "666699", "969696",
    "003366", "339966", "003300", "333300", "993300", "993366", "333399", "333333",
)


def tint_color(hexval: str, tint: float) -> str:
    """SpreadsheetML tint: lighten (tint > 0) or darken (tint < 0) in HLS space."""
    if not tint:
        return hexval
    h, l, s = colorsys.rgb_to_hls(*_hex_to_rgb(hexval))
    l = l * (1 + tint) if tint < 0 else l * (1 - tint) + tint
    return _rgb_to_hex(colorsys.hls_to_rgb(h, l, s))
