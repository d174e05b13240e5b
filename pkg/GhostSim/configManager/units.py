"""SI-suffixed scalars: '693 nm', '1.7 m', '0.35 ns', '2 MHz'. Conversion is exact in decimal."""
from decimal import Decimal, InvalidOperation
from typing import Dict, Tuple

LENGTH_UNITS: Dict[str, Decimal] = {
    "m": Decimal(1),
    "cm": Decimal("1e-2"),
    "mm": Decimal("1e-3"),
    "um": Decimal("1e-6"),
    "µm": Decimal("1e-6"),
    "μm": Decimal("1e-6"),
    "nm": Decimal("1e-9"),
}

TIME_UNITS: Dict[str, Decimal] = {
    "s": Decimal(1),
    "ms": Decimal("1e-3"),
    "us": Decimal("1e-6"),
    "µs": Decimal("1e-6"),
    "μs": Decimal("1e-6"),
    "ns": Decimal("1e-9"),
    "ps": Decimal("1e-12"),
}

RATE_UNITS: Dict[str, Decimal] = {
    "Hz": Decimal(1),
    "kHz": Decimal("1e3"),
    "MHz": Decimal("1e6"),
    "GHz": Decimal("1e9"),
}

QUANTITIES: Dict[str, Tuple[Dict[str, Decimal], str]] = {
    "length": (LENGTH_UNITS, "m"),
    "time": (TIME_UNITS, "s"),
    "rate": (RATE_UNITS, "Hz"),
}


class UnitError(ValueError):
    pass


def split_number(text: str) -> Tuple[str, str]:
    """'693nm' or '693 nm' -> ('693', 'nm')."""
    text = text.strip()
    i = len(text)
    while i > 0 and not (text[i - 1].isdigit() or text[i - 1] == "."):
        i -= 1
    return text[:i].strip(), text[i:].strip()


def parse_quantity(text: str, quantity: str) -> float:
    """
    Convert an SI-suffixed value to the canonical unit of its quantity.

    Args:
        text (str): e.g. "693 nm"; a bare number is already in the canonical unit.
        quantity (str): "length", "time" or "rate".

    Returns:
        float: value in m, s or Hz, correctly rounded from the exact decimal product.
    """
    units, canonical = QUANTITIES[quantity]
    number, unit = split_number(str(text))
    if not number:
        raise UnitError(f"'{text}' is not a number with a {quantity} unit")
    scale = Decimal(1)
    if unit:
        if unit not in units:
            raise UnitError(f"unit '{unit}' is not a {quantity} unit (accepted: {', '.join(units)})")
        scale = units[unit]
    try:
        value = Decimal(number) * scale
    except InvalidOperation:
        raise UnitError(f"'{number}' is not a number")
    if not value.is_finite():
        raise UnitError(f"'{text}' is not finite")
    return float(value)


def format_quantity(value: float, quantity: str) -> str:
    """Canonical spelling that parses back to the same float."""
    _, canonical = QUANTITIES[quantity]
    return f"{float(value)!r} {canonical}"
