"""Small shared helpers."""

from __future__ import annotations

import math


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(x))
