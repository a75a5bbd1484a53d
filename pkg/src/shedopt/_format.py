"""Deterministic number formatting for CSV/JSON outputs: 12 significant
digits, negative zero normalized away."""
from __future__ import annotations

import math


def fmt12(value: float) -> str:
    if value == 0:
        value = 0.0
    return f"{value:.12g}"


def round12(value: float) -> float:
    if isinstance(value, float):
        if value == 0:
            return 0.0
        if math.isfinite(value):
            return float(f"{value:.12g}")
    return value


def round12_tree(obj):
    """Round every float in a JSON-ready structure to 12 significant
    digits."""
    if isinstance(obj, float):
        return round12(obj)
    if isinstance(obj, dict):
        return {k: round12_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12_tree(v) for v in obj]
    return obj
