"""Deterministic JSON/CSV emission shared by every artifact writer."""
from __future__ import annotations

import json
import math

import numpy as np

FLOAT_FMT = "%.12e"
FOURIER_SIGN = "+i x.xi"


def _float(x: float) -> str:
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return FLOAT_FMT % x


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON with sorted keys and every float written as ``%.12e``."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, complex):
        return dumps({"re": obj.real, "im": obj.imag}, indent, _level)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def conventions(sigma_H: int = 1) -> dict:
    return {"sigma_H": int(sigma_H), "fourier_sign": FOURIER_SIGN, "float_format": FLOAT_FMT}


def csv_preamble(config_hash: str, sigma_H: int = 1) -> str:
    """Comment lines placed before the CSV header (readers skip lines starting with '#')."""
    return f"# config_hash={config_hash}\n# sigma_H={int(sigma_H):+d} fourier_sign={FOURIER_SIGN}\n"


def strip_comments(text: str) -> str:
    return "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))
