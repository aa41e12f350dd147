#!/usr/bin/env python3
"""
Report serialization for the Toda Ward Lab.

JSON summaries are written atomically with sorted keys so two runs with the
same seed produce identical bytes. Exact rationals travel as
``[numerator, denominator]`` pairs; numeric tables go through pandas.
"""

import json
import os
import tempfile
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping

import numpy as np
import pandas as pd
import sympy

from .logging import get_logger

logger = get_logger(__name__)

CSV_COLUMNS = ["term", "chain", "value_re", "value_im", "stderr"]


def encode_rational(value: Any) -> List[int]:
    """Encode an exact rational (int, Fraction or sympy Rational) as a pair."""
    if isinstance(value, sympy.Rational):
        return [int(value.p), int(value.q)]
    frac = Fraction(value)
    return [frac.numerator, frac.denominator]


def decode_rational(value: Any) -> Fraction:
    """Decode ``[p, q]``, an int, or a decimal string into a Fraction.

    Raises:
        ValueError: if the value is not an exact rational description
    """
    if isinstance(value, (list, tuple)):
        if len(value) != 2 or not all(isinstance(v, int) for v in value):
            raise ValueError(f"Expected [numerator, denominator], got {value!r}")
        if value[1] == 0:
            raise ValueError("Zero denominator in rational pair")
        return Fraction(value[0], value[1])
    if isinstance(value, bool):
        raise ValueError(f"Not a rational: {value!r}")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    raise ValueError(f"Not a rational: {value!r}")


def to_jsonable(obj: Any) -> Any:
    """Convert report payloads (numpy scalars, sympy objects, Fractions) to JSON types."""
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return encode_rational(obj)
    if isinstance(obj, sympy.Rational):
        return encode_rational(obj)
    if isinstance(obj, sympy.Basic):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    return obj


def write_json_atomic(path: str, payload: Dict[str, Any]) -> str:
    """Write a JSON report through a temporary file and ``os.replace``.

    Args:
        path: Destination file
        payload: Report dictionary

    Returns:
        The destination path
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    text = json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False)
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
        os.replace(tmp_path, path)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug(f"Wrote report {path}")
    return path


def write_table_csv(path: str, rows: Iterable[Mapping[str, Any]]) -> str:
    """Write estimator rows to CSV with the fixed column order.

    Args:
        path: Destination file
        rows: Mappings with the keys of ``CSV_COLUMNS``

    Returns:
        The destination path
    """
    df = pd.DataFrame(list(rows), columns=CSV_COLUMNS)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    df.to_csv(tmp_path, index=False, float_format="%.17g")
    os.replace(tmp_path, path)
    logger.debug(f"Wrote {len(df)} rows to {path}")
    return path
