import json
import logging
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest
import sympy

from toda_ward_lab.config import settings
from toda_ward_lab.utils.logging import setup_logging
from toda_ward_lab.utils.report_io import (
    CSV_COLUMNS, decode_rational, encode_rational, to_jsonable, write_json_atomic, write_table_csv,
)


def test_rational_encoding():
    assert encode_rational(Fraction(-3, 4)) == [-3, 4]
    assert encode_rational(sympy.Rational(5, 6)) == [5, 6]
    assert encode_rational(7) == [7, 1]
    assert decode_rational([2, 6]) == Fraction(1, 3)
    assert decode_rational("3/2") == Fraction(3, 2)
    assert decode_rational(0.5) == Fraction(1, 2)


@pytest.mark.parametrize("bad", [[1, 0], [1.0, 2], [1, 2, 3], True, None])
def test_rational_decoding_errors(bad):
    with pytest.raises(ValueError):
        decode_rational(bad)


def test_jsonable_conversion():
    x = sympy.Symbol("x")
    payload = {
        "exact": Fraction(1, 3),
        "expr": x ** 2 + 1,
        "count": np.int64(4),
        "value": np.float64(0.25),
        "complex": 1 + 2j,
        "array": np.array([1.0, 2.0]),
        3: "key",
    }
    out = to_jsonable(payload)
    assert out["exact"] == [1, 3]
    assert out["expr"] == "x**2 + 1"
    assert out["count"] == 4 and isinstance(out["count"], int)
    assert out["complex"] == [1.0, 2.0]
    assert out["array"] == [1.0, 2.0]
    assert out["3"] == "key"
    json.dumps(out)


def test_json_reports_are_sorted_and_stable(tmp_path):
    path = str(tmp_path / "nested" / "report.json")
    write_json_atomic(path, {"b": 1, "a": Fraction(1, 2)})
    first = open(path, "rb").read()
    write_json_atomic(path, {"a": Fraction(1, 2), "b": 1})
    assert open(path, "rb").read() == first
    assert first.decode("utf-8").index('"a"') < first.decode("utf-8").index('"b"')
    assert not [p for p in (tmp_path / "nested").iterdir() if p.suffix == ".tmp"]


def test_csv_tables(tmp_path):
    rows = [{"term": "kpz[1]", "chain": 0, "value_re": 0.1, "value_im": 0.0, "stderr": 0.01},
            {"term": "kpz[1]", "chain": "all", "value_re": 0.2, "value_im": 0.0, "stderr": 0.02}]
    path = write_table_csv(str(tmp_path / "t.csv"), rows)
    df = pd.read_csv(path)
    assert list(df.columns) == CSV_COLUMNS
    assert len(df) == 2


def test_output_paths(tmp_path):
    reports = settings.get_output_path("reports", str(tmp_path))
    assert reports == str(tmp_path / "reports")
    assert (tmp_path / "reports").is_dir()
    assert settings.get_output_path("other", str(tmp_path)) == str(tmp_path)


def test_setup_logging_levels(tmp_path):
    setup_logging("debug")
    assert logging.getLogger().level == logging.DEBUG
    setup_logging("chatty")
    assert logging.getLogger().level == logging.INFO
    log_file = tmp_path / "run.log"
    setup_logging("INFO", str(log_file))
    logging.getLogger("toda_ward_lab.test").info("hello")
    root = logging.getLogger()
    file_handlers = [h for h in root.handlers if isinstance(h, logging.FileHandler)]
    for handler in file_handlers:
        handler.flush()
    assert "hello" in log_file.read_text(encoding="utf-8")
    for handler in file_handlers:
        root.removeHandler(handler)
        handler.close()
