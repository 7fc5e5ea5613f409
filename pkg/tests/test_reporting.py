import json
import math

import numpy as np

from reporting import aligned_table, csv_text, format_float, to_json_text, write_csv, write_output


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(0.25) == "0.25"
    assert format_float(math.inf) == "inf"
    assert format_float(-math.inf) == "-inf"
    assert format_float(math.nan) == "nan"
    assert float(format_float(1 / 3)) == 1 / 3


def test_json_text_is_sorted_and_deterministic():
    report = {"zeta": 0.5, "eta": np.float64(0.25), "ok": np.bool_(True),
              "corners": [{"n": np.int64(3)}], "q": math.inf, "missing": None}
    text = to_json_text(report)
    assert text.endswith("}\n")
    assert text == to_json_text(dict(reversed(list(report.items()))))
    data = json.loads(text)
    assert list(data) == sorted(report)
    assert data["q"] == "inf"
    assert data["ok"] is True
    assert data["corners"] == [{"n": 3}]
    assert data["missing"] is None
    assert '\n  "eta": 0.25,' in text


def test_json_text_empty_containers():
    assert to_json_text({"a": [], "b": {}, "c": np.zeros(0)}) == '{\n  "a": [],\n  "b": {},\n  "c": []\n}\n'


def test_csv_text():
    text = csv_text([["1-2", 0, 0.5, True, None], ["2-3", 1, math.inf, False, "x,y"]],
                    ["stroke", "index", "value", "flag", "note"])
    assert text == ("stroke,index,value,flag,note\n"
                    "1-2,0,0.5,true,\n"
                    '2-3,1,inf,false,"x,y"\n')
    assert "\r" not in text


def test_write_output_to_file_and_stdout(tmp_path, capsys):
    target = tmp_path / "out.csv"
    write_csv([[1, 2.5]], ["a", "b"], str(target))
    assert target.read_bytes() == b"a,b\n1,2.5\n"
    write_output("hello\n")
    write_output("again\n", "-")
    assert capsys.readouterr().out == "hello\nagain\n"


def test_aligned_table():
    text = aligned_table([{"platform": "optical", "loss": 1.0}, {"platform": "circuit", "loss": 0.1}],
                         ["platform", "loss"])
    lines = text.splitlines()
    assert lines[0] == "platform  loss"
    assert lines[1] == "--------  -------------------"
    assert lines[2] == "optical   1"
    assert lines[3] == "circuit   0.10000000000000001"
