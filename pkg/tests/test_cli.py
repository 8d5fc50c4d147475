import csv
import json
from pathlib import Path

import pytest

from ghostode.cli import load_config, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

FAST = """
[problem]
name = "example1"
param.xi = 0.1

[search]
order = "4..10"
p0 = { lo = 0.05, hi = 1.0, num = 60 }

[output]
samples = 21
"""


def _write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _run(tmp_path, cmd, cfg, out, *extra):
    assert main([cmd, "-c", cfg, "--out", str(tmp_path / out), *extra]) == 0
    return tmp_path / out


@pytest.mark.parametrize("cmd", ["expand", "minimize", "sequence", "ghost"])
def test_byte_reproducible(tmp_path, cmd):
    cfg = _write(tmp_path, FAST)
    a = _run(tmp_path, cmd, cfg, "a")
    b = _run(tmp_path, cmd, cfg, "b")
    files = sorted(p.name for p in a.iterdir() if p.name != "manifest.json")
    assert files
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_minima_csv_schema(tmp_path):
    out = _run(tmp_path, "minimize", _write(tmp_path, FAST), "m")
    rows = list(csv.reader((out / "minima.csv").open()))
    assert rows[0] == ["n", "p0", "distance_kind", "d_star", "basin_width"]
    assert [int(r[0]) for r in rows[1:]] == list(range(4, 11))
    assert all(r[2] == "d1" for r in rows[1:])
    # 17 significant digits
    assert len(rows[-1][1].replace(".", "").lstrip("0")) >= 15


def test_sequences_json_schema(tmp_path):
    out = _run(tmp_path, "sequence", _write(tmp_path, FAST), "s")
    seqs = json.loads((out / "sequences.json").read_text())
    assert len(seqs) == 1
    s = seqs[0]
    assert s["id"] == [0, 1]
    assert {"n", "p", "d_star"} <= set(s["members"][0])
    assert {"a", "b", "delta"} <= set(s["fit"])
    assert 0 < s["fit"]["delta"] < 1


def test_manifest(tmp_path):
    out = _run(tmp_path, "expand", _write(tmp_path, FAST), "e", "--order", "3")
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "expand" and man["orders"] == [3]
    assert set(man["artifacts"]) == {"distances.csv", "expansion.json", "samples.csv"}
    header = (out / "samples.csv").read_text().splitlines()[0]
    assert header == "x,y,dy,residual"


def test_overrides(tmp_path):
    cfg = load_config(_write(tmp_path, FAST), order="7", distance="d2", out=str(tmp_path / "o"), threads=2)
    assert cfg.orders == [7] and cfg.distance == "d2" and cfg.threads == 2


def test_inline_problem(tmp_path):
    out = _run(tmp_path, "expand", str(CONFIGS / "inline_linear.toml"), "lin")
    rows = list(csv.reader((out / "distances.csv").open()))
    assert float(rows[-1][1]) < 1e-10


@pytest.mark.parametrize(
    "text",
    [
        "[problem]\nname = 'nope'\n",
        "[problem\nname = 'bratu'",
        "[problem]\nname = 'bratu'\n[search]\np0 = { lo = -1.0, hi = 1.0 }\n",
        "[problem]\ng = '1'\nh = 'k*y'\ninterval = [0, 1]\nvalues = [0, 1]\n",
    ],
)
def test_config_errors_exit_one(tmp_path, text):
    assert main(["minimize", "-c", _write(tmp_path, text), "--out", str(tmp_path / "x")]) == 1


def test_missing_arguments_exit_one():
    assert main(["minimize"]) == 1


def test_numerical_failure_exits_two(tmp_path):
    text = "[problem]\nname = 'bratu'\n[search]\norder = 12\np0 = { lo = 1e-4, hi = 1e-3, num = 5 }\n"
    assert main(["minimize", "-c", _write(tmp_path, text), "--out", str(tmp_path / "x")]) == 2


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.toml")))
def test_shipped_configs_load(name):
    cfg = load_config(str(CONFIGS / name))
    assert cfg.orders
