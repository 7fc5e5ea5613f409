import io
import json
import math
from pathlib import Path

import pytest

from config import (
    apply_overrides,
    default_document,
    load_config,
    merge_documents,
    parse_config,
    parse_value,
)
from errors import ConfigError
from micromaser import mu

CONFIG_DIR = Path(__file__).parent.parent / "data" / "configs"


def parse_with(*overrides):
    return parse_config(apply_overrides(default_document(), list(overrides)))


def test_defaults_parse():
    config = parse_config(load_config())
    assert config.engine.lossless
    assert mu(config.engine) == pytest.approx(1012.5)
    assert config.hot.T == 400.0 and config.cold.T == 300.0
    assert config.hot.prep.label == "thermal"
    assert (config.nu1, config.nu2) == (2e10, 1e10)
    assert config.frequency_labeling == "hot-cold"
    assert config.output.format is None
    assert config.sweep.grid == ()
    assert config.solver.points_per_stroke == 50


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIG_DIR.glob("*.json")))
def test_shipped_configs_parse(name):
    config = parse_config(load_config(str(CONFIG_DIR / name)))
    assert config.cycle_spec().engine == config.engine


def test_lossy_dephased_config():
    config = parse_config(load_config(str(CONFIG_DIR / "lossy_dephased.json")))
    assert config.engine.q_factor == 1e12
    assert config.hot.prep.xi == 0
    assert config.sweep.param == "q_factor"
    assert config.sweep.grid[-1] == math.inf


def test_overrides():
    config = parse_with("engine.q_factor=1e9", "frequency_labeling=as-printed", "hot.T=500")
    assert config.engine.q_factor == 1e9
    assert config.frequency_labeling == "as-printed"
    assert config.hot.T == 500.0
    assert parse_with("engine.q_factor=inf").engine.lossless


def test_parse_value():
    assert parse_value("1e-3") == 1e-3
    assert parse_value("null") is None
    assert parse_value('{"re": 1}') == {"re": 1}
    assert parse_value("hot-cold") == "hot-cold"


@pytest.mark.parametrize("override,path", [
    ("no-equals-sign", "no-equals-sign"),
    ("engine.nu.x=1", "engine.nu"),
    ("engine..nu=1", "engine..nu"),
])
def test_override_errors(override, path):
    with pytest.raises(ConfigError) as info:
        apply_overrides(default_document(), [override])
    assert info.value.path == path


def test_explicit_prep_replaces_thermal_shortcut():
    doc = merge_documents(default_document(), {
        "hot": {"prep": {"p_e": 0.28, "c1": 0.6, "c2": {"re": 0.0, "im": 0.6}, "xi": 0.5}},
    })
    assert "thermal" not in doc["hot"]["prep"]
    prep = parse_config(doc).hot.prep
    assert prep.c2 == 0.6j
    assert prep.temperature == 400.0


def test_coherent_thermal_prep():
    config = parse_with('hot.prep={"thermal": true, "coherence": 1e-5}')
    assert config.hot.prep.coherence == pytest.approx(-1e-5)


@pytest.mark.parametrize("override,path", [
    ('hot.prep={"p_e": 0.1, "c1": {"re": "x"}, "c2": 0.5}', "hot.prep.c1.re"),
    ('hot.prep={"p_e": 0.1, "c1": 0.5, "c2": 0.5}', "hot.prep"),
    ("hot.prep.p_e=0.25", "hot.prep"),
    ("engine.tau=-1", "engine.tau"),
    ("engine.n_max=2.5", "engine.n_max"),
    ("engine.q_factor=0", "engine.q_factor"),
    ("cold.T=0", "cold.T"),
    ("nu2=3e10", "nu1"),
    ("units=kHz", "units"),
    ("frequency_labeling=sideways", "frequency_labeling"),
    ("output.format=xml", "output.format"),
    ('sweep.grid=[1, "x"]', "sweep.grid[1]"),
    ("sweep.param=lamb", "sweep.param"),
    ("solver.points_per_stroke=1", "solver.points_per_stroke"),
    ("extra=1", "<root>"),
])
def test_malformed_fields_report_their_path(override, path):
    with pytest.raises(ConfigError) as info:
        parse_with(override)
    assert info.value.path == path
    assert str(info.value).startswith(f"{path}: ")


def test_hz_units_scale_frequencies():
    config = parse_with("units=Hz")
    assert config.nu1 == pytest.approx(2 * math.pi * 2e10)
    assert config.engine.nu == pytest.approx(2 * math.pi * 1e10)
    assert config.engine.lamb == pytest.approx(2 * math.pi * 1e5)
    assert config.engine.tau == 4.5e-7


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text('{"engine": {"nu": 1e10,}}')
    with pytest.raises(ConfigError, match="invalid JSON at line 1"):
        load_config(str(broken))
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="top level"):
        load_config(str(listing))


def test_load_config_from_stdin(monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps({"hot": {"T": 450.0}})))
    doc = load_config("-")
    assert doc["hot"]["T"] == 450.0
    assert doc["hot"]["prep"] == {"thermal": True}


def test_load_config_without_defaults(tmp_path):
    path = tmp_path / "partial.json"
    path.write_text('{"nu1": 2.0}')
    assert load_config(str(path), use_defaults=False) == {"nu1": 2.0}
