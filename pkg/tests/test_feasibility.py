import json
import math

import pytest
from hypothesis import given
import hypothesis.strategies as st

from errors import ConfigError
from feasibility import (
    FEASIBILITY_COLUMNS,
    PlatformCatalog,
    PlatformProfile,
    coherence_vs_loss,
    derive_injection,
    feasibility_table,
    platform_efficiency,
    platform_engine,
    platform_profile,
)


@pytest.fixture
def catalog():
    return PlatformCatalog()


def test_stock_profiles(catalog):
    assert set(catalog.profiles) == {"optical", "microwave", "circuit"}
    optical = catalog.get("optical")
    assert (optical.nu, optical.lamb, optical.q_max) == (1e14, 1e8, 1e8)


def test_data_file_matches_builtin_profiles(catalog):
    for name in ("optical", "microwave", "circuit"):
        assert platform_profile(name) == catalog.get(name)


def test_unknown_platform(catalog):
    with pytest.raises(ConfigError, match="unknown platform 'ion-trap'") as info:
        catalog.get("ion-trap")
    assert info.value.path == "platform"


def test_profile_rejects_non_positive_values():
    with pytest.raises(ConfigError) as info:
        PlatformProfile("broken", nu=1e10, lamb=0.0, q_max=1e4)
    assert info.value.path == "platforms.broken.lamb"


def test_derive_injection(catalog):
    injection = derive_injection(catalog.get("microwave"))
    assert injection.tau == pytest.approx(1e-6)
    assert injection.r_max == pytest.approx(1e6)
    assert injection.mu == pytest.approx(50.0)
    assert derive_injection(catalog.get("optical")).mu == pytest.approx(5e5)


@pytest.mark.parametrize("name,loss,decade", [
    ("optical", 1.0, 0),
    ("microwave", 0.1, -1),
    ("circuit", 1.0, 0),
])
def test_loss_term_per_platform(catalog, name, loss, decade):
    result = coherence_vs_loss(catalog.get(name))
    assert result.loss_term == pytest.approx(loss, rel=1e-12)
    assert result.loss_decade == decade
    assert result.loss_dominates
    assert result.coherence_term == 0.1


def test_small_loss_lets_coherence_win(catalog):
    result = coherence_vs_loss(catalog.get("microwave"), 0.1, q=1e12)
    assert result.loss_term == pytest.approx(1e-4)
    assert not result.loss_dominates
    assert result.log10_ratio == pytest.approx(-3.0)


def test_coherence_vs_loss_validation(catalog):
    with pytest.raises(ConfigError, match="coherence"):
        coherence_vs_loss(catalog.get("optical"), 0.7)
    with pytest.raises(ConfigError):
        coherence_vs_loss(catalog.get("optical"), 0.1, q=0.0)
    assert coherence_vs_loss(catalog.get("optical"), 0.0).log10_ratio == math.inf


@given(st.floats(min_value=1e2, max_value=1e14))
def test_loss_term_scales_inversely_with_q(q):
    profile = PlatformCatalog().get("circuit")
    single = coherence_vs_loss(profile, q=q).loss_term
    double = coherence_vs_loss(profile, q=2.0 * q).loss_term
    assert double == pytest.approx(single / 2.0, rel=1e-12)


def test_catalog_overrides_from_file(tmp_path):
    path = tmp_path / "platforms.json"
    path.write_text(json.dumps({
        "microwave": {"q_max": 1e10},
        "rydberg": {"nu": 1e11, "lamb": 1e5, "q_max": 1e8},
    }))
    catalog = PlatformCatalog(str(path))
    assert catalog.get("microwave").q_max == 1e10
    assert catalog.get("microwave").lamb == 1e4
    assert catalog.get("rydberg").n_scale == 100.0
    assert len(catalog.profiles) == 4


def test_catalog_save_and_reload(tmp_path, catalog):
    path = tmp_path / "saved.json"
    catalog.save_profiles(str(path))
    assert PlatformCatalog(str(path)).profiles == catalog.profiles


@pytest.mark.parametrize("content,match", [
    ('{"optical": {"q": 1}}', "unknown keys"),
    ('{"optical": 3}', "must be an object"),
    ('{"ion": {"nu": 1e10}}', "ion"),
    ('{"optical": ', "invalid JSON"),
])
def test_catalog_rejects_bad_files(tmp_path, content, match):
    path = tmp_path / "platforms.json"
    path.write_text(content)
    with pytest.raises(ConfigError, match=match):
        PlatformCatalog(str(path))


def test_platform_engine(catalog):
    engine = platform_engine(catalog.get("circuit"))
    assert engine.q_factor == 1e4
    assert engine.rate * engine.tau == pytest.approx(1.0)
    assert platform_engine(catalog.get("circuit"), q=math.inf).lossless


def test_platform_efficiency(catalog):
    circuit = catalog.get("circuit")
    assert platform_efficiency(circuit, 400.0, 300.0, q=math.inf) == pytest.approx(0.25)
    plain = platform_efficiency(circuit, 400.0, 300.0)
    boosted = platform_efficiency(circuit, 400.0, 300.0, coherence=-1e-6)
    assert boosted > plain


def test_feasibility_table(catalog):
    rows = feasibility_table(["microwave", "optical"], 0.1, catalog)
    assert [r["platform"] for r in rows] == ["microwave", "optical"]
    assert set(rows[0]) == set(FEASIBILITY_COLUMNS)
    assert rows[0]["verdict"] == "loss dominates"
    lossless_ish = feasibility_table(["microwave"], 0.1, catalog, q=1e12)[0]
    assert lossless_ish["verdict"] == "coherence dominates"
    assert lossless_ish["q"] == 1e12


def test_update_profiles(catalog):
    catalog.update_profiles({"optical": {"q_max": "1e12"}, "ion": {"nu": 1e9, "lamb": 1e5, "q_max": 1e6}})
    assert catalog.get("optical").q_max == 1e12
    assert catalog.get("optical").lamb == 1e8
    assert catalog.get("ion").nu == 1e9
    with pytest.raises(ConfigError) as info:
        catalog.update_profiles({"optical": {"lamb": [1]}})
    assert info.value.path == "platforms.optical.lamb"
    with pytest.raises(ConfigError, match="expected an object"):
        catalog.update_profiles(["optical"])
