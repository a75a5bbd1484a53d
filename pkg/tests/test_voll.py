"""VoLL derivation, projection, disaggregation and CONE/VoLL."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shedopt.voll import (AdequacyConfig, SECTOR_VOLL_BASIS_2020, VollRecord,
                          lole_opt, project_voll, read_voll_inputs,
                          project_table, sectoral_volls, voll_from_gva,
                          write_voll_2050)

EQUAL_WEIGHTS = {s: 0.2 for s in SECTOR_VOLL_BASIS_2020}


def record(**kw):
    base = dict(country="XX", gdp_2020=1.0e12, gdp_2050=1.0e12,
                e_el_2020=1.0e8, e_el_2050=1.0e8)
    base.update(kw)
    return VollRecord(**base)


class TestVollFromGva:
    def test_direct_division(self):
        assert voll_from_gva(4.0e11, 1.0e8) == pytest.approx(4.0)

    def test_average_magnitude(self):
        # 7.3e9 EUR over 1e6 MWh lands on the European average figure.
        assert voll_from_gva(7.3e9, 1.0e6) == pytest.approx(7.3)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            voll_from_gva(0.0, 1.0e8)
        with pytest.raises(ValueError):
            voll_from_gva(1.0e9, 0.0)


class TestProjectVoll:
    def test_growth_over_demand(self):
        r = record(voll_2020=10.0, gdp_2050=1.5e12, e_el_2050=2.0e8)
        assert project_voll(r) == pytest.approx(7.5)

    def test_equal_ratios_identity(self):
        r = record(voll_2020=3.65, gdp_2020=2.0e12, gdp_2050=3.0e12,
                   e_el_2020=1.0e8, e_el_2050=1.5e8)
        assert project_voll(r) == pytest.approx(3.65)

    def test_gva_fallback_composes(self):
        kw = dict(gdp_2050=1.3e12, e_el_2050=1.9e8)
        from_gva = record(voll_2020=None, gva=5.2e11, **kw)
        explicit = record(voll_2020=voll_from_gva(5.2e11, 1.0e8), **kw)
        assert project_voll(from_gva) == pytest.approx(project_voll(explicit))

    def test_missing_inputs(self):
        with pytest.raises(ValueError):
            project_voll(record(voll_2020=None, gva=None))

    @given(scale=st.floats(0.01, 100.0), voll=st.floats(0.1, 50.0))
    @settings(max_examples=50, deadline=None)
    def test_homogeneous_in_voll_and_scale_invariant(self, scale, voll):
        base = record(voll_2020=voll, gdp_2050=1.4e12, e_el_2050=2.2e8)
        value = project_voll(base)
        assert project_voll(record(voll_2020=voll * scale, gdp_2050=1.4e12,
                                   e_el_2050=2.2e8)) \
            == pytest.approx(value * scale, rel=1e-12)
        scaled_gdp = record(voll_2020=voll, gdp_2020=1.0e12 * scale,
                            gdp_2050=1.4e12 * scale, e_el_2050=2.2e8)
        assert project_voll(scaled_gdp) == pytest.approx(value, rel=1e-12)
        scaled_el = record(voll_2020=voll, gdp_2050=1.4e12,
                           e_el_2020=1.0e8 * scale, e_el_2050=2.2e8 * scale)
        assert project_voll(scaled_el) == pytest.approx(value, rel=1e-12)


class TestSectoralVolls:
    def test_equal_weights_scale_factor(self):
        # Unweighted basis mean is (22.1+4.1+19.9+4.3+11.0)/5 = 12.28, so the
        # scale for a 7.3 country average is 7.3/12.28 and households land at
        # 19.9 * 7.3 / 12.28.
        out = sectoral_volls(7.3, EQUAL_WEIGHTS)
        assert sum(EQUAL_WEIGHTS[s] * SECTOR_VOLL_BASIS_2020[s]
                   for s in EQUAL_WEIGHTS) == pytest.approx(12.28)
        assert out["households"] == pytest.approx(19.9 * 7.3 / 12.28,
                                                  rel=1e-12)
        assert out["households"] == pytest.approx(11.830, abs=5e-4)
        assert out["services"] == pytest.approx(4.1 * 7.3 / 12.28, rel=1e-12)

    def test_single_sector_weight_forces_unit_scale(self):
        weights = {s: 0.0 for s in SECTOR_VOLL_BASIS_2020}
        weights["industry"] = 1.0
        out = sectoral_volls(4.3, weights)
        for sector, basis in SECTOR_VOLL_BASIS_2020.items():
            assert out[sector] == pytest.approx(basis, rel=1e-12)

    def test_weighted_mean_preserved(self):
        weights = {"agriculture": 0.05, "services": 0.35, "households": 0.3,
                   "industry": 0.25, "transport": 0.05}
        out = sectoral_volls(5.6, weights)
        mean = sum(weights[s] * out[s] for s in weights)
        assert abs(mean - 5.6) <= 1e-9 * 5.6

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            sectoral_volls(7.3, {"services": 0.5})
        with pytest.raises(ValueError):
            sectoral_volls(7.3, {"services": 1.5, "industry": -0.5})

    def test_zero_weighted_basis_mean(self):
        with pytest.raises(ValueError):
            sectoral_volls(7.3, {"not_a_sector": 1.0},
                           basis={"services": 4.1})

    @given(voll=st.floats(0.5, 30.0),
           raw=st.lists(st.floats(0.0, 1.0), min_size=5, max_size=5))
    @settings(max_examples=60, deadline=None)
    def test_order_preserved_and_mean_exact(self, voll, raw):
        total = sum(raw)
        if total <= 0:
            raw = [1.0] * 5
            total = 5.0
        sectors = list(SECTOR_VOLL_BASIS_2020)
        weights = {s: w / total for s, w in zip(sectors, raw)}
        out = sectoral_volls(voll, weights)
        ranked = sorted(sectors, key=SECTOR_VOLL_BASIS_2020.get)
        for lo, hi in zip(ranked, ranked[1:]):
            assert out[lo] < out[hi]
        mean = sum(weights[s] * out[s] for s in sectors)
        assert abs(mean - voll) <= 1e-9 * max(1.0, voll)


class TestLoleOpt:
    def test_ten_hours(self):
        assert lole_opt(AdequacyConfig(cone=87.6, voll=8.76)) \
            == pytest.approx(10.0)

    def test_zero_cone(self):
        assert lole_opt(AdequacyConfig(cone=0.0, voll=5.0)) == 0.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AdequacyConfig(cone=-1.0, voll=5.0)
        with pytest.raises(ValueError):
            AdequacyConfig(cone=10.0, voll=0.0)

    @given(cone=st.floats(0.1, 500.0), voll=st.floats(0.1, 50.0),
           bump=st.floats(0.01, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_monotone(self, cone, voll, bump):
        base = lole_opt(AdequacyConfig(cone=cone, voll=voll))
        assert lole_opt(AdequacyConfig(cone=cone + bump, voll=voll)) > base
        assert lole_opt(AdequacyConfig(cone=cone, voll=voll + bump)) < base


class TestCsvInterchange:
    def test_round_trip(self, tmp_path):
        inputs = tmp_path / "voll_inputs.csv"
        inputs.write_text(
            "country,voll_2020_eur_per_kwh,gva_eur,gdp_2020_eur,"
            "gdp_2050_eur,e_el_2020_mwh,e_el_2050_mwh\n"
            "PT,3.65,,2.0e12,3.0e12,1.0e8,1.5e8\n"
            "FR,5.60,,3.0e12,3.6e12,4.0e8,5.0e8\n"
            "XX,,5.2e11,1.0e12,1.3e12,1.0e8,1.9e8\n",
            encoding="utf-8")
        records = read_voll_inputs(inputs)
        assert [r.country for r in records] == ["PT", "FR", "XX"]
        rows = project_table(records)
        assert rows[0][1] == pytest.approx(3.65)               # ratios cancel
        assert rows[1][1] == pytest.approx(5.60 * 1.2 / 1.25)
        assert rows[2][1] == pytest.approx(
            voll_from_gva(5.2e11, 1.0e8) * 1.3 / 1.9)
        out = tmp_path / "voll_2050.csv"
        write_voll_2050(out, rows)
        text = out.read_text(encoding="utf-8").splitlines()
        assert text[0] == "country,voll_2050_eur_per_kwh"
        assert len(text) == 4

    def test_rejects_unknown_columns(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("country,bogus\nPT,1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="columns"):
            read_voll_inputs(bad)

    def test_malformed_number_reports_location(self, tmp_path):
        bad = tmp_path / "voll_inputs.csv"
        bad.write_text(
            "country,voll_2020_eur_per_kwh,gva_eur,gdp_2020_eur,"
            "gdp_2050_eur,e_el_2020_mwh,e_el_2050_mwh\n"
            "PT,oops,,2.0e12,3.0e12,1.0e8,1.5e8\n",
            encoding="utf-8")
        with pytest.raises(ValueError, match=r"voll_inputs.csv:2"):
            read_voll_inputs(bad)
