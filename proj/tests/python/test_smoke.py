"""Smoke tests for the python bindings."""

import finpanel


def test_line_registry():
    codes = finpanel.line_codes()
    assert len(codes) == 196
    assert "1100" in codes
    assert "411x" in codes
    assert finpanel.is_line_code("2110")
    assert not finpanel.is_line_code("9999")
    assert finpanel.line_section("1100") == "balance"
    assert finpanel.line_section("411x") == "cashflow"


def test_equation_suite():
    eqs = finpanel.equations()
    assert len(eqs) == 26
    assert sum(1 for e in eqs if e["form"] == "full") == 22
    assert sum(1 for e in eqs if e["form"] == "simplified") == 4
    by_id = {e["id"]: e for e in eqs}
    assert by_id["full_4400"]["terms"] == [(1, "4100"), (1, "4200"), (1, "4300")]


def test_threshold_semantics():
    # 1600 stated consistently so only the 1100 equation is in play
    lines = {"1110": 100, "1150": 200, "1100": 304, "1600": 304}
    assert finpanel.check_articulation(lines, "full")["articulated"]
    adjusted = finpanel.adjust_totals(lines, "full")
    assert adjusted["lines"]["1100"] == 304
    assert not adjusted["totals_adjustment"]

    lines["1100"] = 305
    del lines["1600"]
    verdict = finpanel.check_articulation(lines, "full")
    assert not verdict["articulated"]
    assert "full_1100" in verdict["failed"]
    repaired = finpanel.adjust_totals(lines, "full")
    assert repaired["lines"]["1100"] == 300
    assert repaired["totals_adjustment"]
    assert finpanel.ARTICULATION_THRESHOLD == 4


def test_unit_normalization():
    assert finpanel.normalize_to_thousands(5, "millions") == 5000
    assert finpanel.normalize_to_thousands(5500, "rubles") == 6
    assert finpanel.normalize_to_thousands(-5500, "rubles") == -6
    assert finpanel.normalize_to_thousands(7, "thousands") == 7


def test_rank_bands():
    assert finpanel.quality_for_rank(30) == "house"
    assert finpanel.quality_for_rank(27) == "street"
    assert finpanel.quality_for_rank(20) == "city"
    assert finpanel.quality_for_rank(5) == "none"


def test_grid_cells_are_stable():
    assert finpanel.grid_cell(37.62, 55.75) == finpanel.grid_cell(37.62, 55.75)
    near = finpanel.grid_cell(37.62, 55.75, 100.0)
    far = finpanel.grid_cell(50.0, 60.0, 100.0)
    assert near != far


def test_corpus_generation(tmp_path):
    summary = finpanel.generate_corpus(tmp_path / "corpus", n_firms=40, seed=3)
    assert summary["universe_rows"] > 0
    assert summary["eligible_firm_years"] >= summary["filed_eligible"]
    assert (tmp_path / "corpus" / "pipeline.conf").exists()
    assert (tmp_path / "corpus" / "manifest" / "firm_years.csv").exists()
