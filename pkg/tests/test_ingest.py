import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from depsplit.core import ParseError, Quarter, SchemaError, ValidationError
from depsplit.ingest import (
    SDI_COLUMNS,
    build_panel,
    compute_features,
    filter_banks,
    insurance_limit,
    load_sdi_dir,
    parse_sdi_csv,
    raw_log_features,
    write_panel_csv,
    PANEL_CSV_COLUMNS,
)
from tests.conftest import make_record

ROW = dict(bank_id="B1", domestic_deposits="10000", n_offices="3", n_accounts="500",
           n_small_accounts="450", deposits_small_accounts="2000", res_construction_loans="10",
           res_real_estate_loans="20", loans_to_individuals="5", total_loans="100")


def write_csv(path, rows, columns=SDI_COLUMNS):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for r in rows:
            w.writerow({c: r[c] for c in columns})
    return path


def test_insurance_limit_schedule():
    assert insurance_limit(Quarter(2009, 4)) == 100
    assert insurance_limit(Quarter(2010, 1)) == 250
    assert insurance_limit(Quarter(1993, 1)) == 100


def test_parse_sums_retail_loans(tmp_path):
    recs = parse_sdi_csv(write_csv(tmp_path / "2010Q1.csv", [ROW]))
    assert len(recs) == 1
    assert recs[0].retail_loans == 35
    assert recs[0].quarter == Quarter(2010, 1)


def test_parse_empty_file(tmp_path):
    assert parse_sdi_csv(write_csv(tmp_path / "2010Q1.csv", [])) == []


def test_parse_errors(tmp_path):
    with pytest.raises(ValidationError):
        parse_sdi_csv(write_csv(tmp_path / "2010Q1.csv", [dict(ROW, n_small_accounts="501")]))
    with pytest.raises(ValidationError, match="negative"):
        parse_sdi_csv(write_csv(tmp_path / "2010Q1.csv", [dict(ROW, total_loans="-1")]))
    with pytest.raises(ParseError, match="row 3"):
        parse_sdi_csv(write_csv(tmp_path / "2010Q1.csv", [ROW, dict(ROW, n_accounts="abc")]))
    with pytest.raises(SchemaError, match="total_loans"):
        parse_sdi_csv(write_csv(tmp_path / "2010Q1.csv", [ROW], SDI_COLUMNS[:-1]))


def test_filter_boundaries():
    assert filter_banks([make_record(deposits=4500, accounts=250, small=0, small_dep=0)])
    assert not filter_banks([make_record(deposits=4499, small_dep=0)])
    assert not filter_banks([make_record(deposits=1e6, accounts=249, small=0)])


def test_filter_boundary_choice_is_immaterial():
    # whole-thousand deposits and integer counts, roughly industry shaped
    rng = np.random.default_rng(0)
    dep = np.floor(np.exp(rng.normal(11.5, 1.6, 20000)))
    acc = np.floor(np.exp(rng.normal(8.5, 1.2, 20000)))
    inclusive = dep[(dep >= 4500) & (acc >= 250)].sum()
    strict = dep[(dep > 4500) & (acc > 250)].sum()
    assert abs(inclusive - strict) / inclusive < 1e-3


@given(st.lists(st.tuples(st.floats(0, 1e5), st.integers(0, 1000)), max_size=30))
def test_filter_idempotent(pairs):
    recs = [make_record(bank=str(i), deposits=d, accounts=a, small=0, small_dep=0)
            for i, (d, a) in enumerate(pairs)]
    once = filter_banks(recs)
    assert filter_banks(once) == once


def test_compute_features_examples():
    f = compute_features(make_record(deposits=2.6e6, small_dep=2.6e6))
    assert f.log_deposits == pytest.approx(14.7711, abs=1e-4)
    assert f.frac_small_amount == 1.0
    assert compute_features(make_record(total_loans=0.0, retail_loans=0.0)).frac_retail_loans == 0
    f0 = compute_features(make_record(offices=0))
    assert f0.log_deposits_per_office == f0.log_deposits


@given(st.floats(4500, 1e9), st.integers(1, 10_000), st.integers(250, 10**7))
def test_log_features_invert(dep, offices, accounts):
    f = compute_features(make_record(deposits=dep, offices=offices, accounts=accounts, small=0,
                                     small_dep=0))
    assert math.exp(f.log_deposits) == pytest.approx(dep, rel=1e-12)
    assert math.exp(f.log_deposits_per_office) * offices == pytest.approx(dep, rel=1e-12)
    assert math.exp(f.log_accounts) == pytest.approx(accounts, rel=1e-12)


def test_build_panel_mask_and_single_cell():
    q1, q2 = Quarter(2010, 1), Quarter(2010, 2)
    panel, stats = build_panel({q1: [make_record(quarter=q1)]})
    np.testing.assert_array_equal(panel.features[0, 0, :3], 0.0)
    np.testing.assert_array_equal(stats.std, 1.0)
    panel, _ = build_panel({q1: [make_record(quarter=q1), make_record("B", q1, deposits=2e4, accounts=3000)],
                            q2: [make_record("B", q2, deposits=3e4, accounts=2000)]})
    np.testing.assert_array_equal(panel.mask, [[True, False], [True, True]])
    assert np.all(np.isfinite(panel.features))
    assert np.all(panel.features[~panel.mask] == 0)


def test_build_panel_zero_variance():
    q = Quarter(2010, 1)
    with pytest.raises(ValidationError, match="log_deposits"):
        build_panel({q: [make_record("A", q), make_record("B", q)]})


def test_standardized_moments(small_synth):
    panel = small_synth.panel
    cells = panel.features[panel.mask][:, :3]
    np.testing.assert_allclose(cells.mean(axis=0), 0.0, atol=1e-9)
    np.testing.assert_allclose(cells.std(axis=0), 1.0, atol=1e-9)
    frac = panel.features[panel.mask][:, 3:]
    assert np.all((frac >= 0) & (frac <= 1))


def test_frozen_stats_reused(small_synth):
    panel, stats = build_panel(small_synth.records)
    again, same = build_panel(small_synth.records, stats=stats)
    assert same is stats
    np.testing.assert_array_equal(again.features, panel.features)
    raw = raw_log_features(panel)
    unnorm, _ = build_panel(small_synth.records, normalize=False)
    np.testing.assert_allclose(raw[panel.mask], unnorm.features[panel.mask], rtol=1e-12)


def test_load_dir_and_dump(tmp_path, small_synth):
    from depsplit.synth import write_synth
    write_synth(small_synth, tmp_path)
    records = load_sdi_dir(tmp_path / "sdi")
    assert sorted(records) == small_synth.panel.quarters
    panel, _ = build_panel(records)
    np.testing.assert_allclose(panel.metrics, small_synth.panel.metrics, rtol=1e-12)
    write_panel_csv(panel, tmp_path / "panel.csv")
    with open(tmp_path / "panel.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == PANEL_CSV_COLUMNS
    assert len(rows) - 1 == panel.mask.sum()
    with pytest.raises(SchemaError):
        load_sdi_dir(tmp_path / "nothing_here")
