import math

import pytest

from gkit.errors import ConfigurationError, DomainError
from garland.atlas.atlas_core import CurveName, GRID_COLUMNS, RegionId
from garland.atlas.bifurcation_atlas import (atlas_sweep, classify_region,
                                             curve_Lpf, curve_Lpf_reversible,
                                             curve_Lpq, pitchfork_mu2)
from garland.flows.flow_core import FlowModel, FlowParams

WINDOW = (-0.02, 0.02, -0.02, 0.02)


@pytest.fixture(scope='module')
def conservative():
    return FlowParams(FlowModel.SymBreakConservative, 3, 0.0, 0.0)


# --- Curves ---

def test_pitchfork_curve_value(conservative):
    plus, minus = curve_Lpf(conservative, [-0.01])
    assert plus.samples[0][1] == pytest.approx(2.0e-3, rel=1e-12)
    assert minus.samples[0][1] == pytest.approx(-2.0e-3, rel=1e-12)
    assert plus.analytic


def test_pitchfork_curve_scales_with_alpha(conservative):
    doubled = FlowParams(FlowModel.SymBreakConservative, 3, 0.0, 0.0, alpha=2.0)
    base, _ = curve_Lpf(conservative, [-0.01, -0.005])
    scaled, _ = curve_Lpf(doubled, [-0.01, -0.005])
    for (_, a), (_, b) in zip(base.samples, scaled.samples):
        assert b == pytest.approx(2 * a)


def test_pitchfork_curve_skips_wrong_side(conservative):
    plus, _ = curve_Lpf(conservative, [-0.01, 0.0, 0.01])
    assert [mu1 for mu1, _ in plus.samples] == [-0.01]
    assert len(plus.notes) == 2


def test_pitchfork_branches_are_mirrored(conservative):
    plus, minus = curve_Lpf(conservative, [-0.02, -0.01, -0.005])
    assert [(m1, -m2) for m1, m2 in minus.samples] == plus.samples


def test_refined_pitchfork_is_close_to_leading_order(conservative):
    refined, _ = curve_Lpf(conservative, [-0.01], refine=True)
    assert not refined.analytic
    assert refined.samples[0][1] == pytest.approx(2.0e-3, rel=0.1)


def test_pitchfork_mu2_is_nan_on_wrong_side(conservative):
    assert math.isnan(pitchfork_mu2(conservative, 0.01))


def test_resonance_curve_sits_on_mu1_axis():
    curve = curve_Lpq([-0.01, 0.0, 0.01])
    assert curve.name is CurveName.L_pq
    assert all(row['mu1'] == 0.0 for row in curve.rows())


def test_reversible_curve_needs_reversible_model(conservative):
    with pytest.raises(DomainError):
        curve_Lpf_reversible(conservative, [-0.01])


# --- Regions ---

@pytest.mark.parametrize(
    'mu1,mu2,region,total',
    [
        (0.01, 0.0, RegionId.I, 0),
        (0.01, 0.001, RegionId.I, 0),
        (-0.01, 0.0, RegionId.III, 12),
        (-0.01, 0.001, RegionId.III, 12),
        (-0.01, 0.005, RegionId.II, 6),
        (-0.01, -0.005, RegionId.IV, 6),
    ]
)
def test_classify_region(conservative, mu1, mu2, region, total):
    result = classify_region(mu1, mu2, conservative)
    assert result.id is region
    assert result.census['total'] == total
    assert not result.disagreement


@pytest.mark.parametrize('mu2', [0.005, -0.005])
def test_outer_regions_carry_qq_garland(conservative, mu2):
    result = classify_region(-0.01, mu2, conservative)
    assert result.garland_label == 'G_qq'
    assert result.census['Saddle'] == 3
    assert result.census['Center'] == 3


def test_point_near_pitchfork_is_boundary(conservative):
    assert classify_region(-0.01, 0.00201, conservative).boundary
    assert not classify_region(-0.01, 0.0, conservative).boundary


def test_region_three_for_negative_alpha():
    params = FlowParams(FlowModel.SymBreakConservative, 3, 0.0, 0.0, alpha=-1.0)
    result = classify_region(-0.01, 0.0005, params)
    assert result.id is RegionId.III
    assert result.census['Center'] == 6
    assert result.census['Saddle'] == 6


def test_reversible_outer_region_is_conservative():
    params = FlowParams(FlowModel.ReversibleNonCons, 3, 0.0, 0.0, A=1.0)
    result = classify_region(-0.01, 0.005, params)
    assert result.id is RegionId.II
    assert result.census.get('StableFocus', 0) == 0
    assert result.census.get('UnstableFocus', 0) == 0


# --- Sweep ---

def test_atlas_has_four_regions(conservative):
    atlas = atlas_sweep(WINDOW, 8, conservative)
    assert atlas.region_ids() == {'I', 'II', 'III', 'IV'}
    rows = atlas.grid_rows()
    assert len(rows) == 64
    assert list(rows[0]) == GRID_COLUMNS
    for row in rows:
        if row['region'] == 'I':
            assert row['n_saddle'] == row['n_center'] == row['n_focus'] == 0


def test_atlas_curves_and_representatives(conservative):
    atlas = atlas_sweep(WINDOW, 8, conservative)
    names = {c.name for c in atlas.curves}
    assert {CurveName.L_pf, CurveName.L_pq} <= names
    assert set(atlas.branch_families) == {'+', '-'}
    for region_id, region in atlas.representatives.items():
        assert region.id.value == region_id
        assert not region.boundary


def test_atlas_is_independent_of_worker_count(conservative):
    one = atlas_sweep(WINDOW, 4, conservative, threads=1)
    two = atlas_sweep(WINDOW, 4, conservative, threads=2)
    assert one.grid_rows() == two.grid_rows()


def test_atlas_json_carries_grid_and_flags(conservative):
    doc = atlas_sweep(WINDOW, 4, conservative).to_json()
    assert doc['resolution'] == 4
    assert len(doc['grid']) == 16
    assert 'flags' in doc


@pytest.mark.parametrize('resolution', [1, 513])
def test_atlas_rejects_resolution(conservative, resolution):
    with pytest.raises(ConfigurationError):
        atlas_sweep(WINDOW, resolution, conservative)


def test_atlas_rejects_empty_window(conservative):
    with pytest.raises(ConfigurationError):
        atlas_sweep((0.01, -0.01, -0.02, 0.02), 4, conservative)


def test_symmetric_model_has_no_mu2_axis():
    params = FlowParams(FlowModel.Symmetric, 3, 0.0)
    with pytest.raises(DomainError):
        atlas_sweep(WINDOW, 4, params)

