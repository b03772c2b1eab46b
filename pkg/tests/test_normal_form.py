import cmath
import math

import numpy as np
import pytest

from gkit.errors import DomainError
from garland.flows.flow_core import FlowModel, FlowParams
from garland.maps.map_dynamics import normal_form_map, shear_map
from garland.normal_form.normal_form import (conjugacy_order, eliminate_term,
                                             embed_rotated,
                                             flow_params_from_embedding,
                                             frozen_terms_up_to, is_resonant,
                                             normalize, random_map,
                                             resonant_terms_up_to)
from garland.normal_form.resonance_core import ResonanceSpec
from garland.series.series_core import (TruncatedSeries, flow_exp,
                                        is_centrally_symmetric)


@pytest.fixture
def spec3():
    return ResonanceSpec(1, 3)


# --- Resonance bookkeeping ---

@pytest.mark.parametrize(
    'mon,q,expected',
    [
        ((2, 1), 3, True),
        ((2, 1), 7, True),
        ((0, 5), 3, True),
        ((2, 2), 3, False),
        ((4, 0), 3, True),
        ((3, 0), 5, False),
    ]
)
def test_is_resonant(mon, q, expected):
    assert is_resonant(*mon, ResonanceSpec(1, q)) is expected


def test_resonant_terms_symmetric_q3(spec3):
    assert set(resonant_terms_up_to(6, spec3, True)) == {(2, 1), (3, 2), (0, 5)}


def test_resonant_terms_full_q3(spec3):
    assert set(resonant_terms_up_to(4, spec3, False)) == {(2, 1), (4, 0), (0, 2), (1, 3)}


def test_resonant_terms_q5_contains_leading_and_identical():
    terms = resonant_terms_up_to(10, ResonanceSpec(2, 5), True)
    for mon in [(0, 9), (2, 1), (3, 2), (4, 3), (5, 4)]:
        assert mon in terms


def test_frozen_terms_are_even_degree(spec3):
    frozen = frozen_terms_up_to(7, spec3)
    assert frozen
    assert all(sum(mon) % 2 == 0 for mon in frozen)
    assert (4, 0) in frozen and (0, 2) in frozen


@pytest.mark.parametrize(
    'p,q',
    [(1, 4), (2, 6), (3, 9), (1, 15), (0, 3)]
)
def test_resonance_spec_rejects(p, q):
    with pytest.raises(DomainError):
        ResonanceSpec(p, q)


def test_even_q_message_mentions_odd():
    with pytest.raises(DomainError, match='odd'):
        ResonanceSpec(1, 4)


# --- Elimination ---

def test_eliminate_single_quadratic_term(spec3):
    lam = spec3.lam
    f = TruncatedSeries({(1, 0): lam, (2, 0): 0.3 - 0.2j}, 4)
    g, record = eliminate_term(f, (2, 0), spec3)
    assert g[(2, 0)] == 0
    assert g[(1, 0)] == lam
    assert record.coefficients[(2, 0)] == pytest.approx((0.3 - 0.2j) / (lam ** 2 - lam))


def test_eliminate_zero_target_is_identity(spec3):
    f = TruncatedSeries({(1, 0): spec3.lam, (2, 1): 0.1j}, 5)
    g, record = eliminate_term(f, (3, 0), spec3)
    assert g == f
    assert record.coefficients == {}


def test_eliminate_rejects_resonant_target(spec3):
    f = TruncatedSeries({(1, 0): spec3.lam, (2, 1): 0.1j}, 5)
    with pytest.raises(DomainError, match='resonant term not removable'):
        eliminate_term(f, (2, 1), spec3)


def test_normalize_rejects_non_unit_multiplier(spec3):
    f = TruncatedSeries({(1, 0): 1.01 * spec3.lam}, 5)
    with pytest.raises(DomainError):
        normalize(f, spec3)


# --- Normalization ---

def test_normal_form_is_fixed_point(spec3):
    f = TruncatedSeries({(1, 0): spec3.lam, (2, 1): 0.4j * spec3.lam,
                         (0, 5): 0.3 * spec3.lam}, 7)
    result = normalize(f, spec3)
    assert result.normalized_map == f
    assert result.transform == TruncatedSeries.identity(7)
    assert result.changes == []


@pytest.mark.parametrize('seed', range(20))
def test_random_symmetric_maps_normalize(spec3, seed):
    f = random_map(spec3, 7, np.random.default_rng(seed), symmetric=True)
    result = normalize(f, spec3)

    resonant = set(resonant_terms_up_to(7, spec3, True)) | {(1, 0)}
    assert set(result.normalized_map.support()) == resonant
    assert is_centrally_symmetric(result.normalized_map)
    assert conjugacy_order(f, result) >= 2 * spec3.q + 0.7


def test_normalize_is_idempotent(spec3):
    f = random_map(spec3, 7, np.random.default_rng(3), symmetric=True)
    once = normalize(f, spec3).normalized_map
    twice = normalize(once, spec3).normalized_map
    for mon in once.support():
        assert abs(once[mon] - twice[mon]) < 1e-12


def test_omega_and_leading_coefficient(spec3):
    lam = spec3.lam
    f = TruncatedSeries({(1, 0): lam, (2, 1): 0.25j * lam, (0, 5): 0.5 - 0.1j}, 7)
    result = normalize(f, spec3)
    assert result.omega_coeffs[0] == pytest.approx(0.25)
    assert result.leading_nonidentical == 0.5 - 0.1j
    assert not result.degeneracy_flags['g1']
    assert not result.degeneracy_flags['leading_nonidentical']
    assert not result.degenerate


def test_degenerate_normal_form_is_flagged_not_raised(spec3):
    f = TruncatedSeries({(1, 0): spec3.lam, (2, 1): 0.25j * spec3.lam}, 7)
    result = normalize(f, spec3)
    assert result.degeneracy_flags['leading_nonidentical']
    assert result.degenerate


def test_shear_map_is_conservative(spec3):
    f = shear_map(1, 3, shear_coeffs=(1.0, 0.5), max_degree=5)
    result = normalize(f, spec3)
    assert not result.degeneracy_flags['dissipation']
    assert all(c == 0 for c in result.frozen_terms.values())


def test_symmetric_pipeline_rejects_even_terms(spec3):
    f = TruncatedSeries({(1, 0): spec3.lam, (2, 0): 0.1}, 5)
    with pytest.raises(DomainError):
        normalize(f, spec3, symmetric=True)


# --- Embedding ---

def test_embed_linear_map_is_zero_field(spec3):
    embedded = embed_rotated(TruncatedSeries({(1, 0): spec3.lam}, 7), spec3)
    assert embedded.field.is_zero()


def test_embed_identical_resonance(spec3):
    c = 0.3 + 0.7j
    g = TruncatedSeries({(1, 0): spec3.lam, (2, 1): spec3.lam * c}, 7)
    embedded = embed_rotated(g, spec3)
    assert embedded.field[(2, 1)] == pytest.approx(c)
    assert embedded.field_q[(2, 1)] == pytest.approx(3 * c)


def test_embed_rejects_non_resonant_terms(spec3):
    g = TruncatedSeries({(1, 0): spec3.lam, (3, 0): 0.1}, 7)
    with pytest.raises(DomainError, match='non-resonant'):
        embed_rotated(g, spec3)


def test_refined_embedding_recovers_flow_params():
    params = FlowParams(FlowModel.Symmetric, 3, 0.0, phi_coeffs=(1.0, -0.5),
                        alpha=0.8, theta=1.1)
    f = normal_form_map(params, 1, 7)
    spec = ResonanceSpec(1, 3)
    embedded = embed_rotated(normalize(f, spec), refine=True)
    back = flow_params_from_embedding(embedded)
    assert back.phi_coeffs == pytest.approx((1.0, -0.5), abs=1e-10)
    assert back.alpha == pytest.approx(0.8, abs=1e-10)
    assert back.theta == pytest.approx(1.1, abs=1e-10)


def test_refined_time_one_map_matches_rotated_normal_form():
    params = FlowParams(FlowModel.Symmetric, 3, 0.0, phi_coeffs=(1.0, -0.5),
                        alpha=0.8, theta=1.1)
    spec = ResonanceSpec(1, 3)
    result = normalize(normal_form_map(params, 1, 7), spec)
    embedded = embed_rotated(result, refine=True)

    rng = np.random.default_rng(21)
    z = 0.05 * np.sqrt(rng.uniform(size=20)) * np.exp(2j * np.pi * rng.uniform(size=20))
    rotated = spec.lam.conjugate() * result.normalized_map(z)
    # same degree-7 truncation, so only rounding separates them
    assert np.max(np.abs(flow_exp(embedded.refined)(z) - rotated)) < 1e-9
    leading = np.max(np.abs(flow_exp(embedded.field)(z) - rotated))
    assert leading < 1e-4


def test_flow_params_from_degenerate_embedding(spec3):
    g = TruncatedSeries({(1, 0): spec3.lam, (2, 1): 0.25j * spec3.lam}, 7)
    with pytest.raises(DomainError):
        flow_params_from_embedding(embed_rotated(g, spec3))


def test_lambda_matches_rotation():
    spec = ResonanceSpec(2, 5)
    assert spec.lam == pytest.approx(cmath.exp(2j * math.pi * 2 / 5))
    assert spec.default_degree == 11
