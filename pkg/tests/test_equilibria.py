import math

import numpy as np
import pytest

from gkit.errors import DomainError
from garland.equilibria.equilibria_core import (EquilibriumKind, GarlandLabel,
                                                SymmetryClass)
from garland.equilibria.equilibria_garlands import (assemble_garland,
                                                    find_equilibria,
                                                    pitchfork_scan)
from garland.flows.flow_core import FlowModel, FlowParams
from garland.flows.flow_models import (polar_field, polar_jacobian,
                                       polar_jacobian_fd)


def symmetric(q=3, mu=-0.01, alpha=1.0, **kwargs):
    return FlowParams(FlowModel.Symmetric, q, mu, alpha=alpha, **kwargs)


# --- Census of the symmetric flow ---

@pytest.mark.parametrize('q', [3, 5, 7])
@pytest.mark.parametrize('alpha', [1.0, -1.0])
def test_symmetric_garland_census(q, alpha):
    params = symmetric(q, -0.01, alpha)
    eqs = find_equilibria(params)
    assert len(eqs) == 4 * q

    garland = assemble_garland(eqs, params)
    assert garland.label is GarlandLabel.G_2q2q
    kinds = [e.kind for e in garland.equilibria]
    assert set(kinds) == {EquilibriumKind.Saddle, EquilibriumKind.Center}
    assert all(kinds[i] != kinds[(i + 1) % (4 * q)] for i in range(4 * q))

    psi = [e.state.psi for e in garland.equilibria]
    gaps = np.diff(psi + [psi[0] + 2 * math.pi])
    assert np.all(np.abs(gaps - math.pi / (2 * q)) < 1e-6)


@pytest.mark.parametrize('q', [3, 5, 7])
def test_no_equilibria_on_the_other_side(q):
    assert find_equilibria(symmetric(q, 0.01)) == []


def test_empty_garland_has_no_label():
    garland = assemble_garland([], symmetric(3, 0.01))
    assert garland.label is GarlandLabel.none
    assert garland.diagnostics


def test_degenerate_flow_rejected():
    with pytest.raises(DomainError):
        find_equilibria(FlowParams(FlowModel.Symmetric, 3, -0.01, phi_coeffs=(0.0,)))


def test_equilibrium_radii_q3():
    eqs = find_equilibria(symmetric())
    axis = [e for e in eqs if abs(math.sin(3 * e.state.psi)) < 1e-9]
    # psi = k pi / 3: -0.01 + r + r^2 = 0
    r_star = (-1 + math.sqrt(1.04)) / 2
    assert axis
    for e in axis:
        assert e.state.r == pytest.approx(r_star, abs=1e-10)
    # psi = pi/6 + k pi/3: -0.01 + r - r^2 = 0
    other = [e for e in eqs if abs(math.cos(3 * e.state.psi)) < 1e-9]
    for e in other:
        assert e.state.r == pytest.approx((1 - math.sqrt(0.96)) / 2, abs=1e-10)


def test_residuals_are_small():
    for params in (symmetric(), FlowParams(FlowModel.SymBreakConservative, 3, -0.01, 0.001)):
        for e in find_equilibria(params):
            assert e.residual < 1e-11


# --- Classification ---

def test_axis_saddle_and_shifted_center():
    eqs = {round(e.state.psi / (math.pi / 6)) % 12: e for e in find_equilibria(symmetric())}
    assert eqs[0].kind is EquilibriumKind.Saddle
    assert eqs[1].kind is EquilibriumKind.Center


def test_saddle_eigenvalues():
    e = next(e for e in find_equilibria(symmetric()) if abs(math.sin(e.state.psi)) < 1e-9)
    r = e.state.r
    lam2 = 4 * 3 * r ** 3 * (1 + 2 * r)
    assert lam2 == pytest.approx(1.19e-5, rel=2e-3)
    assert max(ev.real for ev in e.eigenvalues) == pytest.approx(math.sqrt(lam2), rel=1e-9)
    assert math.sqrt(lam2) == pytest.approx(3.45e-3, rel=2e-3)


@pytest.mark.parametrize(
    'params',
    [
        symmetric(),
        symmetric(5, -0.005, -1.0),
        FlowParams(FlowModel.SymBreakConservative, 3, -0.01, 0.001),
        FlowParams(FlowModel.ReversibleNonCons, 3, -0.01, 0.001, A=1.0),
    ]
)
def test_finite_difference_jacobian_at_equilibria(params):
    for e in find_equilibria(params):
        exact = polar_jacobian(params, e.state.r, e.state.psi)
        approx = polar_jacobian_fd(params, e.state.r, e.state.psi)
        assert np.max(np.abs(exact - approx)) < 1e-6 * np.max(np.abs(exact))


# --- Scaling laws ---

def _fit(xs, ys):
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return slope


def test_radius_law():
    mus = np.array([1e-2, 5e-3, 2.5e-3])
    dev = [max(abs(e.state.r - mu) for e in find_equilibria(symmetric(3, -mu)))
           for mu in mus]
    assert _fit(mus, dev) == pytest.approx(2.0, abs=0.2)


@pytest.mark.parametrize('q', [3, 5])
def test_eigenvalue_law(q):
    mus = np.array([1e-2, 5e-3, 2.5e-3])
    lam2 = []
    for mu in mus:
        e = next(e for e in find_equilibria(symmetric(q, -mu))
                 if e.kind is EquilibriumKind.Saddle)
        lam2.append(abs(e.eigenvalues[0] ** 2))
    assert _fit(mus, lam2) == pytest.approx(q, abs=0.15)


# --- Symmetry closure ---

@pytest.mark.parametrize(
    'params',
    [
        symmetric(5),
        FlowParams(FlowModel.SymBreakConservative, 3, -0.01, 0.001),
        FlowParams(FlowModel.ReversibleNonCons, 3, -0.01, 0.001, A=1.0),
    ]
)
def test_equilibria_closed_under_symmetries(params):
    eqs = find_equilibria(params)
    angles = np.array([e.state.psi for e in eqs])
    q = params.q

    def present(psi):
        d = (angles - psi + math.pi) % (2 * math.pi) - math.pi
        return np.min(np.abs(d)) < 1e-9

    shift = math.pi / q if params.mu2 == 0 else 2 * math.pi / q
    for e in eqs:
        assert present(e.state.psi + shift)
        assert present(-e.state.psi)


def test_reversible_axis_equilibria_are_conservative():
    params = FlowParams(FlowModel.ReversibleNonCons, 3, -0.01, 0.001, A=1.0)
    for e in find_equilibria(params):
        if e.symmetry is SymmetryClass.CentrallySymmetricAxis:
            assert abs(e.divergence) < 1e-12


# --- Symmetry-breaking garlands ---

def test_region_three_census_for_negative_l1_alpha():
    params = FlowParams(FlowModel.SymBreakConservative, 3, -0.01, 0.001, alpha=-1.0)
    garland = assemble_garland(find_equilibria(params), params)
    census = garland.census()
    assert census['total'] == 12
    assert census['on_axis'] == 6
    on_axis = [e for e in garland.equilibria
               if e.symmetry is SymmetryClass.CentrallySymmetricAxis]
    off_axis = [e for e in garland.equilibria
                if e.symmetry is SymmetryClass.NonSymmetric]
    assert all(e.kind is EquilibriumKind.Center for e in on_axis)
    assert all(e.kind is EquilibriumKind.Saddle for e in off_axis)


@pytest.mark.parametrize('mu2', [0.005, -0.005])
def test_outside_pitchfork_garland_is_qq(mu2):
    params = FlowParams(FlowModel.SymBreakConservative, 3, -0.01, mu2)
    garland = assemble_garland(find_equilibria(params), params)
    assert garland.label is GarlandLabel.G_qq
    assert garland.census()['Saddle'] == 3
    assert garland.census()['Center'] == 3


def test_reversible_non_conservative_garland():
    params = FlowParams(FlowModel.ReversibleNonCons, 3, -0.01, 0.001, A=1.0, B=0.0)
    garland = assemble_garland(find_equilibria(params), params)
    assert garland.label is GarlandLabel.G_prime_2q_q_q
    census = garland.census()
    assert census['Saddle'] == 6
    assert census['StableFocus'] == 3
    assert census['UnstableFocus'] == 3

    for i, j, kind in garland.pairing:
        a, b = garland.equilibria[i], garland.equilibria[j]
        if kind == 'reversible' and a.symmetry is SymmetryClass.NonSymmetric:
            assert abs(a.divergence + b.divergence) < 1e-10
            assert a.divergence * b.divergence < 0


def test_garland_json_lists_equilibria():
    params = symmetric()
    doc = assemble_garland(find_equilibria(params), params).to_json()
    assert doc['label'] == 'G_2q2q'
    assert len(doc['equilibria']) == 12
    assert {'r', 'psi', 'eigenvalues', 'kind', 'divergence', 'symmetry'} <= set(doc['equilibria'][0])


# --- Pitchfork ---

def test_pitchfork_location():
    base = FlowParams(FlowModel.SymBreakConservative, 3, -0.01, 0.001)
    points = pitchfork_scan(lambda s: base.with_mu(-0.01, s), (5e-4, 4e-3))
    assert len(points) == 1
    point = points[0]
    assert point.count_before == 12
    assert point.count_after == 6
    assert point.parameter == pytest.approx(2.0e-3, rel=0.1)
    assert not point.inconclusive


def test_pitchfork_scan_in_region_one_is_empty():
    base = FlowParams(FlowModel.SymBreakConservative, 3, 0.01, 0.001)
    assert pitchfork_scan(lambda s: base.with_mu(0.01, s), (5e-4, 4e-3)) == []


def test_reversible_pitchfork_newborn_divergences():
    base = FlowParams(FlowModel.ReversibleNonCons, 3, -0.01, 0.001, A=1.0, B=0.0)
    points = pitchfork_scan(lambda s: base.with_mu(-0.01, s), (5e-4, 4e-3))
    assert points
    pairs = points[0].newborn_divergences
    assert pairs
    for d1, d2 in pairs:
        assert abs(d1 + d2) < 1e-10
        assert d1 * d2 < 0


@pytest.mark.parametrize(
    'model,extra',
    [
        (FlowModel.SymBreakConservative, {}),
        (FlowModel.ReversibleNonCons, {'A': 1.0, 'B': 0.0}),
    ]
)
@pytest.mark.parametrize(
    'alpha,criticality',
    [
        (1.0, 'supercritical'),
        (-1.0, 'subcritical'),
    ]
)
def test_pitchfork_criticality(model, extra, alpha, criticality):
    base = FlowParams(model, 3, -0.01, 0.001, alpha=alpha, **extra)
    points = pitchfork_scan(lambda s: base.with_mu(-0.01, s), (5e-4, 4e-3))
    assert points
    assert points[0].criticality == criticality
    assert points[0].parameter == pytest.approx(2.0e-3, rel=0.05)


def test_polar_field_vanishes_at_all_equilibria():
    params = FlowParams(FlowModel.SymBreakConservative, 3, -0.01, 0.001)
    for e in find_equilibria(params):
        dr, dpsi = polar_field(params, e.state.r, e.state.psi)
        assert abs(dpsi) < 1e-11
        assert abs(dr) < 1e-11 * 2 * e.state.r ** 3
