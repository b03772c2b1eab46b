""" Two-parameter (mu1, mu2) atlases of the symmetry-breaking flows.

The region of a point is decided by its equilibrium census; the position
relative to the leading-order pitchfork curve and the axis mu1 = 0 is only a
cross-check.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from gkit.errors import ConfigurationError, DomainError
from gkit.utils import DEFAULTS
from garland.atlas.atlas_core import (AtlasDocument, AtlasRegion,
                                      BifurcationCurve, CurveName, RegionId)
from garland.equilibria.equilibria_core import EquilibriumKind, SymmetryClass
from garland.equilibria.equilibria_garlands import (assemble_garland,
                                                    find_equilibria,
                                                    pitchfork_scan)
from garland.flows.flow_core import FlowModel, FlowParams

MAX_RESOLUTION = 512
HETEROCLINIC_TOL = 0.05


def pitchfork_mu2(params: FlowParams, mu1: float) -> float:
    """ Leading-order |mu2| on the pitchfork curve, nan where mu1 l1 >= 0. """
    x = -mu1 / params.l1
    if x <= 0:
        return math.nan
    return 2 * abs(params.alpha) * x ** (params.q / 2)


def _refine_branch(params: FlowParams, mu1: float, mu2: float) -> float | None:
    lo, hi = sorted((0.5 * mu2, 1.5 * mu2))
    points = pitchfork_scan(lambda s: params.with_mu(mu1, s), (lo, hi), n_samples=9)
    points = [p for p in points if not p.inconclusive]
    if not points:
        return None
    return min(points, key=lambda p: abs(p.parameter - mu2)).parameter


def curve_Lpf(params: FlowParams, mu1_grid,
              refine: bool = False) -> tuple[BifurcationCurve, BifurcationCurve]:
    """ Both branches mu2 = +-2 alpha (-mu1/l1)^(q/2). """
    curves = []
    for sign in (1, -1):
        samples, notes = [], []
        for mu1 in mu1_grid:
            mu1 = float(mu1)
            if mu1 * params.l1 >= 0:
                notes.append(f'skipped mu1={mu1:g}: mu1 l1 >= 0')
                continue
            mu2 = sign * math.copysign(pitchfork_mu2(params, mu1), params.alpha)
            if refine:
                found = _refine_branch(params, mu1, mu2)
                if found is None:
                    notes.append(f'refinement failed at mu1={mu1:g}')
                else:
                    mu2 = found
            samples.append((mu1, mu2))
        curves.append(BifurcationCurve(CurveName.L_pf, sign, samples,
                                       analytic=not refine, notes=notes))
    return curves[0], curves[1]


def curve_Lpq(mu2_grid) -> BifurcationCurve:
    return BifurcationCurve(CurveName.L_pq, 1,
                            [(0.0, float(m)) for m in mu2_grid], analytic=True)


def curve_Lpf_reversible(params: FlowParams, mu1_grid) -> list[BifurcationCurve]:
    """ Reversible pitchfork located numerically on both mu2 branches. """
    if params.model is not FlowModel.ReversibleNonCons:
        raise DomainError('L_pf_reversible needs the ReversibleNonCons model')
    out = []
    for sign in (1, -1):
        samples, notes = [], []
        for mu1 in mu1_grid:
            mu1 = float(mu1)
            guess = pitchfork_mu2(params, mu1)
            if math.isnan(guess):
                notes.append(f'skipped mu1={mu1:g}: mu1 l1 >= 0')
                continue
            found = _refine_branch(params, mu1, sign * guess)
            if found is None:
                notes.append(f'no reversible pitchfork near mu1={mu1:g}')
            else:
                samples.append((mu1, found))
        out.append(BifurcationCurve(CurveName.L_pf_reversible, sign, samples,
                                    analytic=False, notes=notes))
    return out


# --- Region classification ---

def position_region(mu1: float, mu2: float, params: FlowParams) -> RegionId:
    if mu1 * params.l1 >= 0:
        return RegionId.I
    if abs(mu2) < pitchfork_mu2(params, mu1):
        return RegionId.III
    return RegionId.II if mu2 > 0 else RegionId.IV


def _near_boundary(mu1: float, mu2: float, params: FlowParams, fraction: float) -> bool:
    if mu1 == 0 and mu2 == 0:
        return True
    level = pitchfork_mu2(params, mu1)
    if not math.isnan(level) and abs(abs(mu2) - level) < fraction * level:
        return True
    mu1_at = abs(params.l1) * (abs(mu2) / (2 * abs(params.alpha))) ** (2 / params.q)
    return abs(mu1) < fraction * mu1_at


def _family(psi: float, q: int) -> str:
    k = round(psi / (math.pi / q)) % 2
    return 'axis_0' if k == 0 else 'axis_pi_q'


def _heteroclinic_suspect(eqs, q: int, tol: float) -> bool:
    levels = {}
    for e in eqs:
        if e.kind is not EquilibriumKind.Saddle or math.isnan(e.hamiltonian):
            continue
        key = (_family(e.state.psi, q)
               if e.symmetry is SymmetryClass.CentrallySymmetricAxis else 'off_axis')
        levels.setdefault(key, []).append(e.hamiltonian)
    if len(levels) < 2:
        return False
    means = [float(np.mean(v)) for v in levels.values()]
    scale = max(abs(e.hamiltonian) for e in eqs if not math.isnan(e.hamiltonian))
    gaps = [abs(a - b) for i, a in enumerate(means) for b in means[i + 1:]]
    return scale > 0 and min(gaps) < tol * scale


def classify_region(mu1: float, mu2: float, params: FlowParams,
                    boundary_fraction: float = DEFAULTS['boundary_fraction'],
                    heteroclinic_tol: float = HETEROCLINIC_TOL,
                    **find_kwargs) -> AtlasRegion:
    point = params.with_mu(mu1, mu2)
    eqs = find_equilibria(point, **find_kwargs)
    garland = assemble_garland(eqs, point)
    census = garland.census()
    q = params.q
    n = len(eqs)

    position = position_region(mu1, mu2, params)
    notes = list(garland.diagnostics)
    if n == 0:
        region = RegionId.I
    elif n == 4 * q:
        region = RegionId.III
    elif n == 2 * q and mu2 != 0:
        region = RegionId.II if mu2 > 0 else RegionId.IV
    else:
        region = position
        notes.append(f'census of {n} equilibria is not decisive')

    result = AtlasRegion(
        id=region,
        sample_params=point,
        garland_label=garland.label.value,
        census=census,
        position_id=position,
        boundary=_near_boundary(mu1, mu2, params, boundary_fraction),
        disagreement=region is not position,
        heteroclinic_suspect=(region is RegionId.III and point.conservative
                              and _heteroclinic_suspect(eqs, q, heteroclinic_tol)),
        notes=notes,
    )
    if result.disagreement and not result.boundary:
        logging.warning(f'Census region {region.value} disagrees with position '
                        f'{position.value} at mu1={mu1:g}, mu2={mu2:g}')
    return result


def _classify_cell(args) -> AtlasRegion:
    mu1, mu2, params, kwargs = args
    return classify_region(mu1, mu2, params, **kwargs)


def branch_family(params: FlowParams, mu1: float, mu2: float) -> str:
    """ Axis family whose equilibria change kind across the branch at mu2. """
    inside = find_equilibria(params.with_mu(mu1, 0.5 * mu2))
    outside = find_equilibria(params.with_mu(mu1, 1.5 * mu2))

    def kinds(eqs):
        out = {}
        for e in eqs:
            if e.symmetry is SymmetryClass.CentrallySymmetricAxis:
                out.setdefault(_family(e.state.psi, params.q), set()).add(e.kind.value)
        return out

    before, after = kinds(inside), kinds(outside)
    changed = sorted(f for f in set(before) | set(after)
                     if before.get(f) != after.get(f))
    return ','.join(changed) if changed else 'undetermined'


def atlas_sweep(window: tuple[float, float, float, float], resolution: int,
                params: FlowParams, threads: int = 1,
                reversible_curve: bool = True, **find_kwargs) -> AtlasDocument:
    """ Census-based region grid plus curves over a (mu1, mu2) window. """
    mu1_min, mu1_max, mu2_min, mu2_max = map(float, window)
    if not (mu1_min < mu1_max and mu2_min < mu2_max):
        raise ConfigurationError(f'Empty atlas window {window}')
    if not 2 <= resolution <= MAX_RESOLUTION:
        raise ConfigurationError(
            f'resolution {resolution} outside 2..{MAX_RESOLUTION}')

    mu1s = np.linspace(mu1_min, mu1_max, resolution)
    mu2s = np.linspace(mu2_min, mu2_max, resolution)
    cells = [(float(m1), float(m2), params, find_kwargs) for m1 in mu1s for m2 in mu2s]

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            regions = list(pool.map(_classify_cell, cells,
                                    chunksize=max(1, len(cells) // (4 * threads))))
    else:
        regions = [_classify_cell(c) for c in cells]
    logging.info(f'Atlas of {len(regions)} points: regions '
                 f'{sorted({r.id.value for r in regions})}')

    curves = list(curve_Lpf(params, mu1s))
    curves.append(curve_Lpq(mu2s))
    if params.model is FlowModel.ReversibleNonCons and params.mu2 == 0 \
            and reversible_curve:
        sample_mu1 = [m for m in np.linspace(mu1_min, mu1_max, 5) if m * params.l1 < 0]
        curves.extend(curve_Lpf_reversible(params, sample_mu1))
    band = [(r.sample_params.mu1, r.sample_params.mu2)
            for r in regions if r.heteroclinic_suspect]
    if band:
        curves.append(BifurcationCurve(CurveName.heteroclinic_band, 1, band,
                                       analytic=False, notes=['heuristic']))

    representatives = {}
    for r in regions:
        if not r.boundary:
            representatives.setdefault(r.id.value, r)

    families = {}
    far = mu1_min if params.l1 > 0 else mu1_max
    if far * params.l1 < 0:
        level = math.copysign(pitchfork_mu2(params, far), params.alpha)
        for sign, name in ((1, '+'), (-1, '-')):
            families[name] = branch_family(params, far, sign * level)

    notes = []
    n_bad = sum(r.disagreement and not r.boundary for r in regions)
    if n_bad:
        notes.append(f'{n_bad} interior point(s) where census and position disagree')
    return AtlasDocument(
        window=(mu1_min, mu1_max, mu2_min, mu2_max),
        resolution=resolution,
        params=params,
        regions=regions,
        curves=curves,
        representatives=representatives,
        branch_families=families,
        notes=notes,
    )
