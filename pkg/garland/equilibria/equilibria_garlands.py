""" Nonzero equilibria of the truncated flows and their garlands.

Equilibria solve the scaled polar system
    G1 = dr / (2 r^q) = 0,   G2 = dpsi = 0,
which keeps both rows of order one near the origin. Newton runs on all seeds
at once; converged roots are deduplicated in the (r, r psi) metric.
"""
import logging
import math
from typing import Callable

import numpy as np

from gkit.errors import DomainError, SolverError
from gkit.utils import DEFAULTS
from garland.equilibria.equilibria_core import (Equilibrium, EquilibriumKind,
                                                Garland, GarlandLabel,
                                                PitchforkPoint, SymmetryClass)
from garland.flows.flow_core import TWO_PI, FlowParams, PolarState
from garland.flows.flow_models import (divergence, hamiltonian_rpsi,
                                       is_hamiltonian, polar_field,
                                       polar_jacobian)

R_MIN = 1e-10
RADIAL_SAMPLES = 160
CONSERVATIVE_DIV = 1e-12
MATCH_TOL = 1e-8


def _wrap(angle):
    """ Angle difference reduced to [-pi, pi). """
    return (np.asarray(angle) + math.pi) % TWO_PI - math.pi


def _axis_offset(params: FlowParams) -> float:
    return params.omega if params.mu2 == 0 else 0.0


def _scaled_system(params: FlowParams, r: np.ndarray, psi: np.ndarray):
    dr, dpsi = polar_field(params, r, psi)
    jac = polar_jacobian(params, r, psi)
    scale = 2 * r ** params.q
    g1 = dr / scale
    j00 = jac[..., 0, 0] / scale - params.q * dr / (scale * r)
    j01 = jac[..., 0, 1] / scale
    return g1, dpsi, j00, j01, jac[..., 1, 0], jac[..., 1, 1]


def scaled_residual(params: FlowParams, r: float, psi: float) -> float:
    dr, dpsi = polar_field(params, r, psi)
    return float(max(abs(dr / (2 * r ** params.q)), abs(dpsi)))


# --- Seeding ---

def _seed_angles(params: FlowParams) -> np.ndarray:
    q = params.q
    uniform = TWO_PI * np.arange(4 * q + 8) / (4 * q + 8)
    lines = _axis_offset(params) + math.pi * np.arange(4 * q) / (2 * q)
    return np.concatenate([uniform, lines % TWO_PI])


def _radial_seeds(params: FlowParams, angles: np.ndarray, r_max: float):
    grid = np.logspace(-8, math.log10(r_max), RADIAL_SAMPLES)
    rr, pp = np.meshgrid(grid, angles)
    _, dpsi = polar_field(params, rr, pp)
    flips = np.signbit(dpsi[:, :-1]) != np.signbit(dpsi[:, 1:])
    rows, cols = np.nonzero(flips)
    r_seeds = np.sqrt(grid[cols] * grid[cols + 1])
    psi_seeds = angles[rows]

    r0 = -params.mu1 / params.l1
    if 0 < r0 < r_max:
        r_seeds = np.concatenate([r_seeds, np.full(angles.size, r0)])
        psi_seeds = np.concatenate([psi_seeds, angles])
    return r_seeds, psi_seeds


def _off_axis_seeds(params: FlowParams, radii: np.ndarray):
    """ Angles where the q-fold and 2q-fold radial terms balance. """
    if params.mu2 == 0 or params.omega != 0:
        return np.empty(0), np.empty(0)
    q = params.q
    radii = radii[radii > 0]
    c = -params.mu2 * (1 + (params.B - params.A) * radii) \
        / (2 * params.alpha * radii ** (q / 2))
    ok = np.abs(c) <= 1
    base = np.arccos(c[ok]) / q
    shifts = TWO_PI * np.arange(q) / q
    psi = np.concatenate([(sgn * base[:, None] + shifts).ravel()
                          for sgn in (1, -1)]) % TWO_PI
    r = np.tile(np.repeat(radii[ok], q), 2)
    return r, psi


# --- Newton ---

def _newton(params: FlowParams, r: np.ndarray, psi: np.ndarray, r_max: float,
            tol: float, max_iter: int):
    r, psi = r.astype(float).copy(), psi.astype(float).copy()
    active = np.ones(r.size, dtype=bool)
    converged = np.zeros(r.size, dtype=bool)
    cap = math.pi / (4 * params.q)

    with np.errstate(all='ignore'):
        for _ in range(max_iter):
            if not active.any():
                break
            ra, pa = r[active], psi[active]
            g1, g2, a, b, c, d = _scaled_system(params, ra, pa)
            det = a * d - b * c
            dr = (g1 * d - g2 * b) / det
            dp = (a * g2 - c * g1) / det
            dp = np.clip(dp, -cap, cap)

            step = np.ones_like(ra)
            for _ in range(30):
                bad = ra - step * dr <= 0
                if not bad.any():
                    break
                step[bad] *= 0.5
            r_new = ra - step * dr
            p_new = (pa - step * dp) % TWO_PI

            idx = np.flatnonzero(active)
            r[idx], psi[idx] = r_new, p_new
            g1n, g2n = _scaled_system(params, r_new, p_new)[:2]
            res = np.maximum(np.abs(g1n), np.abs(g2n))
            done = res < tol
            lost = ~np.isfinite(res) | (r_new > 4 * r_max) | (r_new < R_MIN * 1e-3)
            converged[idx[done]] = True
            active[idx[done | lost]] = False
    return r, psi, converged


def _dedup(r: np.ndarray, psi: np.ndarray, radius: float):
    kept = []
    for ri, pi in sorted(zip(r, psi), key=lambda t: (t[1], t[0])):
        if any(math.hypot(ri - rk, 0.5 * (ri + rk) * _wrap(pi - pk)) < radius
               for rk, pk in kept):
            continue
        kept.append((ri, pi))
    return kept


def find_equilibria(params: FlowParams,
                    radius: float = DEFAULTS['validity_radius'],
                    tol: float = DEFAULTS['newton_tol'],
                    max_iter: int = DEFAULTS['newton_max_iter'],
                    dedup_radius: float = DEFAULTS['dedup_radius'],
                    classify_all: bool = True) -> list[Equilibrium]:
    """ All nonzero equilibria with |z| < radius, sorted by psi. """
    if not params.nondegenerate:
        raise DomainError('Degenerate flow: l1 and alpha must be nonzero')
    r_max = radius ** 2

    angles = _seed_angles(params)
    r_seed, p_seed = _radial_seeds(params, angles, r_max)
    r, psi, ok = _newton(params, r_seed, p_seed, r_max, tol, max_iter)
    good = ok & (r > R_MIN) & (r < r_max)

    extra_r, extra_p = _off_axis_seeds(
        params, np.unique(np.round(np.concatenate(
            [r[good], [-params.mu1 / params.l1]]), 14)))
    if extra_r.size:
        r2, p2, ok2 = _newton(params, extra_r, extra_p, r_max, tol, max_iter)
        r, psi = np.concatenate([r, r2]), np.concatenate([psi, p2])
        good = np.concatenate([good, ok2 & (r2 > R_MIN) & (r2 < r_max)])

    roots = _dedup(r[good], psi[good], dedup_radius)
    logging.debug(f'{len(roots)} equilibria from {r_seed.size + extra_r.size} seeds')

    r0 = -params.mu1 / params.l1
    if not roots and 0 < r0 < 0.5 * r_max and params.mu2 == 0:
        residuals = [scaled_residual(params, ri, pi)
                     for ri, pi in zip(r_seed[:8], p_seed[:8])]
        raise SolverError(
            f'Newton failed on all {r_seed.size} seeds although equilibria exist '
            f'near r={r0:.3g}', residuals)

    out = [Equilibrium(PolarState(ri, pi), residual=scaled_residual(params, ri, pi))
           for ri, pi in roots]
    if classify_all:
        out = [classify(params, e) for e in out]
    return out


# --- Classification ---

def _on_lines(psi: float, offset: float, spacing: float, tol: float) -> bool:
    k = round((psi - offset) / spacing)
    return abs(psi - offset - k * spacing) < tol


def classify(params: FlowParams, e: Equilibrium,
             rel_tol: float = DEFAULTS['kind_rel_tol'],
             angle_tol: float = DEFAULTS['angle_tol']) -> Equilibrium:
    r, psi = e.state.r, e.state.psi
    jac = polar_jacobian(params, r, psi)
    (a, b), (c, d) = jac
    det = a * d - b * c
    tr = a + d
    scale = abs(a * d) + abs(b * c)

    if scale == 0 or abs(det) < rel_tol * scale:
        kind = EquilibriumKind.Degenerate
    elif det < 0:
        kind = EquilibriumKind.Saddle
    elif abs(tr) <= rel_tol * 2 * math.sqrt(det):
        kind = EquilibriumKind.Center
    elif tr < 0:
        kind = EquilibriumKind.StableFocus
    else:
        kind = EquilibriumKind.UnstableFocus

    offset = _axis_offset(params)
    q = params.q
    on_axis = _on_lines(psi, offset, math.pi / q, angle_tol)
    line_spacing = math.pi / (2 * q) if params.mu2 == 0 else math.pi / q
    ev = np.linalg.eigvals(jac)
    ev = tuple(sorted((complex(x) for x in ev), key=lambda x: (x.real, x.imag)))

    return e.evolve(
        eigenvalues=ev,
        kind=kind,
        divergence=float(divergence(params, e.z)),
        symmetry=(SymmetryClass.CentrallySymmetricAxis if on_axis
                  else SymmetryClass.NonSymmetric),
        reversible=_on_lines(psi, offset, line_spacing, angle_tol),
        residual=scaled_residual(params, r, psi),
        hamiltonian=(float(hamiltonian_rpsi(params, r, psi))
                     if is_hamiltonian(params) else math.nan),
    )


# --- Garlands ---

def _find_partner(eqs: list[Equilibrium], r: float, psi: float) -> int | None:
    for j, other in enumerate(eqs):
        if abs(other.state.r - r) < MATCH_TOL and \
                abs(_wrap(other.state.psi - psi)) < MATCH_TOL / max(r, MATCH_TOL) ** 0.5:
            return j
    return None


def _pairings(eqs: list[Equilibrium], offset: float) -> list[tuple[int, int, str]]:
    out = []
    for i, e in enumerate(eqs):
        j = _find_partner(eqs, e.state.r, e.state.psi + math.pi)
        if j is not None and i < j:
            out.append((i, j, 'central'))
        j = _find_partner(eqs, e.state.r, 2 * offset - e.state.psi)
        if j is not None and i < j:
            out.append((i, j, 'reversible'))
    return out


def assemble_garland(equilibria: list[Equilibrium], params: FlowParams,
                     spacing_tol: float = 1e-6) -> Garland:
    eqs = sorted(equilibria, key=lambda e: e.state.psi)
    q = params.q
    n = len(eqs)
    offset = _axis_offset(params)
    pairing = _pairings(eqs, offset)
    garland = Garland(eqs, pairing=pairing)
    if n == 0:
        garland.diagnostics.append('no nonzero equilibria')
        return garland

    kinds = [e.kind for e in eqs]
    sc = {EquilibriumKind.Saddle, EquilibriumKind.Center}
    conservative = [abs(e.divergence) < CONSERVATIVE_DIV for e in eqs]
    on_axis = [e.symmetry is SymmetryClass.CentrallySymmetricAxis for e in eqs]

    if n == 4 * q and all(conservative) and set(kinds) <= sc:
        alternating = all(kinds[i] != kinds[(i + 1) % n] for i in range(n))
        gaps = np.diff([e.state.psi for e in eqs] + [eqs[0].state.psi + TWO_PI])
        evenly = bool(np.all(np.abs(gaps - math.pi / (2 * q)) < spacing_tol))
        if alternating and (evenly or params.mu2 != 0):
            garland.label = GarlandLabel.G_2q2q
            return garland
        garland.diagnostics.append(
            f'{n} conservative equilibria: alternating={alternating}, '
            f'evenly spaced={evenly}')
        return garland

    if n == 4 * q and sum(on_axis) == 2 * q:
        on_ok = all(c for c, a in zip(conservative, on_axis) if a)
        off = [i for i in range(n) if not on_axis[i]]
        rev = {frozenset((i, j)) for i, j, kind in pairing if kind == 'reversible'}
        pairs = [pair for pair in rev if pair <= set(off)]
        opposite = all(
            abs(eqs[i].divergence + eqs[j].divergence) < 1e-10
            and eqs[i].divergence * eqs[j].divergence < 0
            for i, j in (tuple(p) for p in pairs))
        if on_ok and len(pairs) == q and opposite:
            garland.label = GarlandLabel.G_prime_2q_q_q
            return garland
        garland.diagnostics.append(
            f'{n} equilibria, {len(pairs)} reversible off-axis pairs, '
            f'conservative axis={on_ok}, opposite divergence={opposite}')
        return garland

    if n == 2 * q and all(on_axis):
        n_saddle = kinds.count(EquilibriumKind.Saddle)
        n_center = kinds.count(EquilibriumKind.Center)
        if n_saddle == q and n_center == q:
            garland.label = GarlandLabel.G_qq
            return garland
        garland.diagnostics.append(
            f'{n} axis equilibria with {n_saddle} saddles and {n_center} centers')
        return garland

    garland.diagnostics.append(
        f'{n} equilibria ({sum(on_axis)} on symmetry axes) match no garland')
    return garland


# --- Pitchfork detection ---

def _criticality(eqs: list[Equilibrium]) -> str:
    newborn = [e for e in eqs if e.symmetry is SymmetryClass.NonSymmetric]
    axis = [e for e in eqs if e.symmetry is SymmetryClass.CentrallySymmetricAxis]
    if not newborn or not axis:
        return 'unknown'
    e = newborn[0]
    nearest = min(axis, key=lambda a: abs(_wrap(a.state.psi - e.state.psi)))
    if nearest.kind is EquilibriumKind.Saddle:
        return 'supercritical'
    if nearest.kind is EquilibriumKind.Center:
        return 'subcritical'
    return 'unknown'


def _newborn_divergences(eqs: list[Equilibrium],
                         offset: float) -> list[tuple[float, float]]:
    off = [e for e in eqs if e.symmetry is SymmetryClass.NonSymmetric]
    out = []
    for i, e in enumerate(off):
        j = _find_partner(off, e.state.r, 2 * offset - e.state.psi)
        if j is not None and i < j:
            out.append((e.divergence, off[j].divergence))
    return out


def pitchfork_scan(path: Callable[[float], FlowParams], window: tuple[float, float],
                   n_samples: int = 17, rel_tol: float = 1e-10,
                   **find_kwargs) -> list[PitchforkPoint]:
    """ Parameter values along path where the equilibrium count changes. """
    lo_w, hi_w = float(window[0]), float(window[1])
    width = hi_w - lo_w
    samples = np.linspace(lo_w, hi_w, n_samples)

    def count(s: float) -> int:
        return len(find_equilibria(path(s), classify_all=False, **find_kwargs))

    counts = [count(s) for s in samples]
    found = []
    for i in range(n_samples - 1):
        if counts[i] == counts[i + 1]:
            continue
        lo, hi = samples[i], samples[i + 1]
        c_lo = counts[i]
        while hi - lo > rel_tol * max(abs(lo), abs(hi), abs(width)):
            mid = 0.5 * (lo + hi)
            if count(mid) == c_lo:
                lo = mid
            else:
                hi = mid
        s_star = 0.5 * (lo + hi)
        # Sample a quarter step into the side with more equilibria.
        step = samples[i + 1] - samples[i]
        nudged = s_star - 0.25 * step if counts[i] > counts[i + 1] \
            else s_star + 0.25 * step
        params = path(float(np.clip(nudged, samples[i], samples[i + 1])))
        eqs = find_equilibria(params, **find_kwargs)
        point = PitchforkPoint(
            parameter=float(s_star),
            count_before=counts[i],
            count_after=counts[i + 1],
            criticality=_criticality(eqs),
            newborn_divergences=_newborn_divergences(eqs, _axis_offset(params)),
            inconclusive=min(s_star - lo_w, hi_w - s_star) < 1e-6 * abs(width),
        )
        logging.info(f'Bifurcation at {point.parameter:.6g}: '
                     f'{point.count_before} -> {point.count_after} '
                     f'({point.criticality})')
        found.append(point)
    return found
