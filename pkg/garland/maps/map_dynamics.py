""" Periodic orbits of polynomial maps of the plane near a resonant point.

Maps are TruncatedSeries in (z, z*). Newton works on F(z) = f^q(z) - z in
real coordinates; the Jacobian of f^q is the chain-rule product of the
per-step Jacobians built from the Wirtinger derivatives a = df/dz,
b = df/dz*:
    [[Re(a + b), -Im(a - b)],
     [Im(a + b),  Re(a - b)]]
"""
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as npoly

from gkit.errors import SolverError
from gkit.utils import DEFAULTS
from garland.equilibria.equilibria_garlands import find_equilibria
from garland.flows.flow_core import FlowParams
from garland.flows.flow_models import as_series
from garland.maps.orbit_core import (EmbeddingResidual, Iterates, MapGarland,
                                     MapGarlandLabel, OrbitKind, PeriodicOrbit,
                                     SeedingPolicy)
from garland.normal_form.normal_form import DEFAULT_RADII, NOISE_FLOOR
from garland.normal_form.resonance_core import ResonanceSpec
from garland.series.series_core import (TruncatedSeries, fitted_order,
                                        flow_exp, flow_log, substitute)

NEWTON_TOL = 1e-13
NEWTON_MAX_ITER = 60
MIN_ORBIT_RADIUS = 1e-6


class _MapEvaluator:
    """ Dense coefficient tables of f and its Wirtinger derivatives. """

    def __init__(self, f: TruncatedSeries):
        self.f = f.to_dense()
        self.fz = f.derivative_z().to_dense()
        self.fzs = f.derivative_zstar().to_dense()

    def value(self, z):
        return npoly.polyval2d(z, np.conj(z), self.f)

    def jacobian(self, z) -> np.ndarray:
        zc = np.conj(z)
        a = npoly.polyval2d(z, zc, self.fz)
        b = npoly.polyval2d(z, zc, self.fzs)
        s, d = a + b, a - b
        return np.stack([np.stack([s.real, -d.imag], axis=-1),
                         np.stack([s.imag, d.real], axis=-1)], axis=-2)

    def power(self, z, n: int):
        """ f^n(z) and D(f^n)(z) as a real 2x2 matrix. """
        z = np.asarray(z, dtype=complex)
        jac = np.broadcast_to(np.eye(2), z.shape + (2, 2)).copy()
        w = z
        for _ in range(n):
            jac = self.jacobian(w) @ jac
            w = self.value(w)
        return w, jac


# --- Map factories ---

def normal_form_map(params: FlowParams, p: int,
                    max_degree: int | None = None) -> TruncatedSeries:
    """ lam times the time-1 map of the full truncated field F, lam = e^(2 pi i p/q).

    F includes the linear detuning i mu1 z, so the linear part of the map is
    lam e^(i mu1). F is resonant, hence the map commutes with the rotation by
    lam and its q-th power is the time-q map of F.
    """
    spec = ResonanceSpec(p, params.q)
    n = max_degree or 4 * params.q + 1
    field = as_series(params, n, include_linear=True)
    return flow_exp(field).scale(spec.lam)


def shear_map(p: int, q: int, mu: float = 0.0, shear_coeffs=(1.0,),
              max_degree: int | None = None) -> TruncatedSeries:
    """ e^(i(2 pi p/q + mu)) (z + i g(x)), x = Re z, g(x) = sum c_j x^(2j+1).

    Exactly area-preserving and centrally symmetric.
    """
    n = max_degree or 2 * q + 1
    rot = np.exp(1j * (2 * math.pi * p / q + mu))
    coeffs = {(1, 0): rot}
    for j, c in enumerate(shear_coeffs, start=1):
        d = 2 * j + 1
        for m in range(d + 1):
            coeffs[(m, d - m)] = coeffs.get((m, d - m), 0j) \
                + rot * 1j * c * math.comb(d, m) / 2 ** d
    return TruncatedSeries(coeffs, n)


# --- Operations ---

def iterate(f: TruncatedSeries, z0: complex, n: int,
            radius: float = DEFAULTS['validity_radius']) -> Iterates:
    ev = _MapEvaluator(f)
    points = [complex(z0)]
    for _ in range(n):
        z = complex(ev.value(points[-1]))
        points.append(z)
        if abs(z) > radius:
            logging.warning(f'Iterate left the validity radius after {len(points) - 1} steps')
            return Iterates(np.array(points), escaped=True)
    return Iterates(np.array(points))


def _newton(ev: _MapEvaluator, z: np.ndarray, period: int,
            tol: float, max_iter: int):
    z = z.astype(complex).copy()
    active = np.ones(z.size, dtype=bool)
    converged = np.zeros(z.size, dtype=bool)
    eye = np.eye(2)

    with np.errstate(all='ignore'):
        for _ in range(max_iter):
            if not active.any():
                break
            idx = np.flatnonzero(active)
            za = z[idx]
            w, jac = ev.power(za, period)
            res = w - za
            rhs = -np.stack([res.real, res.imag], axis=-1)[..., None]
            try:
                step = np.linalg.solve(jac - eye, rhs)[..., 0]
            except np.linalg.LinAlgError:
                step = np.stack([np.linalg.lstsq(m - eye, r[:, 0], rcond=None)[0]
                                 for m, r in zip(jac, rhs)])
            dz = step[:, 0] + 1j * step[:, 1]
            cap = 0.5 * np.maximum(np.abs(za), MIN_ORBIT_RADIUS)
            big = np.abs(dz) > cap
            dz[big] *= cap[big] / np.abs(dz[big])

            norm0 = np.abs(res)
            t = np.ones(za.size)
            for _ in range(10):
                trial = za + t * dz
                norm1 = np.abs(ev.power(trial, period)[0] - trial)
                worse = ~(norm1 < norm0) & (norm1 > tol)
                if not worse.any():
                    break
                t[worse] *= 0.5
            z[idx] = za + t * dz
            done = norm1 < tol
            lost = ~np.isfinite(norm1) | (np.abs(z[idx]) > 1.0)
            converged[idx[done]] = True
            active[idx[done | lost]] = False
    return z, converged


def _hausdorff(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _canonical(points: list[complex]) -> list[complex]:
    """ Cyclic shift starting at the point of smallest argument in [0, 2 pi). """
    start = min(range(len(points)),
                key=lambda i: np.angle(points[i]) % (2 * math.pi))
    return points[start:] + points[:start]


def flow_seeds(params: FlowParams, transform: TruncatedSeries | None = None,
               **find_kwargs) -> list[complex]:
    """ Flow equilibria, pushed through the normalizing change if given. """
    eqs = find_equilibria(params, **find_kwargs)
    zs = np.array([e.z for e in eqs], dtype=complex)
    if transform is not None and zs.size:
        zs = transform.evaluate(zs)
    return [complex(z) for z in zs]


def find_periodic_orbits(f: TruncatedSeries, period: int,
                         seeds: SeedingPolicy | None = None,
                         tol: float = NEWTON_TOL,
                         max_iter: int = NEWTON_MAX_ITER,
                         orbit_tol: float = DEFAULTS['orbit_tol']) -> list[PeriodicOrbit]:
    seeds = seeds or SeedingPolicy()
    ev = _MapEvaluator(f)
    batches = [('flow', np.asarray(seeds.flow_seeds, dtype=complex))]
    if seeds.blind:
        batches.append(('blind', seeds.blind_seeds()))

    orbits: list[PeriodicOrbit] = []
    for source, batch in batches:
        if not batch.size:
            continue
        z, ok = _newton(ev, batch, period, tol, max_iter)
        n_ok = 0
        for z0 in z[ok]:
            pts = [complex(z0)]
            for _ in range(period - 1):
                pts.append(complex(ev.value(pts[-1])))
            mags = np.abs(pts)
            if mags.min() < MIN_ORBIT_RADIUS or mags.max() > 1.25 * seeds.radius:
                continue
            n_ok += 1
            match = next((o for o in orbits
                          if _hausdorff(o.points, pts) < orbit_tol), None)
            if match is None:
                orbits.append(PeriodicOrbit(_canonical(pts), seeded_by=(source,)))
            elif source not in match.seeded_by:
                match.seeded_by = tuple(sorted(match.seeded_by + (source,)))
        logging.info(f'{source} seeding: {n_ok} converged of {batch.size}')
        if source == 'flow' and n_ok == 0:
            raise SolverError(
                f'Newton failed on all {batch.size} flow-informed seeds')

    out = [classify_orbit(f, o) for o in orbits]
    out.sort(key=lambda o: (o.kind.value, np.angle(o.points[0]) % (2 * math.pi)))
    logging.info(f'{len(out)} orbit(s) of period {period} found')
    return out


def classify_orbit(f: TruncatedSeries, orbit: PeriodicOrbit,
                   conservative_tol: float = DEFAULTS['conservative_tol']) -> PeriodicOrbit:
    ev = _MapEvaluator(f)
    z0 = orbit.points[0]
    n = orbit.period
    _, jac = ev.power(np.asarray(z0, dtype=complex), n)
    closure = max(abs(complex(ev.value(orbit.points[i])) - orbit.points[(i + 1) % n])
                  for i in range(n))
    det = float(np.linalg.det(jac))
    tr = float(np.trace(jac))
    mult = np.linalg.eigvals(jac)
    mult = tuple(sorted((complex(m) for m in mult), key=lambda m: (abs(m), m.imag)))

    if abs(det - 1) < conservative_tol:
        if abs(abs(tr) - 2) < 1e-8:
            kind = OrbitKind.Degenerate
        elif abs(tr) < 2:
            kind = OrbitKind.Elliptic
        else:
            kind = OrbitKind.SaddleMap
    else:
        mods = sorted(abs(m) for m in mult)
        if mods[0] < 1 < mods[1] and all(abs(m.imag) < 1e-12 for m in mult):
            kind = OrbitKind.NonConsSaddle
        elif mods[1] < 1:
            kind = OrbitKind.SinkMap
        elif mods[0] > 1:
            kind = OrbitKind.SourceMap
        else:
            kind = OrbitKind.Degenerate

    orbit.multipliers = mult
    orbit.kind = kind
    orbit.jacobian_det = det
    orbit.trace = tr
    orbit.closure = float(closure)
    return orbit


def symmetry_pairing(orbits: list[PeriodicOrbit], symmetric_map: bool = False,
                     tol: float = DEFAULTS['orbit_tol']) -> MapGarland:
    garland = MapGarland(orbits)
    for i, o in enumerate(orbits):
        neg = [-z for z in o.points]
        conj = [z.conjugate() for z in o.points]
        for j in range(i + 1, len(orbits)):
            other = orbits[j].points
            if _hausdorff(other, neg) < tol:
                garland.pairs.append((i, j, 'central'))
            elif _hausdorff(other, conj) < tol:
                garland.pairs.append((i, j, 'reversible'))
    for i, j, kind in garland.pairs:
        for a, b in ((i, j), (j, i)):
            if orbits[a].partner is None:
                orbits[a].partner, orbits[a].partner_kind = b, kind

    if symmetric_map:
        central = {k for i, j, kind in garland.pairs if kind == 'central' for k in (i, j)}
        for i in range(len(orbits)):
            if i not in central:
                garland.diagnostics.append(
                    f'symmetry violation: orbit {i} has no centrally symmetric partner')

    kinds = [o.kind for o in orbits]
    n = len(orbits)
    central_pairs = [(i, j) for i, j, kind in garland.pairs if kind == 'central']
    if n == 4 and kinds.count(OrbitKind.SaddleMap) == 2 \
            and kinds.count(OrbitKind.Elliptic) == 2 and len(central_pairs) == 2 \
            and all(kinds[i] == kinds[j] for i, j in central_pairs):
        garland.label = MapGarlandLabel.G22_qq
    elif n == 2 and set(kinds) == {OrbitKind.SaddleMap, OrbitKind.Elliptic}:
        garland.label = MapGarlandLabel.G11_qq
    elif n == 4 and kinds.count(OrbitKind.SaddleMap) == 2 \
            and kinds.count(OrbitKind.SinkMap) == 1 \
            and kinds.count(OrbitKind.SourceMap) == 1 \
            and any(kind == 'reversible' and {kinds[i], kinds[j]}
                    == {OrbitKind.SinkMap, OrbitKind.SourceMap}
                    for i, j, kind in garland.pairs):
        garland.label = MapGarlandLabel.G_prime_2q_q_q_map
    elif n < 2:
        garland.diagnostics.append(f'{n} orbit(s): no garland')
    else:
        garland.diagnostics.append(
            f'{n} orbits of kinds {[k.value for k in kinds]} match no garland')
    return garland


def embedding_residual(f: TruncatedSeries, spec: ResonanceSpec,
                       radii=DEFAULT_RADII, extra_degrees: int = 4,
                       field: TruncatedSeries | None = None) -> EmbeddingResidual:
    """ Fitted decay orders of f o R - exp(F) and f^q - exp(qF).

    field is the candidate F, e.g. the model field a map was built from or the
    field exported by embed. Without it F is the vector-field logarithm of
    f o R itself: the rotated residual then vanishes through max_degree by
    construction and only the truncation tail on the lifted degrees is
    measured.
    """
    n = f.max_degree
    m = n + extra_degrees
    rotated = (f.scale(spec.lam.conjugate()).without([(1, 0)])
               + TruncatedSeries.identity(n))
    if field is None:
        field = flow_log(rotated)
    elif field.max_degree > n:
        field = field.with_max_degree(n)
    if field.is_zero() and rotated.nonlinear().is_zero():
        return EmbeddingResidual(math.inf, math.inf)

    lifted = field.with_max_degree(m)
    scale = max(1.0, max(abs(c) for c in f.coeffs.values()))

    res_rot = (rotated.with_max_degree(m) - flow_exp(lifted)).chop(
        NOISE_FLOOR * scale, up_to_degree=n)

    fl = f.with_max_degree(m)
    power = fl
    for _ in range(spec.q - 1):
        power = substitute(fl, power)
    res_q = (power - flow_exp(lifted.scale(spec.q))).chop(
        NOISE_FLOOR * scale, up_to_degree=n)

    return EmbeddingResidual(fitted_order(res_rot, radii),
                             fitted_order(res_q, radii))
