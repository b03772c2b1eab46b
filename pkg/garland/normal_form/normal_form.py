""" Resonant normal forms of planar maps near a p:q elliptic point.

Non-resonant monomials are removed degree by degree with near-identity
changes z = w + C w^m (w*)^k,  C = A / (lam^m conj(lam)^k - lam); what is
left are the monomials with m - 1 - k divisible by q.
"""
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as npoly

from gkit.errors import DomainError
from gkit.utils import DEFAULTS
from garland.flows.flow_core import FlowModel, FlowParams
from garland.normal_form.resonance_core import (EliminationRecord,
                                                EmbeddedFlow,
                                                NormalFormResult,
                                                ResonanceSpec)
from garland.series.series_core import (Monomial, TruncatedSeries, fitted_order,
                                        flow_log, invert_near_identity,
                                        is_centrally_symmetric, substitute)

DEFAULT_RADII = np.logspace(-3, -2, 6)
NOISE_FLOOR = 1e-10


def is_resonant(m: int, k: int, spec: ResonanceSpec) -> bool:
    return (m - 1 - k) % spec.q == 0


def resonant_terms_up_to(order: int, spec: ResonanceSpec,
                         symmetric: bool) -> list[Monomial]:
    """ Resonant monomials of degree 2..order, sorted by (degree, m). """
    out = []
    for d in range(2, order + 1):
        if symmetric and d % 2 == 0:
            continue
        out.extend((m, d - m) for m in range(d + 1)
                   if is_resonant(m, d - m, spec))
    return out


def frozen_terms_up_to(order: int, spec: ResonanceSpec) -> list[Monomial]:
    """ Even-degree resonant monomials, zero for centrally symmetric maps. """
    return [mon for mon in resonant_terms_up_to(order, spec, symmetric=False)
            if sum(mon) % 2 == 0]


def _check_linear_part(f: TruncatedSeries, spec: ResonanceSpec) -> None:
    lam = f.linear_part
    if not math.isclose(abs(lam), 1.0, abs_tol=1e-12):
        raise DomainError(f'|lambda| = {abs(lam):.15g} is not 1')
    if abs(lam - spec.lam) > 1e-12 or abs(f[(0, 1)]) > 1e-12:
        raise DomainError(
            f'Linear part {lam} does not match exp(2 pi i {spec.p}/{spec.q})')
    if abs(f[(0, 0)]) > 0:
        raise DomainError('Map does not fix the origin')


# --- Elimination ---

def eliminate_terms(f: TruncatedSeries, targets: list[Monomial],
                    spec: ResonanceSpec) -> tuple[TruncatedSeries, EliminationRecord]:
    """ Remove several monomials of one degree with a single change. """
    _check_linear_part(f, spec)
    degrees = {m + k for m, k in targets}
    if len(degrees) > 1:
        raise DomainError(f'Targets span several degrees: {sorted(degrees)}')
    for m, k in targets:
        if is_resonant(m, k, spec):
            raise DomainError(f'resonant term not removable: ({m}, {k})')

    d = degrees.pop() if degrees else 0
    lam = spec.lam
    coefficients, divisors = {}, {}
    for m, k in sorted(targets):
        a = f[(m, k)]
        if a == 0:
            continue
        div = lam ** m * lam.conjugate() ** k - lam
        if abs(div) < spec.resonance_gap * (1 - 1e-9):
            raise DomainError(f'Small divisor {abs(div):.3g} at ({m}, {k})')
        coefficients[(m, k)] = a / div
        divisors[(m, k)] = div
    record = EliminationRecord(d, coefficients, divisors)
    if not coefficients:
        return f, record

    n = f.max_degree
    psi = record.change(n)
    g = substitute(invert_near_identity(psi), substitute(f, psi))

    # Degrees up to d are known in closed form.
    out = {mon: c for mon, c in g.coeffs.items() if sum(mon) > d}
    out.update({mon: c for mon, c in f.coeffs.items()
                if sum(mon) <= d and mon not in coefficients})
    logging.debug(f'Eliminated {len(coefficients)} monomial(s) of degree {d}')
    return TruncatedSeries(out, n), record


def eliminate_term(f: TruncatedSeries, target: Monomial,
                   spec: ResonanceSpec) -> tuple[TruncatedSeries, EliminationRecord]:
    return eliminate_terms(f, [target], spec)


# --- Normalization ---

def _twist_split(coeffs: list[complex]) -> tuple[list[float], list[float]]:
    """ Write 1 + sum c_j r^j as exp(rho(r) + i Omega(r)); return (Omega, rho). """
    n = len(coeffs)
    if n == 0:
        return [], []
    u = np.array([0j, *coeffs])
    log = np.zeros(n + 1, dtype=complex)
    power = np.array([1 + 0j])
    for j in range(1, n + 1):
        power = npoly.polymul(power, u)[:n + 1]
        log[:len(power)] += (-1) ** (j + 1) * power / j
    return [float(c.imag) for c in log[1:]], [float(c.real) for c in log[1:]]


def normalize(f: TruncatedSeries, spec: ResonanceSpec,
              symmetric: bool | None = None,
              degeneracy_tol: float = DEFAULTS['degeneracy_tol']) -> NormalFormResult:
    """ Bring f to resonant normal form up to its max_degree. """
    _check_linear_part(f, spec)
    if symmetric is None:
        symmetric = spec.symmetric
    if symmetric is None:
        symmetric = is_centrally_symmetric(f)
    if symmetric and not is_centrally_symmetric(f):
        raise DomainError('Symmetric pipeline selected for a map with even-degree terms')

    n = f.max_degree
    g = f
    transform = TruncatedSeries.identity(n)
    changes = []
    for d in range(2, n + 1):
        targets = [(m, d - m) for m in range(d + 1)
                   if not is_resonant(m, d - m, spec) and g[(m, d - m)] != 0]
        if not targets:
            continue
        g, record = eliminate_terms(g, targets, spec)
        transform = substitute(transform, record.change(n))
        changes.append(record)

    lam = spec.lam
    identical = [g[(m, m - 1)] / lam for m in range(2, (n + 1) // 2 + 1)]
    omega, rho = _twist_split(identical)
    leading = g[(0, 2 * spec.q - 1)]
    frozen = {mon: g[mon] for mon in frozen_terms_up_to(n, spec)}

    flags = {
        'g1': abs(omega[0]) < degeneracy_tol if omega else True,
        'leading_nonidentical': abs(leading) < degeneracy_tol,
        'dissipation': any(abs(x) > degeneracy_tol for x in rho),
    }
    if flags['g1'] or flags['leading_nonidentical']:
        logging.warning(f'Degenerate normal form for {spec.p}:{spec.q}: {flags}')
    if flags['dissipation']:
        logging.warning('Identical resonances carry a non-conservative real part')
    logging.info(f'Normal form {spec.p}:{spec.q} computed to degree {n} '
                 f'with {len(changes)} change(s)')

    return NormalFormResult(
        normalized_map=g,
        omega_coeffs=omega,
        leading_nonidentical=leading,
        transform=transform,
        spec=spec,
        symmetric=bool(symmetric),
        identical_resonances=identical,
        dissipation_coeffs=rho,
        frozen_terms=frozen,
        degeneracy_flags=flags,
        changes=changes,
    )


def conjugacy_defect(f: TruncatedSeries, result: NormalFormResult,
                     extra_degrees: int = 3) -> TruncatedSeries:
    """ f o Psi - Psi o f_nf with rounding noise below the bound removed. """
    n = f.max_degree
    m = n + extra_degrees
    fl = f.with_max_degree(m)
    psi = result.transform.with_max_degree(m)
    nf = result.normalized_map.with_max_degree(m)
    defect = substitute(fl, psi) - substitute(psi, nf)
    scale = max(1.0, max((abs(c) for c in f.coeffs.values()), default=1.0))
    return defect.chop(NOISE_FLOOR * scale, up_to_degree=n)


def conjugacy_order(f: TruncatedSeries, result: NormalFormResult,
                    radii=DEFAULT_RADII, rng: np.random.Generator | None = None) -> float:
    return fitted_order(conjugacy_defect(f, result), radii, rng=rng)


def random_map(spec: ResonanceSpec, max_degree: int | None, rng: np.random.Generator,
               symmetric: bool = True, scale: float = 1.0) -> TruncatedSeries:
    """ lam z plus random complex monomials of degree 2..max_degree. """
    n = max_degree or spec.default_degree
    coeffs = {(1, 0): spec.lam}
    for d in range(2, n + 1):
        if symmetric and d % 2 == 0:
            continue
        for m in range(d + 1):
            coeffs[(m, d - m)] = scale * complex(*rng.normal(size=2))
    return TruncatedSeries(coeffs, n)


# --- Flow embedding ---

def embed_rotated(map_nf: NormalFormResult | TruncatedSeries,
                  spec: ResonanceSpec | None = None,
                  refine: bool = False) -> EmbeddedFlow:
    """ Vector field for the rotated normal form f o R.

    field: conj(lam) times the nonlinear part (time-1 map agrees to leading
    order). refined: the vector-field logarithm of f o R, whose time-1 map
    agrees through max_degree. field_q is field scaled by q, the embedding
    of f^q.
    """
    if isinstance(map_nf, NormalFormResult):
        g, spec = map_nf.normalized_map, spec or map_nf.spec
    else:
        g = map_nf
    if spec is None:
        raise DomainError('A resonance spec is required to embed a bare series')
    _check_linear_part(g, spec)
    stray = [mon for mon in g.nonlinear().support()
             if not is_resonant(*mon, spec)]
    if stray:
        raise DomainError(f'non-resonant monomial present: {stray[0]}')

    nu_inv = spec.lam.conjugate()
    field = g.nonlinear().scale(nu_inv)
    refined = None
    if refine:
        rotated = g.scale(nu_inv).without([(1, 0)]) + \
            TruncatedSeries.identity(g.max_degree)
        refined = flow_log(rotated)
        stray = [mon for mon in refined.support() if not is_resonant(*mon, spec)]
        if stray:
            raise DomainError(f'Refined field left the resonant set at {stray[0]}')
    return EmbeddedFlow(field=field, field_q=field.scale(spec.q), spec=spec,
                        refined=refined)


def flow_params_from_embedding(embedded: EmbeddedFlow, mu1: float = 0.0,
                               mu2: float = 0.0, n_phi: int = 2,
                               model: FlowModel | None = None) -> FlowParams:
    """ Read (l_j, alpha, theta) off an embedded field. """
    field = embedded.refined if embedded.refined is not None else embedded.field
    q = embedded.spec.q
    phi = []
    for j in range(1, n_phi + 1):
        c = field[(j + 1, j)]
        if abs(c.real) > DEFAULTS['degeneracy_tol']:
            logging.warning(f'l{j} has a real part {c.real:.3g}; dropped')
        phi.append(c.imag)
    delta = field[(0, 2 * q - 1)]
    if abs(delta) < DEFAULTS['degeneracy_tol'] or abs(phi[0]) < DEFAULTS['degeneracy_tol']:
        raise DomainError('Degenerate normal form: l1 or alpha vanishes')
    if model is None:
        model = FlowModel.SymBreakConservative if mu2 else FlowModel.Symmetric
    return FlowParams(model=model, q=q, mu1=mu1, mu2=mu2, phi_coeffs=tuple(phi),
                      alpha=abs(delta), theta=float(np.angle(delta)))
