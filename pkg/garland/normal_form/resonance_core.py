import cmath
import math
from dataclasses import dataclass, field

from gkit.errors import DomainError, SchemaError
from garland.series.series_core import Monomial, TruncatedSeries

MIN_Q = 3
MAX_Q = 13


@dataclass(frozen=True)
class ResonanceSpec:
    """ A p:q resonance with eigenvalue lam = exp(2 pi i p / q). """

    p: int
    q: int
    symmetric: bool | None = None

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if q % 2 == 0:
            raise DomainError(
                f'q={q} is even; only odd q (strong resonances excluded) are supported')
        if not MIN_Q <= q <= MAX_Q:
            raise DomainError(f'q={q} outside the supported range {MIN_Q}..{MAX_Q}')
        if not 0 < p < q:
            raise DomainError(f'p={p} must satisfy 0 < p < q={q}')
        if math.gcd(p, q) != 1:
            raise DomainError(f'p={p} and q={q} are not coprime')
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'q', q)

    @property
    def lam(self) -> complex:
        return cmath.exp(2j * math.pi * self.p / self.q)

    @property
    def phase(self) -> float:
        return 2 * math.pi * self.p / self.q

    @property
    def resonance_gap(self) -> float:
        """ Smallest |lam^m conj(lam)^k - lam| over non-resonant (m, k). """
        return 2 * math.sin(math.pi / self.q)

    @property
    def default_degree(self) -> int:
        return 2 * self.q + 1

    def to_json(self) -> dict:
        return {'p': self.p, 'q': self.q, 'symmetric': self.symmetric}

    @staticmethod
    def from_json(d: dict, pointer: str = '') -> "ResonanceSpec":
        for key in ('p', 'q'):
            if key not in d:
                raise SchemaError('Missing field', f'{pointer}/{key}')
        sym = d.get('symmetric')
        return ResonanceSpec(int(d['p']), int(d['q']),
                             None if sym is None else bool(sym))


@dataclass
class EliminationRecord:
    """ One near-identity change z = w + sum C w^m (w*)^k at a single degree. """
    degree: int
    coefficients: dict[Monomial, complex]
    divisors: dict[Monomial, complex]

    def change(self, max_degree: int) -> TruncatedSeries:
        return TruncatedSeries({(1, 0): 1.0, **self.coefficients}, max_degree)

    def to_json(self) -> dict:
        return {
            'degree': self.degree,
            'coefficients': [
                {'m': m, 'k': k, 're': c.real, 'im': c.imag}
                for (m, k), c in sorted(self.coefficients.items())],
        }


@dataclass
class NormalFormResult:
    normalized_map: TruncatedSeries
    omega_coeffs: list[float]
    leading_nonidentical: complex
    transform: TruncatedSeries
    spec: ResonanceSpec
    symmetric: bool
    identical_resonances: list[complex] = field(default_factory=list)
    dissipation_coeffs: list[float] = field(default_factory=list)
    frozen_terms: dict[Monomial, complex] = field(default_factory=dict)
    degeneracy_flags: dict[str, bool] = field(default_factory=dict)
    changes: list[EliminationRecord] = field(default_factory=list)
    conjugacy_order: float | None = None

    @property
    def degenerate(self) -> bool:
        return bool(self.degeneracy_flags.get('g1')
                    or self.degeneracy_flags.get('leading_nonidentical'))

    def to_json(self) -> dict:
        return {
            'spec': self.spec.to_json(),
            'symmetric': self.symmetric,
            'normalized_map': self.normalized_map.to_json(),
            'transform': self.transform.to_json(),
            'omega_coeffs': list(self.omega_coeffs),
            'dissipation_coeffs': list(self.dissipation_coeffs),
            'identical_resonances': [
                {'re': c.real, 'im': c.imag} for c in self.identical_resonances],
            'leading_nonidentical': {
                're': self.leading_nonidentical.real,
                'im': self.leading_nonidentical.imag},
            'frozen_terms': [
                {'m': m, 'k': k, 're': c.real, 'im': c.imag}
                for (m, k), c in sorted(self.frozen_terms.items(),
                                        key=lambda t: (sum(t[0]), t[0][0]))],
            'degeneracy_flags': dict(self.degeneracy_flags),
            'conjugacy_order': self.conjugacy_order,
        }


@dataclass
class EmbeddedFlow:
    """ Vector fields whose time-1 maps embed the rotated normal form. """
    field: TruncatedSeries
    field_q: TruncatedSeries
    spec: ResonanceSpec
    refined: TruncatedSeries | None = None

    def to_json(self) -> dict:
        return {
            'spec': self.spec.to_json(),
            'field': self.field.to_json(),
            'field_q': self.field_q.to_json(),
            'refined': None if self.refined is None else self.refined.to_json(),
        }
