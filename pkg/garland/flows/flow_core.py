import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from gkit.errors import DomainError, SchemaError

TWO_PI = 2 * math.pi


class FlowModel(str, Enum):
    Symmetric = 'Symmetric'
    SymBreakConservative = 'SymBreakConservative'
    ReversibleNonCons = 'ReversibleNonCons'


@dataclass(frozen=True)
class FlowParams:
    """ Real data selecting one truncated flow normal form.

    The field is
        z' = i mu1 z + i Phi(|z|^2) z + i mu2 (z*)^(q-1)
             + i A mu2 z^(q+1) + i B mu2 z (z*)^q + alpha e^(i theta) (z*)^(2q-1)
    with Phi(r) = l1 r + l2 r^2 + ...; mu2, A, B vanish in the Symmetric model
    and A, B in the SymBreakConservative one.
    """

    model: FlowModel
    q: int
    mu1: float
    mu2: float = 0.0
    phi_coeffs: tuple[float, ...] = (1.0, 0.0)
    alpha: float = 1.0
    theta: float = math.pi / 2
    A: float = 0.0
    B: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'model', FlowModel(self.model))
        object.__setattr__(self, 'q', int(self.q))
        object.__setattr__(self, 'phi_coeffs',
                           tuple(float(c) for c in self.phi_coeffs))
        object.__setattr__(self, 'theta', float(self.theta) % TWO_PI)
        if self.q < 3 or self.q % 2 == 0:
            raise DomainError(f'q={self.q} must be an odd integer >= 3')
        if not self.phi_coeffs:
            raise DomainError('phi_coeffs must contain at least l1')
        if self.model is FlowModel.Symmetric and (self.mu2 or self.A or self.B):
            raise DomainError('Symmetric model requires mu2 = A = B = 0')
        if self.model is FlowModel.SymBreakConservative and (self.A or self.B):
            raise DomainError('SymBreakConservative model requires A = B = 0')

    @property
    def l1(self) -> float:
        return self.phi_coeffs[0]

    @property
    def nondegenerate(self) -> bool:
        return self.l1 != 0 and self.alpha != 0

    @property
    def omega(self) -> float:
        return (self.theta - math.pi / 2) / (2 * self.q)

    @property
    def conservative(self) -> bool:
        return (self.model is not FlowModel.ReversibleNonCons
                or self.mu2 == 0
                or math.isclose(self.B, self.A * (self.q + 1), abs_tol=1e-15))

    def with_mu(self, mu1: float | None = None,
                mu2: float | None = None) -> "FlowParams":
        return replace(self,
                       mu1=self.mu1 if mu1 is None else mu1,
                       mu2=self.mu2 if mu2 is None else mu2)

    def to_json(self) -> dict:
        return {
            'model': self.model.value,
            'q': self.q,
            'mu1': self.mu1,
            'mu2': self.mu2,
            'phi_coeffs': list(self.phi_coeffs),
            'alpha': self.alpha,
            'theta': self.theta,
            'A': self.A,
            'B': self.B,
        }

    @staticmethod
    def from_json(d: dict, pointer: str = '') -> "FlowParams":
        allowed = {'model', 'q', 'mu1', 'mu2', 'mu', 'phi_coeffs', 'alpha',
                   'theta', 'A', 'B'}
        unknown = set(d) - allowed
        if unknown:
            key = sorted(unknown)[0]
            raise SchemaError(f'Unknown field {key!r}', f'{pointer}/{key}')
        for key in ('model', 'q'):
            if key not in d:
                raise SchemaError('Missing field', f'{pointer}/{key}')
        try:
            model = FlowModel(d['model'])
        except ValueError:
            raise SchemaError(f'Unknown model {d["model"]!r}', f'{pointer}/model')
        try:
            return FlowParams(
                model=model,
                q=int(d['q']),
                mu1=float(d.get('mu1', d.get('mu', 0.0))),
                mu2=float(d.get('mu2', 0.0)),
                phi_coeffs=tuple(d.get('phi_coeffs', (1.0, 0.0))),
                alpha=float(d.get('alpha', 1.0)),
                theta=float(d.get('theta', math.pi / 2)),
                A=float(d.get('A', 0.0)),
                B=float(d.get('B', 0.0)),
            )
        except (TypeError, ValueError) as e:
            raise SchemaError(f'Bad parameter value: {e}', pointer or '/')


@dataclass(frozen=True)
class PolarState:
    """ z = sqrt(r) e^(i psi); r is |z|^2. """

    r: float
    psi: float

    def __post_init__(self):
        if self.r < 0:
            raise DomainError(f'r={self.r} is negative')
        object.__setattr__(self, 'psi', float(self.psi) % TWO_PI)

    @property
    def z(self) -> complex:
        return math.sqrt(self.r) * complex(math.cos(self.psi), math.sin(self.psi))

    @staticmethod
    def from_z(z: complex) -> "PolarState":
        return PolarState(abs(z) ** 2, math.atan2(z.imag, z.real))


@dataclass
class Trajectory:
    t: np.ndarray
    z: np.ndarray
    escaped: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def x(self) -> np.ndarray:
        return self.z.real

    @property
    def y(self) -> np.ndarray:
        return self.z.imag
