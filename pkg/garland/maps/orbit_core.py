from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class OrbitKind(str, Enum):
    Elliptic = 'Elliptic'
    SaddleMap = 'SaddleMap'
    SinkMap = 'SinkMap'
    SourceMap = 'SourceMap'
    NonConsSaddle = 'NonConsSaddle'
    Degenerate = 'Degenerate'


class MapGarlandLabel(str, Enum):
    G11_qq = 'G11_qq'
    G22_qq = 'G22_qq'
    G_prime_2q_q_q_map = 'G_prime_2q_q_q_map'
    none = 'None'


@dataclass
class Iterates:
    """ Orbit segment [z0, f(z0), ..., f^n(z0)], cut short on escape. """
    points: np.ndarray
    escaped: bool = False


@dataclass
class PeriodicOrbit:
    points: list[complex]
    multipliers: tuple[complex, complex] = (0j, 0j)
    kind: OrbitKind = OrbitKind.Degenerate
    jacobian_det: float = 1.0
    trace: float = 0.0
    partner: int | None = None
    partner_kind: str | None = None
    seeded_by: tuple[str, ...] = ()
    closure: float = 0.0

    @property
    def period(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {
            'points': [{'x': z.real, 'y': z.imag} for z in self.points],
            'multipliers': [{'re': m.real, 'im': m.imag} for m in self.multipliers],
            'kind': self.kind.value,
            'jacobian_det': self.jacobian_det,
            'trace': self.trace,
            'partner': self.partner,
            'partner_kind': self.partner_kind,
            'seeded_by': list(self.seeded_by),
            'closure': self.closure,
        }


@dataclass
class MapGarland:
    orbits: list[PeriodicOrbit]
    label: MapGarlandLabel = MapGarlandLabel.none
    pairs: list[tuple[int, int, str]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            'label': self.label.value,
            'orbits': [o.to_json() for o in self.orbits],
            'pairs': [{'i': i, 'j': j, 'kind': kind} for i, j, kind in self.pairs],
            'diagnostics': list(self.diagnostics),
        }


@dataclass
class SeedingPolicy:
    """ Flow-informed seeds (equilibria pushed through transform) plus a blind grid. """
    flow_seeds: list[complex] = field(default_factory=list)
    blind: bool = True
    radius: float = 0.2
    n_angles: int = 24
    n_radii: int = 8

    def blind_seeds(self) -> np.ndarray:
        angles = 2 * np.pi * np.arange(self.n_angles) / self.n_angles
        radii = np.linspace(self.radius / self.n_radii, self.radius, self.n_radii)
        return (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()


@dataclass
class EmbeddingResidual:
    order_rotated: float
    order_qscaled: float

    def to_json(self) -> dict:
        return {'order_rotated': self.order_rotated,
                'order_qscaled': self.order_qscaled}
