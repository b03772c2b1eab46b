import math
from dataclasses import dataclass, field, replace
from enum import Enum

from garland.flows.flow_core import PolarState


class EquilibriumKind(str, Enum):
    Saddle = 'Saddle'
    Center = 'Center'
    StableFocus = 'StableFocus'
    UnstableFocus = 'UnstableFocus'
    Degenerate = 'Degenerate'


class SymmetryClass(str, Enum):
    CentrallySymmetricAxis = 'CentrallySymmetricAxis'
    NonSymmetric = 'NonSymmetric'


class GarlandLabel(str, Enum):
    G_qq = 'G_qq'
    G_2q2q = 'G_2q2q'
    G_prime_2q_q_q = 'G_prime_2q_q_q'
    none = 'None'


@dataclass
class Equilibrium:
    state: PolarState
    eigenvalues: tuple[complex, complex] = (0j, 0j)
    kind: EquilibriumKind = EquilibriumKind.Degenerate
    divergence: float = 0.0
    symmetry: SymmetryClass = SymmetryClass.NonSymmetric
    reversible: bool = False
    residual: float = 0.0
    hamiltonian: float = math.nan

    @property
    def z(self) -> complex:
        return self.state.z

    def evolve(self, **changes) -> "Equilibrium":
        return replace(self, **changes)

    def to_json(self) -> dict:
        return {
            'r': self.state.r,
            'psi': self.state.psi,
            'x': self.z.real,
            'y': self.z.imag,
            'eigenvalues': [{'re': ev.real, 'im': ev.imag} for ev in self.eigenvalues],
            'kind': self.kind.value,
            'divergence': self.divergence,
            'symmetry': self.symmetry.value,
            'reversible': self.reversible,
            'residual': self.residual,
            'hamiltonian': None if math.isnan(self.hamiltonian) else self.hamiltonian,
        }


@dataclass
class Garland:
    equilibria: list[Equilibrium]
    label: GarlandLabel = GarlandLabel.none
    pairing: list[tuple[int, int, str]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def census(self) -> dict[str, int]:
        counts = {kind.value: 0 for kind in EquilibriumKind}
        for e in self.equilibria:
            counts[e.kind.value] += 1
        counts['on_axis'] = sum(
            e.symmetry is SymmetryClass.CentrallySymmetricAxis for e in self.equilibria)
        counts['total'] = len(self.equilibria)
        return counts

    def to_json(self) -> dict:
        return {
            'label': self.label.value,
            'equilibria': [e.to_json() for e in self.equilibria],
            'pairing': [{'i': i, 'j': j, 'kind': kind} for i, j, kind in self.pairing],
            'census': self.census(),
            'diagnostics': list(self.diagnostics),
        }


@dataclass
class PitchforkPoint:
    parameter: float
    count_before: int
    count_after: int
    criticality: str = 'unknown'
    newborn_divergences: list[tuple[float, float]] = field(default_factory=list)
    inconclusive: bool = False

    def to_json(self) -> dict:
        return {
            'parameter': self.parameter,
            'count_before': self.count_before,
            'count_after': self.count_after,
            'criticality': self.criticality,
            'newborn_divergences': [list(p) for p in self.newborn_divergences],
            'inconclusive': self.inconclusive,
        }
