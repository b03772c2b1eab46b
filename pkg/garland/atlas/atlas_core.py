from dataclasses import dataclass, field
from enum import Enum

from garland.flows.flow_core import FlowParams


class RegionId(str, Enum):
    I = 'I'
    II = 'II'
    III = 'III'
    IV = 'IV'


class CurveName(str, Enum):
    L_pf = 'L_pf'
    L_pq = 'L_pq'
    L_pf_reversible = 'L_pf_reversible'
    heteroclinic_band = 'heteroclinic_band_heuristic'


GRID_COLUMNS = ['mu1', 'mu2', 'region', 'n_saddle', 'n_center', 'n_focus']
CURVE_COLUMNS = ['curve', 'branch', 'analytic', 'mu1', 'mu2']


@dataclass
class AtlasRegion:
    id: RegionId
    sample_params: FlowParams
    garland_label: str
    census: dict[str, int]
    position_id: RegionId | None = None
    boundary: bool = False
    disagreement: bool = False
    heteroclinic_suspect: bool = False
    notes: list[str] = field(default_factory=list)

    def grid_row(self) -> dict:
        return {
            'mu1': self.sample_params.mu1,
            'mu2': self.sample_params.mu2,
            'region': self.id.value,
            'n_saddle': self.census.get('Saddle', 0),
            'n_center': self.census.get('Center', 0),
            'n_focus': (self.census.get('StableFocus', 0)
                        + self.census.get('UnstableFocus', 0)),
        }

    def to_json(self) -> dict:
        return {
            'id': self.id.value,
            'mu1': self.sample_params.mu1,
            'mu2': self.sample_params.mu2,
            'garland_label': self.garland_label,
            'census': dict(self.census),
            'position_id': None if self.position_id is None else self.position_id.value,
            'boundary': self.boundary,
            'disagreement': self.disagreement,
            'heteroclinic_suspect': self.heteroclinic_suspect,
            'notes': list(self.notes),
        }


@dataclass
class BifurcationCurve:
    name: CurveName
    branch: int
    samples: list[tuple[float, float]]
    analytic: bool
    notes: list[str] = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [{'curve': self.name.value, 'branch': '+' if self.branch > 0 else '-',
                 'analytic': int(self.analytic), 'mu1': m1, 'mu2': m2}
                for m1, m2 in self.samples]

    def to_json(self) -> dict:
        return {
            'name': self.name.value,
            'branch': self.branch,
            'analytic': self.analytic,
            'samples': [list(s) for s in self.samples],
            'notes': list(self.notes),
        }


@dataclass
class AtlasDocument:
    window: tuple[float, float, float, float]
    resolution: int
    params: FlowParams
    regions: list[AtlasRegion]
    curves: list[BifurcationCurve]
    representatives: dict[str, AtlasRegion] = field(default_factory=dict)
    branch_families: dict[str, str] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def grid_rows(self) -> list[dict]:
        return [region.grid_row() for region in self.regions]

    def curve_rows(self) -> list[dict]:
        return [row for curve in self.curves for row in curve.rows()]

    def region_ids(self) -> set[str]:
        return {region.id.value for region in self.regions}

    def to_json(self) -> dict:
        return {
            'window': list(self.window),
            'resolution': self.resolution,
            'params': self.params.to_json(),
            'grid': self.grid_rows(),
            'curves': [c.to_json() for c in self.curves],
            'representatives': {k: v.to_json()
                                for k, v in sorted(self.representatives.items())},
            'branch_families': dict(sorted(self.branch_families.items())),
            'flags': {
                'boundary': sum(r.boundary for r in self.regions),
                'disagreement': sum(r.disagreement for r in self.regions),
                'heteroclinic_suspect': sum(r.heteroclinic_suspect for r in self.regions),
            },
            'notes': list(self.notes),
        }
