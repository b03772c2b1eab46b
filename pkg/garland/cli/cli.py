""" Command-line driver: normalize, embed, garland, atlas, orbit, portrait.

Every run writes its artifacts plus manifest.json into --out and returns an
exit status: 0 success, 1 configuration or schema error, 2 domain error,
3 solver failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

import gkit
from gkit.errors import ConfigurationError, DomainError, GarlandError, SchemaError
from gkit.logging_setup import set_level
from gkit.utils import (TOLERANCE_KEYS, check_tolerance, load_config, make_rng,
                        thread_count)
from garland.atlas.atlas_core import CURVE_COLUMNS, GRID_COLUMNS
from garland.atlas.bifurcation_atlas import atlas_sweep
from garland.cli import render
from garland.cli.io_manager import ArtifactIOManager
from garland.equilibria.equilibria_garlands import assemble_garland, find_equilibria
from garland.flows.flow_core import FlowModel, FlowParams, PolarState
from garland.flows.flow_models import (divergence, hamiltonian_z,
                                       integrate_many, is_hamiltonian)
from garland.maps.map_dynamics import (embedding_residual, find_periodic_orbits,
                                       flow_seeds, normal_form_map,
                                       symmetry_pairing)
from garland.maps.orbit_core import SeedingPolicy
from garland.normal_form.normal_form import (conjugacy_order, embed_rotated,
                                             flow_params_from_embedding,
                                             normalize, random_map)
from garland.normal_form.resonance_core import NormalFormResult, ResonanceSpec

SUBCOMMANDS = ('normalize', 'embed', 'garland', 'atlas', 'orbit', 'portrait')
FORMATS = ('json', 'csv', 'svg')

EQUILIBRIA_COLUMNS = ['index', 'x', 'y', 'r', 'psi', 'kind', 'divergence',
                      'symmetry', 'reversible', 'hamiltonian']
ORBIT_COLUMNS = ['orbit', 'point', 'x', 'y', 'kind']
TRAJECTORY_COLUMNS = ['t', 'x', 'y', 'r', 'psi', 'H', 'div']

DEFAULT_WINDOW = (-0.02, 0.02, -0.02, 0.02)
DEFAULT_RESOLUTION = 64
DEFAULT_MU = -0.01
DEFAULT_T_END = 100.0


@dataclass
class RunConfig:
    subcommand: str
    input_path: Path | None = None
    output_dir: Path = Path('out')
    seed: int | None = 0
    format: str | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    window: tuple[float, float, float, float] = DEFAULT_WINDOW
    resolution: int = DEFAULT_RESOLUTION
    q: int = 3
    p: int = 1
    model: str | None = None
    mu: tuple[float, float] | None = None
    radius: float | None = None
    period: int | None = None
    t_end: float | None = None
    params_path: Path | None = None
    max_degree: int | None = None
    refine: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigurationError(f'Unknown subcommand {self.subcommand!r}')
        if self.format is not None and self.format not in FORMATS:
            raise ConfigurationError(f'Unknown format {self.format!r}')
        for name, value in self.tolerances.items():
            check_tolerance(name, value)

    def wants(self, kind: str) -> bool:
        """ json and csv are both written unless one format is picked; svg adds both. """
        if self.format is None or self.format == 'svg':
            return kind != 'svg' or self.format == 'svg'
        return kind == self.format

    def echo(self) -> dict:
        out = asdict(self)
        for key in ('input_path', 'output_dir', 'params_path'):
            out[key] = None if out[key] is None else Path(out[key]).as_posix()
        out['window'] = list(self.window)
        out['mu'] = None if self.mu is None else list(self.mu)
        return out


# --- Shared helpers ---

def _settings(config: RunConfig) -> dict:
    """ Config file merged with CLI tolerance overrides. """
    settings = load_config()
    settings.update(config.tolerances)
    for key in TOLERANCE_KEYS:
        check_tolerance(key, settings[key])
    settings['threads'] = thread_count(settings)
    if config.radius is not None:
        settings['validity_radius'] = float(config.radius)
    return settings


def _find_kwargs(settings: dict) -> dict:
    return {
        'radius': settings['validity_radius'],
        'tol': settings['newton_tol'],
        'max_iter': settings['newton_max_iter'],
        'dedup_radius': settings['dedup_radius'],
    }


def _flag_params(config: RunConfig, default_model: FlowModel) -> FlowParams:
    model = FlowModel(config.model) if config.model else default_model
    mu1, mu2 = config.mu if config.mu is not None else (DEFAULT_MU, 0.0)
    if model is FlowModel.Symmetric:
        mu2 = 0.0
    return FlowParams(model=model, q=config.q, mu1=mu1, mu2=mu2)


def _params(config: RunConfig, default_model: FlowModel) -> tuple[FlowParams, dict]:
    if config.input_path is None:
        return _flag_params(config, default_model), {}
    doc = ArtifactIOManager.read_document(config.input_path, 'params')
    params = ArtifactIOManager.parse_params(doc)
    if config.mu is not None:
        params = params.with_mu(*config.mu)
    return params, doc


def _map_input(config: RunConfig):
    """ (series, spec, document) from --input, or a seeded random map. """
    if config.input_path is None:
        spec = ResonanceSpec(config.p, config.q, True)
        rng = make_rng(config.seed)
        f = random_map(spec, config.max_degree, rng, symmetric=True, scale=0.5)
        logging.info(f'No input map; random symmetric {spec.p}:{spec.q} map '
                     f'from seed {config.seed}')
        return f, spec, {}
    doc = ArtifactIOManager.read_document(config.input_path, 'map')
    f, spec = ArtifactIOManager.parse_map(doc)
    if config.max_degree is not None:
        f = f.with_max_degree(config.max_degree)
    return f, spec, doc


# --- Subcommands ---

def _degeneracy_status(result: NormalFormResult) -> int:
    """ 2 when g1 or the leading nonidentical coefficient vanishes. """
    if not result.degenerate:
        return 0
    flags = [k for k in ('g1', 'leading_nonidentical') if result.degeneracy_flags.get(k)]
    logging.warning(f'Degenerate normal form ({", ".join(flags)}), report written anyway')
    return DomainError.exit_code


def cmd_normalize(config: RunConfig, io: ArtifactIOManager, settings: dict) -> int:
    f, spec, _ = _map_input(config)
    result = normalize(f, spec, degeneracy_tol=settings['degeneracy_tol'])
    result.conjugacy_order = conjugacy_order(f, result, rng=make_rng(config.seed))
    io.write_json('normal_form.json', {'schema': gkit.__schema__, **result.to_json()})
    return _degeneracy_status(result)


def cmd_embed(config: RunConfig, io: ArtifactIOManager, settings: dict) -> int:
    f, spec, _ = _map_input(config)
    result = normalize(f, spec, degeneracy_tol=settings['degeneracy_tol'])
    embedded = embed_rotated(result, refine=config.refine)
    exported = embedded.refined if embedded.refined is not None else embedded.field
    residual = embedding_residual(result.normalized_map, spec, field=exported)
    mu1, mu2 = config.mu if config.mu is not None else (0.0, 0.0)
    params = flow_params_from_embedding(embedded, mu1=mu1, mu2=mu2)
    io.write_json('embedding.json', {
        'schema': gkit.__schema__,
        **embedded.to_json(),
        'flow_params': params.to_json(),
        'residual': residual.to_json(),
        'degeneracy_flags': dict(result.degeneracy_flags),
    })
    return _degeneracy_status(result)


def cmd_garland(config: RunConfig, io: ArtifactIOManager, settings: dict) -> None:
    params, _ = _params(config, FlowModel.Symmetric)
    eqs = find_equilibria(params, **_find_kwargs(settings))
    garland = assemble_garland(eqs, params)
    logging.info(f'{len(eqs)} equilibria, garland {garland.label.value}')

    if config.wants('json'):
        io.write_json('garland.json', {'schema': gkit.__schema__,
                                       'params': params.to_json(),
                                       **garland.to_json()})
    if config.wants('csv'):
        rows = [{'index': i, 'x': e.z.real, 'y': e.z.imag, 'r': e.state.r,
                 'psi': e.state.psi, 'kind': e.kind.value,
                 'divergence': e.divergence, 'symmetry': e.symmetry.value,
                 'reversible': int(e.reversible), 'hamiltonian': e.hamiltonian}
                for i, e in enumerate(garland.equilibria)]
        io.write_csv('equilibria.csv', EQUILIBRIA_COLUMNS, rows)
    if config.wants('svg'):
        io.register(render.render_garland(garland, io.output_dir / 'garland.svg'))


def cmd_atlas(config: RunConfig, io: ArtifactIOManager, settings: dict) -> None:
    params, _ = _params(config, FlowModel.SymBreakConservative)
    atlas = atlas_sweep(config.window, config.resolution, params,
                        threads=settings['threads'], **_find_kwargs(settings))
    if config.wants('csv'):
        io.write_csv('atlas_grid.csv', GRID_COLUMNS, atlas.grid_rows())
        io.write_csv('atlas_curves.csv', CURVE_COLUMNS, atlas.curve_rows())
    if config.wants('json'):
        io.write_json('atlas.json', {'schema': gkit.__schema__, **atlas.to_json()})
    if config.wants('svg'):
        io.register(render.render_atlas(atlas, io.output_dir / 'atlas.svg'))


def _orbit_params(config: RunConfig, doc: dict) -> FlowParams | None:
    if config.params_path is not None:
        pdoc = ArtifactIOManager.read_document(config.params_path, 'params')
        return ArtifactIOManager.parse_params(pdoc)
    if 'params' in doc:
        return FlowParams.from_json(doc['params'], '/params')
    return None


def cmd_orbit(config: RunConfig, io: ArtifactIOManager, settings: dict) -> None:
    if config.input_path is None:
        raise ConfigurationError('orbit needs --input with a map document')
    doc = ArtifactIOManager.read_document(config.input_path, 'map')
    params = _orbit_params(config, doc)

    if 'map' in doc:
        f, spec = ArtifactIOManager.parse_map(doc)
    elif params is not None:
        spec = ResonanceSpec.from_json(doc)
        f = normal_form_map(params, spec.p, config.max_degree)
    else:
        raise SchemaError('Need a map series or flow params', '/map')
    if params is not None and params.q != spec.q:
        raise ConfigurationError(f'params q={params.q} does not match map q={spec.q}')

    radius = config.radius if config.radius is not None else SeedingPolicy.radius
    seeds = SeedingPolicy(radius=radius)
    if params is not None:
        seeds.flow_seeds = flow_seeds(params, **_find_kwargs(settings))
    else:
        logging.warning('No flow params given; blind seeding only')

    period = config.period or spec.q
    orbits = find_periodic_orbits(f, period, seeds, tol=settings['newton_tol'],
                                  max_iter=settings['newton_max_iter'],
                                  orbit_tol=settings['orbit_tol'])
    symmetric = spec.symmetric if spec.symmetric is not None else True
    garland = symmetry_pairing(orbits, symmetric_map=symmetric,
                               tol=settings['orbit_tol'])

    if config.wants('json'):
        io.write_json('orbits.json', {'schema': gkit.__schema__, 'period': period,
                                      'spec': spec.to_json(), **garland.to_json()})
    if config.wants('csv'):
        rows = [{'orbit': i, 'point': j, 'x': z.real, 'y': z.imag,
                 'kind': o.kind.value}
                for i, o in enumerate(garland.orbits)
                for j, z in enumerate(o.points)]
        io.write_csv('orbit_points.csv', ORBIT_COLUMNS, rows)
    if config.wants('svg'):
        io.register(render.render_orbits(garland, io.output_dir / 'orbits.svg'))


def _trajectory_rows(params: FlowParams, traj) -> list[dict]:
    H = (hamiltonian_z(params, traj.z) if is_hamiltonian(params)
         else np.full(traj.t.shape, math.nan))
    div = divergence(params, traj.z)
    rows = []
    for t, z, h, d in zip(traj.t, traj.z, np.atleast_1d(H), np.atleast_1d(div)):
        s = PolarState.from_z(complex(z))
        rows.append({'t': float(t), 'x': z.real, 'y': z.imag, 'r': s.r,
                     'psi': s.psi, 'H': float(h), 'div': float(d)})
    return rows


def cmd_portrait(config: RunConfig, io: ArtifactIOManager, settings: dict) -> None:
    params, doc = _params(config, FlowModel.Symmetric)
    z0s = ArtifactIOManager.parse_initial_conditions(doc)
    if not z0s:
        rng = make_rng(config.seed)
        radius = 0.5 * settings['validity_radius']
        z0s = list(radius * np.sqrt(rng.uniform(size=12))
                   * np.exp(2j * np.pi * rng.uniform(size=12)))
    t_end = (config.t_end if config.t_end is not None
             else float(doc.get('t_end', DEFAULT_T_END)))

    trajectories = integrate_many(params, z0s, t_end, tol=settings['ode_tol'],
                                  radius=settings['validity_radius'])
    if config.wants('csv'):
        for i, traj in enumerate(trajectories):
            io.write_csv(f'trajectory_{i:03d}.csv', TRAJECTORY_COLUMNS,
                         _trajectory_rows(params, traj))
    if config.wants('json'):
        io.write_json('portrait.json', {
            'schema': gkit.__schema__,
            'params': params.to_json(),
            't_end': t_end,
            'trajectories': [{'z0': [complex(z0).real, complex(z0).imag],
                              'samples': len(traj.t), 'escaped': traj.escaped,
                              'notes': traj.notes}
                             for z0, traj in zip(z0s, trajectories)],
        })
    if config.wants('svg'):
        garland = None
        if params.nondegenerate:
            garland = assemble_garland(
                find_equilibria(params, **_find_kwargs(settings)), params)
        io.register(render.render_portrait(trajectories,
                                           io.output_dir / 'portrait.svg', garland))


COMMANDS = {
    'normalize': cmd_normalize,
    'embed': cmd_embed,
    'garland': cmd_garland,
    'atlas': cmd_atlas,
    'orbit': cmd_orbit,
    'portrait': cmd_portrait,
}


def run(config: RunConfig) -> int:
    """ Execute one subcommand; returns the process exit status. """
    start = time.perf_counter()
    io = ArtifactIOManager(config.output_dir)
    try:
        settings = _settings(config)
        status = COMMANDS[config.subcommand](config, io, settings) or 0
    except GarlandError as e:
        logging.error(f'{config.subcommand} failed: {e}')
        return e.exit_code
    except Exception:
        logging.exception(f'{config.subcommand} failed unexpectedly')
        return 3
    io.write_manifest(config.echo(), time.perf_counter() - start)
    return status


# --- Argument parsing ---

def _floats(text: str, n: int) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected {n} comma-separated numbers')
    if len(values) != n:
        raise argparse.ArgumentTypeError(f'expected {n} comma-separated numbers')
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='garland',
        description='Normal forms, garlands and atlases of odd p:q resonances')
    parser.add_argument('--version', action='version',
                        version=f'{gkit.__title__} {gkit.__version__}')
    parser.add_argument('--log-level', default=None,
                        help='DEBUG, INFO, WARNING or ERROR')
    sub = parser.add_subparsers(dest='subcommand', required=True)

    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument('--input', type=Path, default=None)
        p.add_argument('--out', type=Path, default=Path('out'))
        p.add_argument('--seed', type=int, default=0)
        p.add_argument('--format', choices=FORMATS, default=None)
        p.add_argument('--q', type=int, default=3)
        p.add_argument('--p', type=int, default=1)
        p.add_argument('--model', choices=[m.value for m in FlowModel], default=None)
        p.add_argument('--mu', type=lambda s: _floats(s, 2), default=None,
                       help='mu1,mu2')
        p.add_argument('--tol-newton', type=float, default=None)
        p.add_argument('--tol-ode', type=float, default=None)
        p.add_argument('--radius', type=float, default=None)
        p.add_argument('--max-degree', type=int, default=None)
        if name == 'embed':
            p.add_argument('--refine', action='store_true')
        if name == 'atlas':
            p.add_argument('--window', type=lambda s: _floats(s, 4),
                           default=DEFAULT_WINDOW,
                           help='mu1_min,mu1_max,mu2_min,mu2_max')
            p.add_argument('--resolution', type=int, default=DEFAULT_RESOLUTION)
        if name == 'orbit':
            p.add_argument('--period', type=int, default=None)
            p.add_argument('--params', type=Path, default=None)
        if name == 'portrait':
            p.add_argument('--t-end', type=float, default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    tolerances = {}
    if args.tol_newton is not None:
        tolerances['newton_tol'] = args.tol_newton
    if args.tol_ode is not None:
        tolerances['ode_tol'] = args.tol_ode
    return RunConfig(
        subcommand=args.subcommand,
        input_path=args.input,
        output_dir=args.out,
        seed=args.seed,
        format=args.format,
        tolerances=tolerances,
        window=getattr(args, 'window', DEFAULT_WINDOW),
        resolution=getattr(args, 'resolution', DEFAULT_RESOLUTION),
        q=args.q,
        p=args.p,
        model=args.model,
        mu=args.mu,
        radius=args.radius,
        period=getattr(args, 'period', None),
        t_end=getattr(args, 't_end', None),
        params_path=getattr(args, 'params', None),
        max_degree=args.max_degree,
        refine=getattr(args, 'refine', False),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.log_level:
            set_level(args.log_level)
        config = config_from_args(args)
    except GarlandError as e:
        logging.error(str(e))
        return e.exit_code
    return run(config)
